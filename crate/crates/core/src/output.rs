//! CSV emission with a `#` provenance header.
//!
//! Floats are written with 17 significant digits so every value round-trips.

use std::io::Write;

use crate::error::{Error, Result};
use crate::figures::Table;
use crate::ledger::Trajectory;
use crate::tol;

pub const CONVENTIONS: [&str; 6] = [
    "units: hbar = 1, k = 1, natural log, 0 ln 0 = 0",
    "dS = S_S(0) - S_S(t) (system entropy decrease); dI, dD, dQ, W are final - initial",
    "residual_landauer = beta*dQ - (dS + dI + dD)",
    "residual_second_law = (W - dF - dE_SB) - (dI + dD)/beta",
    "residual_entropy_increase = d(S_S + S_B) - dI",
    "D = D(rho_B(t) || rho_th), rho_th matched to the bath energy at t = 0",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Provenance lines written above the column header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Self { command: command.into(), config_hash: config_hash.into(), ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    pub fn write(&self, w: &mut dyn Write) -> Result<()> {
        let mut lines = vec![
            format!("command: {}", self.command),
            format!("config_hash: {}", self.config_hash),
            format!("version: {}", env!("CARGO_PKG_VERSION")),
        ];
        if let Some(s) = self.seed {
            lines.push(format!("seed: {s}"));
        }
        lines.extend(self.extra.iter().map(|(k, v)| format!("{k}: {v}")));
        lines.push(format!(
            "tolerances: identity = {:e}, inequality_slack = {:e}, condition = {:e}, trace = {:e}, thermal_tail = {:e}, fock_edge = {:e}",
            tol::IDENTITY_TOL,
            tol::INEQUALITY_SLACK,
            tol::CONDITION_TOL,
            tol::TRACE_TOL,
            tol::THERMAL_TAIL_TOL,
            tol::FOCK_EDGE_TOL
        ));
        lines.extend(CONVENTIONS.iter().map(|c| format!("convention: {c}")));
        for l in lines {
            writeln!(w, "# {l}").map_err(io)?;
        }
        Ok(())
    }
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("write failed: {e}"))
}

fn write_rows<I, R>(w: &mut dyn Write, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(io)?;
    for r in rows {
        out.write_record(r).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_table(w: &mut dyn Write, meta: &Metadata, table: &Table) -> Result<()> {
    meta.write(w)?;
    write_rows(w, &table.columns, table.rows.iter().map(|r| r.iter().map(|&x| fmt_f64(x))))
}

pub const TRAJECTORY_COLUMNS: [&str; 19] = [
    "t",
    "s_system",
    "s_bath",
    "s_joint",
    "i",
    "d_bath",
    "q",
    "w_total",
    "w_system_term",
    "w_heat",
    "w_interaction_term",
    "f_system",
    "residual_landauer",
    "residual_second_law",
    "residual_entropy_increase",
    "product",
    "thermal_equilibrium",
    "weak_coupling",
    "bath_edge_population",
];

/// One row per record; condition flags are written as `0`/`1`.
pub fn write_trajectory(w: &mut dyn Write, meta: &Metadata, traj: &Trajectory) -> Result<()> {
    let meta = meta.clone().with("beta", fmt_f64(traj.beta())).with("records", traj.len());
    meta.write(w)?;
    let header: Vec<String> = TRAJECTORY_COLUMNS.iter().map(|s| s.to_string()).collect();
    let flag = |b: bool| u8::from(b).to_string();
    write_rows(
        w,
        &header,
        traj.records().iter().map(|r| {
            let mut row: Vec<String> = [
                r.t,
                r.s_system,
                r.s_bath,
                r.s_joint,
                r.i,
                r.d_bath,
                r.q,
                r.w.total_work,
                r.w.system_term,
                r.w.heat,
                r.w.interaction_term,
                r.f_system,
                r.residual_landauer,
                r.residual_second_law,
                r.residual_entropy_increase,
            ]
            .iter()
            .map(|&x| fmt_f64(x))
            .collect();
            row.extend([flag(r.conditions.product), flag(r.conditions.thermal_equilibrium), flag(r.conditions.weak_coupling)]);
            row.push(fmt_f64(r.bath_edge_population));
            row
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, std::f64::consts::PI * 1e200, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn table_with_header() {
        let t = Table { columns: vec!["x".into(), "y".into()], rows: vec![vec![0.0, 1.0], vec![0.5, -2.0]] };
        let mut buf = Vec::new();
        write_table(&mut buf, &Metadata::new("fig1", "abc").with_seed(7), &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.contains(&"# command: fig1"));
        assert!(lines.contains(&"# seed: 7"));
        let body: Vec<&str> = lines.iter().copied().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["x,y", "0.0000000000000000e0,1.0000000000000000e0", "5.0000000000000000e-1,-2.0000000000000000e0"]);
    }
}
