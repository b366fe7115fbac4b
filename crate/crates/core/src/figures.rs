//! Tables for the four figure commands.

use crate::entropy::correlation_information;
use crate::error::{Error, Result};
use crate::jc::{initial_state, simulate, JCParams, JCRun};
use crate::ledger::flux_series;
use crate::operator::Partition;
use crate::par::{try_map_indexed, Execution};

/// Columns of floats; the first column is the abscissa.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

impl Figure {
    /// Default panels.
    pub fn default_xis(self) -> &'static [f64] {
        match self {
            Figure::Fig1 => &[],
            Figure::Fig2 | Figure::Fig4 => &[0.5, 0.71],
            Figure::Fig3 => &[0.71],
        }
    }

    fn value_name(self) -> &'static str {
        match self {
            Figure::Fig1 => "mutual_information_nats",
            Figure::Fig2 => "di_dt",
            Figure::Fig3 => "di_dt_plus_dd_dt",
            Figure::Fig4 => "delta_d",
        }
    }
}

/// Initial correlation against `|ξ|` on `points` equally spaced values in `[0, 1]`.
pub fn fig1(p: &JCParams, points: usize, exec: Execution) -> Result<Table> {
    if points < 2 {
        return Err(Error::Parameter(format!("fig1 needs at least 2 points, got {points}")));
    }
    let partition = Partition::bipartite(2, p.fock_dim())?;
    let rows = try_map_indexed(exec, points, |k| -> Result<Vec<f64>> {
        let x = k as f64 / (points - 1) as f64;
        let rho = initial_state(&p.with_xi(x))?;
        Ok(vec![x, correlation_information(&rho, &partition)?])
    })?;
    Ok(Table { columns: vec!["xi_abs".into(), Figure::Fig1.value_name().into()], rows })
}

/// Time series of the figure's quantity, one value column per `ξ`.
pub fn time_series(fig: Figure, p: &JCParams, xis: &[f64], exec: Execution) -> Result<Table> {
    if fig == Figure::Fig1 {
        return Err(Error::Parameter("fig1 is not a time series".into()));
    }
    if xis.is_empty() {
        return Err(Error::Parameter("at least one xi is required".into()));
    }
    // panels run one after another; each trajectory is parallel inside
    let runs = xis.iter().map(|&x| simulate(&p.with_xi(x), exec)).collect::<Result<Vec<JCRun>>>()?;
    let mut cols = Vec::with_capacity(xis.len());
    for run in &runs {
        let recs = run.trajectory.records();
        let col: Vec<f64> = match fig {
            Figure::Fig2 => flux_series(&run.trajectory)?.iter().map(|f| f.di).collect(),
            Figure::Fig3 => flux_series(&run.trajectory)?.iter().map(|f| f.di + f.dd).collect(),
            _ => recs.iter().map(|r| r.d_bath - recs[0].d_bath).collect(),
        };
        cols.push(col);
    }
    let times: Vec<f64> = runs[0].trajectory.records().iter().map(|r| r.t).collect();
    let mut columns = vec!["t".to_string()];
    for &x in xis {
        columns.push(if xis.len() == 1 { fig.value_name().to_string() } else { format!("{}_xi_{x}", fig.value_name()) });
    }
    let rows = times
        .iter()
        .enumerate()
        .map(|(k, &t)| std::iter::once(t).chain(cols.iter().map(|c| c[k])).collect())
        .collect();
    Ok(Table { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::binary_entropy;

    #[test]
    fn fig1_curve_and_peak() {
        let t = fig1(&JCParams::default(), 201, Execution::default()).unwrap();
        assert_eq!(t.rows.len(), 201);
        assert_eq!(t.rows[0], vec![0.0, 0.0]);
        for r in &t.rows {
            assert!((r[1] - 2.0 * binary_entropy(r[0] * r[0])).abs() < 1e-10);
        }
        let mid = &t.rows[100];
        assert!((mid[1] - 2.0 * binary_entropy(0.25)).abs() < 1e-12);
        assert!((mid[1] - 1.124670).abs() < 1e-6);
    }

    #[test]
    fn panels_become_columns() {
        let p = JCParams { d_fock: Some(12), steps: 50, t_max: 3.0, ..JCParams::default() };
        let t = time_series(Figure::Fig4, &p, &[0.5, 0.71], Execution::Sequential).unwrap();
        assert_eq!(t.columns, vec!["t", "delta_d_xi_0.5", "delta_d_xi_0.71"]);
        assert_eq!(t.rows.len(), 50);
        assert_eq!(t.rows[0][1], 0.0);
        let single = time_series(Figure::Fig3, &p, &[0.71], Execution::Sequential).unwrap();
        assert_eq!(single.columns, vec!["t", "di_dt_plus_dd_dt"]);
        assert!(time_series(Figure::Fig1, &p, &[0.5], Execution::Sequential).is_err());
    }
}
