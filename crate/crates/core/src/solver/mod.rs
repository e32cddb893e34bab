//! Explicit conservative finite-volume solver for `a ∂ₜu = Δ_p u` on
//! cylinders and rasterized space-time masks, with regularity probes,
//! comparison and scaling checks, and a one-dimensional elliptic auxiliary
//! problem.
//!
//! The face flux is `Φ_δ(s) = (|∇u|² + δ²)^{(p-2)/2} s` with `s` the normal
//! difference quotient; in two dimensions `|∇u|` at a face also uses the
//! averaged tangential central differences. Time steps follow the bound
//! `dt · max Φ_δ' ≤ cfl · a h² / n`.

mod compare;
mod cylinder;
mod elliptic;
mod probe;
mod scheme;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use compare::{check_comparison, check_scaling_identity, ComparisonReport, ScalingReport};
pub use cylinder::{solve_cylinder_1d, CylinderGrid};
pub use elliptic::{solve_elliptic_aux_1d, EllipticAux, EllipticOptions};
pub use probe::{
    distance_datum, probe_scenario, regularity_probe, ProbeOptions, ProbeReport, ProbeRow, ProbeScenario, Verdict,
    PROBE_DOMAINS,
};
pub use scheme::{flux, flux_derivative, solve_masked, solve_masked_coupled};

use crate::error::Result;
use crate::field::SpaceTimePoint;
use crate::geometry::SpaceTimeMask;
use crate::params::PParams;

/// Boundary and initial data, evaluated at ghost and newly exposed cells.
pub type BoundaryData<'a> = &'a (dyn Fn(&SpaceTimePoint) -> f64 + Sync);

/// Time-stepping settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Flux regularization; the grid spacing when absent.
    pub delta: Option<f64>,
    /// Safety factor in the step bound.
    pub cfl: f64,
    /// Replay these steps (one list per level) instead of choosing adaptively.
    #[serde(default)]
    pub dt_replay: Option<Vec<Vec<f64>>>,
    /// Abort after this many substeps in total.
    pub max_steps: usize,
    /// Assert the discrete maximum principle after every substep.
    pub check_max_principle: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            delta: None,
            cfl: 0.45,
            dt_replay: None,
            max_steps: 50_000_000,
            check_max_principle: true,
        }
    }
}

/// Values at the end of every level, with the step history.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub mask: SpaceTimeMask,
    pub params: PParams,
    pub delta: f64,
    /// `values[k][cell]` at time `mask.times[k+1]`; `NaN` where inactive.
    pub values: Vec<Vec<f64>>,
    pub dt_history: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    params: &'a PParams,
    delta: f64,
    h: f64,
    levels: usize,
    steps: usize,
    mask_checksum: String,
    dt_history: &'a [Vec<f64>],
}

impl GridSolution {
    pub fn steps(&self) -> usize {
        self.dt_history.iter().map(Vec::len).sum()
    }

    pub fn value(&self, level: usize, cell: usize) -> Option<f64> {
        self.mask.active[level][cell].then(|| self.values[level][cell])
    }

    /// Active values at the last level that has any active cell.
    pub fn final_values(&self) -> Vec<(usize, f64)> {
        for k in (0..self.mask.levels()).rev() {
            let cells = self.mask.active_cells(k);
            if !cells.is_empty() {
                return cells.into_iter().map(|c| (c, self.values[k][c])).collect();
            }
        }
        Vec::new()
    }

    /// `t_index,cell_index_0,…,value` for every active cell.
    pub fn to_csv(&self) -> String {
        let n = self.mask.n;
        let mut s = String::from("t_index,");
        for d in 0..n {
            let _ = write!(s, "cell_index_{d},");
        }
        s.push_str("value\n");
        for k in 0..self.mask.levels() {
            for c in self.mask.active_cells(k) {
                let _ = write!(s, "{k},");
                for i in self.mask.unravel(c) {
                    let _ = write!(s, "{i},");
                }
                let _ = writeln!(s, "{:e}", self.values[k][c]);
            }
        }
        s
    }

    pub fn manifest_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Manifest {
            params: &self.params,
            delta: self.delta,
            h: self.mask.h,
            levels: self.mask.levels(),
            steps: self.steps(),
            mask_checksum: self.mask.checksum(),
            dt_history: &self.dt_history,
        })?)
    }

    pub fn write(&self, csv: &Path, manifest: &Path) -> Result<()> {
        std::fs::write(csv, self.to_csv())?;
        std::fs::write(manifest, self.manifest_json()?)?;
        Ok(())
    }
}
