use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DomainGeometry;
use crate::error::{Error, Result};
use crate::field::SpaceTimePoint;

/// Boundary classification of an exposed cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    /// Touches the lateral boundary or enters at this level.
    LateralEarlier,
    /// Only exposed towards the future: no active cell above it.
    FinalTime,
}

/// An active cell next to the boundary of the active region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposedCell {
    pub cell: usize,
    /// Some face neighbour at the same level is inactive or off-grid.
    pub lateral: bool,
    /// The cell was inactive at the previous level (always true at level 0).
    pub earlier: bool,
    /// The cell is inactive at the next level (always true at the last level).
    pub final_time: bool,
}

impl ExposedCell {
    pub fn class(&self) -> BoundaryClass {
        if self.lateral || self.earlier {
            BoundaryClass::LateralEarlier
        } else {
            BoundaryClass::FinalTime
        }
    }
}

/// Per-level active cells of a cell-centred grid.
///
/// Cell `i` along an axis has centre `origin + (i + ½)h`. Level `k` covers the
/// slab `(times[k], times[k+1])`; a cell is active at level `k` when its centre
/// at the slab midpoint lies in the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeMask {
    pub n: usize,
    pub h: f64,
    pub origin: Vec<f64>,
    pub shape: Vec<usize>,
    pub times: Vec<f64>,
    pub active: Vec<Vec<bool>>,
    pub exposed: Vec<Vec<ExposedCell>>,
    pub label: String,
}

/// `count + 1` equally spaced level boundaries from `t0` to `t1`.
pub fn uniform_levels(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..=count)
        .map(|k| {
            if k == count {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / count as f64
            }
        })
        .collect()
}

impl SpaceTimeMask {
    pub fn levels(&self) -> usize {
        self.times.len() - 1
    }

    pub fn cell_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn level_mid(&self, k: usize) -> f64 {
        0.5 * (self.times[k] + self.times[k + 1])
    }

    pub fn level_end(&self, k: usize) -> f64 {
        self.times[k + 1]
    }

    /// Row-major multi-index of a flat cell index (last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for d in (0..self.n).rev() {
            idx[d] = flat % self.shape[d];
            flat /= self.shape[d];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (i, s)| acc * s + i)
    }

    /// Centre of the cell with (possibly off-grid) multi-index `idx`.
    pub fn center_of(&self, idx: &[i64]) -> Vec<f64> {
        idx.iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + (i as f64 + 0.5) * self.h)
            .collect()
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        let idx: Vec<i64> = self.unravel(flat).into_iter().map(|i| i as i64).collect();
        self.center_of(&idx)
    }

    pub fn active_cells(&self, k: usize) -> Vec<usize> {
        self.active[k]
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().map(|l| l.iter().filter(|&&a| a).count()).sum()
    }

    /// CSV with header `t_index,cell_index_0,…,active,exposed,final_time`,
    /// one row per cell and level.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let idx_cols: Vec<String> = (0..self.n).map(|d| format!("cell_index_{d}")).collect();
        writeln!(w, "t_index,{},active,exposed,final_time", idx_cols.join(","))?;
        for k in 0..self.levels() {
            let mut flags = vec![(false, false); self.cell_count()];
            for e in &self.exposed[k] {
                flags[e.cell] = (true, e.final_time);
            }
            for (c, (exposed, final_time)) in flags.into_iter().enumerate() {
                let idx: Vec<String> = self.unravel(c).iter().map(|i| i.to_string()).collect();
                writeln!(
                    w,
                    "{k},{},{},{},{}",
                    idx.join(","),
                    self.active[k][c] as u8,
                    exposed as u8,
                    final_time as u8
                )?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the grid geometry and active sets.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        hasher.update(self.h.to_le_bytes());
        for o in &self.origin {
            hasher.update(o.to_le_bytes());
        }
        for s in &self.shape {
            hasher.update((*s as u64).to_le_bytes());
        }
        for t in &self.times {
            hasher.update(t.to_le_bytes());
        }
        for level in &self.active {
            let bytes: Vec<u8> = level.iter().map(|&a| a as u8).collect();
            hasher.update(&bytes);
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn neighbours(&self, flat: usize) -> Vec<Option<usize>> {
        let idx = self.unravel(flat);
        let mut out = Vec::with_capacity(2 * self.n);
        for d in 0..self.n {
            for step in [-1i64, 1] {
                let j = idx[d] as i64 + step;
                if j < 0 || j >= self.shape[d] as i64 {
                    out.push(None);
                } else {
                    let mut nb = idx.clone();
                    nb[d] = j as usize;
                    out.push(Some(self.ravel(&nb)));
                }
            }
        }
        out
    }
}

/// Rasterizes `domain` on a grid of spacing `h` anchored at the lower corner
/// of its bounding box, with level boundaries `times`.
pub fn rasterize(domain: &DomainGeometry, h: f64, times: &[f64]) -> Result<SpaceTimeMask> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::param(format!("grid spacing must be > 0, got {h}")));
    }
    if times.len() < 2 || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param(
            "time partition must be strictly increasing with ≥ 2 entries",
        ));
    }
    let bbox = domain.bbox();
    let span = bbox.t1 - bbox.t0;
    let slack = 1e-9 * span.abs().max(1.0);
    if times[0] > bbox.t0 + slack || *times.last().unwrap() < bbox.t1 - slack {
        return Err(Error::param(format!(
            "time partition [{}, {}] does not cover the domain's time extent [{}, {}]",
            times[0],
            times.last().unwrap(),
            bbox.t0,
            bbox.t1
        )));
    }
    let n = domain.n();
    let shape: Vec<usize> = (0..n)
        .map(|d| (((bbox.hi[d] - bbox.lo[d]) / h) - 1e-9).ceil().max(1.0) as usize)
        .collect();
    let mut mask = SpaceTimeMask {
        n,
        h,
        origin: bbox.lo.clone(),
        shape,
        times: times.to_vec(),
        active: Vec::new(),
        exposed: Vec::new(),
        label: domain.label().to_string(),
    };
    let cells = mask.cell_count();
    let centers: Vec<Vec<f64>> = (0..cells).map(|c| mask.center(c)).collect();
    mask.active = (0..times.len() - 1)
        .into_par_iter()
        .map(|k| {
            let tm = 0.5 * (times[k] + times[k + 1]);
            centers
                .iter()
                .map(|x| domain.contains(&SpaceTimePoint::new(x.clone(), tm)))
                .collect()
        })
        .collect();
    if mask.active_count() == 0 {
        return Err(Error::EmptyMask(format!(
            "no cell centre of the {h}-grid lies in {}",
            domain.label()
        )));
    }
    let levels = mask.levels();
    mask.exposed = (0..levels)
        .map(|k| {
            (0..cells)
                .filter(|&c| mask.active[k][c])
                .filter_map(|c| {
                    let lateral = mask
                        .neighbours(c)
                        .iter()
                        .any(|nb| nb.is_none_or(|j| !mask.active[k][j]));
                    let earlier = k == 0 || !mask.active[k - 1][c];
                    let final_time = k + 1 == levels || !mask.active[k + 1][c];
                    (lateral || earlier || final_time).then_some(ExposedCell {
                        cell: c,
                        lateral,
                        earlier,
                        final_time,
                    })
                })
                .collect()
        })
        .collect();
    Ok(mask)
}
