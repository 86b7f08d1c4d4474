//! The phase-space model `T^d x B`: angles on the unit torus, actions in a box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default fraction of the box trimmed from each side to obtain the safe box.
pub const DEFAULT_SHRINK: f64 = 0.1;

/// Slack used when testing whether an action vector lies in a closed box.
pub(crate) const BOX_SLACK: f64 = 1e-12;

/// An axis-aligned box in action space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ActionBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidSpace("box bounds must have equal, positive length".into()));
        }
        for (j, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidSpace(format!("action_lo[{j}] must be < action_hi[{j}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Trims `frac` of the width from each side of every axis.
    pub fn shrink(&self, frac: f64) -> ActionBox {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                let w = b - a;
                (a + frac * w, b - frac * w)
            })
            .unzip();
        ActionBox { lo, hi }
    }

    pub fn contains(&self, actions: &[f64]) -> bool {
        actions.iter().enumerate().all(|(j, &x)| {
            let slack = BOX_SLACK * (1.0 + self.hi[j].abs().max(self.lo[j].abs()));
            x >= self.lo[j] - slack && x <= self.hi[j] + slack
        })
    }

    pub fn contains_box(&self, other: &ActionBox) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Points of a uniform grid with `per_axis` nodes per axis, endpoints included.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let total = per_axis.pow(d as u32);
        (0..total)
            .map(|mut flat| {
                let mut idx = vec![0usize; d];
                for j in (0..d).rev() {
                    idx[j] = flat % per_axis;
                    flat /= per_axis;
                }
                idx.iter()
                    .enumerate()
                    .map(|(j, &i)| {
                        if per_axis == 1 {
                            0.5 * (self.lo[j] + self.hi[j])
                        } else {
                            self.lo[j] + (self.hi[j] - self.lo[j]) * i as f64 / (per_axis - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Discretized angle-action chart `T^d x B`.
///
/// Angles live on `[0,1)^d`. Scalar fields carry Fourier modes `|k_j| <= truncation`
/// whose coefficients are sampled on a uniform action grid of `grid_points` nodes per
/// axis (endpoints included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusBox {
    pub d: usize,
    pub action_lo: Vec<f64>,
    pub action_hi: Vec<f64>,
    pub truncation: usize,
    pub grid_points: usize,
}

impl TorusBox {
    pub fn new(action_lo: Vec<f64>, action_hi: Vec<f64>, truncation: usize, grid_points: usize) -> Result<Self> {
        let bx = ActionBox::new(action_lo, action_hi)?;
        // 4th-order one-sided stencils need five nodes.
        if grid_points < 5 {
            return Err(Error::InvalidSpace(format!("need at least 5 action grid points, got {grid_points}")));
        }
        let d = bx.dim();
        if d > 4 {
            return Err(Error::InvalidSpace(format!("dimension {d} is not supported (max 4)")));
        }
        Ok(Self { d, action_lo: bx.lo, action_hi: bx.hi, truncation, grid_points })
    }

    /// Same box on every axis.
    pub fn cube(d: usize, lo: f64, hi: f64, truncation: usize, grid_points: usize) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d], truncation, grid_points)
    }

    pub fn action_box(&self) -> ActionBox {
        ActionBox { lo: self.action_lo.clone(), hi: self.action_hi.clone() }
    }

    /// Same truncation and resolution, different action box.
    pub fn with_box(&self, bx: &ActionBox) -> TorusBox {
        TorusBox {
            d: self.d,
            action_lo: bx.lo.clone(),
            action_hi: bx.hi.clone(),
            truncation: self.truncation,
            grid_points: self.grid_points,
        }
    }

    pub fn safe_box(&self) -> ActionBox {
        self.action_box().shrink(DEFAULT_SHRINK)
    }

    /// Fourier modes per axis, `2K+1`.
    pub fn modes_per_axis(&self) -> usize {
        2 * self.truncation + 1
    }

    pub fn n_modes(&self) -> usize {
        self.modes_per_axis().pow(self.d as u32)
    }

    pub fn n_actions(&self) -> usize {
        self.grid_points.pow(self.d as u32)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.action_hi[axis] - self.action_lo[axis]) / (self.grid_points - 1) as f64
    }

    pub fn action_node(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.grid_points {
            self.action_hi[axis]
        } else {
            self.action_lo[axis] + self.spacing(axis) * i as f64
        }
    }

    /// Action coordinates of flat grid index `p` (axis 0 slowest).
    pub fn action_point(&self, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        let mut rest = p;
        for j in (0..self.d).rev() {
            out[j] = self.action_node(j, rest % self.grid_points);
            rest /= self.grid_points;
        }
        out
    }

    pub fn action_points(&self) -> Vec<Vec<f64>> {
        (0..self.n_actions()).map(|p| self.action_point(p)).collect()
    }

    /// Stride of action axis `j` in the flat grid layout.
    pub fn action_stride(&self, axis: usize) -> usize {
        self.grid_points.pow((self.d - 1 - axis) as u32)
    }

    pub fn zero_mode(&self) -> usize {
        (self.n_modes() - 1) / 2
    }

    /// Index of mode `-k` given the index of `k`.
    pub fn neg_mode(&self, m: usize) -> usize {
        self.n_modes() - 1 - m
    }

    pub fn mode_index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.d {
            return None;
        }
        let kk = self.truncation as i64;
        let base = self.modes_per_axis();
        let mut m = 0usize;
        for &kj in k {
            if kj.abs() > kk {
                return None;
            }
            m = m * base + (kj + kk) as usize;
        }
        Some(m)
    }

    pub fn mode_of(&self, m: usize) -> Vec<i64> {
        let base = self.modes_per_axis();
        let kk = self.truncation as i64;
        let mut k = vec![0i64; self.d];
        let mut rest = m;
        for j in (0..self.d).rev() {
            k[j] = (rest % base) as i64 - kk;
            rest /= base;
        }
        k
    }

    pub fn contains_actions(&self, actions: &[f64]) -> bool {
        actions.len() == self.d
            && actions.iter().enumerate().all(|(j, &x)| {
                let slack = BOX_SLACK * (1.0 + self.action_hi[j].abs().max(self.action_lo[j].abs()));
                x >= self.action_lo[j] - slack && x <= self.action_hi[j] + slack
            })
    }

    pub(crate) fn check_actions(&self, actions: &[f64]) -> Result<()> {
        if self.contains_actions(actions) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { actions: actions.to_vec() })
        }
    }
}

/// Wraps an angle difference into `[-1/2, 1/2)`.
pub fn wrap_signed(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

/// Wraps an angle into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}
