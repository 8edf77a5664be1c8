use serde::{Deserialize, Serialize};

use super::EvolutionError;

/// Uniform periodic momentum grid. Axis `k` holds `counts[k]` points
/// `p = min + m·dp` with `dp = (max − min)/count`; the conjugate position
/// grid has `dx = 2π/(count·dp)` and is centred on the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    extents: Vec<(f64, f64)>,
    counts: Vec<usize>,
}

impl MomentumGrid {
    pub fn new(extents: Vec<(f64, f64)>, counts: Vec<usize>) -> Result<Self, EvolutionError> {
        if extents.is_empty() || extents.len() != counts.len() {
            return Err(EvolutionError::InvalidGrid(format!(
                "{} extents for {} axis counts",
                extents.len(),
                counts.len()
            )));
        }
        for (k, (&(lo, hi), &c)) in extents.iter().zip(&counts).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(EvolutionError::InvalidGrid(format!(
                    "axis {k}: extent ({lo}, {hi}) is empty"
                )));
            }
            if c < 2 || !c.is_power_of_two() {
                return Err(EvolutionError::InvalidGrid(format!(
                    "axis {k}: {c} points is not a power of two >= 2"
                )));
            }
        }
        Ok(Self { extents, counts })
    }

    /// `n` axes over `[−half_width, half_width)` with `count` points each.
    pub fn cube(n: usize, half_width: f64, count: usize) -> Result<Self, EvolutionError> {
        Self::new(vec![(-half_width, half_width); n], vec![count; n])
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn extents(&self) -> &[(f64, f64)] {
        &self.extents
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, k: usize) -> f64 {
        (self.extents[k].1 - self.extents[k].0) / self.counts[k] as f64
    }

    pub fn position_spacing(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI / (self.counts[k] as f64 * self.spacing(k))
    }

    pub fn momentum(&self, k: usize, m: usize) -> f64 {
        self.extents[k].0 + m as f64 * self.spacing(k)
    }

    pub fn position(&self, k: usize, j: usize) -> f64 {
        let dx = self.position_spacing(k);
        -(self.counts[k] as f64) * dx / 2.0 + j as f64 * dx
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.n()];
        for k in (0..self.n().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.counts[k + 1];
        }
        s
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        let mut idx = vec![0; self.n()];
        for k in (0..self.n()).rev() {
            idx[k] = rem % self.counts[k];
            rem /= self.counts[k];
        }
        idx
    }

    pub fn momentum_point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, &m)| self.momentum(k, m))
            .collect()
    }

    pub fn position_point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, &j)| self.position(k, j))
            .collect()
    }

    pub fn momentum_cell(&self) -> f64 {
        (0..self.n()).map(|k| self.spacing(k)).product()
    }

    pub fn position_cell(&self) -> f64 {
        (0..self.n()).map(|k| self.position_spacing(k)).product()
    }

    /// Flags points with `p⃗² ≤ η²`.
    pub fn tachyonic_mask(&self, eta: f64) -> Vec<bool> {
        (0..self.len())
            .map(|i| {
                let p2: f64 = self.momentum_point(i).iter().map(|p| p * p).sum();
                p2 <= eta * eta
            })
            .collect()
    }
}
