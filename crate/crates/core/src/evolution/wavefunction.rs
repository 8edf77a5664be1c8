use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::MomentumGrid;
use super::EvolutionError;
use crate::operator_algebra::{RepClass, Sign};
use crate::spin_reps::LittleGroupRep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Momentum,
    Position,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Momentum => "momentum",
            Space::Position => "position",
        })
    }
}

/// Gaussian packet `Π exp(−(p_k − c_k)²/(4σ_k²)) · exp(−i p·x̄)` with
/// per-component weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    #[serde(default)]
    pub offset: Vec<f64>,
    pub weights: Vec<C64>,
}

/// A multi-component state sampled on a momentum grid or on its conjugate
/// position grid. Amplitudes are stored component-major, each component in
/// row-major grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWaveFunction {
    grid: MomentumGrid,
    rep: LittleGroupRep,
    class: RepClass,
    mass: f64,
    eps: Sign,
    space: Space,
    amplitudes: Vec<Vec<C64>>,
}

impl GridWaveFunction {
    pub fn new(
        grid: MomentumGrid,
        rep: LittleGroupRep,
        class: RepClass,
        mass: f64,
        eps: Sign,
        space: Space,
        amplitudes: Vec<Vec<C64>>,
    ) -> Result<Self, EvolutionError> {
        if rep.n() != grid.n() {
            return Err(EvolutionError::Mismatch(format!(
                "rep for n = {} on a {}-axis grid",
                rep.n(),
                grid.n()
            )));
        }
        if amplitudes.len() != rep.dim() || amplitudes.iter().any(|a| a.len() != grid.len()) {
            return Err(EvolutionError::Mismatch(format!(
                "amplitudes must be {} components of {} points",
                rep.dim(),
                grid.len()
            )));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(EvolutionError::InvalidGrid(format!("mass {mass} must be >= 0")));
        }
        Ok(Self {
            grid,
            rep,
            class,
            mass,
            eps,
            space,
            amplitudes,
        })
    }

    /// Momentum-space state from a function returning all components.
    pub fn from_fn(
        grid: MomentumGrid,
        rep: LittleGroupRep,
        class: RepClass,
        mass: f64,
        eps: Sign,
        f: impl Fn(&[f64]) -> Vec<C64> + Sync,
    ) -> Result<Self, EvolutionError> {
        let d = rep.dim();
        let values: Vec<Vec<C64>> = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.momentum_point(i)))
            .collect();
        if values.iter().any(|v| v.len() != d) {
            return Err(EvolutionError::Mismatch(format!("expected {d} components")));
        }
        let amplitudes = (0..d).map(|c| values.iter().map(|v| v[c]).collect()).collect();
        Self::new(grid, rep, class, mass, eps, Space::Momentum, amplitudes)
    }

    /// Normalized Gaussian packet; class III states are zeroed on the
    /// tachyonic mask.
    pub fn gaussian(
        grid: MomentumGrid,
        rep: LittleGroupRep,
        class: RepClass,
        mass: f64,
        eps: Sign,
        spec: &PacketSpec,
    ) -> Result<Self, EvolutionError> {
        let n = grid.n();
        if spec.center.len() != n || spec.width.len() != n {
            return Err(EvolutionError::Mismatch(format!(
                "packet center and width need {n} entries"
            )));
        }
        if !spec.offset.is_empty() && spec.offset.len() != n {
            return Err(EvolutionError::Mismatch(format!("packet offset needs {n} entries")));
        }
        if spec.width.iter().any(|&w| !(w > 0.0)) {
            return Err(EvolutionError::InvalidGrid("packet widths must be positive".into()));
        }
        if spec.weights.len() != rep.dim() {
            return Err(EvolutionError::Mismatch(format!(
                "{} component weights for a {}-dimensional rep",
                spec.weights.len(),
                rep.dim()
            )));
        }
        let eta2 = mass * mass;
        let f = |p: &[f64]| {
            if class == RepClass::III && p.iter().map(|x| x * x).sum::<f64>() <= eta2 {
                return vec![C64::new(0.0, 0.0); spec.weights.len()];
            }
            let mut arg = C64::new(0.0, 0.0);
            for k in 0..n {
                let d = p[k] - spec.center[k];
                arg -= d * d / (4.0 * spec.width[k] * spec.width[k]);
                if let Some(&x) = spec.offset.get(k) {
                    arg -= C64::new(0.0, p[k] * x);
                }
            }
            let g = arg.exp();
            spec.weights.iter().map(|w| w * g).collect()
        };
        let psi = Self::from_fn(grid, rep, class, mass, eps, f)?;
        psi.normalized()
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn rep(&self) -> &LittleGroupRep {
        &self.rep
    }

    pub fn class(&self) -> RepClass {
        self.class
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn eps(&self) -> Sign {
        self.eps
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn components(&self) -> &[Vec<C64>] {
        &self.amplitudes
    }

    pub fn components_mut(&mut self) -> &mut [Vec<C64>] {
        &mut self.amplitudes
    }

    pub fn with_amplitudes(&self, amplitudes: Vec<Vec<C64>>) -> Result<Self, EvolutionError> {
        Self::new(
            self.grid.clone(),
            self.rep.clone(),
            self.class,
            self.mass,
            self.eps,
            self.space,
            amplitudes,
        )
    }

    fn cell(&self) -> f64 {
        match self.space {
            Space::Momentum => self.grid.momentum_cell(),
            Space::Position => self.grid.position_cell(),
        }
    }

    pub fn check_compatible(&self, other: &Self) -> Result<(), EvolutionError> {
        if self.grid != other.grid || self.rep.dim() != other.rep.dim() {
            return Err(EvolutionError::Mismatch("different grids or reps".into()));
        }
        if self.space != other.space {
            return Err(EvolutionError::WrongSpace {
                expected: self.space,
                got: other.space,
            });
        }
        Ok(())
    }

    /// `⟨self, other⟩ = Σ ψ⁺ψ′ · cell` (midpoint rule).
    pub fn inner_product(&self, other: &Self) -> Result<C64, EvolutionError> {
        self.check_compatible(other)?;
        let s: C64 = self
            .amplitudes
            .par_iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        Ok(s * self.cell())
    }

    pub fn norm_sq(&self) -> f64 {
        let s: f64 = self
            .amplitudes
            .iter()
            .map(|a| a.iter().map(|x| x.norm_sqr()).sum::<f64>())
            .sum();
        s * self.cell()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn component_norm_sq(&self, c: usize) -> f64 {
        self.amplitudes[c].iter().map(|x| x.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.amplitudes
            .iter_mut()
            .for_each(|a| a.iter_mut().for_each(|x| *x *= s));
        out
    }

    pub fn normalized(&self) -> Result<Self, EvolutionError> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(EvolutionError::ZeroNorm);
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// `ψ(x) = (2π)^{−n/2} ∫ e^{ipx} ψ̃(p) dⁿp` on the conjugate grid.
    pub fn fourier_to_position(&self) -> Result<Self, EvolutionError> {
        self.require_space(Space::Momentum)?;
        let mut out = self.clone();
        for k in 0..self.grid.n() {
            out.transform_axis(k, Space::Position);
        }
        out.space = Space::Position;
        Ok(out)
    }

    /// `ψ̃(p) = (2π)^{−n/2} ∫ e^{−ipx} ψ(x) dⁿx`.
    pub fn fourier_to_momentum(&self) -> Result<Self, EvolutionError> {
        self.require_space(Space::Position)?;
        let mut out = self.clone();
        for k in 0..self.grid.n() {
            out.transform_axis(k, Space::Momentum);
        }
        out.space = Space::Momentum;
        Ok(out)
    }

    /// Transforms along a single axis only; the space tag is left alone.
    pub fn transform_single_axis(&mut self, k: usize, to: Space) {
        self.transform_axis(k, to);
    }

    pub fn require_space(&self, space: Space) -> Result<(), EvolutionError> {
        if self.space == space {
            Ok(())
        } else {
            Err(EvolutionError::WrongSpace {
                expected: space,
                got: self.space,
            })
        }
    }

    fn transform_axis(&mut self, k: usize, to: Space) {
        let g = &self.grid;
        let n = g.counts()[k];
        let stride = g.strides()[k];
        let outer = g.len() / (n * stride);
        let dp = g.spacing(k);
        let dx = g.position_spacing(k);
        let p0 = g.momentum(k, 0);
        let mut planner = FftPlanner::<f64>::new();
        let fft: Arc<dyn Fft<f64>> = match to {
            Space::Position => planner.plan_fft_inverse(n),
            Space::Momentum => planner.plan_fft_forward(n),
        };
        let sign_m: Vec<f64> = (0..n).map(|m| if m % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let phase: Vec<C64> = (0..n)
            .map(|j| {
                let s = if to == Space::Position { 1.0 } else { -1.0 };
                C64::from_polar(1.0, s * p0 * g.position(k, j))
            })
            .collect();
        let (pre, post): (Vec<C64>, Vec<C64>) = match to {
            Space::Position => {
                let c = dp / (2.0 * PI).sqrt();
                (
                    sign_m.iter().map(|&s| C64::new(s, 0.0)).collect(),
                    phase.iter().map(|z| z * c).collect(),
                )
            }
            Space::Momentum => {
                let c = dx / (2.0 * PI).sqrt();
                (phase, sign_m.iter().map(|&s| C64::new(s * c, 0.0)).collect())
            }
        };
        self.amplitudes.par_iter_mut().for_each(|a| {
            let mut buf = vec![C64::new(0.0, 0.0); n];
            let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for o in 0..outer {
                for i in 0..stride {
                    let start = o * n * stride + i;
                    for m in 0..n {
                        buf[m] = a[start + m * stride] * pre[m];
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for m in 0..n {
                        a[start + m * stride] = buf[m] * post[m];
                    }
                }
            }
        });
    }
}
