use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wavefunction::{GridWaveFunction, Space};
use super::EvolutionError;
use crate::operator_algebra::RepClass;
use crate::spin_reps::ComponentLabel;

/// Which sign of `p_4 = ±√(m² − κ²)` contributes to `ρ(m²)`. The
/// symmetric branch is the density of `|p_4|`, so it doubles at threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Positive,
    Symmetric,
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "positive" | "+" => Ok(Branch::Positive),
            "symmetric" | "both" => Ok(Branch::Symmetric),
            _ => Err(format!("unknown branch '{s}' (expected positive or symmetric)")),
        }
    }
}

/// Sample points in `m²`: the box's own `p_4` modes `k·dp_4` for
/// `0 ≤ k < N_4/2` (mode-sum weights, half weight at `k = 0`), or an
/// explicit ascending list (trapezoid weights in `p_4`).
#[derive(Debug, Clone, PartialEq)]
pub enum MassGrid {
    Modes,
    Explicit(Vec<f64>),
}

impl MassGrid {
    pub fn uniform(min: f64, max: f64, count: usize) -> Self {
        let step = if count > 1 { (max - min) / (count - 1) as f64 } else { 0.0 };
        MassGrid::Explicit((0..count).map(|i| min + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassOptions {
    pub branch: Branch,
    pub peak_threshold: f64,
}

impl Default for MassOptions {
    fn default() -> Self {
        Self {
            branch: Branch::Positive,
            peak_threshold: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub m2: f64,
    pub height: f64,
    pub half_width: Option<f64>,
    /// `√m² / half_width`.
    pub width_lifetime: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassDistribution {
    pub kappa: f64,
    pub branch: Branch,
    pub m2: Vec<f64>,
    pub p4: Vec<f64>,
    /// Quadrature weights in the `p_4` measure.
    pub weights: Vec<f64>,
    pub labels: Vec<ComponentLabel>,
    pub rho: Vec<Vec<f64>>,
    pub total: Vec<f64>,
    pub peaks: Vec<Peak>,
    pub mean_m2: f64,
    pub lifetime: f64,
}

impl MassDistribution {
    /// `∫ρ_c dp_4` over the sampled branch.
    pub fn integrated(&self, c: usize) -> f64 {
        self.rho[c].iter().zip(&self.weights).map(|(r, w)| r * w).sum()
    }

    pub fn integrated_total(&self) -> f64 {
        self.total.iter().zip(&self.weights).map(|(r, w)| r * w).sum()
    }

    /// `∫m²ρ dp_4 / ∫ρ dp_4`.
    pub fn weighted_mean_m2(&self) -> f64 {
        let num: f64 = self
            .m2
            .iter()
            .zip(&self.total)
            .zip(&self.weights)
            .map(|((m, r), w)| m * r * w)
            .sum();
        num / self.integrated_total()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("m2,s3,t3,rho\n");
        for (i, m2) in self.m2.iter().enumerate() {
            for (c, l) in self.labels.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{}", m2, l.s3, l.t3, self.rho[c][i]);
            }
        }
        s
    }
}

/// `ρ(m², s₃, t₃) = ∫d³x |(2π)^{−1/2} ∫dx_4 e^{−i p_4 x_4} Ψ|²` with
/// `p_4 = √(m² − κ²)`, plus the mean `m̄² = κ² + ⟨p_4²⟩`, `τ̄ = 1/√m̄²` and
/// half-maximum peaks.
pub fn mass_spectrum(
    f: &GridWaveFunction,
    samples: &MassGrid,
    opts: &MassOptions,
) -> Result<MassDistribution, EvolutionError> {
    f.require_space(Space::Position)?;
    let g = f.grid();
    if g.n() != 4 {
        return Err(EvolutionError::Unsupported(format!(
            "mass spectra need n = 4, state has n = {}",
            g.n()
        )));
    }
    if f.class() == RepClass::III {
        return Err(EvolutionError::Unsupported(
            "mass spectra are defined for class I states".into(),
        ));
    }
    let kappa = f.mass();
    let k2 = kappa * kappa;
    let n4 = g.counts()[3];
    let dp4 = g.spacing(3);
    let (m2, p4, weights) = match samples {
        MassGrid::Modes => {
            let p4: Vec<f64> = (0..n4 / 2).map(|k| k as f64 * dp4).collect();
            let m2 = p4.iter().map(|p| k2 + p * p).collect();
            let mut w = vec![dp4; p4.len()];
            w[0] = 0.5 * dp4;
            (m2, p4, w)
        }
        MassGrid::Explicit(list) => {
            if list.is_empty() {
                return Err(EvolutionError::InvalidGrid("empty m^2 grid".into()));
            }
            for (i, &m) in list.iter().enumerate() {
                if !(m >= k2) {
                    return Err(EvolutionError::BelowThreshold { m2: m, threshold: k2 });
                }
                if i > 0 && !(m > list[i - 1]) {
                    return Err(EvolutionError::InvalidGrid("m^2 grid must be ascending".into()));
                }
            }
            let p4: Vec<f64> = list.iter().map(|m| (m - k2).max(0.0).sqrt()).collect();
            let mut w = vec![0.0; p4.len()];
            for i in 1..p4.len() {
                let h = 0.5 * (p4[i] - p4[i - 1]);
                w[i - 1] += h;
                w[i] += h;
            }
            (list.clone(), p4, w)
        }
    };

    let x4: Vec<f64> = (0..n4).map(|j| g.position(3, j)).collect();
    let dx4 = g.position_spacing(3);
    let cell3: f64 = (0..3).map(|k| g.position_spacing(k)).product();
    let scale = dx4 / (2.0 * PI).sqrt();
    let rho: Vec<Vec<f64>> = f
        .components()
        .iter()
        .map(|a| {
            p4.par_iter()
                .map(|&p| {
                    let branch = |p: f64| -> f64 {
                        let phase: Vec<C64> =
                            x4.iter().map(|x| C64::from_polar(scale, -p * x)).collect();
                        a.chunks(n4)
                            .map(|line| {
                                line.iter()
                                    .zip(&phase)
                                    .map(|(z, e)| z * e)
                                    .sum::<C64>()
                                    .norm_sqr()
                            })
                            .sum::<f64>()
                            * cell3
                    };
                    let mut r = branch(p);
                    if opts.branch == Branch::Symmetric {
                        r += branch(-p);
                    }
                    r
                })
                .collect()
        })
        .collect();
    let total: Vec<f64> = (0..m2.len())
        .map(|i| rho.iter().map(|r| r[i]).sum())
        .collect();

    let mean_m2 = k2 + p4_second_moment(f)?;
    let peaks = find_peaks(&m2, &total, opts.peak_threshold);
    Ok(MassDistribution {
        kappa,
        branch: opts.branch,
        m2,
        p4,
        weights,
        labels: f.rep().component_labels(),
        rho,
        total,
        peaks,
        mean_m2,
        lifetime: 1.0 / mean_m2.sqrt(),
    })
}

/// `⟨p_4²⟩` from the discrete `x_4` transform.
pub fn p4_second_moment(f: &GridWaveFunction) -> Result<f64, EvolutionError> {
    f.require_space(Space::Position)?;
    let g = f.grid();
    let mut m = f.clone();
    m.transform_single_axis(3, Space::Momentum);
    let n4 = g.counts()[3];
    let (mut num, mut den) = (0.0, 0.0);
    for a in m.components() {
        for line in a.chunks(n4) {
            for (j, z) in line.iter().enumerate() {
                let p = g.momentum(3, j);
                num += p * p * z.norm_sqr();
                den += z.norm_sqr();
            }
        }
    }
    if den == 0.0 {
        return Err(EvolutionError::ZeroNorm);
    }
    Ok(num / den)
}

/// `m̄² = κ² + ⟨p_4²⟩`.
pub fn mean_mass_sq(f: &GridWaveFunction) -> Result<f64, EvolutionError> {
    Ok(f.mass() * f.mass() + p4_second_moment(f)?)
}

/// `τ̄ = (m̄²)^{−1/2}`.
pub fn lifetime(mean_m2: f64) -> f64 {
    1.0 / mean_m2.sqrt()
}

/// Local maxima above `threshold·max` with linearly interpolated
/// half-maximum widths.
pub fn find_peaks(x: &[f64], y: &[f64], threshold: f64) -> Vec<Peak> {
    let ymax = y.iter().copied().fold(0.0, f64::max);
    if ymax <= 0.0 {
        return Vec::new();
    }
    let n = y.len();
    let mut peaks = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || y[i] > y[i - 1];
        let right_ok = i + 1 == n || y[i] >= y[i + 1];
        if !(left_ok && right_ok && y[i] >= threshold * ymax && y[i] > 0.0) {
            continue;
        }
        let half = 0.5 * y[i];
        let cross = |j: usize, k: usize| x[j] + (half - y[j]) * (x[k] - x[j]) / (y[k] - y[j]);
        let left = (0..i).rev().find(|&j| y[j] <= half).map(|j| cross(j, j + 1));
        let right = (i + 1..n).find(|&j| y[j] <= half).map(|j| cross(j - 1, j));
        let half_width = match (left, right) {
            (Some(l), Some(r)) => Some(0.5 * (r - l)),
            (None, Some(r)) => Some(r - x[i]),
            (Some(l), None) => Some(x[i] - l),
            (None, None) => None,
        };
        peaks.push(Peak {
            m2: x[i],
            height: y[i],
            half_width,
            width_lifetime: half_width.map(|w| x[i].sqrt() / w),
        });
    }
    peaks
}
