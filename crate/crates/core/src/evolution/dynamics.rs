use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::wavefunction::{GridWaveFunction, Space};
use super::EvolutionError;
use crate::jet_calculus::SmoothField;
use crate::operator_algebra::{DiffOperator, RepClass, Sign};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const SINGULAR_AMPLITUDE: f64 = 1e-12;

/// `ε√(p⃗² + κ²)` (classes I, II) or `ε√(p⃗² − η²)` (class III); `None` on
/// tachyonic points.
pub fn energy(class: RepClass, mass: f64, eps: Sign, p: &[f64]) -> Option<f64> {
    let p2: f64 = p.iter().map(|x| x * x).sum();
    let e2 = match class {
        RepClass::I | RepClass::IILimit => p2 + mass * mass,
        RepClass::III => p2 - mass * mass,
    };
    if class == RepClass::III && e2 <= 0.0 {
        None
    } else {
        Some(eps.value() * e2.sqrt())
    }
}

/// The energy as a smooth field over `n` momentum variables.
pub fn energy_field(n: usize, class: RepClass, mass: f64, eps: Sign) -> SmoothField {
    let p2 = (0..n).fold(SmoothField::zero(n), |acc, k| {
        &acc + &SmoothField::var(n, k).square()
    });
    let m2 = match class {
        RepClass::III => -mass * mass,
        _ => mass * mass,
    };
    (&p2 + &SmoothField::real(n, m2))
        .sqrt()
        .scale(C64::new(eps.value(), 0.0))
}

fn energies(f: &GridWaveFunction) -> Vec<Option<f64>> {
    let g = f.grid();
    (0..g.len())
        .into_par_iter()
        .map(|i| energy(f.class(), f.mass(), f.eps(), &g.momentum_point(i)))
        .collect()
}

fn check_mask(f: &GridWaveFunction, e: &[Option<f64>]) -> Result<(), EvolutionError> {
    for (i, ei) in e.iter().enumerate() {
        if ei.is_none() {
            let amp = f.components().iter().map(|a| a[i].norm()).fold(0.0, f64::max);
            if amp > 0.0 {
                return Err(EvolutionError::TachyonicAmplitude {
                    point: f.grid().momentum_point(i),
                    amplitude: amp,
                });
            }
        }
    }
    Ok(())
}

/// Zeroes every tachyonic point of a class III state; other states are
/// returned unchanged.
pub fn apply_tachyonic_mask(f: &GridWaveFunction) -> GridWaveFunction {
    let mut out = f.clone();
    if f.class() == RepClass::III {
        let mask = f.grid().tachyonic_mask(f.mass());
        for a in out.components_mut() {
            for (x, &m) in a.iter_mut().zip(&mask) {
                if m {
                    *x = C64::new(0.0, 0.0);
                }
            }
        }
    }
    out
}

/// Solution of `i∂_0Ψ = P_0Ψ`: multiplication by `exp(−iE(p)t)`.
pub fn propagate(f: &GridWaveFunction, t: f64) -> Result<GridWaveFunction, EvolutionError> {
    f.require_space(Space::Momentum)?;
    let e = energies(f);
    check_mask(f, &e)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let phase: Vec<C64> = e
        .iter()
        .map(|ei| match ei {
            Some(ei) => C64::from_polar(1.0, -ei * t),
            None => C64::new(0.0, 0.0),
        })
        .collect();
    let mut out = f.clone();
    out.components_mut().par_iter_mut().for_each(|a| {
        for (x, ph) in a.iter_mut().zip(&phase) {
            *x *= ph;
        }
    });
    Ok(out)
}

/// `P_0 f` pointwise.
pub fn apply_energy(f: &GridWaveFunction) -> Result<GridWaveFunction, EvolutionError> {
    f.require_space(Space::Momentum)?;
    let e = energies(f);
    check_mask(f, &e)?;
    let mut out = f.clone();
    out.components_mut().par_iter_mut().for_each(|a| {
        for (x, ei) in a.iter_mut().zip(&e) {
            *x *= ei.unwrap_or(0.0);
        }
    });
    Ok(out)
}

/// `∂f/∂p_k` through the position representation.
pub fn spectral_derivative(
    f: &GridWaveFunction,
    k: usize,
) -> Result<GridWaveFunction, EvolutionError> {
    f.require_space(Space::Momentum)?;
    let mut x = f.clone();
    x.transform_single_axis(k, Space::Position);
    let g = f.grid();
    let stride = g.strides()[k];
    let count = g.counts()[k];
    x.components_mut().par_iter_mut().for_each(|a| {
        for (i, z) in a.iter_mut().enumerate() {
            let j = (i / stride) % count;
            *z *= -I * g.position(k, j);
        }
    });
    x.transform_single_axis(k, Space::Momentum);
    Ok(x)
}

/// `Qf` with derivative parts applied spectrally and coefficients sampled
/// at each grid point.
pub fn apply_operator(
    q: &DiffOperator,
    f: &GridWaveFunction,
) -> Result<GridWaveFunction, EvolutionError> {
    f.require_space(Space::Momentum)?;
    let g = f.grid();
    let d = f.rep().dim();
    if q.dim() != g.n() || q.matrix_dim() != d {
        return Err(EvolutionError::Mismatch(format!(
            "operator over {} variables with {}x{} matrices, state has {} axes and {} components",
            q.dim(),
            q.matrix_dim(),
            q.matrix_dim(),
            g.n(),
            d
        )));
    }
    let derivs: Vec<Option<GridWaveFunction>> = (0..g.n())
        .map(|k| {
            if q.deriv_terms(k).is_empty() {
                Ok(None)
            } else {
                spectral_derivative(f, k).map(Some)
            }
        })
        .collect::<Result<_, _>>()?;
    let amp = f.components();
    let constant = q.mult_terms().iter().all(|t| t.coeff.as_constant().is_some())
        && (0..g.n()).all(|k| q.deriv_terms(k).iter().all(|t| t.coeff.as_constant().is_some()));
    if constant {
        let c = q.dense_coefficients(&g.momentum_point(0))?;
        let amplitudes: Vec<Vec<C64>> = (0..d)
            .into_par_iter()
            .map(|r| {
                let mut out = vec![C64::new(0.0, 0.0); g.len()];
                let mut add = |m: C64, src: &[C64]| {
                    if m != C64::new(0.0, 0.0) {
                        out.iter_mut().zip(src).for_each(|(o, x)| *o += m * x);
                    }
                };
                for col in 0..d {
                    add(c.mult[(r, col)], &amp[col]);
                    for (k, dk) in derivs.iter().enumerate() {
                        if let Some(dk) = dk {
                            add(c.deriv[k][(r, col)], &dk.components()[col]);
                        }
                    }
                }
                out
            })
            .collect();
        return f.with_amplitudes(amplitudes);
    }
    let results: Vec<Result<Vec<C64>, EvolutionError>> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let point = g.momentum_point(i);
            let local = |src: &[Vec<C64>]| -> Vec<C64> { src.iter().map(|a| a[i]).collect() };
            let fv = local(amp);
            let dv: Vec<Option<Vec<C64>>> = derivs
                .iter()
                .map(|o| o.as_ref().map(|w| local(w.components())))
                .collect();
            match q.dense_coefficients(&point) {
                Ok(c) => {
                    let mut out = vec![C64::new(0.0, 0.0); d];
                    for (r, o) in out.iter_mut().enumerate() {
                        for col in 0..d {
                            *o += c.mult[(r, col)] * fv[col];
                            for (k, dk) in dv.iter().enumerate() {
                                if let Some(dk) = dk {
                                    *o += c.deriv[k][(r, col)] * dk[col];
                                }
                            }
                        }
                    }
                    Ok(out)
                }
                Err(_) => {
                    let a = fv
                        .iter()
                        .chain(dv.iter().flatten().flatten())
                        .map(|z| z.norm())
                        .fold(0.0, f64::max);
                    if a > SINGULAR_AMPLITUDE {
                        Err(EvolutionError::Singular {
                            point,
                            amplitude: a,
                        })
                    } else {
                        Ok(vec![C64::new(0.0, 0.0); d])
                    }
                }
            }
        })
        .collect();
    let values: Vec<Vec<C64>> = results.into_iter().collect::<Result<_, _>>()?;
    let amplitudes = (0..d).map(|c| values.iter().map(|v| v[c]).collect()).collect();
    f.with_amplitudes(amplitudes)
}

/// `⟨f, Qf⟩ / ⟨f, f⟩`.
pub fn expectation(q: &DiffOperator, f: &GridWaveFunction) -> Result<C64, EvolutionError> {
    let nrm = f.norm_sq();
    if nrm == 0.0 {
        return Err(EvolutionError::ZeroNorm);
    }
    let qf = apply_operator(q, f)?;
    Ok(f.inner_product(&qf)? / nrm)
}

/// `i[P_0, Q]` for a first-order `Q`, as the multiplication operator
/// `−i Σ_k c^k ∂_k E`.
pub fn energy_commutator(
    q: &DiffOperator,
    class: RepClass,
    mass: f64,
    eps: Sign,
) -> DiffOperator {
    let n = q.dim();
    let e = energy_field(n, class, mass, eps);
    let mut out = DiffOperator::zero(n, q.matrix_dim());
    for k in 0..n {
        let de = e.diff(k);
        for t in q.deriv_terms(k) {
            let m = t.matrix.as_ref().map(|m| (**m).clone());
            let term = DiffOperator::multiplication(&t.coeff * &de, m, q.matrix_dim());
            out = out.add(&term.scale(-I));
        }
    }
    out
}

/// `ε p_k / √(p⃗² ± m²)` as a multiplication operator.
pub fn group_velocity_operator(
    n: usize,
    md: usize,
    k: usize,
    class: RepClass,
    mass: f64,
    eps: Sign,
) -> DiffOperator {
    let e = energy_field(n, class, mass, eps);
    DiffOperator::multiplication(e.diff(k), None, md)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeisenbergReport {
    pub t: f64,
    pub dt: f64,
    pub finite_difference: C64,
    pub commutator: C64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the centred difference of `⟨Q⟩(t)` with `⟨i[P_0, Q]⟩(t)`. The
/// tolerance is `max(1e−6, |⟨Q⟩'''|·dt²/3)` with the third derivative
/// estimated from the same time series.
pub fn heisenberg_consistency(
    q: &DiffOperator,
    f: &GridWaveFunction,
    t: f64,
    dt: f64,
) -> Result<HeisenbergReport, EvolutionError> {
    let at = |s: f64| -> Result<C64, EvolutionError> { expectation(q, &propagate(f, s)?) };
    let (m2, m1, p1, p2) = (at(t - 2.0 * dt)?, at(t - dt)?, at(t + dt)?, at(t + 2.0 * dt)?);
    let fd = (p1 - m1) / (2.0 * dt);
    let third = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * dt * dt * dt);
    let comm_op = energy_commutator(q, f.class(), f.mass(), f.eps());
    let comm = expectation(&comm_op, &propagate(f, t)?)?;
    let residual = (fd - comm).norm();
    let tolerance = f64::max(1e-6, third.norm() * dt * dt / 3.0);
    Ok(HeisenbergReport {
        t,
        dt,
        finite_difference: fd,
        commutator: comm,
        residual,
        tolerance,
        pass: residual <= tolerance,
    })
}

/// `‖i(Ψ(t+dt) − Ψ(t−dt))/(2dt) − P_0Ψ(t)‖ / ‖Ψ‖`.
pub fn schrodinger_residual(
    f: &GridWaveFunction,
    t: f64,
    dt: f64,
) -> Result<f64, EvolutionError> {
    let plus = propagate(f, t + dt)?;
    let minus = propagate(f, t - dt)?;
    let now = propagate(f, t)?;
    let h = apply_energy(&now)?;
    let mut diff = 0.0;
    for ((a, b), c) in plus.components().iter().zip(minus.components()).zip(h.components()) {
        for ((x, y), z) in a.iter().zip(b).zip(c) {
            diff += (I * (x - y) / (2.0 * dt) - z).norm_sqr();
        }
    }
    let nrm = f.norm_sq();
    if nrm == 0.0 {
        return Err(EvolutionError::ZeroNorm);
    }
    Ok((diff * f.grid().momentum_cell() / nrm).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    pub residuals: Vec<f64>,
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Schrödinger residuals at `dt, dt/2, …` and the observed orders
/// `log₂(r_i / r_{i+1})`.
pub fn residual_convergence(
    f: &GridWaveFunction,
    t: f64,
    dt: f64,
    halvings: usize,
) -> Result<ConvergenceReport, EvolutionError> {
    let dts: Vec<f64> = (0..=halvings).map(|h| dt / 2f64.powi(h as i32)).collect();
    let residuals = dts
        .iter()
        .map(|&d| schrodinger_residual(f, t, d))
        .collect::<Result<Vec<_>, _>>()?;
    let orders = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ConvergenceReport {
        dts,
        residuals,
        orders,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HermiticityReport {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `|⟨Qf, g⟩ − ⟨f, Qg⟩| ≤ rel_tol·‖f‖‖g‖`.
pub fn hermiticity(
    q: &DiffOperator,
    f: &GridWaveFunction,
    g: &GridWaveFunction,
    rel_tol: f64,
) -> Result<HermiticityReport, EvolutionError> {
    let lhs = apply_operator(q, f)?.inner_product(g)?;
    let rhs = f.inner_product(&apply_operator(q, g)?)?;
    let residual = (lhs - rhs).norm();
    let bound = rel_tol * f.norm() * g.norm();
    Ok(HermiticityReport {
        lhs,
        rhs,
        residual,
        bound,
        pass: residual <= bound,
    })
}
