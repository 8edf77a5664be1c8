//! Numerical verification of commutation relations, the Schrödinger-picture
//! invariance condition, Casimir operators and `B_μ` covariance.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::generators::{GeneratorError, GeneratorSet, Picture};
use super::operator::{commutator_from_parts, DiffOperator, EvaluatedOperator, TaylorOperator};
use crate::jet_calculus::{Jet1, SmoothField, Taylor, VectorField};
use crate::spin_reps::{CMatrix, MaxAbs, PlaneTable};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Gaussian-times-polynomial test fields with random complex component
/// mixing, centred near each sample point and reproducible from a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestFieldBattery {
    pub seed: u64,
    pub per_point: usize,
}

impl TestFieldBattery {
    pub fn new(seed: u64, per_point: usize) -> Self {
        Self { seed, per_point }
    }

    /// Field number `index` for sample point number `point_index`.
    pub fn field(
        &self,
        point: &[f64],
        point_index: usize,
        index: usize,
        components: usize,
    ) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add((point_index as u64) << 20)
                .wrapping_add(index as u64),
        );
        let dim = point.len();
        let q: Vec<SmoothField> = (0..dim).map(|k| SmoothField::var(dim, k)).collect();
        let alpha = rng.random_range(0.3..0.8);
        let mut r2 = SmoothField::zero(dim);
        for (k, qk) in q.iter().enumerate() {
            let c = point[k] + rng.random_range(-0.5..0.5);
            r2 = &r2 + &(qk - &SmoothField::real(dim, c)).square();
        }
        let gauss = r2.scale(C64::new(-alpha, 0.0)).exp();
        let mut cplx = |s: f64| C64::new(rng.random_range(-s..s), rng.random_range(-s..s));
        let comps = (0..components)
            .map(|_| {
                let mut poly = SmoothField::constant(dim, C64::new(1.0, 0.0) + cplx(0.5));
                for qk in &q {
                    poly = &poly + &qk.scale(cplx(1.0));
                }
                poly = &poly + &(&q[0] * &q[dim - 1]).scale(cplx(0.5));
                &poly * &gauss
            })
            .collect();
        VectorField::new(comps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub pair: String,
    pub point: Vec<f64>,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub relation: String,
    pub tol: f64,
    pub max_residual: f64,
    pub pass: bool,
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    fn from_entries(relation: &str, tol: f64, entries: Vec<CheckEntry>) -> Self {
        let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
        Self {
            relation: relation.to_string(),
            tol,
            max_residual,
            pass: entries.iter().all(|e| e.pass),
            entries,
        }
    }

    /// Entries sorted by decreasing residual (stable, so ties keep sweep
    /// order).
    pub fn worst(&self, count: usize) -> Vec<&CheckEntry> {
        let mut v: Vec<&CheckEntry> = self.entries.iter().collect();
        v.sort_by(|a, b| b.residual.total_cmp(&a.residual));
        v.truncate(count);
        v
    }

    pub fn failures(&self) -> Vec<&CheckEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} (max residual {:.3e}, tol {:.1e})",
            self.relation,
            if self.pass { "PASS" } else { "FAIL" },
            self.max_residual,
            self.tol
        )?;
        writeln!(f, "  {:<22} {:>12}  status", "pair", "residual")?;
        for e in &self.entries {
            writeln!(
                f,
                "  {:<22} {:>12.3e}  {}",
                e.pair,
                e.residual,
                if e.pass { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Merges per-point residual vectors (in point order) into one entry per
/// check, keeping the first worst point.
fn merge(
    labels: &[String],
    points: &[Vec<f64>],
    per_point: Vec<Vec<f64>>,
    tol: f64,
) -> Vec<CheckEntry> {
    labels
        .iter()
        .enumerate()
        .map(|(c, label)| {
            let mut worst = (0usize, -1.0f64);
            for (p, res) in per_point.iter().enumerate() {
                if res[c] > worst.1 || res[c].is_nan() {
                    worst = (p, res[c]);
                }
            }
            let residual = worst.1.max(0.0);
            CheckEntry {
                pair: label.clone(),
                point: points.get(worst.0).cloned().unwrap_or_default(),
                residual: if worst.1.is_nan() { f64::NAN } else { residual },
                pass: residual <= tol && !worst.1.is_nan(),
            }
        })
        .collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn combine(terms: &[(f64, &[C64])], len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    for (w, v) in terms {
        if *w != 0.0 {
            for (o, x) in out.iter_mut().zip(v.iter()) {
                *o += x * *w;
            }
        }
    }
    out
}

enum Check {
    PP(usize, usize),
    PJ(usize, usize),
    JJ(usize, usize),
}

/// Sweeps every relation
/// `[P_μ, P_ν] = 0`,
/// `−i[P_μ, J_νσ] = g_μν P_σ − g_μσ P_ν`,
/// `−i[J_μν, J_ρσ] = g_μσ J_νρ + g_νρ J_μσ − g_μρ J_νσ − g_νσ J_μρ`
/// at each point for every field of the battery.
pub fn verify_algebra(
    gs: &GeneratorSet,
    points: &[Vec<f64>],
    battery: &TestFieldBattery,
    tol: f64,
) -> Result<VerificationReport, GeneratorError> {
    let n = gs.n();
    let planes = gs.j_table().planes();
    let plane_index: HashMap<(usize, usize), usize> =
        planes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let ops: Vec<DiffOperator> = gs.labelled().into_iter().map(|(_, op)| op).collect();
    let np = n + 1;
    let g = |a: usize, b: usize| if a == b { gs.metric(a) } else { 0.0 };
    // signed slot of J_ab among the ops, or None on the diagonal
    let jslot = |a: usize, b: usize| -> Option<(f64, usize)> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some((1.0, np + plane_index[&(a, b)])),
            std::cmp::Ordering::Greater => Some((-1.0, np + plane_index[&(b, a)])),
            std::cmp::Ordering::Equal => None,
        }
    };

    let mut checks = Vec::new();
    let mut labels = Vec::new();
    for mu in 0..np {
        for nu in (mu + 1)..np {
            checks.push(Check::PP(mu, nu));
            labels.push(format!("[P_{mu},P_{nu}]"));
        }
    }
    for mu in 0..np {
        for (pi, &(nu, s)) in planes.iter().enumerate() {
            checks.push(Check::PJ(mu, pi));
            labels.push(format!("[P_{mu},J_{nu}{s}]"));
        }
    }
    for a in 0..planes.len() {
        for b in a..planes.len() {
            checks.push(Check::JJ(a, b));
            let ((m, nn), (r, s)) = (planes[a], planes[b]);
            labels.push(format!("[J_{m}{nn},J_{r}{s}]"));
        }
    }

    let md = gs.matrix_dim();
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(pidx, pt)| -> Result<Vec<f64>, GeneratorError> {
            gs.check_point(pt)?;
            let evals: Vec<EvaluatedOperator> = ops
                .iter()
                .map(|op| op.evaluate(pt))
                .collect::<Result<_, _>>()?;
            let mut worst = vec![0.0f64; checks.len()];
            for fi in 0..battery.per_point {
                let f = battery.field(pt, pidx, fi, md);
                let fj = f
                    .eval_jet2(pt)
                    .map_err(super::operator::OperatorError::from)?;
                let images: Vec<Vec<Jet1>> = evals.iter().map(|e| e.apply_jet2(&fj)).collect();
                let values: Vec<Vec<C64>> = images
                    .iter()
                    .map(|im| im.iter().map(|j| j.value).collect())
                    .collect();
                let comm = |x: usize, y: usize| -> Vec<C64> {
                    commutator_from_parts(&evals[x], &evals[y], &images[x], &images[y])
                        .into_iter()
                        .map(|z| -I * z)
                        .collect()
                };
                let jv = |a: usize, b: usize| -> (f64, &[C64]) {
                    match jslot(a, b) {
                        Some((s, k)) => (s, values[k].as_slice()),
                        None => (0.0, values[0].as_slice()),
                    }
                };
                for (c, check) in checks.iter().enumerate() {
                    let r = match *check {
                        Check::PP(mu, nu) => {
                            let lhs = comm(mu, nu);
                            lhs.iter().map(|z| z.norm()).fold(0.0, f64::max)
                        }
                        Check::PJ(mu, pi) => {
                            let (nu, s) = planes[pi];
                            let lhs = comm(mu, np + pi);
                            let rhs = combine(
                                &[(g(mu, nu), &values[s]), (-g(mu, s), &values[nu])],
                                md,
                            );
                            max_diff(&lhs, &rhs)
                        }
                        Check::JJ(a, b) => {
                            let ((m, nn), (r, s)) = (planes[a], planes[b]);
                            let lhs = comm(np + a, np + b);
                            let t = |w: f64, (sg, v): (f64, &[C64])| (w * sg, v.to_vec());
                            let parts = [
                                t(g(m, s), jv(nn, r)),
                                t(g(nn, r), jv(m, s)),
                                t(-g(m, r), jv(nn, s)),
                                t(-g(nn, s), jv(m, r)),
                            ];
                            let refs: Vec<(f64, &[C64])> =
                                parts.iter().map(|(w, v)| (*w, v.as_slice())).collect();
                            max_diff(&lhs, &combine(&refs, md))
                        }
                    };
                    worst[c] = worst[c].max(r);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_, _>>()?;
    Ok(VerificationReport::from_entries(
        "commutation relations",
        tol,
        merge(&labels, points, per_point, tol),
    ))
}

/// Checks `i ∂Q/∂x_0 = [P_0, Q]` for every generator `Q` of a
/// Schrödinger-picture set.
pub fn verify_invariance_condition(
    gs: &GeneratorSet,
    points: &[Vec<f64>],
    battery: &TestFieldBattery,
    tol: f64,
) -> Result<VerificationReport, GeneratorError> {
    if gs.picture() != Picture::Schrodinger {
        return Err(GeneratorError::WrongKind {
            expected: "a Schrödinger-picture set".into(),
            got: format!("the {} picture", gs.picture()),
        });
    }
    let gens = gs.labelled();
    let labels: Vec<String> = gens.iter().map(|(l, _)| format!("[P_0,{l}]")).collect();
    let md = gs.matrix_dim();
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(pidx, pt)| -> Result<Vec<f64>, GeneratorError> {
            gs.check_point(pt)?;
            let p0 = gs.p(0).evaluate(pt)?;
            let evals: Vec<(EvaluatedOperator, EvaluatedOperator)> = gens
                .iter()
                .map(|(_, q)| Ok((q.evaluate(pt)?, q.time_slope().evaluate(pt)?)))
                .collect::<Result<_, GeneratorError>>()?;
            let mut worst = vec![0.0f64; gens.len()];
            for fi in 0..battery.per_point {
                let f = battery.field(pt, pidx, fi, md);
                let fj = f
                    .eval_jet2(pt)
                    .map_err(super::operator::OperatorError::from)?;
                let p0f = p0.apply_jet2(&fj);
                for (c, (q, slope)) in evals.iter().enumerate() {
                    let qf = q.apply_jet2(&fj);
                    let comm = commutator_from_parts(&p0, q, &p0f, &qf);
                    let lhs: Vec<C64> =
                        slope.apply_jet2(&fj).iter().map(|j| I * j.value).collect();
                    worst[c] = worst[c].max(max_diff(&lhs, &comm));
                }
            }
            Ok(worst)
        })
        .collect::<Result<_, _>>()?;
    Ok(VerificationReport::from_entries(
        "invariance condition",
        tol,
        merge(&labels, points, per_point, tol),
    ))
}

/// `P² − expected·1` at each point.
pub fn verify_p_squared(
    gs: &GeneratorSet,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<VerificationReport, GeneratorError> {
    let d = gs.matrix_dim();
    let per_point = points
        .iter()
        .map(|pt| {
            let m = gs.p_squared_matrix(pt)?;
            let e = CMatrix::identity(d, d) * C64::new(gs.expected_p_squared(pt), 0.0);
            Ok(vec![(m - e).max_abs()])
        })
        .collect::<Result<Vec<_>, GeneratorError>>()?;
    Ok(VerificationReport::from_entries(
        "P^2 mass shell",
        tol,
        merge(&["P^2".to_string()], points, per_point, tol),
    ))
}

/// A weighted sum of operator products; each product applies its factors
/// right to left.
#[derive(Debug, Clone)]
pub struct OperatorPolynomial {
    pub base: Vec<DiffOperator>,
    pub terms: Vec<(C64, Vec<usize>)>,
}

impl OperatorPolynomial {
    /// `(Σ w · A_1 A_2 … f)` as Taylor expansions; coefficient expansions
    /// are taken at the field's order.
    pub fn apply_taylor(
        &self,
        point: &[f64],
        f: &[Taylor],
    ) -> Result<Vec<Taylor>, GeneratorError> {
        let order = f[0].order();
        let evals: Vec<TaylorOperator> = self
            .base
            .iter()
            .map(|op| op.evaluate_taylor(point, order))
            .collect::<Result<_, _>>()?;
        self.apply_evaluated(&evals, f)
    }

    pub fn apply_evaluated(
        &self,
        evals: &[TaylorOperator],
        f: &[Taylor],
    ) -> Result<Vec<Taylor>, GeneratorError> {
        let mut memo: HashMap<Vec<usize>, Vec<Taylor>> = HashMap::new();
        let mut acc: Option<Vec<Taylor>> = None;
        for (w, idx) in &self.terms {
            let mut cur: Vec<Taylor> = f.to_vec();
            for start in (0..idx.len()).rev() {
                let key = idx[start..].to_vec();
                cur = match memo.get(&key) {
                    Some(v) => v.clone(),
                    None => {
                        let v = evals[idx[start]].apply(&cur);
                        memo.insert(key, v.clone());
                        v
                    }
                };
            }
            let scaled: Vec<Taylor> = cur.iter().map(|t| t.scale(*w)).collect();
            acc = Some(match acc {
                None => scaled,
                Some(a) => a
                    .iter()
                    .zip(&scaled)
                    .map(|(x, y)| x.add(y))
                    .collect(),
            });
        }
        Ok(acc.unwrap_or_else(|| f.iter().map(|t| t.scale(C64::new(0.0, 0.0))).collect()))
    }
}

/// `W = ½(P^λP_λ)(J^νσJ_νσ) − P_μP_ν J^μσ J^ν_σ`.
pub fn casimir_w(gs: &GeneratorSet) -> OperatorPolynomial {
    let n = gs.n();
    let np = n + 1;
    let planes = gs.j_table().planes();
    let mut base: Vec<DiffOperator> = (0..np).map(|mu| gs.p(mu).clone()).collect();
    let mut slot = HashMap::new();
    for (i, &(a, b)) in planes.iter().enumerate() {
        base.push(gs.j_table().upper(a, b).clone());
        slot.insert((a, b), np + i);
    }
    let js = |a: usize, b: usize| -> (f64, usize) {
        if a < b {
            (1.0, slot[&(a, b)])
        } else {
            (-1.0, slot[&(b, a)])
        }
    };
    let g = |a: usize| gs.metric(a);
    let mut terms = Vec::new();
    for l in 0..np {
        for nu in 0..np {
            for s in 0..np {
                if nu == s {
                    continue;
                }
                let (_, k) = js(nu, s);
                let w = 0.5 * g(l) * g(nu) * g(s);
                terms.push((C64::new(w, 0.0), vec![l, l, k, k]));
            }
        }
    }
    for mu in 0..np {
        for nu in 0..np {
            for s in 0..np {
                if s == mu || s == nu {
                    continue;
                }
                let (s1, k1) = js(mu, s);
                let (s2, k2) = js(nu, s);
                let w = -g(mu) * g(nu) * g(s) * s1 * s2;
                terms.push((C64::new(w, 0.0), vec![mu, nu, k1, k2]));
            }
        }
    }
    OperatorPolynomial { base, terms }
}

/// Verifies `[W, P_μ] = 0`, `[W, J_μν] = 0` and `W = P² · C` where `C` is
/// the little-group Casimir `½ Σ g g S²`, with order-3 Taylor test fields.
pub fn verify_casimir(
    gs: &GeneratorSet,
    w: &OperatorPolynomial,
    points: &[Vec<f64>],
    battery: &TestFieldBattery,
    tol: f64,
) -> Result<VerificationReport, GeneratorError> {
    let gens = gs.labelled();
    let mut labels: Vec<String> = gens.iter().map(|(l, _)| format!("[W,{l}]")).collect();
    labels.push("W - P^2 C".to_string());
    let md = gs.matrix_dim();
    let casimir = gs.rep().little_casimir();
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(pidx, pt)| -> Result<Vec<f64>, GeneratorError> {
            gs.check_point(pt)?;
            let wevals3: Vec<TaylorOperator> = w
                .base
                .iter()
                .map(|op| op.evaluate_taylor(pt, 3))
                .collect::<Result<_, _>>()?;
            let gevals: Vec<TaylorOperator> = gens
                .iter()
                .map(|(_, op)| op.evaluate_taylor(pt, 3))
                .collect::<Result<_, _>>()?;
            let p2 = gs.p_squared_matrix(pt)?;
            let mut worst = vec![0.0f64; labels.len()];
            for fi in 0..battery.per_point {
                let f = battery.field(pt, pidx, fi, md);
                let ft = f
                    .eval_taylor(pt, 3)
                    .map_err(super::operator::OperatorError::from)?;
                let wf = w.apply_evaluated(&wevals3, &ft)?;
                for (c, ge) in gevals.iter().enumerate() {
                    let gf = ge.apply(&ft);
                    let wgf = w.apply_evaluated(&wevals3, &gf)?;
                    let gwf = ge.apply(&wf);
                    let r = wgf
                        .iter()
                        .zip(&gwf)
                        .map(|(a, b)| (a.value() - b.value()).norm())
                        .fold(0.0, f64::max);
                    worst[c] = worst[c].max(r);
                }
                let fv: Vec<C64> = ft.iter().map(|t| t.value()).collect();
                let expect = &p2 * &casimir * nalgebra::DVector::from_vec(fv);
                let r = wf
                    .iter()
                    .zip(expect.iter())
                    .map(|(a, b)| (a.value() - b).norm())
                    .fold(0.0, f64::max);
                let last = labels.len() - 1;
                worst[last] = worst[last].max(r);
            }
            Ok(worst)
        })
        .collect::<Result<_, _>>()?;
    Ok(VerificationReport::from_entries(
        "Casimir W",
        tol,
        merge(&labels, points, per_point, tol),
    ))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("shape mismatch: {0}")]
pub struct ShapeError(pub String);

/// Residuals of `[B_μ, J_ρσ] = δ_μρ B_σ − δ_μσ B_ρ` for every `μ` and plane
/// `ρ < σ`; `B` is indexed like the plane table's index range.
pub fn check_b_covariance(
    b: &[CMatrix],
    j: &PlaneTable<CMatrix>,
    tol: f64,
) -> Result<VerificationReport, ShapeError> {
    let idx = j.indices();
    if idx.len() != b.len() {
        return Err(ShapeError(format!(
            "{} B matrices for {} generator indices",
            b.len(),
            idx.len()
        )));
    }
    let d = b.first().map(|m| m.nrows()).unwrap_or(0);
    let square = |m: &CMatrix| m.nrows() == d && m.ncols() == d;
    if !b.iter().all(square) || !j.values().iter().all(square) {
        return Err(ShapeError("all matrices must be square of equal size".into()));
    }
    let base = idx.start;
    let bm = |mu: usize| &b[mu - base];
    let mut entries = Vec::new();
    for mu in idx.clone() {
        for (r, s) in j.planes() {
            let jm = j.upper(r, s);
            let lhs = bm(mu) * jm - jm * bm(mu);
            let mut rhs = CMatrix::zeros(d, d);
            if mu == r {
                rhs += bm(s);
            }
            if mu == s {
                rhs -= bm(r);
            }
            let residual = (lhs - rhs).max_abs();
            entries.push(CheckEntry {
                pair: format!("[B_{mu},J_{r}{s}]"),
                point: Vec::new(),
                residual,
                pass: residual <= tol,
            });
        }
    }
    Ok(VerificationReport::from_entries("B covariance", tol, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_algebra::generators::{build_covariant_class1, build_qm, RepClass, Sign};
    use crate::spin_reps::{so3_spin, trivial};

    #[test]
    fn battery_is_reproducible() {
        let b = TestFieldBattery::new(7, 2);
        let pt = [0.1, 0.2];
        let f1 = b.field(&pt, 3, 1, 2).eval_value(&pt).unwrap();
        let f2 = b.field(&pt, 3, 1, 2).eval_value(&pt).unwrap();
        assert_eq!(f1, f2);
        let f3 = b.field(&pt, 4, 1, 2).eval_value(&pt).unwrap();
        assert_ne!(f1, f3);
    }

    #[test]
    fn small_trivial_sweep() {
        let gs = build_covariant_class1(2, &trivial(2).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = gs.sample_points(&mut rng, 4);
        let r = verify_algebra(&gs, &pts, &TestFieldBattery::new(1, 2), 1e-12).unwrap();
        assert!(r.pass, "{r}");
    }

    #[test]
    fn dropping_the_boost_spin_term_breaks_closure() {
        let rep = so3_spin(0.5).unwrap();
        let gs = build_qm(RepClass::I, 3, &rep, 1.0, Sign::Plus, None).unwrap();
        let broken = gs.with_j(0, 1, gs.j(0, 1).orbital_part());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = gs.sample_points(&mut rng, 3);
        let r = verify_algebra(&broken, &pts, &TestFieldBattery::new(3, 2), 1e-9).unwrap();
        assert!(!r.pass);
        assert!(r.failures().iter().any(|e| e.pair.starts_with("[J_01,J_0")));
    }

    #[test]
    fn zero_b_is_covariant() {
        let rep = so3_spin(1.0).unwrap();
        let zeros = vec![CMatrix::zeros(3, 3); 3];
        let r = check_b_covariance(&zeros, rep.table(), 0.0).unwrap();
        assert!(r.pass);
        assert!(check_b_covariance(&zeros[..2], rep.table(), 0.0).is_err());
    }
}
