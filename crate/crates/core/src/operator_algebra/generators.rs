//! Generator families `{P_μ, J_μν}` of P(1,n) as momentum-space operators.
//!
//! Covariant sets act on functions of `(p_0, …, p_n)`; quantum-mechanical
//! sets act on functions of `(p_1, …, p_n)` with `p_0` fixed by the mass
//! shell. In both cases `x_μ = −i g_μμ ∂/∂p_μ`, so `x_k = i ∂/∂p_k`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::operator::{DiffOperator, OperatorError};
use crate::jet_calculus::SmoothField;
use crate::spin_reps::{self, CMatrix, LittleGroupRep, PlaneTable, Signature, SpinError};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("representation mismatch: {0}")]
    Representation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operation requires {expected}, got {got}")]
    WrongKind { expected: String, got: String },
    #[error("point {point:?} is outside the domain: {reason}")]
    Domain { point: Vec<f64>, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepClass {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    IILimit,
    #[serde(rename = "III")]
    III,
}

impl FromStr for RepClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(RepClass::I),
            "II" | "2" => Ok(RepClass::IILimit),
            "III" | "3" => Ok(RepClass::III),
            other => Err(format!("unknown class {other:?} (expected I, II or III)")),
        }
    }
}

impl fmt::Display for RepClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepClass::I => "I",
            RepClass::IILimit => "II",
            RepClass::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Covariant,
    Heisenberg,
    Schrodinger,
}

impl FromStr for Picture {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "covariant" => Ok(Picture::Covariant),
            "heisenberg" => Ok(Picture::Heisenberg),
            "schrodinger" | "schroedinger" | "schrödinger" => Ok(Picture::Schrodinger),
            other => Err(format!(
                "unknown picture {other:?} (expected covariant, heisenberg or schrodinger)"
            )),
        }
    }
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Picture::Covariant => "covariant",
            Picture::Heisenberg => "heisenberg",
            Picture::Schrodinger => "schrodinger",
        })
    }
}

/// Energy branch `ε = p_0/|p_0|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl FromStr for Sign {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "+1" | "1" | "+" => Ok(Sign::Plus),
            "-1" | "-" => Ok(Sign::Minus),
            other => Err(format!("unknown sign {other:?} (expected +1 or -1)")),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Denominator of the spin terms in the covariant forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denominator {
    /// `p_0 + √(p²)` (class I) and `p_n + √(−p²)` (class III).
    Analytic,
    /// `√(p_0²) + √(p²)` and `√(p_n²) + √(−p²)`; agrees with the analytic
    /// form only on `p_0 > 0` (resp. `p_n > 0`).
    Verbatim,
}

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    n: usize,
    class: RepClass,
    picture: Picture,
    mass: f64,
    eps: Sign,
    x0: Option<f64>,
    rep: LittleGroupRep,
    p: Vec<DiffOperator>,
    j: PlaneTable<DiffOperator>,
}

/// Builders share the momentum variables, `x` operators and orbital parts.
struct Frame {
    n: usize,
    covariant: bool,
    md: usize,
    p0: SmoothField,
}

impl Frame {
    fn covariant(n: usize, md: usize) -> Self {
        Self {
            n,
            covariant: true,
            md,
            p0: SmoothField::var(n + 1, 0),
        }
    }

    fn reduced(n: usize, md: usize, p0: SmoothField) -> Self {
        Self {
            n,
            covariant: false,
            md,
            p0,
        }
    }

    fn dim(&self) -> usize {
        if self.covariant {
            self.n + 1
        } else {
            self.n
        }
    }

    fn g(&self, mu: usize) -> f64 {
        if mu == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn p(&self, mu: usize) -> SmoothField {
        match (mu, self.covariant) {
            (0, _) => self.p0.clone(),
            (k, true) => SmoothField::var(self.n + 1, k),
            (k, false) => SmoothField::var(self.n, k - 1),
        }
    }

    fn var(&self, mu: usize) -> usize {
        if self.covariant {
            mu
        } else {
            assert!(mu >= 1, "x_0 is not an operator in the reduced forms");
            mu - 1
        }
    }

    fn x(&self, mu: usize) -> DiffOperator {
        DiffOperator::derivative(self.dim(), self.md, self.var(mu)).scale(-I * self.g(mu))
    }

    fn mult(&self, f: SmoothField) -> DiffOperator {
        DiffOperator::multiplication(f, None, self.md)
    }

    fn spin(&self, f: SmoothField, m: CMatrix) -> DiffOperator {
        DiffOperator::multiplication(f, Some(m), self.md)
    }

    fn constant(&self, m: CMatrix) -> DiffOperator {
        DiffOperator::constant_matrix(self.dim(), m)
    }

    /// `x_μ p_ν − x_ν p_μ` as operator products.
    fn orbital(&self, mu: usize, nu: usize) -> DiffOperator {
        self.x(mu)
            .compose_with_multiplication(&self.p(nu))
            .sub(&self.x(nu).compose_with_multiplication(&self.p(mu)))
    }

    /// `−½(x_k p_0 + p_0 x_k)`.
    fn symmetrized_boost(&self, k: usize) -> DiffOperator {
        let xk = self.x(k);
        xk.compose_with_multiplication(&self.p0)
            .add(&xk.left_multiply(&self.p0))
            .scale(C64::new(-0.5, 0.0))
    }

    fn momenta(&self) -> Vec<DiffOperator> {
        (0..=self.n).map(|mu| self.mult(self.p(mu))).collect()
    }

    fn sum_p_squared_spatial(&self, range: std::ops::RangeInclusive<usize>) -> SmoothField {
        range.fold(SmoothField::zero(self.dim()), |acc, k| &acc + &self.p(k).square())
    }
}

fn require_rep(rep: &LittleGroupRep, n: usize, sig: Signature) -> Result<(), GeneratorError> {
    if rep.n() != n {
        return Err(GeneratorError::Representation(format!(
            "rep is for n = {}, generators need n = {n}",
            rep.n()
        )));
    }
    if rep.signature() != sig {
        return Err(GeneratorError::Representation(format!(
            "expected a {sig:?} little-group rep, got {:?}",
            rep.signature()
        )));
    }
    if n < 2 {
        return Err(GeneratorError::InvalidParameter(format!("n = {n} < 2")));
    }
    Ok(())
}

fn require_positive(name: &str, v: f64) -> Result<(), GeneratorError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GeneratorError::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Class I, covariant form over `(p_0, …, p_n)`:
/// `J_kl = x_[k p_l] + S_kl`, `J_0k = x_[0 p_k] − S_kl p_l / D`.
pub fn build_covariant_class1(n: usize, rep: &LittleGroupRep) -> Result<GeneratorSet, GeneratorError> {
    build_covariant_class1_with(n, rep, Sign::Plus, Denominator::Analytic)
}

/// As [`build_covariant_class1`], choosing the sampled energy branch and
/// the denominator form.
pub fn build_covariant_class1_with(
    n: usize,
    rep: &LittleGroupRep,
    eps: Sign,
    denominator: Denominator,
) -> Result<GeneratorSet, GeneratorError> {
    require_rep(rep, n, Signature::Compact)?;
    let fr = Frame::covariant(n, rep.dim());
    let p2 = &fr.p(0).square() - &fr.sum_p_squared_spatial(1..=n);
    let lead = match denominator {
        Denominator::Analytic => fr.p(0),
        Denominator::Verbatim => fr.p(0).square().sqrt(),
    };
    let inv_d = (&lead + &p2.sqrt()).recip();
    let j = PlaneTable::from_fn(0, n + 1, |mu, nu| {
        let l = fr.orbital(mu, nu);
        if mu == 0 {
            let k = nu;
            (1..=n).filter(|&l| l != k).fold(l, |acc, l| {
                acc.sub(&fr.spin(&fr.p(l) * &inv_d, rep.generator(k, l)))
            })
        } else {
            l.add(&fr.constant(rep.generator(mu, nu)))
        }
    });
    Ok(GeneratorSet {
        n,
        class: RepClass::I,
        picture: Picture::Covariant,
        mass: 0.0,
        eps,
        x0: None,
        rep: rep.clone(),
        p: fr.momenta(),
        j,
    })
}

/// Class III, covariant form; `rep` must be an O(1,n−1) rep (indices
/// `0..n`), for instance from [`spin_reps::tilde_continue`].
pub fn build_covariant_class3(
    n: usize,
    rep: &LittleGroupRep,
) -> Result<GeneratorSet, GeneratorError> {
    build_covariant_class3_with(n, rep, Sign::Plus, Denominator::Analytic)
}

pub fn build_covariant_class3_with(
    n: usize,
    rep: &LittleGroupRep,
    eps: Sign,
    denominator: Denominator,
) -> Result<GeneratorSet, GeneratorError> {
    require_rep(rep, n, Signature::Lorentz)?;
    let fr = Frame::covariant(n, rep.dim());
    let minus_p2 = &fr.sum_p_squared_spatial(1..=n) - &fr.p(0).square();
    let lead = match denominator {
        Denominator::Analytic => fr.p(n),
        Denominator::Verbatim => fr.p(n).square().sqrt(),
    };
    let inv_d = (&lead + &minus_p2.sqrt()).recip();
    let j = lorentz_generators(&fr, rep, &inv_d, |mu, nu| fr.orbital(mu, nu));
    Ok(GeneratorSet {
        n,
        class: RepClass::III,
        picture: Picture::Covariant,
        mass: 0.0,
        eps,
        x0: None,
        rep: rep.clone(),
        p: fr.momenta(),
        j,
    })
}

/// The class III table shared by the covariant and reduced forms; `boost`
/// supplies the orbital part of `J_0k` (which differs between them).
fn lorentz_generators(
    fr: &Frame,
    rep: &LittleGroupRep,
    inv_d: &SmoothField,
    boost: impl Fn(usize, usize) -> DiffOperator,
) -> PlaneTable<DiffOperator> {
    let n = fr.n;
    PlaneTable::from_fn(0, n + 1, |mu, nu| match (mu, nu) {
        (0, k) if k == n => (1..n).fold(boost(0, n), |acc, a| {
            acc.sub(&fr.spin(&fr.p(a) * inv_d, rep.generator(0, a)))
        }),
        (0, a) => boost(0, a).add(&fr.constant(rep.generator(0, a))),
        (a, k) if k == n => {
            let mut op = fr.orbital(a, n);
            for b in (1..n).filter(|&b| b != a) {
                op = op.sub(&fr.spin(&fr.p(b) * inv_d, rep.generator(a, b)));
            }
            op.add(&fr.spin(&fr.p(0) * inv_d, rep.generator(a, 0)))
        }
        (a, b) => fr.orbital(a, b).add(&fr.constant(rep.generator(a, b))),
    })
}

/// Builds the class III set of the exchanged axes from a covariant class I
/// set: `P̃_0 = −iP_n`, `P̃_n = iP_0`, `J̃_0a = iJ_an`, `J̃_an = −iJ_0a`,
/// `J̃_0n = −J_0n`, followed by `p_0 = −i q_n`, `p_n = i q_0` and the
/// continuation of every square root below its cut.
pub fn tilde_transform(gs: &GeneratorSet) -> Result<GeneratorSet, GeneratorError> {
    if gs.class != RepClass::I || gs.picture != Picture::Covariant {
        return Err(GeneratorError::WrongKind {
            expected: "a covariant class I set".into(),
            got: format!("class {} in the {} picture", gs.class, gs.picture),
        });
    }
    let n = gs.n;
    let dim = n + 1;
    let q = |k: usize| SmoothField::var(dim, k);
    let mut subs: Vec<SmoothField> = (0..dim).map(q).collect();
    subs[0] = q(n).scale(-I);
    subs[n] = q(0).scale(I);
    let mut perm: Vec<usize> = (0..dim).collect();
    perm[0] = n;
    perm[n] = 0;
    let mut factors = vec![C64::new(1.0, 0.0); dim];
    factors[0] = -I;
    factors[n] = I;
    let transport = |op: &DiffOperator| {
        op.change_variables(&subs, &perm, &factors)
            .map_fields(|f| f.continue_sqrt_lower())
    };
    let mut p: Vec<DiffOperator> = gs.p.clone();
    p[0] = gs.p[n].scale(-I);
    p[n] = gs.p[0].scale(I);
    let p = p.iter().map(transport).collect();
    let j = PlaneTable::from_fn(0, dim, |mu, nu| {
        let op = match (mu, nu) {
            (0, k) if k == n => gs.j(0, n).neg(),
            (0, a) => gs.j(a, n).scale(I),
            (a, k) if k == n => gs.j(0, a).scale(-I),
            (a, b) => gs.j(a, b),
        };
        transport(&op)
    });
    Ok(GeneratorSet {
        n,
        class: RepClass::III,
        picture: Picture::Covariant,
        mass: 0.0,
        eps: gs.eps,
        x0: None,
        rep: spin_reps::tilde_continue(&gs.rep)?,
        p,
        j,
    })
}

/// Quantum-mechanical set over `(p_1, …, p_n)`. `x0 = None` gives the
/// Heisenberg picture, `Some(t)` the Schrödinger picture at time `t`.
/// Class I uses `mass = κ` (κ = 0 gives the class II limit), class III uses
/// `mass = η` and needs an O(1,n−1) rep.
pub fn build_qm(
    class: RepClass,
    n: usize,
    rep: &LittleGroupRep,
    mass: f64,
    eps: Sign,
    x0: Option<f64>,
) -> Result<GeneratorSet, GeneratorError> {
    let md = rep.dim();
    let e = C64::new(eps.value(), 0.0);
    let pvec2 = |fr_n: usize| {
        (0..fr_n).fold(SmoothField::zero(fr_n), |acc, k| {
            &acc + &SmoothField::var(fr_n, k).square()
        })
    };
    let (fr, j) = match class {
        RepClass::I | RepClass::IILimit => {
            require_rep(rep, n, Signature::Compact)?;
            if class == RepClass::I {
                require_positive("kappa", mass)?;
            } else if mass != 0.0 {
                return Err(GeneratorError::InvalidParameter(
                    "the class II limit has zero mass".into(),
                ));
            }
            let p0 = (&pvec2(n) + &SmoothField::real(n, mass * mass)).sqrt().scale(e);
            let fr = Frame::reduced(n, md, p0);
            let inv_d = (&fr.p(0) + &SmoothField::real(n, mass)).recip();
            let j = PlaneTable::from_fn(0, n + 1, |mu, nu| {
                if mu == 0 {
                    let k = nu;
                    (1..=n).filter(|&l| l != k).fold(fr.symmetrized_boost(k), |acc, l| {
                        acc.sub(&fr.spin(&fr.p(l) * &inv_d, rep.generator(k, l)))
                    })
                } else {
                    fr.orbital(mu, nu).add(&fr.constant(rep.generator(mu, nu)))
                }
            });
            (fr, j)
        }
        RepClass::III => {
            require_rep(rep, n, Signature::Lorentz)?;
            require_positive("eta", mass)?;
            let p0 = (&pvec2(n) - &SmoothField::real(n, mass * mass)).sqrt().scale(e);
            let fr = Frame::reduced(n, md, p0);
            let inv_d = (&fr.p(n) + &SmoothField::real(n, mass)).recip();
            let j = lorentz_generators(&fr, rep, &inv_d, |_, k| fr.symmetrized_boost(k));
            (fr, j)
        }
    };
    let p = fr.momenta();
    let j = match x0 {
        None => j,
        Some(t) => j.map(|mu, nu, op| {
            if mu == 0 {
                op.with_time_term(t, &p[nu])
            } else {
                op.clone()
            }
        }),
    };
    Ok(GeneratorSet {
        n,
        class,
        picture: if x0.is_some() {
            Picture::Schrodinger
        } else {
            Picture::Heisenberg
        },
        mass,
        eps,
        x0,
        rep: rep.clone(),
        p,
        j,
    })
}

pub fn build_qm_heisenberg(
    class: RepClass,
    n: usize,
    rep: &LittleGroupRep,
    mass: f64,
    eps: Sign,
) -> Result<GeneratorSet, GeneratorError> {
    build_qm(class, n, rep, mass, eps, None)
}

pub fn build_qm_schrodinger(
    class: RepClass,
    n: usize,
    rep: &LittleGroupRep,
    mass: f64,
    eps: Sign,
    x0: f64,
) -> Result<GeneratorSet, GeneratorError> {
    build_qm(class, n, rep, mass, eps, Some(x0))
}

/// Massless limit of the class I Schrödinger-picture set (at `x_0 = 0`).
pub fn build_class2_limit(
    n: usize,
    rep: &LittleGroupRep,
    eps: Sign,
) -> Result<GeneratorSet, GeneratorError> {
    build_qm(RepClass::IILimit, n, rep, 0.0, eps, Some(0.0))
}

impl GeneratorSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class(&self) -> RepClass {
        self.class
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    /// κ (class I), η (class III), 0 for the class II limit and covariant
    /// sets.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn eps(&self) -> Sign {
        self.eps
    }

    pub fn x0(&self) -> Option<f64> {
        self.x0
    }

    pub fn rep(&self) -> &LittleGroupRep {
        &self.rep
    }

    /// Number of momentum variables the operators act on.
    pub fn var_dim(&self) -> usize {
        match self.picture {
            Picture::Covariant => self.n + 1,
            _ => self.n,
        }
    }

    pub fn matrix_dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn metric(&self, mu: usize) -> f64 {
        if mu == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn p(&self, mu: usize) -> &DiffOperator {
        &self.p[mu]
    }

    /// `J_μν` with antisymmetry applied.
    pub fn j(&self, mu: usize, nu: usize) -> DiffOperator {
        match self.j.get(mu, nu) {
            Some((s, op)) if s > 0.0 => op.clone(),
            Some((_, op)) => op.neg(),
            None => DiffOperator::zero(self.var_dim(), self.matrix_dim()),
        }
    }

    pub fn j_table(&self) -> &PlaneTable<DiffOperator> {
        &self.j
    }

    /// Every generator with a label, `P_μ` first, then `J_μν` for `μ < ν`.
    pub fn labelled(&self) -> Vec<(String, DiffOperator)> {
        let mut out: Vec<_> = self
            .p
            .iter()
            .enumerate()
            .map(|(mu, op)| (format!("P_{mu}"), op.clone()))
            .collect();
        for (mu, nu) in self.j.planes() {
            out.push((format!("J_{mu}{nu}"), self.j.upper(mu, nu).clone()));
        }
        out
    }

    /// Copy with `J_μν` (`μ < ν`) replaced.
    pub fn with_j(&self, mu: usize, nu: usize, op: DiffOperator) -> Self {
        let mut out = self.clone();
        *out.j.upper_mut(mu, nu) = op;
        out
    }

    /// Copy with every spin term removed.
    pub fn orbital_part(&self) -> Self {
        let mut out = self.clone();
        out.j = self.j.map(|_, _, op| op.orbital_part());
        out
    }

    /// The value `P²` should take at `point`.
    pub fn expected_p_squared(&self, point: &[f64]) -> f64 {
        match (self.picture, self.class) {
            (Picture::Covariant, _) => {
                point[0] * point[0] - point[1..].iter().map(|x| x * x).sum::<f64>()
            }
            (_, RepClass::I) => self.mass * self.mass,
            (_, RepClass::IILimit) => 0.0,
            (_, RepClass::III) => -self.mass * self.mass,
        }
    }

    /// `P² = Σ g_μμ P_μ²` at a point, as a matrix (the `P_μ` are
    /// multiplication operators).
    pub fn p_squared_matrix(&self, point: &[f64]) -> Result<CMatrix, GeneratorError> {
        let d = self.matrix_dim();
        let mut acc = CMatrix::zeros(d, d);
        for (mu, p) in self.p.iter().enumerate() {
            if !p.is_multiplication() {
                return Err(GeneratorError::WrongKind {
                    expected: "multiplicative momenta".into(),
                    got: format!("P_{mu} with derivative terms"),
                });
            }
            let m = p.dense_coefficients(point)?.mult;
            acc += (&m * &m) * C64::new(self.metric(mu), 0.0);
        }
        Ok(acc)
    }

    /// Rejects points outside the declared domain of this set.
    pub fn check_point(&self, point: &[f64]) -> Result<(), GeneratorError> {
        let fail = |reason: String| {
            Err(GeneratorError::Domain {
                point: point.to_vec(),
                reason,
            })
        };
        if point.len() != self.var_dim() {
            return fail(format!("expected {} coordinates", self.var_dim()));
        }
        let spatial = |pt: &[f64]| pt.iter().map(|x| x * x).sum::<f64>();
        match (self.picture, self.class) {
            (Picture::Covariant, RepClass::I) => {
                let p2 = point[0] * point[0] - spatial(&point[1..]);
                if p2 <= 0.0 {
                    return fail(format!("p² = {p2} is not positive"));
                }
            }
            (Picture::Covariant, _) => {
                let p2 = point[0] * point[0] - spatial(&point[1..]);
                if p2 >= 0.0 {
                    return fail(format!("p² = {p2} is not negative"));
                }
            }
            (_, RepClass::III) => {
                let s = spatial(point);
                if s <= self.mass * self.mass {
                    return fail(format!("tachyonic point: p_k² = {s} ≤ η²"));
                }
            }
            (_, RepClass::IILimit) => {
                if spatial(point) == 0.0 {
                    return fail("singular point p = 0 of the massless limit".into());
                }
            }
            _ => {}
        }
        for (_, op) in self.labelled() {
            op.evaluate(point)?;
        }
        Ok(())
    }

    /// Draws in-domain points for sweeps, away from every singular set.
    pub fn sample_points<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Vec<f64>> {
        let n = self.n;
        let e = self.eps.value();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let pt: Vec<f64> = match (self.picture, self.class) {
                (Picture::Covariant, RepClass::I) => {
                    let m2 = rng.random_range(0.5..2.0);
                    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.8..0.8)).collect();
                    let s: f64 = v.iter().map(|x| x * x).sum();
                    v.insert(0, e * (s + m2).sqrt());
                    v
                }
                (Picture::Covariant, _) => {
                    let m2: f64 = rng.random_range(0.5..2.0);
                    let p0: f64 = rng.random_range(-0.8..0.8);
                    let pa: Vec<f64> = (1..n).map(|_| rng.random_range(-0.5..0.5)).collect();
                    let rest = m2 + p0 * p0 - pa.iter().map(|x| x * x).sum::<f64>();
                    if rest < 0.09 {
                        continue;
                    }
                    let mut v = vec![p0];
                    v.extend(pa);
                    v.push(rest.sqrt());
                    v
                }
                (_, RepClass::I) => (0..n).map(|_| rng.random_range(-0.8..0.8)).collect(),
                (_, RepClass::IILimit) => {
                    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.8..0.8)).collect();
                    if v.iter().map(|x| x * x).sum::<f64>().sqrt() <= 0.1 {
                        continue;
                    }
                    v
                }
                (_, RepClass::III) => {
                    let eta = self.mass;
                    let mut v: Vec<f64> = (1..n).map(|_| rng.random_range(-eta..eta)).collect();
                    v.push(rng.random_range(0.3 * eta..1.5 * eta));
                    if v.iter().map(|x| x * x).sum::<f64>() < 1.2 * eta * eta {
                        continue;
                    }
                    v
                }
            };
            if self.check_point(&pt).is_ok() {
                out.push(pt);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_reps::{o4_irrep, so3_spin, tilde_continue, trivial, MaxAbs};

    #[test]
    fn trivial_rep_has_no_spin_terms() {
        let gs = build_covariant_class1(4, &trivial(4).unwrap()).unwrap();
        let orb = gs.orbital_part();
        let pt = [2.0, 0.1, -0.3, 0.2, 0.4];
        for (mu, nu) in gs.j_table().planes() {
            let a = gs.j(mu, nu).dense_coefficients(&pt).unwrap();
            let b = orb.j(mu, nu).dense_coefficients(&pt).unwrap();
            assert_eq!(a.max_difference(&b), 0.0);
        }
    }

    #[test]
    fn qm_energy_and_p_squared() {
        let rep = so3_spin(0.5).unwrap();
        let gs = build_qm_heisenberg(RepClass::I, 3, &rep, 1.5, Sign::Minus).unwrap();
        let pt = [0.3, 0.4, 1.2];
        let p0 = gs.p(0).dense_coefficients(&pt).unwrap().mult[(0, 0)];
        let expect = -(0.09f64 + 0.16 + 1.44 + 2.25).sqrt();
        assert!((p0.re - expect).abs() < 1e-15);
        let p2 = gs.p_squared_matrix(&pt).unwrap();
        assert!((p2 - CMatrix::identity(2, 2) * C64::new(2.25, 0.0)).max_abs() < 1e-12);
    }

    #[test]
    fn schrodinger_at_zero_time_is_heisenberg() {
        let (rep, _) = o4_irrep(0.0, 0.5).unwrap();
        let h = build_qm_heisenberg(RepClass::I, 4, &rep, 1.0, Sign::Plus).unwrap();
        let s = build_qm_schrodinger(RepClass::I, 4, &rep, 1.0, Sign::Plus, 0.0).unwrap();
        let pt = [0.2, -0.5, 0.3, 0.1];
        for ((_, a), (_, b)) in h.labelled().iter().zip(s.labelled()) {
            let da = a.dense_coefficients(&pt).unwrap();
            let db = b.dense_coefficients(&pt).unwrap();
            assert_eq!(da, db);
        }
    }

    #[test]
    fn wrong_rep_kinds_are_rejected() {
        let rep = so3_spin(0.5).unwrap();
        assert!(build_covariant_class3(3, &rep).is_err());
        assert!(build_covariant_class1(4, &rep).is_err());
        let lor = tilde_continue(&rep).unwrap();
        assert!(build_qm_heisenberg(RepClass::I, 3, &lor, 1.0, Sign::Plus).is_err());
        assert!(build_qm_heisenberg(RepClass::III, 3, &lor, 0.0, Sign::Plus).is_err());
        let qm = build_qm_heisenberg(RepClass::I, 3, &rep, 1.0, Sign::Plus).unwrap();
        assert!(tilde_transform(&qm).is_err());
    }

    #[test]
    fn domain_checks() {
        let rep = so3_spin(0.5).unwrap();
        let lor = tilde_continue(&rep).unwrap();
        let cov = build_covariant_class1(3, &rep).unwrap();
        assert!(cov.check_point(&[0.5, 1.0, 0.0, 0.0]).is_err());
        let qm3 = build_qm_heisenberg(RepClass::III, 3, &lor, 1.0, Sign::Plus).unwrap();
        assert!(matches!(
            qm3.check_point(&[0.1, 0.1, 0.5]),
            Err(GeneratorError::Domain { .. })
        ));
        let c2 = build_class2_limit(3, &rep, Sign::Plus).unwrap();
        assert!(c2.check_point(&[0.0, 0.0, 0.0]).is_err());
    }
}
