//! Finite-dimensional little-group generators.
//!
//! Compact reps realize O(n) on planes `(k,l)`, `1 ≤ k < l ≤ n`; Lorentz reps
//! realize O(1,n−1) on planes over the indices `0..n−1`. All matrices are in
//! the weight (ladder) basis, with `S_3` and `T_3` diagonal.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub type CMatrix = DMatrix<C64>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest entry modulus of a complex matrix.
pub trait MaxAbs {
    fn max_abs(&self) -> f64;
}

impl MaxAbs for CMatrix {
    fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("{0} is not a non-negative half-integer")]
    NotHalfInteger(f64),
    #[error("representation needs n >= {min}, got {n}")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("label {label} is only available for n = {required}, got n = {n}")]
    WrongDimension {
        label: String,
        required: usize,
        n: usize,
    },
    #[error("operation expects a compact representation")]
    NotCompact,
    #[error("cannot parse representation label {0:?}")]
    BadLabel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    /// O(n), indices `1..=n`, metric `−δ`.
    Compact,
    /// O(1,n−1), indices `0..n`, metric `diag(+1, −1, …)`.
    Lorentz,
}

/// Irrep labels. Spins are stored doubled so they stay integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepLabel {
    Trivial,
    Vector,
    Spin { twice_s: u32 },
    SpinIsospin { twice_s: u32, twice_t: u32 },
}

fn half_integer_to_twice(x: f64) -> Result<u32, SpinError> {
    let t = 2.0 * x;
    if x.is_finite() && x >= 0.0 && (t - t.round()).abs() < 1e-12 && t <= 1e6 {
        Ok(t.round() as u32)
    } else {
        Err(SpinError::NotHalfInteger(x))
    }
}

fn parse_half(s: &str) -> Option<u32> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: u32 = num.trim().parse().ok()?;
        match den.trim() {
            "2" => Some(num),
            "1" => Some(2 * num),
            _ => None,
        }
    } else {
        let x: f64 = s.parse().ok()?;
        half_integer_to_twice(x).ok()
    }
}

fn fmt_half(twice: u32) -> String {
    if twice % 2 == 0 {
        format!("{}", twice / 2)
    } else {
        format!("{twice}/2")
    }
}

impl FromStr for RepLabel {
    type Err = SpinError;

    /// Accepts `trivial`, `vector`, a single half-integer `s` (spin rep of
    /// O(3), `0` means trivial) or a pair `s,t` (O(4) spin/isospin irrep).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SpinError::BadLabel(s.to_string());
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "trivial" => return Ok(RepLabel::Trivial),
            "vector" => return Ok(RepLabel::Vector),
            "" => return Err(bad()),
            _ => {}
        }
        if let Some((a, b)) = t.split_once(',') {
            let twice_s = parse_half(a).ok_or_else(bad)?;
            let twice_t = parse_half(b).ok_or_else(bad)?;
            return Ok(RepLabel::SpinIsospin { twice_s, twice_t });
        }
        let twice_s = parse_half(&t).ok_or_else(bad)?;
        Ok(if twice_s == 0 {
            RepLabel::Trivial
        } else {
            RepLabel::Spin { twice_s }
        })
    }
}

impl fmt::Display for RepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepLabel::Trivial => write!(f, "trivial"),
            RepLabel::Vector => write!(f, "vector"),
            RepLabel::Spin { twice_s } => write!(f, "{}", fmt_half(*twice_s)),
            RepLabel::SpinIsospin { twice_s, twice_t } => {
                write!(f, "{},{}", fmt_half(*twice_s), fmt_half(*twice_t))
            }
        }
    }
}

impl RepLabel {
    /// Builds the compact O(n) representation carrying this label.
    pub fn build(&self, n: usize) -> Result<LittleGroupRep, SpinError> {
        match *self {
            RepLabel::Trivial => trivial(n),
            RepLabel::Vector => vector_rep(n),
            RepLabel::Spin { twice_s } => {
                if n != 3 {
                    return Err(SpinError::WrongDimension {
                        label: self.to_string(),
                        required: 3,
                        n,
                    });
                }
                so3_spin(twice_s as f64 / 2.0)
            }
            RepLabel::SpinIsospin { twice_s, twice_t } => {
                if n != 4 {
                    return Err(SpinError::WrongDimension {
                        label: self.to_string(),
                        required: 4,
                        n,
                    });
                }
                Ok(o4_irrep(twice_s as f64 / 2.0, twice_t as f64 / 2.0)?.0)
            }
        }
    }
}

/// Antisymmetric table over planes `(i,j)` of a contiguous index range,
/// storing only `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneTable<T> {
    base: usize,
    count: usize,
    data: Vec<T>,
}

impl<T> PlaneTable<T> {
    /// `f(i, j)` is called for every `i < j` in `base..base+count`.
    pub fn from_fn(base: usize, count: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(count * count.saturating_sub(1) / 2);
        for i in base..base + count {
            for j in (i + 1)..base + count {
                data.push(f(i, j));
            }
        }
        Self { base, count, data }
    }

    pub fn try_from_fn<E>(
        base: usize,
        count: usize,
        mut f: impl FnMut(usize, usize) -> Result<T, E>,
    ) -> Result<Self, E> {
        let mut data = Vec::with_capacity(count * count.saturating_sub(1) / 2);
        for i in base..base + count {
            for j in (i + 1)..base + count {
                data.push(f(i, j)?);
            }
        }
        Ok(Self { base, count, data })
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.base..self.base + self.count
    }

    /// Planes `(i, j)` with `i < j`, in storage order.
    pub fn planes(&self) -> Vec<(usize, usize)> {
        let r = self.indices();
        let mut out = Vec::with_capacity(self.data.len());
        for i in r.clone() {
            for j in (i + 1)..r.end {
                out.push((i, j));
            }
        }
        out
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        let (a, b) = (i - self.base, j - self.base);
        // rows before a hold (count-1) + ... + (count-a) entries
        a * (2 * self.count - a - 1) / 2 + (b - a - 1)
    }

    fn check(&self, i: usize, j: usize) {
        assert!(
            self.indices().contains(&i) && self.indices().contains(&j),
            "plane ({i},{j}) outside index range {:?}",
            self.indices()
        );
    }

    /// The stored entry and the sign it carries for `(i, j)`; `None` on the
    /// diagonal.
    pub fn get(&self, i: usize, j: usize) -> Option<(f64, &T)> {
        self.check(i, j);
        match i.cmp(&j) {
            std::cmp::Ordering::Less => Some((1.0, &self.data[self.slot(i, j)])),
            std::cmp::Ordering::Greater => Some((-1.0, &self.data[self.slot(j, i)])),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn upper(&self, i: usize, j: usize) -> &T {
        self.check(i, j);
        &self.data[self.slot(i, j)]
    }

    pub fn upper_mut(&mut self, i: usize, j: usize) -> &mut T {
        self.check(i, j);
        let s = self.slot(i, j);
        &mut self.data[s]
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn map<U>(&self, mut f: impl FnMut(usize, usize, &T) -> U) -> PlaneTable<U> {
        let planes = self.planes();
        PlaneTable {
            base: self.base,
            count: self.count,
            data: planes
                .iter()
                .zip(&self.data)
                .map(|(&(i, j), v)| f(i, j, v))
                .collect(),
        }
    }
}

/// `(s₃, t₃)` of one basis vector. Single-spin reps use `t₃ = 0`; vector
/// reps carry the 1-based component index in `s₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentLabel {
    pub s3: f64,
    pub t3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LittleGroupRep {
    n: usize,
    signature: Signature,
    label: RepLabel,
    dim: usize,
    generators: PlaneTable<CMatrix>,
}

impl LittleGroupRep {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn label(&self) -> RepLabel {
        self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self) -> &PlaneTable<CMatrix> {
        &self.generators
    }

    /// Index range of the generator planes.
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.generators.indices()
    }

    pub fn metric(&self, i: usize) -> f64 {
        match self.signature {
            Signature::Lorentz if i == 0 => 1.0,
            _ => -1.0,
        }
    }

    /// `S_ab` with antisymmetry applied (`S_aa = 0`).
    pub fn generator(&self, a: usize, b: usize) -> CMatrix {
        match self.generators.get(a, b) {
            Some((s, m)) if s > 0.0 => m.clone(),
            Some((_, m)) => -m,
            None => CMatrix::zeros(self.dim, self.dim),
        }
    }

    /// `½ Σ_{a≠b} g_aa g_bb S_ab²`: `Σ S_kl²` for compact reps,
    /// `Σ S_ab² − Σ S_0a²` for Lorentz reps.
    pub fn little_casimir(&self) -> CMatrix {
        let mut c = CMatrix::zeros(self.dim, self.dim);
        for (a, b) in self.generators.planes() {
            let m = self.generators.upper(a, b);
            c += (m * m) * C64::new(self.metric(a) * self.metric(b), 0.0);
        }
        c
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.generators
            .values()
            .iter()
            .all(|m| (m - m.adjoint()).max_abs() <= tol)
    }

    pub fn component_labels(&self) -> Vec<ComponentLabel> {
        match self.label {
            RepLabel::Trivial => vec![ComponentLabel { s3: 0.0, t3: 0.0 }; self.dim],
            RepLabel::Vector => (0..self.dim)
                .map(|i| ComponentLabel {
                    s3: (i + 1) as f64,
                    t3: 0.0,
                })
                .collect(),
            RepLabel::Spin { twice_s } => weights(twice_s)
                .into_iter()
                .map(|m| ComponentLabel { s3: m, t3: 0.0 })
                .collect(),
            RepLabel::SpinIsospin { twice_s, twice_t } => {
                let mut out = Vec::with_capacity(self.dim);
                for s3 in weights(twice_s) {
                    for t3 in weights(twice_t) {
                        out.push(ComponentLabel { s3, t3 });
                    }
                }
                out
            }
        }
    }

    /// Copy with one matrix entry of `S_ab` (`a < b`) shifted by `delta`.
    pub fn perturbed(&self, a: usize, b: usize, row: usize, col: usize, delta: C64) -> Self {
        let mut out = self.clone();
        out.generators.upper_mut(a, b)[(row, col)] += delta;
        out
    }

    /// Replaces the generator table; used to build custom families.
    pub fn with_generators(&self, generators: PlaneTable<CMatrix>) -> Self {
        assert_eq!(generators.indices(), self.indices());
        Self {
            generators,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gens: Vec<_> = self
            .generators
            .planes()
            .into_iter()
            .map(|(a, b)| {
                let m = self.generators.upper(a, b);
                let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
                    .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                    .collect();
                json!({ "plane": [a, b], "matrix": rows })
            })
            .collect();
        json!({
            "n": self.n,
            "signature": self.signature,
            "label": self.label.to_string(),
            "dim": self.dim,
            "components": self.component_labels(),
            "generators": gens,
        })
    }
}

fn weights(twice: u32) -> Vec<f64> {
    (0..=twice).map(|i| (twice as f64 - 2.0 * i as f64) / 2.0).collect()
}

/// Angular-momentum matrices `(J_x, J_y, J_z)` for spin `twice/2` in the
/// basis `m = j, j−1, …, −j`.
pub fn angular_momentum(twice: u32) -> [CMatrix; 3] {
    let d = twice as usize + 1;
    let j = twice as f64 / 2.0;
    let ms = weights(twice);
    let mut jp = CMatrix::zeros(d, d);
    // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, and |m+1> sits one row up
    for col in 1..d {
        let m = ms[col];
        jp[(col - 1, col)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * C64::new(0.5, 0.0);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    let jz = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        ms.iter().map(|&m| C64::new(m, 0.0)),
    ));
    [jx, jy, jz]
}

fn compact_from(
    n: usize,
    label: RepLabel,
    dim: usize,
    f: impl FnMut(usize, usize) -> CMatrix,
) -> LittleGroupRep {
    LittleGroupRep {
        n,
        signature: Signature::Compact,
        label,
        dim,
        generators: PlaneTable::from_fn(1, n, f),
    }
}

pub fn trivial(n: usize) -> Result<LittleGroupRep, SpinError> {
    if n < 2 {
        return Err(SpinError::DimensionTooSmall { n, min: 2 });
    }
    Ok(compact_from(n, RepLabel::Trivial, 1, |_, _| CMatrix::zeros(1, 1)))
}

/// Spin-`s` rep of O(3) with `S⃗ = (S_23, S_31, S_12)`.
pub fn so3_spin(s: f64) -> Result<LittleGroupRep, SpinError> {
    let twice = half_integer_to_twice(s)?;
    let [jx, jy, jz] = angular_momentum(twice);
    let label = if twice == 0 {
        RepLabel::Trivial
    } else {
        RepLabel::Spin { twice_s: twice }
    };
    Ok(compact_from(3, label, twice as usize + 1, |k, l| match (k, l) {
        (1, 2) => jz.clone(),
        (1, 3) => -&jy,
        (2, 3) => jx.clone(),
        _ => unreachable!(),
    }))
}

/// The two commuting angular-momentum triples of an O(4) rep.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinIsospinSplit {
    pub s_vec: [CMatrix; 3],
    pub t_vec: [CMatrix; 3],
    pub casimir_s: f64,
    pub casimir_t: f64,
}

const CYCLIC: [(usize, usize, usize); 3] = [(1, 2, 3), (2, 3, 1), (3, 1, 2)];

/// O(4) irrep `D(s,t)` on the product space, basis index `i_s·(2t+1) + i_t`.
pub fn o4_irrep(s: f64, t: f64) -> Result<(LittleGroupRep, SpinIsospinSplit), SpinError> {
    let ts = half_integer_to_twice(s)?;
    let tt = half_integer_to_twice(t)?;
    let (ds, dt) = (ts as usize + 1, tt as usize + 1);
    let js = angular_momentum(ts);
    let jt = angular_momentum(tt);
    let id_s = CMatrix::identity(ds, ds);
    let id_t = CMatrix::identity(dt, dt);
    let s_vec = js.map(|m| m.kronecker(&id_t));
    let t_vec = jt.map(|m| id_s.kronecker(&m));
    let label = if ts == 0 && tt == 0 {
        RepLabel::Trivial
    } else {
        RepLabel::SpinIsospin {
            twice_s: ts,
            twice_t: tt,
        }
    };
    let rep = compact_from(4, label, ds * dt, |k, l| {
        for &(a, b, c) in &CYCLIC {
            if (k, l) == (b.min(c), b.max(c)) {
                let m = &s_vec[a - 1] + &t_vec[a - 1];
                return if b < c { m } else { -m };
            }
            if (k, l) == (a, 4) {
                // S_a4 = −S_4a
                return -(&s_vec[a - 1] - &t_vec[a - 1]);
            }
        }
        unreachable!()
    });
    let split = SpinIsospinSplit {
        s_vec,
        t_vec,
        casimir_s: s * (s + 1.0),
        casimir_t: t * (t + 1.0),
    };
    Ok((rep, split))
}

/// Defining rep: `(S_kl)_ij = −i(δ_ki δ_lj − δ_li δ_kj)`.
pub fn vector_rep(n: usize) -> Result<LittleGroupRep, SpinError> {
    if n < 2 {
        return Err(SpinError::DimensionTooSmall { n, min: 2 });
    }
    Ok(compact_from(n, RepLabel::Vector, n, |k, l| {
        let mut m = CMatrix::zeros(n, n);
        m[(k - 1, l - 1)] = -I;
        m[(l - 1, k - 1)] = I;
        m
    }))
}

/// Continues a compact O(n) rep to O(1,n−1): `S̃_ab = S_ab`,
/// `S̃_a0 = −i S_an`, hence `S̃_0a = i S_an`.
pub fn tilde_continue(rep: &LittleGroupRep) -> Result<LittleGroupRep, SpinError> {
    if rep.signature != Signature::Compact {
        return Err(SpinError::NotCompact);
    }
    let n = rep.n;
    Ok(LittleGroupRep {
        n,
        signature: Signature::Lorentz,
        label: rep.label,
        dim: rep.dim,
        generators: PlaneTable::from_fn(0, n, |i, j| {
            if i == 0 {
                rep.generator(j, n) * I
            } else {
                rep.generator(i, j)
            }
        }),
    })
}

impl SpinIsospinSplit {
    /// Recovers `S_a = ½(S_bc + S_4a)`, `T_a = ½(S_bc − S_4a)` from an O(4)
    /// rep. Expected Casimirs come from the rep's labels, or from the trace
    /// when the rep is not labelled by `(s,t)`.
    pub fn from_rep(rep: &LittleGroupRep) -> Result<Self, SpinError> {
        if rep.n != 4 || rep.signature != Signature::Compact {
            return Err(SpinError::WrongDimension {
                label: rep.label.to_string(),
                required: 4,
                n: rep.n,
            });
        }
        let half = C64::new(0.5, 0.0);
        let mut s_vec: [CMatrix; 3] = std::array::from_fn(|_| CMatrix::zeros(rep.dim, rep.dim));
        let mut t_vec = s_vec.clone();
        for &(a, b, c) in &CYCLIC {
            let sbc = rep.generator(b, c);
            let s4a = rep.generator(4, a);
            s_vec[a - 1] = (&sbc + &s4a) * half;
            t_vec[a - 1] = (&sbc - &s4a) * half;
        }
        let (casimir_s, casimir_t) = match rep.label {
            RepLabel::SpinIsospin { twice_s, twice_t } => {
                let (s, t) = (twice_s as f64 / 2.0, twice_t as f64 / 2.0);
                (s * (s + 1.0), t * (t + 1.0))
            }
            RepLabel::Trivial => (0.0, 0.0),
            _ => {
                let tr = |v: &[CMatrix; 3]| {
                    v.iter().map(|m| (m * m).trace().re).sum::<f64>() / rep.dim as f64
                };
                (tr(&s_vec), tr(&t_vec))
            }
        };
        Ok(Self {
            s_vec,
            t_vec,
            casimir_s,
            casimir_t,
        })
    }

    /// Residuals of the commutation relations and Casimir identities.
    pub fn check(&self, tol: f64) -> SplitReport {
        let d = self.s_vec[0].nrows();
        let comm = |a: &CMatrix, b: &CMatrix| a * b - b * a;
        let mut su2_s = 0.0f64;
        let mut su2_t = 0.0f64;
        for &(a, b, c) in &CYCLIC {
            let (a, b, c) = (a - 1, b - 1, c - 1);
            su2_s = su2_s.max((comm(&self.s_vec[a], &self.s_vec[b]) - &self.s_vec[c] * I).max_abs());
            su2_t = su2_t.max((comm(&self.t_vec[a], &self.t_vec[b]) - &self.t_vec[c] * I).max_abs());
        }
        let mut mixed = 0.0f64;
        for sa in &self.s_vec {
            for tb in &self.t_vec {
                mixed = mixed.max(comm(sa, tb).max_abs());
            }
        }
        let id = CMatrix::identity(d, d);
        let sq = |v: &[CMatrix; 3]| v.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m * m);
        let cas_s = (sq(&self.s_vec) - &id * C64::new(self.casimir_s, 0.0)).max_abs();
        let cas_t = (sq(&self.t_vec) - &id * C64::new(self.casimir_t, 0.0)).max_abs();
        let max = su2_s.max(su2_t).max(mixed).max(cas_s).max(cas_t);
        SplitReport {
            su2_s,
            su2_t,
            mixed,
            casimir_s: cas_s,
            casimir_t: cas_t,
            max_residual: max,
            pass: max <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    pub su2_s: f64,
    pub su2_t: f64,
    pub mixed: f64,
    pub casimir_s: f64,
    pub casimir_t: f64,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrupleResidual {
    pub indices: [usize; 4],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub entries: Vec<QuadrupleResidual>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Sweeps `−i[S_μν, S_ρσ] = g_μσ S_νρ + g_νρ S_μσ − g_μρ S_νσ − g_νσ S_μρ`
/// over every pair of stored planes.
pub fn check_little_group_relations(rep: &LittleGroupRep, tol: f64) -> RelationReport {
    let planes = rep.generators.planes();
    let g = |a: usize, b: usize| if a == b { rep.metric(a) } else { 0.0 };
    let mut entries = Vec::new();
    for (i, &(m, nu)) in planes.iter().enumerate() {
        for &(r, s) in &planes[i..] {
            let a = rep.generators.upper(m, nu);
            let b = rep.generators.upper(r, s);
            let lhs = (a * b - b * a) * (-I);
            let rhs = rep.generator(nu, r) * C64::new(g(m, s), 0.0)
                + rep.generator(m, s) * C64::new(g(nu, r), 0.0)
                - rep.generator(nu, s) * C64::new(g(m, r), 0.0)
                - rep.generator(m, r) * C64::new(g(nu, s), 0.0);
            entries.push(QuadrupleResidual {
                indices: [m, nu, r, s],
                residual: (lhs - rhs).max_abs(),
            });
        }
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    RelationReport {
        entries,
        max_residual,
        tol,
        pass: max_residual <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn plane_table_slots_are_dense() {
        let t = PlaneTable::from_fn(1, 4, |i, j| (i, j));
        for (i, j) in t.planes() {
            assert_eq!(*t.upper(i, j), (i, j));
            assert_eq!(t.get(j, i), Some((-1.0, &(i, j))));
        }
        assert!(t.get(2, 2).is_none());
    }

    #[test]
    fn spin_half_weight_basis() {
        let rep = so3_spin(0.5).unwrap();
        let s12 = rep.generator(1, 2);
        assert_eq!(s12, CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]));
        assert!(rep.is_hermitian(0.0));
    }

    #[test]
    fn spin_one_casimir() {
        let rep = so3_spin(1.0).unwrap();
        let cas = rep.little_casimir();
        assert!((cas - CMatrix::identity(3, 3) * c(2.0)).max_abs() < 1e-14);
        assert!(so3_spin(0.3).is_err());
        assert!(check_little_group_relations(&rep, 1e-13).pass);
    }

    #[test]
    fn vector_rep_pattern() {
        let rep = vector_rep(3).unwrap();
        let s12 = rep.generator(1, 2);
        assert_eq!(s12[(0, 1)], -I);
        assert_eq!(s12[(1, 0)], I);
        assert!(vector_rep(1).is_err());
        let two = vector_rep(2).unwrap();
        // trace 0 and square 1 pin the spectrum of a 2x2 matrix to {1, -1}
        let m = two.generator(1, 2);
        assert!((m.trace()).norm() < 1e-15);
        assert!(((&m * &m) - CMatrix::identity(2, 2)).max_abs() < 1e-15);
    }

    #[test]
    fn o4_spin_isospin_example() {
        let (rep, split) = o4_irrep(0.0, 0.5).unwrap();
        assert_eq!(rep.dim(), 2);
        let [sx, sy, sz] = angular_momentum(1);
        assert!((rep.generator(2, 3) - &sx).max_abs() < 1e-15);
        assert!((rep.generator(3, 1) - &sy).max_abs() < 1e-15);
        assert!((rep.generator(1, 2) - &sz).max_abs() < 1e-15);
        assert!((rep.generator(4, 1) + &sx).max_abs() < 1e-15);
        assert!((rep.generator(4, 3) + &sz).max_abs() < 1e-15);
        assert_eq!(split.casimir_s, 0.0);
        assert_eq!(split.casimir_t, 0.75);
        assert!(split.check(1e-12).pass);
        assert!(check_little_group_relations(&rep, 1e-13).pass);
    }

    #[test]
    fn tilde_boosts_are_anti_hermitian() {
        let (rep, _) = o4_irrep(0.0, 0.5).unwrap();
        let t = tilde_continue(&rep).unwrap();
        let [sx, sy, sz] = angular_momentum(1);
        for (a, s) in [(1, sx), (2, sy), (3, sz)] {
            assert!((t.generator(0, a) - &s * I).max_abs() < 1e-15);
        }
        assert!(check_little_group_relations(&t, 1e-12).pass);
        assert!(!t.is_hermitian(1e-6));
    }

    #[test]
    fn label_parsing() {
        assert_eq!(
            "0,1/2".parse::<RepLabel>().unwrap(),
            RepLabel::SpinIsospin {
                twice_s: 0,
                twice_t: 1
            }
        );
        assert_eq!("1/2".parse::<RepLabel>().unwrap(), RepLabel::Spin { twice_s: 1 });
        assert_eq!("0".parse::<RepLabel>().unwrap(), RepLabel::Trivial);
        assert!("1/3".parse::<RepLabel>().is_err());
        assert!("x,y".parse::<RepLabel>().is_err());
        assert_eq!(RepLabel::SpinIsospin { twice_s: 1, twice_t: 2 }.to_string(), "1/2,1");
    }
}
