//! Matrix-coefficient first-order differential operators.
//!
//! `Q = m(q) + Σ_k c^k(q) ∂/∂q_k`, where `m` and every `c^k` are sums of
//! scalar smooth fields times constant matrices.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::jet_calculus::{FieldError, Jet1, Jet2, SmoothField, Taylor};
use crate::spin_reps::CMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("singular coefficient: {0}")]
    Singular(#[from] FieldError),
    #[error("operator shape mismatch: {0}")]
    Shape(String),
}

/// `coeff(q) · matrix`, with `None` standing for the identity.
#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: SmoothField,
    pub matrix: Option<Arc<CMatrix>>,
}

impl Term {
    fn scaled(&self, c: C64) -> Self {
        Self {
            coeff: self.coeff.scale(c),
            matrix: self.matrix.clone(),
        }
    }

    fn times_field(&self, g: &SmoothField) -> Self {
        Self {
            coeff: &self.coeff * g,
            matrix: self.matrix.clone(),
        }
    }

    fn map_coeff(&self, f: &impl Fn(&SmoothField) -> SmoothField) -> Self {
        Self {
            coeff: f(&self.coeff),
            matrix: self.matrix.clone(),
        }
    }
}

fn push_terms(dst: &mut Vec<Term>, src: impl IntoIterator<Item = Term>) {
    dst.extend(src.into_iter().filter(|t| !t.coeff.is_zero()));
}

#[derive(Debug, Clone)]
pub struct DiffOperator {
    dim: usize,
    matrix_dim: usize,
    mult: Vec<Term>,
    deriv: Vec<Vec<Term>>,
    /// `∂Q/∂x_0`, a multiplication operator (nonzero only for the boost
    /// generators of the Schrödinger picture).
    time_slope: Vec<Term>,
    x0: Option<f64>,
}

impl DiffOperator {
    pub fn zero(dim: usize, matrix_dim: usize) -> Self {
        Self {
            dim,
            matrix_dim,
            mult: Vec::new(),
            deriv: vec![Vec::new(); dim],
            time_slope: Vec::new(),
            x0: None,
        }
    }

    /// Multiplication by `field · matrix` (identity if `matrix` is `None`).
    pub fn multiplication(field: SmoothField, matrix: Option<CMatrix>, matrix_dim: usize) -> Self {
        let mut op = Self::zero(field.dim(), matrix_dim);
        if let Some(m) = &matrix {
            assert_eq!(m.nrows(), matrix_dim, "matrix does not fit the rep");
        }
        push_terms(
            &mut op.mult,
            [Term {
                coeff: field,
                matrix: matrix.map(Arc::new),
            }],
        );
        op
    }

    /// Multiplication by a constant matrix.
    pub fn constant_matrix(dim: usize, matrix: CMatrix) -> Self {
        let md = matrix.nrows();
        Self::multiplication(SmoothField::real(dim, 1.0), Some(matrix), md)
    }

    /// `∂/∂q_k`.
    pub fn derivative(dim: usize, matrix_dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut op = Self::zero(dim, matrix_dim);
        op.deriv[k].push(Term {
            coeff: SmoothField::real(dim, 1.0),
            matrix: None,
        });
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }

    pub fn x0(&self) -> Option<f64> {
        self.x0
    }

    pub fn is_multiplication(&self) -> bool {
        self.deriv.iter().all(|d| d.is_empty())
    }

    pub fn has_time_dependence(&self) -> bool {
        !self.time_slope.is_empty()
    }

    pub fn mult_terms(&self) -> &[Term] {
        &self.mult
    }

    pub fn deriv_terms(&self, k: usize) -> &[Term] {
        &self.deriv[k]
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(
            (self.dim, self.matrix_dim),
            (other.dim, other.matrix_dim),
            "operator shape mismatch"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut out = self.clone();
        push_terms(&mut out.mult, other.mult.iter().cloned());
        for (d, o) in out.deriv.iter_mut().zip(&other.deriv) {
            push_terms(d, o.iter().cloned());
        }
        push_terms(&mut out.time_slope, other.time_slope.iter().cloned());
        out.x0 = self.x0.or(other.x0);
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.dim, self.matrix_dim);
        if c == C64::new(0.0, 0.0) {
            return out;
        }
        out.mult = self.mult.iter().map(|t| t.scaled(c)).collect();
        out.deriv = self
            .deriv
            .iter()
            .map(|d| d.iter().map(|t| t.scaled(c)).collect())
            .collect();
        out.time_slope = self.time_slope.iter().map(|t| t.scaled(c)).collect();
        out.x0 = self.x0;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }

    /// `g · Q` for a scalar field `g`.
    pub fn left_multiply(&self, g: &SmoothField) -> Self {
        let mut out = self.clone();
        out.mult = self.mult.iter().map(|t| t.times_field(g)).collect();
        out.deriv = self
            .deriv
            .iter()
            .map(|d| d.iter().map(|t| t.times_field(g)).collect())
            .collect();
        out.time_slope = self.time_slope.iter().map(|t| t.times_field(g)).collect();
        out
    }

    /// `Q ∘ g` for a scalar field `g`:
    /// `(m g + Σ c^k ∂_k g) + Σ c^k g ∂_k`.
    pub fn compose_with_multiplication(&self, g: &SmoothField) -> Self {
        let mut out = self.left_multiply(g);
        for (k, d) in self.deriv.iter().enumerate() {
            let dg = g.diff(k);
            if dg.is_zero() {
                continue;
            }
            push_terms(&mut out.mult, d.iter().map(|t| t.times_field(&dg)));
        }
        out
    }

    /// Adds the explicit time dependence `x_0 · T` where `T` is a
    /// multiplication operator; records `T` as `∂Q/∂x_0`.
    pub fn with_time_term(&self, x0: f64, slope: &DiffOperator) -> Self {
        assert!(slope.is_multiplication(), "time slope must be a multiplication");
        let mut out = self.add(&slope.scale(C64::new(x0, 0.0)));
        out.time_slope = slope.mult.clone();
        out.x0 = Some(x0);
        out
    }

    /// `∂Q/∂x_0` as an operator (zero when time independent).
    pub fn time_slope(&self) -> DiffOperator {
        let mut op = Self::zero(self.dim, self.matrix_dim);
        op.mult = self.time_slope.clone();
        op
    }

    /// Drops every term whose matrix is not the identity.
    pub fn orbital_part(&self) -> Self {
        let keep = |ts: &Vec<Term>| ts.iter().filter(|t| t.matrix.is_none()).cloned().collect();
        let mut out = self.clone();
        out.mult = keep(&self.mult);
        out.deriv = self.deriv.iter().map(keep).collect();
        out.time_slope = keep(&self.time_slope);
        out
    }

    /// Rewrites every coefficient field with `f`, leaving the derivative
    /// structure alone.
    pub fn map_fields(&self, f: impl Fn(&SmoothField) -> SmoothField) -> Self {
        let mut out = self.clone();
        out.mult = self.mult.iter().map(|t| t.map_coeff(&f)).collect();
        out.deriv = self
            .deriv
            .iter()
            .map(|d| d.iter().map(|t| t.map_coeff(&f)).collect())
            .collect();
        out.time_slope = self.time_slope.iter().map(|t| t.map_coeff(&f)).collect();
        out
    }

    /// Change of variables `p_μ = c_μ q_{π(μ)}`: coefficient fields are
    /// rewritten through `subs` (one substitute per old variable) and
    /// `∂/∂p_μ = (1/c_μ) ∂/∂q_{π(μ)}`.
    pub fn change_variables(&self, subs: &[SmoothField], perm: &[usize], factors: &[C64]) -> Self {
        assert_eq!(subs.len(), self.dim);
        assert_eq!(perm.len(), self.dim);
        assert_eq!(factors.len(), self.dim);
        let new_dim = subs[0].dim();
        let mut out = self.map_fields(|g| g.substitute(subs));
        out.dim = new_dim;
        let mut deriv = vec![Vec::new(); new_dim];
        for (mu, terms) in out.deriv.iter().enumerate() {
            let inv = 1.0 / factors[mu];
            deriv[perm[mu]].extend(terms.iter().map(|t| t.scaled(inv)));
        }
        out.deriv = deriv;
        out
    }

    fn eval_terms(
        &self,
        terms: &[Term],
        point: &[f64],
    ) -> Result<Vec<Option<Jet2>>, OperatorError> {
        let d = self.matrix_dim;
        let mut out: Vec<Option<Jet2>> = vec![None; d * d];
        for t in terms {
            let j = t.coeff.eval_jet2(point)?;
            accumulate(&mut out, d, &j, t.matrix.as_deref(), |j, c| j.scale(c), |a, b| a + b);
        }
        Ok(out)
    }

    /// Coefficient jets at `point`.
    pub fn evaluate(&self, point: &[f64]) -> Result<EvaluatedOperator, OperatorError> {
        if point.len() != self.dim {
            return Err(OperatorError::Shape(format!(
                "point has {} coordinates, operator expects {}",
                point.len(),
                self.dim
            )));
        }
        let mult = self.eval_terms(&self.mult, point)?;
        let deriv = self
            .deriv
            .iter()
            .map(|d| self.eval_terms(d, point))
            .collect::<Result<_, _>>()?;
        Ok(EvaluatedOperator {
            dim: self.dim,
            matrix_dim: self.matrix_dim,
            mult,
            deriv,
        })
    }

    fn dense_terms(&self, terms: &[Term], point: &[f64]) -> Result<CMatrix, OperatorError> {
        let d = self.matrix_dim;
        let mut m = CMatrix::zeros(d, d);
        for t in terms {
            let v = t.coeff.eval_value(point)?;
            match &t.matrix {
                Some(mat) => m += &**mat * v,
                None => {
                    for i in 0..d {
                        m[(i, i)] += v;
                    }
                }
            }
        }
        Ok(m)
    }

    /// Values of `m(q)` and every `c^k(q)` at a point.
    pub fn dense_coefficients(&self, point: &[f64]) -> Result<DenseCoefficients, OperatorError> {
        Ok(DenseCoefficients {
            mult: self.dense_terms(&self.mult, point)?,
            deriv: self
                .deriv
                .iter()
                .map(|d| self.dense_terms(d, point))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Coefficient Taylor expansions of the given order at `point`.
    pub fn evaluate_taylor(
        &self,
        point: &[f64],
        order: usize,
    ) -> Result<TaylorOperator, OperatorError> {
        let d = self.matrix_dim;
        let eval = |terms: &[Term]| -> Result<Vec<Option<Taylor>>, OperatorError> {
            let mut out: Vec<Option<Taylor>> = vec![None; d * d];
            for t in terms {
                let j = t.coeff.eval_taylor(point, order)?;
                accumulate(&mut out, d, &j, t.matrix.as_deref(), |j, c| j.scale(c), |a, b| a.add(b));
            }
            Ok(out)
        };
        Ok(TaylorOperator {
            matrix_dim: d,
            mult: eval(&self.mult)?,
            deriv: self
                .deriv
                .iter()
                .map(|t| eval(t))
                .collect::<Result<_, _>>()?,
        })
    }
}

fn accumulate<J: Clone>(
    out: &mut [Option<J>],
    d: usize,
    j: &J,
    matrix: Option<&CMatrix>,
    scale: impl Fn(&J, C64) -> J,
    add: impl Fn(&J, &J) -> J,
) {
    let mut put = |idx: usize, v: J| {
        out[idx] = Some(match &out[idx] {
            Some(prev) => add(prev, &v),
            None => v,
        });
    };
    match matrix {
        None => {
            for i in 0..d {
                put(i * d + i, j.clone());
            }
        }
        Some(m) => {
            for r in 0..d {
                for c in 0..d {
                    let e = m[(r, c)];
                    if e != C64::new(0.0, 0.0) {
                        put(r * d + c, scale(j, e));
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseCoefficients {
    pub mult: CMatrix,
    pub deriv: Vec<CMatrix>,
}

impl DenseCoefficients {
    /// Largest entrywise difference between two coefficient sets.
    pub fn max_difference(&self, other: &Self) -> f64 {
        use crate::spin_reps::MaxAbs;
        let mut d = (&self.mult - &other.mult).max_abs();
        for (a, b) in self.deriv.iter().zip(&other.deriv) {
            d = d.max((a - b).max_abs());
        }
        d
    }
}

/// Operator coefficients frozen at a point as order-2 jets (sparse, row
/// major over the rep indices).
#[derive(Debug, Clone)]
pub struct EvaluatedOperator {
    dim: usize,
    matrix_dim: usize,
    mult: Vec<Option<Jet2>>,
    deriv: Vec<Vec<Option<Jet2>>>,
}

impl EvaluatedOperator {
    /// `(Q f)` to first order, given `f` to second order.
    pub fn apply_jet2(&self, f: &[Jet2]) -> Vec<Jet1> {
        let d = self.matrix_dim;
        assert_eq!(f.len(), d, "field has the wrong number of components");
        let mut out = vec![Jet1::zero(self.dim); d];
        let df: Vec<Vec<Jet1>> = (0..self.dim)
            .map(|k| f.iter().map(|fj| fj.derivative(k)).collect())
            .collect();
        let f1: Vec<Jet1> = f.iter().map(|fj| fj.truncate()).collect();
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..d {
                if let Some(c) = &self.mult[i * d + j] {
                    o.add_product(c, &f1[j]);
                }
                for (k, dk) in self.deriv.iter().enumerate() {
                    if let Some(c) = &dk[i * d + j] {
                        o.add_product(c, &df[k][j]);
                    }
                }
            }
        }
        out
    }

    /// `(Q g)` at the point, given `g` to first order.
    pub fn apply_jet1(&self, g: &[Jet1]) -> Vec<C64> {
        let d = self.matrix_dim;
        assert_eq!(g.len(), d, "field has the wrong number of components");
        let mut out = vec![C64::new(0.0, 0.0); d];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..d {
                if let Some(c) = &self.mult[i * d + j] {
                    *o += c.value() * g[j].value;
                }
                for (k, dk) in self.deriv.iter().enumerate() {
                    if let Some(c) = &dk[i * d + j] {
                        *o += c.value() * g[j].gradient[k];
                    }
                }
            }
        }
        out
    }
}

/// Operator coefficients frozen at a point as Taylor expansions.
#[derive(Debug, Clone)]
pub struct TaylorOperator {
    matrix_dim: usize,
    mult: Vec<Option<Taylor>>,
    deriv: Vec<Vec<Option<Taylor>>>,
}

impl TaylorOperator {
    /// Applies the operator; the result loses one order if any derivative
    /// term is present.
    pub fn apply(&self, f: &[Taylor]) -> Vec<Taylor> {
        let d = self.matrix_dim;
        assert_eq!(f.len(), d);
        let has_deriv = self.deriv.iter().any(|dk| dk.iter().any(|c| c.is_some()));
        let order = f[0].order() - usize::from(has_deriv);
        let dim = f[0].dim();
        let df: Vec<Vec<Taylor>> = if has_deriv {
            (0..dim)
                .map(|k| f.iter().map(|fj| fj.derivative(k)).collect())
                .collect()
        } else {
            Vec::new()
        };
        (0..d)
            .map(|i| {
                let mut acc = Taylor::constant(dim, order, C64::new(0.0, 0.0));
                for j in 0..d {
                    if let Some(c) = &self.mult[i * d + j] {
                        acc = acc.add(&c.mul(&f[j]));
                    }
                    for (k, dk) in self.deriv.iter().enumerate() {
                        if let Some(c) = &dk[i * d + j] {
                            acc = acc.add(&c.mul(&df[k][j]));
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

/// `([A, B] f)(point) = A(Bf) − B(Af)`.
pub fn commutator_apply(
    a: &DiffOperator,
    b: &DiffOperator,
    f: &crate::jet_calculus::VectorField,
    point: &[f64],
) -> Result<Vec<C64>, OperatorError> {
    if a.dim != b.dim || a.matrix_dim != b.matrix_dim || f.len() != a.matrix_dim {
        return Err(OperatorError::Shape(format!(
            "operators ({}, {}) and ({}, {}) with a {}-component field",
            a.dim,
            a.matrix_dim,
            b.dim,
            b.matrix_dim,
            f.len()
        )));
    }
    let fj = f.eval_jet2(point)?;
    let ea = a.evaluate(point)?;
    let eb = b.evaluate(point)?;
    Ok(commutator_from_parts(&ea, &eb, &ea.apply_jet2(&fj), &eb.apply_jet2(&fj)))
}

/// `A(Bf) − B(Af)` from precomputed first-order images.
pub fn commutator_from_parts(
    a: &EvaluatedOperator,
    b: &EvaluatedOperator,
    af: &[Jet1],
    bf: &[Jet1],
) -> Vec<C64> {
    let abf = a.apply_jet1(bf);
    let baf = b.apply_jet1(af);
    abf.iter().zip(&baf).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet_calculus::VectorField;

    fn test_field(dim: usize) -> VectorField {
        let q: Vec<_> = (0..dim).map(|k| SmoothField::var(dim, k)).collect();
        let r2 = q.iter().fold(SmoothField::zero(dim), |acc, v| &acc + &v.square());
        let g = r2.scale(C64::new(-0.4, 0.0)).exp();
        let poly = &SmoothField::real(dim, 1.0) + &(&q[0] * &q[dim - 1]).scale(C64::new(0.3, 0.7));
        VectorField::new(vec![&poly * &g])
    }

    #[test]
    fn canonical_commutator() {
        // x_k = i ∂_k, p_l = q_l
        let dim = 3;
        let f = test_field(dim);
        let pt = [0.3, -0.4, 0.8];
        let fv = f.eval_value(&pt).unwrap()[0];
        for k in 0..dim {
            let x = DiffOperator::derivative(dim, 1, k).scale(C64::new(0.0, 1.0));
            for l in 0..dim {
                let p = DiffOperator::multiplication(SmoothField::var(dim, l), None, 1);
                let c = commutator_apply(&x, &p, &f, &pt).unwrap()[0];
                let expect = if k == l { C64::new(0.0, 1.0) * fv } else { C64::new(0.0, 0.0) };
                assert!((c - expect).norm() < 1e-15);
                let pp = commutator_apply(&p, &p, &f, &pt).unwrap()[0];
                assert_eq!(pp, C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn composition_matches_direct_application() {
        // (∂_0 ∘ g) f = ∂_0 (g f)
        let dim = 2;
        let q0 = SmoothField::var(dim, 0);
        let g = (&q0.square() + &SmoothField::real(dim, 1.0)).sqrt();
        let op = DiffOperator::derivative(dim, 1, 0).compose_with_multiplication(&g);
        let f = test_field(dim);
        let gf = VectorField::new(vec![&g * &f.components[0]]);
        let pt = [0.5, 0.2];
        let lhs = op.evaluate(&pt).unwrap().apply_jet2(&f.eval_jet2(&pt).unwrap());
        let rhs = gf.components[0].diff(0).eval_jet2(&pt).unwrap();
        assert!((lhs[0].value - rhs.value()).norm() < 1e-15);
        for k in 0..dim {
            assert!((lhs[0].gradient[k] - rhs.partial(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn taylor_application_agrees_with_jets() {
        let dim = 2;
        let q1 = SmoothField::var(dim, 1);
        let op = DiffOperator::derivative(dim, 1, 1)
            .compose_with_multiplication(&q1.exp())
            .add(&DiffOperator::multiplication(q1.clone(), None, 1));
        let f = test_field(dim);
        let pt = [-0.1, 0.6];
        let viaj = op.evaluate(&pt).unwrap().apply_jet2(&f.eval_jet2(&pt).unwrap());
        let viat = op
            .evaluate_taylor(&pt, 2)
            .unwrap()
            .apply(&f.eval_taylor(&pt, 2).unwrap());
        assert_eq!(viat[0].order(), 1);
        assert!((viaj[0].value - viat[0].value()).norm() < 1e-15);
        assert!((viaj[0].gradient[0] - viat[0].partial(&[1, 0])).norm() < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = DiffOperator::derivative(2, 1, 0);
        let b = DiffOperator::derivative(3, 1, 0);
        let f = test_field(2);
        assert!(matches!(
            commutator_apply(&a, &b, &f, &[0.0, 0.0]),
            Err(OperatorError::Shape(_))
        ));
    }
}
