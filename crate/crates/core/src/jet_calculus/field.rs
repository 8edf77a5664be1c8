//! Smooth complex-valued fields built from coordinate seeds and constants.
//!
//! A [`SmoothField`] is a small expression tree. It can be evaluated at any
//! truncation order (plain value, [`Jet2`], [`Taylor`]), differentiated
//! symbolically, and rewritten by a change of variables.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use super::jet::{Jet2, JetArithmetic, JetError};
use super::taylor::Taylor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("field is not evaluable at {point:?}: {source}")]
    Domain { point: Vec<f64>, source: JetError },
    #[error("field expects {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug)]
enum Node {
    Const(C64),
    Var(usize),
    Add(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Neg(Arc<Node>),
    Sqrt(Arc<Node>),
    Recip(Arc<Node>),
    Exp(Arc<Node>),
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

fn konst(c: C64) -> Arc<Node> {
    Arc::new(Node::Const(c))
}

fn as_const(n: &Node) -> Option<C64> {
    match n {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

fn add_nodes(a: &Arc<Node>, b: &Arc<Node>) -> Arc<Node> {
    match (as_const(a), as_const(b)) {
        (Some(x), Some(y)) => konst(x + y),
        (Some(x), _) if x == ZERO => b.clone(),
        (_, Some(y)) if y == ZERO => a.clone(),
        _ => Arc::new(Node::Add(a.clone(), b.clone())),
    }
}

fn mul_nodes(a: &Arc<Node>, b: &Arc<Node>) -> Arc<Node> {
    match (as_const(a), as_const(b)) {
        (Some(x), Some(y)) => konst(x * y),
        (Some(x), _) | (_, Some(x)) if x == ZERO => konst(ZERO),
        (Some(x), _) if x == ONE => b.clone(),
        (_, Some(y)) if y == ONE => a.clone(),
        (None, Some(_)) => Arc::new(Node::Mul(b.clone(), a.clone())),
        _ => Arc::new(Node::Mul(a.clone(), b.clone())),
    }
}

fn neg_node(a: &Arc<Node>) -> Arc<Node> {
    match &**a {
        Node::Const(c) => konst(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Arc::new(Node::Neg(a.clone())),
    }
}

fn eval_node<J: JetArithmetic>(n: &Node, vars: &[J]) -> Result<J, JetError> {
    Ok(match n {
        Node::Const(c) => vars[0].lift_constant(*c),
        Node::Var(k) => vars[*k].clone(),
        Node::Add(a, b) => eval_node(a, vars)?.jet_add(&eval_node(b, vars)?),
        Node::Mul(a, b) => {
            if let Some(c) = as_const(a) {
                eval_node(b, vars)?.jet_scale(c)
            } else {
                eval_node(a, vars)?.jet_mul(&eval_node(b, vars)?)
            }
        }
        Node::Neg(a) => eval_node(a, vars)?.jet_neg(),
        Node::Sqrt(a) => eval_node(a, vars)?.jet_sqrt()?,
        Node::Recip(a) => eval_node(a, vars)?.jet_recip()?,
        Node::Exp(a) => eval_node(a, vars)?.jet_exp(),
    })
}

fn diff_node(n: &Arc<Node>, k: usize) -> Arc<Node> {
    match &**n {
        Node::Const(_) => konst(ZERO),
        Node::Var(j) => konst(if *j == k { ONE } else { ZERO }),
        Node::Add(a, b) => add_nodes(&diff_node(a, k), &diff_node(b, k)),
        Node::Mul(a, b) => add_nodes(
            &mul_nodes(&diff_node(a, k), b),
            &mul_nodes(a, &diff_node(b, k)),
        ),
        Node::Neg(a) => neg_node(&diff_node(a, k)),
        Node::Sqrt(a) => {
            let da = diff_node(a, k);
            let half_inv = mul_nodes(&konst(C64::new(0.5, 0.0)), &Arc::new(Node::Recip(n.clone())));
            mul_nodes(&da, &half_inv)
        }
        Node::Recip(_) => {
            let inner = match &**n {
                Node::Recip(a) => a,
                _ => unreachable!(),
            };
            let da = diff_node(inner, k);
            neg_node(&mul_nodes(&da, &mul_nodes(n, n)))
        }
        Node::Exp(a) => mul_nodes(&diff_node(a, k), n),
    }
}

fn map_node(n: &Arc<Node>, f: &dyn Fn(&Node) -> Option<Arc<Node>>) -> Arc<Node> {
    if let Some(r) = f(n) {
        return r;
    }
    match &**n {
        Node::Const(_) | Node::Var(_) => n.clone(),
        Node::Add(a, b) => add_nodes(&map_node(a, f), &map_node(b, f)),
        Node::Mul(a, b) => mul_nodes(&map_node(a, f), &map_node(b, f)),
        Node::Neg(a) => neg_node(&map_node(a, f)),
        Node::Sqrt(a) => Arc::new(Node::Sqrt(map_node(a, f))),
        Node::Recip(a) => match as_const(&map_node(a, f)) {
            Some(c) if c != ZERO => konst(1.0 / c),
            _ => Arc::new(Node::Recip(map_node(a, f))),
        },
        Node::Exp(a) => Arc::new(Node::Exp(map_node(a, f))),
    }
}

/// Scalar smooth function of `dim` real variables.
#[derive(Debug, Clone)]
pub struct SmoothField {
    dim: usize,
    node: Arc<Node>,
}

impl SmoothField {
    pub fn constant(dim: usize, c: C64) -> Self {
        Self {
            dim,
            node: konst(c),
        }
    }

    pub fn real(dim: usize, x: f64) -> Self {
        Self::constant(dim, C64::new(x, 0.0))
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, ZERO)
    }

    pub fn var(dim: usize, k: usize) -> Self {
        assert!(k < dim, "variable {k} out of range for dimension {dim}");
        Self {
            dim,
            node: Arc::new(Node::Var(k)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_constant(&self) -> Option<C64> {
        as_const(&self.node)
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(ZERO)
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(
            self.dim, other.dim,
            "field dimension mismatch: {} vs {}",
            self.dim, other.dim
        );
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            node: mul_nodes(&konst(c), &self.node),
        }
    }

    pub fn sqrt(&self) -> Self {
        Self {
            dim: self.dim,
            node: Arc::new(Node::Sqrt(self.node.clone())),
        }
    }

    pub fn recip(&self) -> Self {
        Self {
            dim: self.dim,
            node: Arc::new(Node::Recip(self.node.clone())),
        }
    }

    pub fn exp(&self) -> Self {
        Self {
            dim: self.dim,
            node: Arc::new(Node::Exp(self.node.clone())),
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Generic evaluation with one seed per variable.
    pub fn eval<J: JetArithmetic>(&self, vars: &[J]) -> Result<J, JetError> {
        eval_node(&self.node, vars)
    }

    fn check_point(&self, point: &[f64]) -> Result<(), FieldError> {
        if point.len() == self.dim {
            Ok(())
        } else {
            Err(FieldError::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            })
        }
    }

    fn domain(point: &[f64]) -> impl FnOnce(JetError) -> FieldError + '_ {
        move |source| FieldError::Domain {
            point: point.to_vec(),
            source,
        }
    }

    pub fn eval_value(&self, point: &[f64]) -> Result<C64, FieldError> {
        self.check_point(point)?;
        let vars: Vec<C64> = point.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.eval(&vars).map_err(Self::domain(point))
    }

    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, FieldError> {
        self.check_point(point)?;
        self.eval(&Jet2::seeds(point)).map_err(Self::domain(point))
    }

    pub fn eval_taylor(&self, point: &[f64], order: usize) -> Result<Taylor, FieldError> {
        self.check_point(point)?;
        self.eval(&Taylor::seeds(point, order))
            .map_err(Self::domain(point))
    }

    /// Symbolic partial derivative `∂/∂q_k`.
    pub fn diff(&self, k: usize) -> Self {
        assert!(k < self.dim);
        Self {
            dim: self.dim,
            node: diff_node(&self.node, k),
        }
    }

    /// Replaces each variable `q_k` by `subs[k]`; all substitutes share a
    /// common (possibly different) dimension.
    pub fn substitute(&self, subs: &[SmoothField]) -> Self {
        assert_eq!(subs.len(), self.dim, "one substitute per variable");
        let new_dim = subs.first().map(|s| s.dim).unwrap_or(self.dim);
        assert!(subs.iter().all(|s| s.dim == new_dim));
        let nodes: Vec<Arc<Node>> = subs.iter().map(|s| s.node.clone()).collect();
        Self {
            dim: new_dim,
            node: map_node(&self.node, &|n| match n {
                Node::Var(k) => Some(nodes[*k].clone()),
                _ => None,
            }),
        }
    }

    /// Rewrites every `√u` as `−i·√(−u)`, the continuation of the square
    /// root from the upper to the lower half plane, so that fields that were
    /// principal-branch on `u > 0` stay evaluable on `u < 0`.
    pub fn continue_sqrt_lower(&self) -> Self {
        fn go(n: &Arc<Node>) -> Arc<Node> {
            map_node(n, &|m| match m {
                Node::Sqrt(a) => {
                    let inner = neg_node(&go(a));
                    Some(mul_nodes(
                        &konst(C64::new(0.0, -1.0)),
                        &Arc::new(Node::Sqrt(inner)),
                    ))
                }
                _ => None,
            })
        }
        Self {
            dim: self.dim,
            node: go(&self.node),
        }
    }
}

impl fmt::Display for SmoothField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match n {
                Node::Const(c) if c.im == 0.0 => write!(f, "{}", c.re),
                Node::Const(c) => write!(f, "({}{:+}i)", c.re, c.im),
                Node::Var(k) => write!(f, "q{k}"),
                Node::Add(a, b) => {
                    write!(f, "(")?;
                    go(a, f)?;
                    write!(f, " + ")?;
                    go(b, f)?;
                    write!(f, ")")
                }
                Node::Mul(a, b) => {
                    go(a, f)?;
                    write!(f, "*")?;
                    go(b, f)
                }
                Node::Neg(a) => {
                    write!(f, "-")?;
                    go(a, f)
                }
                Node::Sqrt(a) => {
                    write!(f, "sqrt(")?;
                    go(a, f)?;
                    write!(f, ")")
                }
                Node::Recip(a) => {
                    write!(f, "1/(")?;
                    go(a, f)?;
                    write!(f, ")")
                }
                Node::Exp(a) => {
                    write!(f, "exp(")?;
                    go(a, f)?;
                    write!(f, ")")
                }
            }
        }
        go(&self.node, f)
    }
}

impl Add for &SmoothField {
    type Output = SmoothField;
    fn add(self, rhs: &SmoothField) -> SmoothField {
        self.check_dim(rhs);
        SmoothField {
            dim: self.dim,
            node: add_nodes(&self.node, &rhs.node),
        }
    }
}

impl Sub for &SmoothField {
    type Output = SmoothField;
    fn sub(self, rhs: &SmoothField) -> SmoothField {
        self + &(-rhs)
    }
}

impl Mul for &SmoothField {
    type Output = SmoothField;
    fn mul(self, rhs: &SmoothField) -> SmoothField {
        self.check_dim(rhs);
        SmoothField {
            dim: self.dim,
            node: mul_nodes(&self.node, &rhs.node),
        }
    }
}

impl Neg for &SmoothField {
    type Output = SmoothField;
    fn neg(self) -> SmoothField {
        SmoothField {
            dim: self.dim,
            node: neg_node(&self.node),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for SmoothField {
            type Output = SmoothField;
            fn $m(self, rhs: SmoothField) -> SmoothField {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&SmoothField> for SmoothField {
            type Output = SmoothField;
            fn $m(self, rhs: &SmoothField) -> SmoothField {
                (&self).$m(rhs)
            }
        }
        impl $tr<SmoothField> for &SmoothField {
            type Output = SmoothField;
            fn $m(self, rhs: SmoothField) -> SmoothField {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for SmoothField {
    type Output = SmoothField;
    fn neg(self) -> SmoothField {
        -&self
    }
}

/// A vector of scalar fields, one per representation component.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub components: Vec<SmoothField>,
}

impl VectorField {
    pub fn new(components: Vec<SmoothField>) -> Self {
        assert!(!components.is_empty(), "vector field needs a component");
        let d = components[0].dim();
        assert!(components.iter().all(|c| c.dim() == d));
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn eval_jet2(&self, point: &[f64]) -> Result<Vec<Jet2>, FieldError> {
        self.components.iter().map(|c| c.eval_jet2(point)).collect()
    }

    pub fn eval_taylor(&self, point: &[f64], order: usize) -> Result<Vec<Taylor>, FieldError> {
        self.components
            .iter()
            .map(|c| c.eval_taylor(point, order))
            .collect()
    }

    pub fn eval_value(&self, point: &[f64]) -> Result<Vec<C64>, FieldError> {
        self.components.iter().map(|c| c.eval_value(point)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn constant_folding() {
        let x = SmoothField::var(2, 0);
        assert!((&x * &SmoothField::zero(2)).is_zero());
        let s = &SmoothField::real(2, 2.0) + &SmoothField::real(2, 3.0);
        assert_eq!(s.as_constant(), Some(c(5.0)));
        assert!(x.diff(1).is_zero());
    }

    #[test]
    fn symbolic_diff_matches_jets() {
        let d = 3;
        let q: Vec<_> = (0..d).map(|k| SmoothField::var(d, k)).collect();
        let u = &(&q[0] * &q[1]) + &(&q[2].square() + &SmoothField::real(d, 1.5));
        let f = &u.sqrt() * &(&q[1].scale(c(0.3))).exp() + u.recip();
        let pt = [0.4, -0.2, 0.9];
        let j = f.eval_jet2(&pt).unwrap();
        for k in 0..d {
            let dk = f.diff(k).eval_jet2(&pt).unwrap();
            assert!((dk.value() - j.partial(k)).norm() < 1e-14);
            for l in 0..d {
                assert!((dk.partial(l) - j.hessian(k, l)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn substitution_and_continuation() {
        // sqrt(q0^2 - q1^2) under q1 -> i*r1 becomes sqrt(r0^2 + r1^2)
        let q0 = SmoothField::var(2, 0);
        let q1 = SmoothField::var(2, 1);
        let f = (&q0.square() - &q1.square()).sqrt();
        let g = f.substitute(&[q0.clone(), q1.scale(C64::new(0.0, 1.0))]);
        let v = g.eval_value(&[3.0, 4.0]).unwrap();
        assert!((v - c(5.0)).norm() < 1e-15);

        let h = f.continue_sqrt_lower();
        let w = h.eval_value(&[3.0, 5.0]).unwrap(); // -i*sqrt(16)
        assert!((w - C64::new(0.0, -4.0)).norm() < 1e-15);
        assert!(f.eval_value(&[3.0, 5.0]).is_err());
    }

    #[test]
    fn domain_error_names_the_point() {
        let f = SmoothField::var(1, 0).sqrt();
        match f.eval_jet2(&[-2.0]) {
            Err(FieldError::Domain { point, .. }) => assert_eq!(point, vec![-2.0]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
