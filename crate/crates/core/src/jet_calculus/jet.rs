//! Order-two truncated Taylor arithmetic.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a complex-valued
//! function of `dim` real variables at a single point. Arithmetic on jets
//! applies the sum, product and chain rules exactly to second order, so any
//! expression built from variable seeds, constants and the operations below
//! yields exact first and second partial derivatives (up to roundoff).

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("square root requested off the principal branch (value {value})")]
    BranchCut { value: C64 },
    #[error("reciprocal of a jet with zero value")]
    DivisionByZero,
}

/// Operations shared by every jet flavour (and by plain complex values), so
/// that one expression tree can be evaluated at any truncation order.
pub trait JetArithmetic: Clone + Sized {
    fn lift_constant(&self, c: C64) -> Self;
    fn jet_value(&self) -> C64;
    fn jet_add(&self, other: &Self) -> Self;
    fn jet_mul(&self, other: &Self) -> Self;
    fn jet_scale(&self, c: C64) -> Self;
    fn jet_neg(&self) -> Self {
        self.jet_scale(C64::new(-1.0, 0.0))
    }
    fn jet_sqrt(&self) -> Result<Self, JetError>;
    fn jet_recip(&self) -> Result<Self, JetError>;
    fn jet_exp(&self) -> Self;
}

pub(crate) fn check_sqrt_branch(v: C64) -> Result<(), JetError> {
    // principal branch, restricted to the open right half plane
    if v.re > 0.0 {
        Ok(())
    } else {
        Err(JetError::BranchCut { value: v })
    }
}

pub(crate) fn check_recip(v: C64) -> Result<(), JetError> {
    if v.norm_sqr() == 0.0 {
        Err(JetError::DivisionByZero)
    } else {
        Ok(())
    }
}

/// Value, gradient and (symmetric) Hessian of a function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    value: C64,
    gradient: Vec<C64>,
    /// row-major `dim x dim`, always exactly symmetric
    hessian: Vec<C64>,
}

impl Jet2 {
    /// Builds a jet from raw parts. The Hessian is symmetrized.
    pub fn new(value: C64, gradient: Vec<C64>, hessian: Vec<C64>) -> Result<Self, JetError> {
        let dim = gradient.len();
        if hessian.len() != dim * dim {
            return Err(JetError::DimensionMismatch {
                left: dim * dim,
                right: hessian.len(),
            });
        }
        let mut h = hessian;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let s = (h[i * dim + j] + h[j * dim + i]) * 0.5;
                h[i * dim + j] = s;
                h[j * dim + i] = s;
            }
        }
        Ok(Self {
            value,
            gradient,
            hessian: h,
        })
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self {
            value: c,
            gradient: vec![C64::new(0.0, 0.0); dim],
            hessian: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    /// The coordinate function `q_k` seeded at `q_k = x`.
    pub fn seed(dim: usize, k: usize, x: f64) -> Self {
        assert!(k < dim, "seed index {k} out of range for dimension {dim}");
        let mut j = Self::constant(dim, C64::new(x, 0.0));
        j.gradient[k] = C64::new(1.0, 0.0);
        j
    }

    /// Seeds for every coordinate of `point`.
    pub fn seeds(point: &[f64]) -> Vec<Self> {
        let dim = point.len();
        (0..dim).map(|k| Self::seed(dim, k, point[k])).collect()
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn gradient(&self) -> &[C64] {
        &self.gradient
    }

    pub fn partial(&self, k: usize) -> C64 {
        self.gradient[k]
    }

    pub fn hessian(&self, i: usize, j: usize) -> C64 {
        self.hessian[i * self.dim() + j]
    }

    pub fn hessian_row(&self, i: usize) -> &[C64] {
        let d = self.dim();
        &self.hessian[i * d..(i + 1) * d]
    }

    fn same_dim(&self, other: &Self) -> Result<(), JetError> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(JetError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        self.same_dim(other)?;
        Ok(Self {
            value: self.value + other.value,
            gradient: zip_with(&self.gradient, &other.gradient, |a, b| a + b),
            hessian: zip_with(&self.hessian, &other.hessian, |a, b| a + b),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, JetError> {
        self.same_dim(other)?;
        Ok(Self {
            value: self.value - other.value,
            gradient: zip_with(&self.gradient, &other.gradient, |a, b| a - b),
            hessian: zip_with(&self.hessian, &other.hessian, |a, b| a - b),
        })
    }

    /// Leibniz rule to second order.
    pub fn try_mul(&self, other: &Self) -> Result<Self, JetError> {
        self.same_dim(other)?;
        let d = self.dim();
        let (a, b) = (self.value, other.value);
        let gradient = (0..d)
            .map(|k| self.gradient[k] * b + a * other.gradient[k])
            .collect();
        let mut hessian = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in i..d {
                let h = (self.hessian[i * d + j] * b + a * other.hessian[i * d + j])
                    + (self.gradient[i] * other.gradient[j]
                        + self.gradient[j] * other.gradient[i]);
                hessian[i * d + j] = h;
                hessian[j * d + i] = h;
            }
        }
        Ok(Self {
            value: a * b,
            gradient,
            hessian,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            value: self.value * c,
            gradient: self.gradient.iter().map(|g| g * c).collect(),
            hessian: self.hessian.iter().map(|h| h * c).collect(),
        }
    }

    /// `f(self)` for a scalar function with `f(v)`, `f'(v)`, `f''(v)` given.
    fn compose(&self, f0: C64, f1: C64, f2: C64) -> Self {
        let d = self.dim();
        let gradient = self.gradient.iter().map(|g| g * f1).collect();
        let mut hessian = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in i..d {
                let h = self.hessian[i * d + j] * f1 + self.gradient[i] * self.gradient[j] * f2;
                hessian[i * d + j] = h;
                hessian[j * d + i] = h;
            }
        }
        Self {
            value: f0,
            gradient,
            hessian,
        }
    }

    /// Principal square root; the value must have a positive real part.
    pub fn sqrt(&self) -> Result<Self, JetError> {
        check_sqrt_branch(self.value)?;
        let r = self.value.sqrt();
        let f1 = 0.5 / r;
        let f2 = -0.25 / (r * self.value);
        Ok(self.compose(r, f1, f2))
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        check_recip(self.value)?;
        let r = 1.0 / self.value;
        Ok(self.compose(r, -r * r, 2.0 * r * r * r))
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    /// Partial derivative `∂/∂q_k` as a first-order jet.
    pub fn derivative(&self, k: usize) -> Jet1 {
        Jet1 {
            value: self.gradient[k],
            gradient: self.hessian_row(k).to_vec(),
        }
    }

    pub fn truncate(&self) -> Jet1 {
        Jet1 {
            value: self.value,
            gradient: self.gradient.clone(),
        }
    }
}

fn zip_with(a: &[C64], b: &[C64], f: impl Fn(C64, C64) -> C64) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        self.try_add(rhs).expect("jet dimensions agree")
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.try_sub(rhs).expect("jet dimensions agree")
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        self.try_mul(rhs).expect("jet dimensions agree")
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl JetArithmetic for Jet2 {
    fn lift_constant(&self, c: C64) -> Self {
        Jet2::constant(self.dim(), c)
    }
    fn jet_value(&self) -> C64 {
        self.value
    }
    fn jet_add(&self, other: &Self) -> Self {
        self + other
    }
    fn jet_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn jet_scale(&self, c: C64) -> Self {
        self.scale(c)
    }
    fn jet_sqrt(&self) -> Result<Self, JetError> {
        self.sqrt()
    }
    fn jet_recip(&self) -> Result<Self, JetError> {
        self.recip()
    }
    fn jet_exp(&self) -> Self {
        self.exp()
    }
}

/// Plain values: order-zero evaluation of the same expressions.
impl JetArithmetic for C64 {
    fn lift_constant(&self, c: C64) -> Self {
        c
    }
    fn jet_value(&self) -> C64 {
        *self
    }
    fn jet_add(&self, other: &Self) -> Self {
        self + other
    }
    fn jet_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn jet_scale(&self, c: C64) -> Self {
        self * c
    }
    fn jet_sqrt(&self) -> Result<Self, JetError> {
        check_sqrt_branch(*self)?;
        Ok(self.sqrt())
    }
    fn jet_recip(&self) -> Result<Self, JetError> {
        check_recip(*self)?;
        Ok(1.0 / self)
    }
    fn jet_exp(&self) -> Self {
        self.exp()
    }
}

/// Value and gradient only; the result of applying a first-order operator to
/// a [`Jet2`] field.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: C64,
    pub gradient: Vec<C64>,
}

impl Jet1 {
    pub fn zero(dim: usize) -> Self {
        Self {
            value: C64::new(0.0, 0.0),
            gradient: vec![C64::new(0.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    /// `self += factor * other`, with `factor` a plain constant.
    pub fn add_scaled(&mut self, factor: C64, other: &Jet1) {
        self.value += factor * other.value;
        for (g, o) in self.gradient.iter_mut().zip(&other.gradient) {
            *g += factor * o;
        }
    }

    /// `self += coeff * other`, both carrying first derivatives.
    pub fn add_product(&mut self, coeff: &Jet2, other: &Jet1) {
        let c = coeff.value();
        self.value += c * other.value;
        for (k, g) in self.gradient.iter_mut().enumerate() {
            *g += c * other.gradient[k] + coeff.partial(k) * other.value;
        }
    }
}
