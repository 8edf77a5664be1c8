//! Multivariate truncated Taylor polynomials of runtime order.
//!
//! Only the Casimir commutator checks need more than second derivatives, so
//! this type trades speed for generality. Coefficients are stored in the
//! monomial basis `h^α` (not scaled by `α!`).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;

use super::jet::{check_recip, check_sqrt_branch, Jet2, JetArithmetic, JetError};

pub const MAX_ORDER: usize = 4;

const NONE: u32 = u32::MAX;

#[derive(Debug)]
pub struct MonomialTable {
    dim: usize,
    exponents: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    /// number of monomials of degree ≤ r, for r = 0..=MAX_ORDER
    counts: Vec<usize>,
    /// `product[i * len + j]`, NONE if the degree overflows
    product: Vec<u32>,
    /// `raise[k][i]` = index of `α_i + e_k`
    raise: Vec<Vec<u32>>,
}

impl MonomialTable {
    fn build(dim: usize) -> Self {
        assert!(dim >= 1, "Taylor expansions need at least one variable");
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut counts = Vec::with_capacity(MAX_ORDER + 1);
        for degree in 0..=MAX_ORDER {
            let mut cur = vec![0u8; dim];
            push_compositions(&mut exponents, &mut cur, 0, degree);
            counts.push(exponents.len());
        }
        let degrees: Vec<usize> = exponents
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, u32> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as u32))
            .collect();
        let len = exponents.len();
        let mut product = vec![NONE; len * len];
        for i in 0..len {
            for j in 0..len {
                if degrees[i] + degrees[j] <= MAX_ORDER {
                    let sum: Vec<u8> = exponents[i]
                        .iter()
                        .zip(&exponents[j])
                        .map(|(a, b)| a + b)
                        .collect();
                    product[i * len + j] = index[&sum];
                }
            }
        }
        let raise = (0..dim)
            .map(|k| {
                exponents
                    .iter()
                    .map(|e| {
                        let mut r = e.clone();
                        r[k] += 1;
                        index.get(&r).copied().unwrap_or(NONE)
                    })
                    .collect()
            })
            .collect();
        Self {
            dim,
            exponents,
            degrees,
            counts,
            product,
            raise,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len_for_order(&self, order: usize) -> usize {
        self.counts[order]
    }

    pub fn exponent(&self, i: usize) -> &[u8] {
        &self.exponents[i]
    }

    pub fn index_of(&self, exponent: &[u8]) -> Option<usize> {
        let deg: usize = exponent.iter().map(|&x| x as usize).sum();
        if deg > MAX_ORDER || exponent.len() != self.dim {
            return None;
        }
        let lo = if deg == 0 { 0 } else { self.counts[deg - 1] };
        (lo..self.counts[deg]).find(|&i| self.exponents[i] == exponent)
    }
}

fn push_compositions(out: &mut Vec<Vec<u8>>, cur: &mut [u8], pos: usize, remaining: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u8;
        out.push(cur.to_vec());
        cur[pos] = 0;
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v as u8;
        push_compositions(out, cur, pos + 1, remaining - v);
    }
    cur[pos] = 0;
}

/// Shared, lazily built monomial table for `dim` variables.
pub fn monomial_table(dim: usize) -> Arc<MonomialTable> {
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<MonomialTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().expect("monomial table cache poisoned");
    guard
        .entry(dim)
        .or_insert_with(|| Arc::new(MonomialTable::build(dim)))
        .clone()
}

#[derive(Debug, Clone)]
pub struct Taylor {
    table: Arc<MonomialTable>,
    order: usize,
    coeffs: Vec<C64>,
}

impl PartialEq for Taylor {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.dim() == other.dim() && self.coeffs == other.coeffs
    }
}

impl Taylor {
    pub fn constant(dim: usize, order: usize, c: C64) -> Self {
        assert!(order <= MAX_ORDER, "Taylor order {order} exceeds {MAX_ORDER}");
        let table = monomial_table(dim);
        let mut coeffs = vec![C64::new(0.0, 0.0); table.len_for_order(order)];
        coeffs[0] = c;
        Self {
            table,
            order,
            coeffs,
        }
    }

    pub fn seed(dim: usize, order: usize, k: usize, x: f64) -> Self {
        let mut t = Self::constant(dim, order, C64::new(x, 0.0));
        if order >= 1 {
            let mut e = vec![0u8; dim];
            e[k] = 1;
            let i = t.table.index_of(&e).expect("degree-one monomial");
            t.coeffs[i] = C64::new(1.0, 0.0);
        }
        t
    }

    pub fn seeds(point: &[f64], order: usize) -> Vec<Self> {
        (0..point.len())
            .map(|k| Self::seed(point.len(), order, k, point[k]))
            .collect()
    }

    pub fn from_jet2(j: &Jet2) -> Self {
        let dim = j.dim();
        let mut t = Self::constant(dim, 2, j.value());
        for k in 0..dim {
            let mut e = vec![0u8; dim];
            e[k] = 1;
            let i = t.table.index_of(&e).unwrap();
            t.coeffs[i] = j.partial(k);
            for l in k..dim {
                let mut e2 = vec![0u8; dim];
                e2[k] += 1;
                e2[l] += 1;
                let i2 = t.table.index_of(&e2).unwrap();
                t.coeffs[i2] = if k == l {
                    j.hessian(k, k) * 0.5
                } else {
                    j.hessian(k, l)
                };
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.table.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// The partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, alpha: &[u8]) -> C64 {
        match self.table.index_of(alpha) {
            Some(i) if i < self.coeffs.len() => {
                let fact: f64 = alpha
                    .iter()
                    .map(|&a| (1..=a as u32).product::<u32>() as f64)
                    .product();
                self.coeffs[i] * fact
            }
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            table: self.table.clone(),
            order,
            coeffs: self.coeffs[..self.table.len_for_order(order)].to_vec(),
        }
    }

    /// `∂/∂q_k`, one order lower.
    pub fn derivative(&self, k: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 Taylor value");
        let order = self.order - 1;
        let len = self.table.len_for_order(order);
        let raise = &self.table.raise[k];
        let coeffs = (0..len)
            .map(|i| {
                let r = raise[i] as usize;
                let ak = self.table.exponents[i][k] as f64 + 1.0;
                self.coeffs[r] * ak
            })
            .collect();
        Self {
            table: self.table.clone(),
            order,
            coeffs,
        }
    }

    fn binary(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.dim(), other.dim(), "Taylor dimension mismatch");
        let order = self.order.min(other.order);
        let len = self.table.len_for_order(order);
        let coeffs = (0..len).map(|i| f(self.coeffs[i], other.coeffs[i])).collect();
        Self {
            table: self.table.clone(),
            order,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.binary(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.binary(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "Taylor dimension mismatch");
        let order = self.order.min(other.order);
        let t = &self.table;
        let len_all = t.exponents.len();
        let len = t.len_for_order(order);
        let mut coeffs = vec![C64::new(0.0, 0.0); len];
        for i in 0..len {
            let a = self.coeffs[i];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            let jmax = t.len_for_order(order - t.degrees[i]);
            let row = &t.product[i * len_all..i * len_all + jmax];
            for (j, &p) in row.iter().enumerate() {
                coeffs[p as usize] += a * other.coeffs[j];
            }
        }
        Self {
            table: self.table.clone(),
            order,
            coeffs,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            table: self.table.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// `Σ_j d_j/j! · δ^j` where `δ = self − value` and `d_j` are the scalar
    /// derivatives of the outer function at the value.
    fn compose(&self, derivs: &[C64]) -> Self {
        let mut delta = self.clone();
        delta.coeffs[0] = C64::new(0.0, 0.0);
        let mut out = Self::constant(self.dim(), self.order, derivs[0]);
        let mut power = Self::constant(self.dim(), self.order, C64::new(1.0, 0.0));
        let mut fact = 1.0;
        for (j, d) in derivs.iter().enumerate().skip(1).take(self.order) {
            power = power.mul(&delta);
            fact *= j as f64;
            out = out.add(&power.scale(d / fact));
        }
        out
    }

    pub fn sqrt(&self) -> Result<Self, JetError> {
        let v = self.value();
        check_sqrt_branch(v)?;
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut c = 1.0;
        let mut e = 0.5;
        for _ in 0..=self.order {
            derivs.push(v.powf(e) * c);
            c *= e;
            e -= 1.0;
        }
        Ok(self.compose(&derivs))
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let v = self.value();
        check_recip(v)?;
        let r = 1.0 / v;
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut d = r;
        for j in 0..=self.order {
            derivs.push(d);
            d = -d * r * (j as f64 + 1.0);
        }
        Ok(self.compose(&derivs))
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }
}

impl JetArithmetic for Taylor {
    fn lift_constant(&self, c: C64) -> Self {
        Taylor::constant(self.dim(), self.order, c)
    }
    fn jet_value(&self) -> C64 {
        self.value()
    }
    fn jet_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn jet_mul(&self, other: &Self) -> Self {
        self.mul(other)
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

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn table_counts_match_binomials() {
        let t = monomial_table(3);
        // C(3 + r, r)
        assert_eq!(
            (0..=MAX_ORDER).map(|r| t.len_for_order(r)).collect::<Vec<_>>(),
            vec![1, 4, 10, 20, 35]
        );
    }

    #[test]
    fn cube_derivatives() {
        let x = Taylor::seed(1, 3, 0, 2.0);
        let x3 = x.mul(&x).mul(&x);
        assert_eq!(x3.partial(&[0]), c(8.0));
        assert_eq!(x3.partial(&[1]), c(12.0));
        assert_eq!(x3.partial(&[2]), c(12.0));
        assert_eq!(x3.partial(&[3]), c(6.0));
    }

    #[test]
    fn sqrt_third_derivative() {
        let s = Taylor::seed(1, 3, 0, 4.0).sqrt().unwrap();
        // d³√x/dx³ = 3/8 x^{-5/2}
        assert!((s.partial(&[3]) - c(3.0 / 8.0 / 32.0)).norm() < 1e-15);
    }

    #[test]
    fn agrees_with_jet2_at_order_two() {
        let p = [0.3, -0.7];
        let j = {
            let s = Jet2::seeds(&p);
            let u = &(&s[0] * &s[1]) + &Jet2::constant(2, c(2.0));
            &u.sqrt().unwrap() * &s[0].exp()
        };
        let t = {
            let s = Taylor::seeds(&p, 2);
            let u = s[0].mul(&s[1]).add(&Taylor::constant(2, 2, c(2.0)));
            u.sqrt().unwrap().mul(&s[0].exp())
        };
        let tj = Taylor::from_jet2(&j);
        for alpha in [[0u8, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]] {
            assert!((t.partial(&alpha) - tj.partial(&alpha)).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_lowers_order() {
        let s = Taylor::seeds(&[1.0, 2.0], 3);
        let f = s[0].mul(&s[0]).mul(&s[1]); // x² y
        let fx = f.derivative(0); // 2xy
        assert_eq!(fx.order(), 2);
        assert_eq!(fx.value(), c(4.0));
        assert_eq!(fx.partial(&[1, 1]), c(2.0));
    }
}
