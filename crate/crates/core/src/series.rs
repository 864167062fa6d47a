//! Truncated multivariate Taylor series over the complex numbers.
//!
//! A [`TruncatedSeries`] is a polynomial in the shifted variables
//! `z - center`, keeping only monomials of total degree at most `order`.
//! Every system, Jacobian and Schur complement in this crate is built
//! from these.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Scalar = Complex64;

/// Relative threshold under which a series is treated as identically zero.
pub const ZERO_RTOL: f64 = 1e-12;

/// Multi-index of a monomial, one exponent per variable.
///
/// Ordered graded-lexicographically: lower total degree first, and within
/// a degree `x^2 < x y < y^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(exponents: Vec<u32>) -> Self {
        Exponent(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        Exponent(vec![0; dim])
    }

    pub fn unit(dim: usize, var: usize) -> Self {
        let mut e = vec![0; dim];
        e[var] = 1;
        Exponent(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// `alpha! = prod_i alpha_i!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e as usize)).product()
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Multivariate Taylor polynomial around `center`, truncated at total degree `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    center: Vec<Scalar>,
    order: usize,
    coeffs: BTreeMap<Exponent, Scalar>,
}

impl TruncatedSeries {
    /// The zero series.
    pub fn zero(center: Vec<Scalar>, order: usize) -> Self {
        TruncatedSeries {
            center,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(center: Vec<Scalar>, order: usize, value: Scalar) -> Self {
        let dim = center.len();
        let mut s = Self::zero(center, order);
        s.insert(Exponent::zero(dim), value);
        s
    }

    /// Builds a series from `(exponent, coefficient)` pairs in the shifted
    /// variables. Repeated exponents accumulate; terms above `order` are dropped.
    pub fn from_terms<I>(center: Vec<Scalar>, order: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Scalar)>,
    {
        let dim = center.len();
        let mut s = Self::zero(center, order);
        for (e, c) in terms {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            s.insert(e, c);
        }
        Ok(s)
    }

    /// A polynomial given in absolute coordinates (expanded around the origin),
    /// re-expanded around `center` and truncated at `order`.
    pub fn polynomial<I>(center: Vec<Scalar>, order: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Scalar)>,
    {
        let dim = center.len();
        let terms: Vec<_> = terms.into_iter().collect();
        let degree = terms.iter().map(|(e, _)| e.degree()).max().unwrap_or(0);
        let at_origin = Self::from_terms(vec![Scalar::new(0.0, 0.0); dim], degree, terms)?;
        let mut s = at_origin.recenter(&center, order.min(degree))?;
        // a polynomial has no terms beyond its degree, so a higher order is exact
        s.order = order;
        Ok(s)
    }

    fn insert(&mut self, e: Exponent, c: Scalar) {
        if e.degree() > self.order || c == Scalar::new(0.0, 0.0) {
            return;
        }
        let entry = self.coeffs.entry(e).or_insert(Scalar::new(0.0, 0.0));
        *entry += c;
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[Scalar] {
        &self.center
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, e: &Exponent) -> Scalar {
        self.coeffs.get(e).copied().unwrap_or_default()
    }

    /// Nonzero terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Scalar)> {
        self.coeffs.iter()
    }

    /// Highest total degree carrying a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Exponent::zero(self.dim()))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every coefficient is at most `ZERO_RTOL * (1 + scale)`,
    /// `scale` being the coefficient magnitude of the inputs that produced it.
    pub fn is_negligible(&self, scale: f64) -> bool {
        self.max_abs_coeff() <= ZERO_RTOL * (1.0 + scale)
    }

    /// Coefficient-wise equality within `ZERO_RTOL` relative to the larger operand.
    pub fn approx_eq(&self, other: &TruncatedSeries) -> bool {
        if self.center != other.center {
            return false;
        }
        let scale = self.max_abs_coeff().max(other.max_abs_coeff());
        let tol = ZERO_RTOL * (1.0 + scale);
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .all(|e| (self.coeff(e) - other.coeff(e)).norm() <= tol)
    }

    fn check_compatible(&self, other: &TruncatedSeries) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if self.center != other.center {
            return Err(Error::CenterMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.center.clone(), self.order.min(other.order));
        for (e, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            out.insert(e.clone(), *c);
        }
        out.prune();
        Ok(out)
    }

    pub fn checked_sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.checked_add(&other.scale(Scalar::new(-1.0, 0.0)))
    }

    /// Cauchy product truncated at `min(self.order, other.order)`.
    pub fn checked_mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check_compatible(other)?;
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.center.clone(), order);
        for (ea, ca) in &self.coeffs {
            if ea.degree() > order {
                continue;
            }
            for (eb, cb) in &other.coeffs {
                if ea.degree() + eb.degree() <= order {
                    out.insert(ea.add(eb), ca * cb);
                }
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn scale(&self, factor: Scalar) -> TruncatedSeries {
        let mut out = Self::zero(self.center.clone(), self.order);
        for (e, c) in &self.coeffs {
            out.insert(e.clone(), c * factor);
        }
        out
    }

    /// Drops exact zeros left over by cancellation.
    fn prune(&mut self) {
        self.coeffs.retain(|_, c| *c != Scalar::new(0.0, 0.0));
    }

    pub fn truncate(&self, order: usize) -> TruncatedSeries {
        let mut out = Self::zero(self.center.clone(), order);
        for (e, c) in &self.coeffs {
            out.insert(e.clone(), *c);
        }
        out
    }

    /// Formal partial derivative with respect to variable `var`; the order drops by one.
    pub fn derivative(&self, var: usize) -> TruncatedSeries {
        assert!(var < self.dim(), "variable index out of range");
        let mut out = Self::zero(self.center.clone(), self.order.saturating_sub(1));
        for (e, c) in &self.coeffs {
            let k = e.0[var];
            if k == 0 {
                continue;
            }
            let mut d = e.0.clone();
            d[var] -= 1;
            out.insert(Exponent(d), c * f64::from(k));
        }
        out
    }

    /// All first-order partial derivatives.
    pub fn gradient(&self) -> Vec<TruncatedSeries> {
        (0..self.dim()).map(|v| self.derivative(v)).collect()
    }

    /// Evaluates the truncated polynomial at the absolute point `x`.
    pub fn evaluate(&self, x: &[Scalar]) -> Scalar {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        let shift: Vec<Scalar> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let powers = power_table(&shift, self.degree());
        self.coeffs
            .iter()
            .map(|(e, c)| {
                e.0.iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &k)| acc * powers[i][k as usize])
            })
            .sum()
    }

    /// Taylor re-expansion around `new_center`, truncated at `new_order`.
    ///
    /// Exact when the series is a polynomial of degree at most its order.
    pub fn recenter(&self, new_center: &[Scalar], new_order: usize) -> Result<TruncatedSeries> {
        if new_center.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: new_center.len(),
            });
        }
        if new_order > self.order {
            return Err(Error::Domain(format!(
                "cannot recenter a series of order {} at order {new_order}",
                self.order
            )));
        }
        let shift: Vec<Scalar> = new_center
            .iter()
            .zip(&self.center)
            .map(|(b, a)| b - a)
            .collect();
        let powers = power_table(&shift, self.degree());
        let mut out = Self::zero(new_center.to_vec(), new_order);
        for (alpha, c) in &self.coeffs {
            expand_shifted(alpha, *c, &powers, new_order, &mut out);
        }
        out.prune();
        Ok(out)
    }

    /// `g` with `self * g = 1` up to `order`, via the truncated Neumann series
    /// `1/f = (1/c) sum_k (-h/c)^k` where `f = c + h`.
    pub fn reciprocal(&self, order: usize) -> Result<TruncatedSeries> {
        let c = self.constant_term();
        if c.norm() <= ZERO_RTOL * (1.0 + self.max_abs_coeff()) {
            return Err(Error::SingularPivot(
                "series has a vanishing constant term".into(),
            ));
        }
        let order = order.min(self.order);
        let inv_c = c.inv();
        let mut ratio = self.truncate(order);
        ratio.coeffs.remove(&Exponent::zero(self.dim()));
        let ratio = ratio.scale(-inv_c);
        let one = Self::constant(self.center.clone(), order, Scalar::new(1.0, 0.0));
        let mut sum = one.clone();
        let mut power = one;
        for _ in 0..order {
            power = power.checked_mul(&ratio)?;
            sum = sum.checked_add(&power)?;
        }
        Ok(sum.scale(inv_c))
    }
}

fn power_table(shift: &[Scalar], max_degree: usize) -> Vec<Vec<Scalar>> {
    shift
        .iter()
        .map(|&d| {
            let mut row = Vec::with_capacity(max_degree + 1);
            let mut p = Scalar::new(1.0, 0.0);
            for _ in 0..=max_degree {
                row.push(p);
                p *= d;
            }
            row
        })
        .collect()
}

/// Adds `c * prod_i ((z-b)_i + d_i)^{alpha_i}` into `out`.
fn expand_shifted(
    alpha: &Exponent,
    c: Scalar,
    powers: &[Vec<Scalar>],
    max_order: usize,
    out: &mut TruncatedSeries,
) {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        var: usize,
        alpha: &[u32],
        acc: Scalar,
        beta: &mut Vec<u32>,
        deg: usize,
        powers: &[Vec<Scalar>],
        max_order: usize,
        out: &mut TruncatedSeries,
    ) {
        if var == alpha.len() {
            out.insert(Exponent(beta.clone()), acc);
            return;
        }
        for j in 0..=alpha[var] {
            if deg + j as usize > max_order {
                break;
            }
            let factor = binomial(alpha[var], j) * powers[var][(alpha[var] - j) as usize];
            if factor == Scalar::new(0.0, 0.0) {
                continue;
            }
            beta.push(j);
            rec(
                var + 1,
                alpha,
                acc * factor,
                beta,
                deg + j as usize,
                powers,
                max_order,
                out,
            );
            beta.pop();
        }
    }
    let mut beta = Vec::with_capacity(alpha.dim());
    rec(0, &alpha.0, c, &mut beta, 0, powers, max_order, out);
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{:.5e}", c.re)?;
            } else {
                write!(f, "({:.5e}{:+.5e}i)", c.re, c.im)?;
            }
            for (i, &k) in e.0.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*z{i}")?,
                    _ => write!(f, "*z{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    fn origin() -> Vec<Scalar> {
        vec![c(0.0), c(0.0)]
    }

    fn series(order: usize, terms: &[(&[u32], f64)]) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            origin(),
            order,
            terms
                .iter()
                .map(|(e, v)| (Exponent::new(e.to_vec()), c(*v))),
        )
        .unwrap()
    }

    fn f1() -> TruncatedSeries {
        series(
            3,
            &[
                (&[3, 0], 1.0 / 3.0),
                (&[1, 2], 1.0),
                (&[2, 0], 1.0),
                (&[1, 1], 2.0),
                (&[0, 2], 1.0),
            ],
        )
    }

    #[test]
    fn graded_order() {
        let mut v = [
            Exponent::new(vec![0, 2]),
            Exponent::new(vec![1, 0]),
            Exponent::new(vec![1, 1]),
            Exponent::new(vec![0, 0]),
            Exponent::new(vec![2, 0]),
        ];
        v.sort();
        let got: Vec<_> = v.iter().map(|e| e.as_slice().to_vec()).collect();
        assert_eq!(
            got,
            vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn add_linearity_and_cancellation() {
        let a = series(2, &[(&[0, 0], 1.0), (&[1, 0], 1.0)]);
        let b = series(2, &[(&[0, 0], 2.0), (&[0, 1], 1.0)]);
        let s = a.checked_add(&b).unwrap();
        assert_eq!(
            s,
            series(2, &[(&[0, 0], 3.0), (&[1, 0], 1.0), (&[0, 1], 1.0)])
        );

        let zero = TruncatedSeries::zero(origin(), 2);
        assert_eq!(a.checked_add(&zero).unwrap(), a);

        let x2 = series(2, &[(&[2, 0], 1.0)]);
        let cancel = x2.checked_add(&x2.scale(c(-1.0))).unwrap();
        assert_eq!(cancel.terms().count(), 0);
    }

    #[test]
    fn mul_truncates() {
        let a = series(2, &[(&[0, 0], 1.0), (&[1, 0], 1.0)]);
        let b = series(2, &[(&[0, 0], 1.0), (&[1, 0], -1.0)]);
        assert_eq!(
            a.checked_mul(&b).unwrap(),
            series(2, &[(&[0, 0], 1.0), (&[2, 0], -1.0)])
        );

        let x = series(1, &[(&[1, 0], 1.0)]);
        let y = series(1, &[(&[0, 1], 1.0)]);
        assert_eq!(x.checked_mul(&y).unwrap().terms().count(), 0);

        let xy = series(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]);
        assert_eq!(
            xy.checked_mul(&xy).unwrap(),
            series(2, &[(&[2, 0], 1.0), (&[1, 1], 2.0), (&[0, 2], 1.0)])
        );
    }

    #[test]
    fn mismatched_centers_are_rejected() {
        let a = series(2, &[(&[1, 0], 1.0)]);
        let b = TruncatedSeries::constant(vec![c(1.0), c(0.0)], 2, c(1.0));
        assert_eq!(a.checked_add(&b), Err(Error::CenterMismatch));
        let d = TruncatedSeries::constant(vec![c(0.0)], 2, c(1.0));
        assert!(matches!(
            a.checked_mul(&d),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn derivative_of_first_equation() {
        let d = f1().derivative(0);
        assert_eq!(d.order(), 2);
        assert_eq!(
            d,
            series(
                2,
                &[
                    (&[2, 0], 1.0),
                    (&[0, 2], 1.0),
                    (&[1, 0], 2.0),
                    (&[0, 1], 2.0)
                ]
            )
        );
        let k = TruncatedSeries::constant(origin(), 3, c(5.0));
        assert_eq!(k.derivative(1).terms().count(), 0);
    }

    #[test]
    fn evaluate_basic() {
        let xy = series(2, &[(&[2, 0], 1.0), (&[1, 1], 2.0), (&[0, 2], 1.0)]);
        assert_eq!(xy.evaluate(&[c(1.0), c(1.0)]), c(4.0));
        assert_eq!(f1().evaluate(&origin()), c(0.0));
    }

    #[test]
    fn recenter_matches_reference_expansion() {
        let x0 = vec![c(-0.0005), c(0.0006)];
        let t = f1().recenter(&x0, 3).unwrap();
        let k = t.constant_term().re;
        assert!((k - 9.7783e-9).abs() < 1e-12, "{k}");
        let lin_x = t.coeff(&Exponent::new(vec![1, 0])).re;
        assert!((lin_x - 2.0061e-4).abs() < 1e-8, "{lin_x}");
        let back = t.recenter(&origin(), 3).unwrap();
        assert!(back.approx_eq(&f1()));
        assert_eq!(f1().recenter(&origin(), 3).unwrap(), f1());
    }

    #[test]
    fn recenter_rejects_higher_order() {
        assert!(f1().recenter(&origin(), 4).is_err());
    }

    #[test]
    fn reciprocal_geometric() {
        let f = series(2, &[(&[0, 0], 1.0), (&[1, 0], 1.0)]);
        assert_eq!(
            f.reciprocal(2).unwrap(),
            series(2, &[(&[0, 0], 1.0), (&[1, 0], -1.0), (&[2, 0], 1.0)])
        );
        let two = TruncatedSeries::constant(origin(), 3, c(2.0));
        assert_eq!(two.reciprocal(3).unwrap().constant_term(), c(0.5));
        let x = series(2, &[(&[1, 0], 1.0)]);
        assert!(matches!(x.reciprocal(2), Err(Error::SingularPivot(_))));
    }

    #[test]
    fn polynomial_constructor_recenters() {
        let p = TruncatedSeries::polynomial(
            vec![c(1.0), c(0.0)],
            2,
            vec![(Exponent::new(vec![2, 0]), c(1.0))],
        )
        .unwrap();
        // x^2 = 1 + 2(x-1) + (x-1)^2
        assert_eq!(
            p,
            TruncatedSeries::from_terms(
                vec![c(1.0), c(0.0)],
                2,
                vec![
                    (Exponent::new(vec![0, 0]), c(1.0)),
                    (Exponent::new(vec![1, 0]), c(2.0)),
                    (Exponent::new(vec![2, 0]), c(1.0)),
                ],
            )
            .unwrap()
        );
    }
}
