//! Bergman-space norms on a ball and the derivative bounds they imply.
//!
//! The space is `A^2(omega, R)` with the normalized volume measure, so the
//! constant function 1 has norm 1. Two norms are offered, see [`NormBackend`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{factorial, Exponent, Scalar, TruncatedSeries};
use crate::system::AnalyticSystem;

/// The ball `B(omega, R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallContext {
    omega: Vec<Scalar>,
    radius: f64,
}

impl BallContext {
    pub fn new(omega: Vec<Scalar>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(BallContext { omega, radius })
    }

    pub fn omega(&self) -> &[Scalar] {
        &self.omega
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    /// Same radius, centered at `x`.
    pub fn centered_at(&self, x: &[Scalar]) -> BallContext {
        BallContext {
            omega: x.to_vec(),
            radius: self.radius,
        }
    }

    pub fn nu(&self, x: &[Scalar]) -> Result<f64> {
        nu(x, self)
    }

    pub fn kappa(&self, x: &[Scalar]) -> Result<f64> {
        kappa(x, self)
    }
}

/// Which norm `||f||` stands for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormBackend {
    /// The Bergman norm over the complex ball, from monomial orthogonality.
    #[default]
    #[serde(rename = "complex")]
    ComplexExact,
    /// `(n!/pi^n/R^{2n}) * sum_k int |f_k|^2` over the real ball, the
    /// normalization used by the reference example.
    #[serde(rename = "appendix")]
    AppendixSlice,
}

pub(crate) fn euclidean(v: impl IntoIterator<Item = Scalar>) -> f64 {
    v.into_iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||x - omega|| / R`, required to be `< 1`.
pub fn nu(x: &[Scalar], ball: &BallContext) -> Result<f64> {
    if x.len() != ball.dim() {
        return Err(Error::DimensionMismatch {
            expected: ball.dim(),
            found: x.len(),
        });
    }
    let v = euclidean(x.iter().zip(&ball.omega).map(|(a, b)| a - b)) / ball.radius;
    if v >= 1.0 || v.is_nan() {
        return Err(Error::Domain(format!(
            "point lies outside the open ball (nu = {v})"
        )));
    }
    Ok(v)
}

/// `max(1, (n+1) / (R (1 - nu^2)))`.
pub fn kappa(x: &[Scalar], ball: &BallContext) -> Result<f64> {
    let v = nu(x, ball)?;
    let n = ball.dim() as f64;
    Ok(f64::max(1.0, (n + 1.0) / (ball.radius * (1.0 - v * v))))
}

/// `Gamma(m/2)` for a positive integer `m`.
fn gamma_half(m: usize) -> f64 {
    debug_assert!(m > 0);
    let mut g = if m.is_multiple_of(2) {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let mut k = 2 - m % 2;
    while k < m {
        g *= k as f64 / 2.0;
        k += 2;
    }
    g
}

/// `int_{|t| < R} t^gamma dt` over the real ball of dimension `n`; zero
/// unless every exponent is even.
fn real_ball_moment(gamma: &[u32], radius: f64) -> f64 {
    if gamma.iter().any(|g| g % 2 == 1) {
        return 0.0;
    }
    let n = gamma.len();
    let total: usize = gamma.iter().map(|&g| g as usize).sum::<usize>() + n;
    let num: f64 = gamma.iter().map(|&g| gamma_half(g as usize + 1)).product();
    2.0 * num / (gamma_half(total) * total as f64) * radius.powi(total as i32)
}

/// `||(z - omega)^alpha||^2 = n! alpha! / (n + |alpha|)! * R^{2|alpha|}` in the
/// normalized complex ball.
pub fn monomial_norm_sqr(alpha: &Exponent, radius: f64) -> f64 {
    let n = alpha.dim();
    let d = alpha.degree();
    factorial(n) * alpha.factorial() / factorial(n + d) * radius.powi(2 * d as i32)
}

fn complex_norm_sqr(f: &TruncatedSeries, ball: &BallContext) -> Result<f64> {
    let g = f.recenter(ball.omega(), f.order())?;
    Ok(g.terms()
        .map(|(a, c)| c.norm_sqr() * monomial_norm_sqr(a, ball.radius))
        .sum())
}

/// Unnormalized `int |f|^2` over the real slice of the ball, exactly, by
/// expanding `|f|^2` into monomials and using closed-form moments.
fn slice_integral(f: &TruncatedSeries, ball: &BallContext) -> Result<f64> {
    if ball.omega.iter().any(|z| z.im != 0.0) {
        return Err(Error::Domain(
            "the real-slice norm needs a real ball center".into(),
        ));
    }
    let g = f.recenter(ball.omega(), f.order())?;
    let terms: Vec<_> = g.terms().collect();
    let mut acc = Scalar::new(0.0, 0.0);
    for (a, ca) in &terms {
        for (b, cb) in &terms {
            let m = real_ball_moment(a.add(b).as_slice(), ball.radius);
            if m != 0.0 {
                acc += *ca * cb.conj() * m;
            }
        }
    }
    Ok(acc.re.max(0.0))
}

/// `||F||` over `ball` for a list of equations (sum of squared norms).
pub fn norm_on(
    equations: &[TruncatedSeries],
    ball: &BallContext,
    backend: NormBackend,
) -> Result<f64> {
    let n = ball.dim();
    let mut total = 0.0;
    for f in equations {
        if f.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.dim(),
            });
        }
        total += match backend {
            NormBackend::ComplexExact => complex_norm_sqr(f, ball)?,
            NormBackend::AppendixSlice => slice_integral(f, ball)?,
        };
    }
    if backend == NormBackend::AppendixSlice {
        let r = ball.radius;
        total *= factorial(n) / std::f64::consts::PI.powi(n as i32) / r.powi(2 * n as i32);
    }
    Ok(total.sqrt())
}

/// `||F||` in `A^2(omega, R)` of the system's own ball.
pub fn norm_a2(f: &AnalyticSystem, backend: NormBackend) -> Result<f64> {
    norm_on(f.equations(), f.ball(), backend)
}

/// `lambda(F, x) = ||F|| / (1 - nu^2)^{(n+1)/2}`.
pub fn lambda_bound(f: &AnalyticSystem, x: &[Scalar], backend: NormBackend) -> Result<f64> {
    derivative_bound(f, x, 0, backend)
}

/// `||F|| (n+1)...(n+k) / (R^k (1 - nu^2)^{(n+1)/2 + k})`, an upper bound on
/// the operator norm of `D^k F(x)`.
pub fn derivative_bound(
    f: &AnalyticSystem,
    x: &[Scalar],
    k: usize,
    backend: NormBackend,
) -> Result<f64> {
    let ball = f.ball();
    let v = nu(x, ball)?;
    let n = f.dim() as f64;
    let rising: f64 = (1..=k).map(|j| n + j as f64).product();
    let exponent = (n + 1.0) / 2.0 + k as f64;
    Ok(norm_a2(f, backend)? * rising / (ball.radius.powi(k as i32) * (1.0 - v * v).powf(exponent)))
}

/// Upper bound on `sup_{k>=2} (||D^k F(zeta)|| / k!)^{1/(k-1)}`:
/// `kappa * max(1, lambda * kappa)`.
pub fn gamma_bar_bound(f: &AnalyticSystem, zeta: &[Scalar], backend: NormBackend) -> Result<f64> {
    let k = kappa(zeta, f.ball())?;
    let l = lambda_bound(f, zeta, backend)?;
    Ok(k * f64::max(1.0, l * k))
}
