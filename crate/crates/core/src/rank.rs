//! Numerical rank without a user threshold.
//!
//! From the singular values `sigma` we form the elementary symmetric
//! functions `s_k` and the ratios `b_k = s_{n-k+1}/s_{n-k}`,
//! `g_k = s_{n-k-1}/s_{n-k}` (`g_n = 1`), `a_k = b_k g_k`. The first `m` with
//! `a_m < 1/9` certifies that exactly `m` singular values lie in `[0, eps]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::series::Scalar;

/// Decision threshold on `a_m`; the inequality is strict.
pub const A_THRESHOLD: f64 = 1.0 / 9.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    /// Nonincreasing singular values.
    pub sigma: Vec<f64>,
    /// `s_0 = 1, s_1, ..., s_n`.
    pub s: Vec<f64>,
    /// `b_k, g_k, a_k` for `k = 1..n`; `None` where `s_{n-k} = 0`.
    pub b: Vec<Option<f64>>,
    pub g: Vec<Option<f64>>,
    pub a: Vec<Option<f64>>,
    /// Number of singular values certified to be at most `epsilon`.
    pub m: Option<usize>,
    pub rank: usize,
    pub epsilon: f64,
    pub full_rank: bool,
}

impl RankReport {
    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// Smallest singular value.
    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }
}

/// Singular values in nonincreasing order; `min(rows, cols)` of them.
pub fn singular_values(m: &DMatrix<Scalar>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `s_0 = 1` and `s_k = sum_{i_1 < ... < i_k} sigma_{i_1} ... sigma_{i_k}`,
/// by multiplying in one factor `(1 + sigma_i t)` at a time.
pub fn elementary_symmetric(sigma: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; sigma.len() + 1];
    s[0] = 1.0;
    for (i, &x) in sigma.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            s[k] += x * s[k - 1];
        }
    }
    s
}

/// `(b, g, a)` indexed `k = 1..n` at positions `0..n`.
#[allow(clippy::type_complexity)]
pub fn rank_quantities(s: &[f64]) -> (Vec<Option<f64>>, Vec<Option<f64>>, Vec<Option<f64>>) {
    let n = s.len().saturating_sub(1);
    let mut b = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for k in 1..=n {
        let d = s[n - k];
        if d == 0.0 {
            b.push(None);
            g.push(None);
            a.push(None);
            continue;
        }
        let bk = s[n - k + 1] / d;
        let gk = if k < n { s[n - k - 1] / d } else { 1.0 };
        b.push(Some(bk));
        g.push(Some(gk));
        a.push(Some(bk * gk));
    }
    (b, g, a)
}

/// The certified radius `(3a + 1 - sqrt((3a+1)^2 - 16a)) / (4g)`.
pub fn epsilon_from(a: f64, g: f64) -> f64 {
    let t = 3.0 * a + 1.0;
    (t - (t * t - 16.0 * a).max(0.0).sqrt()) / (4.0 * g)
}

/// Rank decision from a list of singular values.
pub fn rank_from_sigma(mut sigma: Vec<f64>) -> RankReport {
    sigma.sort_by(|a, b| b.total_cmp(a));
    let n = sigma.len();
    let s = elementary_symmetric(&sigma);
    let (b, g, a) = rank_quantities(&s);
    let m = (0..n).find(|&i| matches!(a[i], Some(v) if v < A_THRESHOLD));
    let (rank, epsilon, full_rank, m) = match m {
        Some(i) => {
            let eps = epsilon_from(a[i].unwrap(), g[i].unwrap());
            (n - (i + 1), eps, false, Some(i + 1))
        }
        None => {
            // sigma_n > 1/(10 g_m) with m the first index where s_{n-m} != 0
            let eps = g
                .iter()
                .find_map(|x| *x)
                .map_or(0.0, |gm| 1.0 / (10.0 * gm));
            (n, eps, true, None)
        }
    };
    RankReport {
        sigma,
        s,
        b,
        g,
        a,
        m,
        rank,
        epsilon,
        full_rank,
    }
}

/// Rank of `m` decided by the `a_m < 1/9` test. Wide matrices are handled
/// through their transpose, which has the same singular values.
pub fn numerical_rank(m: &DMatrix<Scalar>) -> RankReport {
    rank_from_sigma(singular_values(m))
}
