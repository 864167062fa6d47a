//! α- and γ-theory certificates for square systems, and the bounds that carry
//! them over to a deflated system.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bergman::{euclidean, gamma_bar_bound, kappa, lambda_bound, nu, NormBackend};
use crate::deflation::{deflation_sequence, DeflationOptions, DeflationTrace, StepKind};
use crate::error::{Error, Result};
use crate::matrix::checked_inverse;
use crate::rank::singular_values;
use crate::series::{Scalar, ZERO_RTOL};
use crate::system::AnalyticSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointQuantities {
    /// `||DF(x)^{-1} F(x)||`
    pub beta: f64,
    pub lambda: f64,
    pub kappa: f64,
    /// `||DF(x)^{-1}||` (spectral)
    pub mu: f64,
    /// `max(1, lambda kappa mu)`
    pub gamma: f64,
    /// `beta kappa`
    pub alpha: f64,
    pub nu: f64,
}

fn inverse_for_certificate(j: &DMatrix<Scalar>) -> Result<DMatrix<Scalar>> {
    if j.nrows() != j.ncols() {
        return Err(Error::CertificateUnavailable(format!(
            "the system is not square ({}x{})",
            j.nrows(),
            j.ncols()
        )));
    }
    checked_inverse(j).map_err(|e| Error::CertificateUnavailable(e.to_string()))
}

fn spectral_norm(m: &DMatrix<Scalar>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn point_quantities(
    f: &AnalyticSystem,
    x: &[Scalar],
    backend: NormBackend,
) -> Result<PointQuantities> {
    let j_inv = inverse_for_certificate(&f.jacobian_at(x))?;
    let step = &j_inv * f.evaluate(x);
    let beta = euclidean(step.iter().copied());
    let mu = spectral_norm(&j_inv);
    let k = kappa(x, f.ball())?;
    let lambda = lambda_bound(f, x, backend)?;
    Ok(PointQuantities {
        beta,
        lambda,
        kappa: k,
        mu,
        gamma: f64::max(1.0, lambda * k * mu),
        alpha: beta * k,
        nu: nu(x, f.ball())?,
    })
}

/// `2 gamma + 1 - sqrt((2 gamma + 1)^2 - 1)`
pub fn alpha_bound(gamma: f64) -> f64 {
    let t = 2.0 * gamma + 1.0;
    t - (t * t - 1.0).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub quantities: Option<PointQuantities>,
    pub alpha_bound: Option<f64>,
    pub alpha_ok: bool,
    /// Unique-root ball radii `theta_low <= theta < theta_high`.
    pub theta_low: Option<f64>,
    pub theta_high: Option<f64>,
    /// Whether `B(x0, theta_low)` lies inside the ambient ball.
    pub theta_in_ball: Option<bool>,
    pub gamma_radius: Option<f64>,
    pub thickness: Option<usize>,
    pub notes: Vec<String>,
}

impl CertificateReport {
    /// A report for a failed hypothesis, carrying only its note.
    pub fn failed(note: String) -> Self {
        CertificateReport {
            quantities: None,
            alpha_bound: None,
            alpha_ok: false,
            theta_low: None,
            theta_high: None,
            theta_in_ball: None,
            gamma_radius: None,
            thickness: None,
            notes: vec![note],
        }
    }
}

/// The α-theorem: if `alpha < 2 gamma + 1 - sqrt((2 gamma + 1)^2 - 1)` then
/// `F` has a unique root in `B(x0, theta)` for every `theta` in the window.
pub fn alpha_certificate(
    f: &AnalyticSystem,
    x0: &[Scalar],
    backend: NormBackend,
) -> Result<CertificateReport> {
    let q = point_quantities(f, x0, backend)?;
    let bound = alpha_bound(q.gamma);
    let alpha_ok = q.alpha < bound;
    let mut report = CertificateReport {
        alpha_bound: Some(bound),
        alpha_ok,
        ..CertificateReport::failed(String::new())
    };
    report.notes.clear();
    if alpha_ok {
        let (a, g, k) = (q.alpha, q.gamma, q.kappa);
        let disc = (a + 1.0).powi(2) - 4.0 * a * (g + 1.0);
        let low = (a + 1.0 - disc.max(0.0).sqrt()) / (2.0 * k * (g + 1.0));
        let high = 1.0 / (k * (g + 1.0));
        let ball = f.ball();
        let offset = euclidean(x0.iter().zip(ball.omega()).map(|(a, b)| a - b));
        report.theta_low = Some(low);
        report.theta_high = Some(high);
        report.theta_in_ball = Some(offset + low < ball.radius());
        if offset + low >= ball.radius() {
            report
                .notes
                .push("B(x0, theta) is not contained in the ambient ball".into());
        }
    } else {
        report.notes.push(format!(
            "alpha = {} is not below the bound {bound}",
            q.alpha
        ));
    }
    report.quantities = Some(q);
    Ok(report)
}

/// γ-theorem radius at a root `zeta`: Newton converges quadratically from
/// every `x` with `kappa ||x - zeta|| < (2 gamma + 1 - sqrt(4 gamma^2 + 3 gamma)) / (gamma + 1)`.
pub fn gamma_radius(f: &AnalyticSystem, zeta: &[Scalar], backend: NormBackend) -> Result<f64> {
    let q = point_quantities(f, zeta, backend)?;
    Ok(gamma_radius_from(q.gamma, q.kappa))
}

pub fn gamma_radius_from(gamma: f64, kappa: f64) -> f64 {
    (2.0 * gamma + 1.0 - (4.0 * gamma * gamma + 3.0 * gamma).sqrt()) / (kappa * (gamma + 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeflatedGammaBound {
    pub gamma0: f64,
    pub ell: usize,
    /// `ell + gamma0`
    pub gamma_ell: f64,
    pub radius: f64,
    pub p: usize,
    pub p0: usize,
    pub lambda0: f64,
    pub kappa: f64,
    pub mu_max: f64,
    /// `||A_k(zeta)^{-1}||` for each pivot block, the extracted square block last.
    pub mus: Vec<f64>,
}

/// `gamma0 = (2 p0/(p0+1)) lambda(f, zeta) kappa^{p0} mu`, `gamma_ell <= ell + gamma0`,
/// valid for `kappa R <= min(1/(p+1), w / (6 gamma_ell (4 kappa^p (gamma_ell + 1) + w)))`
/// with `w = (1 - nu^2)^{(n+1)/2}`.
pub fn deflated_gamma_bound(
    trace: &DeflationTrace,
    zeta: &[Scalar],
    backend: NormBackend,
) -> Result<DeflatedGammaBound> {
    if trace.deflated.is_none() {
        return Err(Error::CertificateUnavailable(
            "the trace has no deflated system".into(),
        ));
    }
    let mut mus = Vec::new();
    for step in &trace.steps {
        let j = step.system.jacobian_at(zeta);
        let (rows, cols): (Vec<usize>, Vec<usize>) = match step.kind {
            StepKind::Kerneling => (step.pivot_rows.clone(), step.pivot_cols.clone()),
            StepKind::Extraction => (step.extracted_rows.clone(), (0..j.ncols()).collect()),
            StepKind::Selection => continue,
        };
        let block = j.select_rows(rows.iter()).select_columns(cols.iter());
        mus.push(spectral_norm(&inverse_for_certificate(&block)?));
    }
    let input = &trace.input;
    let n = input.dim() as f64;
    let k = kappa(zeta, input.ball())?;
    let v = nu(zeta, input.ball())?;
    let lambda0 = lambda_bound(input, zeta, backend)?;
    let mu_max = mus.iter().copied().fold(0.0, f64::max);
    let p0 = trace.p0();
    let p = trace.p();
    let ell = trace.thickness;
    let gamma0 = 2.0 * p0 as f64 / (p0 as f64 + 1.0) * lambda0 * k.powi(p0 as i32) * mu_max;
    let gamma_ell = ell as f64 + gamma0;
    Ok(DeflatedGammaBound {
        gamma0,
        ell,
        gamma_ell,
        radius: deflated_radius(gamma_ell, k, p, v, n),
        p,
        p0,
        lambda0,
        kappa: k,
        mu_max,
        mus,
    })
}

/// Radius `R` of the ball around a root where the deflated γ bound holds.
pub fn deflated_radius(gamma_ell: f64, kappa: f64, p: usize, nu: f64, n: f64) -> f64 {
    let w = (1.0 - nu * nu).powf((n + 1.0) / 2.0);
    let u = f64::min(
        1.0 / (p as f64 + 1.0),
        w / (6.0 * gamma_ell * (4.0 * kappa.powi(p as i32) * (gamma_ell + 1.0) + w)),
    );
    u / kappa
}

/// Certificate for a singular root: every system of the deflation sequence
/// passes its gate with rank below `n`, and the deflated system satisfies the
/// α-theorem at `x0`. Failures are reported, not raised.
pub fn singular_alpha_certificate(
    f: &AnalyticSystem,
    x0: &[Scalar],
    opts: &DeflationOptions,
) -> Result<CertificateReport> {
    let trace = match deflation_sequence(f, x0, opts) {
        Ok(t) => t,
        Err(e) => return Ok(CertificateReport::failed(format!("deflation failed: {e}"))),
    };
    certify_trace(&trace, opts.backend)
}

/// The α-theorem part of [`singular_alpha_certificate`] on an existing trace.
pub fn certify_trace(trace: &DeflationTrace, backend: NormBackend) -> Result<CertificateReport> {
    if let Some((k, gate)) = trace.failed_gate() {
        let mut r = CertificateReport::failed(format!(
            "hypothesis 1.1 failed at k={k}: ||F_k(x0)|| = {} > eta = {}",
            gate.value_norm, gate.eta
        ));
        r.thickness = Some(k);
        return Ok(r);
    }
    let n = trace.input.dim();
    for (k, step) in trace.steps.iter().enumerate() {
        if step.kind == StepKind::Kerneling {
            let rank = step.rank_report.as_ref().map_or(0, |r| r.rank);
            if rank >= n {
                let mut r = CertificateReport::failed(format!(
                    "hypothesis 1.2 failed at k={k}: rank {rank} is not below {n}"
                ));
                r.thickness = Some(trace.thickness);
                return Ok(r);
            }
        }
    }
    let deflated = trace.deflated.as_ref().expect("no gate failed");
    let mut report = match alpha_certificate(deflated, &trace.x0, backend) {
        Ok(r) => r,
        Err(e) => CertificateReport::failed(format!("hypothesis 2 unavailable: {e}")),
    };
    report.thickness = Some(trace.thickness);
    if !report.alpha_ok && report.quantities.is_some() {
        report.notes.insert(0, "hypothesis 2 failed".into());
    }
    Ok(report)
}

/// Radius `epsilon / (2 gamma_bar)` of a ball around `zeta` in which the
/// ε-rank of `DF` equals the rank of `DF(zeta)`. Requires
/// `0 <= epsilon < min(2 - sqrt 2, sigma_r(zeta) / 2)`.
pub fn rank_stability_radius(
    f: &AnalyticSystem,
    zeta: &[Scalar],
    epsilon: f64,
    backend: NormBackend,
) -> Result<f64> {
    let sv = singular_values(&f.jacobian_at(zeta));
    let top = sv.first().copied().unwrap_or(0.0);
    let sigma_r = sv
        .iter()
        .copied()
        .rfind(|&s| s > ZERO_RTOL * top)
        .unwrap_or(0.0);
    let limit = f64::min(2.0 - std::f64::consts::SQRT_2, sigma_r / 2.0);
    if !(epsilon >= 0.0 && epsilon < limit) {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} must lie in [0, {limit})"
        )));
    }
    Ok(epsilon / (2.0 * gamma_bar_bound(f, zeta, backend)?))
}
