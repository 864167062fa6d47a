//! Seeded property checks shared by the proptest suites and the acceptance run.
//! Each check returns a description of the first violation.

use deflation::bergman::{derivative_bound, norm_on, BallContext, NormBackend};
use deflation::certificates::{gamma_radius, rank_stability_radius};
use deflation::deflation::{newton_point, pivot_selection};
use deflation::matrix::{schur_complement, SeriesMatrix};
use deflation::rank::{numerical_rank, singular_values};
use deflation::{AnalyticSystem, Exponent, Scalar, TruncatedSeries};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn zero() -> Scalar {
    Scalar::new(0.0, 0.0)
}

pub fn gaussian(r: &mut ChaCha8Rng) -> Scalar {
    Scalar::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn unitary(r: &mut ChaCha8Rng, n: usize) -> DMatrix<Scalar> {
    DMatrix::from_fn(n, n, |_, _| gaussian(r)).qr().q()
}

/// All exponents in `n` variables of total degree at most `max_degree`.
pub fn exponents(n: usize, max_degree: u32) -> Vec<Exponent> {
    let mut out = vec![Exponent::zero(n)];
    for v in 0..n {
        let prev = std::mem::take(&mut out);
        for e in prev {
            for k in 0..=max_degree {
                let mut x = e.as_slice().to_vec();
                x[v] = k;
                if x.iter().sum::<u32>() <= max_degree {
                    out.push(Exponent::new(x));
                }
            }
        }
    }
    out
}

/// Dense random polynomial of degree `degree` in the variables shifted by `center`.
pub fn random_series(r: &mut ChaCha8Rng, center: &[Scalar], degree: u32) -> TruncatedSeries {
    let terms = exponents(center.len(), degree)
        .into_iter()
        .map(|e| (e, gaussian(r)));
    TruncatedSeries::from_terms(center.to_vec(), degree as usize, terms).unwrap()
}

/// Uniform in the complex ball of the given radius around the origin.
pub fn random_point(r: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<Scalar> {
    let v: Vec<Scalar> = (0..n).map(|_| gaussian(r)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let t: f64 = r.gen::<f64>().powf(1.0 / (2 * n) as f64);
    v.into_iter().map(|z| z * (radius * t / norm)).collect()
}

fn shifted(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn dist(a: &[Scalar], b: &[Scalar]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `sigma_r > eps >= sigma_{r+1}` on a matrix with `r` singular values in
/// `[1, 1.5)` and the rest in `[1e-9, 1.2e-9)`; the gap also forces rank `r`.
pub fn gapped_rank(seed: u64) -> Check {
    let mut g = rng(seed);
    let n = g.gen_range(1..6);
    let rows = n + g.gen_range(0..3);
    let rank = g.gen_range(0..=n);
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            if i < rank {
                g.gen_range(1.0..1.5)
            } else {
                g.gen_range(1e-9..1.2e-9)
            }
        })
        .collect();
    let u = unitary(&mut g, rows);
    let v = unitary(&mut g, n);
    let mut d = DMatrix::zeros(rows, n);
    for (i, s) in sigma.iter().enumerate() {
        d[(i, i)] = Scalar::new(*s, 0.0);
    }
    let rep = numerical_rank(&(u * d * v.adjoint()));
    let s = &rep.sigma;
    let ok = if rep.full_rank {
        s[n - 1] > rep.epsilon
    } else {
        rep.epsilon >= s[rep.rank] && (rep.rank == 0 || s[rep.rank - 1] > rep.epsilon)
    };
    if !ok || rep.rank != rank {
        return Err(format!(
            "seed {seed}: rank {} (want {rank}), eps {}, sigma {s:?}",
            rep.rank, rep.epsilon
        ));
    }
    Ok(())
}

/// Frobenius norms of the exact first and second derivative tensors of a
/// random cubic system stay below the Bergman bound.
pub fn derivative_bound_dominates(seed: u64) -> Check {
    let mut g = rng(seed);
    let n = g.gen_range(1..4);
    let s = g.gen_range(1..4);
    let radius = g.gen_range(0.5..2.0);
    let omega = random_point(&mut g, n, 0.5);
    let eqs = (0..s).map(|_| random_series(&mut g, &omega, 3)).collect();
    let f = AnalyticSystem::new(eqs, BallContext::new(omega.clone(), radius).unwrap()).unwrap();
    let x = shifted(&omega, &random_point(&mut g, n, 0.8 * radius));

    let d1 = f
        .jacobian_at(&x)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let mut d2 = 0.0;
    for e in f.equations() {
        for i in 0..n {
            for j in 0..n {
                d2 += e.derivative(i).derivative(j).evaluate(&x).norm_sqr();
            }
        }
    }
    let d2 = f64::sqrt(d2);
    for (k, exact) in [(1, d1), (2, d2)] {
        let bound = derivative_bound(&f, &x, k, NormBackend::ComplexExact).unwrap();
        if exact > bound {
            return Err(format!("seed {seed}, k={k}: {exact} > {bound}"));
        }
    }
    Ok(())
}

/// The closed-form complex norm against a Monte Carlo mean over the ball.
pub fn complex_norm_vs_monte_carlo(seed: u64, samples: usize) -> Check {
    let mut g = rng(seed);
    let n = g.gen_range(1..3);
    let radius = g.gen_range(0.5..1.5);
    let omega = random_point(&mut g, n, 0.3);
    let degree = g.gen_range(1..4);
    let f = random_series(&mut g, &omega, degree);
    let ball = BallContext::new(omega.clone(), radius).unwrap();
    let exact = norm_on(std::slice::from_ref(&f), &ball, NormBackend::ComplexExact).unwrap();
    let mut acc = 0.0;
    for _ in 0..samples {
        acc += f
            .evaluate(&shifted(&omega, &random_point(&mut g, n, radius)))
            .norm_sqr();
    }
    let mc = (acc / samples as f64).sqrt();
    if (mc - exact).abs() > 1e-2 * exact {
        return Err(format!("seed {seed}: monte carlo {mc} vs exact {exact}"));
    }
    Ok(())
}

/// The Schur complement of a rank-`r` matrix on its `r x r` pivot block is zero.
pub fn schur_of_exact_rank(seed: u64) -> Check {
    let mut g = rng(seed);
    let rows = g.gen_range(2..6);
    let cols = g.gen_range(2..6);
    let r = g.gen_range(1..=rows.min(cols));
    let b = DMatrix::from_fn(rows, r, |_, _| Scalar::new(g.gen_range(-1.0..1.0), 0.0));
    let c = DMatrix::from_fn(r, cols, |_, _| Scalar::new(g.gen_range(-1.0..1.0), 0.0));
    let m = &b * &c;
    let (pr, pc) = pivot_selection(&m, r).map_err(|e| format!("seed {seed}: {e}"))?;
    let sm = SeriesMatrix::from_constant(&m, vec![zero()], 0);
    let schur = schur_complement(&sm, &pr, &pc, 0).map_err(|e| format!("seed {seed}: {e}"))?;
    let worst = schur
        .entries()
        .iter()
        .map(|e| e.constant_term().norm())
        .fold(0.0, f64::max);
    if worst > 1e-12 * m.norm().max(1.0) {
        return Err(format!("seed {seed}: Schur entry {worst}"));
    }
    Ok(())
}

/// Linear part `a` plus random quadratic terms of size `scale` around `zeta`,
/// which is therefore a root.
pub fn system_with_root(
    g: &mut ChaCha8Rng,
    a: &DMatrix<Scalar>,
    zeta: &[Scalar],
    scale: f64,
) -> AnalyticSystem {
    let n = zeta.len();
    let eqs = (0..a.nrows())
        .map(|i| {
            let mut terms: Vec<(Exponent, Scalar)> =
                (0..n).map(|j| (Exponent::unit(n, j), a[(i, j)])).collect();
            for e in exponents(n, 2).into_iter().filter(|e| e.degree() == 2) {
                terms.push((e, gaussian(g) * scale));
            }
            TruncatedSeries::from_terms(zeta.to_vec(), 2, terms).unwrap()
        })
        .collect();
    AnalyticSystem::new(eqs, BallContext::new(vec![zero(); n], 1.0).unwrap()).unwrap()
}

/// Inside `B(zeta, eps / (2 gamma_bar))` exactly `rank DF(zeta)` singular
/// values of `DF` exceed `eps`.
pub fn rank_stability(seed: u64, points: usize) -> Check {
    let mut g = rng(seed);
    let n = g.gen_range(2..5);
    let r = g.gen_range(1..n);
    let u = unitary(&mut g, n);
    let v = unitary(&mut g, n);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..r {
        d[(i, i)] = Scalar::new(g.gen_range(0.5..1.0), 0.0);
    }
    let zeta = random_point(&mut g, n, 0.3);
    let f = system_with_root(&mut g, &(u * d * v.adjoint()), &zeta, 0.3);
    let sv = singular_values(&f.jacobian_at(&zeta));
    let eps = 0.5 * f64::min(2.0 - 2f64.sqrt(), sv[r - 1] / 2.0);
    let radius = rank_stability_radius(&f, &zeta, eps, NormBackend::ComplexExact)
        .map_err(|e| e.to_string())?;
    for _ in 0..points {
        let x = shifted(&zeta, &random_point(&mut g, n, radius));
        let s = singular_values(&f.jacobian_at(&x));
        if s.iter().filter(|&&v| v > eps).count() != r {
            return Err(format!("seed {seed}: sigma {s:?} with eps {eps}, rank {r}"));
        }
    }
    Ok(())
}

/// From points within the γ-theorem radius, Newton errors stay below
/// `(1/2)^{2^k - 1} e_0` (or the 1e-14 floor).
pub fn gamma_envelope(seed: u64, starts: usize) -> Check {
    let mut g = rng(seed);
    let n = g.gen_range(1..4);
    let a = DMatrix::from_fn(n, n, |_, _| gaussian(&mut g))
        + DMatrix::identity(n, n) * Scalar::new(3.0, 0.0);
    let zeta = random_point(&mut g, n, 0.3);
    let f = system_with_root(&mut g, &a, &zeta, 1.0);
    let radius = gamma_radius(&f, &zeta, NormBackend::ComplexExact).map_err(|e| e.to_string())?;
    for _ in 0..starts {
        let mut x = shifted(&zeta, &random_point(&mut g, n, radius));
        let e0 = dist(&x, &zeta);
        for k in 1..6 {
            x = newton_point(&f, &x).map_err(|e| e.to_string())?;
            let e = dist(&x, &zeta);
            let envelope = 0.5f64.powi((1 << k) - 1) * e0;
            if e > envelope.max(1e-14) {
                return Err(format!("seed {seed}, step {k}: {e} > {envelope}"));
            }
        }
    }
    Ok(())
}
