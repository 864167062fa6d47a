#![allow(dead_code)]

pub mod suites;

use deflation::deflation::{DeflationOptions, GateNorm, Selection};
use deflation::{AnalyticSystem, BallContext, Exponent, NormBackend, Scalar, TruncatedSeries};
use nalgebra::DMatrix;

pub fn c(re: f64) -> Scalar {
    Scalar::new(re, 0.0)
}

pub fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * b.abs()
}

pub fn origin() -> Vec<Scalar> {
    vec![c(0.0), c(0.0)]
}

pub fn x0() -> Vec<Scalar> {
    vec![c(-0.0005), c(0.0006)]
}

pub fn terms(t: &[(&[u32], f64)]) -> Vec<(Exponent, Scalar)> {
    t.iter()
        .map(|(e, v)| (Exponent::new(e.to_vec()), c(*v)))
        .collect()
}

/// `f1 = x^3/3 + y^2 x + x^2 + 2xy + y^2`, `f2 = x^2 y - y^2 x + x^2 + 2xy + y^2`
/// expanded around `center` at `order`, in the unit ball around the origin.
pub fn gy2_at(center: &[Scalar], order: usize) -> AnalyticSystem {
    let f1 = terms(&[
        (&[3, 0], 1.0 / 3.0),
        (&[1, 2], 1.0),
        (&[2, 0], 1.0),
        (&[1, 1], 2.0),
        (&[0, 2], 1.0),
    ]);
    let f2 = terms(&[
        (&[2, 1], 1.0),
        (&[1, 2], -1.0),
        (&[2, 0], 1.0),
        (&[1, 1], 2.0),
        (&[0, 2], 1.0),
    ]);
    let eqs = [f1, f2]
        .into_iter()
        .map(|t| TruncatedSeries::polynomial(center.to_vec(), order, t).unwrap())
        .collect();
    AnalyticSystem::new(eqs, BallContext::new(origin(), 1.0).unwrap()).unwrap()
}

/// The polynomial itself, expanded around the origin at full degree.
pub fn gy2() -> AnalyticSystem {
    gy2_at(&origin(), 3)
}

pub fn coeffs(f: &TruncatedSeries) -> [f64; 3] {
    let d = f.dim();
    [
        f.constant_term().re,
        f.coeff(&Exponent::unit(d, 0)).re,
        f.coeff(&Exponent::unit(d, 1)).re,
    ]
}

/// Options reproducing the worked example: real-slice norms, gate on the
/// leading `n` components.
pub fn worked_options() -> DeflationOptions {
    DeflationOptions::new(NormBackend::AppendixSlice).gate(GateNorm::Leading)
}

/// Index of the retained equation with the given provenance.
pub fn row_of(sel: &Selection, equation: usize, derivative: &[u32]) -> usize {
    sel.provenance
        .iter()
        .position(|p| p.equation == equation && p.derivative == derivative)
        .expect("provenance present")
}

/// `coeffs` of each expected row matches some row of `f`, rows used once.
pub fn rows_match(f: &AnalyticSystem, expected: &[[f64; 3]], rtol: f64) -> bool {
    if f.len() != expected.len() {
        return false;
    }
    let got: Vec<[f64; 3]> = f.equations().iter().map(coeffs).collect();
    let mut used = vec![false; got.len()];
    expected.iter().all(|e| {
        let hit = got.iter().enumerate().position(|(i, g)| {
            !used[i]
                && g.iter()
                    .zip(e)
                    .all(|(a, b)| (a - b).abs() <= rtol * b.abs().max(1e-300))
        });
        hit.map(|i| used[i] = true).is_some()
    })
}

pub fn df(f: &AnalyticSystem) -> DMatrix<Scalar> {
    f.jacobian_at(f.center())
}

pub fn real_matrix(rows: usize, cols: usize, v: &[f64]) -> DMatrix<Scalar> {
    DMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| c(x)))
}
