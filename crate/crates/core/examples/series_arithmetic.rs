//! Truncated multivariate series: products, derivatives, re-expansion and
//! series inverses, plus the Schur complement of a matrix of series.
//!
//!     cargo run --example series_arithmetic

use deflation::matrix::schur_complement;
use deflation::{Exponent, Result, Scalar, SeriesMatrix, TruncatedSeries};

fn c(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

fn show(name: &str, f: &TruncatedSeries) {
    let mut terms: Vec<_> = f.terms().filter(|(_, v)| v.norm() > 1e-15).collect();
    terms.sort_by_key(|(e, _)| (e.degree(), e.as_slice().to_vec()));
    let body: Vec<String> = terms
        .iter()
        .map(|(e, v)| format!("{:+.6}*{:?}", v.re, e.as_slice()))
        .collect();
    let at: Vec<f64> = f.center().iter().map(|z| z.re).collect();
    println!(
        "{name} (order {}, at {at:?}): {}",
        f.order(),
        body.join(" ")
    );
}

fn main() -> Result<()> {
    let o = vec![c(0.0), c(0.0)];
    let e = |a: u32, b: u32| Exponent::new(vec![a, b]);
    // 1 + x + y and x - y, kept to order 3
    let p = TruncatedSeries::from_terms(
        o.clone(),
        3,
        [(e(0, 0), c(1.0)), (e(1, 0), c(1.0)), (e(0, 1), c(1.0))],
    )?;
    let q = TruncatedSeries::from_terms(o.clone(), 3, [(e(1, 0), c(1.0)), (e(0, 1), c(-1.0))])?;
    show("p", &p);
    show("q", &q);
    show("p*q", &p.checked_mul(&q)?);
    show("d/dx (p*q)", &p.checked_mul(&q)?.derivative(0));

    let inv = p.reciprocal(3)?;
    show("1/p", &inv);
    show("p * (1/p)", &p.checked_mul(&inv)?);

    let x = vec![c(0.1), c(-0.2)];
    let moved = p.checked_mul(&q)?.recenter(&x, 3)?;
    show("p*q re-expanded", &moved);
    println!(
        "value at (0.15, -0.1): original {:.12} re-expanded {:.12}",
        p.checked_mul(&q)?.evaluate(&[c(0.15), c(-0.1)]).re,
        moved.evaluate(&[c(0.15), c(-0.1)]).re
    );

    // [[p, q], [q, p]]: the Schur complement of the (0,0) entry is p - q^2/p
    let m = SeriesMatrix::new(2, 2, o, 3, vec![p.clone(), q.clone(), q.clone(), p.clone()])?;
    let s = schur_complement(&m, &[0], &[0], 3)?;
    show("schur", s.get(0, 0));
    let direct = p.checked_sub(&q.checked_mul(&q)?.checked_mul(&inv)?)?;
    show("p - q^2/p", &direct);
    Ok(())
}
