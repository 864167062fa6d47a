//! Bergman norms of a polynomial system with both backends, the ball
//! quantities `nu` and `kappa`, and the derivative bounds they give.
//!
//!     cargo run --example bergman_norms

use std::path::Path;

use deflation::bergman::{derivative_bound, monomial_norm_sqr, norm_a2, norm_on};
use deflation::cli::parse_system;
use deflation::{Exponent, NormBackend, Result};

fn main() -> Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/gy2.json");
    let p = parse_system(&path)?;
    let f = &p.polynomial;

    for (d, r) in [
        (&[0u32, 0][..], 1.0),
        (&[1, 0], 1.0),
        (&[2, 1], 1.0),
        (&[2, 1], 0.5),
    ] {
        let e = Exponent::new(d.to_vec());
        println!(
            "||z^{d:?}||^2 on the radius-{r} ball: {:.6e}",
            monomial_norm_sqr(&e, r)
        );
    }

    for backend in [NormBackend::ComplexExact, NormBackend::AppendixSlice] {
        let around_x0 = norm_on(f.equations(), &f.ball().centered_at(&p.point), backend)?;
        println!(
            "{backend:?}: ||F|| on B(0, 1) = {:.6}, on B(x0, 1) = {around_x0:.6}",
            norm_a2(f, backend)?
        );
    }

    let x = &p.point;
    println!(
        "nu(x0) = {:.6e}, kappa(x0) = {:.6}",
        f.ball().nu(x)?,
        f.ball().kappa(x)?
    );
    for k in 0..4 {
        println!(
            "bound on ||D^{k} F(x0)||: {:.6}",
            derivative_bound(f, x, k, NormBackend::ComplexExact)?
        );
    }
    Ok(())
}
