//! Certificates: the α-theorem for the deflated system, the γ-theorem radius
//! of a regular root, the deflated γ bound at a singular root, and the ball in
//! which the numerical rank of the Jacobian cannot change.
//!
//!     cargo run --example certificates

use std::path::Path;

use deflation::certificates::{
    certify_trace, deflated_gamma_bound, gamma_radius, rank_stability_radius,
};
use deflation::cli::parse_system;
use deflation::deflation::{deflation_sequence, DeflationOptions};
use deflation::Result;

fn main() -> Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");

    let p = parse_system(&dir.join("gy2.json"))?;
    let opts = DeflationOptions::new(p.file.norm_backend).gate(p.file.gate);
    let trace = deflation_sequence(&p.local, &p.point, &opts)?;
    let r = certify_trace(&trace, opts.backend)?;
    let q = r
        .quantities
        .as_ref()
        .expect("the deflated system is square");
    println!(
        "near the singular root at x0 = ({}, {})",
        p.point[0].re, p.point[1].re
    );
    println!(
        "  beta {:.5e} gamma {:.5} kappa {:.5} alpha {:.5e} vs bound {:.5e}: {}",
        q.beta,
        q.gamma,
        q.kappa,
        q.alpha,
        r.alpha_bound.unwrap_or(f64::NAN),
        if r.alpha_ok {
            "certified"
        } else {
            "not certified"
        }
    );
    if let (Some(lo), Some(hi)) = (r.theta_low, r.theta_high) {
        println!("  unique root in B(x0, theta) for {lo:.5e} <= theta < {hi:.5e}");
    }
    for n in &r.notes {
        println!("  note: {n}");
    }

    let exact = parse_system(&dir.join("gy2_exact.json"))?;
    let at_root = deflation_sequence(&exact.local, &exact.point, &opts)?;
    let b = deflated_gamma_bound(&at_root, &exact.point, opts.backend)?;
    println!(
        "at the root: gamma_0 = {:.4}, gamma_ell = {:.4} (ell = {}, p0 = {}, p = {}), valid for kappa R <= {:.4e}",
        b.gamma0, b.gamma_ell, b.ell, b.p0, b.p, b.radius
    );

    let lin = parse_system(&dir.join("linear.json"))?;
    println!(
        "regular root of the linear system: Newton converges from B(0, {:.6})",
        gamma_radius(&lin.polynomial, &lin.point, lin.file.norm_backend)?
    );
    for eps in [0.01, 0.1, 0.5] {
        match rank_stability_radius(&lin.polynomial, &lin.point, eps, lin.file.norm_backend) {
            Ok(r) => println!("  eps = {eps}: the eps-rank is constant on B(0, {r:.6})"),
            Err(e) => println!("  eps = {eps}: {e}"),
        }
    }
    Ok(())
}
