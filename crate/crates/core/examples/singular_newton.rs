//! Newton's method through deflation: every step re-expands the polynomial
//! at the current iterate, deflates and takes a classical Newton step on the
//! square system. Convergence to the singular root stays quadratic.
//!
//!     cargo run --example singular_newton

use std::path::Path;

use deflation::cli::parse_system;
use deflation::deflation::{newton_iterate, DeflationOptions};
use deflation::Result;

fn main() -> Result<()> {
    let p = parse_system(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/gy2.json"))?;
    let opts = DeflationOptions::new(p.file.norm_backend).gate(p.file.gate);
    let traj = newton_iterate(&p.polynomial, &p.point, 6, p.order, &opts)?;
    let mut prev: Option<f64> = None;
    for (k, x) in traj.iter().enumerate() {
        // the root is the origin
        let err = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let ratio = match prev {
            Some(e) if err > 1e-15 => format!("  e_k/e_(k-1)^2 = {:.3}", err / (e * e)),
            Some(_) => "  (rounding level)".into(),
            None => String::new(),
        };
        println!(
            "x{k} = ({:+.6e}, {:+.6e})  |x - 0| = {err:.3e}{ratio}",
            x[0].re, x[1].re
        );
        prev = Some(err);
    }
    Ok(())
}
