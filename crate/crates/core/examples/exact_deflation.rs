//! The truncated deflation sequence evaluated exactly at the root, where
//! every series is a polynomial and the deflated system is linear.
//!
//!     cargo run --example exact_deflation

use std::path::Path;

use deflation::cli::parse_system;
use deflation::deflation::{truncated_deflation, DeflationOptions};
use deflation::{Exponent, Result};

fn main() -> Result<()> {
    let p = parse_system(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/gy2_exact.json"))?;
    let opts = DeflationOptions::new(p.file.norm_backend).gate(p.file.gate);
    let trace = truncated_deflation(&p.local, &p.point, 1, &opts)?;
    for (k, step) in trace.steps.iter().enumerate() {
        println!(
            "T_{k} ({:?}, truncated at order {}):",
            step.kind,
            step.system.order()
        );
        for e in step.system.equations() {
            let mut terms: Vec<_> = e.terms().filter(|(_, v)| v.norm() > 1e-14).collect();
            terms.sort_by_key(|(x, _)| (x.degree(), x.as_slice().to_vec()));
            let s: Vec<String> = terms
                .iter()
                .map(|(x, v)| format!("{:+}{}", v.re, monomial(x, &p.file.vars)))
                .collect();
            println!(
                "    {}",
                if s.is_empty() {
                    "0".into()
                } else {
                    s.join(" ")
                }
            );
        }
    }
    if let Some(d) = &trace.deflated {
        println!(
            "deflated system at the root: {:?}",
            d.evaluate(&p.point)
                .iter()
                .map(|z| z.re)
                .collect::<Vec<_>>()
        );
        println!(
            "its Jacobian there: {}",
            d.jacobian_at(&p.point).map(|z| z.re)
        );
    }
    Ok(())
}

fn monomial(e: &Exponent, vars: &[String]) -> String {
    e.as_slice()
        .iter()
        .zip(vars)
        .filter(|(&d, _)| d > 0)
        .map(|(&d, v)| {
            if d == 1 {
                format!("*{v}")
            } else {
                format!("*{v}^{d}")
            }
        })
        .collect()
}
