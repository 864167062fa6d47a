//! The full deflation sequence at a point near a multiplicity-6 root:
//! selection, kerneling and extraction, with every gate printed.
//!
//!     cargo run --example deflation_trace [-- path/to/system.json]

use std::path::PathBuf;

use deflation::cli::parse_system;
use deflation::deflation::{deflation_sequence, DeflationOptions};
use deflation::Result;

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/gy2.json"));
    let p = parse_system(&path)?;
    let opts = DeflationOptions::new(p.file.norm_backend).gate(p.file.gate);
    let trace = deflation_sequence(&p.local, &p.point, &opts)?;

    for (k, step) in trace.steps.iter().enumerate() {
        let g = &step.gate;
        println!(
            "F_{k}: {:?}, {} equations, ||F|| = {:.5}, eta = {:.5e}, ||F(x0)|| = {:.5e} ({})",
            step.kind,
            step.system.len(),
            g.norm,
            g.eta,
            g.value_norm,
            if g.passed { "small" } else { "not small" }
        );
        for (e, prov) in step
            .system
            .equations()
            .iter()
            .zip(&step.selection.provenance)
        {
            let lin: Vec<String> = (0..e.dim())
                .map(|v| format!("{:+.5}", e.gradient()[v].constant_term().re))
                .collect();
            // equations of F_k are numbered from 1 within the system they came from
            println!(
                "    d^{:?} f{}  value {:+.5e}  gradient [{}]",
                prov.derivative,
                prov.equation + 1,
                e.constant_term().re,
                lin.join(", ")
            );
        }
        if let Some(r) = &step.rank_report {
            println!(
                "    rank {} of {}; sigma {:?}",
                r.rank,
                step.system.dim(),
                r.sigma
            );
        }
        if !step.pivot_rows.is_empty() {
            println!(
                "    pivot rows {:?} cols {:?}",
                step.pivot_rows, step.pivot_cols
            );
        }
        if !step.extracted_rows.is_empty() {
            println!("    extracted rows {:?}", step.extracted_rows);
        }
    }
    println!("thickness {}, ranks {:?}", trace.thickness, trace.ranks());
    match &trace.deflated {
        Some(d) => println!("deflated square system of {} equations", d.len()),
        None => println!("no deflated system: a gate failed"),
    }
    Ok(())
}
