//! Threshold-free numerical rank of the Jacobians met along the worked
//! deflation, with the symmetric-function ratios that decide it.
//!
//!     cargo run --example numerical_rank

use deflation::rank::{numerical_rank, rank_from_sigma, A_THRESHOLD};
use deflation::Scalar;
use nalgebra::DMatrix;

fn report(name: &str, r: &deflation::rank::RankReport) {
    println!("{name}: sigma {:?}", r.sigma);
    for (k, a) in r.a.iter().enumerate() {
        let a = a.map_or("undefined".into(), |v| format!("{v:.6e}"));
        println!("  a_{} = {a}", k + 1);
    }
    println!(
        "  rank {} (full: {}), eps {:.6e}, threshold 1/9 = {A_THRESHOLD:.6}",
        r.rank, r.full_rank, r.epsilon
    );
}

fn main() {
    let m = |rows, cols, v: &[f64]| {
        DMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| Scalar::new(x, 0.0)))
    };
    report(
        "DF0",
        &numerical_rank(&m(
            4,
            2,
            &[
                2.0012, 1.9990, 2.0012, 1.9978, 1.9990, 2.0012, 1.9978, 2.0010,
            ],
        )),
    );
    report(
        "DF1",
        &numerical_rank(&m(
            4,
            2,
            &[0.0, -2.0, 2.0012, 1.9990, -3.9956, 3.9956, -5.9944, 3.9922],
        )),
    );
    // the gap must be wide enough: here no ratio drops below 1/9
    report("spread spectrum", &rank_from_sigma(vec![1.0, 0.3, 0.05]));
    report("clear gap", &rank_from_sigma(vec![1.0, 0.9, 1e-6]));
}
