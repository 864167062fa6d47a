//! Deflation sequences and the singular Newton operator.
//!
//! Starting from `F_0 = S(f)` the sequence alternates the selection operator
//! `S` and the kerneling operator `K` (`F_{k+1} = S(K(F_k))`) until the
//! Jacobian at `x0` has full numerical rank. The number of kerneling rounds is
//! the thickness; a square subsystem of the last system is the deflated system.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bergman::{euclidean, norm_on, BallContext, NormBackend};
use crate::error::{Error, Result};
use crate::matrix::{checked_inverse, schur_complement};
use crate::rank::{numerical_rank, RankReport};
use crate::series::{Scalar, TruncatedSeries};
use crate::system::AnalyticSystem;

/// First positive root of `(1 - 4u + 2u^2)^2 - 2u`.
pub const ALPHA0: f64 = 0.130_716_944_352_002_08;
/// `sum_{k>=0} (1/2)^{2^k - 1}`.
pub const C0: f64 = 1.632_843_018_043_786_3;

/// Two pivots closer than this relative gap count as tied; the earlier one wins.
const PIVOT_TIE_RTOL: f64 = 1e-10;

/// `2 alpha0 / ((n+1)(n+2)(R + ||f||) R^{n-2})`.
pub fn eta_threshold(norm_f: f64, n: usize, radius: f64) -> f64 {
    let n = n as f64;
    2.0 * ALPHA0 / ((n + 1.0) * (n + 2.0) * (radius + norm_f) * radius.powf(n - 2.0))
}

/// Outcome of `||f(x0)|| <= eta(||f||)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessGate {
    pub alpha0: f64,
    pub c0: f64,
    pub norm: f64,
    pub eta: f64,
    pub value_norm: f64,
    pub passed: bool,
}

/// Which components of `F(x0)` enter the system gate `||F(x0)|| <= eta`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateNorm {
    /// All components.
    #[default]
    Full,
    /// The first `n` components only, as the reference example measures.
    Leading,
}

/// Knobs shared by every deflation entry point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeflationOptions {
    pub backend: NormBackend,
    pub gate: GateNorm,
    /// Cap on kerneling rounds.
    pub max_iters: usize,
}

impl DeflationOptions {
    pub fn new(backend: NormBackend) -> Self {
        DeflationOptions {
            backend,
            gate: GateNorm::Full,
            max_iters: 64,
        }
    }

    pub fn gate(mut self, gate: GateNorm) -> Self {
        self.gate = gate;
        self
    }

    pub fn max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

/// Smallness test of `equations` at `x0`. The norm is taken over the ball of
/// the same radius centered at `x0`; every component of `f(x0)` counts.
pub fn is_small(
    equations: &[TruncatedSeries],
    x0: &[Scalar],
    ball: &BallContext,
    backend: NormBackend,
) -> Result<SmallnessGate> {
    gate_with(equations, x0, ball, backend, GateNorm::Full)
}

fn gate_with(
    equations: &[TruncatedSeries],
    x0: &[Scalar],
    ball: &BallContext,
    backend: NormBackend,
    mode: GateNorm,
) -> Result<SmallnessGate> {
    let local = ball.centered_at(x0);
    let norm = norm_on(equations, &local, backend)?;
    let eta = eta_threshold(norm, ball.dim(), ball.radius());
    let counted = match mode {
        GateNorm::Full => equations.len(),
        GateNorm::Leading => equations.len().min(ball.dim()),
    };
    let value_norm = euclidean(equations[..counted].iter().map(|e| e.evaluate(x0)));
    Ok(SmallnessGate {
        alpha0: ALPHA0,
        c0: C0,
        norm,
        eta,
        value_norm,
        passed: value_norm <= eta,
    })
}

/// Where a selected equation comes from: `d^alpha F[equation]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub equation: usize,
    pub derivative: Vec<u32>,
}

impl Provenance {
    /// Numerical valuation of the source equation seen through this derivative.
    pub fn valuation(&self) -> usize {
        self.derivative.iter().map(|&d| d as usize).sum::<usize>() + 1
    }
}

/// One gate evaluation made while selecting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionEvent {
    pub equation: usize,
    pub derivative: Vec<u32>,
    pub value_norm: f64,
    pub eta: f64,
    pub passed: bool,
    /// Index in the output of the function retained because this gate failed.
    pub retained: Option<usize>,
    pub duplicate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub system: AnalyticSystem,
    pub provenance: Vec<Provenance>,
    pub events: Vec<SelectionEvent>,
}

impl Selection {
    /// Largest valuation among the retained functions.
    pub fn max_valuation(&self) -> usize {
        self.provenance
            .iter()
            .map(Provenance::valuation)
            .max()
            .unwrap_or(1)
    }
}

struct Selector<'a> {
    x0: &'a [Scalar],
    ball: &'a BallContext,
    backend: NormBackend,
    retained: Vec<TruncatedSeries>,
    provenance: Vec<Provenance>,
    events: Vec<SelectionEvent>,
}

impl Selector<'_> {
    fn retain(&mut self, f: &TruncatedSeries, prov: &Provenance) -> (usize, bool) {
        if let Some(i) = self.retained.iter().position(|g| g.approx_eq(f)) {
            return (i, true);
        }
        self.retained.push(f.clone());
        self.provenance.push(prov.clone());
        (self.retained.len() - 1, false)
    }

    fn visit(
        &mut self,
        g: &TruncatedSeries,
        prov: &Provenance,
        pending: (&TruncatedSeries, &Provenance),
    ) -> Result<()> {
        let gate = is_small(std::slice::from_ref(g), self.x0, self.ball, self.backend)?;
        let event = self.events.len();
        self.events.push(SelectionEvent {
            equation: prov.equation,
            derivative: prov.derivative.clone(),
            value_norm: gate.value_norm,
            eta: gate.eta,
            passed: gate.passed,
            retained: None,
            duplicate: false,
        });
        if !gate.passed {
            let (i, dup) = self.retain(pending.0, pending.1);
            self.events[event].retained = Some(i);
            self.events[event].duplicate = dup;
            return Ok(());
        }
        let scale = g.max_abs_coeff();
        let children: Vec<(usize, TruncatedSeries)> = g
            .gradient()
            .into_iter()
            .enumerate()
            .filter(|(_, d)| !d.is_negligible(scale))
            .collect();
        // a small function with no nonzero derivative retains nothing
        for (var, child) in children {
            let mut derivative = prov.derivative.clone();
            derivative[var] += 1;
            let child_prov = Provenance {
                equation: prov.equation,
                derivative,
            };
            self.visit(&child, &child_prov, (g, prov))?;
        }
        Ok(())
    }
}

/// The selection operator. Each equation small at `x0` is replaced by its
/// derivatives down to the first order where some derivative is not small.
/// A function is retained once one of its (nonzero) partial derivatives
/// fails the gate; an equation failing the gate outright is kept as is.
/// An equation all of whose branches end in small functions without
/// nonzero derivatives has no valuation within the truncation order.
pub fn select(f: &AnalyticSystem, backend: NormBackend) -> Result<Selection> {
    let x0 = f.center().to_vec();
    let mut sel = Selector {
        x0: &x0,
        ball: f.ball(),
        backend,
        retained: Vec::new(),
        provenance: Vec::new(),
        events: Vec::new(),
    };
    let scale = f.max_abs_coeff();
    for (i, eq) in f.equations().iter().enumerate() {
        if eq.is_negligible(scale) {
            continue;
        }
        let prov = Provenance {
            equation: i,
            derivative: vec![0; f.dim()],
        };
        let before = sel.events.iter().filter(|e| e.retained.is_some()).count();
        sel.visit(eq, &prov, (eq, &prov))?;
        if sel.events.iter().filter(|e| e.retained.is_some()).count() == before {
            return Err(Error::TruncationExhausted { equation: i });
        }
    }
    if sel.retained.is_empty() {
        return Err(Error::RankDeficiency(
            "every equation vanishes identically near x0; the root is not isolated".into(),
        ));
    }
    Ok(Selection {
        system: f.with_equations(sel.retained)?,
        provenance: sel.provenance,
        events: sel.events,
    })
}

/// `r` pivot positions of `j0` by Gaussian elimination with complete
/// pivoting. Entries are scanned column by column and a later entry only
/// displaces the incumbent when it is larger by a relative `1e-10`.
pub fn pivot_selection(j0: &DMatrix<Scalar>, r: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let (rows, cols) = j0.shape();
    if r == 0 || r > rows.min(cols) {
        return Err(Error::Domain(format!(
            "cannot choose {r} pivots in a {rows}x{cols} matrix"
        )));
    }
    let scale = j0.norm();
    let mut a = j0.clone();
    let mut free_rows: Vec<usize> = (0..rows).collect();
    let mut free_cols: Vec<usize> = (0..cols).collect();
    let mut pr = Vec::with_capacity(r);
    let mut pc = Vec::with_capacity(r);
    for _ in 0..r {
        let mut best: Option<(usize, usize, f64)> = None;
        for &j in &free_cols {
            for &i in &free_rows {
                let v = a[(i, j)].norm();
                if best.is_none_or(|(_, _, b)| v > b * (1.0 + PIVOT_TIE_RTOL)) {
                    best = Some((i, j, v));
                }
            }
        }
        let (pi, pj, pv) = best.expect("free rows and columns remain");
        // negated so that NaN is rejected
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(pv >= 1e-12 * scale) || pv == 0.0 {
            return Err(Error::RankDeficiency(format!(
                "pivot {pv:e} is negligible against |J| = {scale:e}"
            )));
        }
        let p = a[(pi, pj)];
        free_rows.retain(|&i| i != pi);
        free_cols.retain(|&j| j != pj);
        for &i in &free_rows {
            let factor = a[(i, pj)] / p;
            for &j in &free_cols {
                let delta = factor * a[(pi, j)];
                a[(i, j)] -= delta;
            }
        }
        pr.push(pi);
        pc.push(pj);
    }
    Ok((pr, pc))
}

/// The kerneling operator: the pivot equations followed by the entries of
/// the Schur complement of the Jacobian, row-major over the non-pivot rows
/// and columns, everything truncated at `order`.
pub fn kernel_op(
    f: &AnalyticSystem,
    pivot_rows: &[usize],
    pivot_cols: &[usize],
    order: usize,
) -> Result<AnalyticSystem> {
    let r = pivot_rows.len();
    if r == 0 || r >= f.dim() {
        return Err(Error::Domain(format!(
            "kerneling needs 1 <= r < n, got r = {r}, n = {}",
            f.dim()
        )));
    }
    let jac = f.jacobian();
    let order = order.min(jac.order());
    let schur = schur_complement(&jac, pivot_rows, pivot_cols, order)?;
    let mut equations: Vec<TruncatedSeries> = pivot_rows
        .iter()
        .map(|&i| f.equations()[i].truncate(order))
        .collect();
    equations.extend(schur.into_entries());
    f.with_equations(equations)
}

/// Rows of `f` whose Jacobian rows at the center raise the numerical rank,
/// taken greedily in order until `n` are found.
pub fn extract_rows(f: &AnalyticSystem) -> Result<Vec<usize>> {
    let n = f.dim();
    let j = f.jacobian_at(f.center());
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for i in 0..f.len() {
        if chosen.len() == n {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(i);
        let sub = j.select_rows(trial.iter());
        if numerical_rank(&sub).rank == trial.len() {
            chosen = trial;
        }
    }
    if chosen.len() < n {
        return Err(Error::Extraction {
            n,
            found: chosen.len(),
        });
    }
    Ok(chosen)
}

/// A square subsystem of full numerical rank.
pub fn extract_square(f: &AnalyticSystem) -> Result<AnalyticSystem> {
    let rows = extract_rows(f)?;
    f.with_equations(rows.iter().map(|&i| f.equations()[i].clone()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    /// The selected system failed its gate; the trace stops here.
    Selection,
    Kerneling,
    Extraction,
}

/// One system `F_k` of the sequence and what was done with it.
#[derive(Clone, Debug, PartialEq)]
pub struct DeflationStep {
    pub kind: StepKind,
    /// `F_k`, output of the selection operator.
    pub system: AnalyticSystem,
    pub selection: Selection,
    pub gate: SmallnessGate,
    pub rank_report: Option<RankReport>,
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
    /// `||A(x0)^{-1}||` for the pivot block.
    pub pivot_mu: Option<f64>,
    pub extracted_rows: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeflationTrace {
    pub x0: Vec<Scalar>,
    /// The system the sequence started from, expanded at `x0`.
    pub input: AnalyticSystem,
    pub steps: Vec<DeflationStep>,
    /// Number of kerneling rounds.
    pub thickness: usize,
    pub deflated: Option<AnalyticSystem>,
}

impl DeflationTrace {
    pub fn ranks(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter_map(|s| s.rank_report.as_ref().map(|r| r.rank))
            .collect()
    }

    /// Valuation bound of the first selection.
    pub fn p0(&self) -> usize {
        self.steps
            .first()
            .map_or(1, |s| s.selection.max_valuation())
    }

    /// Valuation bound of the later selections, `p0` when there are none.
    pub fn p(&self) -> usize {
        self.steps
            .iter()
            .skip(1)
            .map(|s| s.selection.max_valuation())
            .max()
            .unwrap_or_else(|| self.p0())
    }

    pub fn failed_gate(&self) -> Option<(usize, &SmallnessGate)> {
        self.steps
            .iter()
            .enumerate()
            .find(|(_, s)| !s.gate.passed)
            .map(|(k, s)| (k, &s.gate))
    }
}

/// Round cap used when none is given: `n * order^2`.
pub fn default_max_iters(n: usize, order: usize) -> usize {
    (n * order * order).max(1)
}

fn spectral_norm(m: &DMatrix<Scalar>) -> f64 {
    crate::rank::singular_values(m)
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Runs the sequence at the center of `f`. `truncation(k)` gives the order
/// to which `F_k` is cut after selection, if any.
fn run_sequence(
    f: &AnalyticSystem,
    opts: &DeflationOptions,
    max_iters: usize,
    truncation: impl Fn(usize) -> Option<usize>,
) -> Result<DeflationTrace> {
    let backend = opts.backend;
    let x0 = f.center().to_vec();
    let n = f.dim();
    let mut steps = Vec::new();
    let mut current = f.clone();
    let mut k = 0;
    loop {
        let mut selection = select(&current, backend)?;
        if let Some(order) = truncation(k) {
            selection.system = selection.system.truncate(order);
        }
        let system = selection.system.clone();
        let gate = gate_with(system.equations(), &x0, system.ball(), backend, opts.gate)?;
        let mut step = DeflationStep {
            kind: StepKind::Selection,
            system: system.clone(),
            selection,
            gate,
            rank_report: None,
            pivot_rows: Vec::new(),
            pivot_cols: Vec::new(),
            pivot_mu: None,
            extracted_rows: Vec::new(),
        };
        if !step.gate.passed {
            steps.push(step);
            return Ok(DeflationTrace {
                x0,
                input: f.clone(),
                steps,
                thickness: k,
                deflated: None,
            });
        }
        let j0 = system.jacobian_at(&x0);
        let report = numerical_rank(&j0);
        let r = report.rank;
        step.rank_report = Some(report);
        if r == n {
            let rows = extract_rows(&system)?;
            let deflated = system.with_equations(
                rows.iter()
                    .map(|&i| system.equations()[i].clone())
                    .collect(),
            )?;
            step.kind = StepKind::Extraction;
            step.extracted_rows = rows;
            steps.push(step);
            return Ok(DeflationTrace {
                x0,
                input: f.clone(),
                steps,
                thickness: k,
                deflated: Some(deflated),
            });
        }
        if r == 0 {
            return Err(Error::RankDeficiency(format!(
                "the Jacobian of F_{k} has numerical rank 0 after selection"
            )));
        }
        if k >= max_iters {
            return Err(Error::NonTermination(max_iters));
        }
        let (pr, pc) = pivot_selection(&j0, r)?;
        let block = j0.select_rows(pr.iter()).select_columns(pc.iter());
        step.pivot_mu = Some(spectral_norm(&checked_inverse(&block)?));
        let order = system.order().saturating_sub(1);
        current = kernel_op(&system, &pr, &pc, order)?;
        step.kind = StepKind::Kerneling;
        step.pivot_rows = pr;
        step.pivot_cols = pc;
        steps.push(step);
        k += 1;
    }
}

/// Deflation sequence of `f` at `x0`. If `f` is expanded elsewhere it is first
/// re-expanded around `x0` at its own order.
pub fn deflation_sequence(
    f: &AnalyticSystem,
    x0: &[Scalar],
    opts: &DeflationOptions,
) -> Result<DeflationTrace> {
    let f = at_point(f, x0)?;
    run_sequence(&f, opts, opts.max_iters, |_| None)
}

/// The truncated sequence `T_0 = Tr_{l+1}(S(f))`, `T_{k+1} = Tr_{l-k}(S(K(T_k)))`.
/// Rank `n` must be reached by `T_l`.
pub fn truncated_deflation(
    f: &AnalyticSystem,
    x0: &[Scalar],
    ell: usize,
    opts: &DeflationOptions,
) -> Result<DeflationTrace> {
    let f = at_point(f, x0)?;
    if f.order() < ell + 1 {
        return Err(Error::Domain(format!(
            "truncated deflation of thickness {ell} needs order >= {}, got {}",
            ell + 1,
            f.order()
        )));
    }
    run_sequence(&f, opts, ell, |k| Some(ell + 1 - k))
}

fn at_point(f: &AnalyticSystem, x0: &[Scalar]) -> Result<AnalyticSystem> {
    if f.center() == x0 {
        Ok(f.clone())
    } else {
        f.recenter(x0, f.order())
    }
}

/// Result of one singular Newton step.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonStep {
    pub point: Vec<Scalar>,
    pub trace: DeflationTrace,
}

/// `x0 - Ddfl(x0)^{-1} dfl(x0)` where `dfl` is the deflated system of `f`
/// re-expanded at `x0` to `order`; `x0` itself when a gate fails.
pub fn singular_newton_step(
    f: &AnalyticSystem,
    x0: &[Scalar],
    order: usize,
    opts: &DeflationOptions,
) -> Result<NewtonStep> {
    let local = f.recenter(x0, order)?;
    let trace = run_sequence(&local, opts, opts.max_iters, |_| None)?;
    let point = match &trace.deflated {
        Some(d) => newton_point(d, x0)?,
        None => x0.to_vec(),
    };
    Ok(NewtonStep { point, trace })
}

/// Classical Newton step of a square system.
pub fn newton_point(f: &AnalyticSystem, x: &[Scalar]) -> Result<Vec<Scalar>> {
    let j = f.jacobian_at(x);
    if j.nrows() != j.ncols() {
        return Err(Error::LinearSolve(format!(
            "Newton step needs a square system, got {}x{}",
            j.nrows(),
            j.ncols()
        )));
    }
    checked_inverse(&j).map_err(|e| Error::LinearSolve(e.to_string()))?;
    let fx = f.evaluate(x);
    let dx = j
        .lu()
        .solve(&fx)
        .ok_or_else(|| Error::LinearSolve("singular Jacobian".into()))?;
    let x = DVector::from_column_slice(x);
    Ok((x - dx).iter().copied().collect())
}

/// Trajectory `[x0, x1, ...]` of at most `steps` singular Newton steps,
/// stopping early on stagnation or when a gate fails.
pub fn newton_iterate(
    f: &AnalyticSystem,
    x0: &[Scalar],
    steps: usize,
    order: usize,
    opts: &DeflationOptions,
) -> Result<Vec<Vec<Scalar>>> {
    let mut traj = vec![x0.to_vec()];
    for _ in 0..steps {
        let x = traj.last().expect("trajectory is never empty");
        let step = singular_newton_step(f, x, order, opts)?;
        if step.trace.deflated.is_none() {
            break;
        }
        let dx = euclidean(step.point.iter().zip(x).map(|(a, b)| a - b));
        let stalled = dx <= 1e-15 * (1.0 + euclidean(x.iter().copied()));
        if stalled {
            break;
        }
        traj.push(step.point);
    }
    Ok(traj)
}
