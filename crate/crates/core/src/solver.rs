//! Power, block power, and sliding-window iteration with Ritz
//! extraction.
//!
//! The iteration itself never normalizes: P^T maps probability columns
//! to probability columns, so the block X_k = (P^T)^k X_0 stays bounded
//! and the span is all the decomposition step needs. Every
//! `check_interval` steps a basis Q of the working subspace (the current
//! block, or the window assembly of the last t blocks) is taken and an
//! approximate stationary vector is extracted, either as the minimizer
//! of ||P^T v - v||_2 over the subspace (via the smallest eigenpair of
//! B = Z^T Z with Z = (P^T - I) Q) or as the dominant Ritz vector of
//! B = Q^T P^T Q. The residual of the extracted vector doubles as the
//! stopping criterion and is always recomputed directly; the eigenvalue
//! route to it is used only as a cross-check in tests.

use std::collections::VecDeque;

use crate::block::{dot, norm1, norm2, DenseBlock};
use crate::error::{Error, Result};
use crate::kernels::{dominant_eigenpair_small, jacobi_eigh, mgs_qr};
use crate::rng;
use crate::sparse::SparseTransitionMatrix;

/// Entries of an extracted vector may dip this far below zero and still
/// be treated as roundoff; anything more negative means the subspace has
/// not converged to a meaningful distribution.
pub const NEGATIVE_MASS_TOL: f64 = 1e-8;

/// Stopping-value agreement for the small dominant-eigenpair iteration.
const RITZ_VALUE_TOL: f64 = 1e-13;
const RITZ_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extraction {
    /// Smallest eigenpair of Z^T Z, Z = (P^T - I) Q: minimizes the
    /// residual over the subspace and doubles as the stopping test.
    MinResidual,
    /// Dominant Ritz pair of Q^T P^T Q; falls back to MinResidual when
    /// the small power iteration stalls.
    DominantRitz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Block size s: columns iterated simultaneously.
    pub block_size: usize,
    /// Window length t; 1 disables the sliding window.
    pub window: usize,
    /// Residual threshold on ||P^T v - v||_2.
    pub tol: f64,
    /// Iterations between decomposition checkpoints.
    pub check_interval: usize,
    pub max_iterations: usize,
    /// Seed for the initial block.
    pub seed: u64,
    /// Replace X by an orthonormal basis of its own span at checkpoints.
    /// Keeps long runs from collapsing onto the dominant eigenvector in
    /// finite precision; the span itself is unchanged.
    pub reorthonormalize: bool,
    pub extraction: Extraction,
    /// Rank-revealing drop threshold for every QR in the run.
    pub drop_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            block_size: 1,
            window: 1,
            tol: 1e-10,
            check_interval: 100,
            max_iterations: 1_000_000,
            seed: 0,
            reorthonormalize: true,
            extraction: Extraction::MinResidual,
            drop_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_size < 1
            || self.window < 1
            || !(self.tol > 0.0)
            || self.check_interval < 1
            || self.max_iterations < 1
            || !(self.drop_tol > 0.0 && self.drop_tol < 1.0)
        {
            return Err(Error::InvalidParameters {
                msg: format!("{self:?}"),
            });
        }
        Ok(())
    }
}

/// Ring buffer of the last t iterate blocks; their concatenation is the
/// truncated Krylov subspace the window extraction works on.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    capacity: usize,
    blocks: VecDeque<DenseBlock>,
}

impl SlidingWindow {
    pub fn new(capacity: usize) -> Self {
        SlidingWindow { capacity: capacity.max(1), blocks: VecDeque::new() }
    }

    pub fn push(&mut self, block: DenseBlock) {
        if self.blocks.len() == self.capacity {
            self.blocks.pop_front();
        }
        self.blocks.push_back(block);
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn clear(&mut self) {
        self.blocks.clear();
    }

    /// Oldest-to-newest concatenation; None while empty.
    pub fn assemble(&self) -> Option<Result<DenseBlock>> {
        if self.blocks.is_empty() {
            return None;
        }
        let refs: Vec<&DenseBlock> = self.blocks.iter().collect();
        Some(DenseBlock::hcat(&refs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    NumericalBreakdown,
}

/// One decomposition checkpoint.
#[derive(Debug, Clone, Copy)]
pub struct CheckpointRecord {
    pub iteration: usize,
    pub matvecs: usize,
    /// ||P^T v - v||_2 of the extracted unit vector, computed directly.
    pub residual: f64,
    /// Columns surviving the rank-revealing QR of the subspace.
    pub effective_rank: usize,
    /// Smallest eigenvalue of B at min-residual checkpoints; the
    /// residual identity residual^2 = lambda_min holds up to roundoff
    /// and is cross-checked in the test suite.
    pub lambda_min: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Extracted stationary distribution: nonnegative, sums to 1. Only
    /// meaningful as pi when status is Converged; otherwise it is the
    /// best candidate seen, clamped to the simplex.
    pub distribution: Vec<f64>,
    pub residual_history: Vec<CheckpointRecord>,
    /// Exactly block_size x total_iterations: checkpoint extractions are
    /// not charged (they are amortized across the interval and do not
    /// touch the iterate).
    pub total_matvecs: usize,
    pub total_iterations: usize,
    pub status: Status,
    /// Advisory notes (reducibility, extraction hiccups).
    pub warnings: Vec<String>,
    /// The working block after the last completed iteration; with
    /// reorthonormalization off this is the raw power iterate.
    pub final_iterate: DenseBlock,
}

impl ConvergenceReport {
    /// CSV contract: header plus one row per checkpoint, residuals with
    /// 17 significant digits.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,matvecs,residual,effective_rank\n");
        for rec in &self.residual_history {
            out.push_str(&format!(
                "{},{},{:.16e},{}\n",
                rec.iteration, rec.matvecs, rec.residual, rec.effective_rank
            ));
        }
        out
    }
}

/// s random probability columns: seeded uniform(0,1) entries, each
/// column normalized to 1-norm 1. Linear independence is verified by QR;
/// on failure the seed is bumped and the block redrawn, at most 5 times.
pub fn make_initial_block(n: usize, s: usize, seed: u64) -> Result<DenseBlock> {
    if s < 1 || s > n {
        return Err(Error::InvalidParameters {
            msg: format!("block size must satisfy 1 <= s <= n, got s={s}, n={n}"),
        });
    }
    for attempt in 0..5 {
        let mut rng = rng::seeded(seed.wrapping_add(attempt));
        let mut x = DenseBlock::zeros(n, s)?;
        for j in 0..s {
            let col = x.column_mut(j);
            for e in col.iter_mut() {
                *e = rng::uniform01(&mut rng);
            }
            let sum = norm1(col);
            if sum == 0.0 {
                continue; // redraw on the next attempt
            }
            for e in col.iter_mut() {
                *e /= sum;
            }
        }
        if x.column(s - 1).iter().all(|&v| v == 0.0) {
            continue;
        }
        match mgs_qr(&x, 1e-10) {
            Ok(qr) if qr.dropped_count == 0 => return Ok(x),
            _ => continue,
        }
    }
    Err(Error::DependentColumns)
}

/// Applies P^T `count` times with no normalization in between. Each call
/// costs s * count matvecs.
pub fn iterate_block(
    a: &SparseTransitionMatrix,
    x: &DenseBlock,
    count: usize,
) -> Result<DenseBlock> {
    let mut cur = x.clone();
    for k in 0..count {
        cur = a.apply_transpose(&cur)?;
        if !cur.all_finite() {
            return Err(Error::NumericalBreakdown {
                detail: format!("non-finite entry after {} applications", k + 1),
            });
        }
    }
    Ok(cur)
}

struct Extracted {
    /// Unit 2-norm, sign-fixed so the entry sum is positive.
    v_unit: Vec<f64>,
    residual: f64,
    effective_rank: usize,
    lambda_min: Option<f64>,
}

fn direct_residual(a: &SparseTransitionMatrix, v: &[f64]) -> Result<f64> {
    let col = DenseBlock::from_columns(&[v])?;
    let pv = a.apply_transpose(&col)?;
    let mut acc = 0.0;
    for i in 0..v.len() {
        let d = pv.get(i, 0) - v[i];
        acc += d * d;
    }
    Ok(acc.sqrt())
}

fn assemble_candidate(q: &DenseBlock, small_vec: &[f64]) -> Vec<f64> {
    let n = q.rows();
    let r = q.cols();
    let mut v = vec![0.0; n];
    for k in 0..r {
        let c = small_vec[k];
        let col = q.column(k);
        for i in 0..n {
            v[i] += c * col[i];
        }
    }
    // Unit 2-norm, sum positive: fixes the sign ambiguity of the small
    // eigenvector deterministically.
    let nv = norm2(&v);
    if nv > 0.0 {
        for e in v.iter_mut() {
            *e /= nv;
        }
    }
    if v.iter().sum::<f64>() < 0.0 {
        for e in v.iter_mut() {
            *e = -*e;
        }
    }
    v
}

fn extract_min_residual_detail(
    a: &SparseTransitionMatrix,
    w: &DenseBlock,
    drop_tol: f64,
) -> Result<Extracted> {
    let qr = mgs_qr(w, drop_tol)?;
    let q = qr.q;
    let r = q.cols();
    let pq = a.apply_transpose(&q)?;
    // Z = (P^T - I) Q, then B = Z^T Z: symmetric positive semidefinite.
    let mut z = DenseBlock::zeros(q.rows(), r)?;
    for j in 0..r {
        for i in 0..q.rows() {
            z.set(i, j, pq.get(i, j) - q.get(i, j));
        }
    }
    let mut b = DenseBlock::zeros(r, r)?;
    for i in 0..r {
        for j in 0..r {
            b.set(i, j, dot(z.column(i), z.column(j)));
        }
    }
    let eig = jacobi_eigh(&b)?;
    let lambda_min = eig.eigenvalues[0];
    let small: Vec<f64> = (0..r).map(|i| eig.eigenvectors.get(i, 0)).collect();
    let v = assemble_candidate(&q, &small);
    let residual = direct_residual(a, &v)?;
    Ok(Extracted { v_unit: v, residual, effective_rank: r, lambda_min: Some(lambda_min) })
}

fn extract_dominant_ritz_detail(
    a: &SparseTransitionMatrix,
    w: &DenseBlock,
    drop_tol: f64,
) -> Result<Extracted> {
    let qr = mgs_qr(w, drop_tol)?;
    let q = qr.q;
    let r = q.cols();
    let pq = a.apply_transpose(&q)?;
    let mut b = DenseBlock::zeros(r, r)?;
    for i in 0..r {
        for j in 0..r {
            b.set(i, j, dot(q.column(i), pq.column(j)));
        }
    }
    match dominant_eigenpair_small(&b, RITZ_VALUE_TOL, RITZ_MAX_ITER) {
        Ok((_value, small)) => {
            let v = assemble_candidate(&q, &small);
            let residual = direct_residual(a, &v)?;
            Ok(Extracted { v_unit: v, residual, effective_rank: r, lambda_min: None })
        }
        // Complex or tied dominant pair of the small matrix: use the
        // residual-minimizing extraction instead.
        Err(Error::NoConvergence { .. }) => extract_min_residual_detail(a, w, drop_tol),
        Err(other) => Err(other),
    }
}

/// Clamps an extracted unit vector onto the probability simplex.
/// Entries below -NEGATIVE_MASS_TOL are an error; small negative noise
/// is zeroed and the vector renormalized to 1-norm 1.
fn to_distribution(v_unit: &[f64]) -> Result<Vec<f64>> {
    let min_entry = v_unit.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_entry < -NEGATIVE_MASS_TOL {
        return Err(Error::NegativeMass { min_entry });
    }
    let mut v: Vec<f64> = v_unit.iter().map(|&e| if e < 0.0 { 0.0 } else { e }).collect();
    let sum = norm1(&v);
    if sum == 0.0 {
        return Err(Error::NegativeMass { min_entry });
    }
    for e in v.iter_mut() {
        *e /= sum;
    }
    Ok(v)
}

/// Best-effort variant for non-converged reports: never errors.
fn to_distribution_lenient(v_unit: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = v_unit.iter().map(|&e| e.max(0.0)).collect();
    let sum = norm1(&v);
    if sum == 0.0 {
        let n = v.len();
        return vec![1.0 / n as f64; n];
    }
    for e in v.iter_mut() {
        *e /= sum;
    }
    v
}

/// Residual-minimizing extraction over the span of W (the modified
/// decomposition step). Returns the extracted distribution, its directly
/// computed residual, and the effective rank of the subspace.
pub fn extract_min_residual(
    a: &SparseTransitionMatrix,
    w: &DenseBlock,
    drop_tol: f64,
) -> Result<(Vec<f64>, f64, usize)> {
    let ex = extract_min_residual_detail(a, w, drop_tol)?;
    let dist = to_distribution(&ex.v_unit)?;
    Ok((dist, ex.residual, ex.effective_rank))
}

/// Dominant-Ritz extraction over the span of W; falls back to
/// [`extract_min_residual`] when the small eigenproblem does not settle.
pub fn extract_dominant_ritz(
    a: &SparseTransitionMatrix,
    w: &DenseBlock,
    drop_tol: f64,
) -> Result<(Vec<f64>, f64, usize)> {
    let ex = extract_dominant_ritz_detail(a, w, drop_tol)?;
    let dist = to_distribution(&ex.v_unit)?;
    Ok((dist, ex.residual, ex.effective_rank))
}

/// Runs the configured scheme to a stopping decision. Non-convergence is
/// reported through `status`, never as an error; errors are reserved for
/// invalid inputs.
pub fn solve(a: &SparseTransitionMatrix, cfg: &SolverConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let n = a.n();
    let s = cfg.block_size;
    let t = cfg.window;

    let mut warnings = Vec::new();
    let conn = a.check_strong_connectivity();
    if !conn.irreducible {
        warnings.push(format!(
            "chain is not irreducible ({} strongly connected components); the stationary distribution is not unique",
            conn.components
        ));
    }

    let mut x = make_initial_block(n, s, cfg.seed)?;
    let mut window = SlidingWindow::new(t);
    let mut history: Vec<CheckpointRecord> = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0usize;
    let mut status: Option<Status> = None;

    'run: while iterations < cfg.max_iterations {
        let steps = cfg.check_interval.min(cfg.max_iterations - iterations);
        for _ in 0..steps {
            x = a.apply_transpose(&x)?;
            iterations += 1;
            if !x.all_finite() {
                warnings.push(format!("non-finite iterate at iteration {iterations}"));
                status = Some(Status::NumericalBreakdown);
                break 'run;
            }
            if t > 1 {
                window.push(x.clone());
            }
        }

        let w_block = if t > 1 {
            match window.assemble() {
                Some(res) => res?,
                None => x.clone(),
            }
        } else {
            x.clone()
        };

        let extracted = match cfg.extraction {
            Extraction::MinResidual => extract_min_residual_detail(a, &w_block, cfg.drop_tol),
            Extraction::DominantRitz => extract_dominant_ritz_detail(a, &w_block, cfg.drop_tol),
        };
        let ex = match extracted {
            Ok(ex) => ex,
            Err(e) => {
                warnings.push(format!("extraction failed at iteration {iterations}: {e}"));
                status = Some(Status::NumericalBreakdown);
                break 'run;
            }
        };

        history.push(CheckpointRecord {
            iteration: iterations,
            matvecs: s * iterations,
            residual: ex.residual,
            effective_rank: ex.effective_rank,
            lambda_min: ex.lambda_min,
        });
        if best.as_ref().map_or(true, |(r, _)| ex.residual < *r) {
            best = Some((ex.residual, ex.v_unit.clone()));
        }

        if ex.residual <= cfg.tol {
            match to_distribution(&ex.v_unit) {
                Ok(dist) => {
                    return Ok(ConvergenceReport {
                        distribution: dist,
                        residual_history: history,
                        total_matvecs: s * iterations,
                        total_iterations: iterations,
                        status: Status::Converged,
                        warnings,
                        final_iterate: x,
                    });
                }
                Err(e) => {
                    // Residual met the threshold but the vector is not a
                    // distribution (reducible chains can do this: the
                    // subspace contains signed mixtures of several
                    // stationary vectors). Keep iterating.
                    warnings.push(format!(
                        "checkpoint at iteration {iterations}: residual {:.3e} under tolerance but {e}",
                        ex.residual
                    ));
                }
            }
        }

        if iterations >= cfg.max_iterations {
            break;
        }

        if cfg.reorthonormalize {
            let qr = mgs_qr(&x, cfg.drop_tol)?;
            x = if qr.q.cols() < s {
                // Rank collapse: top the basis back up to s columns with
                // fresh probability vectors so the block keeps exploring
                // s directions. Deterministic given config.
                let fresh = make_initial_block(n, s - qr.q.cols(), cfg.seed ^ iterations as u64)?;
                DenseBlock::hcat(&[&qr.q, &fresh])?
            } else {
                qr.q
            };
            // The raw Krylov sequence is broken by the basis swap; stale
            // window entries would no longer span consecutive iterates.
            window.clear();
        }
    }

    let status = status.unwrap_or(Status::MaxIterations);
    let distribution = match &best {
        Some((_, v)) => to_distribution_lenient(v),
        None => vec![1.0 / n as f64; n],
    };
    Ok(ConvergenceReport {
        distribution,
        residual_history: history,
        total_matvecs: s * iterations,
        total_iterations: iterations,
        status,
        warnings,
        final_iterate: x,
    })
}

/// Least-squares slope of log10(residual) against iteration number over
/// the geometric-decay phase (residuals strictly inside (1e-12, 1e-2)).
/// 10^slope estimates the per-iteration contraction factor.
pub fn fit_convergence_rate(history: &[CheckpointRecord]) -> Result<f64> {
    const LO: f64 = 1e-12;
    const HI: f64 = 1e-2;
    let pts: Vec<(f64, f64)> = history
        .iter()
        .filter(|r| r.residual > LO && r.residual < HI)
        .map(|r| (r.iteration as f64, r.residual.log10()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData { points: pts.len() });
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom == 0.0 {
        return Err(Error::InsufficientData { points: pts.len() });
    }
    Ok((m * sxy - sx * sy) / denom)
}
