//! Self-contained dense kernels for the small projected problems.
//!
//! Everything here operates on s x s or n x (t*s) blocks where s and t*s
//! stay tiny compared to the chain size, so the implementations favor
//! simplicity and bit-for-bit determinism over speed: modified
//! Gram-Schmidt with a single full reorthogonalization pass, cyclic
//! Jacobi rotations for the symmetric eigenproblem, and plain power
//! iteration for the dominant eigenpair of a small nonsymmetric matrix.

use crate::block::{dot, norm2, DenseBlock};
use crate::error::{Error, Result};

/// Off-diagonal Frobenius threshold, relative to the input norm.
const JACOBI_OFF_TOL: f64 = 1e-14;
/// Jacobi sweep budget; reaching it signals pathological input.
const JACOBI_MAX_SWEEPS: usize = 100;
/// Entries below this magnitude do not participate in sign conventions.
const SIGN_EPS: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct QrResult {
    /// Orthonormal basis of the kept columns, n x r.
    pub q: DenseBlock,
    /// Upper-triangular r x r factor over the kept columns.
    pub r_factor: DenseBlock,
    /// Indices (into the input) of the columns that survived.
    pub kept_columns: Vec<usize>,
    pub dropped_count: usize,
}

#[derive(Debug, Clone)]
pub struct SymEigResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column i pairs with eigenvalues[i]; orthonormal.
    pub eigenvectors: DenseBlock,
}

/// Modified Gram-Schmidt QR with rank-revealing column dropping.
///
/// Each column is orthogonalized twice against the accepted basis (the
/// classical "twice is enough" safeguard), then dropped when its
/// remaining norm falls below `drop_tol` times its original norm. The
/// first column with nonzero norm is always kept. Kept basis columns get
/// a deterministic sign: the first entry with magnitude above 1e-14 is
/// made positive, with the matching row of R flipped to preserve the
/// reconstruction Q * R.
pub fn mgs_qr(x: &DenseBlock, drop_tol: f64) -> Result<QrResult> {
    if !(drop_tol > 0.0 && drop_tol < 1.0) {
        return Err(Error::InvalidParameters {
            msg: format!("drop_tol must lie in (0, 1), got {drop_tol}"),
        });
    }
    let (n, s) = (x.rows(), x.cols());
    if n < s {
        return Err(Error::DimensionMismatch {
            expected: format!("at least {s} rows for {s} columns"),
            got: format!("{n} rows"),
        });
    }

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut coeffs: Vec<Vec<f64>> = Vec::new(); // per kept column: R entries over basis
    let mut kept_columns = Vec::new();

    for j in 0..s {
        let mut v = x.column(j).to_vec();
        let orig = norm2(&v);
        if orig == 0.0 {
            continue;
        }
        let mut rj = vec![0.0; basis.len()];
        for pass in 0..2 {
            for (k, q) in basis.iter().enumerate() {
                let c = dot(q, &v);
                for i in 0..n {
                    v[i] -= c * q[i];
                }
                let _ = pass;
                rj[k] += c;
            }
        }
        let nv = norm2(&v);
        if nv < drop_tol * orig && !basis.is_empty() {
            continue;
        }
        for e in v.iter_mut() {
            *e /= nv;
        }
        rj.push(nv);
        basis.push(v);
        coeffs.push(rj);
        kept_columns.push(j);
    }

    if basis.is_empty() {
        return Err(Error::AllColumnsZero);
    }

    let r = basis.len();
    // Sign convention: first non-negligible entry of each basis column
    // positive; the corresponding row of R flips with it.
    for (k, q) in basis.iter_mut().enumerate() {
        let lead = q.iter().find(|e| e.abs() > SIGN_EPS);
        if let Some(&lead) = lead {
            if lead < 0.0 {
                for e in q.iter_mut() {
                    *e = -*e;
                }
                for cj in coeffs.iter_mut() {
                    if cj.len() > k {
                        cj[k] = -cj[k];
                    }
                }
            }
        }
    }

    let cols: Vec<&[f64]> = basis.iter().map(|c| c.as_slice()).collect();
    let q = DenseBlock::from_columns(&cols)?;
    let mut r_factor = DenseBlock::zeros(r, r)?;
    for (jj, cj) in coeffs.iter().enumerate() {
        for (k, &c) in cj.iter().enumerate() {
            r_factor.set(k, jj, c);
        }
    }
    Ok(QrResult { q, r_factor, kept_columns, dropped_count: s - r })
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized as (B + B^T)/2 before anything else, so
/// callers holding a matrix that is symmetric only up to roundoff (or up
/// to a detailed-balance tolerance) can pass it directly. Rotations
/// sweep the strict upper triangle until the off-diagonal Frobenius norm
/// drops below 1e-14 times the input norm.
pub fn jacobi_eigh(b: &DenseBlock) -> Result<SymEigResult> {
    let s = b.rows();
    if b.cols() != s {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{} x {}", b.rows(), b.cols()),
        });
    }

    // Work on the symmetrized copy, full storage.
    let mut m = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..s {
            m[i * s + j] = 0.5 * (b.get(i, j) + b.get(j, i));
        }
    }
    let norm_b = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut v = vec![0.0; s * s];
    for i in 0..s {
        v[i * s + i] = 1.0;
    }

    if norm_b > 0.0 {
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = {
                let mut acc = 0.0;
                for i in 0..s {
                    for j in (i + 1)..s {
                        acc += 2.0 * m[i * s + j] * m[i * s + j];
                    }
                }
                acc.sqrt()
            };
            if off < JACOBI_OFF_TOL * norm_b {
                converged = true;
                break;
            }
            for p in 0..s {
                for q in (p + 1)..s {
                    let apq = m[p * s + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (m[q * s + q] - m[p * s + p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = t * c;
                    for k in 0..s {
                        let mkp = m[k * s + p];
                        let mkq = m[k * s + q];
                        m[k * s + p] = c * mkp - sn * mkq;
                        m[k * s + q] = sn * mkp + c * mkq;
                    }
                    for k in 0..s {
                        let mpk = m[p * s + k];
                        let mqk = m[q * s + k];
                        m[p * s + k] = c * mpk - sn * mqk;
                        m[q * s + k] = sn * mpk + c * mqk;
                    }
                    for k in 0..s {
                        let vkp = v[k * s + p];
                        let vkq = v[k * s + q];
                        v[k * s + p] = c * vkp - sn * vkq;
                        v[k * s + q] = sn * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged {
            // One more check after the final sweep.
            let mut acc = 0.0;
            for i in 0..s {
                for j in (i + 1)..s {
                    acc += 2.0 * m[i * s + j] * m[i * s + j];
                }
            }
            if acc.sqrt() >= JACOBI_OFF_TOL * norm_b {
                return Err(Error::NoConvergence { what: "jacobi eigensolver" });
            }
        }
    }

    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| {
        m[a * s + a].partial_cmp(&m[b * s + b]).expect("finite eigenvalues")
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&k| m[k * s + k]).collect();
    let mut vectors = DenseBlock::zeros(s, s)?;
    for (jj, &k) in order.iter().enumerate() {
        let mut col: Vec<f64> = (0..s).map(|i| v[i * s + k]).collect();
        if let Some(&lead) = col.iter().find(|e| e.abs() > SIGN_EPS) {
            if lead < 0.0 {
                for e in col.iter_mut() {
                    *e = -*e;
                }
            }
        }
        for i in 0..s {
            vectors.set(i, jj, col[i]);
        }
    }
    Ok(SymEigResult { eigenvalues, eigenvectors: vectors })
}

/// Dominant eigenpair of a small square matrix by power iteration from
/// the fixed start vector (1, ..., 1)/sqrt(s). Stops when the eigenpair
/// residual ||Bv - lambda v|| drops below `tol` relative to ||B||_F.
/// Callers fall back to the min-residual extraction when this reports
/// NoConvergence (complex, tied, or barely separated dominant pair).
pub fn dominant_eigenpair_small(
    b: &DenseBlock,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    let s = b.rows();
    if b.cols() != s {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{} x {}", b.rows(), b.cols()),
        });
    }
    if s == 1 {
        return Ok((b.get(0, 0), vec![1.0]));
    }

    let scale = norm2(b.data());
    if scale == 0.0 {
        let mut v = vec![0.0; s];
        v[0] = 1.0;
        return Ok((0.0, v));
    }

    let mut v = vec![1.0 / (s as f64).sqrt(); s];
    for _ in 0..max_iter {
        let mut w = vec![0.0; s];
        for j in 0..s {
            let col = b.column(j);
            for i in 0..s {
                w[i] += col[i] * v[j];
            }
        }
        // Stop on the eigenpair residual, not on Rayleigh-quotient
        // stagnation: the quotient can sit still (identically 0 for a
        // rotation) while the vector keeps wandering.
        let lambda = dot(&v, &w);
        let mut resid2 = 0.0;
        for i in 0..s {
            let d = w[i] - lambda * v[i];
            resid2 += d * d;
        }
        if resid2.sqrt() <= tol * scale {
            return Ok((lambda, v));
        }
        let nw = norm2(&w);
        if nw == 0.0 {
            // v landed exactly in the null space; the start was unlucky.
            return Err(Error::NoConvergence { what: "small dominant eigenpair" });
        }
        for i in 0..s {
            v[i] = w[i] / nw;
        }
    }
    Err(Error::NoConvergence { what: "small dominant eigenpair" })
}
