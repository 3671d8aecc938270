//! Test-chain generators with ground truth.
//!
//! Four families: the fixed five-state example chain, reflecting
//! birth-death chains, random reversible chains from symmetric seeded
//! weights, and clustered chains whose spectrum carries m eigenvalues
//! near 1 (one per cluster). The reversible families come with a
//! brute-force dense stationary oracle and a spectrum oracle through
//! symmetrization, so solver output and fitted convergence rates can be
//! checked against independent references.

use crate::block::DenseBlock;
use crate::error::{Error, Result};
use crate::kernels::jacobi_eigh;
use crate::rng;
use crate::sparse::SparseTransitionMatrix;

/// Hard cap for the dense O(n^3) oracles.
pub const ORACLE_MAX_N: usize = 2000;
/// Detailed-balance tolerance for the spectrum oracle.
pub const REVERSIBILITY_TOL: f64 = 1e-10;

/// The five-state chain, row-major (row, col, P(row, col)).
const FIVE_STATE: [(usize, usize, f64); 10] = [
    (0, 3, 0.9090),
    (0, 4, 0.0910),
    (1, 0, 0.0002),
    (1, 2, 0.9998),
    (2, 1, 0.9998),
    (2, 3, 0.0002),
    (3, 0, 0.6690),
    (3, 4, 0.3310),
    (4, 0, 0.9989),
    (4, 1, 0.0011),
];

#[derive(Debug, Clone, PartialEq)]
pub enum ChainSpec {
    /// The fixed 5-state example: two slow eigenvalue magnitudes
    /// (0.9998, 0.9996) and a fast pair (0.5483).
    Fig1,
    /// Reflecting random walk on {0..n-1}: up with probability p, down
    /// with q, remainder on the diagonal. Reversible; pi_i is
    /// proportional to (p/q)^i.
    BirthDeath { n: usize, p: f64, q: f64 },
    /// Symmetric seeded weights: a ring backbone for connectivity,
    /// self-loops for aperiodicity, and extra edges with probability
    /// 8/n so the average degree stays put as n grows. Reversible with
    /// pi_i proportional to the weight row sum.
    RandomReversible { n: usize, seed: u64 },
    /// m complete clusters of `cluster_size` states with uniform(0.5,
    /// 1.5) intra-cluster weights; every cross-cluster pair shares one
    /// constant weight calibrated so roughly an eps fraction of each
    /// row's mass leaves the cluster. Built from symmetric weights, so
    /// reversible, with m eigenvalues near 1.
    Clustered { m: usize, cluster_size: usize, eps: f64, seed: u64 },
}

impl ChainSpec {
    pub fn n(&self) -> usize {
        match self {
            ChainSpec::Fig1 => 5,
            ChainSpec::BirthDeath { n, .. } => *n,
            ChainSpec::RandomReversible { n, .. } => *n,
            ChainSpec::Clustered { m, cluster_size, .. } => m * cluster_size,
        }
    }
}

pub fn generate(spec: &ChainSpec) -> Result<SparseTransitionMatrix> {
    match spec {
        ChainSpec::Fig1 => SparseTransitionMatrix::from_triplets(5, &FIVE_STATE),
        ChainSpec::BirthDeath { n, p, q } => birth_death(*n, *p, *q),
        ChainSpec::RandomReversible { n, seed } => random_reversible(*n, *seed),
        ChainSpec::Clustered { m, cluster_size, eps, seed } => {
            clustered(*m, *cluster_size, *eps, *seed)
        }
    }
}

fn birth_death(n: usize, p: f64, q: f64) -> Result<SparseTransitionMatrix> {
    if n < 2 || !(p > 0.0) || !(q > 0.0) || p + q > 1.0 {
        return Err(Error::InvalidParameters {
            msg: format!("birth-death needs n >= 2 and 0 < p, q with p + q <= 1; got n={n}, p={p}, q={q}"),
        });
    }
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        let mut stay = 1.0;
        if i + 1 < n {
            t.push((i, i + 1, p));
            stay -= p;
        }
        if i > 0 {
            t.push((i, i - 1, q));
            stay -= q;
        }
        if stay != 0.0 {
            t.push((i, i, stay));
        }
    }
    SparseTransitionMatrix::from_triplets(n, &t)
}

fn random_reversible(n: usize, seed: u64) -> Result<SparseTransitionMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameters {
            msg: format!("random reversible chain needs n >= 2, got {n}"),
        });
    }
    let mut rng = rng::seeded(seed);
    let mut w = vec![0.0f64; n * n];
    for i in 0..n {
        w[i * n + i] = rng::uniform(&mut rng, 0.5, 1.5);
        let j = (i + 1) % n;
        let weight = rng::uniform(&mut rng, 0.5, 1.5);
        w[i * n + j] += weight;
        w[j * n + i] += weight;
    }
    let p_edge = (8.0 / n as f64).min(1.0);
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // ring edge already present
            }
            if rng::uniform01(&mut rng) < p_edge {
                let weight = rng::uniform(&mut rng, 0.5, 1.5);
                w[i * n + j] = weight;
                w[j * n + i] = weight;
            }
        }
    }
    weights_to_chain(n, &w)
}

fn clustered(m: usize, cluster_size: usize, eps: f64, seed: u64) -> Result<SparseTransitionMatrix> {
    if m < 2 || cluster_size < 2 || !(eps > 0.0) || eps >= 1.0 / m as f64 {
        return Err(Error::InvalidParameters {
            msg: format!(
                "clustered chain needs m >= 2, cluster_size >= 2, 0 < eps < 1/m; got m={m}, cluster_size={cluster_size}, eps={eps}"
            ),
        });
    }
    let n = m * cluster_size;
    let mut rng = rng::seeded(seed);
    let mut w = vec![0.0f64; n * n];
    let mut intra_total = 0.0;
    for c in 0..m {
        let base = c * cluster_size;
        for i in 0..cluster_size {
            for j in (i + 1)..cluster_size {
                let weight = rng::uniform(&mut rng, 0.5, 1.5);
                w[(base + i) * n + (base + j)] = weight;
                w[(base + j) * n + (base + i)] = weight;
                intra_total += 2.0 * weight;
            }
        }
    }
    // One shared cross weight, sized so ~eps of a typical row's mass
    // crosses cluster boundaries.
    let mean_row = intra_total / n as f64;
    let cross = eps * mean_row / ((1.0 - eps) * (n - cluster_size) as f64);
    for i in 0..n {
        for j in 0..n {
            if i / cluster_size != j / cluster_size {
                w[i * n + j] = cross;
            }
        }
    }
    weights_to_chain(n, &w)
}

/// Row-normalizes a symmetric nonnegative weight matrix into P.
fn weights_to_chain(n: usize, w: &[f64]) -> Result<SparseTransitionMatrix> {
    let mut t = Vec::new();
    for i in 0..n {
        let row_sum: f64 = w[i * n..(i + 1) * n].iter().sum();
        if row_sum <= 0.0 {
            return Err(Error::InvalidParameters { msg: format!("state {i} has no weight") });
        }
        for j in 0..n {
            let weight = w[i * n + j];
            if weight > 0.0 {
                t.push((i, j, weight / row_sum));
            }
        }
    }
    SparseTransitionMatrix::from_triplets(n, &t)
}

/// Brute-force stationary distribution by dense Gaussian elimination.
///
/// Solves (P^T - I) x = 0 with the redundant last row replaced by the
/// normalization sum(x) = 1. For an irreducible chain the rows of
/// P^T - I carry exactly one dependency (they sum to zero), so replacing
/// any single row yields a nonsingular system; a vanishing pivot means
/// the chain is reducible.
pub fn stationary_oracle_dense(a: &SparseTransitionMatrix) -> Result<Vec<f64>> {
    let n = a.n();
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidParameters {
            msg: format!("dense oracle capped at n = {ORACLE_MAX_N}, got {n}"),
        });
    }
    // Augmented [P^T - I | b], b = e_{n-1}.
    let mut m = vec![0.0f64; n * (n + 1)];
    let width = n + 1;
    for (i, j, v) in a.triplets() {
        m[j * width + i] += v; // (P^T)[j][i] = P(i, j)
    }
    for i in 0..n {
        m[i * width + i] -= 1.0;
    }
    for j in 0..n {
        m[(n - 1) * width + j] = 1.0;
    }
    m[(n - 1) * width + n] = 1.0;

    for k in 0..n {
        let mut piv = k;
        for r in (k + 1)..n {
            if m[r * width + k].abs() > m[piv * width + k].abs() {
                piv = r;
            }
        }
        if m[piv * width + k].abs() < 1e-12 {
            return Err(Error::SingularSystem);
        }
        if piv != k {
            for c in 0..width {
                m.swap(k * width + c, piv * width + c);
            }
        }
        let d = m[k * width + k];
        for r in (k + 1)..n {
            let f = m[r * width + k] / d;
            if f != 0.0 {
                for c in k..width {
                    m[r * width + c] -= f * m[k * width + c];
                }
            }
        }
    }
    let mut x = vec![0.0f64; n];
    for k in (0..n).rev() {
        let mut acc = m[k * width + n];
        for c in (k + 1)..n {
            acc -= m[k * width + c] * x[c];
        }
        x[k] = acc / m[k * width + k];
    }
    // The ones row already enforces sum = 1; renormalize to tidy the
    // last few ulps.
    let total: f64 = x.iter().sum();
    for e in x.iter_mut() {
        *e /= total;
    }
    Ok(x)
}

/// Eigenvalue magnitudes (descending) of a reversible chain, through the
/// symmetrization S = D^{1/2} P D^{-1/2} with D = diag(pi).
///
/// Detailed balance is checked on every stored entry first; chains that
/// violate it beyond [`REVERSIBILITY_TOL`] are rejected, because the
/// symmetrized spectrum would be meaningless.
pub fn spectrum_oracle_reversible(
    a: &SparseTransitionMatrix,
    pi: &[f64],
) -> Result<Vec<f64>> {
    let n = a.n();
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidParameters {
            msg: format!("spectrum oracle capped at n = {ORACLE_MAX_N}, got {n}"),
        });
    }
    if pi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("pi of length {n}"),
            got: format!("{}", pi.len()),
        });
    }
    if pi.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameters {
            msg: "pi must be strictly positive".into(),
        });
    }

    let triplets = a.triplets();
    let mut max_violation = 0.0f64;
    for &(i, j, v) in &triplets {
        let flux = pi[i] * v;
        let back = pi[j] * a.p_entry(j, i);
        max_violation = max_violation.max((flux - back).abs());
    }
    if max_violation > REVERSIBILITY_TOL {
        return Err(Error::NotReversible { max_violation });
    }

    let mut s = DenseBlock::zeros(n, n)?;
    for &(i, j, v) in &triplets {
        s.set(i, j, pi[i].sqrt() * v / pi[j].sqrt());
    }
    let eig = jacobi_eigh(&s)?;
    let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    Ok(mags)
}
