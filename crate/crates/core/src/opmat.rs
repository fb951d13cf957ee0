//! Dense real matrices with ℓ² operator-norm estimation, and the
//! Hankel-type Schur-multiplier matrices Ψ(u).
//!
//! # Operator norms
//!
//! [`l2_opnorm`] runs power iteration on the Gram operator AᵀA, whose
//! Rayleigh quotients along the iteration are monotone non-decreasing, so the
//! running estimate only improves. Two starting vectors are used — a seeded
//! random vector and the all-ones vector (which is already extremal for
//! all-ones blocks, a case this crate cares about) — and the better final
//! witness wins. The returned `lower` is recomputed as ‖A·witness‖/‖witness‖
//! from the final witness alone, so it is a certified lower bound on the true
//! norm regardless of convergence; `value` adds the residual-based view of
//! the same quantity.
//!
//! # Ψ(u)
//!
//! For a coefficient vector u and weight β, Ψ(u) is the K×K matrix with
//! entries u_{i+j} √(β_{i+j}/(β_i β_j)). Its Hilbert–Schmidt norm squares to
//! Σ_n |u_n|² β_n B_n with B_n the reciprocal convolution of the weight —
//! provided K exceeds the top of the support of u, so that every diagonal
//! i+j = n lies fully inside the matrix. [`psi_hs_norm`] computes both sides
//! independently.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::util::{dot, l2_norm, log_sum_exp, KahanSum};
use crate::weights::{bn_sequence, WeightSequence};

/// Hard cap on each dense dimension (a 4096² matrix of f64 is 128 MiB).
pub const MAX_DENSE_DIM: usize = 4096;

#[derive(Debug, thiserror::Error)]
pub enum OpMatError {
    #[error("matrix dimensions {rows}x{cols} exceed the dense cap {max}", max = MAX_DENSE_DIM)]
    DimensionTooLarge { rows: usize, cols: usize },
    #[error("matrix dimensions must be positive")]
    EmptyMatrix,
    #[error("block range out of bounds")]
    BlockOutOfRange,
    #[error("exponent must satisfy p >= 1, got {0}")]
    BadExponent(f64),
    #[error("hankel scale index k must lie in 2..=7, got {0}")]
    BadHankelIndex(usize),
}

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, OpMatError> {
        if rows == 0 || cols == 0 {
            return Err(OpMatError::EmptyMatrix);
        }
        if rows > MAX_DENSE_DIM || cols > MAX_DENSE_DIM {
            return Err(OpMatError::DimensionTooLarge { rows, cols });
        }
        Ok(Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, OpMatError> {
        let mut m = Self::zeros(rows, cols)?;
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *yi = acc;
        }
    }

    /// y = Aᵀ x.
    pub fn tr_matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += xi * a;
            }
        }
    }

    /// Hilbert–Schmidt (Frobenius) norm with compensated accumulation.
    pub fn frobenius(&self) -> f64 {
        let mut acc = KahanSum::new();
        for &v in &self.data {
            acc.add(v * v);
        }
        acc.value().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Copy of the block with rows in [r0, r1) and columns in [c0, c1).
    pub fn sub_block(
        &self,
        r0: usize,
        r1: usize,
        c0: usize,
        c1: usize,
    ) -> Result<DenseMatrix, OpMatError> {
        if r0 >= r1 || c0 >= c1 || r1 > self.rows || c1 > self.cols {
            return Err(OpMatError::BlockOutOfRange);
        }
        DenseMatrix::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Plain CSV: one line per row, values in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for i in 0..self.rows {
            let mut line = String::new();
            for j in 0..self.cols {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{}", self.get(i, j)));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Result of an ℓ² operator-norm estimation.
#[derive(Debug, Clone, Serialize)]
pub struct NormEstimate {
    /// √(Rayleigh quotient) at the final iterate.
    pub value: f64,
    /// ‖A·witness‖/‖witness‖ recomputed from the stored witness — a certified
    /// lower bound on ‖A‖₂ independent of convergence.
    pub lower: f64,
    /// First-order singular-value residual ‖AᵀAv − ρv‖ / (2√ρ) at the end.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Unit vector attaining `lower`.
    pub witness: Vec<f64>,
    /// √ρ per iteration, non-decreasing; useful for convergence plots.
    pub rayleigh_history: Vec<f64>,
}

fn power_run(
    a: &DenseMatrix,
    mut v: Vec<f64>,
    tol: f64,
    maxit: usize,
) -> (f64, f64, usize, bool, Vec<f64>, Vec<f64>) {
    let n = a.cols();
    let vnorm = l2_norm(&v);
    assert!(vnorm > 0.0, "power iteration needs a nonzero start");
    for x in v.iter_mut() {
        *x /= vnorm;
    }
    let mut av = vec![0.0; a.rows()];
    let mut g = vec![0.0; n];
    let mut history = Vec::new();
    let mut rho = 0.0;
    let mut res = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..maxit {
        iterations = it + 1;
        a.matvec(&v, &mut av);
        rho = dot(&av, &av); // Rayleigh quotient of the Gram operator at v
        history.push(rho.sqrt());
        a.tr_matvec(&av, &mut g);
        let mut rs = 0.0;
        for i in 0..n {
            let d = g[i] - rho * v[i];
            rs += d * d;
        }
        res = rs.sqrt();
        if res <= tol * rho {
            converged = true;
            break;
        }
        let gn = l2_norm(&g);
        if gn == 0.0 {
            // A v lands in the kernel; the estimate is exactly zero here.
            converged = rho == 0.0;
            break;
        }
        for i in 0..n {
            v[i] = g[i] / gn;
        }
    }
    let sigma = rho.sqrt();
    let residual = if sigma > 0.0 { res / (2.0 * sigma) } else { res };
    (sigma, residual, iterations, converged, v, history)
}

/// ℓ²→ℓ² operator norm of A by power iteration on AᵀA.
///
/// Runs from a ChaCha8-seeded random start and from the all-ones start, and
/// keeps the better result. `tol` is relative on the Gram Rayleigh quotient.
pub fn l2_opnorm(a: &DenseMatrix, tol: f64, maxit: usize, seed: u64) -> NormEstimate {
    let n = a.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let random_start = if l2_norm(&random_start) == 0.0 {
        vec![1.0; n]
    } else {
        random_start
    };
    let ones = vec![1.0; n];

    let mut best: Option<(f64, f64, usize, bool, Vec<f64>, Vec<f64>)> = None;
    let mut total_iterations = 0;
    for start in [random_start, ones] {
        let run = power_run(a, start, tol, maxit);
        total_iterations += run.2;
        let better = match &best {
            None => true,
            Some(b) => run.0 > b.0,
        };
        if better {
            best = Some(run);
        }
    }
    let (sigma, residual, _, converged, witness, history) = best.unwrap();

    // Certified lower bound from the witness alone.
    let wnorm = l2_norm(&witness);
    let mut aw = vec![0.0; a.rows()];
    a.matvec(&witness, &mut aw);
    let lower = if wnorm > 0.0 { l2_norm(&aw) / wnorm } else { 0.0 };

    NormEstimate {
        value: sigma,
        lower,
        residual,
        iterations: total_iterations,
        converged,
        witness,
        rayleigh_history: history,
    }
}

/// The K×K Schur-multiplier matrix Ψ(u) with entries
/// u_{i+j} √(β_{i+j}/(β_i β_j)); u is read as zero beyond its stored length.
///
/// Entries are mirrored from the upper triangle, so the matrix is symmetric
/// to exact equality; the weight ratio goes through
/// [`WeightSequence::log_submult_defect`], so for the `sigma` family an
/// entry whose ratio is mathematically 1 is exactly `1.0`.
pub fn psi_matrix(
    u: &[f64],
    w: &WeightSequence,
    k_dim: usize,
) -> Result<DenseMatrix, OpMatError> {
    let mut m = DenseMatrix::zeros(k_dim, k_dim)?;
    w.log_betas(2 * (k_dim - 1)); // one memo fill up front
    for i in 0..k_dim {
        for j in i..k_dim {
            let s = u.get(i + j).copied().unwrap_or(0.0);
            let v = if s == 0.0 {
                0.0
            } else {
                s * (0.5 * w.log_submult_defect(i, j)).exp()
            };
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    Ok(m)
}

/// Both sides of the Hilbert–Schmidt identity for Ψ(u).
#[derive(Debug, Clone, Serialize)]
pub struct HsNorms {
    /// Frobenius norm of the assembled K×K matrix.
    pub direct: f64,
    /// √(Σ_n u_n² β_n B_n) computed from the weight convolution, no matrix.
    pub via_identity: f64,
    /// Smallest K that makes the identity exact (support top + 1).
    pub covering_dim: usize,
    /// Whether the requested K reached `covering_dim`.
    pub coverage_ok: bool,
}

/// Evaluate ‖Ψ(u)‖_HS directly and through the B_n identity.
pub fn psi_hs_norm(
    u: &[f64],
    w: &WeightSequence,
    k_dim: usize,
) -> Result<HsNorms, OpMatError> {
    let support_top = u.iter().rposition(|&x| x != 0.0);
    let covering_dim = support_top.map_or(1, |t| t + 1);
    let m = psi_matrix(u, w, k_dim)?;
    let direct = m.frobenius();
    let via_identity = match support_top {
        None => 0.0,
        Some(t) => {
            let logs = w.log_betas(t);
            let b = bn_sequence(w, t);
            let mut acc = KahanSum::new();
            for (n, &un) in u.iter().enumerate().take(t + 1) {
                if un != 0.0 {
                    acc.add(un * un * (logs[n] + b.log_value(n)).exp());
                }
            }
            acc.value().sqrt()
        }
    };
    Ok(HsNorms {
        direct,
        via_identity,
        covering_dim,
        coverage_ok: k_dim >= covering_dim,
    })
}

/// Outcome of the indicator-block probe of Ψ at scale 3^k.
#[derive(Debug, Clone, Serialize)]
pub struct HankelReport {
    pub k: usize,
    /// m = 3^k, the matrix dimension used.
    pub scale: usize,
    /// ‖Ψ(u)‖₂ / ‖u‖₂ for u the indicator of [2·3^{k−1}, 3^k).
    pub ratio: f64,
    /// √(3^k/12), the proven growth floor for the ratio.
    pub floor: f64,
    /// Size of the inner block I_k = [3^{k−1}, (3^k+1)/2).
    pub block_size: usize,
    /// ℓ² norm of the I_k × I_k sub-block (equals `block_size` when the
    /// block is all ones).
    pub block_norm: f64,
    /// Whether every entry of that sub-block is exactly 1.0.
    pub block_all_ones: bool,
    pub u_norm: f64,
    pub psi_estimate: NormEstimate,
}

/// Probe Ψ with the indicator of the outer block [2·3^{k−1}, 3^k) at matrix
/// dimension 3^k. For the `sigma` weight the I_k × I_k sub-block is exactly
/// all ones, so its norm equals its size and the whole-matrix norm grows at
/// least like √(3^k/12) relative to ‖u‖₂.
pub fn hankel_indicator_test(k: usize, w: &WeightSequence) -> Result<HankelReport, OpMatError> {
    if !(2..=7).contains(&k) {
        return Err(OpMatError::BadHankelIndex(k));
    }
    let m = 3usize.pow(k as u32);
    let third = m / 3;
    let mut u = vec![0.0; m];
    for x in u.iter_mut().take(m).skip(2 * third) {
        *x = 1.0;
    }
    let u_norm = (3usize.pow(k as u32 - 1) as f64).sqrt();
    let psi = psi_matrix(&u, w, m)?;
    let est = l2_opnorm(&psi, 1e-10, 2000, 0xA11CE);

    let half = (m + 1) / 2;
    let block = psi.sub_block(third, half, third, half)?;
    let block_size = half - third;
    let block_all_ones = (0..block.rows())
        .all(|i| (0..block.cols()).all(|j| block.get(i, j) == 1.0));
    let best = l2_opnorm(&block, 1e-10, 2000, 0xB10C);

    Ok(HankelReport {
        k,
        scale: m,
        ratio: est.value / u_norm,
        floor: (m as f64 / 12.0).sqrt(),
        block_size,
        block_norm: best.value,
        block_all_ones,
        u_norm,
        psi_estimate: est,
    })
}

/// Largest column ℓ^p norm — a lower bound for the operator norm on ℓ^p
/// (apply the operator to a basis vector). `p` may be `f64::INFINITY`.
pub fn lp_column_lower(a: &DenseMatrix, p: f64) -> Result<f64, OpMatError> {
    if !(p >= 1.0) {
        return Err(OpMatError::BadExponent(p));
    }
    let mut best = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(a.rows());
    for j in 0..a.cols() {
        if p.is_infinite() {
            let mut colmax = f64::NEG_INFINITY;
            for i in 0..a.rows() {
                colmax = colmax.max(a.get(i, j).abs().ln());
            }
            best = best.max(colmax);
        } else {
            terms.clear();
            for i in 0..a.rows() {
                let v = a.get(i, j).abs();
                if v > 0.0 {
                    terms.push(p * v.ln());
                }
            }
            best = best.max(log_sum_exp(&terms) / p);
        }
    }
    Ok(best.exp())
}

/// Largest row ℓ^q norm — a lower bound for the operator norm on ℓ^p with
/// conjugate exponent q (pair the operator with a dual basis vector).
pub fn lq_row_lower(a: &DenseMatrix, q: f64) -> Result<f64, OpMatError> {
    if !(q >= 1.0) {
        return Err(OpMatError::BadExponent(q));
    }
    let mut best = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(a.cols());
    for i in 0..a.rows() {
        if q.is_infinite() {
            let mut rowmax = f64::NEG_INFINITY;
            for j in 0..a.cols() {
                rowmax = rowmax.max(a.get(i, j).abs().ln());
            }
            best = best.max(rowmax);
        } else {
            terms.clear();
            for j in 0..a.cols() {
                let v = a.get(i, j).abs();
                if v > 0.0 {
                    terms.push(q * v.ln());
                }
            }
            best = best.max(log_sum_exp(&terms) / q);
        }
    }
    Ok(best.exp())
}

/// Monomial lower bound for the bilinear multiplication map on h²(β).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BilinearLower {
    /// sup over the range of √(β_{m+n}/(β_m β_n)) = ‖z^m·z^n‖/(‖z^m‖‖z^n‖).
    pub value: f64,
    pub log_value: f64,
    pub witness: (usize, usize),
}

/// Scan monomial pairs z^m, z^n with m ≤ n ≤ N; the norm ratio of their
/// product is √(β_{m+n}/(β_m β_n)), exact for the `sigma` family.
pub fn multiplication_bilinear_lower(w: &WeightSequence, n_max: usize) -> BilinearLower {
    w.log_betas(2 * n_max);
    let mut best = f64::NEG_INFINITY;
    let mut witness = (0usize, 0usize);
    for m in 0..=n_max {
        for n in m..=n_max {
            let d = 0.5 * w.log_submult_defect(m, n);
            if d > best {
                best = d;
                witness = (m, n);
            }
        }
    }
    BilinearLower {
        value: best.exp(),
        log_value: best,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSequence;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn dims_are_guarded() {
        assert!(DenseMatrix::zeros(0, 3).is_err());
        assert!(DenseMatrix::zeros(3, MAX_DENSE_DIM + 1).is_err());
        assert!(DenseMatrix::zeros(MAX_DENSE_DIM, 2).is_ok());
    }

    #[test]
    fn matvec_and_transpose() {
        let a = DenseMatrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64).unwrap();
        let mut y = vec![0.0; 2];
        a.matvec(&[1.0, 0.0, -1.0], &mut y);
        assert_eq!(y, vec![-2.0, -2.0]);
        let mut z = vec![0.0; 3];
        a.tr_matvec(&[1.0, 1.0], &mut z);
        assert_eq!(z, vec![3.0, 5.0, 7.0]);
    }

    #[test]
    fn opnorm_of_diagonal() {
        let mut a = DenseMatrix::zeros(4, 4).unwrap();
        for (i, d) in [3.0, -7.0, 2.0, 5.0].into_iter().enumerate() {
            a.set(i, i, d);
        }
        let est = l2_opnorm(&a, 1e-12, 500, 42);
        assert!(est.converged);
        assert!(rel_close(est.value, 7.0, 1e-10), "value {}", est.value);
        assert!(est.lower <= est.value * (1.0 + 1e-12));
        assert!(rel_close(est.lower, 7.0, 1e-8));
    }

    #[test]
    fn opnorm_all_ones_block() {
        // ones(n) has a rank-one Gram with norm n; the all-ones start nails
        // it in one step.
        let a = DenseMatrix::from_fn(6, 6, |_, _| 1.0).unwrap();
        let est = l2_opnorm(&a, 1e-12, 100, 7);
        assert!(rel_close(est.value, 6.0, 1e-12));
        assert!(est.converged);
    }

    #[test]
    fn opnorm_rayleigh_history_is_monotone() {
        let a = DenseMatrix::from_fn(30, 20, |i, j| ((i * 37 + j * 11) % 13) as f64 - 6.0)
            .unwrap();
        let est = l2_opnorm(&a, 1e-12, 300, 911);
        for w in est.rayleigh_history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12 * w[0].abs(), "history dipped");
        }
        assert!(est.lower <= est.value + 1e-12);
        // Frobenius dominates the operator norm.
        assert!(est.value <= a.frobenius() + 1e-9);
    }

    #[test]
    fn opnorm_zero_matrix() {
        let a = DenseMatrix::zeros(3, 3).unwrap();
        let est = l2_opnorm(&a, 1e-12, 50, 1);
        assert_eq!(est.value, 0.0);
        assert!(est.converged);
    }

    #[test]
    fn psi_matrix_is_exactly_symmetric() {
        let w = WeightSequence::exp_n_over_log();
        let u: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let m = psi_matrix(&u, &w, 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn psi_hs_identity_constant_weight() {
        // beta = 1: B_n = n+1, so ||Psi(u)||_HS^2 = sum (n+1) u_n^2; with
        // u = e_2 the matrix has a 3-entry anti-diagonal of ones.
        let w = WeightSequence::constant();
        let u = [0.0, 0.0, 1.0];
        let h = psi_hs_norm(&u, &w, 3).unwrap();
        assert!(h.coverage_ok);
        assert_eq!(h.covering_dim, 3);
        assert!(rel_close(h.direct, 3f64.sqrt(), 1e-14));
        assert!(rel_close(h.via_identity, 3f64.sqrt(), 1e-14));
    }

    #[test]
    fn psi_hs_identity_needs_coverage() {
        let w = WeightSequence::constant();
        let u = [0.0, 0.0, 0.0, 0.0, 1.0];
        let short = psi_hs_norm(&u, &w, 3).unwrap();
        assert!(!short.coverage_ok);
        // K = 3 sees only pairs (i,j) with i,j <= 2 summing to 4: one pair
        // (2,2) instead of all five.
        assert!(short.direct < short.via_identity);
        let full = psi_hs_norm(&u, &w, 5).unwrap();
        assert!(full.coverage_ok);
        assert!(rel_close(full.direct, full.via_identity, 1e-13));
    }

    #[test]
    fn hankel_sigma_block_is_all_ones() {
        let w = WeightSequence::sigma();
        let r = hankel_indicator_test(2, &w).unwrap();
        assert_eq!(r.scale, 9);
        assert_eq!(r.block_size, 2); // I_2 = {3, 4}
        assert!(r.block_all_ones);
        assert!(rel_close(r.block_norm, 2.0, 1e-10));
        assert!(r.ratio >= r.floor, "ratio {} floor {}", r.ratio, r.floor);
        assert!(hankel_indicator_test(1, &w).is_err());
        assert!(hankel_indicator_test(8, &w).is_err());
    }

    #[test]
    fn column_and_row_lower_bounds() {
        let a = DenseMatrix::from_fn(2, 2, |i, j| ((i + 1) * (j + 1)) as f64).unwrap();
        // columns: (1,2) and (2,4); l^1 norms 3 and 6
        assert!(rel_close(lp_column_lower(&a, 1.0).unwrap(), 6.0, 1e-14));
        // sup norm: max |entry|
        assert!(rel_close(lp_column_lower(&a, f64::INFINITY).unwrap(), 4.0, 1e-14));
        // rows: (1,2) and (2,4); l^2 norms sqrt5, sqrt20
        assert!(rel_close(lq_row_lower(&a, 2.0).unwrap(), 20f64.sqrt(), 1e-14));
        assert!(lp_column_lower(&a, 0.5).is_err());
    }

    #[test]
    fn bilinear_lower_zorboska_sees_defect() {
        let w = WeightSequence::zorboska();
        let r = multiplication_bilinear_lower(&w, 5);
        // witness (3,3): beta_6/beta_3^2 = 3.
        assert!(rel_close(r.value, 3f64.sqrt(), 1e-13));
        assert_eq!(r.witness, (3, 3));
    }

    #[test]
    fn bilinear_lower_sigma_is_exactly_one() {
        let w = WeightSequence::sigma();
        let r = multiplication_bilinear_lower(&w, 40);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.log_value, 0.0);
    }

    #[test]
    fn sub_block_and_csv() {
        let a = DenseMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64).unwrap();
        let b = a.sub_block(1, 3, 0, 2).unwrap();
        assert_eq!(b.rows(), 2);
        assert_eq!(b.get(0, 0), 3.0);
        assert_eq!(b.get(1, 1), 7.0);
        assert!(a.sub_block(2, 2, 0, 1).is_err());
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "0,1,2");
    }
}
