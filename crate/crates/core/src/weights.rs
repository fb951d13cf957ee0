//! Weight sequences β for the spaces h^p(β), stored in the log domain, plus
//! the convolution sequence B_n = Σ_k 1/(β_k β_{n−k}) and the regularity
//! diagnostics built on it.
//!
//! Weights in this laboratory span ~10⁸ orders of magnitude (log β_n = √n or
//! n/log n at n ≈ 4000), so every generator produces `log β_n` directly and
//! all downstream reductions (B_n, suprema, partial sums) run through
//! max-shifted log-sum-exp. Linear values are exposed for convenience but are
//! allowed to overflow to `inf` — the log accessors never do.
//!
//! One family gets special treatment: the piecewise-linear-over-σ weight
//! (`sigma`) has log β_n = n/σ(n) with integer n and σ(n), and several
//! downstream identities (all-ones Hankel blocks, a submultiplicativity
//! constant of exactly 1) hold *exactly* in that family. Floating-point
//! rounding of n/σ(n) breaks them in the last bit, so
//! [`WeightSequence::log_submult_defect`] routes this family through exact
//! integer arithmetic on a common denominator.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::quad::{self, QuadParams, QuadResult};
use crate::util::{log_sum_exp, KahanSum};

/// Errors from weight construction and weight-indexed computations.
#[derive(Debug, thiserror::Error)]
pub enum WeightError {
    #[error("unknown weight id `{0}`")]
    UnknownId(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Which family a [`WeightSequence`] belongs to, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum WeightKind {
    /// β_n = 1.
    Constant,
    /// β_n = n^γ for even n ≥ 2, n^γ′ for odd n ≥ 3, β_0 = β_1 = 1.
    Parity { gamma: f64, gamma_prime: f64 },
    /// log β_n = √n.
    ExpSqrt,
    /// log β_n = n/log n for n ≥ 2, β_0 = β_1 = 1.
    ExpNOverLog,
    /// Piecewise-geometric weight anchored at β_{3^k} = 9^k and
    /// β_{2·3^k} = 3^{5k}: on [3^k, 2·3^k) each step multiplies by
    /// (3^k)^{3/3^k}, on [2·3^k, 3^{k+1}) by 9^{1/3^k}(3^k)^{−3/3^k}.
    /// Base values β_0 = β_1 = β_2 = β_3 = 9.
    Zorboska,
    /// log β_n = n/σ(n) with σ(0) = 1 and σ(n) = k for 3^{k−1} ≤ n < 3^k.
    Sigma,
    /// β_n = n (log n)^α for n ≥ 2, β_0 = β_1 = 1.
    NLogAlpha { alpha: f64 },
    /// β_n = n² γ_n(α) for n ≥ 2 with γ_n the moment integral
    /// (see [`moment_gamma`]); β_0 = β_1 = 1.
    Moment { alpha: f64, nodes: usize },
    /// β_n = (n+1)^e.
    PolyShift { exponent: f64 },
    /// β_n = r^n.
    Geometric { ratio: f64 },
}

/// A weight sequence with memoized log values.
///
/// Interior mutability makes `&self` accessors possible from parallel tests;
/// the memo table only ever grows, guarded by an `RwLock`.
pub struct WeightSequence {
    kind: WeightKind,
    logs: RwLock<Vec<f64>>,
}

impl WeightSequence {
    fn new(kind: WeightKind) -> Self {
        Self {
            kind,
            logs: RwLock::new(Vec::new()),
        }
    }

    pub fn constant() -> Self {
        Self::new(WeightKind::Constant)
    }

    /// Requires 1 < γ′ < γ and 2γ′ > γ + 1 (so that B_n stays O(n) while
    /// Σ β_n B_n² converges; see the parity experiment).
    pub fn parity(gamma: f64, gamma_prime: f64) -> Result<Self, WeightError> {
        if !(gamma_prime > 1.0 && gamma > gamma_prime && 2.0 * gamma_prime > gamma + 1.0) {
            return Err(WeightError::InvalidParameter(format!(
                "parity weight needs 1 < gamma' < gamma and 2 gamma' > gamma + 1, got gamma={gamma}, gamma'={gamma_prime}"
            )));
        }
        Ok(Self::new(WeightKind::Parity { gamma, gamma_prime }))
    }

    pub fn exp_sqrt() -> Self {
        Self::new(WeightKind::ExpSqrt)
    }

    pub fn exp_n_over_log() -> Self {
        Self::new(WeightKind::ExpNOverLog)
    }

    pub fn zorboska() -> Self {
        Self::new(WeightKind::Zorboska)
    }

    pub fn sigma() -> Self {
        Self::new(WeightKind::Sigma)
    }

    pub fn n_log_alpha(alpha: f64) -> Result<Self, WeightError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(WeightError::InvalidParameter(format!(
                "n_log_alpha needs alpha in [0, 1], got {alpha}"
            )));
        }
        Ok(Self::new(WeightKind::NLogAlpha { alpha }))
    }

    pub fn moment(alpha: f64, nodes: usize) -> Result<Self, WeightError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(WeightError::InvalidParameter(format!(
                "moment weight needs alpha in [0, 1], got {alpha}"
            )));
        }
        Ok(Self::new(WeightKind::Moment {
            alpha,
            nodes: nodes.max(quad::PANEL_POINTS),
        }))
    }

    pub fn poly_shift(exponent: f64) -> Result<Self, WeightError> {
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(WeightError::InvalidParameter(format!(
                "poly_shift needs a finite exponent >= 0, got {exponent}"
            )));
        }
        Ok(Self::new(WeightKind::PolyShift { exponent }))
    }

    pub fn geometric(ratio: f64) -> Result<Self, WeightError> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(WeightError::InvalidParameter(format!(
                "geometric needs ratio > 0, got {ratio}"
            )));
        }
        Ok(Self::new(WeightKind::Geometric { ratio }))
    }

    /// Build a weight from a string id and a JSON parameter object, as used
    /// by experiment configs and the C interface.
    ///
    /// Recognized ids: `constant`, `parity` (gamma, gamma_prime), `exp_sqrt`,
    /// `exp_n_over_log`, `zorboska`, `sigma`, `n_log_alpha` (alpha), `moment`
    /// (alpha, nodes), `poly_shift` (exponent), `geometric` (ratio).
    pub fn from_spec(id: &str, params: &serde_json::Value) -> Result<Self, WeightError> {
        let num = |key: &str, default: f64| -> f64 {
            params.get(key).and_then(|v| v.as_f64()).unwrap_or(default)
        };
        match id {
            "constant" => Ok(Self::constant()),
            "parity" => Self::parity(num("gamma", 4.0), num("gamma_prime", 3.0)),
            "exp_sqrt" => Ok(Self::exp_sqrt()),
            "exp_n_over_log" => Ok(Self::exp_n_over_log()),
            "zorboska" => Ok(Self::zorboska()),
            "sigma" => Ok(Self::sigma()),
            "n_log_alpha" => Self::n_log_alpha(num("alpha", 1.0)),
            "moment" => Self::moment(num("alpha", 1.0), num("nodes", 256.0) as usize),
            "poly_shift" => Self::poly_shift(num("exponent", 2.0)),
            "geometric" => Self::geometric(num("ratio", 2.0)),
            other => Err(WeightError::UnknownId(other.to_string())),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Short human-readable id, stable across runs (used in CSV headers).
    pub fn describe(&self) -> String {
        match &self.kind {
            WeightKind::Constant => "constant".into(),
            WeightKind::Parity { gamma, gamma_prime } => {
                format!("parity(gamma={gamma},gamma_prime={gamma_prime})")
            }
            WeightKind::ExpSqrt => "exp_sqrt".into(),
            WeightKind::ExpNOverLog => "exp_n_over_log".into(),
            WeightKind::Zorboska => "zorboska".into(),
            WeightKind::Sigma => "sigma".into(),
            WeightKind::NLogAlpha { alpha } => format!("n_log_alpha(alpha={alpha})"),
            WeightKind::Moment { alpha, nodes } => format!("moment(alpha={alpha},nodes={nodes})"),
            WeightKind::PolyShift { exponent } => format!("poly_shift(exponent={exponent})"),
            WeightKind::Geometric { ratio } => format!("geometric(ratio={ratio})"),
        }
    }

    fn compute_log(&self, i: usize, prev: &[f64]) -> f64 {
        match &self.kind {
            WeightKind::Constant => 0.0,
            WeightKind::Parity { gamma, gamma_prime } => {
                if i < 2 {
                    0.0
                } else if i % 2 == 0 {
                    gamma * (i as f64).ln()
                } else {
                    gamma_prime * (i as f64).ln()
                }
            }
            WeightKind::ExpSqrt => (i as f64).sqrt(),
            WeightKind::ExpNOverLog => {
                if i < 2 {
                    0.0
                } else {
                    i as f64 / (i as f64).ln()
                }
            }
            WeightKind::Zorboska => {
                let ln9 = 9f64.ln();
                if i <= 3 {
                    ln9
                } else {
                    let j = i - 1;
                    let mut mk = 3usize;
                    while mk * 3 <= j {
                        mk *= 3;
                    }
                    let mkf = mk as f64;
                    let step = if j < 2 * mk {
                        3.0 * mkf.ln() / mkf
                    } else {
                        (ln9 - 3.0 * mkf.ln()) / mkf
                    };
                    prev[j] + step
                }
            }
            WeightKind::Sigma => i as f64 / sigma_level(i) as f64,
            WeightKind::NLogAlpha { alpha } => {
                if i < 2 {
                    0.0
                } else {
                    let n = i as f64;
                    n.ln() + alpha * n.ln().ln()
                }
            }
            WeightKind::Moment { alpha, nodes } => {
                if i < 2 {
                    0.0
                } else {
                    let g = moment_gamma(*alpha, i, *nodes)
                        .expect("moment parameters validated at construction");
                    2.0 * (i as f64).ln() + g.value.ln()
                }
            }
            WeightKind::PolyShift { exponent } => exponent * (i as f64 + 1.0).ln(),
            WeightKind::Geometric { ratio } => i as f64 * ratio.ln(),
        }
    }

    fn extend_to(&self, n: usize) {
        let mut guard = self.logs.write().unwrap();
        while guard.len() <= n {
            let i = guard.len();
            let v = self.compute_log(i, &guard);
            debug_assert!(v.is_finite(), "log weight must be finite at {i}");
            guard.push(v);
        }
    }

    /// log β_n (memoized).
    pub fn log_beta(&self, n: usize) -> f64 {
        {
            let guard = self.logs.read().unwrap();
            if n < guard.len() {
                return guard[n];
            }
        }
        self.extend_to(n);
        self.logs.read().unwrap()[n]
    }

    /// β_n in the linear domain; may overflow to `inf` for fast weights.
    pub fn beta(&self, n: usize) -> f64 {
        self.log_beta(n).exp()
    }

    /// Owned copy of `[log β_0, …, log β_n]`, taking the lock once.
    /// Quadratic scans should use this instead of per-index calls.
    pub fn log_betas(&self, n: usize) -> Vec<f64> {
        self.extend_to(n);
        self.logs.read().unwrap()[..=n].to_vec()
    }

    /// log β_{m+n} − log β_m − log β_n.
    ///
    /// For the `sigma` family this is evaluated exactly: the three terms are
    /// rationals with denominators σ ≤ 40 at any desk-scale index, so the
    /// defect is computed as an integer combination over the lcm of the three
    /// denominators and divided once. In particular a defect that is
    /// mathematically zero comes back as exactly `0.0` (so `exp` of it is
    /// exactly `1.0`), and sign decisions are rigorous. All other families
    /// use the plain floating-point difference.
    pub fn log_submult_defect(&self, m: usize, n: usize) -> f64 {
        if let WeightKind::Sigma = self.kind {
            let (sm, sn, ss) = (
                sigma_level(m) as i64,
                sigma_level(n) as i64,
                sigma_level(m + n) as i64,
            );
            let l = lcm(lcm(sm, sn), ss);
            let scaled = (m + n) as i64 * (l / ss) - m as i64 * (l / sm) - n as i64 * (l / sn);
            scaled as f64 / l as f64
        } else {
            self.log_beta(m + n) - self.log_beta(m) - self.log_beta(n)
        }
    }
}

/// σ(n): 1 for n = 0, otherwise the k with 3^{k−1} ≤ n < 3^k.
pub fn sigma_level(n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    let mut k = 1usize;
    let mut pow = 3usize;
    while n >= pow {
        k += 1;
        pow *= 3;
    }
    k
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// The sequence B_n = Σ_{k=0}^{n} 1/(β_k β_{n−k}), stored as log values.
pub struct BSeq {
    log_values: Vec<f64>,
}

impl BSeq {
    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    pub fn log_value(&self, n: usize) -> f64 {
        self.log_values[n]
    }

    /// Linear value; may overflow/underflow for extreme weights.
    pub fn value(&self, n: usize) -> f64 {
        self.log_values[n].exp()
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }
}

/// B_0 … B_N by direct convolution in the log domain.
///
/// The k ↔ n−k symmetry is folded (each off-diagonal pair contributes one
/// term shifted by ln 2), which halves the work and makes the result exactly
/// invariant under reversing the weight prefix.
pub fn bn_sequence(w: &WeightSequence, n_max: usize) -> BSeq {
    let logs = w.log_betas(n_max);
    let ln2 = std::f64::consts::LN_2;
    let mut buf: Vec<f64> = Vec::with_capacity(n_max / 2 + 1);
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        buf.clear();
        for k in 0..=n / 2 {
            let t = -(logs[k] + logs[n - k]);
            buf.push(if 2 * k == n { t } else { t + ln2 });
        }
        out.push(log_sum_exp(&buf));
    }
    BSeq { log_values: out }
}

/// A supremum over an index range, reported in both domains.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupReport {
    pub log_sup: f64,
    /// exp(log_sup); may be `inf`.
    pub sup: f64,
    pub argmax: usize,
}

fn sup_report(log_terms: impl Iterator<Item = (usize, f64)>) -> SupReport {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0usize;
    for (n, t) in log_terms {
        if t > best {
            best = t;
            arg = n;
        }
    }
    SupReport {
        log_sup: best,
        sup: best.exp(),
        argmax: arg,
    }
}

/// sup_{0 ≤ n ≤ N} β_n B_n.
pub fn bnbeta_sup(w: &WeightSequence, n_max: usize) -> SupReport {
    let logs = w.log_betas(n_max);
    let b = bn_sequence(w, n_max);
    sup_report((0..=n_max).map(|n| (n, logs[n] + b.log_value(n))))
}

/// sup_{1 ≤ n ≤ N} β_n B_n / n.
pub fn bnbeta_n_ratio(w: &WeightSequence, n_max: usize) -> SupReport {
    let logs = w.log_betas(n_max);
    let b = bn_sequence(w, n_max);
    sup_report((1..=n_max).map(|n| (n, logs[n] + b.log_value(n) - (n as f64).ln())))
}

/// A partial sum kept in both domains (`value` may overflow to `inf`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartialSumReport {
    pub log_value: f64,
    pub value: f64,
}

/// Σ_{n=0}^{N} β_n B_n², the quadratic aggregate whose convergence is a
/// necessary condition in the convolution-algebra criteria.
pub fn bnbeta2_partial(w: &WeightSequence, n_max: usize) -> PartialSumReport {
    let terms = bnbeta2_log_terms(w, n_max);
    let log_value = log_sum_exp(&terms);
    PartialSumReport {
        log_value,
        value: log_value.exp(),
    }
}

/// log(β_n B_n²) for n = 0..=N; shared by the partial sum and by tail-share
/// diagnostics in the experiments.
pub fn bnbeta2_log_terms(w: &WeightSequence, n_max: usize) -> Vec<f64> {
    let logs = w.log_betas(n_max);
    let b = bn_sequence(w, n_max);
    (0..=n_max)
        .map(|n| logs[n] + 2.0 * b.log_value(n))
        .collect()
}

/// Two-sided comparability constants of β over the window m ∈ [n/2, 2n].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OscillationReport {
    pub range_max: usize,
    /// Largest c with c β_n ≤ β_m over the window (the min ratio found).
    pub c_best: f64,
    /// Smallest C with β_m ≤ C β_n (the max ratio found).
    pub big_c_best: f64,
    /// (n, m) attaining the min ratio.
    pub witness_min: (usize, usize),
    /// (n, m) attaining the max ratio.
    pub witness_max: (usize, usize),
    /// Whether big_c_best / c_best stayed within the supplied cap.
    pub is_slowly_oscillating: bool,
}

/// Scan β_m/β_n over all 0 ≤ n ≤ N, ⌈n/2⌉ ≤ m ≤ min(2n, N).
pub fn slow_oscillation_constants(
    w: &WeightSequence,
    n_max: usize,
    ratio_cap: f64,
) -> OscillationReport {
    let logs = w.log_betas(n_max);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut wmin = (0usize, 0usize);
    let mut wmax = (0usize, 0usize);
    for n in 0..=n_max {
        let m_lo = n.div_ceil(2);
        let m_hi = (2 * n).min(n_max);
        for m in m_lo..=m_hi {
            let r = logs[m] - logs[n];
            if r < lo {
                lo = r;
                wmin = (n, m);
            }
            if r > hi {
                hi = r;
                wmax = (n, m);
            }
        }
    }
    OscillationReport {
        range_max: n_max,
        c_best: lo.exp(),
        big_c_best: hi.exp(),
        witness_min: wmin,
        witness_max: wmax,
        is_slowly_oscillating: (hi - lo).exp() <= ratio_cap,
    }
}

/// sup_{n ≤ m ≤ N} β_m / β_n — the essential-decrease constant. Equals 1 for
/// non-increasing weights and blows up for increasing ones.
pub fn essential_decrease_constant(w: &WeightSequence, n_max: usize) -> f64 {
    let logs = w.log_betas(n_max);
    let mut suffix_max = f64::NEG_INFINITY;
    let mut best = f64::NEG_INFINITY;
    for n in (0..=n_max).rev() {
        if logs[n] > suffix_max {
            suffix_max = logs[n];
        }
        let d = suffix_max - logs[n];
        if d > best {
            best = d;
        }
    }
    best.exp()
}

/// Submultiplicativity constant over a finite range.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubmultReport {
    pub range_max: usize,
    /// sup_{m+n ≤ N} β_{m+n}/(β_m β_n), in the linear domain.
    pub c_sub: f64,
    pub log_c_sub: f64,
    pub witness: (usize, usize),
}

/// sup over m + n ≤ N of the submultiplicativity defect, exact for the
/// `sigma` family (see [`WeightSequence::log_submult_defect`]).
pub fn submult_constant(w: &WeightSequence, n_max: usize) -> SubmultReport {
    w.log_betas(n_max); // one memo fill instead of many small ones
    let mut best = f64::NEG_INFINITY;
    let mut witness = (0usize, 0usize);
    for m in 0..=n_max / 2 {
        for n in m..=n_max - m {
            let d = w.log_submult_defect(m, n);
            if d > best {
                best = d;
                witness = (m, n);
            }
        }
    }
    SubmultReport {
        range_max: n_max,
        c_sub: best.exp(),
        log_c_sub: best,
        witness,
    }
}

/// Σ_{n=0}^{N} 1/β_n with compensated accumulation.
pub fn reciprocal_partial_sum(w: &WeightSequence, n_max: usize) -> f64 {
    let logs = w.log_betas(n_max);
    let mut acc = KahanSum::new();
    for &l in &logs {
        acc.add((-l).exp());
    }
    acc.value()
}

/// β_n^{1/n} for n = 1..=N (index 0 holds β_0 by convention, so the vector
/// aligns with weight indices).
pub fn root_sequence(w: &WeightSequence, n_max: usize) -> Vec<f64> {
    let logs = w.log_betas(n_max);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(logs[0].exp());
    for (n, &l) in logs.iter().enumerate().skip(1) {
        out.push((l / n as f64).exp());
    }
    out
}

/// The defect α_{n,k} = n/log n − k/log k − (n−k)/log(n−k) of the weight
/// log β = n/log n, for 2 ≤ k ≤ n − 2.
pub fn nlog_alpha_term(n: usize, k: usize) -> f64 {
    debug_assert!(k >= 2 && k + 2 <= n);
    let f = |m: usize| m as f64 / (m as f64).ln();
    f(n) - f(k) - f(n - k)
}

/// Σ_{k=2}^{⌊n/2⌋} exp(α_{n,k}); empty (0) below n = 4.
pub fn nlog_tail_sum(n: usize) -> f64 {
    let mut acc = KahanSum::new();
    for k in 2..=n / 2 {
        acc.add(nlog_alpha_term(n, k).exp());
    }
    acc.value()
}

/// The large-k part Σ_{k=⌈√n⌉}^{⌊n/2⌋} exp(α_{n,k}) of [`nlog_tail_sum`].
pub fn nlog_largek_sum(n: usize) -> f64 {
    let mut k0 = (n as f64).sqrt().ceil() as usize;
    if k0 < 2 {
        k0 = 2;
    }
    let mut acc = KahanSum::new();
    for k in k0..=n / 2 {
        acc.add(nlog_alpha_term(n, k).exp());
    }
    acc.value()
}

/// Closed-form majorant (n/2)·exp(−√n log 2 / (log n (log n − log 2))) for
/// the large-k part: at most n/2 terms, each bounded through the concavity
/// of m ↦ m/log m past the √n threshold.
pub fn nlog_largek_majorant(n: usize) -> f64 {
    let nf = n as f64;
    let ln = nf.ln();
    let ln2 = std::f64::consts::LN_2;
    0.5 * nf * (-nf.sqrt() * ln2 / (ln * (ln - ln2))).exp()
}

/// The moment coefficient γ_n(α) = ∫_0^1 t^{n−1} ω(t) dt with
/// ω(t) = (log⁺(1/t))^α, computed after the substitution t = e^{−y/n} as
/// (1/n)∫_0^U e^{−y} (log(n/y))_+^α dy. For α > 0 the integrand vanishes
/// past y = n, so U = min(n, 50); for α = 0, ω ≡ 1 everywhere and U = 50.
/// Either way the cutoff at 50 discards a tail below e^{−50} of the
/// integrand mass, so γ_n(0) = 1/n to ~10⁻²² relative.
///
/// `nodes` sizes the quadrature effort (initial panels and budget); the
/// result reports the estimated error and convergence flag of the adaptive
/// rule, scaled by 1/n like the value.
pub fn moment_gamma(alpha: f64, n: usize, nodes: usize) -> Result<QuadResult, WeightError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(WeightError::InvalidParameter(format!(
            "moment_gamma needs alpha in [0, 1], got {alpha}"
        )));
    }
    if n < 2 {
        return Err(WeightError::InvalidParameter(format!(
            "moment_gamma needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    let up = if alpha == 0.0 { 50.0 } else { nf.min(50.0) };
    let params = QuadParams {
        rel_tol: 1e-11,
        abs_tol: 1e-300,
        initial_panels: (nodes / quad::PANEL_POINTS).max(8),
        max_evals: nodes.max(64) * 512,
    };
    let integrand = move |y: f64| -> f64 {
        let damp = (-y).exp();
        if alpha == 0.0 {
            return damp;
        }
        let t = (nf / y).ln();
        if t <= 0.0 {
            0.0
        } else {
            damp * t.powf(alpha)
        }
    };
    let r = quad::integrate(integrand, 0.0, up, &params);
    Ok(QuadResult {
        value: r.value / nf,
        err_est: r.err_est / nf,
        evals: r.evals,
        converged: r.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values in this module were produced by an independent
    // implementation (adaptive quadrature + 64-bit log-domain convolutions)
    // and are frozen here; tolerances reflect cross-implementation rounding
    // only.

    fn rel_close(got: f64, want: f64, tol: f64) -> bool {
        (got - want).abs() <= tol * want.abs().max(1e-300)
    }

    #[test]
    fn constant_is_one() {
        let w = WeightSequence::constant();
        assert_eq!(w.beta(0), 1.0);
        assert_eq!(w.beta(5), 1.0);
        assert_eq!(w.log_beta(4096), 0.0);
    }

    #[test]
    fn parity_values_and_validation() {
        let w = WeightSequence::parity(4.0, 3.0).unwrap();
        assert_eq!(w.beta(0), 1.0);
        assert_eq!(w.beta(1), 1.0);
        assert!(rel_close(w.beta(6), 1296.0, 1e-14));
        assert!(rel_close(w.beta(5), 125.0, 1e-14));
        // gamma' must exceed 1, sit below gamma, and satisfy 2gamma' > gamma+1
        assert!(WeightSequence::parity(4.0, 0.9).is_err());
        assert!(WeightSequence::parity(3.0, 3.5).is_err());
        assert!(WeightSequence::parity(4.0, 2.2).is_err());
    }

    #[test]
    fn exp_sqrt_log_is_sqrt() {
        let w = WeightSequence::exp_sqrt();
        assert_eq!(w.log_beta(9), 3.0);
        assert_eq!(w.log_beta(4096), 64.0);
    }

    #[test]
    fn exp_n_over_log_values() {
        let w = WeightSequence::exp_n_over_log();
        assert_eq!(w.beta(0), 1.0);
        assert_eq!(w.beta(1), 1.0);
        let want = 4.0 / 4f64.ln();
        assert_eq!(w.log_beta(4), want);
    }

    #[test]
    fn zorboska_anchors() {
        let w = WeightSequence::zorboska();
        let ln3 = 3f64.ln();
        for k in 1..=7usize {
            let mk = 3usize.pow(k as u32);
            let got = w.log_beta(mk);
            assert!(
                (got - 2.0 * k as f64 * ln3).abs() < 1e-12,
                "beta at 3^{k}: log {got}"
            );
            if 2 * mk <= 3usize.pow(7) {
                let got2 = w.log_beta(2 * mk);
                assert!(
                    (got2 - 5.0 * k as f64 * ln3).abs() < 1e-12,
                    "beta at 2*3^{k}: log {got2}"
                );
            }
        }
        // base plateau and first step
        assert!(rel_close(w.beta(2), 9.0, 1e-14));
        assert!(rel_close(w.beta(4), 27.0, 1e-13));
    }

    #[test]
    fn zorboska_quadratic_floor_and_recip_sum() {
        let w = WeightSequence::zorboska();
        let n_max = 3usize.pow(7);
        let logs = w.log_betas(n_max);
        let floor = (3..=n_max)
            .map(|n| logs[n] - 2.0 * (n as f64).ln())
            .fold(f64::INFINITY, f64::min);
        assert!(floor.exp() > 0.999999, "quadratic floor {}", floor.exp());
        let s = reciprocal_partial_sum(&w, n_max);
        assert!(rel_close(s, 0.5447684889852741, 1e-12), "sum {s}");
    }

    #[test]
    fn sigma_levels_and_values() {
        assert_eq!(sigma_level(0), 1);
        assert_eq!(sigma_level(1), 1);
        assert_eq!(sigma_level(2), 1);
        assert_eq!(sigma_level(3), 2);
        assert_eq!(sigma_level(8), 2);
        assert_eq!(sigma_level(9), 3);
        assert_eq!(sigma_level(26), 3);
        assert_eq!(sigma_level(27), 4);
        let w = WeightSequence::sigma();
        assert_eq!(w.log_beta(2), 2.0);
        assert_eq!(w.log_beta(3), 1.5);
        assert_eq!(w.log_beta(9), 3.0);
    }

    #[test]
    fn sigma_defect_uses_exact_arithmetic() {
        let w = WeightSequence::sigma();
        // sigma(3) = sigma(7) = 2, sigma(10) = 3: defect = 10/3 - 3/2 - 7/2 = -5/3.
        let exact = w.log_submult_defect(3, 7);
        assert_eq!(exact, -5.0 / 3.0);
        // The naive float path rounds differently — that is the reason the
        // integer route exists.
        let naive = w.log_beta(10) - w.log_beta(3) - w.log_beta(7);
        assert_ne!(naive, exact);
        assert!((naive - exact).abs() < 1e-14);
        // Same level on both sides and on the sum: defect is exactly zero.
        assert_eq!(w.log_submult_defect(10, 11), 0.0); // sigma = 3 for 10, 11, 21
        // Never positive on a broad sample.
        for m in 0..200 {
            for n in 0..200 {
                assert!(w.log_submult_defect(m, n) <= 0.0, "defect > 0 at ({m},{n})");
            }
        }
    }

    #[test]
    fn n_log_alpha_and_moment_reject_bad_alpha() {
        assert!(WeightSequence::n_log_alpha(1.5).is_err());
        assert!(WeightSequence::n_log_alpha(-0.1).is_err());
        assert!(WeightSequence::moment(2.0, 64).is_err());
        let w = WeightSequence::n_log_alpha(1.0).unwrap();
        assert!(rel_close(w.beta(2), 2.0 * 2f64.ln(), 1e-14));
    }

    #[test]
    fn poly_shift_and_geometric() {
        let w = WeightSequence::poly_shift(2.0).unwrap();
        assert!(rel_close(w.beta(3), 16.0, 1e-14));
        let g = WeightSequence::geometric(0.5).unwrap();
        assert_eq!(g.log_beta(4), 4.0 * 0.5f64.ln());
        assert!(WeightSequence::geometric(0.0).is_err());
        assert!(WeightSequence::poly_shift(f64::NAN).is_err());
    }

    #[test]
    fn from_spec_round_trip() {
        let p = serde_json::json!({"gamma": 4.0, "gamma_prime": 3.0});
        let w = WeightSequence::from_spec("parity", &p).unwrap();
        assert!(matches!(w.kind(), WeightKind::Parity { .. }));
        assert!(WeightSequence::from_spec("no_such_family", &serde_json::json!({})).is_err());
        // defaults fill in when params are absent
        let w2 = WeightSequence::from_spec("n_log_alpha", &serde_json::json!({})).unwrap();
        assert!(matches!(w2.kind(), WeightKind::NLogAlpha { alpha } if *alpha == 1.0));
    }

    #[test]
    fn bn_constant_weight_is_n_plus_one() {
        let w = WeightSequence::constant();
        let b = bn_sequence(&w, 64);
        for n in 0..=64usize {
            assert!(
                rel_close(b.value(n), (n + 1) as f64, 1e-13),
                "B_{n} = {}",
                b.value(n)
            );
        }
    }

    #[test]
    fn bn_matches_brute_force() {
        // Direct linear-domain sums for a weight with moderate range.
        let w = WeightSequence::parity(4.0, 3.0).unwrap();
        let b = bn_sequence(&w, 40);
        for n in [0usize, 1, 2, 7, 20, 40] {
            let mut direct = 0.0;
            for k in 0..=n {
                direct += 1.0 / (w.beta(k) * w.beta(n - k));
            }
            assert!(
                rel_close(b.value(n), direct, 1e-12),
                "B_{n}: {} vs {direct}",
                b.value(n)
            );
        }
    }

    #[test]
    fn bn_geometric_closed_form() {
        // beta = 2^n gives 1/(beta_k beta_{n-k}) = 2^{-n}: B_n = (n+1) 2^{-n}.
        let w = WeightSequence::geometric(2.0).unwrap();
        let b = bn_sequence(&w, 32);
        for n in 0..=32usize {
            let want = (n + 1) as f64 / 2f64.powi(n as i32);
            assert!(rel_close(b.value(n), want, 1e-13));
        }
    }

    #[test]
    fn bnbeta_sup_for_shifted_square() {
        // beta_n = (n+1)^2: beta_n B_n peaks at n = 19 and stabilizes there.
        let w = WeightSequence::poly_shift(2.0).unwrap();
        let r = bnbeta_sup(&w, 200);
        assert_eq!(r.argmax, 19);
        assert!(rel_close(r.sup, 3.5171067864343666, 1e-11), "sup {}", r.sup);
    }

    #[test]
    fn bnbeta_n_ratio_constant_weight() {
        // beta_n B_n / n = (n+1)/n, maximal at n = 1.
        let w = WeightSequence::constant();
        let r = bnbeta_n_ratio(&w, 64);
        assert_eq!(r.argmax, 1);
        assert!(rel_close(r.sup, 2.0, 1e-13));
    }

    #[test]
    fn oscillation_constant_weight_is_tight() {
        let w = WeightSequence::constant();
        let r = slow_oscillation_constants(&w, 128, 4.0);
        assert_eq!(r.c_best, 1.0);
        assert_eq!(r.big_c_best, 1.0);
        assert!(r.is_slowly_oscillating);
    }

    #[test]
    fn oscillation_separates_families() {
        // n (log n)^1 doubles like n does: two-sided constants stay near 16
        // on [0, 512]. exp(sqrt n) drifts without bound.
        let tame = WeightSequence::n_log_alpha(1.0).unwrap();
        let r = slow_oscillation_constants(&tame, 512, 16.5);
        assert!(r.is_slowly_oscillating, "ratio {}", r.big_c_best / r.c_best);
        let wild = WeightSequence::exp_sqrt();
        let r2 = slow_oscillation_constants(&wild, 512, 16.5);
        assert!(!r2.is_slowly_oscillating);
        assert!(r2.big_c_best / r2.c_best > 1e4);
    }

    #[test]
    fn essential_decrease_examples() {
        assert_eq!(essential_decrease_constant(&WeightSequence::constant(), 64), 1.0);
        let dec = WeightSequence::geometric(0.5).unwrap();
        assert_eq!(essential_decrease_constant(&dec, 64), 1.0);
        let inc = WeightSequence::geometric(2.0).unwrap();
        assert!(essential_decrease_constant(&inc, 64) > 1e18);
    }

    #[test]
    fn submult_sigma_is_exactly_one() {
        let w = WeightSequence::sigma();
        let r = submult_constant(&w, 120);
        assert_eq!(r.c_sub, 1.0);
        assert_eq!(r.log_c_sub, 0.0);
    }

    #[test]
    fn submult_zorboska_exceeds_one() {
        // beta_6 = 243 > beta_3^2 = 81.
        let w = WeightSequence::zorboska();
        let r = submult_constant(&w, 10);
        assert!(r.c_sub >= 3.0 - 1e-12, "c_sub {}", r.c_sub);
    }

    #[test]
    fn root_sequence_sigma_trends_down() {
        let w = WeightSequence::sigma();
        let n = 3usize.pow(7);
        let roots = root_sequence(&w, n);
        // beta_n^{1/n} = e^{1/sigma(n)}: e at n=1, e^{1/7} at n=3^7-ish.
        assert!(rel_close(roots[1], std::f64::consts::E, 1e-14));
        let want_last = (1.0 / 8.0f64).exp(); // sigma(3^7) = 8
        assert!(rel_close(roots[n], want_last, 1e-13));
        assert!(roots[n] < roots[1]);
        assert!(roots[n] > 1.0, "liminf beta^(1/n) must stay >= 1");
    }

    #[test]
    fn nlog_tail_small_values() {
        assert_eq!(nlog_tail_sum(3), 0.0);
        assert!(rel_close(nlog_tail_sum(4), 0.055833005849862345, 1e-13));
        assert!(rel_close(nlog_tail_sum(6), 0.20963603083913857, 1e-13));
        assert!(rel_close(nlog_tail_sum(10), 0.5340012921194777, 1e-13));
    }

    #[test]
    fn nlog_largek_piece_decays_under_majorant() {
        for n in [400usize, 2500] {
            let piece = nlog_largek_sum(n);
            assert!(piece <= nlog_largek_majorant(n), "majorant fails at {n}");
        }
        assert!(rel_close(nlog_largek_sum(400), 0.358740158957367, 1e-12));
        assert!(rel_close(nlog_largek_sum(2500), 0.010868170690990928, 1e-12));
        assert!(nlog_largek_sum(2500) < nlog_largek_sum(400));
    }

    #[test]
    fn moment_gamma_alpha_zero_is_reciprocal() {
        for n in [10usize, 100, 10000] {
            let g = moment_gamma(0.0, n, 256).unwrap();
            assert!(g.converged);
            let want = 1.0 / n as f64;
            assert!(rel_close(g.value, want, 1e-10), "n={n}: {}", g.value);
        }
    }

    #[test]
    fn moment_gamma_alpha_one_reference_values() {
        let cases = [
            (10usize, 0.28798049148645055),
            (100, 0.0518238585088963),
            (10000, 0.0009787556036877714),
        ];
        for (n, want) in cases {
            let g = moment_gamma(1.0, n, 256).unwrap();
            assert!(g.converged, "n={n} did not converge");
            assert!(rel_close(g.value, want, 1e-9), "n={n}: {}", g.value);
        }
    }

    #[test]
    fn moment_gamma_tracks_log_over_n() {
        let g = moment_gamma(1.0, 10000, 256).unwrap();
        let ratio = g.value * 10000.0 / 10000f64.ln();
        assert!(rel_close(ratio, 1.0626703945337128, 1e-7), "ratio {ratio}");
    }

    #[test]
    fn moment_gamma_rejects_bad_input() {
        assert!(moment_gamma(1.5, 10, 64).is_err());
        assert!(moment_gamma(0.5, 1, 64).is_err());
    }

    #[test]
    fn moment_weight_matches_direct_gamma() {
        let w = WeightSequence::moment(1.0, 128).unwrap();
        let g = moment_gamma(1.0, 10, 128).unwrap();
        let want = 100.0 * g.value;
        assert!(rel_close(w.beta(10), want, 1e-12));
        assert_eq!(w.beta(0), 1.0);
        assert_eq!(w.beta(1), 1.0);
    }

    #[test]
    fn log_betas_prefix_is_consistent() {
        let w = WeightSequence::exp_n_over_log();
        let pre = w.log_betas(50);
        assert_eq!(pre.len(), 51);
        for (i, &v) in pre.iter().enumerate() {
            assert_eq!(v, w.log_beta(i));
        }
    }
}
