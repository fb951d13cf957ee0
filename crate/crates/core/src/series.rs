//! Truncated power series with complex coefficients, Cauchy products,
//! composition, evaluation, and the weighted norms
//! ‖f‖_{h^p(β)}^p = Σ |a_n|^p β_n (with ‖f‖_{h^∞(β)} = sup |a_n| β_n).
//!
//! A series carries an `exact_poly` flag: an exact polynomial is fully known,
//! while a truncation is only trusted up to its stored bound. Products track
//! this honestly — multiplying two truncations yields a series trusted only
//! up to the smaller bound, while exact factors never shrink the reliable
//! window. Norms of exact polynomials are therefore exact sums, not
//! approximations from below.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::util::{log_sum_exp, KahanSum};
use crate::weights::WeightSequence;

#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    #[error("monomial degree {degree} exceeds the truncation bound {bound}")]
    MonomialOutOfRange { degree: usize, bound: usize },
    #[error("indicator block [{lo}, {hi}) is empty")]
    EmptyBlock { lo: usize, hi: usize },
    #[error("operation needs an exact polynomial, got a truncation")]
    NotExactPolynomial,
    #[error("inner series is truncated at {bound}, need at least {needed}")]
    TruncationTooShort { bound: usize, needed: usize },
    #[error("norm exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("denominator norm is zero")]
    ZeroNorm,
}

/// Coefficients a_0 … a_B of Σ a_n zⁿ, plus whether they describe the whole
/// function (`exact_poly`) or a truncation trusted only up to B.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
    exact_poly: bool,
}

impl TruncatedSeries {
    /// Wrap explicit coefficients. The vector must be non-empty and finite.
    pub fn from_coeffs(coeffs: Vec<Complex64>, exact_poly: bool) -> Self {
        assert!(!coeffs.is_empty(), "a series stores at least a_0");
        debug_assert!(
            coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            "series coefficients must be finite"
        );
        Self { coeffs, exact_poly }
    }

    pub fn from_real(coeffs: &[f64], exact_poly: bool) -> Self {
        Self::from_coeffs(
            coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            exact_poly,
        )
    }

    pub fn zero(bound: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); bound + 1],
            exact_poly: true,
        }
    }

    /// Highest stored index (the truncation bound B).
    pub fn bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// a_n, zero beyond the stored bound.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_exact_poly(&self) -> bool {
        self.exact_poly
    }

    /// Index of the highest nonzero coefficient, if any.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .rposition(|c| c.re != 0.0 || c.im != 0.0)
    }

    /// Horner evaluation at z (meaningful on the disk for truncations).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    /// [re, im] pairs.
    coeffs: Vec<[f64; 2]>,
    exact_poly: bool,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SeriesRepr {
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
            exact_poly: self.exact_poly,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(d)?;
        if repr.coeffs.is_empty() {
            return Err(D::Error::custom("series needs at least one coefficient"));
        }
        Ok(TruncatedSeries {
            coeffs: repr
                .coeffs
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
            exact_poly: repr.exact_poly,
        })
    }
}

/// z^m as an exact polynomial stored up to `bound`.
pub fn monomial(m: usize, bound: usize) -> Result<TruncatedSeries, SeriesError> {
    if m > bound {
        return Err(SeriesError::MonomialOutOfRange { degree: m, bound });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); bound + 1];
    coeffs[m] = Complex64::new(1.0, 0.0);
    Ok(TruncatedSeries::from_coeffs(coeffs, true))
}

/// Σ_{n=lo}^{hi−1} zⁿ, the indicator polynomial of the integer block [lo, hi).
pub fn indicator_block(lo: usize, hi: usize) -> Result<TruncatedSeries, SeriesError> {
    if lo >= hi {
        return Err(SeriesError::EmptyBlock { lo, hi });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); hi];
    for c in coeffs.iter_mut().take(hi).skip(lo) {
        *c = Complex64::new(1.0, 0.0);
    }
    Ok(TruncatedSeries::from_coeffs(coeffs, true))
}

/// Cauchy product with a cap on the kept bound.
///
/// The natural bound is B_f + B_g for two exact polynomials; if either factor
/// is a truncation, coefficients are only reliable up to that factor's bound,
/// so the result keeps min over the truncated factors. The product is flagged
/// exact only when both factors are exact and nothing was cut by `cap`.
/// Convolutions longer than 1024 terms use compensated accumulation.
pub fn cauchy_product_capped(
    f: &TruncatedSeries,
    g: &TruncatedSeries,
    cap: usize,
) -> TruncatedSeries {
    let bf = f.bound();
    let bg = g.bound();
    let natural = bf + bg;
    let reliable = match (f.exact_poly, g.exact_poly) {
        (true, true) => natural,
        (true, false) => bg,
        (false, true) => bf,
        (false, false) => bf.min(bg),
    };
    let bound = reliable.min(cap);
    let exact = f.exact_poly && g.exact_poly && natural <= bound;
    let mut coeffs = Vec::with_capacity(bound + 1);
    for n in 0..=bound {
        let k_lo = n.saturating_sub(bg);
        let k_hi = n.min(bf);
        if k_hi - k_lo + 1 > 1024 {
            let mut re = KahanSum::new();
            let mut im = KahanSum::new();
            for k in k_lo..=k_hi {
                let t = f.coeffs[k] * g.coeffs[n - k];
                re.add(t.re);
                im.add(t.im);
            }
            coeffs.push(Complex64::new(re.value(), im.value()));
        } else {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in k_lo..=k_hi {
                acc += f.coeffs[k] * g.coeffs[n - k];
            }
            coeffs.push(acc);
        }
    }
    TruncatedSeries::from_coeffs(coeffs, exact)
}

/// Cauchy product at the natural reliable bound.
pub fn cauchy_product(f: &TruncatedSeries, g: &TruncatedSeries) -> TruncatedSeries {
    cauchy_product_capped(f, g, usize::MAX)
}

/// f^n by repeated Cauchy products (n = 0 gives the constant 1).
pub fn power(f: &TruncatedSeries, n: usize) -> TruncatedSeries {
    if n == 0 {
        return TruncatedSeries::from_real(&[1.0], true);
    }
    let mut acc = f.clone();
    for _ in 1..n {
        acc = cauchy_product(&acc, f);
    }
    acc
}

/// log ‖f‖_{h^p(β)}; `NEG_INFINITY` for the zero series. `p` may be
/// `f64::INFINITY` for the sup norm.
pub fn log_norm_hp_beta(f: &TruncatedSeries, p: f64, w: &WeightSequence) -> f64 {
    assert!(p >= 1.0 && !p.is_nan(), "norm exponent must be >= 1, got {p}");
    let logs = w.log_betas(f.bound());
    if p.is_infinite() {
        let mut best = f64::NEG_INFINITY;
        for (n, c) in f.coeffs().iter().enumerate() {
            let a = c.norm();
            if a > 0.0 {
                best = best.max(a.ln() + logs[n]);
            }
        }
        return best;
    }
    let terms: Vec<f64> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(n, c)| p * c.norm().ln() + logs[n])
        .collect();
    log_sum_exp(&terms) / p
}

/// ‖f‖_{h^p(β)} in the linear domain; can overflow to `inf` for fast weights.
pub fn norm_hp_beta(f: &TruncatedSeries, p: f64, w: &WeightSequence) -> f64 {
    log_norm_hp_beta(f, p, w).exp()
}

/// ‖fg‖ / (‖f‖ ‖g‖) in h²(β), for exact polynomials.
pub fn algebra_ratio(
    f: &TruncatedSeries,
    g: &TruncatedSeries,
    w: &WeightSequence,
) -> Result<f64, SeriesError> {
    if !f.is_exact_poly() || !g.is_exact_poly() {
        return Err(SeriesError::NotExactPolynomial);
    }
    let lf = log_norm_hp_beta(f, 2.0, w);
    let lg = log_norm_hp_beta(g, 2.0, w);
    if lf == f64::NEG_INFINITY || lg == f64::NEG_INFINITY {
        return Err(SeriesError::ZeroNorm);
    }
    let prod = cauchy_product(f, g);
    Ok((log_norm_hp_beta(&prod, 2.0, w) - lf - lg).exp())
}

/// Coefficients of f∘φ modulo z^{bound+1}, by Horner over the outer
/// polynomial. `f` must be exact; `φ` may be a truncation but then must be
/// stored at least up to `bound`.
pub fn compose_truncated(
    f: &TruncatedSeries,
    phi: &TruncatedSeries,
    bound: usize,
) -> Result<TruncatedSeries, SeriesError> {
    if !f.is_exact_poly() {
        return Err(SeriesError::NotExactPolynomial);
    }
    if !phi.is_exact_poly() && phi.bound() < bound {
        return Err(SeriesError::TruncationTooShort {
            bound: phi.bound(),
            needed: bound,
        });
    }
    let d = f.bound();
    let mut acc = TruncatedSeries::from_coeffs(vec![f.coeff(d)], true);
    for j in (0..d).rev() {
        let mut next = cauchy_product_capped(&acc, phi, bound);
        next.coeffs[0] += f.coeff(j);
        acc = next;
    }
    // Uniform postcondition: always report exactly `bound + 1` coefficients.
    let exact = acc.exact_poly;
    let mut coeffs = acc.coeffs;
    coeffs.resize(bound + 1, Complex64::new(0.0, 0.0));
    Ok(TruncatedSeries::from_coeffs(coeffs, exact))
}
