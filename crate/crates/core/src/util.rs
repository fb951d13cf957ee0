//! Small numeric helpers shared across the crate: compensated summation,
//! log-domain reductions, and least-squares slope fitting.

/// Kahan–Babuška compensated accumulator.
///
/// Used wherever a long sum must stay accurate to a few ulps (convolutions
/// past 1024 terms, Frobenius norms, quadrature panel totals).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum of a slice with compensation.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// log(exp(a) + exp(b)) without overflow, as `max + ln(1 + exp(min - max))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log Σ exp(terms[i]) with a max shift and compensated accumulation.
///
/// `NEG_INFINITY` entries are skipped; an empty (or all `-inf`) input yields
/// `NEG_INFINITY`, matching the empty sum.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let mut hi = f64::NEG_INFINITY;
    for &t in terms {
        debug_assert!(!t.is_nan(), "log_sum_exp received NaN");
        if t > hi {
            hi = t;
        }
    }
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = KahanSum::new();
    for &t in terms {
        if t != f64::NEG_INFINITY {
            acc.add((t - hi).exp());
        }
    }
    hi + acc.value().ln()
}

/// Least-squares slope of y against x (both already in the scale the caller
/// wants, e.g. logs for a power-law fit). Needs at least two distinct x.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Euclidean norm of a slice.
pub fn l2_norm(v: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in v {
        acc.add(x * x);
    }
    acc.value().sqrt()
}

/// Dot product of two slices of equal length.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = KahanSum::new();
    for i in 0..a.len() {
        acc.add(a[i] * b[i]);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-17);
        }
        let err = (acc.value() - (1.0 + 1e-13)).abs();
        assert!(err < 1e-16, "compensated sum off by {err:e}");
    }

    #[test]
    fn log_sum_exp_matches_direct_small() {
        let terms = [0.1f64, -0.3, 0.7, -2.0];
        let direct: f64 = terms.iter().map(|t| t.exp()).sum();
        assert!((log_sum_exp(&terms) - direct.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_handles_extreme_shift() {
        // exp(1000) + exp(990) overflows linearly; the shifted form must not.
        let got = log_sum_exp(&[1000.0, 990.0]);
        let want = 1000.0 + (-10.0f64).exp().ln_1p();
        assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn log_sum_exp_empty_is_neg_inf() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn slope_of_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.5, 4.0, 5.5, 7.0];
        let s = least_squares_slope(&x, &y).unwrap();
        assert!((s - 1.5).abs() < 1e-14);
    }

    #[test]
    fn slope_needs_two_points() {
        assert!(least_squares_slope(&[1.0], &[2.0]).is_none());
        assert!(least_squares_slope(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn log_add_exp_neg_inf_identity() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(log_add_exp(3.0, f64::NEG_INFINITY), 3.0);
    }
}
