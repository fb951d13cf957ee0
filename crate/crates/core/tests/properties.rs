//! Randomized invariants: every algebraic identity the library relies on is
//! checked here against brute-force or closed-form oracles over generated
//! inputs, independently of the frozen-value unit tests.

use num_complex::Complex64;
use proptest::prelude::*;

use hplab::autom::{column_sums, osc_integral, ta_power_table, vdc_bound_check, RealPoly};
use hplab::experiments::{run_experiment, ExperimentRecord};
use hplab::opmat::{l2_opnorm, lp_column_lower, psi_hs_norm, psi_matrix, DenseMatrix};
use hplab::series::{cauchy_product, compose_truncated, log_norm_hp_beta, TruncatedSeries};
use hplab::util::KahanSum;
use hplab::weights::{bn_sequence, WeightSequence};

/// Proptest needs `Debug + Clone` values; the weight itself memoizes behind a
/// lock, so generate a picker and construct the weight in the test body.
#[derive(Debug, Clone)]
enum WeightPick {
    Constant,
    ExpSqrt,
    Sigma,
    Zorboska,
    Poly(f64),
    Geometric(f64),
    NLog(f64),
    Parity(f64),
}

impl WeightPick {
    fn build(&self) -> WeightSequence {
        match self {
            WeightPick::Constant => WeightSequence::constant(),
            WeightPick::ExpSqrt => WeightSequence::exp_sqrt(),
            WeightPick::Sigma => WeightSequence::sigma(),
            WeightPick::Zorboska => WeightSequence::zorboska(),
            WeightPick::Poly(e) => WeightSequence::poly_shift(*e).unwrap(),
            WeightPick::Geometric(r) => WeightSequence::geometric(*r).unwrap(),
            WeightPick::NLog(a) => WeightSequence::n_log_alpha(*a).unwrap(),
            WeightPick::Parity(g) => WeightSequence::parity(*g, g - 1.0).unwrap(),
        }
    }
}

fn weight_pick() -> impl Strategy<Value = WeightPick> {
    prop_oneof![
        Just(WeightPick::Constant),
        Just(WeightPick::ExpSqrt),
        Just(WeightPick::Sigma),
        Just(WeightPick::Zorboska),
        (0.0f64..3.0).prop_map(WeightPick::Poly),
        (0.5f64..2.0).prop_map(WeightPick::Geometric),
        (0.0f64..=1.0).prop_map(WeightPick::NLog),
        (3.1f64..5.0).prop_map(WeightPick::Parity),
    ]
}

fn complex_coeffs(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max_len)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

proptest! {
    /// Cauchy products agree with pointwise products inside the disk.
    #[test]
    fn product_evaluates_pointwise(
        fc in complex_coeffs(33),
        gc in complex_coeffs(33),
        theta in 0.0f64..std::f64::consts::TAU,
        r in 0.0f64..0.8,
    ) {
        let f = TruncatedSeries::from_coeffs(fc, true);
        let g = TruncatedSeries::from_coeffs(gc, true);
        let h = cauchy_product(&f, &g);
        let z = Complex64::from_polar(r, theta);
        let err = (h.eval(z) - f.eval(z) * g.eval(z)).norm();
        prop_assert!(err <= 1e-10, "pointwise product off by {err:e}");
    }

    /// Polynomial composition agrees with nested evaluation (an algebraic
    /// identity, so any evaluation point works).
    #[test]
    fn composition_evaluates_nested(
        fc in complex_coeffs(9),
        pc in complex_coeffs(4),
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let f = TruncatedSeries::from_coeffs(fc, true);
        let phi = TruncatedSeries::from_coeffs(pc, true);
        let h = compose_truncated(&f, &phi, 64).unwrap();
        let z = Complex64::from_polar(0.5, theta);
        let err = (h.eval(z) - f.eval(phi.eval(z))).norm();
        prop_assert!(err <= 1e-8, "composition off by {err:e}");
    }

    /// The log-domain convolution B_n matches a direct double loop.
    #[test]
    fn bn_matches_double_loop(pick in weight_pick(), n_max in 1usize..=64) {
        let w = pick.build();
        let b = bn_sequence(&w, n_max);
        let logs = w.log_betas(n_max);
        for n in 0..=n_max {
            let mut acc = KahanSum::new();
            for k in 0..=n {
                acc.add((-logs[k] - logs[n - k]).exp());
            }
            let rel = (b.value(n) / acc.value() - 1.0).abs();
            prop_assert!(rel <= 1e-11, "B_{n} off by {rel:e} for {pick:?}");
        }
    }

    /// The Schur-multiplier matrix is exactly symmetric by construction.
    #[test]
    fn psi_matrix_is_exactly_symmetric(
        pick in weight_pick(),
        u in prop::collection::vec(-2.0f64..2.0, 1..=40),
        dim in 2usize..=32,
    ) {
        let w = pick.build();
        let m = psi_matrix(&u, &w, dim).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                prop_assert!(
                    m.get(i, j) == m.get(j, i),
                    "asymmetry at ({i}, {j}) for {pick:?}"
                );
            }
        }
    }

    /// Frobenius norm of the multiplier matrix vs the weighted-sum identity,
    /// valid whenever the matrix covers the support of u.
    #[test]
    fn hs_identity_holds(
        pick in weight_pick(),
        mut u in prop::collection::vec(-2.0f64..2.0, 2..=40),
    ) {
        let last = u.len() - 1;
        if u[last] == 0.0 {
            u[last] = 1.0;
        }
        let w = pick.build();
        let hs = psi_hs_norm(&u, &w, u.len() + 8).unwrap();
        prop_assert!(hs.coverage_ok);
        let rel = (hs.direct / hs.via_identity - 1.0).abs();
        prop_assert!(rel <= 1e-10, "HS identity off by {rel:e} for {pick:?}");
    }

    /// The column lower bound never exceeds the certified operator-norm
    /// estimate at p = 2.
    #[test]
    fn column_lower_bounds_opnorm(
        entries in prop::collection::vec(-3.0f64..3.0, 1..=192),
        cols in 1usize..=12,
        seed in any::<u64>(),
    ) {
        let cols = cols.min(entries.len());
        let rows = entries.len() / cols;
        let m = DenseMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j]).unwrap();
        let lower = lp_column_lower(&m, 2.0).unwrap();
        let est = l2_opnorm(&m, 1e-12, 1000, seed);
        prop_assert!(
            lower <= est.value + est.residual + 1e-9,
            "column bound {lower} above estimate {} (+{})",
            est.value,
            est.residual
        );
    }

    /// Stationary-phase bound on generated quadratic and cubic phases whose
    /// derivative hypotheses hold by construction on [1, 2].
    #[test]
    fn vdc_bound_holds_on_polynomial_phases(
        c1 in 0.1f64..3.0,
        c2 in 0.5f64..6.0,
        c3 in 0.0f64..2.0,
    ) {
        // f' = 3 c3 x^2 + 2 c2 x + c1 is increasing and positive on [1, 2],
        // so delta = f'(1); f'' = 6 c3 x + 2 c2 peaks at x = 2.
        let phase = RealPoly::new(vec![0.0, c1, c2, c3]);
        let delta = 3.0 * c3 + 2.0 * c2 + c1;
        let m_bound = 12.0 * c3 + 2.0 * c2;
        let rep = vdc_bound_check(&phase, 1.0, 2.0, delta, m_bound, 2048).unwrap();
        prop_assert!(rep.quad_converged, "quadrature failed to converge");
        prop_assert!(
            rep.ok,
            "bound violated: lhs {} vs rhs {} (c = {c1}, {c2}, {c3})",
            rep.lhs,
            rep.rhs
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Each truncated power of the symbol carries unit coefficient mass.
    #[test]
    fn inner_powers_have_unit_mass(a in 0.05f64..0.75, n in 1usize..=24) {
        let t = ta_power_table(Complex64::new(a, 0.0), n, None).unwrap();
        let defect = t.parseval_defect(n);
        prop_assert!(defect <= 1e-10, "mass defect {defect:e} at a={a}, n={n}");
    }

    /// Column sums equal the h^p norm of the corresponding coefficient row:
    /// C_n * beta_n = ||T_a^n||^p.
    #[test]
    fn column_sum_matches_series_norm(
        a in 0.05f64..0.7,
        n in 1usize..=24,
        p in 1.0f64..3.0,
        pick in weight_pick(),
    ) {
        let w = pick.build();
        let az = Complex64::new(a, 0.0);
        let cap = hplab::autom::default_mmax(az, n);
        let c_n = column_sums(az, &w, p, cap, &[n]).unwrap().values[0].1;
        let row = ta_power_table(az, n, Some(cap)).unwrap().row_series(n);
        let log_norm_p = p * log_norm_hp_beta(&row, p, &w);
        let rel = ((log_norm_p - w.log_beta(n)).exp() / c_n - 1.0).abs();
        prop_assert!(rel <= 1e-10, "two-path column sum off by {rel:e} for {pick:?}");
    }

    /// Doubling the requested node budget moves the oscillatory integral by
    /// at most the advertised tolerance.
    #[test]
    fn osc_integral_stable_under_node_doubling(
        n in 1usize..=32,
        s in prop_oneof![Just(1.0f64), Just(2.0f64)],
        nodes in 64usize..=128,
    ) {
        let v1 = osc_integral(n, n, s, nodes).unwrap();
        let v2 = osc_integral(n, n, s, nodes * 2).unwrap();
        let diff = (v1.value - v2.value).abs();
        prop_assert!(diff <= 1e-8, "integral moved by {diff:e} under refinement");
    }
}

/// Records survive a JSON round trip with their content intact.
#[test]
fn record_round_trips_through_json() {
    let r = run_experiment("moment", None, Some(7)).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: ExperimentRecord = serde_json::from_str(&text).unwrap();
    assert!(back.content_equal(&r), "round trip changed the record");
    assert_eq!(back.wall_ms, r.wall_ms);
}

/// Same experiment, same seed: bit-for-bit identical records.
#[test]
fn seeded_experiments_reproduce() {
    let r1 = run_experiment("hankel", None, Some(42)).unwrap();
    let r2 = run_experiment("hankel", None, Some(42)).unwrap();
    assert!(r1.content_equal(&r2));
    let r3 = run_experiment("hankel", None, Some(43)).unwrap();
    assert!(!r1.content_equal(&r3), "seed must be part of the record");
}
