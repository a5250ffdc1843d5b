use hessrad::asymptotics::*;
use hessrad::trajectory::{shoot, TrajectoryOptions};
use hessrad::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn profile(op: OperatorSpec) -> GProfile {
    GProfile::build(op, 32).unwrap()
}

fn operators() -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::sigma_k(3, 2).unwrap(),
        OperatorSpec::sigma_k(4, 4).unwrap(),
        OperatorSpec::hessian_quotient(4, 3, 1).unwrap(),
    ]
}

#[test]
fn mu_is_strictly_increasing() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for op in operators() {
        let p = profile(op);
        let lo = alpha_min(&p, &tol).unwrap();
        let hi = 5.0 * p.c_star();
        for _ in 0..20 {
            let a = rng.gen_range(lo..hi);
            let b = rng.gen_range(lo..hi);
            let (a, b) = (a.min(b), a.max(b));
            if b - a < 1e-6 || a <= p.floor() {
                continue;
            }
            let (ma, mb) = (mu(&p, a, &tol).unwrap(), mu(&p, b, &tol).unwrap());
            assert!(ma < mb, "{op}: mu({a}) = {ma} >= mu({b}) = {mb}");
        }
    }
}

#[test]
fn mu_grows_without_bound() {
    let tol = Tolerances::default();
    for op in operators() {
        let p = profile(op);
        let c = p.c_star();
        let m: Vec<f64> = [2.0, 5.0, 10.0]
            .iter()
            .map(|x| mu(&p, x * c, &tol).unwrap())
            .collect();
        assert!(m[0] < m[1] && m[1] < m[2]);
        assert!(m[2] - m[1] > m[1] - m[0], "{op}: {m:?}");
    }
}

#[test]
fn mu_vanishes_at_c_star() {
    let p = profile(OperatorSpec::sigma_k(5, 3).unwrap());
    assert_eq!(mu(&p, p.c_star(), &Tolerances::default()).unwrap(), 0.0);
}

#[test]
fn inverse_round_trip() {
    let tol = Tolerances::default();
    for op in operators() {
        let p = profile(op);
        let thr = threshold(&p, &tol).unwrap();
        let top = mu(&p, 10.0 * p.c_star(), &tol).unwrap();
        for i in 0..20 {
            let y = thr.mu_min + (top - thr.mu_min) * (i as f64 + 0.5) / 20.0;
            let alpha = mu_inverse(&p, &thr, y, &tol).unwrap();
            let back = mu(&p, alpha, &tol).unwrap();
            assert!(
                (back - y).abs() < 10.0 * tol.quad_tol,
                "{op}: y = {y}, got {back}"
            );
        }
    }
}

#[test]
fn inverse_rejects_targets_below_threshold() {
    let tol = Tolerances::default();
    let p = profile(OperatorSpec::sigma_k(3, 2).unwrap());
    let thr = threshold(&p, &tol).unwrap();
    let err = mu_inverse(&p, &thr, thr.mu_min - 1e-3, &tol).unwrap_err();
    assert!(matches!(err, Error::Range { .. }), "{err}");
    assert_eq!(
        mu_inverse(&p, &thr, thr.mu_min, &tol).unwrap(),
        thr.alpha_min
    );
}

#[test]
fn tail_term_absorbs_truncation() {
    let tol = 1e-9;
    for op in operators() {
        let p = profile(op);
        for x in [0.9, 1.5, 3.0] {
            let alpha = x * p.c_star();
            if alpha <= p.floor() {
                continue;
            }
            let base = TrajectoryOptions::default();
            let longer = TrajectoryOptions {
                tail_extension: 10f64.ln(),
                ..base
            };
            let a = shoot(&p, alpha, &base).unwrap();
            let b = shoot(&p, alpha, &longer).unwrap();
            assert!(b.t_switch() > a.t_switch() + 2.0);
            let (ma, mb) = (a.mu(tol).unwrap(), b.mu(tol).unwrap());
            assert!((ma - mb).abs() < tol, "{op} alpha={alpha}: {ma} vs {mb}");
        }
    }
}

#[test]
fn threshold_just_above_is_admissible() {
    let tol = Tolerances::default();
    for op in operators() {
        let p = profile(op);
        let thr = threshold(&p, &tol).unwrap();
        let c0 = thr.c0(0.0);
        let v = classify_existence(&p, &thr, 0.0, c0 + 1e-6, 1e-9, &tol).unwrap();
        let alpha = v.alpha.unwrap();
        assert!(v.exists && alpha >= thr.alpha_min);
        // μ − μ_min grows like (α − α_min)^k for σ_k, so α moves by about δ^{1/k}
        assert!(
            alpha - thr.alpha_min < 0.1 * p.c_star().max(1.0),
            "{op}: {alpha}"
        );
        let m = mu(&p, alpha, &tol).unwrap();
        assert!(
            (m - thr.mu_min - 1e-6).abs() < 10.0 * tol.quad_tol,
            "{op}: {m}"
        );
        if alpha > p.floor() {
            let tr = shoot(&p, alpha, &tol.trajectory()).unwrap();
            for i in 0..=200 {
                let r = 1e3f64.powf(i as f64 / 200.0);
                assert!(tr.w_at(r) > p.gamma0(), "{op}: W({r}) <= gamma0");
            }
        }
    }
}

#[test]
fn verdict_flips_at_the_threshold() {
    let tol = Tolerances::default();
    let p = profile(OperatorSpec::sigma_k(4, 2).unwrap());
    let thr = threshold(&p, &tol).unwrap();
    for b in [0.0, 1.0, -3.0] {
        let c0 = thr.c0(b);
        let below = classify_existence(&p, &thr, b, c0 - 1e-3, 1e-9, &tol).unwrap();
        let above = classify_existence(&p, &thr, b, c0 + 1e-3, 1e-9, &tol).unwrap();
        assert!(!below.exists && below.alpha.is_none());
        assert!(above.exists && above.alpha.is_some());
        assert!((above.margin - 1e-3).abs() < 1e-12);
    }
}

#[test]
fn two_dimensions_are_rejected() {
    // μ diverges for n = 2; the operator constructor refuses it up front
    assert!(matches!(
        OperatorSpec::sigma_k(2, 2),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn tolerances_are_range_checked() {
    let bad = Tolerances {
        ode_tol: 1e-3,
        ..Tolerances::default()
    };
    assert!(matches!(bad.validate(), Err(Error::Parameter(_))));
    let p = profile(OperatorSpec::sigma_k(3, 2).unwrap());
    assert!(mu(&p, 1.0, &bad).is_err());
}

#[test]
fn extrapolation_cases() {
    // geometric ratio 1/10 converges to 1
    let (lim, _) = extrapolate([1.1, 1.01, 1.001], 1e-12).unwrap();
    assert!((lim - 1.0).abs() < 1e-12);
    // noise-level differences keep the last value
    assert_eq!(extrapolate([1.0, 1.0 + 1e-12, 1.0], 1e-9).unwrap().0, 1.0);
    assert!(matches!(
        extrapolate([1.0, 1.001, 1.1], 1e-9),
        Err(Error::Extrapolation(_))
    ));
}

#[test]
fn quotient_threshold_sits_at_gamma0() {
    let tol = Tolerances::default();
    let p = profile(OperatorSpec::hessian_quotient(5, 4, 2).unwrap());
    let thr = threshold(&p, &tol).unwrap();
    assert!((thr.gamma0 - 1.0).abs() < 1e-9);
    assert!(thr.alpha_min >= thr.gamma0);
    assert!(thr.mu_min < 0.0);
    assert!(thr.extrapolation_spread < 1e-6);
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

    #[test]
    fn c0_is_affine_in_b(b in -10.0f64..10.0) {
        let tol = Tolerances::default();
        let p = profile(OperatorSpec::sigma_k(3, 3).unwrap());
        let thr = threshold(&p, &tol).unwrap();
        let d = thr.c0(b) - thr.c0(0.0);
        proptest::prop_assert!((d - b).abs() < 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn margin_sign_decides_existence(dc in -1.0f64..1.0) {
        let tol = Tolerances::default();
        let p = profile(OperatorSpec::sigma_k(3, 2).unwrap());
        let thr = threshold(&p, &tol).unwrap();
        proptest::prop_assume!(dc.abs() > 1e-8);
        let v = classify_existence(&p, &thr, 0.0, thr.c0(0.0) + dc, 1e-9, &tol).unwrap();
        proptest::prop_assert_eq!(v.exists, dc > 0.0);
    }
}
