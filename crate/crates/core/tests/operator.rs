use hessrad::operator::*;
use hessrad::*;
use proptest::prelude::*;

fn ops() -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::sigma_k(3, 2).unwrap(),
        OperatorSpec::sigma_k(3, 3).unwrap(),
        OperatorSpec::sigma_k(4, 2).unwrap(),
        OperatorSpec::sigma_k(5, 3).unwrap(),
        OperatorSpec::sigma_k(5, 5).unwrap(),
        OperatorSpec::hessian_quotient(4, 3, 1).unwrap(),
        OperatorSpec::hessian_quotient(5, 4, 2).unwrap(),
    ]
}

/// Brute-force σ_j over all j-subsets of the full eigenvalue vector.
fn sigma_brute(lambda: &[f64], j: usize) -> f64 {
    let n = lambda.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == j {
            total += (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| lambda[i])
                .product::<f64>();
        }
    }
    total
}

#[test]
fn make_operator_validates_ranges() {
    assert!(make_operator(Family::SigmaK, 3, 3, 0).is_ok());
    assert!(make_operator(Family::SigmaK, 3, 2, 0).is_ok());
    assert!(matches!(
        make_operator(Family::SigmaK, 2, 2, 0),
        Err(Error::Parameter(_))
    ));
    assert!(make_operator(Family::SigmaK, 4, 1, 0).is_err());
    assert!(make_operator(Family::SigmaK, 4, 5, 0).is_err());
    assert!(make_operator(Family::HessianQuotient, 4, 3, 3).is_err());
    assert!(make_operator(Family::HessianQuotient, 4, 3, 0).is_err());
    assert!(make_operator(Family::HessianQuotient, 4, 3, 1).is_ok());
}

#[test]
fn ray_sigma_matches_brute_force() {
    for op in ops() {
        let p = RayPoint::new(0.7, -0.3);
        let mut lambda = vec![p.gamma; op.n()];
        lambda[0] = p.beta;
        for j in 0..=op.n() {
            let want = if j == 0 { 1.0 } else { sigma_brute(&lambda, j) };
            assert!((op.sigma_ray(j, p) - want).abs() < 1e-14, "{op} j={j}");
        }
    }
}

#[test]
fn eval_ray_examples() {
    let s2 = OperatorSpec::sigma_k(3, 2).unwrap();
    let c = 3f64.powf(-0.5);
    assert!((s2.eval_ray(RayPoint::diagonal(c)).unwrap() - 1.0).abs() < 1e-15);
    // σ_2(0, 1, 1) = 1 by brute force.
    assert_eq!(sigma_brute(&[0.0, 1.0, 1.0], 2), 1.0);
    assert!((s2.eval_ray(RayPoint::new(0.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
    let ma = OperatorSpec::monge_ampere(3).unwrap();
    assert_eq!(ma.eval_ray(RayPoint::new(1.0, 1.0)).unwrap(), 1.0);
    assert!(matches!(
        s2.eval_ray(RayPoint::new(5.0, -1.0)),
        Err(Error::Domain(_))
    ));
    // odd root keeps the sign
    assert!(ma.eval_ray(RayPoint::new(-8.0, 1.0)).unwrap() == -2.0);
}

#[test]
fn ray_partials_examples() {
    let s2 = OperatorSpec::sigma_k(3, 2).unwrap();
    let c = s2.c_star();
    let d = s2.ray_partials(RayPoint::diagonal(c)).unwrap();
    assert!((d.dfdgamma_total / d.dfdbeta - 2.0).abs() < 1e-14);

    // (βγ²)^{1/3} at (1, 1): ∂β = 1/3, ∂γ = 2/3.
    let ma = OperatorSpec::monge_ampere(3).unwrap();
    let d = ma.ray_partials(RayPoint::new(1.0, 1.0)).unwrap();
    assert!((d.dfdbeta - 1.0 / 3.0).abs() < 1e-15);
    assert!((d.dfdgamma_total - 2.0 / 3.0).abs() < 1e-15);

    for op in ops() {
        assert!(matches!(
            op.ray_partials(RayPoint::new(-1.0, -1.0)),
            Err(Error::Domain(_))
        ));
    }
}

#[test]
fn cone_examples() {
    let s2 = OperatorSpec::sigma_k(3, 2).unwrap();
    assert!(s2.in_cone_ray(RayPoint::new(1.0, 1.0)));
    assert!(!s2.in_cone_ray(RayPoint::new(5.0, -1.0)));
    assert!(s2.in_cone_ray(RayPoint::new(10.0, 0.01)));
    assert!(!s2.in_cone_ray(RayPoint::new(f64::NAN, 1.0)));
}

#[test]
fn c_star_closed_form_and_root() {
    let s2 = OperatorSpec::sigma_k(3, 2).unwrap();
    assert!((s2.c_star() - 0.5773502691896258).abs() < 1e-15);
    assert_eq!(OperatorSpec::monge_ampere(3).unwrap().c_star(), 1.0);
    assert_eq!(OperatorSpec::monge_ampere(5).unwrap().c_star(), 1.0);
    for op in ops() {
        let c = op.c_star();
        assert!(op.in_cone_ray(RayPoint::diagonal(c)));
        assert!((op.eval_ray(RayPoint::diagonal(c)).unwrap() - 1.0).abs() < 1e-14);
        assert!((op.c_star_by_root().unwrap() - c).abs() < 1e-12, "{op}");
    }
}

#[test]
fn diagonal_symmetry_of_partials() {
    for op in ops() {
        for c in [0.3, 1.0, 2.5] {
            let d = op.ray_partials(RayPoint::diagonal(c)).unwrap();
            let want = (op.n() - 1) as f64 * d.dfdbeta;
            assert!((d.dfdgamma_total - want).abs() < 1e-13 * want.abs(), "{op}");
        }
    }
}

/// Cone-interior ray point: γ > 0 and β above the σ_k boundary.
fn cone_point() -> impl Strategy<Value = (usize, f64, f64)> {
    (0usize..7, 0.05f64..5.0, 0.05f64..5.0)
}

fn interior(op: &OperatorSpec, gamma: f64, offset: f64) -> RayPoint {
    let boundary = -((op.n() - op.k()) as f64) * gamma / op.k() as f64;
    RayPoint::new(boundary + offset, gamma)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn homogeneous_of_degree_one((i, gamma, offset) in cone_point(), t in 0.1f64..10.0) {
        let op = ops()[i];
        let p = interior(&op, gamma, offset);
        prop_assume!(op.in_cone_ray(p));
        let f = op.eval_ray(p).unwrap();
        let ft = op.eval_ray(RayPoint::new(t * p.beta, t * p.gamma)).unwrap();
        prop_assert!((ft - t * f).abs() <= 1e-12 * (t * f).abs().max(1.0));
    }

    #[test]
    fn positive_and_increasing_in_beta((i, gamma, offset) in cone_point()) {
        let op = ops()[i];
        let p = interior(&op, gamma, offset);
        prop_assume!(op.in_cone_ray(p));
        let f0 = op.eval_ray(p).unwrap();
        prop_assert!(f0 > 0.0);
        let h = 1e-6 * p.beta.abs().max(1.0);
        let f1 = op.eval_ray(RayPoint::new(p.beta + h, p.gamma)).unwrap();
        prop_assert!(f1 > f0);
        prop_assert!(op.ray_partials(p).unwrap().dfdbeta > 0.0);
    }

    #[test]
    fn partials_match_central_differences((i, gamma, offset) in cone_point()) {
        let op = ops()[i];
        let p = interior(&op, gamma, offset);
        prop_assume!(op.in_cone_ray(p));
        let d = op.ray_partials(p).unwrap();
        let hb = 1e-6 * p.beta.abs().max(1e-3).min(offset);
        let hg = 1e-6 * p.gamma;
        let fb = |b: f64| op.eval_ray(RayPoint::new(b, p.gamma)).unwrap();
        let fg = |g: f64| op.eval_ray(RayPoint::new(p.beta, g)).unwrap();
        let db = (fb(p.beta + hb) - fb(p.beta - hb)) / (2.0 * hb);
        let dg = (fg(p.gamma + hg) - fg(p.gamma - hg)) / (2.0 * hg);
        prop_assert!((db - d.dfdbeta).abs() <= 1e-6 * d.dfdbeta.abs().max(1e-3));
        prop_assert!((dg - d.dfdgamma_total).abs() <= 1e-6 * d.dfdgamma_total.abs().max(1e-3));
    }
}
