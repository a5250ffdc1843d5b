use hessrad::ode::*;
use hessrad::*;

fn solver(tol: f64) -> Dopri5<impl Fn(f64, f64, f64) -> f64> {
    Dopri5::new(
        move |_, a: f64, b: f64| tol * (1.0 + a.abs().max(b.abs())),
        1.0,
    )
}

#[test]
fn exponential_decay() {
    let nodes = solver(1e-10)
        .integrate(|_, y| Ok(-3.0 * y), 0.0, 2.0, 4.0, |_, _| false)
        .unwrap();
    let last = nodes.last().unwrap();
    assert_eq!(last.x, 4.0);
    assert!((last.y - 2.0 * (-12.0f64).exp()).abs() < 1e-10);
    // dense output between nodes
    for w in nodes.windows(2) {
        let xm = 0.5 * (w[0].x + w[1].x);
        let want = 2.0 * (-3.0 * xm).exp();
        assert!((interpolate(&w[0], &w[1], xm) - want).abs() < 1e-9);
    }
}

#[test]
fn stop_predicate_ends_run() {
    let nodes = solver(1e-8)
        .integrate(|_, y| Ok(-y), 0.0, 1.0, f64::INFINITY, |_, y| y < 1e-3)
        .unwrap();
    let last = nodes.last().unwrap();
    assert!(last.y < 1e-3);
    assert!(nodes[nodes.len() - 2].y >= 1e-3);
}

#[test]
fn quadrature_mode() {
    // y' = cos x integrates to sin x.
    let nodes = solver(1e-12)
        .integrate(|x, _| Ok(x.cos()), 0.0, 0.0, 3.0, |_, _| false)
        .unwrap();
    assert!((nodes.last().unwrap().y - 3f64.sin()).abs() < 1e-11);
}

#[test]
fn failing_rhs_region_is_avoided() {
    // RHS undefined for y > 1.5; the solution 1 - e^{-x} + 0.5 never gets there.
    let nodes = solver(1e-10)
        .integrate(
            |_, y| {
                if y > 1.5 {
                    Err(Error::Domain("out".into()))
                } else {
                    Ok(1.5 - y)
                }
            },
            0.0,
            0.5,
            5.0,
            |_, _| false,
        )
        .unwrap();
    assert!((nodes.last().unwrap().y - (1.5 - (-5.0f64).exp())).abs() < 1e-9);
}
