use hessrad::quadrature::*;

#[test]
fn polynomial_is_exact() {
    let v = integrate(|x| Ok(x.powi(5) - 2.0 * x), 0.0, 2.0, 1e-14).unwrap();
    assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
}

#[test]
fn exponential_and_reversed_limits() {
    let v = integrate(|x| Ok(x.exp()), 0.0, 1.0, 1e-13).unwrap();
    assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
    let w = integrate(|x| Ok(x.exp()), 1.0, 0.0, 1e-13).unwrap();
    assert!((v + w).abs() < 1e-13);
}

#[test]
fn endpoint_singularity() {
    let v = integrate(|x| Ok(x.sqrt()), 0.0, 1.0, 1e-10).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-10);
}
