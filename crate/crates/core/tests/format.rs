use hessrad::format::*;

#[test]
fn matches_printf() {
    assert_eq!(g17(1.0), "1");
    assert_eq!(g17(-0.5), "-0.5");
    assert_eq!(g17(0.1), "0.10000000000000001");
    assert_eq!(g17(1e-5), "1.0000000000000001e-05");
    assert_eq!(g17(1e17), "1e+17");
    assert_eq!(g17(123456.0), "123456");
    assert_eq!(g17(1.0 / 3.0), "0.33333333333333331");
    assert_eq!(g17(2e-4), "0.00020000000000000001");
}

#[test]
fn round_trips() {
    for x in [
        std::f64::consts::PI,
        -1e-300,
        6.02214076e23,
        0.1 + 0.2,
        f64::MAX,
    ] {
        assert_eq!(g17(x).parse::<f64>().unwrap(), x);
    }
}

#[test]
fn json_numbers_keep_text() {
    assert_eq!(serde_json::to_string(&json_num(1.0)).unwrap(), "1");
    assert_eq!(
        serde_json::to_string(&json_num(1e-5)).unwrap(),
        "1.0000000000000001e-05"
    );
    assert_eq!(json_num(f64::NAN), serde_json::Value::Null);
}

#[test]
fn spaced_single_line() {
    let v = serde_json::json!({"c_star": json_num(1.0), "d": {"x": [1, 2]}, "e": null});
    assert_eq!(
        json_line(&v),
        r#"{"c_star": 1, "d": {"x": [1, 2]}, "e": null}"#
    );
}
