mod common;

use common::{arb_expr, arb_point, chart};
use hfree_core::{parse, Expr, Jet2};
use proptest::prelude::*;

const NAMES: &[&str] = &["x", "y", "z"];
const H: f64 = 1e-5;

fn shifted(p: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] += h;
    q
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Central differences: gradient from values, Hessian from jet gradients.
fn check_against_differences(e: &Expr, p: &[f64]) -> Result<(), TestCaseError> {
    let c = chart(NAMES);
    let jet = e.eval_jet2(&c, p).unwrap();
    for i in 0..p.len() {
        let fd = (e.eval(&c, &shifted(p, i, H)).unwrap() - e.eval(&c, &shifted(p, i, -H)).unwrap()) / (2.0 * H);
        prop_assert!(close(jet.gradient()[i], fd, 1e-5), "d{i}: {} vs {fd} for {e}", jet.gradient()[i]);
        let plus = e.eval_jet2(&c, &shifted(p, i, H)).unwrap();
        let minus = e.eval_jet2(&c, &shifted(p, i, -H)).unwrap();
        for j in 0..p.len() {
            let fd = (plus.gradient()[j] - minus.gradient()[j]) / (2.0 * H);
            prop_assert!(close(jet.hessian(i, j), fd, 1e-5), "d{i}d{j}: {} vs {fd} for {e}", jet.hessian(i, j));
            prop_assert_eq!(jet.hessian(i, j).to_bits(), jet.hessian(j, i).to_bits());
        }
    }
    Ok(())
}

#[test]
fn exp_cos_at_origin() {
    let j = parse("exp(x)*cos(y)").unwrap().eval_jet2(&chart(&["x", "y"]), &[0.0, 0.0]).unwrap();
    assert_eq!(j.value(), 1.0);
    assert_eq!(j.gradient(), &[1.0, 0.0]);
    assert_eq!(j.hessian_matrix(), vec![vec![1.0, 0.0], vec![0.0, -1.0]]);
}

#[test]
fn y_exp_x_matches_differences() {
    let e = parse("y*exp(x)").unwrap();
    let j = e.eval_jet2(&chart(&["x", "y"]), &[1.0, 2.0]).unwrap();
    let ee = std::f64::consts::E;
    assert!((j.value() - 2.0 * ee).abs() < 1e-15);
    let expected = [[2.0 * ee, ee], [ee, 0.0]];
    for i in 0..2 {
        for k in 0..2 {
            assert!((j.hessian(i, k) - expected[i][k]).abs() <= 1e-14);
        }
    }
    let c = chart(&["x", "y"]);
    let h = 1e-5;
    let f = |x: f64, y: f64| e.eval(&c, &[x, y]).unwrap();
    let dxx = (f(1.0 + h, 2.0) - 2.0 * f(1.0, 2.0) + f(1.0 - h, 2.0)) / (h * h);
    assert!((dxx - j.hessian(0, 0)).abs() <= 1e-4 * dxx.abs());
    let dx = (f(1.0 + h, 2.0) - f(1.0 - h, 2.0)) / (2.0 * h);
    assert!((dx - j.gradient()[0]).abs() <= 1e-6 * dx.abs());
}

#[test]
fn coordinate_function() {
    let j = parse("y").unwrap().eval_jet2(&chart(NAMES), &[0.3, -1.5, 2.0]).unwrap();
    assert_eq!(j.value(), -1.5);
    assert_eq!(j.gradient(), &[0.0, 1.0, 0.0]);
    assert!(j.hessian_matrix().iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn negative_base_integer_power_is_defined() {
    let j = parse("x^3").unwrap().eval_jet2(&chart(&["x"]), &[-2.0]).unwrap();
    assert_eq!((j.value(), j.gradient()[0], j.hessian(0, 0)), (-8.0, 12.0, -12.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn jets_agree_with_central_differences(e in arb_expr(NAMES), p in arb_point(3, -1.0, 1.0)) {
        check_against_differences(&e, &p)?;
    }

    #[test]
    fn rendering_round_trips_at_value_level(e in arb_expr(NAMES), p in arb_point(3, -1.0, 1.0)) {
        let c = chart(NAMES);
        let again = parse(&e.to_string()).unwrap();
        prop_assert_eq!(e.eval(&c, &p).unwrap().to_bits(), again.eval(&c, &p).unwrap().to_bits(), "{}", e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_jet_follows_leibniz(a in arb_expr(NAMES), b in arb_expr(NAMES), p in arb_point(3, -1.0, 1.0)) {
        let c = chart(NAMES);
        let ja = a.eval_jet2(&c, &p).unwrap();
        let jb = b.eval_jet2(&c, &p).unwrap();
        let prod = (a * b).eval_jet2(&c, &p).unwrap();
        prop_assert!(close(prod.value(), ja.value() * jb.value(), 1e-14));
        for i in 0..3 {
            let g = ja.gradient()[i] * jb.value() + ja.value() * jb.gradient()[i];
            prop_assert!(close(prod.gradient()[i], g, 1e-14));
            for j in 0..3 {
                let h = ja.hessian(i, j) * jb.value()
                    + ja.gradient()[i] * jb.gradient()[j]
                    + ja.gradient()[j] * jb.gradient()[i]
                    + ja.value() * jb.hessian(i, j);
                prop_assert!(close(prod.hessian(i, j), h, 1e-13));
            }
        }
        let explicit: Jet2 = ja.mul(&jb);
        prop_assert_eq!(explicit, prod);
    }
}
