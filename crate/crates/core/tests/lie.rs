mod common;

use common::{arb_expr, arb_point, arb_polynomial, chart};
use hfree_core::{anticommutator, lie, lie2, parse, Expr, VectorField};
use proptest::prelude::*;

const NAMES: &[&str] = &["x", "y", "z"];

fn field(components: Vec<Expr>) -> VectorField {
    VectorField::new(&chart(NAMES), components).unwrap()
}

fn arb_field() -> impl Strategy<Value = VectorField> {
    prop::collection::vec(arb_polynomial(NAMES, 2), 3).prop_map(field)
}

fn along(p: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    p.iter().zip(v).map(|(a, b)| a + t * b).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn saddle_field_fixtures() {
    let c = chart(&["x", "y"]);
    let xi = VectorField::parse(&c, &["2*y", "1-y^2"]).unwrap();
    let first_integral = parse("(y^2-1)*exp(x)").unwrap();
    let f = parse("y*exp(x)").unwrap();
    for p in [[0.0, 0.0], [0.7, -1.3], [-2.0, 1.5]] {
        assert!(lie(&xi, &first_integral, &p).unwrap().abs() < 1e-12);
        let expected = (1.0 + p[1] * p[1]) * p[0].exp();
        assert!((lie(&xi, &f, &p).unwrap() - expected).abs() < 1e-12 * expected);
    }
    assert_eq!(lie2(&xi, &xi, &f, &[0.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn contact_fixtures() {
    let c = chart(NAMES);
    let xi1 = VectorField::parse(&c, &["0", "1", "0"]).unwrap();
    let xi2 = VectorField::parse(&c, &["1", "0", "-y"]).unwrap();
    let z = parse("z").unwrap();
    for p in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5]] {
        assert_eq!(lie2(&xi1, &xi2, &z, &p).unwrap(), -1.0);
        assert_eq!(anticommutator(&xi1, &xi2, &z, &p).unwrap(), -1.0);
    }
    let xi = VectorField::parse(&chart(&["x", "y"]), &["1", "0"]).unwrap();
    let sq = parse("x^2").unwrap();
    assert_eq!(lie2(&xi, &xi, &sq, &[0.4, 0.0]).unwrap(), 2.0);
    assert_eq!(anticommutator(&xi, &xi, &sq, &[0.4, 0.0]).unwrap(), 4.0);
}

#[test]
fn commuting_fields_example_gives_e_to_the_x() {
    let c = chart(NAMES);
    let xi1 = VectorField::parse(&c, &["cos(y)", "-sin(y)", "0"]).unwrap();
    let xi2 = VectorField::parse(&c, &["0", "0", "1"]).unwrap();
    let g = parse("exp(x)*cos(y)").unwrap();
    for p in [[0.0, 0.0, 0.0], [1.0, 0.3, -0.2], [-0.5, 2.0, 1.0]] {
        let v = lie(&xi1, &g, &p).unwrap();
        assert!((v - p[0].exp()).abs() < 1e-12 * p[0].exp());
    }
    let f = parse("z*exp(x)*cos(y)").unwrap();
    assert!((anticommutator(&xi1, &xi2, &f, &[0.0, 0.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lie_matches_directional_difference(xi in arb_field(), f in arb_expr(NAMES), p in arb_point(3, -1.0, 1.0)) {
        let c = chart(NAMES);
        let v = xi.eval(&p).unwrap();
        let h = 1e-5;
        let fd = (f.eval(&c, &along(&p, &v, h)).unwrap() - f.eval(&c, &along(&p, &v, -h)).unwrap()) / (2.0 * h);
        prop_assert!(close(lie(&xi, &f, &p).unwrap(), fd, 1e-5));
    }

    #[test]
    fn lie2_matches_nested_difference(xi in arb_field(), eta in arb_field(), f in arb_expr(NAMES), p in arb_point(3, -1.0, 1.0)) {
        let v = xi.eval(&p).unwrap();
        let h = 1e-5;
        let fd = (lie(&eta, &f, &along(&p, &v, h)).unwrap() - lie(&eta, &f, &along(&p, &v, -h)).unwrap()) / (2.0 * h);
        prop_assert!(close(lie2(&xi, &eta, &f, &p).unwrap(), fd, 1e-5));
    }

    #[test]
    fn anticommutator_is_symmetric(xi in arb_field(), eta in arb_field(), f in arb_expr(NAMES), p in arb_point(3, -1.0, 1.0)) {
        prop_assert_eq!(
            anticommutator(&xi, &eta, &f, &p).unwrap().to_bits(),
            anticommutator(&eta, &xi, &f, &p).unwrap().to_bits()
        );
    }

    #[test]
    fn lie_is_linear(xi in arb_field(), f in arb_expr(NAMES), g in arb_expr(NAMES), a in -3.0f64..3.0, b in -3.0f64..3.0, p in arb_point(3, -1.0, 1.0)) {
        let combined = Expr::num(a) * f.clone() + Expr::num(b) * g.clone();
        let lhs = lie(&xi, &combined, &p).unwrap();
        let (lf, lg) = (lie(&xi, &f, &p).unwrap(), lie(&xi, &g, &p).unwrap());
        let scale = (a * lf).abs() + (b * lg).abs();
        prop_assert!((lhs - (a * lf + b * lg)).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn lie_follows_leibniz(xi in arb_field(), f in arb_expr(NAMES), g in arb_expr(NAMES), p in arb_point(3, -1.0, 1.0)) {
        let c = chart(NAMES);
        let lhs = lie(&xi, &(f.clone() * g.clone()), &p).unwrap();
        let (fv, gv) = (f.eval(&c, &p).unwrap(), g.eval(&c, &p).unwrap());
        let (lf, lg) = (lie(&xi, &f, &p).unwrap(), lie(&xi, &g, &p).unwrap());
        let scale = (fv * lg).abs() + (gv * lf).abs();
        prop_assert!((lhs - (fv * lg + gv * lf)).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn commuting_fields_commute_on_functions(f in arb_expr(NAMES), p in arb_point(3, -1.0, 1.0)) {
        let c = chart(NAMES);
        let pairs = [
            (["cos(y)", "-sin(y)", "0"], ["0", "0", "1"]),
            (["x", "0", "0"], ["0", "y", "0"]),
            (["1", "0", "0"], ["0", "1", "z"]),
        ];
        for (a, b) in pairs {
            let xi = VectorField::parse(&c, &a).unwrap();
            let eta = VectorField::parse(&c, &b).unwrap();
            let (u, v) = (lie2(&xi, &eta, &f, &p).unwrap(), lie2(&eta, &xi, &f, &p).unwrap());
            prop_assert!(close(u, v, 1e-9), "{u} vs {v}");
        }
    }
}
