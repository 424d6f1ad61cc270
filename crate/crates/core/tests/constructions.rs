mod common;

use common::{arb_point, arb_polynomial, chart, sample_points};
use hfree_core::{
    assemble_d, build_cis, build_rp, cis_constant, compose_1d, is_hfree_at, parse, rp_bracket, CurveDomain,
    Distribution, Error, Expr, FreeCurve, RpBracketSpec,
};
use proptest::prelude::*;

fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

fn parabola() -> FreeCurve {
    FreeCurve::custom("t", e("t"), e("t^2"), (-20.0, 20.0), CurveDomain::Line).unwrap()
}

fn saddle() -> Distribution {
    Distribution::parse(&chart(&["x", "y"]), &[&["2*y", "1-y^2"]]).unwrap()
}

#[test]
fn composition_identity_for_three_curves() {
    let c = chart(&["x", "y"]);
    let points = sample_points(1, 1000, &[(-2.0, 2.0); 2]);
    for psi in [FreeCurve::exp(), FreeCurve::circle(), parabola()] {
        let composed = compose_1d(&c, e("y*exp(x)"), psi).unwrap();
        let v = composed.verify(&saddle(), &points, 1e-9).unwrap();
        assert!(v.all_pass(), "max relative error {}", v.max_relative_error());
    }
}

#[test]
fn composition_with_exp_matches_closed_form() {
    let c = chart(&["x", "y"]);
    let composed = compose_1d(&c, e("y*exp(x)"), FreeCurve::exp()).unwrap();
    assert_eq!(composed.map.components()[1].to_string(), "exp(y*exp(x))");
    for p in sample_points(2, 20, &[(-1.0, 1.0); 2]) {
        let t = p[1] * p[0].exp();
        let g = (1.0 + p[1] * p[1]) * p[0].exp();
        let det = assemble_d(&saddle(), &composed.map, &p).unwrap().determinant().unwrap();
        let expected = t.exp() * g.powi(3);
        assert!((det - expected).abs() <= 1e-12 * expected);
    }
    let line = Distribution::parse(&c, &[&["1", "0"]]).unwrap();
    let simple = compose_1d(&c, e("x"), FreeCurve::exp()).unwrap();
    let det = assemble_d(&line, &simple.map, &[0.7, 0.0]).unwrap().determinant().unwrap();
    assert!((det - 0.7f64.exp()).abs() < 1e-15);
}

#[test]
fn composition_with_first_integral_fails_everywhere() {
    let c = chart(&["x", "y"]);
    let composed = compose_1d(&c, e("(y^2-1)*exp(x)"), FreeCurve::exp()).unwrap();
    let v = composed.verify(&saddle(), &sample_points(3, 100, &[(-2.0, 2.0); 2]), 1e-9).unwrap();
    assert_eq!(v.failures().count(), 100);
}

#[test]
fn cis_constant_is_two_to_the_number_of_products() {
    assert_eq!(cis_constant(1).unwrap(), 1.0);
    assert!((cis_constant(2).unwrap() - 2.0).abs() < 1e-12);
    assert!((cis_constant(3).unwrap() - 8.0).abs() < 1e-12);
}

/// Actions `I_i`, angles `p_i`, `xi_i = d/dp_i`, `f^i = (1 + I_i^2) p_i + p_i^3 / 6`,
/// so `g_i = 1 + I_i^2 + p_i^2 / 2`.
fn action_angle(n: usize) -> (hfree_core::Chart, Distribution, Vec<Expr>) {
    let names: Vec<String> = (1..=n).map(|i| format!("I{i}")).chain((1..=n).map(|i| format!("p{i}"))).collect();
    let c = hfree_core::Chart::new(names).unwrap();
    let frame = (0..n)
        .map(|i| {
            let comps = (0..2 * n).map(|a| Expr::num(if a == n + i { 1.0 } else { 0.0 })).collect();
            hfree_core::VectorField::new(&c, comps).unwrap()
        })
        .collect();
    let functions = (1..=n).map(|i| e(&format!("(1 + I{i}^2)*p{i} + p{i}^3/6"))).collect();
    (c, Distribution::new(frame).unwrap(), functions)
}

#[test]
fn cis_identity_with_measured_constant() {
    for n in [2, 3] {
        let constant = cis_constant(n).unwrap();
        let (c, d, functions) = action_angle(n);
        let curves = [FreeCurve::exp(), FreeCurve::circle(), parabola()];
        let cis = build_cis(&c, functions, curves[..n].to_vec()).unwrap();
        let points = sample_points(10 + n as u64, 1000, &vec![(-1.0, 1.0); 2 * n]);
        let v = cis.verify(&d, &points, constant, 1e-8).unwrap();
        assert!(v.all_pass(), "n = {n}: max relative error {}", v.max_relative_error());
    }
}

#[test]
fn cis_with_one_function_is_a_composition() {
    let (c, d, functions) = action_angle(1);
    let cis = build_cis(&c, functions, vec![FreeCurve::exp()]).unwrap();
    let p = [0.4, -0.3];
    let g: f64 = 1.0 + 0.16 + 0.045;
    let f: f64 = 1.16 * -0.3 + (-0.3f64).powi(3) / 6.0;
    let predicted = cis.predicted_determinant(&d, &p, 1.0).unwrap();
    assert!((predicted - g.powi(3) * f.exp()).abs() < 1e-14);
    let det = assemble_d(&d, &cis.map, &p).unwrap().determinant().unwrap();
    assert!((det - predicted).abs() < 1e-12);
}

#[test]
fn cis_fails_where_a_derivative_vanishes() {
    let (c, d, _) = action_angle(2);
    let cis = build_cis(&c, vec![e("p1^3"), e("p2")], vec![FreeCurve::exp(), FreeCurve::exp()]).unwrap();
    let p = vec![0.3, 0.2, 0.0, 0.5];
    assert_eq!(cis.predicted_determinant(&d, &p, 2.0).unwrap(), 0.0);
    assert!(!is_hfree_at(&d, &cis.map, &p).unwrap().hfree);
    assert!(!cis.verify(&d, &[p], 2.0, 1e-8).unwrap().all_pass());
}

#[test]
fn cis_rejects_non_commuting_data() {
    let (c, d, _) = action_angle(2);
    let cis = build_cis(&c, vec![e("p1 + p2"), e("p2")], vec![FreeCurve::exp(), FreeCurve::exp()]).unwrap();
    assert!(matches!(
        cis.diagonal_derivatives(&d, &[0.0; 4]),
        Err(Error::CommutationViolation { field: 2, function: 1, .. })
    ));
}

// Riemann-Poisson brackets.

const XYZ: &[&str] = &["x", "y", "z"];

fn linear(coeffs: &[f64], names: &[&str]) -> Expr {
    names
        .iter()
        .zip(coeffs)
        .fold(Expr::num(0.0), |acc, (n, c)| acc + Expr::num(*c) * Expr::coord(n))
}

fn arb_linear_casimir() -> impl Strategy<Value = RpBracketSpec> {
    prop::collection::vec(-2.0f64..2.0, 3)
        .prop_filter("nonzero", |c| c.iter().map(|v| v.abs()).sum::<f64>() > 0.3)
        .prop_map(|c| RpBracketSpec::euclidean(&chart(XYZ), vec![linear(&c, XYZ)]).unwrap())
}

/// `{f, {g, h}}` from Hamiltonian field jets: with `{g, h} = xi_g . grad h`,
/// `grad {g, h} = J(xi_g)^T grad h + Hess(h) xi_g`.
fn nested(spec: &RpBracketSpec, f: &Expr, g: &Expr, h: &Expr, p: &[f64]) -> f64 {
    let n = p.len();
    let xf = spec.hamiltonian_field_jet(f, p).unwrap();
    let xg = spec.hamiltonian_field_jet(g, p).unwrap();
    let hj = h.eval_jet2(spec.chart(), p).unwrap();
    (0..n)
        .map(|alpha| {
            let grad: f64 = (0..n)
                .map(|beta| xg.derivative(beta, alpha) * hj.gradient()[beta] + hj.hessian(alpha, beta) * xg.value[beta])
                .sum();
            xf.value[alpha] * grad
        })
        .sum()
}

#[test]
fn coordinate_casimir_bracket() {
    let spec = RpBracketSpec::euclidean(&chart(XYZ), vec![e("x")]).unwrap();
    for p in sample_points(4, 10, &[(-2.0, 2.0); 3]) {
        assert_eq!(rp_bracket(&spec, &e("y"), &e("z"), &p).unwrap(), 1.0);
    }
    let scaled = RpBracketSpec::new(
        &chart(XYZ),
        vec![e("x")],
        Some(vec![vec![e("4"), e("0"), e("0")], vec![e("0"), e("1"), e("0")], vec![e("0"), e("0"), e("1")]]),
        1,
    )
    .unwrap();
    assert_eq!(rp_bracket(&scaled, &e("y"), &e("z"), &[0.0; 3]).unwrap(), 0.5);
}

#[test]
fn rp_maps() {
    let spec = RpBracketSpec::euclidean(&chart(XYZ), vec![e("x")]).unwrap();
    let map = build_rp(&spec, e("y"), e("z"), FreeCurve::exp()).unwrap();
    assert_eq!(map.field.eval(&[0.1, 0.2, 0.3]).unwrap(), vec![0.0, 0.0, 1.0]);
    let v = map.verify(&sample_points(5, 200, &[(-2.0, 2.0); 3]), 1e-9).unwrap();
    assert!(v.all_pass());
    let degenerate = build_rp(&spec, e("y"), e("y"), FreeCurve::exp()).unwrap();
    assert!(matches!(degenerate.verify(&[vec![0.0; 3]], 1e-9), Err(Error::NonTransversal { .. })));

    let torus = chart(&["t1", "t2", "t3"]);
    let novikov = RpBracketSpec::euclidean(&torus, vec![e("t3")]).unwrap();
    assert_eq!(rp_bracket(&novikov, &e("t1"), &e("t2"), &[0.5, 1.0, 2.0]).unwrap(), 1.0);
    let map = build_rp(&novikov, e("t1"), e("t2"), FreeCurve::circle()).unwrap();
    let points = sample_points(6, 200, &[(0.0, std::f64::consts::TAU); 3]);
    assert!(map.verify(&points, 1e-9).unwrap().all_pass());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bracket_is_bilinear_and_antisymmetric(
        spec in arb_linear_casimir(),
        f in arb_polynomial(XYZ, 3), g in arb_polynomial(XYZ, 3), h in arb_polynomial(XYZ, 3),
        a in -2.0f64..2.0, b in -2.0f64..2.0,
        p in arb_point(3, -1.0, 1.0),
    ) {
        let br = |u: &Expr, v: &Expr| rp_bracket(&spec, u, v, &p).unwrap();
        let (fg, gf) = (br(&f, &g), br(&g, &f));
        prop_assert!((fg + gf).abs() <= 1e-12 * fg.abs().max(1.0));
        prop_assert!(br(&f, &f).abs() <= 1e-12);
        let combo = Expr::num(a) * f.clone() + Expr::num(b) * g.clone();
        let (fh, gh) = (br(&f, &h), br(&g, &h));
        let scale = (a * fh).abs() + (b * gh).abs();
        prop_assert!((br(&combo, &h) - (a * fh + b * gh)).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn casimirs_are_annihilated(spec in arb_linear_casimir(), g in arb_polynomial(XYZ, 3), p in arb_point(3, -1.0, 1.0)) {
        let h = spec.casimirs()[0].clone();
        prop_assert!(rp_bracket(&spec, &h, &g, &p).unwrap().abs() <= 1e-12);
        let curved = RpBracketSpec::euclidean(&chart(XYZ), vec![e("x + y^2 + sin(z)")]).unwrap();
        prop_assert!(rp_bracket(&curved, &e("x + y^2 + sin(z)"), &g, &p).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn bracket_follows_leibniz(
        spec in arb_linear_casimir(),
        f in arb_polynomial(XYZ, 3), g in arb_polynomial(XYZ, 3), h in arb_polynomial(XYZ, 3),
        p in arb_point(3, -1.0, 1.0),
    ) {
        let c = chart(XYZ);
        let lhs = rp_bracket(&spec, &h, &(f.clone() * g.clone()), &p).unwrap();
        let (fv, gv) = (f.eval(&c, &p).unwrap(), g.eval(&c, &p).unwrap());
        let (hg, hf) = (rp_bracket(&spec, &h, &g, &p).unwrap(), rp_bracket(&spec, &h, &f, &p).unwrap());
        let scale = (fv * hg).abs() + (gv * hf).abs();
        prop_assert!((lhs - (fv * hg + gv * hf)).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn bracket_satisfies_jacobi(
        spec in arb_linear_casimir(),
        f in arb_polynomial(XYZ, 3), g in arb_polynomial(XYZ, 3), h in arb_polynomial(XYZ, 3),
        p in arb_point(3, -1.0, 1.0),
    ) {
        let cyclic = nested(&spec, &f, &g, &h, &p) + nested(&spec, &g, &h, &f, &p) + nested(&spec, &h, &f, &g, &p);
        prop_assert!(cyclic.abs() <= 1e-8, "cyclic sum {cyclic}");
    }

    #[test]
    fn jacobi_in_four_dimensions(
        c1 in prop::collection::vec(-2.0f64..2.0, 4), c2 in prop::collection::vec(-2.0f64..2.0, 4),
        f in arb_polynomial(&["a", "b", "c", "d"], 2), g in arb_polynomial(&["a", "b", "c", "d"], 2), h in arb_polynomial(&["a", "b", "c", "d"], 2),
        p in arb_point(4, -1.0, 1.0),
    ) {
        let names = ["a", "b", "c", "d"];
        let independent = (0..4).any(|i| (0..4).any(|j| (c1[i] * c2[j] - c1[j] * c2[i]).abs() > 0.3));
        prop_assume!(independent);
        let spec = RpBracketSpec::euclidean(&chart(&names), vec![linear(&c1, &names), linear(&c2, &names)]).unwrap();
        let cyclic = nested(&spec, &f, &g, &h, &p) + nested(&spec, &g, &h, &f, &p) + nested(&spec, &h, &f, &g, &p);
        prop_assert!(cyclic.abs() <= 1e-8, "cyclic sum {cyclic}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn novikov_bracket_matches_closed_form(
        b in prop::collection::vec(-2.0f64..2.0, 3),
        f in arb_polynomial(&["t1", "t2", "t3"], 3), g in arb_polynomial(&["t1", "t2", "t3"], 3),
        p in arb_point(3, 0.0, std::f64::consts::TAU),
    ) {
        let names = ["t1", "t2", "t3"];
        prop_assume!(b.iter().map(|v| v.abs()).sum::<f64>() > 0.3);
        let c = chart(&names);
        let spec = RpBracketSpec::euclidean(&c, vec![linear(&b, &names)]).unwrap();
        let (df, dg) = (f.eval_jet2(&c, &p).unwrap(), g.eval_jet2(&c, &p).unwrap());
        let (df, dg) = (df.gradient(), dg.gradient());
        let mut expected = 0.0;
        for (i, j, k, sign) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)] {
            expected += sign * df[i] * dg[j] * b[k];
        }
        let got = rp_bracket(&spec, &f, &g, &p).unwrap();
        prop_assert!((got - expected).abs() <= 1e-10 * expected.abs().max(1.0), "{got} vs {expected}");
    }
}
