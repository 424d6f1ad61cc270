#![allow(dead_code)]

use hfree_core::expr::{BinaryOp, Function};
use hfree_core::{Chart, Expr};
use proptest::prelude::*;

pub fn chart(names: &[&str]) -> Chart {
    Chart::new(names.iter().copied()).unwrap()
}

/// Exponent tuples of total degree `<= degree`.
pub fn monomials(m: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                let used: u32 = prefix.iter().sum();
                (0..=degree - used).map(move |e| {
                    let mut next = prefix.clone();
                    next.push(e);
                    next
                })
            })
            .collect();
    }
    out
}

/// `sum_k coeffs[k] * x^{monomials[k]}` over the chart.
pub fn polynomial(chart: &Chart, degree: u32, coeffs: &[f64]) -> Expr {
    let mut acc = Expr::num(0.0);
    for (c, exps) in coeffs.iter().zip(monomials(chart.dim(), degree)) {
        let mut term = Expr::num(*c);
        for (name, &e) in chart.names().iter().zip(&exps) {
            if e > 0 {
                term = term * Expr::coord(name).pow(Expr::num(f64::from(e)));
            }
        }
        acc = acc + term;
    }
    acc
}

pub fn arb_polynomial(names: &'static [&'static str], degree: u32) -> impl Strategy<Value = Expr> {
    let n = monomials(names.len(), degree).len();
    prop::collection::vec(-2.0f64..2.0, n).prop_map(move |c| polynomial(&chart(names), degree, &c))
}

pub fn arb_point(m: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, m)
}

/// Random expressions of depth at most 5 whose derivatives stay moderate on
/// `[-1, 1]^m`: divisors, logarithms and roots only see arguments `>= 1`.
pub fn arb_expr(names: &'static [&'static str]) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-2.0f64..2.0).prop_map(Expr::num),
        prop::sample::select(names).prop_map(Expr::coord),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        let positive = |e: Expr| Expr::num(1.0) + e.clone() * e;
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| Expr::binary(BinaryOp::Div, a, positive(b))),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| a.pow(Expr::num(f64::from(k)))),
            (inner.clone(), inner.clone())
                .prop_map(move |(a, b)| positive(a).pow(Expr::call(Function::Sin, b))),
            inner.clone().prop_map(|a| Expr::call(Function::Sin, a)),
            inner.clone().prop_map(|a| Expr::call(Function::Cos, a)),
            inner.clone().prop_map(|a| Expr::call(Function::Tanh, a)),
            inner.clone().prop_map(|a| Expr::call(Function::Exp, Expr::call(Function::Sin, a))),
            inner.clone().prop_map(move |a| Expr::call(Function::Log, positive(a))),
            inner.prop_map(move |a| Expr::call(Function::Sqrt, positive(a))),
        ]
    })
}

/// Deterministic uniform points in a box.
pub fn sample_points(seed: u64, count: usize, bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            bounds
                .iter()
                .map(|(lo, hi)| lo + (hi - lo) * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
                .collect()
        })
        .collect()
}
