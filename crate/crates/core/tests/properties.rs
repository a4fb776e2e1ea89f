//! Property tests: parser round-trips, curvature symmetries, algebraic
//! properties of T and A, and multilinearity of the generalized tensors.

mod common;

use common::{all_specs, close, fixture};
use proptest::prelude::*;
use subcurv_core::expr::{Expr, Func};
use subcurv_core::manifold::curvature;
use subcurv_core::rng::{derive_seed, rng_for};
use subcurv_core::tensors::{generalized_tensor, GeneralizedTensorKind as K};
use subcurv_core::{parse_metric_expression, parse_submersion, render_submersion, LocalGeometry};

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0usize..2).prop_map(Expr::Var),
        (-4.0f64..4.0).prop_map(Expr::Const),
        (0u8..6).prop_map(|k| Expr::Const(k as f64)),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Div(b(x), b(y))),
            inner.clone().prop_map(move |x| Expr::Neg(b(x))),
            (inner.clone(), -3i32..4).prop_map(move |(x, k)| Expr::Powi(b(x), k)),
            (inner.clone(), 0.1f64..2.5).prop_map(move |(x, c)| Expr::Powf(b(x), c)),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Pow(b(x), b(y))),
            (inner, 0usize..10).prop_map(move |(x, f)| {
                let f = [
                    Func::Sin,
                    Func::Cos,
                    Func::Tan,
                    Func::Exp,
                    Func::Log,
                    Func::Sqrt,
                    Func::Sinh,
                    Func::Cosh,
                    Func::Sin,
                    Func::Exp,
                ][f];
                Expr::Call(f, b(x))
            }),
        ]
    })
}

/// The parser turns constant exponents into `Powi`/`Powf`; generated trees
/// get the same treatment so that they are ones the parser can produce.
fn canonical(e: Expr) -> Expr {
    let b = |e: Box<Expr>| Box::new(canonical(*e));
    match e {
        Expr::Add(x, y) => Expr::Add(b(x), b(y)),
        Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
        Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
        Expr::Div(x, y) => Expr::Div(b(x), b(y)),
        Expr::Neg(x) => Expr::Neg(b(x)),
        Expr::Call(f, x) => Expr::Call(f, b(x)),
        Expr::Powi(x, k) => Expr::Powi(b(x), k),
        Expr::Powf(x, c) if c.fract() == 0.0 => Expr::Powi(b(x), c as i32),
        Expr::Powf(x, c) => Expr::Powf(b(x), c),
        Expr::Pow(x, y) => match y.eval_const() {
            Some(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => Expr::Powi(b(x), c as i32),
            Some(c) if c.is_finite() => Expr::Powf(b(x), c),
            _ => Expr::Pow(b(x), b(y)),
        },
        leaf => leaf,
    }
}

fn same(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rendered_expressions_parse_to_the_same_function(e in expr_strategy(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let e = canonical(e);
        let names = vec!["x".to_string(), "y".to_string()];
        let text = format!("coords=(x, y); g=[[{}, 0], [0, 1]]", e.render(&names));
        let m = parse_metric_expression(&text).unwrap();
        let back = &m.metric_exprs()[0][0];
        let (u, v): (f64, f64) = (e.eval(&[x, y]), back.eval(&[x, y]));
        prop_assert!(same(u, v), "{text}: {u} vs {v}");
        // Rendering is a fixed point after one round.
        prop_assert_eq!(back.render(&names), parse_metric_expression(&format!("coords=(x, y); g=[[{}, 0], [0, 1]]", back.render(&names))).unwrap().metric_exprs()[0][0].render(&names));
    }

    #[test]
    fn seeds_are_stable_and_tag_sensitive(seed in any::<u64>(), a in "[a-z]{1,6}", b in "[a-z]{1,6}") {
        prop_assert_eq!(derive_seed(seed, &[&a, &b]), derive_seed(seed, &[&a, &b]));
        if a != b {
            prop_assert_ne!(derive_seed(seed, &[&a, &b]), derive_seed(seed, &[&b, &a]));
        }
    }
}

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riemann_symmetries_and_first_bianchi(which in 0usize..6, seed in any::<u64>()) {
        let spec = &all_specs()[which];
        let m = spec.total();
        let x = m.sample_coords(&mut rng_for(seed, &["pt"])).unwrap();
        let c = curvature(m, &x).unwrap();
        let n = m.dim();
        let r = |i: usize, j: usize, k: usize, l: usize| c.riemann(i, j, k, l);
        let scale = 1.0 + c.riemann_lowered.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..n { for j in 0..n { for k in 0..n { for l in 0..n {
            prop_assert!((r(i, j, k, l) + r(j, i, k, l)).abs() < 1e-9 * scale);
            prop_assert!((r(i, j, k, l) + r(i, j, l, k)).abs() < 1e-9 * scale);
            prop_assert!((r(i, j, k, l) - r(k, l, i, j)).abs() < 1e-9 * scale);
            prop_assert!((r(i, j, k, l) + r(j, k, i, l) + r(k, i, j, l)).abs() < 1e-9 * scale);
        }}}}
    }

    #[test]
    fn oneill_tensor_algebra(which in 0usize..6, seed in any::<u64>(), c1 in vec_strategy(5), c2 in vec_strategy(5), c3 in vec_strategy(5)) {
        let spec = &all_specs()[which];
        let x = spec.sample_coords(&mut rng_for(seed, &["pt"])).unwrap();
        let geo = LocalGeometry::new(spec, &x).unwrap();
        let n = x.len();
        let (e, f, h) = (&c1[..n], &c2[..n], &c3[..n]);
        let (ue, uf) = (geo.vertical(e), geo.vertical(f));
        let (xe, xf) = (geo.horizontal(e), geo.horizontal(f));
        let tol = 1e-10;
        let zero = |v: &[f64]| v.iter().all(|c| c.abs() < tol);
        let eq = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(p, q)| close(*p, *q, tol));
        // T_U V = T_V U, A_X Y = −A_Y X
        prop_assert!(eq(&geo.t(&ue, &uf), &geo.t(&uf, &ue)));
        let axy = geo.a(&xe, &xf);
        let ayx: Vec<f64> = geo.a(&xf, &xe).iter().map(|v| -v).collect();
        prop_assert!(eq(&axy, &ayx));
        // T vanishes along horizontal directions, A along vertical ones.
        prop_assert!(zero(&geo.t(&xe, f)));
        prop_assert!(zero(&geo.a(&ue, f)));
        // T_U and A_X swap the two distributions.
        prop_assert!(zero(&geo.vertical(&geo.t(&ue, &uf))));
        prop_assert!(zero(&geo.horizontal(&geo.t(&ue, &xf))));
        prop_assert!(zero(&geo.horizontal(&axy)));
        prop_assert!(zero(&geo.vertical(&geo.a(&xe, &uf))));
        // Both are skew-adjoint.
        prop_assert!(close(geo.g(&geo.t(e, f), h), -geo.g(f, &geo.t(e, h)), tol));
        prop_assert!(close(geo.g(&geo.a(e, f), h), -geo.g(f, &geo.a(e, h)), tol));
        // N is horizontal.
        prop_assert!(zero(&geo.vertical(geo.n_vec())));
    }

    #[test]
    fn generalized_tensors_are_multilinear_and_skew(kind in 0usize..5, seed in any::<u64>(), v in proptest::collection::vec(vec_strategy(5), 5), s in -2.0f64..2.0) {
        let kind = K::ALL[kind];
        let spec = fixture("generic5");
        let m = spec.total();
        let x = m.sample_coords(&mut rng_for(seed, &["pt"])).unwrap();
        let c = curvature(m, &x).unwrap();
        let t = |a: &[f64], b: &[f64], z: &[f64], h: &[f64]| generalized_tensor(kind, &c, a, b, z, h, false).unwrap();
        let (a, b, z, h, w) = (&v[0], &v[1], &v[2], &v[3], &v[4]);
        let comb: Vec<f64> = a.iter().zip(w).map(|(p, q)| p + s * q).collect();
        let lhs = t(&comb, b, z, h);
        let rhs = t(a, b, z, h) + s * t(w, b, z, h);
        prop_assert!(close(lhs, rhs, 1e-10));
        let comb: Vec<f64> = h.iter().zip(w).map(|(p, q)| p + s * q).collect();
        prop_assert!(close(t(a, b, z, &comb), t(a, b, z, h) + s * t(a, b, z, w), 1e-10));
        prop_assert!(close(t(a, b, z, h), -t(b, a, z, h), 1e-10));
        if matches!(kind, K::Concircular | K::Conharmonic | K::Conformal) {
            prop_assert!(close(t(a, b, z, h), -t(a, b, h, z), 1e-10));
            prop_assert!(close(t(a, b, z, h), t(z, h, a, b), 1e-10));
        }
    }
}

#[test]
fn every_spec_round_trips_through_its_rendering() {
    let mut rng = rng_for(5, &["render"]);
    for spec in all_specs() {
        let text = render_submersion(&spec);
        let back = parse_submersion(&text).unwrap();
        assert_eq!(back.name(), spec.name());
        assert_eq!(back.total().coord_names(), spec.total().coord_names());
        assert_eq!(back.total().domain(), spec.total().domain());
        assert_eq!(back.fibre_coords(), spec.fibre_coords());
        for _ in 0..10 {
            let x = spec.sample_coords(&mut rng).unwrap();
            let (g0, g1) = (spec.total().metric_at(&x), back.total().metric_at(&x));
            assert!(g0.max_abs_diff(&g1) == 0.0, "{}", spec.name());
            assert_eq!(spec.project(&x), back.project(&x));
        }
    }
}
