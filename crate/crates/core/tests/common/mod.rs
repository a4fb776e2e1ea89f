#![allow(dead_code)]

use std::path::PathBuf;

use subcurv_core::linalg::Mat;
use subcurv_core::{gallery, parse_submersion, ChartedManifold, SubmersionSpec};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.sub"))
}

pub fn fixture(name: &str) -> SubmersionSpec {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse_submersion(&text).expect("fixture parses")
}

pub fn example(name: &str) -> SubmersionSpec {
    gallery::build_example(name).expect("gallery entry").spec
}

/// Every gallery entry plus the two generic fixtures.
pub fn all_specs() -> Vec<SubmersionSpec> {
    let mut v: Vec<SubmersionSpec> = gallery::all().into_iter().map(|e| e.spec).collect();
    v.push(fixture("generic4"));
    v.push(fixture("generic5"));
    v
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// `Γ^k_{ij}` from central differences of the metric, step `h`.
pub fn fd_christoffel(m: &ChartedManifold, x: &[f64], h: f64) -> Vec<f64> {
    let n = m.dim();
    let g: Mat<f64> = m.metric_at(x);
    let ginv = g.inverse().unwrap();
    let dg: Vec<Mat<f64>> = (0..n)
        .map(|l| {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[l] += h;
            xm[l] -= h;
            let (gp, gm): (Mat<f64>, Mat<f64>) = (m.metric_at(&xp), m.metric_at(&xm));
            Mat::from_fn(n, n, |i, j| (gp[(i, j)] - gm[(i, j)]) / (2.0 * h))
        })
        .collect();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += 0.5 * ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                out[(k * n + i) * n + j] = v;
            }
        }
    }
    out
}

