//! Acceptance criteria 1 to 10. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; the process fails if any criterion does.

mod common;

use std::time::Instant;

use common::fd_christoffel;
use rand::Rng;
use subcurv_core::gallery;
use subcurv_core::identities::report;
use subcurv_core::identities::suite::{Record, SuiteReport, Variant};
use subcurv_core::identities::{run_suite, ExampleSource, Family, IdentityId, SuiteConfig};
use subcurv_core::manifold::{christoffel, curvature};
use subcurv_core::rng::rng_for;
use subcurv_core::submersion::NormConvention;
use subcurv_core::tensors::{generalized_tensor, GeneralizedTensorKind as K};
use subcurv_core::{parse_submersion, render_submersion, LocalGeometry};

type Outcome = Result<String, String>;

fn suite(examples: &[&str], points: usize, families: &[Family]) -> SuiteReport {
    let cfg = SuiteConfig {
        examples: examples
            .iter()
            .map(|n| ExampleSource::Gallery(n.to_string()))
            .collect(),
        points,
        families: families.to_vec(),
        ..SuiteConfig::default()
    };
    run_suite(&cfg).expect("suite runs")
}

/// Largest best-variant residual over the evaluated records of `label`, and
/// how many records that covers. A failed record counts as infinite.
fn worst(report: &SuiteReport, example: &str, label: &str) -> (f64, usize) {
    let ir = &report.examples[example].identities[label];
    let mut w = 0.0f64;
    let mut k = 0;
    for r in &ir.records {
        match r {
            Record::Evaluated(res) => {
                w = w.max(res.best_rel());
                k += 1;
            }
            Record::Failed { .. } => return (f64::INFINITY, k),
            Record::Skipped { .. } => {}
        }
    }
    (w, k)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = suite(&["hopf", "warped_interval_s1"], 100, &[Family::ONeill]);
    let elapsed = start.elapsed().as_secs_f64();
    let mut max = 0.0f64;
    let mut variants = Vec::new();
    for ex in ["hopf", "warped_interval_s1"] {
        for case in subcurv_core::identities::Case::ALL {
            let label = IdentityId::ONeill(case).label();
            let (w, k) = worst(&report, ex, &label);
            if k != 100 || !(w < 1e-8) {
                return Err(format!("{ex} {label}: max rel {w:.2e} over {k} points"));
            }
            max = max.max(w);
            if ex == "hopf" {
                let v = report.relations[&label].variant.map_or("-", Variant::as_str);
                variants.push(format!("{}={v}", case.as_str()));
            }
        }
    }
    if elapsed >= 30.0 {
        return Err(format!("took {elapsed:.1} s"));
    }
    Ok(format!(
        "max rel {max:.1e} over 2x100 points in {elapsed:.2} s; {}",
        variants.join(" ")
    ))
}

fn criterion_2() -> Outcome {
    let spec = gallery::build_example("hopf").unwrap().spec;
    let mut rng = rng_for(2, &["acceptance", "hopf-base"]);
    let mut max = 0.0f64;
    for seed in 0..100 {
        let x = spec.sample_coords(&mut rng).unwrap();
        let geo = LocalGeometry::new(&spec, &x).map_err(|e| e.to_string())?;
        let frame = geo.frame(seed).map_err(|e| e.to_string())?;
        let (a, b) = (&frame.horizontal[0], &frame.horizontal[1]);
        let k_base = geo.base.sectional(&geo.push(a), &geo.push(b));
        let k_total = geo.total.sectional(a, b);
        let axy = geo.a(a, b);
        let rhs = k_total + 3.0 * geo.g(&axy, &axy);
        let r = (k_base - rhs).abs();
        if !(r < 1e-8) || (k_base - 4.0).abs() > 1e-8 || (k_total - 1.0).abs() > 1e-8 {
            return Err(format!("{k_base} vs {k_total} + 3|A|² = {rhs} at {x:?}"));
        }
        max = max.max(r);
    }
    Ok(format!("4 = 1 + 3*1 at 100 points, max residual {max:.1e}"))
}

fn criterion_3() -> Outcome {
    let report = suite(&["hopf", "product_s2_s1"], 100, &[Family::Scalar]);
    let hopf = &report.examples["hopf"].identities["scalar"].summary;
    let block_ok = hopf.max_rel_printed.is_some_and(|r| r < 1e-7);
    let full_ok = hopf.max_rel_corrected.is_some_and(|r| r < 1e-7);
    if block_ok == full_ok {
        return Err(format!("block holds: {block_ok}, full holds: {full_ok}"));
    }
    let name = if block_ok { NormConvention::Block } else { NormConvention::Full };
    let product = &report.examples["product_s2_s1"].identities["scalar"];
    for r in &product.records {
        match r {
            Record::Evaluated(res) if (res.lhs - 2.0).abs() < 1e-12 && res.rel_residual_printed < 1e-7 => {}
            other => return Err(format!("product: {other:?}")),
        }
    }
    Ok(format!(
        "hopf holds with {} norms only (max rel {:.1e}; other convention {:.1e}); product 2 = 0 + 2",
        name.as_str(),
        if block_ok { hopf.max_rel_printed.unwrap() } else { hopf.max_rel_corrected.unwrap() },
        if block_ok { hopf.max_rel_corrected.unwrap() } else { hopf.max_rel_printed.unwrap() },
    ))
}

fn criterion_4() -> Outcome {
    let report = suite(&gallery::NAMES, 100, &[Family::Ricci]);
    let mut max = 0.0f64;
    for ex in gallery::NAMES {
        for label in ["ricci.VV", "ricci.HH", "ricci.VH"] {
            let (w, k) = worst(&report, ex, label);
            if k != 100 || !(w < 1e-8) {
                return Err(format!("{ex} {label}: max rel {w:.2e} over {k} points"));
            }
            max = max.max(w);
        }
    }
    Ok(format!("3 relations x 4 examples x 100 points, max rel {max:.1e}"))
}

fn orthonormal(g: &subcurv_core::linalg::Mat<f64>, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = g.rows();
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for u in &out {
            let c = g.bilinear(&v, u);
            subcurv_core::linalg::axpy(-c, u, &mut v);
        }
        let norm = g.bilinear(&v, &v).sqrt();
        if norm > 1e-3 {
            out.push(v.iter().map(|c| c / norm).collect());
        }
    }
    out
}

fn criterion_5() -> Outcome {
    let s3 = gallery::build_example("hopf").unwrap().spec.total().clone();
    let mut rng = rng_for(5, &["acceptance", "s3"]);
    let mut flat = 0.0f64;
    let mut l_dev = 0.0f64;
    for _ in 0..100 {
        let x = s3.sample_coords(&mut rng).unwrap();
        let c = curvature(&s3, &x).map_err(|e| e.to_string())?;
        let e = orthonormal(&c.metric, &mut rng);
        let pick: Vec<&Vec<f64>> = (0..4).map(|_| &e[rng.random_range(0..3)]).collect();
        for kind in [K::WeylProjective, K::Concircular, K::Conformal, K::MProjective] {
            let v = generalized_tensor(kind, &c, pick[0], pick[1], pick[2], pick[3], true)
                .map_err(|e| e.to_string())?;
            flat = flat.max(v.abs());
        }
        let l = generalized_tensor(K::Conharmonic, &c, &e[0], &e[1], &e[1], &e[0], true)
            .map_err(|e| e.to_string())?;
        l_dev = l_dev.max((l + 3.0).abs());
    }
    if flat < 1e-8 && l_dev < 1e-8 {
        Ok(format!("|P*|,|C*|,|V*|,|W*| <= {flat:.1e}; L*(X,Y,Y,X) = -3 within {l_dev:.1e}"))
    } else {
        Err(format!("flatness {flat:.2e}, L* deviation {l_dev:.2e}"))
    }
}

fn criterion_6() -> Outcome {
    let report = suite(&gallery::NAMES, 100, &[Family::Generalized]);
    let mut corrected = Vec::new();
    let mut evaluated = 0;
    for kind in K::ALL {
        for case in subcurv_core::identities::Case::ALL {
            let label = IdentityId::Generalized(kind, case).label();
            let rel = &report.relations[&label];
            if rel.both_fail > 0 {
                return Err(format!("{label}: {} both_fail", rel.both_fail));
            }
            match rel.variant {
                Some(Variant::AsPrinted) => {}
                Some(Variant::Corrected) => corrected.push(label.clone()),
                other => return Err(format!("{label}: variant {other:?}")),
            }
            for ex in report.examples.values() {
                let s = &ex.identities[&label].summary;
                if s.failed > 0 {
                    return Err(format!("{label}: {} errors", s.failed));
                }
            }
            evaluated += 1;
        }
    }
    if report.both_fail_count() > 0 {
        return Err(format!("{} both_fail records", report.both_fail_count()));
    }
    Ok(format!(
        "{evaluated} relations exact with one variant everywhere; corrected: {}",
        corrected.join(", ")
    ))
}

fn criterion_7() -> Outcome {
    let families = [Family::Corollary];
    let report = suite(&["hopf", "warped_interval_s1"], 100, &families);
    let spec = gallery::build_example("hopf").unwrap().spec;
    for x in &report.examples["hopf"].points {
        let geo = LocalGeometry::new(&spec, x).map_err(|e| e.to_string())?;
        let n = geo.g(geo.n_vec(), geo.n_vec()).sqrt();
        if n >= 1e-10 {
            return Err(format!("hopf |N| = {n:e}"));
        }
    }
    let mut max = 0.0f64;
    let mut rows = 0;
    for (label, ir) in &report.examples["hopf"].identities {
        let (w, k) = worst(&report, "hopf", label);
        if k != 100 || !(w < 1e-8) {
            return Err(format!("hopf {label}: max rel {w:.2e} over {k} points"));
        }
        max = max.max(w);
        rows += ir.summary.evaluated;
    }
    for (label, ir) in &report.examples["warped_interval_s1"].identities {
        if ir.summary.evaluated > 0 || ir.summary.skip_reason.is_none() {
            return Err(format!("warped {label} was not skipped"));
        }
    }
    Ok(format!(
        "hopf: {rows} corollary evaluations, max rel {max:.1e}; warped: all skipped (N ≠ 0)"
    ))
}

fn criterion_8() -> Outcome {
    let report = suite(&["product_s2_s1"], 100, &Family::ALL);
    let mut max = 0.0f64;
    for ir in report.examples["product_s2_s1"].identities.values() {
        for r in &ir.records {
            match r {
                Record::Evaluated(res) => {
                    let best = res.best_rel();
                    if !(best < 1e-12) {
                        return Err(format!("{}: {best:e}", res.id));
                    }
                    max = max.max(best);
                }
                Record::Failed { error, .. } => return Err(error.clone()),
                Record::Skipped { .. } => {}
            }
        }
    }
    let spec = gallery::build_example("product_s2_s1").unwrap().spec;
    let mut tan = 0.0f64;
    for (i, x) in report.examples["product_s2_s1"].points.iter().enumerate() {
        let geo = LocalGeometry::new(&spec, x).map_err(|e| e.to_string())?;
        let frame = geo.frame(i as u64).map_err(|e| e.to_string())?;
        let all: Vec<&Vec<f64>> = frame.horizontal.iter().chain(&frame.vertical).collect();
        for e in &all {
            for f in &all {
                for v in geo.t(e, f).iter().chain(&geo.a(e, f)) {
                    tan = tan.max(v.abs());
                }
            }
        }
        tan = geo.n_vec().iter().fold(tan, |m, v| m.max(v.abs()));
    }
    if tan < 1e-12 {
        Ok(format!("identity residuals <= {max:.1e}; |T|, |A|, |N| <= {tan:.1e}"))
    } else {
        Err(format!("T/A/N reach {tan:e}"))
    }
}

fn criterion_9() -> Outcome {
    let mut rng = rng_for(9, &["acceptance", "hygiene"]);
    let mut fd_gap = 0.0f64;
    let mut sym = 0.0f64;
    let mut count = 0;
    for entry in gallery::all() {
        for m in [entry.spec.total(), entry.spec.base()] {
            let n = m.dim();
            for _ in 0..50 {
                let x = m.sample_coords(&mut rng).unwrap();
                let ad = christoffel(m, &x).map_err(|e| e.to_string())?;
                let fd = fd_christoffel(m, &x, 1e-5);
                for (a, b) in ad.iter().zip(&fd) {
                    fd_gap = fd_gap.max((a - b).abs());
                }
                let c = curvature(m, &x).map_err(|e| e.to_string())?;
                let r = |i, j, k, l| c.riemann(i, j, k, l);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                sym = sym
                                    .max((r(i, j, k, l) + r(j, i, k, l)).abs())
                                    .max((r(i, j, k, l) + r(i, j, l, k)).abs())
                                    .max((r(i, j, k, l) - r(k, l, i, j)).abs())
                                    .max((r(i, j, k, l) + r(j, k, i, l) + r(k, i, j, l)).abs());
                            }
                        }
                    }
                }
                count += 1;
            }
        }
    }
    if fd_gap < 1e-5 && sym < 1e-9 {
        Ok(format!(
            "{count} points: Christoffel vs finite differences {fd_gap:.1e}; symmetries and Bianchi {sym:.1e}"
        ))
    } else {
        Err(format!("finite-difference gap {fd_gap:e}, symmetry defect {sym:e}"))
    }
}

fn criterion_10() -> Outcome {
    let cfg = SuiteConfig {
        points: 20,
        ..SuiteConfig::default()
    };
    let a = report::to_json(&run_suite(&cfg).map_err(|e| e.to_string())?).unwrap();
    let b = report::to_json(&run_suite(&cfg).map_err(|e| e.to_string())?).unwrap();
    if a != b {
        return Err("two runs with the same seed differ".into());
    }
    let reimported: Vec<ExampleSource> = gallery::all()
        .iter()
        .map(|e| parse_submersion(&render_submersion(&e.spec)).map(ExampleSource::Spec))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let original = run_suite(&cfg).unwrap();
    let again = run_suite(&SuiteConfig {
        examples: reimported,
        ..cfg
    })
    .unwrap();
    let mut max = 0.0f64;
    for ((name, ex0), ex1) in original.examples.iter().zip(again.examples.values()) {
        for (p0, p1) in ex0.points.iter().zip(&ex1.points) {
            for (u, v) in p0.iter().zip(p1) {
                max = max.max((u - v).abs());
            }
        }
        for ((label, i0), i1) in ex0.identities.iter().zip(ex1.identities.values()) {
            if i0.records.len() != i1.records.len() {
                return Err(format!("{name} {label}: record counts differ"));
            }
            for (r0, r1) in i0.records.iter().zip(&i1.records) {
                match (r0, r1) {
                    (Record::Evaluated(x), Record::Evaluated(y)) => {
                        if x.verdict != y.verdict {
                            return Err(format!("{name} {label}: verdict changed"));
                        }
                        for (u, v) in [
                            (x.lhs, y.lhs),
                            (x.rhs_printed, y.rhs_printed),
                            (x.rel_residual_printed, y.rel_residual_printed),
                        ] {
                            max = max.max((u - v).abs());
                        }
                    }
                    (Record::Skipped { .. }, Record::Skipped { .. }) => {}
                    _ => return Err(format!("{name} {label}: record kinds differ")),
                }
            }
        }
    }
    if max <= 1e-10 {
        Ok(format!(
            "byte-identical JSON for equal seeds ({} bytes); export/reimport changes results by {max:.1e}",
            a.len()
        ))
    } else {
        Err(format!("export/reimport changes results by {max:e}"))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("O'Neill relations on hopf and warped_interval_s1", criterion_1),
        ("Hopf base curvature 4 = 1 + 3|A_X Y|²", criterion_2),
        ("scalar curvature relation and norm convention", criterion_3),
        ("Ricci relations on the gallery", criterion_4),
        ("generalized tensors on the unit three-sphere", criterion_5),
        ("generalized-tensor relations (30)", criterion_6),
        ("N-free corollary forms", criterion_7),
        ("structural zeros on product_s2_s1", criterion_8),
        ("numerical hygiene", criterion_9),
        ("determinism and export round-trip", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.1} s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
