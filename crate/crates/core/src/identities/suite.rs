//! Sweeps every identity over sampled points of one or more submersions.

use std::path::PathBuf;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use super::{rel_residual, IdentityId, Probe, N_ZERO};
use crate::error::{Error, Result};
use crate::gallery;
use crate::parse::parse_submersion;
use crate::rng::{derive_seed, rng_for};
use crate::submersion::{LocalGeometry, NormConvention, SubmersionSpec};
use crate::tensors::GeneralizedTensorKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[serde(rename = "oneill")]
    ONeill,
    Ricci,
    Scalar,
    Generalized,
    Corollary,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::ONeill,
        Family::Ricci,
        Family::Scalar,
        Family::Generalized,
        Family::Corollary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::ONeill => "oneill",
            Family::Ricci => "ricci",
            Family::Scalar => "scalar",
            Family::Generalized => "generalized",
            Family::Corollary => "corollary",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown family `{s}` (expected one of oneill, ricci, scalar, generalized, corollary)"
                ))
            })
    }
}

#[derive(Clone, Debug)]
pub enum ExampleSource {
    Gallery(String),
    File(PathBuf),
    Spec(SubmersionSpec),
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub examples: Vec<ExampleSource>,
    pub points: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub families: Vec<Family>,
    /// Worker cap; `None` reads `SUBCURV_THREADS`, `0` means automatic.
    pub threads: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            examples: gallery::NAMES
                .into_iter()
                .map(|n| ExampleSource::Gallery(n.to_string()))
                .collect(),
            points: 100,
            seed: 42,
            tolerance: 1e-8,
            families: Family::ALL.to_vec(),
            threads: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ExactAsPrinted,
    ExactSignCorrected,
    BothFail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ExactAsPrinted => "exact_as_printed",
            Verdict::ExactSignCorrected => "exact_sign_corrected",
            Verdict::BothFail => "both_fail",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub id: IdentityId,
    pub point_index: usize,
    /// Seed of the compatible frame and of the typed vectors.
    pub seed: u64,
    pub point: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub lhs: f64,
    pub rhs_printed: f64,
    pub rhs_corrected: Option<f64>,
    pub abs_residual_printed: f64,
    pub rel_residual_printed: f64,
    pub abs_residual_corrected: Option<f64>,
    pub rel_residual_corrected: Option<f64>,
    pub verdict: Verdict,
}

impl IdentityResidual {
    /// Smallest relative residual over the available variants.
    pub fn best_rel(&self) -> f64 {
        self.rel_residual_corrected
            .map_or(self.rel_residual_printed, |c| c.min(self.rel_residual_printed))
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Record {
    Evaluated(IdentityResidual),
    Skipped {
        point_index: usize,
        point: Vec<f64>,
        reason: String,
    },
    Failed {
        point_index: usize,
        point: Vec<f64>,
        error: String,
    },
}

/// Which right-hand side holds at every evaluated point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AsPrinted,
    Corrected,
    Neither,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::AsPrinted => "as_printed",
            Variant::Corrected => "corrected",
            Variant::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentitySummary {
    pub evaluated: usize,
    pub skipped: usize,
    pub failed: usize,
    pub exact_as_printed: usize,
    pub exact_sign_corrected: usize,
    pub both_fail: usize,
    pub max_rel_printed: Option<f64>,
    pub median_rel_printed: Option<f64>,
    pub max_rel_corrected: Option<f64>,
    pub median_rel_corrected: Option<f64>,
    /// Largest over points of the better variant's residual.
    pub max_rel_best: Option<f64>,
    pub variant: Option<Variant>,
    pub variant_labels: (String, String),
    pub skip_reason: Option<String>,
}

impl IdentitySummary {
    pub fn passed(&self) -> bool {
        self.both_fail == 0 && self.failed == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub summary: IdentitySummary,
    pub records: Vec<Record>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleReport {
    pub source: String,
    pub dim_total: usize,
    pub dim_base: usize,
    pub points: Vec<Vec<f64>>,
    pub identities: IndexMap<String, IdentityReport>,
}

/// One relation across every example.
#[derive(Clone, Debug, Serialize)]
pub struct RelationSummary {
    pub examples_evaluated: usize,
    pub records: usize,
    pub variant: Option<Variant>,
    pub both_fail: usize,
    pub max_rel_best: Option<f64>,
}

/// Statements that are reported but not asserted.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub example: String,
    pub holds: Option<bool>,
    pub max_rel_residual: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfigEcho {
    pub points: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub families: Vec<Family>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfigEcho,
    pub examples: IndexMap<String, ExampleReport>,
    pub relations: IndexMap<String, RelationSummary>,
    /// Relations whose printed form fails somewhere while the corrected one
    /// holds everywhere.
    pub corrections_required: Vec<String>,
    pub claim_checks: Vec<ClaimCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.examples
            .values()
            .all(|e| e.identities.values().all(|i| i.summary.passed()))
    }

    pub fn both_fail_count(&self) -> usize {
        self.examples
            .values()
            .flat_map(|e| e.identities.values())
            .map(|i| i.summary.both_fail)
            .sum()
    }
}

struct Loaded {
    name: String,
    source: String,
    spec: SubmersionSpec,
}

fn load(sources: &[ExampleSource]) -> Result<Vec<Loaded>> {
    let mut out: Vec<Loaded> = Vec::new();
    for src in sources {
        let (spec, source) = match src {
            ExampleSource::Gallery(name) => {
                (gallery::build_example(name)?.spec, format!("gallery:{name}"))
            }
            ExampleSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                (parse_submersion(&text)?, format!("file:{}", path.display()))
            }
            ExampleSource::Spec(spec) => (spec.clone(), "inline".to_string()),
        };
        let mut name = spec.name().to_string();
        let mut k = 2;
        while out.iter().any(|l| l.name == name) {
            name = format!("{}#{k}", spec.name());
            k += 1;
        }
        out.push(Loaded { name, source, spec });
    }
    Ok(out)
}

fn threads_from_env() -> Result<usize> {
    match std::env::var("SUBCURV_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("SUBCURV_THREADS must be a non-negative integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn check_config(config: &SuiteConfig) -> Result<()> {
    if config.points == 0 {
        return Err(Error::Config("points must be at least 1".into()));
    }
    if !(config.tolerance > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    if config.examples.is_empty() {
        return Err(Error::Config("no examples given".into()));
    }
    if config.families.is_empty() {
        return Err(Error::Config("no identity families selected".into()));
    }
    Ok(())
}

/// Outcome of every selected identity at one point.
fn point_cells(
    example: &str,
    spec: &SubmersionSpec,
    idx: usize,
    x: &[f64],
    seed: u64,
    ids: &[IdentityId],
    tol: f64,
) -> Vec<Record> {
    let cell_seed = derive_seed(seed, &[example, "point", &idx.to_string()]);
    let fail = |e: &Error| Record::Failed {
        point_index: idx,
        point: x.to_vec(),
        error: e.to_string(),
    };
    let geo = match LocalGeometry::new(spec, x) {
        Ok(g) => g,
        Err(e) => return ids.iter().map(|_| fail(&e)).collect(),
    };
    let frame = match geo.frame(cell_seed) {
        Ok(f) => f,
        Err(e) => return ids.iter().map(|_| fail(&e)).collect(),
    };
    let probe = Probe::new(&geo, &frame);
    ids.iter()
        .map(|&id| {
            let label = id.label();
            let mut rng = rng_for(cell_seed, &[&label]);
            let vectors = probe.typed_vectors(&id.pattern(), &mut rng);
            if matches!(id, IdentityId::Corollary(..)) && probe.n_norm() >= N_ZERO {
                return Record::Skipped {
                    point_index: idx,
                    point: x.to_vec(),
                    reason: "N ≠ 0".to_string(),
                };
            }
            match probe.evaluate(id, &vectors) {
                Ok(ev) => {
                    let abs_p = (ev.lhs - ev.rhs_printed).abs();
                    let rel_p = rel_residual(ev.lhs, ev.rhs_printed);
                    let abs_c = ev.rhs_corrected.map(|c| (ev.lhs - c).abs());
                    let rel_c = ev.rhs_corrected.map(|c| rel_residual(ev.lhs, c));
                    let verdict = if rel_p < tol {
                        Verdict::ExactAsPrinted
                    } else if rel_c.is_some_and(|r| r < tol) {
                        Verdict::ExactSignCorrected
                    } else {
                        Verdict::BothFail
                    };
                    Record::Evaluated(IdentityResidual {
                        id,
                        point_index: idx,
                        seed: cell_seed,
                        point: x.to_vec(),
                        vectors,
                        lhs: ev.lhs,
                        rhs_printed: ev.rhs_printed,
                        rhs_corrected: ev.rhs_corrected,
                        abs_residual_printed: abs_p,
                        rel_residual_printed: rel_p,
                        abs_residual_corrected: abs_c,
                        rel_residual_corrected: rel_c,
                        verdict,
                    })
                }
                Err(e @ Error::Dimension { .. }) => Record::Skipped {
                    point_index: idx,
                    point: x.to_vec(),
                    reason: e.to_string(),
                },
                Err(e) => fail(&e),
            }
        })
        .collect()
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

fn max_of(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::max)
}

fn summarize(id: IdentityId, records: &[Record], tol: f64) -> IdentitySummary {
    let (lp, lc) = id.variant_labels();
    let mut s = IdentitySummary {
        variant_labels: (lp.to_string(), lc.to_string()),
        ..Default::default()
    };
    let mut printed = Vec::new();
    let mut corrected = Vec::new();
    let mut best = Vec::new();
    let (mut all_printed, mut all_corrected) = (true, true);
    for r in records {
        match r {
            Record::Evaluated(res) => {
                s.evaluated += 1;
                match res.verdict {
                    Verdict::ExactAsPrinted => s.exact_as_printed += 1,
                    Verdict::ExactSignCorrected => s.exact_sign_corrected += 1,
                    Verdict::BothFail => s.both_fail += 1,
                }
                printed.push(res.rel_residual_printed);
                all_printed &= res.rel_residual_printed < tol;
                match res.rel_residual_corrected {
                    Some(c) => {
                        corrected.push(c);
                        all_corrected &= c < tol;
                    }
                    None => all_corrected = false,
                }
                best.push(res.best_rel());
            }
            Record::Skipped { reason, .. } => {
                s.skipped += 1;
                s.skip_reason.get_or_insert_with(|| reason.clone());
            }
            Record::Failed { .. } => s.failed += 1,
        }
    }
    s.max_rel_printed = max_of(&printed);
    s.median_rel_printed = median(&mut printed);
    s.max_rel_corrected = max_of(&corrected);
    s.median_rel_corrected = median(&mut corrected);
    s.max_rel_best = max_of(&best);
    if s.evaluated > 0 {
        s.variant = Some(if all_printed {
            Variant::AsPrinted
        } else if all_corrected {
            Variant::Corrected
        } else {
            Variant::Neither
        });
    }
    s
}

fn relation_summaries(
    examples: &IndexMap<String, ExampleReport>,
    ids: &[IdentityId],
    tol: f64,
) -> IndexMap<String, RelationSummary> {
    let mut out = IndexMap::new();
    for id in ids {
        let label = id.label();
        let mut merged = Vec::new();
        let mut examples_evaluated = 0;
        for ex in examples.values() {
            if let Some(rep) = ex.identities.get(&label) {
                if rep.summary.evaluated > 0 {
                    examples_evaluated += 1;
                }
                merged.extend(rep.records.iter().cloned());
            }
        }
        let s = summarize(*id, &merged, tol);
        out.insert(
            label,
            RelationSummary {
                examples_evaluated,
                records: s.evaluated,
                variant: s.variant,
                both_fail: s.both_fail,
                max_rel_best: s.max_rel_best,
            },
        );
    }
    out
}

fn claim_checks(loaded: &[Loaded], points: &[Vec<Vec<f64>>], config: &SuiteConfig) -> Vec<ClaimCheck> {
    let tol = config.tolerance;
    let mut out = Vec::new();
    for (ex, pts) in loaded.iter().zip(points) {
        let mut worst_r: Option<f64> = None;
        let mut worst_c: Option<f64> = None;
        let mut n_zero_points = 0;
        let mut failure = None;
        for (idx, x) in pts.iter().enumerate() {
            let seed = derive_seed(config.seed, &[&ex.name, "point", &idx.to_string()]);
            let res = LocalGeometry::new(&ex.spec, x).and_then(|geo| {
                let frame = geo.frame(seed)?;
                let probe = Probe::new(&geo, &frame);
                let r = rel_residual(geo.total.scalar, probe.scalar_rhs_short(NormConvention::Block));
                let mut c = None;
                if probe.n_norm() < N_ZERO {
                    let mut rng = rng_for(seed, &["claim"]);
                    let mut worst: f64 = 0.0;
                    for case in super::Case::ALL {
                        let id = IdentityId::Generalized(GeneralizedTensorKind::Concircular, case);
                        let v = probe.typed_vectors(&id.pattern(), &mut rng);
                        let ev = probe.evaluate(id, &v)?;
                        worst = worst.max(rel_residual(ev.lhs, ev.rhs_printed));
                    }
                    c = Some(worst);
                }
                Ok((r, c))
            });
            match res {
                Ok((r, c)) => {
                    worst_r = Some(worst_r.map_or(r, |w| w.max(r)));
                    if let Some(c) = c {
                        n_zero_points += 1;
                        worst_c = Some(worst_c.map_or(c, |w| w.max(c)));
                    }
                }
                Err(e) => {
                    failure.get_or_insert(e.to_string());
                }
            }
        }
        let detail_err = |d: String| match &failure {
            Some(e) => format!("{d}; evaluation error: {e}"),
            None => d,
        };
        out.push(ClaimCheck {
            claim: "concircular scalar curvature r = r̂ + r^G − |A|² − |T|²".into(),
            example: ex.name.clone(),
            holds: worst_r.map(|w| w < tol),
            max_rel_residual: worst_r,
            detail: detail_err("compared with the total scalar curvature, block norms".into()),
        });
        out.push(ClaimCheck {
            claim: "concircular relations with N = 0".into(),
            example: ex.name.clone(),
            holds: worst_c.map(|w| w < tol),
            max_rel_residual: worst_c,
            detail: detail_err(format!(
                "printed concircular relations at the {n_zero_points} of {} points where N = 0",
                pts.len()
            )),
        });
    }
    out
}

/// Runs every selected identity at `config.points` seeded points of every
/// example. Evaluation errors are recorded per cell; only configuration and
/// loading problems abort the run.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    check_config(config)?;
    let loaded = load(&config.examples)?;
    let ids: Vec<IdentityId> = IdentityId::all()
        .into_iter()
        .filter(|id| config.families.contains(&id.family()))
        .collect();
    let threads = match config.threads {
        Some(t) => t,
        None => threads_from_env()?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut points = Vec::with_capacity(loaded.len());
    for ex in &loaded {
        let mut rng = rng_for(config.seed, &[&ex.name, "points"]);
        let pts = (0..config.points)
            .map(|_| ex.spec.sample_coords(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        points.push(pts);
    }

    let tol = config.tolerance;
    let cells: Vec<Vec<Vec<Record>>> = pool.install(|| {
        loaded
            .iter()
            .zip(&points)
            .map(|(ex, pts)| {
                pts.par_iter()
                    .enumerate()
                    .map(|(idx, x)| point_cells(&ex.name, &ex.spec, idx, x, config.seed, &ids, tol))
                    .collect()
            })
            .collect()
    });

    let mut examples = IndexMap::new();
    for ((ex, pts), per_point) in loaded.iter().zip(&points).zip(cells) {
        let mut identities = IndexMap::new();
        let mut by_id: Vec<Vec<Record>> = vec![Vec::with_capacity(pts.len()); ids.len()];
        for row in per_point {
            for (k, rec) in row.into_iter().enumerate() {
                by_id[k].push(rec);
            }
        }
        for (id, mut records) in ids.iter().zip(by_id) {
            let summary = summarize(*id, &records, tol);
            // A relation that is skipped at every point for the same reason
            // is reported once instead of once per point.
            if summary.evaluated == 0 && summary.failed == 0 {
                records.clear();
            }
            identities.insert(id.label(), IdentityReport { summary, records });
        }
        examples.insert(
            ex.name.clone(),
            ExampleReport {
                source: ex.source.clone(),
                dim_total: ex.spec.total().dim(),
                dim_base: ex.spec.base().dim(),
                points: pts.clone(),
                identities,
            },
        );
    }

    let relations = relation_summaries(&examples, &ids, tol);
    let corrections_required = relations
        .iter()
        .filter(|(_, r)| r.variant == Some(Variant::Corrected))
        .map(|(k, _)| k.clone())
        .collect();
    let claim_checks = if config.families.contains(&Family::Generalized) {
        claim_checks(&loaded, &points, config)
    } else {
        Vec::new()
    };
    Ok(SuiteReport {
        config: SuiteConfigEcho {
            points: config.points,
            seed: config.seed,
            tolerance: config.tolerance,
            families: config.families.clone(),
        },
        examples,
        relations,
        corrections_required,
        claim_checks,
    })
}
