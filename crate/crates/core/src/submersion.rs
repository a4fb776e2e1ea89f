//! Submersion structure: differential, vertical/horizontal projectors,
//! compatible frames, the O'Neill tensors `T` and `A`, their covariant
//! derivatives and the mean curvature field `N`.
//!
//! Projectors are smooth matrix fields
//! `P_h = G⁻¹Jᵀ(JG⁻¹Jᵀ)⁻¹J` and `P_v = I − P_h` with `J = dπ`. Tensors are
//! evaluated with chart-constant extensions of their arguments, so e.g.
//!
//! ```text
//! T_E F = P_v[(D_d P_h)F + Γ(d, P_h F)] + P_h[−(D_d P_h)F + Γ(d, P_v F)],  d = P_v E
//! ```
//!
//! and `A` is the same expression with `d = P_h E`.

use rand::Rng;
use serde::Serialize;

use crate::dual::{seed, seed_axis, Dual, Scalar};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{self, Mat};
use crate::manifold::{
    check_positive_definite, connection, curvature, metric_derivative_check, ChartedManifold,
    Connection, CurvatureData, MetricField, Point, TangentVector, VectorClass,
};
use crate::rng::rng_for;

#[derive(Clone, Debug, PartialEq)]
pub struct SubmersionSpec {
    name: String,
    total: ChartedManifold,
    base: ChartedManifold,
    pi: Vec<Expr>,
    fibre_coords: Vec<usize>,
}

impl SubmersionSpec {
    pub fn new(
        name: impl Into<String>,
        total: ChartedManifold,
        base: ChartedManifold,
        pi: Vec<Expr>,
    ) -> Result<Self> {
        let name = name.into();
        if base.dim() >= total.dim() {
            return Err(Error::Dimension {
                kind: format!("submersion `{name}` total space"),
                dim: total.dim(),
                required: base.dim() + 1,
            });
        }
        if pi.len() != base.dim() {
            return Err(Error::Arity(format!(
                "projection has {} components, base dimension is {}",
                pi.len(),
                base.dim()
            )));
        }
        for e in &pi {
            if e.max_var().is_some_and(|v| v >= total.dim()) {
                return Err(Error::Arity("projection references an unknown coordinate".into()));
            }
        }
        let fibre_coords = (0..total.dim())
            .filter(|&i| !pi.iter().any(|e| e.uses_var(i)))
            .collect();
        Ok(SubmersionSpec {
            name,
            total,
            base,
            pi,
            fibre_coords,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn total(&self) -> &ChartedManifold {
        &self.total
    }

    pub fn base(&self) -> &ChartedManifold {
        &self.base
    }

    pub fn pi_exprs(&self) -> &[Expr] {
        &self.pi
    }

    pub fn fibre_dim(&self) -> usize {
        self.total.dim() - self.base.dim()
    }

    /// Total-space coordinates the projection does not depend on.
    pub fn fibre_coords(&self) -> &[usize] {
        &self.fibre_coords
    }

    /// Whether the fibres are coordinate planes of the total chart.
    pub fn is_adapted(&self) -> bool {
        self.fibre_coords.len() == self.fibre_dim()
    }

    pub fn project<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.pi.iter().map(|e| e.eval(x)).collect()
    }

    /// `dπ` at `x`, a `b×n` matrix.
    pub fn jacobian<S: Scalar>(&self, x: &[S]) -> Mat<S> {
        let (b, n) = (self.base.dim(), self.total.dim());
        let mut j = Mat::zeros(b, n);
        for k in 0..n {
            let y = self.project(&seed_axis(x, k));
            for (a, v) in y.iter().enumerate() {
                j[(a, k)] = v.eps;
            }
        }
        j
    }

    /// Checks that `x` is a valid total point whose image is a valid base
    /// point.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        self.total.validate_at(x)?;
        self.base.validate_at(&self.project(x))?;
        Ok(())
    }

    /// Uniform total-space point (5% margin) whose image lies in the base
    /// domain.
    pub fn sample_coords<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        self.total
            .sample_coords_where(rng, |x| self.base.validate_at(&self.project(x)).is_ok())
    }

    fn rank_check(&self, x: &[f64], j: &Mat<f64>) -> Result<()> {
        let rank = j.rank(1e-10);
        if rank < self.base.dim() {
            return Err(Error::Rank {
                rank,
                expected: self.base.dim(),
                coords: x.to_vec(),
            });
        }
        Ok(())
    }

    pub fn require_adapted(&self) -> Result<()> {
        if self.is_adapted() {
            Ok(())
        } else {
            Err(Error::NotAdapted(format!(
                "`{}`: projection is independent of {} coordinates but the fibres have dimension {}",
                self.name,
                self.fibre_coords.len(),
                self.fibre_dim()
            )))
        }
    }
}

/// Metric, `dπ` and the horizontal projector at one point.
struct Projectors<S> {
    g: Mat<S>,
    ginv: Mat<S>,
    ph: Mat<S>,
}

fn projectors<S: Scalar>(spec: &SubmersionSpec, x: &[S]) -> Option<Projectors<S>> {
    let g = spec.total.metric_at(x);
    let ginv = g.inverse()?;
    let j = spec.jacobian(x);
    let lift = ginv.mul(&j.transpose());
    let base_inv = j.mul(&lift).inverse()?;
    let ph = lift.mul(&base_inv).mul(&j);
    Some(Projectors { g, ginv, ph })
}

/// Connection, projectors and projector derivatives at one point.
struct Jet<S> {
    n: usize,
    conn: Connection<S>,
    ph: Mat<S>,
    pv: Mat<S>,
    /// `∂_k P_h`
    dph: Vec<Mat<S>>,
}

fn jet<S: Scalar>(spec: &SubmersionSpec, x: &[S]) -> Option<Jet<S>> {
    let n = spec.total.dim();
    let conn = connection(&spec.total, x)?;
    let mut ph = Mat::zeros(n, n);
    let mut dph = Vec::with_capacity(n);
    for k in 0..n {
        let p = projectors(spec, &seed_axis(x, k))?;
        if k == 0 {
            ph = Mat::from_fn(n, n, |a, b| p.ph[(a, b)].re);
        }
        dph.push(Mat::from_fn(n, n, |a, b| p.ph[(a, b)].eps));
    }
    let pv = Mat::identity(n).sub(&ph);
    Some(Jet {
        n,
        conn,
        ph,
        pv,
        dph,
    })
}

impl<S: Scalar> Jet<S> {
    /// `P_v ∇_d(P_h F̃) + P_h ∇_d(P_v F̃)` for chart-constant `F̃`.
    fn split_derivative(&self, d: &[S], f: &[S]) -> Vec<S> {
        let n = self.n;
        let mut dpf = vec![S::zero(); n];
        for k in 0..n {
            let col = self.dph[k].mul_vec(f);
            for a in 0..n {
                dpf[a] += d[k] * col[a];
            }
        }
        let hf = self.ph.mul_vec(f);
        let vf = self.pv.mul_vec(f);
        let gh = self.conn.apply(d, &hf);
        let gv = self.conn.apply(d, &vf);
        let nabla_h: Vec<S> = (0..n).map(|a| dpf[a] + gh[a]).collect();
        let nabla_v: Vec<S> = (0..n).map(|a| gv[a] - dpf[a]).collect();
        let p1 = self.pv.mul_vec(&nabla_h);
        let p2 = self.ph.mul_vec(&nabla_v);
        (0..n).map(|a| p1[a] + p2[a]).collect()
    }

    fn t(&self, e: &[S], f: &[S]) -> Vec<S> {
        self.split_derivative(&self.pv.mul_vec(e), f)
    }

    fn a(&self, e: &[S], f: &[S]) -> Vec<S> {
        self.split_derivative(&self.ph.mul_vec(e), f)
    }

    /// Component arrays `T^a_{bc}`, `A^a_{bc}` at `(a*n + b)*n + c`, and `N^a`.
    fn arrays(&self) -> (Vec<S>, Vec<S>, Vec<S>) {
        let n = self.n;
        let mut t = vec![S::zero(); n * n * n];
        let mut a = vec![S::zero(); n * n * n];
        let unit = |i: usize| -> Vec<S> {
            (0..n)
                .map(|k| if k == i { S::one() } else { S::zero() })
                .collect()
        };
        for b in 0..n {
            let eb = unit(b);
            for c in 0..n {
                let ec = unit(c);
                let tv = self.t(&eb, &ec);
                let av = self.a(&eb, &ec);
                for r in 0..n {
                    t[(r * n + b) * n + c] = tv[r];
                    a[(r * n + b) * n + c] = av[r];
                }
            }
        }
        // Σ_j U_j U_jᵀ = P_v G⁻¹
        let vinv = self.pv.mul(&self.conn.ginv);
        let mut nv = vec![S::zero(); n];
        for r in 0..n {
            for b in 0..n {
                for c in 0..n {
                    nv[r] += vinv[(b, c)] * t[(r * n + b) * n + c];
                }
            }
        }
        (t, a, nv)
    }
}

/// Fibre through a point, as a manifold charted by the fibre coordinates with
/// the base coordinates frozen.
pub struct FibreChart<'a> {
    total: &'a ChartedManifold,
    anchor: Vec<f64>,
    idx: Vec<usize>,
    label: String,
}

impl<'a> FibreChart<'a> {
    pub fn new(spec: &'a SubmersionSpec, x: &[f64]) -> Result<Self> {
        spec.require_adapted()?;
        Ok(FibreChart {
            total: &spec.total,
            anchor: x.to_vec(),
            idx: spec.fibre_coords.clone(),
            label: format!("{}_fibre", spec.name),
        })
    }

    pub fn coords(&self) -> Vec<f64> {
        self.idx.iter().map(|&i| self.anchor[i]).collect()
    }

    /// Fibre-chart components of a vertical vector.
    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.idx.iter().map(|&i| v[i]).collect()
    }
}

impl MetricField for FibreChart<'_> {
    fn dim(&self) -> usize {
        self.idx.len()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn metric<S: Scalar>(&self, y: &[S]) -> Mat<S> {
        let mut x: Vec<S> = self.anchor.iter().map(|&v| S::from_f64(v)).collect();
        for (k, &i) in self.idx.iter().enumerate() {
            x[i] = y[k];
        }
        let g = self.total.metric_at(&x);
        Mat::from_fn(self.idx.len(), self.idx.len(), |a, b| g[(self.idx[a], self.idx[b])])
    }
}

/// Norm squares of `T`, `A` and `N` under both summation conventions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Norms {
    /// `Σ_{j,k} |T_{U_j}U_k|²`
    pub t2_block: f64,
    /// block plus `Σ_{j,i} |T_{U_j}X_i|²`
    pub t2_full: f64,
    /// `Σ_{i,i'} |A_{X_i}X_{i'}|²`
    pub a2_block: f64,
    /// block plus `Σ_{i,j} |A_{X_i}U_j|²`
    pub a2_full: f64,
    pub n2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormConvention {
    Block,
    Full,
}

impl NormConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            NormConvention::Block => "block",
            NormConvention::Full => "full",
        }
    }
}

impl Norms {
    pub fn t2(&self, c: NormConvention) -> f64 {
        match c {
            NormConvention::Block => self.t2_block,
            NormConvention::Full => self.t2_full,
        }
    }

    pub fn a2(&self, c: NormConvention) -> f64 {
        match c {
            NormConvention::Block => self.a2_block,
            NormConvention::Full => self.a2_full,
        }
    }
}

/// Orthonormal frame split into horizontal `X_i` and vertical `U_j` legs,
/// as raw component arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameVectors {
    pub horizontal: Vec<Vec<f64>>,
    pub vertical: Vec<Vec<f64>>,
}

const FRAME_PIVOT: f64 = 1e-8;
const FRAME_ATTEMPTS: usize = 8;

fn gram_schmidt_into<R: Rng + ?Sized>(
    rng: &mut R,
    g: &Mat<f64>,
    projector: &Mat<f64>,
    count: usize,
    accepted: &mut Vec<Vec<f64>>,
    prior: &[Vec<f64>],
) -> bool {
    let n = g.rows();
    for _ in 0..count {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut v = projector.mul_vec(&raw);
        let scale = g.bilinear(&v, &v).sqrt();
        if !(scale > FRAME_PIVOT) {
            return false;
        }
        for u in prior.iter().chain(accepted.iter()) {
            let c = g.bilinear(&v, u);
            linalg::axpy(-c, u, &mut v);
        }
        let norm = g.bilinear(&v, &v).sqrt();
        if !(norm > FRAME_PIVOT * scale.max(1.0)) {
            return false;
        }
        accepted.push(linalg::scaled(1.0 / norm, &v));
    }
    true
}

/// Seeded Gram–Schmidt: vertical legs from random kernel vectors, then
/// horizontal legs from random vectors projected horizontally.
pub fn frame_vectors(
    g: &Mat<f64>,
    ph: &Mat<f64>,
    pv: &Mat<f64>,
    b: usize,
    seed: u64,
    x: &[f64],
) -> Result<FrameVectors> {
    let n = g.rows();
    let mut rng = rng_for(seed, &["frame"]);
    for _ in 0..FRAME_ATTEMPTS {
        let mut vertical = Vec::new();
        if !gram_schmidt_into(&mut rng, g, pv, n - b, &mut vertical, &[]) {
            continue;
        }
        let mut horizontal = Vec::new();
        if !gram_schmidt_into(&mut rng, g, ph, b, &mut horizontal, &vertical) {
            continue;
        }
        return Ok(FrameVectors {
            horizontal,
            vertical,
        });
    }
    Err(Error::FrameDegenerate { coords: x.to_vec() })
}

/// Everything the identity evaluators need at one point of the total space.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    pub n: usize,
    pub b: usize,
    pub coords: Vec<f64>,
    pub base_coords: Vec<f64>,
    pub jacobian: Mat<f64>,
    pub ph: Mat<f64>,
    pub pv: Mat<f64>,
    /// `T^a_{bc}` at `(a*n + b)*n + c`.
    pub t: Vec<f64>,
    pub a: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    /// `(∇_k T)^a_{bc}` at `((k*n + a)*n + b)*n + c`.
    pub nabla_t: Vec<f64>,
    pub nabla_a: Vec<f64>,
    /// `(∇_k N)^a` at `k*n + a`.
    pub nabla_n: Vec<f64>,
    pub total: CurvatureData,
    pub base: CurvatureData,
    pub fibre: CurvatureData,
    pub fibre_coords: Vec<usize>,
}

impl LocalGeometry {
    pub fn new(spec: &SubmersionSpec, x: &[f64]) -> Result<Self> {
        spec.check_point(x)?;
        spec.require_adapted()?;
        let n = spec.total.dim();
        let b = spec.base.dim();
        let jac = spec.jacobian(x);
        spec.rank_check(x, &jac)?;
        let degenerate = || degenerate_error(spec, x);
        let j0 = jet::<f64>(spec, x).ok_or_else(degenerate)?;
        let (t, a, nv) = j0.arrays();
        let mut dt = vec![0.0; n * n * n * n];
        let mut da = vec![0.0; n * n * n * n];
        let mut dn = vec![0.0; n * n];
        let mut dgamma = vec![0.0; n * n * n * n];
        let n3 = n * n * n;
        for k in 0..n {
            let xd: Vec<Dual<f64>> = seed_axis(x, k);
            let jk = jet(spec, &xd).ok_or_else(degenerate)?;
            let (tk, ak, nk) = jk.arrays();
            for i in 0..n3 {
                dt[k * n3 + i] = tk[i].eps;
                da[k * n3 + i] = ak[i].eps;
                dgamma[k * n3 + i] = jk.conn.gamma[i].eps;
            }
            for i in 0..n {
                dn[k * n + i] = nk[i].eps;
            }
        }
        let gm = |k: usize, i: usize, j: usize| j0.conn.gamma[(k * n + i) * n + j];
        let cov = |arr: &[f64], darr: &[f64]| {
            let mut out = vec![0.0; n * n3];
            for k in 0..n {
                for r in 0..n {
                    for p in 0..n {
                        for q in 0..n {
                            let mut v = darr[k * n3 + (r * n + p) * n + q];
                            for m in 0..n {
                                v += gm(r, k, m) * arr[(m * n + p) * n + q]
                                    - gm(m, k, p) * arr[(r * n + m) * n + q]
                                    - gm(m, k, q) * arr[(r * n + p) * n + m];
                            }
                            out[k * n3 + (r * n + p) * n + q] = v;
                        }
                    }
                }
            }
            out
        };
        let nabla_t = cov(&t, &dt);
        let nabla_a = cov(&a, &da);
        let mut nabla_n = vec![0.0; n * n];
        for k in 0..n {
            for r in 0..n {
                let mut v = dn[k * n + r];
                for m in 0..n {
                    v += gm(r, k, m) * nv[m];
                }
                nabla_n[k * n + r] = v;
            }
        }
        let total = CurvatureData::from_parts(&j0.conn, dgamma);
        let base_coords = spec.project(x);
        let base = curvature(&spec.base, &base_coords)?;
        let chart = FibreChart::new(spec, x)?;
        let fibre = curvature(&chart, &chart.coords())?;
        Ok(LocalGeometry {
            n,
            b,
            coords: x.to_vec(),
            base_coords,
            jacobian: jac,
            ph: j0.ph,
            pv: j0.pv,
            t,
            a,
            mean_curvature: nv,
            nabla_t,
            nabla_a,
            nabla_n,
            total,
            base,
            fibre,
            fibre_coords: spec.fibre_coords.clone(),
        })
    }

    pub fn g(&self, u: &[f64], v: &[f64]) -> f64 {
        self.total.metric.bilinear(u, v)
    }

    pub fn vertical(&self, v: &[f64]) -> Vec<f64> {
        self.pv.mul_vec(v)
    }

    pub fn horizontal(&self, v: &[f64]) -> Vec<f64> {
        self.ph.mul_vec(v)
    }

    fn contract3(&self, arr: &[f64], e: &[f64], f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for r in 0..n {
            let mut acc = 0.0;
            for p in 0..n {
                if e[p] == 0.0 {
                    continue;
                }
                for q in 0..n {
                    acc += arr[(r * n + p) * n + q] * e[p] * f[q];
                }
            }
            out[r] = acc;
        }
        out
    }

    fn contract4(&self, arr: &[f64], d: &[f64], e: &[f64], f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let n3 = n * n * n;
        let mut out = vec![0.0; n];
        for k in 0..n {
            if d[k] == 0.0 {
                continue;
            }
            let part = self.contract3(&arr[k * n3..(k + 1) * n3], e, f);
            linalg::axpy(d[k], &part, &mut out);
        }
        out
    }

    /// `T_E F`
    pub fn t(&self, e: &[f64], f: &[f64]) -> Vec<f64> {
        self.contract3(&self.t, e, f)
    }

    /// `A_E F`
    pub fn a(&self, e: &[f64], f: &[f64]) -> Vec<f64> {
        self.contract3(&self.a, e, f)
    }

    /// `(∇_E T)_F G`
    pub fn nabla_t(&self, e: &[f64], f: &[f64], g: &[f64]) -> Vec<f64> {
        self.contract4(&self.nabla_t, e, f, g)
    }

    /// `(∇_E A)_F G`
    pub fn nabla_a(&self, e: &[f64], f: &[f64], g: &[f64]) -> Vec<f64> {
        self.contract4(&self.nabla_a, e, f, g)
    }

    pub fn n_vec(&self) -> &[f64] {
        &self.mean_curvature
    }

    /// `∇_E N`
    pub fn nabla_n(&self, e: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|r| (0..n).map(|k| e[k] * self.nabla_n[k * n + r]).sum())
            .collect()
    }

    pub fn push(&self, v: &[f64]) -> Vec<f64> {
        self.jacobian.mul_vec(v)
    }

    fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.fibre_coords.iter().map(|&i| v[i]).collect()
    }

    /// `g'(R^G(π_*X, π_*Y)π_*Z, π_*H)` at `π(p)`.
    pub fn base_riemann(&self, x: &[f64], y: &[f64], z: &[f64], h: &[f64]) -> f64 {
        self.base
            .riemann_form(&self.push(x), &self.push(y), &self.push(z), &self.push(h))
    }

    pub fn base_ricci(&self, x: &[f64], y: &[f64]) -> f64 {
        self.base.ricci_form(&self.push(x), &self.push(y))
    }

    /// Intrinsic fibre curvature on vertical vectors.
    pub fn fibre_riemann(&self, u: &[f64], v: &[f64], w: &[f64], f: &[f64]) -> f64 {
        self.fibre.riemann_form(
            &self.restrict(u),
            &self.restrict(v),
            &self.restrict(w),
            &self.restrict(f),
        )
    }

    pub fn fibre_ricci(&self, u: &[f64], v: &[f64]) -> f64 {
        self.fibre.ricci_form(&self.restrict(u), &self.restrict(v))
    }

    pub fn frame(&self, seed: u64) -> Result<FrameVectors> {
        frame_vectors(&self.total.metric, &self.ph, &self.pv, self.b, seed, &self.coords)
    }

    pub fn norms(&self, frame: &FrameVectors) -> Norms {
        let sq = |v: Vec<f64>| self.g(&v, &v);
        let mut t_vv = 0.0;
        let mut t_vh = 0.0;
        for u in &frame.vertical {
            for w in &frame.vertical {
                t_vv += sq(self.t(u, w));
            }
            for x in &frame.horizontal {
                t_vh += sq(self.t(u, x));
            }
        }
        let mut a_hh = 0.0;
        let mut a_hv = 0.0;
        for x in &frame.horizontal {
            for y in &frame.horizontal {
                a_hh += sq(self.a(x, y));
            }
            for u in &frame.vertical {
                a_hv += sq(self.a(x, u));
            }
        }
        let nv = self.n_vec();
        Norms {
            t2_block: t_vv,
            t2_full: t_vv + t_vh,
            a2_block: a_hh,
            a2_full: a_hh + a_hv,
            n2: self.g(nv, nv),
        }
    }

    pub fn classify(&self, v: &[f64]) -> VectorClass {
        classify_with(&self.total.metric, &self.jacobian, &self.pv, v)
    }

    /// Largest deviation of `T_{U_j}U_k` from `g(U_j,U_k)·H`, `H = N/(n−b)`:
    /// zero exactly when the fibres are totally umbilical.
    pub fn umbilical_residual(&self, frame: &FrameVectors) -> f64 {
        let r = frame.vertical.len() as f64;
        let h = linalg::scaled(1.0 / r, self.n_vec());
        let mut worst = 0.0f64;
        for u in &frame.vertical {
            for v in &frame.vertical {
                let t = self.t(u, v);
                let d = linalg::sub(&t, &linalg::scaled(self.g(u, v), &h));
                worst = worst.max(self.g(&d, &d).sqrt());
            }
        }
        worst
    }
}

fn classify_with(g: &Mat<f64>, j: &Mat<f64>, pv: &Mat<f64>, v: &[f64]) -> VectorClass {
    let norm = g.bilinear(v, v).sqrt();
    if norm == 0.0 {
        return VectorClass::Unclassified;
    }
    let vert = pv.mul_vec(v);
    let hor = linalg::sub(v, &vert);
    let tol = 1e-10 * norm.max(1.0);
    if linalg::max_abs(&j.mul_vec(v)) <= tol {
        VectorClass::Vertical
    } else if g.bilinear(&vert, &vert).sqrt() <= tol {
        VectorClass::Horizontal
    } else if g.bilinear(&hor, &hor).sqrt() > tol {
        VectorClass::Mixed
    } else {
        VectorClass::Unclassified
    }
}

fn degenerate_error(spec: &SubmersionSpec, x: &[f64]) -> Error {
    let g = spec.total.metric_at(x);
    if let Err(e) = check_positive_definite(spec.total.name(), x, &g) {
        return e;
    }
    let y = spec.project(x);
    let gb = spec.base.metric_at(&y);
    if let Err(e) = check_positive_definite(spec.base.name(), &y, &gb) {
        return e;
    }
    Error::Rank {
        rank: spec.jacobian(x).rank(1e-10),
        expected: spec.base.dim(),
        coords: x.to_vec(),
    }
}

/// Which O'Neill tensor to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OneillKind {
    T,
    A,
}

/// `T_E F` or `A_E F` with the second argument extended by an arbitrary
/// smooth field `ext` (which must equal `F` at the point). Used to probe
/// tensoriality against the chart-constant scheme.
pub fn oneill_with_extension(
    spec: &SubmersionSpec,
    x: &[f64],
    kind: OneillKind,
    e: &[f64],
    ext: impl Fn(&[Dual<f64>]) -> Vec<Dual<f64>>,
) -> Result<Vec<f64>> {
    spec.check_point(x)?;
    let p = projectors(spec, x).ok_or_else(|| degenerate_error(spec, x))?;
    let n = spec.total.dim();
    let pv = Mat::identity(n).sub(&p.ph);
    let d = match kind {
        OneillKind::T => pv.mul_vec(e),
        OneillKind::A => p.ph.mul_vec(e),
    };
    let conn = connection(&spec.total, x).ok_or_else(|| degenerate_error(spec, x))?;
    let xd = seed(x, &d);
    let pd = projectors(spec, &xd).ok_or_else(|| degenerate_error(spec, x))?;
    let fd = ext(&xd);
    let hf = pd.ph.mul_vec(&fd);
    let vf: Vec<Dual<f64>> = fd.iter().zip(&hf).map(|(a, b)| *a - *b).collect();
    let re = |v: &[Dual<f64>]| v.iter().map(|z| z.re).collect::<Vec<_>>();
    let gh = conn.apply(&d, &re(&hf));
    let gv = conn.apply(&d, &re(&vf));
    let nh: Vec<f64> = (0..n).map(|a| hf[a].eps + gh[a]).collect();
    let nv: Vec<f64> = (0..n).map(|a| vf[a].eps + gv[a]).collect();
    Ok(linalg::add(&pv.mul_vec(&nh), &p.ph.mul_vec(&nv)))
}

/// `(∇_E T)_F G` (or `A`) from arbitrary smooth extensions of `F` and `G`,
/// by the Leibniz form `∇_E(T_F̃ G̃) − T_{∇_E F̃} G̃ − T_F̃ ∇_E G̃`.
pub fn nabla_with_extensions(
    spec: &SubmersionSpec,
    x: &[f64],
    kind: OneillKind,
    e: &[f64],
    f_ext: impl Fn(&[Dual<f64>]) -> Vec<Dual<f64>>,
    g_ext: impl Fn(&[Dual<f64>]) -> Vec<Dual<f64>>,
) -> Result<Vec<f64>> {
    spec.check_point(x)?;
    let degenerate = || degenerate_error(spec, x);
    let n = spec.total.dim();
    let j0 = jet::<f64>(spec, x).ok_or_else(degenerate)?;
    let xd = seed(x, e);
    let jd = jet::<Dual<f64>>(spec, &xd).ok_or_else(degenerate)?;
    let fd = f_ext(&xd);
    let gd = g_ext(&xd);
    let tfg = match kind {
        OneillKind::T => jd.t(&fd, &gd),
        OneillKind::A => jd.a(&fd, &gd),
    };
    let re = |v: &[Dual<f64>]| v.iter().map(|z| z.re).collect::<Vec<_>>();
    let eps = |v: &[Dual<f64>]| v.iter().map(|z| z.eps).collect::<Vec<_>>();
    let (f0, g0) = (re(&fd), re(&gd));
    let val = re(&tfg);
    let mut out = linalg::add(&eps(&tfg), &j0.conn.apply(e, &val));
    let nf = linalg::add(&eps(&fd), &j0.conn.apply(e, &f0));
    let ng = linalg::add(&eps(&gd), &j0.conn.apply(e, &g0));
    let (t1, t2) = match kind {
        OneillKind::T => (j0.t(&nf, &g0), j0.t(&f0, &ng)),
        OneillKind::A => (j0.a(&nf, &g0), j0.a(&f0, &ng)),
    };
    for r in 0..n {
        out[r] -= t1[r] + t2[r];
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Point/vector level API

/// `dπ` at `p`.
pub fn differential(spec: &SubmersionSpec, p: &Point<'_>) -> Result<Mat<f64>> {
    spec.check_point(&p.coords)?;
    let j = spec.jacobian(&p.coords);
    spec.rank_check(&p.coords, &j)?;
    Ok(j)
}

fn projector_values(spec: &SubmersionSpec, x: &[f64]) -> Result<(Mat<f64>, Mat<f64>, Mat<f64>)> {
    let j = spec.jacobian(x);
    spec.rank_check(x, &j)?;
    let p = projectors(spec, x).ok_or_else(|| degenerate_error(spec, x))?;
    let n = spec.total.dim();
    debug_assert_eq!(p.ginv.rows(), n);
    let pv = Mat::identity(n).sub(&p.ph);
    Ok((p.g, p.ph, pv))
}

/// Vertical and horizontal parts of `v`; they sum to `v`.
pub fn split<'m>(
    spec: &SubmersionSpec,
    v: &TangentVector<'m>,
) -> Result<(TangentVector<'m>, TangentVector<'m>)> {
    let x = &v.at.coords;
    spec.check_point(x)?;
    let (_, _, pv) = projector_values(spec, x)?;
    let vert = pv.mul_vec(&v.components);
    let hor = linalg::sub(&v.components, &vert);
    Ok((
        TangentVector::new(v.at.clone(), vert).with_class(VectorClass::Vertical),
        TangentVector::new(v.at.clone(), hor).with_class(VectorClass::Horizontal),
    ))
}

/// Classification of `v` relative to the submersion.
pub fn classify(spec: &SubmersionSpec, v: &TangentVector<'_>) -> Result<VectorClass> {
    let x = &v.at.coords;
    spec.check_point(x)?;
    let (g, _, pv) = projector_values(spec, x)?;
    Ok(classify_with(&g, &spec.jacobian(x), &pv, &v.components))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibleFrame<'m> {
    pub at: Point<'m>,
    pub seed: u64,
    pub horizontal: Vec<TangentVector<'m>>,
    pub vertical: Vec<TangentVector<'m>>,
}

pub fn compatible_frame<'m>(
    spec: &SubmersionSpec,
    p: &Point<'m>,
    seed: u64,
) -> Result<CompatibleFrame<'m>> {
    let x = &p.coords;
    spec.check_point(x)?;
    let (g, ph, pv) = projector_values(spec, x)?;
    let fv = frame_vectors(&g, &ph, &pv, spec.base.dim(), seed, x)?;
    let wrap = |vs: Vec<Vec<f64>>, class| {
        vs.into_iter()
            .map(|c| TangentVector::new(p.clone(), c).with_class(class))
            .collect()
    };
    Ok(CompatibleFrame {
        at: p.clone(),
        seed,
        horizontal: wrap(fv.horizontal, VectorClass::Horizontal),
        vertical: wrap(fv.vertical, VectorClass::Vertical),
    })
}

fn same_point<'m>(a: &TangentVector<'m>, b: &TangentVector<'m>) -> Result<()> {
    if a.at.coords != b.at.coords {
        return Err(Error::Arity("tangent vectors live at different points".into()));
    }
    Ok(())
}

fn oneill_at<'m>(
    spec: &SubmersionSpec,
    kind: OneillKind,
    e: &TangentVector<'m>,
    f: &TangentVector<'m>,
) -> Result<TangentVector<'m>> {
    same_point(e, f)?;
    let x = &e.at.coords;
    spec.check_point(x)?;
    spec.rank_check(x, &spec.jacobian(x))?;
    let j = jet::<f64>(spec, x).ok_or_else(|| degenerate_error(spec, x))?;
    let v = match kind {
        OneillKind::T => j.t(&e.components, &f.components),
        OneillKind::A => j.a(&e.components, &f.components),
    };
    let class = classify_with(&j.conn.g, &spec.jacobian(x), &j.pv, &v);
    Ok(TangentVector::new(e.at.clone(), v).with_class(class))
}

/// `T_E F = v∇_{vE}hF + h∇_{vE}vF`.
pub fn oneill_t<'m>(
    spec: &SubmersionSpec,
    e: &TangentVector<'m>,
    f: &TangentVector<'m>,
) -> Result<TangentVector<'m>> {
    oneill_at(spec, OneillKind::T, e, f)
}

/// `A_E F = v∇_{hE}hF + h∇_{hE}vF`.
pub fn oneill_a<'m>(
    spec: &SubmersionSpec,
    e: &TangentVector<'m>,
    f: &TangentVector<'m>,
) -> Result<TangentVector<'m>> {
    oneill_at(spec, OneillKind::A, e, f)
}

/// `N = Σ_j T_{U_j}U_j`.
pub fn mean_curvature_n<'m>(spec: &SubmersionSpec, p: &Point<'m>) -> Result<TangentVector<'m>> {
    let x = &p.coords;
    spec.check_point(x)?;
    spec.rank_check(x, &spec.jacobian(x))?;
    let j = jet::<f64>(spec, x).ok_or_else(|| degenerate_error(spec, x))?;
    let (_, _, nv) = j.arrays();
    Ok(TangentVector::new(p.clone(), nv).with_class(VectorClass::Horizontal))
}

fn nabla_at<'m>(
    spec: &SubmersionSpec,
    kind: OneillKind,
    e: &TangentVector<'m>,
    f: &TangentVector<'m>,
    g: &TangentVector<'m>,
) -> Result<TangentVector<'m>> {
    same_point(e, f)?;
    same_point(e, g)?;
    let (fc, gc) = (f.components.clone(), g.components.clone());
    let constant = |c: Vec<f64>| move |_: &[Dual<f64>]| c.iter().map(|&v| Dual::constant(v)).collect();
    let v = nabla_with_extensions(
        spec,
        &e.at.coords,
        kind,
        &e.components,
        constant(fc),
        constant(gc),
    )?;
    Ok(TangentVector::new(e.at.clone(), v))
}

/// `(∇_E T)_F G`.
pub fn nabla_t<'m>(
    spec: &SubmersionSpec,
    e: &TangentVector<'m>,
    f: &TangentVector<'m>,
    g: &TangentVector<'m>,
) -> Result<TangentVector<'m>> {
    nabla_at(spec, OneillKind::T, e, f, g)
}

/// `(∇_E A)_F G`.
pub fn nabla_a<'m>(
    spec: &SubmersionSpec,
    e: &TangentVector<'m>,
    f: &TangentVector<'m>,
    g: &TangentVector<'m>,
) -> Result<TangentVector<'m>> {
    nabla_at(spec, OneillKind::A, e, f, g)
}

/// `‖T‖²`, `‖A‖²`, `‖N‖²` at `p` under both conventions.
pub fn norms(spec: &SubmersionSpec, p: &Point<'_>, seed: u64) -> Result<Norms> {
    let geo = LocalGeometry::new(spec, &p.coords)?;
    let frame = geo.frame(seed)?;
    Ok(geo.norms(&frame))
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub passed: bool,
    /// Worst deviation seen (meaning depends on the check).
    pub worst: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub submersion: String,
    pub points: usize,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Tally {
    name: &'static str,
    worst: f64,
    failures: usize,
    skipped: usize,
    first: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            worst: 0.0,
            failures: 0,
            skipped: 0,
            first: None,
        }
    }

    fn record(&mut self, value: f64, ok: bool, what: impl FnOnce() -> String) {
        if value.is_finite() {
            self.worst = self.worst.max(value);
        } else {
            self.worst = f64::INFINITY;
        }
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn skip(&mut self) {
        self.skipped += 1;
    }

    fn finish(self, points: usize) -> CheckOutcome {
        let mut detail = match &self.first {
            None => format!("{} points ok", points - self.skipped),
            Some(f) => format!("{} of {points} points failed; first: {f}", self.failures),
        };
        if self.skipped > 0 {
            detail.push_str(&format!(
                " ({} points not checked: earlier checks failed there)",
                self.skipped
            ));
        }
        CheckOutcome {
            check: self.name.to_string(),
            passed: self.failures == 0,
            worst: self.worst,
            detail,
        }
    }
}

/// Runs the load-time checks at `points` seeded samples: positive
/// definiteness, metric smoothness, (S1) rank, (S2) horizontal isometry and
/// the adapted-coordinates contract.
pub fn validate(spec: &SubmersionSpec, points: usize, seed: u64) -> ValidationReport {
    let mut rng = rng_for(seed, &["validate", spec.name()]);
    let bx = spec.total.sampling_box();
    let b = spec.base.dim();
    let mut pd = Tally::new("metric positive definite");
    let mut smooth = Tally::new("metric smoothness");
    let mut image = Tally::new("projection lands in base domain");
    let mut s1 = Tally::new("(S1) rank of dπ");
    let mut s2 = Tally::new("(S2) horizontal isometry");
    let mut adapted = Tally::new("adapted coordinates");
    for _ in 0..points {
        let x: Vec<f64> = bx.iter().map(|(lo, hi)| rng.random_range(*lo..*hi)).collect();
        let g = spec.total.metric_at(&x);
        let pd_ok = check_positive_definite(spec.total.name(), &x, &g);
        pd.record(0.0, pd_ok.is_ok(), || format!("{x:?}"));
        let (d1, d2) = metric_derivative_check(&spec.total, &x, 1e-4);
        let scale = 1.0 + g.to_nalgebra().amax();
        smooth.record(d1.max(d2), d1.max(d2) < 1e-5 * scale, || {
            format!("autodiff/finite-difference gap {:.3e} at {x:?}", d1.max(d2))
        });
        let y = spec.project(&x);
        let base_ok = spec.base.validate_at(&y);
        image.record(0.0, base_ok.is_ok(), || format!("π{x:?} = {y:?}"));
        let j = spec.jacobian(&x);
        let rank = j.rank(1e-10);
        s1.record((b - rank.min(b)) as f64, rank == b, || {
            format!("rank {rank} < {b} at {x:?}")
        });
        if rank == b && pd_ok.is_ok() && base_ok.is_ok() {
            let ginv = g.inverse().expect("positive definite");
            let lifted = j.mul(&ginv).mul(&j.transpose());
            match lifted.inverse() {
                Some(gram) => {
                    let gb = spec.base.metric_at(&y);
                    let dev = gram.max_abs_diff(&gb);
                    let tol = 1e-9 * (1.0 + gb.to_nalgebra().amax());
                    s2.record(dev, dev < tol, || format!("deviation {dev:.3e} at {x:?}"));
                }
                None => s2.record(f64::INFINITY, false, || format!("singular at {x:?}")),
            }
        } else {
            s2.skip();
        }
        let zero_cols = spec
            .fibre_coords
            .iter()
            .all(|&i| (0..b).all(|a| j[(a, i)] == 0.0));
        let ok = spec.is_adapted() && zero_cols && rank == b;
        adapted.record(0.0, ok, || {
            format!(
                "fibre coordinates {:?} do not span ker dπ (fibre dimension {})",
                spec.fibre_coords,
                spec.fibre_dim()
            )
        });
    }
    ValidationReport {
        submersion: spec.name.clone(),
        points,
        seed,
        checks: vec![
            pd.finish(points),
            smooth.finish(points),
            image.finish(points),
            s1.finish(points),
            s2.finish(points),
            adapted.finish(points),
        ],
    }
}
