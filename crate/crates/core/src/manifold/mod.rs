//! Single-chart Riemannian manifolds.

mod connection;

pub use connection::{
    christoffel, connection, covariant_derivative, curvature, Connection, CurvatureData,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dual::{seed_axis, Dual, Scalar};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::Mat;

/// Anything that can produce metric components at a chart point, over any
/// scalar type.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;

    fn label(&self) -> &str;

    fn metric<S: Scalar>(&self, x: &[S]) -> Mat<S>;
}

/// Vector field given by component functions in a chart.
pub trait VectorField {
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

/// Vector field whose components are parsed expressions.
#[derive(Clone, Debug)]
pub struct ExprField(pub Vec<Expr>);

impl VectorField for ExprField {
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        self.0.iter().map(|e| e.eval(x)).collect()
    }
}

/// Open coordinate interval; infinite ends are allowed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn unbounded() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Box used for sampling: the interval shrunk by `margin` of its width on
    /// each side. Unbounded intervals sample from `[-1, 1]` clipped to the
    /// interval.
    pub fn sampling_range(&self, margin: f64) -> (f64, f64) {
        if self.is_bounded() {
            let w = self.hi - self.lo;
            (self.lo + margin * w, self.hi - margin * w)
        } else {
            let lo = if self.lo.is_finite() { self.lo.max(-1.0) } else { -1.0 };
            let hi = if self.hi.is_finite() { self.hi.min(1.0) } else { 1.0 };
            let lo = if self.lo.is_finite() && lo <= self.lo { self.lo + 1e-3 } else { lo };
            let hi = if self.hi.is_finite() && hi >= self.hi { self.hi - 1e-3 } else { hi };
            (lo, hi)
        }
    }
}

pub const SAMPLING_MARGIN: f64 = 0.05;
const MAX_REJECTIONS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ChartedManifold {
    name: String,
    coord_names: Vec<String>,
    metric: Vec<Vec<Expr>>,
    domain: Vec<Interval>,
}

impl ChartedManifold {
    /// Builds a manifold from metric component expressions. The matrix must
    /// be square, match the coordinate count and be symmetric (checked
    /// numerically at a few points of the sampling box).
    pub fn new(
        name: impl Into<String>,
        coord_names: Vec<String>,
        metric: Vec<Vec<Expr>>,
        domain: Vec<Interval>,
    ) -> Result<Self> {
        let n = coord_names.len();
        if n == 0 {
            return Err(Error::Arity("manifold needs at least one coordinate".into()));
        }
        if metric.len() != n || metric.iter().any(|r| r.len() != n) {
            return Err(Error::Arity(format!(
                "metric must be {n}x{n} to match the coordinates"
            )));
        }
        if domain.len() != n {
            return Err(Error::Arity(format!(
                "{} domain intervals for {n} coordinates",
                domain.len()
            )));
        }
        for (i, iv) in domain.iter().enumerate() {
            if !(iv.lo < iv.hi) {
                return Err(Error::Arity(format!(
                    "empty domain interval for `{}`",
                    coord_names[i]
                )));
            }
        }
        for row in &metric {
            for e in row {
                if let Some(v) = e.max_var() {
                    if v >= n {
                        return Err(Error::Arity(format!("coordinate index {v} out of range")));
                    }
                }
            }
        }
        let m = ChartedManifold {
            name: name.into(),
            coord_names,
            metric,
            domain,
        };
        m.check_symmetry()?;
        Ok(m)
    }

    fn check_symmetry(&self) -> Result<()> {
        let n = self.dim();
        let ranges: Vec<(f64, f64)> = self
            .domain
            .iter()
            .map(|d| d.sampling_range(SAMPLING_MARGIN))
            .collect();
        for t in [0.5, 0.21, 0.73, 0.37] {
            let x: Vec<f64> = ranges
                .iter()
                .enumerate()
                .map(|(i, (lo, hi))| {
                    let s = (t + 0.17 * i as f64).fract();
                    lo + s * (hi - lo)
                })
                .collect();
            for i in 0..n {
                for j in 0..i {
                    let a: f64 = self.metric[i][j].eval(&x);
                    let b: f64 = self.metric[j][i].eval(&x);
                    if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                        return Err(Error::Arity(format!(
                            "metric is not symmetric: g[{i}][{j}] = {a} but g[{j}][{i}] = {b} at {x:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coord_names.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn metric_exprs(&self) -> &[Vec<Expr>] {
        &self.metric
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.domain).all(|(v, d)| d.contains(*v))
    }

    /// Metric components without any validity checks.
    pub fn metric_at<S: Scalar>(&self, x: &[S]) -> Mat<S> {
        let n = self.dim();
        Mat::from_fn(n, n, |i, j| self.metric[i][j].eval(x))
    }

    /// Checks domain membership and positive definiteness at `x`.
    pub fn validate_at(&self, x: &[f64]) -> Result<Mat<f64>> {
        if !self.contains(x) {
            return Err(Error::Domain {
                manifold: self.name.clone(),
                coords: x.to_vec(),
            });
        }
        let g = self.metric_at(x);
        check_positive_definite(&self.name, x, &g)?;
        Ok(g)
    }

    pub fn point(&self, coords: &[f64]) -> Result<Point<'_>> {
        if !self.contains(coords) {
            return Err(Error::Domain {
                manifold: self.name.clone(),
                coords: coords.to_vec(),
            });
        }
        Ok(Point {
            manifold: self,
            coords: coords.to_vec(),
        })
    }

    pub fn sampling_box(&self) -> Vec<(f64, f64)> {
        self.domain
            .iter()
            .map(|d| d.sampling_range(SAMPLING_MARGIN))
            .collect()
    }

    /// Uniform point in the sampling box at which the metric is positive
    /// definite.
    pub fn sample_coords<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        self.sample_coords_where(rng, |_| true)
    }

    /// As [`Self::sample_coords`] with an extra acceptance predicate.
    pub fn sample_coords_where<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        accept: impl Fn(&[f64]) -> bool,
    ) -> Result<Vec<f64>> {
        let bx = self.sampling_box();
        for _ in 0..MAX_REJECTIONS {
            let x: Vec<f64> = bx.iter().map(|(lo, hi)| rng.random_range(*lo..*hi)).collect();
            if self.validate_at(&x).is_ok() && accept(&x) {
                return Ok(x);
            }
        }
        Err(Error::Config(format!(
            "could not sample a valid point of `{}`",
            self.name
        )))
    }
}

impl MetricField for ChartedManifold {
    fn dim(&self) -> usize {
        ChartedManifold::dim(self)
    }

    fn label(&self) -> &str {
        &self.name
    }

    fn metric<S: Scalar>(&self, x: &[S]) -> Mat<S> {
        self.metric_at(x)
    }
}

/// Smallest eigenvalue must exceed `1e-10` times the largest.
pub fn check_positive_definite(name: &str, x: &[f64], g: &Mat<f64>) -> Result<()> {
    let ev = g.symmetric_eigenvalues();
    let (min, max) = (ev[0], ev[ev.len() - 1]);
    if !(max > 0.0) || !(min > 1e-10 * max) || ev.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateMetric {
            manifold: name.to_string(),
            coords: x.to_vec(),
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(())
}

/// Validates `x` and returns the metric there.
pub fn eval_metric(m: &ChartedManifold, p: &Point<'_>) -> Result<Mat<f64>> {
    m.validate_at(&p.coords)
}

/// Largest discrepancy between autodiff and central-difference derivatives
/// of the metric components at `x`, first and second order.
pub fn metric_derivative_check(m: &ChartedManifold, x: &[f64], h: f64) -> (f64, f64) {
    let n = m.dim();
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for k in 0..n {
        let xd = seed_axis(x, k);
        let gd = m.metric_at(&xd);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let gp = m.metric_at(&xp);
        let gm = m.metric_at(&xm);
        let gpd = m.metric_at(&seed_axis(&xp, k));
        let gmd = m.metric_at(&seed_axis(&xm, k));
        let xdd: Vec<Dual<Dual<f64>>> = seed_axis(&xd, k);
        let gdd = m.metric_at(&xdd);
        for i in 0..n {
            for j in 0..n {
                let fd = (gp[(i, j)] - gm[(i, j)]) / (2.0 * h);
                first = first.max((fd - gd[(i, j)].eps).abs());
                let fd2 = (gpd[(i, j)].eps - gmd[(i, j)].eps) / (2.0 * h);
                second = second.max((fd2 - gdd[(i, j)].eps.eps).abs());
            }
        }
    }
    (first, second)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point<'m> {
    pub manifold: &'m ChartedManifold,
    pub coords: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorClass {
    Vertical,
    Horizontal,
    Mixed,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector<'m> {
    pub at: Point<'m>,
    pub components: Vec<f64>,
    pub class: VectorClass,
}

impl<'m> TangentVector<'m> {
    pub fn new(at: Point<'m>, components: Vec<f64>) -> Self {
        assert_eq!(at.coords.len(), components.len(), "vector/point dimension mismatch");
        TangentVector {
            at,
            components,
            class: VectorClass::Unclassified,
        }
    }

    pub fn with_class(mut self, class: VectorClass) -> Self {
        self.class = class;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_metric_expression;

    #[test]
    fn flat_metric_is_identity() {
        let m = parse_metric_expression("coords=(x,y,z); g=[[1,0,0],[0,1,0],[0,0,1]]").unwrap();
        let p = m.point(&[0.3, -2.0, 5.0]).unwrap();
        let g = eval_metric(&m, &p).unwrap();
        assert_eq!(g, Mat::identity(3));
    }

    #[test]
    fn small_sphere_at_equator() {
        let m = parse_metric_expression(
            "coords=(θ,φ); domain=[(0,pi),(-pi,pi)]; g=[[0.25,0],[0,0.25*sin(θ)^2]]",
        )
        .unwrap();
        let p = m.point(&[std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        let g = eval_metric(&m, &p).unwrap();
        assert!(g.max_abs_diff(&Mat::from_rows(&[vec![0.25, 0.0], vec![0.0, 0.25]])) < 1e-15);
    }

    #[test]
    fn outside_domain_is_rejected() {
        let m = parse_metric_expression("coords=(t); domain=[(0,1)]; g=[[1]]").unwrap();
        assert!(matches!(m.point(&[1.5]), Err(Error::Domain { .. })));
        assert!(matches!(m.validate_at(&[0.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn sampling_respects_margin() {
        use rand::SeedableRng;
        let m = parse_metric_expression("coords=(t,s); domain=[(0,10),(-1,1)]; g=[[1,0],[0,1]]")
            .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = m.sample_coords(&mut rng).unwrap();
            assert!(x[0] >= 0.5 && x[0] <= 9.5);
            assert!(x[1] >= -0.9 && x[1] <= 0.9);
        }
    }

    #[test]
    fn unbounded_interval_samples_unit_box() {
        assert_eq!(Interval::unbounded().sampling_range(0.05), (-1.0, 1.0));
        let half = Interval::new(0.0, f64::INFINITY);
        let (lo, hi) = half.sampling_range(0.05);
        assert!(lo > 0.0 && hi == 1.0);
    }
}
