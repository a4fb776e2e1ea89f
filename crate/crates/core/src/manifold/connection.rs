//! Levi-Civita connection and curvature in coordinates.
//!
//! Index conventions: `Γ^k_{ij}` is stored at `k*n*n + i*n + j`, the lowered
//! Riemann tensor `R_{ijkl} = g(R(∂_i,∂_j)∂_k, ∂_l)` at `((i*n + j)*n + k)*n + l`,
//! with `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`.

use serde::Serialize;

use super::{check_positive_definite, MetricField, Point, TangentVector, VectorField};
use crate::dual::{seed, seed_axis, Dual, Scalar};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Metric, inverse metric and Christoffel symbols at one point.
#[derive(Clone, Debug)]
pub struct Connection<S> {
    pub n: usize,
    pub g: Mat<S>,
    pub ginv: Mat<S>,
    pub gamma: Vec<S>,
}

impl<S: Scalar> Connection<S> {
    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> S {
        self.gamma[(k * self.n + i) * self.n + j]
    }

    /// `Γ(a, b)^k = Γ^k_{ij} a^i b^j`.
    pub fn apply(&self, a: &[S], b: &[S]) -> Vec<S> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut acc = S::zero();
                for i in 0..n {
                    for j in 0..n {
                        acc += self.gamma[(k * n + i) * n + j] * a[i] * b[j];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Connection data at `x`, or `None` if the metric is singular there.
pub fn connection<S: Scalar, M: MetricField>(m: &M, x: &[S]) -> Option<Connection<S>> {
    let n = m.dim();
    let mut g = Mat::zeros(n, n);
    // dg[l] = ∂_l g
    let mut dg = Vec::with_capacity(n);
    for l in 0..n {
        let gd = m.metric(&seed_axis(x, l));
        if l == 0 {
            g = Mat::from_fn(n, n, |i, j| gd[(i, j)].re);
        }
        dg.push(Mat::from_fn(n, n, |i, j| gd[(i, j)].eps));
    }
    let ginv = g.inverse()?;
    let half = S::from_f64(0.5);
    // first kind: Γ_{lij} = ½(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})
    let mut first = vec![S::zero(); n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                first[(l * n + i) * n + j] =
                    half * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
            }
        }
    }
    let mut gamma = vec![S::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for l in 0..n {
                    acc += ginv[(k, l)] * first[(l * n + i) * n + j];
                }
                gamma[(k * n + i) * n + j] = acc;
            }
        }
    }
    Some(Connection { n, g, ginv, gamma })
}

fn degenerate<M: MetricField>(m: &M, x: &[f64]) -> Error {
    let g = m.metric(x);
    match check_positive_definite(m.label(), x, &g) {
        Err(e) => e,
        Ok(()) => Error::DegenerateMetric {
            manifold: m.label().to_string(),
            coords: x.to_vec(),
            min_eigenvalue: 0.0,
            max_eigenvalue: 0.0,
        },
    }
}

/// `Γ^k_{ij}` at `x`.
pub fn christoffel<M: MetricField>(m: &M, x: &[f64]) -> Result<Vec<f64>> {
    connection(m, x)
        .map(|c| c.gamma)
        .ok_or_else(|| degenerate(m, x))
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureData {
    pub dim: usize,
    pub metric: Mat<f64>,
    pub metric_inv: Mat<f64>,
    pub christoffel: Vec<f64>,
    /// `∂_m Γ^k_{ij}` at `((m*n + k)*n + i)*n + j`.
    #[serde(skip)]
    pub christoffel_derivative: Vec<f64>,
    pub riemann_lowered: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
}

impl CurvatureData {
    /// Assembles curvature from the connection and its first derivatives.
    pub fn from_parts(conn: &Connection<f64>, dgamma: Vec<f64>) -> Self {
        let n = conn.n;
        let gm = |k: usize, i: usize, j: usize| conn.gamma[(k * n + i) * n + j];
        let dgm = |m: usize, k: usize, i: usize, j: usize| dgamma[((m * n + k) * n + i) * n + j];
        // R^l_{ijk}
        let mut up = vec![0.0; n * n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut v = dgm(i, l, j, k) - dgm(j, l, i, k);
                        for m in 0..n {
                            v += gm(l, i, m) * gm(m, j, k) - gm(l, j, m) * gm(m, i, k);
                        }
                        up[((l * n + i) * n + j) * n + k] = v;
                    }
                }
            }
        }
        let mut low = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = 0.0;
                        for m in 0..n {
                            v += conn.g[(l, m)] * up[((m * n + i) * n + j) * n + k];
                        }
                        low[((i * n + j) * n + k) * n + l] = v;
                    }
                }
            }
        }
        let mut ricci = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let mut v = 0.0;
                for i in 0..n {
                    v += up[((i * n + i) * n + j) * n + k];
                }
                ricci[j * n + k] = v;
            }
        }
        let mut scalar = 0.0;
        for j in 0..n {
            for k in 0..n {
                scalar += conn.ginv[(j, k)] * ricci[j * n + k];
            }
        }
        CurvatureData {
            dim: n,
            metric: conn.g.clone(),
            metric_inv: conn.ginv.clone(),
            christoffel: conn.gamma.clone(),
            christoffel_derivative: dgamma,
            riemann_lowered: low,
            ricci,
            scalar,
        }
    }

    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.christoffel[(k * n + i) * n + j]
    }

    #[inline]
    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.riemann_lowered[((i * n + j) * n + k) * n + l]
    }

    #[inline]
    pub fn ricci(&self, i: usize, j: usize) -> f64 {
        self.ricci[i * self.dim + j]
    }

    /// `g(R(X,Y)Z, H)`.
    pub fn riemann_form(&self, x: &[f64], y: &[f64], z: &[f64], h: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                let xy = x[i] * y[j];
                for k in 0..n {
                    let base = ((i * n + j) * n + k) * n;
                    let mut s = 0.0;
                    for l in 0..n {
                        s += self.riemann_lowered[base + l] * h[l];
                    }
                    acc += xy * z[k] * s;
                }
            }
        }
        acc
    }

    pub fn ricci_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.ricci[i * n + j] * x[i] * y[j];
            }
        }
        acc
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.metric.bilinear(x, y)
    }

    /// `K(X,Y) = R(X,Y,Y,X) / (|X|²|Y|² − g(X,Y)²)`.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> f64 {
        let den = self.inner(x, x) * self.inner(y, y) - self.inner(x, y).powi(2);
        self.riemann_form(x, y, y, x) / den
    }
}

/// Full curvature data at `x`. Second metric derivatives come from nested
/// dual numbers.
pub fn curvature<M: MetricField>(m: &M, x: &[f64]) -> Result<CurvatureData> {
    let n = m.dim();
    let conn = connection(m, x).ok_or_else(|| degenerate(m, x))?;
    let mut dgamma = vec![0.0; n * n * n * n];
    for k in 0..n {
        let xd: Vec<Dual<f64>> = seed_axis(x, k);
        let c = connection(m, &xd).ok_or_else(|| degenerate(m, x))?;
        for (idx, v) in c.gamma.iter().enumerate() {
            dgamma[k * n * n * n + idx] = v.eps;
        }
    }
    Ok(CurvatureData::from_parts(&conn, dgamma))
}

/// `(∇_dir Y)^k = dir^i ∂_i Y^k + Γ^k_{ij} dir^i Y^j`.
pub fn covariant_derivative<'m, F: VectorField>(
    field: &F,
    dir: &TangentVector<'m>,
) -> Result<TangentVector<'m>> {
    let m = dir.at.manifold;
    let x = &dir.at.coords;
    m.validate_at(x)?;
    let conn = connection(m, x.as_slice()).ok_or_else(|| degenerate(m, x))?;
    let xd = seed(x, &dir.components);
    let yd: Vec<Dual<f64>> = field.components(&xd);
    let y: Vec<f64> = yd.iter().map(|v| v.re).collect();
    let gy = conn.apply(&dir.components, &y);
    let comps = yd.iter().zip(&gy).map(|(a, b)| a.eps + b).collect();
    let at = Point {
        manifold: m,
        coords: x.clone(),
    };
    Ok(TangentVector::new(at, comps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_metric_expression;
    use std::f64::consts::PI;

    #[test]
    fn sphere_christoffels() {
        let m = parse_metric_expression("coords=(θ,φ); g=[[0.25,0],[0,0.25*sin(θ)^2]]").unwrap();
        let gm = christoffel(&m, &[PI / 4.0, 0.0]).unwrap();
        // Γ^φ_{θφ} = cot θ
        assert!((gm[(1 * 2 + 0) * 2 + 1] - 1.0).abs() < 1e-14);
        assert!((gm[(0 * 2 + 1) * 2 + 1] + 0.5).abs() < 1e-14);
        let gm = christoffel(&m, &[PI / 2.0, 0.0]).unwrap();
        assert!(gm.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn sphere_curvature_sign() {
        let m = parse_metric_expression("coords=(θ,φ); g=[[1,0],[0,sin(θ)^2]]").unwrap();
        let c = curvature(&m, &[PI / 3.0, 0.4]).unwrap();
        assert!((c.sectional(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-13);
        assert!((c.scalar - 2.0).abs() < 1e-13);
    }

    #[test]
    fn covariant_derivative_of_coordinate_field() {
        use crate::expr::Expr;
        use crate::manifold::ExprField;
        let m = parse_metric_expression("coords=(θ,φ); g=[[1,0],[0,sin(θ)^2]]").unwrap();
        let p = m.point(&[0.9, 0.1]).unwrap();
        let dphi = ExprField(vec![Expr::Const(0.0), Expr::Const(1.0)]);
        let v = covariant_derivative(&dphi, &TangentVector::new(p, vec![1.0, 0.0])).unwrap();
        assert!(v.components[0].abs() < 1e-15);
        assert!((v.components[1] - 0.9f64.tan().recip()).abs() < 1e-14);
    }
}
