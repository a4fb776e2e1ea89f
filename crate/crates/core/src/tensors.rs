//! Generalized curvature tensors of the total space and the Ricci operator.
//!
//! Every tensor is available in two forms. [`generalized_tensor`] builds the
//! `(1,3)` operator `𝒯(X,Y)Z` from the Riemann endomorphism, the Ricci
//! operator and the metric, then lowers it against `H`. [`combine`] takes the
//! scalar ingredients `R(X,Y,Z,H)`, `S(·,·)`, `g(·,·)` and `r` as plain numbers
//! so the identity suite can feed it right-hand sides assembled from the
//! submersion data. The two paths share no code.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{CurvatureData, TangentVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GeneralizedTensorKind {
    WeylProjective,
    Concircular,
    Conharmonic,
    Conformal,
    MProjective,
}

impl GeneralizedTensorKind {
    pub const ALL: [GeneralizedTensorKind; 5] = [
        GeneralizedTensorKind::WeylProjective,
        GeneralizedTensorKind::Concircular,
        GeneralizedTensorKind::Conharmonic,
        GeneralizedTensorKind::Conformal,
        GeneralizedTensorKind::MProjective,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            GeneralizedTensorKind::WeylProjective => "P*",
            GeneralizedTensorKind::Concircular => "C*",
            GeneralizedTensorKind::Conharmonic => "L*",
            GeneralizedTensorKind::Conformal => "V*",
            GeneralizedTensorKind::MProjective => "W*",
        }
    }

    /// Identifier used in identity labels and on the command line.
    pub fn slug(self) -> &'static str {
        match self {
            GeneralizedTensorKind::WeylProjective => "weyl_projective",
            GeneralizedTensorKind::Concircular => "concircular",
            GeneralizedTensorKind::Conharmonic => "conharmonic",
            GeneralizedTensorKind::Conformal => "conformal",
            GeneralizedTensorKind::MProjective => "m_projective",
        }
    }

    pub fn from_slug(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.slug() == s || k.symbol().eq_ignore_ascii_case(s))
    }

    /// Smallest total dimension at which the coefficients are finite. The
    /// `1/(n−2)` tensors accept `n = 3` only when `allow_three` is set.
    pub fn min_dim(self, allow_three: bool) -> usize {
        match self {
            GeneralizedTensorKind::Conharmonic | GeneralizedTensorKind::Conformal => {
                if allow_three {
                    3
                } else {
                    4
                }
            }
            _ => 2,
        }
    }

    pub fn check_dim(self, n: usize, allow_three: bool) -> Result<()> {
        let required = self.min_dim(allow_three);
        if n < required {
            return Err(Error::Dimension {
                kind: self.symbol().to_string(),
                dim: n,
                required,
            });
        }
        Ok(())
    }
}

/// `(QX)^k = g^{kl} S_{lj} X^j`, so that `g(QX, Y) = S(X, Y)`.
pub fn ricci_operator(c: &CurvatureData, x: &[f64]) -> Vec<f64> {
    let n = c.dim;
    let sx: Vec<f64> = (0..n)
        .map(|l| (0..n).map(|j| c.ricci(l, j) * x[j]).sum())
        .collect();
    c.metric_inv.mul_vec(&sx)
}

/// Ricci operator on a tangent vector of the manifold that `c` describes.
pub fn ricci_operator_at<'m>(c: &CurvatureData, x: &TangentVector<'m>) -> TangentVector<'m> {
    TangentVector::new(x.at.clone(), ricci_operator(c, &x.components))
}

/// `R(X,Y)Z` as a vector.
pub fn riemann_endomorphism(c: &CurvatureData, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
    let n = c.dim;
    let lowered: Vec<f64> = (0..n)
        .map(|l| {
            let mut e = vec![0.0; n];
            e[l] = 1.0;
            c.riemann_form(x, y, z, &e)
        })
        .collect();
    c.metric_inv.mul_vec(&lowered)
}

/// `𝒯(X,Y)Z` for the requested kind.
pub fn generalized_operator(
    kind: GeneralizedTensorKind,
    c: &CurvatureData,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    allow_three: bool,
) -> Result<Vec<f64>> {
    let n = c.dim;
    kind.check_dim(n, allow_three)?;
    let nf = n as f64;
    let mut out = riemann_endomorphism(c, x, y, z);
    let s = |a: &[f64], b: &[f64]| c.ricci_form(a, b);
    let g = |a: &[f64], b: &[f64]| c.inner(a, b);
    let mut sub = |coef: f64, v: &[f64]| {
        for (o, vi) in out.iter_mut().zip(v) {
            *o -= coef * vi;
        }
    };
    let qx = ricci_operator(c, x);
    let qy = ricci_operator(c, y);
    match kind {
        GeneralizedTensorKind::WeylProjective => {
            let k = 1.0 / (nf - 1.0);
            sub(k * s(y, z), x);
            sub(-k * s(x, z), y);
        }
        GeneralizedTensorKind::Concircular => {
            let k = c.scalar / (nf * (nf - 1.0));
            sub(k * g(y, z), x);
            sub(-k * g(x, z), y);
        }
        GeneralizedTensorKind::Conharmonic | GeneralizedTensorKind::Conformal => {
            let k = 1.0 / (nf - 2.0);
            sub(k * g(y, z), &qx);
            sub(-k * g(x, z), &qy);
            sub(k * s(y, z), x);
            sub(-k * s(x, z), y);
            if kind == GeneralizedTensorKind::Conformal {
                let k = c.scalar / ((nf - 1.0) * (nf - 2.0));
                sub(-k * g(y, z), x);
                sub(k * g(x, z), y);
            }
        }
        GeneralizedTensorKind::MProjective => {
            let k = 1.0 / (2.0 * (nf - 1.0));
            sub(k * s(y, z), x);
            sub(-k * s(x, z), y);
            sub(k * g(y, z), &qx);
            sub(-k * g(x, z), &qy);
        }
    }
    Ok(out)
}

/// Fully lowered value `g(𝒯(X,Y)Z, H)`.
pub fn generalized_tensor(
    kind: GeneralizedTensorKind,
    c: &CurvatureData,
    x: &[f64],
    y: &[f64],
    z: &[f64],
    h: &[f64],
    allow_three: bool,
) -> Result<f64> {
    let v = generalized_operator(kind, c, x, y, z, allow_three)?;
    Ok(c.inner(&v, h))
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorEvaluation {
    pub kind: GeneralizedTensorKind,
    pub coords: Vec<f64>,
    pub args: [Vec<f64>; 4],
    pub value: f64,
    pub n_used: usize,
}

/// [`generalized_tensor`] on tangent vectors sharing one base point.
pub fn evaluate(
    kind: GeneralizedTensorKind,
    c: &CurvatureData,
    args: [&TangentVector<'_>; 4],
    allow_three: bool,
) -> Result<TensorEvaluation> {
    let at = &args[0].at;
    if args.iter().any(|v| v.at.coords != at.coords) {
        return Err(Error::Config("tensor arguments live at different points".into()));
    }
    let [x, y, z, h] = args.map(|v| v.components.clone());
    let value = generalized_tensor(kind, c, &x, &y, &z, &h, allow_three)?;
    Ok(TensorEvaluation {
        kind,
        coords: at.coords.clone(),
        args: [x, y, z, h],
        value,
        n_used: c.dim,
    })
}

/// The definition of `kind` with every ingredient supplied by the caller.
/// Slots `0..4` stand for `X, Y, Z, H`; `ricci(i, j)` and `metric(i, j)`
/// evaluate the Ricci tensor and metric on the vectors in those slots and
/// `g(QX, H)` is taken as `ricci(0, 3)`.
pub fn combine(
    kind: GeneralizedTensorKind,
    n: usize,
    riemann: f64,
    ricci: impl Fn(usize, usize) -> f64,
    metric: impl Fn(usize, usize) -> f64,
    scalar: f64,
) -> f64 {
    let nf = n as f64;
    let (s, g) = (&ricci, &metric);
    let gg = g(0, 3) * g(1, 2) - g(1, 3) * g(0, 2);
    match kind {
        GeneralizedTensorKind::WeylProjective => {
            riemann - (s(1, 2) * g(0, 3) - s(0, 2) * g(1, 3)) / (nf - 1.0)
        }
        GeneralizedTensorKind::Concircular => riemann - scalar / (nf * (nf - 1.0)) * gg,
        GeneralizedTensorKind::Conharmonic => {
            riemann
                - (g(1, 2) * s(0, 3) - g(0, 2) * s(1, 3) + g(0, 3) * s(1, 2) - g(1, 3) * s(0, 2))
                    / (nf - 2.0)
        }
        GeneralizedTensorKind::Conformal => {
            riemann
                - (g(0, 3) * s(1, 2) - g(1, 3) * s(0, 2) + g(1, 2) * s(0, 3) - g(0, 2) * s(1, 3))
                    / (nf - 2.0)
                + scalar / ((nf - 1.0) * (nf - 2.0)) * gg
        }
        GeneralizedTensorKind::MProjective => {
            riemann
                - (s(1, 2) * g(0, 3) - s(0, 2) * g(1, 3) + g(1, 2) * s(0, 3) - g(0, 2) * s(1, 3))
                    / (2.0 * (nf - 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::curvature;
    use crate::parse::parse_metric_expression;

    fn s3() -> crate::ChartedManifold {
        parse_metric_expression(
            "coords=(θ,φ,ψ); domain=[(0,pi),(0,2*pi),(0,4*pi)];
             g=[[0.25,0,0],[0,0.25,0.25*cos(θ)],[0,0.25*cos(θ),0.25]]",
        )
        .unwrap()
    }

    #[test]
    fn ricci_operator_on_unit_three_sphere_doubles() {
        let m = s3();
        let c = curvature(&m, &[1.1, 2.0, 3.0]).unwrap();
        let x = [0.3, -1.2, 0.7];
        let q = ricci_operator(&c, &x);
        for (a, b) in q.iter().zip(&x) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_and_combine_agree() {
        let m = parse_metric_expression(
            "coords=(a,b,c,d); g=[[1+a^2,0.1*b,0,0],[0.1*b,exp(c),0,0.2],[0,0,2+sin(a),0],[0,0.2,0,1+d^2]]",
        )
        .unwrap();
        let c = curvature(&m, &[0.2, -0.4, 0.5, 0.1]).unwrap();
        let v = [
            vec![1.0, 0.2, -0.3, 0.4],
            vec![-0.5, 1.0, 0.1, 0.0],
            vec![0.3, 0.3, 1.0, -0.2],
            vec![0.0, -0.7, 0.4, 1.0],
        ];
        for kind in GeneralizedTensorKind::ALL {
            let direct = generalized_tensor(kind, &c, &v[0], &v[1], &v[2], &v[3], false).unwrap();
            let r = c.riemann_form(&v[0], &v[1], &v[2], &v[3]);
            let via = combine(
                kind,
                4,
                r,
                |i, j| c.ricci_form(&v[i], &v[j]),
                |i, j| c.inner(&v[i], &v[j]),
                c.scalar,
            );
            assert!((direct - via).abs() < 1e-12, "{kind:?}: {direct} vs {via}");
        }
    }

    #[test]
    fn dimension_rules() {
        let m = s3();
        let c = curvature(&m, &[1.0, 1.0, 1.0]).unwrap();
        let e = [1.0, 0.0, 0.0];
        assert!(matches!(
            generalized_tensor(GeneralizedTensorKind::Conharmonic, &c, &e, &e, &e, &e, false),
            Err(Error::Dimension { .. })
        ));
        assert!(generalized_tensor(GeneralizedTensorKind::Conharmonic, &c, &e, &e, &e, &e, true).is_ok());
        assert!(generalized_tensor(GeneralizedTensorKind::WeylProjective, &c, &e, &e, &e, &e, false).is_ok());
    }
}
