//! Both sides of the submersion curvature identities at one point.
//!
//! A [`Probe`] bundles the local geometry at a point with a seeded compatible
//! frame. Identities are named by family and by the horizontal/vertical
//! pattern of their four slots, e.g. `oneill.HHVV` evaluates
//! `g(R(X,Y)V,W)` and `conharmonic.VVVH` evaluates `L*(U,V,W,X)`.
//!
//! Each evaluation yields the left side, the right side as printed, and
//! where the printed form is not the one that follows from the verified
//! O'Neill, Ricci and scalar relations, a corrected right side.

mod forms;
pub mod report;
pub mod suite;

use std::fmt;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;
use crate::submersion::{FrameVectors, LocalGeometry, NormConvention, Norms};
use crate::tensors::{combine, GeneralizedTensorKind};

pub use suite::{run_suite, ExampleSource, Family, SuiteConfig, SuiteReport};

/// Horizontal/vertical pattern of the four slots, in slot order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    /// `(X, Y, Z, H)`
    HHHH,
    /// `(X, Y, Z, V)`
    HHHV,
    /// `(X, Y, V, W)`
    HHVV,
    /// `(X, V, Y, W)`
    HVHV,
    /// `(U, V, W, X)`
    VVVH,
    /// `(U, V, W, F)`
    VVVV,
}

impl Case {
    pub const ALL: [Case; 6] = [Case::HHHH, Case::HHHV, Case::HHVV, Case::HVHV, Case::VVVH, Case::VVVV];

    pub fn pattern(self) -> [Slot; 4] {
        use Slot::{H, V};
        match self {
            Case::HHHH => [H, H, H, H],
            Case::HHHV => [H, H, H, V],
            Case::HHVV => [H, H, V, V],
            Case::HVHV => [H, V, H, V],
            Case::VVVH => [V, V, V, H],
            Case::VVVV => [V, V, V, V],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Case::HHHH => "HHHH",
            Case::HHHV => "HHHV",
            Case::HHVV => "HHVV",
            Case::HVHV => "HVHV",
            Case::VVVH => "VVVH",
            Case::VVVV => "VVVV",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    H,
    V,
}

/// Which Ricci relation: both arguments vertical, both horizontal, or
/// `S(U, X)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RicciCase {
    VV,
    HH,
    VH,
}

impl RicciCase {
    pub const ALL: [RicciCase; 3] = [RicciCase::VV, RicciCase::HH, RicciCase::VH];

    pub fn pattern(self) -> [Slot; 2] {
        match self {
            RicciCase::VV => [Slot::V, Slot::V],
            RicciCase::HH => [Slot::H, Slot::H],
            RicciCase::VH => [Slot::V, Slot::H],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RicciCase::VV => "VV",
            RicciCase::HH => "HH",
            RicciCase::VH => "VH",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    ONeill(Case),
    Ricci(RicciCase),
    Scalar,
    Generalized(GeneralizedTensorKind, Case),
    /// `N = 0` simplification of a generalized relation.
    Corollary(GeneralizedTensorKind, Case),
}

/// Relations that come with an `N = 0` simplified form.
pub fn corollary_cases(kind: GeneralizedTensorKind) -> &'static [Case] {
    match kind {
        GeneralizedTensorKind::WeylProjective => &[Case::HHHH, Case::VVVV],
        GeneralizedTensorKind::Concircular => &[],
        _ => &[Case::HHHH, Case::HHHV, Case::HVHV, Case::VVVH, Case::VVVV],
    }
}

impl IdentityId {
    /// Every identity in report order.
    pub fn all() -> Vec<IdentityId> {
        let mut out: Vec<IdentityId> = Case::ALL.into_iter().map(IdentityId::ONeill).collect();
        out.extend(RicciCase::ALL.into_iter().map(IdentityId::Ricci));
        out.push(IdentityId::Scalar);
        for kind in GeneralizedTensorKind::ALL {
            out.extend(Case::ALL.into_iter().map(|c| IdentityId::Generalized(kind, c)));
        }
        for kind in GeneralizedTensorKind::ALL {
            out.extend(corollary_cases(kind).iter().map(|&c| IdentityId::Corollary(kind, c)));
        }
        out
    }

    pub fn family(self) -> Family {
        match self {
            IdentityId::ONeill(_) => Family::ONeill,
            IdentityId::Ricci(_) => Family::Ricci,
            IdentityId::Scalar => Family::Scalar,
            IdentityId::Generalized(..) => Family::Generalized,
            IdentityId::Corollary(..) => Family::Corollary,
        }
    }

    pub fn kind(self) -> Option<GeneralizedTensorKind> {
        match self {
            IdentityId::Generalized(k, _) | IdentityId::Corollary(k, _) => Some(k),
            _ => None,
        }
    }

    pub fn case_str(self) -> &'static str {
        match self {
            IdentityId::ONeill(c) | IdentityId::Generalized(_, c) | IdentityId::Corollary(_, c) => {
                c.as_str()
            }
            IdentityId::Ricci(r) => r.as_str(),
            IdentityId::Scalar => "",
        }
    }

    pub fn label(self) -> String {
        match self {
            IdentityId::ONeill(c) => format!("oneill.{}", c.as_str()),
            IdentityId::Ricci(r) => format!("ricci.{}", r.as_str()),
            IdentityId::Scalar => "scalar".to_string(),
            IdentityId::Generalized(k, c) => format!("{}.{}", k.slug(), c.as_str()),
            IdentityId::Corollary(k, c) => format!("corollary.{}.{}", k.slug(), c.as_str()),
        }
    }

    pub fn parse(s: &str) -> Option<IdentityId> {
        IdentityId::all().into_iter().find(|id| id.label() == s)
    }

    /// Slot types of the vectors the identity consumes.
    pub fn pattern(self) -> Vec<Slot> {
        match self {
            IdentityId::ONeill(c) | IdentityId::Generalized(_, c) | IdentityId::Corollary(_, c) => {
                c.pattern().to_vec()
            }
            IdentityId::Ricci(r) => r.pattern().to_vec(),
            IdentityId::Scalar => Vec::new(),
        }
    }

    /// Names of the two right-hand-side variants.
    pub fn variant_labels(self) -> (&'static str, &'static str) {
        match self {
            IdentityId::Scalar => ("block norms", "full norms"),
            IdentityId::Corollary(..) => ("N-free form", ""),
            _ => ("as printed", "corrected"),
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for IdentityId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

/// Values of one identity at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub lhs: f64,
    pub rhs_printed: f64,
    pub rhs_corrected: Option<f64>,
}

/// Threshold on `|N|` below which the corollary forms apply.
pub const N_ZERO: f64 = 1e-10;

/// Local geometry plus a compatible frame: everything needed to evaluate
/// both sides of every identity at one point.
pub struct Probe<'a> {
    pub geo: &'a LocalGeometry,
    pub frame: &'a FrameVectors,
    pub norms: Norms,
    /// Admit `n = 3` for the `1/(n−2)` tensors.
    pub allow_three: bool,
}

impl<'a> Probe<'a> {
    pub fn new(geo: &'a LocalGeometry, frame: &'a FrameVectors) -> Self {
        Probe {
            geo,
            frame,
            norms: geo.norms(frame),
            allow_three: true,
        }
    }

    pub fn n(&self) -> usize {
        self.geo.n
    }

    /// Random combination of the frame legs of the given type, coefficients
    /// uniform in `[−1, 1]`.
    pub fn typed_vector<R: Rng + ?Sized>(&self, slot: Slot, rng: &mut R) -> Vec<f64> {
        let legs = match slot {
            Slot::H => &self.frame.horizontal,
            Slot::V => &self.frame.vertical,
        };
        let mut v = vec![0.0; self.n()];
        for leg in legs {
            linalg::axpy(rng.random_range(-1.0..=1.0), leg, &mut v);
        }
        v
    }

    pub fn typed_vectors<R: Rng + ?Sized>(&self, pattern: &[Slot], rng: &mut R) -> Vec<Vec<f64>> {
        pattern.iter().map(|&s| self.typed_vector(s, rng)).collect()
    }

    pub fn n_norm(&self) -> f64 {
        self.norms.n2.max(0.0).sqrt()
    }

    pub(crate) fn g(&self, a: &[f64], b: &[f64]) -> f64 {
        self.geo.g(a, b)
    }

    /// `g(T_a b, T_c d)`
    pub(crate) fn tt(&self, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
        self.g(&self.geo.t(a, b), &self.geo.t(c, d))
    }

    /// `g(A_a b, A_c d)`
    pub(crate) fn aa(&self, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
        self.g(&self.geo.a(a, b), &self.geo.a(c, d))
    }

    /// `g(A_a b, T_c d)`
    pub(crate) fn at(&self, a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> f64 {
        self.g(&self.geo.a(a, b), &self.geo.t(c, d))
    }

    /// `g((∇_e T)_f h, w)`
    pub(crate) fn nt(&self, e: &[f64], f: &[f64], h: &[f64], w: &[f64]) -> f64 {
        self.g(&self.geo.nabla_t(e, f, h), w)
    }

    /// `g((∇_e A)_f h, w)`
    pub(crate) fn na(&self, e: &[f64], f: &[f64], h: &[f64], w: &[f64]) -> f64 {
        self.g(&self.geo.nabla_a(e, f, h), w)
    }

    /// `g(∇_e N, w)`
    pub(crate) fn nn(&self, e: &[f64], w: &[f64]) -> f64 {
        self.g(&self.geo.nabla_n(e), w)
    }

    pub(crate) fn sum_h(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.frame.horizontal.iter().map(|x| f(x)).sum()
    }

    pub(crate) fn sum_v(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.frame.vertical.iter().map(|u| f(u)).sum()
    }

    /// Total-space curvature on the four vectors.
    pub fn total_riemann(&self, v: &[Vec<f64>]) -> f64 {
        self.geo.total.riemann_form(&v[0], &v[1], &v[2], &v[3])
    }

    /// `g((∇_V A)_X Y, W) − g((∇_W A)_X Y, V) + g(A_X V, A_Y W) − g(A_X W, A_Y V)
    /// − g(T_V X, T_W Y) + g(T_W X, T_V Y)`, which is `−R(X, Y, V, W)` under
    /// our curvature convention.
    pub fn hhvv_flipped(&self, x: &[f64], y: &[f64], v: &[f64], w: &[f64]) -> f64 {
        self.na(v, x, y, w) - self.na(w, x, y, v) + self.aa(x, v, y, w) - self.aa(x, w, y, v)
            - self.tt(v, x, w, y)
            + self.tt(w, x, v, y)
    }

    /// O'Neill right-hand side for the case. `printed` selects the printed
    /// `HHVV` and `HVHV` forms over the ones that hold under our curvature
    /// convention: both carry the opposite overall sign, and the printed
    /// `HHVV` also has `+g(A_X W, A_Y V)`. The other four relations have a
    /// single form.
    pub fn oneill_rhs(&self, case: Case, v: &[Vec<f64>], printed: bool) -> f64 {
        let (a, b, c, d) = (&v[0][..], &v[1][..], &v[2][..], &v[3][..]);
        match case {
            Case::HHHH => {
                let (x, y, z, h) = (a, b, c, d);
                self.geo.base_riemann(x, y, z, h) + 2.0 * self.aa(x, y, z, h) - self.aa(y, z, x, h)
                    + self.aa(x, z, y, h)
            }
            Case::HHHV => {
                let (x, y, z, w) = (a, b, c, d);
                -self.na(z, x, y, w) - self.at(x, y, w, z) + self.at(y, z, w, x) - self.at(x, z, w, y)
            }
            Case::HHVV => {
                let (x, y, vv, w) = (a, b, c, d);
                let cross = self.aa(x, w, y, vv);
                if printed {
                    self.na(vv, x, y, w) - self.na(w, x, y, vv) + self.aa(x, vv, y, w) + cross
                        - self.tt(vv, x, w, y)
                        + self.tt(w, x, vv, y)
                } else {
                    -self.hhvv_flipped(x, y, vv, w)
                }
            }
            Case::HVHV => {
                let (x, vv, y, w) = (a, b, c, d);
                if printed {
                    self.nt(x, vv, w, y) - self.na(vv, x, y, w) - self.tt(vv, x, w, y)
                        + self.aa(x, vv, y, w)
                } else {
                    -(self.nt(x, vv, w, y) + self.na(vv, x, y, w) - self.tt(vv, x, w, y)
                        + self.aa(x, vv, y, w))
                }
            }
            Case::VVVH => {
                let (u, vv, w, x) = (a, b, c, d);
                self.nt(u, vv, w, x) - self.nt(vv, u, w, x)
            }
            Case::VVVV => {
                let (u, vv, w, f) = (a, b, c, d);
                self.geo.fibre_riemann(u, vv, w, f) + self.tt(u, w, vv, f) - self.tt(vv, w, u, f)
            }
        }
    }

    /// `S^M(U, V)` from fibre data; `with_n` keeps the `N` term.
    pub fn ricci_vv(&self, u: &[f64], v: &[f64], with_n: bool) -> f64 {
        let n_term = if with_n {
            self.g(self.geo.n_vec(), &self.geo.t(u, v))
        } else {
            0.0
        };
        self.geo.fibre_ricci(u, v) - n_term
            + self.sum_h(|xi| self.nt(xi, u, v, xi) + self.aa(xi, u, xi, v))
    }

    /// `S^M(X, Y)` from base data.
    pub fn ricci_hh(&self, x: &[f64], y: &[f64], with_n: bool) -> f64 {
        let n_term = if with_n {
            0.5 * (self.nn(x, y) + self.nn(y, x))
        } else {
            0.0
        };
        self.geo.base_ricci(x, y) + n_term
            - 2.0 * self.sum_h(|xi| self.aa(x, xi, y, xi))
            - self.sum_v(|uj| self.tt(uj, x, uj, y))
    }

    /// `S^M(U, X)`. `sum_sign` is the sign in front of
    /// `Σ_j g((∇_{U_j}T)_{U_j}U, X)`.
    pub fn ricci_vh(&self, u: &[f64], x: &[f64], with_n: bool, sum_sign: f64) -> f64 {
        let n_term = if with_n { self.nn(u, x) } else { 0.0 };
        n_term + sum_sign * self.sum_v(|uj| self.nt(uj, uj, u, x))
            + self.sum_h(|xi| self.na(xi, xi, x, u) - 2.0 * self.at(x, xi, u, xi))
    }

    /// Mixed Ricci bracket with the roles of the two arguments exchanged:
    /// `g(∇_X N, V) − Σ_j g((∇_{U_j}T)_{U_j}X, V) + Σ_i (g((∇_{X_i}A)_{X_i}X, V) − 2g(A_V X_i, T_X X_i))`.
    pub fn ricci_hv_swapped(&self, x: &[f64], v: &[f64], with_n: bool) -> f64 {
        let n_term = if with_n { self.nn(x, v) } else { 0.0 };
        n_term - self.sum_v(|uj| self.nt(uj, uj, x, v))
            + self.sum_h(|xi| self.na(xi, xi, x, v) - 2.0 * self.at(v, xi, x, xi))
    }

    /// Ricci tensor of the total space on typed arguments, assembled from
    /// the submersion data.
    pub fn ricci_split(&self, a: &[f64], sa: Slot, b: &[f64], sb: Slot) -> f64 {
        match (sa, sb) {
            (Slot::V, Slot::V) => self.ricci_vv(a, b, true),
            (Slot::H, Slot::H) => self.ricci_hh(a, b, true),
            (Slot::V, Slot::H) => self.ricci_vh(a, b, true, -1.0),
            (Slot::H, Slot::V) => self.ricci_vh(b, a, true, -1.0),
        }
    }

    pub fn divergence_n(&self) -> f64 {
        self.sum_h(|xi| self.nn(xi, xi))
    }

    /// `r̂ + r^G − |N|² − |A|² − |T|² + 2 Σ_i g(∇_{X_i}N, X_i)`.
    pub fn scalar_rhs(&self, conv: NormConvention) -> f64 {
        self.geo.fibre.scalar + self.geo.base.scalar - self.norms.n2 - self.norms.a2(conv)
            - self.norms.t2(conv)
            + 2.0 * self.divergence_n()
    }

    /// `r̂ + r^G − |A|² − |T|²`, the form without `N` terms.
    pub fn scalar_rhs_short(&self, conv: NormConvention) -> f64 {
        self.geo.fibre.scalar + self.geo.base.scalar - self.norms.a2(conv) - self.norms.t2(conv)
    }

    /// The definition of `kind` evaluated on the total-space curvature.
    pub fn generalized_lhs(&self, kind: GeneralizedTensorKind, v: &[Vec<f64>]) -> f64 {
        let c = &self.geo.total;
        combine(
            kind,
            self.n(),
            self.total_riemann(v),
            |i, j| c.ricci_form(&v[i], &v[j]),
            |i, j| c.inner(&v[i], &v[j]),
            c.scalar,
        )
    }

    /// The definition of `kind` with `R`, `S` and `r` replaced by their
    /// submersion expressions.
    pub fn generalized_corrected(&self, kind: GeneralizedTensorKind, case: Case, v: &[Vec<f64>]) -> f64 {
        let pat = case.pattern();
        combine(
            kind,
            self.n(),
            self.oneill_rhs(case, v, false),
            |i, j| self.ricci_split(&v[i], pat[i], &v[j], pat[j]),
            |i, j| self.g(&v[i], &v[j]),
            self.scalar_rhs(NormConvention::Block),
        )
    }

    /// Evaluates `id` on `vectors` (typed per [`IdentityId::pattern`]).
    pub fn evaluate(&self, id: IdentityId, v: &[Vec<f64>]) -> Result<Evaluation> {
        if v.len() != id.pattern().len() {
            return Err(Error::UnsupportedCase(format!(
                "{id} takes {} vectors, got {}",
                id.pattern().len(),
                v.len()
            )));
        }
        Ok(match id {
            IdentityId::ONeill(case) => {
                let printed = self.oneill_rhs(case, v, true);
                let corrected = self.oneill_rhs(case, v, false);
                Evaluation {
                    lhs: self.total_riemann(v),
                    rhs_printed: printed,
                    rhs_corrected: matches!(case, Case::HHVV | Case::HVHV).then_some(corrected),
                }
            }
            IdentityId::Ricci(rc) => {
                let rhs = match rc {
                    RicciCase::VV => self.ricci_vv(&v[0], &v[1], true),
                    RicciCase::HH => self.ricci_hh(&v[0], &v[1], true),
                    RicciCase::VH => self.ricci_vh(&v[0], &v[1], true, -1.0),
                };
                Evaluation {
                    lhs: self.geo.total.ricci_form(&v[0], &v[1]),
                    rhs_printed: rhs,
                    rhs_corrected: None,
                }
            }
            IdentityId::Scalar => Evaluation {
                lhs: self.geo.total.scalar,
                rhs_printed: self.scalar_rhs(NormConvention::Block),
                rhs_corrected: Some(self.scalar_rhs(NormConvention::Full)),
            },
            IdentityId::Generalized(kind, case) => {
                kind.check_dim(self.n(), self.allow_three)?;
                Evaluation {
                    lhs: self.generalized_lhs(kind, v),
                    rhs_printed: forms::printed(self, kind, case, v, false),
                    rhs_corrected: Some(self.generalized_corrected(kind, case, v)),
                }
            }
            IdentityId::Corollary(kind, case) => {
                kind.check_dim(self.n(), self.allow_three)?;
                if !corollary_cases(kind).contains(&case) {
                    return Err(Error::UnsupportedCase(id.label()));
                }
                Evaluation {
                    lhs: forms::printed(self, kind, case, v, false),
                    rhs_printed: forms::printed(self, kind, case, v, true),
                    rhs_corrected: None,
                }
            }
        })
    }
}

/// `|lhs − rhs| / max(1, |lhs|, |rhs|)`
pub fn rel_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs())
}
