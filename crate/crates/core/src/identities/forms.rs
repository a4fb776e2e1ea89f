//! Right-hand sides of the generalized-tensor relations exactly as printed,
//! and their `N = 0` simplifications.
//!
//! Transcription notes, all deliberate:
//! - `A_X T` in the concircular, conharmonic and conformal `HHHV` relations
//!   is read as `A_X Y`, the term of the O'Neill relation it copies.
//! - The `HHVV` relations print the O'Neill expansion with `−g(A_X W, A_Y V)`,
//!   which is `−R(X, Y, V, W)` under our convention; they are evaluated as
//!   printed and fail by sign wherever the expansion is nonzero.
//! - The `HVHV` relations print `+g((∇_V A)_X Y, W)`. All but the Weyl
//!   projective one print `g(A_X Y, A_Y W)`, which vanishes identically since
//!   `A_X Y` is vertical and `A_Y W` horizontal. The Weyl projective one has
//!   `g(A_X V, A_Y W)` and no Ricci correction; the conformal one has no
//!   scalar-curvature term.
//! - The conharmonic `VVVV` relation's third bracket is the `(U, V)` Ricci
//!   bracket.
//! - The M-projective `VVVV` second bracket is printed without parentheses
//!   around its frame sum; it is read as summed.
//! - The concircular scalar curvature is `r̂ + r^G − |A|² − |T|²`; the
//!   conformal one is the full formula. Norms use the block convention.
//! - In the `N = 0` forms the `VVVH` bracket keeps `+Σ_j` where the full
//!   form has `−Σ_j`.

use super::{Case, Probe};
use crate::submersion::NormConvention;
use crate::tensors::GeneralizedTensorKind as K;

type V<'a> = &'a [f64];

struct Printed<'p, 'a> {
    p: &'p Probe<'a>,
    /// `N = 0` form
    cor: bool,
}

impl Printed<'_, '_> {
    fn g(&self, a: V, b: V) -> f64 {
        self.p.g(a, b)
    }

    fn hh(&self, x: V, y: V) -> f64 {
        self.p.ricci_hh(x, y, !self.cor)
    }

    fn vv(&self, u: V, v: V) -> f64 {
        self.p.ricci_vv(u, v, !self.cor)
    }

    fn vh(&self, u: V, x: V) -> f64 {
        let sign = if self.cor { 1.0 } else { -1.0 };
        self.p.ricci_vh(u, x, !self.cor, sign)
    }

    fn hv_swapped(&self, x: V, v: V) -> f64 {
        self.p.ricci_hv_swapped(x, v, !self.cor)
    }

    fn r_concircular(&self) -> f64 {
        self.p.scalar_rhs_short(NormConvention::Block)
    }

    fn r_conformal(&self) -> f64 {
        if self.cor {
            self.p.scalar_rhs_short(NormConvention::Block)
        } else {
            self.p.scalar_rhs(NormConvention::Block)
        }
    }

    /// `HVHV` curvature part shared by the concircular, conharmonic,
    /// conformal and M-projective relations.
    fn hvhv_base(&self, x: V, v: V, y: V, w: V) -> f64 {
        let p = self.p;
        p.nt(x, v, w, y) + p.na(v, x, y, w) - p.tt(v, x, w, y) + p.aa(x, y, y, w)
    }

    fn eval(&self, kind: K, case: Case, vs: &[Vec<f64>]) -> f64 {
        let p = self.p;
        let nf = p.n() as f64;
        let (a, b, c, d) = (&vs[0][..], &vs[1][..], &vs[2][..], &vs[3][..]);
        let k_proj = 1.0 / (nf - 1.0);
        let k_con = 1.0 / (nf - 2.0);
        let k_m = 1.0 / (2.0 * (nf - 1.0));
        match case {
            Case::HHHH => {
                let (x, y, z, h) = (a, b, c, d);
                let base = p.oneill_rhs(Case::HHHH, vs, true);
                let four = || {
                    self.g(x, h) * self.hh(y, z) - self.g(y, h) * self.hh(x, z)
                        + self.g(y, z) * self.hh(x, h)
                        - self.g(x, z) * self.hh(y, h)
                };
                let gg = self.g(y, z) * self.g(x, h) - self.g(x, z) * self.g(y, h);
                match kind {
                    K::WeylProjective => {
                        base - k_proj * (self.g(x, h) * self.hh(y, z) - self.g(y, h) * self.hh(x, z))
                    }
                    K::Concircular => base - self.r_concircular() / (nf * (nf - 1.0)) * gg,
                    K::Conharmonic => {
                        base - k_con
                            * (self.g(y, z) * self.hh(x, h) - self.g(x, z) * self.hh(y, h)
                                + self.g(x, h) * self.hh(y, z)
                                - self.g(y, h) * self.hh(x, z))
                    }
                    K::Conformal => {
                        base - k_con * four() + self.r_conformal() / ((nf - 1.0) * (nf - 2.0)) * gg
                    }
                    K::MProjective => base - k_m * four(),
                }
            }
            Case::HHHV => {
                let (x, y, z, v) = (a, b, c, d);
                let base = p.oneill_rhs(Case::HHHV, vs, true);
                let bracket = || {
                    self.g(y, z) * self.hv_swapped(x, v) - self.g(x, z) * self.hv_swapped(y, v)
                };
                match kind {
                    K::WeylProjective | K::Concircular => base,
                    K::Conharmonic | K::Conformal => base - k_con * bracket(),
                    K::MProjective => base - k_m * bracket(),
                }
            }
            Case::HHVV => p.hhvv_flipped(a, b, c, d),
            Case::HVHV => {
                let (x, v, y, w) = (a, b, c, d);
                let bracket =
                    || -self.g(v, w) * self.hh(x, y) - self.g(x, y) * self.vv(v, w);
                match kind {
                    K::WeylProjective => {
                        p.nt(x, v, w, y) + p.na(v, x, y, w) - p.tt(v, x, w, y) + p.aa(x, v, y, w)
                    }
                    K::Concircular => {
                        self.hvhv_base(x, v, y, w)
                            - self.r_concircular() / (nf * (nf - 1.0)) * (-self.g(x, y) * self.g(v, w))
                    }
                    K::Conharmonic | K::Conformal => self.hvhv_base(x, v, y, w) - k_con * bracket(),
                    K::MProjective => self.hvhv_base(x, v, y, w) - k_m * bracket(),
                }
            }
            Case::VVVH => {
                let (u, v, w, x) = (a, b, c, d);
                let base = p.oneill_rhs(Case::VVVH, vs, true);
                let bracket = || self.g(v, w) * self.vh(u, x) - self.g(u, w) * self.vh(v, x);
                match kind {
                    K::WeylProjective | K::Concircular => base,
                    K::Conharmonic | K::Conformal => base - k_con * bracket(),
                    K::MProjective => base - k_m * bracket(),
                }
            }
            Case::VVVV => {
                let (u, v, w, f) = (a, b, c, d);
                let base = p.oneill_rhs(Case::VVVV, vs, true);
                let four = || {
                    self.g(f, u) * self.vv(v, w) - self.g(f, v) * self.vv(u, w)
                        + self.g(v, w) * self.vv(u, f)
                        - self.g(u, w) * self.vv(v, f)
                };
                let gg = self.g(v, w) * self.g(u, f) - self.g(u, w) * self.g(v, f);
                match kind {
                    K::WeylProjective => {
                        base - k_proj * (self.g(f, u) * self.vv(v, w) - self.g(f, v) * self.vv(u, w))
                    }
                    K::Concircular => base - self.r_concircular() / (nf * (nf - 1.0)) * gg,
                    K::Conharmonic => {
                        base - k_con
                            * (self.g(v, w) * self.vv(u, f) - self.g(u, w) * self.vv(v, f)
                                + self.g(f, u) * self.vv(u, v)
                                - self.g(f, v) * self.vv(u, w))
                    }
                    K::Conformal => {
                        base - k_con * four() + self.r_conformal() / ((nf - 1.0) * (nf - 2.0)) * gg
                    }
                    K::MProjective => base - k_m * four(),
                }
            }
        }
    }
}

/// Printed right-hand side of the `kind` relation for `case`; `corollary`
/// selects the `N = 0` form.
pub(super) fn printed(p: &Probe<'_>, kind: K, case: Case, vs: &[Vec<f64>], corollary: bool) -> f64 {
    Printed { p, cor: corollary }.eval(kind, case, vs)
}
