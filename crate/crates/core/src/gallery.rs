//! Built-in submersions in adapted coordinates, with the quantities that are
//! known in closed form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::parse::parse_submersion;
use crate::submersion::SubmersionSpec;

pub const NAMES: [&str; 4] = ["product_s2_s1", "hopf", "warped_interval_s1", "flat_torus_quotient"];

const PRODUCT_S2_S1: &str = "\
# Unit round S² × unit S¹, projected onto the sphere factor.
name = product_s2_s1

total {
  coords = (θ, φ, s)
  domain = [(0, pi), (0, 2*pi), (0, 2*pi)]
  g = [[1, 0, 0],
       [0, sin(θ)^2, 0],
       [0, 0, 1]]
}

base {
  coords = (θ, φ)
  domain = [(0, pi), (0, 2*pi)]
  g = [[1, 0], [0, sin(θ)^2]]
}

pi = (θ, φ)
";

const HOPF: &str = "\
# Hopf fibration of the unit three-sphere over the sphere of radius 1/2.
# Euler angles; the fibres are the ψ-circles.
name = hopf

total {
  coords = (θ, φ, ψ)
  domain = [(0, pi), (0, 2*pi), (0, 4*pi)]
  g = [[1/4, 0, 0],
       [0, 1/4, cos(θ)/4],
       [0, cos(θ)/4, 1/4]]
}

base {
  coords = (θ, φ)
  domain = [(0, pi), (0, 2*pi)]
  g = [[1/4, 0], [0, sin(θ)^2/4]]
}

pi = (θ, φ)
";

const WARPED_INTERVAL_S1: &str = "\
# Warped product (-1, 1) ×_f S¹ with f(t) = exp(t), projected onto the interval.
name = warped_interval_s1

total {
  coords = (t, θ)
  domain = [(-1, 1), (0, 2*pi)]
  g = [[1, 0], [0, exp(2*t)]]
}

base {
  coords = (t)
  domain = [(-1, 1)]
  g = [[1]]
}

pi = (t)
";

const FLAT_TORUS_QUOTIENT: &str = "\
# Flat torus onto its first circle factor.
name = flat_torus_quotient

total {
  coords = (u, v)
  domain = [(0, 2*pi), (0, 2*pi)]
  g = [[1, 0], [0, 1]]
}

base {
  coords = (u)
  domain = [(0, 2*pi)]
  g = [[1]]
}

pi = (u)
";

/// Quantities of a gallery entry that are known analytically. `None` means
/// the quantity is not constant and is not checked.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Known {
    pub total_scalar: f64,
    pub base_scalar: f64,
    pub fibre_scalar: f64,
    pub total_sectional: Option<f64>,
    pub base_sectional: Option<f64>,
    pub t_vanishes: bool,
    pub a_vanishes: bool,
    pub n_vanishes: bool,
    /// `g(N, N)` where it is constant.
    pub n_norm2: Option<f64>,
    /// `Σ |A_{X_i}X_{i'}|²` where it is constant.
    pub a2_block: Option<f64>,
    pub notes: &'static str,
}

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub spec: SubmersionSpec,
    pub known: Known,
}

/// Definition text of a gallery entry, in the submersion file grammar.
pub fn definition_text(name: &str) -> Result<&'static str> {
    Ok(match name {
        "product_s2_s1" => PRODUCT_S2_S1,
        "hopf" => HOPF,
        "warped_interval_s1" => WARPED_INTERVAL_S1,
        "flat_torus_quotient" => FLAT_TORUS_QUOTIENT,
        _ => return Err(Error::UnknownExample(name.to_string())),
    })
}

fn known(name: &str) -> Known {
    match name {
        "product_s2_s1" => Known {
            total_scalar: 2.0,
            base_scalar: 2.0,
            fibre_scalar: 0.0,
            total_sectional: None,
            base_sectional: Some(1.0),
            t_vanishes: true,
            a_vanishes: true,
            n_vanishes: true,
            n_norm2: Some(0.0),
            a2_block: Some(0.0),
            notes: "Riemannian product: fibres totally geodesic, horizontal distribution integrable.",
        },
        "hopf" => Known {
            total_scalar: 6.0,
            base_scalar: 8.0,
            fibre_scalar: 0.0,
            total_sectional: Some(1.0),
            base_sectional: Some(4.0),
            t_vanishes: true,
            a_vanishes: false,
            n_vanishes: true,
            n_norm2: Some(0.0),
            a2_block: Some(2.0),
            notes: "Space forms: r = n(n-1)K. Fibres are great circles, so T = 0; |A_X Y| = 1 \
                    for orthonormal horizontal X, Y from K_base = K_total + 3|A_X Y|².",
        },
        "warped_interval_s1" => Known {
            total_scalar: -2.0,
            base_scalar: 0.0,
            fibre_scalar: 0.0,
            total_sectional: Some(-1.0),
            base_sectional: None,
            t_vanishes: false,
            a_vanishes: true,
            n_vanishes: false,
            n_norm2: Some(1.0),
            a2_block: Some(0.0),
            notes: "dt² + f²dθ² has Gaussian curvature -f''/f = -1 and mean curvature |f'|/f = 1 \
                    for f = exp(t). One-dimensional base and fibre are flat.",
        },
        "flat_torus_quotient" => Known {
            total_scalar: 0.0,
            base_scalar: 0.0,
            fibre_scalar: 0.0,
            total_sectional: Some(0.0),
            base_sectional: None,
            t_vanishes: true,
            a_vanishes: true,
            n_vanishes: true,
            n_norm2: Some(0.0),
            a2_block: Some(0.0),
            notes: "Constant flat metric: every tensor vanishes.",
        },
        _ => unreachable!("names are checked by definition_text"),
    }
}

/// Parses and validates a gallery entry.
pub fn build_example(name: &str) -> Result<GalleryEntry> {
    let source = definition_text(name)?;
    let spec = parse_submersion(source)?;
    spec.require_adapted()?;
    let name = NAMES.into_iter().find(|n| *n == name).expect("checked above");
    Ok(GalleryEntry {
        name,
        source,
        spec,
        known: known(name),
    })
}

pub fn all() -> Vec<GalleryEntry> {
    NAMES
        .into_iter()
        .map(|n| build_example(n).expect("gallery entries parse"))
        .collect()
}
