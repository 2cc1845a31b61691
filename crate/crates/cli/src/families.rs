//! Deterministic test-function families.

use std::sync::Arc;

use siolab_core::operators::ScalarField;
use siolab_core::point::{dot, norm, Point};

use crate::config::Family;
use crate::error::{CliError, Result};

/// Smooth compactly supported profile: `exp(-1/(1 - u^2))` for `|u| < 1`.
#[inline]
fn bump_profile(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Build a family member.
///
/// - `gaussian_dilations`: `exp(-|lambda x|^2)`;
/// - `annulus_bumps`: smooth radial bump supported in `1 < |x| < 2` times the
///   angular factor `1 + (theta . u(tau)) / 2` rotated by the parameter tau;
/// - `necessity_bump`: fixed smooth bump supported in `|x - 2 e1| < 1/2`,
///   vanishing near the origin while its Riesz transform does not; the
///   parameter is the norm window's inner truncation radius and leaves the
///   field untouched.
pub fn make_test_function(family: Family, parameter: f64, dim: usize) -> Result<ScalarField<f64>> {
    if !(parameter > 0.0) || !parameter.is_finite() {
        return Err(CliError::Config(format!(
            "family parameter must be positive and finite, got {parameter}"
        )));
    }
    if dim != 2 && dim != 3 {
        return Err(CliError::Config(format!("dim must be 2 or 3, got {dim}")));
    }
    Ok(match family {
        Family::GaussianDilations => {
            let lambda2 = parameter * parameter;
            Arc::new(move |p: Point<f64>| (-lambda2 * dot(p, p)).exp())
        }
        Family::AnnulusBumps => {
            let (c, s) = (parameter.cos(), parameter.sin());
            Arc::new(move |p: Point<f64>| {
                let r = norm(p);
                let radial = bump_profile(2.0 * (r - 1.5));
                if radial == 0.0 {
                    return 0.0;
                }
                let angular = 1.0 + 0.5 * (p[0] * c + p[1] * s) / r;
                radial * angular
            })
        }
        Family::NecessityBump => Arc::new(move |p: Point<f64>| {
            let d = [p[0] - 2.0, p[1], p[2]];
            bump_profile(2.0 * norm(d))
        }),
    })
}

/// Support data of the necessity bump, used by the stitched transform.
pub const NECESSITY_CENTER: Point<f64> = [2.0, 0.0, 0.0];
pub const NECESSITY_RADIUS: f64 = 0.5;
