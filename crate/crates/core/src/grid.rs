//! Discretizations of R^2 and R^3.
//!
//! Two grids coexist. The polar grid carries the quadrature the norm code
//! needs: log-uniform radii on `[rho_min, rho_max]` with radial weights that
//! integrate against the measure `rho^{n-1} drho`, and an angular rule on the
//! unit sphere (equispaced angles for n = 2, Gauss–Legendre in the polar
//! cosine times equispaced azimuth for n = 3). The Cartesian grid hosts the
//! FFT path of the operator module. `resample` bridges the two.
//!
//! Log spacing is deliberate: the radial integrals of interest live on the
//! multiplicative group of positive reals with Haar measure `drho/rho`, and a
//! log-uniform lattice makes that measure uniform. Radial weights integrate
//! the Jacobian `rho^{n-1} drho` exactly against a piecewise-linear
//! interpolant in log rho, so quadrature of a constant telescopes to the
//! exact annulus volume.
//!
//! Grids exclude the origin (`rho_min > 0`); power weights `|x|^alpha` and
//! the kernels applied to these fields are singular there, and the inner
//! truncation is a first-class quantity probed by the sharpness diagnostics.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::point::{dot, norm, Point};
use crate::quad::gauss_legendre;
use crate::scalar::{count, real, Scalar};

/// Surface measure of the unit sphere: 2 pi for n = 2, 4 pi for n = 3.
pub fn sphere_measure<S: Scalar>(dim: usize) -> Result<S> {
    match dim {
        2 => Ok(S::TAU()),
        3 => Ok(real::<S>(4.0) * S::PI()),
        _ => Err(CoreError::UnsupportedDimension(dim)),
    }
}

/// Quadrature rule on the unit sphere. For n = 2, `resolution` equispaced
/// angles with weight `2 pi / N`; for n = 3, a product rule: Gauss–Legendre of
/// order `resolution` in the polar cosine times `2 resolution` equispaced
/// azimuths. Weights sum to the sphere measure up to roundoff, exactly enough
/// to integrate constants.
pub fn angular_rule<S: Scalar>(dim: usize, resolution: usize) -> Result<(Vec<Point<S>>, Vec<S>)> {
    if resolution < 4 {
        return Err(CoreError::InvalidResolution(format!(
            "need angular resolution >= 4, got {resolution}"
        )));
    }
    match dim {
        2 => {
            let n = resolution;
            let w = S::TAU() / count::<S>(n);
            let mut nodes = Vec::with_capacity(n);
            for j in 0..n {
                let phi = S::TAU() * count::<S>(j) / count::<S>(n);
                nodes.push([phi.cos(), phi.sin(), S::zero()]);
            }
            Ok((nodes, vec![w; n]))
        }
        3 => {
            let q = resolution;
            let azimuths = 2 * q;
            let (z_nodes, z_weights) = gauss_legendre::<S>(q);
            let w_phi = S::TAU() / count::<S>(azimuths);
            let mut nodes = Vec::with_capacity(q * azimuths);
            let mut weights = Vec::with_capacity(q * azimuths);
            for (z, wz) in z_nodes.iter().zip(&z_weights) {
                let s = (S::one() - *z * *z).max(S::zero()).sqrt();
                for a in 0..azimuths {
                    let phi = S::TAU() * count::<S>(a) / count::<S>(azimuths);
                    nodes.push([s * phi.cos(), s * phi.sin(), *z]);
                    weights.push(*wz * w_phi);
                }
            }
            Ok((nodes, weights))
        }
        _ => Err(CoreError::UnsupportedDimension(dim)),
    }
}

/// Common view of a grid: node enumeration plus interpolation of sampled
/// values, which is all `resample` needs.
pub trait GridGeometry<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;
    fn node_count(&self) -> usize;
    fn node(&self, index: usize) -> Point<S>;
    /// Interpolated value at `x`; `None` when `x` lies outside the covered
    /// region (polar annulus or Cartesian box).
    fn interpolate(&self, values: &[S], x: Point<S>) -> Option<S>;
    fn header(&self) -> FieldHeader;
}

// ---------------------------------------------------------------------------
// Polar grid
// ---------------------------------------------------------------------------

/// Log-radial x spherical product grid on the annulus `rho_min <= |x| <= rho_max`.
#[derive(Debug, Clone)]
pub struct PolarGrid<S> {
    dim: usize,
    radii: Vec<S>,
    radial_weights: Vec<S>,
    angular_nodes: Vec<Point<S>>,
    angular_weights: Vec<S>,
    log_step: S,
    angular_resolution: usize,
}

/// Construction parameters of a polar grid, also the serialized header form.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolarGridSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub radial_points: usize,
    pub angular_resolution: usize,
}

impl PolarGridSpec {
    pub fn build<S: Scalar>(&self, dim: usize) -> Result<Arc<PolarGrid<S>>> {
        PolarGrid::build(
            dim,
            real(self.rho_min),
            real(self.rho_max),
            self.radial_points,
            self.angular_resolution,
        )
    }

    /// Same resolution on the radially rescaled window `[factor a, factor b]`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rho_min: self.rho_min * factor,
            rho_max: self.rho_max * factor,
            ..self.clone()
        }
    }
}

impl<S: Scalar> PolarGrid<S> {
    /// Build the grid: log-uniform radii, product-trapezoid radial weights,
    /// and the dimension's angular rule. For n = 2, `angular_resolution` is
    /// the number of equispaced angles (weight `2 pi / N`); for n = 3 it is
    /// the Gauss–Legendre order q in the polar cosine, paired with 2q
    /// equispaced azimuths.
    pub fn build(
        dim: usize,
        rho_min: S,
        rho_max: S,
        radial_points: usize,
        angular_resolution: usize,
    ) -> Result<Arc<Self>> {
        if dim != 2 && dim != 3 {
            return Err(CoreError::UnsupportedDimension(dim));
        }
        if !(rho_min > S::zero()) || !(rho_min < rho_max) || !rho_max.is_finite() {
            return Err(CoreError::InvalidRadialRange {
                rho_min: rho_min.to_f64().unwrap_or(f64::NAN),
                rho_max: rho_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        if radial_points < 2 {
            return Err(CoreError::InvalidResolution(format!(
                "need at least 2 radial points, got {radial_points}"
            )));
        }
        if angular_resolution < 4 {
            return Err(CoreError::InvalidResolution(format!(
                "need angular resolution >= 4, got {angular_resolution}"
            )));
        }

        let t0 = rho_min.ln();
        let t1 = rho_max.ln();
        let log_step = (t1 - t0) / count::<S>(radial_points - 1);
        let mut radii = Vec::with_capacity(radial_points);
        for i in 0..radial_points {
            radii.push((t0 + log_step * count::<S>(i)).exp());
        }
        // Pin the endpoints so the covered annulus is exactly as requested.
        radii[0] = rho_min;
        radii[radial_points - 1] = rho_max;

        let radial_weights = radial_jacobian_weights(dim, &radii);
        let (angular_nodes, angular_weights) = angular_rule::<S>(dim, angular_resolution)?;

        Ok(Arc::new(Self {
            dim,
            radii,
            radial_weights,
            angular_nodes,
            angular_weights,
            log_step,
            angular_resolution,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radii(&self) -> &[S] {
        &self.radii
    }

    pub fn radial_weights(&self) -> &[S] {
        &self.radial_weights
    }

    pub fn angular_nodes(&self) -> &[Point<S>] {
        &self.angular_nodes
    }

    pub fn angular_weights(&self) -> &[S] {
        &self.angular_weights
    }

    pub fn shell_count(&self) -> usize {
        self.radii.len()
    }

    pub fn angular_count(&self) -> usize {
        self.angular_nodes.len()
    }

    pub fn log_step(&self) -> S {
        self.log_step
    }

    pub fn rho_min(&self) -> S {
        self.radii[0]
    }

    pub fn rho_max(&self) -> S {
        *self.radii.last().unwrap()
    }

    #[inline]
    pub fn node_index(&self, shell: usize, angular: usize) -> usize {
        shell * self.angular_nodes.len() + angular
    }

    #[inline]
    pub fn node_at(&self, shell: usize, angular: usize) -> Point<S> {
        let rho = self.radii[shell];
        let theta = self.angular_nodes[angular];
        [rho * theta[0], rho * theta[1], rho * theta[2]]
    }

    /// Quadrature of `f` over the annulus, shell-by-shell: the exact sums the
    /// norm code regroups.
    pub fn quadrature(&self, f: impl Fn(Point<S>) -> S) -> S {
        let mut acc = S::zero();
        for (i, &w_rad) in self.radial_weights.iter().enumerate() {
            let mut shell = S::zero();
            for (j, &w_ang) in self.angular_weights.iter().enumerate() {
                shell += w_ang * f(self.node_at(i, j));
            }
            acc += w_rad * shell;
        }
        acc
    }

    /// Sub-grid starting at `first_shell`, with the radial weights rebuilt on
    /// the narrowed window so truncated norms are exact, not partial sums of
    /// stale boundary weights.
    pub fn truncate_inner(&self, first_shell: usize) -> Result<Arc<Self>> {
        if first_shell + 2 > self.radii.len() {
            return Err(CoreError::InvalidWindow(format!(
                "truncation at shell {first_shell} leaves fewer than 2 of {}",
                self.radii.len()
            )));
        }
        let radii: Vec<S> = self.radii[first_shell..].to_vec();
        let radial_weights = radial_jacobian_weights(self.dim, &radii);
        Ok(Arc::new(Self {
            dim: self.dim,
            radii,
            radial_weights,
            angular_nodes: self.angular_nodes.clone(),
            angular_weights: self.angular_weights.clone(),
            log_step: self.log_step,
            angular_resolution: self.angular_resolution,
        }))
    }

    /// Index of the shell whose radius is nearest to `rho` in log scale.
    pub fn nearest_shell(&self, rho: S) -> usize {
        let t = (rho.ln() - self.radii[0].ln()) / self.log_step;
        let i = t.round().to_f64().unwrap_or(0.0) as isize;
        i.clamp(0, self.radii.len() as isize - 1) as usize
    }

    fn interpolate_impl(&self, values: &[S], x: Point<S>) -> Option<S> {
        let rho = norm(x);
        let slack = real::<S>(1e-12);
        let r_lo = self.radii[0];
        let r_hi = *self.radii.last().unwrap();
        if !(rho >= r_lo * (S::one() - slack)) || !(rho <= r_hi * (S::one() + slack)) {
            return None;
        }
        let t = (rho.max(r_lo).min(r_hi).ln() - r_lo.ln()) / self.log_step;
        let mut shell = t.floor().to_f64()? as usize;
        shell = shell.min(self.radii.len() - 2);
        let fr = (t - count::<S>(shell)).max(S::zero()).min(S::one());

        let n_ang = self.angular_nodes.len();
        match self.dim {
            2 => {
                let mut phi = x[1].atan2(x[0]);
                if phi < S::zero() {
                    phi += S::TAU();
                }
                let pos = phi / (S::TAU() / count::<S>(n_ang));
                let j = (pos.floor().to_f64()? as usize) % n_ang;
                let fa = (pos - pos.floor()).max(S::zero()).min(S::one());
                let j2 = (j + 1) % n_ang;
                let at = |s: usize, a: usize| values[s * n_ang + a];
                let lo = at(shell, j) * (S::one() - fa) + at(shell, j2) * fa;
                let hi = at(shell + 1, j) * (S::one() - fa) + at(shell + 1, j2) * fa;
                Some(lo * (S::one() - fr) + hi * fr)
            }
            3 => {
                // Nearest angular node; crude, used for diagnostics only.
                let inv = S::one() / rho.max(r_lo);
                let dir = [x[0] * inv, x[1] * inv, x[2] * inv];
                let mut best = 0usize;
                let mut best_dot = S::neg_infinity();
                for (j, n) in self.angular_nodes.iter().enumerate() {
                    let d = dot(*n, dir);
                    if d > best_dot {
                        best_dot = d;
                        best = j;
                    }
                }
                let lo = values[shell * n_ang + best];
                let hi = values[(shell + 1) * n_ang + best];
                Some(lo * (S::one() - fr) + hi * fr)
            }
            _ => None,
        }
    }
}

/// Radial weights `W_i` with `sum_i W_i f(rho_i) ~ int f(rho) rho^{n-1} drho`:
/// the piecewise-linear interpolant of `f` in t = ln rho is integrated exactly
/// against `e^{n t} dt` on each interval. Exact for constants by construction.
fn radial_jacobian_weights<S: Scalar>(dim: usize, radii: &[S]) -> Vec<S> {
    let n = count::<S>(dim);
    let mut weights = vec![S::zero(); radii.len()];
    for k in 0..radii.len() - 1 {
        let h = (radii[k + 1] / radii[k]).ln();
        let x = n * h;
        let e_k = radii[k].powi(dim as i32);
        // phi0 = (e^x - 1 - x)/x^2, phi1 = (x e^x - e^x + 1)/x^2; series below
        // x ~ 1e-3 where the direct forms lose digits to cancellation.
        let (phi0, phi1) = if x < real(1e-3) {
            let p0 = real::<S>(0.5)
                + x * (real::<S>(1.0 / 6.0)
                    + x * (real::<S>(1.0 / 24.0) + x * real::<S>(1.0 / 120.0)));
            let p1 = real::<S>(0.5)
                + x * (real::<S>(1.0 / 3.0) + x * (real::<S>(0.125) + x * real::<S>(1.0 / 30.0)));
            (p0, p1)
        } else {
            let em1 = x.exp_m1();
            ((em1 - x) / (x * x), ((x - S::one()) * em1 + x) / (x * x))
        };
        weights[k] += e_k * h * phi0;
        weights[k + 1] += e_k * h * phi1;
    }
    weights
}

// ---------------------------------------------------------------------------
// Cartesian grid
// ---------------------------------------------------------------------------

/// Uniform FFT-ready box `[-L, L)^n` with `M` (even) points per axis and the
/// origin on the grid.
#[derive(Debug, Clone)]
pub struct CartesianGrid<S> {
    dim: usize,
    half_extent: S,
    points_per_axis: usize,
    spacing: S,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CartesianGridSpec {
    pub half_extent: f64,
    pub points_per_axis: usize,
}

impl CartesianGridSpec {
    pub fn build<S: Scalar>(&self, dim: usize) -> Result<Arc<CartesianGrid<S>>> {
        CartesianGrid::build(dim, real(self.half_extent), self.points_per_axis)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            half_extent: self.half_extent * factor,
            points_per_axis: self.points_per_axis,
        }
    }
}

impl<S: Scalar> CartesianGrid<S> {
    pub fn build(dim: usize, half_extent: S, points_per_axis: usize) -> Result<Arc<Self>> {
        if dim != 2 && dim != 3 {
            return Err(CoreError::UnsupportedDimension(dim));
        }
        if !(half_extent > S::zero()) || !half_extent.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "half extent must be positive and finite, got {half_extent}"
            )));
        }
        if points_per_axis < 4 || !points_per_axis.is_multiple_of(2) {
            return Err(CoreError::InvalidResolution(format!(
                "points per axis must be even and >= 4, got {points_per_axis}"
            )));
        }
        let spacing = real::<S>(2.0) * half_extent / count::<S>(points_per_axis);
        Ok(Arc::new(Self {
            dim,
            half_extent,
            points_per_axis,
            spacing,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> S {
        self.half_extent
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> S {
        self.spacing
    }

    pub fn cell_volume(&self) -> S {
        self.spacing.powi(self.dim as i32)
    }

    #[inline]
    pub fn axis_coord(&self, k: usize) -> S {
        (count::<S>(k) - count::<S>(self.points_per_axis / 2)) * self.spacing
    }

    /// Decompose a linear index into per-axis indices (x fastest).
    #[inline]
    pub fn axis_indices(&self, index: usize) -> [usize; 3] {
        let m = self.points_per_axis;
        match self.dim {
            2 => [index % m, index / m, 0],
            _ => [index % m, (index / m) % m, index / (m * m)],
        }
    }

    /// True when the node touches any face of the box.
    pub fn is_boundary(&self, index: usize) -> bool {
        let idx = self.axis_indices(index);
        let m = self.points_per_axis - 1;
        (0..self.dim).any(|a| idx[a] == 0 || idx[a] == m)
    }

    fn interpolate_impl(&self, values: &[S], x: Point<S>) -> Option<S> {
        let m = self.points_per_axis;
        let slack = real::<S>(1e-9);
        let mut base = [0usize; 3];
        let mut frac = [S::zero(); 3];
        for a in 0..self.dim {
            let u = x[a] / self.spacing + count::<S>(m / 2);
            if u < -slack || u > count::<S>(m - 1) + slack {
                return None;
            }
            let clamped = u.max(S::zero()).min(count::<S>(m - 1));
            let mut i = clamped.floor().to_f64()? as usize;
            i = i.min(m - 2);
            base[a] = i;
            frac[a] = (clamped - count::<S>(i)).max(S::zero()).min(S::one());
        }
        let value_at = |ix: usize, iy: usize, iz: usize| -> S {
            match self.dim {
                2 => values[iy * m + ix],
                _ => values[(iz * m + iy) * m + ix],
            }
        };
        let lerp = |a: S, b: S, t: S| a + (b - a) * t;
        let mut planes = [S::zero(); 2];
        let z_range = if self.dim == 3 { 2 } else { 1 };
        #[allow(clippy::needless_range_loop)]
        for dz in 0..z_range {
            let row0 = lerp(
                value_at(base[0], base[1], base[2] + dz),
                value_at(base[0] + 1, base[1], base[2] + dz),
                frac[0],
            );
            let row1 = lerp(
                value_at(base[0], base[1] + 1, base[2] + dz),
                value_at(base[0] + 1, base[1] + 1, base[2] + dz),
                frac[0],
            );
            planes[dz] = lerp(row0, row1, frac[1]);
        }
        Some(if self.dim == 3 {
            lerp(planes[0], planes[1], frac[2])
        } else {
            planes[0]
        })
    }
}

impl<S: Scalar> GridGeometry<S> for PolarGrid<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn node_count(&self) -> usize {
        self.radii.len() * self.angular_nodes.len()
    }

    fn node(&self, index: usize) -> Point<S> {
        let n_ang = self.angular_nodes.len();
        self.node_at(index / n_ang, index % n_ang)
    }

    fn interpolate(&self, values: &[S], x: Point<S>) -> Option<S> {
        self.interpolate_impl(values, x)
    }

    fn header(&self) -> FieldHeader {
        FieldHeader {
            dim: self.dim,
            grid: GridParams::Polar(PolarGridSpec {
                rho_min: self.radii[0].to_f64().unwrap(),
                rho_max: self.radii.last().unwrap().to_f64().unwrap(),
                radial_points: self.radii.len(),
                angular_resolution: self.angular_resolution,
            }),
        }
    }
}

impl<S: Scalar> GridGeometry<S> for CartesianGrid<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    fn node(&self, index: usize) -> Point<S> {
        let idx = self.axis_indices(index);
        let mut p = [S::zero(); 3];
        for a in 0..self.dim {
            p[a] = self.axis_coord(idx[a]);
        }
        p
    }

    fn interpolate(&self, values: &[S], x: Point<S>) -> Option<S> {
        self.interpolate_impl(values, x)
    }

    fn header(&self) -> FieldHeader {
        FieldHeader {
            dim: self.dim,
            grid: GridParams::Cartesian(CartesianGridSpec {
                half_extent: self.half_extent.to_f64().unwrap(),
                points_per_axis: self.points_per_axis,
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Grid functions
// ---------------------------------------------------------------------------

/// A scalar field sampled on a grid: the universal value carrier. Values are
/// finite after every public operation; constructors enforce it.
#[derive(Debug, Clone)]
pub struct GridFunction<S, G> {
    grid: Arc<G>,
    values: Vec<S>,
}

pub type PolarField<S> = GridFunction<S, PolarGrid<S>>;
pub type CartesianField<S> = GridFunction<S, CartesianGrid<S>>;

impl<S: Scalar, G: GridGeometry<S>> GridFunction<S, G> {
    /// Evaluate `f` at every node.
    pub fn sample(grid: &Arc<G>, f: impl Fn(Point<S>) -> S + Sync) -> Result<Self> {
        let values: Vec<S> = (0..grid.node_count())
            .into_par_iter()
            .map(|i| f(grid.node(i)))
            .collect();
        Self::from_values(grid.clone(), values)
    }

    pub fn from_values(grid: Arc<G>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(CoreError::ValueCountMismatch {
                values: values.len(),
                nodes: grid.node_count(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            let p = grid.node(bad);
            return Err(CoreError::NonFiniteValue {
                index: bad,
                x: p[0].to_f64().unwrap_or(f64::NAN),
                y: p[1].to_f64().unwrap_or(f64::NAN),
                z: p[2].to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Arc<G> {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn max_abs(&self) -> S {
        self.values
            .iter()
            .fold(S::zero(), |acc, v| acc.max(v.abs()))
    }
}

impl<S: Scalar> PolarField<S> {
    pub fn shell_values(&self, shell: usize) -> Result<&[S]> {
        let n_ang = self.grid.angular_count();
        if shell >= self.grid.shell_count() {
            return Err(CoreError::ShellIndexOutOfRange {
                index: shell,
                shells: self.grid.shell_count(),
            });
        }
        Ok(&self.values[shell * n_ang..(shell + 1) * n_ang])
    }

    /// Restrict to shells `first_shell..`, rebuilding the radial weights.
    pub fn truncate_inner(&self, first_shell: usize) -> Result<Self> {
        let grid = self.grid.truncate_inner(first_shell)?;
        let values = self.values[first_shell * self.grid.angular_count()..].to_vec();
        GridFunction::from_values(grid, values)
    }
}

/// Interpolate `src` onto the nodes of `target`. Nodes outside the source's
/// covered region are zero-filled and counted; the count comes back with the
/// new field. Cartesian sources interpolate multilinearly; polar sources
/// linearly in log rho with linear-in-angle (n = 2) or nearest-node (n = 3)
/// angular treatment.
pub fn resample<S, GS, GT>(
    src: &GridFunction<S, GS>,
    target: &Arc<GT>,
) -> Result<(GridFunction<S, GT>, usize)>
where
    S: Scalar,
    GS: GridGeometry<S>,
    GT: GridGeometry<S>,
{
    if src.grid().dim() != target.dim() {
        return Err(CoreError::DimensionMismatch {
            left: src.grid().dim(),
            right: target.dim(),
        });
    }
    let grid = src.grid();
    let values = src.values();
    let interpolated: Vec<Option<S>> = (0..target.node_count())
        .into_par_iter()
        .map(|i| grid.interpolate(values, target.node(i)))
        .collect();
    let zero_filled = interpolated.iter().filter(|v| v.is_none()).count();
    let out: Vec<S> = interpolated
        .into_iter()
        .map(|v| v.unwrap_or_else(S::zero))
        .collect();
    Ok((GridFunction::from_values(target.clone(), out)?, zero_filled))
}

// ---------------------------------------------------------------------------
// Field serialization (the `--dump-field` interface)
// ---------------------------------------------------------------------------

/// JSON sidecar describing the grid a dumped field lives on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dim: usize,
    #[serde(flatten)]
    pub grid: GridParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridParams {
    Polar(PolarGridSpec),
    Cartesian(CartesianGridSpec),
}

/// Write `field` as a whitespace-separated text table, one row per node
/// (`x y [z] value`), plus a `<path>.meta.json` header with the grid
/// construction parameters. Floats print in shortest round-trip form.
pub fn dump_field<G: GridGeometry<f64>>(field: &GridFunction<f64, G>, path: &Path) -> Result<()> {
    let grid = field.grid();
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    for (i, v) in field.values().iter().enumerate() {
        let p = grid.node(i);
        if grid.dim() == 2 {
            writeln!(out, "{} {} {}", p[0], p[1], v)?;
        } else {
            writeln!(out, "{} {} {} {}", p[0], p[1], p[2], v)?;
        }
    }
    out.flush()?;
    let meta_path = meta_path(path);
    let meta = std::fs::File::create(meta_path)?;
    serde_json::to_writer_pretty(meta, &grid.header())?;
    Ok(())
}

fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".meta.json");
    std::path::PathBuf::from(os)
}

pub enum LoadedField {
    Polar(PolarField<f64>),
    Cartesian(CartesianField<f64>),
}

/// Read back a dumped field: header first, then the value column.
pub fn load_field(path: &Path) -> Result<LoadedField> {
    let header: FieldHeader = serde_json::from_reader(std::fs::File::open(meta_path(path))?)?;
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut values = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let last = line.split_whitespace().last().ok_or_else(|| {
            CoreError::MalformedField(format!("empty row at line {}", lineno + 1))
        })?;
        values.push(
            last.parse::<f64>()
                .map_err(|e| CoreError::MalformedField(format!("line {}: {e}", lineno + 1)))?,
        );
    }
    match header.grid {
        GridParams::Polar(spec) => {
            let grid = spec.build::<f64>(header.dim)?;
            Ok(LoadedField::Polar(GridFunction::from_values(grid, values)?))
        }
        GridParams::Cartesian(spec) => {
            let grid = spec.build::<f64>(header.dim)?;
            Ok(LoadedField::Cartesian(GridFunction::from_values(
                grid, values,
            )?))
        }
    }
}
