//! Singular integral operators of convolution type.
//!
//! A [`KernelSpec`] carries the kernel `K` on `R^n \ {0}`, optionally its
//! Fourier multiplier `m = Khat`, and (for the canonical directional family)
//! the direction vector. Three things are done with it:
//!
//! - [`check_kernel_conditions`] samples the Calderón–Zygmund bounds
//!   `|y|^n |K| <= C`, `|y|^{n+1} |grad K| <= C`, `|Khat| <= C`;
//! - [`apply_spectral`] applies the operator to a field on a Cartesian grid
//!   as a Fourier multiplier (FFT, pointwise `m`, inverse FFT);
//! - [`apply_pv_direct`] evaluates the truncated principal value
//!   `int_{eps<|y|<1} (f(x-y) - f(x)) K(y) dy + int_{1<|y|<R} f(x-y) K(y) dy`
//!   by polar quadrature, the independent oracle for the spectral path. The
//!   subtraction implements the cancellation that makes the limit finite for
//!   kernels with vanishing spherical mean; kernels without it get the raw
//!   truncated integral and a flag.
//!
//! The directional Riesz family is normalized by
//! `c_n = Gamma((n+1)/2) / pi^{(n+1)/2}` so that the multiplier is exactly
//! `-i (xi . theta) / |xi|`; each cross-oracle comparison needs one fixed
//! convention and this is the classical one.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftNum;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fft::fft_nd;
use crate::grid::{angular_rule, CartesianField, GridFunction, PolarGrid};
use crate::point::{dot, norm, sub, Point};
use crate::quad::gauss_legendre;
use crate::scalar::{count, real, Scalar};

pub type ScalarField<S> = Arc<dyn Fn(Point<S>) -> S + Send + Sync>;
pub type MultiplierFn<S> = Arc<dyn Fn(Point<S>) -> Complex<S> + Send + Sync>;

/// A singular kernel with optional Fourier symbol and direction.
#[derive(Clone)]
pub struct KernelSpec<S> {
    pub dim: usize,
    pub label: String,
    kernel: ScalarField<S>,
    multiplier: Option<MultiplierFn<S>>,
    pub direction: Option<Point<S>>,
}

impl<S: Scalar> KernelSpec<S> {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        kernel: ScalarField<S>,
        multiplier: Option<MultiplierFn<S>>,
        direction: Option<Point<S>>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(CoreError::UnsupportedDimension(dim));
        }
        if let Some(theta) = direction {
            let len = norm(theta);
            if (len - S::one()).abs() > real::<S>(1e-12).max(S::epsilon() * real(16.0)) {
                return Err(CoreError::NotUnitDirection(
                    len.to_f64().unwrap_or(f64::NAN),
                ));
            }
        }
        Ok(Self {
            dim,
            label: label.into(),
            kernel,
            multiplier,
            direction,
        })
    }

    /// Directional Riesz transform along `theta`:
    /// `K(y) = c_n (y . theta) / |y|^{n+1}`, `m(xi) = -i (xi . theta)/|xi|`,
    /// `m(0) = 0`.
    pub fn riesz(dim: usize, direction: Point<S>) -> Result<Self> {
        let c = riesz_constant::<S>(dim)?;
        let n_plus_1 = dim as i32 + 1;
        let theta = direction;
        let kernel: ScalarField<S> = Arc::new(move |y| c * dot(y, theta) / norm(y).powi(n_plus_1));
        let multiplier: MultiplierFn<S> = Arc::new(move |xi| {
            let len = norm(xi);
            if len > S::zero() {
                Complex::new(S::zero(), -dot(xi, theta) / len)
            } else {
                Complex::new(S::zero(), S::zero())
            }
        });
        Self::new(dim, "riesz", kernel, Some(multiplier), Some(direction))
    }

    /// `K(y) = |y|^{-(n-1)}`: too weak a decay at infinity to satisfy the
    /// size condition; the stock rejection example for the checker.
    pub fn inverse_power(dim: usize) -> Result<Self> {
        let exponent = -(dim as i32 - 1);
        let kernel: ScalarField<S> = Arc::new(move |y| norm(y).powi(exponent));
        Self::new(dim, "inv-power", kernel, None, None)
    }

    #[inline]
    pub fn kernel_at(&self, y: Point<S>) -> S {
        (self.kernel)(y)
    }

    pub fn has_multiplier(&self) -> bool {
        self.multiplier.is_some()
    }

    pub fn multiplier_at(&self, xi: Point<S>) -> Option<Complex<S>> {
        self.multiplier.as_ref().map(|m| m(xi))
    }
}

/// `Gamma((n+1)/2) / pi^{(n+1)/2}` for n in {2, 3}: `1/(2 pi)` and `1/pi^2`.
pub fn riesz_constant<S: Scalar>(dim: usize) -> Result<S> {
    match dim {
        2 => Ok(S::one() / S::TAU()),
        3 => Ok(S::one() / (S::PI() * S::PI())),
        _ => Err(CoreError::UnsupportedDimension(dim)),
    }
}

// ---------------------------------------------------------------------------
// Calderón–Zygmund condition checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelConditionReport<S> {
    /// Empirical `sup |y|^n |K(y)|` over the sampled radii and directions.
    pub sup_size: S,
    /// Empirical `sup |y|^{n+1} |grad K(y)|`, gradient by central differences.
    pub sup_gradient: S,
    /// Empirical `sup |Khat|`: exact multiplier samples when present,
    /// otherwise quadrature of the truncated kernel against plane waves.
    pub sup_fourier: S,
    pub fourier_from_multiplier: bool,
    pub cap: S,
    pub size_ok: bool,
    pub gradient_ok: bool,
    pub fourier_ok: bool,
}

impl<S: Scalar> KernelConditionReport<S> {
    pub fn all_ok(&self) -> bool {
        self.size_ok && self.gradient_ok && self.fourier_ok
    }
}

/// Sample the three kernel conditions against `cap`. `sample_radii` must span
/// at least four decades; the direction set is anchored at the kernel's
/// direction (when present) so suprema attained along it are hit exactly.
pub fn check_kernel_conditions<S: Scalar>(
    kernel: &KernelSpec<S>,
    sample_radii: &[S],
    samples_per_shell: usize,
    cap: S,
) -> Result<KernelConditionReport<S>> {
    if sample_radii.iter().any(|r| !(*r > S::zero())) || sample_radii.len() < 2 {
        return Err(CoreError::InvalidParameter(
            "sample radii must be positive and at least two".into(),
        ));
    }
    let r_min = sample_radii.iter().fold(S::infinity(), |a, &b| a.min(b));
    let r_max = sample_radii.iter().fold(S::zero(), |a, &b| a.max(b));
    let decades = (r_max / r_min).log10();
    if decades < real::<S>(4.0) - real(1e-9) {
        return Err(CoreError::InsufficientDecades {
            required: 4.0,
            got: decades.to_f64().unwrap_or(f64::NAN),
        });
    }
    if samples_per_shell < 4 {
        return Err(CoreError::InvalidParameter(
            "need at least 4 samples per shell".into(),
        ));
    }

    let directions = direction_samples(kernel, samples_per_shell)?;

    let n_pow = kernel.dim as i32;
    let mut sup_size = S::zero();
    let mut sup_gradient = S::zero();
    for &r in sample_radii {
        for d in &directions {
            let y = [r * d[0], r * d[1], r * d[2]];
            let k = kernel.kernel_at(y);
            if !k.is_finite() {
                return Err(CoreError::NonFiniteValue {
                    index: 0,
                    x: y[0].to_f64().unwrap_or(f64::NAN),
                    y: y[1].to_f64().unwrap_or(f64::NAN),
                    z: y[2].to_f64().unwrap_or(f64::NAN),
                });
            }
            sup_size = sup_size.max(r.powi(n_pow) * k.abs());

            let h = real::<S>(1e-5) * r;
            let mut grad_sq = S::zero();
            for axis in 0..kernel.dim {
                let mut hi = y;
                let mut lo = y;
                hi[axis] += h;
                lo[axis] -= h;
                let g = (kernel.kernel_at(hi) - kernel.kernel_at(lo)) / (h + h);
                grad_sq += g * g;
            }
            sup_gradient = sup_gradient.max(r.powi(n_pow + 1) * grad_sq.sqrt());
        }
    }

    let (sup_fourier, fourier_from_multiplier) = if kernel.has_multiplier() {
        let mut sup = S::zero();
        for &r in sample_radii {
            for d in &directions {
                let xi = [r * d[0], r * d[1], r * d[2]];
                if let Some(m) = kernel.multiplier_at(xi) {
                    sup = sup.max((m.re * m.re + m.im * m.im).sqrt());
                }
            }
        }
        (sup, true)
    } else {
        (estimate_fourier_sup(kernel, &directions)?, false)
    };

    Ok(KernelConditionReport {
        sup_size,
        sup_gradient,
        sup_fourier,
        fourier_from_multiplier,
        cap,
        size_ok: sup_size <= cap,
        gradient_ok: sup_gradient <= cap,
        fourier_ok: sup_fourier <= cap,
    })
}

/// Unit directions for condition sampling: the sphere rule, rotated (n = 2)
/// or extended (n = 3) so the kernel's own direction is in the set.
fn direction_samples<S: Scalar>(
    kernel: &KernelSpec<S>,
    samples_per_shell: usize,
) -> Result<Vec<Point<S>>> {
    match kernel.dim {
        2 => {
            let base = kernel
                .direction
                .map(|t| t[1].atan2(t[0]))
                .unwrap_or_else(S::zero);
            let n = samples_per_shell;
            Ok((0..n)
                .map(|j| {
                    let phi = base + S::TAU() * count::<S>(j) / count::<S>(n);
                    [phi.cos(), phi.sin(), S::zero()]
                })
                .collect())
        }
        3 => {
            let q = (((samples_per_shell as f64) / 2.0).sqrt().ceil() as usize).max(4);
            let (mut nodes, _) = angular_rule::<S>(3, q)?;
            if let Some(theta) = kernel.direction {
                nodes.push(theta);
            }
            Ok(nodes)
        }
        _ => Err(CoreError::UnsupportedDimension(kernel.dim)),
    }
}

/// `Khat(xi)` by polar quadrature of the truncated kernel against plane
/// waves, evaluated near unit frequency (`|xi| in {1/2, 1, 2}`) where the
/// oscillatory integral is resolvable. A rough sup, adequate for a cap check.
fn estimate_fourier_sup<S: Scalar>(kernel: &KernelSpec<S>, directions: &[Point<S>]) -> Result<S> {
    let dirs: Vec<Point<S>> = directions.iter().copied().take(16).collect();
    let ang_res = if kernel.dim == 2 { 128 } else { 24 };
    let grid = PolarGrid::<S>::build(kernel.dim, real(1e-3), real(200.0), 1600, ang_res)?;

    // Precompute K(y) * quadrature weight on every node.
    let mut nodes = Vec::with_capacity(grid.shell_count() * grid.angular_count());
    for i in 0..grid.shell_count() {
        for j in 0..grid.angular_count() {
            let y = grid.node_at(i, j);
            let w = grid.radial_weights()[i] * grid.angular_weights()[j];
            nodes.push((y, kernel.kernel_at(y) * w));
        }
    }

    let scales = [real::<S>(0.5), S::one(), real::<S>(2.0)];
    let sup = dirs
        .par_iter()
        .map(|d| {
            let mut local = S::zero();
            for &s in &scales {
                let xi = [s * d[0], s * d[1], s * d[2]];
                let mut re = S::zero();
                let mut im = S::zero();
                for (y, kw) in &nodes {
                    let phase = -dot(*y, xi);
                    re += *kw * phase.cos();
                    im += *kw * phase.sin();
                }
                local = local.max((re * re + im * im).sqrt());
            }
            local
        })
        .reduce(S::zero, |a, b| a.max(b));
    Ok(sup)
}

// ---------------------------------------------------------------------------
// Spectral path
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions<S> {
    /// Boundary-to-peak ratio above which support leakage is an error rather
    /// than a recorded diagnostic.
    pub leakage_error_threshold: S,
}

impl<S: Scalar> Default for SpectralOptions<S> {
    fn default() -> Self {
        Self {
            leakage_error_threshold: real(1e-3),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralDiagnostics<S> {
    /// max |f| on the box boundary over max |f|.
    pub boundary_leakage: S,
    /// max |Im out| over max |Re out| after the inverse transform; the
    /// imaginary part is discarded.
    pub imag_residue_ratio: S,
}

/// Apply the operator as a Fourier multiplier on the Cartesian grid: DFT,
/// pointwise `m` at the grid frequencies (`m(0) = 0`, Nyquist lines zeroed to
/// keep the multiplied spectrum Hermitian), inverse DFT.
pub fn apply_spectral<S: Scalar + FftNum>(
    kernel: &KernelSpec<S>,
    f: &CartesianField<S>,
    opts: &SpectralOptions<S>,
) -> Result<(CartesianField<S>, SpectralDiagnostics<S>)> {
    if !kernel.has_multiplier() {
        return Err(CoreError::MissingMultiplier);
    }
    let grid = f.grid();
    if kernel.dim != grid.dim() {
        return Err(CoreError::DimensionMismatch {
            left: kernel.dim,
            right: grid.dim(),
        });
    }

    let peak = f.max_abs();
    let mut boundary = S::zero();
    if peak > S::zero() {
        for (i, v) in f.values().iter().enumerate() {
            if grid.is_boundary(i) {
                boundary = boundary.max(v.abs());
            }
        }
        boundary /= peak;
    }
    if boundary > opts.leakage_error_threshold {
        return Err(CoreError::SupportLeakage {
            leakage: boundary.to_f64().unwrap_or(f64::NAN),
            threshold: opts.leakage_error_threshold.to_f64().unwrap_or(f64::NAN),
        });
    }

    let m = grid.points_per_axis();
    let dim = grid.dim();
    let mut data: Vec<Complex<S>> = f
        .values()
        .iter()
        .map(|&v| Complex::new(v, S::zero()))
        .collect();
    fft_nd(&mut data, m, dim, false);

    let freq_base = S::PI() / grid.half_extent();
    let half = m / 2;
    for (idx, value) in data.iter_mut().enumerate() {
        let axes = grid.axis_indices(idx);
        let mut xi = [S::zero(); 3];
        let mut nyquist = false;
        let mut zero_freq = true;
        for a in 0..dim {
            let j = axes[a];
            if j == half {
                nyquist = true;
            }
            let j_signed = if j < half {
                count::<S>(j)
            } else {
                count::<S>(j) - count::<S>(m)
            };
            if j != 0 {
                zero_freq = false;
            }
            xi[a] = freq_base * j_signed;
        }
        let mult = if nyquist || zero_freq {
            Complex::new(S::zero(), S::zero())
        } else {
            kernel.multiplier_at(xi).unwrap()
        };
        *value *= mult;
    }

    fft_nd(&mut data, m, dim, true);
    let scale = S::one() / count::<S>(data.len());
    let mut sup_re = S::zero();
    let mut sup_im = S::zero();
    let mut out = Vec::with_capacity(data.len());
    for v in &data {
        let re = v.re * scale;
        let im = v.im * scale;
        sup_re = sup_re.max(re.abs());
        sup_im = sup_im.max(im.abs());
        out.push(re);
    }
    let imag_ratio = if sup_re > S::zero() {
        sup_im / sup_re
    } else {
        S::zero()
    };

    let field = GridFunction::from_values(grid.clone(), out)?;
    Ok((
        field,
        SpectralDiagnostics {
            boundary_leakage: boundary,
            imag_residue_ratio: imag_ratio,
        },
    ))
}

// ---------------------------------------------------------------------------
// Direct truncated principal value
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PvTransform<S> {
    pub values: Vec<S>,
    /// True when the kernel's spherical mean vanished and the inner region
    /// used the subtracted integrand; false means the raw truncated integral
    /// was computed instead.
    pub cancellation_applied: bool,
    /// |mean of K over the unit sphere| relative to the mean of |K|.
    pub spherical_mean_ratio: S,
}

/// Truncated principal value by polar quadrature in `y`:
/// `int_{eps<|y|<1} (f(x-y) - f(x)) K(y) dy + int_{1<|y|<R} f(x-y) K(y) dy`.
///
/// `quad_resolution` is the radial point count of each region; the angular
/// rule gets the same resolution (n = 2) or half of it as Gauss–Legendre
/// order (n = 3). The inner subtraction needs only a Lipschitz `f` near `x`.
pub fn apply_pv_direct<S: Scalar, F>(
    kernel: &KernelSpec<S>,
    f: &F,
    eval_points: &[Point<S>],
    eps: S,
    r_max: S,
    quad_resolution: usize,
) -> Result<PvTransform<S>>
where
    F: Fn(Point<S>) -> S + Sync,
{
    if !(eps > S::zero()) || !(eps < S::one()) {
        return Err(CoreError::InvalidWindow(format!(
            "need 0 < eps < 1, got eps = {eps}"
        )));
    }
    if !(r_max > S::one()) || !r_max.is_finite() {
        return Err(CoreError::InvalidWindow(format!(
            "need R > 1, got R = {r_max}"
        )));
    }
    if quad_resolution < 8 {
        return Err(CoreError::InvalidResolution(format!(
            "need quad_resolution >= 8, got {quad_resolution}"
        )));
    }
    let ang_res = if kernel.dim == 2 {
        quad_resolution
    } else {
        (quad_resolution / 2).max(4)
    };
    let inner = PolarGrid::<S>::build(kernel.dim, eps, S::one(), quad_resolution, ang_res)?;
    let outer = PolarGrid::<S>::build(kernel.dim, S::one(), r_max, quad_resolution, ang_res)?;

    // Spherical mean of K at radius 1 decides whether the subtracted form
    // (principal-value cancellation) applies.
    let mut mean = S::zero();
    let mut mean_abs = S::zero();
    for (theta, w) in inner.angular_nodes().iter().zip(inner.angular_weights()) {
        let k = kernel.kernel_at(*theta);
        mean += *w * k;
        mean_abs += *w * k.abs();
    }
    let mean_ratio = if mean_abs > S::zero() {
        mean.abs() / mean_abs
    } else {
        S::zero()
    };
    let cancellation = mean_ratio <= real(1e-10);

    let weighted_kernel = |grid: &PolarGrid<S>| -> Vec<(Point<S>, S)> {
        let mut nodes = Vec::with_capacity(grid.shell_count() * grid.angular_count());
        for i in 0..grid.shell_count() {
            for j in 0..grid.angular_count() {
                let y = grid.node_at(i, j);
                let w = grid.radial_weights()[i] * grid.angular_weights()[j];
                nodes.push((y, kernel.kernel_at(y) * w));
            }
        }
        nodes
    };
    let inner_nodes = weighted_kernel(&inner);
    let outer_nodes = weighted_kernel(&outer);

    let values: Vec<S> = eval_points
        .par_iter()
        .map(|&x| {
            let fx = f(x);
            let mut acc = S::zero();
            for (y, kw) in &inner_nodes {
                let shifted = f(sub(x, *y));
                let integrand = if cancellation { shifted - fx } else { shifted };
                acc += integrand * *kw;
            }
            for (y, kw) in &outer_nodes {
                acc += f(sub(x, *y)) * *kw;
            }
            acc
        })
        .collect();

    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        let p = eval_points[bad];
        return Err(CoreError::NonFiniteValue {
            index: bad,
            x: p[0].to_f64().unwrap_or(f64::NAN),
            y: p[1].to_f64().unwrap_or(f64::NAN),
            z: p[2].to_f64().unwrap_or(f64::NAN),
        });
    }

    Ok(PvTransform {
        values,
        cancellation_applied: cancellation,
        spherical_mean_ratio: mean_ratio,
    })
}

/// Convolution `int K(x - z) phi(z) dz` over a ball `|z - center| <= radius`
/// containing the support of `phi`, for evaluation points far from that
/// support (no singularity is crossed, so a plain Gauss–Legendre-in-radius
/// times sphere-rule product applies). Used to evaluate transforms near the
/// origin of fields supported away from it.
pub fn apply_far_field<S: Scalar, F>(
    kernel: &KernelSpec<S>,
    phi: &F,
    center: Point<S>,
    radius: S,
    eval_points: &[Point<S>],
    resolution: usize,
) -> Result<Vec<S>>
where
    F: Fn(Point<S>) -> S + Sync,
{
    if !(radius > S::zero()) {
        return Err(CoreError::InvalidParameter(
            "patch radius must be positive".into(),
        ));
    }
    let (radial_nodes, radial_weights) = gauss_legendre::<S>(resolution.max(8));
    let ang_res = if kernel.dim == 2 {
        (2 * resolution).max(8)
    } else {
        resolution.max(4)
    };
    let (ang_nodes, ang_weights) = angular_rule::<S>(kernel.dim, ang_res)?;

    // Precompute phi(z) * u^{n-1} * weights on the patch.
    let half = radius * real(0.5);
    let mut patch = Vec::new();
    for (xu, wu) in radial_nodes.iter().zip(&radial_weights) {
        let u = half * (*xu + S::one());
        let u_jac = u.powi(kernel.dim as i32 - 1) * *wu * half;
        for (omega, wo) in ang_nodes.iter().zip(&ang_weights) {
            let z = [
                center[0] + u * omega[0],
                center[1] + u * omega[1],
                center[2] + u * omega[2],
            ];
            let pv = phi(z);
            if pv != S::zero() {
                patch.push((z, pv * u_jac * *wo));
            }
        }
    }

    Ok(eval_points
        .par_iter()
        .map(|&x| {
            let mut acc = S::zero();
            for (z, pw) in &patch {
                acc += kernel.kernel_at(sub(x, *z)) * *pw;
            }
            acc
        })
        .collect())
}
