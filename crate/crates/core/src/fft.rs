//! Minimal n-dimensional complex FFT over the Cartesian grid layout
//! (x fastest), assembled from rustfft's 1d plans with gather/scatter along
//! each axis. Unnormalized in both directions; callers scale by `1/M^n`
//! after the inverse.

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{FftNum, FftPlanner};

#[allow(clippy::needless_range_loop)]
pub(crate) fn fft_nd<S: FftNum>(
    data: &mut [Complex<S>],
    points_per_axis: usize,
    dim: usize,
    inverse: bool,
) {
    let m = points_per_axis;
    debug_assert_eq!(data.len(), m.pow(dim as u32));
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    let mut line = vec![Complex::<S>::zero(); m];

    for axis in 0..dim {
        let stride = m.pow(axis as u32);
        let block = m * stride;
        let blocks = data.len() / block;
        for b in 0..blocks {
            for offset in 0..stride {
                let base = b * block + offset;
                for k in 0..m {
                    line[k] = data[base + k * stride];
                }
                plan.process(&mut line);
                for k in 0..m {
                    data[base + k * stride] = line[k];
                }
            }
        }
    }
}
