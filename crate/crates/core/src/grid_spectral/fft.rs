use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Separable N-dimensional FFT on a cube of `n^dim` row-major samples.
///
/// The forward transform is unnormalized; the inverse divides by `n^dim`.
pub struct FftNd<T: Real> {
    dim: usize,
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> FftNd<T> {
    pub fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dim,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, self.forward.as_ref());
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, self.inverse.as_ref());
        let scale = T::one() / T::from_usize_lossy(self.len());
        for z in data.iter_mut() {
            *z = *z * scale;
        }
    }

    fn transform(&self, data: &mut [Complex<T>], fft: &dyn Fft<T>) {
        assert_eq!(data.len(), self.len(), "FFT buffer length");
        let n = self.n;
        let zero = Complex::new(T::zero(), T::zero());
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        let mut lines = Vec::new();
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            // gather the `stride` interleaved lines of each block contiguously
            let block = n * stride;
            lines.resize(block, zero);
            for chunk in data.chunks_mut(block) {
                for j in 0..n {
                    for inner in 0..stride {
                        lines[inner * n + j] = chunk[j * stride + inner];
                    }
                }
                fft.process_with_scratch(&mut lines, &mut scratch);
                for j in 0..n {
                    for inner in 0..stride {
                        chunk[j * stride + inner] = lines[inner * n + j];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft2(data: &[Complex<f64>], n: usize) -> Vec<Complex<f64>> {
        let mut out = vec![Complex::new(0.0, 0.0); n * n];
        for k1 in 0..n {
            for k2 in 0..n {
                let mut acc = Complex::new(0.0, 0.0);
                for j1 in 0..n {
                    for j2 in 0..n {
                        let ph = -2.0 * std::f64::consts::PI * ((k1 * j1 + k2 * j2) as f64) / n as f64;
                        acc += data[j1 * n + j2] * Complex::from_polar(1.0, ph);
                    }
                }
                out[k1 * n + k2] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_2d() {
        let n = 8;
        let data: Vec<Complex<f64>> = (0..n * n)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        FftNd::new(2, n).forward(&mut fast);
        let slow = naive_dft2(&data, n);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_3d() {
        let n = 8;
        let plan = FftNd::<f64>::new(3, n);
        let data: Vec<Complex<f64>> = (0..plan.len())
            .map(|i| Complex::new((i as f64).sqrt(), -(i as f64 * 0.3).sin()))
            .collect();
        let mut buf = data.clone();
        plan.forward(&mut buf);
        plan.inverse(&mut buf);
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a - b).norm() <= 1e-13 * scale);
        }
    }
}
