use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Periodic collocation grid with `m` points per axis and row-major layout.
pub(crate) struct Grid {
    pub dim: usize,
    pub m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Smallest `2^a 3^b 5^c` that is at least `n`.
pub(crate) fn smooth_size(n: usize) -> usize {
    let mut k = n.max(1);
    loop {
        let mut r = k;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return k;
        }
        k += 1;
    }
}

impl Grid {
    pub fn new(dim: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Grid {
            dim,
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    /// Flat position of the wave vector `j` (taken modulo `m`).
    pub fn index(&self, j: &[i32]) -> usize {
        let m = self.m as i64;
        j.iter().fold(0usize, |acc, &x| acc * self.m + (x as i64).rem_euclid(m) as usize)
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        let n = buf.len();
        // the last axis is contiguous
        plan.process(buf);
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for axis in 0..self.dim.saturating_sub(1) {
            let stride = m.pow((self.dim - 1 - axis) as u32);
            let block = stride * m;
            for start in (0..n).step_by(block) {
                for off in 0..stride {
                    for (t, v) in line.iter_mut().enumerate() {
                        *v = buf[start + off + t * stride];
                    }
                    plan.process(&mut line);
                    for (t, v) in line.iter().enumerate() {
                        buf[start + off + t * stride] = *v;
                    }
                }
            }
        }
    }

    /// Grid values `sum_j a_j e^{i j x}` from coefficients placed at [`Grid::index`].
    pub fn to_grid(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inv);
    }

    /// Mean-normalized coefficients `avg(g e^{-i j x})`.
    pub fn to_coeffs(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.fwd);
        let s = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(129), 135);
        assert_eq!(smooth_size(16), 16);
        assert_eq!(smooth_size(7), 8);
    }

    #[test]
    fn round_trip_2d() {
        let g = Grid::new(2, 6);
        let mut buf = vec![Complex64::new(0.0, 0.0); g.len()];
        buf[g.index(&[1, -2])] = Complex64::new(1.0, 0.5);
        let orig = buf.clone();
        g.to_grid(&mut buf);
        // value at x = (2pi/6)(1, 1)
        let x = 2.0 * std::f64::consts::PI / 6.0;
        let want = Complex64::new(1.0, 0.5) * Complex64::from_polar(1.0, x * (1.0 - 2.0));
        assert!((buf[g.index(&[1, 1])] - want).norm() < 1e-12);
        g.to_coeffs(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
