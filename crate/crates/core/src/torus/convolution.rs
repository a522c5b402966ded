use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::lattice::Lattice;
use crate::dirac::C64;

/// Lattice convolution `c(k) = Σ_{l∈Γ} Ŵ(k−l) f(l)` by zero-padded FFT.
///
/// Differences `k − l` range over `[−2n, 2n]³` with `n = nmax`, so a cyclic
/// grid of side `M ≥ 4n + 1` stores every kernel value without aliasing.
/// Real channels are packed in pairs into one complex field.
pub(crate) struct Convolver {
    side: usize,
    kernel_hat: Vec<C64>,
    offsets: Vec<usize>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver").field("side", &self.side).finish()
    }
}

impl Convolver {
    /// `kernel(|n|²)` gives `Ŵ(n)`.
    pub(crate) fn new(lattice: &Lattice, kernel: impl Fn(i32) -> f64) -> Self {
        let n = lattice.nmax();
        let side = fft_size((4 * n + 1) as usize);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(side);
        let ifft = planner.plan_fft_inverse(side);
        let wrap = |c: i32| c.rem_euclid(side as i32) as usize;
        let mut kernel_hat = vec![C64::new(0.0, 0.0); side.pow(3)];
        for x in -2 * n..=2 * n {
            for y in -2 * n..=2 * n {
                for z in -2 * n..=2 * n {
                    let idx = (wrap(x) * side + wrap(y)) * side + wrap(z);
                    kernel_hat[idx] = C64::new(kernel(x * x + y * y + z * z), 0.0);
                }
            }
        }
        let offsets = lattice
            .points()
            .iter()
            .map(|p| (wrap(p[0]) * side + wrap(p[1])) * side + wrap(p[2]))
            .collect();
        let mut conv = Self { side, kernel_hat, offsets, fft, ifft };
        let mut k = std::mem::take(&mut conv.kernel_hat);
        conv.transform(&mut k, false);
        conv.kernel_hat = k;
        conv
    }

    /// Convolves each of the `channels` real fields given as `values[k][c]`.
    pub(crate) fn apply<const N: usize>(&self, values: &[[f64; N]]) -> Vec<[f64; N]> {
        let mut out = vec![[0.0; N]; values.len()];
        let mut field = vec![C64::new(0.0, 0.0); self.side.pow(3)];
        let norm = (self.side as f64).powi(3).recip();
        for pair in (0..N).step_by(2) {
            field.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for (v, &o) in values.iter().zip(&self.offsets) {
                let im = if pair + 1 < N { v[pair + 1] } else { 0.0 };
                field[o] = C64::new(v[pair], im);
            }
            self.transform(&mut field, false);
            for (f, k) in field.iter_mut().zip(&self.kernel_hat) {
                *f *= k * norm;
            }
            self.transform(&mut field, true);
            for (o, &idx) in out.iter_mut().zip(&self.offsets) {
                o[pair] = field[idx].re;
                if pair + 1 < N {
                    o[pair + 1] = field[idx].im;
                }
            }
        }
        out
    }

    /// Unnormalized 3D transform by 1D passes along each axis.
    fn transform(&self, data: &mut [C64], inverse: bool) {
        let plan = if inverse { &self.ifft } else { &self.fft };
        let m = self.side;
        plan.process(data);
        let mut line = vec![C64::new(0.0, 0.0); m];
        for stride in [m, m * m] {
            for base in 0..m * m {
                let start = (base / stride) * stride * m + base % stride;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                plan.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

/// Smallest `2^a 3^b 5^c ≥ n`.
fn fft_size(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::lattice::{diff, norm_sq};

    #[test]
    fn matches_direct_sum() {
        let lattice = Lattice::new(5.0, 4.0).unwrap();
        let kernel = |n2: i32| if n2 == 0 { 0.7 } else { 1.0 / n2 as f64 };
        let conv = Convolver::new(&lattice, kernel);
        let values: Vec<[f64; 3]> =
            (0..lattice.len()).map(|k| [(k as f64).sin(), (0.3 * k as f64).cos(), 1.0 / (k + 1) as f64]).collect();
        let fast = conv.apply(&values);
        let p = lattice.points();
        for k in 0..lattice.len() {
            for c in 0..3 {
                let direct: f64 = (0..lattice.len()).map(|l| kernel(norm_sq(diff(p[k], p[l]))) * values[l][c]).sum();
                assert!((fast[k][c] - direct).abs() < 1e-12 * (1.0 + direct.abs()), "{k} {c}");
            }
        }
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(fft_size(13), 15);
        assert_eq!(fft_size(17), 18);
        assert_eq!(fft_size(7), 8);
    }
}
