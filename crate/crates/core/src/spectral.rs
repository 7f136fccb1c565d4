//! 2D FFTs and exact aperiodic grid convolutions.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Square `p x p` complex FFT done as row passes around a transpose.
pub struct Fft2 {
    p: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(p: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { p, forward: planner.plan_fft_forward(p), inverse: planner.plan_fft_inverse(p) }
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalised inverse; divide by `p^2` afterwards.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.p * self.p);
        self.rows(data, plan);
        transpose(data, self.p);
        self.rows(data, plan);
        transpose(data, self.p);
    }

    fn rows(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let p = self.p;
        data.par_chunks_mut(p * 16).for_each(|block| {
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            for row in block.chunks_mut(p) {
                plan.process_with_scratch(row, &mut scratch);
            }
        });
    }
}

fn transpose(data: &mut [Complex64], p: usize) {
    for j in 0..p {
        for i in j + 1..p {
            data.swap(j * p + i, i * p + j);
        }
    }
}

/// Signed frequency index of FFT bin `k` for transform length `p`.
pub fn freq_index(k: usize, p: usize) -> i64 {
    if k <= p / 2 {
        k as i64
    } else {
        k as i64 - p as i64
    }
}

/// Exact discrete convolution `out[p] = Σ_q in[q] W[p − q]` between centred
/// grids of equal spacing, done on a zero-padded FFT so nothing wraps.
///
/// Offsets are measured in cells between output and input sample positions,
/// both grids being centred on the origin. Several kernels can share one
/// convolver; `kernel(dx, dy, out)` fills one weight per kernel.
pub struct Convolver {
    fft: Fft2,
    n_in: usize,
    n_out: usize,
    spectra: Vec<Vec<Complex64>>,
}

impl Convolver {
    pub fn new(
        n_in: usize,
        n_out: usize,
        kernels: usize,
        kernel: impl Fn(i64, i64, &mut [f64]) + Sync,
    ) -> Self {
        let p = (n_in + n_out).next_power_of_two();
        let fft = Fft2::new(p);
        let shift = (n_in as i64 - n_out as i64) / 2;
        let rows: Vec<Vec<Vec<f64>>> = (0..p)
            .into_par_iter()
            .map(|r| {
                let mut row = vec![vec![0.0; p]; kernels];
                let ey = freq_index(r, p);
                let mut w = vec![0.0; kernels];
                for c in 0..p {
                    let ex = freq_index(c, p);
                    if ex <= -(n_in as i64) || ex >= n_out as i64 || ey <= -(n_in as i64) || ey >= n_out as i64 {
                        continue;
                    }
                    kernel(ex + shift, ey + shift, &mut w);
                    for k in 0..kernels {
                        row[k][c] = w[k];
                    }
                }
                row
            })
            .collect();
        let mut spectra = Vec::with_capacity(kernels);
        for k in 0..kernels {
            let mut buf: Vec<Complex64> = Vec::with_capacity(p * p);
            for row in &rows {
                buf.extend(row[k].iter().map(|&v| Complex64::new(v, 0.0)));
            }
            fft.forward(&mut buf);
            spectra.push(buf);
        }
        Convolver { fft, n_in, n_out, spectra }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    fn spectrum_of(&self, input: &[f64]) -> Vec<Complex64> {
        assert_eq!(input.len(), self.n_in * self.n_in);
        let p = self.fft.size();
        let mut buf = vec![Complex64::default(); p * p];
        for j in 0..self.n_in {
            for i in 0..self.n_in {
                buf[j * p + i] = Complex64::new(input[j * self.n_in + i], 0.0);
            }
        }
        self.fft.forward(&mut buf);
        buf
    }

    /// `Σ_t coef_t · (input_t ⋆ W_{kernel_t})`.
    pub fn apply_sum(&self, terms: &[(&[f64], usize, f64)]) -> Vec<f64> {
        let p = self.fft.size();
        let mut acc = vec![Complex64::default(); p * p];
        for (input, k, coef) in terms {
            let spec = self.spectrum_of(input);
            let w = &self.spectra[*k];
            acc.par_iter_mut().zip(spec.par_iter().zip(w.par_iter())).for_each(|(a, (s, w))| {
                *a += s * w * *coef;
            });
        }
        self.fft.inverse(&mut acc);
        let scale = 1.0 / (p * p) as f64;
        let mut out = vec![0.0; self.n_out * self.n_out];
        for j in 0..self.n_out {
            for i in 0..self.n_out {
                out[j * self.n_out + i] = acc[j * p + i].re * scale;
            }
        }
        out
    }

    pub fn apply(&self, input: &[f64], kernel: usize) -> Vec<f64> {
        self.apply_sum(&[(input, kernel, 1.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_roundtrip() {
        let p = 16;
        let fft = Fft2::new(p);
        let orig: Vec<Complex64> =
            (0..p * p).map(|k| Complex64::new((k as f64 * 0.37).sin(), 0.0)).collect();
        let mut d = orig.clone();
        fft.forward(&mut d);
        fft.inverse(&mut d);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / (p * p) as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_matches_brute_force() {
        let (n_in, n_out) = (8usize, 12usize);
        let kern = |dx: i64, dy: i64| 1.0 / (1.0 + (dx * dx + 2 * dy * dy) as f64) + dx as f64 * 0.01;
        let conv = Convolver::new(n_in, n_out, 1, |dx, dy, w| w[0] = kern(dx, dy));
        let input: Vec<f64> = (0..n_in * n_in).map(|k| ((k * 7 % 11) as f64) - 5.0).collect();
        let out = conv.apply(&input, 0);
        let ci = n_in as i64 / 2;
        let co = n_out as i64 / 2;
        for pj in 0..n_out as i64 {
            for pi in 0..n_out as i64 {
                let mut s = 0.0;
                for qj in 0..n_in as i64 {
                    for qi in 0..n_in as i64 {
                        let dx = (pi - co) - (qi - ci);
                        let dy = (pj - co) - (qj - ci);
                        s += input[(qj * n_in as i64 + qi) as usize] * kern(dx, dy);
                    }
                }
                let got = out[(pj * n_out as i64 + pi) as usize];
                assert!((got - s).abs() < 1e-10, "{got} {s}");
            }
        }
    }
}
