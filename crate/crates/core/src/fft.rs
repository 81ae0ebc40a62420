//! Minimal iterative radix-2 FFT, enough for grid-density convolution.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

pub fn next_pow2(n: usize) -> usize {
    let mut p = 1;
    while p < n {
        p <<= 1;
    }
    p
}

/// In-place radix-2 Cooley-Tukey transform; `inverse` applies the 1/n factor.
pub fn fft(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two());
    // bit reversal
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * core::f64::consts::PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        for chunk in data.chunks_mut(len) {
            let mut w = Complex64::new(1.0, 0.0);
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let u = *a;
                let v = *b * w;
                *a = u + v;
                *b = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Linear convolution of two real sequences (zero-padded, length a+b-1).
pub fn convolve_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let n = next_pow2(out_len);
    let mut fa: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    let mut fb: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    for (dst, &src) in fa.iter_mut().zip(a) {
        dst.re = src;
    }
    for (dst, &src) in fb.iter_mut().zip(b) {
        dst.re = src;
    }
    fft(&mut fa, false);
    fft(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft(&mut fa, true);
    fa.truncate(out_len);
    fa.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolve_matches_direct() {
        let a = [1.0, 2.0, 3.0];
        let b = [0.5, -1.0, 0.25, 4.0];
        let got = convolve_real(&a, &b);
        let mut want = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                want[i + j] += x * y;
            }
        }
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip() {
        let mut data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let orig = data.clone();
        fft(&mut data, false);
        fft(&mut data, true);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
