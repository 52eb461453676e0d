//! Mixed-radix complex FFT and its n-dimensional tensor form.
//!
//! The one-dimensional kernel is a recursive decimation-in-time Cooley-Tukey
//! transform with dedicated radix-2 and radix-4 butterflies and a generic
//! butterfly for any remaining prime factor. Transforms are unnormalized:
//! `forward` uses `e^{-2 pi i jk/n}`, `inverse` uses `e^{+2 pi i jk/n}`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// A planned transform of a fixed length.
#[derive(Clone, Debug)]
pub struct Fft1d {
    len: usize,
    factors: Vec<(usize, usize)>,
    twiddles: Vec<Complex64>,
    inv_twiddles: Vec<Complex64>,
}

impl Fft1d {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let twiddles: Vec<Complex64> =
            (0..len).map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64)).collect();
        let inv_twiddles = twiddles.iter().map(|w| w.conj()).collect();
        Self { len, factors: factorize(len), twiddles, inv_twiddles }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform. `scratch` must hold at least `len` values.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.process(buf, scratch, false);
    }

    /// In-place inverse transform (no `1/n` factor).
    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.process(buf, scratch, true);
    }

    fn process(&self, buf: &mut [Complex64], scratch: &mut [Complex64], inverse: bool) {
        let n = self.len;
        debug_assert_eq!(buf.len(), n);
        if n == 1 {
            return;
        }
        let scratch = &mut scratch[..n];
        scratch.copy_from_slice(buf);
        let tw = if inverse { &self.inv_twiddles } else { &self.twiddles };
        work(buf, scratch, 1, &self.factors, tw, inverse);
    }
}

fn factorize(mut n: usize) -> Vec<(usize, usize)> {
    let total = n;
    let mut out = Vec::new();
    let mut p = 4;
    let mut done = 1;
    while n > 1 {
        while !n.is_multiple_of(p) {
            p = match p {
                4 => 2,
                2 => 3,
                _ => p + 2,
            };
            if p * p > n {
                p = n;
            }
        }
        n /= p;
        done *= p;
        out.push((p, total / done));
    }
    out
}

fn work(
    out: &mut [Complex64],
    inp: &[Complex64],
    fstride: usize,
    factors: &[(usize, usize)],
    tw: &[Complex64],
    inverse: bool,
) {
    let (p, m) = factors[0];
    if m == 1 {
        for (q, o) in out.iter_mut().take(p).enumerate() {
            *o = inp[q * fstride];
        }
    } else {
        for q in 0..p {
            work(&mut out[q * m..(q + 1) * m], &inp[q * fstride..], fstride * p, &factors[1..], tw, inverse);
        }
    }
    match p {
        2 => butterfly2(out, fstride, m, tw),
        4 => butterfly4(out, fstride, m, tw, inverse),
        _ => butterfly_generic(out, fstride, m, p, tw),
    }
}

fn butterfly2(out: &mut [Complex64], fstride: usize, m: usize, tw: &[Complex64]) {
    let (lo, hi) = out.split_at_mut(m);
    for k in 0..m {
        let t = hi[k] * tw[k * fstride];
        hi[k] = lo[k] - t;
        lo[k] += t;
    }
}

fn butterfly4(out: &mut [Complex64], fstride: usize, m: usize, tw: &[Complex64], inverse: bool) {
    for k in 0..m {
        let s0 = out[k + m] * tw[k * fstride];
        let s1 = out[k + 2 * m] * tw[2 * k * fstride];
        let s2 = out[k + 3 * m] * tw[3 * k * fstride];
        let s5 = out[k] - s1;
        let f0 = out[k] + s1;
        let s3 = s0 + s2;
        let s4 = s0 - s2;
        out[k + 2 * m] = f0 - s3;
        out[k] = f0 + s3;
        // multiply s4 by -i (forward) or +i (inverse)
        let rot = if inverse { Complex64::new(-s4.im, s4.re) } else { Complex64::new(s4.im, -s4.re) };
        out[k + m] = s5 + rot;
        out[k + 3 * m] = s5 - rot;
    }
}

fn butterfly_generic(out: &mut [Complex64], fstride: usize, m: usize, p: usize, tw: &[Complex64]) {
    let n = tw.len();
    let mut scratch = [Complex64::new(0.0, 0.0); 32];
    let mut heap;
    let scratch: &mut [Complex64] = if p <= 32 {
        &mut scratch[..p]
    } else {
        heap = vec![Complex64::new(0.0, 0.0); p];
        &mut heap[..]
    };
    for u in 0..m {
        for q in 0..p {
            scratch[q] = out[u + q * m];
        }
        for q1 in 0..p {
            let k = u + q1 * m;
            let step = (fstride * k) % n;
            let mut idx = 0usize;
            let mut acc = scratch[0];
            for s in scratch.iter().skip(1) {
                idx += step;
                if idx >= n {
                    idx -= n;
                }
                acc += *s * tw[idx];
            }
            out[k] = acc;
        }
    }
}

/// Row-major n-dimensional transform built from per-axis plans.
#[derive(Clone, Debug)]
pub struct NdFft {
    shape: Vec<usize>,
    strides: Vec<usize>,
    plans: Vec<Fft1d>,
    total: usize,
}

impl NdFft {
    pub fn new(shape: &[usize]) -> Self {
        let mut strides = vec![1usize; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        Self {
            shape: shape.to_vec(),
            strides,
            plans: shape.iter().map(|&n| Fft1d::new(n)).collect(),
            total: shape.iter().product(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Scratch length needed by [`NdFft::forward`] and [`NdFft::inverse`].
    pub fn scratch_len(&self) -> usize {
        2 * self.shape.iter().copied().max().unwrap_or(1)
    }

    pub fn forward(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.transform(data, scratch, false);
    }

    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.transform(data, scratch, true);
    }

    fn transform(&self, data: &mut [Complex64], scratch: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.total, "tensor length does not match FFT shape");
        for axis in 0..self.shape.len() {
            let n = self.shape[axis];
            if n == 1 {
                continue;
            }
            let stride = self.strides[axis];
            let plan = &self.plans[axis];
            let (line, work) = scratch.split_at_mut(n);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    plan.process(chunk, work, inverse);
                }
                continue;
            }
            let outer = self.total / (n * stride);
            for o in 0..outer {
                let block = o * n * stride;
                for i in 0..stride {
                    let base = block + i;
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = data[base + j * stride];
                    }
                    plan.process(line, work, inverse);
                    for (j, l) in line.iter().enumerate() {
                        data[base + j * stride] = *l;
                    }
                }
            }
        }
    }
}

/// Reference `O(n^2)` DFT, used to check the fast kernels.
pub fn naive_dft(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            input
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let ang = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    *x * Complex64::new(ang.cos(), ang.sin())
                })
                .sum()
        })
        .collect()
}
