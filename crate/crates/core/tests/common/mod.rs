#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    // split first so narrow peaks are never missed by the initial coarse estimate
    let pieces = 64;
    (0..pieces)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / pieces as f64;
            let hi = a + (b - a) * (i + 1) as f64 / pieces as f64;
            let (fa, fb) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(f, lo, fa, hi, fb);
            recurse(f, lo, fa, hi, fb, m, fm, whole, tol / pieces as f64, 40)
        })
        .sum()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn random_points(seed: u64, n: usize, x: (f64, f64), t: (f64, f64)) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (rng.random_range(x.0..x.1), rng.random_range(t.0..t.1)))
        .collect()
}

/// Free propagation of samples on a periodic grid of spacing `dx` by exact
/// kinetic phases in Fourier space.
pub fn free_propagate(psi: &[Complex64], dx: f64, t: f64, hbar: f64, mass: f64) -> Vec<Complex64> {
    let n = psi.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf = psi.to_vec();
    forward.process(&mut buf);
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    for (j, c) in buf.iter_mut().enumerate() {
        let kj = if j <= n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        } * dk;
        *c *= Complex64::from_polar(1.0 / n as f64, -hbar * kj * kj * t / (2.0 * mass));
    }
    inverse.process(&mut buf);
    buf
}

/// Relative comparison with an absolute floor `scale` for values near zero.
pub fn close(a: f64, b: f64, rtol: f64, scale: f64) -> bool {
    (a - b).abs() <= rtol * (b.abs() + scale)
}
