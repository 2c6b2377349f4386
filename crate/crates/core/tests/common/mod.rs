#![allow(dead_code)]

use std::f64::consts::PI;

use epsflow_core::GridSpec;
use nalgebra::DMatrix;

/// Dense radial part of `L` on rows `0..Nr-1`, with the wall value pinned to 0.
///
/// Row 0 is `4 f_rr` with the even reflection `f(-h) = f(h)`; other rows are
/// `f_rr + (3/r) f_r` by centred differences.
pub fn radial_operator(grid: &GridSpec) -> DMatrix<f64> {
    let m = grid.nr() - 1;
    let h = grid.hr();
    let mut a = DMatrix::zeros(m, m);
    a[(0, 0)] = -8.0 / (h * h);
    if m > 1 {
        a[(0, 1)] = 8.0 / (h * h);
    }
    for i in 1..m {
        let r = grid.r(i);
        let lo = 1.0 / (h * h) - 3.0 / (r * 2.0 * h);
        let hi = 1.0 / (h * h) + 3.0 / (r * 2.0 * h);
        a[(i, i - 1)] = lo;
        a[(i, i)] = -2.0 / (h * h);
        if i + 1 < m {
            a[(i, i + 1)] = hi;
        }
    }
    a
}

/// Dense `L` on all non-wall nodes, unknown `(i, j)` at `i * nz + j`.
pub fn full_operator(grid: &GridSpec) -> DMatrix<f64> {
    let m = grid.nr() - 1;
    let nz = grid.nz();
    let hz = grid.hz();
    let ar = radial_operator(grid);
    let mut a = DMatrix::zeros(m * nz, m * nz);
    for i in 0..m {
        for j in 0..nz {
            let row = i * nz + j;
            for k in 0..m {
                if ar[(i, k)] != 0.0 {
                    a[(row, k * nz + j)] += ar[(i, k)];
                }
            }
            let jp = (j + 1) % nz;
            let jm = (j + nz - 1) % nz;
            a[(row, i * nz + jp)] += 1.0 / (hz * hz);
            a[(row, i * nz + jm)] += 1.0 / (hz * hz);
            a[(row, row)] -= 2.0 / (hz * hz);
        }
    }
    a
}

/// Discrete eigenvalue of the periodic second difference for `cos(2πmz/Lz)`.
pub fn z_eigenvalue(grid: &GridSpec, m: usize) -> f64 {
    let hz = grid.hz();
    let k = 2.0 * PI * m as f64 / grid.lz();
    -(2.0 / (hz * hz)) * (1.0 - (k * hz).cos())
}

/// `g(r) = (1 - (r/R)²)²` and its first two derivatives.
pub fn wall_profile(r: f64, big_r: f64) -> (f64, f64, f64) {
    let s = 1.0 - (r / big_r).powi(2);
    let g = s * s;
    let g1 = -4.0 * r * s / (big_r * big_r);
    let g2 = -4.0 * s / (big_r * big_r) + 8.0 * r * r / big_r.powi(4);
    (g, g1, g2)
}

/// Manufactured `φ = g(r) cos(kz)` with `k = 2π/Lz`, and `L φ` by hand.
pub fn manufactured(big_r: f64, lz: f64) -> (impl Fn(f64, f64) -> f64, impl Fn(f64, f64) -> f64) {
    let k = 2.0 * PI / lz;
    let phi = move |r: f64, z: f64| wall_profile(r, big_r).0 * (k * z).cos();
    let l_phi = move |r: f64, z: f64| {
        let (g, _, _) = wall_profile(r, big_r);
        let s = 1.0 - (r / big_r).powi(2);
        // g'' + (3/r) g' = -16 s / R² + 8 r² / R⁴
        let radial = -16.0 * s / (big_r * big_r) + 8.0 * r * r / big_r.powi(4);
        (radial - k * k * g) * (k * z).cos()
    };
    (phi, l_phi)
}

pub fn max_abs_diff(a: impl Iterator<Item = (f64, f64)>) -> f64 {
    a.fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
