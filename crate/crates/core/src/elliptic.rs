//! Inversion of `L = ∂r² + (3/r)∂r + ∂z²`, the stream-function equation
//! `-L φ1 = ω1`.
//!
//! `φ1` is even across the axis, periodic in `z` and vanishes on the wall
//! `r = R`. The solve transforms each radial row in `z`, inverts one
//! tridiagonal system per Fourier mode and transforms back. The tridiagonal
//! rows are exactly the stencil of [`apply_l`], so `apply_l(solve_phi(ω)) = -ω`
//! on every row but the wall up to rounding.

use std::sync::Arc;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{EllipticError, FieldError};
use crate::exec::Exec;
use crate::fields::{GridSpec, Parity, ScalarField};
use crate::stencil;

/// Thomas factorization of one radial system.
#[derive(Debug, Clone)]
struct ModeFactor {
    /// modified super-diagonal `c'_i`
    upper: Vec<f64>,
    /// `1 / (b_i - a_i c'_{i-1})`
    inv_pivot: Vec<f64>,
}

/// Per-grid factorizations and FFT plans, reusable across solves.
#[derive(Clone)]
pub struct EllipticWorkspace {
    grid: GridSpec,
    lower: Vec<f64>,
    factors: Vec<ModeFactor>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    exec: Exec,
}

impl std::fmt::Debug for EllipticWorkspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticWorkspace")
            .field("grid", &self.grid)
            .field("modes", &self.factors.len())
            .field("exec", &self.exec)
            .finish()
    }
}

/// Eigenvalue of the periodic second difference for mode `k`.
pub fn z_symbol(grid: &GridSpec, k: usize) -> f64 {
    let hz = grid.hz();
    let s = (std::f64::consts::PI * k as f64 / grid.nz() as f64).sin();
    -4.0 * s * s / (hz * hz)
}

impl EllipticWorkspace {
    pub fn new(grid: GridSpec) -> Result<Self, EllipticError> {
        Self::with_exec(grid, Exec::Sequential)
    }

    pub fn with_exec(grid: GridSpec, exec: Exec) -> Result<Self, EllipticError> {
        let m = grid.nr() - 1; // unknowns: rows 0..Nr-2
        let inv_hr2 = 1.0 / (grid.hr() * grid.hr());

        // rows of -L; a: sub, b: diag (without the z symbol), c: super
        let mut lower = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut diag = vec![0.0; m];
        diag[0] = 8.0 * inv_hr2;
        if m > 1 {
            upper[0] = -8.0 * inv_hr2;
        }
        for i in 1..m {
            let k = 1.5 / i as f64;
            lower[i] = -(1.0 - k) * inv_hr2;
            diag[i] = 2.0 * inv_hr2;
            if i + 1 < m {
                upper[i] = -(1.0 + k) * inv_hr2;
            }
        }

        let mut factors = Vec::with_capacity(grid.nz());
        for mode in 0..grid.nz() {
            let shift = -z_symbol(&grid, mode);
            let mut cp = vec![0.0; m];
            let mut inv = vec![0.0; m];
            for i in 0..m {
                let b = diag[i] + shift;
                let pivot = if i == 0 { b } else { b - lower[i] * cp[i - 1] };
                if !pivot.is_finite() || pivot.abs() <= 1e-14 * b.abs().max(inv_hr2) {
                    return Err(EllipticError::Singular { mode, row: i });
                }
                inv[i] = 1.0 / pivot;
                cp[i] = upper[i] * inv[i];
            }
            factors.push(ModeFactor {
                upper: cp,
                inv_pivot: inv,
            });
        }

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.nz());
        let inverse = planner.plan_fft_inverse(grid.nz());
        Ok(Self {
            grid,
            lower,
            factors,
            forward,
            inverse,
            exec,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn set_exec(&mut self, exec: Exec) {
        self.exec = exec;
    }

    fn solve_mode(&self, mode: usize, rhs: &mut [Complex64]) {
        let f = &self.factors[mode];
        let m = rhs.len();
        rhs[0] *= f.inv_pivot[0];
        for i in 1..m {
            rhs[i] = (rhs[i] - rhs[i - 1] * self.lower[i]) * f.inv_pivot[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] = rhs[i] - rhs[i + 1] * f.upper[i];
        }
    }

    /// Solves `-L φ1 = ω1` with `φ1 = 0` on the wall.
    pub fn solve(&self, omega1: &ScalarField) -> Result<ScalarField, EllipticError> {
        if omega1.grid() != &self.grid {
            return Err(FieldError::GridMismatch.into());
        }
        omega1.require_even()?;
        omega1.check_finite()?;
        Ok(self.solve_unchecked(omega1))
    }

    pub(crate) fn solve_unchecked(&self, omega1: &ScalarField) -> ScalarField {
        let (nr, nz) = self.grid.shape();
        let m = nr - 1;

        // spectrum[i][k]: row-wise forward transforms
        let mut spec = Array2::<Complex64>::zeros((m, nz));
        let src = omega1.values();
        let fwd = |(i, mut row): (usize, ndarray::ArrayViewMut1<'_, Complex64>)| {
            for j in 0..nz {
                row[j] = Complex64::new(src[[i, j]], 0.0);
            }
            self.forward
                .process(row.as_slice_mut().expect("contiguous row"));
        };
        match self.exec {
            Exec::Sequential => spec.axis_iter_mut(Axis(0)).enumerate().for_each(fwd),
            Exec::Parallel => spec
                .axis_iter_mut(Axis(0))
                .into_par_iter()
                .enumerate()
                .for_each(fwd),
        }

        // one radial system per mode
        let mut modal = spec.reversed_axes().as_standard_layout().into_owned();
        let solve = |(k, mut col): (usize, ndarray::ArrayViewMut1<'_, Complex64>)| {
            self.solve_mode(k, col.as_slice_mut().expect("contiguous column"));
        };
        match self.exec {
            Exec::Sequential => modal.axis_iter_mut(Axis(0)).enumerate().for_each(solve),
            Exec::Parallel => modal
                .axis_iter_mut(Axis(0))
                .into_par_iter()
                .enumerate()
                .for_each(solve),
        }

        let mut rows = modal.reversed_axes().as_standard_layout().into_owned();
        let scale = 1.0 / nz as f64;
        let mut out = Array2::<f64>::zeros((nr, nz));
        {
            let inv = |(mut row, mut dst): (
                ndarray::ArrayViewMut1<'_, Complex64>,
                ndarray::ArrayViewMut1<'_, f64>,
            )| {
                self.inverse
                    .process(row.as_slice_mut().expect("contiguous row"));
                for j in 0..nz {
                    dst[j] = row[j].re * scale;
                }
            };
            let mut dst_rows = out.slice_mut(ndarray::s![..m, ..]);
            match self.exec {
                Exec::Sequential => rows
                    .axis_iter_mut(Axis(0))
                    .zip(dst_rows.axis_iter_mut(Axis(0)))
                    .for_each(inv),
                Exec::Parallel => rows
                    .axis_iter_mut(Axis(0))
                    .into_par_iter()
                    .zip(dst_rows.axis_iter_mut(Axis(0)).into_par_iter())
                    .for_each(inv),
            }
        }
        ScalarField::from_array_unchecked(self.grid, out, Parity::Even)
    }
}

/// `L f` on every node (see module docs for the axis and wall rows).
pub fn apply_l(f: &ScalarField) -> Result<ScalarField, FieldError> {
    f.require_even()?;
    Ok(stencil::apply_l_exec(f, Exec::Sequential))
}

/// Stream function for `omega1` (free-function form of [`EllipticWorkspace::solve`]).
pub fn solve_phi(
    omega1: &ScalarField,
    ws: &EllipticWorkspace,
) -> Result<ScalarField, EllipticError> {
    ws.solve(omega1)
}

/// `(∂r f, ∂z f)`; `∂r f` vanishes on the axis for even `f`.
pub fn grad(f: &ScalarField) -> Result<(ScalarField, ScalarField), FieldError> {
    f.require_even()?;
    Ok((stencil::d_r(f), stencil::d_z(f)))
}

/// `max |L φ1 + ω1|` over the rows where the equation is imposed (all but the wall).
pub fn consistency_residual(phi1: &ScalarField, omega1: &ScalarField) -> f64 {
    let lphi = stencil::apply_l_exec(phi1, Exec::Sequential);
    let n = phi1.grid().nr();
    let mut res = 0.0_f64;
    for i in 0..n - 1 {
        for (a, b) in lphi.row(i).iter().zip(omega1.row(i).iter()) {
            res = res.max((a + b).abs());
        }
    }
    res
}

/// Observed ratios behind the elliptic estimates:
/// `‖∇²φ1‖ / ‖ω1‖` and `‖∇²∂zφ1‖ / ‖∇ω1‖`, all in `L2(r dr dz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticRatios {
    pub hessian_over_omega: f64,
    pub hessian_z_over_grad_omega: f64,
}

pub fn elliptic_ratios(
    omega1: &ScalarField,
    ws: &EllipticWorkspace,
) -> Result<EllipticRatios, EllipticError> {
    let phi = ws.solve(omega1)?;
    let phi_z = stencil::d_z(&phi);
    let w_l2 = crate::fields::weighted_lp_norm(omega1, 2.0)?;
    let gw_l2 = stencil::grad_l2(omega1);
    Ok(EllipticRatios {
        hessian_over_omega: stencil::hessian_l2(&phi) / w_l2,
        hessian_z_over_grad_omega: stencil::hessian_l2(&phi_z) / gw_l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, sup_norm};
    use crate::synth::{band_limited_field, BandLimited};
    use std::f64::consts::PI;

    #[test]
    fn constants_are_harmonic() {
        let g = make_grid(9, 8, 1.0, 2.0).unwrap();
        let c = ScalarField::from_fn(g, |_, _| 3.5);
        let lc = apply_l(&c).unwrap();
        assert!(sup_norm(&lc) < 1e-12);
    }

    #[test]
    fn z_mode_hits_discrete_symbol_everywhere() {
        let g = make_grid(17, 16, 1.0, 2.0).unwrap();
        let k = 2.0 * PI / g.lz();
        let f = ScalarField::from_fn(g, |_, z| (k * z).sin());
        let lf = apply_l(&f).unwrap();
        let symbol = -(2.0 / (g.hz() * g.hz())) * (1.0 - (k * g.hz()).cos());
        for i in 0..g.nr() {
            for j in 0..g.nz() {
                assert!((lf.get(i, j) - symbol * f.get(i, j)).abs() < 1e-10);
            }
        }
        assert!((symbol - z_symbol(&g, 1)).abs() < 1e-9);
    }

    #[test]
    fn odd_field_is_rejected() {
        let g = make_grid(9, 8, 1.0, 1.0).unwrap();
        let f = ScalarField::zeros(g, Parity::Odd);
        assert_eq!(apply_l(&f), Err(FieldError::ParityMismatch));
        let ws = EllipticWorkspace::new(g).unwrap();
        assert!(ws.solve(&f).is_err());
    }

    #[test]
    fn zero_vorticity_gives_zero_stream_function() {
        let g = make_grid(17, 16, 1.0, 1.0).unwrap();
        let ws = EllipticWorkspace::new(g).unwrap();
        let phi = solve_phi(&ScalarField::zeros(g, Parity::Even), &ws).unwrap();
        assert_eq!(sup_norm(&phi), 0.0);
    }

    #[test]
    fn solve_inverts_the_stencil() {
        let g = make_grid(33, 32, 2.0, 3.0).unwrap();
        let ws = EllipticWorkspace::new(g).unwrap();
        for seed in 0..5 {
            let w = band_limited_field(g, &BandLimited::for_grid(&g), seed);
            let phi = ws.solve(&w).unwrap();
            let res = consistency_residual(&phi, &w);
            assert!(res <= 1e-10 * sup_norm(&w), "seed {seed}: {res}");
            // wall row
            assert!(phi.row(g.nr() - 1).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn z_reflection_symmetry_is_preserved() {
        let g = make_grid(17, 16, 1.0, 2.0).unwrap();
        let ws = EllipticWorkspace::new(g).unwrap();
        let lz = g.lz();
        let w = ScalarField::from_fn(g, |r, z| {
            (-(r * r) * 4.0).exp() * ((2.0 * PI * z / lz).cos() + 0.3 * (4.0 * PI * z / lz).cos())
        });
        let phi = ws.solve(&w).unwrap();
        let nz = g.nz();
        for i in 0..g.nr() {
            for j in 1..nz {
                let mirrored = phi.get(i, nz - j);
                assert!((phi.get(i, j) - mirrored).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parallel_solve_is_bitwise_sequential() {
        let g = make_grid(33, 32, 1.0, 1.0).unwrap();
        let w = band_limited_field(g, &BandLimited::for_grid(&g), 7);
        let seq = EllipticWorkspace::new(g).unwrap().solve(&w).unwrap();
        let par = EllipticWorkspace::with_exec(g, Exec::Parallel)
            .unwrap()
            .solve(&w)
            .unwrap();
        assert_eq!(seq, par);
    }
}
