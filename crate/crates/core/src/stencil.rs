//! Second-order finite differences on the node-centred axisymmetric grid.
//!
//! Rows `1..Nr-1` use centred differences. The axis row uses the parity
//! reflection `f(-h) = ±f(h)`; the wall row `r = R` uses one-sided
//! second-order differences.

use ndarray::{Array2, ArrayView1, ArrayViewMut1};

use crate::exec::{for_each_row, Exec};
use crate::fields::{GridSpec, Parity, ScalarField};

/// Centred periodic `∂z` of one row.
fn dz_row(src: ArrayView1<'_, f64>, mut out: ArrayViewMut1<'_, f64>, inv_2hz: f64) {
    let n = src.len();
    for j in 0..n {
        let jp = if j + 1 == n { 0 } else { j + 1 };
        let jm = if j == 0 { n - 1 } else { j - 1 };
        out[j] = (src[jp] - src[jm]) * inv_2hz;
    }
}

/// Periodic `∂z²` of one row, accumulated into `out`.
fn add_dzz_row(src: ArrayView1<'_, f64>, out: &mut ArrayViewMut1<'_, f64>, inv_hz2: f64) {
    let n = src.len();
    for j in 0..n {
        let jp = if j + 1 == n { 0 } else { j + 1 };
        let jm = if j == 0 { n - 1 } else { j - 1 };
        out[j] += (src[jp] - 2.0 * src[j] + src[jm]) * inv_hz2;
    }
}

/// `∂r` at row `i`, node `j`.
#[inline]
fn dr_at(v: &Array2<f64>, grid: &GridSpec, parity: Parity, i: usize, j: usize) -> f64 {
    let n = grid.nr();
    let hr = grid.hr();
    if i == 0 {
        match parity {
            Parity::Even => 0.0,
            // f(-h) = -f(h)
            Parity::Odd => v[[1, j]] / hr,
        }
    } else if i + 1 == n {
        (3.0 * v[[i, j]] - 4.0 * v[[i - 1, j]] + v[[i - 2, j]]) / (2.0 * hr)
    } else {
        (v[[i + 1, j]] - v[[i - 1, j]]) / (2.0 * hr)
    }
}

/// `∂r²` at row `i`, node `j`.
#[inline]
fn drr_at(v: &Array2<f64>, grid: &GridSpec, parity: Parity, i: usize, j: usize) -> f64 {
    let n = grid.nr();
    let hr2 = grid.hr() * grid.hr();
    if i == 0 {
        match parity {
            Parity::Even => 2.0 * (v[[1, j]] - v[[0, j]]) / hr2,
            Parity::Odd => -2.0 * v[[0, j]] / hr2,
        }
    } else if i + 1 == n {
        if n >= 4 {
            (2.0 * v[[i, j]] - 5.0 * v[[i - 1, j]] + 4.0 * v[[i - 2, j]] - v[[i - 3, j]]) / hr2
        } else {
            (v[[i, j]] - 2.0 * v[[i - 1, j]] + v[[i - 2, j]]) / hr2
        }
    } else {
        (v[[i + 1, j]] - 2.0 * v[[i, j]] + v[[i - 1, j]]) / hr2
    }
}

fn flip(p: Parity) -> Parity {
    match p {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
    }
}

pub(crate) fn dr_exec(f: &ScalarField, exec: Exec) -> ScalarField {
    let grid = *f.grid();
    let v = f.values();
    let parity = f.parity();
    let mut out = Array2::zeros(grid.shape());
    for_each_row(&mut out, exec, |i, mut row| {
        for j in 0..grid.nz() {
            row[j] = dr_at(v, &grid, parity, i, j);
        }
    });
    ScalarField::from_array_unchecked(grid, out, flip(parity))
}

pub(crate) fn dz_exec(f: &ScalarField, exec: Exec) -> ScalarField {
    let grid = *f.grid();
    let v = f.values();
    let inv_2hz = 0.5 / grid.hz();
    let mut out = Array2::zeros(grid.shape());
    for_each_row(&mut out, exec, |i, row| dz_row(v.row(i), row, inv_2hz));
    ScalarField::from_array_unchecked(grid, out, f.parity())
}

/// `∂r f` with the parity rule at the axis and one-sided differences at the wall.
pub fn d_r(f: &ScalarField) -> ScalarField {
    dr_exec(f, Exec::Sequential)
}

/// Centred periodic `∂z f`.
pub fn d_z(f: &ScalarField) -> ScalarField {
    dz_exec(f, Exec::Sequential)
}

/// `∂r² f`.
pub fn d_rr(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let v = f.values();
    let parity = f.parity();
    let out = Array2::from_shape_fn(grid.shape(), |(i, j)| drr_at(v, &grid, parity, i, j));
    ScalarField::from_array_unchecked(grid, out, parity)
}

/// Periodic `∂z² f`.
pub fn d_zz(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let v = f.values();
    let inv_hz2 = 1.0 / (grid.hz() * grid.hz());
    let mut out = Array2::zeros(grid.shape());
    for_each_row(&mut out, Exec::Sequential, |i, mut row| {
        add_dzz_row(v.row(i), &mut row, inv_hz2)
    });
    ScalarField::from_array_unchecked(grid, out, f.parity())
}

/// `(1/r) ∂r f` for an even field, using the limit `∂r² f` on the axis.
pub fn dr_over_r(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let v = f.values();
    let parity = f.parity();
    let out = Array2::from_shape_fn(grid.shape(), |(i, j)| {
        if i == 0 {
            drr_at(v, &grid, parity, 0, j)
        } else {
            dr_at(v, &grid, parity, i, j) / grid.r(i)
        }
    });
    ScalarField::from_array_unchecked(grid, out, parity)
}

/// Radial part of `L` at a non-wall row of an even field.
#[inline]
pub(crate) fn l_radial_at(v: &Array2<f64>, i: usize, j: usize, inv_hr2: f64) -> f64 {
    if i == 0 {
        8.0 * (v[[1, j]] - v[[0, j]]) * inv_hr2
    } else {
        let k = 1.5 / i as f64;
        ((1.0 - k) * v[[i - 1, j]] - 2.0 * v[[i, j]] + (1.0 + k) * v[[i + 1, j]]) * inv_hr2
    }
}

/// `L f = f_rr + (3/r) f_r + f_zz` with the axis limit `4 f_rr + f_zz`.
pub(crate) fn apply_l_exec(f: &ScalarField, exec: Exec) -> ScalarField {
    let grid = *f.grid();
    let v = f.values();
    let parity = f.parity();
    let n = grid.nr();
    let inv_hr2 = 1.0 / (grid.hr() * grid.hr());
    let inv_hz2 = 1.0 / (grid.hz() * grid.hz());
    let mut out = Array2::zeros(grid.shape());
    for_each_row(&mut out, exec, |i, mut row| {
        if i + 1 == n {
            let r = grid.r(i);
            for j in 0..grid.nz() {
                row[j] = drr_at(v, &grid, parity, i, j) + 3.0 / r * dr_at(v, &grid, parity, i, j);
            }
        } else {
            for j in 0..grid.nz() {
                row[j] = l_radial_at(v, i, j, inv_hr2);
            }
        }
        add_dzz_row(v.row(i), &mut row, inv_hz2);
    });
    ScalarField::from_array_unchecked(grid, out, parity)
}

/// `L2` norm (measure `r dr dz`) of the full gradient `(f_r, f_z)`.
pub fn grad_l2(f: &ScalarField) -> f64 {
    let fr = d_r(f);
    let fz = d_z(f);
    let sq = fr
        .zip_with(&fz, Parity::Even, |a, b| a * a + b * b)
        .expect("same grid");
    crate::fields::weighted_integral(&sq).sqrt()
}

/// `L2` norm (measure `r dr dz`) of the Hessian of an even axisymmetric
/// scalar viewed in three dimensions: `f_rr² + 2 f_rz² + f_zz² + (f_r / r)²`.
pub fn hessian_l2(f: &ScalarField) -> f64 {
    let frr = d_rr(f);
    let fzz = d_zz(f);
    let frz = d_r(&d_z(f));
    let fr_r = dr_over_r(f);
    let grid = *f.grid();
    let sq = Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let a = frr.get(i, j);
        let b = frz.get(i, j);
        let c = fzz.get(i, j);
        let d = fr_r.get(i, j);
        a * a + 2.0 * b * b + c * c + d * d
    });
    crate::fields::weighted_integral(&ScalarField::from_array_unchecked(
        grid,
        sq,
        Parity::Even,
    ))
    .sqrt()
}
