//! Computational grid, axisymmetric scalar fields and the weighted
//! quadrature for the measure `r dr dz`.
//!
//! The grid is node-centred in `r` with the axis `r = 0` on the first row and
//! the wall `r = R` on the last row. The `z` direction is periodic with `Nz`
//! nodes `z_j = j hz`, `hz = Lz / Nz`. Values are stored row-major with `r` as
//! the outer index.

use ndarray::{Array1, Array2, ArrayView1, Zip};

use crate::error::{FieldError, GridError, ModelError};

/// Truncated `(r, z)` domain `[0, R] x [0, Lz)`, periodic in `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nr: usize,
    nz: usize,
    r_max: f64,
    lz: f64,
}

impl GridSpec {
    pub fn new(nr: usize, nz: usize, r_max: f64, lz: f64) -> Result<Self, GridError> {
        if nr < 3 {
            return Err(GridError::TooFewRadialNodes(nr));
        }
        if nz < 2 {
            return Err(GridError::TooFewAxialNodes(nz));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(GridError::BadRadialExtent(r_max));
        }
        if !(lz.is_finite() && lz > 0.0) {
            return Err(GridError::BadAxialPeriod(lz));
        }
        Ok(Self { nr, nz, r_max, lz })
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn lz(&self) -> f64 {
        self.lz
    }

    pub fn hr(&self) -> f64 {
        self.r_max / (self.nr - 1) as f64
    }

    pub fn hz(&self) -> f64 {
        self.lz / self.nz as f64
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nr, self.nz)
    }

    pub fn r(&self, i: usize) -> f64 {
        // the last node is pinned to R exactly
        if i + 1 == self.nr {
            self.r_max
        } else {
            i as f64 * self.hr()
        }
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.hz()
    }

    pub fn r_nodes(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.nr, |i| self.r(i))
    }

    pub fn z_nodes(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.nz, |j| self.z(j))
    }

    /// Trapezoid weights in `r` multiplied by `r`; the axis weight is zero.
    pub fn radial_weights(&self) -> Array1<f64> {
        let hr = self.hr();
        Array1::from_shape_fn(self.nr, |i| {
            let w = if i + 1 == self.nr { 0.5 * hr } else { hr };
            w * self.r(i)
        })
    }

    /// Same node counts, extents multiplied by `factor`.
    pub fn dilated(&self, factor: f64) -> Result<Self, GridError> {
        Self::new(self.nr, self.nz, self.r_max * factor, self.lz * factor)
    }
}

/// Free-function form of [`GridSpec::new`].
pub fn make_grid(nr: usize, nz: usize, r_max: f64, lz: f64) -> Result<GridSpec, GridError> {
    GridSpec::new(nr, nz, r_max, lz)
}

/// Reflection symmetry across the axis `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `f(-r, z) = f(r, z)`
    Even,
    /// `f(-r, z) = -f(r, z)`
    Odd,
}

/// Samples of an axisymmetric scalar on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Array2<f64>,
    parity: Parity,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec, parity: Parity) -> Self {
        Self {
            grid,
            values: Array2::zeros(grid.shape()),
            parity,
        }
    }

    pub fn from_array(
        grid: GridSpec,
        values: Array2<f64>,
        parity: Parity,
    ) -> Result<Self, FieldError> {
        if values.dim() != grid.shape() {
            return Err(FieldError::ShapeMismatch {
                expected: grid.shape(),
                got: values.dim(),
            });
        }
        let field = Self {
            grid,
            values,
            parity,
        };
        field.check_finite()?;
        Ok(field)
    }

    /// Even-parity field sampled from `f(r, z)` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn_with_parity(grid, Parity::Even, f)
    }

    pub fn from_fn_with_parity(
        grid: GridSpec,
        parity: Parity,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let values = Array2::from_shape_fn(grid.shape(), |(i, j)| f(grid.r(i), grid.z(j)));
        Self {
            grid,
            values,
            parity,
        }
    }

    /// Wraps values without the finiteness scan; for internal hot paths.
    pub(crate) fn from_array_unchecked(grid: GridSpec, values: Array2<f64>, parity: Parity) -> Self {
        debug_assert_eq!(values.dim(), grid.shape());
        Self {
            grid,
            values,
            parity,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn check_finite(&self) -> Result<(), FieldError> {
        match self.values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            Some(((i, j), _)) => Err(FieldError::NonFinite { i, j }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn require_even(&self) -> Result<(), FieldError> {
        match self.parity {
            Parity::Even => Ok(()),
            Parity::Odd => Err(FieldError::ParityMismatch),
        }
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<(), FieldError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(FieldError::GridMismatch)
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: &self.values * c,
            parity: self.parity,
        }
    }

    /// Pointwise map keeping grid and parity.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.mapv(f),
            parity: self.parity,
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(
        &self,
        other: &ScalarField,
        parity: Parity,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, FieldError> {
        self.same_grid(other)?;
        let mut values = Array2::zeros(self.grid.shape());
        Zip::from(&mut values)
            .and(&self.values)
            .and(&other.values)
            .for_each(|o, &a, &b| *o = f(a, b));
        Ok(Self {
            grid: self.grid,
            values,
            parity,
        })
    }

    /// Pointwise map that also sees the node coordinates `(r, z)`.
    pub fn map_with_coords(&self, parity: Parity, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let grid = self.grid;
        let values = Array2::from_shape_fn(grid.shape(), |(i, j)| {
            f(grid.r(i), grid.z(j), self.values[[i, j]])
        });
        Self {
            grid,
            values,
            parity,
        }
    }
}

/// Row `i` of an even field, reflecting negative indices across the axis.
pub fn ghost_even(f: &ScalarField, i: isize) -> Result<ArrayView1<'_, f64>, FieldError> {
    f.require_even()?;
    let max = f.grid.nr - 1;
    if i < -(max as isize) || i > max as isize {
        return Err(FieldError::GhostOutOfRange { index: i, max });
    }
    Ok(f.values.row(i.unsigned_abs()))
}

/// `∬ g(f) r dr dz` with trapezoid in `r` and the rectangle rule in `z`.
pub fn weighted_integral_of(f: &ScalarField, g: impl Fn(f64) -> f64) -> f64 {
    let w = f.grid.radial_weights();
    let hz = f.grid.hz();
    let mut total = 0.0;
    for (i, row) in f.values.outer_iter().enumerate() {
        if w[i] == 0.0 {
            continue;
        }
        let s: f64 = row.iter().map(|&v| g(v)).sum();
        total += w[i] * s;
    }
    total * hz
}

/// `∬ f r dr dz`.
pub fn weighted_integral(f: &ScalarField) -> f64 {
    weighted_integral_of(f, |v| v)
}

/// `(∬ |f|^p r dr dz)^(1/p)`; `p = inf` gives the sup norm.
pub fn weighted_lp_norm(f: &ScalarField, p: f64) -> Result<f64, FieldError> {
    if p.is_nan() || p < 1.0 {
        return Err(FieldError::BadExponent(p));
    }
    f.check_finite()?;
    if p.is_infinite() {
        return Ok(sup_norm(f));
    }
    let integral = if p == 2.0 {
        weighted_integral_of(f, |v| v * v)
    } else if p == 1.0 {
        weighted_integral_of(f, f64::abs)
    } else {
        weighted_integral_of(f, |v| v.abs().powf(p))
    };
    Ok(integral.powf(1.0 / p))
}

/// `max |f|` over all nodes.
pub fn sup_norm(f: &ScalarField) -> f64 {
    f.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Convection strength `eps` and viscosity `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    epsilon: f64,
    nu: f64,
}

impl ModelParams {
    pub fn new(epsilon: f64, nu: f64) -> Result<Self, ModelError> {
        if !(epsilon.is_finite() && (0.0..2.0).contains(&epsilon)) {
            return Err(ModelError::EpsilonOutOfRange(epsilon));
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(ModelError::BadViscosity(nu));
        }
        Ok(Self { epsilon, nu })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Flow state in transformed variables at time `t`.
///
/// `phi1` is kept consistent with `omega1` by whoever builds the state (see
/// [`crate::dynamics::Solver::state`]).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u1: ScalarField,
    pub omega1: ScalarField,
    pub phi1: ScalarField,
    pub t: f64,
}

impl State {
    pub fn grid(&self) -> &GridSpec {
        self.u1.grid()
    }
}
