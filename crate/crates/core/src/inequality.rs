//! Numerical checks of the functional inequalities behind the regularity
//! argument: a weighted Hardy inequality, the radial cutoff, the weighted
//! cutoff inequality with constant `C1(r1)`, and interpolation ratios.

use ndarray::Array2;

use crate::error::InequalityError;
use crate::fields::{sup_norm, weighted_integral, weighted_lp_norm, Parity, ScalarField};
use crate::stencil::{grad_l2, hessian_l2};

/// One instance of
///
/// ```text
/// ∫₀^∞ r^{-σ} |F|^λ dr <= (λ/|σ-1|)^λ ∫₀^∞ r^{-σ} (r f)^λ dr
/// ```
///
/// with `F = ∫₀^r f` for `σ > 1` and `F = -∫_r^∞ f` for `σ < 1`. `f` is
/// sampled on `r` and vanishes outside `[r[0], r[n-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyCase {
    pub lambda: f64,
    pub sigma: f64,
    pub r: Vec<f64>,
    pub f: Vec<f64>,
}

impl HardyCase {
    pub fn validate(&self) -> Result<(), InequalityError> {
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(InequalityError::BadLambda(self.lambda));
        }
        if self.sigma == 1.0 || !self.sigma.is_finite() {
            return Err(InequalityError::SigmaIsOne);
        }
        let n = self.r.len();
        if n < 2 || self.f.len() != n {
            return Err(InequalityError::BadSampleGrid);
        }
        if !(self.r[0] >= 0.0) || self.r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(InequalityError::BadSampleGrid);
        }
        // r^{-σ} is not integrable against a nonzero F at the origin
        if self.sigma > 0.0 && self.r[0] == 0.0 {
            return Err(InequalityError::BadSampleGrid);
        }
        for (index, &value) in self.f.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(InequalityError::NegativeFunction { index, value });
            }
        }
        Ok(())
    }

    /// `(λ/|σ-1|)^λ`
    pub fn constant(&self) -> f64 {
        (self.lambda / (self.sigma - 1.0).abs()).powf(self.lambda)
    }

    /// Primitive `F` at the sample points.
    pub fn primitive(&self) -> Vec<f64> {
        let n = self.r.len();
        let mut cum = vec![0.0; n];
        for k in 1..n {
            cum[k] = cum[k - 1] + 0.5 * (self.f[k] + self.f[k - 1]) * (self.r[k] - self.r[k - 1]);
        }
        if self.sigma > 1.0 {
            cum
        } else {
            let total = cum[n - 1];
            cum.iter().map(|c| c - total).collect()
        }
    }
}

fn trapezoid(x: &[f64], y: impl Fn(usize) -> f64) -> f64 {
    (1..x.len())
        .map(|k| 0.5 * (y(k) + y(k - 1)) * (x[k] - x[k - 1]))
        .sum()
}

/// `(lhs, rhs)` of the Hardy inequality. The parts of the left integral
/// outside the sampled interval, where `F` is constant, are added in closed
/// form.
pub fn hardy_sides(case: &HardyCase) -> Result<(f64, f64), InequalityError> {
    case.validate()?;
    let (lam, sig) = (case.lambda, case.sigma);
    let r = &case.r;
    let n = r.len();
    let big_f = case.primitive();
    let mut lhs = trapezoid(r, |k| r[k].powf(-sig) * big_f[k].abs().powf(lam));
    if sig > 1.0 {
        let b = r[n - 1];
        lhs += big_f[n - 1].abs().powf(lam) * b.powf(1.0 - sig) / (sig - 1.0);
    } else {
        let a = r[0];
        lhs += big_f[0].abs().powf(lam) * a.powf(1.0 - sig) / (1.0 - sig);
    }
    let rhs = case.constant() * trapezoid(r, |k| r[k].powf(-sig) * (r[k] * case.f[k]).powf(lam));
    Ok((lhs, rhs))
}

/// `S(t) = 6t⁵ - 15t⁴ + 10t³`
fn smoothstep(t: f64) -> f64 {
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

fn smoothstep_prime(t: f64) -> f64 {
    30.0 * t * t * (t - 1.0) * (t - 1.0)
}

/// Radial cutoff `ψ(r/r1)`: 1 on `[0, r1]`, 0 on `[2 r1, ∞)`, a quintic
/// smoothstep in between. `r1` must be positive.
pub fn cutoff_psi(r: f64, r1: f64) -> f64 {
    debug_assert!(r1 > 0.0);
    let s = r / r1;
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        1.0 - smoothstep(s - 1.0)
    }
}

/// `d/dr ψ(r/r1)`
pub fn cutoff_psi_prime(r: f64, r1: f64) -> f64 {
    let s = r / r1;
    if s <= 1.0 || s >= 2.0 {
        0.0
    } else {
        -smoothstep_prime(s - 1.0) / r1
    }
}

/// `max |ψ'|` of the unit-scale profile.
pub const CUTOFF_SLOPE_MAX: f64 = 15.0 / 8.0;

/// A validated cutoff scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    r1: f64,
}

impl CutoffSpec {
    pub fn new(r1: f64) -> Result<Self, InequalityError> {
        if r1 > 0.0 && r1.is_finite() {
            Ok(Self { r1 })
        } else {
            Err(InequalityError::BadScale(r1))
        }
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn psi(&self, r: f64) -> f64 {
        cutoff_psi(r, self.r1)
    }

    pub fn psi_prime(&self, r: f64) -> f64 {
        cutoff_psi_prime(r, self.r1)
    }
}

/// Front constant for the weighted cutoff inequality.
///
/// Splitting `f = fψ + f(1-ψ)` costs a factor 2, the product rule on
/// `∂r(fψ)` another 2, the cutoff slope at most `2/r1` and the support
/// `r <= 2 r1` a factor `2^{2-s}`, `s = 2ε′/ε ∈ (1, 2)`. Collecting terms
/// gives `2^{4-s} <= 8` in front of `C1` and `2^{6-s} K² + 2 <= 32 (1 + K²)`
/// for the far field, `K = ε/(ε-ε′)`.
pub const C_DEFAULT: f64 = 32.0;

fn check_exponents(eps: f64, eps_prime: f64) -> Result<(), InequalityError> {
    if 1.0 < eps_prime && eps_prime < eps && eps < 2.0 {
        Ok(())
    } else {
        Err(InequalityError::ExponentOrder { eps, eps_prime })
    }
}

/// `C1(r1) = C ‖Γ0‖∞^{ε′} r1^{2 - 2ε′/ε} (ε/(ε-ε′))²`
pub fn lemma3_c1(
    eps: f64,
    eps_prime: f64,
    r1: f64,
    gamma0_sup: f64,
    c_front: f64,
) -> Result<f64, InequalityError> {
    check_exponents(eps, eps_prime)?;
    CutoffSpec::new(r1)?;
    let k = eps / (eps - eps_prime);
    Ok(c_front * gamma0_sup.powf(eps_prime) * r1.powf(2.0 - 2.0 * eps_prime / eps) * k * k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma3Sides {
    /// `∬ |u1|^{ε′} f² r dr dz`
    pub lhs: f64,
    /// `C1(r1) ∬ |∂r f|² + C_far r1^{-2ε′/ε} ∬_{r >= r1} f²`
    pub rhs: f64,
    pub c1: f64,
    /// `C ‖Γ0‖∞^{ε′} (1 + K²)`
    pub c_far: f64,
}

/// Both sides of
///
/// ```text
/// ∬ |u1|^{ε′} f² <= C1(r1) ∬ |∂r f|² + C_far r1^{-2ε′/ε} ∬_{r>=r1} f²
/// ```
///
/// for `u1` obeying `|u1| <= ‖Γ0‖∞ r^{-2/ε}` and a radial profile `f`
/// sampled at the grid's radial nodes.
pub fn lemma3_sides(
    u1: &ScalarField,
    f: &[f64],
    eps: f64,
    eps_prime: f64,
    r1: f64,
    gamma0_sup: f64,
    c_front: f64,
) -> Result<Lemma3Sides, InequalityError> {
    let c1 = lemma3_c1(eps, eps_prime, r1, gamma0_sup, c_front)?;
    let grid = *u1.grid();
    if f.len() != grid.nr() {
        return Err(InequalityError::ProfileLength {
            expected: grid.nr(),
            got: f.len(),
        });
    }
    u1.check_finite()?;
    let a = 2.0 / eps;
    for i in 1..grid.nr() {
        let bound = gamma0_sup * grid.r(i).powf(-a);
        for j in 0..grid.nz() {
            let value = u1.get(i, j).abs();
            if value > bound * (1.0 + 1e-12) {
                return Err(InequalityError::CirculationBound { i, j, value, bound });
            }
        }
    }

    let n = grid.nr();
    let hr = grid.hr();
    let f_r: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else if i + 1 == n {
                (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * hr)
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * hr)
            }
        })
        .collect();

    let integral = |g: &dyn Fn(usize, usize) -> f64| {
        let vals = Array2::from_shape_fn(grid.shape(), |(i, j)| g(i, j));
        weighted_integral(&ScalarField::from_array_unchecked(grid, vals, Parity::Even))
    };
    let lhs = integral(&|i, j| u1.get(i, j).abs().powf(eps_prime) * f[i] * f[i]);
    let grad = integral(&|i, _| f_r[i] * f_r[i]);
    let far = integral(&|i, _| if grid.r(i) >= r1 { f[i] * f[i] } else { 0.0 });
    let k = eps / (eps - eps_prime);
    let c_far = c_front * gamma0_sup.powf(eps_prime) * (1.0 + k * k);
    let rhs = c1 * grad + c_far * r1.powf(-2.0 * eps_prime / eps) * far;
    Ok(Lemma3Sides { lhs, rhs, c1, c_far })
}

/// Observed interpolation ratios of a field `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpRatios {
    /// `‖∇g‖ / (‖g‖^{1/2} ‖∇²g‖^{1/2})`
    pub gradient: f64,
    /// `‖g‖∞ / (‖g‖^{1/4} ‖∇²g‖^{3/4})`
    pub sup: f64,
}

/// All `L²` norms use the measure `r dr dz`.
pub fn interp_check(g: &ScalarField) -> Result<InterpRatios, InequalityError> {
    g.check_finite()?;
    let l2 = weighted_lp_norm(g, 2.0)?;
    let h = hessian_l2(g);
    if l2 == 0.0 || h == 0.0 {
        return Err(InequalityError::Degenerate);
    }
    Ok(InterpRatios {
        gradient: grad_l2(g) / (l2.sqrt() * h.sqrt()),
        sup: sup_norm(g) / (l2.powf(0.25) * h.powf(0.75)),
    })
}
