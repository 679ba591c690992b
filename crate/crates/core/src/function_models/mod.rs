//! Test-function classes of the three formulations.
//!
//! Every test object implements [`Profile`]: pointwise evaluation plus the
//! structural hints (kinks, jumps, step structure) that let the functionals
//! align quadrature panels or switch to exact finite sums.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::special_values::{rising_product, Form, Params};

mod csv_io;
mod grid;
mod log_convex;
pub mod sampling;

pub(crate) use csv_io::write_atomic;
pub use csv_io::{read_function_csv, write_function_csv, FunctionFile};
pub use grid::{make_monotone_grid, GridFunction, Interpolation, Tail, ValueClass};
pub use log_convex::{log_convex_from_density, LogConvexS};

/// A real function on `[0, ∞)` used as a test object.
pub trait Profile: Send + Sync {
    fn value(&self, t: f64) -> f64;

    /// Derivative of the absolutely continuous part, where known.
    fn slope(&self, _t: f64) -> Option<f64> {
        None
    }

    /// Points where the function or its derivative is discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Upward or downward jumps `(location, size)` at positive locations.
    fn jumps(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    /// True when the function is exactly `Σ jump·[t ≥ location]`.
    fn is_pure_step(&self) -> bool {
        false
    }

    /// Atomic part of a measure-valued density. Only `FORM3` reads this:
    /// the derivative of a step `h` is a sum of point masses.
    fn point_masses(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }
}

macro_rules! forward_profile {
    ($($ty:ty),*) => {$(
        impl<P: Profile + ?Sized> Profile for $ty {
            fn value(&self, t: f64) -> f64 { (**self).value(t) }
            fn slope(&self, t: f64) -> Option<f64> { (**self).slope(t) }
            fn breakpoints(&self) -> Vec<f64> { (**self).breakpoints() }
            fn jumps(&self) -> Vec<(f64, f64)> { (**self).jumps() }
            fn is_pure_step(&self) -> bool { (**self).is_pure_step() }
            fn point_masses(&self) -> Vec<(f64, f64)> { (**self).point_masses() }
        }
    )*};
}

forward_profile!(&P, Box<P>, Arc<P>);

/// `c·t^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }
}

impl Profile for PowerLaw {
    fn value(&self, t: f64) -> f64 {
        if self.coeff == 0.0 {
            0.0
        } else if t == 0.0 {
            match self.exponent.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => self.coeff,
                _ => f64::INFINITY * self.coeff.signum(),
            }
        } else {
            self.coeff * t.powf(self.exponent)
        }
    }

    fn slope(&self, t: f64) -> Option<f64> {
        if self.exponent == 0.0 || self.coeff == 0.0 {
            Some(0.0)
        } else {
            Some(self.coeff * self.exponent * t.powf(self.exponent - 1.0))
        }
    }
}

/// `factor · inner`.
#[derive(Clone, Debug)]
pub struct Scaled<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P: Profile> Profile for Scaled<P> {
    fn value(&self, t: f64) -> f64 {
        self.factor * self.inner.value(t)
    }

    fn slope(&self, t: f64) -> Option<f64> {
        self.inner.slope(t).map(|d| self.factor * d)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    fn jumps(&self) -> Vec<(f64, f64)> {
        scale_pairs(self.inner.jumps(), self.factor)
    }

    fn is_pure_step(&self) -> bool {
        self.inner.is_pure_step()
    }

    fn point_masses(&self) -> Vec<(f64, f64)> {
        scale_pairs(self.inner.point_masses(), self.factor)
    }
}

fn scale_pairs(pairs: Vec<(f64, f64)>, factor: f64) -> Vec<(f64, f64)> {
    pairs.into_iter().map(|(x, m)| (x, factor * m)).collect()
}

/// The power-law test function that turns both sides of `form` into
/// equalities:
///
/// * `FORM1`: `S(t) = 2(n−1)∏(1+λ/2k)·t^λ`
/// * `FORM2`: `h(t) = α∏(1+α/k)·t^α`
/// * `FORM3`: `q(t) = α²∏(1+α/k)·t^{α−1}`
pub fn extremal(params: &Params, form: Form) -> Result<PowerLaw> {
    params.check_form(form)?;
    let alpha = params.alpha();
    let prod = rising_product(alpha, params.n());
    Ok(match form {
        Form::One => PowerLaw::new(2.0 * f64::from(params.n() - 1) * prod, params.lambda()),
        Form::Two => PowerLaw::new(alpha * prod, alpha),
        Form::Three => PowerLaw::new(alpha * alpha * prod, alpha - 1.0),
    })
}

/// Density `s(t) = x·S′(x)` of the `FORM1` extremal, `λ·C·t^λ`.
pub fn extremal_density(params: &Params) -> Result<PowerLaw> {
    let big_s = extremal(params, Form::One)?;
    Ok(PowerLaw::new(
        params.lambda() * big_s.coeff,
        params.lambda(),
    ))
}
