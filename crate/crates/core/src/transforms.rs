//! Moving one test function between the three formulations.
//!
//! Starting from an increasing density `s`:
//!
//! * `FORM1` uses `S(x) = ∫₀ˣ s(t)/t dt`;
//! * `FORM2` uses `h(u) = s(√u)/(4(n−1))`, so the squaring `t² = u`
//!   carries the `FORM1` constraint at `t` onto the `FORM2` constraint at `u`;
//! * `FORM3` uses `q = h′`, a density plus point masses `c·jump` at the
//!   squared jump locations of `s`.
//!
//! Under these maps all three normalized ratios coincide.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_models::{
    extremal, extremal_density, log_convex_from_density, make_monotone_grid, GridFunction,
    Interpolation, Profile,
};
use crate::functionals::{constraint_lhs, evaluate, objective_lhs, EvalConfig};
use crate::lp_search::StepIncrements;
use crate::quadrature::{integrate_finite_with, integrate_semi_infinite_with};
use crate::special_values::{Form, Params};

/// `c · s(√u)`.
#[derive(Clone)]
pub struct SqrtComposed {
    pub inner: Arc<dyn Profile>,
    pub factor: f64,
}

impl Profile for SqrtComposed {
    fn value(&self, u: f64) -> f64 {
        self.factor * self.inner.value(u.max(0.0).sqrt())
    }

    fn slope(&self, u: f64) -> Option<f64> {
        if u <= 0.0 {
            return None;
        }
        let x = u.sqrt();
        self.inner.slope(x).map(|d| self.factor * d / (2.0 * x))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner
            .breakpoints()
            .into_iter()
            .map(|k| k * k)
            .collect()
    }

    fn jumps(&self) -> Vec<(f64, f64)> {
        self.inner
            .jumps()
            .into_iter()
            .map(|(k, d)| (k * k, self.factor * d))
            .collect()
    }

    fn is_pure_step(&self) -> bool {
        self.inner.is_pure_step()
    }
}

/// Derivative of a [`SqrtComposed`] as a measure: the density
/// `c·s′(√u)/(2√u)` plus the point masses from the jumps of `s`.
#[derive(Clone)]
pub struct DerivativeMeasure {
    pub of: SqrtComposed,
}

impl Profile for DerivativeMeasure {
    fn value(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            self.of.slope(u).unwrap_or(0.0)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.of.breakpoints()
    }

    fn point_masses(&self) -> Vec<(f64, f64)> {
        self.of.jumps()
    }
}

/// One test function read in all three formulations.
#[derive(Clone)]
pub struct FormBundle {
    pub params: Params,
    /// Increasing density `s`.
    pub s: Arc<dyn Profile>,
    /// `S`, the `FORM1` object.
    pub big_s: Arc<dyn Profile>,
    pub h: SqrtComposed,
    /// `None` when `s` has no known derivative.
    pub q: Option<DerivativeMeasure>,
}

impl FormBundle {
    /// `c = 1/(4(n−1))`.
    pub fn substitution_factor(params: &Params) -> f64 {
        1.0 / (4.0 * f64::from(params.n() - 1))
    }

    /// Builds `h` and `q` from `s` and a matching `S`.
    pub fn from_parts(params: &Params, s: Arc<dyn Profile>, big_s: Arc<dyn Profile>) -> Self {
        let h = SqrtComposed {
            inner: s.clone(),
            factor: Self::substitution_factor(params),
        };
        let differentiable = s.slope(1.0).is_some();
        let q = differentiable.then(|| DerivativeMeasure { of: h.clone() });
        Self {
            params: *params,
            s,
            big_s,
            h,
            q,
        }
    }

    /// Largest `|h(x²) − s(x)/(4(n−1))|` over `xs`, relative to `max(1, |s(x)|)`.
    pub fn substitution_residual(&self, xs: &[f64]) -> f64 {
        let c = Self::substitution_factor(&self.params);
        xs.iter()
            .map(|&x| {
                let sx = self.s.value(x);
                (self.h.value(x * x) - c * sx).abs() / sx.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Bundle for a grid density `s`, with `S` in closed form.
pub fn lift_s_to_bundle(s: &GridFunction, params: &Params) -> Result<FormBundle> {
    let big_s = log_convex_from_density(s)?;
    Ok(FormBundle::from_parts(
        params,
        Arc::new(s.clone()),
        Arc::new(big_s),
    ))
}

/// The step density `s` whose lift reproduces the step function `h`:
/// `s(v) = h(v²)/c`, jumping at `√τᵢ`.
pub fn density_from_steps(h: &StepIncrements, params: &Params) -> Result<GridFunction> {
    let c = FormBundle::substitution_factor(params);
    let mut knots = Vec::with_capacity(h.knots().len() + 1);
    let mut values = Vec::with_capacity(knots.capacity());
    if h.knots()[0] > 0.0 {
        knots.push(0.0);
        values.push(0.0);
    }
    for (&tau, &v) in h.knots().iter().zip(h.cumulative()) {
        knots.push(tau.sqrt());
        values.push(v / c);
    }
    make_monotone_grid(knots, values, Interpolation::StepLeft)
}

/// Bundle whose members are the extremal power laws.
pub fn extremal_bundle(params: &Params) -> Result<FormBundle> {
    let s = extremal_density(params)?;
    let big_s = extremal(params, Form::One)?;
    Ok(FormBundle::from_parts(params, Arc::new(s), Arc::new(big_s)))
}

fn check_density_origin(s: &dyn Profile) -> Result<()> {
    let at_zero = s.value(0.0);
    if at_zero > 0.0 {
        return Err(Error::Divergence(format!(
            "s(0) = {at_zero} > 0 makes s(t)/t non-integrable at the origin"
        )));
    }
    Ok(())
}

/// Both sides of
/// `∫₀¹ S(tx)(1−x²)^{n−2} x dx = (1/(2(n−1))) ∫₀¹ s(tx)/x (1−x²)^{n−1} dx`,
/// each by its own quadrature.
pub fn byparts_constraint_identity(
    bundle: &FormBundle,
    t: f64,
    cfg: &EvalConfig,
) -> Result<(f64, f64)> {
    check_density_origin(bundle.s.as_ref())?;
    let params = &bundle.params;
    let direct = constraint_lhs(Form::One, bundle.big_s.as_ref(), t, params, cfg)?.value;
    if t == 0.0 {
        return Ok((direct, 0.0));
    }
    let n = params.n();
    let s = bundle.s.as_ref();
    let breaks: Vec<f64> = s
        .breakpoints()
        .into_iter()
        .map(|b| b / t)
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect();
    let integrand = |x: f64| {
        let v = s.value(t * x);
        if v == 0.0 {
            0.0
        } else {
            v / x * (1.0 - x * x).powi(n as i32 - 1)
        }
    };
    let r = integrate_finite_with(integrand, 0.0, 1.0, &breaks, &cfg.quad)?;
    Ok((direct, r.value / (2.0 * f64::from(n - 1))))
}

/// Both sides of
/// `∫₀^∞ S(t) t^{2λ−1}/(1+t^{2λ})² dt = (1/(2λ)) ∫₀^∞ s(t)/(t(1+t^{2λ})) dt`.
pub fn byparts_objective_identity(bundle: &FormBundle, cfg: &EvalConfig) -> Result<(f64, f64)> {
    check_density_origin(bundle.s.as_ref())?;
    let lambda = bundle.params.lambda();
    let direct = objective_lhs(Form::One, bundle.big_s.as_ref(), &bundle.params, cfg)?.value;
    let s = bundle.s.as_ref();
    let integrand = |t: f64| {
        let v = s.value(t);
        if v == 0.0 {
            return 0.0;
        }
        let z = t.powf(2.0 * lambda);
        if z.is_infinite() {
            0.0
        } else {
            v / (t * (1.0 + z))
        }
    };
    let r =
        integrate_semi_infinite_with(integrand, 0.0, &s.breakpoints(), &cfg.quad_semi_infinite)?;
    Ok((direct, r.value / (2.0 * lambda)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormRatio {
    pub form: Form,
    pub ratio: Option<f64>,
    pub ratio_error: Option<f64>,
    /// Why the formulation was not evaluated or why evaluation failed.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossFormRatios {
    pub ratios: Vec<FormRatio>,
    /// Largest pairwise difference among the evaluated ratios.
    pub max_gap: f64,
    /// Number of formulations that produced a ratio.
    pub evaluated: usize,
}

impl CrossFormRatios {
    pub fn get(&self, form: Form) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.form == form)
            .and_then(|r| r.ratio)
    }
}

/// Evaluates the bundle in every admissible formulation. Parameter gates
/// and a missing `q` become skip notes; evaluation errors propagate,
/// so a function that cannot be normalized is refused in every form alike.
pub fn cross_form_ratio_check(bundle: &FormBundle, cfg: &EvalConfig) -> Result<CrossFormRatios> {
    let params = &bundle.params;
    let mut ratios = Vec::with_capacity(3);
    for form in Form::ALL {
        if let Err(e) = params.check_form(form) {
            ratios.push(FormRatio {
                form,
                ratio: None,
                ratio_error: None,
                skipped: Some(e.to_string()),
            });
            continue;
        }
        let report = match form {
            Form::One => evaluate(form, bundle.big_s.as_ref(), params, cfg)?,
            Form::Two => evaluate(form, &bundle.h, params, cfg)?,
            Form::Three => match &bundle.q {
                Some(q) => evaluate(form, q, params, cfg)?,
                None => {
                    ratios.push(FormRatio {
                        form,
                        ratio: None,
                        ratio_error: None,
                        skipped: Some("q = h′ unavailable for this density; use FORM2".into()),
                    });
                    continue;
                }
            },
        };
        ratios.push(FormRatio {
            form,
            ratio: Some(report.ratio),
            ratio_error: Some(report.ratio_error),
            skipped: None,
        });
    }
    let values: Vec<f64> = ratios.iter().filter_map(|r| r.ratio).collect();
    let mut max_gap = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            max_gap = max_gap.max((a - b).abs());
        }
    }
    Ok(CrossFormRatios {
        evaluated: values.len(),
        ratios,
        max_gap,
    })
}

/// `FORM3` capability check for callers that insist on `q`.
pub fn require_q(bundle: &FormBundle) -> Result<&DerivativeMeasure> {
    bundle.q.as_ref().ok_or_else(|| {
        Error::Capability("h has no derivative here; evaluate in FORM2 instead of FORM3".into())
    })
}
