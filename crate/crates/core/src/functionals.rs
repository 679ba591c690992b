//! Left-hand sides of the constraint and of the objective in each
//! formulation, the scan that turns "for all t" into a supremum, and the
//! normalized comparison against the sharp constant.
//!
//! | form  | constraint at `t`                       | rate    | objective                              |
//! |-------|-----------------------------------------|---------|----------------------------------------|
//! | FORM1 | `∫₀¹ S(tx)(1−x²)^{n−2} x dx`            | `λ`     | `∫₀^∞ S(t) t^{2λ−1}/(1+t^{2λ})² dt`   |
//! | FORM2 | `∫₀¹ h(tx)(1−x)^{n−1}/x dx`             | `α`     | `∫₀^∞ h(t)/(t(1+t^{2α})) dt`           |
//! | FORM3 | `∫₀¹ K(x) q(tx) dx`                     | `α − 1` | `∫₀^∞ q(t) ln(1+t^{−2α}) dt`           |
//!
//! Both sides are linear in the test function, so the ratio
//! `objective / (sup · bound)` is scale free.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_models::{Profile, Scaled};
use crate::quadrature::{
    integrate_finite_with, integrate_semi_infinite_with, QuadConfig, QuadResult,
};
use crate::special_values::{kernel_k_unchecked, kernel_psi_unchecked, sharp_bound, Form, Params};

/// Log-spaced scan of the constraint ratio. Unset limits are derived from
/// the test function's breakpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: usize,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            t_min: None,
            t_max: None,
            points: 400,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Integrals over `[0, 1]`.
    pub quad: QuadConfig,
    /// Integrals over `[0, ∞)`.
    pub quad_semi_infinite: QuadConfig,
    pub scan: ScanSpec,
    /// Use the finite-sum formulas for pure step functions in `FORM2`
    /// instead of quadrature.
    pub exact_steps: bool,
    /// How many local maxima of the sampled ratio get golden-section
    /// refinement.
    pub refine_candidates: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            quad: QuadConfig::relative(1e-11),
            quad_semi_infinite: QuadConfig::relative(1e-10),
            scan: ScanSpec::default(),
            exact_steps: true,
            refine_candidates: 3,
        }
    }
}

impl EvalConfig {
    /// Same tolerances, but never take the exact step-function shortcut.
    pub fn quadrature_only(mut self) -> Self {
        self.exact_steps = false;
        self
    }
}

/// Which end of the scan range carries a still-increasing ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub sup: f64,
    pub argmax: f64,
    /// Quadrature error of the constraint at the argmax, divided by the rate.
    pub sup_abs_error: f64,
    pub edge_warning: Option<Edge>,
    pub t_min: f64,
    pub t_max: f64,
    /// `(t, ratio)` at every grid point.
    pub samples: Vec<(f64, f64)>,
}

impl ScanResult {
    /// Largest `|ratio − target|` over the grid samples.
    pub fn max_deviation_from(&self, target: f64) -> f64 {
        self.samples
            .iter()
            .map(|&(_, r)| (r - target).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalDiagnostics {
    pub constraint_abs_error: f64,
    pub objective_abs_error: f64,
    pub objective_converged: bool,
    pub exact_steps_used: bool,
    pub scan_t_min: f64,
    pub scan_t_max: f64,
    pub scan_points: usize,
}

/// Normalized comparison of one test function against the sharp bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub form: Form,
    pub params: Params,
    /// Supremum of the constraint ratio of the function as given.
    pub constraint_sup: f64,
    pub constraint_argmax: f64,
    /// Factor `1/constraint_sup` applied by normalization.
    pub normalization: f64,
    /// Objective of the function as given.
    pub raw_objective: f64,
    /// Objective after normalization.
    pub objective: f64,
    pub bound: f64,
    pub ratio: f64,
    /// Propagated quadrature error of `ratio`.
    pub ratio_error: f64,
    /// `ratio > 1 + 3·ratio_error`.
    pub exceeds_bound: bool,
    pub diagnostics: EvalDiagnostics,
}

fn check_subject(form: Form, f: &dyn Profile) -> Result<()> {
    let at_zero = f.value(0.0);
    match form {
        Form::One if at_zero != 0.0 => {
            Err(Error::Domain(format!("S(0) must vanish, got {at_zero}")))
        }
        Form::Two if at_zero > 0.0 => Err(Error::Divergence(format!(
            "h(0) = {at_zero} > 0 makes the constraint integral diverge at every t > 0"
        ))),
        _ => Ok(()),
    }
}

fn scaled_breaks(f: &dyn Profile, t: f64) -> Vec<f64> {
    f.breakpoints()
        .into_iter()
        .chain(f.point_masses().into_iter().map(|(x, _)| x))
        .map(|b| b / t)
        .filter(|&x| x > 0.0 && x < 1.0)
        .collect()
}

/// `(1 − x)^k` with the exponent as an integer power.
fn one_minus_pow(x: f64, k: u32) -> f64 {
    (1.0 - x).powi(k as i32)
}

/// Constraint-side integral of `form` at `t ≥ 0`.
pub fn constraint_lhs(
    form: Form,
    f: &dyn Profile,
    t: f64,
    params: &Params,
    cfg: &EvalConfig,
) -> Result<QuadResult> {
    check_subject(form, f)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!(
            "t must be finite and nonnegative, got {t}"
        )));
    }
    let n = params.n();
    match form {
        Form::One => {
            if t == 0.0 {
                return Ok(QuadResult::exact(0.0));
            }
            let integrand = |x: f64| {
                let weight = one_minus_pow(x, n - 2) * (1.0 + x).powi(n as i32 - 2) * x;
                if weight == 0.0 {
                    0.0
                } else {
                    f.value(t * x) * weight
                }
            };
            integrate_finite_with(integrand, 0.0, 1.0, &scaled_breaks(f, t), &cfg.quad)
        }
        Form::Two => {
            if t == 0.0 {
                return Ok(QuadResult::exact(0.0));
            }
            if cfg.exact_steps && f.is_pure_step() {
                return Ok(QuadResult::exact(step_constraint(&f.jumps(), t, n)));
            }
            let integrand = |x: f64| {
                let h = f.value(t * x);
                if h == 0.0 {
                    0.0
                } else {
                    h * one_minus_pow(x, n - 1) / x
                }
            };
            integrate_finite_with(integrand, 0.0, 1.0, &scaled_breaks(f, t), &cfg.quad)
        }
        Form::Three => {
            if t == 0.0 {
                // ∫₀¹ K(x) dx = 1/n.
                return Ok(QuadResult::exact(f.value(0.0) / f64::from(n)));
            }
            let integrand = |x: f64| {
                let q = f.value(t * x);
                if q == 0.0 {
                    0.0
                } else {
                    kernel_k_unchecked(x, n) * q
                }
            };
            let mut r =
                integrate_finite_with(integrand, 0.0, 1.0, &scaled_breaks(f, t), &cfg.quad)?;
            let atoms: f64 = f
                .point_masses()
                .iter()
                .filter(|&&(tau, _)| tau < t)
                .map(|&(tau, m)| m * kernel_k_unchecked(tau / t, n) / t)
                .sum();
            r.value += atoms;
            Ok(r)
        }
    }
}

/// `Σ Δᵢ K(min(τᵢ/t, 1))`: the `FORM2` constraint of `h = Σ Δᵢ[t ≥ τᵢ]`.
pub fn step_constraint(jumps: &[(f64, f64)], t: f64, n: u32) -> f64 {
    jumps
        .iter()
        .filter(|&&(tau, _)| tau < t)
        .map(|&(tau, d)| d * kernel_k_unchecked(tau / t, n))
        .sum()
}

/// `Σ Δᵢ Ψ(τᵢ)`: the `FORM2` objective of a step function.
pub fn step_objective(jumps: &[(f64, f64)], alpha: f64) -> f64 {
    jumps
        .iter()
        .map(|&(tau, d)| d * kernel_psi_unchecked(tau, alpha))
        .sum()
}

/// `t^{2λ−1}/(1+t^{2λ})²` without overflow for large `t`.
fn form1_weight(t: f64, lambda: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let z = t.powf(2.0 * lambda);
    if z <= 1.0 {
        z / (t * (1.0 + z) * (1.0 + z))
    } else {
        let w = 1.0 / z;
        w / (t * (1.0 + w) * (1.0 + w))
    }
}

/// `1/(t(1+t^{2α}))`.
fn form2_weight(t: f64, alpha: f64) -> f64 {
    let z = t.powf(2.0 * alpha);
    if z.is_infinite() {
        0.0
    } else {
        1.0 / (t * (1.0 + z))
    }
}

/// Objective-side integral of `form`.
pub fn objective_lhs(
    form: Form,
    f: &dyn Profile,
    params: &Params,
    cfg: &EvalConfig,
) -> Result<QuadResult> {
    check_subject(form, f)?;
    let lambda = params.lambda();
    let alpha = params.alpha();
    let breaks = f.breakpoints();
    let quad = &cfg.quad_semi_infinite;
    let result = match form {
        Form::One => {
            let g = |t: f64| {
                let w = form1_weight(t, lambda);
                if w == 0.0 {
                    return 0.0;
                }
                let s = f.value(t);
                if s == 0.0 {
                    0.0
                } else {
                    s * w
                }
            };
            with_divergence_check(&g, &breaks, quad)?
        }
        Form::Two => {
            if cfg.exact_steps && f.is_pure_step() {
                return Ok(QuadResult::exact(step_objective(&f.jumps(), alpha)));
            }
            let g = |t: f64| {
                let w = form2_weight(t, alpha);
                if w == 0.0 {
                    return 0.0;
                }
                let h = f.value(t);
                if h == 0.0 {
                    0.0
                } else {
                    h * w
                }
            };
            with_divergence_check(&g, &breaks, quad)?
        }
        Form::Three => {
            let g = |t: f64| {
                let w = kernel_psi_unchecked(t, alpha);
                if w == 0.0 {
                    return 0.0;
                }
                let q = f.value(t);
                if q == 0.0 {
                    0.0
                } else {
                    q * 2.0 * alpha * w
                }
            };
            let mut r = with_divergence_check(&g, &breaks, quad)?;
            r.value += f
                .point_masses()
                .iter()
                .map(|&(tau, m)| m * 2.0 * alpha * kernel_psi_unchecked(tau, alpha))
                .sum::<f64>();
            r
        }
    };
    Ok(result)
}

/// Semi-infinite quadrature; when it fails to converge, compares partial
/// integrals over growing ranges and reports divergence if they keep
/// growing.
fn with_divergence_check<F: Fn(f64) -> f64>(
    g: &F,
    breaks: &[f64],
    quad: &QuadConfig,
) -> Result<QuadResult> {
    let r = integrate_semi_infinite_with(g, 0.0, breaks, quad)?;
    if r.converged {
        return Ok(r);
    }
    let mut partials = Vec::new();
    for upper in [1e4, 1e8, 1e12] {
        let p = integrate_finite_with(g, 0.0, upper, breaks, quad)?;
        partials.push(p);
    }
    let growing = partials.windows(2).all(|w| {
        w[1].value - w[0].value
            > 10.0
                * (w[0].abs_error_estimate + w[1].abs_error_estimate).max(1e-12 * w[1].value.abs())
    });
    if growing {
        return Err(Error::Divergence(format!(
            "objective keeps growing: partial integrals {:?}",
            partials.iter().map(|p| p.value).collect::<Vec<_>>()
        )));
    }
    Ok(r)
}

/// Log-spaced `[lo, hi]` with `points ≥ 2` nodes.
pub(crate) fn scan_range(form: Form, f: &dyn Profile, spec: &ScanSpec) -> Result<(f64, f64)> {
    let mut bps: Vec<f64> = f
        .breakpoints()
        .into_iter()
        .chain(f.point_masses().into_iter().map(|(x, _)| x))
        .filter(|&b| b > 0.0 && b.is_finite())
        .collect();
    bps.sort_by(f64::total_cmp);
    let _ = form;
    let t_min = spec
        .t_min
        .unwrap_or_else(|| bps.first().map_or(1e-4, |&b| (0.1 * b).min(1e-4)));
    let t_max = spec
        .t_max
        .unwrap_or_else(|| bps.last().map_or(1e4, |&b| (1e3 * b).max(1e4)));
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err(Error::Config(format!(
            "invalid scan range [{t_min}, {t_max}]"
        )));
    }
    if spec.points < 2 {
        return Err(Error::Config(format!(
            "scan needs at least 2 points, got {}",
            spec.points
        )));
    }
    Ok((t_min, t_max))
}

fn ratio_at(
    form: Form,
    f: &dyn Profile,
    t: f64,
    params: &Params,
    cfg: &EvalConfig,
) -> Result<(f64, f64)> {
    let r = constraint_lhs(form, f, t, params, cfg)?;
    let scale = t.powf(form.rate(params));
    Ok((r.value / scale, r.abs_error_estimate / scale))
}

/// Supremum over `t` of `constraint(t) / t^rate`: a log-grid pass followed
/// by golden-section refinement around the best local maxima.
pub fn constraint_sup_scan(
    form: Form,
    f: &dyn Profile,
    params: &Params,
    cfg: &EvalConfig,
) -> Result<ScanResult> {
    check_subject(form, f)?;
    let (t_min, t_max) = scan_range(form, f, &cfg.scan)?;
    let grid = crate::lp_search::log_grid(t_min, t_max, cfg.scan.points);
    let evaluated: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| ratio_at(form, f, t, params, cfg))
        .collect::<Result<_>>()?;

    let ratios: Vec<f64> = evaluated.iter().map(|e| e.0).collect();
    let last = ratios.len() - 1;
    let mut best = 0;
    for i in 1..ratios.len() {
        if ratios[i] > ratios[best] {
            best = i;
        }
    }
    let mut sup = ratios[best];
    let mut argmax = grid[best];
    let mut sup_abs_error = evaluated[best].1;

    let edge_gap = |edge: f64, inner: f64| edge > inner + 1e-7 * inner.abs() + f64::MIN_POSITIVE;
    let edge_warning = if best == 0 && edge_gap(ratios[0], ratios[1]) {
        Some(Edge::Lower)
    } else if best == last && edge_gap(ratios[last], ratios[last - 1]) {
        Some(Edge::Upper)
    } else {
        None
    };

    if sup > 0.0 && edge_warning.is_none() {
        let mut local: Vec<usize> = (0..ratios.len())
            .filter(|&i| {
                (i == 0 || ratios[i] >= ratios[i - 1])
                    && (i == last || ratios[i] >= ratios[i + 1])
                    && ratios[i] > 0.0
            })
            .collect();
        local.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]).then(a.cmp(&b)));
        local.truncate(cfg.refine_candidates);
        for i in local {
            let lo = grid[i.saturating_sub(1)].ln();
            let hi = grid[(i + 1).min(last)].ln();
            let (t, r, e) = golden_max(|u| ratio_at(form, f, u.exp(), params, cfg), lo, hi)?;
            if r > sup {
                sup = r;
                argmax = t;
                sup_abs_error = e;
            }
        }
    }

    Ok(ScanResult {
        sup,
        argmax,
        sup_abs_error,
        edge_warning,
        t_min,
        t_max,
        samples: grid.into_iter().zip(ratios).collect(),
    })
}

/// Golden-section maximization of `g` over `[lo, hi]` (in `ln t`).
fn golden_max<G>(g: G, mut lo: f64, mut hi: f64) -> Result<(f64, f64, f64)>
where
    G: Fn(f64) -> Result<(f64, f64)>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    for _ in 0..80 {
        if hi - lo <= 1e-10 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1.0 >= f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = g(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = g(x2)?;
        }
    }
    let (x, fx) = if f1.0 >= f2.0 { (x1, f1) } else { (x2, f2) };
    Ok((x.exp(), fx.0, fx.1))
}

/// Rescales `f` so that its constraint supremum is exactly one.
pub fn normalize<'a>(
    form: Form,
    f: &'a dyn Profile,
    params: &Params,
    cfg: &EvalConfig,
) -> Result<Scaled<&'a dyn Profile>> {
    let scan = constraint_sup_scan(form, f, params, cfg)?;
    refuse_unnormalizable(&scan)?;
    Ok(Scaled {
        inner: f,
        factor: 1.0 / scan.sup,
    })
}

fn refuse_unnormalizable(scan: &ScanResult) -> Result<()> {
    if let Some(edge) = scan.edge_warning {
        return Err(Error::Normalization(format!(
            "constraint ratio still increasing at the {edge:?} end of [{}, {}]; supremum may be unbounded",
            scan.t_min, scan.t_max
        )));
    }
    if !(scan.sup > 0.0 && scan.sup.is_finite()) {
        return Err(Error::Normalization(format!(
            "constraint supremum is {}",
            scan.sup
        )));
    }
    Ok(())
}

/// Normalizes `f`, computes its objective, and compares with the bound.
/// A ratio above one beyond the propagated error flags a counterexample
/// candidate.
pub fn evaluate(
    form: Form,
    f: &dyn Profile,
    params: &Params,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let bound = sharp_bound(params, form)?;
    let scan = constraint_sup_scan(form, f, params, cfg)?;
    refuse_unnormalizable(&scan)?;
    let obj = objective_lhs(form, f, params, cfg)?;
    let normalization = 1.0 / scan.sup;
    let objective = obj.value * normalization;
    let ratio = objective / bound;
    let rel_obj = if obj.value != 0.0 {
        obj.abs_error_estimate / obj.value.abs()
    } else {
        obj.abs_error_estimate * normalization / bound
    };
    let ratio_error = ratio.abs() * (rel_obj + scan.sup_abs_error / scan.sup)
        + if obj.value == 0.0 { rel_obj } else { 0.0 };
    Ok(EvalReport {
        form,
        params: *params,
        constraint_sup: scan.sup,
        constraint_argmax: scan.argmax,
        normalization,
        raw_objective: obj.value,
        objective,
        bound,
        ratio,
        ratio_error,
        exceeds_bound: ratio > 1.0 + 3.0 * ratio_error,
        diagnostics: EvalDiagnostics {
            constraint_abs_error: scan.sup_abs_error,
            objective_abs_error: obj.abs_error_estimate,
            objective_converged: obj.converged,
            exact_steps_used: cfg.exact_steps && f.is_pure_step() && form == Form::Two,
            scan_t_min: scan.t_min,
            scan_t_max: scan.t_max,
            scan_points: cfg.scan.points,
        },
    })
}
