//! Post-hoc feasibility certificate for step functions.
//!
//! The LP only enforces the constraint on a finite grid. For a step
//! function `h = Σ Δᵢ[t ≥ τᵢ]` the constraint side
//! `L(t) = Σ Δᵢ K(min(τᵢ/t, 1))` is continuous and non-decreasing in `t`,
//! which makes three finite checks sufficient for the whole half-line:
//!
//! * head: `L(t) = 0` for `t < τ₁`, and the check grid starts at or below `τ₁`;
//! * interval: `L(c_{k+1}) ≤ c_k^α` for consecutive check points, since on
//!   `[c_k, c_{k+1}]` we have `L(t) ≤ L(c_{k+1})` and `t^α ≥ c_k^α`;
//! * tail: beyond `T`, `K(a) ≤ ln(1/a) − Σ_{j<n} (1−a_max)^j/j` bounds
//!   `L(t) ≤ h_∞ (ln(t/τ_g) − c_T)` with `τ_g` the `Δ`-weighted geometric
//!   mean of the jumps; this stays below `t^α` for all `t ≥ T` when it does
//!   at `T` and `α T^α ≥ h_∞`.

use serde::{Deserialize, Serialize};

use super::StepIncrements;
use crate::functionals::step_constraint;
use crate::special_values::Params;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Smallest relative slack `(allowed − actual)/allowed` seen.
    pub margin: f64,
    pub violating_t: Option<f64>,
}

impl CheckOutcome {
    fn pass_trivially() -> Self {
        Self {
            passed: true,
            margin: 1.0,
            violating_t: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub passed: bool,
    pub head: CheckOutcome,
    pub interval: CheckOutcome,
    pub tail: CheckOutcome,
    pub t_con: f64,
    pub check_points: usize,
    /// Smallest `γ ≥ 0` such that `Δ/γ` passes the interval and tail checks.
    pub required_shrink: f64,
    pub failure: Option<String>,
}

impl Certificate {
    pub(crate) fn not_attempted(reason: impl Into<String>, t_con: f64) -> Self {
        let skipped = CheckOutcome {
            passed: false,
            margin: f64::NAN,
            violating_t: None,
        };
        Self {
            passed: false,
            head: skipped.clone(),
            interval: skipped.clone(),
            tail: skipped,
            t_con,
            check_points: 0,
            required_shrink: f64::NAN,
            failure: Some(reason.into()),
        }
    }
}

/// Inserts `density − 1` log-spaced points into every gap of `grid` and
/// extends it geometrically up to `t_con`.
pub fn check_grid(grid: &[f64], density: usize, t_con: f64) -> Vec<f64> {
    let density = density.max(1);
    let mut out = Vec::with_capacity(grid.len() * density + 1);
    for w in grid.windows(2) {
        let (lo, hi) = (w[0].ln(), w[1].ln());
        for s in 0..density {
            out.push((lo + (hi - lo) * s as f64 / density as f64).exp());
        }
    }
    if let Some(&last) = grid.last() {
        out.push(last);
    }
    if let (Some(&last), true) = (out.last(), out.len() >= 2) {
        let ratio = last / out[out.len() - 2];
        let mut t = last;
        while t < t_con {
            t = (t * ratio).min(t_con);
            out.push(t);
        }
    }
    out
}

/// Runs the three checks on `steps` over `grid` (already at check density).
pub fn certify_steps(
    steps: &StepIncrements,
    params: &Params,
    grid: &[f64],
    t_con: f64,
) -> Certificate {
    let alpha = params.alpha();
    let n = params.n();
    let jumps: Vec<(f64, f64)> = steps.jumps_nonzero();
    let Some(&(tau_first, _)) = jumps.first() else {
        return Certificate {
            passed: true,
            head: CheckOutcome::pass_trivially(),
            interval: CheckOutcome::pass_trivially(),
            tail: CheckOutcome::pass_trivially(),
            t_con,
            check_points: grid.len(),
            required_shrink: 0.0,
            failure: None,
        };
    };
    let tau_last = jumps.last().unwrap().0;

    let head = match grid.first() {
        Some(&g0) if g0 <= tau_first => {
            let leak = grid
                .iter()
                .take_while(|&&t| t < tau_first)
                .find(|&&t| step_constraint(&jumps, t, n) != 0.0);
            CheckOutcome {
                passed: leak.is_none(),
                margin: if leak.is_none() { 1.0 } else { -1.0 },
                violating_t: leak.copied(),
            }
        }
        _ => CheckOutcome {
            passed: false,
            margin: -1.0,
            violating_t: Some(tau_first),
        },
    };

    let mut interval = CheckOutcome::pass_trivially();
    let mut interval_shrink = 0.0f64;
    let lhs: Vec<f64> = grid
        .iter()
        .map(|&t| step_constraint(&jumps, t, n))
        .collect();
    for k in 0..grid.len().saturating_sub(1) {
        if grid[k] >= t_con {
            break;
        }
        let allowed = grid[k].powf(alpha);
        let actual = lhs[k + 1];
        interval_shrink = interval_shrink.max(actual / allowed);
        let margin = (allowed - actual) / allowed;
        if margin < interval.margin {
            interval.margin = margin;
            if margin < 0.0 {
                interval.passed = false;
                interval.violating_t = Some(grid[k + 1]);
            }
        }
    }
    if grid.last().is_some_and(|&g| g < t_con) {
        interval.passed = false;
        interval.violating_t = Some(t_con);
    }

    let h_inf: f64 = jumps.iter().map(|&(_, d)| d).sum();
    let log_tau_g = jumps.iter().map(|&(tau, d)| d * tau.ln()).sum::<f64>() / h_inf;
    let tail = if t_con < tau_last {
        interval_shrink = f64::INFINITY;
        CheckOutcome {
            passed: false,
            margin: -1.0,
            violating_t: Some(tau_last),
        }
    } else {
        let r = 1.0 - tau_last / t_con;
        let mut c_t = 0.0;
        let mut pow = 1.0;
        for j in 1..n {
            pow *= r;
            c_t += pow / f64::from(j);
        }
        let allowed = t_con.powf(alpha);
        let growth_bound = h_inf * ((t_con.ln() - log_tau_g) - c_t);
        let slope_bound = h_inf / alpha;
        let worst = growth_bound.max(slope_bound);
        interval_shrink = interval_shrink.max(worst / allowed);
        let margin = (allowed - worst) / allowed;
        CheckOutcome {
            passed: margin >= 0.0,
            margin,
            violating_t: (margin < 0.0).then_some(t_con),
        }
    };

    let passed = head.passed && interval.passed && tail.passed;
    let failure = (!passed).then(|| {
        let mut why = Vec::new();
        if !head.passed {
            why.push("head");
        }
        if !interval.passed {
            why.push("interval");
        }
        if !tail.passed {
            why.push("tail");
        }
        format!(
            "{} check failed; densify the grids or extend T_con and re-solve",
            why.join(" and ")
        )
    });
    Certificate {
        passed,
        head,
        interval,
        tail,
        t_con,
        check_points: grid.len(),
        required_shrink: interval_shrink,
        failure,
    }
}
