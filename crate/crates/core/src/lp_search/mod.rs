//! Counterexample search in `FORM2` coordinates.
//!
//! Over increasing step functions `h = Σ Δᵢ[t ≥ τᵢ]` both sides reduce to
//! finite sums: the constraint at `t` is `Σ Δᵢ K(min(τᵢ/t, 1))` and the
//! objective is `Σ Δᵢ Ψ(τᵢ)`. Sampling the constraint at `t₁ < … < t_J`
//! turns the extremal problem into a linear program in `Δ ≥ 0`. The LP
//! optimum is then shrunk onto the continuum-feasible set using the
//! certificate in [`certificate`], so every reported ratio belongs to a
//! function that provably satisfies the constraint for all `t ≥ 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_models::Profile;
use crate::special_values::{kernel_k_unchecked, kernel_psi_unchecked, sharp_bound, Form, Params};

pub mod certificate;
pub mod simplex;

pub use certificate::{certify_steps, check_grid, Certificate, CheckOutcome};
pub use simplex::LpStatus;

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (points - 1) as f64;
            let mut g: Vec<f64> = (0..points).map(|i| (a + step * i as f64).exp()).collect();
            g[0] = lo;
            g[points - 1] = hi;
            g
        }
    }
}

/// Inserts the geometric midpoint into every gap: `m` points become
/// `2m − 1`, and the old points are kept bit for bit.
pub fn refine_grid(grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        out.push(w[0]);
        out.push((w[0] * w[1]).sqrt());
    }
    out.extend(grid.last());
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        log_grid(self.min, self.max, self.points)
    }
}

/// `h(t) = Σ Δᵢ [t ≥ τᵢ]`, with `τᵢ > 0` increasing and `Δᵢ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepIncrements {
    knots: Vec<f64>,
    increments: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl StepIncrements {
    pub fn new(knots: Vec<f64>, increments: Vec<f64>) -> Result<Self> {
        if knots.len() != increments.len() {
            return Err(Error::Construction {
                index: knots.len().min(increments.len()),
                reason: "knot and increment counts differ".into(),
            });
        }
        for (i, (&k, &d)) in knots.iter().zip(&increments).enumerate() {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Construction {
                    index: i,
                    reason: format!("jump knot {k} must be finite and positive"),
                });
            }
            if i > 0 && k <= knots[i - 1] {
                return Err(Error::Construction {
                    index: i,
                    reason: "jump knots must be strictly increasing".into(),
                });
            }
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::Construction {
                    index: i,
                    reason: format!("increment {d} must be finite and nonnegative"),
                });
            }
        }
        let cumulative = increments
            .iter()
            .scan(0.0, |acc, &d| {
                *acc += d;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            knots,
            increments,
            cumulative,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `h` just after each jump knot.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.knots.clone(),
            self.increments.iter().map(|d| d * factor).collect(),
        )
    }

    pub(crate) fn jumps_nonzero(&self) -> Vec<(f64, f64)> {
        self.knots
            .iter()
            .zip(&self.increments)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&k, &d)| (k, d))
            .collect()
    }

    /// `Σ Δᵢ Ψ(τᵢ)`.
    pub fn objective(&self, alpha: f64) -> f64 {
        crate::functionals::step_objective(&self.jumps_nonzero(), alpha)
    }

    /// `Σ Δᵢ K(min(τᵢ/t, 1))`.
    pub fn constraint(&self, t: f64, n: u32) -> f64 {
        crate::functionals::step_constraint(&self.jumps_nonzero(), t, n)
    }
}

impl Profile for StepIncrements {
    fn value(&self, t: f64) -> f64 {
        match self.knots.partition_point(|&k| k <= t) {
            0 => 0.0,
            i => self.cumulative[i - 1],
        }
    }

    fn slope(&self, _t: f64) -> Option<f64> {
        Some(0.0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.knots.clone()
    }

    fn jumps(&self) -> Vec<(f64, f64)> {
        self.jumps_nonzero()
    }

    fn is_pure_step(&self) -> bool {
        true
    }
}

/// Dense LP data: maximize `c·Δ` subject to `A Δ ≤ b`, `Δ ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub params: Params,
    pub tau: Vec<f64>,
    pub t: Vec<f64>,
    /// `cᵢ = Ψ(τᵢ)`.
    pub objective: Vec<f64>,
    /// Row-major `J × M`, `A_{ji} = K(min(τᵢ/t_j, 1))`.
    pub matrix: Vec<f64>,
    /// `b_j = t_j^α`.
    pub rhs: Vec<f64>,
}

fn check_grid_values(name: &str, g: &[f64]) -> Result<()> {
    for (i, &x) in g.iter().enumerate() {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Config(format!(
                "{name} grid entry {i} is {x}; need finite positive values"
            )));
        }
        if i > 0 && x <= g[i - 1] {
            return Err(Error::Config(format!(
                "{name} grid is not strictly increasing at entry {i}"
            )));
        }
    }
    Ok(())
}

/// Assembles the model from closed-form kernels only.
pub fn build_model(params: &Params, tau: &[f64], t: &[f64]) -> Result<LpModel> {
    params.check_form(Form::Two)?;
    check_grid_values("tau", tau)?;
    check_grid_values("t", t)?;
    if t.is_empty() {
        return Err(Error::Config("constraint grid is empty".into()));
    }
    let alpha = params.alpha();
    let n = params.n();
    let objective: Vec<f64> = tau
        .iter()
        .map(|&x| kernel_psi_unchecked(x, alpha))
        .collect();
    let matrix: Vec<f64> = t
        .par_iter()
        .flat_map_iter(|&tj| {
            tau.iter()
                .map(move |&ti| kernel_k_unchecked((ti / tj).min(1.0), n))
        })
        .collect();
    let rhs: Vec<f64> = t.iter().map(|&tj| tj.powf(alpha)).collect();
    Ok(LpModel {
        params: *params,
        tau: tau.to_vec(),
        t: t.to_vec(),
        objective,
        matrix,
        rhs,
    })
}

pub fn build_model_from_specs(params: &Params, tau: &GridSpec, t: &GridSpec) -> Result<LpModel> {
    if !(tau.min > 0.0) || !(t.min > 0.0) {
        return Err(Error::Config(format!(
            "grid minima must be positive (tau_min = {}, t_min = {})",
            tau.min, t.min
        )));
    }
    if tau.points > 0 && tau.max < tau.min || t.max < t.min {
        return Err(Error::Config("grid maximum below minimum".into()));
    }
    build_model(params, &tau.nodes(), &t.nodes())
}

impl LpModel {
    pub fn rows(&self) -> usize {
        self.t.len()
    }

    pub fn cols(&self) -> usize {
        self.tau.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.cols() + col]
    }

    /// `A Δ`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|j| {
                self.matrix[j * self.cols()..(j + 1) * self.cols()]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Largest `(A Δ)_j / b_j`.
    pub fn max_constraint_ratio(&self, x: &[f64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| ax / b)
            .fold(0.0, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, d)| c * d).sum()
    }

    /// The `FORM2` extremal sampled as a lower step function on the `τ`
    /// grid, `Δᵢ = h(τᵢ) − h(τᵢ₋₁)`, then scaled to satisfy every grid
    /// constraint. A feasible point, hence a lower bound for the optimum.
    pub fn stepped_extremal(&self) -> Result<StepIncrements> {
        let h = crate::function_models::extremal(&self.params, Form::Two)?;
        let mut prev = 0.0;
        let increments: Vec<f64> = self
            .tau
            .iter()
            .map(|&x| {
                let v = h.value(x);
                let d = v - prev;
                prev = v;
                d
            })
            .collect();
        let worst = self.max_constraint_ratio(&increments);
        let scale = if worst > 0.0 { 1.0 / worst } else { 1.0 };
        StepIncrements::new(
            self.tau.clone(),
            increments.iter().map(|d| d * scale).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub increments: StepIncrements,
    pub objective_value: f64,
    pub status: LpStatus,
    /// Constraint rows with zero slack.
    pub active: Vec<usize>,
    pub iterations: usize,
}

/// Primal simplex from the slack basis with smallest-index pivoting.
pub fn simplex_solve(model: &LpModel, iteration_cap: usize) -> Result<LpSolution> {
    let out = simplex::solve_dense(&model.objective, &model.matrix, &model.rhs, iteration_cap);
    let increments = StepIncrements::new(model.tau.clone(), out.x)?;
    Ok(LpSolution {
        objective_value: model.objective_value(increments.increments()),
        increments,
        status: out.status,
        active: out.active_rows,
        iterations: out.iterations,
    })
}

/// Certificate for an LP solution over the model's constraint grid made
/// `density` times denser and extended to `t_con`.
pub fn certify(solution: &LpSolution, model: &LpModel, t_con: f64, density: usize) -> Certificate {
    if solution.status != LpStatus::Optimal {
        return Certificate::not_attempted(
            format!(
                "solver status {:?}; raise the iteration cap or fix the grids",
                solution.status
            ),
            t_con,
        );
    }
    let grid = check_grid(&model.t, density, t_con);
    certify_steps(&solution.increments, &model.params, &grid, t_con)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub tau: GridSpec,
    pub t: GridSpec,
    pub t_con: f64,
    pub iteration_cap: usize,
    /// Check-grid points per constraint-grid interval.
    pub check_density: usize,
    /// Largest shrink factor accepted when projecting the LP optimum onto
    /// the certified set; beyond it the grids are too coarse to be useful.
    pub max_shrink: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            tau: GridSpec {
                min: 1e-3,
                max: 1e3,
                points: 200,
            },
            t: GridSpec {
                min: 1e-4,
                max: 1e5,
                points: 400,
            },
            t_con: 1e5,
            iteration_cap: 1_000_000,
            check_density: 4,
            max_shrink: 1.25,
        }
    }
}

impl SearchConfig {
    /// Both grids refined by geometric midpoints (`m → 2m − 1`).
    pub fn doubled(&self) -> Self {
        let mut c = *self;
        c.tau.points = (2 * c.tau.points).saturating_sub(1);
        c.t.points = (2 * c.t.points).saturating_sub(1);
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub params: Params,
    pub config: SearchConfig,
    pub bound: f64,
    /// Certified objective over the sharp bound.
    pub ratio: f64,
    /// Bound on floating-point error in `ratio`.
    pub ratio_error: f64,
    /// Grid-constrained LP optimum over the sharp bound (not certified).
    pub raw_ratio: f64,
    pub shrink: f64,
    pub solution: LpSolution,
    pub certified: StepIncrements,
    pub certificate: Certificate,
}

impl SearchOutcome {
    pub fn is_certified(&self) -> bool {
        self.certificate.passed
    }

    /// Certified ratio above one beyond its error bar.
    pub fn exceeds_bound(&self) -> bool {
        self.is_certified() && self.ratio > 1.0 + self.ratio_error
    }
}

/// Builds, solves, certifies, and reports the certified ratio.
pub fn search_ratio(params: &Params, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let bound = sharp_bound(params, Form::Two)?;
    if cfg.t_con < cfg.t.max {
        return Err(Error::Config(format!(
            "T_con = {} lies below t_max = {}",
            cfg.t_con, cfg.t.max
        )));
    }
    if cfg.tau.points > 0 && cfg.t.max <= cfg.tau.max {
        return Err(Error::Config(format!(
            "constraint grid must reach beyond the jump grid (t_max = {}, tau_max = {})",
            cfg.t.max, cfg.tau.max
        )));
    }
    let model = build_model_from_specs(params, &cfg.tau, &cfg.t)?;
    let solution = simplex_solve(&model, cfg.iteration_cap)?;
    let raw_ratio = solution.objective_value / bound;

    let mut certified = solution.increments.clone();
    let mut shrink = 1.0;
    let certificate = if solution.status != LpStatus::Optimal {
        certify(&solution, &model, cfg.t_con, cfg.check_density)
    } else {
        let grid = check_grid(&model.t, cfg.check_density, cfg.t_con);
        let raw = certify_steps(&solution.increments, params, &grid, cfg.t_con);
        let gamma = raw.required_shrink;
        if !raw.head.passed || !gamma.is_finite() || gamma > cfg.max_shrink {
            let mut c = raw;
            c.passed = false;
            c.failure = Some(format!(
                "LP optimum needs shrink factor {gamma:.6} (limit {}); densify the grids or extend T_con",
                cfg.max_shrink
            ));
            c
        } else {
            if gamma > 1.0 {
                shrink = gamma * (1.0 + 1e-12);
                certified = solution.increments.scaled(1.0 / shrink)?;
            }
            certify_steps(&certified, params, &grid, cfg.t_con)
        }
    };

    let objective = certified.objective(params.alpha());
    let ratio = objective / bound;
    let terms = certified.knots().len().max(1) as f64;
    let ratio_error = 16.0 * terms * f64::EPSILON * ratio.abs();
    Ok(SearchOutcome {
        params: *params,
        config: *cfg,
        bound,
        ratio,
        ratio_error,
        raw_ratio,
        shrink,
        solution,
        certified,
        certificate,
    })
}

/// A certified ratio above one only counts once it survives one doubling
/// of both grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub coarse_ratio: f64,
    pub doubled_ratio: f64,
    pub doubled_certified: bool,
    pub confirmed: bool,
}

pub fn confirm_candidate(params: &Params, cfg: &SearchConfig) -> Result<CandidateCheck> {
    let coarse = search_ratio(params, cfg)?;
    let fine = search_ratio(params, &cfg.doubled())?;
    Ok(CandidateCheck {
        coarse_ratio: coarse.ratio,
        doubled_ratio: fine.ratio,
        doubled_certified: fine.is_certified(),
        confirmed: coarse.exceeds_bound() && fine.exceeds_bound(),
    })
}
