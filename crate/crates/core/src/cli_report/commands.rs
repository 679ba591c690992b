use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    check_output_path, human, plot, positive, report_json, EquivalenceArgs, EvaluateArgs,
    FunctionClass, OutputFormat, SearchArgs, SharpBoundArgs, SweepArgs, VerifyArgs,
    EXIT_CERTIFICATE, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_OK,
};
use crate::error::{Error, Result};
use crate::function_models::sampling::{random_monotone_grid, RandomGridSpec};
use crate::function_models::{
    extremal, read_function_csv, write_atomic, write_function_csv, GridFunction, Interpolation,
    Profile, ValueClass,
};
use crate::functionals::{constraint_sup_scan, evaluate, objective_lhs, EvalConfig, EvalReport};
use crate::lp_search::{
    search_ratio, CandidateCheck, Certificate, LpStatus, SearchConfig, SearchOutcome,
};
use crate::special_values::{sharp_bound, sharp_bound_via_beta, Form, Params};
use crate::transforms::{
    byparts_constraint_identity, byparts_objective_identity, cross_form_ratio_check,
    extremal_bundle, lift_s_to_bundle, require_q, CrossFormRatios, FormBundle,
};

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn line(out: &mut dyn Write, text: impl AsRef<str>) -> Result<()> {
    emit(out, None, &format!("{}\n", text.as_ref()))
}

#[derive(Serialize)]
struct SharpBoundBody {
    form: Form,
    params: Params,
    bound: f64,
    bound_via_beta: f64,
    relative_difference: f64,
}

/// Prints the sharp constant and its Beta-function cross-check.
pub fn cmd_sharp_bound(args: &SharpBoundArgs, out: &mut dyn Write) -> Result<i32> {
    let params = args.params.params()?;
    let bound = sharp_bound(&params, args.form)?;
    let beta = sharp_bound_via_beta(&params, args.form)?;
    let rel = (bound - beta).abs() / bound;
    match args.format {
        OutputFormat::Text => {
            line(out, format!("{bound:.15}"))?;
            line(
                out,
                format!("beta form {beta:.15} (relative difference {rel:.1e})"),
            )?;
        }
        OutputFormat::Json => {
            let body = SharpBoundBody {
                form: args.form,
                params,
                bound,
                bound_via_beta: beta,
                relative_difference: rel,
            };
            emit(out, None, &report_json("sharp-bound", args, body)?)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalCheck {
    pub form: Form,
    pub skipped: Option<String>,
    pub constraint_sup: Option<f64>,
    /// Largest `|ratio − 1|` over the constraint scan.
    pub constraint_max_deviation: Option<f64>,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub objective_relative_deviation: Option<f64>,
    pub objective_abs_error: Option<f64>,
    pub passed: bool,
}

/// Equality checks for the extremal of every admissible formulation.
pub fn extremal_checks(params: &Params, tol: f64, cfg: &EvalConfig) -> Result<Vec<ExtremalCheck>> {
    Form::ALL
        .iter()
        .map(|&form| {
            if let Err(e) = params.check_form(form) {
                return Ok(ExtremalCheck {
                    form,
                    skipped: Some(e.to_string()),
                    constraint_sup: None,
                    constraint_max_deviation: None,
                    objective: None,
                    bound: None,
                    objective_relative_deviation: None,
                    objective_abs_error: None,
                    passed: true,
                });
            }
            let f = extremal(params, form)?;
            let scan = constraint_sup_scan(form, &f, params, cfg)?;
            let dev = scan.max_deviation_from(1.0).max((scan.sup - 1.0).abs());
            let obj = objective_lhs(form, &f, params, cfg)?;
            let bound = sharp_bound(params, form)?;
            let obj_dev = (obj.value - bound).abs() / bound;
            Ok(ExtremalCheck {
                form,
                skipped: None,
                constraint_sup: Some(scan.sup),
                constraint_max_deviation: Some(dev),
                objective: Some(obj.value),
                bound: Some(bound),
                objective_relative_deviation: Some(obj_dev),
                objective_abs_error: Some(obj.abs_error_estimate),
                passed: dev <= tol && obj_dev <= tol,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct VerifyBody {
    params: Params,
    checks: Vec<ExtremalCheck>,
    worst_deviation: f64,
    passed: bool,
    quad_rel_tol: f64,
    quad_semi_infinite_rel_tol: f64,
}

pub fn cmd_verify_extremal(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    positive("tol", args.tol)?;
    let params = args.params.params()?;
    if let Some(p) = &args.out {
        check_output_path(p)?;
    }
    if !Form::ALL.iter().any(|&f| params.admits(f)) {
        return Err(Error::Domain(format!(
            "no formulation admits lambda = {}",
            params.lambda()
        )));
    }
    let cfg = EvalConfig::default();
    let checks = extremal_checks(&params, args.tol, &cfg)?;
    let worst = checks
        .iter()
        .flat_map(|c| [c.constraint_max_deviation, c.objective_relative_deviation])
        .flatten()
        .fold(0.0, f64::max);
    let passed = checks.iter().all(|c| c.passed);
    let body = VerifyBody {
        params,
        checks,
        worst_deviation: worst,
        passed,
        quad_rel_tol: cfg.quad.rel_tol,
        quad_semi_infinite_rel_tol: cfg.quad_semi_infinite.rel_tol,
    };
    emit(
        out,
        args.out.as_deref(),
        &report_json("verify-extremal", args, body)?,
    )?;
    if passed {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "worst deviation {worst:.3e} exceeds tolerance {:.3e}",
            args.tol
        );
        Ok(EXIT_CHECK_FAILED)
    }
}

#[derive(Serialize)]
struct ErrorBudget {
    ratio_error: f64,
    constraint_abs_error: f64,
    objective_abs_error: f64,
    objective_converged: bool,
    quad_rel_tol: f64,
    quad_semi_infinite_rel_tol: f64,
}

#[derive(Serialize)]
struct ScanInfo {
    t_min: f64,
    t_max: f64,
    points: usize,
    exact_steps_used: bool,
}

#[derive(Serialize)]
struct EvaluateBody {
    form: Form,
    params: Params,
    constraint_sup: f64,
    argmax: f64,
    normalization: f64,
    raw_objective: f64,
    objective: f64,
    bound: f64,
    ratio: f64,
    exceeds_bound: bool,
    errors: ErrorBudget,
    scan: ScanInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<Certificate>,
}

impl EvaluateBody {
    fn new(r: &EvalReport, cfg: &EvalConfig) -> Self {
        Self {
            form: r.form,
            params: r.params,
            constraint_sup: r.constraint_sup,
            argmax: r.constraint_argmax,
            normalization: r.normalization,
            raw_objective: r.raw_objective,
            objective: r.objective,
            bound: r.bound,
            ratio: r.ratio,
            exceeds_bound: r.exceeds_bound,
            errors: ErrorBudget {
                ratio_error: r.ratio_error,
                constraint_abs_error: r.diagnostics.constraint_abs_error,
                objective_abs_error: r.diagnostics.objective_abs_error,
                objective_converged: r.diagnostics.objective_converged,
                quad_rel_tol: cfg.quad.rel_tol,
                quad_semi_infinite_rel_tol: cfg.quad_semi_infinite.rel_tol,
            },
            scan: ScanInfo {
                t_min: r.diagnostics.scan_t_min,
                t_max: r.diagnostics.scan_t_max,
                points: r.diagnostics.scan_points,
                exact_steps_used: r.diagnostics.exact_steps_used,
            },
            certificate: None,
        }
    }
}

fn read_grid(
    path: &Path,
    interp: Interpolation,
    tail: crate::function_models::Tail,
    class: ValueClass,
) -> Result<GridFunction> {
    let file = read_function_csv(path)?;
    GridFunction::new(file.knots, file.values, interp, tail, class)
}

/// Evaluates a tabulated function in the formulation matching its class.
pub fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<i32> {
    let params = args.params.params()?;
    for p in [&args.plot, &args.svg, &args.out].into_iter().flatten() {
        check_output_path(p)?;
    }
    let cfg = args.scan.eval_config()?;
    let value_class = match args.class {
        FunctionClass::Q => ValueClass::Nonnegative,
        _ => ValueClass::Monotone,
    };
    let grid = read_grid(
        &args.function.file,
        args.function.interp.into(),
        args.function.tail,
        value_class,
    )?;
    let form = args.form.unwrap_or(match args.class {
        FunctionClass::S => Form::One,
        FunctionClass::H => Form::Two,
        FunctionClass::Q => Form::Three,
    });
    let bundle;
    let subject: &dyn Profile = match (args.class, form) {
        (FunctionClass::S, _) => {
            bundle = lift_s_to_bundle(&grid, &params)?;
            match form {
                Form::One => bundle.big_s.as_ref(),
                Form::Two => &bundle.h,
                Form::Three => require_q(&bundle)?,
            }
        }
        (FunctionClass::H, Form::Two) | (FunctionClass::Q, Form::Three) => &grid,
        (class, form) => {
            return Err(Error::Config(format!(
                "class {class:?} cannot be evaluated in {form}; use class s to move between formulations"
            )))
        }
    };
    let report = evaluate(form, subject, &params, &cfg)?;
    if args.plot.is_some() || args.svg.is_some() {
        let scan = constraint_sup_scan(form, subject, &params, &cfg)?;
        if let Some(p) = &args.plot {
            write_atomic(p, &plot::xy_csv(["t", "ratio"], &scan.samples)?)?;
        }
        if let Some(p) = &args.svg {
            let title = format!("{form} constraint ratio");
            write_atomic(
                p,
                plot::svg_line_plot(&scan.samples, &title, true).as_bytes(),
            )?;
        }
    }
    let body = EvaluateBody::new(&report, &cfg);
    match args.format {
        OutputFormat::Json => emit(
            out,
            args.out.as_deref(),
            &report_json("evaluate", args, body)?,
        )?,
        OutputFormat::Text => {
            let text = format!(
                "form {form}\nconstraint sup {} at t = {}\nobjective {}\nbound {}\nratio {} ± {}\n",
                human(report.constraint_sup),
                human(report.constraint_argmax),
                human(report.objective),
                human(report.bound),
                human(report.ratio),
                human(report.ratio_error),
            );
            emit(out, args.out.as_deref(), &text)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ByParts {
    /// `(t, direct, by parts)`.
    constraint: Vec<(f64, f64, f64)>,
    objective: (f64, f64),
}

#[derive(Serialize)]
struct EquivalenceBody {
    params: Params,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<(Vec<f64>, Vec<f64>)>,
    byparts: ByParts,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_form: Option<CrossFormRatios>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refused: Option<String>,
    passed: bool,
}

pub(crate) fn smooth_random_density(seed: u64) -> GridFunction {
    let spec = RandomGridSpec {
        jump_start_probability: 0.0,
        ..RandomGridSpec::default()
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    random_monotone_grid(&mut rng, &spec)
}

/// Reads one density in all three formulations.
pub fn cmd_equivalence(args: &EquivalenceArgs, out: &mut dyn Write) -> Result<i32> {
    positive("tol", args.tol)?;
    let params = args.params.params()?;
    if let Some(p) = &args.out {
        check_output_path(p)?;
    }
    let cfg = args.scan.eval_config()?;
    let (bundle, density): (FormBundle, _) = if args.source.extremal {
        (extremal_bundle(&params)?, None)
    } else if let Some(seed) = args.source.seed {
        let s = smooth_random_density(seed);
        let dump = (s.knots().to_vec(), s.values().to_vec());
        (lift_s_to_bundle(&s, &params)?, Some(dump))
    } else if let Some(path) = &args.source.file {
        let s = read_grid(path, args.interp.into(), args.tail, ValueClass::Monotone)?;
        (lift_s_to_bundle(&s, &params)?, None)
    } else {
        return Err(Error::Config(
            "give one of --file, --extremal, --seed".into(),
        ));
    };

    let mut constraint = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let (d, b) = byparts_constraint_identity(&bundle, t, &cfg)?;
        constraint.push((t, d, b));
    }
    let byparts = ByParts {
        constraint,
        objective: byparts_objective_identity(&bundle, &cfg)?,
    };
    let (cross_form, refused) = match cross_form_ratio_check(&bundle, &cfg) {
        Ok(c) => (Some(c), None),
        Err(e @ Error::Normalization(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let passed = cross_form.as_ref().is_some_and(|c| c.max_gap < args.tol);
    let body = EquivalenceBody {
        params,
        density,
        byparts,
        cross_form,
        refused,
        passed,
    };
    match args.format {
        OutputFormat::Json => emit(
            out,
            args.out.as_deref(),
            &report_json("equivalence", args, &body)?,
        )?,
        OutputFormat::Text => {
            let mut text = String::new();
            if let Some(c) = &body.cross_form {
                for r in &c.ratios {
                    match (r.ratio, &r.skipped) {
                        (Some(v), _) => text.push_str(&format!("{} ratio {}\n", r.form, human(v))),
                        (None, Some(why)) => text.push_str(&format!("{} skipped: {why}\n", r.form)),
                        _ => {}
                    }
                }
                text.push_str(&format!("max gap {}\n", human(c.max_gap)));
            }
            if let Some(why) = &body.refused {
                text.push_str(&format!("refused: {why}\n"));
            }
            emit(out, args.out.as_deref(), &text)?;
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct LpInfo {
    status: LpStatus,
    iterations: usize,
    objective_value: f64,
    active_constraints: usize,
}

#[derive(Serialize)]
struct SearchBody<'a> {
    params: Params,
    form: Form,
    bound: f64,
    ratio: f64,
    ratio_error: f64,
    raw_ratio: f64,
    shrink: f64,
    objective: f64,
    certified: bool,
    lp: LpInfo,
    certificate: &'a Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidate: Option<CandidateCheck>,
}

/// One line of a sweep summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub n: u32,
    pub lambda: f64,
    pub m: usize,
    pub j: usize,
    pub t_con: f64,
    pub status: String,
    pub certified: bool,
    pub ratio: f64,
    pub ratio_error: f64,
    pub raw_ratio: f64,
    pub shrink: f64,
    pub bound: f64,
    pub iterations: usize,
    pub failure: String,
}

fn status_name(s: LpStatus) -> String {
    match s {
        LpStatus::Optimal => "OPTIMAL",
        LpStatus::Unbounded => "UNBOUNDED",
        LpStatus::IterationLimit => "ITERATION_LIMIT",
    }
    .into()
}

impl SweepRow {
    fn from_outcome(o: &SearchOutcome) -> Self {
        Self {
            alpha: o.params.alpha(),
            n: o.params.n(),
            lambda: o.params.lambda(),
            m: o.config.tau.points,
            j: o.config.t.points,
            t_con: o.config.t_con,
            status: status_name(o.solution.status),
            certified: o.is_certified(),
            ratio: o.ratio,
            ratio_error: o.ratio_error,
            raw_ratio: o.raw_ratio,
            shrink: o.shrink,
            bound: o.bound,
            iterations: o.solution.iterations,
            failure: o.certificate.failure.clone().unwrap_or_default(),
        }
    }

    fn failed(alpha: f64, n: u32, cfg: &SearchConfig, e: &Error) -> Self {
        Self {
            alpha,
            n,
            lambda: 2.0 * alpha,
            m: cfg.tau.points,
            j: cfg.t.points,
            t_con: cfg.t_con,
            status: "ERROR".into(),
            certified: false,
            ratio: f64::NAN,
            ratio_error: f64::NAN,
            raw_ratio: f64::NAN,
            shrink: f64::NAN,
            bound: f64::NAN,
            iterations: 0,
            failure: e.to_string(),
        }
    }
}

fn rows_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Config(format!("csv encoding failed: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::Config(format!("csv encoding failed: {e}")))
}

fn candidate_check(
    outcome: &SearchOutcome,
    params: &Params,
    cfg: &SearchConfig,
) -> Result<Option<CandidateCheck>> {
    if !outcome.exceeds_bound() {
        return Ok(None);
    }
    let fine = search_ratio(params, &cfg.doubled())?;
    Ok(Some(CandidateCheck {
        coarse_ratio: outcome.ratio,
        doubled_ratio: fine.ratio,
        doubled_certified: fine.is_certified(),
        confirmed: fine.exceeds_bound(),
    }))
}

/// Solves and certifies the LP; a failed certificate exits with code 3.
pub fn cmd_search(args: &SearchArgs, out: &mut dyn Write) -> Result<i32> {
    let params = args.params.params()?;
    let cfg = args.grid.search_config()?;
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let outcome = search_ratio(&params, &cfg)?;
    let candidate = candidate_check(&outcome, &params, &cfg)?;
    let body = SearchBody {
        params,
        form: Form::Two,
        bound: outcome.bound,
        ratio: outcome.ratio,
        ratio_error: outcome.ratio_error,
        raw_ratio: outcome.raw_ratio,
        shrink: outcome.shrink,
        objective: outcome.ratio * outcome.bound,
        certified: outcome.is_certified(),
        lp: LpInfo {
            status: outcome.solution.status,
            iterations: outcome.solution.iterations,
            objective_value: outcome.solution.objective_value,
            active_constraints: outcome.solution.active.len(),
        },
        certificate: &outcome.certificate,
        candidate,
    };

    if let Some(dir) = &args.out_dir {
        let steps = &outcome.certified;
        write_function_csv(
            &dir.join("h_profile.csv"),
            steps.knots(),
            steps.cumulative(),
        )?;
        write_atomic(
            &dir.join("certificate.json"),
            report_json("search", args, &outcome.certificate)?.as_bytes(),
        )?;
        write_atomic(
            &dir.join("summary.csv"),
            &rows_csv(&[SweepRow::from_outcome(&outcome)])?,
        )?;
        if args.svg {
            let pts = plot::staircase(steps.knots(), steps.cumulative());
            write_atomic(
                &dir.join("h_profile.svg"),
                plot::svg_line_plot(&pts, "certified h", true).as_bytes(),
            )?;
        }
    }

    match args.format {
        OutputFormat::Json => emit(out, None, &report_json("search", args, &body)?)?,
        OutputFormat::Text => {
            let mut text = format!(
                "certified ratio {} ± {} (LP ratio {}, shrink {})\n",
                human(body.ratio),
                human(body.ratio_error),
                human(body.raw_ratio),
                human(body.shrink)
            );
            if let Some(why) = &outcome.certificate.failure {
                text.push_str(&format!("certificate failed: {why}\n"));
            }
            emit(out, None, &text)?;
        }
    }
    if outcome.is_certified() {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "certificate failed: {}",
            outcome
                .certificate
                .failure
                .as_deref()
                .unwrap_or("unknown reason")
        );
        Ok(EXIT_CERTIFICATE)
    }
}

/// Runs the search for every `(α, n)` cell in parallel. Errors in one
/// cell are recorded in its row and do not stop the others.
pub fn sweep_rows(alphas: &[f64], ns: &[u32], cfg: &SearchConfig) -> Vec<SweepRow> {
    let cells: Vec<(f64, u32)> = alphas
        .iter()
        .flat_map(|&a| ns.iter().map(move |&n| (a, n)))
        .collect();
    cells
        .par_iter()
        .map(|&(alpha, n)| {
            Params::from_alpha(alpha, n)
                .and_then(|p| search_ratio(&p, cfg))
                .map(|o| SweepRow::from_outcome(&o))
                .unwrap_or_else(|e| SweepRow::failed(alpha, n, cfg, &e))
        })
        .collect()
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.grid.search_config()?;
    if let Some(p) = &args.out {
        check_output_path(p)?;
    }
    if args.alphas.is_empty() || args.ns.is_empty() {
        return Err(Error::Config(
            "sweep needs at least one alpha and one n".into(),
        ));
    }
    let rows = sweep_rows(&args.alphas, &args.ns, &cfg);
    let bytes = rows_csv(&rows)?;
    match &args.out {
        Some(p) => {
            write_atomic(p, &bytes)?;
            line(out, format!("wrote {} rows to {}", rows.len(), p.display()))?;
        }
        None => emit(out, None, &String::from_utf8_lossy(&bytes))?,
    }
    if rows.iter().any(|r| r.status == "ERROR") {
        return Ok(EXIT_INPUT);
    }
    Ok(if rows.iter().all(|r| r.certified) {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    })
}
