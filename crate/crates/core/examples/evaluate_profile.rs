//! Evaluate a tabulated test function, from a CSV file when one is given.
//!
//! cargo run --example evaluate_profile -- [path/to/h.csv]

use intineq::function_models::{make_monotone_grid, read_function_csv};
use intineq::functionals::{evaluate, EvalConfig};
use intineq::{Form, Interpolation, Params};

fn main() -> intineq::Result<()> {
    let p = Params::from_alpha(1.0, 3)?;
    let h = match std::env::args_os().nth(1) {
        Some(path) => {
            let file = read_function_csv(path.as_ref())?;
            make_monotone_grid(file.knots, file.values, Interpolation::Linear)?
        }
        // A saturating ramp.
        None => make_monotone_grid(
            vec![0.0, 0.5, 1.0, 4.0],
            vec![0.0, 0.4, 1.0, 1.5],
            Interpolation::Linear,
        )?,
    };
    let r = evaluate(Form::Two, &h, &p, &EvalConfig::default())?;
    println!(
        "constraint sup {:.9} at t = {:.4}",
        r.constraint_sup, r.constraint_argmax
    );
    println!(
        "normalized objective {:.9}, bound {:.9}",
        r.objective, r.bound
    );
    println!("ratio {:.9} +- {:.1e}", r.ratio, r.ratio_error);
    Ok(())
}
