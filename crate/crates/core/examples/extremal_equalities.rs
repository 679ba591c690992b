//! The power-law extremals attain both the constraint and the bound.

use intineq::function_models::extremal;
use intineq::functionals::{constraint_sup_scan, evaluate, EvalConfig};
use intineq::{Form, Params};

fn main() -> intineq::Result<()> {
    let cfg = EvalConfig::default();
    for (lambda, n) in [(1.0, 2), (2.0, 3), (3.0, 4)] {
        let p = Params::from_lambda(lambda, n)?;
        for form in Form::ALL.into_iter().filter(|&f| p.admits(f)) {
            let f = extremal(&p, form)?;
            let scan = constraint_sup_scan(form, &f, &p, &cfg)?;
            let r = evaluate(form, &f, &p, &cfg)?;
            println!(
                "lambda={lambda} n={n} {form}: {f:?}  max|ratio-1| over scan {:.1e}  objective/bound {:.12}",
                scan.max_deviation_from(1.0),
                r.ratio
            );
        }
    }
    Ok(())
}
