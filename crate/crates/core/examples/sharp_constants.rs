//! Sharp constants for each formulation, with the Beta-function cross-check.
//!
//! cargo run --example sharp_constants

use intineq::special_values::{beta_product, sharp_bound, sharp_bound_via_beta};
use intineq::{Form, Params};

fn main() -> intineq::Result<()> {
    println!(
        "{:>6} {:>3} {:>8} {:>20} {:>20} {:>10}",
        "lambda", "n", "form", "product", "via Beta", "rel diff"
    );
    for lambda in [0.5, 1.0, 2.0, 3.0] {
        for n in [2, 3, 5] {
            let p = Params::from_lambda(lambda, n)?;
            for form in Form::ALL.into_iter().filter(|&f| p.admits(f)) {
                let a = sharp_bound(&p, form)?;
                let b = sharp_bound_via_beta(&p, form)?;
                println!(
                    "{lambda:>6} {n:>3} {form:>8} {a:>20.15} {b:>20.15} {:>10.1e}",
                    (a - b).abs() / a
                );
            }
        }
    }
    println!("B(1, 2) = {}", beta_product(1.0, 2)?);
    Ok(())
}
