//! Exact LP over increasing step functions, then a certificate that the
//! shrunken optimum satisfies the constraint for every t.
//!
//! cargo run --release --example lp_counterexample_search -- 2 3

use intineq::functionals::EvalConfig;
use intineq::lp_search::{confirm_candidate, search_ratio, SearchConfig};
use intineq::transforms::{cross_form_ratio_check, density_from_steps, lift_s_to_bundle};
use intineq::Params;

fn main() -> intineq::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<f64>().expect("numeric argument"));
    let alpha = args.next().unwrap_or(1.0);
    let n = args.next().unwrap_or(2.0) as u32;
    let p = Params::from_alpha(alpha, n)?;
    let cfg = SearchConfig::default();
    let out = search_ratio(&p, &cfg)?;
    println!(
        "alpha={alpha} n={n}: LP {:?} after {} iterations, raw ratio {:.6}, shrink {:.6}",
        out.solution.status, out.solution.iterations, out.raw_ratio, out.shrink
    );
    if !out.is_certified() {
        println!("certificate failed: {:?}", out.certificate.failure);
        return Ok(());
    }
    println!(
        "certified ratio {:.9} +- {:.1e}",
        out.ratio, out.ratio_error
    );
    if out.exceeds_bound() {
        let check = confirm_candidate(&p, &cfg)?;
        println!(
            "above the bound; on doubled grids {:.9} (certified: {}), candidate confirmed: {}",
            check.doubled_ratio, check.doubled_certified, check.confirmed
        );
    }
    // The same step function seen from the other formulations. These ratios
    // are normalized by the scanned sup, not by the certified shrink.
    let bundle = lift_s_to_bundle(&density_from_steps(&out.certified, &p)?, &p)?;
    let mut dense = EvalConfig::default();
    dense.scan.points = 4000;
    for r in cross_form_ratio_check(&bundle, &dense)?.ratios {
        match r.ratio {
            Some(v) => println!("{}: {v:.9}", r.form),
            None => println!("{}: skipped", r.form),
        }
    }
    Ok(())
}
