//! Walk one random density through all three formulations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use intineq::function_models::sampling::{random_monotone_grid, RandomGridSpec};
use intineq::functionals::EvalConfig;
use intineq::transforms::{
    byparts_constraint_identity, byparts_objective_identity, cross_form_ratio_check,
    lift_s_to_bundle,
};
use intineq::Params;

fn main() -> intineq::Result<()> {
    let p = Params::from_lambda(2.0, 3)?;
    let cfg = EvalConfig::default();
    let s = random_monotone_grid(
        &mut ChaCha8Rng::seed_from_u64(5),
        &RandomGridSpec::default(),
    );
    let bundle = lift_s_to_bundle(&s, &p)?;
    for t in [0.5, 1.0, 2.0] {
        let (direct, parts) = byparts_constraint_identity(&bundle, t, &cfg)?;
        println!("constraint at t={t}: h side {direct:.12}, q side {parts:.12}");
    }
    let (direct, parts) = byparts_objective_identity(&bundle, &cfg)?;
    println!("objective: h side {direct:.12}, q side {parts:.12}");
    let cross = cross_form_ratio_check(&bundle, &cfg)?;
    for r in &cross.ratios {
        println!("{}: ratio {:?}", r.form, r.ratio);
    }
    println!("largest gap between forms {:.1e}", cross.max_gap);
    Ok(())
}
