//! The adaptive Gauss-Kronrod integrator on a few awkward integrands.

use intineq::quadrature::{integrate_finite_with, integrate_semi_infinite_with, QuadConfig};

fn main() -> intineq::Result<()> {
    let cfg = QuadConfig::relative(1e-12);
    let r = integrate_finite_with(|x: f64| x.sqrt().ln(), 0.0, 1.0, &[], &cfg)?;
    println!(
        "int_0^1 ln sqrt(x) dx = {:.15} (exact -0.5), {} subdivisions",
        r.value, r.subdivisions
    );
    let r = integrate_finite_with(
        |x: f64| if x < 0.3 { 1.0 } else { 2.0 },
        0.0,
        1.0,
        &[0.3],
        &cfg,
    )?;
    println!("step with a declared break = {:.15} (exact 1.7)", r.value);
    let r = integrate_semi_infinite_with(|t: f64| 1.0 / (1.0 + t * t), 0.0, &[], &cfg)?;
    println!(
        "int_0^inf dt/(1+t^2) = {:.15} (pi/2 = {:.15})",
        r.value,
        std::f64::consts::FRAC_PI_2
    );
    Ok(())
}
