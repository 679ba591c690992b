use super::grid::{GridFunction, Interpolation, Tail};
use super::Profile;
use crate::error::{Error, Result};

/// `S(x) = ∫₀ˣ s(t)/t dt` for an increasing density `s ≥ 0`.
///
/// `S` is increasing with `S(0) = 0`, and `x ↦ S(eˣ)` has derivative
/// `s(eˣ)`, so it is convex: every increasing, log-convex `S` vanishing at
/// the origin arises this way.
#[derive(Clone, Debug)]
pub struct LogConvexS {
    density: GridFunction,
    /// `S` at each knot of the density.
    cumulative: Vec<f64>,
}

/// Builds `S` from its density, evaluating every segment in closed form:
/// on a linear piece `s = v + m(t − k)` the integral of `s/t` is
/// `v·ln(x/k) + m·k·((x/k − 1) − ln(x/k))`.
pub fn log_convex_from_density(s: &GridFunction) -> Result<LogConvexS> {
    if !s.is_monotone() {
        return Err(Error::Construction {
            index: 0,
            reason: "density s must be flagged monotone".into(),
        });
    }
    if s.value_at_origin() > 0.0 {
        return Err(Error::Divergence(format!(
            "s(0+) = {} > 0 makes s(t)/t non-integrable at the origin",
            s.value_at_origin()
        )));
    }
    let knots = s.knots();
    let mut cumulative = Vec::with_capacity(knots.len());
    cumulative.push(0.0);
    for i in 0..knots.len() - 1 {
        let next = cumulative[i] + segment_integral(s, i, knots[i + 1]);
        cumulative.push(next);
    }
    let out = LogConvexS {
        density: s.clone(),
        cumulative,
    };
    out.verify_log_convexity(&out.default_check_grid())?;
    Ok(out)
}

/// `∫_{kᵢ}^x s(t)/t dt` for `x` inside segment `i` (or its tail).
fn segment_integral(s: &GridFunction, i: usize, x: f64) -> f64 {
    let k = s.knots()[i];
    let v = s.values()[i];
    if x <= k {
        return 0.0;
    }
    if i + 1 == s.knots().len() {
        if v == 0.0 {
            return 0.0;
        }
        let log_ratio = (x / k).ln();
        return match s.tail() {
            Tail::Constant => v * log_ratio,
            Tail::Power(p) if p == 0.0 => v * log_ratio,
            Tail::Power(p) => v / p * (p * log_ratio).exp_m1(),
        };
    }
    let slope = s.segment_slope(i);
    match s.interpolation() {
        Interpolation::StepLeft => {
            if v == 0.0 {
                0.0
            } else {
                v * (x / k).ln()
            }
        }
        Interpolation::Linear => {
            if k == 0.0 {
                // v = 0 here (enforced above), so s = m·t.
                return slope * x;
            }
            let u = (x - k) / k;
            let log_ratio = u.ln_1p();
            v * log_ratio + slope * k * (u - log_ratio)
        }
    }
}

impl LogConvexS {
    pub fn density(&self) -> &GridFunction {
        &self.density
    }

    /// Log-spaced points spanning the density's knots a decade either side.
    pub fn default_check_grid(&self) -> Vec<f64> {
        let knots = self.density.knots();
        let lo = knots.iter().copied().find(|&k| k > 0.0).unwrap_or(1.0) / 10.0;
        let hi = knots.last().copied().unwrap_or(1.0).max(lo * 100.0) * 10.0;
        crate::lp_search::log_grid(lo, hi, 400)
    }

    /// Nonnegativity of the second differences of `u ↦ S(e^u)` on a grid
    /// that is uniform in `ln x`, up to a relative tolerance of `1e−9`.
    pub fn verify_log_convexity(&self, grid: &[f64]) -> Result<()> {
        let values: Vec<f64> = grid.iter().map(|&x| self.value(x)).collect();
        for i in 1..values.len() {
            if values[i] < values[i - 1] - 1e-12 * values[i].abs() {
                return Err(Error::Construction {
                    index: i,
                    reason: format!("S decreases between x = {} and {}", grid[i - 1], grid[i]),
                });
            }
        }
        for i in 1..values.len().saturating_sub(1) {
            let d2 = values[i + 1] - 2.0 * values[i] + values[i - 1];
            let scale = values[i + 1].abs() + 2.0 * values[i].abs() + values[i - 1].abs();
            if d2 < -1e-9 * scale {
                return Err(Error::Construction {
                    index: i,
                    reason: format!("S(e^u) fails convexity near x = {}", grid[i]),
                });
            }
        }
        Ok(())
    }
}

impl Profile for LogConvexS {
    fn value(&self, x: f64) -> f64 {
        match self.density.segment_of(x) {
            None => 0.0,
            Some(i) => self.cumulative[i] + segment_integral(&self.density, i, x),
        }
    }

    fn slope(&self, x: f64) -> Option<f64> {
        if x <= 0.0 {
            return Some(0.0);
        }
        Some(self.density.value(x) / x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.density.knots().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_models::{make_monotone_grid, ValueClass};
    use crate::quadrature::{integrate_finite_with, QuadConfig};

    #[test]
    fn zero_density_gives_zero() {
        let s = make_monotone_grid(vec![1.0, 2.0], vec![0.0, 0.0], Interpolation::Linear).unwrap();
        let big = log_convex_from_density(&s).unwrap();
        for x in [0.0, 0.5, 1.5, 10.0] {
            assert_eq!(big.value(x), 0.0);
        }
    }

    #[test]
    fn unit_step_gives_log() {
        let s = make_monotone_grid(vec![1.0], vec![1.0], Interpolation::StepLeft).unwrap();
        let big = log_convex_from_density(&s).unwrap();
        assert_eq!(big.value(0.5), 0.0);
        for x in [1.0, 2.0, 10.0, 1e4] {
            assert!((big.value(x) - x.ln()).abs() < 1e-14 * x.ln().max(1.0));
        }
    }

    #[test]
    fn linear_density_matches_quadrature() {
        let s = make_monotone_grid(
            vec![0.0, 0.3, 1.0, 2.5, 4.0],
            vec![0.0, 0.1, 0.1, 0.9, 2.0],
            Interpolation::Linear,
        )
        .unwrap()
        .with_tail(Tail::Power(0.7))
        .unwrap();
        let big = log_convex_from_density(&s).unwrap();
        for x in [0.2, 0.3, 0.77, 1.0, 3.3, 4.0, 9.0, 120.0] {
            let quad = integrate_finite_with(
                |t| s.value(t) / t,
                0.0,
                x,
                s.knots(),
                &QuadConfig::relative(1e-13),
            )
            .unwrap();
            assert!(
                (big.value(x) - quad.value).abs() < 1e-12 * quad.value.max(1.0),
                "x {x}: {} vs {}",
                big.value(x),
                quad.value
            );
        }
    }

    #[test]
    fn divergent_density_rejected() {
        let s = make_monotone_grid(vec![0.0, 1.0], vec![0.5, 1.0], Interpolation::Linear).unwrap();
        assert!(matches!(
            log_convex_from_density(&s),
            Err(Error::Divergence(_))
        ));
        let q = GridFunction::new(
            vec![1.0, 2.0],
            vec![1.0, 0.5],
            Interpolation::Linear,
            Tail::Constant,
            ValueClass::Nonnegative,
        )
        .unwrap();
        assert!(log_convex_from_density(&q).is_err());
    }

    #[test]
    fn slope_recovers_density() {
        let s = make_monotone_grid(
            vec![0.5, 1.0, 3.0],
            vec![0.2, 0.4, 1.5],
            Interpolation::Linear,
        )
        .unwrap();
        let big = log_convex_from_density(&s).unwrap();
        for x in [0.7, 2.0, 5.0] {
            let h = 1e-6 * x;
            let d = (big.value(x + h) - big.value(x - h)) / (2.0 * h);
            assert!((x * d - s.value(x)).abs() < 1e-6);
        }
    }
}
