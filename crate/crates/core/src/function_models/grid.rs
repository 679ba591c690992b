use serde::{Deserialize, Serialize};

use super::Profile;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Straight lines between knots.
    Linear,
    /// On `[kᵢ, kᵢ₊₁)` the value is `vᵢ`: right-continuous steps.
    StepLeft,
}

/// Extension beyond the last knot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Constant,
    /// `v_last · (t / k_last)^p`.
    Power(f64),
}

/// Which class invariants the values must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueClass {
    /// Nonnegative and non-decreasing (`s`, `h`, `S`).
    Monotone,
    /// Nonnegative only (densities `q`).
    Nonnegative,
}

/// A function given by values at strictly increasing knots, zero below the
/// first knot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
    tail: Tail,
    class: ValueClass,
}

/// Validated monotone grid with a constant tail.
pub fn make_monotone_grid(
    knots: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
) -> Result<GridFunction> {
    GridFunction::new(
        knots,
        values,
        interpolation,
        Tail::Constant,
        ValueClass::Monotone,
    )
}

fn violation(index: usize, reason: impl Into<String>) -> Error {
    Error::Construction {
        index,
        reason: reason.into(),
    }
}

impl GridFunction {
    pub fn new(
        knots: Vec<f64>,
        values: Vec<f64>,
        interpolation: Interpolation,
        tail: Tail,
        class: ValueClass,
    ) -> Result<Self> {
        if knots.is_empty() {
            return Err(violation(0, "no knots"));
        }
        if knots.len() != values.len() {
            return Err(violation(
                knots.len().min(values.len()),
                format!("{} knots but {} values", knots.len(), values.len()),
            ));
        }
        for (i, &k) in knots.iter().enumerate() {
            if !(k.is_finite() && k >= 0.0) {
                return Err(violation(
                    i,
                    format!("knot {k} is not a finite nonnegative number"),
                ));
            }
            if i > 0 && k <= knots[i - 1] {
                return Err(violation(
                    i,
                    format!("knots not strictly increasing ({} then {k})", knots[i - 1]),
                ));
            }
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(violation(i, format!("value {v} is not finite")));
            }
            if v < 0.0 {
                return Err(violation(i, format!("negative value {v}")));
            }
            if class == ValueClass::Monotone && i > 0 && v < values[i - 1] {
                return Err(violation(
                    i,
                    format!("values decrease ({} then {v})", values[i - 1]),
                ));
            }
        }
        if let Tail::Power(p) = tail {
            if !p.is_finite() {
                return Err(violation(
                    knots.len() - 1,
                    format!("tail exponent {p} is not finite"),
                ));
            }
            if class == ValueClass::Monotone && p < 0.0 {
                return Err(violation(
                    knots.len() - 1,
                    format!("decreasing power tail {p} on a monotone class"),
                ));
            }
            if *knots.last().unwrap() == 0.0 {
                return Err(violation(0, "power tail needs a positive last knot"));
            }
        }
        Ok(Self {
            knots,
            values,
            interpolation,
            tail,
            class,
        })
    }

    pub fn with_tail(self, tail: Tail) -> Result<Self> {
        Self::new(
            self.knots,
            self.values,
            self.interpolation,
            tail,
            self.class,
        )
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn class(&self) -> ValueClass {
        self.class
    }

    pub fn is_monotone(&self) -> bool {
        self.class == ValueClass::Monotone
    }

    /// Value at `0⁺`; nonzero only when the first knot sits at the origin.
    pub fn value_at_origin(&self) -> f64 {
        if self.knots[0] == 0.0 {
            self.values[0]
        } else {
            0.0
        }
    }

    /// Slope of segment `i` (from knot `i` to knot `i+1`).
    pub(crate) fn segment_slope(&self, i: usize) -> f64 {
        match self.interpolation {
            Interpolation::StepLeft => 0.0,
            Interpolation::Linear => {
                if i + 1 < self.knots.len() {
                    (self.values[i + 1] - self.values[i]) / (self.knots[i + 1] - self.knots[i])
                } else {
                    0.0
                }
            }
        }
    }

    /// Index of the last knot `≤ t`, or `None` below the first knot.
    pub(crate) fn segment_of(&self, t: f64) -> Option<usize> {
        self.knots.partition_point(|&k| k <= t).checked_sub(1)
    }

    fn tail_value(&self, t: f64) -> f64 {
        let last = self.knots.len() - 1;
        let v = self.values[last];
        match self.tail {
            Tail::Constant => v,
            Tail::Power(p) => v * (t / self.knots[last]).powf(p),
        }
    }
}

impl Profile for GridFunction {
    fn value(&self, t: f64) -> f64 {
        let Some(i) = self.segment_of(t) else {
            return 0.0;
        };
        if i + 1 == self.knots.len() {
            return self.tail_value(t);
        }
        match self.interpolation {
            Interpolation::StepLeft => self.values[i],
            Interpolation::Linear => {
                let w = (t - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
                self.values[i] + w * (self.values[i + 1] - self.values[i])
            }
        }
    }

    fn slope(&self, t: f64) -> Option<f64> {
        let Some(i) = self.segment_of(t) else {
            return Some(0.0);
        };
        let last = self.knots.len() - 1;
        if i == last {
            return Some(match self.tail {
                Tail::Constant => 0.0,
                Tail::Power(p) => {
                    let k = self.knots[last];
                    self.values[last] * p * (t / k).powf(p - 1.0) / k
                }
            });
        }
        Some(self.segment_slope(i))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.knots.clone()
    }

    fn jumps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if self.knots[0] > 0.0 && self.values[0] != 0.0 {
            out.push((self.knots[0], self.values[0]));
        }
        if self.interpolation == Interpolation::StepLeft {
            for i in 1..self.knots.len() {
                let d = self.values[i] - self.values[i - 1];
                if d != 0.0 {
                    out.push((self.knots[i], d));
                }
            }
        }
        out
    }

    fn is_pure_step(&self) -> bool {
        self.interpolation == Interpolation::StepLeft
            && matches!(self.tail, Tail::Constant)
            && self.value_at_origin() == 0.0
    }
}
