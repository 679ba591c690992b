//! Closed-form constants and kernels.
//!
//! Everything here is exact up to floating rounding: the Beta function is
//! only ever needed with an integer second argument, where it reduces to a
//! finite rational product, and both derived kernels have elementary closed
//! forms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three equivalent formulations of the estimate pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Form {
    /// Test function `S`, rate `λ`.
    #[serde(rename = "FORM1")]
    One,
    /// Test function `h`, rate `α`.
    #[serde(rename = "FORM2")]
    Two,
    /// Test density `q = h′`, rate `α − 1`.
    #[serde(rename = "FORM3")]
    Three,
}

impl Form {
    pub const ALL: [Form; 3] = [Form::One, Form::Two, Form::Three];

    /// Exponent of the allowed growth `t^rate` on the constraint side.
    pub fn rate(self, params: &Params) -> f64 {
        match self {
            Form::One => params.lambda(),
            Form::Two => params.alpha(),
            Form::Three => params.alpha() - 1.0,
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Form::One => "FORM1",
            Form::Two => "FORM2",
            Form::Three => "FORM3",
        };
        f.write_str(s)
    }
}

impl FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "1" | "FORM1" => Ok(Form::One),
            "2" | "FORM2" => Ok(Form::Two),
            "3" | "FORM3" => Ok(Form::Three),
            other => Err(Error::Domain(format!("unknown form tag {other:?}"))),
        }
    }
}

/// Rate and dimension parameters. `λ` is stored; `α = λ/2` is derived, so
/// the two can never disagree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ParamsRepr", try_from = "ParamsRepr")]
pub struct Params {
    lambda: f64,
    n: u32,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    lambda: f64,
    #[serde(default)]
    alpha: Option<f64>,
    n: u32,
}

impl From<Params> for ParamsRepr {
    fn from(p: Params) -> Self {
        Self {
            lambda: p.lambda,
            alpha: Some(p.alpha()),
            n: p.n,
        }
    }
}

impl TryFrom<ParamsRepr> for Params {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        let p = Params::from_lambda(r.lambda, r.n)?;
        if let Some(alpha) = r.alpha {
            if alpha != p.alpha() {
                return Err(Error::Domain(format!(
                    "alpha {alpha} inconsistent with lambda {}",
                    r.lambda
                )));
            }
        }
        Ok(p)
    }
}

impl Params {
    pub fn from_lambda(lambda: f64, n: u32) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Domain(format!(
                "lambda must be finite and positive, got {lambda}"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!("n must be at least 2, got {n}")));
        }
        Ok(Self { lambda, n })
    }

    pub fn from_alpha(alpha: f64, n: u32) -> Result<Self> {
        Self::from_lambda(2.0 * alpha, n)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        0.5 * self.lambda
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Whether the conjectured implication is stated for this formulation:
    /// `λ ≥ 1/2` for `FORM1`, `α > 1/2` for the other two.
    pub fn admits(&self, form: Form) -> bool {
        match form {
            Form::One => self.lambda >= 0.5,
            Form::Two | Form::Three => self.alpha() > 0.5,
        }
    }

    pub fn check_form(&self, form: Form) -> Result<()> {
        if self.admits(form) {
            Ok(())
        } else {
            let need = match form {
                Form::One => "lambda >= 1/2",
                _ => "alpha > 1/2",
            };
            Err(Error::Domain(format!(
                "{form} requires {need} (lambda = {}, alpha = {})",
                self.lambda,
                self.alpha()
            )))
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "alpha must be finite and positive, got {alpha}"
        )))
    }
}

fn check_n(n: u32) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("n must be at least 2, got {n}")))
    }
}

/// `∏_{k=1}^{n−1} (1 + α/k)`, the product shared by all sharp constants.
pub fn rising_product(alpha: f64, n: u32) -> f64 {
    (1..n).map(|k| 1.0 + alpha / f64::from(k)).product()
}

/// `B(α, n) = (1/α) ∏_{k=1}^{n−1} k/(k+α)` for integer `n ≥ 2`.
pub fn beta_product(alpha: f64, n: u32) -> Result<f64> {
    check_alpha(alpha)?;
    check_n(n)?;
    let prod: f64 = (1..n)
        .map(|k| {
            let k = f64::from(k);
            k / (k + alpha)
        })
        .product();
    Ok(prod / alpha)
}

/// Right-hand constant of the requested formulation.
pub fn sharp_bound(params: &Params, form: Form) -> Result<f64> {
    params.check_form(form)?;
    // All three share π·∏(1+α/k); keeping that factor common makes
    // FORM3 = 2α·FORM2 hold bit for bit.
    let base = PI * rising_product(params.alpha(), params.n());
    Ok(match form {
        Form::One => base * f64::from(params.n() - 1) / (2.0 * params.lambda()),
        Form::Two => 0.5 * base,
        Form::Three => params.alpha() * base,
    })
}

/// The same constants through the Beta function:
/// `π(n−1)/(λ²B(λ/2, n))`, `π/(2α B(α, n))` and `π/B(α, n)`. The first one
/// follows from `B(λ/2, n) = (2/λ)/∏(1+λ/2k)`.
pub fn sharp_bound_via_beta(params: &Params, form: Form) -> Result<f64> {
    params.check_form(form)?;
    let beta = beta_product(params.alpha(), params.n())?;
    let lambda = params.lambda();
    let alpha = params.alpha();
    Ok(match form {
        Form::One => PI * f64::from(params.n() - 1) / (lambda * lambda) / beta,
        Form::Two => PI / (2.0 * alpha) / beta,
        Form::Three => PI / beta,
    })
}

/// `K(a) = ∫ₐ¹ (1−y)^{n−1}/y dy` for `0 < a ≤ 1`.
pub fn kernel_k(a: f64, n: u32) -> Result<f64> {
    check_n(n)?;
    if a.is_nan() || a <= 0.0 {
        return Err(Error::Domain(format!("K diverges at a = {a} (need a > 0)")));
    }
    if a > 1.0 {
        return Err(Error::Domain(format!(
            "K is defined on (0, 1], got a = {a}"
        )));
    }
    Ok(kernel_k_unchecked(a, n))
}

const K_SERIES_TERM_CAP: u32 = 200_000;

/// Unchecked [`kernel_k`]; `a` must lie in `(0, 1]`.
///
/// Uses `(1−y)^{n−1}/y = 1/y − Σ_{m<n−1} (1−y)^m`, giving the positive-term
/// forms `K(a) = ln(1/a) − Σ_{j=1}^{n−1} r^j/j = Σ_{j≥n} r^j/j`, `r = 1−a`.
/// The finite form is used unless it would cancel badly.
pub(crate) fn kernel_k_unchecked(a: f64, n: u32) -> f64 {
    if a >= 1.0 {
        return 0.0;
    }
    let r = 1.0 - a;
    let log_inv = -a.ln();
    let nf = f64::from(n);
    let tail_estimate = r.powi(n as i32) / (nf * a);
    if r >= 0.5 && log_inv <= 1e3 * tail_estimate {
        let mut sum = log_inv;
        let mut pow = 1.0;
        for j in 1..n {
            pow *= r;
            sum -= pow / f64::from(j);
        }
        return sum.max(0.0);
    }
    let mut term_pow = r.powi(n as i32);
    let mut sum = 0.0;
    let mut j = n;
    loop {
        sum += term_pow / f64::from(j);
        term_pow *= r;
        let remainder = term_pow / (f64::from(j + 1) * a);
        if remainder <= 1e-17 * sum || term_pow == 0.0 {
            return sum;
        }
        j += 1;
        if j - n > K_SERIES_TERM_CAP {
            break;
        }
    }
    kernel_k_quadrature(a, n)
}

fn kernel_k_quadrature(a: f64, n: u32) -> f64 {
    let f = |y: f64| (1.0 - y).powi(n as i32 - 1) / y;
    crate::quadrature::integrate_finite_with(
        f,
        a,
        1.0,
        &[],
        &crate::quadrature::QuadConfig::relative(1e-13),
    )
    .map(|r| r.value)
    .unwrap_or(f64::NAN)
}

/// `Ψ(τ) = ∫_τ^∞ dt/(t(1+t^{2α})) = ln(1+τ^{−2α})/(2α)`.
pub fn kernel_psi(tau: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::Domain(format!("Psi requires tau > 0, got {tau}")));
    }
    Ok(kernel_psi_unchecked(tau, alpha))
}

pub(crate) fn kernel_psi_unchecked(tau: f64, alpha: f64) -> f64 {
    if tau.is_infinite() {
        return 0.0;
    }
    let two_alpha = 2.0 * alpha;
    if tau >= 1.0 {
        (-two_alpha * tau.ln()).exp().ln_1p() / two_alpha
    } else {
        -tau.ln() + (two_alpha * tau.ln()).exp().ln_1p() / two_alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_product(1.0, 2).unwrap(), 0.5);
        assert!(close(beta_product(0.5, 2).unwrap(), 4.0 / 3.0, 1e-15));
        assert!(close(beta_product(1.0, 3).unwrap(), 1.0 / 3.0, 1e-15));
    }

    #[test]
    fn beta_rejects_bad_alpha() {
        for a in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(beta_product(a, 3).is_err());
        }
        assert!(beta_product(1.0, 1).is_err());
    }

    #[test]
    fn sharp_bound_examples() {
        let p = Params::from_lambda(2.0, 2).unwrap();
        assert!(close(sharp_bound(&p, Form::One).unwrap(), PI / 2.0, 1e-15));
        let p = Params::from_alpha(1.0, 2).unwrap();
        assert!(close(sharp_bound(&p, Form::Two).unwrap(), PI, 1e-15));
        assert!(close(
            sharp_bound(&p, Form::Three).unwrap(),
            2.0 * PI,
            1e-15
        ));
    }

    #[test]
    fn sharp_bound_gates_parameters() {
        let p = Params::from_lambda(1.0, 3).unwrap();
        assert!(sharp_bound(&p, Form::One).is_ok());
        assert!(sharp_bound(&p, Form::Two).is_err());
        let p = Params::from_lambda(0.4, 3).unwrap();
        assert!(sharp_bound(&p, Form::One).is_err());
    }

    #[test]
    fn form3_is_two_alpha_form2() {
        for alpha in [0.6, 0.75, 1.0, 1.5, 2.5, 3.3] {
            for n in 2..8 {
                let p = Params::from_alpha(alpha, n).unwrap();
                let two = sharp_bound(&p, Form::Two).unwrap();
                let three = sharp_bound(&p, Form::Three).unwrap();
                assert_eq!(three, 2.0 * alpha * two);
            }
        }
    }

    #[test]
    fn beta_rewrites_agree() {
        for lambda in [1.2, 2.0, 3.0, 5.0] {
            for n in [2, 3, 4, 6] {
                let p = Params::from_lambda(lambda, n).unwrap();
                for form in Form::ALL {
                    let a = sharp_bound(&p, form).unwrap();
                    let b = sharp_bound_via_beta(&p, form).unwrap();
                    assert!(close(a, b, 1e-13), "{form} {lambda} {n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn kernel_k_examples() {
        assert_eq!(kernel_k(1.0, 2).unwrap(), 0.0);
        assert!(close(kernel_k(0.5, 2).unwrap(), LN_2 - 0.5, 1e-15));
        assert!(kernel_k(0.0, 2).is_err());
        assert!(kernel_k(-0.1, 2).is_err());
        assert!(kernel_k(1.5, 2).is_err());
    }

    #[test]
    fn kernel_k_matches_binomial_form_for_small_n() {
        // ln(1/a) + Σ C(n−1, j)(−1)^j (1 − a^j)/j
        let binomial = |a: f64, n: u32| {
            let mut s = -a.ln();
            let mut c = 1.0;
            for j in 1..n {
                c = c * f64::from(n - j) / f64::from(j);
                let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
                s += sign * c * (1.0 - a.powi(j as i32)) / f64::from(j);
            }
            s
        };
        for n in 2..7 {
            for a in [1e-3, 0.1, 0.25, 0.5, 0.9] {
                let k = kernel_k(a, n).unwrap();
                assert!(close(k, binomial(a, n), 1e-11), "a {a} n {n}");
            }
        }
    }

    #[test]
    fn kernel_k_is_monotone_and_stable_near_one() {
        for n in [2, 3, 5, 25, 60] {
            let mut prev = f64::INFINITY;
            for i in 1..=200 {
                let a = f64::from(i) / 200.0;
                let k = kernel_k(a, n).unwrap();
                assert!(k >= 0.0 && k <= prev, "n {n} a {a}");
                prev = k;
            }
        }
        // Leading term of the tail series.
        let a = 1.0 - 1e-6;
        let k = kernel_k(a, 3).unwrap();
        assert!(close(k, (1e-6f64).powi(3) / 3.0, 1e-5));
    }

    #[test]
    fn kernel_psi_examples() {
        assert!(close(kernel_psi(1.0, 1.0).unwrap(), LN_2 / 2.0, 1e-15));
        let big: f64 = 1e6;
        let asym = big.powf(-2.0) / 2.0;
        assert!(close(kernel_psi(big, 1.0).unwrap(), asym, 1e-6));
        assert!(kernel_psi(0.0, 1.0).is_err());
        assert!(kernel_psi(1e-300, 0.75).unwrap().is_finite());
    }

    #[test]
    fn kernel_psi_derivative() {
        for alpha in [0.6, 1.0, 2.0] {
            for tau in [0.05, 0.3, 1.0, 4.0] {
                let h = 1e-5 * tau;
                let d = (kernel_psi(tau + h, alpha).unwrap() - kernel_psi(tau - h, alpha).unwrap())
                    / (2.0 * h);
                let expect = -1.0 / (tau * (1.0 + tau.powf(2.0 * alpha)));
                assert!((d - expect).abs() <= 1e-6 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn params_alpha_lambda_consistency() {
        let p = Params::from_alpha(0.75, 4).unwrap();
        assert_eq!(p.lambda(), 1.5);
        assert!(Params::from_lambda(1.0, 1).is_err());
        let json = serde_json::to_string(&p).unwrap();
        let back: Params = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Params>(r#"{"lambda":2.0,"alpha":0.5,"n":3}"#).is_err());
    }

    #[test]
    fn form_tags_parse() {
        assert_eq!("1".parse::<Form>().unwrap(), Form::One);
        assert_eq!("form3".parse::<Form>().unwrap(), Form::Three);
        assert!("4".parse::<Form>().is_err());
    }
}
