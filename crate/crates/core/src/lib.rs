//! Numerical laboratory for a conjectured pair of interfering integral
//! estimates.
//!
//! The conjecture comes in three equivalent formulations (see [`Form`]):
//!
//! * `FORM1`: an increasing, logarithmically convex `S` with `S(0) = 0`
//!   satisfying `∫₀¹ S(tx)(1−x²)^{n−2} x dx ≤ t^λ` for all `t ≥ 0` should
//!   satisfy `∫₀^∞ S(t) t^{2λ−1}/(1+t^{2λ})² dt ≤ π(n−1)/(2λ) ∏(1+λ/2k)`.
//! * `FORM2`: an increasing `h ≥ 0` with `∫₀¹ h(tx)/x (1−x)^{n−1} dx ≤ t^α`
//!   should satisfy `∫₀^∞ h(t)/t dt/(1+t^{2α}) ≤ (π/2) ∏(1+α/k)`.
//! * `FORM3`: a density `q ≥ 0` (the derivative of `h`) with the kernel
//!   `K(x) = ∫ₓ¹ (1−y)^{n−1} dy/y`.
//!
//! The crate evaluates both sides of each formulation for concrete test
//! functions, checks the extremal power-law family, cross-validates the
//! chain of substitutions linking the formulations, and searches for
//! counterexample candidates with an exact linear program over increasing
//! step functions followed by a rigorous feasibility certificate.

pub mod cli_report;
pub mod error;
pub mod function_models;
pub mod functionals;
pub mod lp_search;
pub mod quadrature;
pub mod special_values;
pub mod transforms;

pub use error::{Error, Result};
pub use function_models::{GridFunction, Interpolation, LogConvexS, PowerLaw, Profile, Tail};
pub use functionals::{EvalConfig, EvalReport};
pub use quadrature::{QuadConfig, QuadResult};
pub use special_values::{Form, Params};
