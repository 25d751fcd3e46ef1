//! Gamma-function helpers.

/// Euler's gamma function for positive real arguments.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_lower_regularized(a: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_lr(a, x)
}
