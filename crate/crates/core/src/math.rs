//! Scalar math kernels shared by the samplers.
//!
//! The crate is `no_std`, so float transcendentals route through `libm`
//! instead of the std intrinsics. Everything here is deterministic across
//! platforms for a fixed input, which the reproducibility contract relies on.

/// Natural logarithm of the gamma function.
///
/// Arguments must be strictly positive; the selector weights only ever call
/// this with sums of counts and positive hyperparameters.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma argument must be positive, got {x}");
    libm::lgamma(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// log(exp(a) + exp(b)) without overflow, by shifting both terms under the max.
#[inline]
pub fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let m = if a > b { a } else { b };
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + libm::log(libm::exp(a - m) + libm::exp(b - m))
}

/// log(Σ exp(x_i)) over a slice, max-shifted for stability.
#[inline]
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut sum = 0.0;
    for &x in xs {
        sum += libm::exp(x - m);
    }
    m + libm::log(sum)
}
