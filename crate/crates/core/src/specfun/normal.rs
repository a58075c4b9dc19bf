use crate::error::{Error, Result};

/// Gaussian tail probability `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::invalid("q_function: argument is NaN"));
    }
    Ok(0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2))
}
