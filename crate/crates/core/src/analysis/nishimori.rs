//! The Nishimori line and the Kramers-Wannier duality map.

use crate::error::{Error, Result};

/// `beta(p) = -1/2 ln(p / (1 - p))`.
pub fn nishimori_beta(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    if p == 0.0 || p == 1.0 {
        return Err(Error::InfiniteBeta(p));
    }
    Ok(-0.5 * (p / (1.0 - p)).ln())
}

/// `T(p) = 1 / beta(p)` for `0 < p < 1/2`; infinite at `p = 1/2`.
pub fn nishimori_temperature(p: f64) -> Result<f64> {
    if p > 0.5 {
        return Err(Error::InvalidParameter(format!(
            "Nishimori temperature is negative for p = {p} > 1/2"
        )));
    }
    Ok(1.0 / nishimori_beta(p)?)
}

/// Inverse of [`nishimori_temperature`] on `(0, 1/2]`.
pub fn nishimori_probability(temperature: f64) -> Result<f64> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::InvalidParameter(format!("T = {temperature} must be positive")));
    }
    Ok(1.0 / (1.0 + (2.0 / temperature).exp()))
}

/// `beta_dual = -1/2 ln tanh(beta)`, returned as a temperature.
pub fn dual_temperature(temperature: f64) -> Result<f64> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::InvalidParameter(format!("T = {temperature} must be positive")));
    }
    let x = (-2.0 / temperature).exp();
    // ln tanh(beta) = ln(1 - x) - ln(1 + x) with x = exp(-2 beta).
    let beta_dual = -0.5 * ((-x).ln_1p() - x.ln_1p());
    Ok(1.0 / beta_dual)
}

/// Fixed point of [`dual_temperature`]: `2 / ln(1 + sqrt 2)`.
pub fn self_dual_temperature() -> f64 {
    2.0 / (1.0 + std::f64::consts::SQRT_2).ln()
}

/// Error of the dual temperature by first-order propagation.
pub fn dual_temperature_error(temperature: f64, error: f64) -> Result<f64> {
    let h = 1e-6 * temperature;
    let slope = (dual_temperature(temperature + h)? - dual_temperature(temperature - h)?) / (2.0 * h);
    Ok(slope.abs() * error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn beta_values() {
        assert_eq!(nishimori_beta(0.5).unwrap(), 0.0);
        assert_relative_eq!(nishimori_beta(0.1).unwrap(), 0.5 * 9f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(nishimori_beta(0.01).unwrap(), 2.2976, epsilon = 1e-4);
        assert_relative_eq!(nishimori_beta(0.01).unwrap(), 0.5 * 99f64.ln(), epsilon = 1e-14);
        assert!(matches!(nishimori_beta(0.0), Err(Error::InfiniteBeta(_))));
        assert!(matches!(nishimori_beta(1.0), Err(Error::InfiniteBeta(_))));
        assert!(nishimori_beta(1.5).is_err());
    }

    #[test]
    fn temperature_round_trip() {
        for p in [0.01, 0.1, 0.27, 0.4] {
            let t = nishimori_temperature(p).unwrap();
            assert_relative_eq!(nishimori_probability(t).unwrap(), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn dual_values() {
        assert_relative_eq!(dual_temperature(8.77).unwrap(), 0.919, epsilon = 1e-3);
        let ts = self_dual_temperature();
        assert_relative_eq!(ts, 2.269_185_314_213_022, epsilon = 1e-12);
        assert_relative_eq!(dual_temperature(ts).unwrap(), ts, epsilon = 1e-12);
        for t in [0.5, 1.0, 5.0] {
            assert_relative_eq!(dual_temperature(dual_temperature(t).unwrap()).unwrap(), t, epsilon = 1e-9);
        }
        assert!(dual_temperature(0.0).is_err());
    }
}
