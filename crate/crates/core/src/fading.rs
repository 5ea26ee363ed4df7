//! Rayleigh and Rician envelope laws.
//!
//! The envelope of zero-mean Gaussian noise is Rayleigh distributed; with a
//! deterministic component of amplitude `nu` added it becomes Rician. The
//! coefficient of variation of every Rayleigh law is the same number
//! ([`motokawa_m`]); the Rician CV depends only on `nu / sigma`.

use std::f64::consts::PI;

use crate::bessel::{i0e, i1e};
use crate::error::{Error, Result};

/// `sqrt((4 - pi) / pi)`, the CV of any Rayleigh distribution.
pub const MOTOKAWA_M: f64 = 0.522_723_200_877_063_4;

pub fn motokawa_m() -> f64 {
    MOTOKAWA_M
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighParams {
    sigma: f64,
}

impl RayleighParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(RayleighParams { sigma })
        } else {
            Err(Error::param(
                "sigma",
                format!("must be positive and finite, got {sigma}"),
            ))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Maximum-likelihood scale from envelope samples, `sqrt(mean(x^2) / 2)`.
    pub fn fit_mle(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        let ms = samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64;
        Self::new((ms / 2.0).sqrt())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x * x / (2.0 * self.sigma * self.sigma)).exp_m1()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianParams {
    nu: f64,
    sigma: f64,
}

impl RicianParams {
    pub fn new(nu: f64, sigma: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::param("nu", format!("must be non-negative and finite, got {nu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param(
                "sigma",
                format!("must be positive and finite, got {sigma}"),
            ));
        }
        Ok(RicianParams { nu, sigma })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

fn check_support(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::SupportViolation(x))
    }
}

pub fn rayleigh_pdf(x: f64, params: &RayleighParams) -> Result<f64> {
    check_support(x)?;
    let s2 = params.sigma * params.sigma;
    Ok(x / s2 * (-x * x / (2.0 * s2)).exp())
}

/// `(mean, std)` of the Rayleigh law.
pub fn rayleigh_moments(params: &RayleighParams) -> (f64, f64) {
    let s = params.sigma;
    (s * (PI / 2.0).sqrt(), s * ((4.0 - PI) / 2.0).sqrt())
}

pub fn rayleigh_cv(params: &RayleighParams) -> f64 {
    let (mean, std) = rayleigh_moments(params);
    std / mean
}

pub fn rician_pdf(x: f64, params: &RicianParams) -> Result<f64> {
    check_support(x)?;
    let RicianParams { nu, sigma } = *params;
    let s2 = sigma * sigma;
    let z = x * nu / s2;
    // exp(-(x^2+nu^2)/2s^2) I0(z) = exp(-(x-nu)^2/2s^2) i0e(z)
    let d = x - nu;
    Ok(x / s2 * (-d * d / (2.0 * s2)).exp() * i0e(z))
}

/// `L_{1/2}(x)` for `x <= 0`, through its Bessel form.
pub fn laguerre_half(x: f64) -> f64 {
    // e^{x/2} [(1-x) I0(-x/2) - x I1(-x/2)], with x <= 0 so -x/2 >= 0 and
    // e^{x/2} I(-x/2) = i0e/i1e(-x/2).
    let h = -x / 2.0;
    (1.0 - x) * i0e(h) - x * i1e(h)
}

/// `(mean, std)` of the Rician law.
pub fn rician_moments(params: &RicianParams) -> (f64, f64) {
    let RicianParams { nu, sigma } = *params;
    let s2 = sigma * sigma;
    let l = laguerre_half(-nu * nu / (2.0 * s2));
    let mean = sigma * (PI / 2.0).sqrt() * l;
    let var = 2.0 * s2 + nu * nu - PI * s2 / 2.0 * l * l;
    (mean, var.max(0.0).sqrt())
}

pub fn rician_cv(params: &RicianParams) -> f64 {
    let (mean, std) = rician_moments(params);
    std / mean
}
