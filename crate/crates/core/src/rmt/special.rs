//! Log-gamma, digamma and trigamma for positive real arguments.
//!
//! All three shift the argument up to `x ≥ 10` with the recurrence
//! `f(x) = f(x + 1) ∓ …` and then sum an asymptotic series.

use crate::error::{Error, Result};

const SHIFT: f64 = 10.0;

fn check(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(x))
    }
}

pub fn log_gamma(x: f64) -> Result<f64> {
    check(x)?;
    let mut x = x;
    let mut shift = 0.0;
    let mut prod = 1.0;
    while x < SHIFT {
        prod *= x;
        // keep the running product in range
        if prod > 1e280 {
            shift += prod.ln();
            prod = 1.0;
        }
        x += 1.0;
    }
    shift += prod.ln();
    let z = 1.0 / (x * x);
    let series = (1.0 / 12.0
        + z * (-1.0 / 360.0
            + z * (1.0 / 1260.0
                + z * (-1.0 / 1680.0 + z * (1.0 / 1188.0 + z * (-691.0 / 360_360.0 + z / 156.0))))))
        / x;
    let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series;
    Ok(stirling - shift)
}

/// `ψ(x) = d/dx log Γ(x)`.
pub fn digamma(x: f64) -> Result<f64> {
    check(x)?;
    let mut x = x;
    let mut acc = 0.0;
    while x < SHIFT {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let z = 1.0 / (x * x);
    let series = z
        * (1.0 / 12.0
            - z * (1.0 / 120.0
                - z * (1.0 / 252.0
                    - z * (1.0 / 240.0 - z * (5.0 / 660.0 - z * (691.0 / 32_760.0 - z / 12.0))))));
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// `ψ₁(x) = d²/dx² log Γ(x)`.
pub fn trigamma(x: f64) -> Result<f64> {
    check(x)?;
    let mut x = x;
    let mut acc = 0.0;
    while x < SHIFT {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let z = 1.0 / (x * x);
    let series = z
        * (1.0 / 6.0
            - z * (1.0 / 30.0
                - z * (1.0 / 42.0 - z * (1.0 / 30.0 - z * (5.0 / 66.0 - z * (691.0 / 2730.0 - z * 7.0 / 6.0))))));
    Ok(acc + 1.0 / x + 0.5 * z + series / x)
}
