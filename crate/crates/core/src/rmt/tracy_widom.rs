//! The GOE Tracy-Widom distribution `F1` from an embedded knot table.
//!
//! Knots on `[-10, 6]` at spacing 0.01 were computed offline from the
//! Fredholm determinant `det(I - K)` with `K(x, y) = Ai(s + x + y)` on
//! `L²(0, ∞)` (see `tools/gen_tracy_widom.py`). Between knots the CDF is a
//! monotone piecewise cubic; beyond the grid the leading tail asymptotics are
//! scaled to meet the boundary knots.

use std::sync::LazyLock;

use crate::error::{Error, Result};

static TABLE_CSV: &str = include_str!("../../data/tracy_widom_f1.csv");

static TABLE: LazyLock<TracyWidomTable> =
    LazyLock::new(|| TracyWidomTable::parse(TABLE_CSV).expect("embedded Tracy-Widom table is valid"));

#[derive(Debug, Clone)]
pub struct TracyWidomTable {
    x: Vec<f64>,
    f: Vec<f64>,
    slopes: Vec<f64>,
}

impl TracyWidomTable {
    /// The table shipped with the crate.
    pub fn global() -> &'static Self {
        &TABLE
    }

    /// Parses a `x,F1` CSV with ascending abscissae and strictly increasing
    /// probabilities in `(0, 1)`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "F1" {
            return Err(Error::Parse(format!("expected header `x,F1`, found `{}`", headers.as_slice())));
        }
        let (mut x, mut f) = (Vec::new(), Vec::new());
        for record in reader.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", x.len() + 2)))
            };
            let (xi, fi) = (parse(0)?, parse(1)?);
            x.push(xi);
            f.push(fi);
        }
        if x.len() < 3 {
            return Err(Error::Parse("table needs at least three knots".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("abscissae must be strictly ascending".into()));
        }
        if f.windows(2).any(|w| !(w[1] > w[0])) || !(f[0] > 0.0) || !(f[f.len() - 1] < 1.0) {
            return Err(Error::Parse("CDF values must increase strictly inside (0, 1)".into()));
        }
        let slopes = pchip_slopes(&x, &f);
        Ok(Self { x, f, slopes })
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.f)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let last = self.x.len() - 1;
        let (x0, x1) = (self.x[0], self.x[last]);
        if x < x0 {
            return self.f[0] * (log_left_tail(x) - log_left_tail(x0)).exp();
        }
        if x > x1 {
            return 1.0 - (1.0 - self.f[last]) * (log_right_tail(x) - log_right_tail(x1)).exp();
        }
        let k = self.x.partition_point(|&knot| knot <= x).clamp(1, last) - 1;
        let h = self.x[k + 1] - self.x[k];
        let t = (x - self.x[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.f[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.f[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
    }

    /// Inverse CDF by bisection.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::DomainError(q));
        }
        let (mut lo, mut hi) = (self.x[0], self.x[self.x.len() - 1]);
        while self.cdf(lo) > q {
            lo -= 1.0;
            if lo < -100.0 {
                return Err(Error::DomainError(q));
            }
        }
        while self.cdf(hi) < q {
            hi += 1.0;
            if hi > 100.0 {
                return Err(Error::DomainError(q));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// `F1(x)`.
pub fn tracy_widom_cdf(x: f64) -> f64 {
    TABLE.cdf(x)
}

/// `G(x) = 1 - F1(-x)`, the law of the reflected variable.
pub fn tracy_widom_reflected_cdf(x: f64) -> f64 {
    1.0 - TABLE.cdf(-x)
}

pub fn tracy_widom_quantile(q: f64) -> Result<f64> {
    TABLE.quantile(q)
}

/// `log` of `|x|^{-1/16} exp(-|x|³/24 - |x|^{3/2}/(3√2))`, the shape of
/// `F1` as `x → -∞`.
fn log_left_tail(x: f64) -> f64 {
    let s = -x;
    -s.ln() / 16.0 - s.powi(3) / 24.0 - s.powf(1.5) / (3.0 * std::f64::consts::SQRT_2)
}

/// `log` of `x^{-3/4} exp(-(2/3) x^{3/2})`, the shape of `1 - F1` as
/// `x → ∞`.
fn log_right_tail(x: f64) -> f64 {
    -0.75 * x.ln() - 2.0 / 3.0 * x.powf(1.5)
}

/// Fritsch-Carlson derivatives for a shape-preserving cubic Hermite fit.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if d[k - 1] * d[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    m[0] = edge_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_table_shape() {
        let (x, f) = TracyWidomTable::global().knots();
        assert_eq!(x.len(), 1601);
        assert_eq!(x[0], -10.0);
        assert_eq!(x[1600], 6.0);
        assert!(f.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn interpolation_hits_knots() {
        let table = TracyWidomTable::global();
        let (x, f) = table.knots();
        for k in (0..x.len()).step_by(37) {
            assert!((table.cdf(x[k]) - f[k]).abs() <= 1e-15 * f[k].max(1e-300) + 1e-17);
        }
    }

    #[test]
    fn tails_are_continuous_and_monotone() {
        let eps = 1e-9;
        assert!((tracy_widom_cdf(-10.0 - eps) - tracy_widom_cdf(-10.0)).abs() < 1e-28);
        assert!((tracy_widom_cdf(6.0 + eps) - tracy_widom_cdf(6.0)).abs() < 1e-14);
        let mut prev = 0.0;
        for k in 0..400 {
            let x = -14.0 + 0.05 * k as f64;
            let f = tracy_widom_cdf(x);
            assert!(f >= prev && f < 1.0, "x = {x}");
            prev = f;
        }
        assert_eq!(tracy_widom_cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(tracy_widom_cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn reference_values() {
        // 40-digit determinant evaluations.
        assert!((tracy_widom_cdf(0.98) - 0.950_047_551_005_995_4).abs() < 1e-12);
        assert!((tracy_widom_cdf(-1.27) - 0.499_547_171_584_915_1).abs() < 1e-12);
        assert!((tracy_widom_cdf(4.0) - 0.999_779_655_512_567).abs() < 1e-12);
        // midpoint between knots: cubic error stays tiny
        let mid = tracy_widom_cdf(0.985);
        assert!(mid > tracy_widom_cdf(0.98) && mid < tracy_widom_cdf(0.99));
    }

    #[test]
    fn quantile_round_trip() {
        for k in 1..100 {
            let q = k as f64 / 100.0;
            let x = tracy_widom_quantile(q).unwrap();
            assert!((tracy_widom_cdf(x) - q).abs() < 1e-12);
        }
        assert!(tracy_widom_quantile(0.0).is_err());
        assert!(tracy_widom_quantile(1.0).is_err());
    }

    #[test]
    fn reflected_variant() {
        assert!((tracy_widom_reflected_cdf(1.0) - (1.0 - tracy_widom_cdf(-1.0))).abs() < 1e-16);
    }

    #[test]
    fn parse_rejects_bad_tables() {
        assert!(TracyWidomTable::parse("a,b\n0,0.1\n1,0.2\n2,0.3\n").is_err());
        assert!(TracyWidomTable::parse("x,F1\n0,0.1\n1,0.1\n2,0.3\n").is_err());
        assert!(TracyWidomTable::parse("x,F1\n0,0.1\n2,0.2\n1,0.3\n").is_err());
        assert!(TracyWidomTable::parse("x,F1\n0,0.1\n1,0.2\n2,1.0\n").is_err());
        assert!(TracyWidomTable::parse("x,F1\n0,0.1\n1,0.2\n2,0.3\n").is_ok());
    }
}
