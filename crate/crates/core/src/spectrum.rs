//! Risk-aversion spectra and their exact segment integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrmError};

/// An admissible risk spectrum: nonnegative, nondecreasing, unit mass on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    /// `phi(u) = k exp(-k (1 - u)) / (1 - exp(-k))`, `k` the coefficient of
    /// absolute risk aversion.
    Exponential { k: f64 },
    /// The `k -> 0+` limit of the exponential spectrum: uniform weights, so
    /// the risk measure is the mean.
    Uniform,
    /// `phi(u) = 1{u >= p} / (1 - p)`; the risk measure is expected shortfall.
    ExpectedShortfall { p: f64 },
}

impl Spectrum {
    pub fn exponential(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(SrmError::Domain(format!("risk aversion k must be positive, got {k}")));
        }
        Ok(Spectrum::Exponential { k })
    }

    pub fn expected_shortfall(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(SrmError::Domain(format!("tail level p must lie in [0, 1), got {p}")));
        }
        Ok(Spectrum::ExpectedShortfall { p })
    }

    /// Coefficient of risk aversion, if this is an exponential spectrum.
    pub fn k(&self) -> Option<f64> {
        match *self {
            Spectrum::Exponential { k } => Some(k),
            _ => None,
        }
    }

    pub fn density(&self, u: f64) -> f64 {
        match *self {
            Spectrum::Exponential { k } => k * (-k * (1.0 - u)).exp() / -(-k).exp_m1(),
            Spectrum::Uniform => 1.0,
            Spectrum::ExpectedShortfall { p } => {
                if u >= p {
                    1.0 / (1.0 - p)
                } else {
                    0.0
                }
            }
        }
    }

    /// `int_0^u phi`.
    pub fn cumulative(&self, u: f64) -> f64 {
        self.segment_integral(0.0, u)
    }

    /// `int_a^b phi(u) du` in closed form, for `0 <= a <= b <= 1`.
    pub fn segment_integral(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b, "segment [{a}, {b}] is reversed");
        let a = a.clamp(0.0, 1.0);
        let b = b.clamp(0.0, 1.0);
        if b <= a {
            return 0.0;
        }
        match *self {
            Spectrum::Exponential { k } => {
                // e^{-k(1-b)} (1 - e^{-k(b-a)}) / (1 - e^{-k})
                (-k * (1.0 - b)).exp() * -(-k * (b - a)).exp_m1() / -(-k).exp_m1()
            }
            Spectrum::Uniform => b - a,
            Spectrum::ExpectedShortfall { p } => (b.max(p) - a.max(p)) / (1.0 - p),
        }
    }

    /// `int_a^b (1 - u) phi(u) du` in closed form.
    pub fn linear_segment_integral(&self, a: f64, b: f64) -> f64 {
        let a = a.clamp(0.0, 1.0);
        let b = b.clamp(0.0, 1.0);
        if b <= a {
            return 0.0;
        }
        match *self {
            Spectrum::Exponential { k } => {
                let (wa, wb) = (1.0 - a, 1.0 - b);
                let prim = |w: f64| (-k * w).exp() * (w + 1.0 / k);
                (prim(wb) - prim(wa)) / -(-k).exp_m1()
            }
            Spectrum::Uniform => 0.5 * ((1.0 - a).powi(2) - (1.0 - b).powi(2)),
            Spectrum::ExpectedShortfall { p } => {
                let (a, b) = (a.max(p), b.max(p));
                0.5 * ((1.0 - a).powi(2) - (1.0 - b).powi(2)) / (1.0 - p)
            }
        }
    }
}

impl std::fmt::Display for Spectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Spectrum::Exponential { k } => write!(f, "exp(k={k})"),
            Spectrum::Uniform => write!(f, "uniform"),
            Spectrum::ExpectedShortfall { p } => write!(f, "es(p={p})"),
        }
    }
}

/// Default risk aversion grid.
pub const DEFAULT_K_GRID: [f64; 6] = [1.0, 5.0, 10.0, 20.0, 100.0, 200.0];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureConfig};

    #[test]
    fn rejects_nonpositive_k() {
        assert!(Spectrum::exponential(0.0).is_err());
        assert!(Spectrum::exponential(-1.0).is_err());
        assert!(Spectrum::exponential(f64::NAN).is_err());
    }

    #[test]
    fn normalization_and_empty_segment() {
        for k in DEFAULT_K_GRID {
            let s = Spectrum::exponential(k).unwrap();
            assert!((s.segment_integral(0.0, 1.0) - 1.0).abs() < 1e-15);
            assert_eq!(s.segment_integral(0.3, 0.3), 0.0);
        }
    }

    #[test]
    fn upper_half_at_k1() {
        let s = Spectrum::exponential(1.0).unwrap();
        let expected = (1.0 - (-0.5f64).exp()) / (1.0 - (-1.0f64).exp());
        assert!((s.segment_integral(0.5, 1.0) - expected).abs() < 1e-15);
        assert!((s.segment_integral(0.5, 1.0) - 0.622459).abs() < 1e-6);
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        let cfg = QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 500 };
        for s in [
            Spectrum::exponential(3.0).unwrap(),
            Spectrum::exponential(200.0).unwrap(),
            Spectrum::Uniform,
            Spectrum::expected_shortfall(0.9).unwrap(),
        ] {
            for (a, b) in [(0.0, 0.25), (0.1, 0.95), (0.92, 1.0)] {
                let seg = integrate(|u| s.density(u), a, b, &cfg).unwrap().value;
                assert!((seg - s.segment_integral(a, b)).abs() < 1e-10, "{s} [{a},{b}]");
                let lin = integrate(|u| (1.0 - u) * s.density(u), a, b, &cfg).unwrap().value;
                assert!((lin - s.linear_segment_integral(a, b)).abs() < 1e-10, "{s} [{a},{b}]");
            }
        }
    }

    #[test]
    fn density_is_nondecreasing() {
        let s = Spectrum::exponential(20.0).unwrap();
        let mut prev = 0.0;
        for i in 0..=100 {
            let d = s.density(i as f64 / 100.0);
            assert!(d > 0.0 && d >= prev);
            prev = d;
        }
    }
}
