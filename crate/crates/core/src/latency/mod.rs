//! Edge latency families and the scalar functionals built on top of them.
//!
//! Every family is strictly increasing (or constant, for background edges)
//! and C¹ on its feasible domain, with the derivative and the antiderivative
//! from zero available in closed form:
//!
//! ```text
//! family     φ(y)              φ'(y)            ∫₀ʸ φ
//! affine     a·y + b           a                a·y²/2 + b·y
//! constant   c                 0                c·y
//! monomial   k·yᵖ + b          k·p·yᵖ⁻¹         k·yᵖ⁺¹/(p+1) + b·y
//! mm1        1/(μ − y)         1/(μ − y)²       ln(μ/(μ − y))
//! ```

mod functionals;

pub use functionals::*;

use serde::{Deserialize, Serialize};

/// Loads closer than this to an M/M/1 capacity are rejected.
pub const CAPACITY_GUARD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LatencySpec {
    /// Single-server queue, `1/(capacity - y)`.
    Mm1 { capacity: f64 },
    Affine {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    /// Load-independent delay. Only sensible for background or tie-free edges.
    Constant { value: f64 },
    Monomial {
        coefficient: f64,
        exponent: f64,
        #[serde(default)]
        intercept: f64,
    },
}

impl LatencySpec {
    pub fn mm1(capacity: f64) -> Self {
        LatencySpec::Mm1 { capacity }
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        LatencySpec::Affine { slope, intercept }
    }

    pub fn constant(value: f64) -> Self {
        LatencySpec::Constant { value }
    }

    pub fn monomial(coefficient: f64, exponent: f64, intercept: f64) -> Self {
        LatencySpec::Monomial {
            coefficient,
            exponent,
            intercept,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be finite"))
            }
        };
        match *self {
            LatencySpec::Mm1 { capacity } => {
                finite(capacity, "capacity")?;
                if capacity <= 0.0 {
                    return Err(format!("capacity must be positive, got {capacity}"));
                }
            }
            LatencySpec::Affine { slope, intercept } => {
                finite(slope, "slope")?;
                finite(intercept, "intercept")?;
                if slope <= 0.0 {
                    return Err(format!(
                        "affine slope must be positive (use `constant` for flat delays), got {slope}"
                    ));
                }
                if intercept < 0.0 {
                    return Err(format!("intercept must be nonnegative, got {intercept}"));
                }
            }
            LatencySpec::Constant { value } => {
                finite(value, "value")?;
                if value < 0.0 {
                    return Err(format!("constant delay must be nonnegative, got {value}"));
                }
            }
            LatencySpec::Monomial {
                coefficient,
                exponent,
                intercept,
            } => {
                finite(coefficient, "coefficient")?;
                finite(exponent, "exponent")?;
                finite(intercept, "intercept")?;
                if coefficient <= 0.0 {
                    return Err(format!("coefficient must be positive, got {coefficient}"));
                }
                if exponent < 1.0 {
                    return Err(format!("exponent must be at least 1, got {exponent}"));
                }
                if intercept < 0.0 {
                    return Err(format!("intercept must be nonnegative, got {intercept}"));
                }
            }
        }
        Ok(())
    }

    pub fn capacity(&self) -> Option<f64> {
        match *self {
            LatencySpec::Mm1 { capacity } => Some(capacity),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, LatencySpec::Constant { .. })
    }

    /// Whether `y` lies in the evaluation domain (nonnegative, and for M/M/1
    /// at least [`CAPACITY_GUARD`] below capacity).
    pub fn is_feasible(&self, y: f64) -> bool {
        if !y.is_finite() || y < -1e-12 {
            return false;
        }
        match *self {
            LatencySpec::Mm1 { capacity } => y < capacity - CAPACITY_GUARD,
            _ => true,
        }
    }

    /// φ(y); callers are expected to have checked feasibility.
    pub fn value(&self, y: f64) -> f64 {
        match *self {
            LatencySpec::Mm1 { capacity } => 1.0 / (capacity - y),
            LatencySpec::Affine { slope, intercept } => slope * y + intercept,
            LatencySpec::Constant { value } => value,
            LatencySpec::Monomial {
                coefficient,
                exponent,
                intercept,
            } => coefficient * pos(y).powf(exponent) + intercept,
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match *self {
            LatencySpec::Mm1 { capacity } => {
                let s = capacity - y;
                1.0 / (s * s)
            }
            LatencySpec::Affine { slope, .. } => slope,
            LatencySpec::Constant { .. } => 0.0,
            LatencySpec::Monomial {
                coefficient,
                exponent,
                ..
            } => {
                if exponent == 1.0 {
                    coefficient
                } else {
                    coefficient * exponent * pos(y).powf(exponent - 1.0)
                }
            }
        }
    }

    /// ∫₀ʸ φ(w) dw.
    pub fn antiderivative(&self, y: f64) -> f64 {
        match *self {
            LatencySpec::Mm1 { capacity } => (capacity / (capacity - y)).ln(),
            LatencySpec::Affine { slope, intercept } => 0.5 * slope * y * y + intercept * y,
            LatencySpec::Constant { value } => value * y,
            LatencySpec::Monomial {
                coefficient,
                exponent,
                intercept,
            } => coefficient * pos(y).powf(exponent + 1.0) / (exponent + 1.0) + intercept * y,
        }
    }

    /// Marginal latency φ*(y) = φ(y) + y·φ'(y).
    pub fn marginal(&self, y: f64) -> f64 {
        self.value(y) + y * self.derivative(y)
    }

    /// d/dy φ*(y) = 2φ'(y) + y·φ''(y).
    pub fn marginal_derivative(&self, y: f64) -> f64 {
        let second = match *self {
            LatencySpec::Mm1 { capacity } => {
                let s = capacity - y;
                2.0 / (s * s * s)
            }
            LatencySpec::Affine { .. } | LatencySpec::Constant { .. } => 0.0,
            LatencySpec::Monomial {
                coefficient,
                exponent,
                ..
            } => {
                if exponent == 1.0 {
                    0.0
                } else {
                    coefficient * exponent * (exponent - 1.0) * pos(y).powf(exponent - 2.0)
                }
            }
        };
        2.0 * self.derivative(y) + y * second
    }

    /// Whether φ* is non-decreasing on `[0, y_max]` (clipped to the M/M/1
    /// domain). Checked on a uniform grid of the closed-form derivative.
    pub fn marginal_is_nondecreasing(&self, y_max: f64) -> bool {
        let hi = match self.capacity() {
            Some(c) => y_max.min(c - 1e-6).max(0.0),
            None => y_max.max(0.0),
        };
        const GRID: usize = 256;
        (0..=GRID).all(|k| {
            let y = hi * k as f64 / GRID as f64;
            self.marginal_derivative(y) >= 0.0
        })
    }

    /// inf φ' over `[0, y_max]`, from the monotonicity of φ' in each family.
    pub fn min_derivative(&self, _y_max: f64) -> f64 {
        match *self {
            // φ' increasing in y for all of these, so the infimum sits at 0
            LatencySpec::Mm1 { capacity } => 1.0 / (capacity * capacity),
            LatencySpec::Affine { slope, .. } => slope,
            LatencySpec::Constant { .. } => 0.0,
            LatencySpec::Monomial {
                coefficient,
                exponent,
                ..
            } => {
                if exponent == 1.0 {
                    coefficient
                } else {
                    0.0
                }
            }
        }
    }
}

fn pos(y: f64) -> f64 {
    y.max(0.0)
}

/// Which per-edge cost drives equilibrium computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CostModel {
    /// The latencies themselves (Wardrop equilibria).
    #[default]
    Latency,
    /// Marginal latencies φ* (social optima).
    Marginal,
}

impl CostModel {
    pub fn cost(self, spec: &LatencySpec, y: f64) -> f64 {
        match self {
            CostModel::Latency => spec.value(y),
            CostModel::Marginal => spec.marginal(y),
        }
    }

    /// Antiderivative of [`CostModel::cost`] from zero. For the marginal
    /// model this is `y·φ(y)`, the edge's contribution to aggregate delay.
    pub fn potential(self, spec: &LatencySpec, y: f64) -> f64 {
        match self {
            CostModel::Latency => spec.antiderivative(y),
            CostModel::Marginal => y * spec.value(y),
        }
    }
}

/// Per-edge diffusion intensities σ_r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: Vec<f64>,
}

impl NoiseSpec {
    pub fn zero(edge_count: usize) -> Self {
        NoiseSpec {
            sigma: vec![0.0; edge_count],
        }
    }

    pub fn uniform(edge_count: usize, sigma: f64) -> Self {
        NoiseSpec {
            sigma: vec![sigma; edge_count],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sigma.iter().all(|&s| s == 0.0)
    }

    /// σ² = Σ_r σ_r².
    pub fn total_variance(&self) -> f64 {
        self.sigma.iter().map(|s| s * s).sum()
    }

    pub fn validate(&self, edge_count: usize) -> crate::Result<()> {
        if self.sigma.len() != edge_count {
            return Err(crate::Error::DimensionMismatch {
                expected: edge_count,
                got: self.sigma.len(),
            });
        }
        if let Some(s) = self.sigma.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(crate::Error::OutOfRange(format!(
                "noise intensity must be finite and nonnegative, got {s}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn marginal_latency_examples() {
        assert_eq!(LatencySpec::affine(10.0, 0.0).marginal(4.0), 80.0);
        assert_eq!(LatencySpec::constant(3.5).marginal(2.0), 3.5);
        assert_relative_eq!(LatencySpec::mm1(2.0).marginal(1.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(LatencySpec::affine(0.0, 1.0).validate().is_err());
        assert!(LatencySpec::mm1(-1.0).validate().is_err());
        assert!(LatencySpec::monomial(1.0, 0.5, 0.0).validate().is_err());
        assert!(LatencySpec::constant(f64::NAN).validate().is_err());
        assert!(LatencySpec::monomial(2.0, 3.0, 1.0).validate().is_ok());
    }

    #[test]
    fn mm1_guard_rejects_near_capacity() {
        let l = LatencySpec::mm1(2.0);
        assert!(l.is_feasible(1.999));
        assert!(!l.is_feasible(2.0 - 5e-10));
        assert!(!l.is_feasible(2.5));
    }

    #[test]
    fn antiderivatives_match_quadrature() {
        let specs = [
            LatencySpec::mm1(3.0),
            LatencySpec::affine(2.0, 1.0),
            LatencySpec::constant(4.0),
            LatencySpec::monomial(0.5, 2.5, 1.0),
        ];
        for spec in &specs {
            let y = 1.7;
            let n = 20_000;
            let h = y / n as f64;
            // composite Simpson
            let mut acc = spec.value(0.0) + spec.value(y);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * spec.value(k as f64 * h);
            }
            let quad = acc * h / 3.0;
            assert_relative_eq!(spec.antiderivative(y), quad, max_relative = 1e-10);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let specs = [
            LatencySpec::mm1(3.0),
            LatencySpec::affine(2.0, 1.0),
            LatencySpec::monomial(0.5, 2.5, 1.0),
        ];
        for spec in &specs {
            let y = 1.3;
            let h = 1e-6;
            let fd = (spec.value(y + h) - spec.value(y - h)) / (2.0 * h);
            assert_relative_eq!(spec.derivative(y), fd, max_relative = 1e-7);
            let fd2 = (spec.marginal(y + h) - spec.marginal(y - h)) / (2.0 * h);
            assert_relative_eq!(spec.marginal_derivative(y), fd2, max_relative = 1e-6);
        }
    }

    #[test]
    fn min_derivative_is_a_lower_bound() {
        let specs = [
            LatencySpec::mm1(3.0),
            LatencySpec::affine(2.0, 1.0),
            LatencySpec::monomial(0.5, 2.5, 1.0),
            LatencySpec::monomial(0.5, 1.0, 0.0),
        ];
        for spec in &specs {
            let m = spec.min_derivative(2.5);
            for k in 0..=100 {
                let y = 2.5 * k as f64 / 100.0;
                assert!(spec.derivative(y) >= m - 1e-15);
            }
        }
    }

    #[test]
    fn marginal_flag_holds_for_supported_families() {
        assert!(LatencySpec::mm1(2.0).marginal_is_nondecreasing(5.0));
        assert!(LatencySpec::constant(1.0).marginal_is_nondecreasing(5.0));
        assert!(LatencySpec::monomial(1.0, 3.0, 0.0).marginal_is_nondecreasing(5.0));
    }

    #[test]
    fn noise_aggregate() {
        let n = NoiseSpec::uniform(2, 0.5);
        assert_eq!(n.total_variance(), 0.5);
        assert!(NoiseSpec::zero(3).is_zero());
        assert!(n.validate(3).is_err());
    }
}
