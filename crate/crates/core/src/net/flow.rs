use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance on `|Σ_α x_iα − ρ_i|`.
pub const FLOW_SUM_TOLERANCE: f64 = 1e-9;

/// A path counts as used when `x_iα > SUPPORT_THRESHOLD · ρ_i`.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Path flows of all users, concatenated in user order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    values: Vec<f64>,
    offsets: Vec<usize>,
}

impl Flow {
    pub fn from_parts(values: Vec<f64>, offsets: Vec<usize>) -> Result<Flow> {
        if offsets.first() != Some(&0) || offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidFlow("malformed user offsets".into()));
        }
        let n = *offsets.last().expect("nonempty");
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: values.len(),
            });
        }
        Ok(Flow { values, offsets })
    }

    pub(crate) fn from_parts_unchecked(values: Vec<f64>, offsets: Vec<usize>) -> Flow {
        debug_assert_eq!(values.len(), *offsets.last().unwrap());
        Flow { values, offsets }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn user_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn user(&self, i: usize) -> &[f64] {
        &self.values[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn user_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Same layout, new coordinates.
    pub fn with_values(&self, values: Vec<f64>) -> Flow {
        assert_eq!(values.len(), self.values.len(), "flow layout mismatch");
        Flow {
            values,
            offsets: self.offsets.clone(),
        }
    }

    /// ‖self − other‖₁ over all coordinates.
    pub fn l1_distance(&self, other: &Flow) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn max_abs_difference(&self, other: &Flow) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Whether every coordinate is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

/// Per-edge loads: totals (including background) and per-user shares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub total: Vec<f64>,
    /// `per_user[i][r]` = y_ir.
    pub per_user: Vec<Vec<f64>>,
}
