use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::quantum::DensityOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntropyKind {
    #[serde(rename = "vonNeumann")]
    VonNeumann,
    #[serde(rename = "min")]
    Min,
    #[serde(rename = "max")]
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    #[serde(rename = "closedForm")]
    ClosedForm,
    #[serde(rename = "convexSolve")]
    ConvexSolve,
    #[serde(rename = "truncationHeuristic")]
    TruncationHeuristic,
    #[serde(rename = "classicalExact")]
    ClassicalExact,
}

/// A computed entropy value (bits) with its smoothing parameter, method tag,
/// optimizer certificate and a bound on solver suboptimality.
///
/// For `kind = Max` the certificate is the optimal conditioning operator σ;
/// for `kind = Min` it is the normalized direction of the optimal feasible
/// operator (its scale is 2^(−value)). Smoothed reports also carry the
/// smoothed state ρ′ and its purified distance to the input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyReport {
    pub value: f64,
    pub epsilon: f64,
    pub kind: EntropyKind,
    pub method: SolveMethod,
    pub certificate: Option<DensityOperator>,
    pub solver_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub smoothed_state: Option<DensityOperator>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub smoothing_distance: Option<f64>,
}

impl EntropyReport {
    pub fn exact(value: f64, kind: EntropyKind, method: SolveMethod) -> Self {
        Self {
            value,
            epsilon: 0.0,
            kind,
            method,
            certificate: None,
            solver_gap: 0.0,
            smoothed_state: None,
            smoothing_distance: None,
        }
    }
}

/// A nonnegative probability vector summing to 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassicalDistribution {
    probabilities: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "negative or non-finite probability".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(CoreError::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}
