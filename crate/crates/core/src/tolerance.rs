use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by the scan, clustering and case decisions.
///
/// `tol_deg` and `tol_case` default to scale-aware formulas; setting them
/// pins an absolute value instead.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Allowed deviation of the shifted band minimum from zero.
    pub tol_shift: f64,
    /// Eigenvalue clustering threshold. `None` means `max(1e-10, 1e-8·‖H(θ)‖)`.
    pub tol_deg: Option<f64>,
    /// Slack for accepting a quasi-momentum as a band minimizer.
    pub tol_theta: f64,
    /// Zero test for A₁, P₁, A₂. `None` means `1e-10·(1 + ‖V‖·max|s±|)`.
    pub tol_case: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_shift: 1e-9,
            tol_deg: None,
            tol_theta: 1e-9,
            tol_case: None,
        }
    }
}

impl Tolerances {
    pub fn degeneracy(&self, matrix_norm: f64) -> f64 {
        self.tol_deg
            .unwrap_or_else(|| f64::max(1e-10, 1e-8 * matrix_norm))
    }

    pub fn case(&self, potential_norm: f64, s_max: f64) -> f64 {
        self.tol_case
            .unwrap_or(1e-10 * (1.0 + potential_norm * s_max))
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        positive("tol_shift", self.tol_shift)?;
        positive("tol_theta", self.tol_theta)?;
        if let Some(v) = self.tol_deg {
            positive("tol_deg", v)?;
        }
        if let Some(v) = self.tol_case {
            positive("tol_case", v)?;
        }
        Ok(())
    }
}
