//! The reference models: Anderson, dipole, the quartic `(-Δ)²` example and
//! the alloy model `-Δ + W` with a periodic background.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DisorderSupport, HoppingOperator, LatticeGeometry, Model, SingleCellPotential};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    /// `-Δ` on `ℤ^d`, `V^□ = δ₀`, `N = 1`.
    Anderson { dimension: usize },
    /// `-Δ` on `ℤ^d` with period `N ≥ 2`, `V^□ = δ₀ - δ_{e₁}`.
    Dipole { dimension: usize, period: usize },
    /// `(-Δ)²` on `ℤ`, `N = 3`, `V^□ = -½δ₋₁ + δ₀ - ½δ₁`.
    ///
    /// The symmetric cell `{-1, 0, 1}` is translated by `+1` onto the
    /// canonical cell `{0, 1, 2}`; `(-Δ)²` commutes with the translation.
    Quartic,
    /// `-Δ + W` with `W` periodic on `Nℤ^d` (values in cell order), `V^□ = δ₀`.
    AlloyPeriodicW {
        dimension: usize,
        period: usize,
        w: Vec<f64>,
    },
}

/// Optional parameters for building a preset by name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    pub dimension: Option<usize>,
    pub period: Option<usize>,
    pub w: Option<Vec<f64>>,
}

impl Preset {
    pub fn from_name(name: &str, params: &PresetParams) -> Result<Self> {
        let dimension = params.dimension.unwrap_or(1);
        match name.to_ascii_lowercase().as_str() {
            "anderson" => {
                if params.period.is_some_and(|n| n != 1) || params.w.is_some() {
                    return Err(Error::InvalidModel(
                        "the Anderson preset has period 1 and no background".into(),
                    ));
                }
                Ok(Preset::Anderson { dimension })
            }
            "dipole" => {
                if params.w.is_some() {
                    return Err(Error::InvalidModel(
                        "the dipole preset has no background".into(),
                    ));
                }
                Ok(Preset::Dipole {
                    dimension,
                    period: params.period.unwrap_or(2),
                })
            }
            "quartic" => {
                if params.dimension.is_some_and(|d| d != 1)
                    || params.period.is_some_and(|n| n != 3)
                    || params.w.is_some()
                {
                    return Err(Error::InvalidModel(
                        "the quartic preset is fixed to d = 1, N = 3".into(),
                    ));
                }
                Ok(Preset::Quartic)
            }
            "alloy" | "alloy-periodic-w" | "alloy_periodic_w" => {
                let period = params.period.unwrap_or(1);
                let size = period.pow(dimension as u32);
                Ok(Preset::AlloyPeriodicW {
                    dimension,
                    period,
                    w: params.w.clone().unwrap_or_else(|| vec![0.0; size]),
                })
            }
            _ => Err(Error::UnknownPreset(name.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Anderson { .. } => "anderson",
            Preset::Dipole { .. } => "dipole",
            Preset::Quartic => "quartic",
            Preset::AlloyPeriodicW { .. } => "alloy",
        }
    }

    pub fn build(&self) -> Result<Model> {
        match self {
            Preset::Anderson { dimension } => {
                let g = LatticeGeometry::new(*dimension, 1)?;
                Model::new(
                    HoppingOperator::laplacian_plus(g, &[0.0])?,
                    SingleCellPotential::from_diagonal(&[1.0])?,
                    DisorderSupport::symmetric(),
                )
            }
            Preset::Dipole { dimension, period } => {
                if *period < 2 {
                    return Err(Error::InvalidModel(
                        "the dipole needs N >= 2 so that e1 lies in the cell".into(),
                    ));
                }
                let g = LatticeGeometry::new(*dimension, *period)?;
                let mut v = vec![0.0; g.cell_size()];
                v[0] = 1.0;
                let mut e1 = vec![0; *dimension];
                e1[0] = 1;
                v[g.site_index(&e1)] = -1.0;
                Model::new(
                    HoppingOperator::laplacian_plus(g, &vec![0.0; g.cell_size()])?,
                    SingleCellPotential::from_diagonal(&v)?,
                    DisorderSupport::symmetric(),
                )
            }
            Preset::Quartic => {
                let g = LatticeGeometry::new(1, 3)?;
                let c = |x: f64| Complex64::new(x, 0.0);
                let stencil = [
                    (vec![-2], c(1.0)),
                    (vec![-1], c(-4.0)),
                    (vec![0], c(6.0)),
                    (vec![1], c(-4.0)),
                    (vec![2], c(1.0)),
                ];
                Model::new(
                    HoppingOperator::from_stencil(g, &stencil, &[0.0; 3])?,
                    SingleCellPotential::from_diagonal(&[-0.5, 1.0, -0.5])?,
                    DisorderSupport::symmetric(),
                )
            }
            Preset::AlloyPeriodicW {
                dimension,
                period,
                w,
            } => {
                let g = LatticeGeometry::new(*dimension, *period)?;
                if w.len() != g.cell_size() {
                    return Err(Error::InvalidModel(format!(
                        "W has {} values but the cell has {} sites",
                        w.len(),
                        g.cell_size()
                    )));
                }
                let mut v = vec![0.0; g.cell_size()];
                v[0] = 1.0;
                Model::new(
                    HoppingOperator::laplacian_plus(g, w)?,
                    SingleCellPotential::from_diagonal(&v)?,
                    DisorderSupport::symmetric(),
                )
            }
        }
    }
}

/// Builds a preset model by name.
pub fn preset_model(name: &str, params: &PresetParams) -> Result<Model> {
    Preset::from_name(name, params)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(m: &Model) -> Vec<f64> {
        let v = m.potential.matrix();
        (0..v.nrows()).map(|i| v[(i, i)].re).collect()
    }

    #[test]
    fn anderson_one_dimensional() {
        let m = preset_model("anderson", &PresetParams::default()).unwrap();
        assert_eq!(m.geometry().period(), 1);
        assert_eq!(diag(&m), vec![1.0]);
        assert!(m.validate().all_passed());
    }

    #[test]
    fn dipole_cell_potential() {
        let params = PresetParams {
            period: Some(2),
            ..Default::default()
        };
        let m = preset_model("dipole", &params).unwrap();
        assert_eq!(diag(&m), vec![1.0, -1.0]);
        assert!(m.potential.is_diagonal());
        assert!(m.validate().all_passed());
    }

    #[test]
    fn dipole_in_two_dimensions_uses_first_axis() {
        let params = PresetParams {
            dimension: Some(2),
            period: Some(2),
            ..Default::default()
        };
        let m = preset_model("dipole", &params).unwrap();
        // sites (0,0), (0,1), (1,0), (1,1); e1 = (1,0) has index 2
        assert_eq!(diag(&m), vec![1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn quartic_potential_in_cell_order() {
        let m = preset_model("quartic", &PresetParams::default()).unwrap();
        assert_eq!(diag(&m), vec![-0.5, 1.0, -0.5]);
        assert_eq!(m.geometry().period(), 3);
        let h = &m.hopping;
        assert_eq!(h.coefficient(0, 0, &[0]).re, 6.0);
        assert_eq!(h.coefficient(0, 1, &[0]).re, -4.0);
        assert_eq!(h.coefficient(0, 1, &[-3]).re, 1.0); // site -2
        assert_eq!(h.coefficient(0, 2, &[-3]).re, -4.0); // site -1
        assert!(m.validate().all_passed());
    }

    #[test]
    fn unknown_and_inconsistent() {
        assert!(matches!(
            preset_model("ising", &PresetParams::default()),
            Err(Error::UnknownPreset(_))
        ));
        let bad = PresetParams {
            period: Some(4),
            ..Default::default()
        };
        assert!(preset_model("quartic", &bad).is_err());
        let one = PresetParams {
            period: Some(1),
            ..Default::default()
        };
        assert!(preset_model("dipole", &one).is_err());
        let short_w = PresetParams {
            period: Some(2),
            w: Some(vec![1.0]),
            ..Default::default()
        };
        assert!(preset_model("alloy", &short_w).is_err());
    }
}
