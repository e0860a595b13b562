//! JSON model files.
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "period": 2,
//!   "hoppings": [{"k": [0], "k_prime": [1], "m": [0], "re": -1.0, "im": 0.0}],
//!   "potential": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]],
//!   "disorder": {"s_minus": -1.0, "s_plus": 1.0, "regime": "SignChanging"}
//! }
//! ```
//!
//! `k` and `k_prime` are cell coordinates, `m` is the sublattice translation
//! (each component in `{-N, 0, N}`), and `potential` lists `V^□` row-major as
//! `[re, im]` pairs. An optional `energy_shift` records a diagonal shift that
//! has already been applied.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    DisorderSupport, HoppingOperator, LatticeGeometry, Model, Regime, SingleCellPotential,
};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoppingRecord {
    pub k: Vec<i64>,
    pub k_prime: Vec<i64>,
    pub m: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRecord {
    pub s_minus: f64,
    pub s_plus: f64,
    pub regime: Regime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub dimension: usize,
    pub period: usize,
    pub hoppings: Vec<HoppingRecord>,
    pub potential: Vec<[f64; 2]>,
    pub disorder: DisorderRecord,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub energy_shift: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl ModelFile {
    pub fn from_model(model: &Model) -> Self {
        let g = model.geometry();
        let hoppings = model
            .hopping
            .entries()
            .map(|(key, v)| HoppingRecord {
                k: g.site_coords(key.k),
                k_prime: g.site_coords(key.k_prime),
                m: key.m.clone(),
                re: v.re,
                im: v.im,
            })
            .collect();
        let v = model.potential.matrix();
        let n = v.nrows();
        let potential = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| [v[(i, j)].re, v[(i, j)].im])
            .collect();
        Self {
            dimension: g.dimension(),
            period: g.period(),
            hoppings,
            potential,
            disorder: DisorderRecord {
                s_minus: model.disorder.s_minus(),
                s_plus: model.disorder.s_plus(),
                regime: model.disorder.regime(),
            },
            energy_shift: model.hopping.energy_shift(),
        }
    }

    pub fn into_model(self) -> Result<Model> {
        let g = LatticeGeometry::new(self.dimension, self.period)?;
        let site = |coords: &[i64]| {
            g.try_site_index(coords).ok_or_else(|| {
                Error::InvalidModel(format!(
                    "{coords:?} is not a site of the {}-cell",
                    self.period
                ))
            })
        };
        let mut entries = Vec::with_capacity(self.hoppings.len());
        for rec in &self.hoppings {
            entries.push((
                site(&rec.k)?,
                site(&rec.k_prime)?,
                rec.m.clone(),
                Complex64::new(rec.re, rec.im),
            ));
        }
        let hopping =
            HoppingOperator::from_entries(g, entries)?.with_energy_shift(self.energy_shift);

        let n = g.cell_size();
        if self.potential.len() != n * n {
            return Err(Error::InvalidModel(format!(
                "potential has {} entries, expected {} for a {n}x{n} matrix",
                self.potential.len(),
                n * n
            )));
        }
        let matrix = CMatrix::from_row_iterator(
            n,
            n,
            self.potential
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im)),
        );
        let potential = SingleCellPotential::new(matrix)?;
        let disorder = DisorderSupport::new(
            self.disorder.s_minus,
            self.disorder.s_plus,
            self.disorder.regime,
        )?;
        Model::new(hopping, potential, disorder)
    }
}

pub fn model_from_json(text: &str) -> Result<Model> {
    serde_json::from_str::<ModelFile>(text)?.into_model()
}

pub fn model_to_json(model: &Model) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from_model(model))?)
}

pub fn load_model(path: &Path) -> Result<Model> {
    model_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::{preset_model, PresetParams};

    #[test]
    fn parses_documented_example() {
        let text = r#"{
          "dimension": 1, "period": 2,
          "hoppings": [
            {"k": [0], "k_prime": [0], "m": [0], "re": 2.0, "im": 0.0},
            {"k": [1], "k_prime": [1], "m": [0], "re": 2.0, "im": 0.0},
            {"k": [0], "k_prime": [1], "m": [0], "re": -1.0, "im": 0.0},
            {"k": [1], "k_prime": [0], "m": [0], "re": -1.0, "im": 0.0},
            {"k": [0], "k_prime": [1], "m": [-2], "re": -1.0, "im": 0.0},
            {"k": [1], "k_prime": [0], "m": [2], "re": -1.0, "im": 0.0}
          ],
          "potential": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]],
          "disorder": {"s_minus": -1.0, "s_plus": 1.0, "regime": "SignChanging"}
        }"#;
        let model = model_from_json(text).unwrap();
        let dipole = preset_model(
            "dipole",
            &PresetParams {
                period: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(model, dipole);
    }

    #[test]
    fn rejects_bad_potential_size() {
        let model = preset_model("anderson", &PresetParams::default()).unwrap();
        let mut file = ModelFile::from_model(&model);
        file.potential.push([0.0, 0.0]);
        assert!(file.into_model().is_err());
    }

    #[test]
    fn rejects_site_outside_cell() {
        let model = preset_model("anderson", &PresetParams::default()).unwrap();
        let mut file = ModelFile::from_model(&model);
        file.hoppings[0].k = vec![1];
        assert!(file.into_model().is_err());
    }
}
