//! Configuration-driven runs: validate → shift → scan → ground spaces →
//! coefficients → verification suites → report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{self, ScanOptions, ThetaSet};
use crate::model::config::load_model;
use crate::model::presets::{preset_model, PresetParams};
use crate::model::{shift_to_zero_with, DisorderSupport, Model, ValidationReport};
use crate::perturbation::{
    self, best_theta, edge_bound, edge_coefficients_all, tied_thetas, EdgeCase, EdgeCoefficients,
};
use crate::report::{fmt_f64, fmt_opt, theta_columns, Table};
use crate::tolerance::Tolerances;
use crate::verification::fiber::{fiber_bound_sandwich, SandwichReport};
use crate::verification::fit::{fit_exponent, ExponentFit};
use crate::verification::kirsch_simon::{
    kirsch_simon_sandwich, uniform_theta_grid, DispersionFactor, KirschSimonReport,
};
use crate::verification::quasiperiodic::{
    quartic_trial_energy, quasiperiodic_rayleigh, QuarticTrial, QuasiperiodicReport,
};
use crate::verification::torus::{monte_carlo, EigenOptions, MonteCarloSummary, Sampler};

/// A preset name or a path to a model JSON file. Strings ending in `.json`
/// or naming an existing file are paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Preset {
        name: String,
        #[serde(default)]
        params: PresetParams,
    },
    File {
        path: PathBuf,
    },
}

impl ModelSource {
    pub fn parse(s: &str) -> Self {
        let path = PathBuf::from(s);
        if s.ends_with(".json") || path.is_file() {
            ModelSource::File { path }
        } else {
            ModelSource::Preset {
                name: s.to_string(),
                params: PresetParams::default(),
            }
        }
    }

    pub fn load(&self) -> Result<Model> {
        match self {
            ModelSource::Preset { name, params } => preset_model(name, params),
            ModelSource::File { path } => load_model(path),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FiberSweep,
    Montecarlo,
    Quasiperiodic,
    Quartic,
    KirschSimon,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fiber-sweep" => Ok(Suite::FiberSweep),
            "montecarlo" => Ok(Suite::Montecarlo),
            "quasiperiodic" => Ok(Suite::Quasiperiodic),
            "quartic" => Ok(Suite::Quartic),
            "kirsch-simon" => Ok(Suite::KirschSimon),
            _ => Err(Error::Config(format!(
                "unknown verification suite `{s}` (expected fiber-sweep, montecarlo, quasiperiodic, quartic or kirsch-simon)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
    /// Torus side in cells.
    #[serde(rename = "L")]
    pub cells: usize,
    pub samples: usize,
    pub seed: Option<u64>,
    pub sampler: Sampler,
    pub eigen: EigenOptions,
    /// Truncation sizes for the quasi-periodic convergence check.
    pub n_list: Vec<usize>,
    /// Exponent `ξ` of the quartic trial state.
    pub xi: f64,
    /// Grid points per dimension for the Kirsch–Simon check.
    pub theta_points: usize,
    pub dispersion: DispersionFactor,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            suites: Vec::new(),
            cells: 64,
            samples: 0,
            seed: None,
            sampler: Sampler::EndpointBernoulli,
            eigen: EigenOptions::default(),
            n_list: vec![8, 16, 32, 64, 128, 256, 512],
            xi: 0.3,
            theta_points: 256,
            dispersion: DispersionFactor::Reduced,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    /// Standard output when absent.
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: ModelSource,
    /// Overrides the model's coupling support `(s₋, s₊)`; the regime is
    /// inferred from the signs.
    pub support: Option<[f64; 2]>,
    #[serde(rename = "epsilon_list")]
    pub epsilons: Vec<f64>,
    pub bz: ScanOptions,
    pub tolerances: Tolerances,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSource::Preset {
                name: "anderson".into(),
                params: PresetParams::default(),
            },
            support: None,
            epsilons: Vec::new(),
            bz: ScanOptions::default(),
            tolerances: Tolerances::default(),
            verify: VerifyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the invariants and puts the configuration in canonical form:
    /// `ε` ascending, suites sorted and deduplicated, tolerances synced with
    /// the scan options.
    pub fn resolve(mut self) -> Result<Self> {
        self.tolerances.validate().map_err(Error::Config)?;
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!(
                "epsilon values must be positive, got {e}"
            )));
        }
        self.epsilons.sort_by(f64::total_cmp);
        self.epsilons.dedup();
        self.verify.suites.sort();
        self.verify.suites.dedup();
        if self.bz.grid_per_dim == 0 {
            return Err(Error::Config("bz.grid_per_dim must be positive".into()));
        }
        self.bz.tol_theta = self.tolerances.tol_theta;
        let mc = self.verify.suites.contains(&Suite::Montecarlo);
        if mc && self.verify.samples == 0 {
            return Err(Error::Config("montecarlo needs samples > 0".into()));
        }
        if self.verify.samples > 0 && self.verify.seed.is_none() {
            return Err(Error::Config(
                "a seed is required whenever samples > 0".into(),
            ));
        }
        if mc && self.verify.cells == 0 {
            return Err(Error::Config("montecarlo needs L > 0".into()));
        }
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelSummary {
    pub dimension: usize,
    pub period: usize,
    pub cell_size: usize,
    pub energy_shift: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    pub regime: crate::model::Regime,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub epsilon: f64,
    pub theta: Vec<f64>,
    pub case: EdgeCase,
    pub bound: f64,
    pub modulo_cubic: bool,
    /// Minimizers sharing the lowest bound; the lexicographically first is
    /// reported.
    pub tied: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationResults {
    pub fiber_sweep: Option<SandwichReport>,
    pub montecarlo: Option<Vec<MonteCarloSummary>>,
    pub montecarlo_fit: Option<ExponentFit>,
    pub quasiperiodic: Option<QuasiperiodicReport>,
    pub quartic: Option<Vec<QuarticTrial>>,
    pub quartic_fit: Option<ExponentFit>,
    pub kirsch_simon: Option<KirschSimonReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub model: ModelSummary,
    pub validation: ValidationReport,
    pub theta_set: ThetaSet,
    pub coefficients: Vec<EdgeCoefficients>,
    pub bounds: Vec<BoundRow>,
    pub verification: VerificationResults,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl RunReport {
    /// One row per `ε`: the selected minimizer, case and predicted bound,
    /// with the fiber and Monte-Carlo minima when those suites ran.
    pub fn bounds_table(&self) -> Table {
        let d = self.model.dimension;
        let mut header = vec!["epsilon".to_string()];
        header.extend(theta_columns(d));
        header.extend(["case", "bound", "fiber_min", "montecarlo_min"].map(String::from));
        let mut t = Table::new(header);
        for b in &self.bounds {
            let fiber = self
                .verification
                .fiber_sweep
                .as_ref()
                .and_then(|r| r.rows.iter().find(|x| x.epsilon == b.epsilon))
                .map(|x| x.value);
            let mc = self
                .verification
                .montecarlo
                .as_ref()
                .and_then(|r| r.iter().find(|x| x.epsilon == b.epsilon))
                .map(|x| x.minimum);
            let mut row = vec![fmt_f64(b.epsilon)];
            row.extend(b.theta.iter().map(|t| fmt_f64(*t)));
            row.push(format!("{:?}", b.case));
            row.push(fmt_f64(b.bound));
            row.push(fmt_opt(fiber));
            row.push(fmt_opt(mc));
            t.push(row);
        }
        t
    }

    pub fn render(&self) -> Result<String> {
        match self.config.output.format {
            OutputFormat::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            OutputFormat::Csv => self.bounds_table().to_csv(),
        }
    }
}

fn check(checks: &mut Vec<Check>, name: &str, passed: bool, detail: String) {
    if !passed {
        log::warn!("check `{name}` failed: {detail}");
    }
    checks.push(Check {
        name: name.to_string(),
        passed,
        detail,
    });
}

/// Loads the model and applies the support override.
pub fn load_run_model(config: &RunConfig) -> Result<Model> {
    let model = config.model.load()?;
    Ok(match config.support {
        Some([lo, hi]) => model.with_disorder(DisorderSupport::infer(lo, hi)?),
        None => model,
    })
}

/// Shifts the hopping operator so that the band minimum is zero and scans
/// for the minimizers.
pub fn prepare(model: &Model, bz: &ScanOptions, tol: &Tolerances) -> Result<(Model, ThetaSet)> {
    let shifted = model.with_hopping(shift_to_zero_with(&model.hopping, bz, tol.tol_shift)?);
    let theta_set = floquet::scan_theta_set(&shifted.hopping, bz)?;
    Ok((shifted, theta_set))
}

pub fn run_pipeline(config: RunConfig) -> Result<RunReport> {
    let config = config.resolve()?;
    let tol = config.tolerances;
    let raw = load_run_model(&config)?;
    let validation = raw.validate();
    let mut checks = Vec::new();
    for h in &validation.checks {
        check(
            &mut checks,
            &format!("hypothesis:{}", h.hypothesis),
            h.passed,
            h.detail.clone(),
        );
    }

    let (model, theta_set) = prepare(&raw, &config.bz, &tol)?;
    log::info!(
        "band minimum shifted by {}; {} minimizer(s)",
        model.hopping.energy_shift(),
        theta_set.minimizers.len()
    );
    let coefficients = edge_coefficients_all(&model, &theta_set.minimizers, &tol)?;

    for c in &coefficients {
        let tag = format!("{:?}", c.theta);
        if let (Some(a1), Some(a2)) = (c.a1, c.a2) {
            check(
                &mut checks,
                "sign:A1<=0,A2<=0",
                a1 <= c.tol_case && a2 <= c.tol_case,
                format!("theta {tag}: A1 = {a1}, A2 = {a2}"),
            );
        }
        let degenerate = c.first_order().abs() + c.second_order().abs() <= c.tol_case;
        let consistent = match c.regime {
            crate::model::Regime::SignChanging => c.nondegenerate != degenerate,
            // in the positive regime A′₁ can vanish with V^□ψ ≠ 0
            crate::model::Regime::Positive => c.nondegenerate || degenerate,
        };
        check(
            &mut checks,
            "nondegeneracy-biconditional",
            consistent,
            format!(
                "theta {tag}: nondegenerate = {}, case = {:?}",
                c.nondegenerate, c.case
            ),
        );
        let g = floquet::ground_space(&model.hopping, &c.theta, &tol)?;
        let pm = perturbation::perturbation_matrix(&g, &model.potential)?;
        let defect = pm.orthogonality_defect(&model.potential);
        check(
            &mut checks,
            "orthogonality-relations",
            defect <= 1e-10,
            format!("theta {tag}: defect {defect:e}"),
        );
    }

    let bounds: Vec<BoundRow> = config
        .epsilons
        .iter()
        .filter_map(|&e| {
            let i = best_theta(&coefficients, e)?;
            let b = edge_bound(&coefficients[i], e);
            Some(BoundRow {
                epsilon: e,
                theta: coefficients[i].theta.clone(),
                case: coefficients[i].case,
                bound: b.value,
                modulo_cubic: b.modulo_cubic,
                tied: tied_thetas(&coefficients, e),
            })
        })
        .collect();

    let mut verification = VerificationResults::default();
    let primary = best_theta(
        &coefficients,
        config.epsilons.first().copied().unwrap_or(0.0),
    );
    let vc = &config.verify;
    for suite in &vc.suites {
        match suite {
            Suite::FiberSweep => {
                let Some(i) = primary else { continue };
                if config.epsilons.is_empty() {
                    continue;
                }
                let rep = fiber_bound_sandwich(&model, &coefficients[i], &config.epsilons)?;
                check(
                    &mut checks,
                    "fiber-sweep",
                    rep.passed(),
                    format!(
                        "upper ok = {}, constant stable = {:?}, no-motion ok = {:?}, residual slope = {:?}",
                        rep.upper_ok, rep.constant_stable, rep.no_motion_ok, rep.residual_slope
                    ),
                );
                verification.fiber_sweep = Some(rep);
            }
            Suite::Montecarlo => {
                let seed = vc.seed.expect("resolved config has a seed");
                let runs = config
                    .epsilons
                    .iter()
                    .map(|&e| {
                        monte_carlo(&model, e, vc.cells, vc.samples, vc.sampler, seed, &vc.eigen)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let minima: Vec<f64> = runs.iter().map(|r| r.minimum).collect();
                verification.montecarlo_fit = fit_exponent(&config.epsilons, &minima).ok();
                verification.montecarlo = Some(runs);
            }
            Suite::Quasiperiodic => {
                let Some(i) = primary else { continue };
                let g = floquet::ground_space(&model.hopping, &coefficients[i].theta, &tol)?;
                let u0 = g.basis.column(0).into_owned();
                let eps = config.epsilons.first().copied().unwrap_or(0.0);
                let rep = quasiperiodic_rayleigh(
                    &model.hopping,
                    &model.potential,
                    model.disorder.s_plus(),
                    eps,
                    &coefficients[i].theta,
                    &u0,
                    &vc.n_list,
                )?;
                let ok = rep.slope.is_none_or(|s| (-1.3..=-0.7).contains(&s));
                check(
                    &mut checks,
                    "quasiperiodic-convergence",
                    ok,
                    format!("slope {:?}", rep.slope),
                );
                verification.quasiperiodic = Some(rep);
            }
            Suite::Quartic => {
                let trials = config
                    .epsilons
                    .iter()
                    .map(|&e| quartic_trial_energy(e, vc.xi, None))
                    .collect::<Result<Vec<_>>>()?;
                let ok = trials.iter().all(|t| t.satisfied);
                check(
                    &mut checks,
                    "quartic-trial-bound",
                    ok,
                    trials
                        .iter()
                        .map(|t| format!("eps {}: {} vs {}", t.epsilon, t.value, t.bound))
                        .collect::<Vec<_>>()
                        .join("; "),
                );
                let values: Vec<f64> = trials.iter().map(|t| t.value).collect();
                verification.quartic_fit = fit_exponent(&config.epsilons, &values).ok();
                verification.quartic = Some(trials);
            }
            Suite::KirschSimon => {
                let g = model.geometry();
                let grid = uniform_theta_grid(g.dimension(), g.period(), vc.theta_points);
                match kirsch_simon_sandwich(&model.hopping, &grid, vc.dispersion) {
                    Ok(rep) => {
                        check(
                            &mut checks,
                            "kirsch-simon",
                            rep.passed(),
                            format!(
                                "{} lower / {} upper violations",
                                rep.lower_violations, rep.upper_violations
                            ),
                        );
                        verification.kirsch_simon = Some(rep);
                    }
                    Err(Error::Inapplicable(why)) => log::warn!("kirsch-simon skipped: {why}"),
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    let g = model.geometry();
    Ok(RunReport {
        model: ModelSummary {
            dimension: g.dimension(),
            period: g.period(),
            cell_size: g.cell_size(),
            energy_shift: model.hopping.energy_shift(),
            s_minus: model.disorder.s_minus(),
            s_plus: model.disorder.s_plus(),
            regime: model.disorder.regime(),
        },
        config,
        validation,
        theta_set,
        coefficients,
        bounds,
        verification,
        checks,
        passed,
    })
}
