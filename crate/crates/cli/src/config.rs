//! TOML run configuration. Every section is optional; missing values fall
//! back to the defaults below, and command-line flags override the file.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ipeps_dispersion::lattice::{high_symmetry_path, SymmetryPoint};
use ipeps_dispersion::{momentum_grid, CellPolicy, EvolutionParams, FitOptions, Momentum, TfimParams, UnitCell};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: TfimParams,
    pub evolution: EvolutionParams,
    pub momenta: MomentaSpec,
    pub cell: CellSpec,
    pub fit: FitConfig,
    pub trials: usize,
    pub output: OutputConfig,
    pub converge: ConvergeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: TfimParams {
                j: 0.1,
                g: 1.0,
                dimensionality: 2,
            },
            evolution: EvolutionParams::default(),
            momenta: MomentaSpec::Path { segment_samples: 2 },
            cell: CellSpec::Policy(PolicyName::Minimal),
            fit: FitConfig::default(),
            trials: 1,
            output: OutputConfig::default(),
            converge: ConvergeConfig::default(),
        }
    }
}

/// Which momenta to compute. Explicit components are given in units of π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MomentaSpec {
    /// The standard high-symmetry path; `segment_samples` counts both ends.
    Path {
        #[serde(default = "two")]
        segment_samples: usize,
    },
    Labels { labels: Vec<String> },
    Points { points: Vec<Vec<f64>> },
    /// Every momentum commensurate with a cell of these dimensions.
    Grid { dims: Vec<usize> },
}

fn two() -> usize {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Minimal,
    Common,
}

/// `"minimal"`, `"common"` or explicit cell dimensions such as `[2, 2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellSpec {
    Policy(PolicyName),
    Fixed(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub rel_tol: f64,
    pub min_frac: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        let d = FitOptions::default();
        Self {
            rel_tol: d.rel_tol,
            min_frac: d.min_frac,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub svg: bool,
    /// Fill `series_ref` and overlay the series on plots.
    pub oracle: bool,
    pub traces: bool,
    /// Oracle samples per path segment for `oracle` runs and plot overlays.
    pub oracle_samples: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            svg: false,
            oracle: true,
            traces: true,
            oracle_samples: 41,
        }
    }
}

/// A single momentum: a symmetry label or components in units of π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Label(String),
    Pi(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeConfig {
    pub point: PointSpec,
    pub d_values: Vec<usize>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            point: PointSpec::Label("M".into()),
            d_values: vec![2, 3, 4],
        }
    }
}

/// Values given on the command line; `None` leaves the file value alone.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub d: Vec<usize>,
    pub dtau: Option<f64>,
    pub trials: Option<usize>,
    pub svg: bool,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::from_toml(&text)
            }
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies overrides. A single `--d` sets the bond dimension; for
    /// convergence runs the full list replaces `d_values`.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.evolution.seed = seed;
        }
        if let Some(&d) = o.d.first() {
            self.evolution.d_max = d;
            self.converge.d_values = o.d.clone();
        }
        if let Some(dtau) = o.dtau {
            self.evolution.dtau = dtau;
        }
        if let Some(trials) = o.trials {
            self.trials = trials;
        }
        self.output.svg |= o.svg;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.evolution.validate().map_err(CliError::Config)?;
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if !(self.fit.rel_tol > 0.0) || !(self.fit.min_frac > 0.0 && self.fit.min_frac < 1.0) {
            return Err(CliError::Config("fit.rel_tol must be > 0 and fit.min_frac in (0, 1)".into()));
        }
        if self.output.oracle_samples < 2 {
            return Err(CliError::Config("output.oracle_samples must be at least 2".into()));
        }
        self.momenta()?;
        self.cell_policy()?;
        Ok(())
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            rel_tol: self.fit.rel_tol,
            min_frac: self.fit.min_frac,
        }
    }

    pub fn cell_policy(&self) -> Result<CellPolicy, CliError> {
        Ok(match &self.cell {
            CellSpec::Policy(PolicyName::Minimal) => CellPolicy::Minimal,
            CellSpec::Policy(PolicyName::Common) => CellPolicy::Common,
            CellSpec::Fixed(dims) => {
                if dims.len() != self.model.dimensionality {
                    return Err(CliError::Config(format!(
                        "cell {dims:?} does not match dimensionality {}",
                        self.model.dimensionality
                    )));
                }
                CellPolicy::Fixed(UnitCell::new(dims.clone()).map_err(|e| CliError::Config(e.to_string()))?)
            }
        })
    }

    /// Resolves the momentum list, in request order.
    pub fn momenta(&self) -> Result<Vec<Momentum>, CliError> {
        let d = self.model.dimensionality;
        let bad = |e: &dyn std::fmt::Display| CliError::Config(e.to_string());
        let ks = match &self.momenta {
            MomentaSpec::Path { segment_samples } => {
                if *segment_samples < 2 {
                    return Err(CliError::Config("segment_samples must be at least 2".into()));
                }
                let path = high_symmetry_path(d).map_err(|e| bad(&e))?;
                interpolate(&path, *segment_samples)
            }
            MomentaSpec::Labels { labels } => labels
                .iter()
                .map(|l| SymmetryPoint::parse(l).and_then(|p| p.momentum(d)))
                .collect::<Result<_, _>>()
                .map_err(|e| bad(&e))?,
            MomentaSpec::Points { points } => points
                .iter()
                .map(|p| point_from_pi(p, d))
                .collect::<Result<_, _>>()?,
            MomentaSpec::Grid { dims } => {
                if dims.len() != d {
                    return Err(CliError::Config(format!("grid {dims:?} does not match dimensionality {d}")));
                }
                momentum_grid(&UnitCell::new(dims.clone()).map_err(|e| bad(&e))?)
            }
        };
        if ks.is_empty() {
            return Err(CliError::Config("no momenta requested".into()));
        }
        Ok(ks)
    }

    pub fn converge_point(&self) -> Result<Momentum, CliError> {
        let d = self.model.dimensionality;
        match &self.converge.point {
            PointSpec::Label(l) => SymmetryPoint::parse(l)
                .and_then(|p| p.momentum(d))
                .map_err(|e| CliError::Config(e.to_string())),
            PointSpec::Pi(c) => point_from_pi(c, d),
        }
    }

    pub fn d_values(&self) -> Result<Vec<usize>, CliError> {
        let ds = &self.converge.d_values;
        if ds.is_empty() || ds.contains(&0) || ds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "bond dimensions must be a non-empty, strictly ascending list of positive integers, got {ds:?}"
            )));
        }
        Ok(ds.clone())
    }
}

fn point_from_pi(components: &[f64], d: usize) -> Result<Momentum, CliError> {
    if components.len() != d || components.iter().any(|c| !c.is_finite()) {
        return Err(CliError::Config(format!(
            "momentum {components:?} must have {d} finite components (units of π)"
        )));
    }
    Ok(Momentum::new(components.iter().map(|c| c * PI).collect()))
}

/// Evenly spaced momenta along each segment, shared endpoints kept once.
/// Interior points carry no label.
pub fn interpolate(path: &[Momentum], per_segment: usize) -> Vec<Momentum> {
    let mut out = vec![path[0].clone()];
    for pair in path.windows(2) {
        let (a, b) = (&pair[0].components, &pair[1].components);
        for i in 1..per_segment {
            if i == per_segment - 1 {
                out.push(pair[1].clone());
            } else {
                let t = i as f64 / (per_segment - 1) as f64;
                out.push(Momentum::new(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn full_file_parses() {
        let cfg = RunConfig::from_toml(
            r#"
            trials = 3
            cell = [2, 2]

            [model]
            j = 1.0
            g = 1.0
            dimensionality = 2

            [evolution]
            dtau = 0.01
            max_steps = 500
            d_max = 3
            seed = 11
            floor = 1e-12

            [momenta]
            kind = "points"
            points = [[1.0, 0.0], [1.0, 1.0]]

            [output]
            dir = "runs/a"
            svg = true

            [converge]
            point = [1.0, 1.0]
            d_values = [2, 3]
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.momenta().unwrap().len(), 2);
        assert!(matches!(cfg.cell_policy().unwrap(), CellPolicy::Fixed(_)));
        assert!(cfg.converge_point().unwrap().same_as(&Momentum::new(vec![PI, PI])));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            "trials = 0",
            "[model]\nj = -1.0\ng = 1.0\ndimensionality = 2",
            "[momenta]\nkind = \"labels\"\nlabels = [\"Q\"]",
            "[momenta]\nkind = \"points\"\npoints = [[1.0]]",
            "[momenta]\nkind = \"labels\"\nlabels = [\"R\"]",
            "cell = [2, 2, 2]",
            "[converge]\nd_values = [3, 2]",
            "unknown = 1",
        ];
        for text in bad {
            let outcome = RunConfig::from_toml(text).and_then(|c| {
                c.validate()?;
                c.d_values().map(|_| ())
            });
            assert!(matches!(outcome, Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides {
            seed: Some(3),
            d: vec![5],
            dtau: Some(0.02),
            trials: Some(4),
            svg: true,
            ..Default::default()
        });
        assert_eq!(cfg.evolution.seed, 3);
        assert_eq!(cfg.evolution.d_max, 5);
        assert_eq!(cfg.converge.d_values, vec![5]);
        assert_eq!(cfg.evolution.dtau, 0.02);
        assert_eq!(cfg.trials, 4);
        assert!(cfg.output.svg);
    }

    #[test]
    fn path_interpolation_shares_vertices() {
        let path = high_symmetry_path(2).unwrap();
        let ks = interpolate(&path, 3);
        assert_eq!(ks.len(), 1 + (path.len() - 1) * 2);
        assert_eq!(ks[2].label, path[1].label);
        assert!(ks[1].label.is_none());
    }
}
