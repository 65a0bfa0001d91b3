use anyhow::{bail, Context, Result};
use serde::Deserialize;
use softedge::lattice::SpecJson;
use softedge::JacobiSpec;
use std::path::Path;

/// Whole config file. Each command reads the sections it needs; unknown keys anywhere are errors.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: Option<SpecJson>,
    pub build: Option<BuildConfig>,
    pub classify: Option<ClassifyConfig>,
    pub density: Option<DensityConfig>,
    pub resolvent: Option<ResolventConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn spec(&self) -> Result<JacobiSpec> {
        let Some(s) = &self.spec else {
            bail!("config has no \"spec\" section");
        };
        Ok(JacobiSpec::try_from(s.clone())?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuildConfig {
    /// `r_i = α_{i-1}/α_i`, `q_i = β_i/α_i`
    Ratios { r: Vec<f64>, q: Vec<f64> },
    /// Doubled pair at the `root`-th real zero (ascending) of `tr F(0)` as a polynomial in `q`.
    CriticalQ { alpha: Vec<f64>, root: usize },
    EvenZeroBeta { alpha: Vec<f64> },
    CosineBeta {
        #[serde(rename = "N")]
        n: usize,
        k0: usize,
    },
    DoublePeriod { alpha: Vec<f64>, beta: Vec<f64> },
    Direct { alpha: Vec<f64>, beta: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_probe_ladder")]
    pub probe_ladder: Vec<usize>,
    #[serde(default = "default_carleman_n")]
    pub carleman_n: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn default_ladder() -> Vec<usize> {
    softedge::resolvent::DEFAULT_LADDER.to_vec()
}

fn default_tau() -> f64 {
    softedge::resolvent::DEFAULT_TAU
}

fn default_delta() -> f64 {
    0.2
}

fn default_probe_ladder() -> Vec<usize> {
    vec![128, 256, 512, 1024, 2048]
}

fn default_carleman_n() -> usize {
    100_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(rename = "M")]
    pub m: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    #[serde(default)]
    pub residue: usize,
    pub grid: Option<GridRange>,
    pub x: Option<Vec<f64>>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    pub collar: Option<f64>,
    /// Also evaluate grid points inside the collar.
    #[serde(default)]
    pub to_edge: bool,
    #[serde(default = "yes")]
    pub normalization: bool,
    #[serde(default = "default_norm_tol")]
    pub normalization_tol: f64,
    pub compare: Option<CompareConfig>,
}

fn default_rel_tol() -> f64 {
    1e-8
}

fn default_k_max() -> usize {
    50_000
}

fn default_norm_tol() -> f64 {
    1e-5
}

fn yes() -> bool {
    true
}

impl DensityConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        match (&self.grid, &self.x) {
            (Some(g), None) => {
                if g.points < 2 || !(g.to > g.from) {
                    bail!("grid needs points >= 2 and to > from");
                }
                let step = (g.to - g.from) / (g.points - 1) as f64;
                Ok((0..g.points).map(|j| g.from + step * j as f64).collect())
            }
            (None, Some(x)) if !x.is_empty() => Ok(x.clone()),
            _ => bail!("density needs exactly one of \"grid\" or a non-empty \"x\""),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseConfig {
    pub size: usize,
    pub x: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventConfig {
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    #[serde(default = "default_witness_blocks")]
    pub witness_blocks: usize,
    pub inverse: Option<InverseConfig>,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn default_blocks() -> usize {
    20
}

fn default_witness_blocks() -> usize {
    1024
}
