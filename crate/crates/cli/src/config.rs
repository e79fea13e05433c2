//! Run configuration: one JSON document, `//` comments allowed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rnbeam_core::assembly::{ElementOrder, Mesh};
use rnbeam_core::model::{BeamParams, Gains, LayerStack};
use rnbeam_core::spectral::RootSearchOptions;
use rnbeam_core::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub beam: BeamParams,
    pub layers: LayerStack,
    pub gains: Gains,
    pub mesh: MeshSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub n_elems: usize,
    /// Longitudinal element order, 1 or 2. Transverse elements are always
    /// the Hermite cubics the fourth-order term requires.
    #[serde(default = "default_element_order")]
    pub element_order: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSection {
    /// Number of closed-form modes per branch.
    pub n_max: usize,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Highest mode index located by grid search instead of asymptotic
    /// seeding.
    pub crossover_n0: usize,
    /// Refuse dense eigensolves beyond this many generalized coordinates.
    pub dense_limit: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    /// Step size; omit to derive one from the coarse-mesh spectrum.
    pub dt: Option<f64>,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub sample_every: usize,
    pub initial: InitialData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialData {
    /// Equal-energy mix of the ten slowest modes plus a seeded one-percent
    /// perturbation.
    Generic,
    /// Rest; produces an identically zero trace.
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// Trailing fraction of the trace used by the decay fit.
    pub fit_window_fraction: f64,
    /// Random pairs drawn by structural identity checks.
    pub trials: usize,
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_element_order() -> u8 {
    2
}

impl Default for SpectralSection {
    fn default() -> Self {
        let root = RootSearchOptions::default();
        Self {
            n_max: 10,
            newton_tol: root.newton_tol,
            newton_max_iters: root.newton_max_iters,
            crossover_n0: root.crossover,
            dense_limit: rnbeam_core::spectral::DEFAULT_DENSE_LIMIT,
        }
    }
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { dt: None, t_final: 10.0, sample_every: 1, initial: InitialData::Generic }
    }
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self { fit_window_fraction: 2.0 / 3.0, trials: 100, seed: 0 }
    }
}

impl MeshSection {
    pub fn build(&self) -> Result<Mesh> {
        let order = match self.element_order {
            1 => ElementOrder::Linear,
            2 => ElementOrder::Quadratic,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "mesh.element_order must be 1 or 2, got {other}"
                )))
            }
        };
        Mesh::new(self.n_elems, order)
    }
}

impl SpectralSection {
    pub fn root_options(&self) -> RootSearchOptions {
        RootSearchOptions {
            newton_tol: self.newton_tol,
            newton_max_iters: self.newton_max_iters,
            crossover: self.crossover_n0,
            ..RootSearchOptions::default()
        }
    }
}

impl RunConfig {
    /// Value-level validation beyond what deserialization can see.
    /// Admissibility of the gains is a separate, weaker kind of failure and
    /// is checked by the commands themselves.
    pub fn check(&self) -> Result<()> {
        self.beam.validate()?;
        self.layers.validate()?;
        self.gains.validate(&self.layers)?;
        self.mesh.build()?;
        let f = self.analysis.fit_window_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "analysis.fit_window_fraction must be in (0, 1], got {f}"
            )));
        }
        if !(self.time.t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time.T must be positive, got {}",
                self.time.t_final
            )));
        }
        if let Some(dt) = self.time.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "time.dt must be positive, got {dt}"
                )));
            }
        }
        if self.time.sample_every == 0 {
            return Err(Error::InvalidParameter("time.sample_every must be at least 1".into()));
        }
        if self.analysis.trials == 0 {
            return Err(Error::InvalidParameter("analysis.trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Drops `//` line comments outside string literals so configs can carry
/// inline documentation while staying plain JSON underneath.
pub fn strip_comments(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    let mut in_string = false;
    let mut escaped = false;
    while let Some(c) = chars.next() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            '/' if chars.peek() == Some(&'/') => {
                for n in chars.by_ref() {
                    if n == '\n' {
                        out.push('\n');
                        break;
                    }
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// Reads and parses a config; parse failures carry the field path.
pub fn load(path: &Path) -> std::result::Result<RunConfig, String> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    from_str(&raw)
}

pub fn from_str(raw: &str) -> std::result::Result<RunConfig, String> {
    let stripped = strip_comments(raw);
    let mut de = serde_json::Deserializer::from_str(&stripped);
    serde_path_to_error::deserialize(&mut de)
        .map_err(|e| format!("config field `{}`: {}", e.path(), e.inner()))
}

/// Same parse, but to a raw JSON value for sweep patching.
pub fn value_from_str(raw: &str) -> std::result::Result<serde_json::Value, String> {
    serde_json::from_str(&strip_comments(raw)).map_err(|e| format!("config: {e}"))
}

pub fn from_value(value: serde_json::Value) -> std::result::Result<RunConfig, String> {
    serde_path_to_error::deserialize(value)
        .map_err(|e| format!("config field `{}`: {}", e.path(), e.inner()))
}
