use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::PropagatorConfig;
use crate::error::{param, Error, Result};
use crate::grid_spectral::GridSpec;
use crate::ground_state::FlowConfig;
use crate::model::{
    validate_coupled, validate_general, validate_kernel, validate_scalar, CoupledModel,
    GeneralModel, HartreeTerm, KernelSpec, PowerTerm, ScalarModel, ValidationReport,
};

/// Kernel given inline or as a path to a JSON kernel description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelSource {
    File { file: PathBuf },
    Inline(KernelSpec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HartreeTermSource {
    pub lambda: f64,
    pub p: f64,
    pub kernel: KernelSource,
}

/// Multi-term model whose kernels may live in separate files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSection {
    pub dim: usize,
    pub alpha: f64,
    #[serde(default)]
    pub power_terms: Vec<PowerTerm<f64>>,
    #[serde(default)]
    pub hartree_terms: Vec<HartreeTermSource>,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSection {
    Scalar(ScalarModel<f64>),
    General(GeneralSection),
    Coupled(CoupledModel<f64>),
}

impl ModelSection {
    pub fn dim(&self) -> usize {
        match self {
            Self::Scalar(m) => m.dim,
            Self::General(m) => m.dim,
            Self::Coupled(m) => m.dim,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Self::Scalar(m) => m.alpha,
            Self::General(m) => m.alpha,
            Self::Coupled(m) => m.alpha,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Scalar(_) => "scalar",
            Self::General(_) => "general",
            Self::Coupled(_) => "coupled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(alias = "N")]
    pub dim: usize,
    #[serde(alias = "M")]
    pub points: usize,
    #[serde(alias = "L")]
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsSection {
    pub dir: PathBuf,
    pub field_file: String,
    pub diagnostics_file: String,
    pub manifest_file: String,
    /// Keep every this many solver iterations in the diagnostics table.
    pub history_stride: usize,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            field_file: "ground_state.fchq".into(),
            diagnostics_file: "diagnostics.csv".into(),
            manifest_file: "manifest.json".into(),
            history_stride: 1,
        }
    }
}

/// Complete description of one experiment.
///
/// The top-level `seed` is the only source of randomness; it replaces the
/// solver seed once the config is resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: FlowConfig,
    #[serde(default)]
    pub dynamics: PropagatorConfig,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub seed: u64,
}

fn read_kernel(path: &Path) -> Result<KernelSpec<f64>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Kernel(format!("cannot parse kernel file {}: {e}", path.display()))
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads a config and resolves kernel files relative to its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_json(&fs::read_to_string(path)?)?;
        cfg.resolve_kernels(path.parent().unwrap_or(Path::new(".")))?;
        Ok(cfg)
    }

    /// Replaces every kernel file reference by the kernel it names.
    pub fn resolve_kernels(&mut self, base: &Path) -> Result<()> {
        if let ModelSection::General(g) = &mut self.model {
            for t in &mut g.hartree_terms {
                if let KernelSource::File { file } = &t.kernel {
                    let full = if file.is_absolute() { file.clone() } else { base.join(file) };
                    t.kernel = KernelSource::Inline(read_kernel(&full).map_err(|e| match e {
                        Error::Io(io) => Error::Kernel(format!(
                            "cannot read kernel file {}: {io}",
                            full.display()
                        )),
                        other => other,
                    })?);
                }
            }
        }
        Ok(())
    }

    /// Solver settings with the experiment seed applied.
    pub fn flow(&self) -> FlowConfig {
        FlowConfig { seed: self.seed, ..self.solver.clone() }
    }

    pub fn grid_spec(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(self.grid.dim, self.grid.points, self.grid.length)
    }

    pub fn scalar_model(&self) -> Result<&ScalarModel<f64>> {
        match &self.model {
            ModelSection::Scalar(m) => Ok(m),
            other => Err(param(format!("expected a scalar model, found {}", other.kind()))),
        }
    }

    pub fn coupled_model(&self) -> Result<&CoupledModel<f64>> {
        match &self.model {
            ModelSection::Coupled(m) => Ok(m),
            other => Err(param(format!("expected a coupled model, found {}", other.kind()))),
        }
    }

    /// Scalar and general models in multi-term form. Fails on unresolved
    /// kernel files and on coupled models.
    pub fn general_model(&self) -> Result<GeneralModel<f64>> {
        match &self.model {
            ModelSection::Scalar(m) => Ok(m.to_general()),
            ModelSection::General(g) => {
                let hartree_terms = g
                    .hartree_terms
                    .iter()
                    .map(|t| match &t.kernel {
                        KernelSource::Inline(k) => {
                            Ok(HartreeTerm { lambda: t.lambda, p: t.p, kernel: k.clone() })
                        }
                        KernelSource::File { file } => Err(Error::Kernel(format!(
                            "kernel file {} has not been resolved",
                            file.display()
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(GeneralModel {
                    dim: g.dim,
                    alpha: g.alpha,
                    power_terms: g.power_terms.clone(),
                    hartree_terms,
                    sigma: g.sigma,
                })
            }
            ModelSection::Coupled(_) => Err(param("expected a scalar or general model, found coupled")),
        }
    }

    /// Kernels of the scalar or general model with their validation reports.
    pub fn kernel_reports(&self) -> Result<Vec<(KernelSpec<f64>, ValidationReport)>> {
        let g = match &self.model {
            ModelSection::Coupled(m) => {
                let k = KernelSpec::Riesz { beta: m.beta };
                let proxy = GeneralModel {
                    dim: m.dim,
                    alpha: m.alpha,
                    power_terms: Vec::new(),
                    hartree_terms: [m.p1, m.p2, m.q]
                        .into_iter()
                        .map(|p| HartreeTerm { lambda: 1.0, p, kernel: k.clone() })
                        .collect(),
                    sigma: m.sigma1 + m.sigma2,
                };
                return Ok(vec![(k.clone(), validate_kernel(&k, &proxy))]);
            }
            _ => self.general_model()?,
        };
        let mut kernels: Vec<KernelSpec<f64>> = Vec::new();
        for t in &g.hartree_terms {
            if !kernels.contains(&t.kernel) {
                kernels.push(t.kernel.clone());
            }
        }
        Ok(kernels.into_iter().map(|k| {
            let r = validate_kernel(&k, &g);
            (k, r)
        }).collect())
    }

    /// Every check that can run before any computation: model window,
    /// kernel hypotheses, grid, solver and time-stepping settings.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        match self.grid_spec() {
            Ok(_) if self.grid.dim != self.model.dim() => r.fail(
                "grid dimension matches model",
                format!("grid N = {}, model N = {}", self.grid.dim, self.model.dim()),
            ),
            Ok(_) => {}
            Err(e) => r.fail("grid", e.to_string()),
        }
        if let Err(e) = self.solver.validate() {
            r.fail("solver settings", e.to_string());
        }
        if let Err(e) = self.dynamics.validate() {
            r.fail("dynamics settings", e.to_string());
        }
        if self.outputs.history_stride == 0 {
            r.fail("outputs.history_stride ≥ 1", "history_stride = 0");
        }
        match &self.model {
            ModelSection::Scalar(m) => r.merge(validate_scalar(m)),
            ModelSection::Coupled(m) => r.merge(validate_coupled(m)),
            ModelSection::General(_) => match self.general_model() {
                Ok(g) => {
                    let report = validate_general(&g);
                    let sound = report.ok();
                    r.merge(report);
                    if sound {
                        for (_, k) in self.kernel_reports().unwrap_or_default() {
                            r.merge(k);
                        }
                    }
                }
                Err(e) => r.fail("kernel resolvable", e.to_string()),
            },
        }
        r
    }
}
