use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use fchoquard_core::io::{ExperimentConfig, FieldDump, Manifest, Table};
use fchoquard_core::Error;
use serde_json::Value;

use crate::cli::Command;

/// Why a command stopped, with the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable, malformed or inadmissible configuration or input.
    Invalid(String),
    NotConverged(String),
    Io(String),
    /// Anything else, such as a blown-up time integration.
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Self::Invalid(_) => 2,
            Self::NotConverged(_) => 3,
            Self::Io(_) => 4,
            Self::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(m) => write!(f, "invalid configuration:\n{m}"),
            Self::NotConverged(m) => write!(f, "not converged: {m}"),
            Self::Io(m) => write!(f, "i/o failure: {m}"),
            Self::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) | Error::Format(_) => Self::Io(e.to_string()),
            Error::BlowUp { .. } => Self::Runtime(e.to_string()),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

/// Reads an experiment config, or the config recorded in a run manifest.
pub fn load_config(path: &Path) -> Outcome<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let from_manifest = value.get("library").is_some() && value.get("config").is_some();
    if from_manifest {
        let m: Manifest = serde_json::from_value(value)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        return Ok(m.config);
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    cfg.resolve_kernels(path.parent().unwrap_or(Path::new(".")))?;
    Ok(cfg)
}

/// Command-line tokens after the subcommand, minus the config path and the
/// output directory.
pub fn recorded_arguments(argv: &[String], command: &str) -> Vec<String> {
    let start = argv.iter().position(|a| a == command).map_or(argv.len(), |i| i + 1);
    let mut out = Vec::new();
    let mut skip_next = false;
    for a in &argv[start..] {
        if skip_next {
            skip_next = false;
            continue;
        }
        match a.as_str() {
            "-c" | "--config" | "--out" => skip_next = true,
            s if s.starts_with("--config=") || s.starts_with("--out=") => {}
            s if s.starts_with("-c") && s.len() > 2 && !s.starts_with("--") => {}
            _ => out.push(a.clone()),
        }
    }
    out
}

/// Resolved config plus the output directory and manifest being built.
pub struct Run {
    pub config: ExperimentConfig,
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Run {
    /// Loads the config, applies command-line overrides and, when
    /// `validate` is set, refuses inadmissible configs before creating the
    /// output directory.
    pub fn prepare(command: &Command, argv: &[String], validate: bool) -> Outcome<Self> {
        let common = command.common();
        let mut config = load_config(&common.config)?;
        if let Some(m) = common.grid {
            config.grid.points = m;
        }
        if let Some(s) = common.seed {
            config.seed = s;
        }
        if let Some(out) = &common.out {
            config.outputs.dir = out.clone();
        }
        if validate {
            let report = config.validate();
            if !report.ok() {
                return Err(Failure::Invalid(report.to_string()));
            }
        }
        let dir = config.outputs.dir.clone();
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        let probe = dir.join(".fchoquard-write-probe");
        fs::write(&probe, b"")
            .and_then(|_| fs::remove_file(&probe))
            .map_err(|e| Failure::Io(format!("{} is not writable: {e}", dir.display())))?;
        let manifest = Manifest::new(
            command.name(),
            recorded_arguments(argv, command.name()),
            common.deterministic,
            config.clone(),
        );
        Ok(Self { config, dir, manifest })
    }

    fn record(&mut self, name: &str) -> PathBuf {
        if !self.manifest.outputs.iter().any(|o| o == name) {
            self.manifest.outputs.push(name.to_owned());
        }
        self.dir.join(name)
    }

    pub fn save_dump(&mut self, name: &str, dump: &FieldDump) -> Outcome {
        let path = self.record(name);
        dump.save(path)?;
        Ok(())
    }

    pub fn save_table(&mut self, name: &str, table: &Table) -> Outcome {
        let path = self.record(name);
        table.save(path)?;
        Ok(())
    }

    pub fn save_json(&mut self, name: &str, value: &Value) -> Outcome {
        let path = self.record(name);
        let text = serde_json::to_string_pretty(value).expect("json value serializes");
        fs::write(&path, text + "\n")
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
    }

    /// Writes the manifest with the final exit code.
    pub fn finish(mut self, exit_code: u8) -> Outcome {
        let name = self.config.outputs.manifest_file.clone();
        self.manifest.exit_code = i32::from(exit_code);
        let path = self.dir.join(name);
        self.manifest.save(&path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn config_and_out_are_not_recorded() {
        let a = argv("fchoquard stability -c cfg.json --eps 0.02 --out o --seed 3 --config=x --out=y -cz");
        assert_eq!(recorded_arguments(&a, "stability"), argv("--eps 0.02 --seed 3"));
    }
}
