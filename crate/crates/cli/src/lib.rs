//! Configuration ingestion and subcommand dispatch for the `dimer` binary.
//!
//! Each subcommand produces a set of named artifacts: CSV tables that begin
//! with a `# config_hash=<sha256>` line, and JSON reports. Artifacts depend
//! only on the configuration, so repeated runs are byte-identical.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use commands::{run, Command};
pub use config::RunConfig;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "DIMER_OUT_DIR";

#[derive(Error, Debug)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {}", .0.code(), .0)]
    Domain(#[from] dimer_core::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for domain and output errors, 2 for configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain(e.into())
            }
        }
    )*};
}

domain_from!(
    dimer_core::geometry::GeometryError,
    dimer_core::materials::MaterialsError,
    dimer_core::assembly::AssemblyError,
    dimer_core::solver::SolverError,
    dimer_core::fields::FieldsError,
    dimer_core::effective::EffectiveError
);

/// Named outputs of one run, in emission order.
#[derive(Debug, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    /// One-line human summary, printed unless `--quiet`.
    pub summary: String,
}

impl Artifacts {
    /// Adds a CSV whose body (header and rows) is produced by `body`.
    pub fn csv(&mut self, name: &str, hash: &str, body: Vec<u8>) {
        let mut bytes = format!("# config_hash={hash}\n").into_bytes();
        bytes.extend(body);
        self.files.push((name.to_string(), bytes));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir)?;
        self.files
            .iter()
            .map(|(name, bytes)| {
                let path = dir.join(name);
                std::fs::write(&path, bytes)?;
                Ok(path)
            })
            .collect()
    }
}

/// `--out`, then the environment override, then the config, then `dimer-out`.
pub fn output_dir(flag: Option<&Path>, env: Option<&str>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("dimer-out"))
}
