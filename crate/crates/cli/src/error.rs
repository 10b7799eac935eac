use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

/// Failure of a CLI run, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    Config(String),
    /// The numerics failed (exit 3).
    Numerical(String),
    /// Reading or writing a file failed (exit 4).
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Classifies a model error. Parameter names are reported as full
    /// config keys.
    pub fn from_core(e: ehdspray_core::Error) -> Self {
        use ehdspray_core::Error;
        let numerical = e.is_numerical();
        let msg = match &e {
            Error::InvalidParameter { name, reason } => {
                format!("invalid value for `{}`: {reason}", config_key(name))
            }
            _ => e.to_string(),
        };
        if numerical {
            CliError::Numerical(msg)
        } else {
            CliError::Config(msg)
        }
    }
}

/// Maps the parameter names used by the models onto config keys.
fn config_key(name: &str) -> String {
    if let Some(rest) = name.strip_prefix("recipe.") {
        return format!("ink.recipe.{rest}");
    }
    for k in ["cell_size", "splat_radius", "nx", "ny"] {
        if name == format!("deposit.{k}") {
            return format!("deposit.grid.{k}");
        }
    }
    match name {
        "layout.height" => "process.standoff".into(),
        "surface_tension" => "ink.surface_tension".into(),
        _ => name.to_string(),
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io { path, source } => write!(f, "I/O error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ehdspray_core::Error> for CliError {
    fn from(e: ehdspray_core::Error) -> Self {
        CliError::from_core(e)
    }
}
