use serde_json::json;

/// Failures, grouped by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or empty configuration.
    Usage(String),
    /// Configuration that parses badly or violates constraints; lists all of them.
    Config(Vec<String>),
    /// Missing input files, unwritable outputs.
    Io(String),
    /// Input that is well formed but not what a subcommand expects.
    Schema(String),
    /// A numerical routine failed.
    Numeric(toa_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Schema(_) => 3,
            CliError::Numeric(e) => match e {
                toa_core::Error::Output(_) => 3,
                toa_core::Error::InvalidParameters(_) | toa_core::Error::InvalidGrid(_) => 2,
                _ => 4,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Schema(_) => "schema",
            CliError::Numeric(_) => "numeric",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> String {
        let mut body = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        let violations = match self {
            CliError::Config(v) => Some(v.clone()),
            CliError::Numeric(toa_core::Error::InvalidParameters(v)) => Some(v.clone()),
            _ => None,
        };
        if let Some(v) = violations {
            body["violations"] = json!(v);
        }
        body.to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Config(v) => write!(f, "invalid configuration: {}", v.join("; ")),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Schema(m) => write!(f, "{m}"),
            CliError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<toa_core::Error> for CliError {
    fn from(e: toa_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
