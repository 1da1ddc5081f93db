use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config, or input files: exit 1.
    Config(String),
    /// Library failure; numerical ones exit 2, the rest 1.
    Compute(cfkit::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Compute(e) => e.kind(),
            CliError::Io(_) => "IoError",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Io(m) => m.clone(),
            CliError::Compute(e) => e.to_string(),
        }
    }

    /// Machine-readable line for stderr.
    pub fn report(&self) -> String {
        json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "kind": self.kind(),
            "message": self.message(),
        })
        .to_string()
    }
}

impl From<cfkit::Error> for CliError {
    fn from(e: cfkit::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<String> for CliError {
    fn from(m: String) -> Self {
        CliError::Config(m)
    }
}
