use std::fmt;

/// Failure of a CLI run, mapped onto a process exit code.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
    Module(geomac::Error),
}

impl CliError {
    /// 2 is left to clap for usage errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 3,
            CliError::Io(_) => 4,
            CliError::Module(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid parameter: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Module(e) => write!(f, "{e}"),
        }
    }
}

impl From<geomac::Error> for CliError {
    fn from(e: geomac::Error) -> Self {
        use geomac::Error as E;
        match e {
            E::InvalidParameter(m) => CliError::Invalid(m),
            E::DegenerateExtent { .. } => CliError::Invalid(e.to_string()),
            E::Io(_) | E::Csv(_) | E::Json(_) => CliError::Io(e.to_string()),
            other => CliError::Module(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
