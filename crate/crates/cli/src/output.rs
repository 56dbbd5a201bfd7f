//! Where documents go, and how failures map to exit codes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use corrclass::Error;

/// A failed invocation: message for stderr plus the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    /// Wraps a library error, prefixed with what was being processed.
    pub fn from_core(context: &str, e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: format!("{context}: {e}"),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// 2 malformed input or bad parameter, 3 input describes no valid object,
/// 4 dimensions disagree, 1 anything else.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::InvalidParameter(_)
        | Error::EventSpaceTooLarge(_)
        | Error::UnsupportedDimension(_) => 2,
        Error::NotSquare { .. }
        | Error::NonFinite
        | Error::NotHermitian { .. }
        | Error::NotPositive { .. }
        | Error::TraceNotUnit { .. }
        | Error::NotAnEffect { .. }
        | Error::IncompleteBasis(_)
        | Error::SingularGram => 3,
        Error::DimensionMismatch { .. } => 4,
        Error::NotClassical(_) | Error::DegeneracyUnresolved { .. } => 1,
    }
}

pub fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: cannot read: {e}", path.display())))
}

/// Pretty JSON with a trailing newline; stable for identical values.
pub fn render<T: serde::Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report is serializable");
    out.push('\n');
    out
}

/// Resolved destination of the main document.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    /// `--out` wins; otherwise a default-named file in the output directory
    /// if one is configured; otherwise stdout.
    pub fn resolve(out: Option<&Path>, out_dir: Option<&Path>, default_name: &str) -> Sink {
        match (out, out_dir) {
            (Some(p), _) if p == Path::new("-") => Sink::Stdout,
            (Some(p), _) => Sink::File(p.to_path_buf()),
            (None, Some(dir)) => Sink::File(dir.join(default_name)),
            (None, None) => Sink::Stdout,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Sink::Stdout => "stdout".into(),
            Sink::File(p) => p.display().to_string(),
        }
    }

    pub fn write(&self, text: &str) -> Result<(), Failure> {
        match self {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Failure::io(format!("stdout: {e}")))
            }
            Sink::File(p) => write_atomically(p, text),
        }
    }
}

/// Writes through a sibling temporary file and a rename, so an interrupted
/// or failed write never leaves a truncated document at `path`.
pub fn write_atomically(path: &Path, text: &str) -> Result<(), Failure> {
    let fail = |e: std::io::Error| Failure::io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Failure::usage(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = fs::write(&tmp, text).and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(fail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use corrclass::Side;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), 2);
        assert_eq!(exit_code(&Error::NotPositive { min_eigenvalue: -1.0 }), 3);
        assert_eq!(exit_code(&Error::TraceNotUnit { trace: 2.0 }), 3);
        assert_eq!(exit_code(&Error::DimensionMismatch { expected: 2, found: 3 }), 4);
        assert_eq!(exit_code(&Error::NotClassical(Side::A)), 1);
    }

    #[test]
    fn explicit_out_beats_directory() {
        let dir = Path::new("/tmp/reports");
        assert!(matches!(Sink::resolve(None, None, "r.json"), Sink::Stdout));
        assert!(matches!(Sink::resolve(Some(Path::new("-")), Some(dir), "r.json"), Sink::Stdout));
        match Sink::resolve(None, Some(dir), "r.json") {
            Sink::File(p) => assert_eq!(p, dir.join("r.json")),
            other => panic!("{other:?}"),
        }
        match Sink::resolve(Some(Path::new("x.json")), Some(dir), "r.json") {
            Sink::File(p) => assert_eq!(p, Path::new("x.json")),
            other => panic!("{other:?}"),
        }
    }
}
