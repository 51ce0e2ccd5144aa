use std::path::Path;

use serde::Serialize;

/// An error on its way to the error stream and the exit code.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    #[serde(rename = "exit_code")]
    pub code: i32,
}

const USAGE: i32 = 2;
const NUMERICAL: i32 = 3;

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: "UsageError".into(),
            message: message.into(),
            code: USAGE,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            kind: "IoError".into(),
            message: format!("{}: {e}", path.display()),
            code: USAGE,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("failure serializes")
    }
}

impl From<dtnmap::Error> for Failure {
    fn from(e: dtnmap::Error) -> Self {
        let code = if e.is_numerical() { NUMERICAL } else { USAGE };
        Failure {
            kind: e.kind().into(),
            message: e.to_string(),
            code,
        }
    }
}
