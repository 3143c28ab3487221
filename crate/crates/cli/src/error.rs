use kmodel_core::KmodelError;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
/// A reproduction row fell outside its order-of-magnitude tolerance.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub context: serde_json::Value,
    #[serde(skip)]
    pub exit_code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: "usage",
            message: message.into(),
            context: serde_json::Value::Null,
            exit_code: EXIT_USAGE,
        }
    }

    pub fn with_context(mut self, context: serde_json::Value) -> Self {
        self.context = context;
        self
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::usage(format!("cannot access {}: {err}", path.display()))
            .with_context(serde_json::json!({ "path": path.display().to_string() }))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error objects serialize")
    }
}

impl From<KmodelError> for CliError {
    fn from(err: KmodelError) -> Self {
        let message = err.to_string();
        let (code, exit_code, context) = match &err {
            KmodelError::Domain { quantity, value, .. } => (
                "invalid_parameter",
                EXIT_USAGE,
                serde_json::json!({ "quantity": quantity, "value": value }),
            ),
            KmodelError::Structural(_) | KmodelError::Config(_) => {
                ("invalid_parameter", EXIT_USAGE, serde_json::Value::Null)
            }
            KmodelError::InsufficientData { needed, got } => (
                "insufficient_data",
                EXIT_NUMERICAL,
                serde_json::json!({ "needed": needed, "got": got }),
            ),
            KmodelError::Numerical { error_estimate, .. } => (
                "numerical",
                EXIT_NUMERICAL,
                serde_json::json!({ "error_estimate": error_estimate }),
            ),
            KmodelError::Solver(_) => ("solver", EXIT_SOLVER, serde_json::Value::Null),
        };
        CliError {
            code,
            message,
            context,
            exit_code,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::usage(format!("csv output failed: {err}"))
    }
}
