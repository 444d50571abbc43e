//! One error shape for every module, for machine-readable reporting.

use std::fmt;

use serde_json::{json, Value};

use crate::constructions::ConstructionError;
use crate::decompose::DecomposeError;
use crate::graded::GradedError;
use crate::group::GroupError;
use crate::linalg::LinalgError;
use crate::scalar::ScalarError;
use crate::verify::VerifyError;

/// A module error reduced to its innermost cause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Error {
    /// Module the variant belongs to, e.g. `graded`.
    pub module: &'static str,
    /// Variant name, e.g. `ClosureViolation`.
    pub kind: String,
    pub message: String,
    pub detail: Value,
}

impl Error {
    fn new(module: &'static str, debug: String, message: String, detail: Value) -> Self {
        let end = debug.find([' ', '(', '{']).unwrap_or(debug.len());
        Error { module, kind: debug[..end].to_string(), message, detail }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "error": {
                "module": self.module,
                "kind": self.kind,
                "message": self.message,
                "detail": self.detail,
            }
        })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}: {}", self.module, self.kind, self.message)
    }
}

impl std::error::Error for Error {}

impl From<ScalarError> for Error {
    fn from(e: ScalarError) -> Self {
        Error::new("scalar", format!("{e:?}"), e.to_string(), Value::Null)
    }
}

impl From<GroupError> for Error {
    fn from(e: GroupError) -> Self {
        let detail = match &e {
            GroupError::EntryOutOfRange { row, col, value, order } => {
                json!({"row": row, "col": col, "value": value, "order": order})
            }
            GroupError::NotAssociative(a, b, c) => json!({"triple": [a, b, c]}),
            GroupError::MissingInverse(g) => json!({"element": g}),
            _ => Value::Null,
        };
        Error::new("group", format!("{e:?}"), e.to_string(), detail)
    }
}

impl From<LinalgError> for Error {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Scalar(inner) => inner.into(),
            LinalgError::Singular(rank) => {
                Error::new("linalg", format!("{e:?}"), e.to_string(), json!({"rank": rank}))
            }
            e => Error::new("linalg", format!("{e:?}"), e.to_string(), Value::Null),
        }
    }
}

impl From<GradedError> for Error {
    fn from(e: GradedError) -> Self {
        match e {
            GradedError::Group(inner) => inner.into(),
            GradedError::Linalg(inner) => inner.into(),
            e => Error::new("graded", format!("{e:?}"), e.to_string(), e.detail()),
        }
    }
}

impl From<ConstructionError> for Error {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::Graded(inner) => inner.into(),
            ConstructionError::Group(inner) => inner.into(),
            ConstructionError::Linalg(inner) => inner.into(),
            ConstructionError::Scalar(inner) => inner.into(),
            e => Error::new("constructions", format!("{e:?}"), e.to_string(), e.detail()),
        }
    }
}

impl From<DecomposeError> for Error {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::Graded(inner) => inner.into(),
            DecomposeError::Construction(inner) => inner.into(),
            DecomposeError::Linalg(inner) => inner.into(),
            e => Error::new("decompose", format!("{e:?}"), e.to_string(), e.detail()),
        }
    }
}

impl From<VerifyError> for Error {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Graded(inner) => inner.into(),
            VerifyError::Construction(inner) => inner.into(),
            VerifyError::Group(inner) => inner.into(),
            VerifyError::Linalg(inner) => inner.into(),
            VerifyError::Scalar(inner) => inner.into(),
            e => Error::new("verify", format!("{e:?}"), e.to_string(), e.detail()),
        }
    }
}
