use serde_json::{json, Map, Value};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    MalformedDocument(String),

    #[error("unknown {kind} `{id}`")]
    UnknownReference { kind: &'static str, id: String },

    #[error("outgoing probabilities of node `{node}` sum to {sum}, expected 1")]
    RowNotStochastic { node: String, sum: f64 },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("duplicate edge `{from}` -> `{to}`")]
    DuplicateEdge { from: String, to: String },

    #[error("edge `{from}` -> `{to}` has invalid probability {p}")]
    InvalidProbability { from: String, to: String, p: f64 },

    #[error("location `{0}` has no memory nodes")]
    EmptyLocation(String),

    #[error("chain has {closed_classes} closed classes; stationary distribution is not unique")]
    NotIrreducible { closed_classes: usize },

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("computation cancelled")]
    Cancelled,

    #[error("node order mismatch between inputs")]
    OrderMismatch,

    #[error("`{to}` is not reached almost surely from `{from}`")]
    Unreachable { from: String, to: String },

    #[error("cursor {t} outside 0..={horizon}")]
    CursorOutOfRange { t: usize, horizon: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable code, used by CLI diagnostics and service error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedDocument(_) => "MalformedDocument",
            Error::UnknownReference { .. } => "UnknownReference",
            Error::RowNotStochastic { .. } => "RowNotStochastic",
            Error::DuplicateId { .. } => "DuplicateId",
            Error::DuplicateEdge { .. } => "DuplicateEdge",
            Error::InvalidProbability { .. } => "InvalidProbability",
            Error::EmptyLocation(_) => "EmptyLocation",
            Error::NotIrreducible { .. } => "NotIrreducible",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::Cancelled => "Cancelled",
            Error::OrderMismatch => "OrderMismatch",
            Error::Unreachable { .. } => "Unreachable",
            Error::CursorOutOfRange { .. } => "CursorOutOfRange",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }

    /// Errors raised while reading or validating a strategy, as opposed to analysis failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MalformedDocument(_)
                | Error::UnknownReference { .. }
                | Error::RowNotStochastic { .. }
                | Error::DuplicateId { .. }
                | Error::DuplicateEdge { .. }
                | Error::InvalidProbability { .. }
                | Error::EmptyLocation(_)
        )
    }

    /// Structured form: `code`, `message` and the offending ids and values. Floats are rounded
    /// to 9 significant digits.
    pub fn diagnostic(&self) -> Value {
        let round = crate::report::round9;
        let mut out = Map::new();
        out.insert("code".into(), json!(self.code()));
        out.insert("message".into(), json!(self.to_string()));
        let details = match self {
            Error::UnknownReference { kind, id } | Error::DuplicateId { kind, id } => {
                json!({ "kind": kind, "id": id })
            }
            Error::RowNotStochastic { node, sum } => json!({ "node": node, "sum": round(*sum) }),
            Error::DuplicateEdge { from, to } | Error::Unreachable { from, to } => {
                json!({ "from": from, "to": to })
            }
            Error::InvalidProbability { from, to, p } => {
                json!({ "from": from, "to": to, "p": round(*p) })
            }
            Error::EmptyLocation(id) => json!({ "location": id }),
            Error::NotIrreducible { closed_classes } => json!({ "closed_classes": closed_classes }),
            Error::NoConvergence { iterations } => json!({ "iterations": iterations }),
            Error::CursorOutOfRange { t, horizon } => json!({ "t": t, "horizon": horizon }),
            _ => json!({}),
        };
        if let Value::Object(fields) = details {
            out.extend(fields);
        }
        Value::Object(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_carry_offending_values() {
        let e = Error::RowNotStochastic {
            node: "n0".into(),
            sum: 0.9899999999999999,
        };
        assert_eq!(
            e.diagnostic(),
            json!({
                "code": "RowNotStochastic",
                "message": e.to_string(),
                "node": "n0",
                "sum": 0.99,
            })
        );
        assert!(e.is_validation());
        assert!(!Error::NotIrreducible { closed_classes: 2 }.is_validation());
    }
}
