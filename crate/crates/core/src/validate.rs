use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// One broken invariant, located by a JSON-style path such as
/// `BtlDesign.spacing`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Invariant checking for configuration types.
///
/// Implementations push every violation they find instead of stopping at the
/// first one, so a configuration can be reported in full before any
/// computation runs.
pub trait Validate {
    fn validate_into(&self, path: &str, out: &mut Vec<Violation>);

    fn validate(&self, path: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        self.validate_into(path, &mut out);
        out
    }

    fn is_valid(&self) -> bool {
        self.validate("").is_empty()
    }
}

pub(crate) fn push(out: &mut Vec<Violation>, path: &str, field: &str, message: impl fmt::Display) {
    use alloc::format;
    let path = if path.is_empty() {
        String::from(field)
    } else if field.is_empty() {
        String::from(path)
    } else {
        format!("{path}.{field}")
    };
    out.push(Violation {
        path,
        message: format!("{message}"),
    });
}

pub(crate) fn check_positive(out: &mut Vec<Violation>, path: &str, field: &str, v: f64) {
    if !v.is_finite() || v <= 0.0 {
        push(out, path, field, format_args!("must be finite and > 0 (got {v})"));
    }
}

pub(crate) fn check_non_negative(out: &mut Vec<Violation>, path: &str, field: &str, v: f64) {
    if !v.is_finite() || v < 0.0 {
        push(out, path, field, format_args!("must be finite and >= 0 (got {v})"));
    }
}
