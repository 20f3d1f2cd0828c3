pub mod kg;
pub mod mol;
pub mod prop;

/// Result of a command that ran to completion. `ok` is false when an
/// error-level event was recorded along the way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub ok: bool,
}
