//! Shared verdict type for sampling-based verifiers.

use serde::Serialize;

/// Outcome of one sampled verifier run.
///
/// `worst_slack` carries the extremal sampled value; its orientation depends
/// on the check (minimum slack for inequality checks, maximum deviation for
/// identity checks). `witness` describes the sample attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub worst_slack: f64,
    pub witness: Option<String>,
}

impl CheckOutcome {
    pub fn new(name: &str, pass: bool, worst_slack: f64, witness: Option<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            worst_slack,
            witness,
        }
    }
}

/// Derives a per-stage RNG seed so that independent sampling streams never
/// overlap even when started from the same user seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .rotate_left(23)
        .wrapping_add(stream.wrapping_mul(0xD134_2543_DE82_EF95))
}
