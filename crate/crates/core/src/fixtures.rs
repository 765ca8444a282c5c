//! Named quivers used in examples, tests and the command line.

use crate::quiver::ExchangeMatrix;

/// The Markov quiver: an oriented triangle with two arrows on every edge.
pub fn markov() -> ExchangeMatrix {
    ExchangeMatrix::from_i64(&[[0, 2, -2], [-2, 0, 2], [2, -2, 0]])
}

/// Oriented triangle with weights 2, 3, 3.
pub fn q233() -> ExchangeMatrix {
    ExchangeMatrix::from_i64(&[[0, 2, -3], [-2, 0, 3], [3, -3, 0]])
}

/// Rank-3 fork `1 -3-> 2 -4-> 3 -5-> 1` with point of return 2.
pub fn fork345() -> ExchangeMatrix {
    ExchangeMatrix::from_i64(&[[0, 3, -5], [-3, 0, 4], [5, -4, 0]])
}

/// Looks up a built-in quiver by name (case-insensitive).
pub fn by_name(name: &str) -> Option<ExchangeMatrix> {
    match name.to_ascii_lowercase().as_str() {
        "markov" | "m" => Some(markov()),
        "q233" | "q" => Some(q233()),
        "fork345" => Some(fork345()),
        _ => None,
    }
}

pub const NAMES: &[&str] = &["markov", "q233", "fork345"];
