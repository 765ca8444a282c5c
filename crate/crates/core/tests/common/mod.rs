//! Published fixture values for the two rank-3 example quivers.
#![allow(dead_code)]

use cvec_core::{fixtures, ExchangeMatrix, IntMatrix, LinearOrdering, MutationSequence, Word};

pub fn q() -> ExchangeMatrix {
    fixtures::q233()
}

pub fn m() -> ExchangeMatrix {
    fixtures::markov()
}

pub fn seq(s: &str) -> MutationSequence {
    s.parse().unwrap()
}

pub fn word(s: &str) -> Word {
    s.parse().unwrap()
}

pub fn ord(s: &str) -> LinearOrdering {
    s.parse().unwrap()
}

pub fn mat<const C: usize>(rows: &[[i64; C]]) -> IntMatrix {
    IntMatrix::from_i64(rows)
}

/// `(sequence, [B|C] for Q, [B|C] for M, sign vector)` for the short walks.
pub fn short_walks() -> Vec<(&'static str, IntMatrix, IntMatrix, [i8; 3])> {
    vec![
        (
            "1",
            mat(&[[0, -2, 3, -1, 0, 0], [2, 0, -3, 0, 1, 0], [-3, 3, 0, 3, 0, 1]]),
            mat(&[[0, -2, 2, -1, 0, 0], [2, 0, -2, 0, 1, 0], [-2, 2, 0, 2, 0, 1]]),
            [-1, 1, 1],
        ),
        (
            "1,2",
            mat(&[[0, 2, -3, -1, 0, 0], [-2, 0, 3, 0, -1, 0], [3, -3, 0, 3, 3, 1]]),
            mat(&[[0, 2, -2, -1, 0, 0], [-2, 0, 2, 0, -1, 0], [2, -2, 0, 2, 2, 1]]),
            [-1, -1, 1],
        ),
        (
            "1,2,3",
            mat(&[[0, -7, 3, -1, 0, 0], [7, 0, -3, 9, 8, 3], [-3, 3, 0, -3, -3, -1]]),
            mat(&[[0, -2, 2, -1, 0, 0], [2, 0, -2, 4, 3, 2], [-2, 2, 0, -2, -2, -1]]),
            [-1, 1, -1],
        ),
    ]
}

pub const LONG_WALK: &str = "1,2,3,2,1,3";

pub fn long_walk_c_q() -> IntMatrix {
    mat(&[[433, 378, 144], [-16, -8, -3], [-24, -21, -8]])
}

pub fn long_walk_c_m() -> IntMatrix {
    mat(&[[13, 8, 6], [-6, -3, -2], [-6, -4, -3]])
}

/// Reflection words after each short walk; identical for Q and M.
pub fn short_walk_reflections() -> Vec<(&'static str, [&'static str; 3])> {
    vec![
        ("1", ["1", "2", "1,3,1"]),
        ("1,2", ["1", "2", "2,1,3,1,2"]),
        ("1,2,3", ["1", "2,1,3,1,2,1,3,1,2", "2,1,3,1,2"]),
    ]
}

pub fn long_walk_reflections() -> [&'static str; 3] {
    [
        "2,1,3,1,2,1,3,1,2,1,3,1,2,1,2,1,3,1,2,1,3,1,2,1,3,1,2",
        "1,2,1,3,1,2,1,3,1,2,1",
        "2,1,3,1,2,1,3,1,2,1,3,1,2",
    ]
}

/// `(sequence, λ)` with `r^w_λ(1) r^w_λ(2) r^w_λ(3) = r_3 r_1 r_2`.
pub fn coxeter_products() -> Vec<(&'static str, &'static str)> {
    vec![
        ("1", "1,3,2"),
        ("1,2", "1,2,3"),
        ("1,2,3", "1,3,2"),
        (LONG_WALK, "2,3,1"),
    ]
}

pub const COXETER_RHO: &str = "3,1,2";

/// L-matrices for ordering 1 < 3 < 2 after the short walks: `(seq, Q, M)`.
pub fn short_walk_l() -> Vec<(&'static str, IntMatrix, IntMatrix)> {
    vec![
        (
            "1",
            mat(&[[1, 0, 0], [0, 1, 0], [3, 0, 1]]),
            mat(&[[1, 0, 0], [0, 1, 0], [2, 0, 1]]),
        ),
        (
            "1,2",
            mat(&[[1, 0, 0], [0, 1, 0], [3, -3, 1]]),
            mat(&[[1, 0, 0], [0, 1, 0], [2, -2, 1]]),
        ),
        (
            "1,2,3",
            mat(&[[1, 0, 0], [-9, 8, -3], [3, -3, 1]]),
            mat(&[[1, 0, 0], [-4, 3, -2], [2, -2, 1]]),
        ),
    ]
}

/// L-matrices after the long walk: `(ordering, Q, M)`.
pub fn long_walk_l() -> Vec<(&'static str, IntMatrix, IntMatrix)> {
    let other_q = mat(&[[283681, -840402, -94560], [-160, 80, 9], [-240, 711, 80]]);
    let other_m = mat(&[[23661, -68952, -11830], [-70, 35, 6], [-70, 204, 35]]);
    vec![
        (
            "1,3,2",
            mat(&[[433, -378, 144], [-16, 8, -3], [24, -21, 8]]),
            mat(&[[13, -8, 6], [-6, 3, -2], [6, -4, 3]]),
        ),
        (
            "2,1,3",
            mat(&[[433, 378, 144], [16, 8, 3], [24, 21, 8]]),
            mat(&[[13, 8, 6], [6, 3, 2], [6, 4, 3]]),
        ),
        (
            "3,2,1",
            mat(&[[433, 378, -144], [16, 8, -3], [-24, -21, 8]]),
            mat(&[[13, 8, -6], [6, 3, -2], [-6, -4, 3]]),
        ),
        ("1,2,3", other_q.clone(), other_m.clone()),
        ("2,3,1", other_q.clone(), other_m.clone()),
        ("3,1,2", other_q, other_m),
    ]
}

/// Equality after negating some columns and then some rows.
pub fn equal_up_to_row_and_column_signs(a: &IntMatrix, b: &IntMatrix) -> bool {
    let n = a.cols();
    (0..1u32 << n).any(|mask| {
        let mut flipped = a.clone();
        for r in 0..flipped.rows() {
            for c in 0..n {
                if mask >> c & 1 == 1 {
                    flipped[(r, c)] = -flipped[(r, c)].clone();
                }
            }
        }
        cvec_core::LMatrix::from_raw(flipped).equal_up_to_row_sign(&cvec_core::LMatrix::from_raw(b.clone()))
    })
}
