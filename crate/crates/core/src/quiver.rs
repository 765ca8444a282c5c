//! Exchange matrices, framed seeds and the mutation kernel.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

/// Skew-symmetric integer matrix encoding a quiver: `b[i][j] > 0` means
/// `b[i][j]` arrows from `i` to `j`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ExchangeMatrix {
    n: usize,
    b: IntMatrix,
}

#[derive(Deserialize)]
struct RawExchange {
    n: Option<usize>,
    b: IntMatrix,
}

impl<'de> Deserialize<'de> for ExchangeMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawExchange::deserialize(d)?;
        if let Some(n) = raw.n {
            if n != raw.b.rows() {
                return Err(serde::de::Error::custom(format!(
                    "declared n = {n} but matrix has {} rows",
                    raw.b.rows()
                )));
            }
        }
        ExchangeMatrix::new(raw.b).map_err(serde::de::Error::custom)
    }
}

/// Boolean summary of the structural properties used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralPredicates {
    pub skew: bool,
    pub abundant: bool,
    pub acyclic: bool,
    pub complete: bool,
}

impl ExchangeMatrix {
    /// Validates shape and skew-symmetry.
    pub fn new(b: IntMatrix) -> Result<Self> {
        if !b.is_square() || b.rows() == 0 {
            return Err(Error::Shape {
                rows: b.rows(),
                cols: b.cols(),
            });
        }
        if let Some((i, j)) = b.skew_violation() {
            return Err(Error::NotSkewSymmetric { i: i + 1, j: j + 1 });
        }
        Ok(Self { n: b.rows(), b })
    }

    /// Panics on invalid input; meant for literals in tests and fixtures.
    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        Self::new(IntMatrix::from_i64(rows)).expect("invalid exchange matrix literal")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.b
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.b[(i, j)]
    }

    pub fn has_arrow(&self, i: usize, j: usize) -> bool {
        self.b[(i, j)].is_positive()
    }

    /// Weights `q_ij = |b_ij|` for `i < j` in lexicographic pair order.
    pub fn weights(&self) -> Vec<BigInt> {
        let mut q = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                q.push(self.b[(i, j)].abs());
            }
        }
        q
    }

    pub fn is_abundant(&self) -> bool {
        let two = BigInt::from(2);
        self.off_diagonal().all(|(i, j)| self.b[(i, j)].abs() >= two)
    }

    pub fn is_complete(&self) -> bool {
        self.off_diagonal().all(|(i, j)| !self.b[(i, j)].is_zero())
    }

    /// First missing edge (0-based) if the underlying graph is not complete.
    pub fn missing_edge(&self) -> Option<(usize, usize)> {
        self.off_diagonal().find(|&(i, j)| self.b[(i, j)].is_zero())
    }

    pub fn is_acyclic(&self) -> bool {
        let all: Vec<usize> = (0..self.n).collect();
        self.topological_order(&all).is_some()
    }

    /// Kahn's algorithm on the subquiver induced by `subset`, breaking ties by
    /// smallest index. `None` if the induced subquiver has a directed cycle.
    pub fn topological_order(&self, subset: &[usize]) -> Option<Vec<usize>> {
        let mut remaining: Vec<usize> = subset.to_vec();
        remaining.sort_unstable();
        let mut order = Vec::with_capacity(remaining.len());
        while !remaining.is_empty() {
            let pos = remaining
                .iter()
                .position(|&v| !remaining.iter().any(|&u| self.has_arrow(u, v)))?;
            order.push(remaining.remove(pos));
        }
        Some(order)
    }

    pub fn predicates(&self) -> StructuralPredicates {
        StructuralPredicates {
            skew: self.b.is_skew_symmetric(),
            abundant: self.is_abundant(),
            acyclic: self.is_acyclic(),
            complete: self.is_complete(),
        }
    }

    /// True if both matrices have the same sign at every entry.
    pub fn same_sign_pattern(&self, other: &ExchangeMatrix) -> bool {
        self.n == other.n
            && self
                .off_diagonal()
                .all(|(i, j)| self.b[(i, j)].sign() == other.b[(i, j)].sign())
    }

    /// The quiver obtained by a single mutation at `k`, ignoring C.
    pub fn mutate(&self, k: usize) -> Result<ExchangeMatrix> {
        Ok(FramedSeed::new(self.clone()).mutate(k)?.b)
    }

    fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).filter(move |&j| j != i).map(move |j| (i, j)))
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: k + 1,
                n: self.n,
            })
        }
    }
}

impl fmt::Debug for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExchangeMatrix({:?})", self.b)
    }
}

impl fmt::Display for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.b, f)
    }
}

/// Free function form of [`ExchangeMatrix::predicates`].
pub fn structural_predicates(b: &ExchangeMatrix) -> StructuralPredicates {
    b.predicates()
}

/// A list of vertices to mutate at, stored 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MutationSequence {
    indices: Vec<usize>,
}

impl MutationSequence {
    pub fn new(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    /// Builds from 1-based indices; zero is rejected.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        indices
            .iter()
            .map(|&k| {
                k.checked_sub(1)
                    .ok_or(Error::IndexOutOfRange { index: 0, n: 0 })
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.indices.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|k| k + 1).collect()
    }

    pub fn push(&mut self, k: usize) {
        self.indices.push(k);
    }

    pub fn prefix(&self, len: usize) -> MutationSequence {
        Self::new(self.indices[..len].to_vec())
    }

    pub fn is_reduced(&self) -> bool {
        self.check_reduced().is_ok()
    }

    pub fn check_reduced(&self) -> Result<()> {
        match self.indices.windows(2).position(|w| w[0] == w[1]) {
            None => Ok(()),
            Some(p) => Err(Error::NotReduced {
                position: p + 1,
                next: p + 2,
                vertex: self.indices[p] + 1,
            }),
        }
    }

    pub fn check_indices(&self, n: usize) -> Result<()> {
        match self.indices.iter().find(|&&k| k >= n) {
            None => Ok(()),
            Some(&k) => Err(Error::IndexOutOfRange { index: k + 1, n }),
        }
    }
}

impl FromStr for MutationSequence {
    type Err = Error;

    /// Parses comma-separated 1-based indices; optional surrounding brackets
    /// and whitespace are ignored. The empty string is the empty sequence.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        if body.is_empty() {
            return Ok(Self::default());
        }
        let raw = body
            .split(',')
            .map(|t| {
                t.trim().parse::<usize>().map_err(|_| {
                    Error::Precondition(format!("bad vertex index {:?} in sequence", t.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(&raw)
    }
}

impl fmt::Display for MutationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_one_based().iter().map(|k| k.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl Serialize for MutationSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MutationSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Self::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}

/// Per-row signs of a C-matrix, each `+1` or `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignVector(pub Vec<i8>);

impl SignVector {
    pub fn signs(&self) -> &[i8] {
        &self.0
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Sign of a sign-coherent nonzero row.
pub fn row_sign(row: &[BigInt], index: usize) -> Result<i8> {
    let pos = row.iter().any(Signed::is_positive);
    let neg = row.iter().any(Signed::is_negative);
    match (pos, neg) {
        (true, false) => Ok(1),
        (false, true) => Ok(-1),
        (true, true) => Err(Error::SignIncoherent { row: index + 1 }),
        (false, false) => Err(Error::ZeroRow { row: index + 1 }),
    }
}

/// The pair `[B^w | C^w]` together with the applied sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FramedSeed {
    pub b: ExchangeMatrix,
    pub c: IntMatrix,
    pub history: MutationSequence,
}

impl FramedSeed {
    /// `[B | I]` with empty history.
    pub fn new(b: ExchangeMatrix) -> Self {
        let n = b.n();
        Self {
            b,
            c: IntMatrix::identity(n),
            history: MutationSequence::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.b.n()
    }

    /// Mutation of the extended matrix at `k` (0-based). Checks sign-coherence
    /// of the resulting C-matrix.
    pub fn mutate(&self, k: usize) -> Result<FramedSeed> {
        let mut next = self.clone();
        next.mutate_in_place(k)?;
        Ok(next)
    }

    pub(crate) fn mutate_in_place(&mut self, k: usize) -> Result<()> {
        self.b.check_index(k)?;
        let n = self.n();
        let old_b = self.b.b.clone();
        let old_c = self.c.clone();
        let b = &mut self.b.b;
        let c = &mut self.c;
        for i in 0..n {
            let bik = &old_b[(i, k)];
            if i == k {
                for j in 0..n {
                    b[(i, j)] = -&old_b[(i, j)];
                    c[(i, j)] = -&old_c[(i, j)];
                }
                continue;
            }
            b[(i, k)] = -bik;
            if bik.is_zero() {
                continue;
            }
            let positive = bik.is_positive();
            // sgn(b_ik) * max(b_ik * x, 0) is nonzero only when x has the
            // same sign as b_ik.
            let bump = |target: &mut BigInt, x: &BigInt| {
                if !x.is_zero() && x.is_positive() == positive {
                    let prod = bik * x;
                    if positive {
                        *target += prod;
                    } else {
                        *target -= prod;
                    }
                }
            };
            for j in 0..n {
                if j != k {
                    bump(&mut b[(i, j)], &old_b[(k, j)]);
                }
                bump(&mut c[(i, j)], &old_c[(k, j)]);
            }
        }
        self.history.push(k);
        for i in 0..n {
            row_sign(self.c.row(i), i)?;
        }
        Ok(())
    }

    /// Sign of row `i` of C.
    pub fn c_sign(&self, i: usize) -> Result<i8> {
        row_sign(self.c.row(i), i)
    }

    pub fn sign_vector(&self) -> Result<SignVector> {
        (0..self.n()).map(|i| self.c_sign(i)).collect::<Result<Vec<_>>>().map(SignVector)
    }

    /// `[B | C]` as an aligned text table.
    pub fn render(&self) -> String {
        self.b.matrix().render_with(Some(&self.c))
    }
}

/// Free function form of [`FramedSeed::mutate`].
pub fn mutate_extended(seed: &FramedSeed, k: usize) -> Result<FramedSeed> {
    seed.mutate(k)
}

/// Folds mutation over `w` starting from `[b0 | I]`.
pub fn apply_sequence(b0: &ExchangeMatrix, w: &MutationSequence) -> Result<FramedSeed> {
    let mut seed = FramedSeed::new(b0.clone());
    for &k in w.indices() {
        seed.mutate_in_place(k)?;
    }
    Ok(seed)
}

/// Free function form of [`FramedSeed::sign_vector`].
pub fn sign_vector(seed: &FramedSeed) -> Result<SignVector> {
    seed.sign_vector()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn seq(s: &str) -> MutationSequence {
        s.parse().unwrap()
    }

    #[test]
    fn first_step_on_q() {
        let s = FramedSeed::new(fixtures::q233()).mutate(0).unwrap();
        assert_eq!(
            s.b,
            ExchangeMatrix::from_i64(&[[0, -2, 3], [2, 0, -3], [-3, 3, 0]])
        );
        assert_eq!(s.c, IntMatrix::from_i64(&[[-1, 0, 0], [0, 1, 0], [3, 0, 1]]));
        assert_eq!(s.sign_vector().unwrap(), SignVector(vec![-1, 1, 1]));
    }

    #[test]
    fn first_step_on_fork() {
        let s = FramedSeed::new(fixtures::fork345()).mutate(0).unwrap();
        assert_eq!(
            s.b,
            ExchangeMatrix::from_i64(&[[0, -3, 5], [3, 0, -11], [-5, 11, 0]])
        );
        assert_eq!(s.c, IntMatrix::from_i64(&[[-1, 0, 0], [0, 1, 0], [5, 0, 1]]));
    }

    #[test]
    fn long_walks() {
        let w = seq("1,2,3,2,1,3");
        let q = apply_sequence(&fixtures::q233(), &w).unwrap();
        assert_eq!(
            q.c,
            IntMatrix::from_i64(&[[433, 378, 144], [-16, -8, -3], [-24, -21, -8]])
        );
        let m = apply_sequence(&fixtures::markov(), &w).unwrap();
        assert_eq!(
            m.c,
            IntMatrix::from_i64(&[[13, 8, 6], [-6, -3, -2], [-6, -4, -3]])
        );
        assert_eq!(q.history, w);
    }

    #[test]
    fn empty_sequence_is_identity_frame() {
        let s = apply_sequence(&fixtures::q233(), &seq("")).unwrap();
        assert_eq!(s, FramedSeed::new(fixtures::q233()));
        assert_eq!(s.sign_vector().unwrap(), SignVector(vec![1, 1, 1]));
    }

    #[test]
    fn predicates() {
        let m = fixtures::markov().predicates();
        assert!(m.skew && m.abundant && !m.acyclic && m.complete);
        let a = ExchangeMatrix::from_i64(&[[0, 1], [-1, 0]]).predicates();
        assert!(!a.abundant && a.acyclic && a.complete);
        let q = fixtures::q233().predicates();
        assert!(q.abundant && !q.acyclic);
    }

    #[test]
    fn rejects_bad_input() {
        let err = ExchangeMatrix::new(IntMatrix::from_i64(&[[0, 2], [1, 0]])).unwrap_err();
        assert_eq!(err, Error::NotSkewSymmetric { i: 1, j: 2 });
        let err = FramedSeed::new(fixtures::markov()).mutate(3).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { index: 4, n: 3 });
        assert!("1,x".parse::<MutationSequence>().is_err());
        assert!("0".parse::<MutationSequence>().is_err());
    }

    #[test]
    fn sign_vector_errors() {
        assert_eq!(
            row_sign(&[BigInt::from(1), BigInt::from(-1)], 2),
            Err(Error::SignIncoherent { row: 3 })
        );
        assert_eq!(
            row_sign(&[BigInt::zero(), BigInt::zero()], 0),
            Err(Error::ZeroRow { row: 1 })
        );
    }

    #[test]
    fn sequence_parsing_round_trip() {
        let w = seq("[1, 2,3]");
        assert_eq!(w.indices(), &[0, 1, 2]);
        assert_eq!(w.to_string(), "[1,2,3]");
        assert_eq!(seq("1,1").check_reduced(), Err(Error::NotReduced { position: 1, next: 2, vertex: 1 }));
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, "[1,2,3]");
        assert_eq!(serde_json::from_str::<MutationSequence>(&json).unwrap(), w);
    }

    #[test]
    fn quiver_json() {
        let b: ExchangeMatrix =
            serde_json::from_str(r#"{"n": 3, "b": [[0,2,-3],[-2,0,3],[3,-3,0]]}"#).unwrap();
        assert_eq!(b, fixtures::q233());
        let back: ExchangeMatrix = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<ExchangeMatrix>(r#"{"n": 2, "b": [[0,1],[1,0]]}"#).is_err());
    }
}
