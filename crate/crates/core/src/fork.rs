//! Fork recognition, fork orderings and random fork generation.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::quiver::{ExchangeMatrix, FramedSeed, MutationSequence};

/// Witness that a quiver is a fork with a given point of return.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForkCertificate {
    pub point_of_return: usize,
    /// Vertices with arrows into the point of return.
    pub inbound: Vec<usize>,
    /// Vertices receiving arrows from the point of return.
    pub outbound: Vec<usize>,
}

impl ForkCertificate {
    pub fn is_inbound(&self, v: usize) -> bool {
        self.inbound.contains(&v)
    }

    pub fn is_outbound(&self, v: usize) -> bool {
        self.outbound.contains(&v)
    }
}

/// A total order on vertices, smallest first. Stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearOrdering {
    order: Vec<usize>,
}

impl LinearOrdering {
    /// `order` must be a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(Error::BadOrdering { n });
            }
            seen[v] = true;
        }
        Ok(Self { order })
    }

    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let zero_based = order
            .iter()
            .map(|&v| v.checked_sub(1).ok_or(Error::BadOrdering { n }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero_based)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.order.iter().map(|v| v + 1).collect()
    }

    /// Rank of each vertex: `ranks()[v]` is the position of `v`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (p, &v) in self.order.iter().enumerate() {
            rank[v] = p;
        }
        rank
    }

    pub fn position(&self, v: usize) -> Option<usize> {
        self.order.iter().position(|&x| x == v)
    }

    pub fn precedes(&self, i: usize, j: usize) -> bool {
        let r = self.ranks();
        r[i] < r[j]
    }

    /// Cyclic rotation that starts at `v`.
    pub fn rotated_to(&self, v: usize) -> Option<LinearOrdering> {
        let p = self.position(v)?;
        Some(self.rotated_by(p))
    }

    pub fn rotated_by(&self, shift: usize) -> LinearOrdering {
        let mut order = self.order.clone();
        let len = order.len();
        if len > 0 {
            order.rotate_left(shift % len);
        }
        Self { order }
    }
}

impl FromStr for LinearOrdering {
    type Err = Error;

    /// Comma-separated 1-based vertices, smallest first.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        let raw = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Precondition(format!("bad vertex {:?} in ordering", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(&raw)
    }
}

impl fmt::Display for LinearOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_one_based().iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("<"))
    }
}

impl Serialize for LinearOrdering {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearOrdering {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Self::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}

/// Checks the fork conditions with `r` as point of return.
pub fn fork_certificate_at(b: &ExchangeMatrix, r: usize) -> Option<ForkCertificate> {
    if !b.is_abundant() || b.is_acyclic() {
        return None;
    }
    certificate_unchecked(b, r)
}

fn certificate_unchecked(b: &ExchangeMatrix, r: usize) -> Option<ForkCertificate> {
    let n = b.n();
    let inbound: Vec<usize> = (0..n).filter(|&i| b.has_arrow(i, r)).collect();
    let outbound: Vec<usize> = (0..n).filter(|&j| b.has_arrow(r, j)).collect();
    for &i in &inbound {
        let w_ir = b.get(i, r);
        for &j in &outbound {
            let w_ji = b.get(j, i);
            if !w_ji.is_positive() || w_ji <= w_ir || w_ji <= b.get(r, j) {
                return None;
            }
        }
    }
    b.topological_order(&inbound)?;
    b.topological_order(&outbound)?;
    Some(ForkCertificate {
        point_of_return: r,
        inbound,
        outbound,
    })
}

/// Lowest-index point of return, if `b` is a fork.
pub fn find_point_of_return(b: &ExchangeMatrix) -> Option<ForkCertificate> {
    if !b.is_abundant() || b.is_acyclic() {
        return None;
    }
    (0..b.n()).find_map(|r| certificate_unchecked(b, r))
}

/// Topological order of the subquiver induced by `subset`, ties broken by
/// smallest index.
pub fn acyclic_ordering(b: &ExchangeMatrix, subset: &[usize]) -> Result<Vec<usize>> {
    b.topological_order(subset).ok_or_else(|| Error::Cyclic {
        vertices: subset.iter().map(|v| v + 1).collect(),
    })
}

/// The point of return followed by the reversed acyclic ordering of the
/// remaining vertices.
pub fn fork_linear_ordering(cert: &ForkCertificate, b: &ExchangeMatrix) -> Result<LinearOrdering> {
    let n = b.n();
    if n < 3 {
        return Err(Error::Precondition(format!(
            "forks need at least 3 vertices, got {n}"
        )));
    }
    let r = cert.point_of_return;
    let rest: Vec<usize> = (0..n).filter(|&v| v != r).collect();
    let mut tail = acyclic_ordering(b, &rest)?;
    tail.reverse();
    let mut order = vec![r];
    order.extend(tail);
    LinearOrdering::new(order)
}

/// Outcome of [`is_fork_preserving`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForkPreservation {
    pub preserving: bool,
    pub reason: Option<String>,
}

/// Decides whether `w` is fork-preserving for the fork `b`, re-validating at
/// every step that the mutated quiver is a fork whose point of return is the
/// vertex just mutated.
pub fn is_fork_preserving(b: &ExchangeMatrix, w: &MutationSequence) -> Result<ForkPreservation> {
    let cert = find_point_of_return(b).ok_or(Error::NotAFork)?;
    w.check_indices(b.n())?;
    let reject = |reason: String| {
        Ok(ForkPreservation {
            preserving: false,
            reason: Some(reason),
        })
    };
    if let Err(e) = w.check_reduced() {
        return reject(e.to_string());
    }
    if w.first() == Some(cert.point_of_return) {
        return reject(format!(
            "first step mutates the point of return {}",
            cert.point_of_return + 1
        ));
    }
    let mut current = b.clone();
    for (step, &k) in w.indices().iter().enumerate() {
        current = current.mutate(k)?;
        if fork_certificate_at(&current, k).is_none() {
            return Err(Error::ForkLost {
                step: step + 1,
                vertex: k + 1,
            });
        }
    }
    Ok(ForkPreservation {
        preserving: true,
        reason: None,
    })
}

fn oriented_triangle(b: &ExchangeMatrix, i: usize, j: usize, k: usize) -> bool {
    let (x, y, z) = (b.get(i, j).sign(), b.get(j, k).sign(), b.get(k, i).sign());
    x == y && y == z && x != num_bigint::Sign::NoSign
}

/// True if some four vertices span a complete subquiver in which one vertex is
/// a source or sink over an oriented triangle on the other three.
pub fn has_vortex(b: &ExchangeMatrix) -> bool {
    let n = b.n();
    let complete = |vs: &[usize]| {
        vs.iter()
            .all(|&u| vs.iter().all(|&v| u == v || b.get(u, v).sign() != num_bigint::Sign::NoSign))
    };
    for a in 0..n {
        for c in a + 1..n {
            for d in c + 1..n {
                for e in d + 1..n {
                    let quad = [a, c, d, e];
                    if !complete(&quad) {
                        continue;
                    }
                    for apex in 0..4 {
                        let x = quad[apex];
                        let rest: Vec<usize> = quad.iter().copied().filter(|&v| v != x).collect();
                        let source = rest.iter().all(|&v| b.has_arrow(x, v));
                        let sink = rest.iter().all(|&v| b.has_arrow(v, x));
                        if (source || sink) && oriented_triangle(b, rest[0], rest[1], rest[2]) {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

fn row_signs(seed: &FramedSeed) -> Result<Vec<i8>> {
    Ok(seed.sign_vector()?.0)
}

/// The last green vertex of the current quiver, with every defining
/// condition re-checked.
pub fn last_green_vertex(seed: &FramedSeed, cert: &ForkCertificate) -> Result<usize> {
    let b = &seed.b;
    let r = cert.point_of_return;
    let signs = row_signs(seed)?;
    let rest: Vec<usize> = (0..b.n()).filter(|&v| v != r).collect();
    let order = acyclic_ordering(b, &rest)?;
    let Some(&v) = order.iter().rev().find(|&&v| signs[v] > 0) else {
        if signs[r] > 0 {
            return Ok(r);
        }
        return Err(Error::Verification(
            "no vertex has a positive c-vector".into(),
        ));
    };
    for i in 0..b.n() {
        if i == r || i == v {
            continue;
        }
        if b.has_arrow(i, v) && signs[i] < 0 {
            return Err(Error::Verification(format!(
                "vertex {} points to last green vertex {} but has a negative c-vector",
                i + 1,
                v + 1
            )));
        }
        if b.has_arrow(v, i) && signs[i] > 0 {
            return Err(Error::Verification(format!(
                "last green vertex {} points to vertex {} with a positive c-vector",
                v + 1,
                i + 1
            )));
        }
    }
    Ok(v)
}

/// Rotation of the fork ordering that starts at the last green vertex, with
/// positive c-vectors before the point of return and negative ones after it.
pub fn cyclic_signed_ordering(seed: &FramedSeed, cert: &ForkCertificate) -> Result<LinearOrdering> {
    let base = fork_linear_ordering(cert, &seed.b)?;
    let v = last_green_vertex(seed, cert)?;
    let rotated = base.rotated_to(v).expect("vertex in ordering");
    let signs = row_signs(seed)?;
    let r = cert.point_of_return;
    let mut after_r = false;
    for &u in rotated.order() {
        if u == r {
            after_r = true;
            continue;
        }
        let expected = if after_r { -1 } else { 1 };
        if signs[u] != expected {
            return Err(Error::Verification(format!(
                "vertex {} has sign {} but sits {} the point of return in {}",
                u + 1,
                signs[u],
                if after_r { "after" } else { "before" },
                rotated
            )));
        }
    }
    Ok(rotated)
}

/// A random fork drawn from a seeded ChaCha stream.
pub fn random_fork(n: usize, max_weight: u32, rng_seed: u64) -> Result<ExchangeMatrix> {
    random_fork_with(&mut ChaCha8Rng::seed_from_u64(rng_seed), n, max_weight)
}

/// Builds a fork: a point of return `r`, a non-empty split of the other
/// vertices into inbound and outbound parts, random acyclic tournaments inside
/// each part, and weights drawn uniformly from their feasible ranges.
pub fn random_fork_with<R: Rng + ?Sized>(rng: &mut R, n: usize, max_weight: u32) -> Result<ExchangeMatrix> {
    if n < 3 {
        return Err(Error::Infeasible(format!("forks need n >= 3, got {n}")));
    }
    if max_weight < 3 {
        return Err(Error::Infeasible(format!(
            "max_weight {max_weight} < 3: a weight across the parts must exceed a weight >= 2"
        )));
    }
    let r = rng.gen_range(0..n);
    let mut others: Vec<usize> = (0..n).filter(|&v| v != r).collect();
    others.shuffle(rng);
    let split = rng.gen_range(1..others.len());
    let (inbound, outbound) = others.split_at(split);

    let mut m = IntMatrix::zeros(n, n);
    let set = |m: &mut IntMatrix, from: usize, to: usize, w: u32| {
        m[(from, to)] = BigInt::from(w);
        m[(to, from)] = -BigInt::from(w);
    };
    // Within each part, the shuffled order is the acyclic order.
    for part in [inbound, outbound] {
        for (p, &u) in part.iter().enumerate() {
            for &v in &part[p + 1..] {
                let w = rng.gen_range(2..=max_weight);
                set(&mut m, u, v, w);
            }
        }
    }
    let w_in: Vec<u32> = inbound.iter().map(|_| rng.gen_range(2..max_weight)).collect();
    let w_out: Vec<u32> = outbound.iter().map(|_| rng.gen_range(2..max_weight)).collect();
    for (&i, &wi) in inbound.iter().zip(&w_in) {
        set(&mut m, i, r, wi);
    }
    for (&j, &wj) in outbound.iter().zip(&w_out) {
        set(&mut m, r, j, wj);
    }
    for (&i, &wi) in inbound.iter().zip(&w_in) {
        for (&j, &wj) in outbound.iter().zip(&w_out) {
            let lo = wi.max(wj) + 1;
            let w = rng.gen_range(lo..=max_weight);
            set(&mut m, j, i, w);
        }
    }
    let b = ExchangeMatrix::new(m)?;
    debug_assert!(fork_certificate_at(&b, r).is_some());
    Ok(b)
}

/// A random fork-preserving sequence of exactly `len` steps for a fork with
/// point of return `r`: the first step avoids `r`, each later step avoids the
/// previous one.
pub fn random_fork_preserving_sequence<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    r: usize,
    len: usize,
) -> MutationSequence {
    let mut w = MutationSequence::default();
    let mut avoid = r;
    for _ in 0..len {
        let mut k = rng.gen_range(0..n - 1);
        if k >= avoid {
            k += 1;
        }
        w.push(k);
        avoid = k;
    }
    w
}
