//! Executable checkers for the relations between c-vectors, GIMs, l-vectors
//! and reflections, plus the randomized campaign that drives them.

mod campaign;
mod rank3;

pub use campaign::{random_walk_campaign, reweight_fork, CampaignConfig, CheckKind};
pub use rank3::{
    cyclic_rank3_grid, is_mutation_cyclic_rank3, is_mutation_cyclic_rank3_with_depth, rank3_descent,
    rank3_reaches_acyclic,
    verify_rank3_theorem, Rank3Classification, DEFAULT_BFS_DEPTH,
};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coxeter::WalkState;
use crate::error::{Error, Result};
use crate::fork::{find_point_of_return, is_fork_preserving, ForkCertificate, LinearOrdering};
use crate::matrix::IntMatrix;
use crate::quiver::{ExchangeMatrix, FramedSeed, MutationSequence};

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Everything needed to replay a failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub check: String,
    pub quiver: ExchangeMatrix,
    pub sequence: MutationSequence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    /// 1-based `(i, j)` of the offending entry, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<(usize, usize)>,
    pub detail: String,
}

/// Per-check verdicts for one instance or one campaign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub instance: Value,
    pub checks: Vec<Check>,
    pub counterexample: Option<Counterexample>,
}

impl VerificationReport {
    pub fn new(instance: Value) -> Self {
        Self {
            instance,
            checks: Vec::new(),
            counterexample: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexample.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Records a failure; only the first counterexample is kept.
    pub fn fail(&mut self, cx: Counterexample) {
        if self.counterexample.is_none() {
            self.counterexample = Some(cx);
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `Σ c_i² + Σ_{i<j} σ_ij q_ij c_i c_j` for one sign pattern.
pub fn quadratic_value(c: &[BigInt], q: &[BigInt], sigma: &[i8]) -> BigInt {
    let n = c.len();
    let mut total: BigInt = c.iter().map(|x| x * x).sum();
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            let t = &q[p] * &c[i] * &c[j];
            if sigma[p] > 0 {
                total += t;
            } else {
                total -= t;
            }
            p += 1;
        }
    }
    total
}

fn pair_terms(c: &[BigInt], q: &[BigInt]) -> Vec<BigInt> {
    let n = c.len();
    let mut terms = Vec::with_capacity(q.len());
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            terms.push(&q[p] * &c[i] * &c[j]);
            p += 1;
        }
    }
    terms
}

/// Every sign pattern `σ` (pairs `i < j` in lexicographic order) for which
/// the quadratic form evaluates to exactly 1.
pub fn quadratic_signs(c: &[BigInt], q: &[BigInt]) -> Vec<Vec<i8>> {
    let m = q.len();
    assert_eq!(m, c.len() * c.len().saturating_sub(1) / 2, "weight count");
    let terms = pair_terms(c, q);
    let base: BigInt = c.iter().map(|x| x * x).sum();
    let one = BigInt::one();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << m) {
        let mut v = base.clone();
        for (p, t) in terms.iter().enumerate() {
            if mask >> p & 1 == 0 {
                v += t;
            } else {
                v -= t;
            }
        }
        if v == one {
            out.push((0..m).map(|p| if mask >> p & 1 == 0 { 1 } else { -1 }).collect());
        }
    }
    out
}

/// First realizing sign pattern, walking the patterns in Gray-code order so
/// that each step is a single addition.
pub fn first_quadratic_sign(c: &[BigInt], q: &[BigInt]) -> Option<Vec<i8>> {
    let m = q.len();
    let terms = pair_terms(c, q);
    let mut sigma = vec![1i8; m];
    let mut v: BigInt = c.iter().map(|x| x * x).sum::<BigInt>() + terms.iter().sum::<BigInt>();
    let one = BigInt::one();
    for step in 1u64..=(1u64 << m) {
        if v == one {
            return Some(sigma);
        }
        if step == 1u64 << m {
            break;
        }
        let p = step.trailing_zeros() as usize;
        if sigma[p] > 0 {
            v -= &terms[p] * 2;
        } else {
            v += &terms[p] * 2;
        }
        sigma[p] = -sigma[p];
    }
    None
}

/// Sign vectors `ε` and `τ` attached to a fork-preserving sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonTau {
    pub epsilon: Vec<i8>,
    pub tau: Vec<i8>,
}

impl EpsilonTau {
    /// Tuples after the single step `[k]`.
    pub fn base(n: usize, cert: &ForkCertificate, k: usize) -> Result<Self> {
        let r = cert.point_of_return;
        if k == r {
            return Err(Error::Precondition(
                "sequence must not start at the point of return".into(),
            ));
        }
        let inbound = cert.is_inbound(k);
        let epsilon = (0..n)
            .map(|i| match (inbound, i == k || (!inbound && i == r)) {
                (true, false) => 1,
                (true, true) => -1,
                (false, false) => -1,
                (false, true) => 1,
            })
            .collect();
        let tau = (0..n)
            .map(|j| if j == r || inbound { 1 } else { -1 })
            .collect();
        Ok(Self { epsilon, tau })
    }

    /// Tuples after one more step at `k`.
    pub fn step(&mut self, k: usize) {
        self.epsilon[k] = -self.epsilon[k];
    }

    /// `ε_i τ_j c_ij` entrywise.
    pub fn apply(&self, c: &IntMatrix) -> IntMatrix {
        let n = c.rows();
        let mut out = c.clone();
        for i in 0..n {
            for j in 0..n {
                if self.epsilon[i] * self.tau[j] < 0 {
                    out[(i, j)] = -&c[(i, j)];
                }
            }
        }
        out
    }
}

/// `ε` and `τ` for a non-trivial sequence starting away from the point of return.
pub fn epsilon_tau(b0: &ExchangeMatrix, cert: &ForkCertificate, w: &MutationSequence) -> Result<EpsilonTau> {
    let (&first, rest) = w
        .indices()
        .split_first()
        .ok_or_else(|| Error::Precondition("sequence must be non-trivial".into()))?;
    w.check_indices(b0.n())?;
    let mut et = EpsilonTau::base(b0.n(), cert, first)?;
    for &k in rest {
        et.step(k);
    }
    Ok(et)
}

/// First `(i, j)` where `l_ij ≠ ε_i τ_j c_ij`.
pub fn l_c_mismatch(l: &IntMatrix, et: &EpsilonTau, c: &IntMatrix) -> Option<(usize, usize)> {
    let expected = et.apply(c);
    let n = c.rows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| l[(i, j)] != expected[(i, j)])
}

/// First `(i, j)` where the GIM entry differs from the closed form in `ε`,
/// the signs of the c-vectors and `|b_ij|`.
pub fn gim_sign_formula_mismatch(
    a: &IntMatrix,
    et: &EpsilonTau,
    seed: &FramedSeed,
) -> Result<Option<(usize, usize)>> {
    let n = seed.n();
    let signs = seed.sign_vector()?.0;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j {
                BigInt::from(2)
            } else {
                let bij = seed.b.get(i, j);
                let mut s = -(et.epsilon[i] as i32) * et.epsilon[j] as i32;
                let bc_nonneg = bij.is_zero() || (bij.is_positive() == (signs[j] > 0));
                if !bc_nonneg {
                    s *= signs[i] as i32 * signs[j] as i32;
                }
                BigInt::from(s) * bij.abs()
            };
            if a[(i, j)] != expected {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

fn one_based(e: (usize, usize)) -> (usize, usize) {
    (e.0 + 1, e.1 + 1)
}

/// Checks the entrywise relation between raw L rows and C, and the GIM sign
/// formula, after every prefix of `w`.
pub fn verify_l_c_relation(
    b0: &ExchangeMatrix,
    cert: &ForkCertificate,
    ord: &LinearOrdering,
    w: &MutationSequence,
) -> Result<VerificationReport> {
    if w.is_empty() {
        return Err(Error::Precondition("sequence must be non-trivial".into()));
    }
    let fp = is_fork_preserving(b0, w)?;
    if !fp.preserving {
        return Err(Error::Precondition(fp.reason.unwrap_or_default()));
    }
    let mut report = VerificationReport::new(json!({
        "quiver": b0,
        "sequence": w,
        "ordering": ord,
        "point_of_return": cert.point_of_return + 1,
    }));
    let mut state = WalkState::new(b0, ord)?;
    let mut et: Option<EpsilonTau> = None;
    let mut l_fail = None;
    let mut a_fail = None;
    for (step, &k) in w.indices().iter().enumerate() {
        state.step(k)?;
        match et.as_mut() {
            None => et = Some(EpsilonTau::base(b0.n(), cert, k)?),
            Some(e) => e.step(k),
        }
        let e = et.as_ref().expect("set above");
        if l_fail.is_none() {
            if let Some(ij) = l_c_mismatch(&state.l, e, &state.seed.c) {
                l_fail = Some((step + 1, ij));
            }
        }
        if a_fail.is_none() {
            if let Some(ij) = gim_sign_formula_mismatch(&state.gim.a, e, &state.seed)? {
                a_fail = Some((step + 1, ij));
            }
        }
    }
    for (name, fail) in [("l-c-relation", l_fail), ("gim-sign-formula", a_fail)] {
        match fail {
            None => report.push(Check::new(name, true, format!("{} prefixes", w.len()))),
            Some((step, ij)) => {
                let detail = format!(
                    "mismatch at entry ({}, {}) after step {step}",
                    ij.0 + 1,
                    ij.1 + 1
                );
                report.push(Check::new(name, false, detail.clone()));
                report.fail(Counterexample {
                    check: name.into(),
                    quiver: b0.clone(),
                    sequence: w.prefix(step),
                    rng_seed: None,
                    trial: None,
                    entry: Some(one_based(ij)),
                    detail,
                });
            }
        }
    }
    report.push(Check::new(
        "l-c-magnitudes",
        state.l.abs() == state.seed.c.abs(),
        "|L| = |C| entrywise at the final step",
    ));
    Ok(report)
}

/// `|L| = |C|` along `w` for an arbitrary ordering; no fork requirement.
pub fn verify_l_c_magnitudes(
    b0: &ExchangeMatrix,
    ord: &LinearOrdering,
    w: &MutationSequence,
) -> Result<VerificationReport> {
    w.check_indices(b0.n())?;
    let within = find_point_of_return(b0).is_some();
    let mut report = VerificationReport::new(json!({
        "quiver": b0,
        "sequence": w,
        "ordering": ord,
        "within_hypotheses": within,
    }));
    let mut state = WalkState::new(b0, ord)?;
    let mut fail = None;
    for (step, &k) in w.indices().iter().enumerate() {
        state.step(k)?;
        let (l, c) = (state.l.abs(), state.seed.c.abs());
        if fail.is_none() && l != c {
            fail = Some(step + 1);
        }
    }
    match fail {
        None => report.push(Check::new("l-c-magnitudes", true, format!("{} prefixes", w.len()))),
        Some(step) => {
            let detail = format!("|L| and |C| differ after step {step}");
            report.push(Check::new("l-c-magnitudes", false, detail.clone()));
            report.fail(Counterexample {
                check: "l-c-magnitudes".into(),
                quiver: b0.clone(),
                sequence: w.prefix(step),
                rng_seed: None,
                trial: None,
                entry: None,
                detail,
            });
        }
    }
    Ok(report)
}

/// Compares sign vectors of two sign-matched quivers after every prefix of `w`.
pub fn verify_sign_invariance(
    b1: &ExchangeMatrix,
    b2: &ExchangeMatrix,
    w: &MutationSequence,
) -> Result<VerificationReport> {
    if !b1.same_sign_pattern(b2) {
        return Err(Error::Precondition(
            "the two quivers have different sign patterns".into(),
        ));
    }
    w.check_indices(b1.n())?;
    let within = match find_point_of_return(b1) {
        Some(_) => is_fork_preserving(b1, w)?.preserving,
        None => false,
    };
    let mut report = VerificationReport::new(json!({
        "quivers": [b1, b2],
        "sequence": w,
        "within_hypotheses": within,
    }));
    let mut s1 = FramedSeed::new(b1.clone());
    let mut s2 = FramedSeed::new(b2.clone());
    let mut fail = None;
    for (step, &k) in w.indices().iter().enumerate() {
        s1 = s1.mutate(k)?;
        s2 = s2.mutate(k)?;
        let (v1, v2) = (s1.sign_vector()?, s2.sign_vector()?);
        if v1 != v2 {
            fail = Some((step + 1, v1, v2));
            break;
        }
    }
    match fail {
        None => report.push(Check::new(
            "sign-invariance",
            true,
            format!("sign vectors agree on all {} prefixes; final {}", w.len(), s1.sign_vector()?),
        )),
        Some((step, v1, v2)) => {
            let detail = format!("after step {step}: {v1} vs {v2}");
            report.push(Check::new("sign-invariance", false, detail.clone()));
            report.fail(Counterexample {
                check: "sign-invariance".into(),
                quiver: b1.clone(),
                sequence: w.prefix(step),
                rng_seed: None,
                trial: None,
                entry: None,
                detail,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::fork::fork_linear_ordering;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn seq(s: &str) -> MutationSequence {
        s.parse().unwrap()
    }

    #[test]
    fn quadratic_example() {
        let c = ints(&[433, 378, 144]);
        let q = ints(&[2, 3, 3]);
        let all = quadratic_signs(&c, &q);
        assert!(all.contains(&vec![-1, -1, 1]));
        assert_eq!(quadratic_value(&c, &q, &[-1, -1, 1]), BigInt::one());
        assert!(first_quadratic_sign(&c, &q).is_some());
    }

    #[test]
    fn quadratic_basis_vector_admits_everything() {
        let c = ints(&[0, 1, 0, 0]);
        let q = ints(&[2, 3, 4, 5, 6, 7]);
        assert_eq!(quadratic_signs(&c, &q).len(), 64);
    }

    #[test]
    fn quadratic_fork_example() {
        let c = ints(&[5, 0, 1]);
        let q = ints(&[3, 5, 11]);
        let all = quadratic_signs(&c, &q);
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|s| s[1] == -1));
    }

    #[test]
    fn gray_code_agrees_with_enumeration() {
        let q = ints(&[2, 3, 3]);
        for c in [[433, 378, 144], [16, 8, 3], [1, 1, 1], [7, 0, 2]] {
            let c = ints(&c);
            assert_eq!(
                first_quadratic_sign(&c, &q).is_some(),
                !quadratic_signs(&c, &q).is_empty()
            );
        }
    }

    #[test]
    fn epsilon_tau_tables() {
        let b = fixtures::fork345();
        let cert = find_point_of_return(&b).unwrap();
        let et = epsilon_tau(&b, &cert, &seq("1")).unwrap();
        assert_eq!(et.epsilon, vec![-1, 1, 1]);
        assert_eq!(et.tau, vec![1, 1, 1]);
        let et = epsilon_tau(&b, &cert, &seq("3")).unwrap();
        assert_eq!(et.epsilon, vec![-1, 1, 1]);
        assert_eq!(et.tau, vec![-1, 1, -1]);
        let et2 = epsilon_tau(&b, &cert, &seq("3,1")).unwrap();
        assert_eq!(et2.epsilon, vec![1, 1, 1]);
        assert!(epsilon_tau(&b, &cert, &seq("")).is_err());
        assert!(epsilon_tau(&b, &cert, &seq("2")).is_err());
    }

    #[test]
    fn l_c_relation_on_example_fork() {
        let b = fixtures::fork345();
        let cert = find_point_of_return(&b).unwrap();
        let ord = fork_linear_ordering(&cert, &b).unwrap();
        for w in ["1", "3", "1,3,1", "3,1,3,1,3"] {
            let report = verify_l_c_relation(&b, &cert, &ord, &seq(w)).unwrap();
            assert!(report.passed(), "{w}: {report:?}");
        }
    }

    #[test]
    fn magnitudes_on_q() {
        let ord: LinearOrdering = "2,1,3".parse().unwrap();
        let r = verify_l_c_magnitudes(&fixtures::q233(), &ord, &seq("1,2,3,2,1,3")).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn sign_invariance_q_vs_m() {
        let r = verify_sign_invariance(&fixtures::q233(), &fixtures::markov(), &seq("1,2,3")).unwrap();
        assert!(r.passed());
        assert_eq!(r.instance["within_hypotheses"], json!(false));
        let r = verify_sign_invariance(&fixtures::q233(), &fixtures::markov(), &seq("")).unwrap();
        assert!(r.passed());
        let flipped = ExchangeMatrix::from_i64(&[[0, -2, 3], [2, 0, -3], [-3, 3, 0]]);
        assert!(verify_sign_invariance(&fixtures::q233(), &flipped, &seq("1")).is_err());
    }

    #[test]
    fn sign_invariance_on_reweighted_fork() {
        let a = fixtures::fork345();
        let b = ExchangeMatrix::from_i64(&[[0, 7, -100], [-7, 0, 9], [100, -9, 0]]);
        let w = seq("1,3,1,3,1,3,1,3,1,3");
        let r = verify_sign_invariance(&a, &b, &w).unwrap();
        assert!(r.passed());
        assert_eq!(r.instance["within_hypotheses"], json!(true));
    }
}
