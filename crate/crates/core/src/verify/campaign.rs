//! Randomized search for counterexamples over random forks and
//! fork-preserving walks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    first_quadratic_sign, gim_sign_formula_mismatch, l_c_mismatch, verify_sign_invariance, Check,
    Counterexample, EpsilonTau, VerificationReport,
};
use crate::coxeter::{coxeter_product_check, reflections_along, WalkState};
use crate::error::{Error, Result};
use crate::fork::{
    find_point_of_return, fork_certificate_at, fork_linear_ordering, has_vortex,
    random_fork_preserving_sequence, random_fork_with, ForkCertificate,
};
use crate::gim::{admissibility_violation, gim_from_ordering, mutate_gim};
use crate::matrix::IntMatrix;
use crate::quiver::{ExchangeMatrix, MutationSequence};

/// The properties a campaign can exercise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Every intermediate quiver is a fork whose point of return is the last
    /// mutated vertex.
    ForkPreservation,
    /// Every c-vector solves the quadratic equation with the initial weights.
    Quadratic,
    /// The co-evolved GIM stays admissible, for the fork ordering and for a
    /// random cyclic rotation of it.
    Admissibility,
    /// `a_ij^w = l_i A l_j^T` for the recurrence rows.
    Gram,
    /// Raw L rows equal `ε_i τ_j c_ij`, and the GIM sign formula holds.
    EpsilonTau,
    /// Word-path and recurrence-path L-matrices agree up to row sign.
    WordRecurrence,
    /// The Coxeter element identity.
    Coxeter,
    /// Sign vectors agree with a reweighted fork of the same sign pattern.
    SignInvariance,
    /// Reflection tuples agree with a reweighted fork of the same sign pattern.
    ReflectionInvariance,
    /// No intermediate quiver contains a vortex.
    VortexFree,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::ForkPreservation,
        CheckKind::Quadratic,
        CheckKind::Admissibility,
        CheckKind::Gram,
        CheckKind::EpsilonTau,
        CheckKind::WordRecurrence,
        CheckKind::Coxeter,
        CheckKind::SignInvariance,
        CheckKind::ReflectionInvariance,
        CheckKind::VortexFree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::ForkPreservation => "fork-preservation",
            CheckKind::Quadratic => "quadratic",
            CheckKind::Admissibility => "admissibility",
            CheckKind::Gram => "gram",
            CheckKind::EpsilonTau => "epsilon-tau",
            CheckKind::WordRecurrence => "word-recurrence",
            CheckKind::Coxeter => "coxeter",
            CheckKind::SignInvariance => "sign-invariance",
            CheckKind::ReflectionInvariance => "reflection-invariance",
            CheckKind::VortexFree => "vortex-free",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Precondition(format!("unknown check {s:?}")))
    }
}

/// Parameters of a campaign. Each trial picks its rank uniformly from `ns`
/// and a walk length uniformly from `1..=walk_length`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub ns: Vec<usize>,
    pub max_weight: u32,
    pub walk_length: usize,
    pub trials: usize,
    pub rng_seed: u64,
    pub checks: BTreeSet<CheckKind>,
}

impl CampaignConfig {
    pub fn new(ns: Vec<usize>, max_weight: u32, walk_length: usize, trials: usize, rng_seed: u64) -> Self {
        Self {
            ns,
            max_weight,
            walk_length,
            trials,
            rng_seed,
            checks: CheckKind::ALL.into_iter().collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Ok(());
        }
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 3) {
            return Err(Error::Infeasible("every rank must be at least 3".into()));
        }
        if self.max_weight < 3 {
            return Err(Error::Infeasible("max_weight must be at least 3".into()));
        }
        if self.walk_length == 0 {
            return Err(Error::Infeasible("walk_length must be at least 1".into()));
        }
        Ok(())
    }
}

/// A fork with the same point of return, parts and orientation as `b`, with
/// all weights drawn afresh from their feasible ranges.
pub fn reweight_fork<R: Rng + ?Sized>(
    b: &ExchangeMatrix,
    cert: &ForkCertificate,
    max_weight: u32,
    rng: &mut R,
) -> Result<ExchangeMatrix> {
    if max_weight < 3 {
        return Err(Error::Infeasible("max_weight must be at least 3".into()));
    }
    let n = b.n();
    let r = cert.point_of_return;
    let mut m = IntMatrix::zeros(n, n);
    let mut set = |from: usize, to: usize, w: u32| {
        let w = BigInt::from(w);
        let sign = if b.has_arrow(from, to) { 1 } else { -1 };
        m[(from, to)] = &w * sign;
        m[(to, from)] = -&w * sign;
    };
    let spoke: Vec<u32> = (0..n).map(|_| rng.gen_range(2..max_weight)).collect();
    for v in (0..n).filter(|&v| v != r) {
        set(r, v, spoke[v]);
    }
    for u in 0..n {
        for v in u + 1..n {
            if u == r || v == r {
                continue;
            }
            let across = (cert.is_inbound(u) && cert.is_outbound(v))
                || (cert.is_outbound(u) && cert.is_inbound(v));
            let lo = if across { spoke[u].max(spoke[v]) + 1 } else { 2 };
            let w = rng.gen_range(lo..=max_weight);
            set(u, v, w);
        }
    }
    let out = ExchangeMatrix::new(m)?;
    debug_assert!(fork_certificate_at(&out, r).is_some());
    Ok(out)
}

struct TrialOutcome {
    failures: Vec<Failure>,
    quiver: ExchangeMatrix,
    sequence: MutationSequence,
}

fn run_trial(cfg: &CampaignConfig, trial: usize) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(trial as u64);
    let n = cfg.ns[rng.gen_range(0..cfg.ns.len())];
    let b = random_fork_with(&mut rng, n, cfg.max_weight)?;
    let cert = find_point_of_return(&b).ok_or(Error::NotAFork)?;
    let len = rng.gen_range(1..=cfg.walk_length);
    let w = random_fork_preserving_sequence(&mut rng, n, cert.point_of_return, len);
    let shift = rng.gen_range(0..n);
    let partner = reweight_fork(&b, &cert, cfg.max_weight + 3, &mut rng)?;
    let failures = trial_checks(cfg, &b, &cert, &w, shift, &partner);
    Ok(TrialOutcome {
        failures,
        quiver: b,
        sequence: w,
    })
}

fn trial_checks(
    cfg: &CampaignConfig,
    b: &ExchangeMatrix,
    cert: &ForkCertificate,
    w: &MutationSequence,
    shift: usize,
    partner: &ExchangeMatrix,
) -> Vec<Failure> {
    let mut failures = Failures::default();
    let on = |k: CheckKind| cfg.checks.contains(&k);
    let mut fail = |k, msg, entry| failures.record(k, msg, entry);
    let ord = match fork_linear_ordering(cert, b) {
        Ok(o) => o,
        Err(e) => {
            fail(CheckKind::ForkPreservation, e.to_string(), None);
            return failures.0;
        }
    };
    let rotated = ord.rotated_by(shift);
    let q = b.weights();
    let mut state = match WalkState::new(b, &ord) {
        Ok(s) => s,
        Err(e) => {
            fail(CheckKind::Gram, e.to_string(), None);
            return failures.0;
        }
    };
    let mut rotated_gim = gim_from_ordering(b, &rotated).expect("valid ordering");
    let mut et: Option<EpsilonTau> = None;
    for (step, &k) in w.indices().iter().enumerate() {
        let at = |msg: String| format!("step {}: {msg}", step + 1);
        if on(CheckKind::Admissibility) {
            match mutate_gim(&rotated_gim, &state.seed, k) {
                Ok(g) => rotated_gim = g,
                Err(e) => fail(CheckKind::Admissibility, at(e.to_string()), None),
            }
        }
        if let Err(e) = state.step(k) {
            fail(CheckKind::ForkPreservation, at(e.to_string()), None);
            return failures.0;
        }
        let seed = &state.seed;
        if on(CheckKind::ForkPreservation) && fork_certificate_at(&seed.b, k).is_none() {
            fail(
                CheckKind::ForkPreservation,
                at(format!("quiver is not a fork with point of return {}", k + 1)),
                None,
            );
        }
        if on(CheckKind::VortexFree) && has_vortex(&seed.b) {
            fail(CheckKind::VortexFree, at("vortex found".into()), None);
        }
        if on(CheckKind::Quadratic) {
            if let Some(i) = (0..b.n()).find(|&i| first_quadratic_sign(seed.c.row(i), &q).is_none()) {
                fail(
                    CheckKind::Quadratic,
                    at(format!("c-vector {} has no realizing sign pattern", i + 1)),
                    None,
                );
            }
        }
        if on(CheckKind::Admissibility) {
            for (label, g) in [("fork ordering", &state.gim), ("rotated ordering", &rotated_gim)] {
                match admissibility_violation(g, &seed.b) {
                    Ok(None) => {}
                    Ok(Some(why)) => fail(CheckKind::Admissibility, at(format!("{label}: {why}")), None),
                    Err(e) => fail(CheckKind::Admissibility, at(format!("{label}: {e}")), None),
                }
            }
        }
        if on(CheckKind::Gram) {
            if let Some(ij) = state.gram_violation() {
                fail(CheckKind::Gram, at("Gram identity fails".into()), Some(ij));
            }
        }
        if on(CheckKind::EpsilonTau) {
            let e = match et.as_mut() {
                None => et.insert(EpsilonTau::base(b.n(), cert, k).expect("first step avoids r")),
                Some(e) => {
                    e.step(k);
                    e
                }
            };
            if let Some(ij) = l_c_mismatch(&state.l, e, &seed.c) {
                fail(CheckKind::EpsilonTau, at("L differs from ε τ C".into()), Some(ij));
            }
            match gim_sign_formula_mismatch(&state.gim.a, e, seed) {
                Ok(None) => {}
                Ok(Some(ij)) => fail(CheckKind::EpsilonTau, at("GIM sign formula fails".into()), Some(ij)),
                Err(err) => fail(CheckKind::EpsilonTau, at(err.to_string()), None),
            }
        }
        if on(CheckKind::WordRecurrence) && !state.l_matrix().equal_up_to_row_sign(&state.l_matrix_from_words()) {
            fail(
                CheckKind::WordRecurrence,
                at("word and recurrence L-matrices differ".into()),
                None,
            );
        }
    }
    if on(CheckKind::Coxeter) {
        match coxeter_product_check(b, w) {
            Ok(c) if c.equal => {}
            Ok(c) => fail(
                CheckKind::Coxeter,
                format!("{} != {}", c.lambda_product_word, c.rho_product_word),
                None,
            ),
            Err(e) => fail(CheckKind::Coxeter, e.to_string(), None),
        }
    }
    if on(CheckKind::SignInvariance) {
        match verify_sign_invariance(b, partner, w) {
            Ok(r) if r.passed() => {}
            Ok(r) => fail(
                CheckKind::SignInvariance,
                r.counterexample.map(|c| c.detail).unwrap_or_default(),
                None,
            ),
            Err(e) => fail(CheckKind::SignInvariance, e.to_string(), None),
        }
    }
    if on(CheckKind::ReflectionInvariance) {
        match (reflections_along(b, w), reflections_along(partner, w)) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(_), Ok(_)) => fail(
                CheckKind::ReflectionInvariance,
                "reflection tuples differ".into(),
                None,
            ),
            (Err(e), _) | (_, Err(e)) => fail(CheckKind::ReflectionInvariance, e.to_string(), None),
        }
    }
    failures.0
}

type Failure = (CheckKind, String, Option<(usize, usize)>);

/// First failure per check; entries are converted to 1-based.
#[derive(Default)]
struct Failures(Vec<Failure>);

impl Failures {
    fn record(&mut self, k: CheckKind, msg: String, entry: Option<(usize, usize)>) {
        if !self.0.iter().any(|(f, _, _)| *f == k) {
            self.0.push((k, msg, entry.map(|(i, j)| (i + 1, j + 1))));
        }
    }
}

/// Runs `config.trials` independent trials in parallel and aggregates pass
/// counts per check. The reported counterexample is the one with the lowest
/// trial index, so the report does not depend on scheduling.
pub fn random_walk_campaign(config: &CampaignConfig) -> Result<VerificationReport> {
    config.validate()?;
    let mut report = VerificationReport::new(json!({ "config": config }));
    if config.trials == 0 {
        return Ok(report);
    }
    let outcomes: Vec<Result<TrialOutcome>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    for kind in &config.checks {
        let failed = outcomes
            .iter()
            .filter(|o| o.failures.iter().any(|(k, _, _)| k == kind))
            .count();
        report.push(Check::new(
            kind.name(),
            failed == 0,
            format!("{}/{} trials passed", config.trials - failed, config.trials),
        ));
    }
    if let Some((trial, o)) = outcomes
        .iter()
        .enumerate()
        .find(|(_, o)| !o.failures.is_empty())
    {
        let (kind, detail, entry) = o.failures[0].clone();
        report.fail(Counterexample {
            check: kind.name().into(),
            quiver: o.quiver.clone(),
            sequence: o.sequence.clone(),
            rng_seed: Some(config.rng_seed),
            trial: Some(trial),
            entry,
            detail,
        });
    }
    Ok(report)
}
