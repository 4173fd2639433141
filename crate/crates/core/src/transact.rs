//! Incipient transactions and their stochastic actualization.
//!
//! Each absorbed outcome with a nonzero offer amplitude `ψ` elicits a
//! confirmation amplitude `ψ*`; the product `ψ*ψ` is the weight of that
//! incipient transaction. The weighted set is sampled by cumulative-weight
//! inversion with exact boundaries.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::amplitude::{Amplitude, Weight, DRAW_BITS};
use crate::propagate::FinalState;
use crate::state::BasisLabel;

/// Identifies the draw generator recorded in trial reports.
pub const RNG_ALGORITHM: &str = "chacha8-wordpos-u53";

/// Trials per parallel work unit.
const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransactError {
    #[error("final state still holds unabsorbed term {0}")]
    Unabsorbed(String),
    #[error("transaction weights sum to {0}, not 1")]
    WeightSum(String),
    #[error("trial report outcomes do not match the transaction set")]
    MismatchedOutcomes,
    #[error("at least one trial is required")]
    NoTrials,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncipientTransaction<A: Amplitude> {
    pub outcome: BasisLabel,
    pub ow_amp: A,
    pub cw_amp: A,
    pub weight: A::Weight,
}

/// The weighted set of possible transactions, in outcome order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransactionSet<A: Amplitude> {
    transactions: Vec<IncipientTransaction<A>>,
    thresholds: Vec<u64>,
}

/// Confirmation amplitude returned by an absorber for offer amplitude `ow`.
pub fn cw_response<A: Amplitude>(ow: &A) -> A {
    ow.conj()
}

/// Builds one incipient transaction per nonzero outcome amplitude.
pub fn build_mixture<A: Amplitude>(f: &FinalState<A>) -> Result<TransactionSet<A>, TransactError> {
    let mut transactions = Vec::with_capacity(f.state.len());
    for (label, ow) in f.state.terms() {
        if !label.is_absorbed() {
            return Err(TransactError::Unabsorbed(label.to_string()));
        }
        let cw = cw_response(ow);
        let weight = ow.norm_sqr();
        transactions.push(IncipientTransaction { outcome: label.clone(), ow_amp: ow.clone(), cw_amp: cw, weight });
    }
    TransactionSet::new(transactions)
}

impl<A: Amplitude> TransactionSet<A> {
    /// Sorts by outcome and checks that the weights sum to one.
    pub fn new(mut transactions: Vec<IncipientTransaction<A>>) -> Result<Self, TransactError> {
        transactions.sort_by(|a, b| a.outcome.cmp(&b.outcome));
        transactions.dedup_by(|a, b| a.outcome == b.outcome);
        let mut cumulative = <A::Weight as Weight>::zero();
        let mut thresholds = Vec::with_capacity(transactions.len());
        for t in &transactions {
            cumulative = cumulative.add(&t.weight);
            thresholds.push(cumulative.draw_threshold());
        }
        if !cumulative.is_unit() {
            return Err(TransactError::WeightSum(cumulative.text()));
        }
        // Float sums can land a hair under one; the last outcome takes the rest.
        if let Some(last) = thresholds.last_mut() {
            *last = 1 << DRAW_BITS;
        }
        Ok(TransactionSet { transactions, thresholds })
    }

    pub fn transactions(&self) -> &[IncipientTransaction<A>] {
        &self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &BasisLabel> {
        self.transactions.iter().map(|t| &t.outcome)
    }

    pub fn get(&self, outcome: &BasisLabel) -> Option<&IncipientTransaction<A>> {
        self.transactions.iter().find(|t| &t.outcome == outcome)
    }

    /// Cumulative weights `w₁, w₁+w₂, …` (the last is one).
    pub fn cumulative_weights(&self) -> Vec<A::Weight> {
        let mut acc = <A::Weight as Weight>::zero();
        self.transactions
            .iter()
            .map(|t| {
                acc = acc.add(&t.weight);
                acc.clone()
            })
            .collect()
    }

    /// Selects the first outcome whose cumulative weight exceeds `draw`,
    /// comparing the float draw as an exact rational.
    pub fn actualize(&self, draw: f64) -> &BasisLabel {
        let cumulative = self.cumulative_weights();
        let last = self.transactions.len() - 1;
        let idx = cumulative.iter().take(last).position(|c| c.exceeds(draw)).unwrap_or(last);
        &self.transactions[idx].outcome
    }

    /// Index of the outcome selected by the dyadic draw `k / 2^53`.
    pub fn actualize_dyadic(&self, k: u64) -> usize {
        self.thresholds.partition_point(|&t| t <= k).min(self.transactions.len() - 1)
    }

    /// Runs `n` independent trials. Trial `t` uses draw number `t` of the
    /// ChaCha8 stream keyed by `seed`, so the counts do not depend on how
    /// the trials are split across threads.
    pub fn run_trials(&self, n: u64, seed: u64) -> Result<TrialReport, TransactError> {
        if n == 0 {
            return Err(TransactError::NoTrials);
        }
        let chunks = n.div_ceil(CHUNK);
        let per_outcome = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let start = chunk * CHUNK;
                let end = (start + CHUNK).min(n);
                let mut counts = vec![0u64; self.transactions.len()];
                let mut rng = trial_rng(seed, start);
                for _ in start..end {
                    counts[self.actualize_dyadic(next_draw(&mut rng))] += 1;
                }
                counts
            })
            .reduce(
                || vec![0u64; self.transactions.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );

        let counts: BTreeMap<BasisLabel, u64> =
            self.transactions.iter().zip(&per_outcome).map(|(t, &c)| (t.outcome.clone(), c)).collect();
        let z_scores = self
            .transactions
            .iter()
            .zip(&per_outcome)
            .map(|(t, &c)| (t.outcome.clone(), z_score(c, n, t.weight.to_f64())))
            .collect();
        Ok(TrialReport { n_trials: n, counts, seed, rng: RNG_ALGORITHM.to_string(), z_scores })
    }
}

/// Generator positioned at trial `trial` of the stream for `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Each draw consumes two 32-bit words.
    rng.set_word_pos(u128::from(trial) * 2);
    rng
}

/// Next draw as the integer `k` of `k / 2^53`.
pub fn next_draw(rng: &mut ChaCha8Rng) -> u64 {
    rng.next_u64() >> (64 - DRAW_BITS)
}

/// The draw used by trial `trial`, as a float in `[0, 1)`.
pub fn trial_draw(seed: u64, trial: u64) -> f64 {
    next_draw(&mut trial_rng(seed, trial)) as f64 / (1u64 << DRAW_BITS) as f64
}

/// `(freq − p) / √(p(1−p)/n)`, or 0 when `p(1−p)` vanishes.
pub fn z_score(count: u64, n: u64, p: f64) -> f64 {
    let var = p * (1.0 - p);
    if var <= 0.0 {
        return 0.0;
    }
    let freq = count as f64 / n as f64;
    (freq - p) / (var / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub n_trials: u64,
    pub counts: BTreeMap<BasisLabel, u64>,
    pub seed: u64,
    pub rng: String,
    pub z_scores: BTreeMap<BasisLabel, f64>,
}

/// One line of a frequency report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub weight_exact: String,
    pub weight: f64,
    pub count: u64,
    pub freq: f64,
    pub z: f64,
}

/// Per-outcome comparison of observed frequencies with exact weights.
pub fn frequency_report<A: Amplitude>(
    tr: &TrialReport,
    ts: &TransactionSet<A>,
) -> Result<Vec<ReportRow>, TransactError> {
    if tr.counts.len() != ts.len() || ts.outcomes().any(|o| !tr.counts.contains_key(o)) {
        return Err(TransactError::MismatchedOutcomes);
    }
    Ok(ts
        .transactions()
        .iter()
        .map(|t| {
            let count = tr.counts[&t.outcome];
            let weight = t.weight.to_f64();
            ReportRow {
                label: t.outcome.to_string(),
                weight_exact: t.weight.text(),
                weight,
                count,
                freq: count as f64 / tr.n_trials as f64,
                z: z_score(count, tr.n_trials, weight),
            }
        })
        .collect())
}
