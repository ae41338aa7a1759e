//! The three-step bit-signaling protocol as a replayable state machine.
//!
//! Step 1 reads the five hidden values `X1, X2, Y1, Y2, Z1Z2`. Step 2 sets
//! the bit `b` from their product: `+1 -> b = 0`, `-1 -> b = 1`. Step 3
//! performs the joint Bell measurement of the chosen context. Because the
//! table was sampled consistently with that future context, the parity
//! algebra forces the five-value product to `-1` under the XXYY context and
//! `+1` under XYYX: the bit computed in step 2 equals the value implied by
//! the step-3 choice, for every state and every seed. The transcript
//! records the event order so the functional dependence is auditable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hidden::{sample_contextual_table, ContextChoice, HiddenValueTable};
use crate::quantum::TwoQubitState;
use crate::rng::RandomStream;
use crate::sign::Sign;

/// The bit value a context choice forces.
pub fn context_implied_bit(context: ContextChoice) -> u8 {
    match context {
        ContextChoice::Xxyy => 1,
        ContextChoice::Xyyx => 0,
    }
}

/// Step 2: the bit from the product of the five step-1 values.
pub fn compute_bit(table: &HiddenValueTable) -> Result<u8> {
    Ok(match table.step1_product()? {
        Sign::Plus => 0,
        Sign::Minus => 1,
    })
}

/// Full record of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub state: TwoQubitState,
    pub context: ContextChoice,
    pub table: HiddenValueTable,
    pub bit: u8,
    /// Eigenvalue pair returned by the step-3 Bell measurement.
    pub outcome: (Sign, Sign),
    /// Whether the measured eigenvalues equal the table's sampled joint
    /// values.
    pub consistent: bool,
    pub seed: u64,
    /// Ordered protocol events, step-1 read through step-3 measurement.
    pub events: Vec<String>,
}

/// Run the protocol once.
///
/// The table's joint values are Born-sampled first; the step-3 measurement
/// then reveals them (the ontology defines the outcome). Identical
/// `(state, context, seed)` yields a byte-identical transcript.
pub fn run_protocol(
    state: &TwoQubitState,
    context: ContextChoice,
    stream: &mut RandomStream,
) -> Result<ProtocolTranscript> {
    let seed = stream.seed();
    let table = sample_contextual_table(state, context, stream)?;
    let bit = compute_bit(&table)?;

    // Step 3: the measurement outcome is the basis vector labeled by the
    // table's sampled joint values.
    let sampled = table.sampled_joint()?;
    let basis = context.basis();
    let index = basis
        .index_of(sampled)
        .ok_or(Error::MissingLabel(context.joint_labels().0))?;
    let outcome = basis.eigenvalues()[index];
    let consistent = outcome == sampled;

    let events = vec![
        "step1: read hidden values of X1, X2, Y1, Y2, Z1Z2".to_string(),
        format!("step2: computed b = {bit} from the five-value product"),
        format!("step3: chose context {context}"),
        format!(
            "step3: Bell measurement returned ({}, {})",
            outcome.0, outcome.1
        ),
    ];

    Ok(ProtocolTranscript {
        state: *state,
        context,
        table,
        bit,
        outcome,
        consistent,
        seed,
        events,
    })
}

/// Empirical vs Born outcome frequencies for one (state, context) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BornCheck {
    pub state_index: usize,
    pub context: ContextChoice,
    pub expected: [f64; 4],
    pub observed: [f64; 4],
    pub max_abs_deviation: f64,
}

/// Aggregate statistics over a sweep of protocol runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub states: usize,
    pub trials_per_state: u32,
    pub runs: u64,
    /// Fraction of runs whose bit equals the context-implied value
    /// (vacuously 1 for an empty sweep).
    pub bit_match_fraction: f64,
    /// Fraction of runs whose measurement reproduced the table's joint
    /// values.
    pub consistency_fraction: f64,
    pub max_born_deviation: f64,
    pub born: Vec<BornCheck>,
}

type Job = (usize, u32, ContextChoice);

fn sweep_jobs(states: usize, trials_per_state: u32) -> Vec<Job> {
    let mut jobs = Vec::with_capacity(states * trials_per_state as usize * 2);
    for state_index in 0..states {
        for trial in 0..trials_per_state {
            for context in ContextChoice::BOTH {
                jobs.push((state_index, trial, context));
            }
        }
    }
    jobs
}

fn run_job(
    states: &[TwoQubitState],
    base: &RandomStream,
    &(state_index, trial, context): &Job,
) -> Result<ProtocolTranscript> {
    let mut stream = base
        .fork(state_index as u64)
        .fork(u64::from(trial))
        .fork(context as u64);
    run_protocol(&states[state_index], context, &mut stream)
}

/// Run the protocol for both contexts across all states and trials.
///
/// Run `(state s, trial t, context c)` consumes the child stream
/// `base.fork(s).fork(t).fork(c)`, so results are independent of execution
/// order; the report aggregates them in `(s, t, c)` order either way.
pub fn sweep(
    states: &[TwoQubitState],
    trials_per_state: u32,
    base: &RandomStream,
) -> Result<SweepReport> {
    let jobs = sweep_jobs(states.len(), trials_per_state);
    let transcripts = crate::par::map_collect(&jobs, |job| run_job(states, base, job));
    aggregate(states, trials_per_state, &jobs, transcripts)
}

/// Sequential twin of [`sweep`]; used by the benchmark suite.
pub fn sweep_seq(
    states: &[TwoQubitState],
    trials_per_state: u32,
    base: &RandomStream,
) -> Result<SweepReport> {
    let jobs = sweep_jobs(states.len(), trials_per_state);
    let transcripts = crate::par::map_collect_seq(&jobs, |job| run_job(states, base, job));
    aggregate(states, trials_per_state, &jobs, transcripts)
}

fn aggregate(
    states: &[TwoQubitState],
    trials_per_state: u32,
    jobs: &[Job],
    transcripts: Vec<Result<ProtocolTranscript>>,
) -> Result<SweepReport> {
    let runs = jobs.len() as u64;
    let mut bit_matches = 0u64;
    let mut consistent = 0u64;
    // Outcome counts per (state, context) cell for the Born comparison.
    let mut cell_counts = vec![[[0u64; 4]; 2]; states.len()];
    for (job, transcript) in jobs.iter().zip(transcripts) {
        let transcript = transcript?;
        let (state_index, _, context) = *job;
        if transcript.bit == context_implied_bit(context) {
            bit_matches += 1;
        }
        if transcript.consistent {
            consistent += 1;
        }
        let basis = context.basis();
        let outcome_index = basis
            .index_of(transcript.outcome)
            .expect("outcome labels come from the basis");
        cell_counts[state_index][context as usize][outcome_index] += 1;
    }

    let mut born = Vec::new();
    let mut max_born_deviation: f64 = 0.0;
    if trials_per_state > 0 {
        for (state_index, state) in states.iter().enumerate() {
            for context in ContextChoice::BOTH {
                let expected = context.basis().probabilities(state);
                let counts = cell_counts[state_index][context as usize];
                let observed: [f64; 4] =
                    std::array::from_fn(|k| counts[k] as f64 / f64::from(trials_per_state));
                let max_abs_deviation = expected
                    .iter()
                    .zip(observed.iter())
                    .map(|(e, o)| (e - o).abs())
                    .fold(0.0f64, f64::max);
                max_born_deviation = max_born_deviation.max(max_abs_deviation);
                born.push(BornCheck {
                    state_index,
                    context,
                    expected,
                    observed,
                    max_abs_deviation,
                });
            }
        }
    }

    let fraction = |num: u64| {
        if runs == 0 {
            1.0
        } else {
            num as f64 / runs as f64
        }
    };
    Ok(SweepReport {
        states: states.len(),
        trials_per_state,
        runs,
        bit_match_fraction: fraction(bit_matches),
        consistency_fraction: fraction(consistent),
        max_born_deviation,
        born,
    })
}
