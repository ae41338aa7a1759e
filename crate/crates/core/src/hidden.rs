//! Hidden-value ontologies.
//!
//! The contextual model treats hidden values as an oracle whose outputs
//! are, by construction, exactly what the later joint measurement will
//! reveal: the two joint values of the chosen context are Born-sampled from
//! the corresponding Bell basis, the `Z1Z2` value is derived from the
//! parity of the line containing the context pair, and the four single-spin
//! values are drawn uniformly among the completions compatible with
//! factorization (a product observable's value equals the product of the
//! factor values). The joint observables of the *other* context are left
//! unassigned: that absence is contextuality at the table level.
//!
//! The non-contextual constructor cannot succeed; it reports the parity
//! obstruction and the best achievable score instead.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::peres_mermin::{self, Assignment, NoGoReport, PmLabel};
use crate::quantum::{
    bell_basis_xxyy, bell_basis_xyyx, measure_in_basis, OrthonormalBasis4, TwoQubitState,
};
use crate::rng::RandomStream;
use crate::sign::Sign;

/// The two incompatible joint-measurement choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextChoice {
    /// Joint measurement of `s1x*s2x` and `s1y*s2y`.
    #[serde(rename = "XXYY")]
    Xxyy,
    /// Joint measurement of `s1x*s2y` and `s1y*s2x`.
    #[serde(rename = "XYYX")]
    Xyyx,
}

impl ContextChoice {
    pub const BOTH: [ContextChoice; 2] = [ContextChoice::Xxyy, ContextChoice::Xyyx];

    /// Labels of the context's two joint observables, in measurement order.
    pub fn joint_labels(self) -> (PmLabel, PmLabel) {
        match self {
            ContextChoice::Xxyy => (PmLabel::X1X2, PmLabel::Y1Y2),
            ContextChoice::Xyyx => (PmLabel::X1Y2, PmLabel::Y1X2),
        }
    }

    /// The square line containing both joint observables and `Z1Z2`
    /// (column 3 or row 3), identified by its target parity.
    pub fn containing_line_target(self) -> Sign {
        match self {
            ContextChoice::Xxyy => Sign::Minus,
            ContextChoice::Xyyx => Sign::Plus,
        }
    }

    /// The eigenbasis realizing the joint measurement.
    pub fn basis(self) -> OrthonormalBasis4 {
        match self {
            ContextChoice::Xxyy => bell_basis_xxyy(),
            ContextChoice::Xyyx => bell_basis_xyyx(),
        }
    }

    /// Factorization constraints `(product label, first factor, second
    /// factor)` the single-spin values must satisfy under this context.
    pub fn factorizations(self) -> [(PmLabel, PmLabel, PmLabel); 2] {
        match self {
            ContextChoice::Xxyy => [
                (PmLabel::X1X2, PmLabel::X1, PmLabel::X2),
                (PmLabel::Y1Y2, PmLabel::Y1, PmLabel::Y2),
            ],
            ContextChoice::Xyyx => [
                (PmLabel::X1Y2, PmLabel::X1, PmLabel::Y2),
                (PmLabel::Y1X2, PmLabel::Y1, PmLabel::X2),
            ],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ContextChoice::Xxyy => "XXYY",
            ContextChoice::Xyyx => "XYYX",
        }
    }
}

impl std::fmt::Display for ContextChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How a hidden value entered the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Born-sampled joint value of the chosen context.
    #[serde(rename = "sampled")]
    Sampled,
    /// Forced by the parity of the containing line.
    #[serde(rename = "derived")]
    Derived,
    /// One of the uniformly chosen single-spin completions.
    #[serde(rename = "free-bit")]
    FreeBit,
}

/// A single tagged hidden value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiddenValue {
    pub value: Sign,
    pub provenance: Provenance,
}

/// The five labels read in step 1 of the protocol.
pub const STEP1_LABELS: [PmLabel; 5] = [
    PmLabel::X1,
    PmLabel::X2,
    PmLabel::Y1,
    PmLabel::Y2,
    PmLabel::Z1Z2,
];

/// Partial assignment of hidden values, tied to the context that will be
/// measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenValueTable {
    pub context: ContextChoice,
    pub seed: u64,
    pub values: BTreeMap<PmLabel, HiddenValue>,
}

impl HiddenValueTable {
    pub fn value(&self, label: PmLabel) -> Result<Sign> {
        self.values
            .get(&label)
            .map(|hv| hv.value)
            .ok_or(Error::MissingLabel(label))
    }

    /// The context's two joint values in measurement order.
    pub fn sampled_joint(&self) -> Result<(Sign, Sign)> {
        let (first, second) = self.context.joint_labels();
        Ok((self.value(first)?, self.value(second)?))
    }

    /// Product of the five step-1 values.
    pub fn step1_product(&self) -> Result<Sign> {
        let mut product = Sign::Plus;
        for label in STEP1_LABELS {
            product = product * self.value(label)?;
        }
        Ok(product)
    }

    /// True iff the table assigns values to the joint observables of both
    /// contexts at once (it never should).
    pub fn straddles_contexts(&self) -> bool {
        let xxyy = [PmLabel::X1X2, PmLabel::Y1Y2];
        let xyyx = [PmLabel::X1Y2, PmLabel::Y1X2];
        let has = |labels: [PmLabel; 2]| labels.iter().any(|l| self.values.contains_key(l));
        has(xxyy) && has(xyyx)
    }

    /// Achieved parity of the line containing the context pair and `Z1Z2`.
    pub fn containing_line_parity(&self) -> Result<Sign> {
        let (first, second) = self.context.joint_labels();
        Ok(self.value(first)? * self.value(second)? * self.value(PmLabel::Z1Z2)?)
    }
}

/// Sample a contextual table consistent with measuring `context` on `state`
/// in the future.
///
/// The two joint values follow the Born distribution of the context's Bell
/// basis; `Z1Z2` is derived from the containing-line parity; the four
/// single-spin values use two fair free bits, uniform over the four
/// factorization-consistent completions.
pub fn sample_contextual_table(
    state: &TwoQubitState,
    context: ContextChoice,
    stream: &mut RandomStream,
) -> Result<HiddenValueTable> {
    let basis = context.basis();
    let measurement = measure_in_basis(state, &basis, stream)?;
    let (m1, m2) = measurement.eigenvalues;

    let z_value = context.containing_line_target() * m1 * m2;

    // Two free bits pick among the four completions; the factorization
    // equations then fix the partner of each sampled bit.
    let x1 = stream.sign();
    let y1 = stream.sign();
    let (x2, y2) = match context {
        ContextChoice::Xxyy => (m1 * x1, m2 * y1),
        ContextChoice::Xyyx => (m2 * y1, m1 * x1),
    };

    let mut values = BTreeMap::new();
    let mut put = |label, value, provenance| {
        values.insert(label, HiddenValue { value, provenance });
    };
    let (first, second) = context.joint_labels();
    put(first, m1, Provenance::Sampled);
    put(second, m2, Provenance::Sampled);
    put(PmLabel::Z1Z2, z_value, Provenance::Derived);
    put(PmLabel::X1, x1, Provenance::FreeBit);
    put(PmLabel::X2, x2, Provenance::FreeBit);
    put(PmLabel::Y1, y1, Provenance::FreeBit);
    put(PmLabel::Y2, y2, Provenance::FreeBit);

    Ok(HiddenValueTable {
        context,
        seed: stream.seed(),
        values,
    })
}

/// True iff both factorization equations of the table's context hold.
pub fn check_factorization(table: &HiddenValueTable) -> Result<bool> {
    for (product, left, right) in table.context.factorizations() {
        if table.value(product)? != table.value(left)? * table.value(right)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Structured failure of the (impossible) non-contextual construction.
#[derive(Debug, Clone, Serialize)]
pub struct NonContextualFailure {
    /// The random total assignment that was attempted.
    pub attempted: Assignment,
    /// Lines the attempt satisfied (never 6).
    pub attempted_score: u32,
    pub satisfiable: bool,
    /// Exhaustive-search evidence for why no attempt can succeed.
    pub no_go: NoGoReport,
    pub obstruction: &'static str,
}

/// Try to build a total assignment satisfying all six line parities. The
/// attempt always fails; the report carries the exhaustive evidence.
pub fn attempt_noncontextual_table(stream: &mut RandomStream) -> NonContextualFailure {
    let index = (stream.uniform() * 512.0) as u16 % 512;
    let attempted = Assignment::from_index(index);
    let square = peres_mermin::build_square();
    let no_go = peres_mermin::exhaustive_assignment_search(&square);
    NonContextualFailure {
        attempted,
        attempted_score: attempted.satisfied_lines(),
        satisfiable: no_go.all_six_satisfiable > 0,
        no_go,
        obstruction: "every label lies on two lines, so achieved parities multiply to +1 \
                      over the six lines while the targets multiply to -1",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_for(state: &TwoQubitState, context: ContextChoice, seed: u64) -> HiddenValueTable {
        let mut stream = RandomStream::from_seed(seed);
        sample_contextual_table(state, context, &mut stream).unwrap()
    }

    #[test]
    fn singlet_under_xxyy_is_deterministic() {
        for seed in 0..32 {
            let table = table_for(&TwoQubitState::singlet(), ContextChoice::Xxyy, seed);
            assert_eq!(table.value(PmLabel::X1X2).unwrap(), Sign::Minus);
            assert_eq!(table.value(PmLabel::Y1Y2).unwrap(), Sign::Minus);
            // Column-3 parity: z = -(-1)(-1) = -1.
            assert_eq!(table.value(PmLabel::Z1Z2).unwrap(), Sign::Minus);
        }
    }

    #[test]
    fn xyyx_with_plus_plus_joint_values_derives_z_plus() {
        // The first basis vector of the xyyx measurement carries labels
        // (+1, +1) deterministically; row-3 target parity is +1.
        let vec0 = bell_basis_xyyx().vectors()[0];
        for seed in 0..16 {
            let table = table_for(&vec0, ContextChoice::Xyyx, seed);
            assert_eq!(table.value(PmLabel::X1Y2).unwrap(), Sign::Plus);
            assert_eq!(table.value(PmLabel::Y1X2).unwrap(), Sign::Plus);
            assert_eq!(table.value(PmLabel::Z1Z2).unwrap(), Sign::Plus);
        }
    }

    #[test]
    fn xxyy_completions_respect_factorization() {
        // With m1 = +1 the only (X1, X2) completions are (+,+) and (-,-).
        let state = TwoQubitState::aa(); // always yields m1 = +1 under xxyy
        let mut seen = std::collections::HashSet::new();
        for seed in 0..256 {
            let table = table_for(&state, ContextChoice::Xxyy, seed);
            let x1 = table.value(PmLabel::X1).unwrap();
            let x2 = table.value(PmLabel::X2).unwrap();
            assert_eq!(x1 * x2, table.value(PmLabel::X1X2).unwrap());
            seen.insert((x1, x2));
        }
        assert_eq!(
            seen,
            [(Sign::Plus, Sign::Plus), (Sign::Minus, Sign::Minus)]
                .into_iter()
                .collect()
        );
    }

    #[test]
    fn provenance_tags_are_as_specified() {
        let table = table_for(&TwoQubitState::singlet(), ContextChoice::Xxyy, 3);
        assert_eq!(
            table.values[&PmLabel::X1X2].provenance,
            Provenance::Sampled
        );
        assert_eq!(
            table.values[&PmLabel::Z1Z2].provenance,
            Provenance::Derived
        );
        for label in [PmLabel::X1, PmLabel::X2, PmLabel::Y1, PmLabel::Y2] {
            assert_eq!(table.values[&label].provenance, Provenance::FreeBit);
        }
        assert_eq!(table.values.len(), 7);
    }

    #[test]
    fn step1_labels_always_present_and_other_context_absent() {
        for context in ContextChoice::BOTH {
            let table = table_for(&TwoQubitState::plus_plus(), context, 17);
            for label in STEP1_LABELS {
                assert!(table.values.contains_key(&label), "{label:?}");
            }
            assert!(!table.straddles_contexts());
        }
    }

    #[test]
    fn factorization_detects_a_violation() {
        let mut table = table_for(&TwoQubitState::singlet(), ContextChoice::Xxyy, 5);
        assert!(check_factorization(&table).unwrap());
        let broken = HiddenValue {
            value: -table.value(PmLabel::X1X2).unwrap(),
            provenance: Provenance::Sampled,
        };
        table.values.insert(PmLabel::X1X2, broken);
        assert!(!check_factorization(&table).unwrap());
    }

    #[test]
    fn hand_built_xyyx_table_passes_factorization() {
        let mut values = BTreeMap::new();
        let mut put = |label, value| {
            values.insert(
                label,
                HiddenValue {
                    value,
                    provenance: Provenance::FreeBit,
                },
            );
        };
        put(PmLabel::X1, Sign::Plus);
        put(PmLabel::Y2, Sign::Minus);
        put(PmLabel::X1Y2, Sign::Minus);
        put(PmLabel::Y1, Sign::Plus);
        put(PmLabel::X2, Sign::Plus);
        put(PmLabel::Y1X2, Sign::Plus);
        let table = HiddenValueTable {
            context: ContextChoice::Xyyx,
            seed: 0,
            values,
        };
        assert!(check_factorization(&table).unwrap());
    }

    #[test]
    fn missing_label_is_an_error() {
        let mut table = table_for(&TwoQubitState::singlet(), ContextChoice::Xyyx, 2);
        table.values.remove(&PmLabel::Y1);
        assert_eq!(
            check_factorization(&table),
            Err(Error::MissingLabel(PmLabel::Y1))
        );
        assert_eq!(
            table.step1_product(),
            Err(Error::MissingLabel(PmLabel::Y1))
        );
    }

    #[test]
    fn noncontextual_attempt_always_fails_with_the_obstruction() {
        for seed in [0, 1, 99, 4096] {
            let mut stream = RandomStream::from_seed(seed);
            let failure = attempt_noncontextual_table(&mut stream);
            assert!(!failure.satisfiable);
            assert_eq!(failure.no_go.all_six_satisfiable, 0);
            assert_eq!(failure.no_go.max_satisfied, 5);
            assert_eq!(failure.no_go.witness.satisfied_lines(), 5);
            assert!(failure.attempted_score <= 5);
        }
    }

    #[test]
    fn marginal_statistics_match_born_probabilities() {
        // Joint-value frequencies over many seeds track the Born weights of
        // the context basis within 5-sigma binomial bounds.
        let state = TwoQubitState::plus_plus();
        let context = ContextChoice::Xyyx;
        let probs = context.basis().probabilities(&state);
        let trials = 100_000u64;
        let base = RandomStream::from_seed(23);
        let mut counts = [0u64; 4];
        for i in 0..trials {
            let mut stream = base.fork(i);
            let table = sample_contextual_table(&state, context, &mut stream).unwrap();
            let (m1, m2) = table.sampled_joint().unwrap();
            let index = context.basis().index_of((m1, m2)).unwrap();
            counts[index] += 1;
        }
        for k in 0..4 {
            let freq = counts[k] as f64 / trials as f64;
            let bound = 5.0 * (probs[k] * (1.0 - probs[k]) / trials as f64).sqrt();
            assert!(
                (freq - probs[k]).abs() <= bound.max(1e-12),
                "outcome {k}: {freq} vs {}",
                probs[k]
            );
        }
    }

    #[test]
    fn free_bits_are_uniform_over_the_four_completions() {
        // Fixed (state, context, m1, m2): the singlet pins the joint values,
        // so the completion statistics isolate the free bits.
        let state = TwoQubitState::singlet();
        let trials = 100_000u64;
        let base = RandomStream::from_seed(37);
        let mut counts = std::collections::HashMap::new();
        for i in 0..trials {
            let mut stream = base.fork(i);
            let table = sample_contextual_table(&state, ContextChoice::Xxyy, &mut stream).unwrap();
            let key = (
                table.value(PmLabel::X1).unwrap(),
                table.value(PmLabel::X2).unwrap(),
                table.value(PmLabel::Y1).unwrap(),
                table.value(PmLabel::Y2).unwrap(),
            );
            *counts.entry(key).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 4, "exactly four completions must occur");
        let bound = 5.0 * (0.25 * 0.75 / trials as f64).sqrt();
        for (&key, &count) in &counts {
            let freq = count as f64 / trials as f64;
            assert!((freq - 0.25).abs() <= bound, "{key:?}: {freq}");
        }
    }

    #[test]
    fn table_json_preserves_provenance() {
        let table = table_for(&TwoQubitState::singlet(), ContextChoice::Xxyy, 7);
        let json = serde_json::to_value(&table).unwrap();
        assert_eq!(json["context"], serde_json::json!("XXYY"));
        assert_eq!(json["values"]["Z1Z2"]["provenance"], serde_json::json!("derived"));
        assert_eq!(json["values"]["X1X2"]["value"], serde_json::json!(-1));
        let back: HiddenValueTable = serde_json::from_value(json).unwrap();
        assert_eq!(back, table);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // Invariant: every sampled table factorizes and satisfies the parity
        // of its containing line, for any state, context, and seed.
        #[test]
        fn sampled_tables_always_satisfy_their_constraints(
            state_seed in 0u64..1024,
            table_seed in 0u64..1024,
            use_xyyx in proptest::bool::ANY,
        ) {
            let state = TwoQubitState::random(&mut RandomStream::from_seed(state_seed));
            let context = if use_xyyx { ContextChoice::Xyyx } else { ContextChoice::Xxyy };
            let table = table_for(&state, context, table_seed);
            prop_assert!(check_factorization(&table).unwrap());
            prop_assert_eq!(
                table.containing_line_parity().unwrap(),
                context.containing_line_target()
            );
            prop_assert!(!table.straddles_contexts());
        }
    }
}
