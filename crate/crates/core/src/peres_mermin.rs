//! The 3x3 square of two-qubit observables, its exact operator-algebra
//! structure, and the exhaustive no-go search over classical value
//! assignments.
//!
//! The square (rows top to bottom, columns left to right):
//!
//! ```text
//! s1x        s2x        s1x*s2x
//! s2y        s1y        s1y*s2y
//! s1x*s2y    s1y*s2x    s1z*s2z
//! ```
//!
//! Within every row and column the three operators commute; the ordered
//! product of each line is +identity except the third column, whose product
//! is -identity. No total assignment of +-1 values to the nine entries can
//! reproduce all six line parities, and the search below proves it by
//! checking all 2^9 = 512 candidates.

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::quantum::{pauli, Axis, Operator4, Particle};
use crate::sign::Sign;

/// Label of one square entry, carrying its (row, column) grid position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
pub enum PmLabel {
    X1,
    X2,
    X1X2,
    Y2,
    Y1,
    Y1Y2,
    X1Y2,
    Y1X2,
    Z1Z2,
}

impl PmLabel {
    /// All nine labels in grid (row-major) order.
    pub const ALL: [PmLabel; 9] = [
        PmLabel::X1,
        PmLabel::X2,
        PmLabel::X1X2,
        PmLabel::Y2,
        PmLabel::Y1,
        PmLabel::Y1Y2,
        PmLabel::X1Y2,
        PmLabel::Y1X2,
        PmLabel::Z1Z2,
    ];

    /// 1-based (row, column) coordinates in the square.
    pub fn coordinates(self) -> (u8, u8) {
        let k = self as u8;
        (k / 3 + 1, k % 3 + 1)
    }
}

/// One row or column: three labels and the parity their values must
/// multiply to.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Line {
    pub name: &'static str,
    pub labels: [PmLabel; 3],
    pub target: Sign,
}

/// The six lines in a fixed order: rows 1-3, then columns 1-3.
pub const LINES: [Line; 6] = [
    Line {
        name: "row1",
        labels: [PmLabel::X1, PmLabel::X2, PmLabel::X1X2],
        target: Sign::Plus,
    },
    Line {
        name: "row2",
        labels: [PmLabel::Y2, PmLabel::Y1, PmLabel::Y1Y2],
        target: Sign::Plus,
    },
    Line {
        name: "row3",
        labels: [PmLabel::X1Y2, PmLabel::Y1X2, PmLabel::Z1Z2],
        target: Sign::Plus,
    },
    Line {
        name: "col1",
        labels: [PmLabel::X1, PmLabel::Y2, PmLabel::X1Y2],
        target: Sign::Plus,
    },
    Line {
        name: "col2",
        labels: [PmLabel::X2, PmLabel::Y1, PmLabel::Y1X2],
        target: Sign::Plus,
    },
    Line {
        name: "col3",
        labels: [PmLabel::X1X2, PmLabel::Y1Y2, PmLabel::Z1Z2],
        target: Sign::Minus,
    },
];

/// The nine observables keyed by label.
#[derive(Debug, Clone)]
pub struct PmSquare {
    entries: [Operator4; 9],
}

impl PmSquare {
    pub fn operator(&self, label: PmLabel) -> &Operator4 {
        &self.entries[label as usize]
    }

    /// The incidence structure: six lines with their target parities.
    pub fn lines(&self) -> &'static [Line; 6] {
        &LINES
    }

    /// Negate one entry. Negative-control hook: the resulting square must
    /// fail [`verify_structure`].
    pub fn flip_entry_sign(&mut self, label: PmLabel) {
        self.entries[label as usize] = self.entries[label as usize].negated();
    }
}

/// Construct the square from Pauli tensor products.
pub fn build_square() -> PmSquare {
    let p = pauli;
    let s1x = p(Particle::First, Axis::X);
    let s2x = p(Particle::Second, Axis::X);
    let s1y = p(Particle::First, Axis::Y);
    let s2y = p(Particle::Second, Axis::Y);
    let s1z = p(Particle::First, Axis::Z);
    let s2z = p(Particle::Second, Axis::Z);
    PmSquare {
        entries: [
            s1x,
            s2x,
            s1x.product(&s2x),
            s2y,
            s1y,
            s1y.product(&s2y),
            s1x.product(&s2y),
            s1y.product(&s2x),
            s1z.product(&s2z),
        ],
    }
}

/// Structural verdict for one line.
#[derive(Debug, Clone, Serialize)]
pub struct LineCheck {
    pub name: &'static str,
    pub labels: [PmLabel; 3],
    /// Pairwise commutation of (0,1), (0,2), (1,2), checked exactly.
    pub pairs_commute: [bool; 3],
    /// `1` / `-1` when the ordered product is exactly +-identity, absent
    /// otherwise.
    pub product_sign: Option<Sign>,
    pub target: Sign,
    pub ok: bool,
}

/// Exact structural report over all six lines.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub lines: Vec<LineCheck>,
    pub all_entries_hermitian: bool,
    pub all_entries_square_to_identity: bool,
    pub passed: bool,
}

/// Check, with exact arithmetic, that every line commutes internally and
/// multiplies to its target sign times the identity.
pub fn verify_structure(square: &PmSquare) -> StructureReport {
    let identity = Operator4::identity();
    let minus_identity = identity.negated();
    let lines = LINES
        .iter()
        .map(|line| {
            let ops: Vec<&Operator4> = line.labels.iter().map(|&l| square.operator(l)).collect();
            let pairs_commute = [
                ops[0].commutes_exactly(ops[1]),
                ops[0].commutes_exactly(ops[2]),
                ops[1].commutes_exactly(ops[2]),
            ];
            let product = ops[0].product(ops[1]).product(ops[2]);
            let product_sign = if product == identity {
                Some(Sign::Plus)
            } else if product == minus_identity {
                Some(Sign::Minus)
            } else {
                None
            };
            let ok = pairs_commute.iter().all(|&c| c) && product_sign == Some(line.target);
            LineCheck {
                name: line.name,
                labels: line.labels,
                pairs_commute,
                product_sign,
                target: line.target,
                ok,
            }
        })
        .collect::<Vec<_>>();
    let all_entries_hermitian = PmLabel::ALL
        .iter()
        .all(|&l| square.operator(l).is_hermitian_exact());
    let all_entries_square_to_identity = PmLabel::ALL
        .iter()
        .all(|&l| square.operator(l).squares_to_identity());
    let passed =
        lines.iter().all(|l| l.ok) && all_entries_hermitian && all_entries_square_to_identity;
    StructureReport {
        lines,
        all_entries_hermitian,
        all_entries_square_to_identity,
        passed,
    }
}

/// A total +-1 assignment to the nine labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignment {
    values: [Sign; 9],
}

impl Assignment {
    /// Decode assignment `index` in `0..512`: bit `k` set means label `k`
    /// (in [`PmLabel::ALL`] order) takes the value -1.
    pub fn from_index(index: u16) -> Assignment {
        debug_assert!(index < 512);
        Assignment {
            values: std::array::from_fn(|k| {
                if index >> k & 1 == 1 {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            }),
        }
    }

    pub fn all_plus() -> Assignment {
        Assignment {
            values: [Sign::Plus; 9],
        }
    }

    pub fn value(&self, label: PmLabel) -> Sign {
        self.values[label as usize]
    }

    /// Achieved parity of one line: the product of its three values.
    pub fn line_parity(&self, line: &Line) -> Sign {
        Sign::product(line.labels.iter().map(|&l| self.value(l)))
    }

    /// How many of the six lines this assignment satisfies.
    pub fn satisfied_lines(&self) -> u32 {
        LINES
            .iter()
            .filter(|line| self.line_parity(line) == line.target)
            .count() as u32
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(9))?;
        for label in PmLabel::ALL {
            map.serialize_entry(&label, &self.value(label))?;
        }
        map.end()
    }
}

impl<'de> serde::Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<PmLabel, Sign>::deserialize(deserializer)?;
        let mut values = [Sign::Plus; 9];
        for label in PmLabel::ALL {
            values[label as usize] = *map
                .get(&label)
                .ok_or_else(|| serde::de::Error::custom(format!("missing label {label:?}")))?;
        }
        Ok(Assignment { values })
    }
}

/// Outcome of the exhaustive search over all 512 assignments.
#[derive(Debug, Clone, Serialize)]
pub struct NoGoReport {
    pub total_assignments: u32,
    /// Number of assignments satisfying all six line parities. Always 0.
    pub all_six_satisfiable: u32,
    /// Largest number of lines any assignment satisfies. Always 5.
    pub max_satisfied: u32,
    /// One assignment achieving `max_satisfied`.
    pub witness: Assignment,
    pub witness_score: u32,
}

/// Plain exhaustive loop over the 512 total assignments. Deliberately not a
/// solver: every case is scored directly against the six line parities.
pub fn exhaustive_assignment_search(square: &PmSquare) -> NoGoReport {
    let lines = square.lines();
    let mut all_six = 0u32;
    let mut max_satisfied = 0u32;
    let mut witness = Assignment::all_plus();
    for index in 0..512u16 {
        let assignment = Assignment::from_index(index);
        let score = lines
            .iter()
            .filter(|line| assignment.line_parity(line) == line.target)
            .count() as u32;
        if score == 6 {
            all_six += 1;
        }
        if score > max_satisfied {
            max_satisfied = score;
            witness = assignment;
        }
    }
    NoGoReport {
        total_assignments: 512,
        all_six_satisfiable: all_six,
        max_satisfied,
        witness,
        witness_score: witness.satisfied_lines(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli, Axis, Particle};

    #[test]
    fn grid_coordinates_cover_the_square() {
        assert_eq!(PmLabel::X1.coordinates(), (1, 1));
        assert_eq!(PmLabel::Y1.coordinates(), (2, 2));
        assert_eq!(PmLabel::Z1Z2.coordinates(), (3, 3));
        let mut seen = std::collections::HashSet::new();
        for label in PmLabel::ALL {
            assert!(seen.insert(label.coordinates()));
        }
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn square_entries_match_their_labels() {
        let square = build_square();
        assert_eq!(
            square.operator(PmLabel::X1),
            &pauli(Particle::First, Axis::X)
        );
        let z1z2 = pauli(Particle::First, Axis::Z).product(&pauli(Particle::Second, Axis::Z));
        assert_eq!(square.operator(PmLabel::Z1Z2), &z1z2);
        for label in PmLabel::ALL {
            assert!(square.operator(label).is_hermitian_exact(), "{label:?}");
            assert!(square.operator(label).squares_to_identity(), "{label:?}");
            assert!(square.operator(label).entries_in_gaussian_units(), "{label:?}");
        }
    }

    #[test]
    fn structure_verifies_exactly() {
        let report = verify_structure(&build_square());
        assert!(report.passed);
        for line in &report.lines {
            assert_eq!(line.pairs_commute, [true; 3], "{}", line.name);
            assert_eq!(line.product_sign, Some(line.target), "{}", line.name);
        }
        assert_eq!(report.lines[5].name, "col3");
        assert_eq!(report.lines[5].product_sign, Some(Sign::Minus));
    }

    #[test]
    fn row1_product_is_plus_identity() {
        let square = build_square();
        let product = square
            .operator(PmLabel::X1)
            .product(square.operator(PmLabel::X2))
            .product(square.operator(PmLabel::X1X2));
        assert_eq!(product, Operator4::identity());
    }

    #[test]
    fn tampered_square_fails_verification() {
        let mut square = build_square();
        square.flip_entry_sign(PmLabel::X1);
        let report = verify_structure(&square);
        assert!(!report.passed);
        let bad: Vec<&str> = report
            .lines
            .iter()
            .filter(|l| !l.ok)
            .map(|l| l.name)
            .collect();
        assert_eq!(bad, ["row1", "col1"]);
    }

    // Independent scorer for the search results, kept deliberately separate
    // from Assignment::satisfied_lines.
    fn rescore(assignment: &Assignment) -> u32 {
        let mut satisfied = 0;
        for line in &LINES {
            let product: i8 = line
                .labels
                .iter()
                .map(|&l| assignment.value(l).to_i8())
                .product();
            if product == line.target.to_i8() {
                satisfied += 1;
            }
        }
        satisfied
    }

    #[test]
    fn no_assignment_satisfies_all_six_and_five_is_reachable() {
        let report = exhaustive_assignment_search(&build_square());
        assert_eq!(report.total_assignments, 512);
        assert_eq!(report.all_six_satisfiable, 0);
        assert_eq!(report.max_satisfied, 5);
        assert_eq!(rescore(&report.witness), 5);

        // Independent enumeration of the same space.
        let mut best = 0;
        let mut perfect = 0;
        for index in 0..512 {
            let score = rescore(&Assignment::from_index(index));
            best = best.max(score);
            if score == 6 {
                perfect += 1;
            }
        }
        assert_eq!(perfect, 0);
        assert_eq!(best, 5);
    }

    #[test]
    fn all_plus_satisfies_exactly_five_lines() {
        let assignment = Assignment::all_plus();
        assert_eq!(assignment.satisfied_lines(), 5);
        let col3 = &LINES[5];
        assert_eq!(assignment.line_parity(col3), Sign::Plus);
        assert_eq!(col3.target, Sign::Minus);
    }

    #[test]
    fn parity_obstruction_holds_for_every_assignment() {
        // Each label sits on exactly two lines, so the product of achieved
        // parities over all six lines is +1 for any assignment, while the
        // product of targets is -1: at least one line must fail.
        for index in 0..512 {
            let assignment = Assignment::from_index(index);
            let achieved = Sign::product(LINES.iter().map(|l| assignment.line_parity(l)));
            let target = Sign::product(LINES.iter().map(|l| l.target));
            assert_eq!(achieved, Sign::Plus);
            assert_eq!(target, Sign::Minus);
            assert_eq!(achieved * target, Sign::Minus);
        }
    }

    #[test]
    fn reports_serialize_to_json() {
        let square = build_square();
        let structure = serde_json::to_value(verify_structure(&square)).unwrap();
        assert_eq!(structure["passed"], serde_json::json!(true));
        assert_eq!(structure["lines"][5]["product_sign"], serde_json::json!(-1));

        let no_go = serde_json::to_value(exhaustive_assignment_search(&square)).unwrap();
        assert_eq!(no_go["all_six_satisfiable"], serde_json::json!(0));
        assert_eq!(no_go["max_satisfied"], serde_json::json!(5));
        assert_eq!(no_go["witness"]["X1"], serde_json::json!(1));
    }

    #[test]
    fn assignment_serde_roundtrip() {
        let assignment = Assignment::from_index(0b101_010_110);
        let json = serde_json::to_string(&assignment).unwrap();
        let back: Assignment = serde_json::from_str(&json).unwrap();
        assert_eq!(assignment, back);
    }
}
