//! Exact complex linear algebra for the two-qubit Hilbert space.
//!
//! Convention: the computational basis is the product basis of sigma_x
//! eigenstates `|a>` (+1) and `|b>` (-1), ordered `|aa>, |ab>, |ba>, |bb>`,
//! so sigma_x is diagonal and sigma_y, sigma_z follow from the right-handed
//! algebra `sx * sy * sz = i * I`. In this basis every observable built here
//! has entries in `{0, +-1, +-i}`, which makes operator identities checkable
//! with exact floating-point equality: the entries stay small Gaussian
//! integers under products and sums, and those are exact in f64.
//! Floating tolerances appear only at the state level.

pub use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::sign::Sign;

/// State-level tolerance for normalization and orthogonality checks.
pub const STATE_TOL: f64 = 1e-12;
/// Norm drift a measurement still accepts.
pub const MEASURE_NORM_TOL: f64 = 1e-9;
/// Smallest raw-component norm that ingest will normalize.
pub const INGEST_NORM_MIN: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Spin axis of a single particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Which of the two spin-1/2 particles an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Particle {
    First,
    Second,
}

/// 2x2 single-particle spin matrix in the (|a>, |b>) basis.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Single-particle Pauli matrix for `axis`, in the sigma_x eigenbasis.
pub fn pauli_matrix2(axis: Axis) -> Matrix2 {
    match axis {
        Axis::X => [[ONE, ZERO], [ZERO, -ONE]],
        Axis::Y => [[ZERO, ONE], [ONE, ZERO]],
        Axis::Z => [[ZERO, -I], [I, ZERO]],
    }
}

/// A normalized state of the two-particle system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

impl TwoQubitState {
    /// Wrap amplitudes that are already normalized (within [`STATE_TOL`]).
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        let norm = norm4(&amps);
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(TwoQubitState { amps })
    }

    /// Normalize raw components on ingest; rejects near-zero vectors.
    pub fn from_components(amps: [Complex64; 4]) -> Result<Self> {
        let norm = norm4(&amps);
        if norm < INGEST_NORM_MIN {
            return Err(Error::NormTooSmall { norm });
        }
        let mut out = amps;
        for a in &mut out {
            *a /= norm;
        }
        Ok(TwoQubitState { amps: out })
    }

    /// `(|ab> - |ba>)/sqrt(2)`.
    pub fn singlet() -> Self {
        let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        TwoQubitState {
            amps: [ZERO, c, -c, ZERO],
        }
    }

    /// The product basis state `|aa>`.
    pub fn aa() -> Self {
        TwoQubitState {
            amps: [ONE, ZERO, ZERO, ZERO],
        }
    }

    /// `|++>`: both particles in the +1 eigenstate of sigma_y.
    pub fn plus_plus() -> Self {
        let h = Complex64::new(0.5, 0.0);
        TwoQubitState {
            amps: [h, h, h, h],
        }
    }

    /// A random state: components uniform in the unit square, normalized.
    /// Meant for sweeps and property tests, not for Haar-uniform sampling.
    pub fn random(stream: &mut RandomStream) -> Self {
        loop {
            let mut amps = [ZERO; 4];
            for a in &mut amps {
                *a = Complex64::new(stream.uniform() * 2.0 - 1.0, stream.uniform() * 2.0 - 1.0);
            }
            if let Ok(state) = TwoQubitState::from_components(amps) {
                return state;
            }
        }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm4(&self.amps)
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &TwoQubitState) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl Serialize for TwoQubitState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: [[f64; 2]; 4] = std::array::from_fn(|k| [self.amps[k].re, self.amps[k].im]);
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TwoQubitState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = <[[f64; 2]; 4]>::deserialize(deserializer)?;
        let amps = std::array::from_fn(|k| Complex64::new(pairs[k][0], pairs[k][1]));
        TwoQubitState::new(amps).map_err(de::Error::custom)
    }
}

fn norm4(amps: &[Complex64; 4]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// A 4x4 complex operator on the two-particle space.
///
/// Equality is exact componentwise f64 equality; that is the intended
/// comparison for the observables built by this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator4 {
    entries: [[Complex64; 4]; 4],
}

impl Operator4 {
    pub fn from_entries(entries: [[Complex64; 4]; 4]) -> Self {
        Operator4 { entries }
    }

    pub fn identity() -> Self {
        let mut entries = [[ZERO; 4]; 4];
        for (k, row) in entries.iter_mut().enumerate() {
            row[k] = ONE;
        }
        Operator4 { entries }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    /// Kronecker product of two single-particle matrices (first particle is
    /// the most significant factor).
    pub fn kron(a: &Matrix2, b: &Matrix2) -> Self {
        let mut entries = [[ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        entries[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        Operator4 { entries }
    }

    /// Exact matrix product.
    pub fn product(&self, rhs: &Operator4) -> Operator4 {
        let mut entries = [[ZERO; 4]; 4];
        for (out_row, lhs_row) in entries.iter_mut().zip(&self.entries) {
            for (j, out) in out_row.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (k, rhs_row) in rhs.entries.iter().enumerate() {
                    acc += lhs_row[k] * rhs_row[j];
                }
                *out = acc;
            }
        }
        Operator4 { entries }
    }

    pub fn negated(&self) -> Operator4 {
        let mut entries = self.entries;
        for row in &mut entries {
            for e in row.iter_mut() {
                *e = -*e;
            }
        }
        Operator4 { entries }
    }

    /// `AB == BA`, compared exactly.
    pub fn commutes_exactly(&self, other: &Operator4) -> bool {
        self.product(other) == other.product(self)
    }

    /// Exact Hermiticity: `entries[i][j] == conj(entries[j][i])`.
    pub fn is_hermitian_exact(&self) -> bool {
        for i in 0..4 {
            for j in 0..4 {
                if self.entries[i][j] != self.entries[j][i].conj() {
                    return false;
                }
            }
        }
        true
    }

    /// Every entry is exactly one of `0, 1, -1, i, -i`.
    pub fn entries_in_gaussian_units(&self) -> bool {
        self.entries.iter().flatten().all(|e| {
            (e.re == 0.0 || e.re == 1.0 || e.re == -1.0)
                && (e.im == 0.0 || e.im == 1.0 || e.im == -1.0)
                && !(e.re != 0.0 && e.im != 0.0)
        })
    }

    pub fn squares_to_identity(&self) -> bool {
        self.product(self) == Operator4::identity()
    }

    /// Apply to a state, returning the raw (possibly unnormalized) image.
    pub fn apply(&self, state: &TwoQubitState) -> [Complex64; 4] {
        let amps = state.amplitudes();
        std::array::from_fn(|i| {
            self.entries[i]
                .iter()
                .zip(amps.iter())
                .map(|(m, a)| m * a)
                .sum()
        })
    }
}

impl std::ops::Mul for &Operator4 {
    type Output = Operator4;

    fn mul(self, rhs: &Operator4) -> Operator4 {
        self.product(rhs)
    }
}

/// `sigma_axis` on the indexed particle, tensored with identity on the
/// other. Entries are exact elements of `{0, +-1, +-i}`.
pub fn pauli(particle: Particle, axis: Axis) -> Operator4 {
    let m = pauli_matrix2(axis);
    let id: Matrix2 = [[ONE, ZERO], [ZERO, ONE]];
    match particle {
        Particle::First => Operator4::kron(&m, &id),
        Particle::Second => Operator4::kron(&id, &m),
    }
}

/// An orthonormal eigenbasis shared by two commuting observables, with the
/// per-vector eigenvalue pair.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis4 {
    vectors: [TwoQubitState; 4],
    eigenvalues: [(Sign, Sign); 4],
    observables: [Operator4; 2],
}

impl OrthonormalBasis4 {
    pub fn vectors(&self) -> &[TwoQubitState; 4] {
        &self.vectors
    }

    pub fn eigenvalues(&self) -> &[(Sign, Sign); 4] {
        &self.eigenvalues
    }

    pub fn observables(&self) -> &[Operator4; 2] {
        &self.observables
    }

    /// Index of the basis vector labeled with the given eigenvalue pair.
    pub fn index_of(&self, labels: (Sign, Sign)) -> Option<usize> {
        self.eigenvalues.iter().position(|&l| l == labels)
    }

    /// Largest deviation of `<v_i|v_j>` from the identity Gram matrix.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let g = self.vectors[i].inner(&self.vectors[j]);
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// Largest norm of `O v - lambda v` over both observables and all four
    /// vectors.
    pub fn eigen_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, vec) in self.vectors.iter().enumerate() {
            let labels = [self.eigenvalues[k].0, self.eigenvalues[k].1];
            for (obs, label) in self.observables.iter().zip(labels) {
                let image = obs.apply(vec);
                let mut residual = 0.0;
                for (img, amp) in image.iter().zip(vec.amplitudes()) {
                    residual += (img - amp * label.to_f64()).norm_sqr();
                }
                worst = worst.max(residual.sqrt());
            }
        }
        worst
    }

    /// Born probabilities of each outcome for `state`.
    pub fn probabilities(&self, state: &TwoQubitState) -> [f64; 4] {
        std::array::from_fn(|k| self.vectors[k].inner(state).norm_sqr())
    }
}

/// The Bell eigenbasis of the commuting pair (sigma1x sigma2x, sigma1y
/// sigma2y):
///
/// ```text
/// (|aa> + |bb>)/sqrt(2)   -> (+1, +1)
/// (|aa> - |bb>)/sqrt(2)   -> (+1, -1)
/// (|ab> + |ba>)/sqrt(2)   -> (-1, +1)
/// (|ab> - |ba>)/sqrt(2)   -> (-1, -1)
/// ```
pub fn bell_basis_xxyy() -> OrthonormalBasis4 {
    let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let vec = |amps| TwoQubitState { amps };
    OrthonormalBasis4 {
        vectors: [
            vec([c, ZERO, ZERO, c]),
            vec([c, ZERO, ZERO, -c]),
            vec([ZERO, c, c, ZERO]),
            vec([ZERO, c, -c, ZERO]),
        ],
        eigenvalues: [
            (Sign::Plus, Sign::Plus),
            (Sign::Plus, Sign::Minus),
            (Sign::Minus, Sign::Plus),
            (Sign::Minus, Sign::Minus),
        ],
        observables: [
            pauli(Particle::First, Axis::X).product(&pauli(Particle::Second, Axis::X)),
            pauli(Particle::First, Axis::Y).product(&pauli(Particle::Second, Axis::Y)),
        ],
    }
}

/// The maximally entangled eigenbasis of the commuting pair (sigma1x
/// sigma2y, sigma1y sigma2x), with `|+-> = (|a> +- |b>)/sqrt(2)`:
///
/// ```text
/// (|a+> + |b->)/sqrt(2)   -> (+1, +1)
/// (|a+> - |b->)/sqrt(2)   -> (+1, -1)
/// (|a-> + |b+>)/sqrt(2)   -> (-1, +1)
/// (|a-> - |b+>)/sqrt(2)   -> (-1, -1)
/// ```
pub fn bell_basis_xyyx() -> OrthonormalBasis4 {
    let h = Complex64::new(0.5, 0.0);
    let vec = |amps| TwoQubitState { amps };
    OrthonormalBasis4 {
        vectors: [
            vec([h, h, h, -h]),
            vec([h, h, -h, h]),
            vec([h, -h, h, h]),
            vec([h, -h, -h, -h]),
        ],
        eigenvalues: [
            (Sign::Plus, Sign::Plus),
            (Sign::Plus, Sign::Minus),
            (Sign::Minus, Sign::Plus),
            (Sign::Minus, Sign::Minus),
        ],
        observables: [
            pauli(Particle::First, Axis::X).product(&pauli(Particle::Second, Axis::Y)),
            pauli(Particle::First, Axis::Y).product(&pauli(Particle::Second, Axis::X)),
        ],
    }
}

/// One projective measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMeasurement {
    /// Index of the selected basis vector (0-based).
    pub index: usize,
    /// Eigenvalue labels of the two jointly measured observables.
    pub eigenvalues: (Sign, Sign),
    /// The post-measurement state (the selected basis vector).
    pub post_state: TwoQubitState,
}

/// Born-rule sampling: selects basis vector `k` with probability
/// `|<basis_k|state>|^2`, deterministically for a given stream.
pub fn measure_in_basis(
    state: &TwoQubitState,
    basis: &OrthonormalBasis4,
    stream: &mut RandomStream,
) -> Result<BasisMeasurement> {
    let norm = state.norm();
    if (norm - 1.0).abs() > MEASURE_NORM_TOL {
        return Err(Error::DegenerateState { norm });
    }
    let mut probs = basis.probabilities(state);
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    let u = stream.uniform();
    let mut cumulative = 0.0;
    let mut index = 3;
    for (k, p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            index = k;
            break;
        }
    }
    Ok(BasisMeasurement {
        index,
        eigenvalues: basis.eigenvalues[index],
        post_state: basis.vectors[index],
    })
}

/// Histogram of outcome indices over `trials` independent measurements.
///
/// Trial `i` consumes the child stream `base.fork(i)`, so the counts do not
/// depend on execution order and the parallel and sequential paths agree
/// exactly.
pub fn outcome_histogram(
    state: &TwoQubitState,
    basis: &OrthonormalBasis4,
    trials: u64,
    base: &RandomStream,
) -> Result<[u64; 4]> {
    let trial_ids: Vec<u64> = (0..trials).collect();
    let outcomes = crate::par::map_collect(&trial_ids, |&i| {
        let mut stream = base.fork(i);
        measure_in_basis(state, basis, &mut stream).map(|m| m.index)
    });
    tally(outcomes)
}

/// Sequential twin of [`outcome_histogram`]; used by the benchmark suite.
pub fn outcome_histogram_seq(
    state: &TwoQubitState,
    basis: &OrthonormalBasis4,
    trials: u64,
    base: &RandomStream,
) -> Result<[u64; 4]> {
    let trial_ids: Vec<u64> = (0..trials).collect();
    let outcomes = crate::par::map_collect_seq(&trial_ids, |&i| {
        let mut stream = base.fork(i);
        measure_in_basis(state, basis, &mut stream).map(|m| m.index)
    });
    tally(outcomes)
}

fn tally(outcomes: Vec<Result<usize>>) -> Result<[u64; 4]> {
    let mut counts = [0u64; 4];
    for outcome in outcomes {
        counts[outcome?] += 1;
    }
    Ok(counts)
}
