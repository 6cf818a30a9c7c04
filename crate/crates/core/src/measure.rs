//! Measurement cost: Pauli-string census of the moment expansion, qubit-wise commuting (TPB)
//! grouping, and shot sampling of one group.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::moments::MomentPlan;
use crate::pauli::{PauliString, PauliSum};
use crate::states::{instrument, ExpectationTable, StateVector};

/// True iff at every qubit the letters agree or one of them is `I`.
pub fn qubitwise_commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::QubitMismatch { left: a.n_qubits(), right: b.n_qubits() });
    }
    Ok(qwc(a, b))
}

#[inline]
fn qwc(a: &PauliString, b: &PauliString) -> bool {
    let overlap = a.support() & b.support();
    ((a.x_mask() ^ b.x_mask()) | (a.z_mask() ^ b.z_mask())) & overlap == 0
}

/// Strings measurable together in one tensor-product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TpbGroup {
    /// Union of member letters; qubits outside its support are unconstrained.
    basis: PauliString,
    members: Vec<PauliString>,
}

impl TpbGroup {
    fn open(s: PauliString) -> Self {
        TpbGroup { basis: s, members: vec![s] }
    }

    fn try_push(&mut self, s: PauliString) -> bool {
        if !qwc(&self.basis, &s) {
            return false;
        }
        let x = self.basis.x_mask() | s.x_mask();
        let z = self.basis.z_mask() | s.z_mask();
        self.basis = PauliString::new(s.n_qubits(), x, z).expect("masks within width");
        self.members.push(s);
        true
    }

    /// Measurement basis letter on `qubit`, `None` when unconstrained.
    pub fn basis_letter(&self, qubit: usize) -> Option<char> {
        match self.basis.letter(qubit) {
            'I' => None,
            l => Some(l),
        }
    }

    pub fn basis(&self) -> &PauliString {
        &self.basis
    }

    pub fn members(&self) -> &[PauliString] {
        &self.members
    }
}

/// Secondary sort key for strings of equal weight in [`group_tpb_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Canonical `(z_mask, x_mask)` order.
    Canonical,
    /// Text label order (`I < X < Y < Z`, qubit 0 first). Used by the census: its counts land
    /// within 1% of the published TPB numbers.
    #[default]
    Label,
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreak::Canonical => "canonical",
            TieBreak::Label => "label",
        })
    }
}

impl std::str::FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(TieBreak::Canonical),
            "label" => Ok(TieBreak::Label),
            _ => Err(Error::Parse(format!("unknown tie-break `{s}` (expected canonical or label)"))),
        }
    }
}

/// Label order as a key: per qubit from 0 upward, I=0, X=1, Y=2, Z=3.
fn label_key(s: &PauliString) -> u128 {
    let mut key = 0u128;
    for q in 0..s.n_qubits() {
        let x = (s.x_mask() >> q & 1) as u128;
        let z = (s.z_mask() >> q & 1) as u128;
        // I=00, X=01, Y=10, Z=11 in (high, low)
        let code = match (x, z) {
            (0, 0) => 0,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        };
        key = key << 2 | code;
    }
    key
}

/// Greedy first-fit grouping over strings sorted by descending weight, then canonical order.
/// The identity is skipped and duplicates are ignored.
pub fn group_tpb(strings: &[PauliString]) -> Vec<TpbGroup> {
    group_tpb_with(strings, TieBreak::Canonical)
}

/// [`group_tpb`] with a choice of secondary ordering.
pub fn group_tpb_with(strings: &[PauliString], tie_break: TieBreak) -> Vec<TpbGroup> {
    let mut sorted: Vec<PauliString> = strings.iter().copied().filter(|s| !s.is_identity()).collect();
    sorted.sort();
    sorted.dedup();
    match tie_break {
        TieBreak::Canonical => sorted.sort_by(|a, b| b.weight().cmp(&a.weight()).then_with(|| a.cmp(b))),
        TieBreak::Label => sorted.sort_by_cached_key(|s| (std::cmp::Reverse(s.weight()), label_key(s))),
    }
    let mut groups: Vec<TpbGroup> = Vec::new();
    for s in sorted {
        if !groups.iter_mut().any(|g| g.try_push(s)) {
            groups.push(TpbGroup::open(s));
        }
    }
    groups
}

/// String-counting convention for the census.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountConvention {
    /// Distinct strings over the union of `H^1..H^4`, identity included.
    UnionWithIdentity,
    UnionWithoutIdentity,
    /// Distinct strings of `H^4` alone.
    FourthWithIdentity,
    FourthWithoutIdentity,
}

impl CountConvention {
    pub const ALL: [CountConvention; 4] = [
        CountConvention::UnionWithIdentity,
        CountConvention::UnionWithoutIdentity,
        CountConvention::FourthWithIdentity,
        CountConvention::FourthWithoutIdentity,
    ];

    /// The convention under which the 4x3 XXZ energy census gives 66 343 strings (the k=4
    /// layer with identity gives the same count for that model).
    pub const DEFAULT: CountConvention = CountConvention::UnionWithIdentity;
}

impl fmt::Display for CountConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountConvention::UnionWithIdentity => "union+I",
            CountConvention::UnionWithoutIdentity => "union-I",
            CountConvention::FourthWithIdentity => "k4+I",
            CountConvention::FourthWithoutIdentity => "k4-I",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusRow {
    pub convention: CountConvention,
    pub n_strings: usize,
    pub n_tpb: usize,
}

/// Per-power counts, for the growth of TPBs against strings.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerCount {
    pub power: usize,
    pub n_strings: usize,
    pub n_tpb: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Census {
    pub rows: Vec<CensusRow>,
    pub layers: Vec<LayerCount>,
}

impl Census {
    pub fn row(&self, convention: CountConvention) -> &CensusRow {
        self.rows.iter().find(|r| r.convention == convention).expect("all conventions present")
    }
}

/// Counts the strings that must be measured for the fourth-order moments of `H` (or of
/// `H + lambda A`), with coefficients kept symbolic so that no accidental zero shrinks the count.
pub fn census(h: &PauliSum, observable: Option<&PauliSum>) -> Result<Census> {
    census_with(h, observable, TieBreak::default())
}

pub fn census_with(h: &PauliSum, observable: Option<&PauliSum>, tie_break: TieBreak) -> Result<Census> {
    let plan = MomentPlan::new(h, observable)?;
    census_of_plan(&plan, tie_break)
}

pub fn census_of_plan(plan: &MomentPlan, tie_break: TieBreak) -> Result<Census> {
    let identity = PauliString::identity(plan.n_qubits());
    let layers: Vec<Vec<PauliString>> = plan.powers().iter().map(|p| p.strings().copied().collect()).collect();
    let union: BTreeSet<PauliString> = layers.iter().flatten().copied().collect();
    let fourth: BTreeSet<PauliString> = layers[3].iter().copied().collect();

    let count = |set: &BTreeSet<PauliString>| {
        let strings: Vec<PauliString> = set.iter().copied().collect();
        let n_tpb = group_tpb_with(&strings, tie_break).len();
        let with = set.len() + usize::from(!set.contains(&identity));
        let without = set.len() - usize::from(set.contains(&identity));
        (with, without, n_tpb)
    };
    let (uw, uwo, utpb) = count(&union);
    let (fw, fwo, ftpb) = count(&fourth);
    let rows = vec![
        CensusRow { convention: CountConvention::UnionWithIdentity, n_strings: uw, n_tpb: utpb },
        CensusRow { convention: CountConvention::UnionWithoutIdentity, n_strings: uwo, n_tpb: utpb },
        CensusRow { convention: CountConvention::FourthWithIdentity, n_strings: fw, n_tpb: ftpb },
        CensusRow { convention: CountConvention::FourthWithoutIdentity, n_strings: fwo, n_tpb: ftpb },
    ];
    let layers = layers
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let non_identity: Vec<PauliString> = l.iter().copied().filter(|s| !s.is_identity()).collect();
            LayerCount { power: k + 1, n_strings: non_identity.len(), n_tpb: group_tpb_with(&non_identity, tie_break).len() }
        })
        .collect();
    Ok(Census { rows, layers })
}

fn apply_1q(amps: &mut [Complex64], qubit: usize, u: [[Complex64; 2]; 2]) {
    let bit = 1usize << qubit;
    for b in 0..amps.len() {
        if b & bit == 0 {
            let (a0, a1) = (amps[b], amps[b | bit]);
            amps[b] = u[0][0] * a0 + u[0][1] * a1;
            amps[b | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// Bitstring with qubit 0 leftmost.
fn bits(index: usize, n: usize) -> String {
    (0..n).map(|q| if index >> q & 1 == 1 { '1' } else { '0' }).collect()
}

/// Rotates `state` into the group's basis and samples `shots` computational-basis outcomes.
pub fn sample_shots(state: &StateVector, group: &TpbGroup, shots: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
    let n = state.n_qubits();
    if group.basis.n_qubits() != n {
        return Err(Error::QubitMismatch { left: n, right: group.basis.n_qubits() });
    }
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |v: f64| Complex64::new(v, 0.0);
    let hadamard = [[r(h), r(h)], [r(h), r(-h)]];
    // H S^dag maps Y to Z
    let hs = [[r(h), Complex64::new(0.0, -h)], [r(h), Complex64::new(0.0, h)]];
    let mut amps = state.amplitudes().to_vec();
    for q in 0..n {
        match group.basis_letter(q) {
            Some('X') => apply_1q(&mut amps, q, hadamard),
            Some('Y') => apply_1q(&mut amps, q, hs),
            _ => {}
        }
    }
    let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    let dist = WeightedIndex::new(&probs).map_err(|e| Error::Config(format!("bad distribution: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut raw = vec![0usize; probs.len()];
    for _ in 0..shots {
        raw[dist.sample(&mut rng)] += 1;
    }
    for (i, c) in raw.into_iter().enumerate() {
        if c > 0 {
            counts.insert(bits(i, n), c);
        }
    }
    Ok(counts)
}

/// Estimate of `<s>` from counts taken in a basis compatible with `s`.
pub fn estimate_from_counts(counts: &BTreeMap<String, usize>, s: &PauliString) -> f64 {
    let support = s.support();
    let mut total = 0usize;
    let mut acc = 0i64;
    for (b, &c) in counts {
        let parity = b.chars().enumerate().filter(|&(q, ch)| ch == '1' && support >> q & 1 == 1).count() % 2;
        acc += if parity == 0 { c as i64 } else { -(c as i64) };
        total += c;
    }
    acc as f64 / total as f64
}

/// Expectation table estimated from `shots` samples per TPB group (label tie-break). Group `k`
/// samples with seed `seed + k` (wrapping).
pub fn sampled_table<'a>(
    state: &StateVector,
    strings: impl IntoIterator<Item = &'a PauliString>,
    shots: usize,
    seed: u64,
) -> Result<ExpectationTable> {
    let strings: Vec<PauliString> = strings.into_iter().copied().collect();
    let mut values = std::collections::HashMap::with_capacity(strings.len());
    for (k, group) in group_tpb_with(&strings, TieBreak::Label).iter().enumerate() {
        let counts = sample_shots(state, group, shots, seed.wrapping_add(k as u64))?;
        for s in group.members() {
            values.insert(*s, estimate_from_counts(&counts, s));
        }
    }
    instrument::TABLE_BUILDS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    Ok(ExpectationTable::from_values(state.n_qubits(), values))
}
