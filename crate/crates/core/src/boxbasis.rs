//! Unperturbed product states of three particles in the box `|q| < 1`.
//!
//! Single-particle modes are `sin(nπ(q+1)/2)`, `n = 1, 2, ...`, with energy
//! `n²π²/4` in the dimensionless units of the model Hamiltonian. A product
//! state is labelled by a [`ModeTriple`] and states related by permuting the
//! three quantum numbers are grouped into a [`Multiplet`].

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest accepted energy-sum cutoff; keeps `n²` sums far from overflow.
pub const MAX_ENERGY_SUM: u32 = 1_000_000;

/// Box quantum numbers `(n1, n2, n3)` of one product state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeTriple(pub [u32; 3]);

impl ModeTriple {
    pub fn new(n1: u32, n2: u32, n3: u32) -> Result<Self> {
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::InvalidTriple([n1, n2, n3]));
        }
        Ok(Self([n1, n2, n3]))
    }

    #[inline]
    pub fn modes(&self) -> [u32; 3] {
        self.0
    }

    /// `n1² + n2² + n3²`, exact.
    #[inline]
    pub fn energy_sum(&self) -> u32 {
        self.0.iter().map(|n| n * n).sum()
    }

    /// Components sorted in descending order.
    pub fn sorted_desc(&self) -> [u32; 3] {
        let mut s = self.0;
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// Sign picked up under `q -> -q` of every coordinate:
    /// `Π (-1)^(n+1)`, so `+1` for gerade and `-1` for ungerade states.
    pub fn inversion_parity(&self) -> i32 {
        let odd_functions = self.0.iter().filter(|n| *n % 2 == 0).count();
        if odd_functions % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for ModeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Unperturbed energy `(π²/4)(n1² + n2² + n3²)`.
pub fn mode_energy(t: ModeTriple) -> f64 {
    energy_of_sum(t.energy_sum())
}

/// Energy belonging to an integer energy sum.
#[inline]
pub fn energy_of_sum(sum: u32) -> f64 {
    PI * PI / 4.0 * sum as f64
}

/// Reflection parity of a single mode: `n` odd gives an even function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeParity {
    Even,
    Odd,
}

impl ModeParity {
    pub fn of(n: u32) -> Self {
        if n % 2 == 1 {
            ModeParity::Even
        } else {
            ModeParity::Odd
        }
    }
}

/// The ten parity-pattern classes a triple can fall into.
///
/// Primes distinguish different quantum numbers of the same parity, so
/// `OddTwoDistinctEven` is `{o, e', e''}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParitySignature {
    /// `{e,e,e}`
    EvenAllEqual,
    /// `{e',e,e}`
    EvenPair,
    /// `{e',e'',e'''}`
    EvenAllDistinct,
    /// `{o,e,e}`
    OddWithEvenPair,
    /// `{o,e',e''}`
    OddTwoDistinctEven,
    /// `{e,o,o}`
    EvenWithOddPair,
    /// `{o,o',e}`
    TwoDistinctOddEven,
    /// `{o,o,o}`
    OddAllEqual,
    /// `{o',o,o}`
    OddPair,
    /// `{o,o',o''}`
    OddAllDistinct,
}

impl ParitySignature {
    pub const ALL: [ParitySignature; 10] = [
        ParitySignature::EvenAllEqual,
        ParitySignature::EvenPair,
        ParitySignature::EvenAllDistinct,
        ParitySignature::OddWithEvenPair,
        ParitySignature::OddTwoDistinctEven,
        ParitySignature::EvenWithOddPair,
        ParitySignature::TwoDistinctOddEven,
        ParitySignature::OddAllEqual,
        ParitySignature::OddPair,
        ParitySignature::OddAllDistinct,
    ];

    /// Pattern written with `e`/`o` letters and primes.
    pub fn pattern(&self) -> &'static str {
        match self {
            ParitySignature::EvenAllEqual => "{e,e,e}",
            ParitySignature::EvenPair => "{e',e,e}",
            ParitySignature::EvenAllDistinct => "{e',e'',e'''}",
            ParitySignature::OddWithEvenPair => "{o,e,e}",
            ParitySignature::OddTwoDistinctEven => "{o,e',e''}",
            ParitySignature::EvenWithOddPair => "{e,o,o}",
            ParitySignature::TwoDistinctOddEven => "{o,o',e}",
            ParitySignature::OddAllEqual => "{o,o,o}",
            ParitySignature::OddPair => "{o',o,o}",
            ParitySignature::OddAllDistinct => "{o,o',o''}",
        }
    }
}

/// Classify a triple by the parities of its modes and by which quantum
/// numbers coincide.
pub fn parity_signature(t: ModeTriple) -> ParitySignature {
    let n = t.modes();
    let mut evens: Vec<u32> = n.iter().copied().filter(|&k| ModeParity::of(k) == ModeParity::Even).collect();
    let mut odds: Vec<u32> = n.iter().copied().filter(|&k| ModeParity::of(k) == ModeParity::Odd).collect();
    evens.sort_unstable();
    odds.sort_unstable();
    let distinct = |v: &[u32]| {
        let mut d = v.to_vec();
        d.dedup();
        d.len()
    };
    use ParitySignature::*;
    match (evens.len(), odds.len()) {
        (3, 0) => match distinct(&evens) {
            1 => EvenAllEqual,
            2 => EvenPair,
            _ => EvenAllDistinct,
        },
        (2, 1) => {
            if distinct(&evens) == 1 {
                OddWithEvenPair
            } else {
                OddTwoDistinctEven
            }
        }
        (1, 2) => {
            if distinct(&odds) == 1 {
                EvenWithOddPair
            } else {
                TwoDistinctOddEven
            }
        }
        _ => match distinct(&odds) {
            1 => OddAllEqual,
            2 => OddPair,
            _ => OddAllDistinct,
        },
    }
}

/// All distinct permutations of one sorted triple; degenerate at `λ = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplet {
    energy_sum: u32,
    /// Representative with components in descending order.
    sorted: [u32; 3],
    /// Distinct permutations, ascending lexicographically.
    members: Vec<ModeTriple>,
}

impl Multiplet {
    /// Multiplet containing `t`.
    pub fn from_triple(t: ModeTriple) -> Self {
        let sorted = t.sorted_desc();
        let [a, b, c] = sorted;
        let mut members: Vec<ModeTriple> = [
            [a, b, c],
            [a, c, b],
            [b, a, c],
            [b, c, a],
            [c, a, b],
            [c, b, a],
        ]
        .into_iter()
        .map(ModeTriple)
        .collect();
        members.sort_unstable();
        members.dedup();
        Self {
            energy_sum: t.energy_sum(),
            sorted,
            members,
        }
    }

    pub fn energy_sum(&self) -> u32 {
        self.energy_sum
    }

    pub fn energy(&self) -> f64 {
        energy_of_sum(self.energy_sum)
    }

    pub fn sorted(&self) -> [u32; 3] {
        self.sorted
    }

    pub fn representative(&self) -> ModeTriple {
        ModeTriple(self.sorted)
    }

    pub fn members(&self) -> &[ModeTriple] {
        &self.members
    }

    /// 1, 3 or 6.
    pub fn orbit_size(&self) -> usize {
        self.members.len()
    }

    pub fn signature(&self) -> ParitySignature {
        parity_signature(self.representative())
    }

    pub fn inversion_parity(&self) -> i32 {
        self.representative().inversion_parity()
    }

    pub fn contains(&self, t: &ModeTriple) -> bool {
        self.members.binary_search(t).is_ok()
    }

    /// Ordering used everywhere a deterministic state order is needed:
    /// ascending energy sum, then lexicographic on the sorted descending triple.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.energy_sum
            .cmp(&other.energy_sum)
            .then_with(|| self.sorted.cmp(&other.sorted))
    }
}

/// Every multiplet with `energy_sum <= max_energy_sum`, in canonical order.
pub fn enumerate_states(max_energy_sum: u32) -> Result<Vec<Multiplet>> {
    if !(3..=MAX_ENERGY_SUM).contains(&max_energy_sum) {
        return Err(Error::InvalidCutoff(max_energy_sum));
    }
    let mut out = Vec::new();
    let mut a = 1u32;
    while a * a + 2 <= max_energy_sum {
        for b in 1..=a {
            if a * a + b * b + 1 > max_energy_sum {
                break;
            }
            for c in 1..=b {
                if a * a + b * b + c * c > max_energy_sum {
                    break;
                }
                out.push(Multiplet::from_triple(ModeTriple([a, b, c])));
            }
        }
        a += 1;
    }
    out.sort_by(|x, y| x.canonical_cmp(y));
    Ok(out)
}

/// Flattened product states of a multiplet list, preserving multiplet order.
pub fn product_states(multiplets: &[Multiplet]) -> Vec<ModeTriple> {
    multiplets.iter().flat_map(|m| m.members().iter().copied()).collect()
}

/// Largest single-particle quantum number reachable under a cutoff.
pub fn max_mode(max_energy_sum: u32) -> u32 {
    let mut n = 1;
    while (n + 1) * (n + 1) + 2 <= max_energy_sum {
        n += 1;
    }
    n
}
