//! The D3d symmetry of the coupled three-particle box.
//!
//! The twelve group elements are the coordinate permutations, optionally
//! combined with inversion `(x,y,z) -> (-x,-y,-z)`. A pure transposition such
//! as `(x,y,z) -> (y,x,z)` is a reflection through a plane containing the
//! `(1,1,1)` axis and therefore belongs to `3σd`; the inverted transpositions
//! are the twofold rotations `3C2`.
//!
//! Symmetry-adapted linear combinations (SALCs) are generated from fixed
//! templates and then checked against the projection-operator construction
//! `P_ij = (d/12) Σ_g D_ij(g) O_g`. Both routes use the same real orthogonal
//! representation matrices, so the two rows of an `E` irrep always carry
//! identical Hamiltonian blocks.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boxbasis::{ModeTriple, Multiplet};
use crate::{Error, Result};

/// Signed permutation `(g r)_i = sign · r_{perm[i]}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    perm: [usize; 3],
    sign: i8,
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [1, 2, 0],
    [2, 0, 1],
    [1, 0, 2],
    [0, 2, 1],
    [2, 1, 0],
];

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        perm: [0, 1, 2],
        sign: 1,
    };
    pub const INVERSION: GroupElement = GroupElement {
        perm: [0, 1, 2],
        sign: -1,
    };

    /// `None` unless `perm` is a permutation of `0..3` and `sign` is ±1.
    pub fn new(perm: [usize; 3], sign: i8) -> Option<Self> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || seen[p] {
                return None;
            }
            seen[p] = true;
        }
        (sign == 1 || sign == -1).then_some(Self { perm, sign })
    }

    /// All twelve elements, proper ones first.
    pub fn all() -> [GroupElement; 12] {
        let mut out = [Self::IDENTITY; 12];
        for (i, sign) in [1i8, -1].into_iter().enumerate() {
            for (j, perm) in PERMUTATIONS.into_iter().enumerate() {
                out[6 * i + j] = GroupElement { perm, sign };
            }
        }
        out
    }

    pub fn perm(&self) -> [usize; 3] {
        self.perm
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            perm: std::array::from_fn(|i| other.perm[self.perm[i]]),
            sign: self.sign * other.sign,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let mut perm = [0; 3];
        for (i, &p) in self.perm.iter().enumerate() {
            perm[p] = i;
        }
        GroupElement { perm, sign: self.sign }
    }

    /// Image of a point in configuration space.
    pub fn apply_point(&self, r: [f64; 3]) -> [f64; 3] {
        let s = self.sign as f64;
        std::array::from_fn(|i| s * r[self.perm[i]])
    }

    /// 3×3 matrix with `M[i][perm[i]] = sign`.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[i][self.perm[i]] = self.sign as f64;
        }
        m
    }

    fn fixed_points(&self) -> usize {
        (0..3).filter(|&i| self.perm[i] == i).count()
    }

    /// Conjugacy class.
    pub fn class(&self) -> SymmetryClass {
        match (self.fixed_points(), self.sign) {
            (3, 1) => SymmetryClass::E,
            (0, 1) => SymmetryClass::C3,
            (1, 1) => SymmetryClass::SigmaD,
            (3, _) => SymmetryClass::I,
            (0, _) => SymmetryClass::S6,
            _ => SymmetryClass::C2,
        }
    }

    /// Transform a product state: `O_g φ_a = ε φ_{a'}` with
    /// `a'_j = a_{perm[j]}` and `ε = Π (-1)^(n+1)` when `g` contains inversion.
    pub fn act_on_triple(&self, t: ModeTriple) -> (ModeTriple, f64) {
        let a = t.modes();
        let image = ModeTriple(std::array::from_fn(|j| a[self.perm[j]]));
        let eps = if self.sign < 0 {
            t.inversion_parity() as f64
        } else {
            1.0
        };
        (image, eps)
    }
}

/// Conjugacy classes in character-table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryClass {
    E,
    C3,
    C2,
    I,
    S6,
    SigmaD,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 6] = [
        SymmetryClass::E,
        SymmetryClass::C3,
        SymmetryClass::C2,
        SymmetryClass::I,
        SymmetryClass::S6,
        SymmetryClass::SigmaD,
    ];

    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn size(&self) -> usize {
        [1, 2, 3, 1, 2, 3][self.index()]
    }
}

/// Conjugacy class of a group element.
pub fn class_of(g: &GroupElement) -> SymmetryClass {
    g.class()
}

/// Irreducible representations of D3d, in character-table row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Irrep {
    A1g,
    A2g,
    Eg,
    A1u,
    A2u,
    Eu,
}

impl Irrep {
    pub const ALL: [Irrep; 6] = [Irrep::A1g, Irrep::A2g, Irrep::Eg, Irrep::A1u, Irrep::A2u, Irrep::Eu];

    pub fn label(&self) -> &'static str {
        match self {
            Irrep::A1g => "A1g",
            Irrep::A2g => "A2g",
            Irrep::Eg => "Eg",
            Irrep::A1u => "A1u",
            Irrep::A2u => "A2u",
            Irrep::Eu => "Eu",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Irrep::Eg | Irrep::Eu => 2,
            _ => 1,
        }
    }

    pub fn is_gerade(&self) -> bool {
        matches!(self, Irrep::A1g | Irrep::A2g | Irrep::Eg)
    }

    /// Characters over `(E, 2C3, 3C2, i, 2S6, 3σd)`.
    pub fn characters(&self) -> [f64; 6] {
        match self {
            Irrep::A1g => [1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            Irrep::A2g => [1.0, 1.0, -1.0, 1.0, 1.0, -1.0],
            Irrep::Eg => [2.0, -1.0, 0.0, 2.0, -1.0, 0.0],
            Irrep::A1u => [1.0, 1.0, 1.0, -1.0, -1.0, -1.0],
            Irrep::A2u => [1.0, 1.0, -1.0, -1.0, -1.0, 1.0],
            Irrep::Eu => [2.0, -1.0, 0.0, -2.0, 1.0, 0.0],
        }
    }

    pub fn character(&self, g: &GroupElement) -> f64 {
        self.characters()[g.class().index()]
    }

    /// Representation matrix `D(g)` (`1×1` irreps use the `[0][0]` entry).
    ///
    /// `Eu` is the action of `M(g)` on the plane orthogonal to `(1,1,1)` in
    /// the orthonormal basis `e0 = (2,-1,-1)/√6`, `e1 = (0,1,-1)/√2`;
    /// `Eg = Eu ⊗ A1u`.
    pub fn rep_matrix(&self, g: &GroupElement) -> [[f64; 2]; 2] {
        match self {
            Irrep::Eg | Irrep::Eu => {
                let m = g.matrix();
                let basis = plane_basis();
                let scale = if *self == Irrep::Eg { g.sign as f64 } else { 1.0 };
                let mut d = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        let mut acc = 0.0;
                        for a in 0..3 {
                            for b in 0..3 {
                                acc += basis[i][a] * m[a][b] * basis[j][b];
                            }
                        }
                        d[i][j] = scale * acc;
                    }
                }
                d
            }
            _ => [[self.character(g), 0.0], [0.0, 0.0]],
        }
    }

    pub fn rows(&self) -> std::ops::Range<usize> {
        0..self.dim()
    }
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Irrep {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Irrep::ALL
            .into_iter()
            .find(|i| i.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown irrep '{s}' (expected one of A1g, A2g, Eg, A1u, A2u, Eu)"))
    }
}

fn plane_basis() -> [[f64; 3]; 2] {
    let s6 = 6f64.sqrt();
    [[2.0 / s6, -1.0 / s6, -1.0 / s6], [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]]
}

/// Character-level inner product `Σ_g χ_a(g) χ_b(g)`.
pub fn character_inner_product(a: Irrep, b: Irrep) -> f64 {
    let (ca, cb) = (a.characters(), b.characters());
    SymmetryClass::ALL
        .iter()
        .map(|c| c.size() as f64 * ca[c.index()] * cb[c.index()])
        .sum()
}

/// Normalized combination of product states transforming as one row of an irrep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Salc {
    pub irrep: Irrep,
    pub row: usize,
    /// Sorted descending representative of the parent multiplet.
    pub multiplet: [u32; 3],
    pub energy_sum: u32,
    /// Distinguishes repeated copies of an irrep within one multiplet.
    pub copy: usize,
    /// Nonzero coefficients, in ascending triple order.
    pub coefficients: Vec<(ModeTriple, f64)>,
}

impl Salc {
    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|(_, c)| c * c).sum()
    }

    pub fn coefficient(&self, t: &ModeTriple) -> f64 {
        self.coefficients
            .binary_search_by(|(k, _)| k.cmp(t))
            .map(|i| self.coefficients[i].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, other: &Salc) -> f64 {
        sparse_dot(&self.coefficients, &other.coefficients)
    }
}

/// Dot product of two coefficient lists sorted by triple.
pub fn sparse_dot(a: &[(ModeTriple, f64)], b: &[(ModeTriple, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Apply a group element to a coefficient list; result sorted by triple.
pub fn project_function(g: &GroupElement, coefficients: &[(ModeTriple, f64)]) -> Vec<(ModeTriple, f64)> {
    let mut out: Vec<(ModeTriple, f64)> = coefficients
        .iter()
        .map(|&(t, c)| {
            let (image, eps) = g.act_on_triple(t);
            (image, eps * c)
        })
        .collect();
    out.sort_by_key(|a| a.0);
    out
}

/// Irrep content of the permutation representation on a multiplet, by the
/// reduction formula. Repeated irreps appear repeatedly, in table order.
pub fn decompose_multiplet(m: &Multiplet) -> Vec<Irrep> {
    let group = GroupElement::all();
    let traces: Vec<f64> = group
        .iter()
        .map(|g| {
            m.members()
                .iter()
                .map(|&t| {
                    let (image, eps) = g.act_on_triple(t);
                    if image == t {
                        eps
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect();
    let mut out = Vec::new();
    for irrep in Irrep::ALL {
        let n: f64 = group
            .iter()
            .zip(&traces)
            .map(|(g, tr)| irrep.character(g) * tr)
            .sum::<f64>()
            / 12.0;
        for _ in 0..n.round() as usize {
            out.push(irrep);
        }
    }
    out
}

/// Irrep content listed for each parity pattern class.
pub fn expected_irreps(sig: crate::ParitySignature) -> Vec<Irrep> {
    use crate::ParitySignature::*;
    use Irrep::*;
    match sig {
        EvenAllEqual => vec![A1g],
        EvenPair => vec![A1g, Eg],
        EvenAllDistinct => vec![A1g, A2g, Eg, Eg],
        OddWithEvenPair => vec![A2u, Eu],
        OddTwoDistinctEven => vec![A1u, A2u, Eu, Eu],
        EvenWithOddPair => vec![A1g, Eg],
        TwoDistinctOddEven => vec![A1g, A2g, Eg, Eg],
        OddAllEqual => vec![A2u],
        OddPair => vec![A2u, Eu],
        OddAllDistinct => vec![A1u, A2u, Eu, Eu],
    }
}

fn permutation_sign_desc(t: &[u32; 3]) -> f64 {
    let mut inversions = 0;
    for i in 0..3 {
        for j in i + 1..3 {
            if t[i] < t[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn salc(m: &Multiplet, irrep: Irrep, row: usize, copy: usize, coeff: impl Fn(&ModeTriple) -> f64) -> Salc {
    let coefficients = m
        .members()
        .iter()
        .map(|t| (*t, coeff(t)))
        .filter(|(_, c)| *c != 0.0)
        .collect();
    Salc {
        irrep,
        row,
        multiplet: m.sorted(),
        energy_sum: m.energy_sum(),
        copy,
        coefficients,
    }
}

/// Template SALCs: `1/√3` and `1/√6` symmetric sums, `1/√6` signed sums,
/// and `(2,-1,-1)/√6`, `(0,1,-1)/√2` partner pairs over the position of the
/// distinguished quantum number.
fn template_salcs(m: &Multiplet) -> Vec<Salc> {
    let gerade = m.inversion_parity() > 0;
    let (a_sym, a_anti, e) = if gerade {
        (Irrep::A1g, Irrep::A2g, Irrep::Eg)
    } else {
        (Irrep::A2u, Irrep::A1u, Irrep::Eu)
    };
    let [top, mid, low] = m.sorted();
    let plane = plane_basis();
    let mut out = Vec::new();
    match m.orbit_size() {
        1 => out.push(salc(m, a_sym, 0, 0, |_| 1.0)),
        3 => {
            let odd_one = if top == mid { low } else { top };
            let pos = |t: &ModeTriple| t.modes().iter().position(|&n| n == odd_one).unwrap();
            out.push(salc(m, a_sym, 0, 0, |_| 1.0 / 3f64.sqrt()));
            out.push(salc(m, e, 0, 0, |t| plane[0][pos(t)]));
            out.push(salc(m, e, 1, 0, |t| plane[1][pos(t)]));
        }
        _ => {
            let pos = |t: &ModeTriple| t.modes().iter().position(|&n| n == top).unwrap();
            let sgn = |t: &ModeTriple| permutation_sign_desc(&t.modes());
            let inv6 = 1.0 / 6f64.sqrt();
            out.push(salc(m, a_sym, 0, 0, |_| inv6));
            out.push(salc(m, a_anti, 0, 0, |t| sgn(t) * inv6));
            // Copy 0 sums the two states sharing the position of the largest
            // quantum number; copy 1 takes their signed difference, rotated by
            // 90° in the partner plane so both copies share D(g).
            out.push(salc(m, e, 0, 0, |t| plane[0][pos(t)] / SQRT_2));
            out.push(salc(m, e, 1, 0, |t| plane[1][pos(t)] / SQRT_2));
            out.push(salc(m, e, 0, 1, |t| sgn(t) * plane[1][pos(t)] / SQRT_2));
            out.push(salc(m, e, 1, 1, |t| -sgn(t) * plane[0][pos(t)] / SQRT_2));
        }
    }
    out.sort_by_key(|s| (s.irrep, s.row, s.copy));
    out
}

type Dense = Vec<f64>;

fn apply_dense(g: &GroupElement, m: &Multiplet, v: &[f64]) -> Dense {
    let members = m.members();
    let mut out = vec![0.0; members.len()];
    for (j, t) in members.iter().enumerate() {
        if v[j] == 0.0 {
            continue;
        }
        let (image, eps) = g.act_on_triple(*t);
        let k = members.binary_search(&image).expect("group maps a multiplet onto itself");
        out[k] += eps * v[j];
    }
    out
}

/// `P_ij = (d/12) Σ_g D_ij(g) O_g` on a multiplet-local vector.
fn projector_apply(irrep: Irrep, i: usize, j: usize, m: &Multiplet, v: &[f64]) -> Dense {
    let mut out = vec![0.0; v.len()];
    let d = irrep.dim() as f64;
    for g in GroupElement::all() {
        let w = irrep.rep_matrix(&g)[i][j];
        if w == 0.0 {
            continue;
        }
        for (o, x) in out.iter_mut().zip(apply_dense(&g, m, v)) {
            *o += d / 12.0 * w * x;
        }
    }
    out
}

fn orthonormalize(vectors: Vec<Dense>) -> Vec<Dense> {
    let mut basis: Vec<Dense> = Vec::new();
    for mut v in vectors {
        for _ in 0..2 {
            for b in &basis {
                let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

fn span_projector(vectors: &[Dense], dim: usize) -> Vec<f64> {
    let mut p = vec![0.0; dim * dim];
    for v in vectors {
        for a in 0..dim {
            for b in 0..dim {
                p[a * dim + b] += v[a] * v[b];
            }
        }
    }
    p
}

fn to_dense(m: &Multiplet, s: &Salc) -> Dense {
    m.members().iter().map(|t| s.coefficient(t)).collect()
}

/// Projection-operator bases per `(irrep, row)`; row-1 partners are
/// obtained from row 0 with the transfer operator `P_10`.
fn projected_spaces(m: &Multiplet) -> Vec<(Irrep, usize, Vec<Dense>)> {
    let dim = m.orbit_size();
    let unit = |k: usize| {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        e
    };
    let mut out = Vec::new();
    for irrep in Irrep::ALL {
        let row0 = orthonormalize((0..dim).map(|k| projector_apply(irrep, 0, 0, m, &unit(k))).collect());
        if row0.is_empty() {
            continue;
        }
        if irrep.dim() == 2 {
            let row1: Vec<Dense> = row0.iter().map(|v| projector_apply(irrep, 1, 0, m, v)).collect();
            out.push((irrep, 0, row0));
            out.push((irrep, 1, row1));
        } else {
            out.push((irrep, 0, row0));
        }
    }
    out
}

/// SALCs of one multiplet, ordered by `(irrep, row, copy)`.
///
/// The returned combinations come from the templates; they are accepted only
/// if they are orthonormal, span the same row subspaces as the projection
/// operators, and (for `E`) map row 0 onto row 1 under `P_10`.
pub fn build_salcs(m: &Multiplet) -> Result<Vec<Salc>> {
    const TOL: f64 = 1e-12;
    let salcs = template_salcs(m);
    let dim = m.orbit_size();
    let mismatch = |irrep, row, detail: String| Error::SalcMismatch {
        irrep,
        row,
        multiplet: m.sorted(),
        detail,
    };

    for (a, sa) in salcs.iter().enumerate() {
        for sb in &salcs[a..] {
            let expect = if std::ptr::eq(sa, sb) { 1.0 } else { 0.0 };
            if (sa.dot(sb) - expect).abs() > TOL {
                return Err(mismatch(sa.irrep, sa.row, format!("overlap with {} row {} is {}", sb.irrep, sb.row, sa.dot(sb))));
            }
        }
    }

    let projected = projected_spaces(m);
    let total: usize = projected.iter().map(|(_, _, v)| v.len()).sum();
    if total != dim || salcs.len() != dim {
        return Err(mismatch(Irrep::A1g, 0, format!("{} template / {} projected functions for orbit of size {dim}", salcs.len(), total)));
    }
    for (irrep, row, basis) in &projected {
        let templ: Vec<Dense> = salcs
            .iter()
            .filter(|s| s.irrep == *irrep && s.row == *row)
            .map(|s| to_dense(m, s))
            .collect();
        if templ.len() != basis.len() {
            return Err(mismatch(*irrep, *row, format!("{} template vs {} projected functions", templ.len(), basis.len())));
        }
        let dev = span_projector(&templ, dim)
            .iter()
            .zip(span_projector(basis, dim))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > TOL {
            return Err(mismatch(*irrep, *row, format!("subspace deviation {dev:.3e}")));
        }
    }
    for s0 in salcs.iter().filter(|s| s.irrep.dim() == 2 && s.row == 0) {
        let partner = salcs
            .iter()
            .find(|s| s.irrep == s0.irrep && s.row == 1 && s.copy == s0.copy)
            .expect("templates emit both rows");
        let mapped = projector_apply(s0.irrep, 1, 0, m, &to_dense(m, s0));
        let dev = mapped
            .iter()
            .zip(to_dense(m, partner))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > TOL {
            return Err(mismatch(s0.irrep, 1, format!("partner of copy {} off by {dev:.3e}", s0.copy)));
        }
    }
    Ok(salcs)
}
