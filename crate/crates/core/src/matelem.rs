//! Matrix elements of the pair coupling `W = (x-y)² + (y-z)² + (z-x)²` and
//! per-irrep Hamiltonian blocks `H(λ) = H0 + λW`.
//!
//! `W` is expanded as `2(x²+y²+z²) - 2(xy+yz+zx)`, so every element reduces
//! to the one-body integrals `⟨m|q|n⟩` and `⟨m|q²|n⟩` over box modes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::boxbasis::{enumerate_states, max_mode, mode_energy, ModeTriple, Multiplet};
use crate::d3d::{build_salcs, Irrep, Salc};
use crate::exec::Execution;
use crate::{Error, Result};

/// `⟨φ_n|q²|φ_n⟩ = 1/3 - 2/(n²π²)`.
pub fn p2_diag(n: u32) -> f64 {
    1.0 / 3.0 - 2.0 / ((n as f64).powi(2) * PI * PI)
}

/// `⟨φ_m|q|φ_n⟩` for `m ≠ n`: `-16mn / (π²(m²-n²)²)` when `m+n` is odd,
/// zero otherwise.
pub fn p1_offdiag(m: u32, n: u32) -> f64 {
    debug_assert_ne!(m, n);
    if (m + n).is_multiple_of(2) {
        return 0.0;
    }
    let (mf, nf) = (m as f64, n as f64);
    let d = mf * mf - nf * nf;
    -16.0 * mf * nf / (PI * PI * d * d)
}

/// `⟨φ_m|q²|φ_n⟩` for `m ≠ n`: `32mn / (π²(m²-n²)²)` when `m+n` is even.
pub fn p2_offdiag(m: u32, n: u32) -> f64 {
    debug_assert_ne!(m, n);
    if (m + n) % 2 == 1 {
        return 0.0;
    }
    let (mf, nf) = (m as f64, n as f64);
    let d = mf * mf - nf * nf;
    32.0 * mf * nf / (PI * PI * d * d)
}

/// Dense tables of `⟨m|q|n⟩` and `⟨m|q²|n⟩` for `1 <= m, n <= max_mode`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralTable {
    max_mode: u32,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

impl IntegralTable {
    /// Closed-form table.
    pub fn closed_form(max_mode: u32) -> Self {
        Self::from_fn(max_mode, |power, m, n| match (power, m == n) {
            (1, true) => 0.0,
            (1, false) => p1_offdiag(m, n),
            (_, true) => p2_diag(n),
            (_, false) => p2_offdiag(m, n),
        })
    }

    /// Table filled from `f(power, m, n)` with `power ∈ {1, 2}`.
    pub fn from_fn(max_mode: u32, mut f: impl FnMut(u32, u32, u32) -> f64) -> Self {
        let size = max_mode as usize;
        let mut p1 = vec![0.0; size * size];
        let mut p2 = vec![0.0; size * size];
        for m in 1..=max_mode {
            for n in 1..=max_mode {
                let k = (m as usize - 1) * size + n as usize - 1;
                p1[k] = f(1, m, n);
                p2[k] = f(2, m, n);
            }
        }
        Self { max_mode, p1, p2 }
    }

    pub fn try_from_fn<E>(max_mode: u32, mut f: impl FnMut(u32, u32, u32) -> std::result::Result<f64, E>) -> std::result::Result<Self, E> {
        let mut err = None;
        let table = Self::from_fn(max_mode, |p, m, n| match f(p, m, n) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(table),
        }
    }

    /// Closed-form table large enough for an energy-sum cutoff.
    pub fn for_cutoff(cutoff: u32) -> Self {
        Self::closed_form(max_mode(cutoff))
    }

    /// Copy with every `q²` element scaled by `1 + eps`. Only useful as a
    /// negative control.
    pub fn perturbed(&self, eps: f64) -> Self {
        let mut t = self.clone();
        t.p2.iter_mut().for_each(|x| *x *= 1.0 + eps);
        t
    }

    pub fn max_mode(&self) -> u32 {
        self.max_mode
    }

    #[inline]
    fn index(&self, m: u32, n: u32) -> usize {
        (m as usize - 1) * self.max_mode as usize + n as usize - 1
    }

    #[inline]
    pub fn p1(&self, m: u32, n: u32) -> f64 {
        self.p1[self.index(m, n)]
    }

    #[inline]
    pub fn p2(&self, m: u32, n: u32) -> f64 {
        self.p2[self.index(m, n)]
    }

    pub(crate) fn require(&self, need: u32) -> Result<()> {
        if need > self.max_mode {
            Err(Error::TableTooSmall { have: self.max_mode, need })
        } else {
            Ok(())
        }
    }
}

/// `⟨a|W|b⟩` between product states.
pub fn coupling_element(a: ModeTriple, b: ModeTriple, table: &IntegralTable) -> f64 {
    let (a, b) = (a.modes(), b.modes());
    let same = [a[0] == b[0], a[1] == b[1], a[2] == b[2]];
    let differing = same.iter().filter(|s| !**s).count();
    if differing > 2 {
        return 0.0;
    }
    let mut one_body = 0.0;
    for i in 0..3 {
        if (0..3).all(|j| j == i || same[j]) {
            one_body += table.p2(a[i], b[i]);
        }
    }
    let mut two_body = 0.0;
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (0, 2, 1)] {
        if same[k] {
            two_body += table.p1(a[i], b[i]) * table.p1(a[j], b[j]);
        }
    }
    2.0 * one_body - 2.0 * two_body
}

/// `⟨s|W|t⟩` between coefficient vectors.
pub fn salc_coupling(s: &Salc, t: &Salc, table: &IntegralTable) -> f64 {
    let mut acc = 0.0;
    for &(a, ca) in &s.coefficients {
        for &(b, cb) in &t.coefficients {
            acc += ca * cb * coupling_element(a, b, table);
        }
    }
    acc
}

/// Matrix of `H(λ) = H0 + λW` restricted to one row of one irrep.
#[derive(Debug, Clone)]
pub struct HamiltonianBlock {
    pub irrep: Irrep,
    pub row: usize,
    pub basis: Vec<Salc>,
    /// Diagonal of `H0`.
    pub h0: Vec<f64>,
    pub w: DMatrix<f64>,
}

impl HamiltonianBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn energy_sums(&self) -> Vec<u32> {
        self.basis.iter().map(|s| s.energy_sum).collect()
    }

    pub fn hamiltonian(&self, lambda: f64) -> DMatrix<f64> {
        let mut h = &self.w * lambda;
        for (i, e) in self.h0.iter().enumerate() {
            h[(i, i)] += e;
        }
        h
    }

    /// Spectral norm bound used to scale residual tolerances.
    pub fn h0_norm(&self) -> f64 {
        self.h0.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    pub fn w_norm(&self) -> f64 {
        self.w.norm()
    }

    /// Leading principal sub-block holding basis functions with
    /// `energy_sum <= cutoff`.
    pub fn truncated(&self, cutoff: u32) -> HamiltonianBlock {
        let n = self.basis.iter().take_while(|s| s.energy_sum <= cutoff).count();
        HamiltonianBlock {
            irrep: self.irrep,
            row: self.row,
            basis: self.basis[..n].to_vec(),
            h0: self.h0[..n].to_vec(),
            w: self.w.view((0, 0), (n, n)).into_owned(),
        }
    }
}

/// Assemble the block of `(irrep, row)` over `salcs`.
pub fn assemble_block(irrep: Irrep, row: usize, salcs: &[Salc], table: &IntegralTable) -> Result<HamiltonianBlock> {
    if row >= irrep.dim() {
        return Err(Error::InvalidRow { irrep, row });
    }
    let mut need = 1;
    for s in salcs {
        if s.irrep != irrep || s.row != row {
            return Err(Error::NotOrthonormal {
                irrep,
                row,
                deviation: f64::INFINITY,
            });
        }
        for (t, _) in &s.coefficients {
            need = need.max(*t.modes().iter().max().unwrap());
        }
    }
    table.require(need)?;

    let n = salcs.len();
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            if salcs[i].multiplet != salcs[j].multiplet && i != j {
                continue;
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((salcs[i].dot(&salcs[j]) - expect).abs());
        }
    }
    if deviation > 1e-10 {
        return Err(Error::NotOrthonormal { irrep, row, deviation });
    }

    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = salc_coupling(&salcs[i], &salcs[j], table);
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let h0 = salcs
        .iter()
        .map(|s| mode_energy(ModeTriple(s.multiplet)))
        .collect();
    Ok(HamiltonianBlock {
        irrep,
        row,
        basis: salcs.to_vec(),
        h0,
        w,
    })
}

/// All multiplets up to a cutoff with their SALCs.
#[derive(Debug, Clone)]
pub struct SymmetryBasis {
    pub cutoff: u32,
    pub multiplets: Vec<Multiplet>,
    pub salcs: Vec<Salc>,
}

impl SymmetryBasis {
    pub fn new(cutoff: u32) -> Result<Self> {
        let multiplets = enumerate_states(cutoff)?;
        let mut salcs = Vec::new();
        for m in &multiplets {
            salcs.extend(build_salcs(m)?);
        }
        Ok(Self {
            cutoff,
            multiplets,
            salcs,
        })
    }

    /// SALCs of one `(irrep, row)`, in canonical multiplet order then copy.
    pub fn salcs_for(&self, irrep: Irrep, row: usize) -> Vec<Salc> {
        self.salcs
            .iter()
            .filter(|s| s.irrep == irrep && s.row == row)
            .cloned()
            .collect()
    }
}

/// `(irrep, row)` pairs in output order: A1g, A2g, Eg/0, Eg/1, A1u, A2u, Eu/0, Eu/1.
pub fn row_blocks() -> Vec<(Irrep, usize)> {
    Irrep::ALL
        .iter()
        .flat_map(|&i| i.rows().map(move |r| (i, r)))
        .collect()
}

/// Every row block of the symmetry-adapted Hamiltonian up to one cutoff.
#[derive(Debug, Clone)]
pub struct BlockSet {
    pub cutoff: u32,
    pub blocks: Vec<HamiltonianBlock>,
}

impl BlockSet {
    /// Closed-form integrals, default execution.
    pub fn new(cutoff: u32) -> Result<Self> {
        Self::with_table(cutoff, &IntegralTable::for_cutoff(cutoff), Execution::default())
    }

    pub fn with_table(cutoff: u32, table: &IntegralTable, exec: Execution) -> Result<Self> {
        let basis = SymmetryBasis::new(cutoff)?;
        let blocks = exec.try_map(&row_blocks(), |&(irrep, row)| {
            assemble_block(irrep, row, &basis.salcs_for(irrep, row), table)
        })?;
        Ok(Self { cutoff, blocks })
    }

    pub fn block(&self, irrep: Irrep, row: usize) -> &HamiltonianBlock {
        self.blocks
            .iter()
            .find(|b| b.irrep == irrep && b.row == row)
            .expect("every row block is assembled")
    }

    /// One block per irrep (row 0).
    pub fn primary_blocks(&self) -> impl Iterator<Item = &HamiltonianBlock> {
        self.blocks.iter().filter(|b| b.row == 0)
    }

    /// Restrict to a smaller cutoff without reassembly.
    pub fn truncated(&self, cutoff: u32) -> BlockSet {
        BlockSet {
            cutoff,
            blocks: self.blocks.iter().map(|b| b.truncated(cutoff)).collect(),
        }
    }
}

/// Basis labels and dense matrices of one block, for dumps and snapshots.
#[derive(Debug, Clone, Serialize)]
pub struct BlockDump {
    pub irrep: Irrep,
    pub row: usize,
    pub basis: Vec<BasisLabel>,
    pub h0: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisLabel {
    pub multiplet: [u32; 3],
    pub energy_sum: u32,
    pub copy: usize,
}

impl From<&HamiltonianBlock> for BlockDump {
    fn from(b: &HamiltonianBlock) -> Self {
        BlockDump {
            irrep: b.irrep,
            row: b.row,
            basis: b
                .basis
                .iter()
                .map(|s| BasisLabel {
                    multiplet: s.multiplet,
                    energy_sum: s.energy_sum,
                    copy: s.copy,
                })
                .collect(),
            h0: b.h0.clone(),
            w: b.w.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn t(a: u32, b: u32, c: u32) -> ModeTriple {
        ModeTriple::new(a, b, c).unwrap()
    }

    #[test]
    fn diagonal_q2() {
        assert_relative_eq!(p2_diag(1), 1.0 / 3.0 - 2.0 / (PI * PI), max_relative = 1e-15);
        assert!((p2_diag(1) - 0.130691).abs() < 1e-6);
        assert!((p2_diag(2) - 0.282673).abs() < 1e-6);
        assert!((p2_diag(100_000) - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn off_diagonal_q() {
        assert_eq!(p1_offdiag(1, 3), 0.0);
        assert!((p1_offdiag(1, 2).abs() - 32.0 / (9.0 * PI * PI)).abs() < 1e-15);
        assert!((p1_offdiag(2, 3).abs() - 96.0 / (25.0 * PI * PI)).abs() < 1e-15);
        assert!((p1_offdiag(1, 2).abs() - 0.360253).abs() < 1e-6);
    }

    #[test]
    fn table_symmetry_and_selection_rules() {
        let tab = IntegralTable::closed_form(30);
        for m in 1..=30 {
            assert_eq!(tab.p1(m, m), 0.0);
            for n in 1..=30 {
                assert_eq!(tab.p1(m, n), tab.p1(n, m));
                assert_eq!(tab.p2(m, n), tab.p2(n, m));
                if (m + n) % 2 == 0 {
                    assert_eq!(tab.p1(m, n), 0.0);
                } else {
                    assert_eq!(tab.p2(m, n), 0.0);
                }
            }
        }
    }

    #[test]
    fn coupling_examples() {
        let tab = IntegralTable::closed_form(5);
        let ground = coupling_element(t(1, 1, 1), t(1, 1, 1), &tab);
        assert_relative_eq!(ground, 2.0 * (PI * PI - 6.0) / (PI * PI), max_relative = 1e-14);
        assert_relative_eq!(
            coupling_element(t(1, 1, 1), t(2, 2, 1), &tab),
            -2.0 * tab.p1(1, 2).powi(2),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            coupling_element(t(1, 1, 1), t(3, 1, 1), &tab),
            2.0 * tab.p2(1, 3),
            max_relative = 1e-14
        );
        assert_eq!(coupling_element(t(1, 1, 1), t(2, 2, 2), &tab), 0.0);
    }

    #[test]
    fn ground_block_is_one_by_one() {
        let set = BlockSet::new(3).unwrap();
        let b = set.block(Irrep::A1g, 0);
        assert_eq!(b.dim(), 1);
        assert_relative_eq!(b.h0[0], 3.0 * PI * PI / 4.0, max_relative = 1e-15);
        assert_relative_eq!(b.w[(0, 0)], 2.0 * (PI * PI - 6.0) / (PI * PI), max_relative = 1e-14);
        assert_eq!(set.block(Irrep::A1u, 0).dim(), 0);
    }

    #[test]
    fn e_rows_have_identical_blocks() {
        let set = BlockSet::new(50).unwrap();
        for irrep in [Irrep::Eg, Irrep::Eu] {
            let (b0, b1) = (set.block(irrep, 0), set.block(irrep, 1));
            assert_eq!(b0.dim(), b1.dim());
            assert_eq!(b0.h0, b1.h0);
            let scale = b0.w_norm();
            assert!((&b0.w - &b1.w).amax() <= 1e-12 * scale);
        }
    }

    #[test]
    fn w_is_symmetric_and_positive_semidefinite() {
        let set = BlockSet::new(50).unwrap();
        for b in &set.blocks {
            if b.dim() == 0 {
                continue;
            }
            assert!((&b.w - b.w.transpose()).amax() <= 1e-12 * b.w_norm());
            let min = b.w.clone().symmetric_eigenvalues().min();
            assert!(min >= -1e-10 * b.w_norm(), "{} {min}", b.irrep);
        }
    }

    #[test]
    fn cross_irrep_elements_vanish() {
        let basis = SymmetryBasis::new(27).unwrap();
        let tab = IntegralTable::for_cutoff(27);
        let mut checked = 0;
        for (i, a) in basis.salcs.iter().enumerate() {
            for b in &basis.salcs[i + 1..] {
                if (a.irrep, a.row) != (b.irrep, b.row) {
                    assert!(salc_coupling(a, b, &tab).abs() < 1e-12, "{} {} / {} {}", a.irrep, a.row, b.irrep, b.row);
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 980);
    }

    #[test]
    fn rejects_foreign_or_non_orthonormal_salcs() {
        let basis = SymmetryBasis::new(14).unwrap();
        let tab = IntegralTable::for_cutoff(14);
        let mixed = vec![basis.salcs_for(Irrep::A1g, 0)[0].clone(), basis.salcs_for(Irrep::Eu, 0)[0].clone()];
        assert!(assemble_block(Irrep::A1g, 0, &mixed, &tab).is_err());

        let mut bad = basis.salcs_for(Irrep::Eu, 0);
        bad[0].coefficients.iter_mut().for_each(|(_, c)| *c *= 1.1);
        assert!(matches!(assemble_block(Irrep::Eu, 0, &bad, &tab), Err(Error::NotOrthonormal { .. })));

        assert!(matches!(assemble_block(Irrep::A1g, 1, &[], &tab), Err(Error::InvalidRow { .. })));
        let small = IntegralTable::closed_form(2);
        assert!(matches!(
            assemble_block(Irrep::Eu, 0, &basis.salcs_for(Irrep::Eu, 0), &small),
            Err(Error::TableTooSmall { .. })
        ));
    }

    #[test]
    fn truncation_is_a_principal_sub_block() {
        let big = BlockSet::new(50).unwrap();
        let small = BlockSet::new(27).unwrap();
        for (a, b) in big.truncated(27).blocks.iter().zip(&small.blocks) {
            assert_eq!(a.dim(), b.dim());
            assert!((&a.w - &b.w).amax() < 1e-14);
        }
    }
}
