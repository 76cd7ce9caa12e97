//! First-order degenerate perturbation theory in `λ`.
//!
//! Within one irrep row, the states sharing an exact energy sum form a
//! degenerate group; their first-order slopes are the eigenvalues of `W`
//! restricted to the group. Accidental (Pythagorean) coincidences between
//! different multiplets land in the same group.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::boxbasis::energy_of_sum;
use crate::d3d::Irrep;
use crate::matelem::{BlockSet, HamiltonianBlock};
use crate::solver::symmetric_eigen;

/// One level to first order: `E ≈ e0 + slope·λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstOrderLevel {
    pub irrep: Irrep,
    /// 1-based position within the irrep, ordered by `(e0, slope)`.
    pub index: usize,
    pub energy_sum: u32,
    pub e0: f64,
    pub slope: f64,
    /// Number of basis functions of this irrep row sharing `energy_sum`.
    pub group_size: usize,
}

impl FirstOrderLevel {
    /// Label such as `2Eu`.
    pub fn label(&self) -> String {
        format!("{}{}", self.index, self.irrep)
    }
}

/// Contiguous index ranges of equal energy sums in a block.
pub fn degenerate_groups(block: &HamiltonianBlock) -> Vec<(u32, std::ops::Range<usize>)> {
    let sums = block.energy_sums();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sums.len() {
        if i == sums.len() || sums[i] != sums[start] {
            out.push((sums[start], start..i));
            start = i;
        }
    }
    out
}

fn restricted_w(block: &HamiltonianBlock, range: &std::ops::Range<usize>) -> DMatrix<f64> {
    block.w.view((range.start, range.start), (range.len(), range.len())).into_owned()
}

/// Levels of one block.
pub fn first_order_block(block: &HamiltonianBlock) -> Vec<FirstOrderLevel> {
    let mut levels = Vec::new();
    for (sum, range) in degenerate_groups(block) {
        let (slopes, _) = symmetric_eigen(restricted_w(block, &range)).expect("small symmetric eigenproblem");
        for slope in slopes {
            levels.push(FirstOrderLevel {
                irrep: block.irrep,
                index: 0,
                energy_sum: sum,
                e0: energy_of_sum(sum),
                slope,
                group_size: range.len(),
            });
        }
    }
    levels.sort_by(|a, b| a.energy_sum.cmp(&b.energy_sum).then(a.slope.total_cmp(&b.slope)));
    for (k, l) in levels.iter_mut().enumerate() {
        l.index = k + 1;
    }
    levels
}

/// First-order levels of every irrep, sorted by `(e0, slope)` overall.
pub fn first_order_table(blocks: &BlockSet) -> Vec<FirstOrderLevel> {
    let mut all: Vec<FirstOrderLevel> = blocks.primary_blocks().flat_map(first_order_block).collect();
    all.sort_by(|a, b| {
        a.energy_sum
            .cmp(&b.energy_sum)
            .then(a.slope.total_cmp(&b.slope))
            .then(a.irrep.cmp(&b.irrep))
    });
    all
}

/// A printed first-order coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub irrep: Irrep,
    pub index: usize,
    pub energy_sum: u32,
    pub slope: f64,
}

impl ClosedForm {
    pub fn label(&self) -> String {
        format!("{}{}", self.index, self.irrep)
    }
}

/// The twelve closed-form slopes for the lowest levels.
pub fn closed_form_slopes() -> [ClosedForm; 12] {
    let p2 = PI * PI;
    let p4 = p2 * p2;
    let r = 466_441f64.sqrt();
    let cf = |irrep, index, energy_sum, slope| ClosedForm {
        irrep,
        index,
        energy_sum,
        slope,
    };
    [
        cf(Irrep::A1g, 1, 3, 2.0 * (p2 - 6.0) / p2),
        cf(Irrep::A2u, 1, 6, (162.0 * p4 - 729.0 * p2 - 4096.0) / (81.0 * p4)),
        cf(Irrep::Eu, 1, 6, (162.0 * p4 - 729.0 * p2 + 2048.0) / (81.0 * p4)),
        cf(Irrep::A1g, 2, 9, 2.0 * (81.0 * p4 - 243.0 * p2 - 2048.0) / (81.0 * p4)),
        cf(Irrep::Eg, 1, 9, 2.0 * (81.0 * p4 - 243.0 * p2 + 1024.0) / (81.0 * p4)),
        cf(Irrep::A1g, 3, 11, 2.0 * (9.0 * p2 - 38.0) / (9.0 * p2)),
        cf(Irrep::Eg, 2, 11, 2.0 * (9.0 * p2 - 38.0) / (9.0 * p2)),
        cf(Irrep::A2u, 2, 12, (2.0 * p2 - 3.0) / p2),
        cf(Irrep::A2u, 3, 14, (101_250.0 * p4 - 275_625.0 * p2 - 2_772_992.0) / (50_625.0 * p4)),
        cf(Irrep::Eu, 2, 14, (101_250.0 * p4 - 275_625.0 * p2 - 2048.0 * r) / (50_625.0 * p4)),
        cf(Irrep::Eu, 3, 14, (101_250.0 * p4 - 275_625.0 * p2 + 2048.0 * r) / (50_625.0 * p4)),
        cf(Irrep::A1u, 1, 14, (101_250.0 * p4 - 275_625.0 * p2 + 2_772_992.0) / (50_625.0 * p4)),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct PtRow {
    pub level: String,
    pub e0: f64,
    pub computed: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PtReport {
    pub tolerance: f64,
    pub rows: Vec<PtRow>,
    pub pass: bool,
}

/// Relative tolerance on first-order slopes.
pub const PT_TOLERANCE: f64 = 1e-10;

/// Compare computed slopes with every closed form whose energy is covered by
/// the table. A closed form with no computed counterpart fails.
pub fn compare_to_closed_forms(table: &[FirstOrderLevel], cutoff: u32) -> PtReport {
    let mut rows = Vec::new();
    for cf in closed_form_slopes().iter().filter(|c| c.energy_sum <= cutoff) {
        let found = table
            .iter()
            .find(|l| l.irrep == cf.irrep && l.index == cf.index && l.energy_sum == cf.energy_sum);
        let (computed, err) = match found {
            Some(l) => (l.slope, ((l.slope - cf.slope) / cf.slope).abs()),
            None => (f64::NAN, f64::INFINITY),
        };
        rows.push(PtRow {
            level: cf.label(),
            e0: energy_of_sum(cf.energy_sum),
            computed,
            closed_form: cf.slope,
            relative_error: err,
            pass: err <= PT_TOLERANCE,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    PtReport {
        tolerance: PT_TOLERANCE,
        rows,
        pass,
    }
}

/// Central-difference slope of a variational level at `λ = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct RrSlope {
    pub irrep: Irrep,
    /// 1-based level index within the irrep.
    pub index: usize,
    pub step: f64,
    pub slope: f64,
}

/// `[E(h) - E(-h)] / 2h` for the `index`-th level of `irrep`.
///
/// The level at `-h` is the eigenvector with the largest overlap with the
/// level at `+h`, so levels that are degenerate at `λ = 0` keep their
/// identity through the degeneracy.
pub fn rr_slope_check(blocks: &BlockSet, irrep: Irrep, index: usize, step: f64) -> Option<RrSlope> {
    if !(1e-6..=1e-2).contains(&step) || index == 0 {
        return None;
    }
    let block = blocks.primary_blocks().find(|b| b.irrep == irrep)?;
    if index > block.dim() {
        return None;
    }
    let (vp, up) = symmetric_eigen(block.hamiltonian(step))?;
    let (vm, um) = symmetric_eigen(block.hamiltonian(-step))?;
    let k = index - 1;
    let target = up.column(k);
    let partner = (0..vm.len())
        .max_by(|&a, &b| {
            let oa = um.column(a).dot(&target).abs();
            let ob = um.column(b).dot(&target).abs();
            oa.total_cmp(&ob)
        })
        .expect("block is nonempty");
    Some(RrSlope {
        irrep,
        index,
        step,
        slope: (vp[k] - vm[partner]) / (2.0 * step),
    })
}
