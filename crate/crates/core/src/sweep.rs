//! Sweeps over the coupling strength, avoided crossings, and the scaled
//! large-`λ` behaviour `λ^{-1/2} E(λ)`.
//!
//! Level identity along a sweep is the sorted index within an irrep: levels of
//! one irrep never cross. Eigenvector overlaps between neighbouring grid
//! points are used only to flag steps that are too coarse, and to describe
//! how character moves between levels at an avoided crossing.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::d3d::Irrep;
use crate::exec::Execution;
use crate::matelem::BlockSet;
use crate::oracle::scaled_limit;
use crate::solver::{block_eigenvalues, eigensolve_block};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Geometric,
}

/// `points` values from `min` to `max` inclusive.
pub fn lambda_grid(min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Vec<f64>> {
    let bad = |msg: &str| Err(Error::InvalidGrid(msg.to_string()));
    if points == 0 {
        return bad("at least one point is required");
    }
    if !(min.is_finite() && max.is_finite()) || min < 0.0 {
        return bad("lambda bounds must be finite and non-negative");
    }
    if max < min {
        return bad("lambda max is below lambda min");
    }
    if spacing == Spacing::Geometric && min <= 0.0 {
        return bad("geometric spacing needs lambda min > 0");
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let last = (points - 1) as f64;
    let grid = (0..points)
        .map(|i| {
            if i == points - 1 {
                return max;
            }
            let t = i as f64 / last;
            match spacing {
                Spacing::Linear => min + t * (max - min),
                Spacing::Geometric => min * (max / min).powf(t),
            }
        })
        .collect();
    Ok(grid)
}

/// Geometric grid from `1e-3` to `1e3` with 60 points.
pub fn default_grid() -> Vec<f64> {
    lambda_grid(1e-3, 1e3, 60, Spacing::Geometric).expect("valid default grid")
}

/// Eigenvalue trajectories of one irrep.
#[derive(Debug, Clone, Serialize)]
pub struct IrrepCurve {
    pub irrep: Irrep,
    /// `energies[point][level]`, every eigenvalue of the block.
    pub energies: Vec<Vec<f64>>,
}

impl IrrepCurve {
    pub fn level_count(&self) -> usize {
        self.energies.first().map_or(0, |e| e.len())
    }

    /// Trajectory of the `k`-th level (0-based).
    pub fn level(&self, k: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[k]).collect()
    }
}

/// A grid step whose overlap matrix is not close to a permutation.
#[derive(Debug, Clone, Serialize)]
pub struct FlaggedStep {
    pub irrep: Irrep,
    /// Step from `lambdas[index]` to `lambdas[index + 1]`.
    pub index: usize,
    pub min_overlap: f64,
}

/// Minimum best-overlap below which a step is flagged for refinement.
pub const TRACKING_OVERLAP: f64 = 0.9;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumCurve {
    pub cutoff: u32,
    pub lambdas: Vec<f64>,
    /// Number of low levels whose eigenvectors were kept.
    pub tracked: usize,
    pub curves: Vec<IrrepCurve>,
    pub flagged: Vec<FlaggedStep>,
    /// `vectors[irrep][point]`: the first `tracked` eigenvectors as columns.
    #[serde(skip)]
    pub vectors: Vec<Vec<DMatrix<f64>>>,
}

impl SpectrumCurve {
    pub fn irrep(&self, irrep: Irrep) -> &IrrepCurve {
        self.curves.iter().find(|c| c.irrep == irrep).expect("every irrep is swept")
    }

    fn irrep_index(&self, irrep: Irrep) -> usize {
        self.curves.iter().position(|c| c.irrep == irrep).expect("every irrep is swept")
    }
}

/// Solve every irrep at every grid point. With `tracked == 0` no
/// eigenvectors are computed and no steps are flagged.
pub fn sweep(blocks: &BlockSet, grid: &[f64], tracked: usize, exec: Execution) -> Result<SpectrumCurve> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(Error::InvalidGrid("grid must be nonempty, strictly ascending and non-negative".into()));
    }
    let primary: Vec<_> = blocks.primary_blocks().collect();
    let solved = exec.try_map(grid, |&lambda| {
        primary
            .iter()
            .map(|b| {
                if tracked == 0 {
                    return Ok((block_eigenvalues(b, lambda)?, DMatrix::zeros(b.dim(), 0)));
                }
                let eig = eigensolve_block(b, lambda)?;
                let keep = tracked.min(eig.values.len());
                Ok((eig.values, eig.vectors.columns(0, keep).into_owned()))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut curves: Vec<IrrepCurve> = primary
        .iter()
        .map(|b| IrrepCurve {
            irrep: b.irrep,
            energies: Vec::with_capacity(grid.len()),
        })
        .collect();
    let mut vectors: Vec<Vec<DMatrix<f64>>> = vec![Vec::with_capacity(grid.len()); primary.len()];
    for point in solved {
        for (b, (values, vecs)) in point.into_iter().enumerate() {
            curves[b].energies.push(values);
            vectors[b].push(vecs);
        }
    }

    let mut flagged = Vec::new();
    for (b, per_point) in vectors.iter().enumerate() {
        for (i, pair) in per_point.windows(2).enumerate() {
            if pair[0].ncols() == 0 {
                continue;
            }
            let overlap = pair[0].transpose() * &pair[1];
            let min_best = (0..overlap.nrows())
                .map(|k| overlap.row(k).iter().fold(0.0f64, |m, x| m.max(x.abs())))
                .fold(f64::INFINITY, f64::min);
            if min_best < TRACKING_OVERLAP {
                flagged.push(FlaggedStep {
                    irrep: curves[b].irrep,
                    index: i,
                    min_overlap: min_best,
                });
            }
        }
    }

    Ok(SpectrumCurve {
        cutoff: blocks.cutoff,
        lambdas: grid.to_vec(),
        tracked,
        curves,
        flagged,
        vectors,
    })
}

/// Strict interior local minimum of the gap between two neighbouring levels.
#[derive(Debug, Clone, Serialize)]
pub struct AvoidedCrossing {
    pub irrep: Irrep,
    /// 1-based index of the lower level; the pair is `(lower, lower + 1)`.
    pub lower_level: usize,
    pub lambda_c: f64,
    pub min_gap: f64,
    pub cutoff: u32,
}

/// Relative `λ` tolerance of the golden-section refinement.
pub const CROSSING_LAMBDA_TOL: f64 = 1e-4;

fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a) > CROSSING_LAMBDA_TOL * 0.5 * (a + b) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Avoided crossings among the lowest `levels` levels of `irrep`, refined by
/// golden-section search on re-solved blocks.
pub fn detect_avoided_crossings(curve: &SpectrumCurve, blocks: &BlockSet, irrep: Irrep, levels: usize) -> Result<Vec<AvoidedCrossing>> {
    let ic = curve.irrep(irrep);
    let block = blocks.block(irrep, 0);
    let n = curve.lambdas.len();
    let mut out = Vec::new();
    if n < 3 {
        return Ok(out);
    }
    for k in 0..levels.min(ic.level_count()).saturating_sub(1) {
        let gaps: Vec<f64> = ic.energies.iter().map(|e| e[k + 1] - e[k]).collect();
        for i in 1..n - 1 {
            if !(gaps[i] < gaps[i - 1] && gaps[i] < gaps[i + 1]) {
                continue;
            }
            let gap_at = |lambda: f64| -> Result<f64> {
                let v = block_eigenvalues(block, lambda)?;
                Ok(v[k + 1] - v[k])
            };
            let (lambda_c, min_gap) = golden_section(curve.lambdas[i - 1], curve.lambdas[i + 1], gap_at)?;
            let (lambda_c, min_gap) = if min_gap <= gaps[i] {
                (lambda_c, min_gap)
            } else {
                (curve.lambdas[i], gaps[i])
            };
            out.push(AvoidedCrossing {
                irrep,
                lower_level: k + 1,
                lambda_c,
                min_gap,
                cutoff: curve.cutoff,
            });
        }
    }
    out.sort_by(|a, b| a.lambda_c.total_cmp(&b.lambda_c).then(a.lower_level.cmp(&b.lower_level)));
    Ok(out)
}

/// Grid with `points` extra linearly spaced values inside the bracketing
/// interval of each crossing, plus the crossing itself.
pub fn refine_grid(grid: &[f64], crossings: &[AvoidedCrossing], points: usize) -> Vec<f64> {
    let mut out = grid.to_vec();
    if points == 0 {
        return out;
    }
    for c in crossings {
        let hi = grid.iter().position(|&x| x > c.lambda_c).unwrap_or(grid.len() - 1);
        let lo = hi.saturating_sub(1);
        let (a, b) = (grid[lo], grid[hi]);
        for j in 1..=points {
            out.push(a + (b - a) * j as f64 / (points + 1) as f64);
        }
        out.push(c.lambda_c);
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    out
}

/// `λ^{-1/2} E` over the positive part of the grid.
#[derive(Debug, Clone, Serialize)]
pub struct ScaledCurve {
    pub lambdas: Vec<f64>,
    /// `(irrep, values[point][level])`
    pub curves: Vec<(Irrep, Vec<Vec<f64>>)>,
    pub reference_lines: [f64; 4],
}

/// The horizontal limits `2√3 (n + 1)` for `n = 0..4`.
pub fn reference_lines() -> [f64; 4] {
    [scaled_limit(0, 0), scaled_limit(1, 0), scaled_limit(2, 0), scaled_limit(3, 0)]
}

pub fn scaled_curves(curve: &SpectrumCurve) -> ScaledCurve {
    let keep: Vec<usize> = (0..curve.lambdas.len()).filter(|&i| curve.lambdas[i] > 0.0).collect();
    ScaledCurve {
        lambdas: keep.iter().map(|&i| curve.lambdas[i]).collect(),
        curves: curve
            .curves
            .iter()
            .map(|c| {
                let vals = keep
                    .iter()
                    .map(|&i| {
                        let s = curve.lambdas[i].sqrt();
                        c.energies[i].iter().map(|e| e / s).collect()
                    })
                    .collect();
                (c.irrep, vals)
            })
            .collect(),
        reference_lines: reference_lines(),
    }
}

/// A large-`λ` limit of the relative motion and the lowest levels that
/// connect to it.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticTarget {
    /// Transverse oscillator quanta; only `n1 + n2` enters the limit.
    pub quanta: (u32, u32),
    pub limit: f64,
    /// `(irrep, 1-based level index)`
    pub levels: Vec<(Irrep, usize)>,
}

pub fn asymptotic_targets() -> Vec<AsymptoticTarget> {
    let target = |n1, n2, levels: Vec<(Irrep, usize)>| AsymptoticTarget {
        quanta: (n1, n2),
        limit: scaled_limit(n1, n2),
        levels,
    };
    vec![
        target(0, 0, vec![(Irrep::A1g, 1), (Irrep::A2u, 1)]),
        target(1, 0, vec![(Irrep::Eu, 1), (Irrep::Eg, 1)]),
        target(3, 0, vec![(Irrep::A2g, 1), (Irrep::A1u, 1)]),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelTail {
    pub irrep: Irrep,
    pub index: usize,
    pub final_scaled: f64,
    pub tail_nonincreasing: bool,
    pub above_limit: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetCheck {
    pub limit: f64,
    pub quanta: (u32, u32),
    pub levels: Vec<LevelTail>,
    /// Scaled gap between the two connected levels over the tail.
    pub tail_gaps: Vec<f64>,
    pub gap_shrinking: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub cutoff: u32,
    pub lambda_max: f64,
    pub tail_start: f64,
    pub targets: Vec<TargetCheck>,
    pub pass: bool,
}

/// Tail-third behaviour of the levels in [`asymptotic_targets`].
pub fn check_asymptotics(curve: &SpectrumCurve) -> AsymptoticReport {
    let scaled = scaled_curves(curve);
    let n = scaled.lambdas.len();
    let tail = (2 * n) / 3;
    let mut targets = Vec::new();
    for t in asymptotic_targets() {
        let mut levels = Vec::new();
        let mut tails: Vec<Vec<f64>> = Vec::new();
        for &(irrep, index) in &t.levels {
            let (_, vals) = scaled.curves.iter().find(|(i, _)| *i == irrep).expect("irrep present");
            let series: Vec<f64> = vals[tail..].iter().map(|v| v.get(index - 1).copied().unwrap_or(f64::NAN)).collect();
            let last = *series.last().unwrap_or(&f64::NAN);
            levels.push(LevelTail {
                irrep,
                index,
                final_scaled: last,
                tail_nonincreasing: !series.is_empty() && series.windows(2).all(|w| w[1] <= w[0]),
                above_limit: last > t.limit,
            });
            tails.push(series);
        }
        let tail_gaps: Vec<f64> = tails[0].iter().zip(&tails[1]).map(|(a, b)| (a - b).abs()).collect();
        let gap_shrinking = !tail_gaps.is_empty() && tail_gaps.windows(2).all(|w| w[1] < w[0]);
        targets.push(TargetCheck {
            limit: t.limit,
            quanta: t.quanta,
            levels,
            tail_gaps,
            gap_shrinking,
        });
    }
    let pass = targets
        .iter()
        .all(|t| t.gap_shrinking && t.levels.iter().all(|l| l.tail_nonincreasing && l.above_limit));
    AsymptoticReport {
        cutoff: curve.cutoff,
        lambda_max: *curve.lambdas.last().unwrap_or(&0.0),
        tail_start: scaled.lambdas.get(tail).copied().unwrap_or(f64::NAN),
        targets,
        pass,
    }
}

/// How the second `Eg` pair relates to the third and fourth `A1g` levels
/// on either side of their avoided crossing.
#[derive(Debug, Clone, Serialize)]
pub struct AssociationReport {
    pub lambda_c: f64,
    /// `(λ, |E_2Eg - E_3A1g|, |E_2Eg - E_4A1g|)` for grid points with `0 < λ < λ_c`.
    pub before: Vec<(f64, f64, f64)>,
    /// Same for grid points with `λ > λ_c`.
    pub after: Vec<(f64, f64, f64)>,
    /// `2Eg` is closer to `3A1g` at every point before `λ_c`.
    pub close_to_third_before: bool,
    /// `2Eg` is closer to `4A1g` at every point after `λ_c`.
    pub close_to_fourth_after: bool,
    /// `|⟨3A1g(λ_before)|4A1g(λ_after)⟩|` across the crossing, when the
    /// eigenvectors were kept.
    pub exchange_overlap: Option<f64>,
    pub pass: bool,
}

pub fn track_level_association(curve: &SpectrumCurve, lambda_c: f64) -> AssociationReport {
    let a1g = curve.irrep(Irrep::A1g);
    let eg = curve.irrep(Irrep::Eg);
    let mut before = Vec::new();
    let mut after = Vec::new();
    for (i, &lambda) in curve.lambdas.iter().enumerate() {
        if lambda <= 0.0 || a1g.energies[i].len() < 4 || eg.energies[i].len() < 2 {
            continue;
        }
        let e2eg = eg.energies[i][1];
        let row = (lambda, (e2eg - a1g.energies[i][2]).abs(), (e2eg - a1g.energies[i][3]).abs());
        if lambda < lambda_c {
            before.push(row);
        } else if lambda > lambda_c {
            after.push(row);
        }
    }
    let close_to_third_before = !before.is_empty() && before.iter().all(|r| r.1 < r.2);
    let close_to_fourth_after = !after.is_empty() && after.iter().all(|r| r.2 < r.1);

    let exchange_overlap = {
        let a = curve.irrep_index(Irrep::A1g);
        let ib = curve.lambdas.iter().rposition(|&l| l < lambda_c);
        let ia = curve.lambdas.iter().position(|&l| l > lambda_c);
        match (ib, ia) {
            (Some(ib), Some(ia)) if curve.tracked >= 4 => {
                let vb = &curve.vectors[a][ib];
                let va = &curve.vectors[a][ia];
                (vb.ncols() >= 4 && va.ncols() >= 4).then(|| vb.column(2).dot(&va.column(3)).abs())
            }
            _ => None,
        }
    };

    AssociationReport {
        lambda_c,
        pass: close_to_third_before && close_to_fourth_after,
        before,
        after,
        close_to_third_before,
        close_to_fourth_after,
        exchange_overlap,
    }
}
