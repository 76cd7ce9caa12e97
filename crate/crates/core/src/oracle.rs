//! Independent reference computations.
//!
//! [`full_spectrum`] diagonalizes `H` over every product state below a cutoff
//! with no symmetry adaptation. Its coupling is expanded pairwise as
//! `Σ_{i<j} (q_i² + q_j² - 2 q_i q_j)` and shares nothing with
//! [`crate::matelem`] beyond the raw one-body integrals, which can themselves
//! come from [`quadrature_table`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::boxbasis::{enumerate_states, max_mode, product_states};
use crate::d3d::expected_irreps;
use crate::matelem::{BlockSet, IntegralTable};
use crate::solver::symmetric_eigenvalues;
use crate::{check_lambda, Error, Result};

/// Largest product basis diagonalized densely.
pub const MAX_FULL_STATES: usize = 1500;

// 15-point Kronrod nodes on [0, 1]; odd entries (1, 3, 5, 7) are the 7-point
// Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature: bisect the interval with the
/// largest error estimate until the summed estimate drops below `tol`.
pub fn adaptive_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_intervals: usize) -> std::result::Result<f64, f64> {
    let (v, e) = gauss_kronrod_15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol {
            return Ok(parts.iter().map(|p| p.2).sum());
        }
        if parts.len() >= max_intervals {
            return Err(err);
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (vl, el) = gauss_kronrod_15(&f, lo, mid);
        let (vr, er) = gauss_kronrod_15(&f, mid, hi);
        parts.push((lo, mid, vl, el));
        parts.push((mid, hi, vr, er));
    }
}

/// Integrand kinds of the one-body table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    Q,
    Q2,
}

impl Moment {
    fn power(self) -> u32 {
        match self {
            Moment::Q => 1,
            Moment::Q2 => 2,
        }
    }
}

/// Absolute error target for [`quadrature_integral`].
pub const QUADRATURE_TOL: f64 = 1e-13;

/// `∫_{-1}^{1} φ_m(q) q^p φ_n(q) dq` by adaptive quadrature, `m, n <= 200`.
pub fn quadrature_integral(kind: Moment, m: u32, n: u32) -> Result<f64> {
    let power = kind.power();
    if m == 0 || n == 0 || m > 200 || n > 200 {
        return Err(Error::Quadrature {
            power,
            m,
            n,
            estimate: f64::NAN,
        });
    }
    let (km, kn) = (m as f64 * PI / 2.0, n as f64 * PI / 2.0);
    let f = |q: f64| (km * (q + 1.0)).sin() * q.powi(power as i32) * (kn * (q + 1.0)).sin();
    // Start from panels about one half-wavelength wide; the adaptive loop
    // takes it from there.
    let panels = (m.max(n) as usize).max(1);
    let mut total = 0.0;
    for k in 0..panels {
        let a = -1.0 + 2.0 * k as f64 / panels as f64;
        let b = -1.0 + 2.0 * (k + 1) as f64 / panels as f64;
        total += adaptive_quadrature(f, a, b, QUADRATURE_TOL / panels as f64, 4096).map_err(|estimate| Error::Quadrature {
            power,
            m,
            n,
            estimate,
        })?;
    }
    Ok(total)
}

/// One-body tables from quadrature only.
pub fn quadrature_table(max_mode: u32) -> Result<IntegralTable> {
    IntegralTable::try_from_fn(max_mode, |p, m, n| {
        quadrature_integral(if p == 1 { Moment::Q } else { Moment::Q2 }, m, n)
    })
}

/// Largest `|closed form - quadrature|` over `m, n <= max_mode`.
pub fn integral_deviation(max_mode: u32) -> Result<f64> {
    let quad = quadrature_table(max_mode)?;
    let closed = IntegralTable::closed_form(max_mode);
    let mut worst: f64 = 0.0;
    for m in 1..=max_mode {
        for n in 1..=max_mode {
            worst = worst
                .max((quad.p1(m, n) - closed.p1(m, n)).abs())
                .max((quad.p2(m, n) - closed.p2(m, n)).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct FullBasisSpectrum {
    pub cutoff: u32,
    pub lambda: f64,
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
}

fn pair_coupling(a: [u32; 3], b: [u32; 3], table: &IntegralTable) -> f64 {
    let d = |i: usize| if a[i] == b[i] { 1.0 } else { 0.0 };
    let mut w = 0.0;
    for (i, j, k) in [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)] {
        if a[k] != b[k] {
            continue;
        }
        // (q_i - q_j)² with the third coordinate a spectator
        w += table.p2(a[i], b[i]) * d(j) + d(i) * table.p2(a[j], b[j]) - 2.0 * table.p1(a[i], b[i]) * table.p1(a[j], b[j]);
    }
    w
}

/// Dense `H` over every product state with energy sum `<= cutoff`.
pub fn full_hamiltonian(lambda: f64, cutoff: u32, table: &IntegralTable) -> Result<DMatrix<f64>> {
    check_lambda(lambda)?;
    let states = product_states(&enumerate_states(cutoff)?);
    if states.len() > MAX_FULL_STATES {
        return Err(Error::BasisTooLarge {
            states: states.len(),
            limit: MAX_FULL_STATES,
        });
    }
    if max_mode(cutoff) > table.max_mode() {
        return Err(Error::TableTooSmall {
            have: table.max_mode(),
            need: max_mode(cutoff),
        });
    }
    let n = states.len();
    let mut h = DMatrix::zeros(n, n);
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            h[(i, j)] = lambda * pair_coupling(a.modes(), b.modes(), table);
        }
        h[(i, i)] += PI * PI / 4.0 * a.energy_sum() as f64;
    }
    Ok(h)
}

pub fn full_spectrum(lambda: f64, cutoff: u32, table: &IntegralTable) -> Result<FullBasisSpectrum> {
    let h = full_hamiltonian(lambda, cutoff, table)?;
    let dimension = h.nrows();
    Ok(FullBasisSpectrum {
        cutoff,
        lambda,
        dimension,
        eigenvalues: symmetric_eigenvalues(h),
    })
}

/// Largest elementwise gap between the sorted full-basis spectrum and the
/// union of block spectra (E rows counted twice). `None` if the counts differ.
pub fn spectrum_equality_gap(full: &FullBasisSpectrum, blocks: &BlockSet) -> Result<Option<f64>> {
    let slice = blocks.solve(full.lambda, crate::Execution::default())?;
    let merged = slice.merged();
    if merged.len() != full.eigenvalues.len() {
        return Ok(None);
    }
    Ok(Some(
        merged
            .iter()
            .zip(&full.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
    ))
}

/// Degeneracy of each energy sum: `(product-state count, Σ dim over the
/// parity-table irreps)`.
pub fn multiplicity_census(cutoff: u32) -> Result<BTreeMap<u32, (usize, usize)>> {
    let mut out: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for m in enumerate_states(cutoff)? {
        let entry = out.entry(m.energy_sum()).or_default();
        entry.0 += m.orbit_size();
        entry.1 += expected_irreps(m.signature()).iter().map(|i| i.dim()).sum::<usize>();
    }
    Ok(out)
}

/// Transverse energy `2√(1+3λ)(n1+n2+1)` of the separable harmonic trap.
pub fn separable_harmonic_reference(lambda: f64, n1: u32, n2: u32) -> f64 {
    2.0 * (1.0 + 3.0 * lambda).sqrt() * (n1 + n2 + 1) as f64
}

/// `lim λ^{-1/2} E = 2√3 (n1 + n2 + 1)`.
pub fn scaled_limit(n1: u32, n2: u32) -> f64 {
    2.0 * 3f64.sqrt() * (n1 + n2 + 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_22() {
        let wsum: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((wsum - 2.0).abs() < 1e-15);
        let gsum: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((gsum - 2.0).abs() < 1e-15);
        for p in 0..=22 {
            let (v, _) = gauss_kronrod_15(&|x: f64| x.powi(p), -1.0, 1.0);
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((v - exact).abs() < 1e-14, "degree {p}");
        }
        for p in 0..=13 {
            // 7-point Gauss part alone
            let mut g = WG[3] * 0f64.powi(p);
            for j in [1usize, 3, 5] {
                let x = XGK[j];
                g += WG[j / 2] * (x.powi(p) + (-x).powi(p));
            }
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((g - exact).abs() < 1e-14, "gauss degree {p}");
        }
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let v = adaptive_quadrature(|x: f64| (40.0 * x).cos(), 0.0, 3.0, 1e-13, 4096).unwrap();
        assert!((v - (120f64).sin() / 40.0).abs() < 1e-13);
    }

    #[test]
    fn quadrature_examples() {
        assert!(quadrature_integral(Moment::Q, 1, 1).unwrap().abs() < 1e-14);
        let q2 = quadrature_integral(Moment::Q2, 1, 1).unwrap();
        assert!((q2 - (1.0 / 3.0 - 2.0 / (PI * PI))).abs() < 1e-13);
        let q = quadrature_integral(Moment::Q, 1, 2).unwrap();
        assert!((q + 32.0 / (9.0 * PI * PI)).abs() < 1e-13);
        assert!(quadrature_integral(Moment::Q, 0, 2).is_err());
        assert!(quadrature_integral(Moment::Q, 201, 2).is_err());
    }

    #[test]
    fn modes_are_orthonormal() {
        for m in 1..=8u32 {
            for n in 1..=8u32 {
                let (km, kn) = (m as f64 * PI / 2.0, n as f64 * PI / 2.0);
                let v = adaptive_quadrature(|q| (km * (q + 1.0)).sin() * (kn * (q + 1.0)).sin(), -1.0, 1.0, 1e-14, 4096).unwrap();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn full_spectrum_at_zero_coupling() {
        let tab = IntegralTable::for_cutoff(14);
        let s = full_spectrum(0.0, 14, &tab).unwrap();
        assert_eq!(s.dimension, 1 + 3 + 3 + 3 + 1 + 6);
        let mut expect: Vec<f64> = product_states(&enumerate_states(14).unwrap())
            .iter()
            .map(|t| PI * PI / 4.0 * t.energy_sum() as f64)
            .collect();
        expect.sort_by(f64::total_cmp);
        assert_eq!(s.eigenvalues, expect);
    }

    #[test]
    fn size_guard() {
        let tab = IntegralTable::for_cutoff(400);
        assert!(matches!(full_spectrum(0.0, 400, &tab), Err(Error::BasisTooLarge { .. })));
    }

    #[test]
    fn census_matches_for_small_cutoff() {
        for (sum, (states, dims)) in multiplicity_census(60).unwrap() {
            assert_eq!(states, dims, "energy sum {sum}");
        }
    }

    #[test]
    fn harmonic_reference() {
        assert_eq!(separable_harmonic_reference(0.0, 0, 0), 2.0);
        assert_eq!(separable_harmonic_reference(0.0, 1, 2), 8.0);
        let big = 1e12;
        assert!((separable_harmonic_reference(big, 0, 0) / big.sqrt() - 2.0 * 3f64.sqrt()).abs() < 1e-5);
        assert!((scaled_limit(1, 0) - 4.0 * 3f64.sqrt()).abs() < 1e-15);
    }
}
