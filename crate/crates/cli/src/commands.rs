use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;
use tribox::boxbasis::max_mode;
use tribox::matelem::{BlockDump, BlockSet, SymmetryBasis};
use tribox::oracle::{full_spectrum, integral_deviation, multiplicity_census, quadrature_table, spectrum_equality_gap};
use tribox::perturb::{compare_to_closed_forms, first_order_table};
use tribox::sweep::{check_asymptotics, detect_avoided_crossings, refine_grid, sweep, AvoidedCrossing, FlaggedStep};
use tribox::{Execution, IntegralTable, Irrep};

use crate::config::{check_cutoff, parse_irreps, Defaults, FileConfig, Overrides, RunConfig};
use crate::output::{curve_csv, fmt_float, to_json, write_file};
use crate::{Cli, Command, GridArgs, UsageError};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Cutoff used by `asymptote` unless overridden; large enough for the
/// scaled curves to settle by λ = 1e3.
pub const ASYMPTOTE_CUTOFF: u32 = 400;

pub fn is_usage(e: &anyhow::Error) -> bool {
    if e.downcast_ref::<UsageError>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<tribox::Error>(),
        Some(
            tribox::Error::InvalidCutoff(_)
                | tribox::Error::InvalidTriple(_)
                | tribox::Error::InvalidLambda(_)
                | tribox::Error::InvalidRow { .. }
                | tribox::Error::InvalidGrid(_)
                | tribox::Error::BasisTooLarge { .. }
        )
    )
}

/// `Ok(false)` means the command ran but a check failed.
pub fn run(cli: Cli) -> Result<bool> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Spectrum {
            grid,
            irreps,
            levels,
            refine,
            out,
        } => {
            let flags = Overrides {
                irreps,
                levels,
                refine,
                out,
                ..grid_overrides(grid)
            };
            let cfg = RunConfig::resolve(flags, file, Defaults { cutoff: 27, out: "out" })?;
            spectrum(&cfg, exec)
        }
        Command::Pt {
            cutoff,
            json,
            perturb_integrals,
        } => pt(check_cutoff(cutoff.or(file.cutoff).unwrap_or(27))?, json, perturb_integrals, exec),
        Command::Basis { cutoff, irreps } => {
            let cutoff = check_cutoff(cutoff.or(file.cutoff).unwrap_or(27))?;
            let irreps = match irreps.or(file.irreps) {
                Some(l) => parse_irreps(&l)?,
                None => Irrep::ALL.to_vec(),
            };
            basis(cutoff, &irreps)
        }
        Command::DumpBlock { cutoff, irrep, row } => {
            let cutoff = check_cutoff(cutoff.or(file.cutoff).unwrap_or(27))?;
            let irrep = parse_irreps(&[irrep])?[0];
            dump_block(cutoff, irrep, row, exec)
        }
        Command::Verify {
            cutoff,
            lambda,
            quadrature_only,
        } => verify(cutoff.map(check_cutoff).transpose()?, lambda, quadrature_only),
        Command::Asymptote { grid, json } => {
            let cfg = RunConfig::resolve(
                grid_overrides(grid),
                file,
                Defaults {
                    cutoff: ASYMPTOTE_CUTOFF,
                    out: ".",
                },
            )?;
            asymptote(&cfg, json, exec)
        }
    }
}

fn grid_overrides(g: GridArgs) -> Overrides {
    Overrides {
        cutoff: g.cutoff,
        lmin: g.lmin,
        lmax: g.lmax,
        points: g.points,
        spacing: g.spacing,
        ..Default::default()
    }
}

#[derive(Serialize)]
struct GridSummary {
    min: f64,
    max: f64,
    points: usize,
    spacing: tribox::sweep::Spacing,
    refine: usize,
    lambda_count: usize,
}

#[derive(Serialize)]
struct SpectrumSummary<'a> {
    version: &'static str,
    cutoff: u32,
    grid: GridSummary,
    levels: usize,
    irreps: &'a [Irrep],
    files: Vec<String>,
    crossings: Vec<AvoidedCrossing>,
    flagged_steps: Vec<FlaggedStep>,
}

fn spectrum(cfg: &RunConfig, exec: Execution) -> Result<bool> {
    let blocks = BlockSet::new(cfg.cutoff)?;
    let base = cfg.grid.values()?;
    let curve = sweep(&blocks, &base, cfg.levels, exec)?;
    let mut crossings = Vec::new();
    for &irrep in &cfg.irreps {
        crossings.extend(detect_avoided_crossings(&curve, &blocks, irrep, cfg.levels)?);
    }
    crossings.sort_by(|a, b| a.irrep.cmp(&b.irrep).then(a.lower_level.cmp(&b.lower_level)).then(a.lambda_c.total_cmp(&b.lambda_c)));
    let grid = refine_grid(&base, &crossings, cfg.refine);
    let curve = if grid.len() == base.len() { curve } else { sweep(&blocks, &grid, cfg.levels, exec)? };

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut files = Vec::new();
    for &irrep in &cfg.irreps {
        let ic = curve.irrep(irrep);
        let name = format!("{irrep}.csv");
        let k = cfg.levels.min(ic.level_count());
        write_file(&cfg.out.join(&name), &curve_csv(&curve.lambdas, &ic.energies, k))?;
        files.push(name);
    }
    let summary = SpectrumSummary {
        version: VERSION,
        cutoff: cfg.cutoff,
        grid: GridSummary {
            min: cfg.grid.min,
            max: cfg.grid.max,
            points: cfg.grid.points,
            spacing: cfg.grid.spacing,
            refine: cfg.refine,
            lambda_count: curve.lambdas.len(),
        },
        levels: cfg.levels,
        irreps: &cfg.irreps,
        files,
        crossings,
        flagged_steps: curve.flagged.iter().filter(|f| cfg.irreps.contains(&f.irrep)).cloned().collect(),
    };
    write_file(&cfg.out.join("summary.json"), &to_json(&summary)?)?;
    Ok(true)
}

fn pt(cutoff: u32, json: bool, perturb: Option<f64>, exec: Execution) -> Result<bool> {
    let mut table = IntegralTable::for_cutoff(cutoff);
    if let Some(eps) = perturb {
        table = table.perturbed(eps);
    }
    let blocks = BlockSet::with_table(cutoff, &table, exec)?;
    let report = compare_to_closed_forms(&first_order_table(&blocks), cutoff);
    if json {
        print!("{}", to_json(&report)?);
    } else {
        println!("level,E0,computed,closed_form,relative_error,status");
        for r in &report.rows {
            println!(
                "{},{},{},{},{},{}",
                r.level,
                fmt_float(r.e0),
                fmt_float(r.computed),
                fmt_float(r.closed_form),
                fmt_float(r.relative_error),
                if r.pass { "pass" } else { "FAIL" }
            );
        }
    }
    Ok(report.pass)
}

fn basis(cutoff: u32, irreps: &[Irrep]) -> Result<bool> {
    let b = SymmetryBasis::new(cutoff)?;
    let salcs: Vec<_> = b.salcs.iter().filter(|s| irreps.contains(&s.irrep)).collect();
    print!("{}", to_json(&salcs)?);
    Ok(true)
}

fn dump_block(cutoff: u32, irrep: Irrep, row: usize, exec: Execution) -> Result<bool> {
    if row >= irrep.dim() {
        return Err(UsageError(format!("{irrep} has no row {row}")).into());
    }
    let blocks = BlockSet::with_table(cutoff, &IntegralTable::for_cutoff(cutoff), exec)?;
    print!("{}", to_json(&BlockDump::from(blocks.block(irrep, row)))?);
    Ok(true)
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    version: &'static str,
    checks: Vec<Check>,
    pass: bool,
}

const INTEGRAL_TOL: f64 = 1e-12;
const SPECTRUM_TOL: f64 = 1e-8;

fn equality_check(cutoff: u32, lambda: f64) -> Result<Check> {
    let table = quadrature_table(max_mode(cutoff))?;
    let full = full_spectrum(lambda, cutoff, &table)?;
    let blocks = BlockSet::new(cutoff)?;
    let gap = spectrum_equality_gap(&full, &blocks)?.unwrap_or(f64::INFINITY);
    Ok(Check {
        name: format!("spectrum_equality cutoff={cutoff} lambda={lambda}"),
        value: gap,
        tolerance: SPECTRUM_TOL,
        pass: gap <= SPECTRUM_TOL,
    })
}

fn verify(cutoff: Option<u32>, lambda: Option<f64>, quadrature_only: bool) -> Result<bool> {
    let mut checks = Vec::new();
    if let (Some(c), Some(l)) = (cutoff, lambda) {
        checks.push(equality_check(c, l)?);
    } else {
        let dev = integral_deviation(50)?;
        checks.push(Check {
            name: "integrals m,n<=50".into(),
            value: dev,
            tolerance: INTEGRAL_TOL,
            pass: dev < INTEGRAL_TOL,
        });
        if !quadrature_only {
            let census = multiplicity_census(27)?;
            let mismatched = census.values().filter(|(states, dims)| states != dims).count();
            checks.push(Check {
                name: "degeneracy census cutoff=27".into(),
                value: mismatched as f64,
                tolerance: 0.0,
                pass: mismatched == 0,
            });
            for c in [14, 27] {
                for l in [0.0, 0.1, 1.0, 10.0] {
                    checks.push(equality_check(c, l)?);
                }
            }
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    print!(
        "{}",
        to_json(&VerifyReport {
            version: VERSION,
            checks,
            pass
        })?
    );
    Ok(pass)
}

fn asymptote(cfg: &RunConfig, json: bool, exec: Execution) -> Result<bool> {
    let blocks = BlockSet::new(cfg.cutoff)?;
    let curve = sweep(&blocks, &cfg.grid.values()?, 0, exec)?;
    let report = check_asymptotics(&curve);
    if json {
        print!("{}", to_json(&report)?);
    } else {
        println!("cutoff {} lambda_max {} tail_start {}", report.cutoff, fmt_float(report.lambda_max), fmt_float(report.tail_start));
        for t in &report.targets {
            for l in &t.levels {
                println!(
                    "{}{} final_scaled {} limit {} tail_nonincreasing {} above_limit {}",
                    l.index,
                    l.irrep,
                    fmt_float(l.final_scaled),
                    fmt_float(t.limit),
                    l.tail_nonincreasing,
                    l.above_limit
                );
            }
            println!("  pair gap shrinking {}", t.gap_shrinking);
        }
        println!("{}", if report.pass { "pass" } else { "FAIL" });
    }
    Ok(report.pass)
}
