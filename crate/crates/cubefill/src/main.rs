use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use cubefill::bounds::{
    bad_example_bound, ellipse_bound, gromov_bound, hopf_composition, iso_formula,
    kdilation_bound, EllipseInvariant, Rat,
};
use cubefill::chain::{Chain, DoubleGeometry, RectGeometry, Space};
use cubefill::constructions::{blueprint_fibers, build_linked_map};
use cubefill::experiment::{
    parse_rat, run_construction_sweep, run_iso_experiment, IsoConfig, SweepConfig,
};
use cubefill::filler::fill_double;
use cubefill::generators::{equator, linked_pair, random_cycle, EquatorKind};
use cubefill::oracle::{linking_number, min_filling, LpBudget, SolveMode};
use cubefill::Error;

/// Workbench for discrete isoperimetry on doubled rectangles: constructive
/// fillings with certified bounds, LP/ILP filling oracles, linking numbers,
/// linked-tube constructions, and bound-formula evaluators.
#[derive(Parser)]
#[command(name = "cubefill", version)]
struct Cli {
    /// optional key=value file mirroring the flags; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fill a cycle on the double of a rectangle and print the certificate
    Fill {
        /// grid side lengths, e.g. 2,4,8
        #[arg(long)]
        axes: Option<String>,
        /// cycle dimension
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// cells in the random source chain
        #[arg(long)]
        density: Option<usize>,
        /// read the cycle from a chain JSON file instead of sampling
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal filling volume by linear programming (or exact integral mode)
    Lp {
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        density: Option<usize>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// lp | ilp
        #[arg(long)]
        mode: Option<String>,
        /// boundary-matrix nonzero budget
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linking number of the canonical linked pair on a grid
    Link {
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        k1: Option<usize>,
        #[arg(long)]
        k2: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit an equator cycle as chain JSON
    Equator {
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        /// smallest | largest
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a linked-tube map blueprint
    Construct {
        /// physical axes E_0..E_n, e.g. 1,2,4,8
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        k1: Option<usize>,
        /// Lipschitz budget L
        #[arg(long)]
        lip: Option<String>,
        #[arg(long)]
        c0: Option<String>,
        /// also materialize this many fiber copies per tube and cross-check
        #[arg(long)]
        copies: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a closed-form bound
    Bounds {
        /// gromov | ellipse | iso | kdilation | bad-example | hopf-composition
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        eprime: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        k1: Option<usize>,
        #[arg(long)]
        lip: Option<String>,
        #[arg(long)]
        c0: Option<String>,
        #[arg(long)]
        iso: Option<String>,
        #[arg(long)]
        vol: Option<String>,
        /// one or two fiber areas, comma separated
        #[arg(long)]
        areas: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        degree: Option<i64>,
        #[arg(long = "big-a")]
        big_a: Option<String>,
        #[arg(long)]
        w: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sandwich the isoperimetric ratio over sampled cycles
    IsoExperiment {
        /// physical axes E_1..E_n
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// grid cells per physical unit
        #[arg(long)]
        resolution: Option<String>,
        #[arg(long)]
        density: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        /// true | false
        #[arg(long)]
        equators: Option<bool>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// json | csv (stdout format)
        #[arg(long)]
        format: Option<String>,
    },
    /// Sweep blueprint invariants over a list of Lipschitz budgets
    Sweep {
        /// physical axes E_0..E_n
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        k1: Option<usize>,
        /// comma-separated Lipschitz values
        #[arg(long)]
        lip: Option<String>,
        #[arg(long)]
        c0: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
    },
}

struct FileCfg(HashMap<String, String>);

impl FileCfg {
    fn load(path: &Option<PathBuf>) -> Result<FileCfg, Error> {
        let mut map = HashMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::InvalidInput(format!("config line without '=': {line:?}"))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(FileCfg(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::InvalidInput(format!("config value {raw:?} for key {key:?} is malformed"))
            }),
        }
    }
}

fn pick<T>(cli: Option<T>, file: Option<T>) -> Option<T> {
    cli.or(file)
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::InvalidInput(format!("missing required value --{flag} (or config key {flag})")))
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse {t:?} as a side length")))
        })
        .collect()
}

fn parse_rat_list(s: &str) -> Result<Vec<Rat>, Error> {
    s.split(',').map(parse_rat).collect()
}

fn emit(value: &str, out: &Option<PathBuf>) -> Result<(), Error> {
    if let Some(p) = out {
        std::fs::write(p, value)?;
    }
    use std::io::Write;
    // ignore a closed stdout (e.g. piped into head)
    let _ = writeln!(std::io::stdout(), "{}", value.trim_end());
    Ok(())
}

fn load_or_sample_cycle(
    input: &Option<PathBuf>,
    axes: Option<String>,
    k: Option<usize>,
    seed: u64,
    density: Option<usize>,
) -> Result<Chain, Error> {
    if let Some(path) = input {
        let text = std::fs::read_to_string(path)?;
        return Chain::from_json(&serde_json::from_str(&text)?);
    }
    let axes = parse_u32_list(&need(axes, "axes")?)?;
    let k = need(k, "k")?;
    let n = axes.len();
    let g = Space::Double(DoubleGeometry::new(RectGeometry::new(axes)?));
    let density = density.unwrap_or(4 * n);
    Ok(random_cycle(&g, k, seed, density))
}

fn run(cli: Cli) -> Result<(), Error> {
    let fc = FileCfg::load(&cli.config)?;
    match cli.cmd {
        Cmd::Fill { axes, k, seed, density, input, out } => {
            let axes = pick(axes, fc.get("axes")?);
            let k = pick(k, fc.get("k")?);
            let seed = pick(seed, fc.get("seed")?).unwrap_or(0);
            let density = pick(density, fc.get("density")?);
            let z = load_or_sample_cycle(&input, axes, k, seed, density)?;
            let cert = fill_double(&z)?;
            let report = serde_json::json!({
                "seed": seed,
                "cycle_mass": z.mass(),
                "certificate": cert.to_json(),
            });
            emit(&format!("{:#}\n", report), &out)
        }
        Cmd::Lp { axes, k, seed, density, input, mode, budget, out } => {
            let axes = pick(axes, fc.get("axes")?);
            let k = pick(k, fc.get("k")?);
            let seed = pick(seed, fc.get("seed")?).unwrap_or(0);
            let density = pick(density, fc.get("density")?);
            let mode_s: String = pick(mode, fc.get("mode")?).unwrap_or_else(|| "lp".into());
            let mode = match mode_s.as_str() {
                "lp" => SolveMode::Lp,
                "ilp" => SolveMode::Ilp,
                other => return Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
            };
            let mut lp_budget = LpBudget::default();
            if let Some(b) = pick(budget, fc.get("budget")?) {
                lp_budget.max_nonzeros = b;
            }
            let z = load_or_sample_cycle(&input, axes, k, seed, density)?;
            let sol = min_filling(&z, mode, &lp_budget)?;
            let report = serde_json::json!({
                "mode": mode_s,
                "seed": seed,
                "cycle_mass": z.mass(),
                "value": sol.value,
                "witness_cells": sol.witness.len(),
            });
            emit(&format!("{:#}\n", report), &out)
        }
        Cmd::Link { axes, k1, k2, out } => {
            let axes = parse_u32_list(&need(pick(axes, fc.get("axes")?), "axes")?)?;
            let n = axes.len();
            let k1 = need(pick(k1, fc.get("k1")?), "k1")?;
            let k2 = pick(k2, fc.get("k2")?).unwrap_or_else(|| n + 1 - k1.min(n));
            let g = DoubleGeometry::new(RectGeometry::new(axes)?);
            let pair = linked_pair(&g, k1, k2)?;
            let link = linking_number(&pair.core_u, &pair.core_v)?;
            let report = serde_json::json!({
                "k1": k1,
                "k2": k2,
                "linking": link,
                "core_u_mass": pair.core_u.mass(),
                "core_v_mass": pair.core_v.mass(),
            });
            emit(&format!("{:#}\n", report), &out)
        }
        Cmd::Equator { axes, k, which, out } => {
            let axes = parse_u32_list(&need(pick(axes, fc.get("axes")?), "axes")?)?;
            let k = need(pick(k, fc.get("k")?), "k")?;
            let which_s: String =
                pick(which, fc.get("which")?).unwrap_or_else(|| "smallest".into());
            let which = match which_s.as_str() {
                "smallest" => EquatorKind::Smallest,
                "largest" => EquatorKind::Largest,
                other => return Err(Error::InvalidInput(format!("unknown equator kind {other:?}"))),
            };
            let g = DoubleGeometry::new(RectGeometry::new(axes)?);
            let z = equator(&g, k, which)?;
            emit(&format!("{:#}\n", z.to_json()), &out)
        }
        Cmd::Construct { axes, k1, lip, c0, copies, out } => {
            let axes = parse_rat_list(&need(pick(axes, fc.get("axes")?), "axes")?)?;
            let k1 = need(pick(k1, fc.get("k1")?), "k1")?;
            let lip = parse_rat(&need(pick(lip, fc.get("lip")?), "lip")?)?;
            let c0 = parse_rat(&pick(c0, fc.get("c0")?).unwrap_or_else(|| "4".into()))?;
            let b = build_linked_map(&axes, k1, lip, c0)?;
            let mut report = serde_json::json!({ "blueprint": b.to_json() });
            if let Some(copies) = pick(copies, fc.get("copies")?) {
                let fs = blueprint_fibers(&b, copies)?;
                report["fibers"] = serde_json::json!({
                    "copies": copies,
                    "cross_links": fs.cross_links,
                    "total_cross_linking": fs.total_cross_linking(),
                });
            }
            emit(&format!("{:#}\n", report), &out)
        }
        Cmd::Bounds {
            formula,
            axes,
            eprime,
            k,
            k1,
            lip,
            c0,
            iso,
            vol,
            areas,
            n,
            degree,
            big_a,
            w,
            out,
        } => {
            let formula: String = need(pick(formula, fc.get("formula")?), "formula")?;
            let lip_r = || -> Result<Rat, Error> {
                parse_rat(&need(pick(lip.clone(), fc.get("lip")?), "lip")?)
            };
            let axes_r = || -> Result<Vec<Rat>, Error> {
                parse_rat_list(&need(pick(axes.clone(), fc.get("axes")?), "axes")?)
            };
            let value = match formula.as_str() {
                "gromov" => {
                    let iso = parse_rat(&need(pick(iso, fc.get("iso")?), "iso")?)?;
                    let vol = parse_rat(&need(pick(vol, fc.get("vol")?), "vol")?)?;
                    let areas = parse_rat_list(&need(pick(areas, fc.get("areas")?), "areas")?)?;
                    let n = pick(n, fc.get("n")?).unwrap_or(3);
                    serde_json::to_value(gromov_bound(iso, vol, &areas, lip_r()?, n)?)?
                }
                "ellipse" => {
                    let invariant = match pick(k1, fc.get("k1")?) {
                        Some(k1) => {
                            let n = axes_r()?.len() - 1;
                            EllipseInvariant::Linking { k1, k2: n + 1 - k1 }
                        }
                        None => EllipseInvariant::Hopf,
                    };
                    serde_json::to_value(ellipse_bound(&axes_r()?, invariant, lip_r()?)?)?
                }
                "iso" => {
                    let k = need(pick(k, fc.get("k")?), "k")?;
                    serde_json::to_value(iso_formula(&axes_r()?, k)?)?
                }
                "kdilation" => {
                    let ep = parse_rat_list(&need(pick(eprime, fc.get("eprime")?), "eprime")?)?;
                    let k = need(pick(k, fc.get("k")?), "k")?;
                    let d = pick(degree, fc.get("degree")?).unwrap_or(1);
                    serde_json::to_value(kdilation_bound(&axes_r()?, &ep, k, d)?)?
                }
                "bad-example" => {
                    let a = parse_rat(&need(pick(big_a, fc.get("big-a")?), "big-a")?)?;
                    let w = parse_rat(&need(pick(w, fc.get("w")?), "w")?)?;
                    serde_json::to_value(bad_example_bound(a, w, lip_r()?)?)?
                }
                "hopf-composition" => {
                    let c0 = parse_rat(&pick(c0, fc.get("c0")?).unwrap_or_else(|| "4".into()))?;
                    let (d, hopf) = hopf_composition(lip_r()?, c0)?;
                    serde_json::json!({ "degree": d, "invariant": hopf })
                }
                other => return Err(Error::InvalidInput(format!("unknown formula {other:?}"))),
            };
            emit(&format!("{:#}\n", value), &out)
        }
        Cmd::IsoExperiment {
            axes,
            k,
            samples,
            seed,
            resolution,
            density,
            budget,
            equators,
            out,
            csv,
            format,
        } => {
            let axes = parse_rat_list(&need(pick(axes, fc.get("axes")?), "axes")?)?;
            let k = need(pick(k, fc.get("k")?), "k")?;
            let samples = pick(samples, fc.get("samples")?).unwrap_or(10);
            let seed = pick(seed, fc.get("seed")?).unwrap_or(0);
            let mut cfg = IsoConfig::new(axes, k, samples, seed);
            if let Some(r) = pick(resolution, fc.get("resolution")?) {
                parse_rat(&r)?;
                cfg.resolution = r;
            }
            if let Some(d) = pick(density, fc.get("density")?) {
                cfg.density = d;
            }
            if let Some(b) = pick(budget, fc.get("budget")?) {
                cfg.lp_max_nonzeros = b;
            }
            if let Some(e) = pick(equators, fc.get("equators")?) {
                cfg.include_equators = e;
            }
            let report = run_iso_experiment(&cfg)?;
            let json = report.to_json_string();
            if let Some(p) = &out {
                std::fs::write(p, &json)?;
            }
            if let Some(p) = &csv {
                std::fs::write(p, report.to_csv_string())?;
            }
            let format: String = pick(format, fc.get("format")?).unwrap_or_else(|| "json".into());
            match format.as_str() {
                "json" => print!("{json}"),
                "csv" => print!("{}", report.to_csv_string()),
                other => return Err(Error::InvalidInput(format!("unknown format {other:?}"))),
            }
            Ok(())
        }
        Cmd::Sweep { axes, k1, lip, c0, out, csv, format } => {
            let axes: Vec<String> = need(pick(axes, fc.get("axes")?), "axes")?
                .split(',')
                .map(|s| s.trim().to_string())
                .collect();
            let k1 = need(pick(k1, fc.get("k1")?), "k1")?;
            let lips: Vec<String> = need(pick(lip, fc.get("lip")?), "lip")?
                .split(',')
                .map(|s| s.trim().to_string())
                .collect();
            let c0 = pick(c0, fc.get("c0")?).unwrap_or_else(|| "4".into());
            let cfg = SweepConfig { axes, k1, lips, c0 };
            let report = run_construction_sweep(&cfg)?;
            let json = report.to_json_string();
            if let Some(p) = &out {
                std::fs::write(p, &json)?;
            }
            if let Some(p) = &csv {
                std::fs::write(p, report.to_csv_string())?;
            }
            let format: String = pick(format, fc.get("format")?).unwrap_or_else(|| "json".into());
            match format.as_str() {
                "json" => print!("{json}"),
                "csv" => print!("{}", report.to_csv_string()),
                other => return Err(Error::InvalidInput(format!("unknown format {other:?}"))),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::OverBudget { .. } | Error::Infeasible | Error::NotABoundary => {
                    ExitCode::from(3)
                }
                _ => ExitCode::from(2),
            }
        }
    }
}
