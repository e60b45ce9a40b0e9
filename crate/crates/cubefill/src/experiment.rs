//! Seeded experiment campaigns with deterministic, hash-stamped reports:
//! isoperimetric-ratio sandwiches (constructive fill vs LP lower bound) and
//! construction sweeps over the Lipschitz budget.

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bounds::{format_rat, iso_formula, Rat};
use crate::chain::{Chain, DoubleGeometry, RectGeometry, Space};
use crate::constructions::build_linked_map;
use crate::filler::fill_double;
use crate::generators::{equator, random_cycle, EquatorKind};
use crate::oracle::{min_filling, LpBudget, SolveMode};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct IsoConfig {
    /// physical axes E_1..E_n, sorted ascending
    pub axes: Vec<String>,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    pub include_equators: bool,
    /// grid cells per physical unit
    pub resolution: String,
    /// cells per random sample chain
    pub density: usize,
    pub lp_max_nonzeros: usize,
}

impl IsoConfig {
    pub fn new(axes: Vec<Rat>, k: usize, samples: usize, seed: u64) -> IsoConfig {
        let density = 4 * axes.len().max(1);
        IsoConfig {
            axes: axes.iter().map(format_rat).collect(),
            k,
            samples,
            seed,
            include_equators: true,
            resolution: "1".into(),
            density,
            lp_max_nonzeros: LpBudget::default().max_nonzeros,
        }
    }

    fn parsed_axes(&self) -> Result<Vec<Rat>> {
        self.axes.iter().map(|s| parse_rat(s)).collect()
    }

    fn parsed_resolution(&self) -> Result<Rat> {
        parse_rat(&self.resolution)
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let parse_int = |t: &str| -> Result<i64> {
        t.trim()
            .parse::<i64>()
            .map_err(|_| Error::InvalidInput(format!("cannot parse {t:?} as a number")))
    };
    if let Some((num, den)) = s.split_once('/') {
        let d = parse_int(den)?;
        if d == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Ratio::new(parse_int(num)?, d))
    } else if let Some((whole, frac)) = s.split_once('.') {
        let scale = 10i64.pow(frac.len() as u32);
        let sign = if whole.trim_start().starts_with('-') { -1 } else { 1 };
        Ok(Ratio::new(
            parse_int(whole)? * scale + sign * parse_int(frac)?,
            scale,
        ))
    } else {
        Ok(Ratio::from_integer(parse_int(s)?))
    }
}

/// Grid side lengths: round(physical * resolution), at least 1 each.
pub fn grid_axes(axes: &[Rat], resolution: Rat) -> Result<Vec<u32>> {
    if !resolution.is_positive() {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    axes.iter()
        .map(|&e| {
            let v = (e * resolution + Ratio::new(1, 2)).floor().to_integer();
            if v > u32::MAX as i64 {
                return Err(Error::InvalidInput("grid axis overflows".into()));
            }
            Ok((v.max(1)) as u32)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoSampleRow {
    pub index: usize,
    pub kind: String,
    pub seed: u64,
    pub cycle_mass: u64,
    pub fill_mass: u64,
    pub certified_bound: u64,
    /// cycle mass in physical units (grid mass / resolution^k)
    pub cycle_mass_scaled: String,
    /// filling mass in physical units (grid mass / resolution^(k+1))
    pub fill_mass_scaled: String,
    pub lp_value: Option<f64>,
    pub lp_skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoAggregates {
    /// max over samples of lp_value / cycle_mass (grid units)
    pub lower_estimate: Option<f64>,
    /// max over samples of fill_mass / cycle_mass (grid units)
    pub upper_estimate: Option<f64>,
    /// R_{k+1} + R_{n-k} on the grid
    pub iso_profile_grid: u64,
    /// E_{k+1} + E_{n-k} in physical units
    pub iso_profile_physical: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoReport {
    pub config: IsoConfig,
    pub config_hash: String,
    pub rows: Vec<IsoSampleRow>,
    pub aggregates: IsoAggregates,
}

pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serialization");
    hex::encode(Sha256::digest(&bytes))
}

fn rat_pow(base: Rat, exp: usize) -> Rat {
    let mut out = Rat::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

pub fn run_iso_experiment(config: &IsoConfig) -> Result<IsoReport> {
    let axes = config.parsed_axes()?;
    let resolution = config.parsed_resolution()?;
    let gaxes = grid_axes(&axes, resolution)?;
    let rect = RectGeometry::new(gaxes)?;
    let n = rect.n();
    if config.k == 0 || config.k >= n {
        return Err(Error::InvalidInput(format!("k = {} not in 1..{n}", config.k)));
    }
    let double = DoubleGeometry::new(rect.clone());
    let space = Space::Double(double.clone());
    let budget = LpBudget { max_nonzeros: config.lp_max_nonzeros, ..LpBudget::default() };

    let mut jobs: Vec<(String, u64, Chain)> = Vec::new();
    if config.include_equators {
        jobs.push((
            "equator-smallest".into(),
            config.seed,
            equator(&double, config.k, EquatorKind::Smallest)?,
        ));
        jobs.push((
            "equator-largest".into(),
            config.seed,
            equator(&double, config.k, EquatorKind::Largest)?,
        ));
    }
    for i in 0..config.samples {
        let seed = config.seed.wrapping_add(i as u64);
        jobs.push(("random".into(), seed, random_cycle(&space, config.k, seed, config.density)));
    }

    let scale_k = rat_pow(resolution, config.k);
    let scale_k1 = rat_pow(resolution, config.k + 1);
    let mut rows = Vec::with_capacity(jobs.len());
    let mut lower: Option<f64> = None;
    let mut upper: Option<f64> = None;
    for (index, (kind, seed, z)) in jobs.into_iter().enumerate() {
        let cert = fill_double(&z)?;
        let cycle_mass = z.mass();
        let fill_mass = cert.filling.mass();
        let (lp_value, lp_skipped) = if z.is_zero() {
            (Some(0.0), None)
        } else {
            match min_filling(&z, SolveMode::Lp, &budget) {
                Ok(sol) => (Some(sol.value), None),
                Err(Error::OverBudget { size, unit, limit }) => {
                    (None, Some(format!("lp skipped: {size} {unit} over limit {limit}")))
                }
                Err(e) => return Err(e),
            }
        };
        if cycle_mass > 0 {
            if let Some(v) = lp_value {
                let r = v / cycle_mass as f64;
                lower = Some(lower.map_or(r, |cur: f64| cur.max(r)));
            }
            let r = fill_mass as f64 / cycle_mass as f64;
            upper = Some(upper.map_or(r, |cur: f64| cur.max(r)));
            if let (Some(lo), Some(hi)) = (lp_value, Some(fill_mass as f64)) {
                assert!(lo <= hi + 1e-6, "lp value above constructive filling mass");
            }
        }
        rows.push(IsoSampleRow {
            index,
            kind,
            seed,
            cycle_mass,
            fill_mass,
            certified_bound: cert.certified_bound,
            cycle_mass_scaled: format_rat(&(Rat::from_integer(cycle_mass as i64) / scale_k)),
            fill_mass_scaled: format_rat(&(Rat::from_integer(fill_mass as i64) / scale_k1)),
            lp_value,
            lp_skipped,
        });
    }
    if let (Some(lo), Some(hi)) = (lower, upper) {
        assert!(lo <= hi + 1e-6, "sandwich violated: lower estimate above upper estimate");
    }

    let iso_grid = rect.axis_len(config.k + 1) as u64 + rect.axis_len(n - config.k) as u64;
    let iso_phys = iso_formula(&axes, config.k)?.value;
    Ok(IsoReport {
        config: config.clone(),
        config_hash: config_hash(config),
        rows,
        aggregates: IsoAggregates {
            lower_estimate: lower,
            upper_estimate: upper,
            iso_profile_grid: iso_grid,
            iso_profile_physical: format_rat(&iso_phys),
        },
    })
}

impl IsoReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "index",
            "kind",
            "seed",
            "cycle_mass",
            "fill_mass",
            "certified_bound",
            "cycle_mass_scaled",
            "fill_mass_scaled",
            "lp_value",
            "lp_skipped",
        ])
        .unwrap();
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                r.kind.clone(),
                r.seed.to_string(),
                r.cycle_mass.to_string(),
                r.fill_mass.to_string(),
                r.certified_bound.to_string(),
                r.cycle_mass_scaled.clone(),
                r.fill_mass_scaled.clone(),
                r.lp_value.map(|v| v.to_string()).unwrap_or_default(),
                r.lp_skipped.clone().unwrap_or_default(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    /// physical axes E_0..E_n, sorted ascending
    pub axes: Vec<String>,
    pub k1: usize,
    pub lips: Vec<String>,
    pub c0: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub lip: String,
    pub admissible: bool,
    pub d1: u64,
    pub d2: u64,
    pub invariant: u64,
    pub upper_bound: String,
    pub achieved_over_upper: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
    /// least-squares slope of log(invariant) against log(L)
    pub loglog_slope: Option<f64>,
    pub loglog_max_residual: Option<f64>,
}

/// Least-squares fit y = a + b x; returns (b, max |residual|).
pub fn loglog_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    let max_res = points
        .iter()
        .map(|p| (p.1 - a - b * p.0).abs())
        .fold(0.0f64, f64::max);
    Some((b, max_res))
}

pub fn run_construction_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let axes: Vec<Rat> = config.axes.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
    let c0 = parse_rat(&config.c0)?;
    let lips: Vec<Rat> = config.lips.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?;
    if lips.is_empty() {
        return Err(Error::InvalidInput("need at least one Lipschitz value".into()));
    }
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut any_admissible = false;
    for l in &lips {
        match build_linked_map(&axes, config.k1, *l, c0) {
            Ok(b) => {
                any_admissible = true;
                if b.invariant > 0 {
                    points.push(((l.to_f64().unwrap()).ln(), (b.invariant as f64).ln()));
                }
                rows.push(SweepRow {
                    lip: format_rat(l),
                    admissible: true,
                    d1: b.d1,
                    d2: b.d2,
                    invariant: b.invariant,
                    upper_bound: format_rat(&(Rat::from_integer(b.invariant as i64) / b.bound_ratio)),
                    achieved_over_upper: format_rat(&b.bound_ratio),
                });
            }
            Err(Error::InvalidInput(msg)) if msg.starts_with("inadmissible") => {
                rows.push(SweepRow {
                    lip: format_rat(l),
                    admissible: false,
                    d1: 0,
                    d2: 0,
                    invariant: 0,
                    upper_bound: "0".into(),
                    achieved_over_upper: "0".into(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    if !any_admissible {
        return Err(Error::InvalidInput("every Lipschitz value is inadmissible".into()));
    }
    let fit = loglog_fit(&points);
    Ok(SweepReport {
        config: config.clone(),
        config_hash: config_hash(config),
        rows,
        loglog_slope: fit.map(|(b, _)| b),
        loglog_max_residual: fit.map(|(_, r)| r),
    })
}

impl SweepReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lip", "admissible", "d1", "d2", "invariant", "upper_bound", "achieved_over_upper"]).unwrap();
        for r in &self.rows {
            w.write_record([
                r.lip.clone(),
                r.admissible.to_string(),
                r.d1.to_string(),
                r.d2.to_string(),
                r.invariant.to_string(),
                r.upper_bound.clone(),
                r.achieved_over_upper.clone(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rat("3").unwrap(), Rat::from_integer(3));
        assert_eq!(parse_rat("1/2").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_rat("2.5").unwrap(), Ratio::new(5, 2));
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn grid_rounding() {
        let axes = vec![Ratio::new(3, 2), Rat::from_integer(4)];
        assert_eq!(grid_axes(&axes, Rat::from_integer(2)).unwrap(), vec![3, 8]);
        assert_eq!(grid_axes(&axes, Rat::from_integer(1)).unwrap(), vec![2, 4]);
    }

    #[test]
    fn iso_experiment_is_deterministic() {
        let cfg = IsoConfig::new(
            vec![Rat::from_integer(2), Rat::from_integer(3), Rat::from_integer(3)],
            1,
            3,
            42,
        );
        let a = run_iso_experiment(&cfg).unwrap().to_json_string();
        let b = run_iso_experiment(&cfg).unwrap().to_json_string();
        assert_eq!(a, b);
        assert!(a.contains("equator-smallest"));
    }

    #[test]
    fn iso_experiment_empty() {
        let mut cfg = IsoConfig::new(
            vec![Rat::from_integer(2), Rat::from_integer(2), Rat::from_integer(2)],
            1,
            0,
            1,
        );
        cfg.include_equators = false;
        let rep = run_iso_experiment(&cfg).unwrap();
        assert!(rep.rows.is_empty());
        assert!(rep.aggregates.lower_estimate.is_none());
    }

    #[test]
    fn sweep_slope_is_quartic() {
        let cfg = SweepConfig {
            axes: vec!["1".into(); 4],
            k1: 2,
            lips: vec!["8".into(), "16".into(), "32".into(), "64".into()],
            c0: "4".into(),
        };
        let rep = run_construction_sweep(&cfg).unwrap();
        let slope = rep.loglog_slope.unwrap();
        assert!((slope - 4.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn sweep_flags_inadmissible_rows() {
        let cfg = SweepConfig {
            axes: vec!["1".into(); 4],
            k1: 2,
            lips: vec!["2".into(), "8".into()],
            c0: "4".into(),
        };
        let rep = run_construction_sweep(&cfg).unwrap();
        assert!(!rep.rows[0].admissible);
        assert!(rep.rows[1].admissible);
        let all_bad = SweepConfig { lips: vec!["2".into()], ..cfg };
        assert!(run_construction_sweep(&all_bad).is_err());
    }
}
