//! Plain-text experiment configuration: `key = value` lines, `#` comments,
//! dotted section keys and comma-separated lists. Unknown keys are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ans_core::besov::BesovParams;
use ans_core::solver::{dealiased_radius, SolverConfig};
use ans_core::Grid;

use crate::data::{check_resolvable, BandRanges, OscillatoryDataSpec};
use crate::error::CliError;

const KEYS: &[&str] = &[
    "grid.n1",
    "grid.n2",
    "grid.n3",
    "grid.l1",
    "grid.l2",
    "grid.l3",
    "solver.nu_h",
    "solver.nu_3",
    "solver.dt",
    "solver.t_end",
    "solver.n_cutoff",
    "solver.record_every",
    "solver.accumulate_every",
    "besov.p",
    "sweep.epsilon",
    "sweep.p",
    "sweep.q",
    "sweep.alpha",
    "sweep.sigma",
    "sweep.amplitude",
    "sweep.refine",
    "data.kind",
    "data.epsilon",
    "data.q",
    "data.amplitude",
    "data.k",
    "data.l",
    "smallness.amplitudes",
    "compare.delta",
    "output.dir",
    "seed",
];

/// Parse `key = value` lines into a map.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!("line {}: unknown key `{k}`", n + 1)));
        }
        if v.is_empty() {
            return Err(CliError::Config(format!("line {}: empty value for `{k}`", n + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{k}`", n + 1)));
        }
    }
    Ok(out)
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',').map(|s| parse_one(key, s)).collect()
}

fn parse_pair(key: &str, v: &str) -> Result<(i32, i32), CliError> {
    match parse_list::<i32>(key, v)?[..] {
        [a, b] if a <= b => Ok((a, b)),
        _ => Err(CliError::Config(format!("`{key}` must be `lo,hi` with lo <= hi"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataKind {
    Oscillatory,
    Random,
    Shear,
}

impl std::str::FromStr for DataKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "oscillatory" => Ok(Self::Oscillatory),
            "random" => Ok(Self::Random),
            "shear" => Ok(Self::Shear),
            _ => Err(()),
        }
    }
}

impl DataKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Oscillatory => "oscillatory",
            Self::Random => "random",
            Self::Shear => "shear",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataConfig {
    pub kind: DataKind,
    pub epsilon: f64,
    pub q: f64,
    /// Multiplier of the oscillatory datum, root-mean-square of random data,
    /// peak of the shear.
    pub amplitude: f64,
    pub bands: BandRanges,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub epsilon: Vec<f64>,
    pub p: Vec<f64>,
    pub q: f64,
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Multiplier of every swept datum.
    pub amplitude: f64,
    /// Evaluate norms on horizontally refined quadrature grids.
    pub refine: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    pub solver: SolverConfig,
    pub besov: BesovParams,
    pub sweep: SweepConfig,
    pub data: DataConfig,
    pub smallness: Vec<f64>,
    /// `||delta_0|| / ||u_0||` of the `compare` perturbation.
    pub compare_delta: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: Option<[usize; 3]>,
    pub nu_h: Option<f64>,
    pub nu_3: Option<f64>,
    pub p: Option<f64>,
}

fn config_error(e: ans_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// `2^{-2}, 2^{-3}, ...` down to the smallest value resolvable on `grid`.
pub fn resolvable_dyadic_epsilons(grid: &Grid, q: f64) -> Vec<f64> {
    (2..30)
        .map(|j| (-(j as f64)).exp2())
        .take_while(|&eps| check_resolvable(grid, &OscillatoryDataSpec::new(eps, q)).is_ok())
        .collect()
}

/// Parse `n1,n2,n3`.
pub fn parse_grid(s: &str) -> Result<[usize; 3], CliError> {
    let v: Vec<usize> = parse_list("--grid", s)?;
    v.try_into().map_err(|_| CliError::Config(format!("grid `{s}` must have three entries")))
}

impl ExperimentConfig {
    pub fn from_text(command: &str, text: &str, ov: &Overrides) -> Result<Self, CliError> {
        Self::from_entries(command, &parse_entries(text)?, ov)
    }

    pub fn defaults(command: &str) -> Result<Self, CliError> {
        Self::from_entries(command, &BTreeMap::new(), &Overrides::default())
    }

    pub fn from_entries(command: &str, e: &BTreeMap<String, String>, ov: &Overrides) -> Result<Self, CliError> {
        let get = |k: &str| e.get(k).map(String::as_str);
        let num = |k: &str, d: f64| get(k).map_or(Ok(d), |v| parse_one::<f64>(k, v));
        let list = |k: &str, d: &[f64]| get(k).map_or(Ok(d.to_vec()), |v| parse_list::<f64>(k, v));
        let count = |k: &str, d: usize| get(k).map_or(Ok(d), |v| parse_one::<usize>(k, v));

        let n = match ov.grid {
            Some(g) => g,
            None => [count("grid.n1", 32)?, count("grid.n2", 32)?, count("grid.n3", 32)?],
        };
        let two_pi = 2.0 * std::f64::consts::PI;
        let len = [num("grid.l1", two_pi)?, num("grid.l2", two_pi)?, num("grid.l3", two_pi)?];
        let grid = Grid::with_lengths(n, len).map_err(config_error)?;

        let nu_h = ov.nu_h.map_or_else(|| num("solver.nu_h", 0.1), Ok)?;
        let nu_3 = ov.nu_3.map_or_else(|| num("solver.nu_3", 0.01), Ok)?;
        let p = ov.p.map_or_else(|| num("besov.p", 4.0), Ok)?;
        let mut solver = SolverConfig::new(grid, nu_h, nu_3);
        solver.dt = num("solver.dt", solver.dt)?;
        solver.t_end = num("solver.t_end", solver.t_end)?;
        solver.n_cutoff = num("solver.n_cutoff", dealiased_radius(&grid))?;
        solver.record_every = count("solver.record_every", solver.record_every)?;
        solver.accumulate_every = count("solver.accumulate_every", solver.accumulate_every)?;
        solver.p = p;
        solver.validate().map_err(config_error)?;
        let besov = BesovParams::new(p, nu_h, nu_3).map_err(config_error)?;

        let q = num("sweep.q", 4.0)?;
        let sweep = SweepConfig {
            epsilon: get("sweep.epsilon").map_or_else(|| Ok(resolvable_dyadic_epsilons(&grid, q)), |v| parse_list("sweep.epsilon", v))?,
            p: list("sweep.p", &[8.0])?,
            q,
            alpha: list("sweep.alpha", &[0.5, 1.0])?,
            sigma: list("sweep.sigma", &[0.5, 1.0])?,
            amplitude: num("sweep.amplitude", 1.0)?,
            refine: get("sweep.refine").map_or(Ok(true), |v| parse_one::<bool>("sweep.refine", v))?,
        };
        for &eps in &sweep.epsilon {
            check_resolvable(&grid, &OscillatoryDataSpec::new(eps, sweep.q))
                .map_err(|err| CliError::Config(format!("sweep.epsilon: {err}")))?;
        }
        if command == "sweep-eps" && sweep.epsilon.len() < 4 {
            return Err(CliError::Config(format!("sweep.epsilon needs at least 4 values, got {}", sweep.epsilon.len())));
        }
        if sweep.p.iter().any(|&p| !(p >= 2.0 && p.is_finite())) {
            return Err(CliError::Config("sweep.p entries must be finite and >= 2".into()));
        }

        let kind = match get("data.kind") {
            Some(v) => v.parse().map_err(|_| CliError::Config(format!("data.kind: unknown kind `{v}`")))?,
            None => DataKind::Random,
        };
        let pair = |k: &str, d: (i32, i32)| get(k).map_or(Ok(d), |v| parse_pair(k, v));
        let data = DataConfig {
            kind,
            epsilon: num("data.epsilon", 0.125)?,
            q: num("data.q", 4.0)?,
            amplitude: num("data.amplitude", 1e-2)?,
            bands: BandRanges::new(pair("data.k", (0, 2))?, pair("data.l", (0, 2))?),
        };
        if kind == DataKind::Oscillatory {
            check_resolvable(&grid, &OscillatoryDataSpec::new(data.epsilon, data.q))
                .map_err(|err| CliError::Config(format!("data.epsilon: {err}")))?;
        }

        let smallness = list("smallness.amplitudes", &[0.0, 1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2])?;
        let compare_delta = num("compare.delta", 1e-4)?;
        if !(compare_delta > 0.0) {
            return Err(CliError::Config("compare.delta must be positive".into()));
        }
        let out_dir = ov.out.clone().unwrap_or_else(|| PathBuf::from(get("output.dir").unwrap_or("out")));
        let seed = ov.seed.map_or_else(|| get("seed").map_or(Ok(0), |v| parse_one::<u64>("seed", v)), Ok)?;
        Ok(Self { command: command.to_string(), solver, besov, sweep, data, smallness, compare_delta, out_dir, seed })
    }

    pub fn grid(&self) -> &Grid {
        &self.solver.grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_sections_and_lists() {
        let text = "# sweep\ngrid.n1 = 64 # trailing\ngrid.n2=64\ngrid.n3 = 16\nsweep.epsilon = 0.25, 0.125\nsolver.dt = 2e-3\nseed = 9\n";
        let c = ExperimentConfig::from_text("norm", text, &Overrides::default()).unwrap();
        assert_eq!(c.grid().n(), [64, 64, 16]);
        assert_eq!(c.sweep.epsilon, vec![0.25, 0.125]);
        assert_eq!(c.solver.dt, 2e-3);
        assert_eq!(c.seed, 9);
        assert_eq!(c.command, "norm");
    }

    #[test]
    fn unknown_and_malformed_keys_are_errors() {
        let ov = Overrides::default();
        assert!(matches!(ExperimentConfig::from_text("x", "grid.n4 = 8", &ov), Err(CliError::Config(_))));
        assert!(matches!(ExperimentConfig::from_text("x", "grid.n1 8", &ov), Err(CliError::Config(_))));
        assert!(matches!(ExperimentConfig::from_text("x", "seed = 1\nseed = 2", &ov), Err(CliError::Config(_))));
        assert!(matches!(ExperimentConfig::from_text("x", "data.k = 3,1", &ov), Err(CliError::Config(_))));
        assert!(ExperimentConfig::from_text("x", "grid.n1 = 7", &ov).is_err());
    }

    #[test]
    fn unresolvable_sweep_is_refused() {
        let ov = Overrides::default();
        let r = ExperimentConfig::from_text("x", "sweep.epsilon = 0.015625", &ov);
        assert!(matches!(r, Err(CliError::Config(_))));
        let r = ExperimentConfig::from_text("sweep-eps", "grid.n1 = 32", &ov);
        assert!(matches!(r, Err(CliError::Config(_))));
        let big = Overrides { grid: Some([128, 128, 16]), ..Default::default() };
        let c = ExperimentConfig::from_text("sweep-eps", "", &big).unwrap();
        assert_eq!(c.sweep.epsilon, vec![0.25, 0.125, 0.0625, 0.03125]);
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides { seed: Some(5), grid: Some([32, 32, 16]), nu_h: Some(0.5), p: Some(8.0), ..Default::default() };
        let c = ExperimentConfig::from_text("x", "seed = 1\nsweep.epsilon = 0.25\n", &ov).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.grid().n(), [32, 32, 16]);
        assert_eq!(c.solver.nu_h, 0.5);
        assert_eq!(c.besov.p, 8.0);
        assert_eq!(c.solver.p, 8.0);
    }
}
