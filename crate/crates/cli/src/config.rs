//! Experiment configuration: the JSON document, its flag overrides, and the
//! compact `kind:key=value,...` syntaxes used for networks, links, strategies
//! and grids.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use entperc::{DegreeDistribution, EtaModel, Mode, Strategy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_N: usize = 100_000;
pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_Q_MAX: usize = entperc::analytic::DEFAULT_Q_MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analytic,
    Simulate,
    Compare,
    StrategySearch,
    GainSweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Analytic => "analytic",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::StrategySearch => "strategy-search",
            Command::GainSweep => "gain-sweep",
        })
    }
}

/// `key=value` pairs after the `kind:` prefix. Keys are consumed as they are
/// read so that leftovers can be reported.
struct Params {
    context: String,
    values: BTreeMap<String, String>,
    positional: Vec<String>,
}

impl Params {
    fn parse(context: &str, body: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        let mut positional = Vec::new();
        for token in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match token.split_once('=') {
                Some((k, v)) => {
                    if values
                        .insert(k.trim().to_ascii_lowercase(), v.trim().to_string())
                        .is_some()
                    {
                        return Err(format!("{context}: key {k:?} given twice"));
                    }
                }
                None => positional.push(token.to_string()),
            }
        }
        Ok(Self {
            context: context.to_string(),
            values,
            positional,
        })
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: fmt::Display,
    {
        match self.values.remove(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| format!("{}: bad value {raw:?} for {key}: {e}", self.context)),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T, String>
    where
        T::Err: fmt::Display,
    {
        self.take(key)?
            .ok_or_else(|| format!("{}: missing {key}=...", self.context))
    }

    fn finish(self) -> Result<(), String> {
        if let Some(p) = self.positional.first() {
            return Err(format!("{}: unexpected token {p:?}", self.context));
        }
        if let Some(k) = self.values.keys().next() {
            return Err(format!("{}: unknown key {k:?}", self.context));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistSpec {
    Poisson { z: f64 },
    PowerLaw { tau: f64, kappa: f64, kmin: usize },
    Delta { q: usize },
    File { path: PathBuf },
}

impl DistSpec {
    pub fn build(&self) -> entperc::Result<DegreeDistribution<f64>> {
        match self {
            DistSpec::Poisson { z } => DegreeDistribution::poisson(*z),
            DistSpec::PowerLaw { tau, kappa, kmin } => {
                DegreeDistribution::power_law_cutoff(*tau, *kappa, *kmin)
            }
            DistSpec::Delta { q } => DegreeDistribution::delta(*q),
            DistSpec::File { path } => DegreeDistribution::load_empirical(path),
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Poisson { z } => write!(f, "dist=poisson,z={z}"),
            DistSpec::PowerLaw { tau, kappa, kmin } => {
                write!(f, "dist=powerlaw,tau={tau},kappa={kappa},kmin={kmin}")
            }
            DistSpec::Delta { q } => write!(f, "dist=delta,q={q}"),
            DistSpec::File { path } => write!(f, "dist=file,path={}", path.display()),
        }
    }
}

/// Which network to analyse or simulate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum NetworkSpec {
    Er {
        z: f64,
        n: usize,
    },
    Config {
        dist: DistSpec,
        n: usize,
        erase: bool,
    },
    SmallWorld {
        phi: f64,
        n: usize,
    },
    EdgeList {
        path: PathBuf,
        cutoff: Option<usize>,
    },
}

impl FromStr for NetworkSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        let kind = kind.trim().to_ascii_lowercase();
        let mut params = Params::parse(&format!("network {kind}"), body)?;
        let spec = match kind.as_str() {
            "er" | "poisson" => NetworkSpec::Er {
                z: params.require("z")?,
                n: params.take("n")?.unwrap_or(DEFAULT_N),
            },
            "config" | "configuration" => {
                let dist_kind: String = params.require("dist")?;
                let dist = match dist_kind.to_ascii_lowercase().as_str() {
                    "poisson" => DistSpec::Poisson {
                        z: params.require("z")?,
                    },
                    "powerlaw" | "power-law" => DistSpec::PowerLaw {
                        tau: params.require("tau")?,
                        kappa: params.require("kappa")?,
                        kmin: params.take("kmin")?.unwrap_or(1),
                    },
                    "delta" | "regular" => DistSpec::Delta {
                        q: params.require("q")?,
                    },
                    "file" => DistSpec::File {
                        path: params.require::<String>("path")?.into(),
                    },
                    other => return Err(format!("network config: unknown dist {other:?}")),
                };
                NetworkSpec::Config {
                    dist,
                    n: params.take("n")?.unwrap_or(DEFAULT_N),
                    erase: params.take("erase")?.unwrap_or(false),
                }
            }
            "sw" | "small-world" => NetworkSpec::SmallWorld {
                phi: params.require("phi")?,
                n: params.take("n")?.unwrap_or(DEFAULT_N),
            },
            "edgelist" | "edge-list" => {
                let path: PathBuf = match params.take::<String>("path")? {
                    Some(p) => p.into(),
                    None if !params.positional.is_empty() => params.positional.remove(0).into(),
                    None => return Err("network edgelist: missing path".into()),
                };
                NetworkSpec::EdgeList {
                    path,
                    cutoff: params.take("cutoff")?,
                }
            }
            other => {
                return Err(format!(
                    "unknown network kind {other:?} (expected er, config, sw or edgelist)"
                ))
            }
        };
        params.finish()?;
        Ok(spec)
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkSpec::Er { z, n } => write!(f, "er:z={z},n={n}"),
            NetworkSpec::Config { dist, n, erase } => {
                write!(f, "config:{dist},n={n},erase={erase}")
            }
            NetworkSpec::SmallWorld { phi, n } => write!(f, "sw:phi={phi},n={n}"),
            NetworkSpec::EdgeList { path, cutoff } => {
                write!(f, "edgelist:path={}", path.display())?;
                if let Some(c) = cutoff {
                    write!(f, ",cutoff={c}")?;
                }
                Ok(())
            }
        }
    }
}

impl TryFrom<String> for NetworkSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<NetworkSpec> for String {
    fn from(s: NetworkSpec) -> Self {
        s.to_string()
    }
}

/// Conversion mode plus an optional single operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LinkSpec {
    pub mode: Mode,
    pub p: Option<f64>,
}

impl Default for LinkSpec {
    fn default() -> Self {
        Self {
            mode: Mode::Distilled,
            p: None,
        }
    }
}

impl FromStr for LinkSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut params = Params::parse("link", s)?;
        let mode = match params.take::<String>("mode")? {
            Some(m) => m.parse::<Mode>().map_err(|e| format!("link: {e}"))?,
            None => Mode::Distilled,
        };
        let p = params.take::<f64>("p")?;
        let lambda0 = params.take::<f64>("lambda0")?;
        let p = match (p, lambda0) {
            (Some(_), Some(_)) => return Err("link: give either p or lambda0, not both".into()),
            (Some(p), None) => Some(p),
            (None, Some(l)) => Some(entperc::link::scp(l).map_err(|e| format!("link: {e}"))?),
            (None, None) => None,
        };
        if let Some(p) = p {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("link: p must lie in [0, 1], got {p}"));
            }
        }
        params.finish()?;
        Ok(Self { mode, p })
    }
}

impl fmt::Display for LinkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.p {
            write!(f, "p={p},")?;
        }
        write!(f, "mode={}", self.mode)
    }
}

impl TryFrom<String> for LinkSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<LinkSpec> for String {
    fn from(s: LinkSpec) -> Self {
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StrategySpec {
    Explicit(Strategy),
    Optimal { q_max: usize },
}

impl Default for StrategySpec {
    fn default() -> Self {
        StrategySpec::Explicit(Strategy::none())
    }
}

impl StrategySpec {
    pub fn q_max(&self) -> usize {
        match self {
            StrategySpec::Optimal { q_max } => *q_max,
            StrategySpec::Explicit(_) => DEFAULT_Q_MAX,
        }
    }
}

impl FromStr for StrategySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("optimal") {
            let mut params = Params::parse("strategy optimal", rest.trim_start_matches(':'))?;
            let q_max = params.take("qmax")?.unwrap_or(DEFAULT_Q_MAX);
            params.finish()?;
            if q_max < 2 {
                return Err(format!("strategy optimal: qmax must be >= 2, got {q_max}"));
            }
            return Ok(StrategySpec::Optimal { q_max });
        }
        s.parse::<Strategy>()
            .map(StrategySpec::Explicit)
            .map_err(|e| format!("strategy: {e}"))
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Explicit(s) => write!(f, "{s}"),
            StrategySpec::Optimal { q_max } => write!(f, "optimal:qmax={q_max}"),
        }
    }
}

impl TryFrom<String> for StrategySpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<StrategySpec> for String {
    fn from(s: StrategySpec) -> Self {
        s.to_string()
    }
}

/// `a:b:steps`, evenly spaced and inclusive of both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        entperc::percolation::linear_grid(self.start, self.end, self.steps)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("grid {s:?}: expected start:end:steps"));
        };
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| format!("grid {s:?}: bad number {t:?}: {e}"))
        };
        let grid = Grid {
            start: num(a)?,
            end: num(b)?,
            steps: n
                .parse()
                .map_err(|e| format!("grid {s:?}: bad step count {n:?}: {e}"))?,
        };
        if grid.steps == 0 {
            return Err(format!("grid {s:?}: needs at least one step"));
        }
        if !(grid.start.is_finite() && grid.end.is_finite()) || grid.end < grid.start {
            return Err(format!("grid {s:?}: values must be finite and ascending"));
        }
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.steps)
    }
}

impl TryFrom<String> for Grid {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> Self {
        g.to_string()
    }
}

/// Every field is optional so that a file and the command line can each
/// supply part of it; [`ExperimentConfig::merge`] lets the latter win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Grid>,
    /// Grid of the swept network parameter for `gain-sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Number of trial batches used for the error bar on the simulated threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batches: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads a config file. A run manifest is accepted too: its `config`
    /// member is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        if let Some(inner) = value.get_mut("config").filter(|v| v.is_object()) {
            value = inner.take();
        }
        serde_json::from_value(value)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))
    }

    pub fn merge(mut self, over: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(command, network, link, strategy, p_grid, x_grid, trials, batches, seed, eta, out);
        self
    }

    /// Fills in every default so that the result, written to a manifest,
    /// reproduces the run without depending on future default changes.
    pub fn with_defaults(mut self) -> Self {
        self.link.get_or_insert_with(LinkSpec::default);
        self.strategy.get_or_insert_with(StrategySpec::default);
        let trials = *self.trials.get_or_insert(DEFAULT_TRIALS);
        self.batches.get_or_insert(trials.min(10));
        self.seed.get_or_insert(DEFAULT_SEED);
        self.eta.get_or_insert_with(EtaModel::default);
        self.out.get_or_insert_with(|| PathBuf::from("entperc-out"));
        self
    }

    pub fn resolve(self) -> Result<Resolved, CliError> {
        let command = self
            .command
            .ok_or_else(|| CliError::config("command", "no subcommand given"))?;
        let network = self
            .network
            .ok_or_else(|| CliError::config("network", "required (e.g. er:z=2.5,n=100000)"))?;
        let link = self.link.unwrap_or_default();
        let p_grid = match (self.p_grid, link.p) {
            (Some(g), _) => g.points(),
            (None, Some(p)) => vec![p],
            (None, None) => entperc::percolation::linear_grid(0.0, 1.0, 101),
        };
        if let Some(p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(CliError::config(
                "p_grid",
                format!("value {p} outside [0, 1]"),
            ));
        }
        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 && matches!(command, Command::Simulate | Command::Compare) {
            return Err(CliError::config("trials", "must be at least 1"));
        }
        let batches = self.batches.unwrap_or(trials.min(10));
        if matches!(command, Command::Simulate | Command::Compare) && batches > trials {
            return Err(CliError::config(
                "batches",
                format!("{batches} exceeds the {trials} trials"),
            ));
        }
        Ok(Resolved {
            command,
            network,
            mode: link.mode,
            strategy: self.strategy.unwrap_or_default(),
            p_grid,
            x_grid: self.x_grid,
            trials,
            batches,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            eta: self.eta.unwrap_or_default(),
            out: self.out.unwrap_or_else(|| PathBuf::from("entperc-out")),
        })
    }
}

/// A validated configuration with defaults filled in.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub command: Command,
    pub network: NetworkSpec,
    pub mode: Mode,
    pub strategy: StrategySpec,
    pub p_grid: Vec<f64>,
    pub x_grid: Option<Grid>,
    pub trials: usize,
    pub batches: usize,
    pub seed: u64,
    pub eta: EtaModel,
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_round_trip() {
        for text in [
            "er:z=2.5,n=1000",
            "config:dist=powerlaw,tau=1,kappa=10,kmin=1,n=500,erase=false",
            "config:dist=delta,q=3,n=99,erase=true",
            "sw:phi=0.25,n=100000",
            "edgelist:path=graph.txt,cutoff=15",
        ] {
            let spec: NetworkSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
    }

    #[test]
    fn network_shorthands() {
        assert_eq!(
            "edgelist:web.txt,cutoff=15".parse::<NetworkSpec>().unwrap(),
            NetworkSpec::EdgeList {
                path: "web.txt".into(),
                cutoff: Some(15)
            }
        );
        assert_eq!(
            "er:z=2".parse::<NetworkSpec>().unwrap(),
            NetworkSpec::Er {
                z: 2.0,
                n: DEFAULT_N
            }
        );
    }

    #[test]
    fn network_errors_name_the_problem() {
        let err = "er:z=2.5,m=3".parse::<NetworkSpec>().unwrap_err();
        assert!(err.contains("unknown key \"m\""), "{err}");
        let err = "er:n=3".parse::<NetworkSpec>().unwrap_err();
        assert!(err.contains("missing z"), "{err}");
        assert!("lattice:d=2".parse::<NetworkSpec>().is_err());
        assert!("er:z=abc".parse::<NetworkSpec>().is_err());
    }

    #[test]
    fn link_parsing() {
        let l: LinkSpec = "p=0.3,mode=sequential".parse().unwrap();
        assert_eq!(
            l,
            LinkSpec {
                mode: Mode::Sequential,
                p: Some(0.3)
            }
        );
        let l: LinkSpec = "lambda0=0.9".parse().unwrap();
        assert!((l.p.unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(l.mode, Mode::Distilled);
        assert!("p=1.5".parse::<LinkSpec>().is_err());
        assert!("p=0.3,lambda0=0.9".parse::<LinkSpec>().is_err());
        assert!("mode=quantum".parse::<LinkSpec>().is_err());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!(
            "optimal:qmax=6".parse::<StrategySpec>().unwrap(),
            StrategySpec::Optimal { q_max: 6 }
        );
        assert_eq!(
            "optimal".parse::<StrategySpec>().unwrap(),
            StrategySpec::Optimal {
                q_max: DEFAULT_Q_MAX
            }
        );
        assert_eq!("2,3".parse::<StrategySpec>().unwrap().to_string(), "2,3");
        assert_eq!(
            "none".parse::<StrategySpec>().unwrap(),
            StrategySpec::default()
        );
        assert!("1,2".parse::<StrategySpec>().is_err());
        assert!("optimal:qmax=1".parse::<StrategySpec>().is_err());
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0:1:11".parse().unwrap();
        assert_eq!(g.points().len(), 11);
        assert!((g.points()[3] - 0.3).abs() < 1e-15);
        assert!("0:1".parse::<Grid>().is_err());
        assert!("1:0:5".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
    }

    #[test]
    fn merge_prefers_overrides() {
        let base = ExperimentConfig {
            seed: Some(3),
            trials: Some(7),
            ..Default::default()
        };
        let over = ExperimentConfig {
            seed: Some(9),
            ..Default::default()
        };
        let merged = base.merge(over);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.trials, Some(7));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ExperimentConfig {
            command: Some(Command::Compare),
            network: Some("er:z=2.5,n=1000".parse().unwrap()),
            link: Some("mode=sequential".parse().unwrap()),
            strategy: Some("2,3".parse().unwrap()),
            p_grid: Some("0:1:21".parse().unwrap()),
            trials: Some(4),
            seed: Some(11),
            eta: Some(EtaModel::Compact),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"network\":\"er:z=2.5,n=1000\""), "{text}");
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn resolve_validates() {
        let cfg = ExperimentConfig {
            command: Some(Command::Simulate),
            network: Some("er:z=2.5".parse().unwrap()),
            trials: Some(0),
            ..Default::default()
        };
        let err = cfg.resolve().unwrap_err();
        assert!(err.to_string().starts_with("trials"), "{err}");

        let cfg = ExperimentConfig {
            command: Some(Command::Analytic),
            network: Some("er:z=2.5".parse().unwrap()),
            link: Some("p=0.4".parse().unwrap()),
            ..Default::default()
        };
        assert_eq!(cfg.resolve().unwrap().p_grid, vec![0.4]);
    }
}
