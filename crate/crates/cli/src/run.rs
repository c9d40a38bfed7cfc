use std::sync::Arc;

use entperc::analytic::{
    critical_p_classical, critical_p_swapped, giant_component, giant_component_swapped,
    marginal_gains, optimal_strategy,
};
use entperc::graph::load_edge_list;
use entperc::percolation::{estimate_pc, estimate_pc_with_error, sweep};
use entperc::{DegreeDistribution, Error, LinkModel, Mode, NetworkSource, Strategy, SweepResult};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, DistSpec, Grid, NetworkSpec, Resolved, StrategySpec};
use crate::error::CliError;
use crate::output::{write_csv, GainRow, PRow, StrategyRow};

/// Window around the analytic threshold excluded from the deviation summary.
pub const CRITICAL_WINDOW: f64 = 0.05;

/// Runs the experiment, writes its table and returns the manifest summary.
pub fn execute(cfg: &Resolved) -> Result<Value, CliError> {
    match cfg.command {
        Command::Analytic => analytic(cfg),
        Command::Simulate => simulate(cfg),
        Command::Compare => compare(cfg),
        Command::StrategySearch => strategy_search(cfg),
        Command::GainSweep => gain_sweep(cfg),
    }
}

/// Turns "no threshold exists" into `None`; other failures propagate.
fn optional<T>(r: entperc::Result<T>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NeverPercolates(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn relative(new: Option<f64>, old: Option<f64>) -> Option<f64> {
    Some((new? - old?) / old?)
}

fn distribution(spec: &NetworkSpec) -> Result<DegreeDistribution<f64>, CliError> {
    Ok(match spec {
        NetworkSpec::Er { z, .. } => DegreeDistribution::poisson(*z)?,
        NetworkSpec::Config { dist, .. } => dist.build()?,
        NetworkSpec::EdgeList { path, cutoff } => {
            load_edge_list(path, *cutoff)?.degree_distribution()?
        }
        NetworkSpec::SmallWorld { .. } => {
            return Err(CliError::config(
                "network",
                "the small-world ring is not locally tree-like; no analytic model (use simulate)",
            ))
        }
    })
}

fn source(spec: &NetworkSpec) -> Result<NetworkSource, CliError> {
    Ok(match spec {
        NetworkSpec::Er { z, n } => NetworkSource::Er { n: *n, z: *z },
        NetworkSpec::Config { dist, n, erase } => NetworkSource::Configuration {
            n: *n,
            dist: dist.build()?,
            erase: *erase,
        },
        NetworkSpec::SmallWorld { phi, n } => NetworkSource::SmallWorld { n: *n, phi: *phi },
        NetworkSpec::EdgeList { path, cutoff } => {
            NetworkSource::Fixed(Arc::new(load_edge_list(path, *cutoff)?))
        }
    })
}

fn strategy(
    spec: &StrategySpec,
    dist: Option<&DegreeDistribution<f64>>,
    mode: Mode,
) -> Result<Strategy, CliError> {
    match (spec, dist) {
        (StrategySpec::Explicit(s), _) => Ok(s.clone()),
        (StrategySpec::Optimal { q_max }, Some(d)) => Ok(optimal_strategy(d, mode, *q_max)?),
        (StrategySpec::Optimal { .. }, None) => Err(CliError::config(
            "strategy",
            "the optimal strategy needs a degree distribution; give an explicit list of degrees",
        )),
    }
}

fn eta_json(eta: &std::collections::BTreeMap<usize, f64>) -> Value {
    eta.iter()
        .map(|(q, v)| (q.to_string(), json!(v)))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

struct Thresholds {
    p_c: Option<f64>,
    p_c_swapped: Option<f64>,
}

impl Thresholds {
    fn compute(
        dist: &DegreeDistribution<f64>,
        mode: Mode,
        strategy: &Strategy,
    ) -> Result<Self, CliError> {
        let p_c = optional(critical_p_classical(dist, mode))?;
        let p_c_swapped = if strategy.is_empty() {
            p_c
        } else {
            optional(critical_p_swapped(dist, mode, strategy))?
        };
        Ok(Self { p_c, p_c_swapped })
    }

    fn json(&self) -> Value {
        json!({
            "p_c": self.p_c,
            "p_c_swapped": self.p_c_swapped,
            "gain": relative(self.p_c_swapped, self.p_c),
        })
    }
}

fn analytic_rows(
    dist: &DegreeDistribution<f64>,
    cfg: &Resolved,
    strategy: &Strategy,
) -> Result<(Vec<PRow>, Value), CliError> {
    let mut eta = Value::Object(Default::default());
    let rows = cfg
        .p_grid
        .iter()
        .map(|&p| {
            let link = LinkModel::from_p(p, cfg.mode)?;
            let classical = giant_component(dist, link.p2())?;
            let mut row = PRow {
                p,
                u: Some(classical.u),
                s: Some(classical.s),
                ..Default::default()
            };
            if !strategy.is_empty() {
                let sw = giant_component_swapped(dist, &link, strategy, cfg.eta)?;
                row.u_tilde = Some(sw.u);
                row.s_tilde = Some(sw.s_tilde);
                row.s_hat = Some(sw.s_hat);
                eta = eta_json(&sw.eta);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((rows, eta))
}

fn analytic(cfg: &Resolved) -> Result<Value, CliError> {
    let dist = distribution(&cfg.network)?;
    let strategy = strategy(&cfg.strategy, Some(&dist), cfg.mode)?;
    let thresholds = Thresholds::compute(&dist, cfg.mode, &strategy)?;
    let (rows, eta) = analytic_rows(&dist, cfg, &strategy)?;
    write_csv(&cfg.out, &rows)?;
    let mut summary = thresholds.json();
    summary["strategy"] = json!(strategy.to_string());
    summary["mean_degree"] = json!(dist.mean_degree());
    summary["eta_model"] = json!(cfg.eta.to_string());
    summary["eta"] = eta;
    Ok(summary)
}

fn run_sweep(cfg: &Resolved, strategy: &Strategy) -> Result<(SweepResult, Value), CliError> {
    let src = source(&cfg.network)?;
    let result = sweep(&src, cfg.mode, strategy, &cfg.p_grid, cfg.trials, cfg.seed)?;
    let estimate = if cfg.batches >= 2 {
        estimate_pc_with_error(&result, cfg.batches).map(|e| (e.pc, Some(e.stderr)))
    } else {
        estimate_pc(&result).map(|pc| (pc, None))
    };
    let pc_json = match estimate {
        Ok((pc, stderr)) => json!({ "p_hat_c": pc, "p_hat_c_stderr": stderr }),
        Err(e @ Error::GridDoesNotBracket { .. }) => {
            json!({ "p_hat_c": null, "p_hat_c_stderr": null, "p_hat_c_note": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    Ok((result, pc_json))
}

fn mc_row(result: &SweepResult, j: usize) -> PRow {
    PRow {
        p: result.grid[j],
        s_mc_mean: Some(result.mean_s[j]),
        s_mc_stderr: Some(result.stderr_s[j]),
        second_largest_mean: Some(result.second_largest_mean[j]),
        s_hat_mc_mean: Some(result.mean_s_hat[j]),
        ..Default::default()
    }
}

fn simulate(cfg: &Resolved) -> Result<Value, CliError> {
    let dist = match &cfg.strategy {
        StrategySpec::Optimal { .. } => Some(distribution(&cfg.network)?),
        StrategySpec::Explicit(_) => None,
    };
    let strategy = strategy(&cfg.strategy, dist.as_ref(), cfg.mode)?;
    let (result, mut summary) = run_sweep(cfg, &strategy)?;
    let rows: Vec<PRow> = (0..result.grid.len()).map(|j| mc_row(&result, j)).collect();
    write_csv(&cfg.out, &rows)?;
    summary["strategy"] = json!(strategy.to_string());
    summary["trials"] = json!(result.trials);
    summary["eta_empirical"] = eta_json(&result.mean_eta);
    Ok(summary)
}

fn compare(cfg: &Resolved) -> Result<Value, CliError> {
    let dist = distribution(&cfg.network)?;
    let strategy = strategy(&cfg.strategy, Some(&dist), cfg.mode)?;
    let thresholds = Thresholds::compute(&dist, cfg.mode, &strategy)?;
    let (mut rows, eta) = analytic_rows(&dist, cfg, &strategy)?;
    let (result, mc_summary) = run_sweep(cfg, &strategy)?;

    let reference = thresholds.p_c_swapped;
    let mut max_dev: f64 = 0.0;
    let mut max_dev_off: f64 = 0.0;
    for (j, row) in rows.iter_mut().enumerate() {
        let mc = mc_row(&result, j);
        let predicted = if strategy.is_empty() {
            row.s
        } else {
            row.s_tilde
        };
        let dev = predicted.map(|s| result.mean_s[j] - s);
        if let Some(d) = dev {
            max_dev = max_dev.max(d.abs());
            if reference.is_none_or(|pc| (row.p - pc).abs() > CRITICAL_WINDOW) {
                max_dev_off = max_dev_off.max(d.abs());
            }
        }
        row.s_mc_mean = mc.s_mc_mean;
        row.s_mc_stderr = mc.s_mc_stderr;
        row.second_largest_mean = mc.second_largest_mean;
        row.s_hat_mc_mean = mc.s_hat_mc_mean;
        row.deviation = dev;
    }
    write_csv(&cfg.out, &rows)?;

    let mut summary = thresholds.json();
    for (k, v) in mc_summary.as_object().into_iter().flatten() {
        summary[k] = v.clone();
    }
    summary["strategy"] = json!(strategy.to_string());
    summary["trials"] = json!(result.trials);
    summary["max_abs_deviation"] = json!(max_dev);
    summary["max_abs_deviation_off_critical"] = json!(max_dev_off);
    summary["critical_window"] = json!(CRITICAL_WINDOW);
    summary["eta_model"] = json!(cfg.eta.to_string());
    summary["eta"] = eta;
    summary["eta_empirical"] = eta_json(&result.mean_eta);
    Ok(summary)
}

fn strategy_search(cfg: &Resolved) -> Result<Value, CliError> {
    let dist = distribution(&cfg.network)?;
    let gains = marginal_gains(&dist, cfg.mode, cfg.strategy.q_max())?;
    let rows: Vec<StrategyRow> = gains
        .iter()
        .map(|g| StrategyRow {
            q: g.q,
            p_c: g.p_c,
            gain: g.gain,
            included: g.included,
        })
        .collect();
    let chosen = Strategy::new(gains.iter().filter(|g| g.included).map(|g| g.q))?;
    let thresholds = Thresholds::compute(&dist, cfg.mode, &chosen)?;
    write_csv(&cfg.out, &rows)?;
    let mut summary = thresholds.json();
    summary["strategy"] = json!(chosen.to_string());
    summary["q_max"] = json!(cfg.strategy.q_max());
    Ok(summary)
}

type FamilyAt = Box<dyn Fn(f64) -> entperc::Result<DegreeDistribution<f64>> + Sync>;

/// Distribution family whose parameter is swept by `gain-sweep`, and the
/// name of that parameter.
fn swept_family(spec: &NetworkSpec) -> Result<(&'static str, FamilyAt), CliError> {
    match spec {
        NetworkSpec::Er { .. }
        | NetworkSpec::Config {
            dist: DistSpec::Poisson { .. },
            ..
        } => Ok(("z", Box::new(DegreeDistribution::poisson))),
        NetworkSpec::Config {
            dist: DistSpec::PowerLaw { tau, kmin, .. },
            ..
        } => {
            let (tau, kmin) = (*tau, *kmin);
            Ok((
                "kappa",
                Box::new(move |kappa| DegreeDistribution::power_law_cutoff(tau, kappa, kmin)),
            ))
        }
        _ => Err(CliError::config(
            "network",
            "gain-sweep needs an er network or a config network with dist=poisson or dist=powerlaw",
        )),
    }
}

fn gain_row(
    dist: &DegreeDistribution<f64>,
    x: f64,
    mode: Mode,
    q_max: usize,
) -> Result<GainRow, CliError> {
    let p_c = optional(critical_p_classical(dist, mode))?;
    let mut row = GainRow {
        x,
        p_c,
        ..Default::default()
    };
    if p_c.is_none() {
        return Ok(row);
    }
    let fixed = |qs: &[usize]| -> Result<Option<f64>, CliError> {
        optional(critical_p_swapped(
            dist,
            mode,
            &Strategy::new(qs.iter().copied())?,
        ))
    };
    row.p_c_2 = fixed(&[2])?;
    row.p_c_23 = fixed(&[2, 3])?;
    row.p_c_234 = fixed(&[2, 3, 4])?;
    let opt = optimal_strategy(dist, mode, q_max)?;
    row.p_c_opt = if opt.is_empty() {
        p_c
    } else {
        optional(critical_p_swapped(dist, mode, &opt))?
    };
    row.gain_2 = relative(row.p_c_2, p_c);
    row.gain_23 = relative(row.p_c_23, p_c);
    row.gain_234 = relative(row.p_c_234, p_c);
    row.gain_opt = relative(row.p_c_opt, p_c);
    row.strategy_opt = opt.to_string();
    Ok(row)
}

fn gain_sweep(cfg: &Resolved) -> Result<Value, CliError> {
    let (param, family) = swept_family(&cfg.network)?;
    let grid = cfg.x_grid.unwrap_or(match param {
        "z" => Grid {
            start: 1.05,
            end: 12.0,
            steps: 220,
        },
        _ => Grid {
            start: 2.0,
            end: 10.0,
            steps: 81,
        },
    });
    let q_max = cfg.strategy.q_max();
    let rows = grid
        .points()
        .into_par_iter()
        .map(|x| gain_row(&family(x)?, x, cfg.mode, q_max))
        .collect::<Result<Vec<_>, CliError>>()?;
    write_csv(&cfg.out, &rows)?;

    let best = |pick: fn(&GainRow) -> Option<f64>| {
        rows.iter()
            .filter_map(|r| pick(r).map(|g| (r.x, g)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(x, g)| json!({ "x": x, "gain": g }))
    };
    Ok(json!({
        "parameter": param,
        "x_grid": grid.to_string(),
        "q_max": q_max,
        "best_gain_2": best(|r| r.gain_2),
        "best_gain_23": best(|r| r.gain_23),
        "best_gain_234": best(|r| r.gain_234),
        "best_gain_opt": best(|r| r.gain_opt),
    }))
}
