//! Command-line front end: analytical reports, single simulations, sweeps,
//! regression fitting and the bundled reproduction pipelines.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 partial
//! simulation (cutoff hit), 3 internal error.

mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use nakasim::experiments::{
    self, aggregate_csv, curve_csv, fit_log_regression, frontier_csv, max_delay_frontier,
    published_fits, reproduce_fig1, reproduce_table6, run_sweep, summary_csv, table6_csv,
    table6_markdown, verbose_csv, CurveParams, RunRow, RunSummary, SweepAxis, SweepSpec,
};
use nakasim::model::{preset, Chain, Protocol, ScenarioConfig};
use nakasim::netmodel::build_topology;
use nakasim::secmath::{beta_max, is_secure, nakamoto_coefficient, security_probability};
use nakasim::simengine::run;

use output::{resolve_out_dir, OutputDir};

#[derive(Parser)]
#[command(
    name = "nakasim",
    version,
    about = "Block propagation simulator and security calculator for Nakamoto-style networks"
)]
struct Cli {
    /// Cap on parallel simulation workers (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory; must be new or empty. Defaults to a generated
    /// name under $NAKASIM_OUT_ROOT or ./runs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form security analysis for one parameter point.
    Analyze {
        /// Block rate, blocks per second.
        #[arg(long)]
        rho: f64,
        /// Maximum network delay, seconds.
        #[arg(long)]
        delta: f64,
        /// Magnification factor.
        #[arg(long, default_value_t = 1.0)]
        e: f64,
        /// Adversarial power fraction to test.
        #[arg(long)]
        beta: Option<f64>,
        /// Per-validator corruption probability (requires --n-val).
        #[arg(long)]
        p_star: Option<f64>,
        /// Number of validators (requires --p-star).
        #[arg(long)]
        n_val: Option<u64>,
    },

    /// Run one simulation from a scenario file or a bundled preset.
    Simulate {
        /// Scenario file (exclusive with --preset).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Bundled chain preset: bitcoin, cardano, monero, ethereum_classic.
        #[arg(long)]
        preset: Option<String>,
        /// Override the scenario's validator count.
        #[arg(long)]
        n_val: Option<u64>,
        /// Override the scenario's zero-power node count.
        #[arg(long)]
        n_zp: Option<u64>,
        /// Override the number of blocks to produce.
        #[arg(long)]
        num_blocks: Option<u32>,
        /// Override the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the per-(block, node) reception CSV.
        #[arg(long)]
        verbose: bool,
    },

    /// Run a batch of simulations varying one scenario field.
    Sweep {
        /// Scenario file (exclusive with --preset).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Bundled chain preset: bitcoin, cardano, monero, ethereum_classic.
        #[arg(long)]
        preset: Option<String>,
        /// Field to vary: nval, nzp, protocol, nt-delay-ms, overlay.
        #[arg(long)]
        axis: String,
        /// Comma-separated values for the axis.
        #[arg(long)]
        values: String,
        /// Seeds: comma-separated list or an inclusive a..b range.
        #[arg(long, default_value = "1..5")]
        seeds: String,
    },

    /// Fit delta = a*ln(n) + b to a CSV of measurements.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Column holding n.
        #[arg(long, default_value = "n_val")]
        n_col: String,
        /// Column holding the delay in seconds.
        #[arg(long, default_value = "mean_delta_max_s")]
        delta_col: String,
    },

    /// Reproduce the tolerable-adversarial-power table from bundled fits.
    Table6,

    /// Security probability against network size (bundled headline curve).
    Fig1 {
        #[arg(long, default_value_t = 0.125)]
        p_star: f64,
        /// Added attack delay, seconds.
        #[arg(long, default_value_t = 100.0)]
        nt: f64,
        #[arg(long, default_value_t = 1.0 / 20.0)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        e: f64,
        #[arg(long, default_value_t = 10)]
        n_min: u64,
        #[arg(long, default_value_t = 10_000_000)]
        n_max: u64,
    },

    /// Maximum tolerable delay curves per chain and corruption probability.
    Frontier {
        /// Comma-separated chain names.
        #[arg(long, default_value = "bitcoin,monero,cardano,ethereum_classic")]
        chains: String,
        #[arg(long, default_value = "0.05,0.1,0.125")]
        p_stars: String,
        #[arg(long, default_value = "10,100,1000,10000,100000,1000000")]
        n_values: String,
        /// Security probability target.
        #[arg(long, default_value_t = 0.9)]
        target: f64,
        /// Also simulate attacked propagation at these sizes for comparison.
        #[arg(long)]
        sim_n: Option<String>,
        /// Attack delay for the comparison runs, seconds.
        #[arg(long, default_value_t = 600.0)]
        sim_nt: f64,
        #[arg(long, default_value_t = 0.15)]
        sim_p_hat: f64,
        #[arg(long, default_value_t = 0.5)]
        sim_p_con: f64,
        #[arg(long, default_value = "1..5")]
        sim_seeds: String,
    },

    /// Parse and validate a scenario file.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2; the contract here is 1 for usage errors
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let usage = err
                .chain()
                .any(|c| c.downcast_ref::<nakasim::Error>().is_some());
            ExitCode::from(if usage { 1 } else { 3 })
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Analyze {
            rho,
            delta,
            e,
            beta,
            p_star,
            n_val,
        } => cmd_analyze(out, rho, delta, e, beta, p_star, n_val),
        Command::Simulate {
            config,
            preset,
            n_val,
            n_zp,
            num_blocks,
            seed,
            verbose,
        } => cmd_simulate(
            out,
            config.as_deref(),
            preset.as_deref(),
            (n_val, n_zp, num_blocks),
            seed,
            verbose,
        ),
        Command::Sweep {
            config,
            preset,
            axis,
            values,
            seeds,
        } => cmd_sweep(out, config.as_deref(), preset.as_deref(), &axis, &values, &seeds),
        Command::Fit {
            input,
            n_col,
            delta_col,
        } => cmd_fit(out, &input, &n_col, &delta_col),
        Command::Table6 => cmd_table6(out),
        Command::Fig1 {
            p_star,
            nt,
            rho,
            e,
            n_min,
            n_max,
        } => cmd_fig1(out, p_star, nt, rho, e, (n_min, n_max)),
        Command::Frontier {
            chains,
            p_stars,
            n_values,
            target,
            sim_n,
            sim_nt,
            sim_p_hat,
            sim_p_con,
            sim_seeds,
        } => cmd_frontier(
            out,
            &chains,
            &p_stars,
            &n_values,
            target,
            sim_n.as_deref(),
            sim_nt,
            sim_p_hat,
            sim_p_con,
            &sim_seeds,
        ),
        Command::ValidateConfig { config } => cmd_validate(&config),
    }
}

fn cmd_analyze(
    out: Option<&Path>,
    rho: f64,
    delta: f64,
    e: f64,
    beta: Option<f64>,
    p_star: Option<f64>,
    n_val: Option<u64>,
) -> Result<u8> {
    if p_star.is_some() != n_val.is_some() {
        bail!(anyhow!(nakasim::Error::Config(
            "--p-star and --n-val must be given together".into()
        )));
    }
    let bm = beta_max(rho, delta, e)?;
    let mut report = String::new();
    report.push_str(&format!(
        "parameters: rho = {rho} blocks/s, delta = {delta} s, e = {e}\n"
    ));
    report.push_str(&format!("beta_max (largest tolerable power): {bm:.6}\n"));

    let mut verdict_cols = (String::new(), String::new(), String::new());
    if let Some(b) = beta {
        let v = is_secure(b, rho, delta, e)?;
        report.push_str(&format!(
            "beta = {b}: {} (condition value {:.6}, must stay below 1)\n",
            if v.secure { "SECURE" } else { "INSECURE" },
            v.lhs
        ));
        verdict_cols = (format!("{b}"), format!("{}", v.secure), format!("{}", v.lhs));
    }
    let mut prob_cols = (String::new(), String::new(), String::new());
    if let (Some(p), Some(n)) = (p_star, n_val) {
        let g = nakamoto_coefficient(n, rho, delta, e)?;
        let prob = security_probability(n, p, rho, delta, e)?;
        report.push_str(&format!(
            "n_val = {n}, p_star = {p}: tolerable corrupted validators g = {g}, \
             security probability P = {prob:.6}\n"
        ));
        prob_cols = (format!("{p}"), format!("{g}"), format!("{prob}"));
    }
    print!("{report}");

    let dir = resolve_out_dir(out, "analyze");
    let mut dir = OutputDir::create(&dir)?;
    let csv = format!(
        "rho,delta_s,e,beta_max,beta,secure,lhs,p_star,nakamoto,p_secure\n{rho},{delta},{e},{bm},{},{},{},{},{},{}\n",
        verdict_cols.0, verdict_cols.1, verdict_cols.2, prob_cols.0, prob_cols.1, prob_cols.2
    );
    dir.write("analyze.csv", &csv)?;
    dir.write("report.txt", &report)?;
    dir.finish()?;
    Ok(0)
}

fn load_config(path: &Path) -> Result<(ScenarioConfig, Vec<u8>)> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading config {}", path.display()))?;
    let text = String::from_utf8(bytes.clone()).context("config is not valid UTF-8")?;
    let cfg = ScenarioConfig::from_toml(&text)?;
    Ok((cfg, bytes))
}

/// Resolve the base scenario from either a file or a bundled preset name.
fn resolve_scenario(
    config: Option<&Path>,
    preset_name: Option<&str>,
) -> Result<(ScenarioConfig, Vec<u8>)> {
    match (config, preset_name) {
        (Some(path), None) => load_config(path),
        (None, Some(name)) => {
            let cfg = preset(name.parse::<Chain>()?);
            let bytes = cfg.to_toml()?.into_bytes();
            Ok((cfg, bytes))
        }
        _ => bail!(anyhow!(nakasim::Error::Config(
            "exactly one of --config or --preset is required".into()
        ))),
    }
}

fn cmd_simulate(
    out: Option<&Path>,
    config: Option<&Path>,
    preset_name: Option<&str>,
    overrides: (Option<u64>, Option<u64>, Option<u32>),
    seed: Option<u64>,
    verbose: bool,
) -> Result<u8> {
    let (mut cfg, bytes) = resolve_scenario(config, preset_name)?;
    if let Some(n) = overrides.0 {
        cfg.n_val = n;
    }
    if let Some(z) = overrides.1 {
        cfg.n_zp = z;
    }
    if let Some(b) = overrides.2 {
        cfg.num_blocks = b;
    }
    cfg.validate()?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let seed = cfg.seed;
    let dir = resolve_out_dir(out, &format!("simulate-s{seed}"));
    let mut dir = OutputDir::create(&dir)?;
    dir.set_config_hash(&bytes);
    dir.set_seeds(&[seed]);

    let topo = build_topology(&cfg, seed)?;
    let metrics = run(&cfg, &topo, seed)?;
    let row = RunRow {
        label: "run".to_string(),
        protocol: cfg.protocol,
        n_val: cfg.n_val,
        n_zp: cfg.n_zp,
        seed,
        outcome: Ok(RunSummary::from(&metrics)),
    };
    dir.write("summary.csv", &summary_csv(&[row]))?;
    if verbose {
        dir.write("verbose.csv", &verbose_csv(&metrics))?;
    }
    dir.write("effective_config.toml", &cfg.to_toml()?)?;
    let partial = metrics.partial;
    println!(
        "blocks={} delta_max={:.3}s delta_avg={:.3}s delta_p90={:.3}s stale_rate={:.4}{}",
        metrics.blocks_created,
        metrics.delta_max_s,
        metrics.delta_avg_s,
        metrics.delta_p90_s,
        metrics.stale_rate,
        if partial { " [PARTIAL: cutoff hit]" } else { "" }
    );
    dir.finish()?;
    Ok(if partial { 2 } else { 0 })
}

fn parse_axis(axis: &str, values: &str) -> Result<SweepAxis> {
    let axis = axis.to_lowercase();
    Ok(match axis.as_str() {
        "nval" | "n_val" => SweepAxis::NVal(parse_u64_list(values)?),
        "nzp" | "n_zp" => SweepAxis::NZp(parse_u64_list(values)?),
        "protocol" => {
            let mut protos = Vec::new();
            for v in values.split(',') {
                protos.push(match v.trim() {
                    "advertisement_based" => Protocol::AdvertisementBased,
                    "direct_push" => Protocol::DirectPush,
                    "hybrid_push" => Protocol::HybridPush,
                    "compact_blocks_low" => Protocol::CompactBlocksLow,
                    other => bail!(anyhow!(nakasim::Error::Config(format!(
                        "unknown protocol {other}"
                    )))),
                });
            }
            SweepAxis::Protocol(protos)
        }
        "nt-delay-ms" | "nt_delay_ms" => SweepAxis::NtDelayMs(parse_u64_list(values)?),
        "overlay" => {
            let mut flags = Vec::new();
            for v in values.split(',') {
                flags.push(v.trim().parse::<bool>().map_err(|_| {
                    anyhow!(nakasim::Error::Config(format!("bad overlay flag {v}")))
                })?);
            }
            SweepAxis::Overlay(flags)
        }
        other => bail!(anyhow!(nakasim::Error::Config(format!(
            "unknown sweep axis {other} (nval, nzp, protocol, nt-delay-ms, overlay)"
        )))),
    })
}

fn cmd_sweep(
    out: Option<&Path>,
    config: Option<&Path>,
    preset_name: Option<&str>,
    axis: &str,
    values: &str,
    seeds: &str,
) -> Result<u8> {
    let (cfg, bytes) = resolve_scenario(config, preset_name)?;
    let axis = parse_axis(axis, values)?;
    let seeds = parse_seed_spec(seeds)?;
    let dir = resolve_out_dir(out, &format!("sweep-{}", axis_name(&axis)));
    let mut dir = OutputDir::create(&dir)?;
    dir.set_config_hash(&bytes);
    dir.set_seeds(&seeds);

    let spec = SweepSpec {
        base: cfg,
        axis,
        seeds,
    };
    let result = run_sweep(&spec)?;
    dir.write("summary.csv", &summary_csv(&result.runs))?;
    dir.write("aggregate.csv", &aggregate_csv(&result.aggregates))?;
    if let Some(chart) = sweep_chart(&spec.axis, &result) {
        dir.write("aggregate.svg", &chart)?;
    }
    let failures = result.runs.iter().filter(|r| r.outcome.is_err()).count();
    println!(
        "sweep complete: {} runs, {} aggregates, {} failures -> {}",
        result.runs.len(),
        result.aggregates.len(),
        failures,
        dir.root().display()
    );
    dir.finish()?;
    Ok(0)
}

fn axis_name(axis: &SweepAxis) -> &'static str {
    match axis {
        SweepAxis::NVal(_) => "nval",
        SweepAxis::NZp(_) => "nzp",
        SweepAxis::Protocol(_) => "protocol",
        SweepAxis::NtDelayMs(_) => "nt-delay",
        SweepAxis::Overlay(_) => "overlay",
    }
}

fn sweep_chart(axis: &SweepAxis, result: &experiments::SweepResult) -> Option<String> {
    let numeric = matches!(
        axis,
        SweepAxis::NVal(_) | SweepAxis::NZp(_) | SweepAxis::NtDelayMs(_)
    );
    if !numeric || result.aggregates.is_empty() {
        return None;
    }
    let points: Vec<(f64, f64)> = result
        .aggregates
        .iter()
        .map(|a| {
            let x = match axis {
                SweepAxis::NZp(_) => a.n_zp.max(1) as f64,
                _ => a.n_val as f64,
            };
            (x, a.mean_delta_max_s)
        })
        .collect();
    Some(svg::line_chart(
        "mean max propagation delay",
        "network size (log)",
        "delta_max [s]",
        true,
        &[svg::Series {
            name: "delta_max".to_string(),
            points,
        }],
    ))
}

fn cmd_fit(out: Option<&Path>, input: &Path, n_col: &str, delta_col: &str) -> Result<u8> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| anyhow!(nakasim::Error::Config("empty CSV".into())))?;
    let cols: Vec<&str> = header.split(',').collect();
    let n_idx = cols
        .iter()
        .position(|c| *c == n_col)
        .ok_or_else(|| anyhow!(nakasim::Error::Config(format!("no column {n_col}"))))?;
    let d_idx = cols
        .iter()
        .position(|c| *c == delta_col)
        .ok_or_else(|| anyhow!(nakasim::Error::Config(format!("no column {delta_col}"))))?;
    let mut points = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let (Some(n), Some(d)) = (fields.get(n_idx), fields.get(d_idx)) else {
            continue;
        };
        if let (Ok(n), Ok(d)) = (n.parse::<f64>(), d.parse::<f64>()) {
            points.push((n, d));
        }
    }
    let fit = fit_log_regression(&points)?;
    println!(
        "delta(n) = {:.6} * ln(n) + {:.6}   (R^2 = {:.4}, {} points)",
        fit.a,
        fit.b,
        fit.r_squared,
        fit.points.len()
    );
    let dir = resolve_out_dir(out, "fit");
    let mut dir = OutputDir::create(&dir)?;
    dir.write(
        "fit.csv",
        &format!(
            "a,b,r_squared,points\n{},{},{},{}\n",
            fit.a,
            fit.b,
            fit.r_squared,
            fit.points.len()
        ),
    )?;
    dir.finish()?;
    Ok(0)
}

fn cmd_table6(out: Option<&Path>) -> Result<u8> {
    let cells = reproduce_table6()?;
    let md = table6_markdown(&cells);
    print!("{md}");
    let worst = cells
        .iter()
        .filter_map(|c| c.reference.map(|r| (c.beta_max - r).abs()))
        .fold(0.0f64, f64::max);
    println!("worst deviation from bundled reference: {worst:.5}");
    let dir = resolve_out_dir(out, "table6");
    let mut dir = OutputDir::create(&dir)?;
    dir.write("table6.csv", &table6_csv(&cells))?;
    dir.write("table6.md", &md)?;
    dir.finish()?;
    Ok(0)
}

fn cmd_fig1(
    out: Option<&Path>,
    p_star: f64,
    nt: f64,
    rho: f64,
    e: f64,
    n_range: (u64, u64),
) -> Result<u8> {
    let params = CurveParams {
        p_star,
        rho,
        e,
        nt_s: nt,
        fit: published_fits(Chain::Cardano).max_delay,
        n_range,
    };
    let curve = reproduce_fig1(&params)?;
    let mut report = format!(
        "security probability curve: p_star={p_star} rho={rho} e={e} nt={nt}s\n\
         optimal network size n* = {} with P = {:.6}\n",
        curve.n_star, curve.p_peak
    );
    for anchor in [10u64, 20_000, 1_000_000] {
        if let Some(p) = curve.points.iter().find(|p| p.n_val == anchor) {
            report.push_str(&format!("P(n={}) = {:.6}\n", anchor, p.p_secure));
        }
    }
    print!("{report}");
    let dir = resolve_out_dir(out, "fig1");
    let mut dir = OutputDir::create(&dir)?;
    dir.write("curve.csv", &curve_csv(&curve))?;
    dir.write("report.txt", &report)?;
    let chart = svg::line_chart(
        "security probability vs network size",
        "validators (log)",
        "P(secure)",
        true,
        &[svg::Series {
            name: format!("p*={p_star}"),
            points: curve
                .points
                .iter()
                .map(|p| (p.n_val as f64, p.p_secure))
                .collect(),
        }],
    );
    dir.write("curve.svg", &chart)?;
    dir.finish()?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_frontier(
    out: Option<&Path>,
    chains: &str,
    p_stars: &str,
    n_values: &str,
    target: f64,
    sim_n: Option<&str>,
    sim_nt: f64,
    sim_p_hat: f64,
    sim_p_con: f64,
    sim_seeds: &str,
) -> Result<u8> {
    let chains = parse_chains(chains)?;
    let p_stars = parse_f64_list(p_stars)?;
    let n_grid = parse_u64_list(n_values)?;
    let points = max_delay_frontier(&chains, &p_stars, &n_grid, target)?;
    let dir = resolve_out_dir(out, "frontier");
    let mut dir = OutputDir::create(&dir)?;
    dir.write("frontier.csv", &frontier_csv(&points))?;

    let mut series = Vec::new();
    for &chain in &chains {
        for &p in &p_stars {
            let pts: Vec<(f64, f64)> = points
                .iter()
                .filter(|f| f.chain == chain && f.p_star == p)
                .map(|f| (f.n_val as f64, f.bound.as_seconds()))
                .filter(|(_, d)| d.is_finite())
                .collect();
            if !pts.is_empty() {
                series.push(svg::Series {
                    name: format!("{} p*={p}", chain.name()),
                    points: pts,
                });
            }
        }
    }
    if !series.is_empty() {
        dir.write(
            "frontier.svg",
            &svg::line_chart(
                "maximum tolerable delay",
                "validators (log)",
                "delta_max [s]",
                true,
                &series,
            ),
        )?;
    }

    if let Some(sim_n) = sim_n {
        let sim_sizes = parse_u64_list(sim_n)?;
        let seeds = parse_seed_spec(sim_seeds)?;
        dir.set_seeds(&seeds);
        let mut csv = String::from("chain,n_val,sim_delta_max_s,seeds_ok\n");
        for &chain in &chains {
            let mut base = preset(chain);
            base.adversary.enabled = true;
            base.adversary.p_hat = sim_p_hat;
            base.adversary.p_con = sim_p_con;
            base.adversary.nt_delay_ms = (sim_nt * 1000.0) as u64;
            let spec = SweepSpec {
                base,
                axis: SweepAxis::NVal(sim_sizes.clone()),
                seeds: seeds.clone(),
            };
            let result = run_sweep(&spec)?;
            for agg in result.aggregates {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    chain.name(),
                    agg.n_val,
                    agg.mean_delta_max_s,
                    agg.seeds_ok
                ));
            }
        }
        dir.write("frontier_sim.csv", &csv)?;
    }
    println!("frontier written with {} analytic points", points.len());
    dir.finish()?;
    Ok(0)
}

fn cmd_validate(config: &Path) -> Result<u8> {
    let (cfg, _) = load_config(config)?;
    println!(
        "OK: {} validators, {} zero-power nodes, protocol {}",
        cfg.n_val,
        cfg.n_zp,
        cfg.protocol.name()
    );
    Ok(0)
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| anyhow!(nakasim::Error::Config(format!("bad integer {v}"))))
        })
        .collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!(nakasim::Error::Config(format!("bad number {v}"))))
        })
        .collect()
}

fn parse_chains(s: &str) -> Result<Vec<Chain>> {
    s.split(',')
        .map(|v| v.trim().parse::<Chain>().map_err(|e| anyhow!(e)))
        .collect()
}

/// Seeds as `1,2,3` or an inclusive range `1..5`.
fn parse_seed_spec(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .map_err(|_| anyhow!(nakasim::Error::Config(format!("bad seed range {s}"))))?;
        let b: u64 = b
            .trim()
            .parse()
            .map_err(|_| anyhow!(nakasim::Error::Config(format!("bad seed range {s}"))))?;
        if a > b {
            bail!(anyhow!(nakasim::Error::Config(format!(
                "empty seed range {s}"
            ))));
        }
        Ok((a..=b).collect())
    } else {
        parse_u64_list(s)
    }
}
