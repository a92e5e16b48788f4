//! Command-line front-end: DoF regions, NDT solutions, cache sweeps and
//! finite-SNR simulations as CSV or JSON artifacts.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cachecast_core::caching::{
    self, decentralized_place, generate_coded_messages, load_cache_fixture, worst_case_demand,
    CacheState, DemandVector,
};
use cachecast_core::dof_region::{brute_force_vertices, corner_points, inner_bound, outer_bound};
use cachecast_core::model::{canonical_groups, MessageLengthVector, Regime, SystemConfig};
use cachecast_core::ndt::{
    benchmark_group_by_group, benchmark_time_sharing, gap, solve_ndt, DeliveryPlan, NdtBounds,
};
use cachecast_core::phy::{simulate_delivery, time_sharing_plan};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// The coded-message length vector of Example 1 (K=3, M=5, N=3), canonical
/// group order {1},{2},{3},{1,2},{1,3},{2,3},{1,2,3}.
const EXAMPLE1_F: [f64; 7] = [0.2, 0.1, 0.0, 0.15, 0.25, 0.35, 0.0];

#[derive(Parser)]
#[command(name = "cachecast", version, about = "Delivery-time experiments for multi-antenna coded caching")]
struct Cli {
    /// Flat key-value config file (lines `key = value`, `#` comments); keys
    /// match flag names; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the outer-bound rows and inner-bound corner points of the DoF region.
    Region(RegionCmd),
    /// Solve the minimum-NDT problem for one message-length vector.
    Ndt(NdtCmd),
    /// Average NDT vs cache size for the proposed and benchmark schemes.
    Sweep(SweepCmd),
    /// Finite-SNR Monte Carlo delivery simulation over a power grid.
    Simulate(SimulateCmd),
    /// One-shot reproduction of Example 1 (K=3, M=5, N=3).
    Example1(Example1Cmd),
}

#[derive(Args, Clone)]
struct SysArgs {
    /// Number of users.
    #[arg(long)]
    k: Option<usize>,
    /// Transmit antennas at the BS.
    #[arg(long)]
    m: Option<usize>,
    /// Receive antennas per user.
    #[arg(long)]
    n: Option<usize>,
    /// Library size (number of files).
    #[arg(long)]
    l: Option<usize>,
    /// Normalized cache size in [0,1]; accepts `p/q`.
    #[arg(long)]
    mu: Option<String>,
    /// File length in bits.
    #[arg(long)]
    f_bits: Option<u64>,
    /// Transmit power, linear scale.
    #[arg(long)]
    power: Option<f64>,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RegionCmd {
    #[command(flatten)]
    sys: SysArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct NdtCmd {
    #[command(flatten)]
    sys: SysArgs,
    /// Inline message lengths, comma-separated in canonical group order.
    #[arg(long, value_name = "F1,F2,...")]
    f: Option<String>,
    /// Cache-state fixture; lengths come from worst-case-demand XOR combining.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Placement mode when lengths are generated (no --f/--fixture).
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Seed for decentralized placement.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Mode {
    Centralized,
    Decentralized,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    sys: SysArgs,
    /// Placement mode.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Cache-size grid, comma-separated; accepts `p/q` entries.
    #[arg(long, value_name = "MU1,MU2,...")]
    mu_grid: Option<String>,
    /// Decentralized realizations per grid point.
    #[arg(long)]
    seeds: Option<usize>,
    /// Demand sample cap for centralized sweeps (exhaustive when L^K is below it).
    #[arg(long)]
    samples: Option<usize>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    sys: SysArgs,
    /// Inline message lengths, comma-separated in canonical group order.
    #[arg(long, value_name = "F1,F2,...")]
    f: Option<String>,
    /// Cache-state fixture; lengths come from worst-case-demand XOR combining.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Placement mode when lengths are generated.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Power grid in dB, comma-separated.
    #[arg(long, value_name = "DB1,DB2,...")]
    pgrid: Option<String>,
    /// Channel draws per grid point.
    #[arg(long)]
    draws: Option<usize>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct Example1Cmd {
    #[command(flatten)]
    out: OutArgs,
}

/// Flat key-value configuration: `key = value` or `key value` lines.
struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            for (ln, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = match line.split_once('=') {
                    Some((k, v)) => (k, v),
                    None => line
                        .split_once(char::is_whitespace)
                        .with_context(|| format!("config line {}: expected key value", ln + 1))?,
                };
                map.insert(key.trim().replace('-', "_"), value.trim().to_string());
            }
        }
        Ok(Config(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.0.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow::anyhow!("config key {key}={raw}: {e}")),
            None => Ok(default),
        }
    }

    fn get_ratio(&self, key: &str, flag: Option<&str>, default: f64) -> Result<f64> {
        let raw = match flag {
            Some(v) => v.to_string(),
            None => match self.0.get(key) {
                Some(v) => v.clone(),
                None => return Ok(default),
            },
        };
        parse_ratio(&raw).with_context(|| format!("bad value for {key}: {raw}"))
    }
}

fn parse_ratio(s: &str) -> Result<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse()?;
        let den: f64 = den.trim().parse()?;
        if den == 0.0 {
            bail!("zero denominator");
        }
        Ok(num / den)
    } else {
        Ok(s.trim().parse()?)
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| parse_ratio(p).with_context(|| format!("bad list entry {p}")))
        .collect()
}

fn resolve_sys(sys: &SysArgs, conf: &Config) -> Result<SystemConfig> {
    let k = conf.get("k", sys.k, 3)?;
    let m = conf.get("m", sys.m, 5)?;
    let n = conf.get("n", sys.n, 3)?;
    let l = conf.get("l", sys.l, 4)?;
    let mu = conf.get_ratio("mu", sys.mu.as_deref(), 0.4)?;
    let f_bits = conf.get("f_bits", sys.f_bits, 100)?;
    let power = conf.get("power", sys.power, 1000.0)?;
    SystemConfig::new(k, m, n, l, f_bits, mu, power).map_err(Into::into)
}

/// An output sink: CSV gets a versioned schema comment plus a timestamp line.
struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    fn write(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text)
                .with_context(|| format!("writing {}", path.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn csv_header(schema: &str, columns: &[&str]) -> String {
    let ts = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# {schema} generated={ts}\n{}\n", columns.join(","))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let conf = Config::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Region(c) => cmd_region(c, &conf),
        Cmd::Ndt(c) => cmd_ndt(c, &conf),
        Cmd::Sweep(c) => cmd_sweep(c, &conf),
        Cmd::Simulate(c) => cmd_simulate(c, &conf),
        Cmd::Example1(c) => cmd_example1(c),
    }
}

#[derive(Serialize)]
struct RegionRecord {
    config: SystemConfig,
    regime: String,
    outer_rows: Vec<OuterRow>,
    corners: Vec<CornerRecord>,
    checks: RegionChecks,
}

#[derive(Serialize)]
struct OuterRow {
    label: String,
    coeffs: Vec<f64>,
    rhs: f64,
}

#[derive(Serialize)]
struct CornerRecord {
    source: String,
    point: Vec<f64>,
}

#[derive(Serialize)]
struct RegionChecks {
    corner_count: usize,
    /// Max |inner - outer| support-function deviation over random directions;
    /// only meaningful where the bounds are tight (K=2 or M/N outside (1,K)).
    support_deviation: Option<f64>,
}

fn cmd_region(c: RegionCmd, conf: &Config) -> Result<()> {
    let cfg = resolve_sys(&c.sys, conf)?;
    let region = inner_bound(&cfg);
    let outer = outer_bound(&cfg);
    let corners = corner_points(&region);
    let idx = canonical_groups(cfg.k)?;

    let tight = cfg.k == 2 || !matches!(cfg.regime(), Regime::Mid);
    let support_deviation = if tight {
        let outer_vertices = brute_force_vertices(&outer)?;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut dev = 0.0f64;
        for _ in 0..64 {
            let w: Vec<f64> = (0..cfg.group_count()).map(|_| rng.gen::<f64>()).collect();
            dev = dev.max((corners.support(&w) - outer_vertices.support(&w)).abs());
        }
        Some(dev)
    } else {
        None
    };

    let record = RegionRecord {
        config: cfg,
        regime: format!("{:?}", cfg.regime()),
        outer_rows: outer
            .rows
            .iter()
            .map(|r| OuterRow {
                label: format!("{:?}", r.label),
                coeffs: r.coeffs.clone(),
                rhs: r.rhs,
            })
            .collect(),
        corners: corners
            .points
            .iter()
            .zip(&corners.sources)
            .map(|(p, s)| CornerRecord { source: format!("{s:?}"), point: p.0.clone() })
            .collect(),
        checks: RegionChecks { corner_count: corners.len(), support_deviation },
    };

    let sink = Sink { out: c.out.out.clone() };
    match c.out.format.unwrap_or(Format::Json) {
        Format::Json => sink.write(&(serde_json::to_string_pretty(&record)? + "\n")),
        Format::Csv => {
            let mut cols = vec!["source".to_string()];
            cols.extend(idx.groups().iter().map(|g| g.label()));
            let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut text = csv_header("cachecast-region-v1", &col_refs);
            for rec in &record.corners {
                let vals: Vec<String> = rec.point.iter().map(|v| format!("{v}")).collect();
                text.push_str(&format!("{},{}\n", rec.source, vals.join(",")));
            }
            sink.write(&text)
        }
    }
}

enum FSource<'a> {
    Inline(&'a str),
    Fixture(&'a Path),
    Generated { mode: Mode, seed: u64 },
}

fn resolve_lengths(cfg: &SystemConfig, source: FSource) -> Result<(MessageLengthVector, String)> {
    match source {
        FSource::Inline(text) => {
            let vals = parse_list(text)?;
            if vals.len() != cfg.group_count() {
                bail!("expected {} lengths, got {}", cfg.group_count(), vals.len());
            }
            Ok((MessageLengthVector(vals), "inline".into()))
        }
        FSource::Fixture(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading fixture {}", path.display()))?;
            let cache = load_cache_fixture(&text, cfg)?;
            let r = worst_case_demand(cfg)?;
            Ok((generate_coded_messages(&cache, &r), format!("fixture:{}", path.display())))
        }
        FSource::Generated { mode, seed } => {
            let cache = match mode {
                Mode::Centralized => caching::centralized_place(cfg)?,
                Mode::Decentralized => decentralized_place(cfg, seed, 0),
            };
            let r = worst_case_demand(cfg)?;
            let tag = match mode {
                Mode::Centralized => "generated:centralized".to_string(),
                Mode::Decentralized => format!("generated:decentralized:seed={seed}"),
            };
            Ok((generate_coded_messages(&cache, &r), tag))
        }
    }
}

#[derive(Serialize)]
struct NdtRecord {
    config: SystemConfig,
    f_source: String,
    f: Vec<f64>,
    bounds: Option<NdtBounds>,
    plan: DeliveryPlan,
    time_sharing: f64,
    group_by_group: f64,
}

fn cmd_ndt(c: NdtCmd, conf: &Config) -> Result<()> {
    let cfg = resolve_sys(&c.sys, conf)?;
    let seed = conf.get("seed", c.seed, 0)?;
    let source = if let Some(f) = c.f.as_deref() {
        FSource::Inline(f)
    } else if let Some(p) = c.fixture.as_deref() {
        FSource::Fixture(p)
    } else {
        FSource::Generated { mode: c.mode.unwrap_or(Mode::Centralized), seed }
    };
    let (f, f_source) = resolve_lengths(&cfg, source)?;
    let plan = solve_ndt(&f, &cfg)?;
    let bounds = if f.is_zero() { None } else { Some(gap(&f, &cfg)?) };
    let record = NdtRecord {
        config: cfg,
        f_source,
        f: f.0.clone(),
        bounds,
        time_sharing: benchmark_time_sharing(&f, &cfg)?,
        group_by_group: benchmark_group_by_group(&f, &cfg)?,
        plan,
    };

    let sink = Sink { out: c.out.out.clone() };
    match c.out.format.unwrap_or(Format::Json) {
        Format::Json => sink.write(&(serde_json::to_string_pretty(&record)? + "\n")),
        Format::Csv => {
            let cols = ["tau_a", "tau_l", "tau_u", "rho", "time_sharing", "group_by_group"];
            let mut text = csv_header("cachecast-ndt-v1", &cols);
            let (tl, tu, rho) = match &record.bounds {
                Some(b) => (
                    format!("{}", b.tau_l),
                    b.tau_u.map(|v| format!("{v}")).unwrap_or_default(),
                    format!("{}", b.rho),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            text.push_str(&format!(
                "{},{},{},{},{},{}\n",
                record.plan.tau, tl, tu, rho, record.time_sharing, record.group_by_group
            ));
            sink.write(&text)
        }
    }
}

struct Stats {
    mean: f64,
    std: f64,
}

fn stats(values: &[f64]) -> Stats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Stats { mean, std: var.sqrt() }
}

fn sweep_point(
    cfg: &SystemConfig,
    mode: Mode,
    realizations: usize,
    samples: usize,
    seed: u64,
) -> Result<(usize, [Stats; 3])> {
    let mut proposed = Vec::new();
    let mut ts = Vec::new();
    let mut gbg = Vec::new();

    let mut eval = |f: &MessageLengthVector| -> Result<()> {
        proposed.push(solve_ndt(f, cfg)?.tau);
        ts.push(benchmark_time_sharing(f, cfg)?);
        gbg.push(benchmark_group_by_group(f, cfg)?);
        Ok(())
    };

    match mode {
        Mode::Centralized => {
            let cache = caching::centralized_place(cfg)?;
            let total = (cfg.l as u128).pow(cfg.k as u32);
            if total <= samples as u128 {
                // exhaustive demand enumeration
                let mut demand = vec![1usize; cfg.k];
                loop {
                    eval(&generate_coded_messages(&cache, &DemandVector(demand.clone())))?;
                    let mut pos = 0;
                    loop {
                        if pos == cfg.k {
                            break;
                        }
                        demand[pos] += 1;
                        if demand[pos] <= cfg.l {
                            break;
                        }
                        demand[pos] = 1;
                        pos += 1;
                    }
                    if pos == cfg.k {
                        break;
                    }
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..samples {
                    let demand: Vec<usize> =
                        (0..cfg.k).map(|_| rng.gen_range(1..=cfg.l)).collect();
                    eval(&generate_coded_messages(&cache, &DemandVector(demand)))?;
                }
            }
        }
        Mode::Decentralized => {
            for r in 0..realizations as u64 {
                let cache: CacheState =
                    decentralized_place(cfg, seed.wrapping_add(r), caching::DEFAULT_PLACEMENT_BITS);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (r.wrapping_mul(0x9e37_79b9)));
                let demand: Vec<usize> = (0..cfg.k).map(|_| rng.gen_range(1..=cfg.l)).collect();
                eval(&generate_coded_messages(&cache, &DemandVector(demand)))?;
            }
        }
    }
    Ok((proposed.len(), [stats(&proposed), stats(&ts), stats(&gbg)]))
}

fn cmd_sweep(c: SweepCmd, conf: &Config) -> Result<()> {
    let base = resolve_sys(&c.sys, conf)?;
    let mode = c.mode.unwrap_or(Mode::Decentralized);
    let seeds = conf.get("seeds", c.seeds, 200)?;
    let samples = conf.get("samples", c.samples, 65536)?;
    let seed = conf.get("seed", c.seed, 0)?;
    let grid: Vec<f64> = match c.mu_grid.as_deref().or_else(|| conf.0.get("mu_grid").map(String::as_str)) {
        Some(text) => parse_list(text)?,
        None => match mode {
            // centralized placement needs integer K*mu
            Mode::Centralized => (0..=base.k).map(|t| t as f64 / base.k as f64).collect(),
            Mode::Decentralized => (0..=10).map(|t| t as f64 / 10.0).collect(),
        },
    };

    let mode_tag = match mode {
        Mode::Centralized => "centralized",
        Mode::Decentralized => "decentralized",
    };
    let cols = [
        "mode",
        "mu",
        "samples",
        "proposed_mean",
        "proposed_std",
        "time_sharing_mean",
        "time_sharing_std",
        "group_by_group_mean",
        "group_by_group_std",
    ];
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &mu in &grid {
        let cfg = SystemConfig::new(base.k, base.m, base.n, base.l, base.f_bits, mu, base.power)?;
        let (count, [p, t, g]) = sweep_point(&cfg, mode, seeds, samples, seed)?;
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            mode_tag, mu, count, p.mean, p.std, t.mean, t.std, g.mean, g.std
        ));
        records.push(serde_json::json!({
            "mode": mode_tag,
            "mu": mu,
            "samples": count,
            "proposed": {"mean": p.mean, "std": p.std},
            "time_sharing": {"mean": t.mean, "std": t.std},
            "group_by_group": {"mean": g.mean, "std": g.std},
        }));
    }

    let sink = Sink { out: c.out.out.clone() };
    match c.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut text = csv_header("cachecast-sweep-v1", &cols);
            for row in rows {
                text.push_str(&row);
                text.push('\n');
            }
            sink.write(&text)
        }
        Format::Json => sink.write(&(serde_json::to_string_pretty(&records)? + "\n")),
    }
}

fn cmd_simulate(c: SimulateCmd, conf: &Config) -> Result<()> {
    let cfg = resolve_sys(&c.sys, conf)?;
    let seed = conf.get("seed", c.seed, 0)?;
    let draws = conf.get("draws", c.draws, 200)?;
    let pgrid: Vec<f64> = match c.pgrid.as_deref().or_else(|| conf.0.get("pgrid").map(String::as_str)) {
        Some(text) => parse_list(text)?,
        None => vec![10.0, 20.0, 30.0, 40.0, 50.0],
    };

    let source = if let Some(f) = c.f.as_deref() {
        FSource::Inline(f)
    } else if let Some(p) = c.fixture.as_deref() {
        FSource::Fixture(p)
    } else {
        FSource::Generated { mode: c.mode.unwrap_or(Mode::Centralized), seed }
    };
    let (f, _) = resolve_lengths(&cfg, source)?;
    if f.is_zero() {
        bail!("nothing to deliver: message lengths are all zero");
    }

    let proposed = solve_ndt(&f, &cfg)?;
    let ts_plan = time_sharing_plan(&f, &cfg);
    let tau_ts = benchmark_time_sharing(&f, &cfg)?;

    let cols = [
        "p_db",
        "power",
        "draws",
        "proposed_mean",
        "proposed_std",
        "time_sharing_mean",
        "time_sharing_std",
        "tau_a",
        "tau_time_sharing",
        "proposed_better",
    ];
    let mut text = csv_header("cachecast-simulate-v1", &cols);
    let mut crossover_low = false;
    let mut crossover_high = false;
    for &p_db in &pgrid {
        let p = 10f64.powf(p_db / 10.0);
        let sp = simulate_delivery(&proposed, &f, &cfg, p, draws, seed)?;
        let st = simulate_delivery(&ts_plan, &f, &cfg, p, draws, seed)?;
        let better = sp.ndt_mean <= st.ndt_mean;
        if better {
            crossover_high = true;
        } else {
            crossover_low = true;
        }
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            p_db,
            p,
            draws,
            sp.ndt_mean,
            sp.ndt_std,
            st.ndt_mean,
            st.ndt_std,
            proposed.tau,
            tau_ts,
            better
        ));
    }
    text.push_str(&format!("# crossover={}\n", crossover_low && crossover_high));

    let sink = Sink { out: c.out.out.clone() };
    match c.out.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.write(&text),
        Format::Json => bail!("simulate only emits CSV"),
    }
}

#[derive(Serialize)]
struct Example1Record {
    config: SystemConfig,
    f: Vec<f64>,
    bounds: NdtBounds,
    plan: DeliveryPlan,
    time_sharing: f64,
    group_by_group: f64,
    corner_points_present: bool,
}

fn cmd_example1(c: Example1Cmd) -> Result<()> {
    let cfg = SystemConfig::new(3, 5, 3, 4, 100, 0.4, 1000.0)?;
    let f = MessageLengthVector(EXAMPLE1_F.to_vec());
    let plan = solve_ndt(&f, &cfg)?;
    let bounds = gap(&f, &cfg)?;
    let corners = corner_points(&inner_bound(&cfg));
    let expected = [
        vec![3.0, 0.0, 0.0, 0.0, 0.0, 1.5, 0.0],
        vec![0.0, 1.5, 0.0, 0.0, 1.5, 1.5, 0.0],
        vec![0.0, 0.0, 0.0, 1.5, 1.5, 1.5, 0.0],
    ];
    let present = expected.iter().all(|p| corners.contains_point(p, 1e-7));
    let record = Example1Record {
        config: cfg,
        f: f.0.clone(),
        bounds,
        time_sharing: benchmark_time_sharing(&f, &cfg)?,
        group_by_group: benchmark_group_by_group(&f, &cfg)?,
        corner_points_present: present,
        plan,
    };
    let sink = Sink { out: c.out.out.clone() };
    match c.out.format.unwrap_or(Format::Json) {
        Format::Json => sink.write(&(serde_json::to_string_pretty(&record)? + "\n")),
        Format::Csv => bail!("example1 only emits JSON"),
    }
}
