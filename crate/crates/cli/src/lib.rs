//! Command-line front end: configuration-driven sweeps, figure presets,
//! spectrum dumps, and gap measurement between stored curves.

pub mod error;
pub mod output;

use clap::{Parser, Subcommand};
use error::{CliResult, Failure};
use fadebound_core::exec::{with_threads, Exec};
use fadebound_core::sweep::{
    figure_preset, gap_at_first_common_level, run_sweep, Scheme, SweepConfig, SweepOutcome,
    DEFAULT_GAP_LEVEL, FALLBACK_GAP_LEVELS,
};
use output::{read_csv, render_svg, write_csv, write_json, Metadata, OutputSet};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "FADEBOUND_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fadebound", version, about = "Block error probability bounds for correlated Rayleigh fading")]
pub struct Cli {
    /// Worker threads (default: all cores); FADEBOUND_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sweep described by a JSON configuration file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Also write an SVG chart (same as "svg": true in the config).
        #[arg(long)]
        svg: bool,
    },
    /// Run one of the built-in figure presets (fig1 to fig5).
    Reproduce {
        #[arg(value_parser = ["fig1", "fig2", "fig3", "fig4", "fig5"])]
        figure: String,
        #[arg(long)]
        out: PathBuf,
        /// Probability level at which gaps are reported.
        #[arg(long, default_value_t = DEFAULT_GAP_LEVEL)]
        level: f64,
        /// Skip the Monte Carlo curves.
        #[arg(long)]
        no_mc: bool,
        #[arg(long)]
        svg: bool,
    },
    /// Print the distance spectrum of a scheme as JSON.
    Spectrum {
        /// qpsk, orthogonal:M, permutation:L, or gaussian:K:M:SEED
        #[arg(long)]
        scheme: String,
    },
    /// SNR gap in dB between two stored curves at a probability level.
    Gap {
        #[arg(long)]
        a: PathBuf,
        #[arg(long, default_value = "union_bound")]
        a_column: String,
        /// Defaults to the file given with --a.
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long, default_value = "new_bound")]
        b_column: String,
        #[arg(long, default_value_t = DEFAULT_GAP_LEVEL)]
        level: f64,
    },
}

/// Thread count from the environment, else from the flag.
pub fn resolve_threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Failure::config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        _ => match flag {
            Some(0) => Err(Failure::config("--threads must be positive")),
            f => Ok(f),
        },
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let threads = resolve_threads(cli.threads)?;
    with_threads(threads, || match cli.command {
        Command::Sweep { config, svg } => cmd_sweep(&config, svg, threads),
        Command::Reproduce { figure, out, level, no_mc, svg } => {
            cmd_reproduce(&figure, &out, level, !no_mc, svg, threads)
        }
        Command::Spectrum { scheme } => cmd_spectrum(&scheme),
        Command::Gap { a, a_column, b, b_column, level } => {
            let b = b.unwrap_or_else(|| a.clone());
            let gap = gap_between_files(&a, &a_column, &b, &b_column, level)?;
            println!("{}", output::fmt_f64(gap));
            Ok(())
        }
    })
}

pub fn load_config(path: &Path) -> CliResult<SweepConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("reading {}: {e}", path.display())))?;
    let cfg: SweepConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("parsing {}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_sweep(path: &Path, svg: bool, threads: Option<usize>) -> CliResult<()> {
    let mut cfg = load_config(path)?;
    cfg.svg |= svg;
    let prefix = PathBuf::from(&cfg.output_prefix);
    let mut files = OutputSet::default();
    let outcome = run_sweep(&cfg, Exec::Parallel)?;
    write_run(&prefix, &cfg, &outcome, threads, &mut files)?;
    for p in files.commit() {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn write_run(
    prefix: &Path,
    cfg: &SweepConfig,
    outcome: &SweepOutcome,
    threads: Option<usize>,
    files: &mut OutputSet,
) -> CliResult<()> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let with_ext = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    write_csv(&files.track(with_ext(".csv")), &outcome.rows)?;
    write_json(&files.track(with_ext(".json")), &Metadata::new(cfg, outcome, threads))?;
    if cfg.svg {
        fs::write(files.track(with_ext(".svg")), render_svg(&outcome.label, &outcome.rows))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CurveGap {
    name: String,
    label: String,
    level: Option<f64>,
    gap_db: Option<f64>,
    note: Option<String>,
}

#[derive(Debug, Serialize)]
struct GroupStats {
    signals: u64,
    seeds: usize,
    mean_gap_db: f64,
    min_gap_db: f64,
    max_gap_db: f64,
    std_gap_db: f64,
}

#[derive(Debug, Serialize)]
struct FigureSummary {
    figure: String,
    requested_level: f64,
    curves: Vec<CurveGap>,
    groups: Vec<GroupStats>,
}

fn gap_levels(level: f64) -> Vec<f64> {
    let mut v = vec![level];
    v.extend(FALLBACK_GAP_LEVELS.iter().filter(|&&l| l > level));
    v
}

fn cmd_reproduce(
    figure: &str,
    out: &Path,
    level: f64,
    mc: bool,
    svg: bool,
    threads: Option<usize>,
) -> CliResult<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Failure::config(format!("--level must lie in (0, 1), got {level}")));
    }
    let fig: u8 = figure[3..].parse().map_err(|_| Failure::config(format!("unknown figure {figure}")))?;
    fs::create_dir_all(out)?;
    let mut files = OutputSet::default();
    let mut curves = Vec::new();
    let mut by_size: std::collections::BTreeMap<u64, Vec<f64>> = Default::default();
    for preset in figure_preset(fig)? {
        let mut cfg = preset.config;
        if !mc {
            cfg.compute.retain(|c| *c != fadebound_core::Compute::Mc);
        }
        cfg.svg = svg;
        let prefix = out.join(format!("{figure}_{}", preset.name));
        cfg.output_prefix = prefix.display().to_string();
        let outcome = run_sweep(&cfg, Exec::Parallel)?;
        write_run(&prefix, &cfg, &outcome, threads, &mut files)?;
        let gap = gap_at_first_common_level(&outcome.union_curve(), &outcome.new_curve(), &gap_levels(level));
        let entry = match gap {
            Ok((l, g)) => {
                if matches!(cfg.scheme, Scheme::Gaussian { .. }) {
                    by_size.entry(outcome.signals).or_default().push(g);
                }
                CurveGap { name: preset.name, label: outcome.label, level: Some(l), gap_db: Some(g), note: None }
            }
            Err(e) => CurveGap { name: preset.name, label: outcome.label, level: None, gap_db: None, note: Some(e.to_string()) },
        };
        match (entry.gap_db, entry.level) {
            (Some(g), Some(l)) => println!("{figure} {:<28} gap {g:.3} dB at {l:e}", entry.label),
            _ => println!("{figure} {:<28} gap unavailable: {}", entry.label, entry.note.as_deref().unwrap_or("")),
        }
        curves.push(entry);
    }
    let groups: Vec<GroupStats> = by_size
        .into_iter()
        .map(|(signals, g)| {
            let n = g.len() as f64;
            let mean = g.iter().sum::<f64>() / n;
            let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            GroupStats {
                signals,
                seeds: g.len(),
                mean_gap_db: mean,
                min_gap_db: g.iter().cloned().fold(f64::INFINITY, f64::min),
                max_gap_db: g.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                std_gap_db: var.sqrt(),
            }
        })
        .collect();
    for s in &groups {
        println!(
            "{figure} M={:<4} mean gap {:.3} dB over {} seeds (min {:.3}, max {:.3}, std {:.3})",
            s.signals, s.mean_gap_db, s.seeds, s.min_gap_db, s.max_gap_db, s.std_gap_db
        );
    }
    let summary = FigureSummary { figure: figure.to_string(), requested_level: level, curves, groups };
    write_json(&files.track(out.join(format!("{figure}_summary.json"))), &summary)?;
    files.commit();
    Ok(())
}

fn cmd_spectrum(text: &str) -> CliResult<()> {
    let scheme = Scheme::parse(text)?;
    scheme.validate()?;
    let spectrum = scheme.spectrum()?;
    let json = serde_json::to_string_pretty(&spectrum)
        .map_err(|e| Failure::config(format!("serializing spectrum: {e}")))?;
    println!("{json}");
    Ok(())
}

/// Gap in dB between column `a_col` of `a` and column `b_col` of `b`.
pub fn gap_between_files(a: &Path, a_col: &str, b: &Path, b_col: &str, level: f64) -> CliResult<f64> {
    let curve = |path: &Path, col: &str| -> CliResult<Vec<(f64, f64)>> {
        let mut v = Vec::new();
        for row in read_csv(path)? {
            if let Some(y) = row.column(col)? {
                v.push((row.snr_db, y));
            }
        }
        if v.is_empty() {
            return Err(Failure::config(format!("{} has no values in column {col}", path.display())));
        }
        Ok(v)
    };
    let (ca, cb) = (curve(a, a_col)?, curve(b, b_col)?);
    Ok(fadebound_core::sweep::gap_at_level(&ca, &cb, level)?)
}
