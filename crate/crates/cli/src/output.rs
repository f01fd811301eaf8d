//! CSV, metadata JSON, and SVG writers.

use crate::error::{CliResult, Failure};
use fadebound_core::sweep::{SweepConfig, SweepOutcome, SweepRow};
use fadebound_core::ChannelSummary;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: [&str; 8] = [
    "snr_db",
    "union_bound",
    "new_bound",
    "gamma_star",
    "mc_bler",
    "mc_ci_low",
    "mc_ci_high",
    "mc_trials",
];

/// Shortest decimal that parses back to the same `f64`; exponent form outside
/// `[1e-5, 1e16)` to keep tiny probabilities short.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A parsed CSV row; empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub snr_db: f64,
    pub union_bound: Option<f64>,
    pub new_bound: Option<f64>,
    pub gamma_star: Option<f64>,
    pub mc_bler: Option<f64>,
    pub mc_ci_low: Option<f64>,
    pub mc_ci_high: Option<f64>,
    pub mc_trials: Option<u64>,
}

impl CsvRow {
    pub fn column(&self, name: &str) -> CliResult<Option<f64>> {
        Ok(match name {
            "union_bound" => self.union_bound,
            "new_bound" => self.new_bound,
            "gamma_star" => self.gamma_star,
            "mc_bler" => self.mc_bler,
            "mc_ci_low" => self.mc_ci_low,
            "mc_ci_high" => self.mc_ci_high,
            _ => return Err(Failure::config(format!("unknown curve column '{name}'"))),
        })
    }
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let mc = r.mc.as_ref();
        w.write_record([
            fmt_f64(r.snr_db),
            opt(r.union_bound),
            opt(r.new_bound),
            opt(r.gamma_star),
            opt(mc.map(|m| m.bler)),
            opt(mc.map(|m| m.ci_low)),
            opt(mc.map(|m| m.ci_high)),
            mc.map(|m| m.trials.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> CliResult<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<CsvRow>, _>>()?;
    Ok(rows)
}

/// Run metadata written next to each CSV.
#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub label: &'a str,
    pub signals: u64,
    pub config: &'a SweepConfig,
    pub channel: &'a ChannelSummary,
    pub mc_seeds: Vec<u64>,
    pub threads: Option<usize>,
}

impl<'a> Metadata<'a> {
    pub fn new(cfg: &'a SweepConfig, out: &'a SweepOutcome, threads: Option<usize>) -> Self {
        let mc_seeds = out
            .rows
            .iter()
            .filter_map(|r| r.mc.as_ref().map(|m| m.seed))
            .collect();
        Metadata {
            tool: "fadebound",
            version: env!("CARGO_PKG_VERSION"),
            core_version: fadebound_core::VERSION,
            label: &out.label,
            signals: out.signals,
            config: cfg,
            channel: &out.channel,
            mc_seeds,
            threads,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::config(format!("serializing {}: {e}", path.display())))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Minimal log-scale line chart of the curves in a sweep.
pub fn render_svg(title: &str, rows: &[SweepRow]) -> String {
    let (w, h, left, right, top, bottom) = (640.0, 420.0, 70.0, 20.0, 30.0, 50.0);
    type Series<'a> = (&'a str, &'a str, Vec<(f64, f64)>);
    let series: Vec<Series> = vec![
        ("union bound", "#1f77b4", rows.iter().filter_map(|r| r.union_bound.map(|v| (r.snr_db, v))).collect()),
        ("new bound", "#d62728", rows.iter().filter_map(|r| r.new_bound.map(|v| (r.snr_db, v))).collect()),
        ("simulation", "#2ca02c", rows.iter().filter_map(|r| r.mc.as_ref().map(|m| (r.snr_db, m.bler))).collect()),
    ];
    let positive = series
        .iter()
        .flat_map(|s| s.2.iter().map(|p| p.1))
        .filter(|v| *v > 0.0 && v.is_finite());
    let (lo, hi) = positive.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (ymin, ymax) = if lo.is_finite() {
        (lo.log10().floor().max(hi.log10().ceil() - 12.0), hi.log10().ceil().max(lo.log10().floor() + 1.0))
    } else {
        (-6.0, 0.0)
    };
    let xmin = rows.first().map_or(0.0, |r| r.snr_db);
    let xmax = rows.last().map_or(1.0, |r| r.snr_db).max(xmin + 1e-9);
    let px = |x: f64| left + (x - xmin) / (xmax - xmin) * (w - left - right);
    let py = |y: f64| top + (ymax - y.log10().clamp(ymin, ymax)) / (ymax - ymin) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    for e in (ymin as i32)..=(ymax as i32) {
        let y = top + (ymax - e as f64) / (ymax - ymin) * (h - top - bottom);
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##, w - right);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">1e{e}</text>"#, left - 6.0, y + 4.0);
    }
    let step = nice_step((xmax - xmin) / 8.0);
    let mut x = (xmin / step).ceil() * step;
    while x <= xmax + 1e-9 * step {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, px(x), h - bottom + 18.0, fmt_f64(x));
        x += step;
    }
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - left - right, h - top - bottom);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">SNR (dB)</text>"#, (left + w - right) / 2.0, h - 12.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">block error probability</text>"#, (top + h - bottom) / 2.0, (top + h - bottom) / 2.0);
    let mut legend_y = top + 16.0;
    for (name, colour, pts) in &series {
        let pts: Vec<String> = pts
            .iter()
            .filter(|p| p.1 > 0.0)
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let lx = w - right - 130.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{colour}" stroke-width="2"/>"#, lx + 24.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, lx + 30.0, legend_y + 4.0);
        legend_y += 18.0;
    }
    s.push_str("</svg>\n");
    s
}

/// Smallest of 1, 2, 5 times a power of ten that is at least `raw`.
fn nice_step(raw: f64) -> f64 {
    let p = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * p).find(|&v| v >= raw).unwrap_or(10.0 * p)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Files created during a command; removed again unless the command succeeds.
#[derive(Debug, Default)]
pub struct OutputSet {
    created: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    /// Register `path` before writing to it.
    pub fn track(&mut self, path: PathBuf) -> PathBuf {
        self.created.push(path.clone());
        path
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.created)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.created {
                let _ = fs::remove_file(p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, -2.5, 0.1, 1e-5, 9.99e-6, 3.0e-300, 1e16, 12345.678, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(2.5e-7), "2.5e-7");
    }

    #[test]
    fn unknown_column_rejected() {
        let row = CsvRow {
            snr_db: 0.0,
            union_bound: Some(1.0),
            new_bound: None,
            gamma_star: None,
            mc_bler: None,
            mc_ci_low: None,
            mc_ci_high: None,
            mc_trials: None,
        };
        assert_eq!(row.column("union_bound").unwrap(), Some(1.0));
        assert!(row.column("snr").is_err());
    }

    #[test]
    fn svg_is_well_formed() {
        let rows = vec![
            SweepRow { snr_db: 0.0, union_bound: Some(2.0), new_bound: Some(0.5), gamma_star: Some(1.0), mc: None },
            SweepRow { snr_db: 10.0, union_bound: Some(1e-3), new_bound: Some(8e-4), gamma_star: Some(0.1), mc: None },
        ];
        let svg = render_svg("a < b", &rows);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
    }

    #[test]
    fn uncommitted_outputs_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        {
            let mut set = OutputSet::default();
            fs::write(set.track(path.clone()), "x").unwrap();
        }
        assert!(!path.exists());
        let mut set = OutputSet::default();
        fs::write(set.track(path.clone()), "x").unwrap();
        set.commit();
        assert!(path.exists());
    }
}
