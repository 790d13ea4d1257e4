//! Commands behind the `replayguard` binary.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use replayguard::bloom::{fp_approx, fp_exact};
use replayguard::montecarlo::{fp_trials, FpRow, FpTrialConfig};
use replayguard::replay::{network_storage_overhead, state_bytes};
use replayguard::simnet::{self, sweep_configs, write_trace, SimOutcome};
use replayguard::{DetectorConfig, Error as CoreError, Exec, RunMetrics, Scheme, SimConfig};

pub const SEED_ENV: &str = "REPLAYGUARD_SEED";

pub const CSV_HEADER: &str = "scheme,n_nodes,window,filter_bits,k,seed,sent,delivered,replays_injected,\
replays_detected,false_positives,false_negatives,epoch_resets,state_bytes_bitmap,state_bytes_ledger,fp_predicted";

#[derive(Debug)]
pub enum CliError {
    /// Exit status 1.
    Io(String),
    /// Exit status 2.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Validation(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: String,
    pub values: Vec<f64>,
}

/// A [`SimConfig`] plus the optional `sweep`, `output` and `trace` keys.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentFile {
    pub sim: SimConfig,
    pub sweep: Option<SweepSpec>,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

// 1-based line of the first occurrence of `"key"`, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map_or(1, |i| i + 1)
}

fn validation(path: &Path, line: usize, msg: impl fmt::Display) -> CliError {
    CliError::Validation(format!("{}:{line}: {msg}", path.display()))
}

impl ExperimentFile {
    pub fn parse(path: &Path, text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| validation(path, e.line(), e))?;
        let Value::Object(mut map) = value else {
            return Err(validation(path, 1, "config must be a JSON object"));
        };
        let mut take = |key: &str| map.remove(key).filter(|v| !v.is_null());
        let sweep = take("sweep");
        let output = take("output");
        let trace = take("trace");
        let sweep = sweep
            .map(serde_json::from_value::<SweepSpec>)
            .transpose()
            .map_err(|e| validation(path, line_of(text, "sweep"), e))?;
        let as_path = |v: Option<Value>, key: &str| -> Result<Option<PathBuf>, CliError> {
            v.map(|v| match v {
                Value::String(s) => Ok(PathBuf::from(s)),
                _ => Err(validation(
                    path,
                    line_of(text, key),
                    format!("{key} must be a string"),
                )),
            })
            .transpose()
        };
        let output = as_path(output, "output")?;
        let trace = as_path(trace, "trace")?;

        let sim: SimConfig = serde_json::from_value(Value::Object(map)).map_err(|e| {
            let msg = e.to_string();
            // serde names the offending key in backticks.
            let key = msg.split('`').nth(1).unwrap_or("");
            validation(path, line_of(text, key), msg.clone())
        })?;
        let file = ExperimentFile {
            sim,
            sweep,
            output,
            trace,
        };
        file.validate().map_err(|e| {
            let key = e.field().map_or("", |f| f.rsplit('.').next().unwrap_or(f));
            validation(path, line_of(text, key), e)
        })?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        match &self.sweep {
            Some(s) => sweep_configs(&self.sim, &s.axis, &s.values).map(drop),
            None => self.sim.validate(),
        }
    }

    /// Every run this file describes, in output order.
    pub fn runs(&self) -> Result<Vec<SimConfig>, CoreError> {
        match &self.sweep {
            Some(s) => sweep_configs(&self.sim, &s.axis, &s.values),
            None => self.sim.validate().map(|()| vec![self.sim.clone()]),
        }
    }
}

/// `%g`-style rendering with `digits` significant digits.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        format!(
            "{}e{}{:02}",
            trim(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

pub fn csv_row(cfg: &SimConfig, m: &RunMetrics) -> String {
    let d = &cfg.detector;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        d.scheme,
        cfg.n_nodes,
        d.window,
        d.filter_bits,
        d.effective_k(),
        cfg.seed,
        m.sent,
        m.delivered,
        m.replays_injected,
        m.replays_detected,
        m.false_positives,
        m.false_negatives,
        m.epoch_resets,
        m.state_bytes_bitmap,
        m.state_bytes_ledger,
        fmt_sig(m.fp_predicted, 6),
    )
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Executes every run in the file. CSV goes to the configured output, or to
/// `stdout` when none is set. Returns the per-run results.
pub fn cmd_run(
    path: &Path,
    opts: &RunOptions,
    stdout: &mut dyn Write,
) -> Result<Vec<(SimConfig, RunMetrics)>, CliError> {
    let mut file = ExperimentFile::load(path)?;
    if let Some(seed) = opts.seed {
        file.sim.seed = seed;
    }
    let output = opts.output.clone().or(file.output.clone());
    let trace_path = opts.trace.clone().or(file.trace.clone());
    let cfgs = file.runs().map_err(|e| validation(path, 1, e))?;

    let traced = trace_path.is_some();
    let outcomes: Vec<SimOutcome> = Exec::Parallel
        .map(cfgs.iter().collect(), |cfg| {
            if traced {
                simnet::run(cfg)
            } else {
                simnet::run_metrics(cfg).map(|metrics| SimOutcome {
                    metrics,
                    trace: Vec::new(),
                })
            }
        })
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for (cfg, out) in cfgs.iter().zip(&outcomes) {
        csv.push_str(&csv_row(cfg, &out.metrics));
        csv.push('\n');
    }
    match &output {
        Some(p) => write_file(p, csv.as_bytes())?,
        None => stdout
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?,
    }

    if let Some(p) = &trace_path {
        let mut buf = Vec::new();
        let sweep = file.sweep.as_ref();
        for (i, out) in outcomes.iter().enumerate() {
            if let Some(s) = sweep {
                writeln!(buf, "# run {i} {}={}", s.axis, s.values[i]).expect("in-memory write");
            }
            write_trace(&mut buf, &out.trace).expect("in-memory write");
        }
        write_file(p, &buf)?;
    }
    Ok(cfgs
        .into_iter()
        .zip(outcomes.into_iter().map(|o| o.metrics))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalcKind {
    Eq4,
    FpExact,
    FpApprox,
    StateBytes,
}

impl std::str::FromStr for CalcKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "eq4" => Ok(CalcKind::Eq4),
            "fp_exact" => Ok(CalcKind::FpExact),
            "fp_approx" => Ok(CalcKind::FpApprox),
            "state_bytes" => Ok(CalcKind::StateBytes),
            _ => Err(CliError::Validation(format!(
                "unknown calc kind {s:?}; expected eq4, fp_exact, fp_approx or state_bytes"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CalcParams {
    pub b: Option<u64>,
    pub n: Option<u64>,
    pub m: Option<u32>,
    pub k: Option<u8>,
    pub p: Option<u64>,
    pub scheme: Option<String>,
    pub neighbors: Option<u64>,
    pub window: Option<u32>,
}

fn need<T>(v: Option<T>, flag: &str, kind: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Validation(format!("{kind} requires --{flag}")))
}

fn render(label: &str, v: f64) -> String {
    format!("{label} = {v} ({})", fmt_sig(v, 4))
}

pub fn cmd_calc(kind: CalcKind, p: &CalcParams) -> Result<String, CliError> {
    let invalid = |e: CoreError| CliError::Validation(e.to_string());
    match kind {
        CalcKind::Eq4 => {
            let b = need(p.b, "B", "eq4")?;
            let n = need(p.n, "n", "eq4")?;
            if b == 0 || n == 0 {
                return Err(CliError::Validation(
                    "eq4 needs --B >= 1 and --n >= 1".into(),
                ));
            }
            let v = network_storage_overhead(b, n);
            Ok(format!("eq4 = {v} ({})", fmt_sig(v as f64, 4)))
        }
        CalcKind::FpExact => {
            let m = need(p.m, "m", "fp_exact")?;
            let k = need(p.k, "k", "fp_exact")?;
            let n = need(p.p, "p", "fp_exact")?;
            if m == 0 || k == 0 {
                return Err(CliError::Validation(
                    "fp_exact needs --m >= 1 and --k >= 1".into(),
                ));
            }
            Ok(render("fp_exact", fp_exact(m, k, n)))
        }
        CalcKind::FpApprox => {
            let k = need(p.k, "k", "fp_approx")?;
            if k == 0 {
                return Err(CliError::Validation("fp_approx needs --k >= 1".into()));
            }
            Ok(render("fp_approx", fp_approx(k)))
        }
        CalcKind::StateBytes => {
            let scheme: Scheme = need(p.scheme.as_deref(), "scheme", "state_bytes")?
                .parse()
                .map_err(invalid)?;
            let neighbors = need(p.neighbors, "neighbors", "state_bytes")?;
            let mut cfg = DetectorConfig::new(scheme);
            if let Some(w) = p.window {
                cfg.window = w;
            }
            if let Some(m) = p.m {
                cfg.filter_bits = m;
            }
            if let Some(k) = p.k {
                cfg.k = k;
            }
            cfg.validate().map_err(invalid)?;
            let sb = state_bytes(&cfg, neighbors);
            Ok(format!(
                "state_bytes_bitmap = {} ({})\nstate_bytes_ledger = {} ({})",
                sb.bitmap,
                fmt_sig(sb.bitmap as f64, 4),
                sb.ledger,
                fmt_sig(sb.ledger as f64, 4)
            ))
        }
    }
}

pub fn fig19_csv(rows: &[FpRow]) -> String {
    let mut out = String::from("k,fp_empirical,fp_predicted\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.k,
            fmt_sig(r.fp_empirical, 6),
            fmt_sig(r.fp_predicted, 6)
        ));
    }
    out
}

/// Measures empirical false-positive rates for k = 1..=8 and writes the CSV.
pub fn cmd_fig19(out: &Path, cfg: &FpTrialConfig) -> Result<Vec<FpRow>, CliError> {
    let rows = fp_trials(Exec::Parallel, cfg).map_err(|e| CliError::Validation(e.to_string()))?;
    write_file(out, fig19_csv(&rows).as_bytes())?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.003_906_25, 6), "0.00390625");
        assert_eq!(fmt_sig(0.5, 6), "0.5");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(0.073_001_092_787_997, 6), "0.0730011");
        assert_eq!(fmt_sig(0.073_001_092_787_997, 4), "0.073");
        assert_eq!(fmt_sig(2450.0, 4), "2450");
        assert_eq!(fmt_sig(123_456_789.0, 4), "1.235e+08");
        assert_eq!(fmt_sig(1.0 / 65_536.0, 6), "1.52588e-05");
        assert_eq!(fmt_sig(9.999_999, 4), "10");
    }

    #[test]
    fn calc_values() {
        let p = CalcParams {
            b: Some(2),
            n: Some(50),
            ..Default::default()
        };
        assert_eq!(cmd_calc(CalcKind::Eq4, &p).unwrap(), "eq4 = 2450 (2450)");
        let p = CalcParams {
            k: Some(8),
            ..Default::default()
        };
        assert_eq!(
            cmd_calc(CalcKind::FpApprox, &p).unwrap(),
            "fp_approx = 0.00390625 (0.003906)"
        );
        let p = CalcParams {
            m: Some(64),
            k: Some(2),
            p: Some(10),
            ..Default::default()
        };
        assert!(cmd_calc(CalcKind::FpExact, &p)
            .unwrap()
            .ends_with("(0.073)"));
        let p = CalcParams {
            scheme: Some("hash_window".into()),
            neighbors: Some(5),
            window: Some(8),
            ..Default::default()
        };
        assert!(cmd_calc(CalcKind::StateBytes, &p)
            .unwrap()
            .contains("state_bytes_ledger = 800"));
    }

    #[test]
    fn calc_missing_parameters() {
        let err = cmd_calc(
            CalcKind::Eq4,
            &CalcParams {
                b: Some(2),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = cmd_calc(
            CalcKind::StateBytes,
            &CalcParams {
                scheme: Some("nope".into()),
                neighbors: Some(1),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!("eq5".parse::<CalcKind>().is_err());
    }

    #[test]
    fn parse_reports_line_of_bad_field() {
        let text = "{\n  \"n_nodes\": 4,\n  \"p_loss\": 1.5\n}\n";
        let err = ExperimentFile::parse(Path::new("x.json"), text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().starts_with("x.json:3:"), "{err}");

        let text = "{\n  \"n_nodes\": 4,\n  \"colour\": 1\n}\n";
        let err = ExperimentFile::parse(Path::new("x.json"), text).unwrap_err();
        assert!(err.to_string().starts_with("x.json:3:"), "{err}");

        let text = "{\n  \"detector\": {\n    \"scheme\": \"counter\",\n    \"window\": 0\n  }\n}";
        let err = ExperimentFile::parse(Path::new("x.json"), text).unwrap_err();
        assert!(err.to_string().starts_with("x.json:4:"), "{err}");

        let err = ExperimentFile::parse(Path::new("x.json"), "{\n\"seed\": 1,,\n}").unwrap_err();
        assert!(err.to_string().starts_with("x.json:2:"), "{err}");
    }

    #[test]
    fn parse_sweep_block() {
        let text = r#"{"detector": {"scheme": "bloom_multi"}, "sweep": {"axis": "k", "values": [1, 2, 3]}, "output": "o.csv"}"#;
        let f = ExperimentFile::parse(Path::new("x.json"), text).unwrap();
        assert_eq!(f.runs().unwrap().len(), 3);
        assert_eq!(f.output, Some(PathBuf::from("o.csv")));
        let bad = r#"{"sweep": {"axis": "colour", "values": [1]}}"#;
        assert!(ExperimentFile::parse(Path::new("x.json"), bad).is_err());
    }

    #[test]
    fn csv_row_columns() {
        let cfg = SimConfig::default();
        let m = replayguard::simnet::run_metrics(&cfg).unwrap();
        let row = csv_row(&cfg, &m);
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("counter,10,8,512,8,1,900,900,"));
    }
}
