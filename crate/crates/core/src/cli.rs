//! The `fermatlab` command line.
//!
//! Every report carries the resolved configuration and [`VERSION`]; reruns
//! with the same configuration give identical output apart from
//! `elapsed_ms`. Exit codes: 0 success, 1 runtime failure, 2 usage error,
//! 3 enumeration guard.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::counts::{self, CountConfig, DensityReport, MMode, Variant};
use crate::error::{Error, Result};
use crate::local::{self, DiagonalForm};
use crate::points;
use crate::sieve::{self, SieveParams};
use crate::{arith, guard_override_from_env, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "fermatlab", version, about = "Experiments on diagonal Fermat-type curves")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// Output format (density reports default to csv, others to json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Lift enumeration guards (same as FERMATLAB_GUARD_OVERRIDE=1).
    #[arg(long, global = true)]
    guard_override: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum VariantArg {
    #[value(name = "N")]
    N,
    #[value(name = "Nstar")]
    Nstar,
    #[value(name = "Nstarstar")]
    Nstarstar,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::N => Variant::N,
            VariantArg::Nstar => Variant::Nstar,
            VariantArg::Nstarstar => Variant::Nstarstar,
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
enum Command {
    /// Real and p-adic solubility with certificates.
    Local {
        #[arg(long)]
        d: u32,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        coeffs: Vec<i64>,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counts of soluble ternary forms in a coefficient box.
    DensityN {
        #[arg(long)]
        d: u32,
        #[arg(long = "H")]
        #[serde(rename = "H")]
        h: u64,
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        search_bound: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Everywhere locally soluble quaternary forms, exhaustive or sampled.
    DensityM {
        #[arg(long)]
        d: u32,
        #[arg(long = "H")]
        #[serde(rename = "H")]
        h: u64,
        #[arg(long, requires = "seed")]
        samples: Option<u64>,
        #[arg(long, requires = "samples")]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Points of bounded height on a ternary form.
    Points {
        #[arg(long)]
        d: u32,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        coeffs: Vec<i64>,
        #[arg(long)]
        height: u64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lattice cover of the points on a form with coprime coefficients.
    Cover {
        #[arg(long)]
        d: u32,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        coeffs: Vec<i64>,
        #[arg(long)]
        height: u64,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Large-sieve bound for a box of side H.
    SieveBound {
        #[arg(long)]
        d: u32,
        #[arg(long = "H")]
        #[serde(rename = "H")]
        h: f64,
        /// Sieve level, or `auto`.
        #[arg(long, default_value = "auto")]
        z: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quick built-in consistency checks.
    Selftest,
}

impl Command {
    fn out(&self) -> Option<&Path> {
        match self {
            Command::Local { out, .. }
            | Command::DensityN { out, .. }
            | Command::DensityM { out, .. }
            | Command::Points { out, .. }
            | Command::Cover { out, .. }
            | Command::SieveBound { out, .. } => out.as_deref(),
            Command::Selftest => None,
        }
    }
}

/// Resolved configuration embedded in every report.
#[derive(Debug, Serialize)]
struct Resolved<'a> {
    command: &'a Command,
    format: Format,
    workers: Option<usize>,
    guard_override: bool,
}

struct Output {
    text: String,
    /// Sidecar written next to `--out` (metadata for CSV reports).
    sidecar: Option<String>,
}

impl Output {
    fn plain(text: String) -> Self {
        Self { text, sidecar: None }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn form_from(d: u32, coeffs: &[i64]) -> Result<DiagonalForm> {
    DiagonalForm::new(d, coeffs.to_vec())
}

fn density_output(rows: &[DensityReport], format: Format, config: &Value) -> Result<Output> {
    let meta = json!({ "version": VERSION, "config": config, "rows": rows });
    match format {
        Format::Json => Ok(Output::plain(pretty(&meta))),
        Format::Csv => {
            let mut buf = Vec::new();
            counts::write_csv(&mut buf, rows)?;
            let text = String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))?;
            Ok(Output { text, sidecar: Some(pretty(&meta)) })
        }
    }
}

fn execute(cli: &Cli, err: &mut dyn Write) -> Result<Output> {
    let guard_override = cli.global.guard_override || guard_override_from_env();
    let format = cli.global.format.unwrap_or(match cli.command {
        Command::DensityN { .. } | Command::DensityM { .. } => Format::Csv,
        _ => Format::Json,
    });
    let resolved = Resolved {
        command: &cli.command,
        format,
        workers: cli.global.workers,
        guard_override,
    };
    let config = serde_json::to_value(&resolved).expect("serializable");
    let count_cfg = |search_bound| CountConfig { search_bound, workers: cli.global.workers, guard_override };
    match &cli.command {
        Command::Local { d, coeffs, prime, .. } => {
            let form = form_from(*d, coeffs)?;
            let body = match prime {
                Some(p) => {
                    let cert = local::qp_soluble(&form, *p)?;
                    json!({ "soluble": cert.soluble, "certificates": [cert] })
                }
                None => {
                    let (ok, certs) = local::everywhere_locally_soluble(&form)?;
                    json!({ "soluble": ok, "certificates": certs })
                }
            };
            Ok(Output::plain(pretty(&json!({ "version": VERSION, "config": config, "result": body }))))
        }
        Command::DensityN { d, h, variant, search_bound, .. } => {
            let row = counts::count_n(*h, *d, (*variant).into(), &count_cfg(*search_bound))?;
            density_output(&[row], format, &config)
        }
        Command::DensityM { d, h, samples, seed, .. } => {
            let mode = match (samples, seed) {
                (Some(samples), Some(seed)) => MMode::Sampled { samples: *samples, seed: *seed },
                _ => MMode::Exhaustive,
            };
            let row = counts::count_m(*h, *d, mode, &count_cfg(None))?;
            density_output(&[row], format, &config)
        }
        Command::Points { d, coeffs, height, json, .. } => {
            let form = form_from(*d, coeffs)?;
            let pts = points::search_points(&form, *height)?;
            if *json || cli.global.format == Some(Format::Json) {
                let coords: Vec<[i64; 3]> = pts.iter().map(|p| p.coords).collect();
                let v = json!({ "version": VERSION, "config": config, "count": pts.len(), "points": coords });
                Ok(Output::plain(pretty(&v)))
            } else if cli.global.format == Some(Format::Csv) {
                let mut s = String::from("x1,x2,x3\n");
                for p in &pts {
                    let [a, b, c] = p.coords;
                    s.push_str(&format!("{a},{b},{c}\n"));
                }
                Ok(Output::plain(s))
            } else {
                let mut s = format!("# {VERSION} {}\n", serde_json::to_string(&config).expect("serializable"));
                for p in &pts {
                    s.push_str(&format!("{p}\n"));
                }
                s.push_str(&format!("# {} points\n", pts.len()));
                Ok(Output::plain(s))
            }
        }
        Command::Cover { d, coeffs, height, verify, .. } => {
            let form = form_from(*d, coeffs)?;
            let cover = points::build_cover(&form)?;
            let mut v = json!({ "version": VERSION, "config": config, "cover": cover });
            if *verify {
                let report = points::verify_cover(&form, *height, &cover)?;
                if !report.covered {
                    writeln!(err, "cover misses {} points", report.misses.len()).ok();
                }
                v["verification"] = serde_json::to_value(report).expect("serializable");
            }
            Ok(Output::plain(pretty(&v)))
        }
        Command::SieveBound { d, h, z, .. } => {
            let z_val: f64 = if z == "auto" {
                sieve::choose_z(*h, [1, 1, 1], *d)?
            } else {
                z.parse().map_err(|_| Error::Domain(format!("invalid z {z:?}")))?
            };
            if !(z_val >= 1.0) || z_val > sieve::Z_CAP as f64 {
                return Err(Error::Domain(format!("z must lie in [1, {}]", sieve::Z_CAP)));
            }
            let params = SieveParams::new(*d, z_val, [*h; 3])?;
            let g = if z_val < 10_000.0 {
                Value::String(sieve::g_sum(z_val, *d)?.to_string())
            } else {
                json!(sieve::g_sum_approx::<f64>(z_val, *d)?)
            };
            let v = json!({
                "version": VERSION,
                "config": config,
                "psi": arith::psi(*d)?.to_string(),
                "z": z_val,
                "G": g,
                "bound": sieve::large_sieve_bound(&params)?,
                "theorem1_bound": sieve::theorem1_bound(*h, *d)?,
            });
            Ok(Output::plain(pretty(&v)))
        }
        Command::Selftest => {
            let results = selftest();
            let mut s = String::new();
            let mut failed = 0;
            for (name, ok) in &results {
                s.push_str(&format!("{} {name}\n", if *ok { "ok  " } else { "FAIL" }));
                failed += !ok as usize;
            }
            if failed > 0 {
                return Err(Error::Internal(format!("{failed} selftest checks failed\n{s}")));
            }
            Ok(Output::plain(s))
        }
    }
}

fn selftest() -> Vec<(&'static str, bool)> {
    let rd_ok = arith::primes_up_to(60).into_iter().filter(|&p| p > 2).all(|p| {
        (2..=8).all(|d| {
            let set: std::collections::BTreeSet<u64> = (1..p).map(|x| arith::pow_mod(x, d as u64, p)).collect();
            arith::rd(p, d).ok() == Some(set.len() as u64)
        })
    });
    let tau_ok = arith::primes_up_to(30)
        .into_iter()
        .filter(|&p| p > 2)
        .all(|p| (2..=6).all(|d| sieve::tau(p, d).ok().is_some() && sieve::tau(p, d).ok() == sieve::tau_brute(p, d).ok()));
    let g_ok = sieve::g_sum(3.0, 2).map(|g| g.to_string() == "9/7").unwrap_or(false);
    let psi_ok = arith::psi(2).map(|v| v.to_string() == "3/2").unwrap_or(false)
        && arith::psi(3).map(|v| v.to_string() == "1").unwrap_or(false);
    let local_ok = (|| -> Result<bool> {
        let q = DiagonalForm::new(2, vec![1, 1, -3])?;
        let c = DiagonalForm::new(3, vec![1, 2, 4])?;
        let t = DiagonalForm::new(2, vec![1, 1, -2])?;
        let c1 = local::qp_soluble(&q, 3)?;
        let c2 = local::qp_soluble(&c, 2)?;
        let c3 = local::qp_soluble(&t, 2)?;
        Ok(!c1.soluble && !c2.soluble && c3.soluble && c1.verify(&q) && c2.verify(&c) && c3.verify(&t))
    })()
    .unwrap_or(false);
    let points_ok = DiagonalForm::new(3, vec![1, 1, 1])
        .and_then(|f| points::search_points(&f, 10))
        .map(|p| p.len() == 3)
        .unwrap_or(false);
    vec![
        ("residue counts", rd_ok),
        ("exclusion counts", tau_ok),
        ("exact G(3)", g_ok),
        ("exact psi", psi_ok),
        ("local certificates", local_ok),
        ("Fermat cubic points", points_ok),
    ]
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Guard(_) => EXIT_GUARD,
        Error::Domain(_) => EXIT_USAGE,
        Error::Overflow(_) | Error::Internal(_) => EXIT_FAILURE,
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Parse `argv` (including the program name), run, and report to `out`/`err`.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                write!(out, "{text}").ok();
            } else {
                write!(err, "{text}").ok();
            }
            return code;
        }
    };
    let result = match cli.global.workers {
        Some(0) => Err(Error::Domain("--workers must be positive".into())),
        _ => execute(&cli, err),
    };
    match result {
        Ok(output) => {
            let written = match cli.command.out() {
                Some(path) => fs::write(path, &output.text).and_then(|_| match &output.sidecar {
                    Some(meta) => fs::write(sidecar_path(path), meta),
                    None => Ok(()),
                }),
                None => out.write_all(output.text.as_bytes()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    writeln!(err, "error: {e}").ok();
                    EXIT_FAILURE
                }
            }
        }
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            exit_code(&e)
        }
    }
}

/// [`run_with`] on the process streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("fermatlab").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["points", "--d", "3"]).0, EXIT_USAGE);
        assert_eq!(call(&["points", "--d", "3", "--coeffs", "1,1", "--height", "3"]).0, EXIT_USAGE);
        assert_eq!(call(&["local", "--d", "1", "--coeffs", "1,1,1"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn points_text() {
        let (code, out, _) = call(&["points", "--d", "3", "--coeffs", "1,1,1", "--height", "10"]);
        assert_eq!(code, 0);
        assert!(out.contains("(1, 0, -1)"));
        assert!(out.trim_end().ends_with("# 3 points"));
    }

    #[test]
    fn local_single_prime() {
        let (code, out, _) = call(&["local", "--d", "2", "--coeffs", "1,1,-3", "--prime", "3"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["soluble"], false);
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["result"]["certificates"][0]["place"], "3");
    }

    #[test]
    fn sieve_json() {
        let (code, out, _) = call(&["sieve-bound", "--d", "2", "--H", "100", "--z", "auto"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["psi"], "3/2");
        assert_eq!(v["z"], 10.0);
        for k in ["G", "bound", "theorem1_bound"] {
            assert!(!v[k].is_null(), "{k}");
        }
    }

    #[test]
    fn guard_exit_code() {
        if guard_override_from_env() {
            return;
        }
        let (code, out, err) = call(&["density-n", "--d", "2", "--H", "500", "--variant", "Nstar"]);
        assert_eq!(code, EXIT_GUARD);
        assert!(out.is_empty());
        assert!(err.contains("guard"));
    }

    #[test]
    fn selftest_passes() {
        let (code, out, _) = call(&["selftest"]);
        assert_eq!(code, 0, "{out}");
        assert!(!out.contains("FAIL"));
    }
}
