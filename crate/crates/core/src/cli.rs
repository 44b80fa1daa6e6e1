//! Algebra files and the command-line front end.
//!
//! File format, one item per line:
//!
//! ```text
//! # comment
//! vars: x y z
//! params: c
//! field: p
//! field: x*q + r
//! invariant[s=2]: x2 - x1
//! expect: closed=true
//! ```

use std::fmt::Write as _;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::algebra::{self, AlgebraError, LieAlgebra};
use crate::catalog::{self, Format};
use crate::expr::{Expr, Rational, Symbols};
use crate::fields::VectorField;
use crate::flows;
use crate::invariants::{self, Verdict, VerifyMode};
use crate::mobility;

#[derive(Debug, Error, PartialEq)]
pub enum FileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `vars:` line")]
    NoVars,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgebraFile {
    /// `#` lines, without the marker.
    pub comments: Vec<String>,
    pub vars: Vec<String>,
    pub params: Vec<String>,
    pub fields: Vec<String>,
    /// `(s, expression over the s-point symbols)`.
    pub invariants: Vec<(usize, String)>,
    pub expect: Vec<(String, String)>,
}

impl AlgebraFile {
    pub fn parse(src: &str) -> Result<Self, FileError> {
        let mut f = AlgebraFile::default();
        let mut seen_vars = false;
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if let Some(c) = line.strip_prefix('#') {
                f.comments.push(c.trim().to_string());
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| FileError::Syntax { line: i + 1, msg };
            let (key, rest) = line.split_once(':').ok_or_else(|| err("expected `key: value`".into()))?;
            let rest = rest.trim();
            match key.trim() {
                "vars" => {
                    f.vars = rest.split_whitespace().map(String::from).collect();
                    seen_vars = true;
                }
                "params" => f.params = rest.split_whitespace().map(String::from).collect(),
                "field" => f.fields.push(rest.to_string()),
                "expect" => {
                    let (k, v) = rest.split_once('=').ok_or_else(|| err("expected `expect: key=value`".into()))?;
                    f.expect.push((k.trim().to_string(), v.trim().to_string()));
                }
                k if k.starts_with("invariant") => {
                    let s = k
                        .strip_prefix("invariant[s=")
                        .and_then(|t| t.strip_suffix(']'))
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| err(format!("bad invariant tag {k:?}")))?;
                    f.invariants.push((s, rest.to_string()));
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        if !seen_vars {
            return Err(FileError::NoVars);
        }
        Ok(f)
    }

    pub fn print(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            writeln!(out, "# {c}").unwrap();
        }
        writeln!(out, "vars: {}", self.vars.join(" ")).unwrap();
        if !self.params.is_empty() {
            writeln!(out, "params: {}", self.params.join(" ")).unwrap();
        }
        for g in &self.fields {
            writeln!(out, "field: {g}").unwrap();
        }
        for (s, j) in &self.invariants {
            writeln!(out, "invariant[s={s}]: {j}").unwrap();
        }
        for (k, v) in &self.expect {
            writeln!(out, "expect: {k}={v}").unwrap();
        }
        out
    }

    pub fn symbols(&self) -> Symbols {
        Symbols::new(&self.vars, &self.params)
    }

    pub fn algebra(&self) -> Result<LieAlgebra, String> {
        LieAlgebra::parse(self.symbols(), &self.fields).map_err(|e| e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "transgroups", about = "Lie algebras of vector fields: brackets, invariants, flows and mobility")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Bracket of two fields over x, y, z.
    Bracket { a: String, b: String },
    /// Structure constants, or the residual when the span is not closed.
    Closure { file: String },
    /// Number of independent joint invariants of s points.
    Invariants {
        file: String,
        #[arg(long, default_value_t = 2)]
        points: usize,
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Checks that an expression is a joint invariant.
    Verify {
        file: String,
        #[arg(long)]
        invariant: String,
        #[arg(long, default_value_t = 2)]
        points: usize,
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Flows a point along generator k (1-based).
    Flow {
        file: String,
        #[arg(long)]
        gen: usize,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Return time of the flow of a generator combination.
    Monodromy {
        file: String,
        #[arg(long = "gen-combo", allow_hyphen_values = true)]
        gen_combo: String,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Free mobility in the infinitesimal at a generic point.
    Mobility {
        file: String,
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
    },
    /// Built-in catalog.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    /// Runs the verification harness.
    Verify {
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Prints an entry as an algebra file.
    Export { entry: String },
}

/// Exit code, stdout and stderr of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn fail(stdout: String) -> Self {
        Outcome { code: 1, stdout, stderr: String::new() }
    }

    fn usage(stderr: String) -> Self {
        Outcome { code: 2, stdout: String::new(), stderr }
    }
}

fn default_seed() -> u64 {
    std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
}

/// Runs one command; `argv[0]` is the program name.
pub fn run<S: AsRef<str>>(argv: &[S]) -> Outcome {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome::usage(text),
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok(o) => o,
        Err(msg) => Outcome::usage(format!("error: {msg}\n")),
    }
}

fn load(path: &str) -> Result<AlgebraFile, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    AlgebraFile::parse(&src).map_err(|e| format!("{path}: {e}"))
}

fn parse_rationals(s: &str) -> Result<Vec<Rational>, String> {
    s.split(',').map(|t| t.trim().parse::<Rational>().map_err(|_| format!("bad rational {t:?}"))).collect()
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}"))).collect()
}

fn param_values(f: &AlgebraFile, given: &Option<String>) -> Result<Vec<Rational>, String> {
    let vals = match given {
        Some(s) => parse_rationals(s)?,
        None => vec![],
    };
    if vals.len() != f.params.len() {
        return Err(format!("expected {} parameter value(s) via --params", f.params.len()));
    }
    Ok(vals)
}

fn dispatch(cmd: Cmd) -> Result<Outcome, String> {
    match cmd {
        Cmd::Bracket { a, b } => {
            let sym = Symbols::new(&["x", "y", "z"], &[] as &[&str]);
            let fa = VectorField::parse(&a, &sym).map_err(|e| e.to_string())?;
            let fb = VectorField::parse(&b, &sym).map_err(|e| e.to_string())?;
            let br = fa.bracket(&fb).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(format!("{}\n", br.to_string_with(&sym))))
        }
        Cmd::Closure { file } => {
            let f = load(&file)?;
            let l = f.algebra()?;
            match algebra::check_closure(&l) {
                Ok(sc) => {
                    let mut out = sc.describe(&l.sym).join("\n");
                    out.push('\n');
                    let rep = algebra::verify_structure(&sc);
                    writeln!(out, "jacobi: {}", if rep.ok() { "ok" } else { "violated" }).unwrap();
                    Ok(if rep.ok() { Outcome::ok(out) } else { Outcome::fail(out) })
                }
                Err(AlgebraError::NotClosed { j, k, residual_text, .. }) => {
                    Ok(Outcome::fail(format!("NotClosed [X{}, X{}] residual {residual_text}\n", j + 1, k + 1)))
                }
                Err(e) => Ok(Outcome::fail(format!("{e}\n"))),
            }
        }
        Cmd::Invariants { file, points, params } => {
            let f = load(&file)?;
            let l = f.algebra()?.instantiate(&param_values(&f, &params)?);
            let n = invariants::joint_invariant_count(&l, points, default_seed());
            Ok(Outcome::ok(format!("{n}\n")))
        }
        Cmd::Verify { file, invariant, points, params } => {
            let f = load(&file)?;
            let l = f.algebra()?;
            let p = if f.params.is_empty() { vec![] } else { param_values(&f, &params)? };
            let sym = f.symbols().for_points(points);
            let j = Expr::parse(&invariant, &sym).map_err(|e| e.to_string())?;
            let v = invariants::verify_joint_invariant(&l, &j, points, VerifyMode::Auto, &p, default_seed()).map_err(|e| e.to_string())?;
            let line = match &v {
                Verdict::Proven => "Proven\n".to_string(),
                Verdict::NumericallySupported { max_residual } => format!("NumericallySupported max_residual={max_residual:e}\n"),
                Verdict::Refuted { generator, residual, .. } => format!("Refuted generator={} residual={residual}\n", generator + 1),
            };
            Ok(if matches!(v, Verdict::Refuted { .. }) { Outcome::fail(line) } else { Outcome::ok(line) })
        }
        Cmd::Flow { file, gen, from, t, params } => {
            let f = load(&file)?;
            let l = f.algebra()?;
            let p: Vec<f64> = param_values(&f, &params)?.iter().map(crate::expr::to_f64).collect();
            if gen == 0 || gen > l.r() {
                return Err(format!("--gen must be in 1..={}", l.r()));
            }
            let x0 = parse_floats(&from)?;
            if x0.len() != l.n() {
                return Err(format!("--from needs {} coordinates", l.n()));
            }
            let x = &l.gens[gen - 1];
            let end = flows::numeric_flow(x, &x0, &p, t, 2000).map_err(|e| e.to_string())?;
            let series = flows::lie_series_flow(x, &x0, &p, t, 16).map_err(|e| e.to_string())?;
            let drift = end.iter().zip(&series.point).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let coords: Vec<String> = end.iter().map(|v| format!("{v:.12}")).collect();
            Ok(Outcome::ok(format!("endpoint: {}\ndrift: {drift:.3e}\n", coords.join(", "))))
        }
        Cmd::Monodromy { file, gen_combo, from, t_max, params } => {
            let f = load(&file)?;
            let l = f.algebra()?;
            let p: Vec<f64> = param_values(&f, &params)?.iter().map(crate::expr::to_f64).collect();
            let combo = parse_rationals(&gen_combo)?;
            if combo.len() != l.r() {
                return Err(format!("--gen-combo needs {} coefficients", l.r()));
            }
            let x0 = parse_floats(&from)?;
            if x0.len() != l.n() {
                return Err(format!("--from needs {} coordinates", l.n()));
            }
            let k: Vec<Expr> = combo.into_iter().map(Expr::constant).collect();
            let x = VectorField::combination(&l.gens, &k);
            let steps = (t_max * 200.0).ceil().max(1000.0) as usize;
            let rep = flows::monodromy_period(&x, &[x0], &p, t_max, steps, 1e-6).map_err(|e| e.to_string())?;
            Ok(Outcome::ok(match rep.period {
                Some(t) => format!("period: {t:.9}\n"),
                None => "period: None\n".to_string(),
            }))
        }
        Cmd::Mobility { file, params } => {
            let f = load(&file)?;
            let l = f.algebra()?;
            let p = param_values(&f, &params)?;
            let v = mobility::free_mobility_generic(&l, &p, default_seed()).map_err(|e| e.to_string())?;
            let mut out = format!("free_mobility: {}\nisotropy_dim: {}\n", v.free_mobility, v.isotropy_dim);
            if let Some(s) = &v.failing_stage {
                writeln!(out, "failing_stage: {s}\nfailed_stages: {}", v.failed_stages.join(",")).unwrap();
            }
            Ok(Outcome::ok(out))
        }
        Cmd::Catalog { cmd: CatalogCmd::Verify { entry, seed, format } } => {
            let format: Format = format.parse()?;
            let seed = seed.unwrap_or_else(default_seed);
            let entries = match entry {
                Some(id) => vec![catalog::find_entry(&id).ok_or_else(|| format!("unknown entry {id:?}"))?],
                None => catalog::builtin_entries(),
            };
            let reports: Vec<_> = entries.iter().map(|e| catalog::verify_entry(e, seed)).collect();
            let out = catalog::export_report(&reports, format);
            Ok(if reports.iter().all(|r| r.passed()) { Outcome::ok(out) } else { Outcome::fail(out) })
        }
        Cmd::Catalog { cmd: CatalogCmd::Export { entry } } => {
            let e = catalog::find_entry(&entry).ok_or_else(|| format!("unknown entry {entry:?}"))?;
            Ok(Outcome::ok(e.to_alg_file().print()))
        }
    }
}
