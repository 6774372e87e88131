//! `c2 decide [--finite|--general|--both] [budget flags] <sentence | path | ->`
//!
//! Output is one `key: value` pair per line. Exit codes: 0 sat, 1 unsat,
//! 2 unknown, 3 input error. With `--both` the exit code follows the finite
//! verdict.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use c2sat::counting_solver::format_solution;
use c2sat::normal_form::scottify;
use c2sat::solver::{constants, fin_sat, sat, SearchBudget, Verdict};
use c2sat::syntax::{parse, signature_of, Formula};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "c2", version, about = "Decide (finite) satisfiability of two-variable sentences with counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a sentence given inline, as a file path, or as `-` for stdin.
    Decide(Decide),
}

#[derive(Args)]
struct Decide {
    #[arg(long, group = "mode")]
    finite: bool,
    #[arg(long, group = "mode")]
    general: bool,
    #[arg(long, group = "mode")]
    both: bool,
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_star_types: Option<u64>,
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_frames: Option<u64>,
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_small_domain: Option<u64>,
    /// Seconds per decision.
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    /// Write the frame, solution and model here.
    #[arg(long, value_name = "PATH")]
    certificate: Option<PathBuf>,
    /// Print the verdict line only.
    #[arg(long)]
    quiet: bool,
    input: String,
}

fn read_input(arg: &str) -> Result<String, String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
        return Ok(s);
    }
    let path = std::path::Path::new(arg);
    if path.is_file() {
        return std::fs::read_to_string(path).map_err(|e| format!("{arg}: {e}"));
    }
    Ok(arg.to_string())
}

fn budget(d: &Decide) -> Result<SearchBudget, String> {
    let mut b = SearchBudget::default();
    if let Some(n) = d.max_star_types {
        b.max_star_types = n as usize;
    }
    if let Some(n) = d.max_frames {
        b.max_frames = n;
    }
    if let Some(n) = d.max_small_domain {
        b.max_small_domain = n as usize;
    }
    if let Some(t) = d.time_limit {
        if !(t.is_finite() && t > 0.0) {
            return Err("--time-limit must be positive".into());
        }
        b.time_limit = Some(Duration::from_secs_f64(t));
    }
    Ok(b)
}

/// The `key: value` report of one verdict, and the certificate body.
fn report(label: &str, v: &Verdict) -> (String, String) {
    let mut out = String::new();
    let mut cert = String::new();
    match v {
        Verdict::Sat(c) => {
            if let (Some(f), Some(sp)) = (&c.frame, &c.space) {
                out += &format!("{label}-frame-dim: {}\n", f.dim());
                cert += &format!("frame:\n{}", f.to_text(sp));
            }
            if let Some(w) = &c.solution {
                out += &format!("{label}-w: {}\n", format_solution(w));
                cert += &format!("w: {}\n", format_solution(w));
            }
            if let Some(a) = &c.model {
                out += &format!("{label}-model-size: {}\n", a.n);
                cert += &format!("model:\n{}", a.to_text());
            }
        }
        Verdict::Unsat => {}
        Verdict::Unknown(r) => out += &format!("{label}-reason: {r}\n"),
    }
    (out, cert)
}

fn exit_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Sat(_) => 0,
        Verdict::Unsat => 1,
        Verdict::Unknown(_) => 2,
    }
}

fn decide(d: Decide) -> Result<u8, String> {
    let text = read_input(&d.input)?;
    let phi: Formula = parse(text.trim()).map_err(|e| format!("parse error: {e}"))?;
    signature_of(&phi).map_err(|e| format!("signature error: {e}"))?;
    let b = budget(&d)?;
    let nf = scottify(&phi);
    let mut lines = String::new();
    if let Ok(k) = constants(&nf) {
        lines += &format!("m: {}\nC: {}\nZ: {}\nX: {}\n", k.m, k.c, k.z, k.x);
    }
    let runs: Vec<(&str, Verdict)> = if d.general {
        vec![("general", sat(&phi, &b))]
    } else if d.both {
        vec![("finite", fin_sat(&phi, &b)), ("general", sat(&phi, &b))]
    } else {
        vec![("finite", fin_sat(&phi, &b))]
    };
    let mut cert = String::new();
    let mut head = String::new();
    for (label, v) in &runs {
        let (out, c) = report(label, v);
        head += &format!("verdict-{label}: {}\n", v.name());
        lines += &out;
        if !c.is_empty() {
            cert += &format!("[{label}]\n{c}");
        }
    }
    let first = &runs[0].1;
    if d.quiet {
        println!("verdict: {}", first.name());
    } else {
        print!("verdict: {}\n{head}{lines}", first.name());
    }
    if let Some(path) = &d.certificate {
        std::fs::write(path, cert).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(exit_code(first))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(3);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match cli.command {
        Command::Decide(d) => match decide(d) {
            Ok(code) => ExitCode::from(code),
            Err(msg) => {
                eprintln!("c2: {msg}");
                ExitCode::from(3)
            }
        },
    }
}
