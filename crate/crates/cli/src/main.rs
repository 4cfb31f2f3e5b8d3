use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coframe_core::catalog::{ids, lookup};
use coframe_core::verify::{invariants_at, run_verify, Bound, VerifyConfig};
use coframe_core::{DerivativeMode, Error, ModeArg};

#[derive(Parser)]
#[command(name = "coframe", version, about = "Check structure equations of coframes on 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Analytic,
    Fd,
}

impl From<Mode> for ModeArg {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Analytic => ModeArg::Analytic,
            Mode::Fd => ModeArg::Fd,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// List catalog identifiers.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Run the check suite for one structure.
    Verify {
        id: String,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 1e-4, value_parser = positive)]
        step: f64,
        #[arg(long, value_parser = positive)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "analytic")]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Print invariants at a point next to their closed forms.
    Invariants {
        id: String,
        #[arg(long, value_parser = triple, allow_hyphen_values = true)]
        at: [f64; 3],
        #[arg(long, default_value_t = 1e-4, value_parser = positive)]
        step: f64,
        #[arg(long, value_enum, default_value = "analytic")]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected x,y,z, got `{s}`"))
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::UnknownStructure(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn mode_of(mode: Mode, step: f64) -> DerivativeMode {
    match mode {
        Mode::Analytic => DerivativeMode::Analytic,
        Mode::Fd => DerivativeMode::FiniteDifference { step },
    }
}

fn cmd_list(json: bool) -> ExitCode {
    let mut rows = vec![];
    for id in ids() {
        match lookup(&id) {
            Ok(e) => rows.push(serde_json::json!({
                "id": e.id,
                "kind": e.kind,
                "chart": e.chart,
                "provenance": e.provenance,
            })),
            Err(e) => return fail(&e),
        }
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("list serializes"));
    } else {
        for r in &rows {
            println!(
                "{:<26} {:<7} {}",
                r["id"].as_str().unwrap_or_default(),
                r["kind"].as_str().unwrap_or_default(),
                r["provenance"].as_str().unwrap_or_default()
            );
        }
    }
    ExitCode::SUCCESS
}

fn cmd_verify(cfg: VerifyConfig, json: bool) -> ExitCode {
    let r = match run_verify(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if json {
        println!("{}", r.to_json());
    } else {
        println!("{} ({:?}, {} samples, seed {})", r.id, r.kind, r.samples, r.seed);
        for c in &r.checks {
            let op = match c.bound {
                Bound::Upper => "<",
                Bound::Lower => ">",
            };
            print!(
                "  {} {:<44} {:>11.3e} {op} {:.1e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            );
            match &c.error {
                Some(e) => println!("  ({e})"),
                None => println!(),
            }
        }
        for (k, s) in &r.invariant_summaries {
            println!("  {k}: min {:.6} max {:.6} mean {:.6}", s.min, s.max, s.mean);
        }
        println!("{}", if r.pass { "ok" } else { "FAILED" });
    }
    if r.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_invariants(id: &str, at: [f64; 3], mode: DerivativeMode, json: bool) -> ExitCode {
    let r = match invariants_at(id, at, mode) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&r).expect("invariants serialize"));
    } else {
        println!("{} at ({}, {}, {})", r.id, at[0], at[1], at[2]);
        for v in &r.values {
            match (v.closed_form, v.difference) {
                (Some(c), Some(d)) => {
                    println!("  {:<6} {:>18.12} closed form {:>18.12} diff {:.3e}", v.name, v.extracted, c, d)
                }
                _ => println!("  {:<6} {:>18.12}", v.name, v.extracted),
            }
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::List { json } => cmd_list(json),
        Cmd::Verify {
            id,
            samples,
            step,
            tol,
            seed,
            mode,
            json,
        } => cmd_verify(
            VerifyConfig {
                id,
                samples: samples as usize,
                step,
                tol,
                seed,
                mode: mode.into(),
            },
            json,
        ),
        Cmd::Invariants {
            id,
            at,
            step,
            mode,
            json,
        } => cmd_invariants(&id, at, mode_of(mode, step), json),
    }
}
