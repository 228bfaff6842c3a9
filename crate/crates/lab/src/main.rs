//! Experiment runner for the Multiphase laboratory.
//!
//! Subcommands: `bench-multiphase`, `verify-info`, `cutpaste`,
//! `translate-circuit`, `sample-instance`. Exit codes: 0 ok, 1 assertion
//! violation, 2 usage or parse error.

use multiphase_lab::commands::{
    cmd_bench_multiphase, cmd_cutpaste, cmd_sample_instance, cmd_translate_circuit,
    cmd_verify_info, BenchConfig, CommandOutcome, CutPasteConfig, ExitCode, SampleInstanceConfig,
    TranslateConfig, TranslateError, VerifyInfoConfig,
};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::exit;

const USAGE: &str = "\
multiphase — cell-probe and NOF communication experiments for the Multiphase problem

USAGE:
  multiphase bench-multiphase --n N --k K [--queries Q] [--gamma G] [--seed S] --out DIR
  multiphase verify-info [--tables N] [--seed S] [--plant-defect] --out DIR
  multiphase cutpaste --gamma G [--z-size Z] [--eps E] [--restarts R] [--resolution RES] [--seed S] --out DIR
  multiphase translate-circuit --circuit FILE --r R [--seed S] --out DIR
  multiphase sample-instance --n N --k K [--gamma G] [--seed S] --out FILE

Exit codes: 0 ok, 1 assertion violation, 2 usage or parse error.
";

struct Flags {
    values: BTreeMap<String, String>,
    switches: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut values = BTreeMap::new();
    let mut switches = Vec::new();
    let mut it = args.iter().peekable();
    while let Some(arg) = it.next() {
        let name = arg
            .strip_prefix("--")
            .ok_or_else(|| format!("unexpected argument '{arg}'"))?;
        match it.peek() {
            Some(next) if !next.starts_with("--") => {
                values.insert(name.to_string(), it.next().unwrap().clone());
            }
            _ => switches.push(name.to_string()),
        }
    }
    Ok(Flags { values, switches })
}

impl Flags {
    fn req<T: std::str::FromStr>(&self, name: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.values.get(name).ok_or_else(|| format!("missing --{name}"))?;
        raw.parse().map_err(|e| format!("bad --{name} '{raw}': {e}"))
    }

    fn opt<T: std::str::FromStr>(&self, name: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(name) {
            Some(raw) => raw.parse().map_err(|e| format!("bad --{name} '{raw}': {e}")),
            None => Ok(default),
        }
    }

    fn opt_f64(&self, name: &str) -> Result<Option<f64>, String> {
        match self.values.get(name) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| format!("bad --{name} '{raw}': {e}")),
            None => Ok(None),
        }
    }

    fn switch(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    fn out_dir(&self) -> Result<PathBuf, String> {
        self.values
            .get("out")
            .map(PathBuf::from)
            .ok_or_else(|| "missing --out".to_string())
    }
}

fn run() -> Result<CommandOutcome, (ExitCode, String)> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(sub) = args.first() else {
        return Err((ExitCode::Usage, USAGE.to_string()));
    };
    let flags = parse_flags(&args[1..]).map_err(|e| (ExitCode::Usage, format!("{e}\n\n{USAGE}")))?;
    let usage = |e: String| (ExitCode::Usage, format!("{e}\n\n{USAGE}"));

    match sub.as_str() {
        "bench-multiphase" => {
            let cfg = BenchConfig {
                n: flags.req("n").map_err(usage)?,
                k: flags.req("k").map_err(usage)?,
                queries: flags.opt("queries", 1000).map_err(usage)?,
                gamma: flags.opt_f64("gamma").map_err(usage)?,
                seed: flags.opt("seed", 0).map_err(usage)?,
                out: flags.out_dir().map_err(usage)?,
            };
            cmd_bench_multiphase(&cfg).map_err(|e| (ExitCode::Usage, e))
        }
        "verify-info" => {
            let cfg = VerifyInfoConfig {
                tables: flags.opt("tables", 1000).map_err(usage)?,
                seed: flags.opt("seed", 0).map_err(usage)?,
                plant_defect: flags.switch("plant-defect"),
                out: flags.out_dir().map_err(usage)?,
            };
            cmd_verify_info(&cfg).map_err(|e| (ExitCode::Usage, e))
        }
        "cutpaste" => {
            let cfg = CutPasteConfig {
                gamma: flags.req("gamma").map_err(usage)?,
                z_size: flags.opt("z-size", 4).map_err(usage)?,
                eps: flags.opt("eps", 1e-2).map_err(usage)?,
                restarts: flags.opt("restarts", 200).map_err(usage)?,
                resolution: flags.opt("resolution", 1000).map_err(usage)?,
                seed: flags.opt("seed", 0).map_err(usage)?,
                out: flags.out_dir().map_err(usage)?,
            };
            cmd_cutpaste(&cfg).map_err(|e| (ExitCode::Usage, e))
        }
        "translate-circuit" => {
            let cfg = TranslateConfig {
                circuit_file: PathBuf::from(
                    flags.values.get("circuit").ok_or_else(|| usage("missing --circuit".into()))?,
                ),
                r: flags.req("r").map_err(usage)?,
                seed: flags.opt("seed", 0).map_err(usage)?,
                out: flags.out_dir().map_err(usage)?,
            };
            cmd_translate_circuit(&cfg).map_err(|e| match e {
                TranslateError::Parse(p) => (ExitCode::Usage, format!("circuit parse error: {p}")),
                TranslateError::Other(o) => (ExitCode::Usage, o),
            })
        }
        "sample-instance" => {
            let cfg = SampleInstanceConfig {
                n: flags.req("n").map_err(usage)?,
                k: flags.req("k").map_err(usage)?,
                gamma: flags.opt_f64("gamma").map_err(usage)?,
                seed: flags.opt("seed", 0).map_err(usage)?,
                out_file: flags.out_dir().map_err(usage)?,
            };
            cmd_sample_instance(&cfg).map_err(|e| (ExitCode::Usage, e))
        }
        "--help" | "help" => Err((ExitCode::Ok, USAGE.to_string())),
        other => Err((ExitCode::Usage, format!("unknown subcommand '{other}'\n\n{USAGE}"))),
    }
}

fn main() {
    match run() {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            exit(outcome.exit as i32);
        }
        Err((code, message)) => {
            if code == ExitCode::Ok {
                print!("{message}");
            } else {
                eprint!("{message}");
                if !message.ends_with('\n') {
                    eprintln!();
                }
            }
            exit(code as i32);
        }
    }
}
