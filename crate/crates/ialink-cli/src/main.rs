use std::path::PathBuf;
use std::process::ExitCode;

use ialink_cli::config::{PresetName, ScenarioConfig, preset};
use ialink_cli::{align_check, run_sweep};

const USAGE: &str = "\
ialink — link-level Monte Carlo simulator for an interference-aligned
underlay cognitive radio network with a wireless-powered DF relay.

USAGE:
  ialink sweep --config <file.toml> --out <file.csv> [--seed N] [--trials N] [--threads N]
  ialink preset --name fig2a|fig2b|fig3 --out <file.csv> [--seed N] [--trials N] [--threads N]
  ialink align-check --draws N [--config <file.toml>]

SUBCOMMANDS:
  sweep        Run every (CSI scenario, SNR) point of a scenario file and
               write the BER table as CSV.
  preset       Run one of the built-in figure scenarios.
  align-check  Draw channel realizations, build the beamformers and report
               the worst zero-forcing residual and the rejection rate.

Command-line flags override the corresponding scenario-file values.
Exit status: 0 on success, 1 on validation or numeric failure, 2 on usage
errors.
";

struct Flags {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    name: Option<String>,
    seed: Option<u64>,
    trials: Option<u64>,
    threads: Option<usize>,
    draws: Option<u64>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        config: None,
        out: None,
        name: None,
        seed: None,
        trials: None,
        threads: None,
        draws: None,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let (key, inline) = match arg.split_once('=') {
            Some((k, v)) => (k, Some(v.to_string())),
            None => (arg.as_str(), None),
        };
        let mut value = |name: &str| -> Result<String, String> {
            match inline.clone() {
                Some(v) => Ok(v),
                None => it
                    .next()
                    .cloned()
                    .ok_or_else(|| format!("missing value for {name}")),
            }
        };
        match key {
            "--config" => flags.config = Some(PathBuf::from(value("--config")?)),
            "--out" => flags.out = Some(PathBuf::from(value("--out")?)),
            "--name" => flags.name = Some(value("--name")?),
            "--seed" => {
                flags.seed = Some(
                    value("--seed")?
                        .parse()
                        .map_err(|_| "invalid --seed (expected u64)".to_string())?,
                )
            }
            "--trials" => {
                flags.trials = Some(
                    value("--trials")?
                        .parse()
                        .map_err(|_| "invalid --trials (expected integer)".to_string())?,
                )
            }
            "--threads" => {
                flags.threads = Some(
                    value("--threads")?
                        .parse()
                        .map_err(|_| "invalid --threads (expected integer)".to_string())?,
                )
            }
            "--draws" => {
                flags.draws = Some(
                    value("--draws")?
                        .parse()
                        .map_err(|_| "invalid --draws (expected integer)".to_string())?,
                )
            }
            "--help" | "-h" => {
                println!("{USAGE}");
                std::process::exit(0);
            }
            other => return Err(format!("unknown argument: {other}")),
        }
    }
    Ok(flags)
}

fn load_config(flags: &Flags) -> Result<ScenarioConfig, String> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| "missing required --config".to_string())?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ScenarioConfig::from_toml_str(&text).map_err(|e| e.to_string())
}

fn apply_overrides(cfg: &mut ScenarioConfig, flags: &Flags) {
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = flags.trials {
        cfg.trials = trials;
    }
}

fn run_and_write(cfg: &ScenarioConfig, flags: &Flags) -> Result<(), String> {
    cfg.validate().map_err(|e| e.to_string())?;
    let out_path = flags
        .out
        .as_ref()
        .ok_or_else(|| "missing required --out".to_string())?;
    let threads = flags.threads.unwrap_or(0);
    let points = cfg.csi.len() * cfg.snr_db.len();
    eprintln!(
        "running {} scenarios x {} SNR points ({} trials each, seed {})",
        cfg.csi.len(),
        cfg.snr_db.len(),
        cfg.trials,
        cfg.seed
    );
    let output = run_sweep(cfg, threads).map_err(|e| e.to_string())?;
    std::fs::write(out_path, &output.csv)
        .map_err(|e| format!("cannot write {}: {e}", out_path.display()))?;
    eprintln!(
        "wrote {} ({} points, {} data rows)",
        out_path.display(),
        points,
        output.csv.lines().count() - 1
    );
    Ok(())
}

fn real_main() -> Result<(), (u8, String)> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        return Err((2, format!("missing subcommand\n\n{USAGE}")));
    };
    let flags = parse_flags(&args[1..]).map_err(|e| (2, format!("{e}\n\n{USAGE}")))?;

    match command.as_str() {
        "sweep" => {
            let mut cfg = load_config(&flags).map_err(|e| (1, e))?;
            apply_overrides(&mut cfg, &flags);
            run_and_write(&cfg, &flags).map_err(|e| (1, e))
        }
        "preset" => {
            let name = flags
                .name
                .as_ref()
                .ok_or_else(|| (2, format!("missing required --name\n\n{USAGE}")))?;
            let name: PresetName = name.parse().map_err(|e| (1u8, format!("{e}")))?;
            let mut cfg = preset(name);
            apply_overrides(&mut cfg, &flags);
            run_and_write(&cfg, &flags).map_err(|e| (1, e))
        }
        "align-check" => {
            let draws = flags
                .draws
                .ok_or_else(|| (2, format!("missing required --draws\n\n{USAGE}")))?;
            if draws == 0 {
                return Err((2, "--draws must be at least 1".to_string()));
            }
            let cfg = match flags.config {
                Some(_) => load_config(&flags).map_err(|e| (1, e))?,
                None => ScenarioConfig::default(),
            };
            let report = align_check(&cfg, draws).map_err(|e| (1, e.to_string()))?;
            println!("draws:            {}", report.draws);
            println!("accepted:         {}", report.accepted);
            println!("rejected:         {}", report.rejected);
            println!("rejection_rate:   {:.6}", report.rejection_rate());
            println!("max_leakage:      {:.3e}", report.max_leakage);
            println!("min_desired_sv:   {:.3e}", report.min_desired_sv);
            Ok(())
        }
        other => Err((2, format!("unknown subcommand `{other}`\n\n{USAGE}"))),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
