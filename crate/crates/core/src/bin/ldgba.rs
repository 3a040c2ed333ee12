use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ldgba_rl::experiment::{
    automaton_command, compare, load_config, load_manifest, load_run, run_train, verify, write_comparison, write_run,
    AutomatonOps, Environment, ExperimentError, ExperimentSpec, Method, SpecSource,
};

#[derive(Parser)]
#[command(name = "ldgba", about = "Limit-deterministic automata and Q-learning on labeled MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform and inspect an automaton.
    Automaton {
        /// Fixture name or automaton/formula file.
        spec: String,
        #[arg(long)]
        degeneralize: bool,
        #[arg(long)]
        augment: bool,
        /// Merge states with no reachable accepting transition (implies --augment).
        #[arg(long)]
        merge: bool,
        #[arg(long)]
        check_ld: bool,
        /// Write the resulting automaton here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one method and write a run directory.
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "augmented")]
        method: String,
        /// Rerun exactly what a manifest.json describes.
        #[arg(long, conflicts_with_all = ["env", "mdp", "spec", "config", "seed"])]
        from_manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train every method and compare learning curves.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Compare existing run directories instead of training.
        #[arg(long, num_args = 1..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the property battery.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))]
        fixtures: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "mdp")]
    env: Option<String>,
    #[arg(long)]
    mdp: Option<PathBuf>,
    #[arg(long)]
    spec: Option<String>,
    /// Preset name (desk, full) or JSON file.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn experiment(&self, method: Method) -> Result<ExperimentSpec, ExperimentError> {
        let env = match (&self.env, &self.mdp) {
            (_, Some(path)) => Environment::File(path.clone()),
            (Some(name), None) => Environment::Named(name.clone()),
            (None, None) => Environment::Named("grid9".into()),
        };
        let mut config = load_config(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            config.rng_seed = seed;
        }
        Ok(ExperimentSpec {
            env,
            spec: SpecSource(self.spec.clone().unwrap_or_else(|| "gfa_gfb_gnc".into())),
            method,
            config,
        })
    }
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Automaton { spec, degeneralize, augment, merge, check_ld, out } => {
            let (b, _) = SpecSource(spec).load()?;
            let report = automaton_command(&b, AutomatonOps { degeneralize, augment, merge, check_ld });
            let text = report.automaton.to_text();
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|source| ExperimentError::Io { path, source })?,
                None => print!("{text}"),
            }
            for line in &report.lines {
                eprintln!("{line}");
            }
            if let Some(e) = report.ld_failure {
                return Err(ExperimentError::Property(e.to_string()));
            }
        }
        Command::Train { run, method, from_manifest, out } => {
            let spec = match from_manifest {
                Some(path) => load_manifest(&path)?.experiment,
                None => run.experiment(method.parse()?)?,
            };
            let result = run_train(&spec)?;
            write_run(&result, &out)?;
            let s = &result.summary;
            println!("method: {}", s.method);
            println!("sessions with satisfaction probability 1: {}/{}", s.sessions_satisfying, s.sessions.len());
            match s.median_first_satisfaction {
                Some(m) => println!("median episodes to first satisfaction: {m}"),
                None => println!("median episodes to first satisfaction: never"),
            }
            if let Some(c) = &s.impossibility_certificate {
                println!("no positional policy can satisfy: {} needs {:?} with conflicting actions", c.state, c.sets);
            }
            println!("wrote {}", out.display());
        }
        Command::Compare { run, runs, out } => {
            let data = if runs.is_empty() {
                let mut data = Vec::new();
                for method in Method::ALL {
                    let result = run_train(&run.experiment(method)?)?;
                    let dir = out.join(method.name());
                    write_run(&result, &dir)?;
                    data.push(load_run(&dir)?);
                }
                data
            } else {
                runs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>, _>>()?
            };
            let c = compare(&data)?;
            write_comparison(&c, &out)?;
            for m in &c.methods {
                let median = m.median_first_satisfaction.map_or("never".to_string(), |v| v.to_string());
                println!(
                    "{}: {}/{} sessions satisfy, median first satisfaction {median}",
                    m.method, m.sessions_satisfying, m.sessions
                );
            }
        }
        Command::Verify { quick, fixtures } => {
            let report = verify(quick, &fixtures)?;
            for c in &report.checks {
                let status = if c.passed { "ok  " } else { "FAIL" };
                println!("{status} {} {}", c.name, c.detail);
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            println!("summary: {} passed, {failed} failed", report.checks.len() - failed);
            if !report.all_passed() {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                return Err(ExperimentError::Property(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are validation errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
