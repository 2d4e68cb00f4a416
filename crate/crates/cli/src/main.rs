use clap::Parser;
use qriopt_cli::output::write_artifacts;
use qriopt_cli::{run_experiment, Cli, CliError, ExperimentConfig};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = ExperimentConfig::from_cli(&cli).and_then(|config| {
        let artifacts = run_experiment(&config)?;
        write_artifacts(&cli.out, &artifacts)?;
        Ok(artifacts)
    });
    match result {
        Ok(a) => {
            let s = &a.summary;
            println!(
                "{}: final objective {:.10e}, gap {}, converged {}, {} iterations",
                s.experiment,
                s.final_objective,
                s.gap.map_or("n/a".to_string(), |g| format!("{g:.3e}")),
                s.converged,
                s.iterations
            );
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
