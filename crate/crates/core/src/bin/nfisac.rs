use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use nfisac::harness::{
    emit_csv, format_sig9, run_sweep_with, sample_scenario, scheme_means, write_csv, ExperimentConfig, Scale,
};
use nfisac::schemes::{run_scheme, SchemeId};
use nfisac::verify;

#[derive(Parser)]
#[command(name = "nfisac", version, about = "Secure near-field ISAC beamfocusing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Paper => Scale::Paper,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment config; the desk preset when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override array sizes, user count, slots and seeds with a preset.
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
}

impl Common {
    fn load(&self) -> nfisac::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::desk(),
        };
        if let Some(s) = self.scale {
            c.apply_scale(s.into());
            c.validate()?;
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the report.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "RSMA_HB")]
        scheme: String,
        /// Sweep value to use; the last grid value when absent.
        #[arg(long)]
        axis_value: Option<f64>,
    },
    /// Run the configured sweep and write the CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output path; the config's `output`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run a single seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        /// Run a single scheme instead of the configured list.
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Run the numerical oracles.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when the run finished but some result is not clean.
fn run(cli: Cli) -> nfisac::Result<bool> {
    match cli.command {
        Command::Solve { common, seed, scheme, axis_value } => {
            let config = common.load()?;
            let id: SchemeId = scheme.parse()?;
            let value = axis_value.unwrap_or(*config.sweep.values.last().expect("validated grid"));
            let inst = sample_scenario(&config, value, seed)?;
            let start = Instant::now();
            let r = run_scheme(id, &inst.geometry, &inst.scenario, &inst.channels, &inst.sensing, &config.driver_options())?;
            let secs = start.elapsed().as_secs_f64();
            let s = &inst.scenario;
            println!("scheme          {id}");
            println!("seed            {seed}");
            println!("status          {}", r.status.as_str());
            println!("secrecy_bps_hz  {}", format_sig9(r.secrecy));
            println!("crb_theta_rad2  {} (max {})", format_sig9(r.crb_angle), format_sig9(s.crb_angle_max));
            println!("crb_range_m2    {} (max {})", format_sig9(r.crb_range), format_sig9(s.crb_range_max));
            println!("power_w         {} (max {})", format_sig9(r.state.hybrid().norm_squared()), format_sig9(s.power_budget));
            println!("penalty_rel     {}", format_sig9(r.penalty_residual / s.power_budget));
            println!("common_alloc    {:?}", r.state.common_alloc);
            println!("iterations      {}", r.iterations);
            println!("conic_solves    {}", r.conic_solves);
            println!("seconds         {}", format_sig9(secs));
            for o in &r.outer {
                println!(
                    "  rho {:>10}  residual {:>12}  secrecy(P) {:>10}  secrecy(FW) {:>10}  rounds {}",
                    format_sig9(o.rho),
                    format_sig9(o.residual),
                    format_sig9(o.secrecy_p),
                    format_sig9(o.secrecy_fw),
                    o.rounds
                );
            }
            Ok(r.status.as_str() == "converged")
        }
        Command::Sweep { common, out, seed, scheme } => {
            let mut config = common.load()?;
            if let Some(s) = seed {
                config.seeds = vec![s];
            }
            if let Some(s) = scheme {
                config.schemes = vec![s.parse::<SchemeId>()?.name().to_string()];
            }
            config.validate()?;
            let out = out.or_else(|| config.output.clone());
            // Rows land in a side file as they finish; the sorted CSV replaces it.
            let partial = out.as_ref().map(|p| p.with_extension("partial.csv"));
            let stream = match &partial {
                Some(p) => Some(Mutex::new(csv::Writer::from_writer(File::create(p)?))),
                None => None,
            };
            let rows = run_sweep_with(&config, |row| {
                eprintln!(
                    "{} {} seed {}: {} ({}, {:.1}s)",
                    format_sig9(row.axis),
                    row.scheme,
                    row.seed,
                    format_sig9(row.secrecy),
                    row.status,
                    row.seconds
                );
                if let Some(w) = &stream {
                    let mut w = w.lock().expect("stream lock");
                    let _ = w.write_record([
                        format_sig9(row.axis),
                        row.scheme.to_string(),
                        row.seed.to_string(),
                        format_sig9(row.secrecy),
                        row.status.clone(),
                    ]);
                    let _ = w.flush();
                }
            })?;
            match &out {
                Some(p) => {
                    emit_csv(&rows, p)?;
                    if let Some(part) = partial {
                        std::fs::remove_file(part)?;
                    }
                }
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
            for (axis, id, mean, n) in scheme_means(&rows) {
                eprintln!("mean {} {id}: {} over {n}", format_sig9(axis), format_sig9(mean));
            }
            Ok(rows.iter().all(|r| r.is_clean()))
        }
        Command::Verify { seed } => {
            let results = verify::run_all(seed)?;
            for r in &results {
                println!("{r}");
            }
            Ok(results.iter().all(|r| r.passed()))
        }
    }
}
