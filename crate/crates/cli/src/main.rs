//! `biasnet`: run parameter sweeps and coevolution experiments from a config
//! file.
//!
//! Exit codes: 0 success, 1 config error, 2 runtime or generation failure,
//! 3 I/O failure.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biasnet_core::exec::Execution;
use biasnet_core::experiment::{
    network_seed, parse_config, render_snapshot, run_coevolution_experiment, run_sweep_observed, write_critical_csv,
    write_histogram_csv, write_results_csv, write_snapshot, write_timeseries_csv, RcEstimate, SweepSpec,
};
use biasnet_core::topology::write_edge_list;
use biasnet_core::Error;
use clap::Parser;

#[derive(Parser, Debug)]
#[command(
    name = "biasnet",
    version,
    about = "Evolutionary games with payoff-biased partner selection"
)]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Emit a selection snapshot at this generation (replicate 0 of each point).
    #[arg(long, value_name = "GEN")]
    snapshot: Option<u64>,
    /// Worker threads; 0 or 1 runs sequentially.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Write replicate 0's network as an edge list.
    #[arg(long, value_name = "PATH")]
    dump_network: Option<PathBuf>,

    #[arg(long, help_heading = "Overrides")]
    kind: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    side: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    neighbourhood: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    n: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    k: Option<String>,
    #[arg(long = "mean_degree", help_heading = "Overrides")]
    mean_degree: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    m: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    game: Option<String>,
    /// Comma-separated list.
    #[arg(long = "r_values", help_heading = "Overrides", allow_hyphen_values = true)]
    r_values: Option<String>,
    /// Comma-separated list; `inf` and `-inf` allowed.
    #[arg(long = "w_values", help_heading = "Overrides", allow_hyphen_values = true)]
    w_values: Option<String>,
    #[arg(long = "K", help_heading = "Overrides")]
    noise: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    update: Option<String>,
    #[arg(long = "normalize_by_degree", help_heading = "Overrides")]
    normalize_by_degree: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    coevolution: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    q: Option<String>,
    #[arg(long = "burn_in", help_heading = "Overrides")]
    burn_in: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    measure: Option<String>,
    #[arg(long, help_heading = "Overrides")]
    replicates: Option<String>,
    #[arg(long = "master_seed", help_heading = "Overrides")]
    master_seed: Option<String>,
    #[arg(long = "out_dir", help_heading = "Overrides")]
    out_dir: Option<String>,
}

impl Cli {
    /// Overrides in a fixed order: topology kind before its parameters,
    /// mode flags before the rates that depend on them.
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("kind", &self.kind),
            ("side", &self.side),
            ("neighbourhood", &self.neighbourhood),
            ("n", &self.n),
            ("k", &self.k),
            ("mean_degree", &self.mean_degree),
            ("m", &self.m),
            ("game", &self.game),
            ("r_values", &self.r_values),
            ("w_values", &self.w_values),
            ("K", &self.noise),
            ("update", &self.update),
            ("normalize_by_degree", &self.normalize_by_degree),
            ("coevolution", &self.coevolution),
            ("q", &self.q),
            ("burn_in", &self.burn_in),
            ("measure", &self.measure),
            ("replicates", &self.replicates),
            ("master_seed", &self.master_seed),
            ("out_dir", &self.out_dir),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Config { .. } | Error::Override { .. } => 1,
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn load_spec(cli: &Cli) -> Result<SweepSpec, Error> {
    let text = std::fs::read_to_string(&cli.config).map_err(|source| Error::Io {
        path: cli.config.clone(),
        source,
    })?;
    let mut spec = parse_config(&text)?;
    for (key, value) in cli.overrides() {
        spec.apply_override(key, value)?;
    }
    Ok(spec)
}

fn dump_network(spec: &SweepSpec, path: &Path) -> Result<(), Error> {
    let net = spec.topology.build(network_seed(spec.master_seed, 0))?;
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_edge_list(&net, BufWriter::new(file)).map_err(io)?;
    println!("network: {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let spec = load_spec(cli)?;
    let exec = Execution::from_workers(cli.workers);
    if let Some(path) = &cli.dump_network {
        dump_network(&spec, path)?;
    }
    let out = &spec.out_dir;

    if spec.coevolution {
        for run in run_coevolution_experiment(&spec, exec)? {
            let stem = format!("r{}_rep{}", run.ri, run.replicate);
            let ts = out.join(format!("timeseries_{stem}.csv"));
            let hist = out.join(format!("histogram_{stem}.csv"));
            write_timeseries_csv(&run.samples, &ts)?;
            write_histogram_csv(&run.samples, &hist)?;
            if let Some(last) = run.samples.last() {
                let mean_w = last.preferences.as_ref().map_or(f64::NAN, |p| p.mean_w);
                println!(
                    "r={} replicate {}: generation {} fc={:.4} mean_w={:.4}",
                    run.r, run.replicate, last.generation, last.fc, mean_w
                );
            }
        }
        println!("wrote coevolution series to {}", out.display());
        return Ok(());
    }

    let (result, snapshots) = run_sweep_observed(&spec, exec, cli.snapshot)?;
    let results_path = out.join("results.csv");
    write_results_csv(&result, &results_path)?;
    write_critical_csv(&result, &out.join("critical.csv"))?;
    for p in &result.points {
        println!(
            "r={:<8} w={:<8} mean_fc={:.4} ± {:.4}",
            p.r, p.w, p.mean_fc, p.stderr_fc
        );
    }
    for c in &result.critical {
        match c.estimate {
            RcEstimate::Within(v) => println!("w={}: r_c ≈ {v:.4}", c.w),
            RcEstimate::AboveRange => println!("w={}: r_c above the swept range", c.w),
            RcEstimate::BelowRange => println!("w={}: r_c below the swept range", c.w),
        }
    }
    for s in &snapshots {
        let stem = format!("snapshot_r{}_w{}_g{}", s.ri, s.wi, s.snapshot.generation);
        write_snapshot(&s.snapshot, &out.join(format!("{stem}.txt")))?;
        if s.snapshot.lattice_side.is_some() {
            render_snapshot(&s.snapshot, &out.join(format!("{stem}.ppm")))?;
        }
        if let Some((cc, cd)) = s.snapshot.boundary_contrast() {
            println!("{stem}: boundary C->C weight {cc:.4}, C->D weight {cd:.4}");
        }
    }
    println!("wrote {}", results_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // usage errors are config errors; --help and --version succeed
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
