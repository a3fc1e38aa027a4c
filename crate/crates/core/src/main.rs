use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use relgeneric::config::{parse_config, Experiment, LimitSystemKind, RunConfig};
use relgeneric::heat::{run_heat_with, support_radius};
use relgeneric::io::{write_heat_dump, write_kfp_dump, write_timeseries};
use relgeneric::kfp::{run_kfp_with, run_to_stationarity};
use relgeneric::limit::{run_limit_study, LimitSystem};
use relgeneric::verify::{run_verify, VerifyConfig};
use relgeneric::{Error, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Heat,
    Kfp,
    Verify,
    Stationary,
    LimitStudy,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::Heat => Experiment::Heat,
            Command::Kfp => Experiment::Kfp,
            Command::Verify => Experiment::Verify,
            Command::Stationary => Experiment::Stationary,
            Command::LimitStudy => Experiment::LimitStudy,
        }
    }
}

/// Relativistic heat and kinetic Fokker-Planck solvers in GENERIC form.
#[derive(Debug, Parser)]
#[command(name = "relgeneric", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Command,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(cli: &Cli) -> Result<(RunConfig, PathBuf)> {
    let text = fs::read_to_string(&cli.config).map_err(|e| Error::Config {
        line: None,
        key: String::new(),
        message: format!("cannot read {}: {e}", cli.config.display()),
    })?;
    let mut cfg = parse_config(&text)?;
    let wanted = cli.experiment.experiment();
    match cfg.experiment {
        Some(e) if e != wanted => {
            return Err(Error::Config {
                line: None,
                key: "experiment".into(),
                message: format!("file is for `{}` but `{}` was requested", e.name(), wanted.name()),
            })
        }
        _ => cfg.experiment = Some(wanted),
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.display().to_string(), message: e.to_string() })?;
    Ok((cfg, out))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn heat(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let hc = cfg.heat_config()?;
    let mut count = 0usize;
    let every = cfg.output.dump_every;
    let run = run_heat_with(&hc, |state| {
        if every > 0 && count.is_multiple_of(every) {
            write_heat_dump(&out.join(format!("density_{count:05}.txt")), &hc.grid, state)?;
        }
        count += 1;
        Ok(())
    })?;
    write_timeseries(&out.join("timeseries.csv"), &run.records)?;
    write_heat_dump(&out.join("density_final.txt"), &hc.grid, &run.state)?;
    let first = &run.records[0];
    let last = run.records.last().expect("at least one record");
    println!("heat: {} steps of dt = {:.6e} to t = {:.6e}", run.steps, run.dt, run.state.t);
    println!("  mass drift            {:.3e}", (last.mass - first.mass).abs());
    println!("  entropy S(0) -> S(T)  {:.6e} -> {:.6e}", first.entropy, last.entropy);
    println!("  min density           {:.3e}", run.min_density);
    println!("  max |F|/(c rho)       {:.6}", run.max_saturation);
    println!("  support radius (1e-12) {:.6}", support_radius(&hc.grid, &run.state, 1e-12));
    Ok(true)
}

fn kfp(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let kc = cfg.kfp_config(cfg.variant)?;
    let mut count = 0usize;
    let every = cfg.output.dump_every;
    let run = run_kfp_with(&kc, |state, t| {
        if every > 0 && count.is_multiple_of(every) {
            write_kfp_dump(&out.join(format!("density_{count:05}.txt")), &kc.grid, &state.rho, t)?;
        }
        count += 1;
        Ok(())
    })?;
    write_timeseries(&out.join("timeseries.csv"), &run.records)?;
    write_kfp_dump(&out.join("density_final.txt"), &kc.grid, &run.state.rho, kc.t_final)?;
    let first = &run.records[0];
    let last = run.records.last().expect("at least one record");
    println!("kfp ({}): {} steps of dt = {:.6e} to t = {:.6e}", kc.variant, run.steps, run.dt, last.t);
    println!("  mass drift     {:.3e}", (last.mass - first.mass).abs());
    println!("  energy drift   {:.3e}", (last.energy - first.energy).abs() / first.energy.abs().max(1.0));
    println!("  entropy        {:.6e} -> {:.6e}", first.entropy, last.entropy);
    println!("  min density    {:.3e}", run.min_density);
    Ok(true)
}

fn stationary(cfg: &RunConfig, out: &Path) -> Result<bool> {
    for &variant in &cfg.variants {
        let kc = cfg.kfp_config(variant)?;
        let rep = run_to_stationarity(&kc, cfg.solver.tolerance)?;
        write_timeseries(&out.join(format!("timeseries_{}.csv", variant.name())), &rep.records)?;
        write_kfp_dump(&out.join(format!("density_{}.txt", variant.name())), &kc.grid, &rep.state.rho, rep.t)?;
        println!(
            "{}: L1 = {:.3e} at t = {:.4} ({}), e_inf = {:.6e}",
            variant,
            rep.l1,
            rep.t,
            if rep.converged { "converged" } else { "within 10x tolerance" },
            rep.e_inf
        );
    }
    Ok(true)
}

fn verify(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let vc = VerifyConfig::new(cfg.phase_grid()?, cfg.model, cfg.potential(), cfg.seed);
    let report = run_verify(&vc)?;
    let text = report.to_string();
    println!("{text}");
    write_text(&out.join("verify.txt"), &format!("{text}\n"))?;
    Ok(report.passed())
}

fn limit_study(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let system = match cfg.limit.system {
        LimitSystemKind::Heat => {
            let mut hc = cfg.heat_config()?;
            hc.dt = cfg.solver.dt.unwrap_or(f64::INFINITY);
            LimitSystem::Heat(hc)
        }
        LimitSystemKind::Kfp => {
            let rel = cfg.kfp_config(relgeneric::Variant::Dh)?;
            LimitSystem::Kfp(relgeneric::KfpConfig { dt: cfg.solver.dt.unwrap_or(f64::INFINITY), ..rel })
        }
    };
    let report = run_limit_study(&system, &cfg.limit.speeds)?;
    write_text(&out.join("limit.csv"), &report.csv())?;
    println!("limit study, common dt = {:.6e}", report.dt);
    for (c, d) in &report.rows {
        println!("  c = {c:<10} deviation = {d:.6e}");
    }
    println!("  monotone: {}", report.monotone);
    Ok(report.monotone)
}

fn run(cli: &Cli) -> Result<bool> {
    let (cfg, out) = load(cli)?;
    match cli.experiment {
        Command::Heat => heat(&cfg, &out),
        Command::Kfp => kfp(&cfg, &out),
        Command::Verify => verify(&cfg, &out),
        Command::Stationary => stationary(&cfg, &out),
        Command::LimitStudy => limit_study(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
