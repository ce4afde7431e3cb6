//! `xnlw`: command-line front end for the exterior wave laboratory.
//!
//! Every subcommand that evolves data reads a JSON run config and writes its
//! results into `--out`. Exit codes: 0 on success, 2 when some outcome is
//! undecided, 1 on error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use exterior_nlw::diagnostics::{resolution_report_with, virial_series, Classification, ResolutionOptions};
use exterior_nlw::emden_fowler::{energy_of_q, StationaryFamily};
use exterior_nlw::experiments::{
    channels_experiment, dichotomy_sweep_with, one_pass_probe_with, OnePassOptions, Outcome, SweepOptions,
};
use exterior_nlw::io_persist::{
    parse_config, write_channels, write_report, write_series, write_trajectory, write_virial, DataRecipe,
    RunConfig,
};
use exterior_nlw::linear_wave::{channel_energy, evolve_linear, psi_from_data, radiation_fields};
use exterior_nlw::nonlinear_wave::evolve_nonlinear;

#[derive(Parser)]
#[command(name = "xnlw", version, about = "Radial focusing wave equation outside the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Q_0..Q_k_max: summary table and one profile CSV per k.
    Stationary {
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        /// Profiles are written on [1, r_max].
        #[arg(long, default_value_t = 100.0)]
        r_max: f64,
        #[arg(long, default_value_t = 1e-2)]
        dr: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact linear flow of the configured data: exterior energies and radiation fields.
    LinearDemo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Nonlinear evolution: snapshot CSVs, energy log and a summary report.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve, then resolve into stationary state plus radiation.
    Resolution {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve, then tabulate the localized virial functional.
    Virial {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Amplitude sweep of the configured data with threshold bisection.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exit-without-return probe around a stationary state.
    OnePass {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exterior energy channels of the forward and backward evolutions.
    Channels {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Whether the run finished with every outcome decided.
enum Status {
    Decided,
    Undecided,
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(Status::Decided) => ExitCode::SUCCESS,
        Ok(Status::Undecided) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(config: &Path, out: &Path) -> Result<RunConfig> {
    let cfg = parse_config(config).with_context(|| format!("reading {}", config.display()))?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok(cfg)
}

fn run(command: Command) -> Result<Status> {
    match command {
        Command::Stationary {
            m,
            k_max,
            r_max,
            dr,
            out,
        } => stationary(m, k_max, r_max, dr, &out),
        Command::LinearDemo { config, out } => linear_demo(&load(&config, &out)?, &out),
        Command::Evolve { config, out } => {
            let cfg = load(&config, &out)?;
            let traj = evolve_nonlinear(&cfg.build_data()?, &cfg.evolution)?;
            write_trajectory(&traj, &out)?;
            let summary = serde_json::json!({
                "event": traj.event,
                "snapshots": traj.snapshots.len(),
                "energy_drift": traj.energy_drift(),
            });
            write_report(&cfg, &summary, &out.join("report.json"))?;
            println!("{}", serde_json::to_string(&traj.event)?);
            Ok(Status::Decided)
        }
        Command::Resolution { config, out } => {
            let cfg = load(&config, &out)?;
            let traj = evolve_nonlinear(&cfg.build_data()?, &cfg.evolution)?;
            let family = StationaryFamily::new(cfg.evolution.m, cfg.params.family_k_max)?;
            let opts = ResolutionOptions {
                t_extract: cfg.params.t_extract,
                theta_s: cfg.params.theta,
                theta_q: cfg.params.theta,
            };
            let report = resolution_report_with(&traj, &family, &opts)?;
            write_report(&cfg, &report, &out.join("resolution.json"))?;
            println!("{}", serde_json::to_string(&report.classification)?);
            Ok(match report.classification {
                Classification::Undecided => Status::Undecided,
                _ => Status::Decided,
            })
        }
        Command::Virial { config, out } => {
            let cfg = load(&config, &out)?;
            let traj = evolve_nonlinear(&cfg.build_data()?, &cfg.evolution)?;
            let samples = virial_series(&traj)?;
            write_virial(&samples, &out.join("virial.csv"))?;
            write_report(&cfg, &serde_json::json!({ "event": traj.event }), &out.join("report.json"))?;
            Ok(Status::Decided)
        }
        Command::Sweep { config, out } => {
            let cfg = load(&config, &out)?;
            let opts = SweepOptions {
                rel_width: cfg.params.rel_width,
                max_bisections: cfg.params.max_bisections,
                family_k_max: cfg.params.family_k_max,
                resolution: ResolutionOptions {
                    t_extract: cfg.params.t_extract,
                    theta_s: cfg.params.theta,
                    theta_q: cfg.params.theta,
                },
            };
            let family = StationaryFamily::new(cfg.evolution.m, opts.family_k_max)?;
            let result =
                dichotomy_sweep_with(&cfg.build_data()?, &cfg.params.lambda_grid, &cfg.evolution, &family, &opts)?;
            let rows: Vec<Vec<f64>> = result
                .grid_points
                .iter()
                .chain(&result.bisection)
                .map(|p| {
                    let code = match p.outcome {
                        Outcome::Scattering => 0.0,
                        Outcome::BlowUp => 1.0,
                        Outcome::ConvergesToQ { .. } => 2.0,
                        Outcome::Undecided => 3.0,
                    };
                    vec![p.lambda, p.energy, p.gradient, code, p.blowup_time.unwrap_or(f64::NAN)]
                })
                .collect();
            write_series(
                &out.join("sweep.csv"),
                &["outcome: 0 scattering, 1 blow-up, 2 converges to Q, 3 undecided".into()],
                &["lambda", "energy", "gradient", "outcome", "blowup_time"],
                &rows,
            )?;
            write_report(&cfg, &result, &out.join("sweep.json"))?;
            println!("bracket = {:?}", result.threshold_bracket);
            let undecided = result
                .grid_points
                .iter()
                .chain(&result.bisection)
                .any(|p| p.outcome == Outcome::Undecided);
            Ok(if undecided { Status::Undecided } else { Status::Decided })
        }
        Command::OnePass { config, out } => {
            let cfg = load(&config, &out)?;
            let DataRecipe::StationaryK {
                k,
                sign,
                perturbation: Some(perturbation),
                delta,
            } = &cfg.data
            else {
                bail!("one-pass needs data of kind stationary_k with a perturbation");
            };
            let e = &cfg.evolution;
            let p = perturbation.build(e.m, e.dr, e.domain_end)?;
            let opts = OnePassOptions {
                epsilon_factor: cfg.params.epsilon_factor,
                family_k_max: cfg.params.family_k_max.max(*k),
            };
            let family = StationaryFamily::new(e.m, opts.family_k_max)?;
            let delta = delta.unwrap_or(cfg.params.delta);
            let result = one_pass_probe_with(&family, *k, *sign, &p, delta, e, &opts)?;
            let rows: Vec<Vec<f64>> = result.distance_to_q_k.iter().map(|&(t, d)| vec![t, d]).collect();
            write_series(&out.join("distance.csv"), &[], &["t", "distance_to_q_k"], &rows)?;
            write_report(&cfg, &result, &out.join("one_pass.json"))?;
            println!("exit_time = {}, revisit = {}", result.exit_time, result.revisit_detected);
            Ok(Status::Decided)
        }
        Command::Channels { config, out } => {
            let cfg = load(&config, &out)?;
            let big_r = cfg.params.big_r;
            let series = channels_experiment(&cfg.build_data()?, big_r, &cfg.evolution)?;
            write_channels(&series.samples, big_r, &out.join("channels.csv"))?;
            write_report(&cfg, &series, &out.join("channels.json"))?;
            Ok(Status::Decided)
        }
    }
}

fn stationary(m: u32, k_max: usize, r_max: f64, dr: f64, out: &Path) -> Result<Status> {
    if !(r_max > 1.0 && dr > 0.0) {
        bail!("need r_max > 1 and dr > 0");
    }
    fs::create_dir_all(out)?;
    let family = StationaryFamily::new(m, k_max)?;
    let mut rows = Vec::new();
    for q in family.members() {
        let e = energy_of_q(q)?;
        rows.push(vec![
            q.k as f64,
            q.s_k,
            q.c_k,
            e.direct,
            e.scaled,
            e.pohozaev_gap,
        ]);
        let n = ((r_max - 1.0) / dr).round() as usize;
        let profile: Vec<Vec<f64>> = (0..=n)
            .map(|i| {
                let r = 1.0 + i as f64 * dr;
                let (v, dv) = q.value_and_derivative(r);
                vec![r, v, dv]
            })
            .collect();
        write_series(
            &out.join(format!("q_{}.csv", q.k)),
            &[format!("m = {m}"), format!("k = {}", q.k)],
            &["r", "Q", "Q'"],
            &profile,
        )?;
    }
    write_series(
        &out.join("stationary.csv"),
        &[format!("m = {m}")],
        &["k", "s_k", "c_k", "E_direct", "E_scaled", "pohozaev_gap"],
        &rows,
    )?;
    Ok(Status::Decided)
}

fn linear_demo(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let data = cfg.build_data()?;
    let psi = psi_from_data(&data)?;
    let t_final = cfg.evolution.t_final;
    let big_r = cfg.params.big_r;
    let n_times = 20usize;
    let rows: Vec<Vec<f64>> = (0..=n_times)
        .map(|j| {
            let t = t_final * j as f64 / n_times as f64;
            let state = evolve_linear(&data, t)?;
            Ok(vec![t, channel_energy(&state, big_r + t), channel_energy(&state, 1.0)])
        })
        .collect::<exterior_nlw::error::Result<_>>()?;
    write_series(
        &out.join("exterior_energy.csv"),
        &[
            format!("R = {big_r}"),
            format!("channel limit 2∫_R^∞ψ'² + 2∫_{{-∞}}^{{2-R}}ψ'² = {}", psi.exterior_energy(big_r)),
        ],
        &["t", "exterior_energy", "total_energy"],
        &rows,
    )?;
    let (g_plus, g_minus) = radiation_fields(&data)?;
    let radiation: Vec<Vec<f64>> = (0..g_plus.g.len())
        .map(|j| vec![g_plus.eta(j), g_plus.g[j], g_minus.g[j]])
        .collect();
    write_series(&out.join("radiation.csv"), &[], &["eta", "G_plus", "G_minus"], &radiation)?;
    Ok(Status::Decided)
}
