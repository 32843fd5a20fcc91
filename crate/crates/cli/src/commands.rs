//! Command implementations. File formats: CSV with a one-line header for
//! tabular outputs, SVG only for the depth/width chart, JSON for
//! checkpoints and image sidecars.

use crate::config::RunConfig;
use clap::{Args, Subcommand, ValueEnum};
use hee_core::analyze;
use hee_core::data::{self, GaussianMixture2D};
use hee_core::error::{HeeError, Result};
use hee_core::generate::{self, Harvest};
use hee_core::learn;
use hee_core::model::{self, NetworkState, Params};
use hee_core::rng::{self, Domain};
use hee_core::expfam::QuadratureGrid;
use hee_core::sampler::{self, Method, Mode, SamplerConfig};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn cmd_train(config_path: &Path, out: &Path, log: Option<&Path>) -> Result<()> {
    let config = RunConfig::load(config_path)?;
    let spec = config.model_spec()?;
    let dataset = config.dataset()?;
    let train_config = config.train_config();

    let mut init_rng = rng::stream(train_config.seed, Domain::Init, u64::MAX);
    let params0 = Params::init_uniform(&spec, &mut init_rng);
    let (params, training_log) = learn::train(&spec, &params0, &dataset, &train_config)?;

    model::save_checkpoint(out, &spec, &params)?;
    let log_path = log
        .map(PathBuf::from)
        .unwrap_or_else(|| out.with_extension("log.csv"));
    training_log.write_csv(&log_path)?;
    println!(
        "trained {} updates; checkpoint {} log {}",
        training_log.rows.last().map_or(0, |r| r.step),
        out.display(),
        log_path.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenMode {
    Joint,
    Marginal,
    Ancestral,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub mode: GenMode,
    /// Staged marginal generation (draw latents, freeze, then relax x_0).
    #[arg(long)]
    pub staged: bool,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Thinning interval for chain modes; omitted = 10× a pilot IACT.
    #[arg(long)]
    pub thin: Option<u64>,
    /// Harvest one sample from each of many short chains instead.
    #[arg(long)]
    pub short_chains: bool,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau_u: f64,
    /// Observation-layer time constant; keep well under tau_z for
    /// simultaneous marginal generation.
    #[arg(long, default_value_t = 1.0)]
    pub tau_x: f64,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: u64,
    /// Treat rows as images of this size ("WxH"): clamp pixels to [0, 1]
    /// and write a `{width, height}` JSON sidecar.
    #[arg(long)]
    pub image: Option<String>,
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let (spec, params) = model::load_checkpoint(&args.model)?;
    let config = SamplerConfig {
        dt: args.dt,
        tau_u: args.tau_u,
        tau_x: args.tau_x,
        burn_in: args.burn_in,
        seed: args.seed,
        ..Default::default()
    };
    let harvest = if args.short_chains {
        Harvest::ShortChains
    } else {
        Harvest::Thinned(args.thin)
    };
    let mut samples = match args.mode {
        GenMode::Ancestral => {
            let mut rng = rng::seeded(args.seed);
            generate::ancestral_x0(&spec, &params, args.n, &mut rng)?
        }
        GenMode::Joint => generate::joint_generate(&spec, &params, &config, args.n, harvest)?,
        GenMode::Marginal => {
            generate::marginal_generate(&spec, &params, &config, args.n, args.staged, harvest)?
        }
    };

    if let Some(dims) = &args.image {
        let (w, h) = parse_dims(dims)?;
        if w * h != spec.n_units(0) {
            return Err(HeeError::InvalidConfig(format!(
                "--image {w}x{h} does not match the model's {} observation units",
                spec.n_units(0)
            )));
        }
        for row in samples.iter_mut() {
            for v in row.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        }
        let sidecar = args.out.with_extension("json");
        std::fs::write(&sidecar, format!("{{\"width\":{w},\"height\":{h}}}"))?;
    }
    data::write_rows_csv(&args.out, &samples)?;
    println!("wrote {} samples to {}", samples.len(), args.out.display());
    Ok(())
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let mut it = s.split('x');
    let parse = |v: Option<&str>| {
        v.and_then(|x| x.parse::<usize>().ok())
            .ok_or_else(|| HeeError::InvalidConfig(format!("bad --image value '{s}', want WxH")))
    };
    let w = parse(it.next())?;
    let h = parse(it.next())?;
    if it.next().is_some() {
        return Err(HeeError::InvalidConfig(format!("bad --image value '{s}', want WxH")));
    }
    Ok((w, h))
}

#[derive(Subcommand)]
pub enum AnalyzeCmd {
    /// Hessian spectrum and H_J quantities at an inferred state.
    Hessian {
        #[arg(long)]
        model: PathBuf,
        /// CSV whose first row is the clamped observation.
        #[arg(long)]
        clamp: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inference settle steps before taking the Hessian.
        #[arg(long, default_value_t = 300)]
        settle: u64,
        #[arg(long, default_value_t = 4.0)]
        m: f64,
        #[arg(long, default_value_t = 1.0)]
        tau_z: f64,
        #[arg(long, default_value_t = 1.0)]
        tau_v: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// λ₁(H) and log det(H) medians across depths at a fixed unit budget.
    Depthwidth {
        #[arg(long, default_value_t = 64)]
        units: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 4, 8])]
        depths: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also draw the two-series chart.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Integrated autocorrelation time of one CSV column.
    Iact {
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value_t = 0)]
        col: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mode coverage of 2-D samples against a named target's modes.
    Modes {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, value_enum)]
        target: ModeTarget,
        /// Assignment radius; default 3× the target's component std.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Histogram KL(P ‖ Q) between two 2-D sample files.
    Kl {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-unit dominant oscillation frequency over an inference window.
    Spectrum(ChainMetricArgs),
    /// Average transient step size over an inference window.
    Transient(ChainMetricArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeTarget {
    Mog4,
    Bench,
}

#[derive(Args)]
pub struct ChainMetricArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV whose first row is the clamped observation.
    #[arg(long)]
    pub clamp: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub m: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.08)]
    pub dt: f64,
    /// Window length in units of τ_z.
    #[arg(long, default_value_t = 100.0)]
    pub window_tau: f64,
    /// Physical interpretation of τ_z for the Hz axis.
    #[arg(long, default_value_t = 10.0)]
    pub tau_z_ms: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn clamp_row(path: &Path) -> Result<Vec<f64>> {
    let rows = data::read_rows_csv(path)?;
    rows.into_iter()
        .next()
        .ok_or_else(|| HeeError::InvalidConfig(format!("{}: no data rows", path.display())))
}

fn inference_record(args: &ChainMetricArgs) -> Result<sampler::ChainRecord> {
    let (spec, params) = model::load_checkpoint(&args.model)?;
    let x0 = clamp_row(&args.clamp)?;
    let config = SamplerConfig {
        method: if args.m > 0.0 { Method::Sld } else { Method::Ls },
        m: args.m,
        dt: args.dt,
        tau_u: 10.0 * args.dt,
        n_steps: (args.window_tau / args.dt).round() as u64,
        burn_in: 0,
        record_every: 1,
        seed: args.seed,
        ..Default::default()
    };
    let init = NetworkState::clamped(&spec, &x0)?;
    sampler::run_chain(&spec, &params, &init, &config, Mode::Inference)
}

pub fn cmd_analyze(cmd: &AnalyzeCmd) -> Result<()> {
    match cmd {
        AnalyzeCmd::Hessian { model, clamp, seed, settle, m, tau_z, tau_v, out } => {
            let (spec, params) = model::load_checkpoint(model)?;
            let x0 = clamp_row(clamp)?;
            let mut state = NetworkState::clamped(&spec, &x0)?;
            let config = SamplerConfig::default();
            let mut chain_rng = rng::seeded(*seed);
            for _ in 0..*settle {
                sampler::ls_step(&spec, &params, &mut state, &config, &mut chain_rng, Mode::Inference)?;
            }
            let grid = QuadratureGrid::default();
            let h = analyze::hessian(&spec, &params, &state.x, &grid)?;
            let rep = analyze::hj_quantities(&h, *tau_z, *m, *tau_v)?;
            let body = format!(
                "n_total,lambda_min,log_det,lambda_min_hj,log_det_hj,singular\n{},{},{},{},{},{}\n",
                rep.n_total, rep.lambda_min, rep.log_det, rep.lambda_min_hj, rep.log_det_hj, rep.singular
            );
            std::fs::write(out, body)?;
        }
        AnalyzeCmd::Depthwidth { units, depths, trials, seed, out, svg } => {
            let rows = analyze::depth_width_experiment(*units, depths, *trials, *seed)?;
            let mut body = String::from("depth,width,trials,median_lambda_min,median_log_det\n");
            for r in &rows {
                body.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.depth, r.width, r.trials, r.median_lambda_min, r.median_log_det
                ));
            }
            std::fs::write(out, body)?;
            if let Some(svg_path) = svg {
                let xs: Vec<f64> = rows.iter().map(|r| r.depth as f64).collect();
                analyze::write_line_chart(
                    svg_path,
                    "Hessian spectrum vs depth (fixed unit budget)",
                    "layers L",
                    &xs,
                    &[
                        ("median lambda_min", rows.iter().map(|r| r.median_lambda_min).collect()),
                        ("median log det", rows.iter().map(|r| r.median_log_det).collect()),
                    ],
                )?;
            }
        }
        AnalyzeCmd::Iact { series, col, out } => {
            let rows = data::read_rows_csv(series)?;
            let values: Vec<f64> = rows
                .iter()
                .map(|r| {
                    r.get(*col).copied().ok_or_else(|| {
                        HeeError::DimensionMismatch(format!("column {col} out of range"))
                    })
                })
                .collect::<Result<_>>()?;
            let tau = analyze::iact(&values);
            std::fs::write(out, format!("n,col,iact\n{},{},{}\n", values.len(), col, tau))?;
        }
        AnalyzeCmd::Modes { samples, target, radius, out } => {
            let rows = data::read_rows_csv(samples)?;
            let pts = data::as_points2(&rows)?;
            let mix = match target {
                ModeTarget::Mog4 => GaussianMixture2D::mog4(),
                ModeTarget::Bench => GaussianMixture2D::bench(),
            };
            let r = radius.unwrap_or(3.0 * mix.std);
            let cov = analyze::mode_coverage(&pts, &mix.means, r);
            let mut body = String::from("covered,assigned,total");
            for k in 0..mix.means.len() {
                body.push_str(&format!(",mass{k}"));
            }
            body.push('\n');
            body.push_str(&format!("{},{},{}", cov.covered, cov.assigned, pts.len()));
            for m in &cov.mass {
                body.push_str(&format!(",{m}"));
            }
            body.push('\n');
            std::fs::write(out, body)?;
        }
        AnalyzeCmd::Kl { p, q, out } => {
            let pr = data::as_points2(&data::read_rows_csv(p)?)?;
            let qr = data::as_points2(&data::read_rows_csv(q)?)?;
            let kl = analyze::hist_kl(&pr, &qr, &analyze::HistGrid::default());
            std::fs::write(out, format!("kl\n{kl}\n"))?;
        }
        AnalyzeCmd::Spectrum(args) => {
            let rec = inference_record(args)?;
            let peaks = analyze::spectrum_peak(&rec, args.tau_z_ms);
            let mut body = String::from("layer,unit,freq_hz\n");
            for p in &peaks {
                match p.freq_hz {
                    Some(f) => body.push_str(&format!("{},{},{}\n", p.layer, p.unit, f)),
                    None => body.push_str(&format!("{},{},\n", p.layer, p.unit)),
                }
            }
            std::fs::write(&args.out, body)?;
        }
        AnalyzeCmd::Transient(args) => {
            let rec = inference_record(args)?;
            let ts = analyze::transient_step(&rec);
            std::fs::write(&args.out, format!("average_step_size\n{ts}\n"))?;
        }
    }
    Ok(())
}

#[derive(Subcommand)]
pub enum BenchCmd {
    /// LS vs SLD head-to-head on the bundled 2-D mixture energy.
    Sampler {
        /// Adaptation strengths to test (m = 0 runs plain LS).
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 2.0, 4.0, 8.0])]
        m: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 5000)]
        steps: u64,
        #[arg(long, default_value_t = 0.08)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn cmd_bench(cmd: &BenchCmd) -> Result<()> {
    match cmd {
        BenchCmd::Sampler { m, seeds, steps, dt, out } => {
            let mix = GaussianMixture2D::bench();
            let start = [mix.means[0][0], mix.means[0][1]];
            let mut body = String::from("m,seed,modes_visited,iact,wallclock_s\n");
            for &mv in m {
                for seed in 0..*seeds {
                    let t0 = Instant::now();
                    let config = SamplerConfig {
                        method: if mv > 0.0 { Method::Sld } else { Method::Ls },
                        m: mv,
                        dt: *dt,
                        tau_u: 10.0 * dt,
                        n_steps: *steps,
                        burn_in: 0,
                        record_every: 1,
                        seed,
                        ..Default::default()
                    };
                    let mut chain_rng = rng::stream(seed, Domain::Chain, 0);
                    let grad = |p: &[f64]| mix.grad_log_density(p);
                    let rec = sampler::run_target_chain(&grad, &start, &config, &mut chain_rng)?;
                    let pts: Vec<[f64; 2]> = rec.iter().map(|p| [p[0], p[1]]).collect();
                    let visited = analyze::modes_visited(&pts, &mix.means, 3.0 * mix.std);
                    let xs: Vec<f64> = rec.iter().map(|p| p[0]).collect();
                    let tau = analyze::iact(&xs);
                    body.push_str(&format!(
                        "{},{},{},{},{:.3}\n",
                        mv,
                        seed,
                        visited,
                        tau,
                        t0.elapsed().as_secs_f64()
                    ));
                }
            }
            std::fs::write(out, body)?;
        }
    }
    Ok(())
}
