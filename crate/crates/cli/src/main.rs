//! `qradar`: run photon-pair radar scenarios and the supporting calculators.
//!
//! Exit status is 0 when a target is detected, 2 when the search finds no
//! detection, and 1 on any error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qradar_core::correlator::export;
use qradar_core::estimator::{dilation_delta, doppler_scale, gamma_minus_one, lorentz_gamma};
use qradar_core::jam::{jam_table, JamRatio};
use qradar_core::rangemodel::{fit_rates_with, max_range, read_samples_csv};
use qradar_core::timetag::io as tagio;
use qradar_core::{analyze, run_scenario, Analysis, JamScenario, RangeLimit, RateModel, Scenario, TimeTagStream};

#[derive(Parser)]
#[command(name = "qradar", version, about = "Time-correlated photon-pair radar simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario end to end and write the report and plot data.
    Simulate(SimulateArgs),
    /// Correlate recorded time-tag files with a scenario's grid.
    Correlate(CorrelateArgs),
    /// Fit `rate = b + a/x²` to (x_mm, rate) samples.
    FitRange(FitRangeArgs),
    /// Signal-to-jam ratios for classical and entangled illumination.
    JamTable(JamArgs),
    /// Lorentz factor and dilation-induced timing and range errors.
    Relativity(RelativityArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Scenario supplying the grid, channel speed and identification settings.
    #[arg(long)]
    scenario: PathBuf,
    /// Reference time-tag file (`.qtt` binary or text).
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Received time-tag file.
    #[arg(long)]
    recv: PathBuf,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct FitRangeArgs {
    /// CSV of `x_mm,rate` rows.
    csv: PathBuf,
    /// Fit `b + a·x²` instead of `b + a/x²`.
    #[arg(long)]
    literal: bool,
    /// Pair rate (pairs/s) to extrapolate the usable range to.
    #[arg(long, requires = "reference_rate")]
    pair_rate: Option<f64>,
    /// Pair rate (pairs/s) at which the samples were taken.
    #[arg(long)]
    reference_rate: Option<f64>,
    /// Signal rate below which the return is unusable.
    #[arg(long, default_value_t = 1.0)]
    min_signal: f64,
}

#[derive(Args)]
struct JamArgs {
    #[arg(long, default_value_t = 1000.0)]
    k: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Quantum cross-section; defaults to `--sigma`.
    #[arg(long)]
    sigma_q: Option<f64>,
    #[arg(long, default_value_t = 100.0)]
    pj: f64,
    #[arg(long, default_value_t = 10)]
    m_max: u32,
}

#[derive(Args)]
struct RelativityArgs {
    /// Speed (m/s).
    #[arg(long, allow_negative_numbers = true)]
    v: f64,
    /// Photon speed in the medium (m/s).
    #[arg(long, default_value_t = qradar_core::SPEED_OF_LIGHT_AIR)]
    c_a: f64,
    /// Flight times (s) to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "1e-3,1,10,60")]
    t: Vec<f64>,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_artifacts(dir: &Path, a: &Analysis) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut report = create(dir, "report.json")?;
    serde_json::to_writer_pretty(&mut report, &a.report)?;
    writeln!(report)?;
    report.flush()?;
    let cg = &a.outcome.correlogram;
    export::write_csv(cg, create(dir, "correlogram.csv")?)?;
    export::write_binary(cg, create(dir, "correlogram.bin")?)?;
    let (g, d) = a.outcome.peak.map_or((0, 0), |p| (p.gamma_idx, p.doppler_idx));
    export::write_profile_csv(cg, g, d, create(dir, "depth_profile.csv")?)?;
    Ok(())
}

fn print_summary(a: &Analysis) {
    let r = &a.report;
    let fmt = |x: Option<f64>, prec: usize| x.map_or("-".to_string(), |v| format!("{v:.prec$}"));
    println!("scenario        {}", r.scenario);
    println!("detected        {}", r.detected);
    println!("range_m         {}", fmt(r.range_m, 4));
    println!("velocity_mps    {}", fmt(r.velocity_mps, 1));
    println!("gamma_hat       {}", fmt(r.gamma_hat, 12));
    println!("depth_m         {}", fmt(r.depth_m, 3));
    println!(
        "classification  {}",
        r.classification.map_or("-".to_string(), |c| format!("{c:?}"))
    );
    println!("significance    {}", fmt(r.significance, 1));
    println!(
        "singles         ref {} / recv {}, coincidences {:.0}",
        r.counts.reference_singles, r.counts.received_singles, r.counts.coincidences
    );
}

fn exit_for(a: &Analysis) -> ExitCode {
    if a.report.detected {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let mut sc = Scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        sc.seed = seed;
    }
    let (streams, analysis) = run_scenario(&sc)?;
    write_artifacts(&args.out, &analysis)?;
    tagio::write_binary(&streams.reference, create(&args.out, "reference.qtt")?)?;
    tagio::write_binary(&streams.received, create(&args.out, "received.qtt")?)?;
    print_summary(&analysis);
    Ok(exit_for(&analysis))
}

fn read_tags(path: &Path) -> Result<TimeTagStream> {
    let open = || File::open(path).with_context(|| format!("opening {}", path.display()));
    let binary = tagio::read_binary(BufReader::new(open()?));
    match binary {
        Ok(s) => Ok(s),
        Err(qradar_core::Error::Format(_)) => {
            tagio::read_text(BufReader::new(open()?)).with_context(|| format!("reading {}", path.display()))
        }
        Err(e) => Err(e).with_context(|| format!("reading {}", path.display())),
    }
}

fn correlate(args: CorrelateArgs) -> Result<ExitCode> {
    let sc = Scenario::load(&args.scenario)?;
    let reference = read_tags(&args.reference)?;
    let received = read_tags(&args.recv)?;
    let analysis = analyze(&sc, &reference, &received)?;
    write_artifacts(&args.out, &analysis)?;
    print_summary(&analysis);
    Ok(exit_for(&analysis))
}

fn fit_range(args: FitRangeArgs) -> Result<ExitCode> {
    let f = File::open(&args.csv).with_context(|| format!("opening {}", args.csv.display()))?;
    let samples = read_samples_csv(BufReader::new(f))?;
    let model = if args.literal {
        RateModel::LiteralQuadratic
    } else {
        RateModel::InverseSquare
    };
    let mut fit = fit_rates_with(&samples, model)?;
    println!("samples   {}", samples.len());
    println!("model     {model:?}");
    println!("a         {:.6} ± {:.6}", fit.a, fit.std_err_a);
    println!("b         {:.6} ± {:.6}", fit.b, fit.std_err_b);
    println!("residual  {:.6}", fit.residual);
    if let (Some(rate), Some(reference)) = (args.pair_rate, args.reference_rate) {
        fit = fit.with_reference_rate(reference);
        match max_range(rate, &fit, args.min_signal)? {
            RangeLimit::Bounded(mm) => println!("max_range {mm:.1} mm ({:.3} m) at {rate:e} pairs/s", mm / 1e3),
            RangeLimit::Unbounded => println!("max_range unbounded"),
            RangeLimit::Unreachable => println!("max_range none: signal never reaches {}", args.min_signal),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn jam(args: JamArgs) -> Result<ExitCode> {
    let s = JamScenario {
        k: args.k,
        sigma: args.sigma,
        sigma_q: args.sigma_q.unwrap_or(args.sigma),
        m: 0,
        p_j: args.pj,
    };
    println!("{:>5} {:>16} {:>20}", "m", "classical", "entangled");
    for (m, classical, entangled) in jam_table(&s, args.m_max)? {
        let e = match entangled {
            JamRatio::Linear(x) => format!("{x}"),
            JamRatio::Log2(l) => format!("2^{l:.6}"),
        };
        println!("{m:>5} {classical:>16} {e:>20}");
    }
    Ok(ExitCode::SUCCESS)
}

fn relativity(args: RelativityArgs) -> Result<ExitCode> {
    let (v, c_a) = (args.v, args.c_a);
    let beta = v / c_a;
    let gm1 = gamma_minus_one(v, c_a)?;
    println!("v             {v} m/s");
    println!("beta          {beta:.6e}");
    println!("gamma         {:.16}", lorentz_gamma(v, c_a)?);
    println!("gamma - 1     {gm1:.4e}");
    println!("per second    {:.4} ns", gm1 * 1e9);
    println!("doppler scale {:.12} (approaching)", doppler_scale(-v.abs(), c_a)?);
    println!();
    println!(
        "{:>10} {:>16} {:>18} {:>16}",
        "t_s", "dilation_ns", "doppler_diff_ns", "range_err_mm"
    );
    for &t in &args.t {
        let dt = gm1 * t;
        let diff = dilation_delta(t, beta.abs())?;
        println!(
            "{t:>10} {:>16.6} {:>18.6} {:>16.4}",
            dt * 1e9,
            diff * 1e9,
            c_a * dt / 2.0 * 1e3
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Correlate(a) => correlate(a),
        Command::FitRange(a) => fit_range(a),
        Command::JamTable(a) => jam(a),
        Command::Relativity(a) => relativity(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
