use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qrps_core::bosonic::{dpc_rate, optimize_dpc_coefficient, BosonicParams, DEFAULT_T_TOL};
use qrps_core::codesim::{
    simulate_binning_nc, simulate_block_markov_sc, CodeRates, SimConfig, SimReport, TypicalityKind,
};
use qrps_core::regions::{sweep_region, CsiMode, OptimizerConfig};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::{
    dpc_csv, dpc_svg, fmt6, frontier_csv, frontier_rows, write_atomic, DpcCurve, FrontierRow,
};
use crate::spec::parse_channel_spec;
use crate::strategy_file::StrategyFile;

fn parse_mode(s: &str) -> std::result::Result<CsiMode, String> {
    s.parse::<CsiMode>().map_err(|e| e.to_string())
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    /// Channel-spec JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    /// sc, causal, nc or none.
    #[arg(long, value_parser = parse_mode)]
    pub mode: CsiMode,
    /// Channel uses per letter.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Ascending distortion budgets, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coordinate-ascent sweeps per start.
    #[arg(long, default_value_t = 40)]
    pub max_cycles: usize,
    /// |X|; defaults to the cardinality bound.
    #[arg(long)]
    pub x_card: Option<usize>,
    /// |Z|; defaults to the cardinality bound.
    #[arg(long)]
    pub z_card: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_sweep(a: &SweepArgs, progress: &mut dyn Write) -> Result<Vec<FrontierRow>> {
    let spec = parse_channel_spec(&a.spec)?;
    let cfg = OptimizerConfig {
        starts: a.starts,
        max_cycles: a.max_cycles,
        x_card: a.x_card,
        z_card: a.z_card,
        k: a.k,
        ..OptimizerConfig::default()
    };
    cfg.validate()?;
    let _ = writeln!(
        progress,
        "sweep: mode {}, k {}, {} budgets, {} starts, seed {}",
        a.mode,
        a.k,
        a.grid.len(),
        a.starts,
        a.seed
    );
    let frontier = sweep_region(&spec.rpc, &spec.distortion, a.mode, &a.grid, &cfg, a.seed)?;
    let rows = frontier_rows(&frontier);
    for r in &rows {
        let _ = writeln!(
            progress,
            "  D {}  R {}{}",
            fmt6(r.d),
            fmt6(r.r),
            if r.clamped { "  (clamped)" } else { "" }
        );
    }
    write_atomic(&a.out, frontier_csv(&rows).as_bytes())?;
    let _ = writeln!(progress, "wrote {}", a.out.display());
    Ok(rows)
}

#[derive(Args, Clone, Debug)]
pub struct DpcArgs {
    /// Signal photon number N_A.
    #[arg(long)]
    pub na: f64,
    /// Interference photon number N_S.
    #[arg(long)]
    pub ns: f64,
    /// Environment photon number N_E.
    #[arg(long)]
    pub ne: f64,
    /// Transmissivity.
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tmin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

pub fn dpc_curve(a: &DpcArgs) -> Result<DpcCurve> {
    if a.steps < 2 {
        return Err(CliError::Argument(format!(
            "--steps must be at least 2, got {}",
            a.steps
        )));
    }
    if !(a.tmin.is_finite() && a.tmax.is_finite() && a.tmin <= a.tmax) {
        return Err(CliError::Argument(format!(
            "need tmin <= tmax, got [{}, {}]",
            a.tmin, a.tmax
        )));
    }
    let p = BosonicParams::new(a.na, a.ns, a.ne, a.eta)?;
    let points = (0..a.steps)
        .map(|i| {
            let t = a.tmin + (a.tmax - a.tmin) * i as f64 / (a.steps - 1) as f64;
            Ok((t, dpc_rate(t, &p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let opt = optimize_dpc_coefficient(&p, DEFAULT_T_TOL)?;
    Ok(DpcCurve {
        points,
        t_max: opt.t_max,
        r_max: opt.rate,
    })
}

pub fn run_dpc_curve(a: &DpcArgs, progress: &mut dyn Write) -> Result<DpcCurve> {
    let curve = dpc_curve(a)?;
    write_atomic(&a.out, dpc_csv(&curve).as_bytes())?;
    let _ = writeln!(
        progress,
        "dpc-curve: t_max {}, R_max {}; wrote {}",
        fmt6(curve.t_max),
        fmt6(curve.r_max),
        a.out.display()
    );
    if let Some(svg) = &a.svg {
        write_atomic(svg, dpc_svg(&curve).as_bytes())?;
        let _ = writeln!(progress, "wrote {}", svg.display());
    }
    Ok(curve)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Strictly-causal or causal strategies.
    BlockMarkov,
    /// Non-causal or no-CSI strategies.
    Binning,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::BlockMarkov => "block-markov",
            Scheme::Binning => "binning",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Typicality {
    Joint,
    Conditional,
}

#[derive(Args, Clone, Debug)]
pub struct SimulateArgs {
    /// Channel-spec JSON file; must describe a measurement channel.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    /// Strategy JSON file.
    #[arg(long)]
    pub strategy: PathBuf,
    /// Blocklength.
    #[arg(long)]
    pub n: usize,
    /// Transmission blocks.
    #[arg(long = "T", default_value_t = 1)]
    pub blocks: usize,
    #[arg(long)]
    pub trials: usize,
    /// R,R_s,R~_s in bits per symbol.
    #[arg(long, value_delimiter = ',', required = true)]
    pub rates: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Typicality slack of the covering or bin search.
    #[arg(long)]
    pub delta_cover: Option<f64>,
    /// Typicality slack of the decoder.
    #[arg(long)]
    pub delta_decode: Option<f64>,
    #[arg(long, value_enum)]
    pub typicality: Option<Typicality>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Everything needed to rerun a simulation, plus its outcome.
#[derive(Clone, Debug, Serialize)]
pub struct SimulateOutput {
    pub scheme: Scheme,
    pub channel_kind: &'static str,
    pub strategy: StrategyFile,
    pub report: SimReport,
}

pub fn simulate(a: &SimulateArgs) -> Result<SimulateOutput> {
    let spec = parse_channel_spec(&a.spec)?;
    if !spec.rpc.is_measurement() {
        return Err(CliError::invalid(
            &a.spec,
            format!(
                "simulate only supports measurement channels (classical outcomes), got a {} channel",
                spec.rpc.kind().tag()
            ),
        ));
    }
    let [r, r_s, r_s_tilde] = a.rates[..] else {
        return Err(CliError::Argument(format!(
            "--rates needs three values R,Rs,Rst, got {}",
            a.rates.len()
        )));
    };
    let resolved =
        StrategyFile::read(&a.strategy)?.resolve(&spec.rpc, &spec.distortion, &a.strategy)?;
    let mut cfg = SimConfig::new(
        a.n,
        a.blocks,
        a.trials,
        CodeRates::new(r, r_s, r_s_tilde)?,
        a.seed,
    );
    if let Some(d) = a.delta_cover {
        cfg.delta_cover = d;
    }
    if let Some(d) = a.delta_decode {
        cfg.delta_decode = d;
    }
    if let Some(t) = a.typicality {
        cfg.typicality = match t {
            Typicality::Joint => TypicalityKind::Joint,
            Typicality::Conditional => TypicalityKind::Conditional,
        };
    }
    let mode = resolved.strategy.mode;
    let fits = match a.scheme {
        Scheme::BlockMarkov => mode.has_z(),
        Scheme::Binning => !mode.has_z(),
    };
    if !fits {
        return Err(CliError::invalid(
            &a.strategy,
            format!(
                "a mode-{mode} strategy cannot run the {} scheme",
                a.scheme.name()
            ),
        ));
    }
    let report = match a.scheme {
        Scheme::BlockMarkov => {
            simulate_block_markov_sc(&spec.rpc, &resolved.strategy, &resolved.estimator, &cfg)?
        }
        Scheme::Binning => {
            simulate_binning_nc(&spec.rpc, &resolved.strategy, &resolved.estimator, &cfg)?
        }
    };
    Ok(SimulateOutput {
        scheme: a.scheme,
        channel_kind: spec.rpc.kind().tag(),
        strategy: resolved.file,
        report,
    })
}

pub fn run_simulate(a: &SimulateArgs, progress: &mut dyn Write) -> Result<SimulateOutput> {
    let out = simulate(a)?;
    let mut json = serde_json::to_string_pretty(&out).expect("report serializes");
    json.push('\n');
    write_atomic(&a.out, json.as_bytes())?;
    let _ = writeln!(
        progress,
        "simulate: {} trials, error rate {}, distortion {}; wrote {}",
        out.report.trials,
        fmt6(out.report.error_rate),
        fmt6(out.report.avg_distortion),
        a.out.display()
    );
    Ok(out)
}
