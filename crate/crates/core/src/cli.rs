//! Command-line front end.
//!
//! Exit codes: 0 success or pass, 1 verification or threshold failure,
//! 2 usage or I/O error. JSON goes to stdout, data files to `--output-dir`,
//! diagnostics to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::engine::{seed, GenState, Params};
use crate::error::Error;
use crate::experiment::{
    self, case_census, case_census_uniform, control_baseline, run_experiment, write_outputs,
    ExperimentConfig, ScanMode, SlabSpec,
};
use crate::planes::{family, Grid};
use crate::xorapprox::{
    compound_probability, count_cases, verify_xor_diff, verify_xor_sum, CaseCounts,
    MAX_EXHAUSTIVE_WIDTH,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn parse_hex(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let t = t
        .strip_prefix("0x")
        .or_else(|| t.strip_prefix("0X"))
        .unwrap_or(t);
    u64::from_str_radix(t, 16).map_err(|e| format!("invalid hex word {s:?}: {e}"))
}

fn parse_state(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected S0,S1 in hex, got {s:?}"))?;
    Ok((parse_hex(a)?, parse_hex(b)?))
}

#[derive(Parser, Debug)]
#[command(
    name = "xsplanes",
    version,
    about = "xorshift128+ generation, xor/arithmetic case checks and plane-concentration experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GenArgs {
    #[arg(short = 'a', long = "shift-a", default_value_t = Params::DEFAULT.0)]
    a: u32,
    #[arg(short = 'b', long = "shift-b", default_value_t = Params::DEFAULT.1)]
    b: u32,
    #[arg(short = 'c', long = "shift-c", default_value_t = Params::DEFAULT.2)]
    c: u32,
    /// 64-bit seed in hex, expanded with SplitMix64
    #[arg(long, value_parser = parse_hex, default_value = "0x1")]
    seed: u64,
}

impl GenArgs {
    fn params(&self) -> Result<Params, Error> {
        Params::new(self.a, self.b, self.c)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Hex,
    Unit,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scan {
    Fast,
    Full,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print raw outputs
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        /// Start from an explicit state S0,S1 (hex) instead of a seed
        #[arg(long, value_parser = parse_state)]
        state: Option<(u64, u64)>,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[arg(long, value_enum, default_value_t = Format::Hex)]
        format: Format,
    },
    /// Exhaustively check the xor/sum and xor/difference statements and the case counts
    Verify {
        #[arg(long, default_value_t = 10)]
        n_max: u32,
    },
    /// Slab sampling, plane hits, control baseline and data files
    Planes {
        #[command(flatten)]
        gen: GenArgs,
        /// Hit tolerance (vertical torus distance)
        #[arg(long, default_value_t = experiment::DEFAULT_EPS)]
        eps: f64,
        /// x-axis magnification exponent k (slab x < 2^-k); defaults to a
        #[arg(long)]
        magnify_exp: Option<u32>,
        #[arg(long)]
        target_points: Option<usize>,
        /// Collect 10000 slab points
        #[arg(long)]
        full_scale: bool,
        #[arg(long)]
        scan_cap: Option<u64>,
        #[arg(long, value_enum, default_value_t = Scan::Fast)]
        scan: Scan,
        #[arg(long, default_value = "xsplanes-out")]
        output_dir: PathBuf,
        /// Minimum concentration ratio for exit code 0
        #[arg(long, default_value_t = 10.0)]
        threshold: f64,
        #[arg(long, default_value_t = experiment::DEFAULT_CONTROL_POINTS)]
        control_points: usize,
        #[arg(long, value_parser = parse_hex, default_value = "0xc0ffee")]
        control_seed: u64,
        /// Only evaluate the uniform control baseline
        #[arg(long)]
        control_only: bool,
        #[arg(long, default_value_t = experiment::DEFAULT_CENSUS_STEPS)]
        census_steps: u64,
        #[arg(long, default_value_t = 3)]
        n_bits: u32,
        #[arg(long, default_value_t = 64)]
        grid_x: usize,
        #[arg(long, default_value_t = 64)]
        grid_y: usize,
    },
    /// Case frequencies along the generator and on uniform words
    Census {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = experiment::DEFAULT_CENSUS_STEPS)]
        steps: u64,
        #[arg(long, default_value_t = 3)]
        n_bits: u32,
        #[arg(long, value_parser = parse_hex, default_value = "0xc0ffee")]
        control_seed: u64,
    },
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Gen {
            gen,
            state,
            count,
            format,
        } => cmd_gen(&gen, state, count, format, out, err),
        Command::Verify { n_max } => cmd_verify(n_max, out),
        Command::Planes {
            gen,
            eps,
            magnify_exp,
            target_points,
            full_scale,
            scan_cap,
            scan,
            output_dir,
            threshold,
            control_points,
            control_seed,
            control_only,
            census_steps,
            n_bits,
            grid_x,
            grid_y,
        } => (|| {
            let params = gen.params()?;
            warn_params(&params, err);
            let mode = match scan {
                Scan::Fast => ScanMode::FastForward,
                Scan::Full => ScanMode::Full,
            };
            let target = target_points.unwrap_or(if full_scale {
                experiment::FULL_SCALE_TARGET_POINTS
            } else {
                experiment::DEFAULT_TARGET_POINTS
            });
            let cap = scan_cap.unwrap_or(match mode {
                ScanMode::FastForward => experiment::DEFAULT_FAST_SCAN_CAP,
                ScanMode::Full => experiment::DEFAULT_SCAN_CAP,
            });
            if !(0.0..=0.5).contains(&eps) {
                return Err(CliError::Usage(format!("--eps {eps} outside [0, 1/2]")));
            }
            let config = ExperimentConfig {
                params,
                seed: gen.seed,
                eps,
                slab: SlabSpec::new(magnify_exp.unwrap_or(params.a().get()), target, cap)?,
                mode,
                control_points,
                control_seed,
                census_steps,
                n_bits,
                grid: Grid {
                    nx: grid_x,
                    ny: grid_y,
                },
            };
            if control_only {
                cmd_control(&config, out)
            } else {
                cmd_planes(&config, &output_dir, threshold, out, err)
            }
        })(),
        Command::Census {
            gen,
            steps,
            n_bits,
            control_seed,
        } => (|| {
            let params = gen.params()?;
            warn_params(&params, err);
            cmd_census(params, gen.seed, steps, n_bits, control_seed, out)
        })(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                CliError::Usage(_) | CliError::Core(_) | CliError::Io(_) => EXIT_USAGE,
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

fn warn_params(params: &Params, err: &mut dyn Write) {
    if let Some(w) = params.approximation_warning() {
        let _ = writeln!(err, "warning: {w}");
    }
}

fn cmd_gen(
    gen: &GenArgs,
    state: Option<(u64, u64)>,
    count: u64,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let params = gen.params()?;
    warn_params(&params, err);
    let start = match state {
        Some((s0, s1)) => GenState::new(s0, s1, params)?,
        None => seed(gen.seed, params),
    };
    for o in start.outputs().take(count as usize) {
        match format {
            Format::Hex => writeln!(out, "0x{o:016x}")?,
            Format::Unit => writeln!(out, "{}", crate::engine::to_unit(o))?,
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(n_max: u32, out: &mut dyn Write) -> Result<i32, CliError> {
    if !(1..=MAX_EXHAUSTIVE_WIDTH).contains(&n_max) {
        return Err(CliError::Usage(format!(
            "--n-max {n_max} outside 1..={MAX_EXHAUSTIVE_WIDTH}"
        )));
    }
    writeln!(
        out,
        "{:>3} {:>9} {:>8} {:>8} {:>8} {:>6} {:>6} {:>6} {:>4} {:>9} {:>9} {:>7} {:>7} {:>6}",
        "n",
        "pairs",
        "A",
        "B",
        "C",
        "AB",
        "BC",
        "CA",
        "ABC",
        "union",
        "formula",
        "xor<=+",
        "xor>=-",
        "status"
    )?;
    let mut all_ok = true;
    for n in 1..=n_max {
        let got = count_cases(n)?;
        let want = CaseCounts::closed_form(n);
        let sum = verify_xor_sum(n)?;
        let diff = verify_xor_diff(n)?;
        let p3 = 3u64.pow(n);
        let ok = got == want
            && sum.holds()
            && diff.holds()
            && sum.equality_pairs == p3
            && diff.equality_pairs == p3;
        all_ok &= ok;
        writeln!(
            out,
            "{:>3} {:>9} {:>8} {:>8} {:>8} {:>6} {:>6} {:>6} {:>4} {:>9} {:>9} {:>7} {:>7} {:>6}",
            n,
            got.total,
            got.a,
            got.b,
            got.c,
            got.ab,
            got.bc,
            got.ca,
            got.abc,
            format!("{}/{}", got.union, got.total),
            want.union,
            if sum.holds() { "ok" } else { "FAIL" },
            if diff.holds() { "ok" } else { "FAIL" },
            if ok { "match" } else { "DIFF" }
        )?;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct ControlOnly {
    tolerance: f64,
    control_points: u64,
    control_hits: u64,
    control_hit_fraction: f64,
    control_analytic: f64,
    control_sigma: f64,
}

fn cmd_control(config: &ExperimentConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let fam = family(config.params.a().get())?;
    let c = control_baseline(config.control_points, &fam, config.eps, config.control_seed);
    let report = ControlOnly {
        tolerance: config.eps,
        control_points: c.n_points,
        control_hits: c.hits,
        control_hit_fraction: c.hit_fraction,
        control_analytic: c.analytic,
        control_sigma: c.sigma,
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("serializes")
    )?;
    Ok(EXIT_OK)
}

fn cmd_planes(
    config: &ExperimentConfig,
    dir: &std::path::Path,
    threshold: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let (report, points) = run_experiment(config)?;
    write_outputs(dir, config, &report, &points)?;
    out.write_all(experiment::report_json(&report).as_bytes())?;
    if report.truncated {
        let _ = writeln!(
            err,
            "warning: scan cap reached after {} triples with {} of {} slab points",
            report.n_triples_scanned, report.n_in_slab, config.slab.target_points
        );
    }
    let ratio = report.concentration_ratio;
    let _ = writeln!(
        err,
        "hit_fraction={:.6} control={:.6} concentration_ratio={}",
        report.hit_fraction,
        report.control_hit_fraction,
        ratio.map_or("undefined".to_string(), |r| format!("{r:.3}"))
    );
    Ok(match ratio {
        Some(r) if r >= threshold => EXIT_OK,
        _ => EXIT_FAIL,
    })
}

#[derive(Serialize)]
struct CensusReport {
    params: Params,
    seed: String,
    generator: experiment::CaseCensus,
    uniform: experiment::CaseCensus,
    analytic_estimate: f64,
    analytic_estimate_rational: String,
}

fn cmd_census(
    params: Params,
    seed64: u64,
    steps: u64,
    n_bits: u32,
    control_seed: u64,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let generator = case_census(seed(seed64, params), steps, n_bits)?;
    let uniform = case_census_uniform(control_seed, params.a(), steps, n_bits)?;
    let p = compound_probability(n_bits)?;
    let report = CensusReport {
        params,
        seed: experiment::format_seed(seed64),
        generator,
        uniform,
        analytic_estimate: p.value,
        analytic_estimate_rational: format!("{}/{}", p.numerator, p.denominator),
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("serializes")
    )?;
    Ok(EXIT_OK)
}
