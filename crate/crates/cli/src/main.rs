use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gearsieve::constellation::is_admissible;
use gearsieve::correlation::{tau, variance_decomposition, MuSource};
use gearsieve::fourier::{fit_decay_exponent, tau_fourier, weighted_ergodic_sum, HConvention};
use gearsieve::harness::{
    format_real, read_csv, run_figures, run_moments, run_table1, run_table2, run_table3,
    write_figures, write_table1, write_table2, write_table3, Conventions, Format, RunConfig,
    SurvivorRange, Table3Row,
};
use gearsieve::signal::{
    certify, certify_with_survivors, composite_signal_with, goldbach_count, HitRule, SieveBasis,
    SignalOptions, TraceMode, Window,
};
use gearsieve::{canonical_seed, structural_is_prime, Constellation, Error};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "gearsieve",
    version,
    about = "Prime constellation signal laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical seed and gear sequence of N.
    Seed { n: u64 },
    /// Structural primality of N (N > 3).
    Prime { n: u64 },
    /// Certify a window [anchor, m0²) and optionally write the survivors.
    Scan(ScanArgs),
    /// Local survival τ_p(d) for one period of d, as CSV.
    Tau {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "0,2")]
        tuple: Constellation,
    },
    /// Variance decomposition of the certified count, as JSON.
    Moments {
        #[arg(long)]
        m0: u64,
        #[arg(long, default_value = "0,2")]
        tuple: Constellation,
        #[arg(long, default_value_t = 7)]
        anchor: u64,
        #[arg(long, value_enum, default_value_t = MuArg::Observed)]
        mu: MuArg,
    },
    /// Weighted ergodic sum against its mean-value prediction, as CSV.
    Equidist {
        #[arg(long)]
        m0: u64,
        #[arg(long, default_value = "direct")]
        convention: HConvention,
    },
    /// Closed-form and DFT Fourier coefficients for primes 5..=pmax, as CSV.
    Fourier {
        #[arg(long)]
        pmax: u64,
    },
    /// Number of Goldbach representations of an even E.
    Goldbach { e: u64 },
    /// Admissibility report for an offset set such as `0,2,6`.
    Admissible {
        #[arg(required = true, num_args = 1..)]
        offsets: Vec<String>,
    },
    /// Signal statistics per m0.
    Table1(SweepArgs),
    /// Variance decomposition per m0.
    Table2(SweepArgs),
    /// Equidistribution per m0 with the decay fit.
    Table3(SweepArgs),
    /// Data series for the three figures.
    Figures(SweepArgs),
    /// Decay exponent of the equidistribution error.
    Fit {
        /// A table3.csv to fit instead of recomputing the sweep.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    m0: u64,
    #[arg(long, default_value_t = 7)]
    anchor: u64,
    #[arg(long, default_value = "0,2")]
    tuple: Constellation,
    /// Write the certified starting integers, one per line.
    #[arg(long)]
    survivors: Option<PathBuf>,
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long, value_enum, default_value_t = RuleArg::Divisor)]
    rule: RuleArg,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(
        long = "m0-list",
        value_delimiter = ',',
        default_value = "30,50,100,200,500,1000"
    )]
    m0_list: Vec<u64>,
    /// Single m0, overriding --m0-list.
    #[arg(long)]
    m0: Option<u64>,
    #[arg(long, default_value = "0,2")]
    tuple: Constellation,
    #[arg(long, default_value_t = 7)]
    anchor: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv")]
    format: Vec<Format>,
    #[arg(long, default_value = "direct")]
    convention: HConvention,
    /// Hit rule for the signal statistics of table 1 and the figures.
    #[arg(long = "table1-rule", value_enum, default_value_t = RuleArg::Proper)]
    table1_rule: RuleArg,
    #[arg(long = "survivor-range", value_enum, default_value_t = RangeArg::Strict)]
    survivor_range: RangeArg,
    #[arg(long, value_enum, default_value_t = MuArg::Observed)]
    mu: MuArg,
    /// Add inclusive and strict twin counts to table 1.
    #[arg(long)]
    diagnostic: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Divisor,
    Proper,
}

impl From<RuleArg> for HitRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Divisor => HitRule::Divisor,
            RuleArg::Proper => HitRule::ProperDivisor,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RangeArg {
    Strict,
    Inclusive,
}

#[derive(Clone, Copy, ValueEnum)]
enum MuArg {
    Observed,
    MeanField,
}

impl From<MuArg> for MuSource {
    fn from(m: MuArg) -> Self {
        match m {
            MuArg::Observed => MuSource::Observed,
            MuArg::MeanField => MuSource::MeanField,
        }
    }
}

impl SweepArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            m0_list: self.m0.map_or_else(|| self.m0_list.clone(), |m| vec![m]),
            tuple: self.tuple.clone(),
            anchor: self.anchor,
            conventions: Conventions {
                table1_rule: self.table1_rule.into(),
                survivor_range: match self.survivor_range {
                    RangeArg::Strict => SurvivorRange::Strict,
                    RangeArg::Inclusive => SurvivorRange::Inclusive,
                },
                mu_source: self.mu.into(),
                h_convention: self.convention,
            },
            workers: self.workers,
            output_dir: self.out.clone(),
            formats: self.format.clone(),
            diagnostic: self.diagnostic,
        }
    }
}

fn print_json(out: &mut impl Write, value: &impl serde::Serialize) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn print_paths(out: &mut impl Write, paths: &[PathBuf]) -> anyhow::Result<()> {
    for p in paths {
        writeln!(out, "{}", p.display())?;
    }
    Ok(())
}

fn write_survivors(path: &Path, survivors: &[u64]) -> Result<(), Error> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    for n in survivors {
        writeln!(w, "{n}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn scan(args: &ScanArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let basis = SieveBasis::for_bound(args.m0)?;
    let window = Window::certification(args.anchor, args.m0)?;
    let opts = SignalOptions {
        rule: args.rule.into(),
        mode: TraceMode::Survivors,
        segments: args.segments,
    };
    let trace = composite_signal_with(&basis, &window, &args.tuple, &opts)?;
    let result = if args.survivors.is_some() {
        certify_with_survivors(&trace)
    } else {
        certify(&trace)
    };
    if let (Some(path), Some(list)) = (&args.survivors, &result.survivors) {
        write_survivors(path, list)?;
    }
    print_json(
        out,
        &json!({
            "m0": args.m0,
            "anchor": args.anchor,
            "end": window.end(),
            "positions": window.positions(),
            "tuple": args.tuple.to_string(),
            "count": result.count,
        }),
    )
}

fn run(cli: Cli, out: &mut impl Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Seed { n } => {
            let seed = canonical_seed(n)?;
            let gears: Vec<_> = if seed.m0 % 2 == 1 {
                seed.gears().collect()
            } else {
                Vec::new()
            };
            print_json(
                out,
                &json!({
                    "n": seed.n,
                    "n0": seed.n0,
                    "m0": seed.m0,
                    "candidate": seed.is_prime_candidate(),
                    "gears": gears,
                }),
            )?;
        }
        Command::Prime { n } => writeln!(out, "{}", structural_is_prime(n)?)?,
        Command::Scan(args) => scan(&args, out)?,
        Command::Tau { p, tuple } => {
            writeln!(out, "d,tau_num,tau_den,case")?;
            for d in 0..p {
                let t = tau(&tuple, p, d)?;
                writeln!(
                    out,
                    "{d},{},{},{}",
                    t.tau.numer(),
                    t.tau.denom(),
                    t.case_label.label()
                )?;
            }
        }
        Command::Moments {
            m0,
            tuple,
            anchor,
            mu,
        } => {
            let basis = SieveBasis::for_bound(m0)?;
            let window = Window::certification(anchor, m0)?;
            let mut report = variance_decomposition(&basis, &window, &tuple, mu.into())?;
            report.m0 = m0;
            print_json(out, &report)?;
        }
        Command::Equidist { m0, convention } => {
            let r = weighted_ergodic_sum(m0, convention)?;
            writeln!(out, "m0,L,weighted_sum,theory,rel_error_pct")?;
            writeln!(
                out,
                "{},{},{},{},{}",
                r.m0,
                r.l,
                format_real(r.weighted_sum),
                format_real(r.theory),
                format_real(r.rel_error_pct)
            )?;
        }
        Command::Fourier { pmax } => {
            writeln!(out, "p,k,closed,dft_re,dft_im")?;
            for p in gearsieve::arith::primes_between(5, pmax) {
                for row in tau_fourier(p)? {
                    writeln!(
                        out,
                        "{},{},{:e},{:e},{:e}",
                        row.p, row.k, row.coeff_closed, row.dft_re, row.dft_im
                    )?;
                }
            }
        }
        Command::Goldbach { e } => {
            print_json(out, &json!({ "E": e, "count": goldbach_count(e)?.count }))?;
        }
        Command::Admissible { offsets } => {
            let c: Constellation = offsets.join(",").parse()?;
            print_json(out, &is_admissible(&c))?;
        }
        Command::Table1(args) => {
            let cfg = args.config();
            print_paths(out, &write_table1(&cfg, &run_table1(&cfg)?)?)?;
        }
        Command::Table2(args) => {
            let cfg = args.config();
            let rows = run_table2(&cfg)?;
            let mut paths = write_table2(&cfg, &rows)?;
            if cfg.formats.contains(&Format::Json) {
                let path = cfg.output_dir.join("moments.json");
                let text = serde_json::to_string_pretty(&run_moments(&cfg)?)? + "\n";
                std::fs::write(&path, text).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                paths.push(path);
            }
            print_paths(out, &paths)?;
        }
        Command::Table3(args) => {
            let cfg = args.config();
            print_paths(out, &write_table3(&cfg, &run_table3(&cfg)?)?)?;
        }
        Command::Figures(args) => {
            let cfg = args.config();
            print_paths(out, &write_figures(&cfg, &run_figures(&cfg)?)?)?;
        }
        Command::Fit { input, sweep } => {
            let points: Vec<(f64, f64)> = match input {
                Some(path) => read_csv::<Table3Row>(&path)?
                    .iter()
                    .map(|r| (r.m0 as f64, r.rel_error_pct))
                    .collect(),
                None => run_table3(&sweep.config())?
                    .rows
                    .iter()
                    .map(|r| (r.m0 as f64, r.rel_error_pct))
                    .collect(),
            };
            let fit = fit_decay_exponent(&points)?;
            writeln!(out, "alpha,intercept")?;
            writeln!(
                out,
                "{},{}",
                format_real(fit.alpha),
                format_real(fit.intercept)
            )?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Io { .. } | Error::Csv { .. }) => 3,
        Some(Error::Invariant(_)) => 4,
        Some(_) => 2,
        None if err.downcast_ref::<io::Error>().is_some() => 3,
        None => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
