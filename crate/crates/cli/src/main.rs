//! `ldpcb`: command-line front end for the achievable-rate, decoding
//! complexity, entropy, and threshold computations. Emits JSON (full
//! precision plus the numeric controls that produced each number) or CSV
//! tables; exit codes: 0 success, 1 validation error, 2 numeric/degenerate
//! error, 3 I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ldpcb_core::channel::{ChannelModel, NumericControls};
use ldpcb_core::code_entropy::{
    entropy_lower_bound, entropy_upper_bound, exact_code_stats, BitAssignment, ParityCheckMatrix,
};
use ldpcb_core::complexity::{
    complexity_bound_ip, complexity_bound_rp, pfister_bound_bec, pfister_bound_mbios,
};
use ldpcb_core::degree::{
    check_rate_convergence, design_rate, DegreePolynomial, EnsembleSpec, GridSpec, Perspective,
};
use ldpcb_core::parallel::{rp_assignment, PuncturingSpec};
use ldpcb_core::thresholds::overall_puncture_fraction;
use ldpcb_core::{
    capacity_limit, de_threshold, ml_threshold, rate_bound_ip, rate_bound_rp, table_report,
    BoundResult, ChannelFamily, DEControls, Error, ThresholdRow,
};

#[derive(Parser)]
#[command(name = "ldpcb", version, about = "Rate, complexity, and threshold bounds for LDPC ensembles over binary-input symmetric channels", max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Truncation depth of the channel-moment series.
    #[arg(long, global = true, default_value_t = 200)]
    pmax: usize,

    /// Relative tolerance of the series truncation.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    /// Relative tolerance of the Gaussian quadrature cross-check.
    #[arg(long, global = true, default_value_t = 1e-10)]
    quad_tol: f64,

    /// Node count of the Gaussian quadrature rule.
    #[arg(long, global = true, default_value_t = 301)]
    quad_nodes: usize,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Ensemble JSON: {"lambda": [[degree, weight], ...], "rho": [...], "perspective": "edge"}.
    #[arg(long)]
    ensemble: PathBuf,

    /// Puncturing JSON: {"type":"intentional","pi":[[degree,rate],...]} or
    /// {"type":"random","alpha":A,"p_pct":P}. Defaults to no puncturing.
    #[arg(long)]
    puncturing: Option<PathBuf>,
}

#[derive(Args)]
struct DeArgs {
    /// LLR grid spacing of density evolution.
    #[arg(long, default_value_t = 0.05)]
    de_step: f64,

    /// LLR grid half-width of density evolution.
    #[arg(long, default_value_t = 25.0)]
    de_range: f64,

    /// Iteration cap per density-evolution run.
    #[arg(long, default_value_t = 2000)]
    de_max_iters: usize,

    /// Message error probability counting as converged.
    #[arg(long, default_value_t = 1e-6)]
    de_target: f64,

    /// Bisection resolution of the threshold, in dB for the Gaussian channel.
    #[arg(long, default_value_t = 1e-3)]
    de_tol_db: f64,
}

impl DeArgs {
    fn controls(&self) -> DEControls {
        DEControls {
            llr_quantization_step: self.de_step,
            llr_range: self.de_range,
            max_iterations: self.de_max_iters,
            target_error: self.de_target,
            bisection_tol_db: self.de_tol_db,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ComplexityVariantArg {
    /// The series-based bound specialized to the puncturing pattern.
    Thm,
    /// The independent comparison bound (random puncturing only).
    Pfister,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Upper bound on the achievable rate of an (optionally punctured) ensemble.
    Rate {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Channel spec: bec:eps=E | bsc:w=W | biawgn:sigma=S | biawgn:ebno_db=D,rate=R.
        #[arg(long)]
        channel: String,
    },
    /// Lower bound on the decoding complexity needed to reach a capacity gap.
    Complexity {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        channel: String,
        /// Fractional gap to capacity.
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ComplexityVariantArg::Thm)]
        variant: ComplexityVariantArg,
    },
    /// Worst channel parameter at which the rate bound still admits the design rate.
    ThresholdMl {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Channel family: bec | bsc | biawgn.
        #[arg(long)]
        family: String,
    },
    /// Iterative-decoding threshold by density evolution (bec | biawgn).
    ThresholdDe {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        family: String,
        #[command(flatten)]
        de: DeArgs,
    },
    /// Channel parameter at which capacity equals the requested rate.
    CapacityLimit {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        family: String,
    },
    /// Threshold comparison table over a list of puncturing patterns.
    Table {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Patterns JSON: [{"id": "...", "type": ..., ...}, ...].
        #[arg(long)]
        patterns: PathBuf,
        #[arg(long)]
        family: String,
        /// Also compute iterative-decoding thresholds.
        #[arg(long)]
        with_de: bool,
        #[command(flatten)]
        de: DeArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Conditional-entropy bounds for a concrete parity-check matrix.
    Entropy {
        /// Parity-check matrix in alist format.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        channel: String,
        /// Bit error probability closing the upper bound.
        #[arg(long)]
        pb: Option<f64>,
        /// Also enumerate the code exhaustively (small codes only).
        #[arg(long)]
        exact: bool,
    },
    /// Design rate and rate-convergence check of an ensemble.
    CheckEnsemble {
        #[arg(long)]
        ensemble: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctrl = NumericControls {
        series_pmax: cli.pmax,
        series_tol: cli.tol,
        quad_rel_tol: cli.quad_tol,
        quad_nodes: cli.quad_nodes,
    };
    match run(&cli.command, &ctrl) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Validation(_) => 1,
                Error::Io(_) => 3,
                _ => 2,
            })
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(Error::from)
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::validation(format!("malformed {what}: {e}")))
}

fn load_ensemble(path: &PathBuf) -> Result<(DegreePolynomial, DegreePolynomial), Error> {
    let spec: EnsembleSpec = parse_json(&read_file(path)?, "ensemble JSON")?;
    spec.into_edge_pair()
}

fn load_puncturing(path: &Option<PathBuf>) -> Result<PuncturingSpec, Error> {
    let spec = match path {
        Some(p) => parse_json::<PuncturingSpec>(&read_file(p)?, "puncturing JSON")?,
        None => PuncturingSpec::none(),
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Deserialize)]
struct PatternEntry {
    id: String,
    #[serde(flatten)]
    spec: PuncturingSpec,
}

fn emit<T: Serialize>(command: &str, ctrl: &NumericControls, result: T) -> Result<(), Error> {
    #[derive(Serialize)]
    struct Output<'a, T> {
        command: &'a str,
        controls: &'a NumericControls,
        result: T,
    }
    let out = Output {
        command,
        controls: ctrl,
        result,
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable output"));
    Ok(())
}

/// Six significant digits, fixed notation.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (5 - x.abs().log10().floor() as i64).clamp(0, 17) as usize;
    format!("{x:.decimals$}")
}

fn rate_bound_for(
    lambda: &DegreePolynomial,
    rho: &DegreePolynomial,
    pattern: &PuncturingSpec,
    base: ChannelModel,
    ctrl: &NumericControls,
) -> Result<BoundResult, Error> {
    let big_lambda = lambda.convert(Perspective::Node);
    let gamma_node = rho.convert(Perspective::Node);
    match pattern {
        PuncturingSpec::Intentional { .. } => {
            let pi = pattern.intentional_map().unwrap();
            rate_bound_ip(lambda, &big_lambda, &gamma_node, base, &pi, ctrl)
        }
        PuncturingSpec::Random { alpha, p_pct } => {
            let rp = rp_assignment(lambda, base, *alpha, *p_pct, ctrl)?;
            rate_bound_rp(&rp, &gamma_node, base, ctrl)
        }
    }
}

fn run(command: &Command, ctrl: &NumericControls) -> Result<(), Error> {
    ctrl.validate()?;
    match command {
        Command::Rate { ensemble, channel } => {
            let (lambda, rho) = load_ensemble(&ensemble.ensemble)?;
            let pattern = load_puncturing(&ensemble.puncturing)?;
            let base = ChannelModel::parse(channel)?;
            let bound = rate_bound_for(&lambda, &rho, &pattern, base, ctrl)?;
            let r_d = design_rate(&lambda, &rho)?;
            let gamma =
                overall_puncture_fraction(&lambda.convert(Perspective::Node), &pattern)?;
            #[derive(Serialize)]
            struct RateOut {
                design_rate: f64,
                punctured_design_rate: f64,
                channel: ChannelModel,
                bound: BoundResult,
            }
            emit(
                "rate",
                ctrl,
                RateOut {
                    design_rate: r_d,
                    punctured_design_rate: r_d / (1.0 - gamma),
                    channel: base,
                    bound,
                },
            )
        }
        Command::Complexity {
            ensemble,
            channel,
            epsilon,
            variant,
        } => {
            let (lambda, _rho) = load_ensemble(&ensemble.ensemble)?;
            let pattern = load_puncturing(&ensemble.puncturing)?;
            let base = ChannelModel::parse(channel)?;
            #[derive(Serialize)]
            struct ComplexityOut {
                variant: &'static str,
                epsilon: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                k1: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                k2: Option<f64>,
                value: f64,
            }
            let out = match variant {
                ComplexityVariantArg::Thm => {
                    let bound = match &pattern {
                        PuncturingSpec::Intentional { .. } => {
                            let pi = pattern.intentional_map().unwrap();
                            complexity_bound_ip(&lambda, base, &pi, ctrl)?
                        }
                        PuncturingSpec::Random { alpha, p_pct } => {
                            let rp = rp_assignment(&lambda, base, *alpha, *p_pct, ctrl)?;
                            complexity_bound_rp(&rp, base, ctrl)?
                        }
                    };
                    ComplexityOut {
                        variant: "thm",
                        epsilon: *epsilon,
                        k1: Some(bound.k1),
                        k2: Some(bound.k2),
                        value: bound.value(*epsilon)?,
                    }
                }
                ComplexityVariantArg::Pfister => {
                    let p_pct = match &pattern {
                        PuncturingSpec::Random { p_pct, .. } => *p_pct,
                        PuncturingSpec::Intentional { .. } => {
                            return Err(Error::validation(
                                "the pfister variant needs a random puncturing spec",
                            ))
                        }
                    };
                    let value = match base {
                        ChannelModel::Bec { eps } => pfister_bound_bec(eps, p_pct, *epsilon)?,
                        _ => pfister_bound_mbios(base, p_pct, *epsilon, ctrl)?,
                    };
                    ComplexityOut {
                        variant: "pfister",
                        epsilon: *epsilon,
                        k1: None,
                        k2: None,
                        value,
                    }
                }
            };
            emit("complexity", ctrl, out)
        }
        Command::ThresholdMl { ensemble, family } => {
            let (lambda, rho) = load_ensemble(&ensemble.ensemble)?;
            let pattern = load_puncturing(&ensemble.puncturing)?;
            let family: ChannelFamily = family.parse()?;
            let threshold = ml_threshold(&lambda, &rho, &pattern, family, ctrl)?;
            emit("threshold-ml", ctrl, threshold_out(family, threshold))
        }
        Command::ThresholdDe {
            ensemble,
            family,
            de,
        } => {
            let (lambda, rho) = load_ensemble(&ensemble.ensemble)?;
            let pattern = load_puncturing(&ensemble.puncturing)?;
            let family: ChannelFamily = family.parse()?;
            let de_ctrl = de.controls();
            let threshold = de_threshold(&lambda, &rho, &pattern, family, &de_ctrl, ctrl)?;
            #[derive(Serialize)]
            struct DeOut {
                threshold: ThresholdOut,
                de_controls: DEControls,
            }
            emit(
                "threshold-de",
                ctrl,
                DeOut {
                    threshold: threshold_out(family, threshold),
                    de_controls: de_ctrl,
                },
            )
        }
        Command::CapacityLimit { rate, family } => {
            let family: ChannelFamily = family.parse()?;
            let threshold = capacity_limit(*rate, family, ctrl)?;
            emit("capacity-limit", ctrl, threshold_out(family, threshold))
        }
        Command::Table {
            ensemble,
            patterns,
            family,
            with_de,
            de,
            out,
            format,
        } => {
            let (lambda, rho) = load_ensemble(&ensemble.ensemble)?;
            let entries: Vec<PatternEntry> =
                parse_json(&read_file(patterns)?, "patterns JSON")?;
            let pats: Vec<(String, PuncturingSpec)> = entries
                .into_iter()
                .map(|e| {
                    e.spec.validate()?;
                    Ok((e.id, e.spec))
                })
                .collect::<Result<_, Error>>()?;
            let family: ChannelFamily = family.parse()?;
            let de_ctrl = de.controls();
            let rows = table_report(&lambda, &rho, &pats, family, *with_de, ctrl, &de_ctrl)?;
            match format {
                OutputFormat::Csv => {
                    let csv = render_csv(&rows);
                    match out {
                        Some(path) => {
                            std::fs::write(path, csv)?;
                            #[derive(Serialize)]
                            struct TableMeta<'a> {
                                family: ChannelFamily,
                                with_de: bool,
                                de_controls: &'a DEControls,
                                rows_written: usize,
                                out: String,
                            }
                            emit(
                                "table",
                                ctrl,
                                TableMeta {
                                    family,
                                    with_de: *with_de,
                                    de_controls: &de_ctrl,
                                    rows_written: rows.len(),
                                    out: path.display().to_string(),
                                },
                            )
                        }
                        None => {
                            print!("{csv}");
                            Ok(())
                        }
                    }
                }
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct TableOut<'a> {
                        family: ChannelFamily,
                        with_de: bool,
                        de_controls: &'a DEControls,
                        rows: &'a [ThresholdRow],
                    }
                    let body = TableOut {
                        family,
                        with_de: *with_de,
                        de_controls: &de_ctrl,
                        rows: &rows,
                    };
                    match out {
                        Some(path) => {
                            #[derive(Serialize)]
                            struct Output<'a, T> {
                                command: &'a str,
                                controls: &'a NumericControls,
                                result: T,
                            }
                            let text = serde_json::to_string_pretty(&Output {
                                command: "table",
                                controls: ctrl,
                                result: body,
                            })
                            .expect("serializable output");
                            std::fs::write(path, text)?;
                            Ok(())
                        }
                        None => emit("table", ctrl, body),
                    }
                }
            }
        }
        Command::Entropy {
            matrix,
            channel,
            pb,
            exact,
        } => {
            let h = ParityCheckMatrix::from_alist(&read_file(matrix)?)?;
            let base = ChannelModel::parse(channel)?;
            let a = BitAssignment::single_channel(h.n());
            let lower = entropy_lower_bound(&h, &a, std::slice::from_ref(&base), ctrl)?;
            #[derive(Serialize)]
            struct ExactOut {
                per_bit_entropy: f64,
                map_bit_error: f64,
                dimension: usize,
            }
            #[derive(Serialize)]
            struct EntropyOut {
                n: usize,
                c: usize,
                design_rate: f64,
                channel: ChannelModel,
                lower_bound: BoundResult,
                #[serde(skip_serializing_if = "Option::is_none")]
                upper_bound: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                exact: Option<ExactOut>,
            }
            let upper_bound = match pb {
                Some(p) => Some(entropy_upper_bound(h.design_rate(), *p)?),
                None => None,
            };
            let exact = if *exact {
                let ch = ldpcb_core::DiscreteMbios::from_channel(&base)?;
                let stats = exact_code_stats(&h, &a, std::slice::from_ref(&ch))?;
                Some(ExactOut {
                    per_bit_entropy: stats.per_bit_entropy,
                    map_bit_error: stats.map_bit_error,
                    dimension: stats.dimension,
                })
            } else {
                None
            };
            emit(
                "entropy",
                ctrl,
                EntropyOut {
                    n: h.n(),
                    c: h.c(),
                    design_rate: h.design_rate(),
                    channel: base,
                    lower_bound: lower,
                    upper_bound,
                    exact,
                },
            )
        }
        Command::CheckEnsemble { ensemble } => {
            let (lambda, rho) = load_ensemble(ensemble)?;
            let r_d = design_rate(&lambda, &rho)?;
            let report = check_rate_convergence(&lambda, &rho, &GridSpec::default())?;
            #[derive(Serialize)]
            struct CheckOut {
                design_rate: f64,
                rate_converges: bool,
                argmax: f64,
                max_value: f64,
            }
            emit(
                "check-ensemble",
                ctrl,
                CheckOut {
                    design_rate: r_d,
                    rate_converges: report.passes,
                    argmax: report.argmax,
                    max_value: report.max_value,
                },
            )
        }
    }
}

#[derive(Serialize)]
struct ThresholdOut {
    family: ChannelFamily,
    /// E_b/N_0 in dB for the Gaussian channel, the native noise parameter
    /// otherwise.
    threshold: f64,
    units: &'static str,
}

fn threshold_out(family: ChannelFamily, threshold: f64) -> ThresholdOut {
    ThresholdOut {
        family,
        threshold,
        units: match family {
            ChannelFamily::Biawgn => "ebno_db",
            _ => "channel_parameter",
        },
    }
}

fn render_csv(rows: &[ThresholdRow]) -> String {
    let mut out = String::from(
        "pattern_id,design_rate,capacity_limit_db,ml_bound_db,it_threshold_db,fractional_gap\n",
    );
    for r in rows {
        let it = r.it_threshold_db.map(sig6).unwrap_or_default();
        let gap = r.fractional_gap.map(sig6).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.pattern_id,
            sig6(r.design_rate),
            sig6(r.capacity_limit_db),
            sig6(r.ml_bound_db),
            it,
            gap
        ));
    }
    out
}
