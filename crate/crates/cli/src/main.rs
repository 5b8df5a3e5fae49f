//! Command-line front end: compile machines to tensor files, run strings on
//! the neural or exact machine, verify stability end to end, extract rules
//! from tensors, and generate corpora and noise sweeps.
//!
//! Exit codes: 0 success, 1 contract/verification failure, 2 usage or parse
//! error. Every report file embeds the invocation that produced it; given
//! identical flags and seeds the files are byte-identical across runs.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nnpda_core::*;

#[derive(Parser)]
#[command(
    name = "nnpda",
    version,
    about = "Pushdown automata as tensor recurrent networks with a differentiable stack"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a machine into the four weight tensors and report its budget.
    Compile(CompileArgs),
    /// Feed one string to the neural machine (or the exact vectorized one).
    Run(RunArgs),
    /// Calibrate, check oracle equivalence and stability, run bound suites.
    Verify(VerifyArgs),
    /// Read the rule table back out of a tensor file.
    Extract(ExtractArgs),
    /// Generate a labeled corpus.
    GenCorpus(GenCorpusArgs),
    /// Classification accuracy and deviations under weight noise.
    Sweep(SweepArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SpecSource {
    /// Built-in machine: parens, dyck2, or anbn.
    #[arg(long)]
    builtin: Option<String>,
    /// Machine spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

enum CliError {
    /// Bad flags, unreadable files, malformed inputs. Exit 2.
    Usage(String),
    /// The data failed a contract: verification gate, ambiguous tensors,
    /// label mismatches. Exit 1.
    Contract(String),
}

type CliResult<T> = Result<T, CliError>;

fn usage<E: std::fmt::Display>(error: E) -> CliError {
    CliError::Usage(error.to_string())
}

impl SpecSource {
    fn load(&self) -> CliResult<PdaSpec> {
        if let Some(name) = &self.builtin {
            let which: Builtin = name.parse().map_err(CliError::Usage)?;
            Ok(builtin(which))
        } else {
            let path = self.spec.as_ref().expect("clap enforces the source group");
            load_spec_file(path)
        }
    }
}

fn load_spec_file(path: &Path) -> CliResult<PdaSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_spec_text(&text).map_err(usage)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn invocation_line() -> String {
    let args: Vec<String> = std::env::args().collect();
    format!("# invocation: {}\n", args.join(" "))
}

fn parse_string(spec: &PdaSpec, text: &str) -> CliResult<Vec<usize>> {
    text.split_whitespace()
        .map(|token| {
            spec.input_index(token)
                .ok_or_else(|| CliError::Usage(format!("unknown input character {token:?}")))
        })
        .collect()
}

fn resolve_end_symbol(spec: &PdaSpec, end: &Option<String>) -> CliResult<usize> {
    match end {
        Some(name) => spec
            .input_index(name)
            .ok_or_else(|| CliError::Usage(format!("unknown end character {name:?}"))),
        None => Ok(default_end_symbol(spec)),
    }
}

fn sensitivity(h: f64) -> CliResult<Sensitivity> {
    Sensitivity::new(h).map_err(usage)
}

// ---------------------------------------------------------------------------
// compile
// ---------------------------------------------------------------------------

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Output tensor file.
    #[arg(long)]
    out: PathBuf,
    /// Stack capacity used for the memory-footprint line.
    #[arg(long, default_value_t = DEFAULT_STACK_CAPACITY)]
    stack_capacity: usize,
}

fn cmd_compile(args: &CompileArgs) -> CliResult<()> {
    let spec = args.source.load()?;
    let tensors = encode_weights(&spec);
    write_file(&args.out, &write_tensors(&tensors))?;
    let budget = weight_counts(&spec, args.stack_capacity);
    println!(
        "compiled machine: states={} inputs={} stack_chars={}",
        spec.state_count(),
        spec.input_alphabet_size(),
        spec.stack_alphabet_size()
    );
    println!("{budget}");
    println!("wrote {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Tensor file to run instead of the compiled spec (dimensions must
    /// match the spec, which still provides names and accept states).
    #[arg(long)]
    tensors: Option<PathBuf>,
    /// Input string as space-separated character names, end marker included.
    #[arg(long)]
    string: String,
    /// Sigmoid sensitivity.
    #[arg(long, default_value_t = 60.0)]
    h: f64,
    /// Run the exact vectorized machine instead of the neural one.
    #[arg(long)]
    ideal: bool,
    /// Write a per-step TSV trace of the neural run.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the final stack, one level per line.
    #[arg(long)]
    stack_dump: Option<PathBuf>,
    /// Confidence guard radius.
    #[arg(long, default_value_t = 0.1)]
    eps_accept: f64,
    #[arg(long, default_value_t = DEFAULT_STACK_CAPACITY)]
    stack_capacity: usize,
}

fn check_dimensions(spec: &PdaSpec, tensors: &WeightTensors) -> CliResult<()> {
    if tensors.state_count() != spec.state_count()
        || tensors.input_alphabet_size() != spec.input_alphabet_size()
        || tensors.stack_alphabet_size() != spec.stack_alphabet_size()
    {
        return Err(CliError::Usage(format!(
            "tensor dimensions ({}, {}, {}) disagree with the spec ({}, {}, {})",
            tensors.state_count(),
            tensors.input_alphabet_size(),
            tensors.stack_alphabet_size(),
            spec.state_count(),
            spec.input_alphabet_size(),
            spec.stack_alphabet_size()
        )));
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let spec = args.source.load()?;
    let input = parse_string(&spec, &args.string)?;

    if args.ideal {
        if args.trace.is_some() || args.stack_dump.is_some() || args.tensors.is_some() {
            return Err(CliError::Usage(
                "--ideal runs the exact machine; --tensors, --trace and --stack-dump apply to the neural run".into(),
            ));
        }
        let tensors = encode_weights(&spec);
        let m1 = spec.input_alphabet_size();
        let mut state = IdealState::start(
            spec.state_count(),
            spec.stack_alphabet_size(),
            spec.start_state,
        );
        for (position, &symbol) in input.iter().enumerate() {
            if symbol >= m1 {
                return Err(CliError::Usage(format!(
                    "input symbol {symbol} at {position} out of range"
                )));
            }
            state = step_ideal_vectorized(&tensors, &state, &nnpda_core::util::one_hot(m1, symbol));
        }
        let (decoded, _) = state.decode().expect("exact machine stays one-hot");
        let accept = spec.accept_states.contains(&decoded);
        println!(
            "{} confidence=1 state={}",
            verdict(accept),
            spec.states[decoded]
        );
        return Ok(());
    }

    let tensors = match &args.tensors {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let tensors = parse_tensors(&text).map_err(usage)?;
            check_dimensions(&spec, &tensors)?;
            tensors
        }
        None => encode_weights(&spec),
    };
    let h = sensitivity(args.h)?;
    let options = RunOptions {
        eps_accept: args.eps_accept,
        stack_capacity: args.stack_capacity,
    };
    let report = nn_run(
        &tensors,
        &input,
        h,
        spec.start_state,
        &spec.accept_states,
        &options,
    )
    .map_err(|e| CliError::Contract(e.to_string()))?;

    if args.trace.is_some() || args.stack_dump.is_some() {
        let steps = nn_trace(&tensors, &input, h, spec.start_state, &options)
            .map_err(|e| CliError::Contract(e.to_string()))?;
        if let Some(path) = &args.trace {
            let mut text = invocation_line();
            text.push_str(&write_trace_tsv(&steps));
            write_file(path, &text)?;
            println!("wrote trace {}", path.display());
        }
        if let Some(path) = &args.stack_dump {
            write_file(
                path,
                &steps.last().expect("trace includes the start").stack.dump(),
            )?;
            println!("wrote stack {}", path.display());
        }
    }

    if report.low_confidence {
        println!("warning: low confidence ({})", report.confidence);
    }
    println!(
        "{} confidence={}",
        verdict(report.accept),
        report.confidence
    );
    Ok(())
}

fn verdict(accept: bool) -> &'static str {
    if accept {
        "ACCEPT"
    } else {
        "REJECT"
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Deviation target; must lie in (0, 1/14).
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Force this sensitivity instead of calibrating.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, default_value_t = 1e4)]
    h_ceiling: f64,
    /// Exhaustive corpus length for calibration and equivalence.
    #[arg(long, default_value_t = 6)]
    exhaustive_len: usize,
    #[arg(long, default_value_t = 200)]
    random_count: usize,
    #[arg(long, default_value_t = 64)]
    random_max_len: usize,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Perturbation-check trials.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 100_000)]
    lemma_samples: usize,
    /// Run only the bound property suites.
    #[arg(long)]
    lemmas_only: bool,
    /// End-of-string character name (default: last input character).
    #[arg(long)]
    end: Option<String>,
    #[arg(long, default_value_t = DEFAULT_STACK_CAPACITY)]
    stack_capacity: usize,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
}

struct Stage {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn lemma_tsv(report: &LemmaReport) -> String {
    let mut out = String::from("suite\tsamples\tworst\tlimit\tpass\n");
    out.push_str(&format!(
        "combination_7eps\t{}\t{}\t7\t{}\n",
        report.combination.samples,
        report.combination.worst_ratio,
        report.combination.worst_ratio <= 7.0
    ));
    out.push_str(&format!(
        "reading_isometry\t{}\t{}\t0\t{}\n",
        report.isometry.samples,
        report.isometry.max_gap,
        report.isometry.max_gap == 0.0
    ));
    out.push_str(&format!(
        "sigmoid_saturation\t{}\t{}\t{}\t{}\n",
        report.saturation.samples,
        report.saturation.worst_gap,
        report.saturation.bound,
        report.saturation.worst_gap <= report.saturation.bound.next_up()
    ));
    out
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    let invocation = invocation_line();
    let mut stages: Vec<Stage> = Vec::new();

    let lemma_options = LemmaSuiteOptions {
        samples: args.lemma_samples,
        seed: args.seed,
        ..Default::default()
    };
    let lemmas = lemma_suite(&lemma_options);
    write_file(
        &args.out.join("lemmas.tsv"),
        &format!("{invocation}{}", lemma_tsv(&lemmas)),
    )?;
    stages.push(Stage {
        name: "lemmas",
        pass: lemmas.pass(),
        detail: format!(
            "combination worst_ratio={} isometry max_gap={} saturation worst_gap={} bound={}",
            lemmas.combination.worst_ratio,
            lemmas.isometry.max_gap,
            lemmas.saturation.worst_gap,
            lemmas.saturation.bound
        ),
    });

    if !args.lemmas_only {
        let spec = args.source.load()?;
        let end = resolve_end_symbol(&spec, &args.end)?;
        let tensors = encode_weights(&spec);
        let corpus_strings = calibration_corpus(
            &spec,
            end,
            args.exhaustive_len,
            args.random_count,
            args.random_max_len,
            args.seed,
        )
        .map_err(|e| CliError::Contract(e.to_string()))?;
        let calibration_options = CalibrationOptions {
            h_ceiling: args.h_ceiling,
            stack_capacity: args.stack_capacity,
        };

        // Calibration: either a forced sensitivity or the two searches
        // (orbit traces and single-step perturbations) combined.
        let mut calibration_rows = String::from("quantity\tvalue\n");
        let (h_used, calibration_pass) = match args.h {
            Some(forced) => {
                let h = sensitivity(forced)?;
                let evidence =
                    corpus_evidence(&spec, &tensors, &corpus_strings, h, args.stack_capacity)
                        .map_err(|e| CliError::Contract(e.to_string()))?;
                calibration_rows.push_str(&format!("forced_h\t{forced}\n"));
                calibration_rows.push_str(&format!("trace_evidence\t{evidence}\n"));
                (forced, evidence <= args.eps)
            }
            None => {
                let trace_result =
                    find_min_h(&spec, &corpus_strings, args.eps, &calibration_options);
                let perturb_result = find_min_h_for_perturbation(
                    &spec,
                    args.eps,
                    args.trials,
                    args.seed,
                    &calibration_options,
                );
                match (trace_result, perturb_result) {
                    (Ok(trace), Ok(perturb)) => {
                        let used = trace.h_star.max(perturb.h_star);
                        calibration_rows.push_str(&format!("trace_h_star\t{}\n", trace.h_star));
                        calibration_rows.push_str(&format!("trace_evidence\t{}\n", trace.evidence));
                        calibration_rows
                            .push_str(&format!("perturbation_h_star\t{}\n", perturb.h_star));
                        calibration_rows
                            .push_str(&format!("perturbation_evidence\t{}\n", perturb.evidence));
                        calibration_rows.push_str(&format!("h_used\t{used}\n"));
                        (used, true)
                    }
                    (trace, perturb) => {
                        for (label, result) in [("trace", trace), ("perturbation", perturb)] {
                            if let Err(e) = result {
                                calibration_rows.push_str(&format!("{label}_error\t{e}\n"));
                            }
                        }
                        calibration_rows.push_str("h_used\tnone\n");
                        (args.h_ceiling, false)
                    }
                }
            }
        };
        calibration_rows.push_str(&format!("epsilon\t{}\n", args.eps));
        write_file(
            &args.out.join("calibration.tsv"),
            &format!("{invocation}{calibration_rows}"),
        )?;
        stages.push(Stage {
            name: "calibration",
            pass: calibration_pass,
            detail: format!("h_used={h_used} eps={}", args.eps),
        });

        let h = sensitivity(h_used)?;

        // Orbit deviations over the calibration corpus at the sensitivity in
        // use, one row per string.
        let mut deviation_rows = String::from("string\tlen\tmax_q_dev\tmax_k_dev\n");
        let mut worst_trace = 0.0f64;
        for string in &corpus_strings {
            let trace =
                deviation_trace_with_tensors(&spec, &tensors, string, h, args.stack_capacity)
                    .map_err(|e| CliError::Contract(e.to_string()))?;
            worst_trace = worst_trace.max(trace.max_dev());
            let rendered: Vec<&str> = string
                .iter()
                .map(|&s| spec.input_alphabet[s].as_str())
                .collect();
            deviation_rows.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                rendered.join(""),
                string.len(),
                trace.max_q_dev(),
                trace.max_k_dev()
            ));
        }
        write_file(
            &args.out.join("deviations.tsv"),
            &format!("{invocation}{deviation_rows}"),
        )?;
        stages.push(Stage {
            name: "stability",
            pass: worst_trace <= args.eps,
            detail: format!(
                "worst deviation {} over {} strings",
                worst_trace,
                corpus_strings.len()
            ),
        });

        // Oracle equivalence on a labeled corpus.
        let labeled = gen_corpus(
            &spec,
            end,
            CorpusMode::Exhaustive {
                max_len: args.exhaustive_len,
            },
        )
        .map_err(|e| CliError::Contract(e.to_string()))?;
        let mut random_part = gen_corpus(
            &spec,
            end,
            CorpusMode::Random {
                count: args.random_count,
                max_len: args.random_max_len,
                seed: args.seed,
            },
        )
        .map_err(|e| CliError::Contract(e.to_string()))?;
        let mut entries = labeled.entries;
        entries.append(&mut random_part.entries);
        let run_options = RunOptions {
            eps_accept: 0.1,
            stack_capacity: args.stack_capacity,
        };
        let mut mismatches = 0usize;
        let mut mismatch_rows = String::new();
        for entry in &entries {
            let report = nn_run(
                &tensors,
                &entry.symbols,
                h,
                spec.start_state,
                &spec.accept_states,
                &run_options,
            )
            .map_err(|e| CliError::Contract(e.to_string()))?;
            if report.accept != entry.accept {
                mismatches += 1;
                let rendered: Vec<&str> = entry
                    .symbols
                    .iter()
                    .map(|&s| spec.input_alphabet[s].as_str())
                    .collect();
                mismatch_rows.push_str(&format!(
                    "mismatch\t{}\toracle={}\tnetwork={}\n",
                    rendered.join(""),
                    entry.accept,
                    report.accept
                ));
            }
        }
        let equivalence = format!(
            "strings\t{}\nmismatches\t{}\n{}",
            entries.len(),
            mismatches,
            mismatch_rows
        );
        write_file(
            &args.out.join("equivalence.tsv"),
            &format!("{invocation}{equivalence}"),
        )?;
        stages.push(Stage {
            name: "equivalence",
            pass: mismatches == 0,
            detail: format!("{} strings, {} mismatches", entries.len(), mismatches),
        });

        // Single-step perturbation contraction at the sensitivity in use.
        let perturbation = perturbation_step_check(&spec, args.eps, h, args.trials, args.seed)
            .map_err(|e| CliError::Contract(e.to_string()))?;
        let perturbation_tsv = format!(
            "trials\t{}\nfailures\t{}\nworst_q_dev\t{}\nworst_k_dev\t{}\nepsilon\t{}\nh\t{}\nseed\t{}\n",
            perturbation.trials,
            perturbation.failures,
            perturbation.worst_q_dev,
            perturbation.worst_k_dev,
            perturbation.epsilon,
            perturbation.h,
            perturbation.seed
        );
        write_file(
            &args.out.join("perturbation.tsv"),
            &format!("{invocation}{perturbation_tsv}"),
        )?;
        stages.push(Stage {
            name: "perturbation",
            pass: perturbation.pass(),
            detail: format!(
                "{} trials, {} failures, worst q={} k={}",
                perturbation.trials,
                perturbation.failures,
                perturbation.worst_q_dev,
                perturbation.worst_k_dev
            ),
        });
    }

    let mut summary = invocation.clone();
    let all_pass = stages.iter().all(|s| s.pass);
    for stage in &stages {
        summary.push_str(&format!(
            "{}: {} ({})\n",
            stage.name,
            if stage.pass { "PASS" } else { "FAIL" },
            stage.detail
        ));
    }
    summary.push_str(&format!(
        "result: {}\n",
        if all_pass { "PASS" } else { "FAIL" }
    ));
    write_file(&args.out.join("summary.txt"), &summary)?;
    print!("{summary}");

    if all_pass {
        Ok(())
    } else {
        Err(CliError::Contract(format!(
            "{} of {} stages failed; reports in {}",
            stages.iter().filter(|s| !s.pass).count(),
            stages.len(),
            args.out.display()
        )))
    }
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

#[derive(Args)]
struct ExtractArgs {
    /// Tensor file to decode.
    #[arg(long)]
    tensors: PathBuf,
    /// Output spec file.
    #[arg(long)]
    out: PathBuf,
    /// Spec file supplying names, start state, and accept states.
    #[arg(long, conflicts_with = "names_builtin")]
    names_spec: Option<PathBuf>,
    /// Built-in machine supplying names, start state, and accept states.
    #[arg(long)]
    names_builtin: Option<String>,
}

fn cmd_extract(args: &ExtractArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.tensors)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.tensors.display())))?;
    let tensors = parse_tensors(&text).map_err(usage)?;
    let names = if let Some(path) = &args.names_spec {
        load_spec_file(path)?.naming()
    } else if let Some(name) = &args.names_builtin {
        let which: Builtin = name.parse().map_err(CliError::Usage)?;
        builtin(which).naming()
    } else {
        println!(
            "note: no naming metadata given; using synthetic names, start q0, empty accept set"
        );
        NamingMetadata {
            states: (0..tensors.state_count())
                .map(|i| format!("q{i}"))
                .collect(),
            input_alphabet: (0..tensors.input_alphabet_size())
                .map(|i| format!("a{i}"))
                .collect(),
            stack_alphabet: (0..tensors.stack_alphabet_size())
                .map(|i| format!("g{i}"))
                .collect(),
            start_state: 0,
            accept_states: BTreeSet::new(),
        }
    };
    let spec = extract_rules(&tensors, &names).map_err(|e| CliError::Contract(e.to_string()))?;
    write_file(&args.out, &write_spec_text(&spec))?;
    println!("extracted {} rules", spec.transitions.len());
    println!("wrote {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-corpus
// ---------------------------------------------------------------------------

#[derive(Args)]
struct GenCorpusArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Enumerate every string up to this length.
    #[arg(long, conflicts_with_all = ["count"])]
    exhaustive_len: Option<usize>,
    /// Sample this many random strings instead.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 50)]
    max_len: usize,
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// End-of-string character name (default: last input character).
    #[arg(long)]
    end: Option<String>,
    /// Output corpus file.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_gen_corpus(args: &GenCorpusArgs) -> CliResult<()> {
    let spec = args.source.load()?;
    let end = resolve_end_symbol(&spec, &args.end)?;
    let mode = match (args.exhaustive_len, args.count) {
        (Some(max_len), None) => CorpusMode::Exhaustive { max_len },
        (None, Some(count)) => CorpusMode::Random {
            count,
            max_len: args.max_len,
            seed: args.seed,
        },
        _ => {
            return Err(CliError::Usage(
                "choose exactly one of --exhaustive-len or --count".into(),
            ))
        }
    };
    let corpus = gen_corpus(&spec, end, mode).map_err(|e| CliError::Contract(e.to_string()))?;
    write_file(&args.out, &write_corpus(&corpus, &spec))?;
    println!(
        "{} entries ({} accepted) -> {}",
        corpus.entries.len(),
        corpus.positive_count(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SpecSource,
    /// Comma-separated noise amplitudes, e.g. 0,0.01,0.1,0.3,0.49.
    #[arg(long, value_delimiter = ',', required = true)]
    amplitudes: Vec<f64>,
    #[arg(long, default_value_t = 60.0)]
    h: f64,
    /// Exhaustive corpus length used for classification.
    #[arg(long, default_value_t = 6)]
    exhaustive_len: usize,
    /// Noise seed.
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// End-of-string character name (default: last input character).
    #[arg(long)]
    end: Option<String>,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let spec = args.source.load()?;
    let end = resolve_end_symbol(&spec, &args.end)?;
    let corpus = gen_corpus(
        &spec,
        end,
        CorpusMode::Exhaustive {
            max_len: args.exhaustive_len,
        },
    )
    .map_err(|e| CliError::Contract(e.to_string()))?;
    let h = sensitivity(args.h)?;
    let rows = weight_noise_sweep(&spec, &args.amplitudes, &corpus, h, args.seed)
        .map_err(|e| CliError::Contract(e.to_string()))?;
    let mut tsv = format!(
        "{}amplitude\taccuracy\tmax_deviation\textraction_ok\n",
        invocation_line()
    );
    for row in &rows {
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            row.amplitude, row.accuracy, row.max_deviation, row.extraction_ok
        ));
    }
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    write_file(&args.out.join("sweep.tsv"), &tsv)?;
    for row in &rows {
        println!(
            "amplitude={} accuracy={} max_deviation={} extraction_ok={}",
            row.amplitude, row.accuracy, row.max_deviation, row.extraction_ok
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Compile(args) => cmd_compile(args),
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Extract(args) => cmd_extract(args),
        Command::GenCorpus(args) => cmd_gen_corpus(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Contract(message)) => {
            eprintln!("verification failure: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
