use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::debug;

use mabisim::chi::{parallel_compose, ChiMode};
use mabisim::dist::StateId;
use mabisim::dot::export_dot;
use mabisim::elimination::{dist_equiv_on_normal_form, normal_form};
use mabisim::format::{parse_distribution, parse_model, print_ma, print_pa};
use mabisim::model::Model;
use mabisim::oracle::{coarsest_naive_partition_bruteforce, DEFAULT_BOUND};
use mabisim::refinement::{decide, decide_states, DecideOptions, Semantics};
use mabisim::report::{normal_form_json, report_json, report_text};
use mabisim::weak::{generator_set, WeakConfig};

const SCHED_LIMIT_VAR: &str = "MABISIM_SCHED_LIMIT";

#[derive(Parser)]
#[command(name = "mabisim", version, about = "Weak bisimulation for Markov automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Weak,
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn chi_mode(self) -> ChiMode {
        match self {
            Switch::On => ChiMode::WithChiZero,
            Switch::Off => ChiMode::LegacyNoChiZero,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two models (or two states of one model) are bisimilar.
    Decide {
        #[arg(long, value_enum, default_value = "weak")]
        semantics: SemanticsArg,
        /// Add χ(0) self-loops to stable states with exit rate 0.
        #[arg(long, value_enum, default_value = "on")]
        chi_zero: Switch,
        #[arg(long)]
        no_preprocess: bool,
        #[arg(long)]
        json: bool,
        /// Compare two states of a single model.
        #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
        states: Option<Vec<String>>,
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
    },
    /// Eliminate nn-vanishing states and print the resulting automaton.
    Normalize {
        #[arg(long, value_enum, default_value = "on")]
        chi_zero: Switch,
        #[arg(long)]
        json: bool,
        /// Compare two distributions over the original state names, e.g. "1/2 x, 1/2 y".
        #[arg(long, num_args = 2, value_names = ["MU", "GAMMA"])]
        equiv: Option<Vec<String>>,
        file: PathBuf,
    },
    /// Print the probabilistic automaton with χ-labelled timed steps.
    ToPa {
        #[arg(long, value_enum, default_value = "on")]
        chi_zero: Switch,
        file: PathBuf,
    },
    /// Print the parallel composition of two Markov automata.
    Compose { left: PathBuf, right: PathBuf },
    /// Print model statistics.
    Info {
        /// List the weak generator set of every state and action.
        #[arg(long)]
        convex_sets: bool,
        #[arg(long, value_enum, default_value = "on")]
        chi_zero: Switch,
        file: PathBuf,
    },
    /// Print the model in Graphviz format.
    Dot {
        /// Cluster states by their final weak bisimulation class.
        #[arg(long)]
        partition: bool,
        file: PathBuf,
    },
    #[command(hide = true)]
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
}

#[derive(Subcommand)]
enum OracleKind {
    Naive {
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        file: PathBuf,
    },
}

fn load(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_model(&text).with_context(|| format!("{}", path.display()))
}

fn scheduler_limit() -> Result<Option<usize>> {
    match std::env::var(SCHED_LIMIT_VAR) {
        Ok(v) => {
            let n = v.trim().parse().with_context(|| format!("{SCHED_LIMIT_VAR} must be a non-negative integer, got {v:?}"))?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn state_of(m: &Model, name: &str) -> Result<StateId> {
    m.state(name).ok_or_else(|| anyhow!("unknown state {name}"))
}

fn blocks_line(blocks: &[Vec<String>]) -> String {
    blocks.iter().map(|b| format!("{{{}}}", b.join(", "))).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<ExitCode> {
    let limit = scheduler_limit()?;
    match cli.command {
        Command::Decide { semantics, chi_zero, no_preprocess, json, states, files } => {
            let opts = DecideOptions {
                semantics: match semantics {
                    SemanticsArg::Weak => Semantics::Weak,
                    SemanticsArg::Naive => Semantics::Naive,
                },
                chi_mode: chi_zero.chi_mode(),
                preprocess: !no_preprocess,
                scheduler_limit: limit,
            };
            let report = match (files.as_slice(), states) {
                ([f], Some(st)) => {
                    let m = load(f)?;
                    decide_states(&m, state_of(&m, &st[0])?, state_of(&m, &st[1])?, &opts)?
                }
                ([a, b], None) => decide(&load(a)?, &load(b)?, &opts)?,
                ([_], None) => bail!("decide needs two files, or one file with --states"),
                _ => bail!("--states takes a single file"),
            };
            debug!("decided in {:.3} ms", report.elapsed_ms);
            if json {
                println!("{}", serde_json::to_string_pretty(&report_json(&report))?);
            } else {
                print!("{}", report_text(&report));
            }
            Ok(if report.verdict { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Normalize { chi_zero, json, equiv, file } => {
            let m = load(&file)?;
            let nf = normal_form(&m, chi_zero.chi_mode())?;
            let equiv = match equiv {
                Some(pair) => {
                    let names = nf.original.names();
                    let mu = parse_distribution(&pair[0], names).context("first distribution")?;
                    let gamma = parse_distribution(&pair[1], names).context("second distribution")?;
                    Some(dist_equiv_on_normal_form(&nf, &mu, &gamma)?)
                }
                None => None,
            };
            if json {
                let mut value = serde_json::to_value(normal_form_json(&nf))?;
                value["model"] = print_pa(&nf.automaton).into();
                if let Some(e) = equiv {
                    value["equivalent"] = e.into();
                }
                println!("{}", serde_json::to_string_pretty(&value)?);
            } else {
                for step in normal_form_json(&nf).eliminated {
                    println!("# eliminated {} ({}): {}", step.state, step.case, step.representation);
                }
                print!("{}", print_pa(&nf.automaton));
                if let Some(e) = equiv {
                    println!("{}", if e { "EQUIVALENT" } else { "NOT EQUIVALENT" });
                }
            }
            Ok(match equiv {
                Some(false) => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            })
        }
        Command::ToPa { chi_zero, file } => {
            print!("{}", print_pa(&load(&file)?.to_pa(chi_zero.chi_mode())));
            Ok(ExitCode::SUCCESS)
        }
        Command::Compose { left, right } => {
            let (Model::Markov(a), Model::Markov(b)) = (load(&left)?, load(&right)?) else {
                bail!("compose needs two markov_automaton files");
            };
            print!("{}", print_ma(&parallel_compose(&a, &b)));
            Ok(ExitCode::SUCCESS)
        }
        Command::Info { convex_sets, chi_zero, file } => {
            let m = load(&file)?;
            let p = m.to_pa(chi_zero.chi_mode());
            println!("states: {}", p.num_states());
            println!("initial: {}", p.name(p.initial()));
            println!("transitions: {}", p.num_transitions());
            let actions: Vec<String> = p.actions().iter().map(|a| a.to_string()).collect();
            println!("actions: {}", actions.join(" "));
            if convex_sets {
                let cfg = WeakConfig { scheduler_limit: limit };
                for s in p.states() {
                    for a in p.actions() {
                        let gens = generator_set(&p, s, &a, &cfg)?;
                        if gens.is_empty() {
                            continue;
                        }
                        println!("{} {}:", p.name(s), a);
                        for g in gens {
                            println!("  {}", g.format_with(|x| p.name(x).to_string()));
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Dot { partition, file } => {
            let m = load(&file)?;
            let part = if partition {
                let opts = DecideOptions { preprocess: false, scheduler_limit: limit, ..DecideOptions::default() };
                Some(decide_states(&m, m.initial(), m.initial(), &opts)?.partition)
            } else {
                None
            };
            print!("{}", export_dot(&m, part.as_ref()));
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { kind: OracleKind::Naive { bound, file } } => {
            let m = load(&file)?;
            let p = m.to_pa(ChiMode::WithChiZero);
            let part = coarsest_naive_partition_bruteforce(&p, bound, &WeakConfig { scheduler_limit: limit })?;
            let mut blocks: Vec<Vec<String>> = part
                .blocks()
                .iter()
                .map(|b| {
                    let mut v: Vec<String> = b.iter().map(|&s| p.name(s).to_string()).collect();
                    v.sort();
                    v
                })
                .collect();
            blocks.sort();
            println!("{}", blocks_line(&blocks));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
