use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tabref_core::agents::PromptSet;
use tabref_core::chain::read_chain_records;
use tabref_core::engine::DEFAULT_K;
use tabref_core::eval::dataset::{convert_tabfact, convert_wikitq};
use tabref_core::eval::metrics::{cost_ratio, iteration_histogram};
use tabref_core::eval::{load_items, run_eval, write_items, EvalConfig, RunReport};
use tabref_core::llm::{read_script, weighted_cost, HttpBackend, HttpConfig, LlmClient, RetryPolicy, ScriptedBackend, DEFAULT_IN_FLIGHT};
use tabref_core::tree::TemplateTree;

/// Exit code for `eval --strict` when any session aborted.
const EXIT_STRICT: u8 = 2;

#[derive(Parser)]
#[command(name = "tabref", version, about = "Critique-and-refine evaluator for table reasoning chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Scripted,
    Http,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a dataset and write a run directory.
    Eval(EvalArgs),
    /// Create or inspect template tree files.
    #[command(subcommand)]
    Tree(TreeCommand),
    /// Convert public benchmark distributions into dataset JSONL.
    #[command(subcommand)]
    Convert(ConvertCommand),
    /// Weighted cost of token totals (millions or raw counts).
    Cost {
        #[arg(long)]
        input: f64,
        #[arg(long)]
        output: f64,
        #[arg(long, requires = "baseline_output")]
        baseline_input: Option<f64>,
        #[arg(long, requires = "baseline_input")]
        baseline_output: Option<f64>,
    },
    /// Print the iteration histogram of a report as CSV.
    Histogram {
        #[arg(long)]
        report: PathBuf,
        /// Rebucket with a different iteration cap.
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Dataset JSONL.
    #[arg(long)]
    dataset: PathBuf,
    /// Template tree file. The initial two-leaf tree is used when omitted.
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: BackendKind,
    /// Script JSONL for the scripted backend.
    #[arg(long, required_if_eq("backend", "scripted"))]
    script: Option<PathBuf>,
    /// Precomputed initial chains (JSONL keyed by item id).
    #[arg(long)]
    chains: Option<PathBuf>,
    /// Directory overriding the built-in prompt files.
    #[arg(long)]
    prompts: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Report of an earlier run to compute deltas and the cost ratio against.
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long, default_value = "run")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exit nonzero when any session aborted.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "https://api.openai.com/v1")]
    base_url: String,
    #[arg(long, default_value = "gpt-4o-mini")]
    model: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "TABREF_API_KEY")]
    api_key_env: String,
}

#[derive(Subcommand)]
enum TreeCommand {
    /// Write the initial two-leaf tree.
    Init {
        path: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Print the hierarchy with per-leaf template counts.
    Inspect {
        path: PathBuf,
        /// Print the route dictionary instead.
        #[arg(long)]
        routes: bool,
    },
}

#[derive(Subcommand)]
enum ConvertCommand {
    /// WikiTableQuestions TSV plus its csv/ directory.
    Wikitq {
        #[arg(long)]
        tsv: PathBuf,
        /// Directory the `context` paths are relative to.
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// TabFact statement JSON plus '#'-delimited table files.
    Tabfact {
        #[arg(long)]
        statements: PathBuf,
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn build_client(args: &EvalArgs) -> Result<LlmClient> {
    Ok(match args.backend {
        BackendKind::Scripted => {
            let path = args.script.as_ref().context("--script is required for the scripted backend")?;
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let entries = read_script(BufReader::new(file))?;
            LlmClient::with_options(ScriptedBackend::new(entries), RetryPolicy::no_delay(), 1)
        }
        BackendKind::Http => {
            let config = HttpConfig::new(&args.base_url, &args.model).api_key_from_env(&args.api_key_env);
            if config.api_key.is_none() {
                eprintln!("warning: {} is not set; sending requests without a key", args.api_key_env);
            }
            LlmClient::with_options(HttpBackend::new(config), RetryPolicy::default(), DEFAULT_IN_FLIGHT.max(args.workers))
        }
    })
}

fn eval(args: EvalArgs) -> Result<ExitCode> {
    if matches!(args.backend, BackendKind::Scripted) && args.workers > 1 {
        bail!("the scripted backend replays in order; use --workers 1");
    }
    let items = load_items(&args.dataset).with_context(|| format!("loading {}", args.dataset.display()))?;
    let tree = match &args.tree {
        Some(p) => TemplateTree::load(p).with_context(|| format!("loading tree {}", p.display()))?,
        None => TemplateTree::initial(),
    };
    let prompts = match &args.prompts {
        Some(dir) => PromptSet::load_dir(dir)?,
        None => PromptSet::default(),
    };
    let chains = match &args.chains {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let records = read_chain_records(BufReader::new(f))?;
            Some(records.into_iter().map(|r| (r.id.clone(), r)).collect::<BTreeMap<_, _>>())
        }
        None => None,
    };
    let baseline = match &args.baseline {
        Some(p) => Some(RunReport::load(p).with_context(|| format!("loading baseline {}", p.display()))?),
        None => None,
    };
    let client = build_client(&args)?;
    let config = EvalConfig {
        k: args.k,
        seed: args.seed,
        workers: args.workers.max(1),
    };
    let run = run_eval(&client, &prompts, &items, chains.as_ref(), tree, config, baseline.as_ref())?;
    run.write_to(&args.out).with_context(|| format!("writing {}", args.out.display()))?;

    let r = &run.report;
    println!("items        {}", r.item_count);
    println!("accuracy     {:.1}% (initial {:.1}%)", r.accuracy_pct, r.initial_accuracy_pct);
    let d = &r.deltas_vs_initial;
    println!("delta        {:+.1} = {:+.1} corrected {:+.1} degraded", d.net_pct, d.correction_pct, d.degradation_pct);
    if let Some(d) = &r.deltas_vs_baseline {
        println!("vs baseline  {:+.1} = {:+.1} corrected {:+.1} degraded", d.net_pct, d.correction_pct, d.degradation_pct);
    }
    println!(
        "outcomes     {} correct, {} max-iterations, {} aborted, {} unanswered",
        r.outcomes.converged_correct, r.outcomes.max_iterations_reached, r.outcomes.aborted, r.outcomes.unanswered
    );
    print!("cost         {:.1} weighted tokens", r.cost.weighted_total);
    match r.cost.ratio {
        Some(ratio) => println!(" ({ratio:.2}x baseline)"),
        None => println!(),
    }
    println!("tree         version {}, {} leaves, {} templates", r.tree.version, r.tree.leaves, r.tree.templates);
    println!("written to   {}", args.out.display());

    if args.strict && r.outcomes.aborted > 0 {
        eprintln!("strict: {} session(s) aborted", r.outcomes.aborted);
        return Ok(ExitCode::from(EXIT_STRICT));
    }
    Ok(ExitCode::SUCCESS)
}

fn tree(cmd: TreeCommand) -> Result<()> {
    match cmd {
        TreeCommand::Init { path, force } => {
            if path.exists() && !force {
                bail!("{} exists; pass --force to overwrite", path.display());
            }
            TemplateTree::initial().save(&path)?;
            println!("wrote {}", path.display());
        }
        TreeCommand::Inspect { path, routes } => {
            let t = TemplateTree::load(&path)?;
            if routes {
                println!("{}", t.to_route_dictionary());
            } else {
                print!("{}", t.inspect());
            }
        }
    }
    Ok(())
}

fn write_dataset(out: &Path, items: &[tabref_core::eval::BenchmarkItem]) -> Result<()> {
    let f = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_items(std::io::BufWriter::new(f), items)?;
    println!("wrote {} items to {}", items.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval(args) => return eval(args),
        Command::Tree(cmd) => tree(cmd)?,
        Command::Convert(ConvertCommand::Wikitq { tsv, root, out }) => write_dataset(&out, &convert_wikitq(&tsv, &root)?)?,
        Command::Convert(ConvertCommand::Tabfact { statements, tables, out }) => {
            write_dataset(&out, &convert_tabfact(&statements, &tables)?)?
        }
        Command::Cost {
            input,
            output,
            baseline_input,
            baseline_output,
        } => {
            let w = weighted_cost(input, output);
            println!("weighted {w:.3}");
            if let (Some(bi), Some(bo)) = (baseline_input, baseline_output) {
                let b = weighted_cost(bi, bo);
                println!("baseline {b:.3}");
                match cost_ratio(w, b) {
                    Some(r) => println!("ratio    {r:.3}"),
                    None => bail!("baseline weighted cost is zero"),
                }
            }
        }
        Command::Histogram { report, k } => {
            let r = RunReport::load(&report).with_context(|| format!("loading {}", report.display()))?;
            let mut r = r;
            if let Some(k) = k {
                let traces: Vec<Vec<bool>> = r.items.iter().map(|i| i.trace.clone()).collect();
                r.histogram = iteration_histogram(&traces, k);
            }
            print!("{}", r.histogram_csv());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
