mod http;

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use chemreward::config::{Engine, EngineConfig};
use chemreward::curation::{
    read_trajectories, rejection_filter, select_one_per_instance, write_sft, ExportHeader, TeacherTrajectory,
};
use chemreward::dataset::{ingest_dataset, ColumnNames};
use chemreward::descriptors::{descriptor_report_with, lipinski_report};
use chemreward::evalmetrics::{load_fixture_dir, read_predictions, roc_auc, audit_tables, builtin_fixtures};
use chemreward::grpo::{advantages, dynamic_filter};
use chemreward::molgraph::{parse_smiles, write_smiles, MoleculeGraph};
use chemreward::patterns::extract_features;
use chemreward::promptkit::{build_prompt, depict_svg, PromptSpec};
use chemreward::retrieval::{build_store, ExampleStore};
use chemreward::service::{evaluate_request, serve_stream, ServiceRequest, WireExample};
use chemreward::{RolloutGroup, PROTOCOL_VERSION};

#[derive(Parser)]
#[command(name = "chemreward", version, about = "Rule-based rewards and molecular tooling for property-prediction RL")]
struct Cli {
    /// Engine config file (falls back to $CHEMREWARD_CONFIG, then built-in defaults)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a SMILES string and print the graph summary
    Parse { smiles: String },
    /// Descriptor report and Lipinski flags
    Describe { smiles: String },
    /// Structural features with match counts
    Features { smiles: String },
    /// Build or query a few-shot example store
    #[command(subcommand)]
    Store(StoreCmd),
    /// Assemble property-prediction prompts
    #[command(subcommand)]
    Prompt(PromptCmd),
    /// Render a 2-D depiction as SVG
    Depict {
        smiles: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Score one response
    #[command(subcommand)]
    Reward(RewardCmd),
    /// Group-relative advantages
    #[command(subcommand)]
    Grpo(GrpoCmd),
    /// Filter, select and export teacher trajectories
    #[command(subcommand)]
    Curate(CurateCmd),
    /// ROC-AUC of a predictions CSV (id, score|answer, label)
    Auc {
        #[arg(long)]
        input: PathBuf,
        /// Score for a missing answer; defaults to the config value
        #[arg(long)]
        absent: Option<f64>,
    },
    /// Recompute published table averages and report disagreements
    Audit {
        /// Fixture directory; the shipped fixtures when omitted
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Print matching entries too
        #[arg(long)]
        all: bool,
        /// Exit nonzero when any mismatch is found
        #[arg(long)]
        strict: bool,
    },
    /// Line-oriented reward service on stdin/stdout, or over HTTP
    Serve {
        #[arg(long)]
        http: bool,
        /// Overrides the configured bind address
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Inspect the effective engine config
    #[command(subcommand)]
    Config(ConfigCmd),
}

#[derive(Subcommand)]
enum StoreCmd {
    /// Fingerprint labelled CSV files into a store
    Build {
        /// TASK=PATH, repeatable
        #[arg(long = "dataset", required = true, value_parser = parse_task_path)]
        datasets: Vec<(String, String)>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "smiles")]
        smiles_column: String,
        #[arg(long, default_value = "label")]
        label_column: String,
    },
    /// Nearest labelled neighbours of a molecule
    Query {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        task: String,
        #[arg(long)]
        smiles: String,
        #[arg(short)]
        k: Option<usize>,
    },
}

#[derive(Subcommand)]
enum PromptCmd {
    /// Assemble a few-shot prompt
    Build {
        #[arg(long)]
        task: String,
        #[arg(long)]
        smiles: String,
        /// SMILES=LABEL, repeatable; retrieved from the store when omitted
        #[arg(long = "fewshot", value_parser = parse_pair)]
        fewshot: Vec<(String, String)>,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(short)]
        k: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Write an SVG depiction beside the prompt and reference it
        #[arg(long, requires = "output")]
        svg: bool,
    },
}

#[derive(Subcommand)]
enum RewardCmd {
    /// Score one response; prints the same line the service would
    Eval(EvalArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    molecule: String,
    #[arg(long)]
    label: String,
    #[arg(long)]
    response_file: PathBuf,
    #[arg(long)]
    task: Option<String>,
    /// SMILES=LABEL, repeatable
    #[arg(long = "fewshot", value_parser = parse_pair)]
    fewshot: Vec<(String, String)>,
    /// Request id to echo; parsed as JSON when possible
    #[arg(long)]
    id: Option<String>,
}

#[derive(Subcommand)]
enum GrpoCmd {
    /// Group-relative advantages for JSON Lines groups {prompt_id, rewards}
    Advantages {
        /// Defaults to stdin
        #[arg(long)]
        input: Option<PathBuf>,
        /// Drop zero-variance groups first
        #[arg(long)]
        filter: bool,
    },
}

#[derive(Subcommand)]
enum CurateCmd {
    /// Keep well-formed, correct trajectories
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// One accepted trajectory per prompt, seeded
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Filter, select and write an SFT file with its header
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum ConfigCmd {
    /// Print the effective configuration
    Dump,
}

struct CliError {
    code: &'static str,
    message: String,
}

fn err<E: Display>(code: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError {
        code,
        message: e.to_string(),
    }
}

type CliResult = Result<ExitCode, CliError>;

fn parse_task_path(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| format!("expected TASK=PATH, got '{s}'"))
}

/// SMILES may itself contain '=', so split at the last one.
fn parse_pair(s: &str) -> Result<(String, String), String> {
    s.rsplit_once('=')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| format!("expected SMILES=LABEL, got '{s}'"))
}

fn molecule(smiles: &str) -> Result<MoleculeGraph, CliError> {
    parse_smiles(smiles).map_err(|e| CliError {
        code: e.code(),
        message: e.to_string(),
    })
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError {
            code: "io",
            message: format!("{}: {e}", path.display()),
        })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError {
            code: "io",
            message: format!("{}: {e}", path.display()),
        })
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_json(v: &Value) {
    println!("{v}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let v = json!({"protocol_version": PROTOCOL_VERSION, "error": {"code": e.code, "message": e.message}});
            eprintln!("{v}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let config = EngineConfig::load(cli.config.as_deref()).map_err(err("config"))?;
    let engine = || Engine::load(config.clone()).map_err(err("config"));
    match cli.command {
        Command::Parse { smiles } => {
            let g = molecule(&smiles)?;
            print_json(&json!({
                "smiles": write_smiles(&g),
                "atoms": g.atom_count(),
                "bonds": g.bond_count(),
                "rings": g.rings(),
                "fragments": g.fragment_count(),
            }));
        }
        Command::Describe { smiles } => {
            let engine = engine()?;
            let g = molecule(&smiles)?;
            let report = descriptor_report_with(&g, engine.reward.table());
            print_json(&json!({"descriptors": report, "lipinski": lipinski_report(&report)}));
        }
        Command::Features { smiles } => {
            let engine = engine()?;
            let g = molecule(&smiles)?;
            print_json(&json!(extract_features(&g, engine.reward.library()).counts()));
        }
        Command::Depict { smiles, output } => {
            let svg = depict_svg(&molecule(&smiles)?);
            let mut w = sink(output.as_deref())?;
            w.write_all(svg.as_bytes()).map_err(err("io"))?;
            w.flush().map_err(err("io"))?;
        }
        Command::Store(cmd) => store(cmd, &config)?,
        Command::Prompt(PromptCmd::Build {
            task,
            smiles,
            fewshot,
            store,
            k,
            output,
            svg,
        }) => {
            let engine = engine()?;
            let k = k.unwrap_or(config.top_k);
            let g = molecule(&smiles)?;
            let task_text = engine.catalog.get(&task).map_err(err("unknown_task"))?;
            let examples = if !fewshot.is_empty() {
                labelled_pairs(&fewshot)?
            } else {
                let loaded;
                let st = match (&store, &engine.store) {
                    (Some(p), _) => {
                        loaded = ExampleStore::load(p).map_err(err("store"))?;
                        Some(&loaded)
                    }
                    (None, s) => s.as_ref(),
                };
                match st {
                    Some(st) => st
                        .top_k(&g, k, &task)
                        .map_err(err("retrieval"))?
                        .into_iter()
                        .map(|n| (n.record.smiles.clone(), n.record.label))
                        .collect(),
                    None => Vec::new(),
                }
            };
            let mut spec = PromptSpec::standard(task_text, examples, &smiles);
            if svg {
                let out = output.as_ref().expect("clap enforces --output");
                let svg_path = out.with_extension("svg");
                std::fs::write(&svg_path, depict_svg(&g)).map_err(err("io"))?;
                spec.image_path = Some(svg_path.display().to_string());
            }
            spec.validate(k).map_err(err("prompt"))?;
            let mut w = sink(output.as_deref())?;
            w.write_all(build_prompt(&spec).as_bytes()).map_err(err("io"))?;
            w.flush().map_err(err("io"))?;
        }
        Command::Reward(RewardCmd::Eval(args)) => return reward_eval(args, &engine()?),
        Command::Grpo(GrpoCmd::Advantages { input, filter }) => return grpo(input.as_deref(), filter),
        Command::Curate(cmd) => curate(cmd, config.seed)?,
        Command::Auc { input, absent } => {
            let preds = read_predictions(open(&input)?, absent.unwrap_or(config.absent_score)).map_err(err("input"))?;
            let auc: f64 = roc_auc(&preds).map_err(err("metric"))?;
            println!("{auc:.4}");
        }
        Command::Audit { fixtures, all, strict } => {
            let tables = match fixtures {
                Some(dir) => load_fixture_dir(&dir).map_err(err("fixtures"))?,
                None => builtin_fixtures(),
            };
            let report = audit_tables(&tables);
            print!("{}", report.render_text(all));
            if strict && report.mismatches().next().is_some() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Serve { http, bind, workers } => {
            let engine = engine()?;
            let workers = workers.unwrap_or(config.workers).max(1);
            if http {
                let bind = bind.unwrap_or_else(|| config.bind.clone());
                http::serve_http(&engine, &bind, workers).map_err(err("bind"))?;
            } else {
                serve_stream(&engine, io::stdin().lock(), io::stdout(), workers).map_err(err("io"))?;
            }
        }
        Command::Config(ConfigCmd::Dump) => print!("{}", config.dump()),
    }
    Ok(ExitCode::SUCCESS)
}

fn labelled_pairs(pairs: &[(String, String)]) -> Result<Vec<(String, bool)>, CliError> {
    pairs
        .iter()
        .map(|(s, l)| {
            chemreward::dataset::parse_label(l)
                .map(|b| (s.clone(), b))
                .ok_or_else(|| CliError {
                    code: "bad_label",
                    message: format!("label '{l}' is not True/False"),
                })
        })
        .collect()
}

fn store(cmd: StoreCmd, config: &EngineConfig) -> Result<(), CliError> {
    match cmd {
        StoreCmd::Build {
            datasets,
            output,
            smiles_column,
            label_column,
        } => {
            let cols = ColumnNames {
                smiles: smiles_column,
                label: label_column,
            };
            let mut rows = Vec::new();
            let mut sources = Vec::new();
            for (task, path) in &datasets {
                let t = ingest_dataset(Path::new(path), task, &cols).map_err(err("dataset"))?;
                rows.extend(t.rows);
                sources.push(t.provenance);
            }
            let (st, report) =
                build_store(&rows, config.fingerprint_radius, config.fingerprint_width).map_err(err("store"))?;
            st.save(&output).map_err(err("store"))?;
            print_json(&json!({"stored": report.stored, "skipped": report.skipped, "sources": sources}));
        }
        StoreCmd::Query { store, task, smiles, k } => {
            let st = ExampleStore::load(&store).map_err(err("store"))?;
            let g = molecule(&smiles)?;
            for (rank, n) in st
                .top_k(&g, k.unwrap_or(config.top_k), &task)
                .map_err(err("retrieval"))?
                .iter()
                .enumerate()
            {
                print_json(&json!({
                    "rank": rank + 1,
                    "smiles": n.record.smiles,
                    "label": n.record.label,
                    "similarity": n.similarity,
                    "ordinal": n.record.ordinal,
                }));
            }
        }
    }
    Ok(())
}

fn reward_eval(args: EvalArgs, engine: &Engine) -> CliResult {
    let response = std::fs::read_to_string(&args.response_file).map_err(|e| CliError {
        code: "io",
        message: format!("{}: {e}", args.response_file.display()),
    })?;
    let id = args
        .id
        .map(|s| serde_json::from_str(&s).unwrap_or(Value::String(s)))
        .unwrap_or(Value::Null);
    let req = ServiceRequest {
        id,
        protocol_version: None,
        task: args.task,
        smiles: args.molecule,
        label: Value::String(args.label),
        response,
        fewshot: (!args.fewshot.is_empty()).then(|| {
            args.fewshot
                .into_iter()
                .map(|(smiles, label)| WireExample {
                    smiles,
                    label: Value::String(label),
                })
                .collect()
        }),
        weights: None,
    };
    match evaluate_request(engine, &req, 1) {
        Ok(r) => {
            println!("{}", serde_json::to_string(&r).expect("serialises"));
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e).expect("serialises"));
            Ok(ExitCode::FAILURE)
        }
    }
}

/// Errors are reported inline, one object per failing line, and make the
/// exit status nonzero once every line has been processed.
fn grpo(input: Option<&Path>, filter: bool) -> CliResult {
    let reader: Box<dyn BufRead> = match input {
        Some(p) => Box::new(open(p)?),
        None => Box::new(io::stdin().lock()),
    };
    let mut parsed = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(err("io"))?;
        if line.trim().is_empty() {
            continue;
        }
        parsed.push((i + 1, serde_json::from_str::<RolloutGroup>(&line)));
    }
    let mut failed = false;
    // keyed by input line so output follows input order
    let mut results: BTreeMap<usize, Value> = BTreeMap::new();
    let mut groups = Vec::new();
    for (line, g) in parsed {
        match g {
            Ok(g) => groups.push((line, g)),
            Err(e) => {
                failed = true;
                results.insert(
                    line,
                    json!({"protocol_version": PROTOCOL_VERSION, "prompt_id": null,
                        "error": {"code": "bad_request", "message": e.to_string(), "line": line}}),
                );
            }
        }
    }
    if filter {
        let lines: Vec<usize> = groups.iter().filter(|(_, g)| !g.is_zero_variance()).map(|(l, _)| *l).collect();
        let (kept, report) = dynamic_filter(groups.into_iter().map(|(_, g)| g).collect());
        eprintln!("{}", json!({"filter": report}));
        groups = lines.into_iter().zip(kept).collect();
    }
    for (line, g) in groups {
        let v = match advantages(&g) {
            Ok(a) => json!({"protocol_version": PROTOCOL_VERSION, "prompt_id": g.prompt_id, "advantages": a.values}),
            Err(e) => {
                failed = true;
                let code = match e {
                    chemreward::grpo::GrpoError::GroupTooSmall { .. } => "group_too_small",
                    chemreward::grpo::GrpoError::NonFinite(_) => "non_finite",
                };
                json!({"protocol_version": PROTOCOL_VERSION, "prompt_id": g.prompt_id,
                    "error": {"code": code, "message": e.to_string(), "line": line}})
            }
        };
        results.insert(line, v);
    }
    let mut out = io::stdout().lock();
    for v in results.values() {
        writeln!(out, "{v}").map_err(err("io"))?;
    }
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn write_lines<T: serde::Serialize>(items: &[T], path: Option<&Path>) -> Result<(), CliError> {
    let mut w = sink(path)?;
    for t in items {
        serde_json::to_writer(&mut w, t).map_err(err("io"))?;
        w.write_all(b"\n").map_err(err("io"))?;
    }
    w.flush().map_err(err("io"))
}

fn trajectories(path: &Path) -> Result<Vec<TeacherTrajectory>, CliError> {
    read_trajectories(open(path)?).map_err(err("input"))
}

fn curate(cmd: CurateCmd, default_seed: u64) -> Result<(), CliError> {
    match cmd {
        CurateCmd::Filter { input, output } => {
            let (kept, report) = rejection_filter(trajectories(&input)?);
            write_lines(&kept, output.as_deref())?;
            eprintln!("{}", json!({"report": report}));
        }
        CurateCmd::Select { input, seed, output } => {
            let seed = seed.unwrap_or(default_seed);
            let records = select_one_per_instance(&trajectories(&input)?, seed);
            write_lines(&records, output.as_deref())?;
            eprintln!("{}", json!({"seed": seed, "records": records.len()}));
        }
        CurateCmd::Export { input, seed, output } => {
            let seed = seed.unwrap_or(default_seed);
            let (kept, report) = rejection_filter(trajectories(&input)?);
            let records = select_one_per_instance(&kept, seed);
            let header = ExportHeader::new(seed, records.len(), report);
            let n = write_sft(&records, &header, create(&output)?).map_err(err("io"))?;
            print_json(&json!({"records": n, "seed": seed, "report": report}));
        }
    }
    Ok(())
}
