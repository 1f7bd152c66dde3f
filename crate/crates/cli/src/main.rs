//! The `hyperdeck` binary: enumeration, deck verification, rule evaluation,
//! and graph6 import.
//!
//! Exit codes: 0 on success (and no collisions), 1 when a sweep finds
//! collisions or a check fails, 2 on usage or validation errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hyperdeck_core::canon::{
    cache_export, cache_import, enumerate_hypergraphs, EnumerationClass, EnumerationOptions,
    PortableEntry,
};
use hyperdeck_core::exec::{validate_jobs, ExecMode};
use hyperdeck_core::feynman::{
    check_monoidality, coherence_sums, degree_tables, evaluate, structured_decomposition,
    DecompositionSystem, FeynmanRule,
};
use hyperdeck_core::reconstruction::{verify_class, ClassSpec, ContextKind};
use hyperdeck_core::structures::{StructureSpec, StructuredHypergraph};
use hyperdeck_core::symcontext::{truncate, Parameter, HBAR};

use hyperdeck_cli::document::{read_document, write_document, HypergraphDocument};
use hyperdeck_cli::{graph6, report};

#[derive(Parser)]
#[command(name = "hyperdeck", version, about = "Hypergraph decks, canonical forms, and diagram rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate isomorphism classes and write one document per class.
    Enumerate {
        /// Vertex count.
        #[arg(long)]
        n: usize,
        /// Largest edge arity admitted.
        #[arg(long, default_value_t = 2, conflicts_with = "simple")]
        max_arity: usize,
        /// Largest number of parallel copies of one incidence set.
        #[arg(long, default_value_t = 1, conflicts_with = "simple")]
        max_multiplicity: usize,
        /// Simple graphs: arity 2, no parallel edges.
        #[arg(long)]
        simple: bool,
        /// Directory for the per-class documents.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker count; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Sweep a class for deck collisions and emit a report.
    Verify {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Vertex count.
        #[arg(long)]
        n: usize,
        /// `simple`, or `structured:m=<modulus>` for a vertex slot mod m.
        #[arg(long, default_value = "simple")]
        class: String,
        /// Worker count; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate or check diagram rules on documents.
    #[command(subcommand)]
    Feynman(FeynmanAction),
    /// Convert graph6 lines into documents.
    ImportGraph6 {
        /// File with one graph6 line per graph.
        #[arg(long = "in")]
        input: PathBuf,
        /// Directory for the converted documents.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    /// Deck as a multiset of unlabeled cards.
    Rc,
    /// Weak deck: one code for the disjoint union of the cards.
    Drc,
    /// Labeled cards in deletion order.
    Labeled,
}

impl KindArg {
    fn context(self) -> ContextKind {
        match self {
            KindArg::Rc => ContextKind::Rc,
            KindArg::Drc => ContextKind::Drc,
            KindArg::Labeled => ContextKind::LabeledRc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    /// Counting degrees, data-injective symbols, full grading.
    Classic,
    /// Standard degrees: unit externals, arity-degree internals.
    Physics,
    /// Symbols and grades collapsed to type and arity.
    Forgetful,
}

impl RuleArg {
    fn rule(self) -> FeynmanRule {
        match self {
            RuleArg::Classic => FeynmanRule::classic(),
            RuleArg::Physics => FeynmanRule::physics(),
            RuleArg::Forgetful => FeynmanRule::forgetful(),
        }
    }
}

#[derive(Args)]
struct RuleOpts {
    /// Input document; `monoidality` takes the flag twice.
    #[arg(long = "in", required = true, num_args = 1, action = clap::ArgAction::Append)]
    input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "classic")]
    rules: RuleArg,
}

#[derive(Subcommand)]
enum FeynmanAction {
    /// Print the evaluated tensor word.
    Eval {
        #[command(flatten)]
        opts: RuleOpts,
        /// Grade cutoffs `t=..,o=..,hbar=..`; factors over any cutoff drop
        /// the whole word.
        #[arg(long)]
        truncate: Option<String>,
    },
    /// Print both sides of the degree-sum identity.
    Coherence {
        #[command(flatten)]
        opts: RuleOpts,
    },
    /// Check the union-versus-tensor comparison and print the witness.
    Monoidality {
        #[command(flatten)]
        opts: RuleOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cache_dir = std::env::var_os("HYPERDECK_CACHE_DIR").map(PathBuf::from);
    if let Some(dir) = &cache_dir {
        if let Err(err) = load_cache(dir) {
            eprintln!("warning: ignoring canonical-form cache: {err:#}");
        }
    }
    let outcome = run(cli.command);
    if let Some(dir) = &cache_dir {
        if let Err(err) = store_cache(dir) {
            eprintln!("warning: could not persist canonical-form cache: {err:#}");
        }
    }
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn cache_file(dir: &Path) -> PathBuf {
    dir.join("canon-cache.json")
}

fn load_cache(dir: &Path) -> Result<()> {
    let path = cache_file(dir);
    if !path.exists() {
        return Ok(());
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let entries: Vec<PortableEntry> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    cache_import(entries);
    Ok(())
}

fn store_cache(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut entries = cache_export();
    entries.sort();
    let path = cache_file(dir);
    let text = serde_json::to_string(&entries).expect("cache entries serialize");
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Enumerate {
            n,
            max_arity,
            max_multiplicity,
            simple,
            out,
            jobs,
        } => cmd_enumerate(n, max_arity, max_multiplicity, simple, out, jobs),
        Command::Verify {
            kind,
            n,
            class,
            jobs,
            out,
        } => cmd_verify(kind, n, &class, jobs, out),
        Command::Feynman(action) => cmd_feynman(action),
        Command::ImportGraph6 { input, out } => cmd_import_graph6(&input, out),
    }
}

fn exec_mode(jobs: Option<usize>) -> Result<ExecMode> {
    validate_jobs(jobs)?;
    Ok(ExecMode::with_jobs(jobs))
}

fn cmd_enumerate(
    n: usize,
    max_arity: usize,
    max_multiplicity: usize,
    simple: bool,
    out: Option<PathBuf>,
    jobs: Option<usize>,
) -> Result<ExitCode> {
    let class = if simple {
        EnumerationClass::simple(n)
    } else {
        EnumerationClass {
            vertex_count: n,
            max_arity,
            max_multiplicity,
        }
    };
    let mode = exec_mode(jobs)?;
    let graphs = enumerate_hypergraphs(class, EnumerationOptions::default(), mode)?;
    println!(
        "enumerated {} classes on {n} vertices (max arity {}, max multiplicity {})",
        graphs.len(),
        class.max_arity,
        class.max_multiplicity
    );
    if let Some(dir) = out {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let width = graphs.len().to_string().len();
        for (i, graph) in graphs.iter().enumerate() {
            let doc = HypergraphDocument::from_hypergraph(graph);
            write_document(&dir.join(format!("class_{i:0width$}.json")), &doc)?;
        }
        println!("wrote {} documents to {}", graphs.len(), dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_class(text: &str) -> Result<ClassSpec> {
    if text == "simple" {
        return Ok(ClassSpec::simple());
    }
    if let Some(rest) = text.strip_prefix("structured:m=") {
        let modulus: u64 = rest
            .parse()
            .with_context(|| format!("bad modulus {rest:?} in --class"))?;
        let spec = StructureSpec::new().with_slot(1, 1, modulus)?;
        return Ok(ClassSpec::simple_structured(spec));
    }
    bail!("unknown class {text:?}; expected `simple` or `structured:m=<modulus>`");
}

fn cmd_verify(
    kind: KindArg,
    n: usize,
    class_text: &str,
    jobs: Option<usize>,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let class = parse_class(class_text)?;
    let mode = exec_mode(jobs)?;
    let raw = verify_class(
        kind.context(),
        &class,
        n,
        EnumerationOptions::default(),
        mode,
    )?;
    let parameters = json!({
        "kind": report::kind_name(raw.kind),
        "n": n,
        "class": class_text,
        "jobs": jobs,
    });
    let rep = report::from_collision_report("verify", parameters, &raw);
    let text = report::to_json_string(&rep);
    match out {
        Some(path) => {
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "{} classes, {} collision group(s), report at {}",
                rep.class_size,
                rep.collision_groups.len(),
                path.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(if rep.collision_groups.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Document's own decomposition when present, otherwise the structural one.
fn decomposition_for(
    doc: &HypergraphDocument,
    s: &StructuredHypergraph,
) -> Result<DecompositionSystem> {
    match doc.to_decomposition(s.base())? {
        Some(system) => Ok(system),
        None => Ok(structured_decomposition(s)?),
    }
}

fn parse_cutoffs(text: &str) -> Result<BTreeMap<Parameter, u64>> {
    let mut cutoffs = BTreeMap::new();
    for piece in text.split(',') {
        let Some((name, bound)) = piece.split_once('=') else {
            bail!("bad cutoff {piece:?}; expected name=value");
        };
        let parameter = match name.trim() {
            "t" => Parameter::T,
            "o" => Parameter::O,
            "hbar" => HBAR,
            other => bail!("unknown grading parameter {other:?}; expected t, o, or hbar"),
        };
        let bound: u64 = bound
            .trim()
            .parse()
            .with_context(|| format!("bad cutoff value in {piece:?}"))?;
        cutoffs.insert(parameter, bound);
    }
    Ok(cutoffs)
}

fn single_input(opts: &RuleOpts) -> Result<&Path> {
    match opts.input.as_slice() {
        [one] => Ok(one),
        _ => bail!("this action takes exactly one --in"),
    }
}

fn cmd_feynman(action: FeynmanAction) -> Result<ExitCode> {
    match action {
        FeynmanAction::Eval { opts, truncate: cut } => {
            let doc = read_document(single_input(&opts)?)?;
            let s = doc.evaluated_structure()?;
            let system = decomposition_for(&doc, &s)?;
            let labeling = doc
                .labeling
                .as_ref()
                .map(|labels| hyperdeck_core::structures::Labeling::new(labels.clone()))
                .transpose()?;
            let word = evaluate(&s, labeling.as_ref(), &system, &opts.rules.rule())?;
            match cut {
                Some(text) => match truncate(&word, &parse_cutoffs(&text)?) {
                    Some(kept) => println!("{kept}"),
                    None => println!("empty (truncated)"),
                },
                None => println!("{word}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        FeynmanAction::Coherence { opts } => {
            let doc = read_document(single_input(&opts)?)?;
            let s = doc.evaluated_structure()?;
            let system = decomposition_for(&doc, &s)?;
            let tables = degree_tables(s.base(), &system, &opts.rules.rule().degrees)?;
            let (edge_side, vertex_side) = coherence_sums(&tables);
            let verdict = if edge_side == vertex_side {
                "coherent"
            } else {
                "incoherent"
            };
            println!("edge side {edge_side}, vertex side {vertex_side}: {verdict}");
            Ok(if edge_side == vertex_side {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        FeynmanAction::Monoidality { opts } => {
            let (left, right) = match opts.input.as_slice() {
                [one] => (one.clone(), one.clone()),
                [a, b] => (a.clone(), b.clone()),
                _ => bail!("monoidality takes --in once or twice"),
            };
            let rule = opts.rules.rule();
            let doc_a = read_document(&left)?;
            let doc_b = read_document(&right)?;
            // A shared genus cap keeps both sides on one slot layout.
            let cap = doc_a
                .genus_cap_hint()
                .into_iter()
                .chain(doc_b.genus_cap_hint())
                .max()
                .unwrap_or(1);
            let a = doc_a.evaluated_structure_with_cap(cap)?;
            let b = doc_b.evaluated_structure_with_cap(cap)?;
            let da = decomposition_for(&doc_a, &a)?;
            let db = decomposition_for(&doc_b, &b)?;
            let la = doc_a.to_labeled_view(a)?;
            let lb = doc_b.to_labeled_view(b)?;
            match check_monoidality(&la, &da, &lb, &db, &rule)? {
                Some(witness) => {
                    println!("monoidal: witness {witness:?}");
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("no symmetry witness");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn cmd_import_graph6(input: &Path, out: Option<PathBuf>) -> Result<ExitCode> {
    let text =
        fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let mut graphs = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let graph = graph6::decode(line)
            .with_context(|| format!("{}:{}", input.display(), index + 1))?;
        graphs.push(graph);
    }
    println!("imported {} graphs from {}", graphs.len(), input.display());
    if let Some(dir) = out {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let width = graphs.len().to_string().len();
        for (i, graph) in graphs.iter().enumerate() {
            let doc = HypergraphDocument::from_hypergraph(graph);
            write_document(&dir.join(format!("import_{i:0width$}.json")), &doc)?;
        }
        println!("wrote {} documents to {}", graphs.len(), dir.display());
    }
    Ok(ExitCode::SUCCESS)
}
