mod args;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use dycos::evaluation::bound_table;
use dycos::io::{assignments_tsv, parse_events, replay_events_with, write_events};
use dycos::walk::HopStats;
use dycos::{
    build_vocabulary, classify_all, cross_validate, generate_synthetic, load_dataset_files, make_folds_seeded,
    reclassify_expired, Assignment, ClassifyOptions, Dataset, Error, EvaluationConfig, Source, Vocabulary,
    VocabularyConfig, WalkConfig,
};
use serde::Serialize;

use args::{Cli, Command, InputArgs, VocabAction};

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(msg) => Failure::Usage(msg),
            e => Failure::Data(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::LoadCheck { input } => load_check(&input),
        Command::Vocab { action: VocabAction::Dump { input, vocab, out } } => {
            let cfg = vocab.config(seed);
            cfg.validate()?;
            let ds = load(&input)?;
            let v = vocabulary_or_empty(&ds, &cfg)?;
            emit(out.as_deref(), &v.to_tsv())
        }
        Command::Classify(a) => classify(&a, seed),
        Command::Evaluate(a) => evaluate(&a, seed),
        Command::Bound(a) => {
            if a.labels == 0 {
                return Err(Failure::Usage("--labels must be at least 1".into()));
            }
            if let Some(b) = a.b.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
                return Err(Failure::Usage(format!("b = {b} is outside (0, 1]")));
            }
            let mut out = String::from("b\tl\tlabels\tbound\n");
            for row in bound_table(&a.b, &a.l, a.labels) {
                out.push_str(&format!("{}\t{}\t{}\t{:.6}\n", row.b, row.l, row.label_count, row.bound));
            }
            emit(None, &out)
        }
        Command::Synth(a) => {
            let synth = generate_synthetic(&a.spec(seed))?;
            synth.write_to(&a.out)?;
            if a.events {
                let ds = synth.to_dataset(Default::default())?;
                fs::write(a.out.join("events.jsonl"), write_events(&ds.to_events()))?;
            }
            println!("wrote {} nodes, {} edges to {}", synth.truth.len(), synth.edges.len(), a.out.display());
            Ok(())
        }
        Command::Replay(a) => replay(&a, seed),
    }
}

fn require_file(p: &Path) -> Outcome {
    if p.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("input file {} does not exist", p.display())))
    }
}

fn load(input: &InputArgs) -> Result<Dataset, Failure> {
    let direction = input.direction.into();
    if let Some(events) = &input.events {
        require_file(events)?;
        let parsed = parse_events(fs::File::open(events)?)?;
        return Ok(replay_events_with(&parsed, direction, |_, _| Ok(()))?);
    }
    let files = [&input.edges, &input.labels, &input.texts];
    if files.iter().all(|f| f.is_none()) {
        return Err(Failure::Usage("give --events or at least one of --edges, --labels, --texts".into()));
    }
    for f in files.into_iter().flatten() {
        require_file(f)?;
    }
    Ok(load_dataset_files(input.edges.as_deref(), input.labels.as_deref(), input.texts.as_deref(), direction)?)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    Ok(fs::write(path, text)?)
}

fn out_dir(dir: &Option<PathBuf>) -> Result<Option<&Path>, Failure> {
    if let Some(d) = dir {
        fs::create_dir_all(d)?;
    }
    Ok(dir.as_deref())
}

/// The vocabulary of the labeled nodes, or an empty one when they carry no text.
fn vocabulary_or_empty(ds: &Dataset, cfg: &VocabularyConfig) -> Result<Vocabulary, Failure> {
    match build_vocabulary(&ds.graph, cfg) {
        Ok(v) => Ok(v),
        Err(Error::EmptyCorpus) => Ok(Vocabulary::empty()),
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct GraphSummary {
    nodes: usize,
    edges: usize,
    labeled: usize,
    labels: BTreeMap<String, usize>,
}

fn summary(ds: &Dataset) -> GraphSummary {
    let g = &ds.graph;
    let labels = g
        .label_histogram()
        .iter()
        .enumerate()
        .map(|(i, &n)| (g.label_name(dycos::Label(i as u32)).to_string(), n))
        .collect();
    GraphSummary { nodes: g.node_count(), edges: g.edge_count(), labeled: g.labeled_count(), labels }
}

fn load_check(input: &InputArgs) -> Outcome {
    let ds = load(input)?;
    println!("{}", serde_json::to_string_pretty(&summary(&ds)).expect("summary serializes"));
    Ok(())
}

#[derive(Serialize)]
struct ClassifyReport {
    schema: u32,
    seed: u64,
    walk: WalkConfig,
    vocabulary: VocabularyConfig,
    mode: &'static str,
    ttl: Option<u64>,
    before: GraphSummary,
    after: GraphSummary,
    vocabulary_words: Vec<String>,
    classified: usize,
    fallbacks: usize,
    hops: HopStats,
}

fn mode_name(opts: &ClassifyOptions) -> &'static str {
    match opts.mode {
        dycos::ApplyMode::Batch => "batch",
        dycos::ApplyMode::Immediate => "immediate",
    }
}

fn fallbacks(assignments: &[Assignment]) -> usize {
    assignments.iter().filter(|a| a.source == Source::GlobalFallback).count()
}

fn classify(a: &args::ClassifyArgs, seed: u64) -> Outcome {
    let walk = a.walk.config();
    walk.validate()?;
    let vocab_cfg = a.vocab.config(seed);
    vocab_cfg.validate()?;
    let mut ds = load(&a.input)?;
    let opts = a.mode.options(seed);
    let before = summary(&ds);
    let vocab = vocabulary_or_empty(&ds, &vocab_cfg)?;
    let words = vocab.entries().iter().map(|e| e.word.clone()).collect();
    ds.graph.install_vocabulary(vocab);
    let out = classify_all(&mut ds.graph, &walk, &opts)?;
    let tsv = assignments_tsv(&ds, &out.assignments);
    let Some(dir) = out_dir(&a.out)? else {
        return emit(None, &tsv);
    };
    fs::write(dir.join("assignments.tsv"), tsv)?;
    let report = ClassifyReport {
        schema: 1,
        seed,
        walk,
        vocabulary: vocab_cfg,
        mode: mode_name(&opts),
        ttl: opts.ttl,
        before,
        after: summary(&ds),
        vocabulary_words: words,
        classified: out.assignments.len(),
        fallbacks: fallbacks(&out.assignments),
        hops: out.stats,
    };
    write_json(&dir.join("report.json"), &report)?;
    println!("classified {} nodes ({} by fallback) into {}", report.classified, report.fallbacks, dir.display());
    Ok(())
}

fn evaluate(a: &args::EvaluateArgs, seed: u64) -> Outcome {
    if a.folds == 0 {
        return Err(Failure::Usage("--folds must be at least 1".into()));
    }
    let config = EvaluationConfig {
        vocabulary: a.vocab.config(seed),
        walk: a.walk.config(),
        seed,
        bound_b: a.bound_b.clone(),
        bound_l: a.bound_l.clone(),
    };
    config.walk.validate()?;
    config.vocabulary.validate()?;
    let ds = load(&a.input)?;
    let plan = make_folds_seeded(&ds.graph, a.folds, seed)?;
    let report = cross_validate(&ds.graph, &config, &plan)?;
    let Some(dir) = out_dir(&a.out)? else {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        return Ok(());
    };
    write_json(&dir.join("report.json"), &report)?;
    fs::write(dir.join("folds.csv"), report.to_csv())?;
    println!(
        "mean accuracy {:.4} (stddev {:.4}) over {} folds; report in {}",
        report.mean_accuracy,
        report.stddev,
        report.folds.len(),
        dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct CheckpointReport {
    t: u64,
    graph: GraphSummary,
    vocabulary_size: usize,
    reclassified: usize,
    classified: usize,
    fallbacks: usize,
    hops: HopStats,
    skipped: Option<String>,
}

#[derive(Serialize)]
struct ReplayReport {
    schema: u32,
    seed: u64,
    events: usize,
    walk: WalkConfig,
    vocabulary: VocabularyConfig,
    mode: &'static str,
    ttl: Option<u64>,
    checkpoints: Vec<CheckpointReport>,
    unreached_checkpoints: Vec<u64>,
    last_t: Option<u64>,
    last: GraphSummary,
}

fn checkpoint_seed(seed: u64, t: u64) -> u64 {
    seed ^ t.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Rebuilds the vocabulary, renews expired labels and classifies every
/// unlabeled node as of time `t`.
fn run_checkpoint(
    ds: &mut Dataset,
    t: u64,
    walk: &WalkConfig,
    vocab_cfg: &VocabularyConfig,
    opts: &ClassifyOptions,
    dir: Option<&Path>,
) -> Result<CheckpointReport, Error> {
    ds.graph.set_time(t);
    let mut report = CheckpointReport {
        t,
        graph: summary(ds),
        vocabulary_size: 0,
        reclassified: 0,
        classified: 0,
        fallbacks: 0,
        hops: HopStats::default(),
        skipped: None,
    };
    if ds.graph.labeled_count() == 0 {
        report.skipped = Some("no labeled nodes".into());
        return Ok(report);
    }
    let vocab = match build_vocabulary(&ds.graph, vocab_cfg) {
        Ok(v) => v,
        Err(Error::EmptyCorpus) => Vocabulary::empty(),
        Err(e) => return Err(e),
    };
    report.vocabulary_size = vocab.len();
    ds.graph.install_vocabulary(vocab);
    let opts = ClassifyOptions { seed: checkpoint_seed(opts.seed, t), ..*opts };
    let mut assignments = Vec::new();
    if opts.ttl.is_some() {
        let renewed = reclassify_expired(&mut ds.graph, walk, &opts, t)?;
        report.reclassified = renewed.assignments.len();
        report.hops.merge(&renewed.stats);
        assignments.extend(renewed.assignments);
    }
    let fresh = classify_all(&mut ds.graph, walk, &opts)?;
    report.classified = fresh.assignments.len();
    report.hops.merge(&fresh.stats);
    assignments.extend(fresh.assignments);
    report.fallbacks = fallbacks(&assignments);
    if let Some(dir) = dir {
        fs::write(dir.join(format!("assignments_t{t}.tsv")), assignments_tsv(ds, &assignments))?;
    }
    Ok(report)
}

fn replay(a: &args::ReplayArgs, seed: u64) -> Outcome {
    require_file(&a.events)?;
    let walk = a.walk.config();
    walk.validate()?;
    let vocab_cfg = a.vocab.config(seed);
    vocab_cfg.validate()?;
    let opts = a.mode.options(seed);
    let dir = out_dir(&a.out)?;
    let events = parse_events(fs::File::open(&a.events)?)?;

    // each checkpoint fires at the last event time not after it
    let times: BTreeSet<u64> = events.iter().map(|(_, e)| e.t).collect();
    let mut due: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut unreached = Vec::new();
    for &c in a.checkpoint.iter().collect::<BTreeSet<_>>() {
        match times.range(..=c).next_back() {
            Some(&t) => due.entry(t).or_default().push(c),
            None => unreached.push(c),
        }
    }

    let mut reports = Vec::new();
    let ds = replay_events_with(&events, a.direction.into(), |ds, t| {
        for &c in due.get(&t).map(Vec::as_slice).unwrap_or_default() {
            reports.push(run_checkpoint(ds, c, &walk, &vocab_cfg, &opts, dir)?);
        }
        Ok(())
    })?;

    if let Some(path) = &a.emit_events {
        fs::write(path, write_events(&ds.to_events()))?;
    }
    let report = ReplayReport {
        schema: 1,
        seed,
        events: events.len(),
        walk,
        vocabulary: vocab_cfg,
        mode: mode_name(&opts),
        ttl: opts.ttl,
        checkpoints: reports,
        unreached_checkpoints: unreached,
        last_t: times.last().copied(),
        last: summary(&ds),
    };
    match dir {
        Some(dir) => {
            write_json(&dir.join("report.json"), &report)?;
            println!(
                "replayed {} events, {} checkpoint(s); report in {}",
                report.events,
                report.checkpoints.len(),
                dir.display()
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    Ok(())
}
