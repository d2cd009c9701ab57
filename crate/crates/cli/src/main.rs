//! shapeseq: encode 2D contours into symbol strings and rank shape
//! similarity by dynamic-programming alignment.
//!
//! Every subcommand is a client of a shapeseq service. By default an
//! ephemeral in-process server runs on a loopback port for the duration of
//! the command; `--server URL` targets a long-running instance started
//! with `shapeseq serve`.

mod files;
mod session;
mod svg;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use shapeseq_api as api;
use shapeseq_client::ShapeseqClient;
use shapeseq_core::RunConfig;

use files::{load_contour, load_shape, read_text, write_atomic, InputFormat};
use session::Session;

const SET_HELP: &str = "Override one config key (repeatable). Keys: align_mode, arp_angular, \
arp_center, arp_radial, arp_start_angle, dummy_cost, quant_angle_bins, quant_area_threshold, \
quant_degree_threshold, quant_dist_edge_high, quant_dist_edge_low, resample_n, sc_angular_bins, \
sc_r_inner, sc_r_outer, sc_radial_bins, score_cross_family, score_gap, score_match, \
sections_line_eps, sections_window. Run `shapeseq config` to see effective values and defaults.";

#[derive(Parser)]
#[command(
    name = "shapeseq",
    version,
    about = "Contour-to-symbol-string shape encoding and similarity retrieval"
)]
struct Cli {
    /// URL of a running shapeseq server (default: embedded in-process server)
    #[arg(long, global = true, value_name = "URL")]
    server: Option<String>,

    /// Config file of key=value lines (defaults otherwise)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long = "set", global = true, value_name = "KEY=VALUE", help = SET_HELP)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a contour or mask file into a symbol file
    Encode(EncodeArgs),
    /// Align two symbol files and report score and similarity
    Align(AlignArgs),
    /// End-to-end similarity of two contour files (pairwise alignment)
    Match(MatchArgs),
    /// Build, extend or inspect an index file
    #[command(subcommand)]
    Index(IndexCommand),
    /// Rank index records against a query contour
    Query(QueryArgs),
    /// Bulls-eye evaluation of a labeled index
    Eval(EvalArgs),
    /// Generate a labeled synthetic dataset directory
    Gen(GenArgs),
    /// Print the effective configuration and its fingerprint
    Config,
    /// Run the HTTP service in the foreground
    Serve(ServeArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// Contour JSON, mask JSON or PGM file
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Output symbol file
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
    /// Input interpretation
    #[arg(long, value_enum, default_value = "auto")]
    format: InputFormat,
    /// Also write the sector partition as JSON
    #[arg(long, value_name = "FILE")]
    dump_sectors: Option<PathBuf>,
    /// Also write per-section features as JSON rows
    #[arg(long, value_name = "FILE")]
    dump_sections: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    /// First symbol file
    #[arg(long)]
    a: PathBuf,
    /// Second symbol file
    #[arg(long)]
    b: PathBuf,
    /// Write the filled DP grid as TSV (borders included)
    #[arg(long, value_name = "FILE")]
    dump_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    /// First contour file (the reference frame)
    #[arg(long)]
    a: PathBuf,
    /// Second contour file (aligned onto the first)
    #[arg(long)]
    b: PathBuf,
    /// Write the shape-alignment trace {pairs, transform, residual} as JSON
    #[arg(long, value_name = "FILE")]
    dump_alignment: Option<PathBuf>,
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Encode a dataset directory into a fresh index file
    Build(IndexBuildArgs),
    /// Encode one shape and append it to an index file
    Add(IndexAddArgs),
    /// Print an index summary
    Info(IndexInfoArgs),
}

#[derive(Args)]
struct IndexBuildArgs {
    /// Dataset directory containing labels.tsv (id<TAB>label<TAB>path)
    #[arg(long, value_name = "DIR")]
    dir: PathBuf,
    /// Output index file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Keep input contours in the index (enables --pairwise-align and
    /// --k-sweep)
    #[arg(long)]
    store_contours: bool,
}

#[derive(Args)]
struct IndexAddArgs {
    /// Index file to extend
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
    /// Contour file to add
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Record id (unique within the index)
    #[arg(long)]
    id: String,
    /// Class label
    #[arg(long)]
    label: Option<String>,
    /// Store the contour alongside the symbols
    #[arg(long)]
    store_contour: bool,
}

#[derive(Args)]
struct IndexInfoArgs {
    /// Index file
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Index file
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
    /// Query contour file
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Number of results
    #[arg(short, default_value_t = 20)]
    k: usize,
    /// Align the query pairwise to every stored contour before encoding
    /// (needs an index built with --store-contours)
    #[arg(long)]
    pairwise_align: bool,
    /// Skip records whose length bound cannot reach the top-k (same
    /// results, fewer alignments)
    #[arg(long)]
    prefilter: bool,
    /// Also write the ranking TSV here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Index file (labeled, equal class sizes)
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
    /// Retrieval depth (default: twice the class size)
    #[arg(long)]
    depth: Option<usize>,
    /// Comma-separated angle-bin counts to sweep (re-encodes; needs stored
    /// contours), e.g. 3,5,6
    #[arg(long, value_name = "LIST")]
    k_sweep: Option<String>,
    /// Also write the report TSV here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write an SVG bar chart of per-query hits
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Number of classes
    #[arg(long, default_value_t = 5)]
    classes: usize,
    /// Instances per class
    #[arg(long, default_value_t = 8)]
    per_class: usize,
    /// Per-point radial noise as a fraction of the shape radius
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// RNG seed (fixes the dataset byte-for-byte)
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output dataset directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address
    #[arg(long, default_value = "127.0.0.1:7878")]
    addr: String,
    /// Index file to preload
    #[arg(long, value_name = "FILE")]
    index: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let config_was_customized = cli.config.is_some() || !cli.set.is_empty();
    let config = resolve_config(&cli)?;

    if let Command::Config = cli.command {
        print!("{}", config.to_kv_text());
        println!("fingerprint\t{}", config.fingerprint());
        return Ok(());
    }
    if let Command::Serve(args) = &cli.command {
        return serve(args, config);
    }

    let session = Session::connect(cli.server.as_deref(), config, config_was_customized)?;
    let result = dispatch(&cli.command, &session.client);
    session.finish();
    result
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_kv_text(&read_text(path)?)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => RunConfig::default(),
    };
    for pair in &cli.set {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("--set {pair:?}: expected KEY=VALUE"))?;
        config.set_key(key.trim(), value.trim())?;
    }
    config.validate()?;
    Ok(config)
}

fn dispatch(command: &Command, client: &ShapeseqClient) -> Result<()> {
    match command {
        Command::Encode(args) => encode(args, client),
        Command::Align(args) => align(args, client),
        Command::Match(args) => match_shapes(args, client),
        Command::Index(cmd) => index(cmd, client),
        Command::Query(args) => query(args, client),
        Command::Eval(args) => eval(args, client),
        Command::Gen(args) => gen(args, client),
        Command::Config | Command::Serve(_) => unreachable!("handled before connecting"),
    }
}

fn encode(args: &EncodeArgs, client: &ShapeseqClient) -> Result<()> {
    let (contour, mask) = load_shape(&args.input, args.format)?.into_parts();
    let want_trace = args.dump_sectors.is_some() || args.dump_sections.is_some();
    let resp = client.encode(&api::EncodeRequest {
        contour,
        mask,
        trace: want_trace,
    })?;
    write_atomic(&args.output, format!("{}\n", resp.tokens).as_bytes())?;
    if let Some(trace) = resp.trace {
        if let Some(path) = &args.dump_sectors {
            let sectors: Vec<serde_json::Value> = trace
                .sectors
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "ordinal": s.sector.ordinal,
                        "ring": s.sector.ring,
                        "wedge": s.sector.wedge,
                        "runs": s.runs.iter().map(|r| {
                            serde_json::json!({"start": r.arc.start, "len": r.arc.len})
                        }).collect::<Vec<_>>(),
                    })
                })
                .collect();
            write_atomic(path, serde_json::to_string_pretty(&sectors)?.as_bytes())?;
        }
        if let Some(path) = &args.dump_sections {
            let mut rows = Vec::new();
            for sector in &trace.sectors {
                for (run_idx, run) in sector.runs.iter().enumerate() {
                    for section in &run.sections {
                        let mut row = serde_json::to_value(section)?;
                        let obj = row.as_object_mut().expect("section serializes to object");
                        obj.insert("sector".into(), sector.sector.ordinal.into());
                        obj.insert("run".into(), run_idx.into());
                        rows.push(row);
                    }
                }
            }
            write_atomic(path, serde_json::to_string_pretty(&rows)?.as_bytes())?;
        }
    }
    println!(
        "encoded {} -> {} ({} tokens)",
        args.input.display(),
        args.output.display(),
        resp.tokens.split_whitespace().filter(|t| *t != "|").count()
    );
    Ok(())
}

fn align(args: &AlignArgs, client: &ShapeseqClient) -> Result<()> {
    let a = read_text(&args.a)?;
    let b = read_text(&args.b)?;
    let resp = client.align(&api::AlignRequest {
        a,
        b,
        dump_matrix: args.dump_matrix.is_some(),
    })?;
    println!("score\t{}", resp.score);
    println!("normalized\t{}", resp.normalized);
    println!("aligned_a\t{}", resp.row_a.join(" "));
    println!("aligned_b\t{}", resp.row_b.join(" "));
    if let Some(path) = &args.dump_matrix {
        let matrix = resp.matrix.expect("requested matrix");
        let mut tsv = String::new();
        for row in &matrix {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            tsv.push_str(&cells.join("\t"));
            tsv.push('\n');
        }
        write_atomic(path, tsv.as_bytes())?;
    }
    Ok(())
}

fn match_shapes(args: &MatchArgs, client: &ShapeseqClient) -> Result<()> {
    let a = load_contour(&args.a)?;
    let b = load_contour(&args.b)?;
    let resp = client.match_shapes(&api::MatchRequest { a, b })?;
    println!("similarity\t{}", resp.similarity);
    println!("score\t{}", resp.score);
    println!("residual\t{}", resp.residual);
    if let Some(path) = &args.dump_alignment {
        let trace = serde_json::json!({
            "pairs": resp.pairs,
            "transform": resp.transform,
            "residual": resp.residual,
        });
        write_atomic(path, serde_json::to_string_pretty(&trace)?.as_bytes())?;
    }
    Ok(())
}

fn index(cmd: &IndexCommand, client: &ShapeseqClient) -> Result<()> {
    match cmd {
        IndexCommand::Build(args) => {
            let entries = read_labels_file(&args.dir)?;
            let mut records = Vec::with_capacity(entries.len());
            for (id, label, path) in entries {
                records.push(api::IndexBuildRecord {
                    id,
                    label,
                    contour: load_contour(&path)?,
                });
            }
            let count = records.len();
            let info = client.index_build(&api::IndexBuildRequest {
                records,
                store_contours: args.store_contours,
            })?;
            write_atomic(&args.out, client.index_dump()?.as_bytes())?;
            println!(
                "indexed {count} shapes -> {} (fingerprint {})",
                args.out.display(),
                info.fingerprint
            );
            Ok(())
        }
        IndexCommand::Add(args) => {
            client.index_load(&read_text(&args.index)?)?;
            let info = client.index_add(&api::IndexAddRequest {
                id: args.id.clone(),
                label: args.label.clone(),
                contour: load_contour(&args.input)?,
                store_contour: args.store_contour,
            })?;
            write_atomic(&args.index, client.index_dump()?.as_bytes())?;
            println!("added {} ({} records)", args.id, info.size);
            Ok(())
        }
        IndexCommand::Info(args) => {
            client.index_load(&read_text(&args.index)?)?;
            let info = client.index_info()?;
            println!("records\t{}", info.size);
            println!("version\t{}", info.version);
            println!("fingerprint\t{}", info.fingerprint);
            println!("stores_contours\t{}", info.stores_contours);
            for (label, count) in &info.labels {
                println!("label\t{label}\t{count}");
            }
            Ok(())
        }
    }
}

fn query(args: &QueryArgs, client: &ShapeseqClient) -> Result<()> {
    client.index_load(&read_text(&args.index)?)?;
    let contour = load_contour(&args.input)?;
    let resp = client.query(&api::QueryRequest {
        contour: Some(contour),
        tokens: None,
        k: args.k,
        pairwise: args.pairwise_align,
        prefilter: args.prefilter,
    })?;
    let mut tsv = String::from("rank\tid\tlabel\tsimilarity\n");
    for (rank, hit) in resp.hits.iter().enumerate() {
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            rank + 1,
            hit.id,
            hit.label.as_deref().unwrap_or("-"),
            hit.similarity
        ));
    }
    print!("{tsv}");
    if let Some(path) = &args.out {
        write_atomic(path, tsv.as_bytes())?;
    }
    Ok(())
}

fn eval(args: &EvalArgs, client: &ShapeseqClient) -> Result<()> {
    client.index_load(&read_text(&args.index)?)?;
    let sweep = match &args.k_sweep {
        None => None,
        Some(list) => Some(
            list.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .with_context(|| format!("bad --k-sweep entry {s:?}"))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let resp = client.eval(&api::EvalRequest {
        depth: args.depth,
        angle_bin_sweep: sweep,
    })?;

    let mut tsv = String::new();
    tsv.push_str(&format!("# depth\t{}\n", resp.report.depth));
    tsv.push_str(&format!("# class_size\t{}\n", resp.report.class_size));
    tsv.push_str(&format!("# records\t{}\n", resp.report.record_count));
    tsv.push_str("id\tlabel\thits\n");
    for entry in &resp.report.per_query {
        tsv.push_str(&format!("{}\t{}\t{}\n", entry.id, entry.label, entry.hits));
    }
    tsv.push_str(&format!("bullseye\t{}\n", resp.report.score));
    if let Some(entries) = &resp.sweep {
        for e in entries {
            tsv.push_str(&format!("sweep\t{}\t{}\n", e.angle_bins, e.bullseye));
        }
    }
    print!("{tsv}");
    if let Some(path) = &args.out {
        write_atomic(path, tsv.as_bytes())?;
    }
    if let Some(path) = &args.svg {
        let labels: Vec<String> = resp.report.per_query.iter().map(|e| e.id.clone()).collect();
        let values: Vec<f64> = resp
            .report
            .per_query
            .iter()
            .map(|e| e.hits as f64 / resp.report.class_size as f64)
            .collect();
        let chart = svg::bar_chart(
            &format!(
                "bulls-eye {:.4} (depth {}, {} records)",
                resp.report.score, resp.report.depth, resp.report.record_count
            ),
            &labels,
            &values,
        );
        write_atomic(path, chart.as_bytes())?;
    }
    Ok(())
}

fn gen(args: &GenArgs, client: &ShapeseqClient) -> Result<()> {
    let resp = client.gen(&api::GenRequest {
        class_count: args.classes,
        per_class: args.per_class,
        noise_level: args.noise,
        seed: args.seed,
    })?;
    let shapes_dir = args.out.join("shapes");
    let mut labels = String::new();
    for shape in &resp.shapes {
        let rel = format!("shapes/{}.json", shape.id);
        write_atomic(
            &args.out.join(&rel),
            serde_json::to_string(&shape.contour)?.as_bytes(),
        )?;
        labels.push_str(&format!("{}\t{}\t{}\n", shape.id, shape.label, rel));
    }
    write_atomic(&args.out.join("labels.tsv"), labels.as_bytes())?;
    println!(
        "wrote {} shapes to {} (labels.tsv + {})",
        resp.shapes.len(),
        args.out.display(),
        shapes_dir.display()
    );
    Ok(())
}

/// labels.tsv: one `id<TAB>label<TAB>relative-path` line per shape; `-`
/// for unlabeled records.
fn read_labels_file(dir: &Path) -> Result<Vec<(String, Option<String>, PathBuf)>> {
    let path = dir.join("labels.tsv");
    let text = read_text(&path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(id), Some(label), Some(rel)) = (parts.next(), parts.next(), parts.next())
        else {
            bail!(
                "{}:{}: expected id<TAB>label<TAB>path",
                path.display(),
                lineno + 1
            );
        };
        let label = if label == "-" {
            None
        } else {
            Some(label.to_string())
        };
        out.push((id.to_string(), label, dir.join(rel)));
    }
    if out.is_empty() {
        bail!("{} lists no shapes", path.display());
    }
    Ok(out)
}

fn serve(args: &ServeArgs, config: RunConfig) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "info".into()),
        )
        .init();
    let state = shapeseq_service::AppState::new(config);
    preload_index(&state, args.index.as_deref())?;
    let state: Arc<shapeseq_service::AppState> = state;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&args.addr)
            .await
            .with_context(|| format!("binding {}", args.addr))?;
        println!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, shapeseq_service::router(state))
            .with_graceful_shutdown(async {
                tokio::signal::ctrl_c().await.ok();
            })
            .await
            .context("server terminated")
    })
}

fn preload_index(state: &Arc<shapeseq_service::AppState>, path: Option<&Path>) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let index = shapeseq_core::Index::from_json(&read_text(path)?)?;
    if index.fingerprint() != state.config().fingerprint() {
        bail!(
            "index {} was built under a different configuration",
            path.display()
        );
    }
    state.preload(index);
    println!("preloaded index from {}", path.display());
    Ok(())
}
