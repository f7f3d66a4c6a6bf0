use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand};
use pdcoeff_core::retrieval::{
    labels_to_csv, parse_labels, pr_curve, two_stage_query, Entry, Stage,
};
use pdcoeff_core::{
    CoeffMetric, DistanceMatrix, EmbeddingIndex, FilterKind, LabeledDatabase, MetricKind,
    PersistenceDiagram, SynthConfig, Transform, TriangleMesh,
};

#[derive(Debug, Parser)]
#[command(
    name = "pdcoeff",
    version,
    about = "Persistence diagrams as complex coefficient vectors"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mesh (OFF) to 0th persistence diagram.
    Diagram {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_parser = parse_filter)]
        filter: FilterKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed every diagram of a directory into an index file.
    Embed {
        #[arg(long)]
        diagrams: PathBuf,
        #[arg(long, value_parser = parse_transform)]
        transform: Transform,
        /// Number of coefficients; defaults to floor(sqrt(M)).
        #[arg(short = 'k', long = "k")]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise distance matrix.
    Dist {
        /// Index file, for d1/d2/d3.
        #[arg(long)]
        index: Option<PathBuf>,
        /// Diagram directory, for bottleneck.
        #[arg(long)]
        diagrams: Option<PathBuf>,
        #[arg(long, value_parser = parse_metric)]
        metric: MetricKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision/recall table of a distance matrix.
    Pr {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-stage query: coefficient prefilter, bottleneck rerank.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        diagrams: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, value_parser = parse_coeff_metric, default_value = "d3")]
        metric: CoeffMetric,
        #[arg(long)]
        candidates: usize,
        /// Write the ranking here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic labeled database.
    Synth {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        /// Noise points per diagram, scattered near the diagonal.
        #[arg(long, default_value_t = 4)]
        noise: usize,
        /// Width of the noise band above the diagonal.
        #[arg(long, default_value_t = 0.05)]
        band: f64,
        /// Jitter applied to every base point.
        #[arg(long, default_value_t = 0.02)]
        jitter: f64,
        #[arg(long, default_value_t = 6)]
        base_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; receives diagrams/<id>.csv and labels.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_filter(s: &str) -> Result<FilterKind, String> {
    s.parse().map_err(|e: pdcoeff_core::Error| e.to_string())
}

fn parse_transform(s: &str) -> Result<Transform, String> {
    s.parse().map_err(|e: pdcoeff_core::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: pdcoeff_core::Error| e.to_string())
}

fn parse_coeff_metric(s: &str) -> Result<CoeffMetric, String> {
    s.parse().map_err(|e: pdcoeff_core::Error| e.to_string())
}

/// Writes through a temporary file in the target directory and renames on
/// success, so failures never leave partial output.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// `*.csv` files of a directory as `(id, diagram)`, sorted by id (file stem).
fn load_diagrams(dir: &Path) -> Result<Vec<(String, PersistenceDiagram)>> {
    let mut out = Vec::new();
    for entry in
        fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))?
    {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") || !path.is_file() {
            continue;
        }
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .with_context(|| format!("non UTF-8 file name {}", path.display()))?
            .to_string();
        let diagram = PersistenceDiagram::parse(&read(&path)?)
            .with_context(|| format!("parsing {}", path.display()))?;
        out.push((id, diagram));
    }
    ensure!(
        !out.is_empty(),
        "no diagram files (*.csv) in {}",
        dir.display()
    );
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn unlabeled(diagrams: Vec<(String, PersistenceDiagram)>) -> Result<LabeledDatabase> {
    let entries = diagrams
        .into_iter()
        .map(|(id, diagram)| Entry {
            id,
            label: String::new(),
            diagram,
        })
        .collect();
    Ok(LabeledDatabase::new(entries)?)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Diagram { mesh, filter, out } => {
            let m = TriangleMesh::parse_off(&read(&mesh)?)
                .with_context(|| format!("parsing {}", mesh.display()))?;
            let d = m.persistence_diagram(filter)?;
            write_atomic(&out, &d.serialize())?;
        }
        Command::Embed {
            diagrams,
            transform,
            k,
            out,
        } => {
            let db = unlabeled(load_diagrams(&diagrams)?)?;
            let index = db.embed(transform, k)?;
            write_atomic(&out, &index.to_csv())?;
        }
        Command::Dist {
            index,
            diagrams,
            metric,
            out,
        } => {
            let matrix = match (metric, index, diagrams) {
                (MetricKind::Bottleneck, None, Some(dir)) => {
                    unlabeled(load_diagrams(&dir)?)?.bottleneck_matrix()
                }
                (MetricKind::Bottleneck, _, _) => {
                    bail!("bottleneck needs --diagrams (and no --index)")
                }
                (MetricKind::Coeff(m), Some(path), None) => EmbeddingIndex::from_csv(&read(&path)?)
                    .with_context(|| format!("loading {}", path.display()))?
                    .distance_matrix(m)?,
                (MetricKind::Coeff(m), _, _) => bail!("{m} needs --index (and no --diagrams)"),
            };
            write_atomic(&out, &matrix.to_csv())?;
        }
        Command::Pr {
            matrix,
            labels,
            out,
        } => {
            let matrix = DistanceMatrix::from_csv(&read(&matrix)?)
                .with_context(|| format!("loading {}", matrix.display()))?;
            let map = parse_labels(&read(&labels)?)
                .with_context(|| format!("loading {}", labels.display()))?;
            let labels = matrix
                .ids()
                .iter()
                .map(|id| {
                    map.get(id)
                        .cloned()
                        .with_context(|| format!("no label for {id:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            write_atomic(&out, &pr_curve(&matrix, &labels)?.to_csv())?;
        }
        Command::Query {
            index,
            diagrams,
            id,
            metric,
            candidates,
            out,
        } => {
            let index = EmbeddingIndex::from_csv(&read(&index)?)
                .with_context(|| format!("loading {}", index.display()))?;
            let db = unlabeled(load_diagrams(&diagrams)?)?;
            if let Some(e) = db
                .entries()
                .iter()
                .find(|e| e.diagram.total_multiplicity() > index.width())
            {
                bail!(
                    "diagram {:?} has {} points but the index was built with M = {}; re-run embed on the full directory",
                    e.id,
                    e.diagram.total_multiplicity(),
                    index.width()
                );
            }
            let ranking = two_stage_query(&id, &db, &index, metric, candidates)?;
            let mut text = String::from("rank,id,stage,distance\n");
            for (rank, item) in ranking.iter().enumerate() {
                let stage = match item.stage {
                    Stage::Rerank => "bottleneck",
                    Stage::Prefilter => "prefilter",
                };
                text.push_str(&format!(
                    "{},{},{stage},{}\n",
                    rank + 1,
                    item.id,
                    item.distance
                ));
            }
            match out {
                Some(path) => write_atomic(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Synth {
            classes,
            per_class,
            noise,
            band,
            jitter,
            base_points,
            seed,
            out,
        } => {
            let db = SynthConfig {
                classes,
                per_class,
                base_points,
                jitter,
                noise_points: noise,
                band,
                seed,
            }
            .generate()?;
            let dir = out.join("diagrams");
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for e in db.entries() {
                write_atomic(&dir.join(format!("{}.csv", e.id)), &e.diagram.serialize())?;
            }
            let labels = labels_to_csv(
                db.entries()
                    .iter()
                    .map(|e| (e.id.as_str(), e.label.as_str())),
            );
            write_atomic(&out.join("labels.csv"), &labels)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", first.trim());
            return ExitCode::FAILURE;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
