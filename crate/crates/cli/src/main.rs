use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use normlab::attainment::{default_epsilons, na_set, sbpb_profile_with, ProfileOptions, DEFAULT_CLUSTER_TOL};
use normlab::convexity::{auerbach_2d, delta_numeric};
use normlab::normcomp::{opnorm_oracle, opnorm_with, NormOptions};
use normlab::repro::{run_filtered, write_bundle, RunFilter, DEFAULT_TOL};
use normlab::{Exponent, GalleryId, GalleryParams, GalleryTag, Matrix, OperatorPQ, SequenceSpace};
use serde::Serialize;
use thiserror::Error;

const REPORT_DIR_ENV: &str = "NORMLAB_REPORT_DIR";

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
}

impl From<normlab::Error> for Failure {
    fn from(e: normlab::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "normlab", version, about = "Operator norms, attaining sets and attainment moduli on lp^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operator norm ‖T‖_{p→q}.
    Opnorm {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the brute-force grid instead.
        #[arg(long)]
        oracle: bool,
    },
    /// Clustered norm-attaining set NA(T).
    Na {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
    },
    /// Profile ε ↦ (ρ(ε,T), η(ε,T)).
    Eta {
        #[command(flatten)]
        op: OperatorArgs,
        /// Comma separated, increasing. Defaults to a log grid.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Modulus of convexity δ(ε) of ℓ_p^dim (dim 2 or 3).
    Delta {
        #[arg(long)]
        p: Exponent,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,1.5,2")]
        eps: Vec<f64>,
    },
    /// Auerbach system of ℓ_p² or of its image under `--map`.
    Auerbach {
        #[arg(long)]
        p: Exponent,
        /// 2×2 map A, norm x ↦ ‖Ax‖_p, as "a,b;c,d".
        #[arg(long)]
        map: Option<Matrix>,
    },
    /// Claim checklist for one construction, or every harness without `--tag`.
    Repro {
        #[command(flatten)]
        gallery: GalleryArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report bundle directory.
        #[arg(long, env = REPORT_DIR_ENV, default_value = "reports")]
        report_dir: PathBuf,
    },
    /// Tags, parameter schemas and the claim each certifies.
    Gallery,
}

#[derive(Args, Debug, Clone, Default)]
struct GalleryArgs {
    #[arg(long)]
    tag: Option<GalleryTag>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    p: Option<Exponent>,
    #[arg(long)]
    q: Option<Exponent>,
    /// Domain dimension n where the construction has one.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    /// The η parameter of BIORTH-INF.
    #[arg(long)]
    eta: Option<f64>,
}

impl GalleryArgs {
    fn id(&self, tag: GalleryTag, eps: Option<f64>) -> GalleryId {
        let params = GalleryParams {
            beta: self.beta,
            p: self.p,
            q: self.q,
            n: self.dim,
            blocks: self.blocks,
            eta: self.eta,
            eps,
        };
        GalleryId::new(tag, params)
    }
}

#[derive(Args, Debug, Clone)]
struct OperatorArgs {
    #[command(flatten)]
    gallery: GalleryArgs,
    /// Row-semicolon string "a,b;c,d", or a JSON file holding the rows.
    #[arg(long, conflicts_with = "tag")]
    matrix: Option<String>,
}

impl OperatorArgs {
    fn build(&self) -> Outcome<OperatorPQ> {
        let g = &self.gallery;
        if let Some(tag) = g.tag {
            let id = g.id(tag, None);
            id.check_hypotheses()?;
            return Ok(id.build()?);
        }
        let m = self
            .matrix
            .as_deref()
            .ok_or_else(|| Failure::Usage("give --tag or --matrix".into()))?;
        let (p, q) = match (g.p, g.q) {
            (Some(p), Some(q)) => (p, q),
            _ => return Err(Failure::Usage("--matrix needs both --p and --q".into())),
        };
        Ok(OperatorPQ::from_plain(parse_matrix(m)?, p, q)?)
    }
}

fn parse_matrix(s: &str) -> Outcome<Matrix> {
    let path = Path::new(s);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{s}: {e}")))?;
        let rows: Vec<Vec<f64>> =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{s}: {e}")))?;
        return Ok(Matrix::from_rows(rows)?);
    }
    Ok(s.parse()?)
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("records serialize") + "\n"
}

fn emit(out: &OutputArgs, text: &str) -> Outcome<()> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rows_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn coord_header(dim: usize) -> String {
    (1..=dim).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",")
}

#[derive(Serialize)]
struct GalleryEntry {
    tag: GalleryTag,
    params: &'static [&'static str],
    claim: &'static str,
}

fn run(cli: Cli) -> Outcome<()> {
    let out = &cli.out;
    match cli.command {
        Command::Opnorm { op, tol, grid, seed, oracle } => {
            let op = op.build()?;
            let r = if oracle {
                opnorm_oracle(&op, grid)?
            } else {
                let opts = NormOptions {
                    tol,
                    grid: grid.max(20_000),
                    seed,
                    ..NormOptions::default()
                };
                opnorm_with(&op, &opts)?
            };
            let text = match out.format {
                Format::Json => json(&r),
                Format::Csv => format!(
                    "value,lower_bound,upper_bound,certified,method\n{},{},{},{},{:?}\n",
                    r.value, r.lower_bound, r.upper_bound, r.certified, r.method
                ),
            };
            emit(out, &text)
        }
        Command::Na { op, tol, cluster_tol } => {
            let op = op.build()?;
            let set = na_set(&op, tol, cluster_tol)?;
            let text = match out.format {
                Format::Json => json(&set),
                Format::Csv => rows_csv(&coord_header(op.domain().dim()), &set.points),
            };
            emit(out, &text)
        }
        Command::Eta { op, eps, tol, grid, seed } => {
            let op = op.build()?;
            let eps = if eps.is_empty() { default_epsilons(op.domain()) } else { eps };
            let opts = ProfileOptions {
                value_tol: tol,
                grid,
                seed,
                ..ProfileOptions::default()
            };
            let prof = sbpb_profile_with(&op, &eps, &opts)?;
            let text = match out.format {
                Format::Json => json(&prof),
                Format::Csv => prof.to_csv(),
            };
            emit(out, &text)
        }
        Command::Delta { p, dim, eps } => {
            let space = SequenceSpace::new(dim, p)?;
            let d = delta_numeric(&space, &eps)?;
            let text = match out.format {
                Format::Json => json(&d),
                Format::Csv => d.to_csv(),
            };
            emit(out, &text)
        }
        Command::Auerbach { p, map } => {
            let space = match map {
                Some(m) if m.rows() == 2 && m.cols() == 2 => {
                    SequenceSpace::linear_image(p, [[m.get(0, 0), m.get(0, 1)], [m.get(1, 0), m.get(1, 1)]])?
                }
                Some(_) => return Err(Failure::Usage("--map must be 2x2".into())),
                None => SequenceSpace::new(2, p)?,
            };
            let sys = auerbach_2d(&space)?;
            let text = match out.format {
                Format::Json => json(&sys),
                Format::Csv => {
                    let rows: Vec<Vec<f64>> = sys
                        .vectors
                        .iter()
                        .zip(&sys.functionals)
                        .map(|(e, y)| e.iter().chain(y).copied().collect())
                        .collect();
                    rows_csv("e1,e2,y1,y2", &rows)
                }
            };
            emit(out, &text)
        }
        Command::Repro { gallery, tol, seed, report_dir } => {
            let filter = match gallery.tag {
                Some(tag) => {
                    let id = gallery.id(tag, None);
                    id.check_hypotheses()?;
                    RunFilter {
                        only: Some(id),
                        ..RunFilter::default()
                    }
                }
                None => RunFilter::default(),
            };
            let bundle = run_filtered(tol, seed, &filter)?;
            write_bundle(&report_dir, &bundle)?;
            let text = match out.format {
                Format::Json if filter.only.is_some() => json(&bundle.reports[0]),
                Format::Json => bundle.to_stable_json() + "\n",
                Format::Csv => fs::read_to_string(report_dir.join("index.csv"))
                    .map_err(|e| Failure::Usage(format!("{}: {e}", report_dir.display())))?,
            };
            emit(out, &text)?;
            if bundle.overall {
                Ok(())
            } else {
                Err(Failure::Check(format!("failed checks: {}", bundle.failures().join("; "))))
            }
        }
        Command::Gallery => {
            let entries: Vec<GalleryEntry> = GalleryTag::ALL
                .iter()
                .map(|&tag| GalleryEntry {
                    tag,
                    params: tag.schema(),
                    claim: tag.claim(),
                })
                .collect();
            let text = match out.format {
                Format::Json => json(&entries),
                Format::Csv => {
                    let mut s = String::from("tag,params,claim\n");
                    for e in &entries {
                        s.push_str(&format!("{},{},\"{}\"\n", e.tag, e.params.join(" "), e.claim.replace('"', "'")));
                    }
                    s
                }
            };
            emit(out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
