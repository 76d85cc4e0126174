//! `omq`: rewrite, evaluate and benchmark OWL 2 QL ontology-mediated queries.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use omq::bench::{gen_er_abox, stats_table, Method};
use omq::chase::certain_answers;
use omq::dl::{h_complete, parse_abox, parse_cq, parse_tbox, ABox, TBox};
use omq::eval::{all_answers, eval_seminaive, EvalStats, GroundEvaluator};
use omq::ndl::{emit_program, lift_linear, lift_to_arbitrary, parse_program, to_skinny, EqMode, Program};
use omq::rewrite::{parse_decomposition, rewrite_slice, rewrite_td, rewrite_tw};
use omq::{Error, ErrorKind};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (rng: ChaCha8Rng (rand_chacha 0.3))");

#[derive(Parser)]
#[command(name = "omq", version = VERSION, about = "Nonrecursive datalog rewritings for OWL 2 QL queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite an ontology-mediated query into an NDL program.
    Rewrite(RewriteArgs),
    /// Evaluate an NDL program over an ABox.
    Eval(EvalArgs),
    /// Certain answers computed with the chase.
    Oracle(OracleArgs),
    /// Complete an ABox under role and concept inclusions.
    Hcomplete(HcompleteArgs),
    /// Benchmark datasets and clause-count tables.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Td,
    Slice,
    Tw,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Td => Method::Td,
            MethodArg::Slice => Method::Slice,
            MethodArg::Tw => Method::Tw,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AboxMode {
    Hcomplete,
    Arbitrary,
}

#[derive(Clone, Copy, ValueEnum)]
enum EqArg {
    Inline,
    Explicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Seminaive,
    Linear,
    Circuit,
}

#[derive(Args)]
struct RewriteArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    tbox: PathBuf,
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "hcomplete")]
    abox_mode: AboxMode,
    /// Root variable of the slice decomposition.
    #[arg(long)]
    root: Option<String>,
    /// Tree decomposition file for the td method.
    #[arg(long)]
    td: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "inline")]
    eq: EqArg,
    /// Binarize bodies with to_skinny.
    #[arg(long)]
    skinny: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    abox: PathBuf,
    #[arg(long, value_enum, default_value = "seminaive")]
    engine: Engine,
    /// Comma-separated tuple to decide; without it every tuple is tried.
    #[arg(long)]
    candidate: Option<String>,
    /// Print evaluation statistics as JSON.
    #[arg(long)]
    stats: bool,
    /// CSV output file (stdout by default).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    tbox: PathBuf,
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    abox: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HcompleteArgs {
    #[arg(long)]
    tbox: PathBuf,
    #[arg(long)]
    abox: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Erdős–Rényi ABox with R edges and A, B labels.
    Gen {
        #[arg(long = "V")]
        vertices: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clause counts of the rewritings of a query sequence.
    Table {
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        method: Vec<MethodArg>,
        #[arg(long, default_value_t = 1)]
        sequence: usize,
        #[arg(long, default_value_t = 15)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Parse => 2,
            ErrorKind::Precondition => 3,
            ErrorKind::Semantic => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_tbox(path: &Path) -> CliResult<TBox> {
    Ok(parse_tbox(&read(path)?)?.normalize()?)
}

fn load_abox(path: &Path) -> CliResult<ABox> {
    Ok(parse_abox(&read(path)?)?)
}

fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn cmd_rewrite(args: &RewriteArgs) -> CliResult<()> {
    let tbox = load_tbox(&args.tbox)?;
    let cq = parse_cq(&read(&args.query)?)?;
    let method = Method::from(args.method);
    let mut program = match method {
        Method::Slice => rewrite_slice(&tbox, &cq, args.root.as_deref())?,
        Method::Td => match &args.td {
            Some(path) => {
                let td = parse_decomposition(&read(path)?, &cq)?;
                rewrite_td(&tbox, &cq, Some(&td))?
            }
            None => rewrite_td(&tbox, &cq, None)?,
        },
        Method::Tw => rewrite_tw(&tbox, &cq)?,
    };
    if args.abox_mode == AboxMode::Arbitrary {
        program = match method {
            Method::Slice => lift_linear(&program, &tbox)?,
            _ => lift_to_arbitrary(&program, &tbox)?,
        };
    }
    if args.skinny {
        program = to_skinny(&program)?;
    }
    let mode = match args.eq {
        EqArg::Inline => EqMode::Inline,
        EqArg::Explicit => EqMode::Explicit,
    };
    let text = emit_program(&program, mode);
    write(Some(&args.out), &text)?;
    let report = parse_program(&text)?.validate()?;
    let stats = json!({
        "clauses": report.clauses,
        "depth": report.depth,
        "width": report.width,
        "linear": report.linear,
        "skinny": report.skinny,
        "predicates": report.idb_predicates,
    });
    println!("{stats}");
    Ok(())
}

fn goal_header(program: &Program) -> Vec<String> {
    let params = program.goal_params();
    if params.len() == program.goal_arity {
        params.to_vec()
    } else {
        (1..=program.goal_arity).map(|i| format!("x{i}")).collect()
    }
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let program = parse_program(&read(&args.program)?)?;
    let abox = load_abox(&args.abox)?;
    let candidate: Option<Vec<String>> = args
        .candidate
        .as_ref()
        .map(|c| if c.is_empty() { Vec::new() } else { c.split(',').map(|s| s.trim().to_string()).collect() });
    if let Some(c) = &candidate {
        if c.len() != program.goal_arity {
            return Err(Error::ArityMismatch {
                predicate: program.goal.clone(),
                expected: program.goal_arity,
                found: c.len(),
            }
            .into());
        }
    }
    let start = Instant::now();
    let (rows, stats) = match args.engine {
        Engine::Seminaive => {
            let answers = eval_seminaive(&program, &abox)?;
            let rows = match &candidate {
                Some(c) => answers.into_iter().filter(|a| a == c).collect(),
                None => answers,
            };
            (rows, EvalStats::default())
        }
        Engine::Linear | Engine::Circuit => {
            let mut evaluator = match args.engine {
                Engine::Linear => GroundEvaluator::linear(&program, &abox)?,
                _ => GroundEvaluator::circuit(&program, &abox)?,
            };
            let rows = match &candidate {
                Some(c) => {
                    if evaluator.decide(c)? {
                        vec![c.clone()]
                    } else {
                        Vec::new()
                    }
                }
                None => all_answers(&mut evaluator)?,
            };
            (rows, evaluator.stats())
        }
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1000.0;
    write(args.out.as_deref(), &csv(&goal_header(&program), &rows))?;
    if args.stats {
        let stats = json!({
            "vertices": stats.vertices,
            "edges": stats.edges,
            "gates": stats.gates,
            "depth": stats.depth,
            "runtime_ms": runtime_ms,
        });
        println!("{stats}");
    }
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> CliResult<()> {
    let tbox = load_tbox(&args.tbox)?;
    let cq = parse_cq(&read(&args.query)?)?;
    let abox = load_abox(&args.abox)?;
    let answers: Vec<Vec<String>> = certain_answers(&tbox, &cq, &abox)?.into_iter().collect();
    write(args.out.as_deref(), &csv(cq.answer_vars(), &answers))
}

fn cmd_hcomplete(args: &HcompleteArgs) -> CliResult<()> {
    let tbox = load_tbox(&args.tbox)?;
    let abox = load_abox(&args.abox)?;
    write(args.out.as_deref(), &h_complete(&tbox, &abox).to_string())
}

fn cmd_bench(cmd: &BenchCommand) -> CliResult<()> {
    match cmd {
        BenchCommand::Gen {
            vertices,
            p,
            q,
            seed,
            out,
        } => {
            let abox = gen_er_abox(*vertices, *p, *q, *seed)?;
            write(out.as_deref(), &abox.to_string())?;
            let stats = json!({
                "rng": omq::bench::RNG_ID,
                "seed": seed,
                "role_facts": abox.role_facts().len(),
                "concept_facts": abox.concept_facts().len(),
            });
            if out.is_some() {
                println!("{stats}");
            }
            Ok(())
        }
        BenchCommand::Table {
            method,
            sequence,
            nmax,
            out,
        } => {
            let methods: Vec<Method> = method.iter().map(|&m| m.into()).collect();
            write(out.as_deref(), &stats_table(&methods, *sequence, *nmax)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Rewrite(a) => cmd_rewrite(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Hcomplete(a) => cmd_hcomplete(a),
        Command::Bench(b) => cmd_bench(b),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
