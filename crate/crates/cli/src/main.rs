use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use ari::confluence::analyze_confluence_bounded;
use ari::engine::{algebraically_equal_with, ari_normalize_with, AriOptions, NormalizeOptions};
use ari::error::Error;
use ari::grading::{run_corpus, MarkingScheme};
use ari::parse::parse_expr;
use ari::rules::{builtin_system, canon_with_tprime, load_system, RuleSystem, SystemName};
use ari::smt::{run_corpus_smt, AxiomSet, AxiomSetName};
use ari::solver::ExternalSolver;
use ari::termination::{analyze_system, emit_obligations, AnalysisOptions};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ari", version, about = "Constrained term rewriting for grading physics answers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RewriteFlags {
    /// Add the trig-constant rules to Canon.
    #[arg(long)]
    tprime: bool,
    /// Rewrite step budget per stage.
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
}

impl RewriteFlags {
    fn options(&self, trace: bool) -> AriOptions {
        AriOptions { tprime: self.tprime, normalize: NormalizeOptions { budget: self.budget, trace, ..Default::default() } }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the ARI normal form of an expression.
    Normalize {
        expr: String,
        #[command(flatten)]
        rewrite: RewriteFlags,
        /// Print every rewrite step.
        #[arg(long)]
        trace: bool,
    },
    /// Decide whether two expressions share an ARI normal form.
    Equal {
        left: String,
        right: String,
        #[command(flatten)]
        rewrite: RewriteFlags,
    },
    /// Grade a corpus with the rewrite system.
    Grade {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[command(flatten)]
        rewrite: RewriteFlags,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Grade a corpus through an external SMT solver.
    GradeSmt {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value = "minimal", value_parser = ["minimal", "reduced", "full"])]
        axioms: String,
        /// Solver command; `{file}` is replaced by the problem path,
        /// otherwise the problem is piped to stdin. Without it, problems
        /// are only emitted and every entry is unknown.
        #[arg(long)]
        solver: Option<String>,
        #[arg(long, default_value_t = 100)]
        timeout_sec: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Termination analysis of a rule system.
    Analyze {
        /// A built-in system (norm, canon, simp, clean, tprime) or a rule file.
        #[arg(long)]
        system: String,
        /// With `--system canon`, analyze Canon together with T′.
        #[arg(long)]
        tprime: bool,
        /// Write an SMT-LIB2 file per weight obligation into this directory.
        #[arg(long)]
        emit_obligations: Option<PathBuf>,
        /// Solver for weight obligations the internal prover leaves open.
        #[arg(long)]
        solver: Option<String>,
        #[arg(long, default_value_t = 100)]
        timeout_sec: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Critical-triple analysis of a rule system.
    Confluence {
        #[arg(long)]
        system: String,
        #[arg(long)]
        tprime: bool,
        /// Triples with more variables are listed but not analyzed.
        #[arg(long, default_value_t = 5)]
        max_vars: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::Arity { .. } | Error::RuleFile { .. } | Error::Io(_) | Error::SolverUnavailable(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Internal(e.to_string()),
        }
    }
}

fn with_path(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match Failure::from(e) {
        Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
        Failure::Internal(m) => Failure::Internal(format!("{}: {m}", path.display())),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_report(path: &Option<PathBuf>, value: &impl serde::Serialize) -> Result<(), Failure> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
        std::fs::write(p, text + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn solver(cmd: &Option<String>, timeout_sec: u64) -> Result<Option<ExternalSolver>, Failure> {
    match cmd {
        None => Ok(None),
        Some(c) => ExternalSolver::from_command(c, Duration::from_secs(timeout_sec))
            .map(Some)
            .ok_or_else(|| Failure::Usage("empty --solver command".into())),
    }
}

fn system(name: &str, tprime: bool) -> Result<RuleSystem, Failure> {
    match SystemName::parse(name) {
        Some(SystemName::Canon) if tprime => Ok(canon_with_tprime().clone()),
        Some(n) if !tprime => Ok(builtin_system(n).clone()),
        Some(_) => Err(Failure::Usage("--tprime only combines with --system canon".into())),
        None if tprime => Err(Failure::Usage("--tprime only combines with --system canon".into())),
        None => {
            let path = Path::new(name);
            load_system(&read(path)?).map_err(with_path(path))
        }
    }
}

fn load_scheme(path: &Path) -> Result<MarkingScheme, Failure> {
    MarkingScheme::from_json(&read(path)?).map_err(with_path(path))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Normalize { expr, rewrite, trace } => {
            let out = ari_normalize_with(&parse_expr(&expr)?, &rewrite.options(trace))?;
            if trace {
                for (name, stage) in &out.stages {
                    println!("# {name:?}");
                    for l in stage.lines() {
                        println!("{l}");
                    }
                }
            }
            println!("{}", out.term);
        }
        Command::Equal { left, right, rewrite } => {
            let (l, r) = (parse_expr(&left)?, parse_expr(&right)?);
            let eq = algebraically_equal_with(&l, &r, &rewrite.options(false));
            println!("{}", if eq { "equal" } else { "not equal" });
        }
        Command::Grade { corpus, scheme, rewrite, report } => {
            let scheme = load_scheme(&scheme)?;
            let rep = run_corpus(&read(&corpus)?, &scheme, &rewrite.options(false));
            print!("{rep}");
            write_report(&report, &rep)?;
            if rep.fails > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::GradeSmt { corpus, scheme, axioms, solver: cmd, timeout_sec, report } => {
            let scheme = load_scheme(&scheme)?;
            let axioms = AxiomSet::new(AxiomSetName::parse(&axioms).expect("validated by clap"));
            let solver = solver(&cmd, timeout_sec)?;
            let rep = run_corpus_smt(&read(&corpus)?, &scheme, &axioms, solver.as_ref())?;
            print!("{rep}");
            write_report(&report, &rep)?;
            if rep.fails > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Analyze { system: name, tprime, emit_obligations: dir, solver: cmd, timeout_sec, report } => {
            let sys = system(&name, tprime)?;
            let opts = AnalysisOptions { external: solver(&cmd, timeout_sec)?, waivers: None };
            let rep = analyze_system(&sys, &opts);
            print!("{rep}");
            if let Some(dir) = dir {
                std::fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
                for p in emit_obligations(&sys, &rep, &dir).map_err(with_path(&dir))? {
                    eprintln!("wrote {}", p.display());
                }
            }
            write_report(&report, &rep.to_json())?;
        }
        Command::Confluence { system: name, tprime, max_vars, report } => {
            let sys = system(&name, tprime)?;
            let rep = analyze_confluence_bounded(&sys, max_vars);
            print!("{rep}");
            write_report(&report, &rep)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
