//! `lamad`: typecheck, differentiate, evaluate and test programs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use lamad::check::fuzz::FuzzConfig;
use lamad::check::report::{run_corpus, write_jsonl, Status};
use lamad::check::{jacobian_report, Compiled, FD_STEP, FD_TOL, FWD_REV_TOL};
use lamad::runtime::value::Env;
use lamad::runtime::Interp;
use lamad::syntax::{format_number, parse_programs, print_programs, ParsedProgram};
use lamad::{differentiate, Mode, Program, Registry, TargetProgram, TargetType, Value};

#[derive(Parser)]
#[command(name = "lamad", version, about = "Source-to-source AD for a higher-order language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the type of each program's body.
    Check {
        file: PathBuf,
        /// Also print the combinator form of source programs.
        #[arg(long)]
        raw_combinators: bool,
    },
    /// Forward-mode transform: emit the primal and derivative programs.
    Fwd(Transform),
    /// Reverse-mode transform: emit the primal and derivative programs.
    Rev(Transform),
    /// Evaluate a program at a point.
    Eval {
        file: PathBuf,
        #[arg(long)]
        point: String,
        /// Argument for a program whose result is a linear function.
        #[arg(long)]
        tangent: Option<String>,
        /// Name of the program to run when the file holds several.
        #[arg(long)]
        entry: Option<String>,
    },
    /// Print the Jacobian at a point, one row per line.
    Jacobian {
        file: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long, value_enum, default_value_t = JacMode::Fwd)]
        mode: JacMode,
        /// Finite-difference step.
        #[arg(long, default_value_t = FD_STEP)]
        h: f64,
    },
    /// Compare forward, reverse and finite-difference Jacobians.
    Gradcheck {
        file: PathBuf,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = FD_STEP)]
        h: f64,
        /// Tolerance against finite differences.
        #[arg(long, default_value_t = FD_TOL)]
        tol: f64,
    },
    /// Check a corpus of random programs.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Sample points per program.
        #[arg(long, default_value_t = 5)]
        points: usize,
        /// Write one JSON record per program to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Transform {
    file: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the combinator form instead of λ-terms.
    #[arg(long)]
    raw_combinators: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum JacMode {
    Fwd,
    Rev,
    Fd,
}

#[derive(Debug, Error)]
enum Failure {
    /// Unreadable, unparsable or ill-typed input.
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Tolerance(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Tolerance(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn load(path: &Path) -> Result<Vec<ParsedProgram>> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let ps = parse_programs(&text).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))?;
    for p in &ps {
        p.check().map_err(|e| Failure::Input(format!("{}:{e}", path.display())))?;
    }
    Ok(ps)
}

fn load_source(path: &Path) -> Result<Vec<(Option<String>, Program)>> {
    load(path)?
        .into_iter()
        .map(|p| p.source().map(|s| (p.program.name.clone(), s)).map_err(|e| Failure::Input(format!("{}:{e}", path.display()))))
        .collect()
}

fn single_source(path: &Path) -> Result<Program> {
    let mut ps = load_source(path)?;
    if ps.len() != 1 {
        return Err(Failure::Input(format!("{}: expected one program, found {}", path.display(), ps.len())));
    }
    Ok(ps.remove(0).1)
}

fn parse_csv(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Input(format!("not a number: `{x}`"))))
        .collect()
}

fn csv(v: &[f64]) -> String {
    v.iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(",")
}

fn flat_value(ty: &TargetType, data: &[f64], what: &str) -> Result<Value> {
    let width = ty.flat_width().ok_or_else(|| Failure::Input(format!("{what} type {ty} is not first-order")))?;
    if data.len() != width {
        return Err(Failure::Input(format!("{what} needs {width} numbers for {ty}, found {}", data.len())));
    }
    Value::from_flat(ty, data).ok_or_else(|| internal(format!("cannot build a {ty} value")))
}

fn check(file: &Path, raw: bool) -> Result<()> {
    for p in load(file)? {
        let ty = p.check().map_err(internal)?;
        match &p.program.name {
            Some(n) => println!("{n} : {ty}"),
            None => println!("{ty}"),
        }
        if raw {
            if let Ok(src) = p.source() {
                println!("{}", src.combinator().map_err(internal)?);
            }
        }
    }
    Ok(())
}

fn transform(t: &Transform, mode: Mode) -> Result<()> {
    let mut out = String::new();
    let mut programs = Vec::new();
    for (name, p) in load_source(&t.file)? {
        if t.raw_combinators {
            out.push_str(&format!("{}\n", p.combinator().map_err(internal)?));
            continue;
        }
        let ad = differentiate(&p, mode).map_err(internal)?;
        let label = |part: &str| Some(name.as_ref().map_or(part.to_string(), |n| format!("{n}-{part}")));
        for (part, body, ty) in [("primal", &ad.primal, ad.primal_type()), ("derivative", &ad.deriv, ad.deriv_type())] {
            let tp = TargetProgram { name: label(part), arg: ad.input.clone(), arg_type: ad.input_type(), body: body.clone() };
            let found = tp.body_type().map_err(internal)?;
            if found != ty {
                return Err(internal(format!("{part} has type {found}, expected {ty}")));
            }
            programs.push(tp);
        }
    }
    if !t.raw_combinators {
        out = print_programs(&programs);
    }
    match &t.output {
        Some(path) => fs::write(path, out).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn eval(file: &Path, point: &str, tangent: Option<&str>, entry: Option<&str>) -> Result<()> {
    let ps = load(file)?;
    let chosen = match entry {
        Some(e) => ps.iter().find(|p| p.program.name.as_deref() == Some(e)),
        None if tangent.is_some() => ps.iter().find(|p| matches!(p.check(), Ok(TargetType::LinFun(..)))),
        None => ps.first(),
    };
    let p = &chosen.ok_or_else(|| Failure::Input(format!("{}: no matching program", file.display())))?.program;
    let x = flat_value(&p.arg_type, &parse_csv(point)?, "point")?;
    let interp = Interp::new(Registry::builtin());
    let v = interp.eval(&Env::new().bind(&p.arg, x), &p.body).map_err(internal)?;
    let ty = p.body_type().map_err(internal)?;
    let (v, ty) = match (tangent, &ty) {
        (Some(t), TargetType::LinFun(a, b)) => {
            let arg = flat_value(a, &parse_csv(t)?, "tangent")?;
            (interp.apply_lin(&v, &arg).map_err(internal)?, (**b).clone())
        }
        (Some(_), _) => return Err(Failure::Input(format!("--tangent given but the result has type {ty}"))),
        (None, _) => (v, ty),
    };
    let flat = v.to_flat().ok_or_else(|| Failure::Input(format!("result of type {ty} is not first-order")))?;
    println!("{}", csv(&flat));
    Ok(())
}

fn compiled(file: &Path, point: &str) -> Result<(Compiled, Vec<f64>)> {
    let c = Compiled::new(single_source(file)?).map_err(|e| Failure::Input(e.to_string()))?;
    let x = parse_csv(point)?;
    if x.len() != c.widths().0 {
        return Err(Failure::Input(format!("point needs {} numbers, found {}", c.widths().0, x.len())));
    }
    Ok((c, x))
}

fn jacobian(file: &Path, point: &str, mode: JacMode, h: f64) -> Result<()> {
    let (c, x) = compiled(file, point)?;
    let r = jacobian_report(&c, &x, h).map_err(internal)?;
    let rows = match mode {
        JacMode::Fwd => &r.jac_fwd,
        JacMode::Rev => &r.jac_rev,
        JacMode::Fd => &r.jac_fd,
    };
    for row in rows {
        println!("{}", csv(row));
    }
    Ok(())
}

fn gradcheck(file: &Path, point: &str, h: f64, tol: f64) -> Result<()> {
    let (c, x) = compiled(file, point)?;
    let r = jacobian_report(&c, &x, h).map_err(internal)?;
    let y = c.eval(&x).map_err(internal)?;
    let exact = [c.fwd_primal(&x), c.rev_primal(&x)]
        .into_iter()
        .map(|p| p.map(|p| p.iter().zip(&y).all(|(a, b)| a.to_bits() == b.to_bits())))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(internal)?;
    println!("maxRelErrFwdRev {}", format_number(r.max_rel_err_fwd_rev));
    println!("maxRelErrFwdFD {}", format_number(r.max_rel_err_fwd_fd));
    println!("primalExact {}", exact.iter().all(|&e| e));
    if !exact.iter().all(|&e| e) {
        return Err(internal("transformed primal differs from the program"));
    }
    if r.max_rel_err_fwd_rev > FWD_REV_TOL || r.max_rel_err_fwd_fd > tol {
        return Err(Failure::Tolerance("gradient check failed".into()));
    }
    println!("ok");
    Ok(())
}

fn fuzz(seed: u64, count: u64, depth: usize, points: usize, report: Option<&Path>) -> Result<()> {
    let recs = run_corpus(&FuzzConfig::with_depth(depth), seed, count, points);
    if let Some(path) = report {
        let f = fs::File::create(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        write_jsonl(&recs, std::io::BufWriter::new(f)).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    let count_of = |s: Status| recs.iter().filter(|r| r.status == s).count();
    let (fail, error) = (count_of(Status::Fail), count_of(Status::Error));
    let worst = |f: fn(&lamad::check::report::ReportRecord) -> f64| recs.iter().map(f).fold(0.0, f64::max);
    println!(
        "{} programs: {} passed, {fail} failed, {error} errors; worst fwd/rev {}, worst fwd/FD {}",
        recs.len(),
        count_of(Status::Pass),
        format_number(worst(|r| r.max_rel_err_fwd_rev)),
        format_number(worst(|r| r.max_rel_err_fwd_fd)),
    );
    for r in recs.iter().filter(|r| r.status != Status::Pass) {
        eprintln!("seed {}: {:?} {}", r.seed, r.status, r.error.as_deref().unwrap_or(""));
    }
    if error > 0 {
        Err(internal(format!("{error} corpus programs could not be checked")))
    } else if fail > 0 {
        Err(Failure::Tolerance(format!("{fail} corpus programs out of tolerance")))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Check { file, raw_combinators } => check(&file, raw_combinators),
        Command::Fwd(t) => transform(&t, Mode::Forward),
        Command::Rev(t) => transform(&t, Mode::Reverse),
        Command::Eval { file, point, tangent, entry } => eval(&file, &point, tangent.as_deref(), entry.as_deref()),
        Command::Jacobian { file, point, mode, h } => jacobian(&file, &point, mode, h),
        Command::Gradcheck { file, point, h, tol } => gradcheck(&file, &point, h, tol),
        Command::Fuzz { seed, count, depth, points, report } => fuzz(seed, count, depth, points, report.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
