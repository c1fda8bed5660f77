//! `opc`: batch front end for the ordered process calculus workbench.

mod config;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opc_core::acceptance::{self, SUITES};
use opc_core::calculus::{Calculus, Target, Term};
use opc_core::fragments::{translate_in, Fragment};
use opc_core::random::seed_from_env;
use opc_core::solver::{solve_guarded, TieBreak};
use opc_core::syntax::{
    automaton_to_dot, automaton_to_json, format_star, format_sterm, format_system, format_term,
    parse_star, parse_system, parse_term,
};
use opc_core::theories::{Atoms, ConvexTheory, GuardedTheory, ProbGkatTheory, SemilatticeTheory};
use opc_core::{Error, STerm, Theory, TheoryKind};

use config::{ConfigArgs, TheoryConfig};

#[derive(Parser)]
#[command(
    name = "opc",
    version,
    about = "Ordered process calculi: semantics, behaviour order, equation solving"
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

/// Text given inline, or `@path` to read a file.
#[derive(Args, Clone, Debug)]
struct Pair {
    /// Left-hand term (or @file)
    e: String,
    /// Right-hand term (or @file)
    f: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Grammar {
    Term,
    System,
    Star,
    Polystar,
    Probgkat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StarKind {
    Star,
    Polystar,
    Probgkat,
}

impl StarKind {
    fn fragment(self) -> Fragment {
        match self {
            StarKind::Star => Fragment::Star,
            StarKind::Polystar => Fragment::Polystar,
            StarKind::Probgkat => Fragment::ProbGkat,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical form of a term, system or star expression
    Fmt {
        /// Input text (or @file)
        input: String,
        #[arg(long = "as", value_enum, default_value = "term")]
        grammar: Grammar,
    },
    /// One step of the small-step semantics
    Step { term: String },
    /// The reachable automaton of a term
    Explore {
        term: String,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
    },
    /// Exit 0 iff e ≤_b f
    Leq(Pair),
    /// Exit 0 iff e ≡_b f
    Equiv(Pair),
    /// Exit 0 iff f simulates e (both ways with --both)
    Similar {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        both: bool,
    },
    /// Exit 0 iff e and f are ordinarily bisimilar
    Bisimilar(Pair),
    /// Solve a guarded system of equations
    Solve {
        /// System file (x = term lines, x <= y order lines)
        file: PathBuf,
        /// Eliminate the last-declared minimal indeterminate first
        #[arg(long)]
        reverse: bool,
    },
    /// Translate a star or polystar expression into a process term
    Translate {
        #[arg(value_enum)]
        fragment: StarKind,
        expr: String,
    },
    /// Run the acceptance suites
    Selftest {
        #[arg(long)]
        suite: Option<String>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_resource() => 3,
            _ => 2,
        }
    }
}

/// 0 = holds or done, 1 = does not hold.
type Verdict = Result<bool, CliError>;

fn read_input(text: &str) -> Result<String, CliError> {
    match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}"))),
        None => Ok(text.to_string()),
    }
}

fn render_error(err: &CliError, source: Option<&str>) -> String {
    match (err, source) {
        (CliError::Core(Error::Parse(p)), Some(src)) => format!("parse error: {}", p.render(src)),
        _ => err.to_string(),
    }
}

/// `ε(e)` rendered as a term: prefixes for transitions, variables for returns.
fn branch_as_term<T: Theory>(theory: &T, b: &T::Elem<Target<Term<T::Op>>>) -> Term<T::Op> {
    fn go<O: Clone>(t: &STerm<O, Target<Term<O>>>) -> Term<O> {
        match t {
            STerm::Gen(Target::Ret(v)) => Term::Ret(v.clone()),
            STerm::Gen(Target::Next(a, e)) => Term::Prefix(a.clone(), Box::new(e.clone())),
            STerm::Zero => Term::Zero,
            STerm::Op(o, args) => Term::Op(o.clone(), args.iter().map(go).collect()),
        }
    }
    go(&theory.representative(b))
}

struct Session<'a, W: Write> {
    out: &'a mut W,
}

impl<W: Write> Session<'_, W> {
    fn term<T: Theory>(&self, calc: &Calculus<T>, text: &str) -> Result<Term<T::Op>, CliError> {
        let src = read_input(text)?;
        parse_term(calc, &src).map_err(|e| CliError::Usage(render_error(&e.into(), Some(&src))))
    }

    fn pair<T: Theory>(&self, calc: &Calculus<T>, p: &Pair) -> Result<[Term<T::Op>; 2], CliError> {
        Ok([self.term(calc, &p.e)?, self.term(calc, &p.f)?])
    }

    fn execute<T: Theory>(&mut self, calc: &Calculus<T>, cmd: &Command) -> Verdict {
        let th = &calc.theory;
        match cmd {
            Command::Fmt { input, grammar } => {
                let src = read_input(input)?;
                let parsed: Result<String, Error> = match grammar {
                    Grammar::Term => parse_term(calc, &src).map(|t| format_term(th, &t) + "\n"),
                    Grammar::System => parse_system(calc, &src).map(|s| format_system(th, &s)),
                    Grammar::Star | Grammar::Polystar | Grammar::Probgkat => {
                        let fragment = match grammar {
                            Grammar::Star => Fragment::Star,
                            Grammar::Polystar => Fragment::Polystar,
                            _ => Fragment::ProbGkat,
                        };
                        parse_star(calc, &src).and_then(|e| {
                            e.check(calc, fragment)?;
                            Ok(format_star(th, &e) + "\n")
                        })
                    }
                };
                let text =
                    parsed.map_err(|e| CliError::Usage(render_error(&e.into(), Some(&src))))?;
                write!(self.out, "{text}")?;
                Ok(true)
            }
            Command::Step { term } => {
                let e = self.term(calc, term)?;
                calc.validate(&e)?;
                let b = calc.step(&e)?;
                writeln!(self.out, "{}", format_term(th, &branch_as_term(th, &b)))?;
                Ok(true)
            }
            Command::Explore { term, dot, json } => {
                let e = self.term(calc, term)?;
                let ex = calc.reachable(&e)?;
                let a = &ex.automaton;
                if *json {
                    write!(self.out, "{}", automaton_to_json(a))?;
                } else if *dot {
                    write!(self.out, "{}", automaton_to_dot(a))?;
                } else {
                    for (i, label) in a.labels().iter().enumerate() {
                        let shown = th.representative(a.branch(i)).map_gens(
                            &mut |t: &Target<usize>| match t {
                                Target::Ret(v) => v.to_string(),
                                Target::Next(act, j) => format!("{act}.s{j}"),
                            },
                        );
                        let root = if i == ex.root() { " (root)" } else { "" };
                        writeln!(self.out, "s{i}{root}: {label}")?;
                        writeln!(self.out, "    -> {}", format_sterm(th, &shown))?;
                    }
                    for (x, y) in a.order_pairs() {
                        writeln!(self.out, "s{x} <= s{y}")?;
                    }
                }
                Ok(true)
            }
            Command::Leq(p) => {
                let [e, f] = self.pair(calc, p)?;
                Ok(calc.behavioural_leq(&e, &f)?)
            }
            Command::Equiv(p) => {
                let [e, f] = self.pair(calc, p)?;
                Ok(calc.behavioural_equiv(&e, &f)?)
            }
            Command::Similar { pair, both } => {
                let [e, f] = self.pair(calc, pair)?;
                Ok(calc.similar(&e, &f)? && (!both || calc.similar(&f, &e)?))
            }
            Command::Bisimilar(p) => {
                let [e, f] = self.pair(calc, p)?;
                Ok(calc.bisimilar(&e, &f)?)
            }
            Command::Solve { file, reverse } => {
                let src = std::fs::read_to_string(file)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
                let sys = parse_system(calc, &src)
                    .map_err(|e| CliError::Usage(render_error(&e.into(), Some(&src))))?;
                let tie = if *reverse {
                    TieBreak::ReverseDeclarationOrder
                } else {
                    TieBreak::DeclarationOrder
                };
                let sol = solve_guarded(&sys, tie)?;
                for (x, t) in sol.indeterminates.iter().zip(&sol.terms) {
                    writeln!(self.out, "{x} = {}", format_term(th, t))?;
                }
                Ok(true)
            }
            Command::Translate { fragment, expr } => {
                let src = read_input(expr)?;
                let e = parse_star(calc, &src)
                    .map_err(|e| CliError::Usage(render_error(&e.into(), Some(&src))))?;
                let t = translate_in(calc, fragment.fragment(), &e)?;
                writeln!(self.out, "{}", format_term(th, &t))?;
                Ok(true)
            }
            Command::Selftest { .. } => unreachable!("selftest runs without a theory"),
        }
    }
}

fn selftest(out: &mut impl Write, suite: Option<&str>) -> Verdict {
    let chosen: Vec<_> = match suite {
        Some(name) => vec![acceptance::find(name).ok_or_else(|| {
            let names: Vec<_> = SUITES.iter().map(|s| s.name).collect();
            CliError::Usage(format!(
                "unknown suite `{name}`; known: {}",
                names.join(", ")
            ))
        })?],
        None => SUITES.iter().collect(),
    };
    let seed = seed_from_env();
    writeln!(out, "seed {seed}")?;
    let mut ok = true;
    for s in chosen {
        let report = s.run(seed);
        writeln!(out, "{report}")?;
        out.flush()?;
        ok &= report.passed();
    }
    Ok(ok)
}

/// Atom names mentioned in `?{...}` guards, in order of appearance.
fn atoms_in(texts: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for text in texts {
        let mut rest = text.as_str();
        while let Some(i) = rest.find("?{") {
            rest = &rest[i + 2..];
            let end = rest.find('}').unwrap_or(rest.len());
            for name in rest[..end]
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
            {
                if !out.iter().any(|n| n == name) {
                    out.push(name.to_string());
                }
            }
        }
    }
    out
}

fn inputs(cmd: &Command) -> Result<Vec<String>, CliError> {
    Ok(match cmd {
        Command::Fmt { input, .. } => vec![read_input(input)?],
        Command::Step { term } | Command::Explore { term, .. } => vec![read_input(term)?],
        Command::Leq(p)
        | Command::Equiv(p)
        | Command::Bisimilar(p)
        | Command::Similar { pair: p, .. } => {
            vec![read_input(&p.e)?, read_input(&p.f)?]
        }
        Command::Solve { file, .. } => vec![std::fs::read_to_string(file).unwrap_or_default()],
        Command::Translate { expr, .. } => vec![read_input(expr)?],
        Command::Selftest { .. } => Vec::new(),
    })
}

fn atoms(cfg: &TheoryConfig, cmd: &Command) -> Result<Atoms, CliError> {
    let names = match &cfg.atoms {
        Some(names) => names.clone(),
        None => {
            let mut names = atoms_in(&inputs(cmd)?);
            if !names.iter().any(|n| n == config::RESIDUAL_ATOM) {
                names.push(config::RESIDUAL_ATOM.to_string());
            }
            names
        }
    };
    Ok(Atoms::new(names)?)
}

fn run(cli: &Cli, out: &mut impl Write) -> Verdict {
    if let Command::Selftest { suite } = &cli.command {
        return selftest(out, suite.as_deref());
    }
    let cfg = cli.config.resolve().map_err(CliError::Usage)?;
    let actions = cfg.action_order()?;
    let mut session = Session { out };
    macro_rules! with {
        ($theory:expr) => {{
            let calc = Calculus {
                theory: $theory,
                actions,
                max_states: cfg.max_states,
            };
            session.execute(&calc, &cli.command)
        }};
    }
    match cfg.kind {
        TheoryKind::Guarded => with!(GuardedTheory::new(atoms(&cfg, &cli.command)?)),
        TheoryKind::Convex => with!(ConvexTheory::<opc_core::Rational>::with_max_support(
            cfg.max_support
        )),
        TheoryKind::Semilattice => with!(SemilatticeTheory),
        TheoryKind::ProbGkat => with!(ProbGkatTheory::<opc_core::Rational>::with_max_support(
            atoms(&cfg, &cli.command)?,
            cfg.max_support
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = out.flush();
            eprintln!("opc: {}", render_error(&e, None));
            ExitCode::from(e.code())
        }
    }
}
