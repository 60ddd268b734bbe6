//! Command-line driver: bind a signature, a term, rule files, and a strategy
//! expression into one reproducible run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use termstrat::dsl::{parse_strategy, Elaborator, StrategyExpr};
use termstrat::effects::monoid_registry;
use termstrat::rules::RuleBase;
use termstrat::schemes::Flavor;
use termstrat::{load_signature, parse_term, Eff, EffectKind, Monoid, Signature, Value};

/// Deep traversals recurse once per term level; run everything on a thread
/// with room for terms at least 100k levels deep. Fall back to smaller
/// stacks where the address space is constrained.
const STACK_SIZES: [usize; 3] = [3 << 30, 1 << 30, 256 << 20];

#[derive(Parser)]
#[command(name = "termstrat", version, about = "Generic term traversal with first-class strategies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply a strategy to a term and print the result
    Apply(RunArgs),
    /// Validate signature, term, rules, and strategy without running
    Check(RunArgs),
    /// Run the bundled demos and self-check their outputs
    Demo {
        /// Directory with the bundled fixtures
        #[arg(long, default_value = "demo")]
        dir: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Signature file (sorts and constructors)
    #[arg(long)]
    sig: PathBuf,
    /// Subject term file
    #[arg(long)]
    term: PathBuf,
    /// Rule file; repeatable
    #[arg(long)]
    rules: Vec<PathBuf>,
    /// Strategy expression
    #[arg(long, conflicts_with = "strategy_file")]
    strategy: Option<String>,
    /// Read the strategy expression from a file
    #[arg(long)]
    strategy_file: Option<PathBuf>,
    /// tp rewrites the term; tu computes a value
    #[arg(long, value_enum, default_value_t = FlavorArg::Tp)]
    flavor: FlavorArg,
    #[arg(long, value_enum, default_value_t = EffectArg::Partial)]
    effect: EffectArg,
    /// Monoid for combining tu results (unit, int_sum, list_concat, str_concat)
    #[arg(long)]
    monoid: Option<String>,
    /// Write the output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    format: FormatArg,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum FlavorArg {
    Tp,
    Tu,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum EffectArg {
    Total,
    Partial,
    Nondet,
}

impl EffectArg {
    fn kind(self) -> EffectKind {
        match self {
            EffectArg::Total => EffectKind::Total,
            EffectArg::Partial => EffectKind::Partial,
            EffectArg::Nondet => EffectKind::Nondet,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum FormatArg {
    /// Pick from flavor and effect
    Auto,
    /// Canonical term s-expression (tp runs)
    Term,
    /// Value literal (tu runs)
    Value,
    /// One result per line (nondet runs)
    List,
}

fn main() -> ExitCode {
    let mut cli = Some(Cli::parse());
    // strategies recurse with the term; give them a deep stack
    for size in STACK_SIZES {
        let args = cli.take().unwrap();
        match std::thread::Builder::new().stack_size(size).spawn(move || dispatch(args)) {
            Ok(handle) => {
                return match handle.join() {
                    Ok(code) => code,
                    Err(_) => ExitCode::from(2),
                }
            }
            Err(_) => cli = Some(Cli::parse()),
        }
    }
    eprintln!("error: could not spawn the worker thread");
    ExitCode::from(2)
}

fn dispatch(cli: Cli) -> ExitCode {
    let result = match cli.cmd {
        Cmd::Apply(args) => run_apply(&args),
        Cmd::Check(args) => run_check(&args),
        Cmd::Demo { dir } => return run_demo(&dir),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Everything loaded and validated, ready to run.
struct Prepared {
    sig: Signature,
    term: termstrat::Term,
    strat: termstrat::schemes::Strat<Value>,
    kind: EffectKind,
    flavor: FlavorArg,
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn prepare(args: &RunArgs) -> Result<Prepared, String> {
    let kind = args.effect.kind();
    match args.format {
        FormatArg::Term if args.flavor != FlavorArg::Tp => {
            return Err("--format term needs --flavor tp".into())
        }
        FormatArg::Value if args.flavor != FlavorArg::Tu => {
            return Err("--format value needs --flavor tu".into())
        }
        FormatArg::List if kind != EffectKind::Nondet => {
            return Err("--format list needs --effect nondet".into())
        }
        _ => {}
    }
    let sig = load_signature(&read(&args.sig)?).map_err(|e| e.to_string())?;
    let term = parse_term(&read(&args.term)?, &sig).map_err(|e| e.to_string())?;
    sig.check_term(&term).map_err(|e| e.to_string())?;
    let mut rules = RuleBase::default();
    for path in &args.rules {
        rules.extend(&read(path)?, &sig).map_err(|e| e.to_string())?;
    }
    let text = match (&args.strategy, &args.strategy_file) {
        (Some(s), None) => s.clone(),
        (None, Some(p)) => read(p)?,
        _ => return Err("pass exactly one of --strategy or --strategy-file".into()),
    };
    let expr = parse_strategy(&text).map_err(|e| e.to_string())?;
    let monoid = match &args.monoid {
        Some(name) => monoid_registry(name).map_err(|e| e.to_string())?,
        None => monoid_registry("unit").unwrap(),
    };
    let strat = elaborate(&sig, &rules, kind, &monoid, &expr, args.flavor)?;
    Ok(Prepared { sig, term, strat, kind, flavor: args.flavor })
}

fn elaborate(
    sig: &Signature,
    rules: &RuleBase,
    kind: EffectKind,
    monoid: &Monoid<Value>,
    expr: &StrategyExpr,
    flavor: FlavorArg,
) -> Result<termstrat::schemes::Strat<Value>, String> {
    let el = Elaborator::new(sig.clone(), rules.clone(), kind, monoid.clone());
    let fl = match flavor {
        FlavorArg::Tp => Flavor::Tp,
        FlavorArg::Tu => Flavor::Tu(monoid.clone()),
    };
    el.elaborate(expr, &fl).map_err(|e| e.to_string())
}

fn run_check(args: &RunArgs) -> Result<ExitCode, String> {
    prepare(args)?;
    Ok(ExitCode::SUCCESS)
}

fn run_apply(args: &RunArgs) -> Result<ExitCode, String> {
    let p = prepare(args)?;
    let (output, code) = execute(&p)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, output).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => print!("{output}"),
    }
    Ok(ExitCode::from(code))
}

/// Run the strategy; render per effect kind. Partial failure is exit 1.
fn execute(p: &Prepared) -> Result<(String, u8), String> {
    let rendered: Eff<String> = match p.flavor {
        FlavorArg::Tp => {
            let tp = p.strat.as_tp().map_err(|e| e.to_string())?;
            let eff = tp.apply(&p.term).map_err(|e| e.to_string())?;
            // every rewrite result stays well-sorted; certify the outputs
            for t in eff.clone().results() {
                p.sig.check_term(&t).map_err(|e| e.to_string())?;
            }
            eff.try_map(|t| Ok(t.to_string())).map_err(|e| e.to_string())?
        }
        FlavorArg::Tu => {
            let tu = p.strat.as_tu().map_err(|e| e.to_string())?;
            let eff = tu.apply(&p.term).map_err(|e| e.to_string())?;
            eff.try_map(|v| Ok(v.to_string())).map_err(|e| e.to_string())?
        }
    };
    let mut out = String::new();
    let code = match rendered {
        Eff::Total(s) => {
            writeln!(out, "{s}").unwrap();
            0
        }
        Eff::Partial(Some(s)) => {
            writeln!(out, "Just {s}").unwrap();
            0
        }
        Eff::Partial(None) => {
            writeln!(out, "Nothing").unwrap();
            1
        }
        Eff::Nondet(ss) => {
            for s in ss {
                writeln!(out, "{s}").unwrap();
            }
            0
        }
    };
    let _ = p.kind;
    Ok((out, code))
}

// ---------------------------------------------------------------------------
// Bundled demos

struct Demo {
    name: &'static str,
    args: RunArgs,
    expect: &'static str,
    expect_code: u8,
}

fn demo_args(
    dir: &Path,
    sig: &str,
    term: &str,
    rules: &str,
    strategy: &str,
    flavor: FlavorArg,
    monoid: Option<&str>,
) -> RunArgs {
    RunArgs {
        sig: dir.join(sig),
        term: dir.join(term),
        rules: vec![dir.join(rules)],
        strategy: Some(strategy.to_string()),
        strategy_file: None,
        flavor,
        effect: EffectArg::Partial,
        monoid: monoid.map(str::to_string),
        out: None,
        format: FormatArg::Auto,
    }
}

fn run_demo(dir: &Path) -> ExitCode {
    let demos = vec![
        Demo {
            name: "test42",
            args: demo_args(
                dir,
                "path-sig.sexp",
                "term1.sexp",
                "path-rules.sexp",
                "belowlist([rule p1, rule p2], rule sortb2int)",
                FlavorArg::Tu,
                Some("unit"),
            ),
            expect: "Just 42\n",
            expect_code: 0,
        },
        Demo {
            name: "test42-no-chain",
            args: demo_args(
                dir,
                "path-sig.sexp",
                "term-nochain.sexp",
                "path-rules.sexp",
                "belowlist([rule p1, rule p2], rule sortb2int)",
                FlavorArg::Tu,
                Some("unit"),
            ),
            expect: "Nothing\n",
            expect_code: 1,
        },
        Demo {
            name: "negate-all-booleans",
            args: demo_args(
                dir,
                "expr-sig.sexp",
                "expr-term.sexp",
                "expr-rules.sexp",
                "full_td(rule negate_bool)",
                FlavorArg::Tp,
                None,
            ),
            expect: "Just (Add (Add (Lit 1) (Flag false)) (Add (Lit 2) (Lit 3)))\n",
            expect_code: 0,
        },
        Demo {
            name: "collect-ints",
            args: demo_args(
                dir,
                "expr-sig.sexp",
                "expr-term.sexp",
                "expr-rules.sexp",
                "full_td(choice(listof(adhoc(fail, return_int)), skip))",
                FlavorArg::Tu,
                Some("list_concat"),
            ),
            expect: "Just [1,2,3]\n",
            expect_code: 0,
        },
        Demo {
            name: "stop-vs-full-stop",
            args: demo_args(
                dir,
                "expr-sig.sexp",
                "expr-term.sexp",
                "expr-rules.sexp",
                "stop_td(adhoc(fail, swap))",
                FlavorArg::Tp,
                None,
            ),
            expect: "Just (Add (Add (Lit 2) (Lit 3)) (Add (Lit 1) (Flag true)))\n",
            expect_code: 0,
        },
        Demo {
            name: "stop-vs-full-full",
            args: demo_args(
                dir,
                "expr-sig.sexp",
                "expr-term.sexp",
                "expr-rules.sexp",
                "full_td(choice(adhoc(fail, swap), id))",
                FlavorArg::Tp,
                None,
            ),
            expect: "Just (Add (Add (Lit 3) (Lit 2)) (Add (Flag true) (Lit 1)))\n",
            expect_code: 0,
        },
        Demo {
            name: "propagate-depth",
            args: demo_args(
                dir,
                "expr-sig.sexp",
                "expr-term.sexp",
                "expr-rules.sexp",
                "full_tdpe(listof(env), add(env, 1), 1)",
                FlavorArg::Tu,
                Some("list_concat"),
            ),
            expect: "Just [1,2,3,4,3,4,2,3,4,3,4]\n",
            expect_code: 0,
        },
    ];

    let mut failed = false;
    for demo in demos {
        let outcome = prepare(&demo.args).and_then(|p| execute(&p));
        match outcome {
            Ok((out, code)) if out == demo.expect && code == demo.expect_code => {
                println!("demo {}: ok ({})", demo.name, out.trim_end().replace('\n', " | "));
            }
            Ok((out, _)) => {
                failed = true;
                println!("demo {}: MISMATCH", demo.name);
                println!("  expected: {:?}", demo.expect);
                println!("  got:      {out:?}");
            }
            Err(msg) => {
                failed = true;
                println!("demo {}: ERROR {msg}", demo.name);
            }
        }
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
