//! `relcr` command line tool.

mod check;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use relcr::acyclic::{gyo_join_tree, parse_join_tree, random_acyclic, validate_join_tree, JoinTree};
use relcr::cr::{cr_distinguishes, cr_run, CrOptions};
use relcr::game::{render_win, round_bound, GameSolver};
use relcr::gen::{rng, random_structure};
use relcr::homcount::{hom_acyclic, hom_bruteforce, hom_count};
use relcr::logic::{check_signature, check_wf, distinguishing_sentence, evaluate, parse_formula, to_sexp, Synthesizer, Var, DEFAULT_NODE_BUDGET};
use relcr::parse::{parse_signature, parse_structure, parse_structure_json, serialize_structure, serialize_structure_json};
use relcr::representations::{jtrep, Representation};
use relcr::structure::Side;
use relcr::{rcr_run, JointRun, Structure};

const TUP_NOTE: &str = "note: a vector that occurs in several relations is one tuple with a larger atomic type";
const IDS_NOTE: &str = "note: color ids are local to this run";

#[derive(Parser)]
#[command(name = "relcr", version, about = "Relational color refinement on finite structures")]
struct Cli {
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Accept elements that occur in no tuple by adding a unary relation
    /// holding every element.
    #[arg(long, global = true)]
    pad_universe: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a structure and print its size measures.
    Validate { file: PathBuf },
    /// Run RCR on one structure.
    Refine {
        file: PathBuf,
        /// Stop after this many rounds.
        #[arg(long)]
        rounds: Option<usize>,
        /// Print the per-tuple color trace as CSV.
        #[arg(long)]
        trace: bool,
        /// Print the color definitions as CSV.
        #[arg(long)]
        colors: bool,
    },
    /// Decide whether RCR, or CR on a graph representation, tells two
    /// structures apart.
    Distinguish {
        a: PathBuf,
        b: PathBuf,
        /// Run element-level CR on this representation instead.
        #[arg(long)]
        via: Option<Representation>,
    },
    /// Write a graph representation as DOT.
    Export {
        file: PathBuf,
        /// grep, vgrep, incidence, enriched-gaifman, enriched-incidence or jtrep.
        #[arg(long)]
        rep: String,
        /// Join tree for jtrep; computed by GYO when omitted.
        #[arg(long)]
        join_tree: Option<PathBuf>,
    },
    /// Compute a join tree, or report that the structure is cyclic.
    Gyo {
        file: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Count homomorphisms from C to A.
    Homcount {
        c: PathBuf,
        a: PathBuf,
        /// Use this join tree of C.
        #[arg(long, conflicts_with = "brute")]
        join_tree: Option<PathBuf>,
        /// Enumerate maps instead of using a join tree.
        #[arg(long)]
        brute: bool,
    },
    /// Solve the guarded counting game from the empty configuration.
    Game {
        a: PathBuf,
        b: PathBuf,
        /// Rounds to play; defaults to a bound after which nothing changes.
        #[arg(long)]
        rounds: Option<usize>,
        /// Nesting depth of the printed Spoiler strategy.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Print a sentence that holds in exactly one of A and B, or with
    /// `--tuple` the formula defining the color of a tuple of A.
    Synthesize {
        a: PathBuf,
        b: Option<PathBuf>,
        /// A fact of A such as `E(1,2)`.
        #[arg(long, conflicts_with = "b")]
        tuple: Option<String>,
        /// Round of the color for `--tuple`; defaults to the stable round.
        #[arg(long)]
        round: Option<usize>,
        /// Node budget for the formula DAG.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        /// Largest formula tree that is printed in full.
        #[arg(long, default_value_t = 100_000)]
        max_print: u64,
    },
    /// Evaluate a formula on a structure.
    Eval {
        formula: PathBuf,
        file: PathBuf,
        /// Values of free variables, as `x=elem`.
        #[arg(long = "assign", value_parser = parse_assignment)]
        assign: Vec<(String, String)>,
    },
    /// Generate a random structure.
    Gen {
        /// Symbols as `E/2,R/3`.
        #[arg(long, default_value = "E/2")]
        signature: String,
        #[arg(long, default_value_t = 10)]
        elements: usize,
        #[arg(long, default_value_t = 10)]
        facts: usize,
        /// Chance of repeating an element inside one fact.
        #[arg(long, default_value_t = 0.1)]
        repeat: f64,
        /// Generate a connected acyclic structure with at most this many tuples.
        #[arg(long)]
        acyclic: Option<usize>,
        /// Where to write the join tree of an acyclic structure.
        #[arg(long, requires = "acyclic")]
        join_tree_out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time vgrep construction plus CR on random structures; CSV `N,seconds`.
    Bench {
        /// `FROM..TO` doubling from FROM, or a comma separated list.
        #[arg(long, default_value = "1e3..1.6e4")]
        sizes: String,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the cross-oracle property suite on generated instances.
    Check {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for counterexample files.
        #[arg(long, default_value = "relcr-counterexamples")]
        out: PathBuf,
    },
}

fn parse_assignment(s: &str) -> Result<(String, String), String> {
    let (v, e) = s.split_once('=').ok_or_else(|| format!("expected VAR=ELEM, found `{s}`"))?;
    Ok((v.trim().to_string(), e.trim().to_string()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path, pad: bool) -> Result<Structure> {
    let src = read(path)?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        parse_structure_json(&src, pad)
    } else {
        parse_structure(&src, pad)
    };
    parsed.with_context(|| format!("in {}", path.display()))
}

fn load_join_tree(c: &Structure, path: &Path) -> Result<JoinTree> {
    let j = parse_join_tree(c, &read(path)?).with_context(|| format!("in {}", path.display()))?;
    validate_join_tree(c, &j).with_context(|| format!("{} is not a join tree", path.display()))?;
    Ok(j)
}

fn join_tree_or_gyo(c: &Structure, path: Option<&Path>) -> Result<JoinTree> {
    match path {
        Some(p) => load_join_tree(c, p),
        None => gyo_join_tree(c).context("structure is cyclic and has no join tree"),
    }
}

/// Parses `E(1,2)` against the elements of `a`.
fn parse_fact(a: &Structure, src: &str) -> Result<relcr::TupId> {
    let src = src.trim();
    let (rel, rest) = src.split_once('(').context("expected REL(elem, ...)")?;
    let args = rest.strip_suffix(')').context("expected a closing `)`")?;
    let rel_id = a.signature().lookup(rel.trim()).with_context(|| format!("unknown relation `{}`", rel.trim()))?;
    let elems = args
        .split(',')
        .map(|x| a.elem_by_name(x.trim()).with_context(|| format!("unknown element `{}`", x.trim())))
        .collect::<Result<Vec<_>>>()?;
    if !a.contains(rel_id, &elems) {
        bail!("{src} is not a fact of the structure");
    }
    Ok(a.tup_id(&elems).expect("facts are tuples"))
}

/// `1e3..1e5` doubles from the lower end; `1000,5000` is taken as is.
fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let num = |x: &str| -> Result<usize> {
        let v: f64 = x.trim().parse().with_context(|| format!("bad size `{x}`"))?;
        if v < 1.0 {
            bail!("sizes must be positive");
        }
        Ok(v as usize)
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let (mut n, hi) = (num(lo)?, num(hi)?);
        let mut out = Vec::new();
        while n <= hi {
            out.push(n);
            n *= 2;
        }
        Ok(out)
    } else {
        s.split(',').map(num).collect()
    }
}

fn print_json(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
}

fn run(cli: Cli) -> Result<ExitCode> {
    let pad = cli.pad_universe;
    match cli.command {
        Command::Validate { file } => {
            let a = load(&file, pad)?;
            let m = a.metrics();
            if cli.json {
                print_json(json!({ "ok": true, "metrics": m, "relation_sizes": a.relation_sizes() }));
            } else {
                println!("ok: {} tuples, {} elements, cohesion {}, max arity {}", m.size, m.universe, m.cohesion, m.arity);
                println!("{TUP_NOTE}");
            }
        }
        Command::Refine { file, rounds, trace, colors } => {
            let a = load(&file, pad)?;
            let run = rcr_run(&a, rounds);
            if trace {
                print!("{}", run.trace_csv(&a));
            } else if colors {
                print!("{}", run.interner.export(&a));
            } else if cli.json {
                let counts: Vec<usize> = (0..run.rounds()).map(|i| run.class_count(i)).collect();
                print_json(json!({ "tuples": a.size(), "class_counts": counts, "stable_round": run.stable_round }));
            } else {
                for i in 0..run.rounds() {
                    println!("round {i}: {} classes", run.class_count(i));
                }
                match run.stable_round {
                    Some(s) => println!("stable from round {s}"),
                    None => println!("round cap reached before stability"),
                }
                println!("{TUP_NOTE}");
            }
        }
        Command::Distinguish { a, b, via } => {
            let (a, b) = (load(&a, pad)?, load(&b, pad)?);
            match via {
                None => {
                    let joint = JointRun::new(&a, &b)?;
                    let d = joint.first_difference();
                    if cli.json {
                        print_json(json!({
                            "distinguished": d.is_some(),
                            "round": d.map(|d| d.round),
                            "witness": d.map(|d| json!({ "color": d.color.0, "count_a": d.count_a, "count_b": d.count_b })),
                        }));
                    } else {
                        match d {
                            Some(d) => {
                                println!("distinguished: round {}", d.round);
                                println!("color {} occurs {} times in A and {} times in B ({IDS_NOTE})", d.color.0, d.count_a, d.count_b);
                            }
                            None => println!("indistinguishable"),
                        }
                    }
                }
                Some(rep) => {
                    let round = cr_distinguishes(&rep.build(&a), &rep.build(&b))?;
                    if cli.json {
                        print_json(json!({ "distinguished": round.is_some(), "round": round }));
                    } else {
                        match round {
                            Some(r) => println!("distinguished: round {r}"),
                            None => println!("indistinguishable"),
                        }
                    }
                }
            }
        }
        Command::Export { file, rep, join_tree } => {
            let a = load(&file, pad)?;
            let g = if rep == "jtrep" {
                let j = join_tree_or_gyo(&a, join_tree.as_deref())?;
                jtrep(&a, &j)
            } else {
                rep.parse::<Representation>().map_err(anyhow::Error::msg)?.build(&a)
            };
            print!("{}", g.to_dot());
        }
        Command::Gyo { file, dot } => {
            let a = load(&file, pad)?;
            match gyo_join_tree(&a) {
                Some(j) if dot => print!("{}", j.to_dot(&a)),
                Some(j) if cli.json => {
                    let edges: Vec<(u32, u32)> = j.edges().iter().map(|&(x, y)| (x.0, y.0)).collect();
                    print_json(json!({ "acyclic": true, "edges": edges }));
                }
                Some(j) => print!("{}", j.to_text(&a)),
                None if cli.json => print_json(json!({ "acyclic": false })),
                None => println!("cyclic"),
            }
        }
        Command::Homcount { c, a, join_tree, brute } => {
            let (c, a) = (load(&c, pad)?, load(&a, pad)?);
            let n = if brute {
                hom_bruteforce(&c, &a)?
            } else if let Some(p) = join_tree {
                hom_acyclic(&c, &load_join_tree(&c, &p)?, &a)?
            } else {
                hom_count(&c, &a)?
            };
            if cli.json {
                print_json(json!({ "hom": n.to_string() }));
            } else {
                println!("{n}");
            }
        }
        Command::Game { a, b, rounds, depth } => {
            let (a, b) = (load(&a, pad)?, load(&b, pad)?);
            if a.signature() != b.signature() {
                bail!("structures have different signatures");
            }
            let rounds = rounds.unwrap_or_else(|| round_bound(&a, &b));
            let mut solver = GameSolver::new(&a, &b);
            let duplicator = solver.duplicator_wins(&[], &[], rounds);
            if cli.json {
                print_json(json!({ "rounds": rounds, "winner": if duplicator { "duplicator" } else { "spoiler" } }));
            } else if duplicator {
                println!("winner: duplicator ({rounds} rounds)");
            } else {
                println!("winner: spoiler ({rounds} rounds)");
                let win = solver.explain(&[], &[], rounds, depth).expect("spoiler wins");
                let mut out = String::new();
                render_win(&a, &b, &win, 0, &mut out);
                print!("{out}");
            }
        }
        Command::Synthesize { a, b, tuple, round, budget, max_print } => {
            let a = load(&a, pad)?;
            let (formula, note) = match (b, tuple) {
                (Some(b), _) => {
                    let b = load(&b, pad)?;
                    let joint = JointRun::new(&a, &b)?;
                    let s = distinguishing_sentence(&joint, budget)?;
                    let side = if s.holds_in == Side::Left { "A" } else { "B" };
                    (s.formula, format!("holds in {side}, round {}, {} distinct nodes", s.round, s.dag_size))
                }
                (None, Some(t)) => {
                    let t = parse_fact(&a, &t)?;
                    let run = rcr_run(&a, None);
                    let i = round.unwrap_or(run.rounds() - 1).min(run.rounds() - 1);
                    let c = run.color(i, t);
                    let mut s = Synthesizer::new(&run, a.signature()).with_budget(budget);
                    let f = s.color_formula(c)?;
                    let vars: Vec<String> = s.free_vars(run.interner.info(c).arity).iter().map(|v| v.to_string()).collect();
                    (f, format!("color of round {i}, free variables {}", vars.join(" ")))
                }
                (None, None) => bail!("give a second structure or --tuple"),
            };
            let text = to_sexp(&formula, max_print);
            if cli.json {
                print_json(json!({ "formula": text, "note": note, "dag_size": relcr::logic::dag_size(&formula) }));
            } else {
                eprintln!("{note}");
                match text {
                    Some(t) => println!("{t}"),
                    None => bail!("formula tree exceeds {max_print} nodes; raise --max-print"),
                }
            }
        }
        Command::Eval { formula, file, assign } => {
            let a = load(&file, pad)?;
            let f = parse_formula(&read(&formula)?).with_context(|| format!("in {}", formula.display()))?;
            check_wf(&f)?;
            check_signature(&f, a.signature())?;
            let mut env = std::collections::HashMap::new();
            for (v, e) in assign {
                let x = a.elem_by_name(&e).with_context(|| format!("unknown element `{e}`"))?;
                env.insert(Var::new(&v), x);
            }
            let value = evaluate(&a, &f, &env)?;
            if cli.json {
                print_json(json!({ "value": value }));
            } else {
                println!("{value}");
            }
        }
        Command::Gen { signature, elements, facts, repeat, acyclic, join_tree_out, seed } => {
            let sig = parse_signature(&signature).context("in --signature")?;
            if !(0.0..=1.0).contains(&repeat) {
                bail!("--repeat must lie in [0, 1]");
            }
            let mut r = rng(seed);
            let a = match acyclic {
                Some(nodes) => {
                    let (c, j) = random_acyclic(&sig, nodes.max(1), &mut r);
                    if let Some(p) = join_tree_out {
                        fs::write(&p, j.to_text(&c)).with_context(|| format!("cannot write {}", p.display()))?;
                    }
                    c
                }
                None => random_structure(&sig, elements, facts, repeat, &mut r),
            };
            if cli.json {
                println!("{}", serialize_structure_json(&a));
            } else {
                print!("{}", serialize_structure(&a));
            }
        }
        Command::Bench { sizes, reps, seed } => {
            let sig = parse_signature("E/2, T/3, P/1").expect("valid");
            println!("N,seconds");
            for n in parse_sizes(&sizes)? {
                let a = random_structure(&sig, n, n, 0.1, &mut rng(seed ^ n as u64));
                let mut best = f64::MAX;
                for _ in 0..reps.max(1) {
                    let t = Instant::now();
                    let run = cr_run(&Representation::Vgrep.build(&a), CrOptions::default());
                    std::hint::black_box(run.final_colors().len());
                    best = best.min(t.elapsed().as_secs_f64());
                }
                println!("{n},{best:.6}");
            }
        }
        Command::Check { cases, seed, out } => {
            let report = check::run_suite(cases, seed, &out)?;
            let failed = report.iter().any(|r| !r.failures.is_empty());
            if cli.json {
                print_json(serde_json::to_value(&report).expect("serializable"));
            } else {
                for r in &report {
                    if r.failures.is_empty() {
                        println!("PASS {} seed {} cases {}", r.name, r.seed, r.cases);
                    } else {
                        println!("FAIL {} seed {} cases {} failures {}", r.name, r.seed, r.cases, r.failures.len());
                        for f in &r.failures {
                            println!("  case {}: {} [{}]", f.case, f.message, f.files.join(", "));
                        }
                    }
                }
            }
            if failed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
