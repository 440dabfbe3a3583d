use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use parsikern::bounds::{certified_lower_bound, greedy_leg_disjoint, verify_certificate};
use parsikern::exact::{
    dmp_exact_with_cap, dtbr_hitting_set_with_cap, dtbr_partition_oracle_with_cap, incompatible_quartets,
    is_agreement_forest, Caps, StateBound,
};
use parsikern::fitch::parsimony_score;
use parsikern::generate::gen_random_pair;
use parsikern::io::{parse_character_table, parse_newick_many, read_certificate, write_certificate, write_newick};
use parsikern::kernelize::fully_reduce;
use parsikern::treecore::{Edge, Tree};

#[derive(Parser)]
#[command(name = "parsikern", version, about = "Parsimony distance kernels, exact oracles and certified bounds")]
struct Cli {
    /// Emit machine-readable JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for exact enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DtbrMethod {
    Hitting,
    Partition,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random tree and a copy perturbed by TBR moves.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        moves: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Parsimony score of a character on both trees.
    Score {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        characters: PathBuf,
        /// Declared number of states of the table.
        #[arg(long)]
        t: Option<usize>,
    },
    /// Exact d_MP^t by enumerating characters.
    Dmp {
        #[arg(short, long)]
        input: PathBuf,
        /// Number of states: 2..64 or "inf".
        #[arg(long, default_value = "2", value_parser = parse_state_bound)]
        t: StateBound,
        /// Largest number of taxa accepted.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Exact d_TBR.
    Dtbr {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "hitting")]
        method: DtbrMethod,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Apply cherry and chain reductions to a fixed point.
    Reduce {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// List incompatible quartets, or the greedy leg-disjoint selection.
    Quartets {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        leg_disjoint: bool,
    },
    /// Certify a lower bound on d_MP^2 and an upper bound on d_TBR.
    Certify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Recorded in the certificate metadata.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a certificate against the input trees.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Check whether a partition of the taxa is an agreement forest.
    CheckAf {
        #[arg(short, long)]
        input: PathBuf,
        /// One block per line, taxa separated by commas.
        #[arg(long)]
        partition: PathBuf,
    },
}

fn parse_state_bound(s: &str) -> std::result::Result<StateBound, String> {
    match s.parse::<StateBound>() {
        Ok(StateBound::Finite(t)) if !(2..=64).contains(&t) => Err("expected 2..64 or inf".into()),
        other => other.map_err(|e| e.to_string()),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes `text` to `path` if given; otherwise returns it for stdout.
fn emit(path: Option<&Path>, text: String) -> Result<String> {
    match path {
        Some(p) => write_file(p, &text).map(|_| String::new()),
        None => Ok(text),
    }
}

fn read_pair(path: &Path) -> Result<(Tree, Tree)> {
    let trees = parse_newick_many(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let [a, b]: [Tree; 2] = trees
        .try_into()
        .map_err(|t: Vec<Tree>| anyhow::anyhow!("{} holds {} trees, expected 2", path.display(), t.len()))?;
    if !a.same_taxa(&b) {
        bail!("the two trees in {} are not on the same taxa", path.display());
    }
    Ok((a, b))
}

fn edge_split(tree: &Tree, e: Edge) -> Vec<String> {
    let part = parsikern::exact::cut_to_partition(tree, &[e]);
    let side = part.into_iter().find(|b| !b.contains(&0)).unwrap_or_default();
    side.into_iter().map(|x| tree.taxon(x).to_string()).collect()
}

/// Outcome of a command: text for stdout, JSON, and whether it verified.
struct Output {
    text: String,
    json: serde_json::Value,
    ok: bool,
}

impl Output {
    fn new(text: String, json: serde_json::Value) -> Self {
        Output { text, json, ok: true }
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let caps = Caps::default();
    Ok(match &cli.command {
        Command::Gen { n, moves, seed, output } => {
            let (a, b) = gen_random_pair(*n, *moves, *seed)?;
            let text = format!("{}\n{}\n", write_newick(&a), write_newick(&b));
            let json = json!({"t1": write_newick(&a), "t2": write_newick(&b)});
            Output::new(emit(output.as_deref(), text)?, json)
        }
        Command::Score { input, characters, t } => {
            let (a, b) = read_pair(input)?;
            let f = parse_character_table(&read(characters)?, *t)?.to_character()?;
            let (l1, l2) = (parsimony_score(&a, &f)?, parsimony_score(&b, &f)?);
            Output::new(format!("l(T1)={l1} l(T2)={l2}\n"), json!({"t1": l1, "t2": l2}))
        }
        Command::Dmp { input, t, cap } => {
            let (a, b) = read_pair(input)?;
            let d = dmp_exact_with_cap(&a, &b, *t, *cap)?;
            Output::new(format!("{d}\n"), json!({"t": t.to_string(), "dmp": d}))
        }
        Command::Dtbr { input, method, cap } => {
            let (a, b) = read_pair(input)?;
            let d = match method {
                DtbrMethod::Hitting => dtbr_hitting_set_with_cap(&a, &b, cap.unwrap_or(caps.hitting_set))?.0,
                DtbrMethod::Partition => dtbr_partition_oracle_with_cap(&a, &b, cap.unwrap_or(caps.partition))?,
            };
            Output::new(format!("{d}\n"), json!({"dtbr": d}))
        }
        Command::Reduce { input, output, trace } => {
            let (a, b) = read_pair(input)?;
            let (x, y, steps) = fully_reduce(&a, &b)?;
            if let Some(p) = trace {
                write_file(p, &(serde_json::to_string_pretty(&steps)? + "\n"))?;
            }
            info!("reduced {} taxa to {} in {} steps", steps.initial_leaves, steps.final_leaves, steps.steps.len());
            let text = emit(output.as_deref(), format!("{}\n{}\n", write_newick(&x), write_newick(&y)))?;
            Output::new(
                text,
                json!({"initial_leaves": steps.initial_leaves, "final_leaves": steps.final_leaves, "steps": steps.steps.len()}),
            )
        }
        Command::Quartets { input, leg_disjoint } => {
            let (a, b) = read_pair(input)?;
            if *leg_disjoint {
                let g = greedy_leg_disjoint(&a, &b)?;
                let mut text = String::new();
                let quartets: Vec<String> = g.quartets.iter().map(|q| q.t1.display(q.quartet, &a)).collect();
                let splits: Vec<Vec<String>> = g.edges.iter().map(|&e| edge_split(&a, e)).collect();
                for q in &quartets {
                    text.push_str(&format!("quartet\t{q}\n"));
                }
                for s in &splits {
                    text.push_str(&format!("cut\t{}\n", s.join(",")));
                }
                text.push_str(&format!("|Q|={} |Q'|={} |E'|={}\n", g.incompatible, quartets.len(), splits.len()));
                Output::new(
                    text,
                    json!({"incompatible": g.incompatible, "quartets": quartets, "cuts": splits, "steps": g.steps}),
                )
            } else {
                let q = incompatible_quartets(&a, &b)?;
                let rows: Vec<(String, String)> =
                    q.iter().map(|x| (x.t1.display(x.quartet, &a), x.t2.display(x.quartet, &b))).collect();
                let text = rows.iter().map(|(x, y)| format!("{x}\t{y}\n")).collect();
                let json = json!(rows.iter().map(|(x, y)| json!({"t1": x, "t2": y})).collect::<Vec<_>>());
                Output::new(text, json)
            }
        }
        Command::Certify { input, output, seed } => {
            let (a, b) = read_pair(input)?;
            let c = certified_lower_bound(&a, &b, *seed)?;
            let doc = c.document;
            info!("lower={} upper={}", doc.claimed_bound, doc.upper_bound.value);
            Output::new(
                emit(output.as_deref(), write_certificate(&doc))?,
                json!({"lower": doc.claimed_bound, "upper": doc.upper_bound.value, "quartets": doc.quartets.len()}),
            )
        }
        Command::Verify { input, cert } => {
            let (a, b) = read_pair(input)?;
            let doc = read_certificate(&read(cert)?)?;
            let report = verify_certificate(&a, &b, &doc)?;
            let mut text: String = report
                .checks
                .iter()
                .map(|c| format!("{}\t{}\t{}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
                .collect();
            text.push_str(if report.accepted() { "accepted\n" } else { "rejected\n" });
            let ok = report.accepted();
            Output { text, json: json!({"accepted": ok, "checks": report.checks}), ok }
        }
        Command::CheckAf { input, partition } => {
            let (a, b) = read_pair(input)?;
            let mut blocks = Vec::new();
            for (i, line) in read(partition)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let names: Vec<&str> = line.split(',').map(str::trim).collect();
                blocks.push(a.taxon_ids(&names).with_context(|| format!("partition line {}", i + 1))?);
            }
            let violation = is_agreement_forest(&a, &b, &blocks)?;
            let ok = violation.is_none();
            let text = match &violation {
                None => "agreement forest\n".to_string(),
                Some(v) => format!("not an agreement forest: {v}\n"),
            };
            Output { text, json: json!({"agreement_forest": ok, "violation": violation}), ok }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.json);
            } else {
                print!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
