//! Command-line front end. Every command returns an exit code: 0 when
//! everything checked out, 2 when unresolved candidates remain, 1 on error.
//!
//! Results go to `--out` as JSON lines with a `schema` field; a one-line run
//! manifest is appended to `<out>.manifest.jsonl` next to it.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::{Num, Pow};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::eliminate::{
    bootstrap, eliminate, eliminate_exhaust, eliminate_lattice_at, eliminate_logtest, verify_certificate,
    CannotEliminate, Certificate, EliminationConfig,
};
use crate::families::{recognize, sweep, FamilyId, SweepBox};
use crate::model::{enumerate_solutions, matches_theorem1, theorem1_rows, CaseTag, Instance, SolutionSet};
use crate::search::{
    run_search, run_sharded, CandidateRecord, Disposition, RunControl, RunStatus, SearchConfig, SearchError,
    SearchOutcome, Shard,
};

/// Overrides the default working precision (decimal digits).
pub const PRECISION_ENV: &str = "PILLAI_PRECISION";

const DEFAULT_BOUND: u64 = 800_000_000_000_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed config {path}, line {line}: {detail}")]
    Config { path: String, line: usize, detail: String },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("i/o error on {path}: {detail}")]
    Io { path: String, detail: String },
}

fn io_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "pillai", version, about = "Solution sets of (-1)^u r a^x + (-1)^v s b^y = c")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Lattice,
    Bootstrap,
    Logtest,
    Exhaust,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every pair of the nine known sets and print the signs used.
    #[command(name = "verify-theorem1")]
    VerifyTheorem1 {
        #[arg(long)]
        json: bool,
        /// One set per line instead of the built-in list.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Generate family members inside a box.
    Families {
        /// Family id (62..69, 10a) or `all`.
        #[arg(long, default_value = "all")]
        family: String,
        /// `base=N,exp=N[,value=N]`.
        #[arg(long = "box", default_value = "base=10,exp=10,value=10000")]
        bx: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a case search.
    Search {
        #[arg(long)]
        case: Option<String>,
        /// Flat `key=value` file; flags win over it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Only this `residue/modulus` shard.
        #[arg(long)]
        shard: Option<String>,
        #[arg(long, conflicts_with = "restart")]
        resume: bool,
        #[arg(long)]
        restart: bool,
        /// Split the run into this many shards on worker threads.
        #[arg(long)]
        jobs: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        base_max: Option<u64>,
        #[arg(long)]
        bound: Option<String>,
        #[arg(long)]
        sigma_cap: Option<String>,
        #[arg(long)]
        precision: Option<u32>,
        /// Stop after this many outer values, leaving the checkpoint behind.
        #[arg(long, hide = true)]
        stop_after: Option<usize>,
    },
    /// Prove a set has no further solutions.
    Eliminate {
        /// `a,b,c,r,s` or a full set `(a,b,c,r,s; x1,y1,...)`.
        #[arg(long)]
        instance: String,
        /// Bootstrap anchor `x,y`; defaults to the largest known solution.
        #[arg(long)]
        anchor: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long)]
        bound: Option<String>,
        /// Known solutions are searched for up to these exponents when only
        /// an instance is given; also the range of the log test and scan.
        #[arg(long, default_value_t = 64)]
        xmax: u64,
        #[arg(long, default_value_t = 64)]
        ymax: u64,
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify every certificate and match in a JSON-lines file.
    Certcheck {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// List all solutions in a box.
    Enumerate {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        xmax: u64,
        #[arg(long)]
        ymax: u64,
        #[arg(long)]
        json: bool,
    },
    /// Merge shard outputs into one file ordered as a single run would be.
    Merge {
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// One line of `<out>.manifest.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub version: String,
    pub inputs: Vec<String>,
    pub output: String,
    /// sha256 of the output file.
    pub digest: String,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

struct Ctx {
    argv: Vec<String>,
    started: u128,
}

impl Ctx {
    /// Writes `lines` to `out` atomically and appends the manifest.
    fn publish(&self, out: &Path, lines: &str, config: serde_json::Value, inputs: &[PathBuf]) -> Result<(), CliError> {
        let tmp = out.with_extension("partial");
        fs::write(&tmp, lines).map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, out).map_err(|e| io_err(out, e))?;
        let manifest = RunManifest {
            schema: 1,
            command: self.argv.clone(),
            config,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            output: out.display().to_string(),
            digest: hex::encode(Sha256::digest(lines.as_bytes())),
        };
        let mpath = PathBuf::from(format!("{}.manifest.jsonl", out.display()));
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&mpath)
            .map_err(|e| io_err(&mpath, e))?;
        let line = serde_json::to_string(&manifest).expect("manifest serializes");
        writeln!(f, "{line}").map_err(|e| io_err(&mpath, e))
    }
}

/// Parses `123`, `8e14` or `10^22`.
pub fn parse_natural(s: &str) -> Result<BigUint, CliError> {
    let bad = || usage(format!("{s:?} is not a natural number"));
    let s = s.trim().replace('_', "");
    let split = s.split_once('e').or_else(|| s.split_once('^'));
    match split {
        Some((m, e)) => {
            let m = BigUint::from_str_radix(m, 10).map_err(|_| bad())?;
            let e: u32 = e.parse().map_err(|_| bad())?;
            let base = if s.contains('e') { BigUint::from(10u32) } else { m.clone() };
            let p: BigUint = Pow::pow(&base, e);
            Ok(if s.contains('e') { m * p } else { p })
        }
        None => BigUint::from_str_radix(&s, 10).map_err(|_| bad()),
    }
}

fn parse_pair(s: &str) -> Result<(u64, u64), CliError> {
    let bad = || usage(format!("{s:?} is not a pair x,y"));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

/// `a,b,c,r,s`.
pub fn parse_instance(s: &str) -> Result<Instance, CliError> {
    let parts: Vec<BigUint> = s
        .split(',')
        .map(|p| BigUint::from_str(p.trim()).map_err(|_| usage(format!("bad instance {s:?}"))))
        .collect::<Result<_, _>>()?;
    let [a, b, c, r, s]: [BigUint; 5] = parts
        .try_into()
        .map_err(|_| usage(format!("instance {s:?} needs five numbers a,b,c,r,s")))?;
    Instance::new(a, b, c, r, s).map_err(|e| usage(e.to_string()))
}

fn default_precision() -> Result<u32, CliError> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{PRECISION_ENV}={v:?} is not a digit count"))),
        Err(_) => Ok(50),
    }
}

/// Reads a flat `key=value` file; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, (usize, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |detail: String| CliError::Config {
            path: path.display().to_string(),
            line: i + 1,
            detail,
        };
        let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
        if out.insert(k.trim().to_string(), (i + 1, v.trim().to_string())).is_some() {
            return Err(err(format!("key {:?} given twice", k.trim())));
        }
    }
    Ok(out)
}

/// Everything `search` needs once config file and flags are combined.
struct SearchPlan {
    cfg: SearchConfig,
    jobs: u64,
    out: Option<PathBuf>,
}

#[allow(clippy::too_many_arguments)]
fn plan_search(
    case: Option<String>,
    config: Option<&Path>,
    shard: Option<String>,
    jobs: Option<u64>,
    out: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    base_max: Option<u64>,
    bound: Option<String>,
    sigma_cap: Option<String>,
    precision: Option<u32>,
) -> Result<SearchPlan, CliError> {
    let file = match config {
        Some(p) => read_config(p)?,
        None => BTreeMap::new(),
    };
    let cfg_err = |line: usize, detail: String| CliError::Config {
        path: config.map(|p| p.display().to_string()).unwrap_or_default(),
        line,
        detail,
    };
    let get = |key: &str| file.get(key).map(|(l, v)| (*l, v.clone()));
    for (k, (line, _)) in &file {
        const KNOWN: [&str; 14] = [
            "case", "base_max", "bound", "sigma_cap", "signs", "shard", "jobs", "out", "checkpoint", "precision",
            "trial_bound", "rho_iterations", "max_bits", "max_rounds",
        ];
        if !KNOWN.contains(&k.as_str()) {
            return Err(cfg_err(*line, format!("unknown key {k:?}")));
        }
    }
    fn num<T: FromStr>(v: &str) -> Result<T, String> {
        v.parse().map_err(|_| format!("{v:?} is not a number"))
    }

    let case = match case.or_else(|| get("case").map(|(_, v)| v)) {
        Some(c) => CaseTag::from_str(&c).map_err(|e| usage(e.to_string()))?,
        None => return Err(usage("search needs --case or a case= line in the config")),
    };
    let mut cfg = SearchConfig::desk(case, 60);
    cfg.precision = default_precision()?;
    if let Some((l, v)) = get("base_max") {
        cfg.base_max = num(&v).map_err(|e| cfg_err(l, e))?;
    }
    if let Some((l, v)) = get("bound") {
        cfg.bound = parse_natural(&v).map_err(|e| cfg_err(l, e.to_string()))?;
    }
    if let Some((l, v)) = get("sigma_cap") {
        cfg.sigma_cap = parse_natural(&v).map_err(|e| cfg_err(l, e.to_string()))?;
    }
    if let Some((l, v)) = get("signs") {
        cfg.signs = v
            .split(',')
            .map(|s| num::<u8>(s.trim()))
            .collect::<Result<_, _>>()
            .map_err(|e| cfg_err(l, e))?;
    }
    if let Some((l, v)) = get("shard") {
        cfg.shard = v.parse().map_err(|e: SearchError| cfg_err(l, e.to_string()))?;
    }
    if let Some((l, v)) = get("precision") {
        cfg.precision = num(&v).map_err(|e| cfg_err(l, e))?;
    }
    if let Some((l, v)) = get("trial_bound") {
        cfg.effort.factor.trial_bound = num(&v).map_err(|e| cfg_err(l, e))?;
    }
    if let Some((l, v)) = get("rho_iterations") {
        cfg.effort.factor.rho_iterations = num(&v).map_err(|e| cfg_err(l, e))?;
    }
    if let Some((l, v)) = get("max_bits") {
        cfg.effort.max_bits = num(&v).map_err(|e| cfg_err(l, e))?;
    }
    if let Some((l, v)) = get("max_rounds") {
        cfg.effort.max_rounds = num(&v).map_err(|e| cfg_err(l, e))?;
    }
    cfg.checkpoint = get("checkpoint").map(|(_, v)| PathBuf::from(v));
    let mut jobs_v = match get("jobs") {
        Some((l, v)) => num(&v).map_err(|e| cfg_err(l, e))?,
        None => 1,
    };
    let mut out_v = get("out").map(|(_, v)| PathBuf::from(v));

    if let Some(v) = base_max {
        cfg.base_max = v;
    }
    if let Some(v) = bound {
        cfg.bound = parse_natural(&v)?;
    }
    if let Some(v) = sigma_cap {
        cfg.sigma_cap = parse_natural(&v)?;
    }
    if let Some(v) = shard {
        cfg.shard = v.parse()?;
    }
    if let Some(v) = precision {
        cfg.precision = v;
    }
    if let Some(v) = checkpoint {
        cfg.checkpoint = Some(v);
    }
    if let Some(v) = jobs {
        jobs_v = v;
    }
    if let Some(v) = out {
        out_v = Some(v);
    }
    if jobs_v == 0 {
        return Err(usage("--jobs must be positive"));
    }
    if jobs_v > 1 && cfg.shard != Shard::WHOLE {
        return Err(usage("--jobs splits the whole range; it cannot be combined with --shard"));
    }
    cfg.validate()?;
    Ok(SearchPlan { cfg, jobs: jobs_v, out: out_v })
}

fn print_outcome(case: CaseTag, out: &SearchOutcome) {
    println!("case {case}: {} outer values, {} candidates", out.outers_done, out.records.len());
    for (k, n) in &out.counters {
        println!("  {k:<40} {n}");
    }
    let unresolved: Vec<_> = out.unresolved().collect();
    println!("unresolved: {}", unresolved.len());
    for r in unresolved {
        let set = r.set.as_ref().map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        if let Disposition::Unresolved { reason } = &r.disposition {
            println!("  outer {} #{}: {set}: {reason}", r.outer, r.seq);
        }
    }
    println!("elapsed: {:.2?}", out.elapsed);
}

/// Parses argv and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let ctx = Ctx {
        argv: argv.iter().map(|s| s.to_string_lossy().into_owned()).collect(),
        started: now_ms(),
    };
    match run(cli.command, &ctx) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cmd: Command, ctx: &Ctx) -> Result<i32, CliError> {
    match cmd {
        Command::VerifyTheorem1 { json, fixtures } => cmd_verify_theorem1(json, fixtures.as_deref()),
        Command::Families { family, bx, out } => cmd_families(ctx, &family, &bx, out.as_deref()),
        Command::Search {
            case,
            config,
            shard,
            resume,
            restart,
            jobs,
            out,
            checkpoint,
            base_max,
            bound,
            sigma_cap,
            precision,
            stop_after,
        } => {
            let plan = plan_search(
                case,
                config.as_deref(),
                shard,
                jobs,
                out,
                checkpoint,
                base_max,
                bound,
                sigma_cap,
                precision,
            )?;
            if resume && plan.cfg.checkpoint.is_none() {
                return Err(usage("--resume needs a checkpoint path (--checkpoint or checkpoint= in the config)"));
            }
            let inputs: Vec<PathBuf> = config.into_iter().collect();
            cmd_search(ctx, plan, RunControl { restart, stop_after }, &inputs)
        }
        Command::Eliminate {
            instance,
            anchor,
            method,
            bound,
            xmax,
            ymax,
            precision,
            out,
        } => cmd_eliminate(ctx, &instance, anchor.as_deref(), method, bound.as_deref(), (xmax, ymax), precision, out.as_deref()),
        Command::Certcheck { input } => cmd_certcheck(&input),
        Command::Enumerate {
            instance,
            xmax,
            ymax,
            json,
        } => cmd_enumerate(&instance, xmax, ymax, json),
        Command::Merge { inputs, out } => cmd_merge(ctx, &inputs, &out),
    }
}

#[derive(Serialize)]
struct SignRow {
    row: usize,
    set: String,
    solutions: Vec<SignEntry>,
    ok: bool,
}

#[derive(Serialize)]
struct SignEntry {
    x: u64,
    y: u64,
    signs: Option<(u8, u8)>,
}

/// Splits `(a,b,c,r,s; x1,y1,...)` without checking the pairs.
fn parse_fixture(line: &str) -> Result<(Instance, Vec<(u64, u64)>), String> {
    let inner = line
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or("expected parentheses")?;
    let (head, tail) = inner.split_once(';').ok_or("expected ';'")?;
    let inst = parse_instance(head).map_err(|e| e.to_string())?;
    let exps: Vec<u64> = tail
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| format!("bad exponent {p:?}")))
        .collect::<Result<_, _>>()?;
    if exps.len() % 2 != 0 {
        return Err("odd number of exponents".into());
    }
    Ok((inst, exps.chunks(2).map(|w| (w[0], w[1])).collect()))
}

fn cmd_verify_theorem1(json: bool, fixtures: Option<&Path>) -> Result<i32, CliError> {
    let lines: Vec<String> = match fixtures {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| io_err(p, e))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect(),
        None => theorem1_rows().iter().map(|s| s.to_string()).collect(),
    };
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let row = i + 1;
        let (inst, pairs) = match parse_fixture(line) {
            Ok(v) => v,
            Err(e) => {
                failed.push(format!("row {row}: {e}"));
                continue;
            }
        };
        let solutions: Vec<SignEntry> = pairs
            .iter()
            .map(|&(x, y)| SignEntry { x, y, signs: inst.signs_for(x, y) })
            .collect();
        for s in solutions.iter().filter(|s| s.signs.is_none()) {
            failed.push(format!("row {row}: ({},{}) does not solve {inst}", s.x, s.y));
        }
        let ok = solutions.iter().all(|s| s.signs.is_some());
        rows.push(SignRow { row, set: line.clone(), solutions, ok });
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
    } else {
        for r in &rows {
            let signs: Vec<String> = r
                .solutions
                .iter()
                .map(|s| match s.signs {
                    Some((u, v)) => format!("({},{}):{u}{v}", s.x, s.y),
                    None => format!("({},{}):--", s.x, s.y),
                })
                .collect();
            println!("row {} {} {}", r.row, r.set, signs.join(" "));
        }
    }
    let good = rows.iter().filter(|r| r.ok).count();
    println!("{good}/{} rows verified", lines.len());
    for f in &failed {
        eprintln!("FAILED {f}");
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

/// `base=N,exp=N[,value=N]`.
fn parse_box(s: &str) -> Result<SweepBox, CliError> {
    let mut bx = SweepBox {
        base_max: 10,
        exp_max: 10,
        value_max: None,
    };
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| usage(format!("box entry {part:?} is not key=value")))?;
        let v: u64 = v.trim().parse().map_err(|_| usage(format!("box entry {part:?} is not a number")))?;
        match k.trim() {
            "base" => bx.base_max = v,
            "exp" => bx.exp_max = v,
            "value" => bx.value_max = Some(v),
            other => return Err(usage(format!("unknown box key {other:?} (base, exp, value)"))),
        }
    }
    Ok(bx)
}

#[derive(Serialize, Deserialize)]
struct FamilyLine {
    schema: u32,
    family: String,
    params: crate::families::FamilyParams,
    set: SolutionSet,
}

fn cmd_families(ctx: &Ctx, family: &str, bx: &str, out: Option<&Path>) -> Result<i32, CliError> {
    let ids: Vec<FamilyId> = if family == "all" {
        FamilyId::ALL.to_vec()
    } else {
        vec![FamilyId::from_str(family).map_err(|e| usage(e.to_string()))?]
    };
    let sbox = parse_box(bx)?;
    let mut lines = String::new();
    let mut bad = 0usize;
    for id in ids {
        let res = sweep(id, &sbox);
        let invalid = res.sets.iter().filter(|(_, s)| !s.is_valid()).count();
        bad += invalid;
        println!("family {id}: {} sets, {invalid} failing", res.sets.len());
        for (why, n) in &res.skipped {
            println!("  skipped {n}: {why}");
        }
        for (params, set) in res.sets {
            let line = FamilyLine {
                schema: 1,
                family: id.to_string(),
                params,
                set,
            };
            lines.push_str(&serde_json::to_string(&line).expect("family lines serialize"));
            lines.push('\n');
        }
    }
    if let Some(out) = out {
        let config = serde_json::json!({ "family": family, "box": sbox });
        ctx.publish(out, &lines, config, &[])?;
    }
    Ok(if bad == 0 { 0 } else { 1 })
}

fn cmd_search(ctx: &Ctx, plan: SearchPlan, ctl: RunControl, inputs: &[PathBuf]) -> Result<i32, CliError> {
    let SearchPlan { cfg, jobs, out } = plan;
    let status = if jobs > 1 {
        let shards: Vec<Shard> = (0..jobs).map(|residue| Shard { modulus: jobs, residue }).collect();
        run_sharded(&cfg, &shards, &ctl)?
    } else {
        run_search(&cfg, &ctl)?
    };
    let outcome = match status {
        RunStatus::Complete(o) => o,
        RunStatus::Interrupted { last_completed } => {
            let at = last_completed.map_or("none".into(), |v| v.to_string());
            eprintln!("stopped early (last completed outer value: {at}); rerun with --resume");
            return Ok(1);
        }
    };
    print_outcome(cfg.case, &outcome);
    if let Some(out) = &out {
        let config = serde_json::to_value(&cfg).expect("config serializes");
        ctx.publish(out, &outcome.to_jsonl(), config, inputs)?;
    }
    Ok(if outcome.unresolved().next().is_none() { 0 } else { 2 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_eliminate(
    ctx: &Ctx,
    instance: &str,
    anchor: Option<&str>,
    method: MethodArg,
    bound: Option<&str>,
    (xmax, ymax): (u64, u64),
    precision: Option<u32>,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let set = if instance.trim_start().starts_with('(') {
        SolutionSet::parse(instance).map_err(|e| usage(e.to_string()))?
    } else {
        enumerate_solutions(&parse_instance(instance)?, xmax, ymax)
    };
    if set.solutions.is_empty() {
        return Err(usage(format!("{} has no solutions with x <= {xmax}, y <= {ymax}", set.instance)));
    }
    let bound = match bound {
        Some(b) => parse_natural(b)?,
        None => BigUint::from(DEFAULT_BOUND),
    };
    let precision = match precision {
        Some(p) => p,
        None => default_precision()?,
    };
    let anchor = match anchor {
        Some(a) => parse_pair(a)?,
        None => *set.pairs().iter().max().expect("nonempty"),
    };
    println!("{set}");
    let mut ecfg = EliminationConfig::new(bound.clone());
    ecfg.precision = precision;
    let result: Result<Certificate, CannotEliminate> = match method {
        MethodArg::Auto => eliminate(&set, &ecfg),
        MethodArg::Lattice => eliminate_lattice_at(&set, &bound, precision),
        MethodArg::Bootstrap => bootstrap(&set.instance, anchor, &bound, &ecfg.effort),
        MethodArg::Logtest => eliminate_logtest(&set, 0, xmax, precision),
        MethodArg::Exhaust => eliminate_exhaust(&set, ymax),
    };
    match result {
        Ok(cert) => {
            let v = verify_certificate(&cert);
            println!("eliminated by {} up to {}; replay {}", cert.method(), cert.bound, if v.ok { "ok" } else { "FAILED" });
            if let Some(out) = out {
                let config = serde_json::json!({ "method": format!("{method:?}").to_lowercase(), "bound": bound.to_string(), "precision": precision });
                ctx.publish(out, &(cert.to_json() + "\n"), config, &[])?;
            }
            Ok(if v.ok { 0 } else { 1 })
        }
        Err(e) => {
            println!("not eliminated: {}", e.reason);
            for (x, y) in &e.further {
                println!("  further solution ({x},{y})");
            }
            Ok(2)
        }
    }
}

/// What one line of a results file claims.
enum Claim {
    Certificate(Box<Certificate>),
    Record(Box<CandidateRecord>),
    Family(Box<FamilyLine>),
}

fn parse_claim(line: &str) -> Result<Claim, String> {
    let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if v.get("schema").and_then(|s| s.as_u64()) != Some(1) {
        return Err("missing or unsupported schema".into());
    }
    let res = if v.get("payload").is_some() {
        serde_json::from_value(v).map(|c| Claim::Certificate(Box::new(c)))
    } else if v.get("disposition").is_some() {
        serde_json::from_value(v).map(|r| Claim::Record(Box::new(r)))
    } else {
        serde_json::from_value(v).map(|f| Claim::Family(Box::new(f)))
    };
    res.map_err(|e| e.to_string())
}

fn cmd_certcheck(input: &Path) -> Result<i32, CliError> {
    let text = fs::read_to_string(input).map_err(|e| io_err(input, e))?;
    let (mut ok, mut unresolved) = (0usize, 0usize);
    let mut failures = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let n = i + 1;
        let verdict: Result<bool, String> = match parse_claim(line) {
            Err(e) => Err(e),
            Ok(Claim::Certificate(c)) => {
                let v = verify_certificate(&c);
                if v.ok { Ok(true) } else { Err(v.reasons.join("; ")) }
            }
            Ok(Claim::Family(f)) => {
                if f.set.is_valid() { Ok(true) } else { Err(format!("{} is not a solution set", f.set)) }
            }
            Ok(Claim::Record(r)) => match (&r.disposition, &r.set) {
                (Disposition::Unresolved { .. }, _) => Ok(false),
                (_, None) => Err("resolved record without a set".into()),
                (_, Some(set)) if !set.is_valid() => Err(format!("{set} is not a solution set")),
                (Disposition::Eliminated { certificate }, Some(set)) => {
                    let v = verify_certificate(certificate);
                    if certificate.instance != set.instance {
                        Err("certificate is for a different instance".into())
                    } else if v.ok {
                        Ok(true)
                    } else {
                        Err(v.reasons.join("; "))
                    }
                }
                (Disposition::MatchesTheorem1 { witness }, Some(set)) => match matches_theorem1(set) {
                    Some(m) if m.row == witness.row => Ok(true),
                    _ => Err(format!("{set} does not match row {}", witness.row)),
                },
                (Disposition::MatchesFamily { params }, Some(set)) => match recognize(set) {
                    Some(p) if p.id() == params.id() => Ok(true),
                    _ => Err(format!("{set} is not in family {}", params.id())),
                },
            },
        };
        match verdict {
            Ok(true) => ok += 1,
            Ok(false) => unresolved += 1,
            Err(e) => failures.push(format!("line {n}: {e}")),
        }
    }
    println!("{ok} verified, {} failed, {unresolved} unresolved", failures.len());
    for f in &failures {
        eprintln!("FAILED {f}");
    }
    Ok(if !failures.is_empty() {
        1
    } else if unresolved > 0 {
        2
    } else {
        0
    })
}

fn cmd_enumerate(instance: &str, xmax: u64, ymax: u64, json: bool) -> Result<i32, CliError> {
    let set = enumerate_solutions(&parse_instance(instance)?, xmax, ymax);
    if json {
        println!("{}", serde_json::to_string(&set).expect("sets serialize"));
    } else {
        println!("{set}");
        for s in &set.solutions {
            println!("({},{}) u={} v={}", s.x, s.y, s.u, s.v);
        }
    }
    Ok(0)
}

fn cmd_merge(ctx: &Ctx, inputs: &[PathBuf], out: &Path) -> Result<i32, CliError> {
    let mut parts = Vec::new();
    for p in inputs {
        let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
        let records = SearchOutcome::from_jsonl(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        parts.push(SearchOutcome {
            records,
            ..Default::default()
        });
    }
    let merged = SearchOutcome::merge(parts);
    let cases: std::collections::BTreeSet<CaseTag> = merged.records.iter().map(|r| r.case).collect();
    if cases.len() > 1 {
        return Err(usage("inputs come from different cases"));
    }
    let unresolved = merged.unresolved().count();
    println!("{} records, {unresolved} unresolved", merged.records.len());
    ctx.publish(out, &merged.to_jsonl(), serde_json::Value::Null, inputs)?;
    Ok(if unresolved == 0 { 0 } else { 2 })
}
