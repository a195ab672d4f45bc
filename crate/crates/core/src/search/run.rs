//! Running a search over its outer values, with checkpoints after each one
//! and a deterministic merge across shards.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::drivers::{triples_19b, triples_20b, triples_21b, Emitted, Emitter};
use super::{dispose, CandidateRecord, Disposition, SearchConfig, SearchError, SearchOutcome, Shard};
use crate::model::CaseTag;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunControl {
    /// Ignore (and overwrite) an existing checkpoint.
    pub restart: bool,
    /// Stop after this many outer values, as if the process were killed
    /// right after writing its checkpoint.
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Complete(SearchOutcome),
    Interrupted { last_completed: Option<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema: u32,
    pub cfg_hash: String,
    pub last_completed: Option<u64>,
    pub outcome: SearchOutcome,
}

fn io_err(path: &Path, e: impl ToString) -> SearchError {
    SearchError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    }
}

/// `Ok(None)` when there is no checkpoint at `path`.
pub fn load_checkpoint(path: &Path) -> Result<Option<Checkpoint>, SearchError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(path, e)),
    };
    serde_json::from_str(&text).map(Some).map_err(|e| SearchError::CheckpointCorrupt {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<(), SearchError> {
    let tmp = path.with_extension("tmp");
    let json = serde_json::to_string(cp).expect("checkpoint serializes");
    fs::write(&tmp, json).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Enumerates and settles every candidate of one outer value.
fn process_outer(cfg: &SearchConfig, v: u64) -> SearchOutcome {
    let mut em = Emitter::default();
    match cfg.case {
        CaseTag::C19b => triples_19b(v, cfg, &mut em),
        CaseTag::C21b => triples_21b(v, cfg, &mut em),
        CaseTag::C20b => triples_20b(v, cfg, &mut em),
    }
    let ecfg = cfg.elimination();
    let mut out = SearchOutcome {
        counters: std::mem::take(&mut em.counters),
        outers_done: 1,
        ..Default::default()
    };
    for (seq, item) in em.items.into_iter().enumerate() {
        let (provenance, set, disposition) = match item {
            Emitted::Triple(t) => {
                let d = dispose(&t.set, &ecfg);
                (t.provenance, Some(t.set), d)
            }
            Emitted::Failure { provenance, reason } => (provenance, None, Disposition::Unresolved { reason }),
        };
        let mut key = format!("{}.{}", cfg.case, disposition.label());
        if let Disposition::Eliminated { certificate } = &disposition {
            key = format!("{key}.{}", certificate.method());
        }
        *out.counters.entry(key).or_default() += 1;
        out.records.push(CandidateRecord {
            schema: 1,
            case: cfg.case,
            outer: v,
            seq: seq as u32,
            provenance,
            set,
            disposition,
        });
    }
    out
}

/// Runs one shard of a search, resuming from its checkpoint when one exists.
pub fn run_search(cfg: &SearchConfig, ctl: &RunControl) -> Result<RunStatus, SearchError> {
    cfg.validate()?;
    let hash = cfg.hash();
    let mut acc = SearchOutcome::default();
    let mut last = None;
    if let (Some(path), false) = (&cfg.checkpoint, ctl.restart) {
        if let Some(cp) = load_checkpoint(path)? {
            if cp.cfg_hash != hash {
                return Err(SearchError::CheckpointMismatch {
                    path: path.display().to_string(),
                });
            }
            acc = cp.outcome;
            last = cp.last_completed;
        }
    }
    let start = Instant::now();
    let mut processed = 0usize;
    let todo: Vec<u64> = cfg.outer_values().filter(|&v| last.is_none_or(|l| v > l)).collect();
    for v in todo {
        if ctl.stop_after.is_some_and(|n| processed >= n) {
            return Ok(RunStatus::Interrupted { last_completed: last });
        }
        let part = process_outer(cfg, v);
        acc.records.extend(part.records);
        for (k, n) in part.counters {
            *acc.counters.entry(k).or_default() += n;
        }
        acc.outers_done += 1;
        last = Some(v);
        processed += 1;
        if let Some(path) = &cfg.checkpoint {
            let cp = Checkpoint {
                schema: 1,
                cfg_hash: hash.clone(),
                last_completed: last,
                outcome: acc.clone(),
            };
            write_checkpoint(path, &cp)?;
        }
    }
    acc.elapsed += start.elapsed();
    Ok(RunStatus::Complete(acc))
}

/// Shards must share one modulus and cover each residue exactly once.
fn check_partition(shards: &[Shard]) -> Result<(), SearchError> {
    let bad = |m: String| Err(SearchError::InvalidConfig(m));
    let Some(first) = shards.first() else {
        return bad("no shards given".into());
    };
    let m = first.modulus;
    if m == 0 || shards.iter().any(|s| s.modulus != m) {
        return bad("shards must share one positive modulus".into());
    }
    let residues: BTreeSet<u64> = shards.iter().map(|s| s.residue).collect();
    if residues.len() != shards.len() {
        return bad("two shards claim the same residue".into());
    }
    if residues.len() as u64 != m || residues.iter().any(|&r| r >= m) {
        return bad(format!("shards do not cover every residue modulo {m}"));
    }
    Ok(())
}

fn shard_checkpoint(base: &Path, shard: Shard) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("checkpoint");
    base.with_file_name(format!("{stem}.{}of{}.json", shard.residue, shard.modulus))
}

/// Runs every shard on its own thread and merges the results. Each shard
/// keeps a checkpoint next to `cfg.checkpoint` when that is set.
pub fn run_sharded(cfg: &SearchConfig, shards: &[Shard], ctl: &RunControl) -> Result<RunStatus, SearchError> {
    check_partition(shards)?;
    let cfgs: Vec<SearchConfig> = shards
        .iter()
        .map(|&shard| SearchConfig {
            shard,
            checkpoint: cfg.checkpoint.as_deref().map(|p| shard_checkpoint(p, shard)),
            ..cfg.clone()
        })
        .collect();
    let results: Vec<Result<RunStatus, SearchError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfgs.iter().map(|c| scope.spawn(move || run_search(c, ctl))).collect();
        handles.into_iter().map(|h| h.join().expect("shard worker panicked")).collect()
    });
    let mut parts = Vec::new();
    let mut interrupted = None;
    for r in results {
        match r? {
            RunStatus::Complete(o) => parts.push(o),
            RunStatus::Interrupted { last_completed } => interrupted = Some(last_completed),
        }
    }
    if let Some(last_completed) = interrupted {
        return Ok(RunStatus::Interrupted { last_completed });
    }
    Ok(RunStatus::Complete(SearchOutcome::merge(parts)))
}

fn run_case(cfg: &SearchConfig, case: CaseTag) -> Result<SearchOutcome, SearchError> {
    if cfg.case != case {
        return Err(SearchError::InvalidConfig(format!(
            "configuration is for case {}, not {case}",
            cfg.case
        )));
    }
    match run_search(cfg, &RunControl::default())? {
        RunStatus::Complete(o) => Ok(o),
        RunStatus::Interrupted { .. } => unreachable!("no stop requested"),
    }
}

pub fn search_19b(cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    run_case(cfg, CaseTag::C19b)
}

pub fn search_21b(cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    run_case(cfg, CaseTag::C21b)
}

pub fn search_20b(cfg: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    run_case(cfg, CaseTag::C20b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: &Path) -> SearchConfig {
        SearchConfig {
            checkpoint: Some(dir.join("cp.json")),
            ..SearchConfig::desk(CaseTag::C20b, 12)
        }
    }

    fn complete(s: RunStatus) -> SearchOutcome {
        match s {
            RunStatus::Complete(o) => o,
            other => panic!("expected completion, got {other:?}"),
        }
    }

    #[test]
    fn partition_is_checked() {
        let s = |residue, modulus| Shard { modulus, residue };
        assert!(check_partition(&[s(0, 2), s(1, 2)]).is_ok());
        assert!(check_partition(&[]).is_err());
        assert!(check_partition(&[s(0, 2)]).is_err());
        assert!(check_partition(&[s(0, 2), s(0, 2)]).is_err());
        assert!(check_partition(&[s(0, 2), s(1, 3), s(2, 3)]).is_err());
    }

    #[test]
    fn resume_after_kill_matches_a_clean_run() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path());
        let clean = complete(run_search(&SearchConfig { checkpoint: None, ..c.clone() }, &RunControl::default()).unwrap());
        let killed = run_search(&c, &RunControl { stop_after: Some(4), ..Default::default() }).unwrap();
        assert_eq!(killed, RunStatus::Interrupted { last_completed: Some(5) });
        let resumed = complete(run_search(&c, &RunControl::default()).unwrap());
        assert_eq!(resumed.to_jsonl(), clean.to_jsonl());
        assert_eq!(resumed.counters, clean.counters);
        assert_eq!(resumed.outers_done, 11);
    }

    #[test]
    fn sharded_resume_matches_a_single_run() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path());
        let single = complete(run_search(&SearchConfig { checkpoint: None, ..c.clone() }, &RunControl::default()).unwrap());
        let shards: Vec<Shard> = (0..4).map(|residue| Shard { modulus: 4, residue }).collect();
        let ctl = RunControl { stop_after: Some(1), ..Default::default() };
        assert!(matches!(run_sharded(&c, &shards, &ctl).unwrap(), RunStatus::Interrupted { .. }));
        let merged = complete(run_sharded(&c, &shards, &RunControl::default()).unwrap());
        assert_eq!(merged.to_jsonl(), single.to_jsonl());
    }

    #[test]
    fn corrupt_and_foreign_checkpoints_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path());
        let path = c.checkpoint.clone().unwrap();
        fs::write(&path, "{\"schema\":1,").unwrap();
        let err = run_search(&c, &RunControl::default()).unwrap_err();
        assert!(matches!(err, SearchError::CheckpointCorrupt { .. }), "{err}");
        complete(run_search(&c, &RunControl { restart: true, ..Default::default() }).unwrap());

        let other = SearchConfig { base_max: 13, ..c.clone() };
        let err = run_search(&other, &RunControl::default()).unwrap_err();
        assert!(matches!(err, SearchError::CheckpointMismatch { .. }), "{err}");
    }
}
