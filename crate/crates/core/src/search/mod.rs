//! Case searches: enumerate every three-solution configuration a case
//! allows within the configured bounds, then settle each one.
//!
//! A candidate is settled by matching it against the nine known sets, then
//! against the infinite families, and otherwise by an elimination
//! certificate. Anything left over is reported as unresolved.

mod drivers;
mod run;

pub use drivers::{triples_19b, triples_20b, triples_21b, Emitter};
pub use run::{
    load_checkpoint, run_search, run_sharded, search_19b, search_20b, search_21b, Checkpoint, RunControl, RunStatus,
};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::eliminate::{eliminate, BootstrapEffort, Certificate, EliminationConfig};
use crate::families::{recognize, FamilyParams};
use crate::model::{matches_theorem1, CaseTag, SolutionSet, Theorem1Match};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint {path} is corrupt ({detail}); rerun with restart to discard it")]
    CheckpointCorrupt { path: String, detail: String },
    #[error("checkpoint {path} was written for a different configuration")]
    CheckpointMismatch { path: String },
    #[error("i/o error on {path}: {detail}")]
    Io { path: String, detail: String },
}

/// Which outer values a worker owns: those congruent to `residue`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub modulus: u64,
    pub residue: u64,
}

impl Shard {
    pub const WHOLE: Shard = Shard { modulus: 1, residue: 0 };

    pub fn owns(&self, v: u64) -> bool {
        v % self.modulus == self.residue
    }
}

impl std::str::FromStr for Shard {
    type Err = SearchError;

    /// `residue/modulus`, e.g. `0/4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SearchError::InvalidConfig(format!("shard {s:?} is not of the form residue/modulus"));
        let (r, m) = s.split_once('/').ok_or_else(bad)?;
        let shard = Shard {
            residue: r.trim().parse().map_err(|_| bad())?,
            modulus: m.trim().parse().map_err(|_| bad())?,
        };
        Ok(shard)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub case: CaseTag,
    /// Largest `b` (`a` for 20b) of the outer loop.
    pub base_max: u64,
    /// The global bound on exponents and on the `Z`-ceilings.
    #[serde(with = "crate::serde_big::natural")]
    pub bound: BigUint,
    /// Factor `F` in the 21b ceiling `b^y3 <= F * bound`.
    #[serde(with = "crate::serde_big::natural")]
    pub sigma_cap: BigUint,
    /// Values of the outer sign (`δ`, `ν` or `α`) to enumerate.
    pub signs: Vec<u8>,
    pub shard: Shard,
    #[serde(skip)]
    pub checkpoint: Option<PathBuf>,
    pub effort: BootstrapEffort,
    pub precision: u32,
}

impl SearchConfig {
    pub fn desk(case: CaseTag, base_max: u64) -> Self {
        Self {
            case,
            base_max,
            bound: BigUint::from(1_000_000u32),
            sigma_cap: BigUint::from(10u32).pow(22),
            signs: vec![0, 1],
            shard: Shard::WHOLE,
            checkpoint: None,
            effort: BootstrapEffort::default(),
            precision: 50,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.into()));
        if self.shard.modulus == 0 || self.shard.residue >= self.shard.modulus {
            return bad("shard residue must be below a positive modulus");
        }
        if self.base_max < 2 {
            return bad("base_max must be at least 2");
        }
        if self.bound < BigUint::from(2u32) {
            return bad("bound must be at least 2");
        }
        if self.sigma_cap < BigUint::from(1u32) {
            return bad("sigma_cap must be positive");
        }
        if self.signs.is_empty() || self.signs.iter().any(|&s| s > 1) {
            return bad("signs must be a nonempty subset of {0, 1}");
        }
        if self.precision < 50 {
            return bad("precision must be at least 50 digits");
        }
        Ok(())
    }

    /// Digest of everything that affects the outcome.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Outer values this configuration's shard owns, in order.
    pub fn outer_values(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.base_max).filter(|&v| self.shard.owns(v))
    }

    pub fn elimination(&self) -> EliminationConfig {
        EliminationConfig {
            effort: self.effort,
            precision: self.precision,
            ..EliminationConfig::new(self.bound.clone())
        }
    }
}

/// Where in a driver's enumeration a candidate came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Provenance {
    /// `y_gap = y3 - y2`, `x_gap = x3 - x2`.
    Case19b {
        b: u64,
        delta: u8,
        y_gap: u64,
        #[serde(with = "crate::serde_big::natural")]
        a: BigUint,
        x2: u64,
        gamma: u8,
        x_gap: u64,
        y2: u64,
    },
    Case21b {
        b: u64,
        nu: u8,
        y3: u64,
        #[serde(with = "crate::serde_big::natural")]
        a: BigUint,
        x2: u64,
        mu: u8,
        x_gap: u64,
        eta: u8,
        y1: u64,
        theta: u8,
    },
    Case20b {
        a: u64,
        alpha: u8,
        beta: u8,
        x2: u64,
        x3: u64,
        r: u8,
    },
    /// `base^exponent + (-1)^sign` could not be factored.
    Factor { base: u64, exponent: u64, sign: u8 },
}

/// A verified three-solution set with the branch that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateTriple {
    pub set: SolutionSet,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Disposition {
    Eliminated { certificate: Box<Certificate> },
    MatchesTheorem1 { witness: Theorem1Match },
    MatchesFamily { params: FamilyParams },
    Unresolved { reason: String },
}

impl Disposition {
    pub fn label(&self) -> &'static str {
        match self {
            Disposition::Eliminated { .. } => "eliminated",
            Disposition::MatchesTheorem1 { .. } => "matches_theorem1",
            Disposition::MatchesFamily { .. } => "matches_family",
            Disposition::Unresolved { .. } => "unresolved",
        }
    }
}

/// Known set, then family, then elimination.
pub fn dispose(set: &SolutionSet, ecfg: &EliminationConfig) -> Disposition {
    if let Some(witness) = matches_theorem1(set) {
        return Disposition::MatchesTheorem1 { witness };
    }
    if let Some(params) = recognize(set) {
        return Disposition::MatchesFamily { params };
    }
    match eliminate(set, ecfg) {
        Ok(cert) => Disposition::Eliminated { certificate: Box::new(cert) },
        Err(e) => Disposition::Unresolved { reason: e.reason },
    }
}

/// One line of the outcome file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub schema: u32,
    pub case: CaseTag,
    /// Outer loop value (`b`, or `a` for 20b) and emission index within it.
    pub outer: u64,
    pub seq: u32,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SolutionSet>,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub records: Vec<CandidateRecord>,
    pub counters: BTreeMap<String, u64>,
    /// Outer values fully processed.
    pub outers_done: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SearchOutcome {
    pub fn unresolved(&self) -> impl Iterator<Item = &CandidateRecord> {
        self.records
            .iter()
            .filter(|r| matches!(r.disposition, Disposition::Unresolved { .. }))
    }

    pub fn count(&self, label: &str) -> usize {
        self.records.iter().filter(|r| r.disposition.label() == label).count()
    }

    /// Combines partial outcomes. The result does not depend on the order of
    /// `parts`.
    pub fn merge(parts: impl IntoIterator<Item = SearchOutcome>) -> SearchOutcome {
        let mut out = SearchOutcome::default();
        for p in parts {
            out.records.extend(p.records);
            for (k, v) in p.counters {
                *out.counters.entry(k).or_default() += v;
            }
            out.outers_done += p.outers_done;
            out.elapsed = out.elapsed.max(p.elapsed);
        }
        out.records.sort_by_key(|r| (r.outer, r.seq));
        out
    }

    /// One JSON object per line, in `(outer, seq)` order.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("record serializes"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(text: &str) -> Result<Vec<CandidateRecord>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eliminate::{bootstrap, verify_certificate};
    use crate::families::{generate, FamilyId};
    use crate::model::{associate, to_basic_form};

    fn emit_for(case: CaseTag, outer: u64, cfg: &SearchConfig) -> Emitter {
        let mut em = Emitter::default();
        match case {
            CaseTag::C19b => triples_19b(outer, cfg, &mut em),
            CaseTag::C21b => triples_21b(outer, cfg, &mut em),
            CaseTag::C20b => triples_20b(outer, cfg, &mut em),
        }
        em
    }

    fn texts(em: &Emitter) -> Vec<String> {
        em.triples().map(|t| t.set.sorted().to_string()).collect()
    }

    #[test]
    fn empty_shard_gives_empty_outcome() {
        let mut cfg = SearchConfig::desk(CaseTag::C19b, 2);
        cfg.shard = Shard { modulus: 4, residue: 3 };
        let out = search_19b(&cfg).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.outers_done, 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SearchConfig::desk(CaseTag::C20b, 10);
        cfg.shard = Shard { modulus: 4, residue: 4 };
        assert!(cfg.validate().is_err());
        let mut cfg = SearchConfig::desk(CaseTag::C20b, 10);
        cfg.signs = vec![2];
        assert!(cfg.validate().is_err());
        assert!(search_19b(&SearchConfig::desk(CaseTag::C20b, 10)).is_err());
        assert_eq!("1/4".parse::<Shard>().unwrap(), Shard { modulus: 4, residue: 1 });
        assert!("4".parse::<Shard>().is_err());
    }

    #[test]
    fn case_20b_finds_family_66_member() {
        // Emitted over the primitive base 3; the same set in basic form.
        let cfg = SearchConfig::desk(CaseTag::C20b, 4);
        let want = to_basic_form(&SolutionSet::parse("(4,9,5,2,3; 0,0,1,0,2,1)").unwrap()).unwrap();
        let em = emit_for(CaseTag::C20b, 4, &cfg);
        assert!(em.triples().any(|t| to_basic_form(&t.set).unwrap() == want));
    }

    #[test]
    fn case_20b_coefficient_follows_parity() {
        let cfg = SearchConfig::desk(CaseTag::C20b, 12);
        for a in 2..=12 {
            for t in emit_for(CaseTag::C20b, a, &cfg).triples() {
                let want = if a % 2 == 1 { 1u32 } else { 2 };
                assert_eq!(t.set.instance.r, BigUint::from(want), "{}", t.set);
            }
        }
    }

    #[test]
    fn case_19b_at_b2_yields_family_members() {
        let cfg = SearchConfig::desk(CaseTag::C19b, 2);
        let em = emit_for(CaseTag::C19b, 2, &cfg);
        assert!(em.triples().any(|t| recognize(&t.set).is_some_and(|p| p.id() == FamilyId::F63)));
        // Family 65 has pairs (0,1), (g-1,0), (g,1): no (0,0), so none here.
        let f65: Vec<SolutionSet> = (3..=8)
            .flat_map(|g| (0..=1).map(move |v| generate(&FamilyParams::F65 { g, v }).unwrap()))
            .flat_map(|m| [to_basic_form(&m).unwrap(), to_basic_form(&associate(&m)).unwrap()])
            .collect();
        assert!(em.triples().all(|t| !f65.contains(&to_basic_form(&t.set).unwrap())));
    }

    #[test]
    fn case_21b_reaches_the_two_sporadic_sets() {
        let mut cfg = SearchConfig::desk(CaseTag::C21b, 1477);
        cfg.bound = BigUint::from(800_000_000_000_000u64);
        cfg.sigma_cap = BigUint::from(1u32);
        let em = emit_for(CaseTag::C21b, 1477, &cfg);
        let all = texts(&em);
        for want in [
            "(56744,1477,83810889,1478,56743; 0,1,1,0,3,4)",
            "(56745,1477,41906182,739,28373; 0,1,1,0,3,4)",
        ] {
            assert!(all.iter().any(|t| t == want), "{want} not in {} triples", all.len());
            let set = SolutionSet::parse(want).unwrap();
            assert!(matches_theorem1(&set).is_none());
            assert!(recognize(&set).is_none());
            let cert = bootstrap(&set.instance, (3, 4), &cfg.bound, &cfg.effort).unwrap();
            assert!(verify_certificate(&cert).ok);
        }
    }

    #[test]
    fn merge_ignores_part_order() {
        let cfg = SearchConfig::desk(CaseTag::C20b, 9);
        let parts: Vec<SearchOutcome> = (0..3)
            .map(|r| {
                let c = SearchConfig { shard: Shard { modulus: 3, residue: r }, ..cfg.clone() };
                search_20b(&c).unwrap()
            })
            .collect();
        let forward = SearchOutcome::merge(parts.clone());
        let backward = SearchOutcome::merge(parts.into_iter().rev());
        assert_eq!(forward.to_jsonl(), backward.to_jsonl());
        assert_eq!(forward.to_jsonl(), search_20b(&cfg).unwrap().to_jsonl());
        let back = SearchOutcome::from_jsonl(&forward.to_jsonl()).unwrap();
        assert_eq!(back, forward.records);
    }
}
