//! Every three-solution configuration in a brute-force box that fits a
//! case pattern is produced by that case's driver, and every candidate the
//! drivers produce is settled soundly.

mod oracle;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use pillai::eliminate::verify_certificate;
use pillai::model::{same_family, theorem1_rows, to_basic_form, CaseTag, Instance, SolutionSet, Via};
use pillai::search::{run_search, Disposition, RunControl, RunStatus, SearchConfig, SearchOutcome};

use oracle::{configurations, instances, Box5};

fn canon(set: &SolutionSet) -> String {
    let one = to_basic_form(set).map(|s| s.to_string()).unwrap_or_default();
    let two = to_basic_form(&set.associate()).map(|s| s.to_string()).unwrap_or_default();
    one.min(two)
}

fn run(case: CaseTag, base_max: u64, bound: u64) -> SearchOutcome {
    let mut cfg = SearchConfig::desk(case, base_max);
    cfg.bound = BigUint::from(bound);
    cfg.sigma_cap = BigUint::from(1u32);
    match run_search(&cfg, &RunControl::default()).unwrap() {
        RunStatus::Complete(o) => o,
        RunStatus::Interrupted { .. } => unreachable!(),
    }
}

fn check_case(case: CaseTag, found: &[oracle::Found]) {
    let outcome = run(case, 30, 1_000_000_000_000_000_000);
    let produced: BTreeSet<String> = outcome.records.iter().filter_map(|r| r.set.as_ref()).map(canon).collect();
    let configs = configurations(found, &case.to_string());
    assert!(!configs.is_empty(), "{case}: oracle found nothing");
    let mut missing = Vec::new();
    for f in &configs {
        let (a, b, c, r, s) = f.abcrs;
        let inst = Instance::from_u64(a, b, c, r, s).unwrap();
        let pairs: Vec<(u64, u64)> = f.pairs.iter().map(|&(x, y)| (x as u64, y as u64)).collect();
        let set = SolutionSet::from_pairs(inst, &pairs).unwrap();
        if !produced.contains(&canon(&set)) {
            missing.push(set.to_string());
        }
    }
    assert!(missing.is_empty(), "{case}: {} of {} missing, e.g. {:?}", missing.len(), configs.len(), &missing[..missing.len().min(5)]);
    assert_eq!(outcome.unresolved().count(), 0, "{case}");
    for r in &outcome.records {
        match &r.disposition {
            Disposition::Eliminated { certificate } => {
                assert!(verify_certificate(certificate).ok, "{case} {:?}", r.set)
            }
            Disposition::MatchesTheorem1 { witness } => {
                let set = r.set.as_ref().unwrap();
                let row = &theorem1_rows()[witness.row - 1];
                let row = if witness.via == Via::Associate { row.associate() } else { row.clone() };
                let n = row.solutions.len();
                let hit = (0..n).any(|i| {
                    (i + 1..n).any(|j| (j + 1..n).any(|k| same_family(set, &row.subset(&[i, j, k])).is_some()))
                });
                assert!(hit, "{case} {set} row {}", witness.row);
            }
            _ => {}
        }
    }
    eprintln!("{case}: {} oracle configurations, {} candidates", configs.len(), outcome.records.len());
}

#[test]
fn drivers_cover_the_oracle_box() {
    let bx = Box5 { ab_max: 30, rs_max: 30, c_max: 60, exp_max: 12 };
    let found = instances(bx, 3, true);
    for case in [CaseTag::C19b, CaseTag::C21b, CaseTag::C20b] {
        check_case(case, &found);
    }
}
