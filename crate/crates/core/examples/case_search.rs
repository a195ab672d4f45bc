//! Runs one case search and prints how its candidates were settled.
//!
//! `cargo run --release --example case_search -- 20b 60 1000000`

use num_bigint::BigUint;
use pillai::model::CaseTag;
use pillai::search::{run_search, RunControl, RunStatus, SearchConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let case: CaseTag = args.first().map_or("20b", String::as_str).parse().expect("case");
    let base_max: u64 = args.get(1).map_or(Ok(30), |s| s.parse()).expect("base_max");
    let mut cfg = SearchConfig::desk(case, base_max);
    if let Some(b) = args.get(2) {
        cfg.bound = b.parse::<BigUint>().expect("bound");
    }
    if let Some(f) = args.get(3) {
        cfg.sigma_cap = f.parse::<BigUint>().expect("sigma_cap");
    }
    let RunStatus::Complete(out) = run_search(&cfg, &RunControl::default()).expect("search") else {
        unreachable!()
    };
    for (k, v) in &out.counters {
        println!("{k:32} {v}");
    }
    for r in out.unresolved() {
        let set = r.set.as_ref().map(|s| s.to_string()).unwrap_or_default();
        println!("unresolved {set} {:?}", r.disposition);
    }
    println!("{} candidates in {:?}", out.records.len(), out.elapsed);
}
