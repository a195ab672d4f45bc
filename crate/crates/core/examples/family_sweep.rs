//! Generates every member of each parametric family inside a box and
//! reports how many were kept.
//!
//! `cargo run --release --example family_sweep -- 200 8 100000`

use pillai::families::{sweep, FamilyId, SweepBox};

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|t| t.parse().expect("integer")).collect();
    let bx = SweepBox {
        base_max: args.first().copied().unwrap_or(200),
        exp_max: args.get(1).copied().unwrap_or(8),
        value_max: Some(args.get(2).copied().unwrap_or(100_000)),
    };
    for id in FamilyId::ALL {
        let res = sweep(id, &bx);
        let skipped: usize = res.skipped.values().sum();
        print!("{id:?}: {} sets, {skipped} skipped", res.sets.len());
        if let Some((_, first)) = res.sets.first() {
            print!(", first {first}");
        }
        println!();
    }
}
