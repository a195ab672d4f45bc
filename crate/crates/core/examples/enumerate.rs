//! Lists every solution of one instance in a box, with its signs.
//!
//! `cargo run --example enumerate -- 3,2,5,1,2 40 60`

use pillai::model::{enumerate_solutions, matches_theorem1, Instance};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let spec = args.first().map_or("3,2,5,1,2", String::as_str);
    let v: Vec<u64> = spec.split(',').map(|t| t.trim().parse().expect("integer")).collect();
    let [a, b, c, r, s] = v[..] else { panic!("expected a,b,c,r,s") };
    let inst = Instance::from_u64(a, b, c, r, s).expect("instance");
    let xmax = args.get(1).map_or(40, |t| t.parse().expect("xmax"));
    let ymax = args.get(2).map_or(60, |t| t.parse().expect("ymax"));
    let set = enumerate_solutions(&inst, xmax, ymax);
    for (x, y) in set.pairs() {
        let (u, v) = inst.signs_for(x, y).expect("solution");
        println!("x={x:3} y={y:3}  u={u} v={v}");
    }
    println!("{set}");
    if let Some(m) = matches_theorem1(&set) {
        println!("Theorem 1 row {} via {:?}", m.row, m.via);
    }
}
