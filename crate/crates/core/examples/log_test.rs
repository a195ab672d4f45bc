//! Solves for the real `y` at a range of `x` and says whether an integer
//! `y` is still possible there.
//!
//! `cargo run --example log_test -- 3,2,5,1,2 1 12`

use num_traits::ToPrimitive;
use pillai::eliminate::{log_test_y, LogHypothesis, LogTestOutcome};
use pillai::model::Instance;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let v: Vec<u64> = args
        .first()
        .map_or("3,2,5,1,2", String::as_str)
        .split(',')
        .map(|t| t.trim().parse().expect("integer"))
        .collect();
    let [a, b, c, r, s] = v[..] else { panic!("expected a,b,c,r,s") };
    let inst = Instance::from_u64(a, b, c, r, s).expect("instance");
    let lo = args.get(1).map_or(1, |t| t.parse().expect("x"));
    let hi = args.get(2).map_or(12, |t| t.parse().expect("x"));
    for x in lo..=hi {
        let out = log_test_y(&inst, x, 60, LogHypothesis::FromInstance).expect("log test");
        match out {
            LogTestOutcome::NonInteger { residual } => {
                println!("x={x:4}  no integer y, distance {:.3e}", residual.to_f64().unwrap_or(f64::NAN))
            }
            other => println!("x={x:4}  {other:?}"),
        }
    }
}
