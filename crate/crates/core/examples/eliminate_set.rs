//! Shows a solution set has no further solution up to a bound, then checks
//! the certificate independently.
//!
//! `cargo run --release --example eliminate_set -- "(3,2,5,1,2; 0,1,1,0,1,2,2,1,3,4)" 800000000000000`

use num_bigint::BigUint;
use pillai::eliminate::{eliminate, verify_certificate, EliminationConfig};
use pillai::model::SolutionSet;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let text = args.first().map_or("(3,2,5,1,2; 0,1,1,0,1,2,2,1,3,4)", String::as_str);
    let set = SolutionSet::parse(text).expect("solution set");
    let bound: BigUint = args.get(1).map_or("800000000000000", String::as_str).parse().expect("bound");
    match eliminate(&set, &EliminationConfig::new(bound)) {
        Ok(cert) => {
            println!("{:?} certificate for {set}", cert.method());
            let v = verify_certificate(&cert);
            println!("verified: {} {:?}", v.ok, v.reasons);
        }
        Err(e) => {
            println!("cannot eliminate: {}", e.reason);
            if !e.further.is_empty() {
                println!("further solutions: {:?}", e.further);
            }
        }
    }
}
