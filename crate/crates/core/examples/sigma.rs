//! Prints the sigma certificate of coprime `a, b`: whenever `a^x` divides
//! `b^y ± 1`, it also divides `a^sigma * y`.
//!
//! `cargo run --example sigma -- 3 2`

use num_bigint::BigUint;
use pillai::bounds::sigma;

fn main() {
    let args: Vec<BigUint> = std::env::args().skip(1).map(|t| t.parse().expect("integer")).collect();
    let a = args.first().cloned().unwrap_or_else(|| 3u32.into());
    let b = args.get(1).cloned().unwrap_or_else(|| 2u32.into());
    let cert = sigma(&a, &b).expect("coprime bases");
    for e in &cert.entries {
        println!("{e:?}");
    }
    println!("a^sigma = {}  (sigma ~ {:.4})", cert.a_sigma, cert.sigma_f64());
}
