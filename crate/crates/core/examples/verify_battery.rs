//! Run the property-test battery and print the ledger.
//!
//! Usage: `cargo run --release --example verify_battery -- [quick|full] [seed]`

use sdns::verify::{all_passed, render_text, run_all, Profile};

fn main() -> sdns::Result<()> {
    let mut args = std::env::args().skip(1);
    let profile: Profile = args.next().as_deref().unwrap_or("quick").parse()?;
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let rows = run_all(profile, seed);
    print!("{}", render_text(&rows));
    println!("{}", if all_passed(&rows) { "all checks passed" } else { "some checks failed" });
    Ok(())
}
