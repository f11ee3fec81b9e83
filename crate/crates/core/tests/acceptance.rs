//! Acceptance run: one PASS/FAIL line per criterion, then a nonzero exit if
//! any criterion failed.

use hardy_core::criteria::{run_criterion, IDS};

const SEED: u64 = 20_240_611;

fn main() {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for id in IDS {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        match run_criterion(id, SEED) {
            Ok(r) => {
                let tag = if r.pass { "PASS" } else { "FAIL" };
                println!("{tag} {id} ({:.2}s / {:.0}s) {}", r.seconds, r.budget_seconds, r.summary);
                if !r.pass {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("FAIL {id} error: {e}");
                failed.push(id);
            }
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
    println!("acceptance: all passed");
}
