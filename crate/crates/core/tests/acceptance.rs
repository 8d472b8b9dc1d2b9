use std::process::ExitCode;

use mcnls::verify::{run_criterion, VerifyOptions, CRITERIA};

fn main() -> ExitCode {
    let only: Vec<u32> = std::env::var("MCNLS_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect())
        .unwrap_or_default();
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        match run_criterion(id, &opts) {
            Ok(r) => {
                println!("{}", r.line());
                if !r.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("[FAIL] {id:>2} error: {e}");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {failed:?}");
        ExitCode::FAILURE
    }
}
