//! Run every built-in case and summarize.

use everett_dm::scenario::{reproduce_all, Context};

fn main() {
    let mut failed = 0;
    for r in reproduce_all(&Context::default()) {
        match r {
            Ok(report) => {
                let mark = if report.passed() { "ok  " } else { "FAIL" };
                failed += usize::from(!report.passed());
                println!("{mark} {:<28} {:>8.1} ms", report.id, report.wall_time_ms);
            }
            Err(e) => {
                failed += 1;
                println!("ERR  {e}");
            }
        }
    }
    std::process::exit(i32::from(failed > 0));
}
