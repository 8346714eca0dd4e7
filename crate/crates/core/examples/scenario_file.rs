//! Run a scenario from TOML text and print the structured report.

use everett_dm::scenario::{exit_status, run, RunOptions, ScenarioFile};

const TEXT: &str = r#"
version = 1
kind = "mcqueen_vaidman"
id = "four-stations"

[mcqueen_vaidman]
n = 4

[[expect]]
key = "credence:station:2"
equals = "1/4"
"#;

fn main() -> everett_dm::Result<()> {
    let file = ScenarioFile::parse(TEXT, "inline")?;
    let report = run(&file, &RunOptions::default())?;
    println!("{}", report.to_json());
    std::process::exit(exit_status(&report));
}
