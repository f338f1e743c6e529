//! Running a canned scenario and reading its JSON report back.

use facloc::report::ExperimentReport;
use facloc::scenarios;

fn main() -> facloc::Result<()> {
    let outcome = scenarios::run("l1-median", 0)?;
    print!("{}", outcome.text);
    let json = outcome.report.to_json()?;
    let back = ExperimentReport::from_json(&json)?;
    assert_eq!(back, outcome.report);
    println!(
        "{} bytes of JSON, {} contradiction(s)",
        json.len(),
        back.contradictions().len()
    );
    Ok(())
}
