//! Runs the catalog harness on a few entries and prints the JSON report.

use transgroups::catalog::{self, Format};

fn main() {
    let seed = std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let reports: Vec<_> = ["ex90-60c", "ex94-21"].iter().map(|id| catalog::verify_entry(&catalog::find_entry(id).unwrap(), seed)).collect();
    print!("{}", catalog::export_report(&reports, Format::Json));
    let all = catalog::builtin_entries();
    let failing: Vec<String> = all.iter().map(|e| catalog::verify_entry(e, seed)).filter(|r| !r.passed()).map(|r| r.entry).collect();
    println!("{} entries, failing: {:?}", all.len(), failing);
}
