//! Bifurcation diagram of the transcritical family, written as CSV to stdout.
use snbif::report::diagram_csv;
use snbif::{sweep, Family, RhsModel, Scenario};

fn main() {
    let s = Scenario::autonomous(RhsModel::cubic_const([0.0, 0.0, 1.0, -1.0]), Family::Linear).with_sweep(-0.5, 0.5, 21);
    let d = sweep(&s).expect("sweep");
    print!("{}", diagram_csv(&d));
    eprintln!("classification: {}", d.classification.as_str());
    for p in &d.points {
        eprintln!("{:?} at {:.6} (±{:.1e})", p.kind, p.location, p.width);
    }
    if let Some(z) = d.zero_crossing {
        eprintln!("zero-section exponent changes sign at {z:.6}");
    }
}
