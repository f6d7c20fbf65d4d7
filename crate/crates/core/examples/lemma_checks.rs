//! Inequality and Gronwall checks on random samples.

use fks::verify::{check_gronwall, check_inequalities, yakupov_spot_check};

fn main() {
    let seed = 11;
    let mut reports = check_inequalities(seed, 40);
    reports.extend(check_gronwall(seed, 8));
    reports.push(yakupov_spot_check(seed, 400));
    for r in &reports {
        println!("{:<5} {:<26} samples {:>6} margin {:>11.3e}", if r.passed { "pass" } else { "FAIL" }, r.name, r.samples, r.worst_margin);
    }
}
