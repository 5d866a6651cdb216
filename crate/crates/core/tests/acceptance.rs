//! Acceptance suite: one line per criterion, then a single assertion so every
//! criterion is reported even when an earlier one fails.

use biphoton_pmd::validation::{run_all, ValidationOptions};

#[test]
fn acceptance_criteria() {
    let outcomes = run_all(&ValidationOptions::default());
    for o in &outcomes {
        println!("{}", o.line());
        for n in &o.notes {
            println!("       note: {n}");
        }
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn harness_detects_perturbed_oracle() {
    let opts = ValidationOptions {
        analytic_perturbation: 1e-3,
    };
    let o = biphoton_pmd::validation::check_closed_form(&opts);
    assert!(!o.passed, "{}", o.line());
}
