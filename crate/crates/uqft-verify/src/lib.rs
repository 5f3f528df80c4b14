//! Runs the acceptance checks of the `uqft` library and formats a report.

use uqft::checks::{run_check, CheckOutcome, CRITERIA};

/// Runs the selected criteria (all when empty), printing one line per
/// criterion as soon as it finishes.
pub fn run_and_print(ids: &[usize]) -> Vec<CheckOutcome> {
    let selected: Vec<usize> = if ids.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        ids.to_vec()
    };
    selected
        .into_iter()
        .filter_map(|id| {
            let o = run_check(id)?;
            println!("{}", o.line());
            Some(o)
        })
        .collect()
}

/// Summary line: passed over total.
pub fn summary(outcomes: &[CheckOutcome]) -> String {
    let passed = outcomes.iter().filter(|o| o.passed).count();
    format!("acceptance: {passed}/{} criteria passed", outcomes.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_counts_passes() {
        let o = run_and_print(&[6]);
        assert_eq!(summary(&o), "acceptance: 1/1 criteria passed");
    }
}
