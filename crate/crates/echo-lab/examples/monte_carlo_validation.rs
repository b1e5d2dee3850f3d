//! Monte-Carlo round trips: synthesize each bundled experiment from its
//! reference truth, refit, and tabulate how well every parameter comes
//! back across seeds.
//!
//! Run with: cargo run --example monte_carlo_validation

use echo_lab::synth::{monte_carlo_roundtrip, Experiment, ExperimentKind};

fn main() -> echo_lab::Result<()> {
    for kind in ExperimentKind::all() {
        let experiment = Experiment::reference(kind);
        let n_seeds = experiment.default_seeds;
        let report = monte_carlo_roundtrip(&experiment, n_seeds, 1)?;
        println!(
            "{} ({} seeds, noise {:.0}%{}):",
            kind.name(),
            n_seeds,
            experiment.relative_sigma * 100.0,
            if experiment.additive_floor > 0.0 {
                format!(" + {:.0e} floor", experiment.additive_floor)
            } else {
                String::new()
            }
        );
        println!(
            "  {:<10} {:>12} {:>12} {:>24} {:>8}",
            "parameter", "truth", "median", "central 90%", "pass"
        );
        for p in &report.params {
            let pass = match &p.tolerance {
                Some(t) => format!("{:.2} @{}", p.within_fraction, t.describe()),
                None => "-".to_string(),
            };
            println!(
                "  {:<10} {:>12.4e} {:>12.4e} [{:>10.4e}, {:>10.4e}] {:>8}",
                p.name, p.truth, p.median, p.p5, p.p95, pass
            );
        }
        println!(
            "  converged {}/{}; gated parameters {}\n",
            report.n_converged,
            report.n_seeds,
            if report.passes() { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}
