//! Two-pulse echo decay: simulate the delay scan, fit the stretched
//! exponential, and derive the homogeneous linewidth from the coherence
//! time.
//!
//! Run with: cargo run --example coherence_mims

use echo_lab::fit::{fit_mims, FitOptions, ModelKind};
use echo_lab::models;
use echo_lab::params::CoherenceParams;
use echo_lab::synth::{synthesize, ExperimentSchedule, NoiseModel, ScheduleKind};

fn main() -> echo_lab::Result<()> {
    let truth = CoherenceParams::new(1.0, 1.58e-6, 1.072)?;
    println!(
        "truth: T2 = {:.3} us, x = {:.3}; natural width for T1e = 82 us: {:.2} kHz",
        truth.t2() * 1e6,
        truth.x(),
        models::natural_linewidth(82e-6)? / 1e3
    );

    // delays 100 ns .. 1.8 us in 25 ns steps (69 points), 3% noise
    let schedule = ExperimentSchedule::canonical(ScheduleKind::TwoPulseEcho);
    let params = [
        ("i0".to_string(), truth.i0()),
        ("t2".to_string(), truth.t2()),
        ("x".to_string(), truth.x()),
    ];
    let data = synthesize(ModelKind::Mims, &params, &schedule, &NoiseModel::new(0.03, 0.0, 7)?)?;

    let fit = fit_mims(&data, &FitOptions::default())?;
    println!("\nfit converged: {}", fit.converged);
    for name in ["i0", "t2", "x"] {
        println!(
            "  {name:<3} = {:.6e} +- {:.2e}",
            fit.estimate(name).unwrap(),
            fit.uncertainty(name).unwrap()
        );
    }
    println!(
        "  homogeneous linewidth 1/(pi T2) = {:.1} kHz",
        fit.derived_value("homogeneous_linewidth").unwrap() / 1e3
    );
    Ok(())
}
