//! Trace CSV round trip: write a synthesized series with provenance,
//! read it back bit-exactly, and show the annotations it carries.
//!
//! Run with: cargo run --example trace_io

use echo_lab::fit::ModelKind;
use echo_lab::synth::{synthesize, ExperimentSchedule, NoiseModel, ScheduleKind};
use echo_lab::trace;

fn main() -> echo_lab::Result<()> {
    let schedule = ExperimentSchedule::canonical(ScheduleKind::TwoPulseEcho);
    let params = [
        ("i0".to_string(), 1.0),
        ("t2".to_string(), 1.58e-6),
        ("x".to_string(), 1.072),
    ];
    let series = synthesize(ModelKind::Mims, &params, &schedule, &NoiseModel::new(0.03, 0.0, 9)?)?;

    let mut buf = Vec::new();
    trace::write_trace(
        &mut buf,
        &series,
        &[
            ("command".to_string(), "trace_io example".to_string()),
            ("version".to_string(), echo_lab::VERSION.to_string()),
            ("seed".to_string(), "9".to_string()),
        ],
    )?;
    let text = String::from_utf8(buf.clone()).unwrap();
    println!("first lines of the trace file:");
    for line in text.lines().take(8) {
        println!("  {line}");
    }
    println!("  ... {} data rows total\n", series.len());

    let back = trace::read_trace(buf.as_slice())?;
    let exact = series
        .points()
        .iter()
        .zip(back.points())
        .all(|(a, b)| a.t.to_bits() == b.t.to_bits() && a.y.to_bits() == b.y.to_bits());
    println!("read back {} points, bit-exact: {exact}", back.len());
    println!("annotations: {:?}", back.meta());
    Ok(())
}
