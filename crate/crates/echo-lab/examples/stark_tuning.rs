//! Electric-field control: linear Stark shifts for a measured slope, and
//! the storage time an absorption comb supports.
//!
//! Run with: cargo run --example stark_tuning

use echo_lab::models;
use echo_lab::params::StarkParams;

fn main() -> echo_lab::Result<()> {
    let stark = StarkParams::new(24.6e3)?; // Hz·cm/V
    println!("slope: 24.6 kHz·cm/V\n");
    println!("{:>10} {:>12}", "field", "shift");
    for field_v_per_mm in [-100.0, -50.0, -10.0, 0.0, 10.0, 50.0, 100.0] {
        let field_v_per_cm = field_v_per_mm * 10.0;
        let shift = models::stark_shift(field_v_per_cm, &stark)?;
        println!("{:>7} V/mm {:>9.2} MHz", field_v_per_mm, shift / 1e6);
    }

    println!("\nwith 10 um electrode spacing, 1 V gives a field of 1000 V/cm:");
    println!(
        "  shift = {:.1} MHz per volt",
        models::stark_shift(1000.0, &stark)? / 1e6
    );

    println!("\ncomb storage times (1/tooth spacing):");
    for spacing_mhz in [0.5, 1.0, 3.0, 10.0] {
        let t = models::afc_storage_time(spacing_mhz * 1e6)?;
        println!("  {spacing_mhz:>4} MHz spacing -> {:.1} ns", t * 1e9);
    }
    Ok(())
}
