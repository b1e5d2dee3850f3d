//! Thermal occupation of low-lying crystal-field levels: how much ground
//! population sits in excited levels at cryogenic temperatures.
//!
//! Run with: cargo run --example thermal_population

use echo_lab::models;
use echo_lab::params::LevelScheme;

fn main() -> echo_lab::Result<()> {
    // the two candidate level splittings, in wavenumbers
    for (label, splitting) in [("7.6 cm^-1", 7.6), ("14.7 cm^-1", 14.7)] {
        let scheme = LevelScheme::new(vec![(0.0, 1), (splitting, 1)])?;
        println!("two-level scheme, splitting {label}:");
        println!("{:>8} {:>16} {:>16}", "T (K)", "ground", "excited");
        for t in [1.5, 3.0, 4.2, 10.0, 77.0, 300.0] {
            let occ = models::boltzmann_occupation(&scheme, t)?;
            println!(
                "{t:>8} {:>16.6} {:>16.3e}",
                occ.fractions[0], occ.excited_fraction
            );
        }
        println!();
    }

    // a fuller scheme with both splittings and a higher level
    let scheme = LevelScheme::new(vec![(0.0, 1), (7.6, 1), (14.7, 1), (50.0, 2)])?;
    let occ = models::boltzmann_occupation(&scheme, 3.0)?;
    println!("four-level scheme at 3 K:");
    for ((energy, g), fraction) in scheme.levels().iter().zip(&occ.fractions) {
        println!("  E = {energy:>5.1} cm^-1 (g = {g}): {fraction:.4e}");
    }
    println!("  total excited fraction: {:.4e}", occ.excited_fraction);
    Ok(())
}
