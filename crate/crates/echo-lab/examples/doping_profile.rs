//! In-diffused dopant profile: the diffusion coefficient implied by a
//! measured 1/e depth, and the concentration-vs-depth curve.
//!
//! Run with: cargo run --example doping_profile

use echo_lab::models;
use echo_lab::params::DopingProfileParams;

fn main() -> echo_lab::Result<()> {
    let profile = DopingProfileParams::new(1.35e20, 6.5, 150.0)?;
    let d = models::diffusion_coefficient(profile.d1e(), profile.diffusion_time())?;
    println!(
        "1/e depth {:.1} um after {} h -> D = {:.4} um^2/h",
        profile.d1e(),
        profile.diffusion_time(),
        d
    );

    println!("\n{:>10} {:>18}", "depth (um)", "ions per cm^3");
    for i in 0..=10 {
        let z = 2.0 * i as f64;
        println!("{z:>10.1} {:>18.4e}", models::gaussian_profile(z, &profile)?);
    }

    println!("\nconcentration falls to 1/e of the peak at z = d1e:");
    println!(
        "  n({:.1} um) = {:.4e} = peak/e = {:.4e}",
        profile.d1e(),
        models::gaussian_profile(profile.d1e(), &profile)?,
        profile.peak_concentration() / std::f64::consts::E
    );
    Ok(())
}
