//! Property tests for the forward models, unit layer, noise model and
//! trace format.

use approx::assert_relative_eq;
use echo_lab::fit::ModelKind;
use echo_lab::models;
use echo_lab::params::{
    CoherenceParams, DecayModelParams, DiffusionParams, DopingProfileParams, LevelScheme,
    StarkParams,
};
use echo_lab::synth::{synthesize, ExperimentSchedule, NoiseModel, ScheduleKind};
use echo_lab::units::Unit;
use echo_lab::{SamplePoint, TimeSeries, ValueUnit};
use proptest::prelude::*;

fn any_unit() -> impl Strategy<Value = Unit> {
    prop_oneof![
        Just(Unit::Second),
        Just(Unit::Millisecond),
        Just(Unit::Microsecond),
        Just(Unit::Nanosecond),
        Just(Unit::Hertz),
        Just(Unit::Kilohertz),
        Just(Unit::Megahertz),
        Just(Unit::VoltPerCm),
        Just(Unit::VoltPerMm),
        Just(Unit::VoltPerM),
        Just(Unit::InverseCm),
    ]
}

proptest! {
    #[test]
    fn unit_round_trip_is_identity(unit in any_unit(), value in 1e-12f64..1e12) {
        let back = unit.from_base(unit.to_base(value));
        prop_assert!((back - value).abs() <= 1e-12 * value.abs());
    }

    #[test]
    fn hole_decay_bounded_and_decreasing(
        b in 0.01f64..0.99,
        t1e in 1e-6f64..1e-3,
        ratio in 1.5f64..500.0,
        steps in 2usize..40,
    ) {
        let p = DecayModelParams::new(b, t1e, t1e * ratio).unwrap();
        let tmax = 10.0 * t1e * ratio;
        let mut prev = f64::INFINITY;
        for i in 0..steps {
            let t = tmax * i as f64 / steps as f64;
            let v = models::hole_decay_fraction(t, &p).unwrap();
            prop_assert!(v > 0.0 && v <= 1.0);
            prop_assert!(v < prev || i == 0);
            prev = v;
        }
    }

    #[test]
    fn stark_shift_is_linear(slope in -1e5f64..1e5, e1 in -1e4f64..1e4, e2 in -1e4f64..1e4, a in -50f64..50.0) {
        let s = StarkParams::new(slope).unwrap();
        let f = |e: f64| models::stark_shift(e, &s).unwrap();
        let scale = slope.abs() * (e1.abs() + e2.abs()) + 1e-30;
        prop_assert!((f(e1 + e2) - (f(e1) + f(e2))).abs() <= 1e-12 * scale);
        let scale = (slope * a * e1).abs() + 1e-30;
        prop_assert!((f(a * e1) - a * f(e1)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn diffusion_coefficient_scaling_laws(d in 0.1f64..100.0, t in 0.1f64..1e4, k in 0.1f64..30.0) {
        let base = models::diffusion_coefficient(d, t).unwrap();
        let depth_scaled = models::diffusion_coefficient(k * d, t).unwrap();
        let time_scaled = models::diffusion_coefficient(d, k * t).unwrap();
        prop_assert!((depth_scaled / (k * k * base) - 1.0).abs() < 1e-12);
        prop_assert!((time_scaled * k / base - 1.0).abs() < 1e-12);
    }

    #[test]
    fn afc_storage_time_inverts_spacing(spacing in 1e-3f64..1e12) {
        let t = models::afc_storage_time(spacing).unwrap();
        prop_assert!((t * spacing - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mims_with_unit_exponent_is_pure_exponential(
        i0 in 0.1f64..10.0,
        t2 in 1e-7f64..1e-5,
        steps in 1usize..30,
    ) {
        let c = CoherenceParams::new(i0, t2, 1.0).unwrap();
        for i in 0..steps {
            let t = 2.0 * t2 * i as f64 / steps as f64;
            let v = models::mims_echo_intensity(t, &c).unwrap();
            let exact = i0 * (-4.0 * t / t2).exp();
            prop_assert!((v / exact - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mims_strictly_decreasing(
        i0 in 0.1f64..10.0,
        t2 in 1e-7f64..1e-5,
        x in 0.3f64..3.0,
    ) {
        let c = CoherenceParams::new(i0, t2, x).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..30 {
            let t = 1e-9 + 3.0 * t2 * i as f64 / 30.0;
            let v = models::mims_echo_intensity(t, &c).unwrap();
            // strictly decreasing until the tail underflows to exactly zero
            prop_assert!(v < prev || prev == 0.0);
            prev = v;
        }
    }

    #[test]
    fn boltzmann_sums_to_one_and_warms_up(
        e1 in 0.5f64..100.0,
        e2 in 0.5f64..100.0,
        g0 in 1u32..4,
        g1 in 1u32..4,
        t_cold in 0.5f64..10.0,
        dt in 0.1f64..100.0,
    ) {
        let scheme = LevelScheme::new(vec![(0.0, g0), (e1, g1), (e1 + e2, 1)]).unwrap();
        let cold = models::boltzmann_occupation(&scheme, t_cold).unwrap();
        let warm = models::boltzmann_occupation(&scheme, t_cold + dt).unwrap();
        let sum: f64 = cold.fractions.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(warm.excited_fraction > cold.excited_fraction);
    }

    #[test]
    fn gaussian_profile_monotone_from_peak(
        peak in 1e18f64..1e21,
        d1e in 0.5f64..20.0,
    ) {
        let p = DopingProfileParams::new(peak, d1e, 150.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..25 {
            let z = 4.0 * d1e * i as f64 / 25.0;
            let v = models::gaussian_profile(z, &p).unwrap();
            prop_assert!(v <= peak);
            prop_assert!(v < prev || i == 0);
            prev = v;
        }
    }

    #[test]
    fn effective_linewidth_nondecreasing_both_arguments(
        gamma0 in 0f64..1e6,
        gamma_sd in 0f64..3e6,
        rate in 1e3f64..1e6,
        td in 0f64..1e-6,
        tw in 0f64..1e-3,
        dtd in 1e-10f64..1e-6,
        dtw in 1e-8f64..1e-3,
    ) {
        let d = DiffusionParams::new(gamma0, gamma_sd, rate).unwrap();
        let base = models::effective_linewidth(td, tw, &d).unwrap();
        prop_assert!(models::effective_linewidth(td + dtd, tw, &d).unwrap() >= base);
        prop_assert!(models::effective_linewidth(td, tw + dtw, &d).unwrap() >= base);
        // td = 0 slice equals the waiting-time-only form exactly
        let a = models::effective_linewidth(0.0, tw, &d).unwrap();
        let b = models::linewidth_saturation(tw, &d).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn synthesize_deterministic_per_seed(seed in 0u64..1_000_000, rel in 0.001f64..0.2) {
        let schedule = ExperimentSchedule::canonical(ScheduleKind::TwoPulseEcho);
        let params = [
            ("i0".to_string(), 1.0),
            ("t2".to_string(), 1.58e-6),
            ("x".to_string(), 1.072),
        ];
        let noise = NoiseModel::new(rel, 0.0, seed).unwrap();
        let a = synthesize(ModelKind::Mims, &params, &schedule, &noise).unwrap();
        let b = synthesize(ModelKind::Mims, &params, &schedule, &noise).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn trace_round_trip_bit_exact(
        values in prop::collection::vec((1e-9f64..1e3, -1e3f64..1e3, 1e-9f64..10.0), 1..40),
    ) {
        // build strictly increasing times by cumulative sums
        let mut t_acc = 0.0;
        let points: Vec<SamplePoint> = values
            .iter()
            .map(|&(dt, y, sigma)| {
                t_acc += dt;
                SamplePoint { t: t_acc, y, sigma: Some(sigma) }
            })
            .collect();
        let series = TimeSeries::new(points, ValueUnit::Intensity).unwrap();
        let mut buf = Vec::new();
        echo_lab::trace::write_trace(&mut buf, &series, &[]).unwrap();
        let back = echo_lab::trace::read_trace(buf.as_slice()).unwrap();
        prop_assert_eq!(series.len(), back.len());
        for (a, b) in series.points().iter().zip(back.points()) {
            prop_assert_eq!(a.t.to_bits(), b.t.to_bits());
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
            prop_assert_eq!(a.sigma.unwrap().to_bits(), b.sigma.unwrap().to_bits());
        }
    }

    #[test]
    fn out_of_range_parameters_rejected(
        b_bad in prop_oneof![-10f64..-0.0001, 1.0001f64..10.0],
        nonpos in -10f64..0.0,
    ) {
        prop_assert!(DecayModelParams::new(b_bad, 1e-5, 1e-3).is_err());
        prop_assert!(DecayModelParams::new(0.5, nonpos, 1e-3).is_err());
        prop_assert!(CoherenceParams::new(nonpos, 1e-6, 1.0).is_err());
        prop_assert!(DiffusionParams::new(nonpos, 0.0, 0.0).is_err());
        prop_assert!(DopingProfileParams::new(1e20, nonpos, 1.0).is_err());
    }
}

#[test]
fn branching_beta_limit_matches_twice_amplitude() {
    // in the well-separated limit the conversion approaches 2B
    for b in [0.1, 0.25, 0.436, 0.5] {
        let p = DecayModelParams::new(b, 1e-9, 1.0).unwrap();
        assert_relative_eq!(models::branching_beta(&p).unwrap(), 2.0 * b, max_relative = 1e-8);
    }
}
