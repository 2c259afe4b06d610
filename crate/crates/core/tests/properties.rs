use std::f64::consts::PI;

use proptest::prelude::*;

use hypctrl::applications::saint_venant::{sv_chart, CanalSpec};
use hypctrl::applications::wave::{wave_chart, WaveSpec};
use hypctrl::obstructions::{loop_invariant, LoopScenario};
use hypctrl::scenario::{presets, DataSpec, ScenarioConfig};
use hypctrl::solver::solve_forward;
use hypctrl::{Profile, Signal};

fn round_trip_error(chart: &hypctrl::PhysicalChart, u: &[f64]) -> f64 {
    let mut d = vec![0.0; u.len()];
    let mut back = vec![0.0; u.len()];
    chart.to_diag(u, &mut d).unwrap();
    chart.from_diag(&d, &mut back).unwrap();
    u.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canal_chart_round_trips(da in -0.3..0.3_f64, dv in -0.3..0.3_f64) {
        let spec = CanalSpec::default();
        let chart = sv_chart(&spec).unwrap();
        let eq = chart.equilibrium().to_vec();
        let u = [eq[0] + da, eq[1] + dv];
        prop_assert!(round_trip_error(&chart, &u) <= 1e-10);
    }

    #[test]
    fn wave_chart_round_trips(u in -0.1..0.1_f64, ux in -0.1..0.1_f64, ut in -0.1..0.1_f64) {
        let spec = WaveSpec::klein_gordon(1.0, 1.0, 1.0);
        let chart = wave_chart(&spec);
        prop_assert!(round_trip_error(&chart, &[u, ux, ut]) <= 1e-12);
    }

    #[test]
    fn zero_data_stays_zero(which in 0usize..5, nx in 8usize..80, frac in 0.1..1.0_f64) {
        let cfg = presets()[which].config.with_zero_data();
        let horizon = frac * cfg.horizon();
        let app = cfg.application(nx).unwrap();
        let phi = cfg.initial_profile(nx).unwrap();
        let f = solve_forward(&app.system, &app.bc, &phi, horizon, nx, &Default::default()).unwrap();
        prop_assert!(f.is_zero());
    }

    #[test]
    fn scenario_json_round_trips(
        which in 0usize..5,
        nx in 8usize..2000,
        horizon in 0.01..50.0_f64,
        amplitude in -1.0..1.0_f64,
        mode in 1u32..6,
    ) {
        let mut cfg = presets()[which].config.clone();
        cfg.grid.nx = nx;
        cfg.grid.horizon = horizon;
        cfg.initial = DataSpec::Sine { amplitude, mode };
        cfg.target = DataSpec::Bump { amplitude: -amplitude };
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn loop_invariant_is_conserved(
        coeffs in proptest::collection::vec(-0.5..0.5_f64, 4),
        r0 in -1.0..1.0_f64,
        s0 in -1.0..1.0_f64,
    ) {
        let horizon = 2.0;
        let h = Signal::from_fn(horizon, 2001, |t| {
            coeffs.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * PI * t / horizon).sin()).sum()
        });
        let nx = 100;
        let scn = LoopScenario::constant((-1.0, 1.0), 1.0, r0, s0, h, 1.0, nx);
        let f = scn.solve(nx, &scn.aligned_options(nx).unwrap()).unwrap();
        let series = loop_invariant(&f, &scn);
        prop_assert!(series.drift <= 1e-10, "drift {}", series.drift);
    }

    #[test]
    fn signal_interpolation_hits_samples(values in proptest::collection::vec(-10.0..10.0_f64, 2..50)) {
        let s = Signal::new(3.0, values.clone()).unwrap();
        for (k, v) in values.iter().enumerate() {
            prop_assert!((s.eval(k as f64 * s.dt()) - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn profile_resample_is_exact_for_linear_data(a in -5.0..5.0_f64, b in -5.0..5.0_f64, nx in 2usize..60) {
        let p = Profile::from_fn(2.0, 1, nx, |x, o| o[0] = a + b * x);
        let q = p.resample(3 * nx + 1);
        let exact = Profile::from_fn(2.0, 1, 3 * nx + 1, |x, o| o[0] = a + b * x);
        prop_assert!(q.sup_distance(&exact) <= 1e-12);
    }
}
