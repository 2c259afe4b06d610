//! Saint-Venant equations linearized at the equilibrium, closed into a loop:
//! the canal outflow at `x = L` re-enters at `x = 0`.
//!
//! Speeds are the constant equilibrium speeds, there is no source and the
//! boundary conditions read `s(t,0) = s(t,L)`, `r(t,L) = r(t,0)`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::saint_venant::CanalSpec;
use super::Application;
use crate::error::Result;
use crate::signal::Profile;
use crate::system::{ChartMap, DiagonalSystem, NonlocalBC, PhysicalChart};

/// Build the linear loop scenario for a canal.
pub fn lin_sv_loop(spec: &CanalSpec) -> Result<Application> {
    spec.validate()?;
    let (l1, l2) = spec.equilibrium_speeds();
    let system = DiagonalSystem::constant(spec.length, spec.admissible_radius()?, &[l1, l2])?;
    let bc = NonlocalBC::linear(2, 2, vec![0.0, 1.0, 1.0, 0.0])?;
    Ok(Application {
        system,
        bc,
        chart: linear_chart(spec),
    })
}

/// Linearized chart `r = (δV - γ δA)/2`, `s = (δV + γ δA)/2` with
/// `γ = sqrt(g H'(Ã) / Ã)`.
pub fn linear_chart(spec: &CanalSpec) -> PhysicalChart {
    let gamma = spec.riemann_density(spec.area);
    let (a0, v0) = (spec.area, spec.velocity);
    let to: ChartMap = Arc::new(move |u, v| {
        let (da, dv) = (u[0] - a0, u[1] - v0);
        v[0] = 0.5 * (dv - gamma * da);
        v[1] = 0.5 * (dv + gamma * da);
        Ok(())
    });
    let from: ChartMap = Arc::new(move |v, u| {
        u[0] = a0 + (v[1] - v[0]) / gamma;
        u[1] = v0 + v[0] + v[1];
        Ok(())
    });
    PhysicalChart::new(to, from, vec![a0, v0], vec!["A".into(), "V".into()])
        .expect("linear chart maps the equilibrium to the origin")
}

/// `amplitude * (sin(2πx/L), cos(2πx/L) - 1)`.
pub fn loop_initial(amplitude: f64, length: f64, nx: usize) -> Profile {
    Profile::from_fn(length, 2, nx, |x, out| {
        let k = 2.0 * PI * x / length;
        out[0] = amplitude * k.sin();
        out[1] = amplitude * (k.cos() - 1.0);
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::check_compatibility;

    #[test]
    fn speeds_match_the_equilibrium() {
        let spec = CanalSpec::default();
        let app = lin_sv_loop(&spec).unwrap();
        let c = (9.81_f64 * 2.0).sqrt();
        let lam = app.system.speeds_at_zero();
        assert!((lam[0] - (0.5 - c)).abs() < 1e-14);
        assert!((lam[1] - (0.5 + c)).abs() < 1e-14);
    }

    #[test]
    fn chart_round_trip() {
        let spec = CanalSpec::default();
        let chart = linear_chart(&spec);
        let (mut v, mut u) = ([0.0; 2], [0.0; 2]);
        chart.to_diag(&[2.1, 0.4], &mut v).unwrap();
        chart.from_diag(&v, &mut u).unwrap();
        assert!((u[0] - 2.1).abs() < 1e-14 && (u[1] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn initial_data_is_compatible() {
        let app = lin_sv_loop(&CanalSpec::default()).unwrap();
        let phi = loop_initial(1e-3, 1.0, 100);
        let rep = check_compatibility(&app.system, &app.bc, &phi, 0).unwrap();
        assert!(rep.max_c0() < 1e-15);
    }
}
