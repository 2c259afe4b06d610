//! JSON scenario descriptions and the built-in presets.
//!
//! ```json
//! {"kind": "saint-venant", "params": {"boundary": "energy"},
//!  "bc": {"h": "zero", "hbar": {"preset": "sin", "amplitude": 1e-4, "frequency": 2.0}},
//!  "grid": {"Nx": 200, "T": 0.3},
//!  "initial": {"profile": "bump", "amplitude": 1e-3}}
//! ```
//!
//! Saint-Venant and loop data are given in Riemann invariants, wave data as
//! displacement and velocity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::applications::linear_loop::lin_sv_loop;
use crate::applications::saint_venant::{sv_build, CanalSpec, DepthLaw, SvBoundaryKind};
use crate::applications::wave::{wave_bc, wave_build, wave_initial, WaveSpec};
use crate::applications::Application;
use crate::error::{Error, Result};
use crate::signal::{Profile, Signal};

/// Samples used for analytic signal presets.
pub const SIGNAL_SAMPLES: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    SaintVenant,
    LinearLoop,
    Wave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryName {
    Energy,
    WaterLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxName {
    Linear,
    Cubic,
    KleinGordon,
}

/// Physical parameters; anything absent takes the default canal or the
/// linear wave on `[0, 2π]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<f64>,
    /// Width of the rectangular cross-section.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalName {
    Zero,
    Sin,
}

/// A boundary signal: sample array over `[0, T]`, a bare preset name, or a
/// preset with `amplitude` and `frequency` (`a sin(2π f t)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalSpec {
    Samples(Vec<f64>),
    Named(SignalName),
    Preset {
        preset: SignalName,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for SignalSpec {
    fn default() -> Self {
        SignalSpec::Named(SignalName::Zero)
    }
}

impl SignalSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            SignalSpec::Samples(v) => v.iter().all(|x| *x == 0.0),
            SignalSpec::Named(n) => *n == SignalName::Zero,
            SignalSpec::Preset { preset, amplitude, .. } => *preset == SignalName::Zero || *amplitude == 0.0,
        }
    }

    pub fn to_signal(&self, horizon: f64) -> Result<Signal> {
        let sine = |a: f64, f: f64| {
            let w = 2.0 * PI * f;
            Signal::from_fn_with_derivative(
                horizon,
                SIGNAL_SAMPLES,
                move |t| a * (w * t).sin(),
                move |t| a * w * (w * t).cos(),
            )
        };
        match self {
            SignalSpec::Samples(v) => Signal::new(horizon, v.clone()),
            SignalSpec::Named(SignalName::Zero) | SignalSpec::Preset { preset: SignalName::Zero, .. } => {
                Ok(Signal::from_fn_with_derivative(horizon, 2, |_| 0.0, |_| 0.0))
            }
            SignalSpec::Named(SignalName::Sin) => Ok(sine(1.0, 1.0)),
            SignalSpec::Preset { amplitude, frequency, .. } => Ok(sine(*amplitude, *frequency)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(default)]
    pub h: SignalSpec,
    #[serde(default)]
    pub hbar: SignalSpec,
}

impl BcConfig {
    pub fn is_zero(&self) -> bool {
        self.h.is_zero() && self.hbar.is_zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessName {
    Sine,
    Cosine,
}

/// Initial or target state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum DataSpec {
    #[default]
    Zero,
    /// `a sin⁴(πx/L)`, vanishing with its derivatives at both ends.
    Bump { amplitude: f64 },
    /// `a sin(2πmx/L)`; the second invariant gets `a (cos(2πmx/L) - 1)`.
    Sine { amplitude: f64, mode: u32 },
    /// Wave only: data of the `sin(kt) sin(kx)` or `cos(kt) cos(kx)` mode
    /// with `k = 2πm/L`.
    Eigenmode { mode: u32, witness: WitnessName },
}

impl DataSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            DataSpec::Zero => true,
            DataSpec::Bump { amplitude } | DataSpec::Sine { amplitude, .. } => *amplitude == 0.0,
            DataSpec::Eigenmode { .. } => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub bc: BcConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub initial: DataSpec,
    /// Final state for control runs.
    #[serde(default)]
    pub target: DataSpec,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("scenario config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.nx < 8 {
            return Err(Error::InvalidInput(format!("Nx must be at least 8, got {}", self.grid.nx)));
        }
        if !(self.grid.horizon > 0.0 && self.grid.horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("T must be positive, got {}", self.grid.horizon)));
        }
        match self.kind {
            ScenarioKind::Wave => self.wave()?.validate(),
            _ => {
                for d in [self.initial, self.target] {
                    if matches!(d, DataSpec::Eigenmode { .. }) {
                        return Err(Error::InvalidInput("eigenmode data exist only for the wave equation".into()));
                    }
                }
                self.canal()?.validate()
            }
        }
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon
    }

    pub fn length(&self) -> f64 {
        match self.kind {
            ScenarioKind::Wave => self.params.length.unwrap_or(2.0 * PI),
            _ => self.params.length.unwrap_or(CanalSpec::default().length),
        }
    }

    pub fn canal(&self) -> Result<CanalSpec> {
        let d = CanalSpec::default();
        let p = &self.params;
        Ok(CanalSpec {
            gravity: p.gravity.unwrap_or(d.gravity),
            depth: p.width.map(DepthLaw::rectangular).unwrap_or(d.depth),
            area: p.area.unwrap_or(d.area),
            velocity: p.velocity.unwrap_or(d.velocity),
            length: self.length(),
        })
    }

    pub fn boundary_kind(&self) -> SvBoundaryKind {
        match self.params.boundary {
            Some(BoundaryName::WaterLevel) => SvBoundaryKind::WaterLevel,
            _ => SvBoundaryKind::Energy,
        }
    }

    pub fn wave(&self) -> Result<WaveSpec> {
        let p = &self.params;
        let (c, l) = (p.speed.unwrap_or(1.0), self.length());
        let spec = match p.flux.unwrap_or(FluxName::Linear) {
            FluxName::Linear => WaveSpec::linear(c, l),
            FluxName::Cubic => WaveSpec::cubic(c, p.kappa.unwrap_or(0.5), l),
            FluxName::KleinGordon => WaveSpec::klein_gordon(c, p.mass.unwrap_or(1.0), l),
        };
        Ok(match p.radius {
            Some(r) => spec.with_radius(r),
            None => spec,
        })
    }

    /// `(h, h̄)` sampled on `[0, T]`.
    pub fn signals(&self) -> Result<(Signal, Signal)> {
        Ok((self.bc.h.to_signal(self.horizon())?, self.bc.hbar.to_signal(self.horizon())?))
    }

    /// System and boundary conditions with the configured signals. For the
    /// loop, `h` and `h̄` are the two controls `H`.
    pub fn application(&self, nx: usize) -> Result<Application> {
        let zero = self.bc.is_zero();
        match self.kind {
            ScenarioKind::SaintVenant => {
                let (h, hb) = if zero {
                    (None, None)
                } else {
                    let (h, hb) = self.signals()?;
                    (Some(h), Some(hb))
                };
                sv_build(&self.canal()?, self.boundary_kind(), h, hb)
            }
            ScenarioKind::LinearLoop => {
                let mut app = lin_sv_loop(&self.canal()?)?;
                if !zero {
                    let (h, hb) = self.signals()?;
                    app.bc = app.bc.with_controls(vec![h, hb])?;
                }
                Ok(app)
            }
            ScenarioKind::Wave => {
                let spec = self.wave()?;
                let mut app = wave_build(&spec)?;
                if !zero {
                    let (h, hb) = self.signals()?;
                    let (phi, _) = self.wave_data(&self.initial, nx)?;
                    app.bc = wave_bc(&spec, &h, &hb, &phi)?;
                }
                Ok(app)
            }
        }
    }

    /// Wave displacement and velocity profiles.
    pub fn wave_data(&self, data: &DataSpec, nx: usize) -> Result<(Profile, Profile)> {
        let l = self.length();
        let shape = |f: &dyn Fn(f64) -> f64| Profile::from_fn(l, 1, nx, |x, o| o[0] = f(x));
        let zero = Profile::zeros(l, 1, nx);
        Ok(match *data {
            DataSpec::Zero => (zero.clone(), zero),
            DataSpec::Bump { amplitude } => (shape(&|x| amplitude * (PI * x / l).sin().powi(4)), zero),
            DataSpec::Sine { amplitude, mode } => {
                let k = 2.0 * PI * mode as f64 / l;
                (shape(&|x| amplitude * (k * x).sin()), zero)
            }
            DataSpec::Eigenmode { mode, witness } => {
                let k = 2.0 * PI * mode as f64 / l;
                match witness {
                    WitnessName::Sine => (zero, shape(&|x| k * (k * x).sin())),
                    WitnessName::Cosine => (shape(&|x| (k * x).cos()), zero),
                }
            }
        })
    }

    /// Diagonal-variable profile for `data`.
    pub fn diagonal_data(&self, data: &DataSpec, nx: usize) -> Result<Profile> {
        let l = self.length();
        match self.kind {
            ScenarioKind::Wave => {
                let (phi, psi) = self.wave_data(data, nx)?;
                wave_initial(&self.wave()?, &phi, &psi)
            }
            _ => Ok(match *data {
                DataSpec::Zero => Profile::zeros(l, 2, nx),
                DataSpec::Bump { amplitude } => Profile::from_fn(l, 2, nx, |x, o| {
                    let b = amplitude * (PI * x / l).sin().powi(4);
                    o[0] = b;
                    o[1] = -0.5 * b;
                }),
                DataSpec::Sine { amplitude, mode } => Profile::from_fn(l, 2, nx, |x, o| {
                    let k = 2.0 * PI * mode as f64 * x / l;
                    o[0] = amplitude * k.sin();
                    o[1] = amplitude * (k.cos() - 1.0);
                }),
                DataSpec::Eigenmode { .. } => {
                    return Err(Error::InvalidInput("eigenmode data exist only for the wave equation".into()))
                }
            }),
        }
    }

    pub fn initial_profile(&self, nx: usize) -> Result<Profile> {
        self.diagonal_data(&self.initial, nx)
    }

    pub fn target_profile(&self, nx: usize) -> Result<Profile> {
        self.diagonal_data(&self.target, nx)
    }

    /// `L max 1/|λ_i(0)|` over the moving components.
    pub fn min_control_time(&self) -> Result<f64> {
        Ok(match self.kind {
            ScenarioKind::Wave => self.wave()?.min_control_time(),
            _ => self.canal()?.min_control_time(),
        })
    }

    /// Same scenario with zero data and zero signals.
    pub fn with_zero_data(&self) -> Self {
        Self {
            bc: BcConfig::default(),
            initial: DataSpec::Zero,
            target: DataSpec::Zero,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ScenarioConfig,
}

fn canal_preset(boundary: BoundaryName) -> ScenarioConfig {
    ScenarioConfig {
        kind: ScenarioKind::SaintVenant,
        params: Params {
            boundary: Some(boundary),
            ..Params::default()
        },
        bc: BcConfig::default(),
        grid: GridConfig { nx: 200, horizon: 0.3 },
        initial: DataSpec::Bump { amplitude: 1e-3 },
        target: DataSpec::Zero,
    }
}

/// Built-in scenarios.
pub fn presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "sv-loop-energy",
            description: "Saint-Venant canal closed by energy and discharge conditions",
            config: canal_preset(BoundaryName::Energy),
        },
        Preset {
            name: "sv-loop-waterlevel",
            description: "Saint-Venant canal closed by water level and discharge conditions",
            config: canal_preset(BoundaryName::WaterLevel),
        },
        Preset {
            name: "wave-periodic",
            description: "Linear wave equation on [0, 2π] with periodic conditions",
            config: ScenarioConfig {
                kind: ScenarioKind::Wave,
                params: Params::default(),
                bc: BcConfig::default(),
                grid: GridConfig { nx: 200, horizon: 1.2 * 2.0 * PI },
                initial: DataSpec::Sine { amplitude: 1e-3, mode: 1 },
                target: DataSpec::Zero,
            },
        },
        Preset {
            name: "lin-sv-loop",
            description: "Linearized Saint-Venant loop with two additive controls",
            config: ScenarioConfig {
                kind: ScenarioKind::LinearLoop,
                params: Params::default(),
                bc: BcConfig::default(),
                grid: GridConfig { nx: 200, horizon: 0.3 },
                initial: DataSpec::Sine { amplitude: 1e-3, mode: 1 },
                target: DataSpec::Zero,
            },
        },
        Preset {
            name: "wave-eigenmode",
            description: "Periodic wave started on the sin(t) sin(x) mode, invisible in u at both ends",
            config: ScenarioConfig {
                kind: ScenarioKind::Wave,
                params: Params {
                    radius: Some(10.0),
                    ..Params::default()
                },
                bc: BcConfig::default(),
                grid: GridConfig { nx: 200, horizon: 2.0 * PI },
                initial: DataSpec::Eigenmode {
                    mode: 1,
                    witness: WitnessName::Sine,
                },
                target: DataSpec::Zero,
            },
        },
    ]
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .map(|p| p.config)
        .ok_or_else(|| Error::InvalidInput(format!("unknown preset '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::validate_system;

    #[test]
    fn presets_validate_and_round_trip() {
        let all = presets();
        assert!(all.len() >= 5);
        for p in all {
            let text = p.config.to_json();
            let back = ScenarioConfig::from_json(&text).unwrap();
            assert_eq!(back, p.config, "{}", p.name);
            assert_eq!(back.to_json(), text);
            let app = p.config.application(p.config.nx()).unwrap();
            assert!(validate_system(&app.system, 100).unwrap().is_valid(), "{}", p.name);
        }
    }

    #[test]
    fn signal_forms_parse() {
        let cfg = ScenarioConfig::from_json(
            r#"{"kind":"saint-venant","bc":{"h":"zero","hbar":{"preset":"sin","amplitude":1e-4,"frequency":2}},
                "grid":{"Nx":50,"T":0.5}}"#,
        )
        .unwrap();
        let (h, hb) = cfg.signals().unwrap();
        assert_eq!(h.sup_norm(), 0.0);
        assert!((hb.eval(0.125) - 1e-4).abs() < 1e-12);
        let cfg = ScenarioConfig::from_json(
            r#"{"kind":"linear-loop","bc":{"h":[0,1,0],"hbar":"sin"},"grid":{"Nx":50,"T":1}}"#,
        )
        .unwrap();
        assert_eq!(cfg.signals().unwrap().0.eval(0.5), 1.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            r#"{"kind":"wave","grid":{"Nx":4,"T":1}}"#,
            r#"{"kind":"wave","grid":{"Nx":40,"T":-1}}"#,
            r#"{"kind":"saint-venant","params":{"velocity":9},"grid":{"Nx":40,"T":1}}"#,
            r#"{"kind":"saint-venant","grid":{"Nx":40,"T":1},"initial":{"profile":"eigenmode","mode":1,"witness":"sine"}}"#,
            r#"{"kind":"river","grid":{"Nx":40,"T":1}}"#,
        ] {
            assert!(ScenarioConfig::from_json(text).is_err(), "{text}");
        }
    }
}
