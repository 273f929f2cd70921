//! Serde mirror of the scenario file. Every struct rejects unknown keys.

use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub description: Option<String>,
    pub particle: ParticleSpec,
    pub fields: Vec<FieldSpec>,
    #[serde(rename = "loop")]
    pub loop_: LoopSpec,
    #[serde(default)]
    pub options: OptionsSpec,
}

/// Permanent moments d0 (C·m) and mu0 (J/T); induced couplings chi
/// (C·m²/V), kappa (J/T²) and the volume polarizability alpha_vol_m3 (m³).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    pub mass_kg: f64,
    #[serde(default)]
    pub d0: [f64; 3],
    #[serde(default)]
    pub mu0: [f64; 3],
    #[serde(default)]
    pub chi: Option<f64>,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub alpha_vol_m3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// V/m.
    UniformE { e: [f64; 3] },
    /// T.
    UniformB { b: [f64; 3] },
    /// C/m along the infinite line through `point`.
    LineCharge {
        lambda: f64,
        point: [f64; 3],
        direction: [f64; 3],
        #[serde(default)]
        exclusion_radius: Option<f64>,
    },
    /// C.
    PointCharge {
        charge: f64,
        position: [f64; 3],
        #[serde(default)]
        exclusion_radius: Option<f64>,
    },
    /// Opposite (or arbitrary) uniform fields in two slabs either side of a septum plane.
    ParallelPlateSeptum {
        origin: [f64; 3],
        normal: [f64; 3],
        e_upper: [f64; 3],
        e_lower: [f64; 3],
        half_width: f64,
    },
    /// A along `direction`.
    StraightCurrentWire {
        current: f64,
        point: [f64; 3],
        direction: [f64; 3],
        #[serde(default)]
        exclusion_radius: Option<f64>,
    },
    /// T·m², B = g(r − c)/|r − c|³. Unphysical; phase computations refuse it.
    #[serde(rename = "radial_B_synthetic", alias = "radial_b_synthetic")]
    RadialBSynthetic {
        strength: f64,
        center: [f64; 3],
        #[serde(default)]
        exclusion_radius: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopSpec {
    /// Two semicircular arms (or `winding` half-turns each way).
    Circle(CircleSpec),
    Arms {
        upper: ArmSpec,
        lower: ArmSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    pub center: [f64; 3],
    pub normal: [f64; 3],
    /// Direction from the centre to the splitter.
    pub reference: [f64; 3],
    pub radius: f64,
    pub speed: SpeedSpec,
    #[serde(default = "one")]
    pub winding: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub path: PathSpec,
    pub speed: SpeedSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    Polyline(Vec<[f64; 3]>),
    /// Angles in radians, counterclockwise about `normal` from `reference`;
    /// `radius_end` turns the arc into a spiral.
    Arc {
        center: [f64; 3],
        normal: [f64; 3],
        reference: [f64; 3],
        radius: f64,
        #[serde(default)]
        radius_end: Option<f64>,
        angle_start: f64,
        angle_end: f64,
    },
}

/// m/s, either constant or piecewise linear in the arm parameter u ∈ [0, 1].
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedSpec {
    Constant(f64),
    Knots(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_tube")]
    pub tube_radius: f64,
    #[serde(default)]
    pub surface: SurfaceSpec,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_tube() -> f64 {
    1e-3
}

impl Default for OptionsSpec {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            tube_radius: default_tube(),
            surface: SurfaceSpec::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    #[default]
    Auto,
    Apex([f64; 3]),
}
