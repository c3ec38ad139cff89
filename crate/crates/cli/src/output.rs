//! Serialization with a fixed number format.
//!
//! Every float is written as `{:.16e}`, i.e. 17 significant digits, which
//! round-trips any `f64` exactly and never depends on the shortest-repr
//! algorithm of the JSON library.

use axcomp::channel::PauliDistribution;
use axcomp::rates::{CompensationPlan, Orthogonality, RateEntry, RateReport, Restriction};
use axcomp::{Mat3, QubitChannel, RateValue, Rotation3};
use serde::Serialize;
use serde_json::value::RawValue;

pub type Num = Box<RawValue>;

pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // Fold -0 into 0 so sign-of-zero noise cannot change the output.
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

pub fn num(x: f64) -> Num {
    assert!(x.is_finite(), "non-finite value {x} in output");
    RawValue::from_string(fmt_f64(x)).expect("formatted float is valid JSON")
}

pub fn vec3(v: &[f64]) -> Vec<Num> {
    v.iter().copied().map(num).collect()
}

pub fn mat3(m: &Mat3) -> Vec<Vec<Num>> {
    (0..3)
        .map(|i| (0..3).map(|j| num(m[(i, j)])).collect())
        .collect()
}

#[derive(Serialize)]
pub struct ChannelDoc {
    #[serde(rename = "R")]
    pub r: Vec<Vec<Num>>,
    pub t: Vec<Num>,
}

impl ChannelDoc {
    pub fn new(c: &QubitChannel) -> Self {
        Self {
            r: mat3(c.matrix()),
            t: vec3(c.vector().as_slice()),
        }
    }
}

#[derive(Serialize)]
pub struct PauliDoc {
    pub i: Num,
    pub z: Num,
    pub x: Num,
    pub y: Num,
}

impl PauliDoc {
    pub fn new(q: &PauliDistribution) -> Self {
        Self {
            i: num(q.qi),
            z: num(q.qz),
            x: num(q.qx),
            y: num(q.qy),
        }
    }
}

#[derive(Serialize)]
pub struct RateDoc {
    pub raw: Num,
    pub clamped: Num,
}

impl RateDoc {
    pub fn new(v: &RateValue) -> Self {
        Self {
            raw: num(v.raw),
            clamped: num(v.clamped),
        }
    }
}

fn rotation(r: &Rotation3) -> Vec<Vec<Num>> {
    mat3(r.matrix())
}

#[derive(Serialize)]
pub struct PlanDoc {
    pub restriction: &'static str,
    pub oa: Option<Vec<Vec<Num>>>,
    pub ob: Vec<Vec<Num>>,
}

impl PlanDoc {
    pub fn new(p: &CompensationPlan) -> Self {
        Self {
            restriction: match p.restriction {
                Restriction::Full => "full",
                Restriction::ZxPlane => "zx_plane",
            },
            oa: p.oa.as_ref().map(rotation),
            ob: rotation(&p.ob),
        }
    }
}

#[derive(Serialize)]
pub struct OrthogonalityDoc {
    pub holds: bool,
    pub max_cosine: Num,
}

impl OrthogonalityDoc {
    pub fn new(o: &Orthogonality) -> Self {
        Self {
            holds: o.holds,
            max_cosine: num(o.max_cosine),
        }
    }
}

#[derive(Serialize)]
pub struct ToolDoc {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: ToolDoc = ToolDoc {
    name: "axcomp",
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Serialize)]
pub struct ConfigDoc {
    pub unital_tol: Num,
    pub opt_grid: usize,
    pub refine_iters: usize,
    pub tol: Num,
    pub seed: u64,
}

/// Twelve entries keyed by rate name, in the fixed column order.
#[derive(Serialize)]
pub struct Twelve<T> {
    pub f1: T,
    pub f2: T,
    pub f1_conv: T,
    pub f2_conv: T,
    pub g1: T,
    pub g2: T,
    pub g1_conv: T,
    pub g2_conv: T,
    pub j1: T,
    pub j2: T,
    pub j1_conv: T,
    pub j2_conv: T,
}

impl<T> Twelve<T> {
    pub fn from_report(r: &RateReport, f: impl Fn(&RateEntry) -> T) -> Self {
        Self {
            f1: f(&r.f1),
            f2: f(&r.f2),
            f1_conv: f(&r.f1_conv),
            f2_conv: f(&r.f2_conv),
            g1: f(&r.g1),
            g2: f(&r.g2),
            g1_conv: f(&r.g1_conv),
            g2_conv: f(&r.g2_conv),
            j1: f(&r.j1),
            j2: f(&r.j2),
            j1_conv: f(&r.j1_conv),
            j2_conv: f(&r.j2_conv),
        }
    }
}

#[derive(Serialize)]
pub struct OrthogonalityFlags {
    pub six_state: OrthogonalityDoc,
    pub bb84_plane: OrthogonalityDoc,
    pub bb84_any: OrthogonalityDoc,
}

#[derive(Serialize)]
pub struct ReportDocument {
    pub tool: ToolDoc,
    pub config: ConfigDoc,
    pub channel: ChannelDoc,
    pub pauli: PauliDoc,
    pub signed_singular_values: Vec<Num>,
    pub rates: Twelve<RateDoc>,
    pub plans: Twelve<PlanDoc>,
    pub orthogonality: OrthogonalityFlags,
    pub s_star: Vec<Num>,
    pub warnings: Vec<String>,
}

impl ReportDocument {
    pub fn new(channel: &QubitChannel, config: ConfigDoc, r: &RateReport) -> Self {
        Self {
            tool: TOOL,
            config,
            channel: ChannelDoc::new(channel),
            pauli: PauliDoc::new(&r.pauli),
            signed_singular_values: vec3(r.signed_singular_values.as_slice()),
            rates: Twelve::from_report(r, |e| RateDoc::new(&e.value)),
            plans: Twelve::from_report(r, |e| PlanDoc::new(&e.plan)),
            orthogonality: OrthogonalityFlags {
                six_state: OrthogonalityDoc::new(&r.six_state_orthogonal),
                bb84_plane: OrthogonalityDoc::new(&r.bb84_orthogonal),
                bb84_any: OrthogonalityDoc::new(&r.bb84_any_orthogonal),
            },
            s_star: vec3(&r.s_star),
            warnings: r.warnings.iter().map(|w| w.to_string()).collect(),
        }
    }
}
