//! Parity, the three extended time reversals and the broken/unbroken test for
//! their 𝒫𝒯 combinations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bicomplex::{Bicomplex, ConjKind};
use crate::energy::EnergyQuad;
use crate::error::{Error, Result};
use crate::field::{Grid, PhasePoint};
use crate::models::{potential, ClosedFormState, ModelSpec};

/// Points with `‖ψ‖` below this are not used to estimate λ.
pub const PSI_FLOOR: f64 = 1e-10;
/// Minimum share of usable points that must agree on λ.
pub const CONSISTENT_FRACTION: f64 = 0.95;
/// Grids with a larger share of skipped points are flagged unreliable.
pub const MAX_SKIPPED_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryKind {
    P,
    Ti,
    Tihat,
    Tii,
    PTi,
    PTii,
}

impl SymmetryKind {
    pub const ALL: [SymmetryKind; 6] = [
        SymmetryKind::P,
        SymmetryKind::Ti,
        SymmetryKind::Tihat,
        SymmetryKind::Tii,
        SymmetryKind::PTi,
        SymmetryKind::PTii,
    ];

    /// Sign flips applied to `(x1, p1, p2, x2)`.
    pub fn point_signs(self) -> [f64; 4] {
        match self {
            SymmetryKind::P => [-1.0, -1.0, -1.0, -1.0],
            SymmetryKind::Ti => [1.0, -1.0, 1.0, -1.0],
            SymmetryKind::Tihat => [1.0, 1.0, -1.0, -1.0],
            SymmetryKind::Tii => [1.0, -1.0, -1.0, 1.0],
            SymmetryKind::PTi => [-1.0, 1.0, -1.0, 1.0],
            SymmetryKind::PTii => [-1.0, 1.0, 1.0, -1.0],
        }
    }

    pub fn conj_kind(self) -> Option<ConjKind> {
        match self {
            SymmetryKind::P => None,
            SymmetryKind::Ti | SymmetryKind::PTi => Some(ConjKind::Conj1),
            SymmetryKind::Tihat => Some(ConjKind::Conj2),
            SymmetryKind::Tii | SymmetryKind::PTii => Some(ConjKind::Conj3),
        }
    }

    pub fn map_point(self, pt: PhasePoint) -> PhasePoint {
        let s = self.point_signs();
        let a = pt.to_array();
        PhasePoint::new(s[0] * a[0], s[1] * a[1], s[2] * a[2], s[3] * a[3])
    }

    pub fn map_value(self, v: Bicomplex) -> Bicomplex {
        match self.conj_kind() {
            Some(k) => v.conj(k),
            None => v,
        }
    }

    /// Action on a `(point, value)` pair.
    pub fn act(self, pt: PhasePoint, v: Bicomplex) -> (PhasePoint, Bicomplex) {
        (self.map_point(pt), self.map_value(v))
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryKind::P => "p",
            SymmetryKind::Ti => "ti",
            SymmetryKind::Tihat => "tihat",
            SymmetryKind::Tii => "tii",
            SymmetryKind::PTi => "pti",
            SymmetryKind::PTii => "ptii",
        }
    }
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SymmetryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SymmetryKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("op", format!("unknown operator `{s}`")))
    }
}

/// `conj(ψ(map(pt)), kind)`.
pub fn apply_op(op: SymmetryKind, state: &ClosedFormState, pt: PhasePoint) -> Result<Bicomplex> {
    Ok(op.map_value(state.psi(op.map_point(pt))?))
}

/// `max ‖conj(V(map(pt))) − V(pt)‖` over the admissible grid points.
pub fn check_potential_invariance(op: SymmetryKind, spec: &ModelSpec, grid: &Grid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for pt in grid.points()? {
        let here = potential(spec, pt)?;
        let there = op.map_value(potential(spec, op.map_point(pt))?);
        let d = (there - here).euclid_norm();
        worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "lambda")]
pub enum Verdict {
    Unbroken(Bicomplex),
    Broken,
}

impl Verdict {
    pub fn is_unbroken(&self) -> bool {
        matches!(self, Verdict::Unbroken(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub op: SymmetryKind,
    pub verdict: Verdict,
    /// Largest `‖λ(pt) − λ̄‖` over usable points, `λ̄` the componentwise median.
    pub max_residual: f64,
    pub consistent_fraction: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub reliable: bool,
    pub grid: String,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Estimates `λ = (𝒫𝒯ψ)(pt) / ψ(pt)` across the grid; unbroken iff λ is grid-constant.
pub fn classify(op: SymmetryKind, state: &ClosedFormState, grid: &Grid, tau: f64) -> Result<ClassificationReport> {
    if !matches!(op, SymmetryKind::PTi | SymmetryKind::PTii) {
        let why = match op {
            SymmetryKind::Tihat => "its 𝒫𝒯 combination forces xi1 = -xi2, contradicting positive xi",
            _ => "only pti and ptii can be classified",
        };
        return Err(Error::InvalidOperator(op.to_string(), why.into()));
    }
    let points = grid.points()?;
    let mut lambdas = Vec::with_capacity(points.len());
    let mut skipped = 0;
    for pt in &points {
        let psi = match state.psi(*pt) {
            Ok(v) => v,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        if psi.euclid_norm() < PSI_FLOOR || psi.is_singular() {
            skipped += 1;
            continue;
        }
        let Ok(t) = apply_op(op, state, *pt) else {
            skipped += 1;
            continue;
        };
        match t.checked_div(psi) {
            Ok(l) if l.is_finite() => lambdas.push(l),
            _ => skipped += 1,
        }
    }
    let evaluated = lambdas.len();
    let reliable = evaluated > 0 && (skipped as f64) <= MAX_SKIPPED_FRACTION * points.len() as f64;
    if lambdas.is_empty() {
        return Ok(ClassificationReport {
            op,
            verdict: Verdict::Broken,
            max_residual: f64::NAN,
            consistent_fraction: 0.0,
            evaluated,
            skipped,
            reliable,
            grid: grid.describe(),
        });
    }
    let comp = |k: usize| median(lambdas.iter().map(|l| l.to_array()[k]).collect());
    let center = Bicomplex::new(comp(0), comp(1), comp(2), comp(3));
    let scale = center.euclid_norm().max(1.0);
    let devs: Vec<f64> = lambdas.iter().map(|l| (*l - center).euclid_norm()).collect();
    let max_residual = devs.iter().cloned().fold(0.0, f64::max);
    let consistent: Vec<&Bicomplex> = lambdas
        .iter()
        .zip(&devs)
        .filter(|(_, d)| **d <= 0.5 * tau * scale)
        .map(|(l, _)| l)
        .collect();
    let consistent_fraction = consistent.len() as f64 / evaluated as f64;
    // Pairwise spread among all usable points is at most twice the spread about the centre.
    let spread_ok = 2.0 * max_residual <= tau * scale;
    let verdict = if spread_ok && consistent_fraction >= CONSISTENT_FRACTION {
        Verdict::Unbroken(center)
    } else {
        Verdict::Broken
    };
    Ok(ClassificationReport {
        op,
        verdict,
        max_residual,
        consistent_fraction,
        evaluated,
        skipped,
        reliable,
        grid: grid.describe(),
    })
}

/// `|E2| + |E4|` for 𝒫𝒯ᵢ, `|E2| + |E3|` for 𝒫𝒯ᵢᵢ̂.
pub fn unbroken_energy_constraint(kind: SymmetryKind, e: EnergyQuad) -> Result<f64> {
    match kind {
        SymmetryKind::PTi => Ok(e.e2.abs() + e.e4.abs()),
        SymmetryKind::PTii => Ok(e.e2.abs() + e.e3.abs()),
        other => Err(Error::InvalidOperator(other.to_string(), "no energy constraint".into())),
    }
}
