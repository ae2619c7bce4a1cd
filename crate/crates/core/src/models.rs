//! Harmonic, inverted and isotonic oscillators: potentials, the chained G-ansatz,
//! parameter constraints and the closed-form Type I / Type II ground states.
//!
//! All g-fields are linear combinations of eight real basis functions of the
//! projected coordinates `w1 = X1 + iY1`, `w2 = X2 + iY2`:
//! the quadratics `Q, A, B, C` (real and imaginary parts of `w1²`, `w2²`), the
//! angles `T_k = atan(X_k / Y_k)` and the logarithms `L_k = log|w_k|²`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bicomplex::{Bicomplex, IdempotentPair};
use crate::energy::EnergyQuad;
use crate::error::{Error, Result};
use crate::field::{projected_coordinates, Jet, PhasePoint, ScalarField};

/// `|w_k|²` below this is treated as lying on the isotonic singular set.
pub const SINGULAR_RADIUS_SQ: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Harmonic,
    Inverted,
    Isotonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolutionType {
    I,
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Harmonic => "harmonic",
            Family::Inverted => "inverted",
            Family::Isotonic => "isotonic",
        })
    }
}

impl fmt::Display for SolutionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionType::I => "I",
            SolutionType::II => "II",
        })
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub a: f64,
    pub b: f64,
    pub solution_type: SolutionType,
    pub sign: Sign,
    pub beta3: Sign,
    pub beta4: Sign,
}

impl ModelSpec {
    pub fn harmonic(a: f64, ty: SolutionType, sign: Sign) -> Self {
        ModelSpec {
            family: Family::Harmonic,
            a,
            b: 0.0,
            solution_type: ty,
            sign,
            beta3: Sign::Plus,
            beta4: Sign::Plus,
        }
    }

    pub fn inverted(b: f64, ty: SolutionType, sign: Sign) -> Self {
        ModelSpec {
            family: Family::Inverted,
            a: 0.0,
            b,
            ..ModelSpec::harmonic(0.0, ty, sign)
        }
    }

    pub fn isotonic(a: f64, b: f64, ty: SolutionType, sign: Sign, beta3: Sign, beta4: Sign) -> Self {
        ModelSpec {
            family: Family::Isotonic,
            a,
            b,
            solution_type: ty,
            sign,
            beta3,
            beta4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidCoupling("couplings must be finite".into()));
        }
        match self.family {
            Family::Harmonic if self.a <= 0.0 => Err(Error::InvalidCoupling(format!(
                "harmonic oscillator needs a > 0, got {}",
                self.a
            ))),
            Family::Inverted if self.b <= 0.0 => Err(Error::InvalidCoupling(format!(
                "inverted oscillator needs b > 0, got {}",
                self.b
            ))),
            Family::Isotonic if self.a <= 0.0 => Err(Error::InvalidCoupling(format!(
                "isotonic oscillator needs a > 0, got {}",
                self.a
            ))),
            Family::Isotonic if self.b < -2.0 || self.b == 0.0 => Err(Error::InvalidCoupling(format!(
                "isotonic oscillator needs b >= -2 and b != 0, got {}",
                self.b
            ))),
            _ => Ok(()),
        }
    }

    /// Whether the potential has a singular set (and hence grids need an exclusion zone).
    pub fn is_singular_family(&self) -> bool {
        self.family == Family::Isotonic
    }

    pub fn label(&self) -> String {
        let base = match self.family {
            Family::Harmonic => format!("harmonic(a={})", self.a),
            Family::Inverted => format!("inverted(b={})", self.b),
            Family::Isotonic => format!(
                "isotonic(a={},b={},beta3={},beta4={})",
                self.a, self.b, self.beta3, self.beta4
            ),
        };
        format!("{base}/{}/{}", self.solution_type, self.sign)
    }
}

/// Coefficients `α, β, γ, δ` of `G1 = αQ + βA + γB + δC`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HarmonicParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl HarmonicParams {
    /// Residuals of the four quadratic constraints for the coupling `k`
    /// (`k = a` for the harmonic, `k = −b` for the inverted oscillator).
    pub fn constraint_residuals(&self, k: f64) -> [f64; 4] {
        let HarmonicParams {
            alpha: al,
            beta: be,
            gamma: ga,
            delta: de,
        } = *self;
        [
            4.0 * al * al - be * be - ga * ga + de * de - k / 8.0,
            2.0 * al * de + be * ga,
            2.0 * al * be - ga * de,
            2.0 * al * ga - be * de,
        ]
    }

    pub fn energy(&self) -> EnergyQuad {
        EnergyQuad::new(-16.0 * self.alpha, 8.0 * self.beta, 8.0 * self.gamma, -8.0 * self.delta)
    }

    pub fn as_ansatz(&self) -> IsotonicParams {
        IsotonicParams {
            alpha: [self.alpha, self.beta, self.gamma, self.delta],
            beta: [0.0; 4],
        }
    }
}

/// `G1 = α1 Q + α2 A + α3 B + α4 C + β1 T1 + β2 T2 + β3 L1 + β4 L2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IsotonicParams {
    pub alpha: [f64; 4],
    pub beta: [f64; 4],
}

impl IsotonicParams {
    /// The eight constraint residuals, in order: `α2`, `α3`, `4α1² + α4² − a/8`, `α1α4`,
    /// `4β3² − β1² − β3 − b/32`, `4β4² − β2² − β4 − b/32`, `β1(8β3 − 1)`, `β2(8β4 − 1)`.
    pub fn constraint_residuals(&self, a: f64, b: f64) -> [f64; 8] {
        let [a1, a2, a3, a4] = self.alpha;
        let [b1, b2, b3, b4] = self.beta;
        [
            a2,
            a3,
            4.0 * a1 * a1 + a4 * a4 - a / 8.0,
            a1 * a4,
            4.0 * b3 * b3 - b1 * b1 - b3 - b / 32.0,
            4.0 * b4 * b4 - b2 * b2 - b4 - b / 32.0,
            b1 * (8.0 * b3 - 1.0),
            b2 * (8.0 * b4 - 1.0),
        ]
    }

    /// Energy quadruple implied by the ansatz (valid when `α2 = α3 = 0`).
    pub fn energy(&self) -> EnergyQuad {
        let [a1, _, _, a4] = self.alpha;
        let [b1, b2, b3, b4] = self.beta;
        let c1 = 2.0 * a1 + a4;
        let c2 = 2.0 * a1 - a4;
        let u = (1.0 + 8.0 * b3) * c1;
        let v = (1.0 + 8.0 * b4) * c2;
        EnergyQuad::new(
            -4.0 * (u + v),
            -16.0 * (b1 * c1 + b2 * c2),
            16.0 * (b1 * c1 - b2 * c2),
            -4.0 * (u - v),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    Harmonic(HarmonicParams),
    Isotonic(IsotonicParams),
}

impl Params {
    pub fn ansatz(&self) -> IsotonicParams {
        match self {
            Params::Harmonic(h) => h.as_ansatz(),
            Params::Isotonic(p) => *p,
        }
    }
}

/// Basis functions, in the coefficient order used by [`BasisCombo`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Q,
    A,
    B,
    C,
    T1,
    T2,
    L1,
    L2,
}

impl Basis {
    pub const ALL: [Basis; 8] = [
        Basis::Q,
        Basis::A,
        Basis::B,
        Basis::C,
        Basis::T1,
        Basis::T2,
        Basis::L1,
        Basis::L2,
    ];
}

/// `(X, Y)` of `w1` or `w2` together with their (constant) gradients.
fn proj(pt: PhasePoint, k: usize) -> (f64, f64, [f64; 4], [f64; 4]) {
    let (w1, w2) = projected_coordinates(pt);
    if k == 1 {
        (w1.re, w1.im, [1.0, 0.0, 0.0, 1.0], [0.0, 1.0, -1.0, 0.0])
    } else {
        (w2.re, w2.im, [1.0, 0.0, 0.0, -1.0], [0.0, 1.0, 1.0, 0.0])
    }
}

/// Lifts a function of `(X, Y)` with the given partials to a phase-space jet.
#[allow(clippy::too_many_arguments)]
fn lift(value: f64, dx: f64, dy: f64, dxx: f64, dyy: f64, dxy: f64, gx: [f64; 4], gy: [f64; 4]) -> Jet {
    let mut j = Jet::constant(value);
    for i in 0..4 {
        j.grad[i] = dx * gx[i] + dy * gy[i];
        for k in 0..4 {
            j.hess[i][k] =
                dxx * gx[i] * gx[k] + dyy * gy[i] * gy[k] + dxy * (gx[i] * gy[k] + gy[i] * gx[k]);
        }
    }
    j
}

fn basis_value(b: Basis, pt: PhasePoint) -> f64 {
    let PhasePoint { x1, p1, p2, x2 } = pt;
    match b {
        Basis::Q => x1 * x1 - p1 * p1 - p2 * p2 + x2 * x2,
        Basis::A => x1 * p1 - x2 * p2,
        Basis::B => x1 * p2 - x2 * p1,
        Basis::C => x1 * x2 + p1 * p2,
        Basis::T1 | Basis::T2 => {
            let (x, y, _, _) = proj(pt, if b == Basis::T1 { 1 } else { 2 });
            (x / y).atan()
        }
        Basis::L1 | Basis::L2 => {
            let (x, y, _, _) = proj(pt, if b == Basis::L1 { 1 } else { 2 });
            (x * x + y * y).ln()
        }
    }
}

/// `T` continued from `anchor` to `pt` without crossing the jump at `Y = 0`.
fn angle_near(k: usize, anchor: PhasePoint, pt: PhasePoint) -> f64 {
    let (xa, ya, _, _) = proj(anchor, k);
    let (x, y, _, _) = proj(pt, k);
    let w = Complex64::new(x, y);
    let wa = Complex64::new(xa, ya);
    (xa / ya).atan() - (w * wa.conj()).arg()
}

fn basis_jet(b: Basis, pt: PhasePoint) -> Jet {
    let PhasePoint { x1, p1, p2, x2 } = pt;
    let v = basis_value(b, pt);
    let mut j = Jet::constant(v);
    let sym = |h: &mut [[f64; 4]; 4], i: usize, k: usize, val: f64| {
        h[i][k] = val;
        h[k][i] = val;
    };
    match b {
        Basis::Q => {
            j.grad = [2.0 * x1, -2.0 * p1, -2.0 * p2, 2.0 * x2];
            for (i, d) in [2.0, -2.0, -2.0, 2.0].into_iter().enumerate() {
                j.hess[i][i] = d;
            }
        }
        Basis::A => {
            j.grad = [p1, x1, -x2, -p2];
            sym(&mut j.hess, 0, 1, 1.0);
            sym(&mut j.hess, 2, 3, -1.0);
        }
        Basis::B => {
            j.grad = [p2, -x2, x1, -p1];
            sym(&mut j.hess, 0, 2, 1.0);
            sym(&mut j.hess, 1, 3, -1.0);
        }
        Basis::C => {
            j.grad = [x2, p2, p1, x1];
            sym(&mut j.hess, 0, 3, 1.0);
            sym(&mut j.hess, 1, 2, 1.0);
        }
        Basis::T1 | Basis::T2 => {
            let (x, y, gx, gy) = proj(pt, if b == Basis::T1 { 1 } else { 2 });
            let r2 = x * x + y * y;
            let r4 = r2 * r2;
            j = lift(
                v,
                y / r2,
                -x / r2,
                -2.0 * x * y / r4,
                2.0 * x * y / r4,
                (x * x - y * y) / r4,
                gx,
                gy,
            );
        }
        Basis::L1 | Basis::L2 => {
            let (x, y, gx, gy) = proj(pt, if b == Basis::L1 { 1 } else { 2 });
            let r2 = x * x + y * y;
            let r4 = r2 * r2;
            j = lift(
                v,
                2.0 * x / r2,
                2.0 * y / r2,
                2.0 * (y * y - x * x) / r4,
                2.0 * (x * x - y * y) / r4,
                -4.0 * x * y / r4,
                gx,
                gy,
            );
        }
    }
    j
}

/// A linear combination of the eight basis functions, with analytic jets.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BasisCombo {
    pub coef: [f64; 8],
}

impl BasisCombo {
    pub fn new(coef: [f64; 8]) -> Self {
        BasisCombo { coef }
    }

    pub fn get(&self, b: Basis) -> f64 {
        self.coef[b as usize]
    }

    pub fn add(&self, o: &BasisCombo) -> Self {
        let mut c = self.coef;
        c.iter_mut().zip(o.coef).for_each(|(a, b)| *a += b);
        BasisCombo::new(c)
    }

    pub fn sub(&self, o: &BasisCombo) -> Self {
        let mut c = self.coef;
        c.iter_mut().zip(o.coef).for_each(|(a, b)| *a -= b);
        BasisCombo::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().all(|c| *c == 0.0)
    }

    fn has_singular_terms(&self) -> bool {
        self.coef[4..].iter().any(|c| *c != 0.0)
    }

    fn eval(&self, f: impl Fn(Basis) -> f64) -> f64 {
        Basis::ALL
            .iter()
            .zip(self.coef)
            .filter(|(_, c)| *c != 0.0)
            .map(|(b, c)| c * f(*b))
            .sum()
    }
}

impl ScalarField for BasisCombo {
    fn value(&self, pt: PhasePoint) -> f64 {
        self.eval(|b| basis_value(b, pt))
    }

    fn value_near(&self, anchor: PhasePoint, pt: PhasePoint) -> f64 {
        self.eval(|b| match b {
            Basis::T1 => angle_near(1, anchor, pt),
            Basis::T2 => angle_near(2, anchor, pt),
            _ => basis_value(b, pt),
        })
    }

    fn jet(&self, pt: PhasePoint) -> Option<Jet> {
        let mut acc = Jet::constant(0.0);
        for (b, c) in Basis::ALL.iter().zip(self.coef) {
            if c != 0.0 {
                acc = acc.add(&basis_jet(*b, pt).scale(c));
            }
        }
        Some(acc)
    }
}

/// `G1…G4` from the `G1` coefficients via the Cauchy–Riemann chain.
pub fn derive_g_chain(p: &IsotonicParams) -> [BasisCombo; 4] {
    let [al, be, ga, de] = p.alpha;
    let [b1, b2, b3, b4] = p.beta;
    [
        BasisCombo::new([al, be, ga, de, b1, b2, b3, b4]),
        BasisCombo::new([
            -be / 2.0,
            2.0 * al,
            -de,
            ga,
            -2.0 * b3,
            -2.0 * b4,
            b1 / 2.0,
            b2 / 2.0,
        ]),
        BasisCombo::new([
            -ga / 2.0,
            -de,
            2.0 * al,
            be,
            2.0 * b3,
            -2.0 * b4,
            -b1 / 2.0,
            b2 / 2.0,
        ]),
        BasisCombo::new([de / 2.0, -ga, -be, 2.0 * al, b1, -b2, b3, -b4]),
    ]
}

/// `(g1r, g1i, g2r, g2i) = (G1 + G4, G2 − G3, G1 − G4, G2 + G3)`.
pub fn g_fields(chain: &[BasisCombo; 4]) -> [BasisCombo; 4] {
    let [g1, g2, g3, g4] = chain;
    [g1.add(g4), g2.sub(g3), g1.sub(g4), g2.add(g3)]
}

fn near_singular(pt: PhasePoint) -> bool {
    let (w1, w2) = projected_coordinates(pt);
    w1.norm_sqr() < SINGULAR_RADIUS_SQ || w2.norm_sqr() < SINGULAR_RADIUS_SQ
}

/// `V = join(V(w1), V(w2))` with `V(w) = a w²` (harmonic), `−b w²` (inverted)
/// or `a w² + b / w²` (isotonic), as the four real components.
pub fn potential_components(spec: &ModelSpec, pt: PhasePoint) -> Result<[f64; 4]> {
    Ok(potential(spec, pt)?.to_array())
}

pub fn potential(spec: &ModelSpec, pt: PhasePoint) -> Result<Bicomplex> {
    let x = pt.coordinate();
    match spec.family {
        Family::Harmonic => Ok((x * x).scale(spec.a)),
        Family::Inverted => Ok((x * x).scale(-spec.b)),
        Family::Isotonic => {
            if near_singular(pt) {
                return Err(Error::SingularPhasePoint(pt.to_string()));
            }
            let (a, b) = (spec.a, spec.b);
            let s = x.split();
            Ok(s.map(|w| w * w * a + (w * w).inv() * b).join())
        }
    }
}

pub fn solve_params(spec: &ModelSpec) -> Result<Params> {
    spec.validate()?;
    let s = spec.sign.value();
    let ty = spec.solution_type;
    Ok(match spec.family {
        Family::Harmonic => {
            let r = (spec.a / 2.0).sqrt();
            Params::Harmonic(match ty {
                SolutionType::I => HarmonicParams {
                    alpha: s * 0.25 * r,
                    ..Default::default()
                },
                SolutionType::II => HarmonicParams {
                    delta: s * 0.5 * r,
                    ..Default::default()
                },
            })
        }
        // Same constraint system with a → −b; the real solutions sit in γ (Type I) and β (Type II).
        Family::Inverted => {
            let r = (spec.b / 2.0).sqrt();
            Params::Harmonic(match ty {
                SolutionType::I => HarmonicParams {
                    gamma: s * 0.5 * r,
                    ..Default::default()
                },
                SolutionType::II => HarmonicParams {
                    beta: s * 0.5 * r,
                    ..Default::default()
                },
            })
        }
        Family::Isotonic => {
            let q = spec.a.sqrt() / 2f64.sqrt();
            let mut alpha = [0.0; 4];
            match ty {
                SolutionType::I => alpha[0] = s * q / 4.0,
                SolutionType::II => alpha[3] = s * q / 2.0,
            }
            let disc = (1.0 + spec.b / 2.0).max(0.0).sqrt();
            let root = |br: Sign| (1.0 + br.value() * disc) / 8.0;
            Params::Isotonic(IsotonicParams {
                alpha,
                beta: [0.0, 0.0, root(spec.beta3), root(spec.beta4)],
            })
        }
    })
}

/// A closed-form ground state: parameters, the G chain, the g-fields and the predicted energy.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormState {
    pub spec: ModelSpec,
    pub params: Params,
    pub chain: [BasisCombo; 4],
    /// `g1r, g1i, g2r, g2i`.
    pub g: [BasisCombo; 4],
    pub predicted: EnergyQuad,
}

pub fn build_state(spec: &ModelSpec) -> Result<ClosedFormState> {
    let params = solve_params(spec)?;
    Ok(ClosedFormState::from_params(*spec, params))
}

impl ClosedFormState {
    pub fn from_params(spec: ModelSpec, params: Params) -> Self {
        let chain = derive_g_chain(&params.ansatz());
        let predicted = match params {
            Params::Harmonic(h) => h.energy(),
            Params::Isotonic(p) => p.energy(),
        };
        ClosedFormState {
            spec,
            params,
            chain,
            g: g_fields(&chain),
            predicted,
        }
    }

    /// Residuals of the parameter constraints for this state's model.
    pub fn constraint_residuals(&self) -> Vec<f64> {
        match (self.params, self.spec.family) {
            (Params::Harmonic(h), Family::Inverted) => h.constraint_residuals(-self.spec.b).to_vec(),
            (Params::Harmonic(h), _) => h.constraint_residuals(self.spec.a).to_vec(),
            (Params::Isotonic(p), _) => p.constraint_residuals(self.spec.a, self.spec.b).to_vec(),
        }
    }

    pub fn is_singular_point(&self, pt: PhasePoint) -> bool {
        let singular_terms = self.g.iter().any(|g| g.has_singular_terms());
        (self.spec.is_singular_family() || singular_terms) && near_singular(pt)
    }

    fn check(&self, pt: PhasePoint) -> Result<()> {
        if self.is_singular_point(pt) {
            return Err(Error::SingularPhasePoint(pt.to_string()));
        }
        Ok(())
    }

    pub fn g_values(&self, pt: PhasePoint) -> [f64; 4] {
        self.g.map(|g| g.value(pt))
    }

    pub fn g_values_near(&self, anchor: PhasePoint, pt: PhasePoint) -> [f64; 4] {
        self.g.map(|g| g.value_near(anchor, pt))
    }

    pub fn g_jets(&self, pt: PhasePoint) -> [Jet; 4] {
        self.g.map(|g| g.jet(pt).expect("basis combos carry jets"))
    }

    /// `ψ = exp(g1) e1 + exp(g2) e2` at `pt`.
    pub fn psi(&self, pt: PhasePoint) -> Result<Bicomplex> {
        self.check(pt)?;
        Ok(psi_from_g(self.g_values(pt)))
    }

    /// `ψ` at `pt` on the branch continuous at `anchor`; no admissibility check.
    pub fn psi_near(&self, anchor: PhasePoint, pt: PhasePoint) -> Bicomplex {
        psi_from_g(self.g_values_near(anchor, pt))
    }

    pub fn psi_components(&self, pt: PhasePoint) -> Result<[f64; 4]> {
        Ok(self.psi(pt)?.to_array())
    }

    /// Jets of `ψ1…ψ4`.
    pub fn psi_jets(&self, pt: PhasePoint) -> [Jet; 4] {
        let [g1r, g1i, g2r, g2i] = self.g_jets(pt);
        let e1 = g1r.exp();
        let e2 = g2r.exp();
        let u1 = e1.mul(&g1i.cos());
        let v1 = e1.mul(&g1i.sin());
        let u2 = e2.mul(&g2i.cos());
        let v2 = e2.mul(&g2i.sin());
        [
            u1.add(&u2).scale(0.5),
            v1.add(&v2).scale(0.5),
            v2.sub(&v1).scale(0.5),
            u1.sub(&u2).scale(0.5),
        ]
    }

    pub fn potential(&self, pt: PhasePoint) -> Result<Bicomplex> {
        potential(&self.spec, pt)
    }

    /// Real field `Σ w_k ψ_k`.
    pub fn combination(&self, weights: [f64; 4]) -> PsiCombination<'_> {
        PsiCombination { state: self, weights }
    }

    pub fn component(&self, k: usize) -> PsiCombination<'_> {
        let mut w = [0.0; 4];
        w[k] = 1.0;
        self.combination(w)
    }
}

/// `ψ1 = ½(e^{g1r}cos g1i + e^{g2r}cos g2i)` and its three companions.
pub fn psi_from_g(g: [f64; 4]) -> Bicomplex {
    let [g1r, g1i, g2r, g2i] = g;
    IdempotentPair::new(
        Complex64::from_polar(g1r.exp(), g1i),
        Complex64::from_polar(g2r.exp(), g2i),
    )
    .join()
}

/// A fixed real combination of the ψ components, viewed as a [`ScalarField`].
pub struct PsiCombination<'a> {
    state: &'a ClosedFormState,
    weights: [f64; 4],
}

impl PsiCombination<'_> {
    fn dot(&self, psi: Bicomplex) -> f64 {
        psi.to_array().iter().zip(self.weights).map(|(p, w)| p * w).sum()
    }
}

impl ScalarField for PsiCombination<'_> {
    fn value(&self, pt: PhasePoint) -> f64 {
        self.dot(psi_from_g(self.state.g_values(pt)))
    }

    fn value_near(&self, anchor: PhasePoint, pt: PhasePoint) -> f64 {
        self.dot(self.state.psi_near(anchor, pt))
    }

    fn jet(&self, pt: PhasePoint) -> Option<Jet> {
        let jets = self.state.psi_jets(pt);
        let mut acc = Jet::constant(0.0);
        for (j, w) in jets.iter().zip(self.weights) {
            if w != 0.0 {
                acc = acc.add(&j.scale(w));
            }
        }
        Some(acc)
    }
}

/// The six default states: every family and type with `+` branches
/// (isotonic at `a = 2, b = 6`), harmonic at `a = 2`, inverted at `b = 2`.
pub fn default_states() -> Vec<ModelSpec> {
    use SolutionType::*;
    let p = Sign::Plus;
    vec![
        ModelSpec::harmonic(2.0, I, p),
        ModelSpec::harmonic(2.0, II, p),
        ModelSpec::inverted(2.0, I, p),
        ModelSpec::inverted(2.0, II, p),
        ModelSpec::isotonic(2.0, 6.0, I, p, p, p),
        ModelSpec::isotonic(2.0, 6.0, II, p, p, p),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{check_cr_quadruple, fd_partial, max_abs, Coord, DerivMode, FdScheme, Partial};
    use proptest::prelude::*;
    use SolutionType::*;

    const P: Sign = Sign::Plus;
    const M: Sign = Sign::Minus;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn validation() {
        assert!(ModelSpec::harmonic(0.0, I, P).validate().is_err());
        assert!(ModelSpec::inverted(-1.0, I, P).validate().is_err());
        assert!(ModelSpec::isotonic(1.0, -2.5, I, P, P, P).validate().is_err());
        assert!(ModelSpec::isotonic(1.0, 0.0, I, P, P, P).validate().is_err());
        assert!(ModelSpec::isotonic(1.0, -2.0, I, P, P, P).validate().is_ok());
        assert!(matches!(
            solve_params(&ModelSpec::isotonic(1.0, -3.0, I, P, P, P)),
            Err(Error::InvalidCoupling(_))
        ));
    }

    #[test]
    fn potential_examples() {
        let h = ModelSpec::harmonic(1.0, I, P);
        assert_eq!(potential_components(&h, PhasePoint::new(1.0, 0.0, 0.0, 0.0)).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(potential_components(&h, PhasePoint::new(1.0, 1.0, 0.0, 0.0)).unwrap(), [0.0, 2.0, 0.0, 0.0]);
        let iso = ModelSpec::isotonic(1.0, 2.0, I, P, P, P);
        let v = potential_components(&iso, PhasePoint::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(close(v[0], 3.0, 1e-15) && v[1..].iter().all(|c| c.abs() < 1e-15), "{v:?}");
        assert!(matches!(
            potential_components(&iso, PhasePoint::new(0.5, 0.2, -0.2, 0.5)),
            Err(Error::SingularPhasePoint(_))
        ));
        let inv = ModelSpec::inverted(3.0, I, P);
        let pt = PhasePoint::new(0.3, -0.7, 1.2, 0.4);
        let vh = potential_components(&ModelSpec::harmonic(3.0, I, P), pt).unwrap();
        let vi = potential_components(&inv, pt).unwrap();
        for k in 0..4 {
            assert_eq!(vi[k], -vh[k]);
        }
    }

    #[test]
    fn harmonic_potential_matches_display() {
        let a = 1.7;
        let spec = ModelSpec::harmonic(a, I, P);
        let pt = PhasePoint::new(0.3, -0.7, 1.2, 0.4);
        let PhasePoint { x1, p1, p2, x2 } = pt;
        let v = potential_components(&spec, pt).unwrap();
        let expect = [
            a * (x1 * x1 - p1 * p1 - p2 * p2 + x2 * x2),
            2.0 * a * (x1 * p1 - x2 * p2),
            2.0 * a * (x1 * p2 - x2 * p1),
            2.0 * a * (x1 * x2 + p1 * p2),
        ];
        for k in 0..4 {
            assert!(close(v[k], expect[k], 1e-14));
        }
    }

    #[test]
    fn chain_examples() {
        let c = derive_g_chain(&HarmonicParams { alpha: 1.0, ..Default::default() }.as_ansatz());
        assert_eq!(c[1], BasisCombo::new([0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(c[2], BasisCombo::new([0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(c[3], BasisCombo::new([0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]));
        let z = derive_g_chain(&IsotonicParams::default());
        assert!(z.iter().all(|g| g.is_zero()));
        assert!(g_fields(&z).iter().all(|g| g.is_zero()));
    }

    #[test]
    fn g_field_examples() {
        let a = 2.0;
        let s = build_state(&ModelSpec::harmonic(a, I, P)).unwrap();
        let r = (a / 2.0).sqrt();
        let g1r = s.g[0];
        assert!(close(g1r.get(Basis::Q), 0.25 * r, 1e-16));
        assert!(close(g1r.get(Basis::C), 0.5 * r, 1e-16));
        assert_eq!(g1r.get(Basis::A), 0.0);
        let iso = build_state(&ModelSpec::isotonic(2.0, 6.0, I, P, P, P)).unwrap();
        assert!(close(iso.g[1].get(Basis::T1), -4.0 * 0.375, 1e-15));
    }

    #[test]
    fn solve_examples() {
        let Params::Harmonic(h) = solve_params(&ModelSpec::harmonic(2.0, I, P)).unwrap() else {
            panic!()
        };
        assert_eq!(h, HarmonicParams { alpha: 0.25, ..Default::default() });
        let Params::Isotonic(p) = solve_params(&ModelSpec::isotonic(2.0, 6.0, I, P, P, P)).unwrap() else {
            panic!()
        };
        assert_eq!(p.beta[2], 0.375);
        let Params::Isotonic(p) = solve_params(&ModelSpec::isotonic(2.0, -2.0, I, P, P, M)).unwrap() else {
            panic!()
        };
        assert_eq!((p.beta[2], p.beta[3]), (0.125, 0.125));
    }

    #[test]
    fn energy_examples() {
        let e = build_state(&ModelSpec::harmonic(2.0, I, P)).unwrap().predicted;
        assert_eq!(e, EnergyQuad::new(-4.0, 0.0, 0.0, 0.0));
        let e = build_state(&ModelSpec::harmonic(2.0, II, P)).unwrap().predicted;
        assert_eq!(e, EnergyQuad::new(0.0, 0.0, 0.0, -4.0));
        let e = build_state(&ModelSpec::isotonic(2.0, 6.0, I, P, P, P)).unwrap().predicted;
        assert!(close(e.e1, -16.0, 1e-12) && e.e2 == 0.0 && e.e3 == 0.0 && e.e4.abs() < 1e-12);
        let e = build_state(&ModelSpec::inverted(2.0, I, P)).unwrap().predicted;
        assert_eq!(e, EnergyQuad::new(0.0, 0.0, 4.0, 0.0));
        let e = build_state(&ModelSpec::inverted(2.0, II, M)).unwrap().predicted;
        assert_eq!(e, EnergyQuad::new(0.0, -4.0, 0.0, 0.0));
    }

    #[test]
    fn isotonic_type_closed_forms() {
        // Type I: E1 = −16α1[1 + 4(β3+β4)]; Type II: E4 = −8α4[1 + 4(β3+β4)].
        for (b3, b4) in [(P, P), (M, M), (P, M)] {
            let s = build_state(&ModelSpec::isotonic(3.0, 1.5, I, P, b3, b4)).unwrap();
            let Params::Isotonic(p) = s.params else { panic!() };
            let sum = p.beta[2] + p.beta[3];
            assert!(close(s.predicted.e1, -16.0 * p.alpha[0] * (1.0 + 4.0 * sum), 1e-12));
            let s = build_state(&ModelSpec::isotonic(3.0, 1.5, II, P, b3, b4)).unwrap();
            let Params::Isotonic(p) = s.params else { panic!() };
            assert!(close(s.predicted.e4, -8.0 * p.alpha[3] * (1.0 + 4.0 * sum), 1e-12));
        }
    }

    #[test]
    fn small_b_limit_recovers_harmonic() {
        let iso = build_state(&ModelSpec::isotonic(2.0, 1e-6, I, P, M, M)).unwrap();
        let h = build_state(&ModelSpec::harmonic(2.0, I, P)).unwrap();
        assert!((iso.predicted.e1 - h.predicted.e1).abs() < 1e-4);
    }

    #[test]
    fn origin_value() {
        let s = build_state(&ModelSpec::harmonic(2.0, II, M)).unwrap();
        assert_eq!(s.psi(PhasePoint::ORIGIN).unwrap(), Bicomplex::ONE);
    }

    #[test]
    fn harmonic_type_i_matches_display() {
        // ψ1 = ½ e^{α(Q+2C)} cos(2α(A−B)) + ½ e^{α(Q−2C)} cos(2α(A+B)), α = ¼√(a/2).
        let a = 3.0;
        let al = 0.25 * (a / 2.0f64).sqrt();
        let s = build_state(&ModelSpec::harmonic(a, I, P)).unwrap();
        let pt = PhasePoint::new(0.4, -0.3, 0.8, -0.6);
        let q = basis_value(Basis::Q, pt);
        let (aa, bb, cc) = (basis_value(Basis::A, pt), basis_value(Basis::B, pt), basis_value(Basis::C, pt));
        let (r1, i1) = (al * (q + 2.0 * cc), 2.0 * al * (aa - bb));
        let (r2, i2) = (al * (q - 2.0 * cc), 2.0 * al * (aa + bb));
        let expect = [
            0.5 * (r1.exp() * i1.cos() + r2.exp() * i2.cos()),
            0.5 * (r1.exp() * i1.sin() + r2.exp() * i2.sin()),
            0.5 * (-r1.exp() * i1.sin() + r2.exp() * i2.sin()),
            0.5 * (r1.exp() * i1.cos() - r2.exp() * i2.cos()),
        ];
        let got = s.psi_components(pt).unwrap();
        for k in 0..4 {
            assert!(close(got[k], expect[k], 1e-14), "{k}: {} vs {}", got[k], expect[k]);
        }
    }

    #[test]
    fn anchored_angle_is_continuous_across_cut() {
        let s = build_state(&ModelSpec::isotonic(2.0, 6.0, I, P, P, P)).unwrap();
        // Y1 = p1 − p2 = 0 here.
        let pt = PhasePoint::new(0.5, 0.5, 0.5, 1.0);
        let up = pt.shifted(Coord::P1, 1e-6);
        let dn = pt.shifted(Coord::P1, -1e-6);
        let plain = (s.g[1].value(up) - s.g[1].value(dn)).abs();
        let near = (s.g[1].value_near(pt, up) - s.g[1].value_near(pt, dn)).abs();
        assert!(plain > 1.0);
        assert!(near < 1e-4);
        let fd = fd_partial(&s.g[1], pt, Partial::First(Coord::P1), FdScheme::default());
        let exact = s.g[1].jet(pt).unwrap().grad[1];
        assert!((fd - exact).abs() < 1e-5);
    }

    fn pt() -> impl Strategy<Value = PhasePoint> {
        (-1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5)
            .prop_map(|(a, b, c, d)| PhasePoint::new(a, b, c, d))
    }

    fn admissible(p: &PhasePoint) -> bool {
        let (w1, w2) = projected_coordinates(*p);
        w1.norm_sqr() >= 0.25 && w2.norm_sqr() >= 0.25
    }

    proptest! {
        #[test]
        fn chain_satisfies_cr(al in -1.0f64..1.0, be in -1.0f64..1.0, ga in -1.0f64..1.0, de in -1.0f64..1.0,
                              b in proptest::array::uniform4(-1.0f64..1.0), p in pt()) {
            prop_assume!(admissible(&p));
            let chain = derive_g_chain(&IsotonicParams { alpha: [al, be, ga, de], beta: b });
            let r = check_cr_quadruple([&chain[0], &chain[1], &chain[2], &chain[3]], p, DerivMode::Analytic).unwrap();
            prop_assert!(max_abs(&r) < 1e-10, "{r:?}");
            let r = check_cr_quadruple([&chain[0], &chain[1], &chain[2], &chain[3]], p, DerivMode::Fd(FdScheme::default())).unwrap();
            prop_assert!(max_abs(&r) < 1e-4, "{r:?}");
        }

        #[test]
        fn basis_jets_match_fd(p in pt(), k in 0usize..8) {
            // Fourth derivatives of the logarithms grow like |w|^-4; stay where they are O(1).
            let (w1, w2) = projected_coordinates(p);
            prop_assume!(w1.norm_sqr() >= 1.0 && w2.norm_sqr() >= 1.0);
            let mut coef = [0.0; 8];
            coef[k] = 1.0;
            let f = BasisCombo::new(coef);
            let j = f.jet(p).unwrap();
            for a in Coord::ALL {
                for b in Coord::ALL {
                    let d = fd_partial(&f, p, Partial::Mixed(a, b), FdScheme::default());
                    let e = j.partial(Partial::Mixed(a, b));
                    prop_assert!((d - e).abs() <= 1e-5 * e.abs().max(1.0), "{k} {a:?}{b:?} {d} {e}");
                }
                let d = fd_partial(&f, p, Partial::First(a), FdScheme::default());
                prop_assert!((d - j.grad[a.index()]).abs() <= 1e-5 * j.grad[a.index()].abs().max(1.0));
            }
        }

        #[test]
        fn solved_constraints_vanish(a in 0.1f64..10.0, b in -2.0f64..10.0, ty in prop_oneof![Just(I), Just(II)],
                                     s in prop_oneof![Just(P), Just(M)], s3 in prop_oneof![Just(P), Just(M)],
                                     s4 in prop_oneof![Just(P), Just(M)]) {
            prop_assume!(b != 0.0);
            for spec in [ModelSpec::harmonic(a, ty, s), ModelSpec::inverted(a, ty, s), ModelSpec::isotonic(a, b, ty, s, s3, s4)] {
                let st = build_state(&spec).unwrap();
                prop_assert!(max_abs(&st.constraint_residuals()) <= 1e-12 * a.max(b.abs()).max(1.0));
            }
        }

        #[test]
        fn reconstruction_identities(p in pt(), k in 0usize..6) {
            prop_assume!(admissible(&p));
            let st = build_state(&default_states()[k]).unwrap();
            let [c1, c2, c3, c4] = st.psi_components(p).unwrap();
            let [g1r, g1i, g2r, g2i] = st.g_values(p);
            let tol = 1e-12 * g1r.exp().max(g2r.exp()).max(1.0);
            prop_assert!((c1 + c4 - g1r.exp() * g1i.cos()).abs() <= tol);
            prop_assert!((c2 - c3 - g1r.exp() * g1i.sin()).abs() <= tol);
            prop_assert!((c1 - c4 - g2r.exp() * g2i.cos()).abs() <= tol);
            prop_assert!((c2 + c3 - g2r.exp() * g2i.sin()).abs() <= tol);
        }
    }
}
