//! Energy functionals in ψ-form and g-form, the residual of the bicomplex
//! Schrödinger equation, and assembly of the physical energy with ξ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bicomplex::{Bicomplex, IdempotentPair};
use crate::error::{Error, Result};
use crate::field::{apply_f, projected_coordinates, DerivMode, PhasePoint, F_WEIGHTS};
use crate::models::ClosedFormState;

/// Default lower bound for the quotient denominators.
pub const EPS_DEN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyQuad {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

impl EnergyQuad {
    pub const fn new(e1: f64, e2: f64, e3: f64, e4: f64) -> Self {
        EnergyQuad { e1, e2, e3, e4 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.e1, self.e2, self.e3, self.e4]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        EnergyQuad::new(a[0], a[1], a[2], a[3])
    }

    pub fn as_bicomplex(self) -> Bicomplex {
        Bicomplex::from_array(self.to_array())
    }

    pub fn max_abs_diff(self, o: EnergyQuad) -> f64 {
        self.to_array()
            .iter()
            .zip(o.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, |m, d| if d > m || d.is_nan() { d } else { m })
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl std::fmt::Display for EnergyQuad {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.e1, self.e2, self.e3, self.e4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiSpec {
    pub xi1: f64,
    pub xi2: f64,
}

impl Default for XiSpec {
    fn default() -> Self {
        XiSpec { xi1: 1.0, xi2: 1.0 }
    }
}

impl XiSpec {
    pub fn new(xi1: f64, xi2: f64) -> Result<Self> {
        let xi = XiSpec { xi1, xi2 };
        xi.validate()?;
        Ok(xi)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("xi1", self.xi1), ("xi2", self.xi2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// The symmetry operators need a real ξ².
    pub fn validate_for_pt(&self) -> Result<()> {
        self.validate()?;
        if self.xi1 != self.xi2 {
            return Err(Error::config(
                "xi2",
                format!("PT checks require xi1 = xi2, got {} and {}", self.xi1, self.xi2),
            ));
        }
        Ok(())
    }

    /// `ξ² = ξ1² e1 + ξ2² e2`.
    pub fn xi_squared(&self) -> Bicomplex {
        let (a, b) = (self.xi1 * self.xi1, self.xi2 * self.xi2);
        Bicomplex::new(0.5 * (a + b), 0.0, 0.0, 0.5 * (a - b))
    }
}

/// `Ẽ = ξ² E / 16`.
pub fn physical_energy(e: EnergyQuad, xi: XiSpec) -> Bicomplex {
    (xi.xi_squared() * e.as_bicomplex()).scale(1.0 / 16.0)
}

/// Which unit a bicomplex value is aligned with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralCharacter {
    Zero,
    Real,
    /// Proportional to `i`.
    ImaginaryI,
    /// Proportional to `î`.
    ImaginaryIHat,
    /// Proportional to `iî`.
    Hyperbolic,
    Mixed,
}

pub fn spectral_character(e: Bicomplex, tol: f64) -> SpectralCharacter {
    let c = e.to_array();
    let nz: Vec<usize> = (0..4).filter(|k| c[*k].abs() > tol).collect();
    match nz.as_slice() {
        [] => SpectralCharacter::Zero,
        [0] => SpectralCharacter::Real,
        [1] => SpectralCharacter::ImaginaryI,
        [2] => SpectralCharacter::ImaginaryIHat,
        [3] => SpectralCharacter::Hyperbolic,
        _ => SpectralCharacter::Mixed,
    }
}

/// Quotient formulas on the combinations `ψ1±ψ4`, `ψ2∓ψ3`:
/// `E1 = V1 + (Q1+Q2)/2`, `E4 = V4 + (Q1−Q2)/2`, `E2 = V2 + (R1+R2)/2`, `E3 = V3 + (R2−R1)/2`
/// with `Q = (u𝔉u + v𝔉v)/(u²+v²)` and `R = (u𝔉v − v𝔉u)/(u²+v²)`.
pub fn energy_from_psi(
    state: &ClosedFormState,
    pt: PhasePoint,
    mode: DerivMode,
    eps_den: f64,
) -> Result<EnergyQuad> {
    let v = state.potential(pt)?.to_array();
    let psi = state.psi(pt)?.to_array();
    let pairs = [
        ([1.0, 0.0, 0.0, 1.0], [0.0, 1.0, -1.0, 0.0]),
        ([1.0, 0.0, 0.0, -1.0], [0.0, 1.0, 1.0, 0.0]),
    ];
    let dot = |w: [f64; 4]| -> f64 { (0..4).map(|k| w[k] * psi[k]).sum() };
    let mut qr = [(0.0, 0.0); 2];
    for (k, (wu, wv)) in pairs.iter().enumerate() {
        let (u, vv) = (dot(*wu), dot(*wv));
        let den = u * u + vv * vv;
        if den.is_nan() || den < eps_den {
            return Err(Error::DegenerateDenominator {
                value: den,
                threshold: eps_den,
            });
        }
        let fu = apply_f(&state.combination(*wu), pt, mode)?;
        let fv = apply_f(&state.combination(*wv), pt, mode)?;
        qr[k] = ((u * fu + vv * fv) / den, (u * fv - vv * fu) / den);
    }
    let [(q1, r1), (q2, r2)] = qr;
    Ok(EnergyQuad::new(
        v[0] + 0.5 * (q1 + q2),
        v[1] + 0.5 * (r1 + r2),
        v[2] + 0.5 * (r2 - r1),
        v[3] + 0.5 * (q1 - q2),
    ))
}

/// The g-form: with weights `w = (−7, 3, 1, −5)` over `(x1, p1, p2, x2)`,
/// `S_R(g) = Σ w[∂²g_r + (∂g_r)² − (∂g_i)²]` and `S_I(g) = Σ w[½∂²g_i + ∂g_r ∂g_i]`,
/// `E1 = V1 + ¼(S_R(g1) + S_R(g2))`, `E4 = V4 + ¼(S_R(g1) − S_R(g2))`,
/// `E2 = V2 + ½(S_I(g2) + S_I(g1))`, `E3 = V3 + ½(S_I(g2) − S_I(g1))`.
pub fn energy_from_g(state: &ClosedFormState, pt: PhasePoint) -> Result<EnergyQuad> {
    let v = state.potential(pt)?.to_array();
    let [g1r, g1i, g2r, g2i] = state.g_jets(pt);
    let sums = |r: &crate::field::Jet, i: &crate::field::Jet| {
        let mut sr = 0.0;
        let mut si = 0.0;
        for (k, fw) in F_WEIGHTS.iter().enumerate() {
            let w = 2.0 * fw;
            sr += w * (r.hess[k][k] + r.grad[k] * r.grad[k] - i.grad[k] * i.grad[k]);
            si += w * (0.5 * i.hess[k][k] + r.grad[k] * i.grad[k]);
        }
        (sr, si)
    };
    let (sr1, si1) = sums(&g1r, &g1i);
    let (sr2, si2) = sums(&g2r, &g2i);
    Ok(EnergyQuad::new(
        v[0] + 0.25 * (sr1 + sr2),
        v[1] + 0.5 * (si2 + si1),
        v[2] + 0.5 * (si2 - si1),
        v[3] + 0.25 * (sr1 - sr2),
    ))
}

/// Phase-space displacement moving one projected coordinate by a complex step.
fn projected_step(k: usize, d: Complex64) -> [f64; 4] {
    let (re, im) = (0.5 * d.re, 0.5 * d.im);
    if k == 0 {
        [re, im, -im, re]
    } else {
        [re, im, im, -re]
    }
}

/// `‖ξ²(−½ψ″ + (V − E)ψ/16)‖` with `ψ″` from a four-point complex-plane stencil
/// on each projected coordinate: `f″ ≈ [f(w+h) + f(w−h) − f(w+ih) − f(w−ih)] / 2h²`.
pub fn ase_residual(
    state: &ClosedFormState,
    energy: EnergyQuad,
    xi: XiSpec,
    pt: PhasePoint,
    h: f64,
) -> Result<f64> {
    let v = state.potential(pt)?;
    let psi = state.psi(pt)?;
    let (w1, w2) = projected_coordinates(pt);
    if state.spec.is_singular_family() && (w1.norm() <= 2.0 * h || w2.norm() <= 2.0 * h) {
        return Err(Error::DegenerateProjection(pt.to_string()));
    }
    let steps = [
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::new(0.0, h),
        Complex64::new(0.0, -h),
    ];
    let mut d2 = [Complex64::new(0.0, 0.0); 2];
    for (k, out) in d2.iter_mut().enumerate() {
        let f = |d: Complex64| {
            let s = state.psi_near(pt, pt.offset(projected_step(k, d))).split();
            if k == 0 {
                s.w1
            } else {
                s.w2
            }
        };
        let vals: Vec<Complex64> = steps.iter().map(|d| f(*d)).collect();
        *out = (vals[0] + vals[1] - vals[2] - vals[3]) / (2.0 * h * h);
    }
    let d2psi = IdempotentPair::new(d2[0], d2[1]).join();
    let r = d2psi.scale(-0.5) + ((v - energy.as_bicomplex()) * psi).scale(1.0 / 16.0);
    Ok((xi.xi_squared() * r).euclid_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FdScheme, Grid};
    use crate::models::{build_state, default_states, ModelSpec, Sign, SolutionType};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use SolutionType::*;

    const P: Sign = Sign::Plus;
    const FD: DerivMode = DerivMode::Fd(FdScheme { h: 1e-3 });

    #[test]
    fn physical_energy_examples() {
        let xi = XiSpec::default();
        assert_eq!(physical_energy(EnergyQuad::new(-4.0, 0.0, 0.0, 0.0), xi), Bicomplex::real(-0.25));
        assert_eq!(physical_energy(EnergyQuad::new(0.0, 0.0, 0.0, -4.0), xi), Bicomplex::J.scale(-0.25));
        assert_eq!(physical_energy(EnergyQuad::new(0.0, 0.0, 4.0, 0.0), xi), Bicomplex::I_HAT.scale(0.25));
        assert_eq!(physical_energy(EnergyQuad::new(0.0, 0.0, -4.0, 0.0), xi), Bicomplex::I_HAT.scale(-0.25));
        let xi = XiSpec::new(2.0, 1.0).unwrap();
        let e = physical_energy(EnergyQuad::new(16.0, 0.0, 0.0, 0.0), xi).split();
        assert_eq!((e.w1.re, e.w2.re), (4.0, 1.0));
        assert!(XiSpec::new(0.0, 1.0).is_err());
        assert!(XiSpec::new(2.0, 1.0).unwrap().validate_for_pt().is_err());
    }

    #[test]
    fn characters() {
        assert_eq!(spectral_character(Bicomplex::real(-0.25), 1e-12), SpectralCharacter::Real);
        assert_eq!(spectral_character(Bicomplex::J, 1e-12), SpectralCharacter::Hyperbolic);
        assert_eq!(spectral_character(Bicomplex::I, 1e-12), SpectralCharacter::ImaginaryI);
        assert_eq!(spectral_character(Bicomplex::I_HAT, 1e-12), SpectralCharacter::ImaginaryIHat);
        assert_eq!(spectral_character(Bicomplex::E1, 1e-12), SpectralCharacter::Mixed);
        assert_eq!(spectral_character(Bicomplex::ZERO, 1e-12), SpectralCharacter::Zero);
    }

    #[test]
    fn harmonic_psi_form() {
        let s = build_state(&ModelSpec::harmonic(2.0, I, P)).unwrap();
        let want = EnergyQuad::new(-4.0, 0.0, 0.0, 0.0);
        for pt in [PhasePoint::new(0.3, 0.1, -0.2, 0.4), PhasePoint::new(-1.1, 0.7, 0.9, -0.2)] {
            let e = energy_from_psi(&s, pt, DerivMode::Analytic, EPS_DEN).unwrap();
            assert!(e.max_abs_diff(want) < 1e-8, "{e}");
            let e = energy_from_psi(&s, pt, FD, EPS_DEN).unwrap();
            assert!(e.max_abs_diff(want) < 1e-4, "{e}");
        }
    }

    #[test]
    fn g_form_examples() {
        let s = build_state(&ModelSpec::harmonic(2.0, II, P)).unwrap();
        let e = energy_from_g(&s, PhasePoint::new(0.5, -1.0, 0.2, 0.8)).unwrap();
        assert!(e.max_abs_diff(EnergyQuad::new(0.0, 0.0, 0.0, -4.0)) < 1e-12, "{e}");
        let iso = build_state(&ModelSpec::isotonic(2.0, 6.0, I, P, P, P)).unwrap();
        let e = energy_from_g(&iso, PhasePoint::new(1.0, 0.4, -0.3, 0.2)).unwrap();
        assert!(e.max_abs_diff(EnergyQuad::new(-16.0, 0.0, 0.0, 0.0)) < 1e-10, "{e}");
        let e = energy_from_psi(&iso, PhasePoint::new(1.0, 0.4, -0.3, 0.2), FD, EPS_DEN).unwrap();
        assert!(e.max_abs_diff(EnergyQuad::new(-16.0, 0.0, 0.0, 0.0)) < 1e-4, "{e}");
    }

    #[test]
    fn zero_state() {
        use crate::models::{ClosedFormState, HarmonicParams, Params};
        // Harmonic family at any coupling with zero ψ-params has V ≠ 0, so check the kinetic part only.
        let s = ClosedFormState::from_params(ModelSpec::harmonic(1.0, I, P), Params::Harmonic(HarmonicParams::default()));
        let pt = PhasePoint::ORIGIN;
        assert_eq!(energy_from_g(&s, pt).unwrap(), EnergyQuad::default());
        assert_eq!(ase_residual(&s, EnergyQuad::default(), XiSpec::default(), pt, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn ase_on_all_states() {
        let grid = Grid::symmetric(1.5, 4).with_exclusion(Some(0.5));
        for spec in default_states() {
            let s = build_state(&spec).unwrap();
            for pt in grid.points().unwrap() {
                let r = ase_residual(&s, s.predicted, XiSpec::default(), pt, 1e-3).unwrap();
                assert!(r < 1e-4, "{} at {pt}: {r}", spec.label());
            }
        }
    }

    #[test]
    fn ase_detects_wrong_energy() {
        let s = build_state(&ModelSpec::harmonic(2.0, I, P)).unwrap();
        let mut e = s.predicted;
        e.e1 += 0.1;
        let grid = Grid::symmetric(1.5, 4);
        let worst = grid
            .points()
            .unwrap()
            .into_iter()
            .map(|pt| {
                let r = ase_residual(&s, e, XiSpec::default(), pt, 1e-3).unwrap();
                r / s.psi(pt).unwrap().euclid_norm()
            })
            .fold(0.0, f64::max);
        assert!(worst >= 0.1 / 16.0 * 0.5, "{worst}");
    }

    #[test]
    fn g_and_psi_forms_agree() {
        let grid = Grid::default().with_exclusion(Some(0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in default_states() {
            let s = build_state(&spec).unwrap();
            for pt in grid.sample(&mut rng, 20) {
                let g = energy_from_g(&s, pt).unwrap();
                let p = energy_from_psi(&s, pt, FD, EPS_DEN).unwrap();
                assert!(g.max_abs_diff(p) < 1e-4, "{}: {g} vs {p}", spec.label());
                assert!(g.max_abs_diff(s.predicted) < 1e-8, "{}: {g} vs {}", spec.label(), s.predicted);
            }
        }
    }
}
