//! Scalar fields on the extended phase space `(x1, p1, p2, x2)`, their partial
//! derivatives (analytic jets or central differences), the operator 𝔉 and the
//! bicomplex Cauchy–Riemann checks.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bicomplex::Bicomplex;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x1: f64,
    pub p1: f64,
    pub p2: f64,
    pub x2: f64,
}

/// Coordinate axes in storage order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coord {
    X1 = 0,
    P1 = 1,
    P2 = 2,
    X2 = 3,
}

impl Coord {
    pub const ALL: [Coord; 4] = [Coord::X1, Coord::P1, Coord::P2, Coord::X2];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(x1: f64, p1: f64, p2: f64, x2: f64) -> Self {
        PhasePoint { x1, p1, p2, x2 }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        PhasePoint::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.p1, self.p2, self.x2]
    }

    pub fn get(self, c: Coord) -> f64 {
        self.to_array()[c.index()]
    }

    pub fn shifted(self, c: Coord, d: f64) -> Self {
        let mut a = self.to_array();
        a[c.index()] += d;
        PhasePoint::from_array(a)
    }

    pub fn offset(self, d: [f64; 4]) -> Self {
        let a = self.to_array();
        PhasePoint::new(a[0] + d[0], a[1] + d[1], a[2] + d[2], a[3] + d[3])
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// The bicomplex coordinate `x = x1 + i p1 + î p2 + iî x2`.
    pub fn coordinate(self) -> Bicomplex {
        Bicomplex::new(self.x1, self.p1, self.p2, self.x2)
    }
}

impl std::fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.p1, self.p2, self.x2)
    }
}

/// Idempotent projections of the coordinate: `((x1+x2) + i(p1−p2), (x1−x2) + i(p1+p2))`.
pub fn projected_coordinates(pt: PhasePoint) -> (Complex64, Complex64) {
    let s = pt.coordinate().split();
    (s.w1, s.w2)
}

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 4],
    pub hess: [[f64; 4]; 4],
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Jet {
            value,
            grad: [0.0; 4],
            hess: [[0.0; 4]; 4],
        }
    }

    pub fn coordinate(pt: PhasePoint, c: Coord) -> Self {
        let mut j = Jet::constant(pt.get(c));
        j.grad[c.index()] = 1.0;
        j
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.value *= s;
        out.grad.iter_mut().for_each(|g| *g *= s);
        out.hess.iter_mut().flatten().for_each(|h| *h *= s);
        out
    }

    pub fn add(&self, o: &Jet) -> Self {
        let mut out = *self;
        out.value += o.value;
        for i in 0..4 {
            out.grad[i] += o.grad[i];
            for j in 0..4 {
                out.hess[i][j] += o.hess[i][j];
            }
        }
        out
    }

    pub fn sub(&self, o: &Jet) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Jet) -> Self {
        let mut out = Jet::constant(self.value * o.value);
        for i in 0..4 {
            out.grad[i] = self.grad[i] * o.value + self.value * o.grad[i];
            for j in 0..4 {
                out.hess[i][j] = self.hess[i][j] * o.value
                    + self.grad[i] * o.grad[j]
                    + self.grad[j] * o.grad[i]
                    + self.value * o.hess[i][j];
            }
        }
        out
    }

    /// Chain rule for a unary function with value `f0`, first derivative `f1`, second `f2`.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::constant(f0);
        for i in 0..4 {
            out.grad[i] = f1 * self.grad[i];
            for j in 0..4 {
                out.hess[i][j] = f2 * self.grad[i] * self.grad[j] + f1 * self.hess[i][j];
            }
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn partial(&self, which: Partial) -> f64 {
        match which {
            Partial::First(c) => self.grad[c.index()],
            Partial::Second(c) => self.hess[c.index()][c.index()],
            Partial::Mixed(a, b) => self.hess[a.index()][b.index()],
        }
    }
}

/// A real-valued field on phase space.
///
/// `value_near` evaluates at `pt` on the branch that is continuous at `anchor`;
/// fields with no branch cuts leave it at the default. Difference stencils
/// always go through it.
pub trait ScalarField: Send + Sync {
    fn value(&self, pt: PhasePoint) -> f64;

    fn value_near(&self, _anchor: PhasePoint, pt: PhasePoint) -> f64 {
        self.value(pt)
    }

    fn jet(&self, _pt: PhasePoint) -> Option<Jet> {
        None
    }
}

/// Closure-backed field, optionally with an analytic jet.
pub struct FnField<F> {
    f: F,
    jet: Option<Box<dyn Fn(PhasePoint) -> Jet + Send + Sync>>,
}

impl<F: Fn(PhasePoint) -> f64 + Send + Sync> FnField<F> {
    pub fn new(f: F) -> Self {
        FnField { f, jet: None }
    }

    pub fn with_jet(f: F, jet: impl Fn(PhasePoint) -> Jet + Send + Sync + 'static) -> Self {
        FnField {
            f,
            jet: Some(Box::new(jet)),
        }
    }
}

impl<F: Fn(PhasePoint) -> f64 + Send + Sync> ScalarField for FnField<F> {
    fn value(&self, pt: PhasePoint) -> f64 {
        (self.f)(pt)
    }

    fn jet(&self, pt: PhasePoint) -> Option<Jet> {
        self.jet.as_ref().map(|j| j(pt))
    }
}

/// Identically zero field.
pub struct Zero;

impl ScalarField for Zero {
    fn value(&self, _pt: PhasePoint) -> f64 {
        0.0
    }

    fn jet(&self, _pt: PhasePoint) -> Option<Jet> {
        Some(Jet::constant(0.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partial {
    First(Coord),
    Second(Coord),
    Mixed(Coord, Coord),
}

/// Central difference stencils with a uniform step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdScheme {
    pub h: f64,
}

impl FdScheme {
    pub const DEFAULT_STEP: f64 = 1e-3;

    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config("fd-step", format!("step must be positive, got {h}")));
        }
        Ok(FdScheme { h })
    }
}

impl Default for FdScheme {
    fn default() -> Self {
        FdScheme {
            h: Self::DEFAULT_STEP,
        }
    }
}

/// How partial derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivMode {
    Analytic,
    Fd(FdScheme),
}

pub fn fd_partial(f: &dyn ScalarField, pt: PhasePoint, which: Partial, scheme: FdScheme) -> f64 {
    let h = scheme.h;
    let v = |q: PhasePoint| f.value_near(pt, q);
    match which {
        Partial::First(c) => (v(pt.shifted(c, h)) - v(pt.shifted(c, -h))) / (2.0 * h),
        Partial::Second(c) => {
            (v(pt.shifted(c, h)) - 2.0 * v(pt) + v(pt.shifted(c, -h))) / (h * h)
        }
        Partial::Mixed(a, b) if a == b => fd_partial(f, pt, Partial::Second(a), scheme),
        Partial::Mixed(a, b) => {
            let pp = v(pt.shifted(a, h).shifted(b, h));
            let pm = v(pt.shifted(a, h).shifted(b, -h));
            let mp = v(pt.shifted(a, -h).shifted(b, h));
            let mm = v(pt.shifted(a, -h).shifted(b, -h));
            (pp - pm - mp + mm) / (4.0 * h * h)
        }
    }
}

pub fn partial(f: &dyn ScalarField, pt: PhasePoint, which: Partial, mode: DerivMode) -> Result<f64> {
    match mode {
        DerivMode::Analytic => f
            .jet(pt)
            .map(|j| j.partial(which))
            .ok_or(Error::MissingAnalyticPartials),
        DerivMode::Fd(s) => Ok(fd_partial(f, pt, which, s)),
    }
}

/// Coefficients of `∂²/∂x1², ∂²/∂p1², ∂²/∂p2², ∂²/∂x2²` in 𝔉.
pub const F_WEIGHTS: [f64; 4] = [-3.5, 1.5, 0.5, -2.5];

/// 𝔉f = −(7/2)f_x1x1 + (3/2)f_p1p1 + (1/2)f_p2p2 − (5/2)f_x2x2.
pub fn apply_f(f: &dyn ScalarField, pt: PhasePoint, mode: DerivMode) -> Result<f64> {
    let mut acc = 0.0;
    for (c, w) in Coord::ALL.iter().zip(F_WEIGHTS) {
        acc += w * partial(f, pt, Partial::Second(*c), mode)?;
    }
    Ok(acc)
}

/// The 12 residuals of the Cauchy–Riemann rows for `ψ = ψ1 + iψ2 + îψ3 + iîψ4`,
/// i.e. `∂p1ψ = iψ′`, `∂p2ψ = îψ′`, `∂x2ψ = iîψ′` written out per component.
pub fn check_cr_quadruple(
    psi: [&dyn ScalarField; 4],
    pt: PhasePoint,
    mode: DerivMode,
) -> Result<[f64; 12]> {
    let mut d = [[0.0; 4]; 4];
    for (k, f) in psi.iter().enumerate() {
        for c in Coord::ALL {
            d[k][c.index()] = partial(*f, pt, Partial::First(c), mode)?;
        }
    }
    let (x1, p1, p2, x2) = (0, 1, 2, 3);
    // d[component][coordinate]; each row lists the quantities that must coincide.
    let rows = [
        [d[0][x1], d[1][p1], d[2][p2], d[3][x2]],
        [d[1][x1], -d[0][p1], d[3][p2], -d[2][x2]],
        [d[2][x1], d[3][p1], -d[0][p2], -d[1][x2]],
        [d[3][x1], -d[2][p1], -d[1][p2], d[0][x2]],
    ];
    let mut out = [0.0; 12];
    for (r, row) in rows.iter().enumerate() {
        for j in 0..3 {
            out[3 * r + j] = row[0] - row[j + 1];
        }
    }
    Ok(out)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.abs() > m || x.is_nan() { x.abs() } else { m })
}

/// Axis-aligned sampling grid with an optional keep-out disc around the
/// singular set `w1 = 0` / `w2 = 0` of the projected coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub ranges: [(f64, f64); 4],
    pub counts: [usize; 4],
    pub exclusion_radius: Option<f64>,
}

impl Grid {
    pub const DEFAULT_RANGE: f64 = 1.5;
    pub const DEFAULT_POINTS: usize = 7;

    pub fn symmetric(range: f64, points: usize) -> Self {
        Grid {
            ranges: [(-range, range); 4],
            counts: [points; 4],
            exclusion_radius: None,
        }
    }

    pub fn with_exclusion(mut self, radius: Option<f64>) -> Self {
        self.exclusion_radius = radius;
        self
    }

    pub fn total(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn admissible(&self, pt: PhasePoint) -> bool {
        match self.exclusion_radius {
            None => true,
            Some(r) => {
                let (w1, w2) = projected_coordinates(pt);
                w1.norm_sqr() >= r * r && w2.norm_sqr() >= r * r
            }
        }
    }

    fn axis(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.ranges[k];
        let n = self.counts[k];
        if n == 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Every lattice point, admissible or not.
    pub fn all_points(&self) -> Vec<PhasePoint> {
        let axes: Vec<Vec<f64>> = (0..4).map(|k| self.axis(k)).collect();
        let mut out = Vec::with_capacity(self.total());
        for &a in &axes[0] {
            for &b in &axes[1] {
                for &c in &axes[2] {
                    for &d in &axes[3] {
                        out.push(PhasePoint::new(a, b, c, d));
                    }
                }
            }
        }
        out
    }

    pub fn points(&self) -> Result<Vec<PhasePoint>> {
        let pts: Vec<_> = self
            .all_points()
            .into_iter()
            .filter(|p| self.admissible(*p))
            .collect();
        if pts.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(pts)
    }

    pub fn admissible_fraction(&self) -> f64 {
        let n = self.all_points().iter().filter(|p| self.admissible(**p)).count();
        n as f64 / self.total() as f64
    }

    /// Uniform random admissible points inside the grid box (rejection sampling).
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<PhasePoint> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let mut c = [0.0; 4];
            for (k, v) in c.iter_mut().enumerate() {
                let (lo, hi) = self.ranges[k];
                *v = if hi > lo { rng.random_range(lo..hi) } else { lo };
            }
            let pt = PhasePoint::from_array(c);
            if self.admissible(pt) {
                out.push(pt);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (k, &(lo, hi)) in self.ranges.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::config("grid-range", format!("axis {k}: bad range [{lo}, {hi}]")));
            }
        }
        if let Some(&n) = self.counts.iter().find(|&&n| n < 3) {
            return Err(Error::config("grid-points", format!("need at least 3 points per axis, got {n}")));
        }
        if let Some(r) = self.exclusion_radius {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::config("exclusion-radius", format!("must be non-negative, got {r}")));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        let (lo, hi) = self.ranges[0];
        let uniform = self.ranges.iter().all(|r| *r == self.ranges[0])
            && self.counts.iter().all(|c| *c == self.counts[0]);
        let mut s = if uniform {
            format!("[{lo}, {hi}]^4 x {}", self.counts[0])
        } else {
            format!("{:?} x {:?}", self.ranges, self.counts)
        };
        if let Some(r) = self.exclusion_radius {
            s.push_str(&format!(", |w_k| >= {r}"));
        }
        s
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::symmetric(Self::DEFAULT_RANGE, Self::DEFAULT_POINTS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TAU_FD: f64 = 1e-5;

    fn x1_sq() -> impl ScalarField {
        FnField::with_jet(
            |p: PhasePoint| p.x1 * p.x1,
            |p| {
                let x = Jet::coordinate(p, Coord::X1);
                x.mul(&x)
            },
        )
    }

    fn smooth(p: PhasePoint) -> Jet {
        let x1 = Jet::coordinate(p, Coord::X1);
        let p1 = Jet::coordinate(p, Coord::P1);
        let p2 = Jet::coordinate(p, Coord::P2);
        let x2 = Jet::coordinate(p, Coord::X2);
        x1.mul(&p2).scale(0.5).sin().add(&p1.mul(&x2).scale(0.3).exp()).add(&x1.mul(&p1).scale(0.5).cos())
    }

    #[test]
    fn fd_examples() {
        let s = FdScheme::default();
        let f = x1_sq();
        let pt = PhasePoint::new(0.7, -0.2, 1.1, 0.4);
        assert!((fd_partial(&f, pt, Partial::Second(Coord::X1), s) - 2.0).abs() < TAU_FD);
        let g = FnField::new(|p: PhasePoint| p.x1 * p.p1);
        assert!((fd_partial(&g, pt, Partial::Mixed(Coord::X1, Coord::P1), s) - 1.0).abs() < TAU_FD);
    }

    #[test]
    fn apply_f_examples() {
        let pt = PhasePoint::new(0.3, 0.5, -0.4, 0.9);
        let f = x1_sq();
        assert_eq!(apply_f(&f, pt, DerivMode::Analytic).unwrap(), -7.0);
        let g = FnField::with_jet(
            |p: PhasePoint| p.p1 * p.p1,
            |p| {
                let x = Jet::coordinate(p, Coord::P1);
                x.mul(&x)
            },
        );
        assert_eq!(apply_f(&g, pt, DerivMode::Analytic).unwrap(), 3.0);
        let h = FnField::with_jet(
            |p: PhasePoint| p.x1 * p.p2 + 5.0,
            |p| Jet::coordinate(p, Coord::X1).mul(&Jet::coordinate(p, Coord::P2)).add(&Jet::constant(5.0)),
        );
        assert_eq!(apply_f(&h, pt, DerivMode::Analytic).unwrap(), 0.0);
        let bare = FnField::new(|p: PhasePoint| p.x1);
        assert_eq!(apply_f(&bare, pt, DerivMode::Analytic), Err(Error::MissingAnalyticPartials));
        let fd = apply_f(&bare, pt, DerivMode::Fd(FdScheme::default())).unwrap();
        assert!(fd.abs() < TAU_FD);
    }

    #[test]
    fn cr_examples() {
        let pt = PhasePoint::new(0.2, -0.6, 0.1, 0.5);
        let fd = DerivMode::Fd(FdScheme::default());
        let c = FnField::new(|_| 3.0);
        let r = check_cr_quadruple([&c, &c, &c, &c], pt, fd).unwrap();
        assert_eq!(max_abs(&r), 0.0);

        let x1 = FnField::new(|p: PhasePoint| p.x1);
        let r = check_cr_quadruple([&x1, &Zero, &Zero, &Zero], pt, fd).unwrap();
        assert!(max_abs(&r) > 0.5);

        // ψ = x²; components from the bicomplex square of the coordinate.
        let comp = |k: usize| FnField::new(move |p: PhasePoint| (p.coordinate() * p.coordinate()).to_array()[k]);
        let (a, b, cc, d) = (comp(0), comp(1), comp(2), comp(3));
        let r = check_cr_quadruple([&a, &b, &cc, &d], pt, fd).unwrap();
        assert!(max_abs(&r) < 1e-8, "{r:?}");
    }

    #[test]
    fn projections() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(projected_coordinates(PhasePoint::new(1.0, 0.0, 0.0, 0.0)), (c(1.0, 0.0), c(1.0, 0.0)));
        assert_eq!(projected_coordinates(PhasePoint::new(0.0, 1.0, 1.0, 0.0)), (c(0.0, 0.0), c(0.0, 2.0)));
        assert_eq!(projected_coordinates(PhasePoint::new(1.0, 2.0, 3.0, 4.0)), (c(5.0, -1.0), c(-3.0, 5.0)));
    }

    #[test]
    fn default_grid() {
        let g = Grid::default();
        assert_eq!(g.total(), 2401);
        assert_eq!(g.points().unwrap().len(), 2401);
        let g = g.with_exclusion(Some(0.5));
        let f = g.admissible_fraction();
        assert!((0.9..1.0).contains(&f), "{f}");
        assert!(Grid::symmetric(1.0, 2).validate().is_err());
        let tight = Grid::symmetric(0.1, 3).with_exclusion(Some(5.0));
        assert_eq!(tight.points(), Err(Error::EmptyGrid));
    }

    fn pt() -> impl Strategy<Value = PhasePoint> {
        (-1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5)
            .prop_map(|(a, b, c, d)| PhasePoint::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn fd_matches_jets(p in pt()) {
            let f = FnField::with_jet(|q: PhasePoint| smooth(q).value, smooth);
            let j = smooth(p);
            let s = FdScheme::default();
            for a in Coord::ALL {
                let d = fd_partial(&f, p, Partial::First(a), s);
                prop_assert!((d - j.partial(Partial::First(a))).abs() <= TAU_FD * j.grad[a.index()].abs().max(1.0));
                for b in Coord::ALL {
                    let exact = j.partial(Partial::Mixed(a, b));
                    let d = fd_partial(&f, p, Partial::Mixed(a, b), s);
                    prop_assert!((d - exact).abs() <= TAU_FD * exact.abs().max(1.0), "{a:?}{b:?} {d} {exact}");
                }
            }
        }

        #[test]
        fn apply_f_is_linear(p in pt(), al in -2.0f64..2.0, be in -2.0f64..2.0) {
            let f = FnField::with_jet(|q: PhasePoint| smooth(q).value, smooth);
            let g = FnField::with_jet(|q: PhasePoint| q.x1 * q.x1 * q.p2, |q| {
                let x = Jet::coordinate(q, Coord::X1);
                x.mul(&x).mul(&Jet::coordinate(q, Coord::P2))
            });
            let comb = FnField::with_jet(
                move |q: PhasePoint| al * smooth(q).value + be * q.x1 * q.x1 * q.p2,
                move |q| {
                    let x = Jet::coordinate(q, Coord::X1);
                    smooth(q).scale(al).add(&x.mul(&x).mul(&Jet::coordinate(q, Coord::P2)).scale(be))
                },
            );
            let m = DerivMode::Analytic;
            let lhs = apply_f(&comb, p, m).unwrap();
            let rhs = al * apply_f(&f, p, m).unwrap() + be * apply_f(&g, p, m).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
