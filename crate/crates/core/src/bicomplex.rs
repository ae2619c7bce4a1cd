//! Bicomplex numbers `x1 + i x2 + î x3 + iî x4` with `i² = î² = -1` and `(iî)² = +1`.
//!
//! The canonical storage is the four real coefficients. Two derived views are
//! exposed: the complex pair `(z1, z2)` with `ω = z1 + î z2`, and the idempotent
//! pair `(w1, w2)` with `ω = w1 e1 + w2 e2`, `e1 = (1 + iî)/2`, `e2 = (1 − iî)/2`.
//! In the idempotent view the ring splits into two copies of ℂ, which is how
//! the elementary functions and the inverse are evaluated.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bicomplex {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

/// Coefficients of `ω` in the idempotent basis: `ω = w1 e1 + w2 e2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdempotentPair {
    pub w1: Complex64,
    pub w2: Complex64,
}

/// The three conjugations. `Conj1` flips `i`, `Conj2` flips `î`, `Conj3` flips both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConjKind {
    Conj1,
    Conj2,
    Conj3,
}

impl ConjKind {
    pub const ALL: [ConjKind; 3] = [ConjKind::Conj1, ConjKind::Conj2, ConjKind::Conj3];
}

impl Bicomplex {
    pub const ZERO: Bicomplex = Bicomplex::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Bicomplex = Bicomplex::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Bicomplex = Bicomplex::new(0.0, 1.0, 0.0, 0.0);
    pub const I_HAT: Bicomplex = Bicomplex::new(0.0, 0.0, 1.0, 0.0);
    /// The hyperbolic unit `iî`.
    pub const J: Bicomplex = Bicomplex::new(0.0, 0.0, 0.0, 1.0);
    pub const E1: Bicomplex = Bicomplex::new(0.5, 0.0, 0.0, 0.5);
    pub const E2: Bicomplex = Bicomplex::new(0.5, 0.0, 0.0, -0.5);

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Bicomplex { x1, x2, x3, x4 }
    }

    pub const fn real(x: f64) -> Self {
        Bicomplex::new(x, 0.0, 0.0, 0.0)
    }

    /// Embeds a complex number `a + i b` (in the unit `i`).
    pub fn from_complex(c: Complex64) -> Self {
        Bicomplex::new(c.re, c.im, 0.0, 0.0)
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Bicomplex::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }

    /// `ω = z1 + î z2`.
    pub fn from_pair(z1: Complex64, z2: Complex64) -> Self {
        Bicomplex::new(z1.re, z1.im, z2.re, z2.im)
    }

    pub fn pair(self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.x1, self.x2),
            Complex64::new(self.x3, self.x4),
        )
    }

    pub fn scale(self, s: f64) -> Self {
        Bicomplex::new(self.x1 * s, self.x2 * s, self.x3 * s, self.x4 * s)
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn conj(self, kind: ConjKind) -> Self {
        let Bicomplex { x1, x2, x3, x4 } = self;
        match kind {
            ConjKind::Conj1 => Bicomplex::new(x1, -x2, x3, -x4),
            ConjKind::Conj2 => Bicomplex::new(x1, x2, -x3, -x4),
            ConjKind::Conj3 => Bicomplex::new(x1, -x2, -x3, x4),
        }
    }

    /// `|ω|₁² = ω ω^†², |ω|₂² = ω ω^†¹, |ω|₃² = ω ω^†³`, computed as ring products.
    pub fn modulus_sq(self, kind: ConjKind) -> Self {
        let partner = match kind {
            ConjKind::Conj1 => ConjKind::Conj2,
            ConjKind::Conj2 => ConjKind::Conj1,
            ConjKind::Conj3 => ConjKind::Conj3,
        };
        self * self.conj(partner)
    }

    /// Closed forms of the three moduli in terms of `(z1, z2)`.
    pub fn modulus_sq_closed_form(self, kind: ConjKind) -> Self {
        let (z1, z2) = self.pair();
        match kind {
            ConjKind::Conj1 => Bicomplex::from_complex(z1 * z1 + z2 * z2),
            ConjKind::Conj2 => Bicomplex::new(
                z1.norm_sqr() - z2.norm_sqr(),
                0.0,
                2.0 * (z1 * z2.conj()).re,
                0.0,
            ),
            ConjKind::Conj3 => Bicomplex::new(
                z1.norm_sqr() + z2.norm_sqr(),
                0.0,
                0.0,
                -2.0 * (z1 * z2.conj()).im,
            ),
        }
    }

    pub fn euclid_norm(self) -> f64 {
        let Bicomplex { x1, x2, x3, x4 } = self;
        (x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4).sqrt()
    }

    /// Relative threshold below which `|z1² + z2²|` counts as zero.
    pub fn singularity_tolerance(self) -> f64 {
        1e-12 * self.euclid_norm().powi(2).max(1.0)
    }

    pub fn is_singular(self) -> bool {
        let (z1, z2) = self.pair();
        (z1 * z1 + z2 * z2).norm() <= self.singularity_tolerance()
    }

    /// `ω⁻¹ = ω^†² / |ω|₁²`.
    pub fn inverse(self) -> Result<Self> {
        if self.is_singular() {
            return Err(Error::SingularOperand);
        }
        let (z1, z2) = self.pair();
        let r = (z1 * z1 + z2 * z2).inv();
        Ok(Bicomplex::from_pair(z1 * r, -z2 * r))
    }

    pub fn checked_div(self, rhs: Bicomplex) -> Result<Self> {
        Ok(self * rhs.inverse()?)
    }

    pub fn split(self) -> IdempotentPair {
        let Bicomplex { x1, x2, x3, x4 } = self;
        IdempotentPair {
            w1: Complex64::new(x1 + x4, x2 - x3),
            w2: Complex64::new(x1 - x4, x2 + x3),
        }
    }

    pub fn exp(self) -> Self {
        self.split().map(|w| w.exp()).join()
    }

    pub fn sin(self) -> Self {
        self.split().map(|w| w.sin()).join()
    }

    pub fn cos(self) -> Self {
        self.split().map(|w| w.cos()).join()
    }

    /// Non-negative integer powers, evaluated componentwise.
    pub fn powi(self, n: u32) -> Self {
        self.split().map(|w| w.powu(n)).join()
    }

    /// Principal logarithm per idempotent component; undefined on singular values.
    pub fn ln(self) -> Result<Self> {
        if self.is_singular() {
            return Err(Error::SingularOperand);
        }
        Ok(self.split().map(|w| w.ln()).join())
    }

    /// General power `self^p = exp(p ln self)`.
    pub fn pow(self, p: Bicomplex) -> Result<Self> {
        Ok((p * self.ln()?).exp())
    }

    pub fn apply(self, f: ElemFn) -> Self {
        match f {
            ElemFn::Exp => self.exp(),
            ElemFn::Sin => self.sin(),
            ElemFn::Cos => self.cos(),
            ElemFn::Pow(n) => self.powi(n),
        }
    }

    pub fn to_matrix(self) -> CRMatrix {
        CRMatrix::from(self)
    }
}

impl IdempotentPair {
    pub fn new(w1: Complex64, w2: Complex64) -> Self {
        IdempotentPair { w1, w2 }
    }

    /// Inverse of [`Bicomplex::split`]: `z1 = (w1 + w2)/2`, `z2 = i (w1 − w2)/2`.
    pub fn join(self) -> Bicomplex {
        let s = self.w1 + self.w2;
        let d = self.w1 - self.w2;
        Bicomplex::new(0.5 * s.re, 0.5 * s.im, -0.5 * d.im, 0.5 * d.re)
    }

    pub fn map(self, f: impl Fn(Complex64) -> Complex64) -> Self {
        IdempotentPair::new(f(self.w1), f(self.w2))
    }
}

/// Elementary holomorphic functions evaluated in the idempotent basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElemFn {
    Exp,
    Sin,
    Cos,
    Pow(u32),
}

pub fn elem_fn(a: Bicomplex, f: ElemFn) -> Bicomplex {
    a.apply(f)
}

impl Add for Bicomplex {
    type Output = Bicomplex;
    fn add(self, o: Bicomplex) -> Bicomplex {
        Bicomplex::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3, self.x4 + o.x4)
    }
}

impl AddAssign for Bicomplex {
    fn add_assign(&mut self, o: Bicomplex) {
        *self = *self + o;
    }
}

impl Sub for Bicomplex {
    type Output = Bicomplex;
    fn sub(self, o: Bicomplex) -> Bicomplex {
        Bicomplex::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3, self.x4 - o.x4)
    }
}

impl Neg for Bicomplex {
    type Output = Bicomplex;
    fn neg(self) -> Bicomplex {
        self.scale(-1.0)
    }
}

impl Mul for Bicomplex {
    type Output = Bicomplex;
    /// `(z1 z1' − z2 z2') + î (z2 z1' + z1 z2')`.
    fn mul(self, o: Bicomplex) -> Bicomplex {
        let (z1, z2) = self.pair();
        let (w1, w2) = o.pair();
        Bicomplex::from_pair(z1 * w1 - z2 * w2, z2 * w1 + z1 * w2)
    }
}

impl Mul<f64> for Bicomplex {
    type Output = Bicomplex;
    fn mul(self, s: f64) -> Bicomplex {
        self.scale(s)
    }
}

impl fmt::Display for Bicomplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:+}i {:+}î {:+}iî",
            self.x1, self.x2, self.x3, self.x4
        )
    }
}

/// Real 4×4 Cauchy–Riemann matrix of a bicomplex number; column `k` is `ω` times the `k`-th unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CRMatrix(pub [[f64; 4]; 4]);

impl CRMatrix {
    pub const IDENTITY: CRMatrix = CRMatrix([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    /// Matrix of `e1`.
    pub const EPS1: CRMatrix = CRMatrix([
        [0.5, 0.0, 0.0, 0.5],
        [0.0, 0.5, -0.5, 0.0],
        [0.0, -0.5, 0.5, 0.0],
        [0.5, 0.0, 0.0, 0.5],
    ]);

    /// Matrix of `e2`.
    pub const EPS2: CRMatrix = CRMatrix([
        [0.5, 0.0, 0.0, -0.5],
        [0.0, 0.5, 0.5, 0.0],
        [0.0, 0.5, 0.5, 0.0],
        [-0.5, 0.0, 0.0, 0.5],
    ]);

    /// Reads back the bicomplex number from the first column.
    pub fn first_column(&self) -> Bicomplex {
        let m = &self.0;
        Bicomplex::new(m[0][0], m[1][0], m[2][0], m[3][0])
    }

    /// True when the matrix is exactly the image of its first column.
    pub fn is_cauchy_riemann(&self) -> bool {
        CRMatrix::from(self.first_column()) == *self
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CRMatrix) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `N(ω) = ε₁ N(w1) + ε₂ N(w2)` with the complex components embedded in the `i` unit.
    pub fn idempotent_decomposition(a: Bicomplex) -> (CRMatrix, CRMatrix) {
        let p = a.split();
        (
            CRMatrix::from(Bicomplex::from_complex(p.w1)),
            CRMatrix::from(Bicomplex::from_complex(p.w2)),
        )
    }
}

impl From<Bicomplex> for CRMatrix {
    fn from(a: Bicomplex) -> Self {
        let Bicomplex { x1, x2, x3, x4 } = a;
        CRMatrix([
            [x1, -x2, -x3, x4],
            [x2, x1, -x4, -x3],
            [x3, -x4, x1, -x2],
            [x4, x3, x2, x1],
        ])
    }
}

impl Mul for CRMatrix {
    type Output = CRMatrix;
    fn mul(self, o: CRMatrix) -> CRMatrix {
        let mut out = [[0.0; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).map(|k| self.0[r][k] * o.0[k][c]).sum();
            }
        }
        CRMatrix(out)
    }
}

impl Add for CRMatrix {
    type Output = CRMatrix;
    fn add(self, o: CRMatrix) -> CRMatrix {
        let mut out = self.0;
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell += o.0[r][c];
            }
        }
        CRMatrix(out)
    }
}
