//! The verification suites behind the CLI.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::bicomplex::{Bicomplex, CRMatrix, ConjKind, IdempotentPair};
use crate::config::{RunConfig, SuiteKind};
use crate::energy::{
    ase_residual, energy_from_g, energy_from_psi, physical_energy, spectral_character, EnergyQuad,
    SpectralCharacter,
};
use crate::error::{Error, Result};
use crate::field::{check_cr_quadruple, max_abs, DerivMode, PhasePoint};
use crate::models::{build_state, Family, ModelSpec, SolutionType};
use crate::report::{CheckRecord, Outcome, Report};
use crate::symmetry::{check_potential_invariance, classify, unbroken_energy_constraint, SymmetryKind, Verdict};

/// Result of one check before it is labelled.
#[derive(Debug)]
struct Outcomes {
    max_residual: f64,
    tolerance: f64,
    evaluated: usize,
    skipped: usize,
    detail: Map<String, Value>,
    /// Overrides `max_residual <= tolerance`.
    passed: Option<bool>,
}

impl Outcomes {
    fn new(max_residual: f64, tolerance: f64, evaluated: usize) -> Self {
        Outcomes {
            max_residual,
            tolerance,
            evaluated,
            skipped: 0,
            detail: Map::new(),
            passed: None,
        }
    }

    fn with(mut self, key: &str, v: Value) -> Self {
        self.detail.insert(key.into(), v);
        self
    }

    fn ok(&self) -> bool {
        self.passed.unwrap_or(self.max_residual <= self.tolerance)
    }
}

/// Running maximum that keeps NaN sticky.
fn worst(acc: f64, v: f64) -> f64 {
    if acc.is_nan() || v.is_nan() {
        f64::NAN
    } else {
        acc.max(v)
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn rng_for(cfg: &RunConfig, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ fnv1a(key))
}

fn random_bicomplex<R: Rng>(rng: &mut R) -> Bicomplex {
    Bicomplex::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    )
}

fn random_integer_bicomplex<R: Rng>(rng: &mut R) -> Bicomplex {
    let mut c = || rng.random_range(-100i32..=100) as f64;
    Bicomplex::new(c(), c(), c(), c())
}

fn rel(diff: Bicomplex, scale: f64) -> f64 {
    diff.euclid_norm() / scale.max(f64::MIN_POSITIVE)
}

#[derive(Clone, Copy, Debug)]
enum AlgebraCheck {
    RingAxioms,
    RingAxiomsInteger,
    Conjugation,
    Moduli,
    Inverse,
    Idempotent,
    Elementary,
    MatrixHomomorphism,
    MatrixUnits,
}

impl AlgebraCheck {
    const ALGEBRA: [AlgebraCheck; 7] = [
        AlgebraCheck::RingAxioms,
        AlgebraCheck::RingAxiomsInteger,
        AlgebraCheck::Conjugation,
        AlgebraCheck::Moduli,
        AlgebraCheck::Inverse,
        AlgebraCheck::Idempotent,
        AlgebraCheck::Elementary,
    ];
    const MATRIX: [AlgebraCheck; 2] = [AlgebraCheck::MatrixHomomorphism, AlgebraCheck::MatrixUnits];

    fn name(self) -> &'static str {
        match self {
            AlgebraCheck::RingAxioms => "algebra/ring-axioms",
            AlgebraCheck::RingAxiomsInteger => "algebra/ring-axioms-integer",
            AlgebraCheck::Conjugation => "algebra/conjugation-laws",
            AlgebraCheck::Moduli => "algebra/moduli",
            AlgebraCheck::Inverse => "algebra/inverse",
            AlgebraCheck::Idempotent => "algebra/idempotent-split",
            AlgebraCheck::Elementary => "algebra/elementary-functions",
            AlgebraCheck::MatrixHomomorphism => "matrix/homomorphism",
            AlgebraCheck::MatrixUnits => "matrix/idempotent-units",
        }
    }
}

fn run_algebra(cfg: &RunConfig, check: AlgebraCheck) -> Outcomes {
    let tol = cfg.tolerances;
    let mut rng = rng_for(cfg, check.name());
    let n = cfg.samples;
    let mut m = 0.0;
    match check {
        AlgebraCheck::RingAxioms => {
            for _ in 0..n {
                let (a, b, c) = (random_bicomplex(&mut rng), random_bicomplex(&mut rng), random_bicomplex(&mut rng));
                let (na, nb, nc) = (a.euclid_norm(), b.euclid_norm(), c.euclid_norm());
                m = worst(m, rel(a * b - b * a, na * nb));
                m = worst(m, rel((a * b) * c - a * (b * c), na * nb * nc));
                m = worst(m, rel(a * (b + c) - (a * b + a * c), na * (nb + nc)));
                m = worst(m, rel((a + b) - (b + a), na + nb));
            }
            Outcomes::new(m, tol.tau_alg, n).with("samples", json!(n))
        }
        AlgebraCheck::RingAxiomsInteger => {
            let mut mismatches = 0usize;
            for _ in 0..n {
                let a = random_integer_bicomplex(&mut rng);
                let b = random_integer_bicomplex(&mut rng);
                let c = random_integer_bicomplex(&mut rng);
                let ok = a * b == b * a && (a * b) * c == a * (b * c) && a * (b + c) == a * b + a * c;
                if !ok {
                    mismatches += 1;
                }
            }
            let mut o = Outcomes::new(mismatches as f64, 0.0, n).with("exact", json!(true));
            o.passed = Some(mismatches == 0);
            o
        }
        AlgebraCheck::Conjugation => {
            for _ in 0..n {
                let (a, b) = (random_bicomplex(&mut rng), random_bicomplex(&mut rng));
                let (na, nb) = (a.euclid_norm(), b.euclid_norm());
                for k in ConjKind::ALL {
                    m = worst(m, rel((a + b).conj(k) - (a.conj(k) + b.conj(k)), na + nb));
                    m = worst(m, rel(a.conj(k).conj(k) - a, na));
                    m = worst(m, rel((a * b).conj(k) - a.conj(k) * b.conj(k), na * nb));
                }
                m = worst(m, rel(a.conj(ConjKind::Conj1).conj(ConjKind::Conj2) - a.conj(ConjKind::Conj3), na));
            }
            Outcomes::new(m, tol.tau_alg, n)
        }
        AlgebraCheck::Moduli => {
            for _ in 0..n {
                let a = random_bicomplex(&mut rng);
                let s = a.euclid_norm().powi(2);
                for k in ConjKind::ALL {
                    m = worst(m, rel(a.modulus_sq(k) - a.modulus_sq_closed_form(k), s));
                }
            }
            Outcomes::new(m, tol.tau_alg, n)
        }
        AlgebraCheck::Inverse => {
            let mut skipped = 0;
            for _ in 0..n {
                let a = random_bicomplex(&mut rng);
                let (z1, z2) = a.pair();
                if (z1 * z1 + z2 * z2).norm() <= tol.sigma * a.euclid_norm().powi(2).max(1.0) {
                    skipped += 1;
                    continue;
                }
                let Ok(inv) = a.inverse() else {
                    skipped += 1;
                    continue;
                };
                let ni = inv.euclid_norm();
                m = worst(m, rel(a * inv - Bicomplex::ONE, a.euclid_norm() * ni));
                let comp = a.split().map(|w| w.inv()).join();
                m = worst(m, rel(inv - comp, ni));
            }
            let mut o = Outcomes::new(m, tol.tau_alg, n - skipped);
            o.skipped = skipped;
            o
        }
        AlgebraCheck::Idempotent => {
            for _ in 0..n {
                let (a, b) = (random_bicomplex(&mut rng), random_bicomplex(&mut rng));
                let (na, nb) = (a.euclid_norm(), b.euclid_norm());
                m = worst(m, rel(a.split().join() - a, na));
                let (pa, pb) = (a.split(), b.split());
                let prod = IdempotentPair::new(pa.w1 * pb.w1, pa.w2 * pb.w2).join();
                let sum = IdempotentPair::new(pa.w1 + pb.w1, pa.w2 + pb.w2).join();
                m = worst(m, rel(a * b - prod, na * nb));
                m = worst(m, rel(a + b - sum, na + nb));
            }
            let units = Bicomplex::E1.split() == IdempotentPair::new(1.0.into(), 0.0.into())
                && Bicomplex::E2.split() == IdempotentPair::new(0.0.into(), 1.0.into());
            let mut o = Outcomes::new(m, tol.tau_alg, n).with("units-exact", json!(units));
            o.passed = Some(units && m <= tol.tau_alg);
            o
        }
        AlgebraCheck::Elementary => {
            let mut m_exp: f64 = 0.0;
            for _ in 0..n {
                let (a, b) = (random_bicomplex(&mut rng).scale(0.5), random_bicomplex(&mut rng).scale(0.5));
                let (s, c) = (a.sin(), a.cos());
                m = worst(m, rel(s * s + c * c - Bicomplex::ONE, (s * s).euclid_norm() + (c * c).euclid_norm()));
                m = worst(m, rel(a.powi(3) - a * a * a, a.euclid_norm().powi(3)));
                let e = (a + b).exp();
                m_exp = worst(m_exp, rel(e - a.exp() * b.exp(), e.euclid_norm()));
            }
            let mut o = Outcomes::new(m, tol.tau_alg, n).with("exp-additivity", json!(m_exp));
            o.detail.insert("exp-tolerance".into(), json!(tol.tau_exp));
            o.passed = Some(m <= tol.tau_alg && m_exp <= tol.tau_exp);
            o
        }
        AlgebraCheck::MatrixHomomorphism => {
            let n = cfg.matrix_samples;
            let mut exact = true;
            for _ in 0..n {
                let (a, b) = (random_bicomplex(&mut rng), random_bicomplex(&mut rng));
                let (na, nb) = (a.euclid_norm(), b.euclid_norm());
                let (ma, mb) = (a.to_matrix(), b.to_matrix());
                m = worst(m, (a * b).to_matrix().max_abs_diff(&(ma * mb)) / (na * nb).max(f64::MIN_POSITIVE));
                m = worst(m, (ma.frobenius_norm() - 2.0 * na).abs() / na.max(f64::MIN_POSITIVE));
                let (m1, m2) = CRMatrix::idempotent_decomposition(a);
                m = worst(m, (CRMatrix::EPS1 * m1 + CRMatrix::EPS2 * m2).max_abs_diff(&ma) / na.max(f64::MIN_POSITIVE));
                exact &= (a + b).to_matrix() == ma + mb && ma.first_column() == a && ma.is_cauchy_riemann();
            }
            let mut o = Outcomes::new(m, tol.tau_alg, n).with("linear-and-injective", json!(exact));
            o.passed = Some(exact && m <= tol.tau_alg);
            o
        }
        AlgebraCheck::MatrixUnits => {
            let ok = Bicomplex::E1.to_matrix() == CRMatrix::EPS1
                && Bicomplex::E2.to_matrix() == CRMatrix::EPS2
                && Bicomplex::ONE.to_matrix() == CRMatrix::IDENTITY;
            let d = Bicomplex::E1.to_matrix().max_abs_diff(&CRMatrix::EPS1)
                + Bicomplex::E2.to_matrix().max_abs_diff(&CRMatrix::EPS2);
            let mut o = Outcomes::new(d, 0.0, 3).with("exact", json!(ok));
            o.passed = Some(ok);
            o
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum ModelCheck {
    CrAnalytic,
    CrFd,
    Constraints,
    EnergyG,
    EnergyPsiAnalytic,
    EnergyPsiFd,
    Physical,
    Ase,
    Invariance(SymmetryKind),
    Classify(SymmetryKind),
}

impl ModelCheck {
    fn name(self, spec: &ModelSpec) -> String {
        let l = spec.label();
        match self {
            ModelCheck::CrAnalytic => format!("cr/{l}/analytic"),
            ModelCheck::CrFd => format!("cr/{l}/fd"),
            ModelCheck::Constraints => format!("constraints/{l}"),
            ModelCheck::EnergyG => format!("energy/{l}/g-form"),
            ModelCheck::EnergyPsiAnalytic => format!("energy/{l}/psi-form-analytic"),
            ModelCheck::EnergyPsiFd => format!("energy/{l}/psi-form-fd"),
            ModelCheck::Physical => format!("energy/{l}/physical"),
            ModelCheck::Ase => format!("ase/{l}"),
            ModelCheck::Invariance(op) => format!("invariance/{l}/{op}"),
            ModelCheck::Classify(op) => format!("classify/{l}/{op}"),
        }
    }
}

/// The spectral character each family and type is expected to show.
pub fn expected_character(spec: &ModelSpec) -> SpectralCharacter {
    match (spec.family, spec.solution_type) {
        (Family::Harmonic | Family::Isotonic, SolutionType::I) => SpectralCharacter::Real,
        (Family::Harmonic | Family::Isotonic, SolutionType::II) => SpectralCharacter::Hyperbolic,
        (Family::Inverted, SolutionType::I) => SpectralCharacter::ImaginaryIHat,
        (Family::Inverted, SolutionType::II) => SpectralCharacter::ImaginaryI,
    }
}

fn quad_json(e: EnergyQuad) -> Value {
    json!(e.to_array())
}

/// Per-component mean and spread of a set of quadruples.
fn stats(qs: &[EnergyQuad]) -> (EnergyQuad, f64) {
    let mut mean = [0.0; 4];
    let mut spread: f64 = 0.0;
    for (k, mk) in mean.iter_mut().enumerate() {
        let vals: Vec<f64> = qs.iter().map(|q| q.to_array()[k]).collect();
        *mk = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        spread = worst(spread, if vals.is_empty() { 0.0 } else { hi - lo });
    }
    (EnergyQuad::from_array(mean), spread)
}

fn run_model(cfg: &RunConfig, spec: &ModelSpec, check: ModelCheck) -> Result<Outcomes> {
    let tol = cfg.tolerances;
    let state = build_state(spec)?;
    let grid = cfg.grid_for(spec);
    let fd = DerivMode::Fd(cfg.scheme());
    let energy_points = || grid.sample(&mut rng_for(cfg, &format!("energy/{}", spec.label())), cfg.energy_points);
    Ok(match check {
        ModelCheck::CrAnalytic | ModelCheck::CrFd => {
            let (mode, t) = match check {
                ModelCheck::CrAnalytic => (DerivMode::Analytic, tol.tau_cr_analytic),
                _ => (fd, tol.tau_cr_fd),
            };
            let comps: Vec<_> = (0..4).map(|k| state.component(k)).collect();
            let mut m = 0.0;
            let pts = grid.points()?;
            let mut at = PhasePoint::ORIGIN;
            for pt in &pts {
                let r = max_abs(&check_cr_quadruple([&comps[0], &comps[1], &comps[2], &comps[3]], *pt, mode)?);
                if r.is_nan() || r > m {
                    at = *pt;
                }
                m = worst(m, r);
            }
            Outcomes::new(m, t, pts.len())
                .with("worst-point", json!(at.to_array()))
                .with("admissible-fraction", json!(grid.admissible_fraction()))
        }
        ModelCheck::Constraints => {
            let r = state.constraint_residuals();
            Outcomes::new(max_abs(&r), tol.tau_constraint, r.len()).with("residuals", json!(r))
        }
        ModelCheck::EnergyG => {
            let pts = energy_points();
            let qs = pts.iter().map(|p| energy_from_g(&state, *p)).collect::<Result<Vec<_>>>()?;
            let (mean, spread) = stats(&qs);
            let dev = qs.iter().fold(0.0, |m, q| worst(m, q.max_abs_diff(state.predicted)));
            Outcomes::new(worst(spread, dev), tol.tau_e, qs.len())
                .with("mean", quad_json(mean))
                .with("predicted", quad_json(state.predicted))
                .with("spread", json!(spread))
        }
        ModelCheck::EnergyPsiAnalytic | ModelCheck::EnergyPsiFd => {
            let (mode, t) = match check {
                ModelCheck::EnergyPsiAnalytic => (DerivMode::Analytic, tol.tau_e),
                _ => (fd, tol.tau_agree),
            };
            let mut qs = Vec::new();
            let mut skipped = 0;
            let mut m = 0.0;
            for p in energy_points() {
                match energy_from_psi(&state, p, mode, tol.eps_den) {
                    Ok(q) => {
                        let g = energy_from_g(&state, p)?;
                        m = worst(m, q.max_abs_diff(g));
                        m = worst(m, q.max_abs_diff(state.predicted));
                        qs.push(q);
                    }
                    Err(Error::DegenerateDenominator { .. }) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
            let (mean, spread) = stats(&qs);
            let mut o = Outcomes::new(m, t, qs.len())
                .with("mean", quad_json(mean))
                .with("predicted", quad_json(state.predicted))
                .with("spread", json!(spread));
            o.skipped = skipped;
            o
        }
        ModelCheck::Physical => {
            let pts = energy_points();
            let qs = pts.iter().map(|p| energy_from_g(&state, *p)).collect::<Result<Vec<_>>>()?;
            let (mean, _) = stats(&qs);
            let predicted = physical_energy(state.predicted, cfg.xi);
            let computed = physical_energy(mean, cfg.xi);
            let d = (computed - predicted).euclid_norm();
            let character = spectral_character(predicted, 1e-12 * predicted.euclid_norm().max(1.0));
            let expected = expected_character(spec);
            let mut o = Outcomes::new(d, tol.tau_e, qs.len())
                .with("physical-energy", json!(predicted.to_array()))
                .with("character", json!(character))
                .with("expected-character", json!(expected));
            o.passed = Some(d <= tol.tau_e && character == expected);
            o
        }
        ModelCheck::Ase => {
            let pts = grid.points()?;
            let mut m = 0.0;
            let mut skipped = 0;
            let mut at = PhasePoint::ORIGIN;
            for pt in &pts {
                match ase_residual(&state, state.predicted, cfg.xi, *pt, cfg.fd_step) {
                    Ok(r) => {
                        if r.is_nan() || r > m {
                            at = *pt;
                        }
                        m = worst(m, r);
                    }
                    Err(Error::DegenerateProjection(_)) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
            let mut o = Outcomes::new(m, tol.tau_ase, pts.len() - skipped).with("worst-point", json!(at.to_array()));
            o.skipped = skipped;
            o
        }
        ModelCheck::Invariance(op) => {
            let r = check_potential_invariance(op, spec, &grid)?;
            Outcomes::new(r, tol.tau_sym, grid.points()?.len())
        }
        ModelCheck::Classify(op) => {
            let rep = classify(op, &state, &grid, tol.tau_sym)?;
            let constraint = unbroken_energy_constraint(op, state.predicted)?;
            let (verdict, lambda) = match rep.verdict {
                Verdict::Unbroken(l) => ("unbroken", json!(l.to_array())),
                Verdict::Broken => ("broken", Value::Null),
            };
            let consistent = !rep.verdict.is_unbroken() || constraint <= tol.tau_sym;
            let mut o = Outcomes::new(rep.max_residual, tol.tau_sym, rep.evaluated)
                .with("verdict", json!(verdict))
                .with("lambda", lambda)
                .with("consistent-fraction", json!(rep.consistent_fraction))
                .with("energy-constraint", json!(constraint))
                .with("reliable", json!(rep.reliable))
                .with("grid", json!(rep.grid));
            o.skipped = rep.skipped;
            o.passed = Some(rep.reliable && consistent);
            o
        }
    })
}

enum Job {
    Algebra(AlgebraCheck),
    Model(ModelSpec, ModelCheck),
}

fn jobs(cfg: &RunConfig) -> Vec<Job> {
    let mut out = Vec::new();
    let has = |s: SuiteKind| cfg.suites.contains(&s);
    if has(SuiteKind::Algebra) {
        out.extend(AlgebraCheck::ALGEBRA.map(Job::Algebra));
    }
    if has(SuiteKind::Matrix) {
        out.extend(AlgebraCheck::MATRIX.map(Job::Algebra));
    }
    for spec in &cfg.models {
        let mut add = |c: ModelCheck| out.push(Job::Model(*spec, c));
        if has(SuiteKind::Cr) {
            add(ModelCheck::CrAnalytic);
            add(ModelCheck::CrFd);
        }
        if has(SuiteKind::Constraints) {
            add(ModelCheck::Constraints);
        }
        if has(SuiteKind::Energy) {
            add(ModelCheck::EnergyG);
            add(ModelCheck::EnergyPsiAnalytic);
            add(ModelCheck::EnergyPsiFd);
            add(ModelCheck::Physical);
        }
        if has(SuiteKind::Ase) {
            add(ModelCheck::Ase);
        }
        if has(SuiteKind::Invariance) {
            for op in [SymmetryKind::P, SymmetryKind::PTi, SymmetryKind::PTii] {
                add(ModelCheck::Invariance(op));
            }
        }
        if has(SuiteKind::Classify) {
            for op in &cfg.ops {
                add(ModelCheck::Classify(*op));
            }
        }
    }
    out
}

fn params_json(spec: &ModelSpec) -> Value {
    build_state(spec)
        .ok()
        .and_then(|s| serde_json::to_value(s.params).ok())
        .unwrap_or(Value::Null)
}

fn run_job(cfg: &RunConfig, job: &Job) -> CheckRecord {
    let start = Instant::now();
    let (name, model, params, res) = match job {
        Job::Algebra(c) => (c.name().to_string(), None, Value::Null, Ok(run_algebra(cfg, *c))),
        Job::Model(spec, c) => (
            c.name(spec),
            Some(spec.label()),
            params_json(spec),
            run_model(cfg, spec, *c),
        ),
    };
    let wall = cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    match res {
        Ok(o) => CheckRecord {
            name,
            model,
            params,
            verdict: Outcome::from_bool(o.ok()),
            max_residual: o.max_residual,
            tolerance: o.tolerance,
            evaluated: o.evaluated,
            skipped: o.skipped,
            detail: Value::Object(o.detail),
            wall_time_ms: wall,
        },
        Err(e) => CheckRecord {
            name,
            model,
            params,
            verdict: Outcome::Fail,
            max_residual: f64::NAN,
            tolerance: f64::NAN,
            evaluated: 0,
            skipped: 0,
            detail: json!({ "error": e.to_string() }),
            wall_time_ms: wall,
        },
    }
}

/// Runs every configured check (on `cfg.workers` threads) and assembles the report.
pub fn run_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let jobs = jobs(cfg);
    let records: Vec<CheckRecord> = if cfg.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?;
        pool.install(|| jobs.par_iter().map(|j| run_job(cfg, j)).collect())
    } else {
        jobs.iter().map(|j| run_job(cfg, j)).collect()
    };
    Ok(Report::new(cfg.echo(), records))
}
