//! Bicomplex numbers and numerical checks of closed-form ground states of the
//! bicomplex analogue of the Schrödinger equation on an extended phase space.

pub mod bicomplex;
pub mod config;
pub mod energy;
pub mod error;
pub mod field;
pub mod models;
pub mod report;
pub mod suite;
pub mod symmetry;

pub use bicomplex::{Bicomplex, CRMatrix, ConjKind, ElemFn, IdempotentPair};
pub use energy::{EnergyQuad, XiSpec};
pub use error::{Error, Result};
pub use field::{DerivMode, FdScheme, Grid, PhasePoint, ScalarField};
pub use models::{build_state, ClosedFormState, Family, ModelSpec, Sign, SolutionType};
pub use symmetry::{classify, SymmetryKind, Verdict};
pub use config::{RunConfig, SuiteKind};
pub use report::{CheckRecord, Outcome, Report};
pub use suite::run_suite;
