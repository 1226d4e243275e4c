//! Pointwise exterior algebra and intrinsic torsion classification for
//! special almost Hermitian structures on R^{2n} and almost hyperhermitian
//! structures on R^{4n}.
//!
//! Everything here is linear algebra at a single point: forms live in a
//! fixed orthonormal frame, first derivatives of the structure forms are
//! encoded as frame-indexed jets, and classification proceeds by projecting
//! those jets onto the irreducible torsion components.

// Parity checks are written `% 2 == 0` to mirror the (-1)^k sign conventions.
#![allow(clippy::manual_is_multiple_of)]

pub mod coform;
pub mod error;
pub mod form;
pub mod hermitian;
pub mod hyper;
pub mod jet_doc;
pub mod lowdim;
pub mod recover;
pub mod rng;
pub mod structure;
pub mod torsion;
pub mod verify;

pub use coform::CoForm;
pub use error::{Error, Result};
pub use form::{Form, Vector, MAX_DIM};
pub use hyper::{
    build_hyper, dpsi_from_domegas, hyper_recover, hyperkahler_kernel_check, lee_and_lck,
    HyperDerived, HyperRecovery, HyperStructure, HyperTorsionJet, KernelReport, LckReport,
};
pub use jet_doc::{
    document_from_differentials, document_from_hyper, document_from_su, load_document,
    load_from_str, load_jet, save_jet, to_json_string, FormDocument, JetDocument, LoadedJet,
    SCHEMA_VERSION,
};
pub use lowdim::LowDimReport;
pub use recover::{Magnitudes, TorsionClass, TorsionReport};
pub use rng::XorShift64Star;
pub use structure::{standard_structure, CheckResult, ConformalChange, SUStructure};
pub use torsion::{DerivedDerivatives, PsiRateInverse, SUTorsionJet};
pub use verify::{run_suite, run_suite_mode, CheckOutcome, RankReport};
