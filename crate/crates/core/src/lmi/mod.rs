//! Integrator chains, symmetric eigenvalues and LMI gain certificates.

pub mod eigen;
pub mod fixtures;
pub mod io;
pub mod plant;
pub mod synth;
pub mod verify;

pub use eigen::{sym_eigen, sym_eigs, SymEigen};
pub use plant::{build_chain, PlantConfig};
pub use synth::{synthesize_gains, SynthesisOptions, SynthesisOutcome};
pub use verify::{
    max_a_search, max_gamma_search, verify_finite_time_lmi, verify_hyper_lmi, GainCertificate,
    LmiKind, LmiReport, WitnessSearch,
};
