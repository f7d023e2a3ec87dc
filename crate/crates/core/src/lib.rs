//! Optimal phase-covariant cloning machines, found by symmetry-reduced
//! semidefinite programming and checked by sampling.
//!
//! Averaging a channel's Choi matrix over its symmetry group leaves the
//! fidelity unchanged, and the averaged matrix lives in a handful of
//! real dimensions ([`invariant_bases`]). The optimization then shrinks to
//! a small SDP ([`reduced_sdp`]) whose optimum is certified by an explicit
//! primal/dual pair. [`cloners`] turns certified points back into full
//! channels, [`composition`] wires channels together, and [`oracle_mc`]
//! re-derives every fidelity by brute-force sampling.
//!
//! ```
//! use qcm::cloners::{optimal_channel, process_fidelity_analytic, IdealMapKind};
//!
//! let kind = IdealMapKind::PhaseCloner;
//! let cloner = optimal_channel(kind, 3)?;
//! assert!(cloner.diagnostics()?.is_cptp());
//! assert!((process_fidelity_analytic(&cloner, kind)? - 5.0 / 9.0).abs() < 1e-12);
//! # Ok::<(), qcm::Error>(())
//! ```

pub mod cli;
pub mod cloners;
pub mod composition;
pub mod error;
pub mod invariant_bases;
pub mod oracle_mc;
pub mod qcore;
pub mod reduced_sdp;
pub mod symmetry;

pub use error::{Error, Result};
