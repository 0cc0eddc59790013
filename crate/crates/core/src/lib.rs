//! Heterogeneous multiscale method (HMM) for Landau-Lifschitz spin dynamics
//! driven by rapidly oscillating external fields.
//!
//! The crate provides
//!
//! * averaging kernels with vanishing moments ([`kernel`]),
//! * two-scale external fields and their period means ([`field`]),
//! * an implicit midpoint integrator that conserves the spin length
//!   ([`integrator`]),
//! * the single-spin HMM ([`hmm`]) and its spatio-temporal extension to
//!   periodic spin chains ([`chain`]),
//! * reference solvers: direct simulation, the averaged equation and the
//!   asymptotic expansion of micro solutions ([`reference`]),
//! * convergence experiments producing error tables ([`experiments`]).

pub mod chain;
pub mod error;
pub mod experiments;
pub mod field;
pub mod hmm;
pub mod integrator;
pub mod kernel;
pub mod output;
pub mod quadrature;
pub mod reference;
pub mod vec3;

pub use chain::{ChainConfig, ChainInitial, ChainTrajectory, MacroChainState};
pub use error::{Error, Result};
pub use field::{CustomField, FieldSpec, NamedField};
pub use hmm::{HmmConfig, MacroTrajectory};
pub use integrator::{MidpointConfig, Trajectory};
pub use kernel::{KernelSpec, ScaledKernel};
pub use vec3::{cross, ll_rhs, precession_rhs, Spin, Vec3};
