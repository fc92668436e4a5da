//! Perturbed Hammerstein equations
//!
//! `u(t) = γ(t)α[u] + δ(t)β[u] + ∫₀¹ k(t,s) g(s) f(s,u(s)) ds`
//!
//! with `k` the Green's function of the shifted Neumann problem
//! `εu'' + ω²u = h`, `u'(0) = u'(1) = 0`, and `α`, `β` Stieltjes functionals.
//!
//! The crate provides the kernel and its cone constants ([`greens`]), the
//! boundary functionals and the folded kernel `k_S` ([`measures`],
//! [`kernel_s`]), principal characteristic values of the associated linear
//! operators ([`spectral`]), sufficient conditions for existence,
//! multiplicity and nonexistence of solutions in the cone ([`criteria`]) and
//! a Nyström fixed-point solver ([`solver`]).
//!
//! Numerical code is generic over [`scalar::Real`] (`f32`, `f64`); reports are in `f64`.

pub mod criteria;
pub mod error;
pub mod greens;
pub mod interp;
pub mod kernel;
pub mod kernel_s;
pub mod measures;
pub mod nystrom;
pub mod problem;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod scenarios;
pub mod search;
pub mod solver;
pub mod spectral;

pub use criteria::{Asymptotics, Mode, Nonlinearity, SCase};
pub use error::{Condition, Error, Result};
pub use greens::{ShiftSign, ShiftedKernel, SignClass};
pub use kernel::{Kernel, Weight};
pub use kernel_s::AssembledKernel;
pub use measures::{BoundaryData, BoundaryFn, Density, StieltjesMeasure};
pub use problem::{Analysis, ConstantsBundle, ProblemSpec, Settings};
pub use report::{Certificate, CriterionReport, Relation, Verdict};
pub use scalar::Real;
pub use solver::{DiscreteSolution, Discretization, Status, Target};
pub use spectral::{OperatorKind, SpectralEstimate};

pub type Problem = ProblemSpec<f64>;
pub type Problem32 = ProblemSpec<f32>;
pub type Analysis64 = Analysis<f64>;
pub type Analysis32 = Analysis<f32>;
pub type Kernel64 = ShiftedKernel<f64>;
pub type Kernel32 = ShiftedKernel<f32>;
