//! Koopman eigenfunctions of low-dimensional flows by the method of characteristics.
//!
//! An eigenfunction on a nonrecurrent domain is fixed by an eigenvalue and an
//! arbitrary data function on a manifold transverse to the flow: the value at
//! `x` is the data read where the orbit of `x` left the manifold, scaled by
//! `exp(lambda * time of flight)`. On top of that construction the crate builds
//! dictionaries of eigenfunctions whose data functions are least-squares
//! optimal for a target observable (oKEEDMD).
//!
//! * [`dynamics`]: vector fields, adaptive flow, event location, benchmark systems
//! * [`manifold`]: data manifolds, data functions, transversality checks
//! * [`keig`]: pullback evaluation, the eigen-relation certificate, algebra of eigenfunctions
//! * [`okeedmd`]: characteristic grids, per-eigenvalue fits, greedy decomposition
//! * [`spectrum`]: approximate eigenfunctions of the action-angle flow
//! * [`cli`]: configuration-driven runs that write CSV/JSON artifacts

pub mod cli;
pub mod dynamics;
pub mod keig;
pub mod manifold;
pub mod okeedmd;
pub mod spectrum;

pub use num_complex::Complex64;
