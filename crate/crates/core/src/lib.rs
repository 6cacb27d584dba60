//! fslab: a simulation-and-verification lab for ordered lattice walks under
//! generalized area tilts, their Ferrari-Spohn / Dyson scaling limits, and the
//! Wulff-shape variational problems that govern level-line macroscopics.
//!
//! The crate is organised around five subsystems:
//!
//! * [`walks`] — exact transfer computations and heat-bath Monte Carlo for
//!   single and ordered n-tuple random walks with area tilts.
//! * [`spectral`] — Sturm-Liouville spectra on the half-line, Ferrari-Spohn
//!   and Dyson drifts, SDE simulation and the spectral semigroup.
//! * [`wulff`] — Wulff shapes, plaquettes, the constrained variational
//!   problems (CVP/DCVP/MCVP), entropic stacks and closed-form constants.
//! * [`saw`] — exact enumeration of positive self-avoiding bridges under
//!   length and area tilts, with cone-point decomposition.
//! * [`harness`] — configuration, experiment orchestration and artifact
//!   serialization behind the `fslab` CLI.
//!
//! Supporting numerics live in [`numeric`], [`stats`] and [`airy`].

pub mod airy;
pub mod harness;
pub mod numeric;
pub mod saw;
pub mod spectral;
pub mod stats;
pub mod walks;
pub mod wulff;
