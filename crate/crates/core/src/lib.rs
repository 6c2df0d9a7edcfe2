//! A numerical laboratory for flows all of whose orbits are closed.
//!
//! The crate provides, over explicit coordinate charts:
//!
//! * chart-level exterior calculus (forms, fields, wedge, `d`, interior
//!   products, pullbacks, Lie derivatives) in [`exterior`];
//! * the Sullivan–Thurston flow on the Heisenberg nilmanifold quotient
//!   `H/Λ × S¹ × S¹`, with its lattice action, frame metric and descent
//!   verifiers, in [`thurston`];
//! * ODE integration with closed-orbit detection, period and frame-metric
//!   arc-length measurement, in [`flow`];
//! * numerical 1-currents and tangent 2-chains: leaf integrals, moving-leaf
//!   cylinders, flux integrals and Stokes residuals, in [`chains`];
//! * the metric-averaging pipeline over a circle action (invariant metric,
//!   Killing check, conformal normalization, Beltrami-type Euler metric and
//!   curl), with the Hopf field on the three-sphere as the worked example,
//!   in [`wadsley`];
//! * seeded, portable sampling of points, forms and fields in [`sampling`],
//!   and the aggregated verification suites in [`verify`].
//!
//! All evaluators are pure and immutable after construction; they can be
//! shared freely across threads.

pub mod chains;
pub mod error;
pub mod exterior;
pub mod flow;
pub mod multi_index;
pub mod point;
pub mod rng;
pub mod sampling;
pub mod thurston;
pub mod verify;
pub mod wadsley;

pub use error::{Error, Result};
pub use point::ChartPoint;
pub use rng::SplitMix64;
