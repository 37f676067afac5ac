//! Continuous interior penalty (CIP) stabilized virtual element method for
//! steady advection-diffusion-reaction problems on polygonal meshes.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] builds and validates polygonal meshes (centroidal Voronoi and
//!   distorted quadrilaterals) and answers adjacency queries.
//! * [`quadrature`] provides the scaled monomial basis and exact integration
//!   on polygons and edges.
//! * [`vemspace`] numbers the degrees of freedom of the enhanced virtual
//!   element space and builds the per-element polynomial projectors.
//! * [`forms`] computes every local bilinear and linear form, the Oswald
//!   quasi-interpolant and the computable CIP norm.
//! * [`system`] assembles and solves the global sparse system.
//! * [`experiments`] holds manufactured problems, error norms and
//!   convergence studies.

pub mod error;
pub mod experiments;
pub mod export;
pub mod forms;
pub mod mesh;
pub mod quadrature;
pub mod system;
pub mod vemspace;

pub use error::{Result, VemError};

pub type Point = nalgebra::Point2<f64>;
pub type Vector = nalgebra::Vector2<f64>;
