//! Numerical laboratory for conductive wave problems at corners.
//!
//! The crate bundles the pieces needed to study, at desk scale, how fields
//! governed by the Helmholtz equation with a conductive transmission
//! condition behave near corners of the domain:
//!
//! * [`cgo`] - a planar complex-geometrical-optics solution, its exact
//!   sector/boundary integrals and decay-rate diagnostics;
//! * [`herglotz`] - Herglotz wave fields, Bessel utilities and regularized
//!   kernel fitting;
//! * [`geometry`] - sectors, polygons, triangular meshing and shrinking-ball
//!   averages;
//! * [`teig`] - the coupled transmission eigenproblem (FEM + disk oracle)
//!   and corner-vanishing experiments;
//! * [`scatter`] - forward conductive scattering with a truncated
//!   Dirichlet-to-Neumann ring and a disk series oracle;
//! * [`inverse`] - single far-field distinguishability and surface-parameter
//!   recovery demos;
//! * [`dimred`] - the 3D-to-2D dimension reduction operator and its
//!   verification identities.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! the crate root re-exports `f64` aliases for everyday use.

pub mod bessel;
pub mod cgo;
pub mod dimred;
pub mod fem;
pub mod fft;
pub mod geometry;
pub mod herglotz;
pub mod inverse;
pub mod linalg;
pub mod quad;
pub mod scalar;
pub mod scatter;
pub mod teig;

pub use scalar::{rf, Real};

use num_complex::Complex;

/// Default real scalar.
pub type R64 = f64;
/// Default complex scalar.
pub type C64 = Complex<f64>;
/// Single-precision complex scalar (exercised by smoke tests only).
pub type C32 = Complex<f32>;

/// Concrete aliases for the main domain types.
pub type Sector64 = geometry::Sector<f64>;
pub type Polygon64 = geometry::Polygon<f64>;
pub type TriMesh64 = geometry::TriMesh<f64>;
pub type CornerProbe64 = geometry::CornerProbe<f64>;
pub type FourierKernel64 = herglotz::FourierKernel<f64>;
pub type ConductiveMedium64 = teig::ConductiveMedium<f64>;
pub type EigenPair64 = teig::EigenPair<f64>;
pub type FarField64 = scatter::FarField<f64>;
pub type IncidentWave64 = scatter::IncidentWave<f64>;
pub type BumpFunction64 = dimred::BumpFunction<f64>;
