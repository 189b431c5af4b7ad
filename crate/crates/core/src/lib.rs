//! Weak-solution machinery for two-dimensional Monge–Ampère equations with
//! polynomially growing right-hand sides, and the experiments built on it for
//! translating solitons of the α-Gauss curvature flow.
//!
//! The crate is organized bottom-up:
//!
//! * [`grid`]: planar domains, lattice-sampled functions, right-hand-side families, `.gfn` files.
//! * [`legendre`]: exact discrete Legendre–Fenchel conjugation and convex envelopes.
//! * [`measure`]: piecewise-linear convex functions, subgradient cells and Monge–Ampère masses.
//! * [`solver`]: the Dirichlet problem `det D²v = f` in the Alexandrov sense.
//! * [`oracle`]: closed-form radial translators, their duals and the separable degenerate solution.
//! * [`sections`]: sections, John ellipses, eccentricity, balance radii, doubling constants.
//! * [`analysis`]: growth exponents, eccentricity cascades and stability checks.

pub mod analysis;
pub mod exact;
pub mod geometry;
pub mod grid;
mod hull;
pub mod legendre;
pub mod measure;
pub mod oracle;
pub mod quadrature;
pub mod sections;
pub mod solver;

pub use geometry::Point2;

/// Checks that `alpha` lies in the open interval (0, 1/4).
pub(crate) fn alpha_in_range(alpha: f64) -> bool {
    alpha > 0.0 && alpha < 0.25
}
