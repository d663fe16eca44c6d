//! Singular-integral engines: one-dimensional rules, closed-form radial
//! principal values, half-plane and spherical assemblies, mesh surface
//! quadrature and Monte-Carlo double integrals.

pub mod rules;
pub mod halfplane;
pub mod meshsurf;
pub mod montecarlo;
pub mod radial;
pub mod spec;
pub mod volume;

pub use spec::{Diagnostics, PvMode, QuadratureSpec, TailHandling};
