//! Fractional differential operators on regular lattices.

pub mod checks;
pub mod fft;
pub mod field;
pub mod lattice;
pub mod ops;

pub use field::{gaussian_field, Decay, GridField};
pub use ops::{
    frac_div_grad, frac_divergence, frac_gradient, frac_hessian_direct, frac_hessian_nested, frac_laplacian,
    trace_field, FracKernelTensor,
};
