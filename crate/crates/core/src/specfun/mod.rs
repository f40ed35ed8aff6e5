//! Special functions used throughout the crate.

mod cg;
mod gamma;
mod hyper;
mod poly;

pub use cg::{cg_continued, cg_direct_form, CGArgs};
pub use gamma::{is_gamma_pole, ln_gamma, log_gamma_signed, rgamma, SignedLog, POLE_TOLERANCE};
pub use hyper::{
    hyp3f2_regularized_scaled, hyp3f2_terminating_regularized, non_positive_integer, Hyp3F2Spec,
    INTEGER_TOLERANCE, MAX_TERMS,
};
pub use poly::{gegenbauer_poly, jacobi_poly};
