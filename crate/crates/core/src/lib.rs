// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binform;
pub mod error;
pub mod numlin;
pub mod plumb;
pub mod ivhs;
pub mod series;

pub use error::{Error, Result, Stage};
pub mod ramlocus;
pub mod surface;
pub mod torelli;
