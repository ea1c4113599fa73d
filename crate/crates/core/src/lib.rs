#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub use nalgebra;

pub mod annotation;
pub mod cli;
pub mod config;
pub mod error;
pub mod convert;
pub mod geom;
pub mod pose;
pub mod sampling;
pub mod selfcheck;
pub mod training;
