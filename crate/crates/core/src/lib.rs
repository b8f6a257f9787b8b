#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evaluation;
pub mod features;
pub mod feedback;
pub mod ingest;
pub mod model;
pub mod patterns;
pub mod synthetic;
