#![allow(clippy::needless_range_loop)]

pub mod augment;
pub mod dataio;
pub mod error;
pub mod evalkit;
pub mod linalg;
pub mod luchipman;
pub mod par;
pub mod polcore;
pub mod realizability;
pub mod synth;
