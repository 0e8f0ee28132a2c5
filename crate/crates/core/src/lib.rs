//! Finite-depth laboratory for groups acting on locally finite trees.

pub mod boolalg;
pub mod boundary;
pub mod certificate;
pub mod check;
pub mod dynamics;
pub mod error;
pub mod localstruct;
pub mod lp;
pub mod par;
pub mod permgrp;
pub mod presets;
pub mod specfile;
pub mod tree;

pub use error::{LabError, Result};
