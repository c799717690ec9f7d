#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod expr;
pub mod geom;
pub mod jet;
pub mod known;
pub mod pentad;
pub mod radon;
pub mod report;
pub mod so3;
pub mod suite;
