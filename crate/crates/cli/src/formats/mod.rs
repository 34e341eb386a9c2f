//! On-disk formats.

pub mod grid;
pub mod image;
pub mod log;
pub mod records;
