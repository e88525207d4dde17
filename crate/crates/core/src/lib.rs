//! Discontinuous Galerkin solver laboratory for comparing element shapes.

pub mod geometry;
pub mod mesh;
pub mod basis;
pub mod linalg;
pub mod discretization;
pub mod timestepping;
pub mod vonneumann;
pub mod experiments;
