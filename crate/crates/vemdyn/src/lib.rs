//! First-order virtual elements on agglomerated polytopal meshes, with
//! explicit central-difference elastodynamics and critical time step
//! estimation.

pub mod agglomerate;
pub mod config;
pub mod dynamics;
pub mod eig;
pub mod error;
pub mod fem;
pub mod hni;
pub mod material;
pub mod mesh;
pub mod quality;
pub mod sparse;
pub mod tables;
pub mod vem;

pub use error::{Error, Result};
pub use material::MaterialParams;
