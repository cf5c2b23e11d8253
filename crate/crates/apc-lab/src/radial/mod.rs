//! Grid, potential well, switching profile and spinors.

mod grid;
mod potential;
mod profile;
mod spinor;

pub use grid::{make_grid, Channel, RadialGrid};
pub use potential::{eval_potential, PotentialSpec, Shape};
pub use profile::{eval_switching, SwitchingProfile};
pub use spinor::Spinor;
