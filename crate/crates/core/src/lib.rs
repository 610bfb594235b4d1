//! Spatial planning of Wolbachia mosquito releases.
//!
//! The infection frequency p(t, x) follows the scalar bistable
//! reaction-diffusion equation dp/dt - sigma lap p = f(p). This crate
//! answers the planning questions that come with it: how the reaction term
//! behaves ([`reaction`]), how wide an infection "bubble" must be to invade
//! ([`bubble`]), how large single or spread-out releases must be
//! ([`release`]), how likely k randomly placed releases are to seed an
//! invasion ([`probability`]), and what a given protocol actually does on a
//! finite domain ([`pde`]).

pub mod bubble;
pub mod error;
pub mod optim;
pub mod pde;
pub mod probability;
pub mod quad;
pub mod reaction;
pub mod release;

pub use error::{Error, Result};
