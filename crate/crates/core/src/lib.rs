//! Weighted thermodynamic formalism for towers of one-block factor maps
//! between subshifts of finite type.
//!
//! The crate computes partition sums and certified pressure brackets for
//! sub-multiplicative word potentials, folds a potential down a factor tower
//! to obtain the weighted topological pressure, builds finite-depth
//! approximations of the unique weighted equilibrium state, and applies the
//! whole pipeline to the Hausdorff dimension of self-affine Sierpinski
//! sponges.
//!
//! Everything here is `no_std` + `alloc`. The optional `parallel` feature
//! pulls in `rayon` for the fiber-table passes.
//!
//! ```
//! use thermoweight_core::{Sft, Potential, pressure};
//!
//! let golden = Sft::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
//! let phi = Potential::constant(golden.clone());
//! let u = pressure::u_sequence(&phi, 24, &Default::default()).unwrap();
//! let consts = thermoweight_core::potential::estimate_constants(
//!     &phi, 1, 6, thermoweight_core::SpecMode::Weak).unwrap();
//! let bracket = pressure::pressure_bracket(&u, &consts, 24).unwrap();
//! assert!(bracket.contains(((1.0 + 5f64.sqrt()) / 2.0).ln(), 0.0));
//! ```
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod logval;
pub(crate) mod math;

pub mod equilibrium;
pub mod oracle;
pub mod potential;
pub mod pressure;
pub mod sponge;
pub mod symbolic;

pub use error::{Error, Result};
pub use logval::LogValue;
pub use potential::{DwConstants, Potential, PotentialKind};
pub use pressure::{FiberTable, FoldedTables, PressureBracket, WeightedPressure};
pub use symbolic::{Caps, FactorChain, FactorMap, SpecMode, Sft, Symbol, WordList};
