//! Numerical toolkit for Weyl chamber dynamics in `SL(d, R)`.
//!
//! Projections of group elements, proximality and Schottky certificates, limit cone
//! approximation, dense subgroup completion, and explicit mixing witnesses for the Weyl
//! chamber flow.

pub mod bundled;
pub mod dense_subgroup;
pub mod flags_hopf;
pub mod group_core;
pub mod limit_cone;
pub mod linalg;
pub mod lp;
pub mod mixing_witness;
pub mod proximality;
pub mod representations;
pub mod sampling;
pub mod schottky;
pub mod word;

pub use flags_hopf::{Flag, FlagBox, FlagPair, HopfBox, HopfPoint};
pub use group_core::{CartanVector, GroupElement};
pub use proximality::{ProjHyperplane, ProjPoint, ProximalityCertificate};
pub use word::{Alphabet, Word};
