//! Exact computer algebra for oriented cohomology of split quadrics.
//!
//! The crate covers formal group laws and their coefficient rings, the
//! standard-basis cohomology ring of a split quadric, correspondences and
//! projector families, total Steenrod operations mod 2, symbolic quadratic
//! form profiles, motivic decomposition type diagrams for Chow groups and
//! Morava K-theory, and a small algebra of motive expressions.

pub mod coeff;
pub mod corr;
pub mod error;
pub mod fgl;
pub mod forms;
pub mod mdt;
pub mod motives;
pub mod ops;
pub mod padic;
pub mod quadring;
pub mod series;

pub use coeff::{CoeffElement, CoeffMode, CoeffRing};
pub use corr::Correspondence;
pub use ops::{lucas_binom_mod2, steenrod_total};
pub use error::{Error, Result};
pub use fgl::{fgl_from_log, morava_log, FormalGroupLaw, LogSeries};
pub use forms::{build_tower, kn_kernel_index, validate, FormProfile};
pub use mdt::{chow_to_morava, classify_k2, morava_to_chow, Cell, Flavor, MDTDiagram};
pub use motives::{MotiveExpr, Symbol};
pub use quadring::{Basis, QuadClass, SplitQuadric, Theory, TheoryKind};
