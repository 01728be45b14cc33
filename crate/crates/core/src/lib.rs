//! Steady-state entanglement of two coupled microwave cavities hosting a magnon,
//! a phonon and a spin-ensemble mode, with coherent feedback on the first cavity.
//!
//! [`model`] holds parameters and the classical steady state, [`dynamics`] the
//! drift/diffusion matrices, stability and the Lyapunov solve, [`entanglement`]
//! logarithmic negativity. [`sweep`] and [`presets`] scan and optimize over
//! parameters; [`config`] and [`output`] handle files.
//!
//! ```
//! use magnocavity::sweep::analyze_point;
//! use magnocavity::model::SystemParams;
//!
//! let a = analyze_point(&SystemParams::baseline()).unwrap();
//! assert_eq!(a.entanglement.len(), 10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod modes;
pub mod output;
pub mod presets;
pub mod sweep;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
