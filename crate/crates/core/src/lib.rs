//! Finite-dimensional K-frames generated by Weyl-Heisenberg (Gabor) systems on
//! cyclic grids `Z_{N_1} × … × Z_{N_d}`.
//!
//! Signals are flattened row-major; operators are dense complex matrices.
//! [`kframe::kframe_bounds`] is the central computation; the remaining
//! functions in [`kframe`] check the inequalities built on top of it.

pub mod gabor;
pub mod kframe;
pub mod numerics;
pub mod operators;
pub mod random;
pub mod testbeds;

pub use gabor::{AtomMatrix, FrameOperatorMatrix, GaborSystem};
pub use kframe::{KFrameReport, KFrameStatus, LowerConstant, UpperConstant};
pub use numerics::ComplexMatrix;
pub use operators::{BoundedOperator, GridSpec, Signal};
