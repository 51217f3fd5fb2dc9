//! Kinetostatic design workbench for flexure-based decoupled XYZ positioning
//! stages.
//!
//! The crate covers the full design pipeline for stages whose prismatic
//! joints are multi-layer compound parallelogram flexures (MCPFs):
//!
//! - [`kinetostatics`] — frames, wrenches, 6×6 force transforms, rectangular
//!   section properties.
//! - [`mcpf`] — the half-MCPF skeleton, strain-energy assembly, redundant
//!   reaction resolution, and motional/lateral stiffness extraction.
//! - [`fe`] — an independent 3D Timoshenko frame finite-element solver used
//!   as the verification oracle for the energy model.
//! - [`stage`] — axis stiffness composition, lumped modal model, and the
//!   branch-chain spring–mass networks with cross-coupling springs.
//! - [`optimize`] — constrained three-objective design optimization with an
//!   elitist non-dominated-sorting genetic algorithm.
//! - [`sim`] — second-order axis plants, swept-sine identification, the
//!   feedforward+PID tracking controller, reference paths, and error metrics.
//! - [`config`] / [`cli`] / [`report`] — the batch front end.

pub mod cli;
pub mod config;
pub mod fe;
pub mod kinetostatics;
pub mod mcpf;
pub mod optimize;
pub mod report;
pub mod sim;
pub mod stage;
