//! Explicit constructions: the two-phase automaton and the Turing machine
//! reduction with its binary block encoding.

pub mod blockcode;
pub mod ft;
pub mod tm;
pub mod twophase;

pub use blockcode::{gt_kernel, verify_commutation, BlockCode, BlockDecode, CommutationReport};
pub use ft::{compile_tm, halting_obstacle, verify_fill, verify_obstacle, CompiledFT, FillReport, ObstacleReport};
pub use tm::{Move, TMSpec, Transition};
pub use twophase::{f_kernel, g_kernel, gprime_kernel, h_kernel, TwoPhaseParams};
