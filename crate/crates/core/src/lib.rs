//! Kinematic-structure selection for a five-fingered robotic hand.
//!
//! The pipeline: a fixed catalog of 27 per-finger design candidates is scored
//! by forward-kinematic sweeps (global manipulability, voxelized workspace
//! overlap with the thumb), the scores are assembled into a 27-variable QUBO
//! with one-hot and ring-little compatibility penalties, and the QUBO is
//! minimized by multi-read simulated annealing, cross-checked against an
//! exhaustive enumeration of the feasible space.

pub mod catalog;
pub mod error;
pub mod kinematics;
pub mod metrics;
pub mod qubo;
pub mod solver;
pub mod workspace;

pub use catalog::{build_catalog, Catalog, DesignCandidate, Finger, HandParameters};
pub use error::{Error, Result};
pub use kinematics::{
    forward_kinematics, global_manipulability, manipulability, position_jacobian, DhRow,
    KinematicChain, Pose,
};
pub use metrics::{evaluate_catalog, max_hand_dof, EvaluationTable};
pub use qubo::{
    build_qubo, decode, objective, Assignment, PenaltyConfig, QuboMatrix, SelectionReport,
    VariableLayout,
};
pub use solver::{
    band_statistics, exhaustive_feasible_min, infeasible_dominance_check, simulated_anneal,
    BandTable, OracleReport, SaParams, SolveReport,
};
pub use workspace::{
    overlap_volume, reachable_voxels, sample_joint_grid, JointGrid, VoxelSet,
};
