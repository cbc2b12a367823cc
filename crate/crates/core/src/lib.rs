//! Point-framework crowd counting core.
//!
//! Ground-truth head points are paired with predicted proposals through a
//! distance/confidence cost and the Hungarian method ([`assignment`]); the
//! matched sets are scored with a three-term loss whose gradients are
//! derived by hand ([`loss`]). [`metrics`] computes counting errors,
//! [`synth`] generates scenes, annotation noise and density maps, and
//! [`fit`] optimizes free proposal sets to exercise everything end to end.

pub mod assignment;
pub mod error;
pub mod fit;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod synth;

pub use assignment::{
    brute_force_match, build_cost_matrix, hungarian_match, hungarian_match_padded, match_points,
    CostMatrix,
};
pub use error::{Error, Result};
pub use fit::{
    fit_from, fit_points, init_proposals, run_ablation, AblationReport, AblationRow, AblationSpec,
    FitConfig, FitRecord, FitTrace, Init, NoiseSpec,
};
pub use loss::{
    evaluate_variant, finite_diff_gradient, hrc_count_loss, hsl1_regression_loss, smooth_l1,
    ttc_total, wce_classification_loss, ClassificationLoss, CountingLoss, LossVariant,
    RegressionLoss,
};
pub use metrics::{count_from_proposals, evaluate_dataset, EvalResult, ImageCount};
pub use model::{
    HrcCountMode, LossConfig, LossReport, Matching, Point, PointSet, Proposal, ProposalSet, WceMode,
};
pub use synth::{
    generate_scene, inject_deletions, inject_jitter, integrate_density, render_density_map,
    DensityMap, Distribution, Scene,
};
