//! Free-parameter fitting harness.
//!
//! A proposal set stands in for a network's output: its coordinates and
//! confidences are optimized directly by gradient descent against a scene's
//! ground truth, re-running the Hungarian matching every `rematch_every`
//! steps and treating it as constant in between.

use rayon::prelude::*;
use serde::Serialize;

use crate::assignment::match_points;
use crate::error::{Error, Result};
use crate::loss::{evaluate_variant, hard_count, LossVariant};
use crate::metrics::count_errors;
use crate::model::{LossConfig, Matching, Point, PointSet, Proposal, ProposalSet};
use crate::synth::{inject_deletions, inject_jitter, rng_for, Scene};

const INIT_STREAM: u64 = 0x1417_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    /// Near-square lattice of cell centers covering the image.
    #[default]
    Grid,
    /// Uniform positions drawn from the fit seed.
    Random,
}

crate::model::keyword_enum!(Init, Init::Grid => "grid", Init::Random => "random");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub steps: usize,
    /// Step size for coordinates, per matched point (see [`fit_from`]).
    pub lr_coord: f64,
    pub lr_conf: f64,
    /// `M = ceil(proposal_factor * N)`.
    pub proposal_factor: f64,
    pub init: Init,
    pub seed: u64,
    pub variant: LossVariant,
    pub rematch_every: usize,
    /// Keep confidences at their initial values.
    pub freeze_confidence: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            steps: 5000,
            lr_coord: 0.9,
            lr_conf: 0.05,
            proposal_factor: 1.5,
            init: Init::Grid,
            seed: 0,
            variant: LossVariant::TTC,
            rematch_every: 1,
            freeze_confidence: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |key: &str, message: &str| Error::Validation {
            key: key.to_string(),
            message: message.to_string(),
        };
        if !(self.lr_coord.is_finite() && self.lr_coord > 0.0) {
            return Err(invalid("lr_coord", "must be > 0"));
        }
        if !(self.lr_conf.is_finite() && self.lr_conf > 0.0) {
            return Err(invalid("lr_conf", "must be > 0"));
        }
        if !(self.proposal_factor.is_finite() && self.proposal_factor >= 1.0) {
            return Err(invalid("proposal_factor", "must be >= 1"));
        }
        if self.rematch_every == 0 {
            return Err(invalid("rematch_every", "must be >= 1"));
        }
        Ok(())
    }

    pub fn num_proposals(&self, n: usize) -> usize {
        (self.proposal_factor * n as f64).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitRecord {
    pub step: usize,
    pub total: f64,
    pub l_reg: f64,
    pub l_cls: f64,
    pub l_cou: f64,
    pub mean_distance: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitTrace {
    /// One record per step including step 0: `steps + 1` entries.
    pub records: Vec<FitRecord>,
    pub final_proposals: ProposalSet,
    pub final_matching: Matching,
}

impl FitTrace {
    pub fn first(&self) -> &FitRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &FitRecord {
        self.records.last().expect("trace always has step 0")
    }
}

pub fn init_proposals(scene: &Scene, cfg: &FitConfig) -> ProposalSet {
    let m = cfg.num_proposals(scene.gt.len());
    let (w, h) = (scene.width as f64, scene.height as f64);
    let points: Vec<Point> = match cfg.init {
        Init::Grid => {
            if m == 0 {
                Vec::new()
            } else {
                let cols = ((m as f64 * w / h).sqrt().ceil() as usize).clamp(1, m);
                let rows = m.div_ceil(cols);
                (0..m)
                    .map(|k| {
                        let (r, c) = (k / cols, k % cols);
                        Point::new(
                            (c as f64 + 0.5) * w / cols as f64,
                            (r as f64 + 0.5) * h / rows as f64,
                        )
                    })
                    .collect()
            }
        }
        Init::Random => {
            use rand::Rng;
            let mut rng = rng_for(cfg.seed, INIT_STREAM);
            (0..m)
                .map(|_| Point::new(rng.random::<f64>() * w, rng.random::<f64>() * h))
                .collect()
        }
    };
    ProposalSet::new(
        points
            .into_iter()
            .map(|point| Proposal {
                point,
                confidence: 0.5,
            })
            .collect(),
    )
    .expect("lattice points are finite")
}

pub fn fit_points(scene: &Scene, loss_cfg: &LossConfig, cfg: &FitConfig) -> Result<FitTrace> {
    fit_from(&scene.gt, init_proposals(scene, cfg), loss_cfg, cfg)
}

fn mean_matched_distance(gt: &PointSet, pred: &ProposalSet, matching: &Matching) -> f64 {
    if gt.is_empty() {
        return 0.0;
    }
    let proposals = pred.proposals();
    let sum: f64 = gt
        .iter()
        .zip(matching.assignment())
        .map(|(p, &j)| p.distance(&proposals[j].point))
        .sum();
    sum / gt.len() as f64
}

/// Runs the fitting loop from explicit initial proposals.
///
/// Coordinates are updated with `lr_coord * N * grad`: the regression terms
/// are means over the `N` matched pairs, and multiplying by `N` makes
/// `lr_coord` a per-point step size independent of crowd size. Confidences
/// take plain steps of `lr_conf * grad` and are projected back to
/// `[clamp, 1 - clamp]`.
pub fn fit_from(
    gt: &PointSet,
    initial: ProposalSet,
    loss_cfg: &LossConfig,
    cfg: &FitConfig,
) -> Result<FitTrace> {
    loss_cfg.validate()?;
    cfg.validate()?;
    if gt.is_empty() {
        return Err(Error::InvalidInput(
            "cannot fit a scene with no points".into(),
        ));
    }
    let mut pred = initial;
    let n = gt.len();
    let coord_step = cfg.lr_coord * n as f64;
    let lo = loss_cfg.confidence_clamp;
    let hi = 1.0 - lo;
    for p in pred.proposals_mut() {
        p.confidence = p.confidence.clamp(lo, hi);
    }

    let mut records = Vec::with_capacity(cfg.steps + 1);
    let mut matching = match_points(gt, &pred, loss_cfg)?;
    for step in 0..=cfg.steps {
        if step > 0 && step % cfg.rematch_every == 0 {
            matching = match_points(gt, &pred, loss_cfg)?;
        }
        let report = evaluate_variant(gt, &pred, &matching, loss_cfg, cfg.variant)?;
        if !report.total.is_finite() {
            return Err(Error::DivergenceDetected { step });
        }
        records.push(FitRecord {
            step,
            total: report.total,
            l_reg: report.l_reg,
            l_cls: report.l_cls,
            l_cou: report.l_cou,
            mean_distance: mean_matched_distance(gt, &pred, &matching),
            count: hard_count(&pred, loss_cfg.count_threshold),
        });
        if step == cfg.steps {
            break;
        }

        for ((p, g), gc) in pred
            .proposals_mut()
            .iter_mut()
            .zip(&report.grad_coords)
            .zip(&report.grad_conf)
        {
            p.point.x -= coord_step * g.x;
            p.point.y -= coord_step * g.y;
            if !cfg.freeze_confidence {
                p.confidence = (p.confidence - cfg.lr_conf * gc).clamp(lo, hi);
            }
        }
        if pred
            .iter()
            .any(|p| !p.point.is_finite() || !p.confidence.is_finite())
        {
            return Err(Error::DivergenceDetected { step: step + 1 });
        }
    }

    Ok(FitTrace {
        records,
        final_proposals: pred,
        final_matching: matching,
    })
}

/// Annotation noise applied to each clean scene, re-drawn per seed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NoiseSpec {
    pub jitter_sigma: f64,
    pub deletion_rate: f64,
}

impl NoiseSpec {
    pub fn apply(&self, scene: &Scene, seed: u64) -> Scene {
        let jittered = inject_jitter(scene, self.jitter_sigma, seed);
        inject_deletions(&jittered, self.deletion_rate, seed)
    }
}

/// Per-scene noise seed, so scenes under one run seed get independent noise.
fn noise_seed(seed: u64, scene: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ scene as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationSpec {
    /// Clean scenes; fits see their noisy annotations, counts are scored
    /// against the clean point count.
    pub scenes: Vec<Scene>,
    pub noise: NoiseSpec,
    pub seeds: Vec<u64>,
    pub variants: Vec<LossVariant>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    /// 1-based position in the variant grid.
    pub id: usize,
    pub variant: String,
    /// Mean over seeds of the per-seed MAE across scenes.
    pub mae: f64,
    /// Mean over seeds of the per-seed root-mean-square error.
    pub mse: f64,
    pub fits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

/// Fits every (variant, scene, seed) triple and aggregates count errors.
///
/// Fits run in parallel on the ambient rayon pool; results are gathered in
/// job order so the report does not depend on scheduling.
pub fn run_ablation(
    spec: &AblationSpec,
    loss_cfg: &LossConfig,
    base: &FitConfig,
) -> Result<AblationReport> {
    if spec.scenes.is_empty() {
        return Err(Error::InvalidInput(
            "ablation needs at least one scene".into(),
        ));
    }
    if spec.seeds.is_empty() {
        return Err(Error::InvalidInput(
            "ablation needs at least one seed".into(),
        ));
    }

    let jobs: Vec<(usize, usize, usize)> = (0..spec.variants.len())
        .flat_map(|v| {
            (0..spec.seeds.len()).flat_map(move |s| (0..spec.scenes.len()).map(move |c| (v, s, c)))
        })
        .collect();

    let counts: Vec<usize> = jobs
        .par_iter()
        .map(|&(v, s, c)| {
            let seed = spec.seeds[s];
            let noisy = spec.noise.apply(&spec.scenes[c], noise_seed(seed, c));
            if noisy.gt.is_empty() {
                return Ok(0);
            }
            let cfg = FitConfig {
                seed,
                variant: spec.variants[v],
                ..*base
            };
            let trace = fit_points(&noisy, loss_cfg, &cfg)?;
            Ok(trace.last().count)
        })
        .collect::<Result<_>>()?;

    let per_variant = spec.seeds.len() * spec.scenes.len();
    let rows = spec
        .variants
        .iter()
        .enumerate()
        .map(|(v, variant)| {
            let block = &counts[v * per_variant..(v + 1) * per_variant];
            let mut mae = 0.0;
            let mut mse = 0.0;
            for seed_block in block.chunks(spec.scenes.len()) {
                let pairs: Vec<(f64, f64)> = spec
                    .scenes
                    .iter()
                    .zip(seed_block)
                    .map(|(scene, &count)| (scene.gt.len() as f64, count as f64))
                    .collect();
                let (a, r) = count_errors(&pairs)?;
                mae += a;
                mse += r;
            }
            let k = spec.seeds.len() as f64;
            Ok(AblationRow {
                id: v + 1,
                variant: variant.to_string(),
                mae: mae / k,
                mse: mse / k,
                fits: per_variant,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AblationReport { rows })
}
