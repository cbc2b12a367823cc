//! Three-task combination loss and its hand-derived gradients.
//!
//! The matching is held fixed while a loss is evaluated, so coordinate
//! gradients only flow through the regression term of matched proposals and
//! confidence gradients flow through the classification term (all
//! proposals) and, for a soft count, the counting term.
//!
//! The baseline terms of the ablation grid (MSE regression, plain smooth-L1,
//! unweighted cross-entropy, absolute count error) live here too so the
//! fitting harness can swap components.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    HrcCountMode, LossConfig, LossReport, Matching, Point, PointSet, Proposal, ProposalSet, WceMode,
};

/// Smooth-L1 with an L1-norm branch test and a squared-L2 quadratic branch.
pub fn smooth_l1(p: &Point, q: &Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let l1 = dx.abs() + dy.abs();
    if l1 < 1.0 {
        0.5 * (dx * dx + dy * dy)
    } else {
        l1 - 0.5
    }
}

/// Gradient of [`smooth_l1`] with respect to `q`.
fn smooth_l1_grad(p: &Point, q: &Point) -> Point {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    if dx.abs() + dy.abs() < 1.0 {
        Point::new(-dx, -dy)
    } else {
        Point::new(-sign(dx), -sign(dy))
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Mean of `ln(smooth_l1 + 1)` over aligned pairs.
pub fn hsl1_regression_loss(gt: &PointSet, matched: &[Point]) -> Result<f64> {
    if gt.len() != matched.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            actual: matched.len(),
        });
    }
    if gt.is_empty() {
        return Err(Error::InvalidInput(
            "regression loss needs at least one pair".into(),
        ));
    }
    let sum: f64 = gt
        .iter()
        .zip(matched)
        .map(|(p, q)| smooth_l1(p, q).ln_1p())
        .sum();
    Ok(sum / gt.len() as f64)
}

/// Weighted cross-entropy over matched (positive) and unmatched (negative)
/// proposals, normalized by the number of matched proposals.
pub fn wce_classification_loss(
    matching: &Matching,
    pred: &ProposalSet,
    alpha: f64,
    mode: WceMode,
    clamp: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    matching.validate(pred.len())?;
    Ok(wce_terms(
        matching,
        pred.proposals(),
        alpha,
        mode,
        clamp,
        None,
    ))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Evaluates the weighted cross-entropy and, when `grad` is given, adds
/// `scale * dL/dt_j` into it.
fn wce_terms(
    matching: &Matching,
    proposals: &[Proposal],
    alpha: f64,
    mode: WceMode,
    clamp: f64,
    grad: Option<(&mut [f64], f64)>,
) -> f64 {
    let norm = matching.num_gt().max(1) as f64;
    let lo = clamp;
    let hi = 1.0 - clamp;
    let interior = |t: f64| t > lo && t < hi;

    let mut pos = 0.0;
    let mut neg = 0.0;
    for &j in matching.assignment() {
        pos += proposals[j].confidence.clamp(lo, hi).ln();
    }
    for &j in matching.unmatched() {
        let t = proposals[j].confidence.clamp(lo, hi);
        neg += match mode {
            WceMode::Standard => (-t).ln_1p(),
            WceMode::Literal => 1.0 - t.ln(),
        };
    }

    if let Some((grad, scale)) = grad {
        for &j in matching.assignment() {
            let t = proposals[j].confidence;
            if interior(t) {
                grad[j] += scale * (-alpha / (norm * t));
            }
        }
        for &j in matching.unmatched() {
            let t = proposals[j].confidence;
            if interior(t) {
                grad[j] += scale
                    * match mode {
                        WceMode::Standard => (1.0 - alpha) / (norm * (1.0 - t)),
                        WceMode::Literal => (1.0 - alpha) / (norm * t),
                    };
            }
        }
    }

    -(alpha * pos + (1.0 - alpha) * neg) / norm
}

/// Unweighted binary cross-entropy averaged over all proposals.
fn ce_terms(
    matching: &Matching,
    proposals: &[Proposal],
    clamp: f64,
    grad: Option<(&mut [f64], f64)>,
) -> f64 {
    let m = proposals.len();
    if m == 0 {
        return 0.0;
    }
    let norm = m as f64;
    let lo = clamp;
    let hi = 1.0 - clamp;
    let mut positive = vec![false; m];
    for &j in matching.assignment() {
        positive[j] = true;
    }

    let sum: f64 = proposals
        .iter()
        .zip(&positive)
        .map(|(p, &pos)| {
            let t = p.confidence.clamp(lo, hi);
            if pos {
                t.ln()
            } else {
                (-t).ln_1p()
            }
        })
        .sum();

    if let Some((grad, scale)) = grad {
        for (j, (p, &pos)) in proposals.iter().zip(&positive).enumerate() {
            let t = p.confidence;
            if t > lo && t < hi {
                grad[j] += scale
                    * if pos {
                        -1.0 / (norm * t)
                    } else {
                        1.0 / (norm * (1.0 - t))
                    };
            }
        }
    }

    -sum / norm
}

/// `|M - N| * ln(|M - N| / (N + eps) + 1)`.
pub fn hrc_count_loss(n: usize, m_eff: f64, epsilon: f64) -> f64 {
    let k = (m_eff - n as f64).abs();
    k * (k / (n as f64 + epsilon)).ln_1p()
}

/// Derivative of [`hrc_count_loss`] with respect to `m_eff`.
fn hrc_count_grad(n: usize, m_eff: f64, epsilon: f64) -> f64 {
    let diff = m_eff - n as f64;
    let k = diff.abs();
    let a = n as f64 + epsilon;
    sign(diff) * ((k / a).ln_1p() + k / (a + k))
}

/// Number of proposals whose confidence reaches the threshold (inclusive).
pub fn hard_count(pred: &ProposalSet, threshold: f64) -> usize {
    pred.iter().filter(|p| p.confidence >= threshold).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegressionLoss {
    /// Mean squared Euclidean distance over matched pairs.
    Mse,
    /// Mean smooth-L1 over matched pairs.
    SmoothL1,
    /// Mean `ln(smooth_l1 + 1)` over matched pairs.
    Hsl1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassificationLoss {
    /// Binary cross-entropy averaged over all proposals.
    Ce,
    /// Alpha-weighted cross-entropy normalized by the matched count.
    Wce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountingLoss {
    None,
    /// `|sum_j t_j - N|`.
    Mae,
    /// Highly robust count loss; count source set by `hrc_count_mode`.
    Hrc,
}

crate::model::keyword_enum!(RegressionLoss,
    RegressionLoss::Mse => "MSE",
    RegressionLoss::SmoothL1 => "SmoothL1",
    RegressionLoss::Hsl1 => "HSL1",
);
crate::model::keyword_enum!(ClassificationLoss,
    ClassificationLoss::Ce => "CE",
    ClassificationLoss::Wce => "WCE",
);
crate::model::keyword_enum!(CountingLoss,
    CountingLoss::None => "none",
    CountingLoss::Mae => "MAE",
    CountingLoss::Hrc => "HRC",
);

/// One row of the loss ablation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LossVariant {
    pub regression: RegressionLoss,
    pub classification: ClassificationLoss,
    pub counting: CountingLoss,
}

impl LossVariant {
    pub const TTC: LossVariant = LossVariant::new(
        RegressionLoss::Hsl1,
        ClassificationLoss::Wce,
        CountingLoss::Hrc,
    );

    pub const fn new(
        regression: RegressionLoss,
        classification: ClassificationLoss,
        counting: CountingLoss,
    ) -> Self {
        Self {
            regression,
            classification,
            counting,
        }
    }

    /// The ten variants of the ablation table, in table order (IDs 1..=10).
    pub fn ablation_grid() -> Vec<LossVariant> {
        use ClassificationLoss::*;
        use CountingLoss::{Hrc, Mae};
        use RegressionLoss::*;
        vec![
            Self::new(Mse, Ce, CountingLoss::None),
            Self::new(Mse, Ce, Mae),
            Self::new(Hsl1, Ce, Mae),
            Self::new(Mse, Wce, Mae),
            Self::new(Mse, Ce, Hrc),
            Self::new(Hsl1, Wce, Mae),
            Self::new(Hsl1, Ce, Hrc),
            Self::new(Mse, Wce, Hrc),
            Self::new(SmoothL1, Wce, Hrc),
            Self::new(Hsl1, Wce, Hrc),
        ]
    }
}

impl Default for LossVariant {
    fn default() -> Self {
        Self::TTC
    }
}

impl fmt::Display for LossVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}+{}+{}",
            self.regression, self.classification, self.counting
        )
    }
}

impl FromStr for LossVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split('+').collect();
        let [r, c, n] = parts.as_slice() else {
            return Err(format!(
                "expected REGRESSION+CLASSIFICATION+COUNTING, got `{s}`"
            ));
        };
        Ok(Self::new(r.parse()?, c.parse()?, n.parse()?))
    }
}

/// Weighted TTC loss (HSL1 + WCE + HRC) with gradients.
pub fn ttc_total(
    gt: &PointSet,
    pred: &ProposalSet,
    matching: &Matching,
    cfg: &LossConfig,
) -> Result<LossReport> {
    evaluate_variant(gt, pred, matching, cfg, LossVariant::TTC)
}

/// Evaluates any loss variant; the total is
/// `lambda1 * l_cls + lambda2 * l_reg + lambda3 * l_cou`.
pub fn evaluate_variant(
    gt: &PointSet,
    pred: &ProposalSet,
    matching: &Matching,
    cfg: &LossConfig,
    variant: LossVariant,
) -> Result<LossReport> {
    cfg.validate()?;
    matching.validate(pred.len())?;
    if matching.num_gt() != gt.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            actual: matching.num_gt(),
        });
    }

    let proposals = pred.proposals();
    let m = proposals.len();
    let n = gt.len();
    let mut grad_coords = vec![Point::default(); m];
    let mut grad_conf = vec![0.0; m];

    // Regression over matched pairs.
    let mut reg_sum = 0.0;
    let reg_scale = cfg.lambda2 / n.max(1) as f64;
    for (p, &j) in gt.iter().zip(matching.assignment()) {
        let q = &proposals[j].point;
        let (value, g) = match variant.regression {
            RegressionLoss::Mse => {
                let dx = q.x - p.x;
                let dy = q.y - p.y;
                (dx * dx + dy * dy, Point::new(2.0 * dx, 2.0 * dy))
            }
            RegressionLoss::SmoothL1 => (smooth_l1(p, q), smooth_l1_grad(p, q)),
            RegressionLoss::Hsl1 => {
                let s = smooth_l1(p, q);
                let g = smooth_l1_grad(p, q);
                let w = 1.0 / (1.0 + s);
                (s.ln_1p(), Point::new(g.x * w, g.y * w))
            }
        };
        reg_sum += value;
        grad_coords[j] = Point::new(reg_scale * g.x, reg_scale * g.y);
    }
    let l_reg = if n == 0 { 0.0 } else { reg_sum / n as f64 };

    let cls_grad = Some((grad_conf.as_mut_slice(), cfg.lambda1));
    let l_cls = match variant.classification {
        ClassificationLoss::Wce => wce_terms(
            matching,
            proposals,
            cfg.alpha,
            cfg.wce_mode,
            cfg.confidence_clamp,
            cls_grad,
        ),
        ClassificationLoss::Ce => ce_terms(matching, proposals, cfg.confidence_clamp, cls_grad),
    };

    let soft = pred.soft_count();
    let (l_cou, conf_grad) = match variant.counting {
        CountingLoss::None => (0.0, 0.0),
        CountingLoss::Mae => ((soft - n as f64).abs(), sign(soft - n as f64)),
        CountingLoss::Hrc => match cfg.hrc_count_mode {
            HrcCountMode::Soft => (
                hrc_count_loss(n, soft, cfg.epsilon),
                hrc_count_grad(n, soft, cfg.epsilon),
            ),
            HrcCountMode::Hard => {
                let hard = hard_count(pred, cfg.count_threshold) as f64;
                (hrc_count_loss(n, hard, cfg.epsilon), 0.0)
            }
        },
    };
    if conf_grad != 0.0 {
        for g in &mut grad_conf {
            *g += cfg.lambda3 * conf_grad;
        }
    }

    let total = cfg.lambda1 * l_cls + cfg.lambda2 * l_reg + cfg.lambda3 * l_cou;
    Ok(LossReport {
        l_reg,
        l_cls,
        l_cou,
        total,
        grad_coords,
        grad_conf,
    })
}

/// Central-difference gradient of `f` with respect to every proposal
/// coordinate and confidence.
///
/// Perturbed sets are built without range checks so that confidences may
/// step slightly outside `[0, 1]`; callers keep evaluation points away from
/// kinks and clamp boundaries.
pub fn finite_diff_gradient<F>(f: F, pred: &ProposalSet, h: f64) -> (Vec<Point>, Vec<f64>)
where
    F: Fn(&ProposalSet) -> f64,
{
    let base: Vec<Proposal> = pred.proposals().to_vec();
    let mut coords = Vec::with_capacity(base.len());
    let mut confs = Vec::with_capacity(base.len());
    let perturbed = |j: usize, apply: &dyn Fn(&mut Proposal, f64)| -> f64 {
        let mut plus = base.clone();
        apply(&mut plus[j], h);
        let mut minus = base.clone();
        apply(&mut minus[j], -h);
        (f(&ProposalSet::from_unchecked(plus)) - f(&ProposalSet::from_unchecked(minus))) / (2.0 * h)
    };
    for j in 0..base.len() {
        let gx = perturbed(j, &|p, d| p.point.x += d);
        let gy = perturbed(j, &|p, d| p.point.y += d);
        let gt = perturbed(j, &|p, d| p.confidence += d);
        coords.push(Point::new(gx, gy));
        confs.push(gt);
    }
    (coords, confs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[(f64, f64)]) -> PointSet {
        PointSet::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn proposals(items: &[(f64, f64, f64)]) -> ProposalSet {
        ProposalSet::new(
            items
                .iter()
                .map(|&(x, y, t)| Proposal::new(Point::new(x, y), t).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn smooth_l1_hand_values() {
        let o = Point::new(0.0, 0.0);
        assert_eq!(smooth_l1(&o, &o), 0.0);
        assert!((smooth_l1(&Point::new(0.3, 0.2), &o) - 0.065).abs() < 1e-15);
        assert_eq!(smooth_l1(&Point::new(3.0, 4.0), &o), 6.5);
        // Branch test is on the L1 norm: L2 = 0.8 but L1 = 1.1.
        assert!((smooth_l1(&Point::new(0.55, 0.55), &o) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn hsl1_hand_values() {
        let g = set(&[(0.0, 0.0)]);
        assert_eq!(
            hsl1_regression_loss(&g, &[Point::new(0.0, 0.0)]).unwrap(),
            0.0
        );
        let v = hsl1_regression_loss(&g, &[Point::new(0.3, 0.2)]).unwrap();
        assert!((v - 1.065_f64.ln()).abs() < 1e-12);
        assert!((v - 0.062_975).abs() < 1e-6);
        let v = hsl1_regression_loss(&g, &[Point::new(3.0, 4.0)]).unwrap();
        assert!((v - 7.5_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn hsl1_rejects_length_mismatch() {
        let g = set(&[(0.0, 0.0), (1.0, 1.0)]);
        assert!(matches!(
            hsl1_regression_loss(&g, &[Point::new(0.0, 0.0)]),
            Err(Error::LengthMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn wce_symmetric_configuration_is_ln2() {
        let pred = proposals(&[(0.0, 0.0, 0.5), (5.0, 5.0, 0.5)]);
        let m = Matching::new(vec![0], 2).unwrap();
        let v = wce_classification_loss(&m, &pred, 0.5, WceMode::Standard, 1e-7).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn wce_perfect_classification_tends_to_zero() {
        let clamp = 1e-12;
        let pred = proposals(&[(0.0, 0.0, 1.0), (5.0, 5.0, 0.0), (9.0, 9.0, 0.0)]);
        let m = Matching::new(vec![0], 3).unwrap();
        let v = wce_classification_loss(&m, &pred, 0.5, WceMode::Standard, clamp).unwrap();
        assert!((0.0..1e-11).contains(&v), "{v}");
    }

    #[test]
    fn wce_literal_single_matched() {
        let clamp = 1e-7;
        let pred = proposals(&[(0.0, 0.0, 1.0)]);
        let m = Matching::new(vec![0], 1).unwrap();
        let alpha = 0.5;
        let v = wce_classification_loss(&m, &pred, alpha, WceMode::Literal, clamp).unwrap();
        assert!((v - (-alpha * (1.0 - clamp).ln())).abs() < 1e-15);
        assert!(v > 0.0 && v < 1e-6);
    }

    #[test]
    fn wce_literal_is_unbounded_below_for_unmatched() {
        let pred = proposals(&[(0.0, 0.0, 0.9), (1.0, 1.0, 0.0)]);
        let m = Matching::new(vec![0], 2).unwrap();
        let loose = wce_classification_loss(&m, &pred, 0.5, WceMode::Literal, 1e-3).unwrap();
        let tight = wce_classification_loss(&m, &pred, 0.5, WceMode::Literal, 1e-12).unwrap();
        assert!(tight < loose && tight < 0.0);
    }

    #[test]
    fn wce_rejects_bad_alpha() {
        let pred = proposals(&[(0.0, 0.0, 0.5)]);
        let m = Matching::new(vec![0], 1).unwrap();
        assert!(matches!(
            wce_classification_loss(&m, &pred, 1.5, WceMode::Standard, 1e-7),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(wce_classification_loss(&m, &pred, -0.1, WceMode::Standard, 1e-7).is_err());
    }

    #[test]
    fn hrc_hand_values() {
        assert_eq!(hrc_count_loss(7, 7.0, 1e-8), 0.0);
        let expected = 10.0 * 1.1_f64.ln();
        assert!((hrc_count_loss(100, 110.0, 1e-12) - expected).abs() < 1e-9);
        assert!((hrc_count_loss(100, 90.0, 1e-12) - expected).abs() < 1e-9);
    }

    #[test]
    fn ttc_total_hand_value() {
        let gt = set(&[(0.0, 0.0)]);
        let pred = proposals(&[(0.3, 0.2, 0.5), (40.0, 40.0, 0.5)]);
        let m = Matching::new(vec![0], 2).unwrap();
        // Soft count 1.0 equals N, so the counting term vanishes.
        let report = ttc_total(&gt, &pred, &m, &LossConfig::default()).unwrap();
        let expected = std::f64::consts::LN_2 + 1.065_f64.ln();
        assert!((report.total - expected).abs() < 1e-12);
        assert_eq!(report.l_cou, 0.0);
        assert!((report.total - 0.756_122).abs() < 1e-6);
    }

    #[test]
    fn ttc_total_perfect_prediction() {
        let cfg = LossConfig::default();
        let gt = set(&[(3.0, 4.0), (10.0, 1.0)]);
        let t = 1.0 - cfg.confidence_clamp;
        let pred = proposals(&[(10.0, 1.0, t), (3.0, 4.0, t)]);
        let m = Matching::new(vec![1, 0], 2).unwrap();
        let r = ttc_total(&gt, &pred, &m, &cfg).unwrap();
        assert_eq!(r.l_reg, 0.0);
        assert!(r.l_cls < 1e-6 && r.l_cou < 1e-6 && r.total < 1e-6);
    }

    #[test]
    fn lambda_scales_only_its_term() {
        let gt = set(&[(0.0, 0.0), (9.0, 9.0)]);
        let pred = proposals(&[(0.4, 0.1, 0.7), (8.0, 9.5, 0.6), (50.0, 2.0, 0.3)]);
        let m = Matching::new(vec![0, 1], 3).unwrap();
        let base = LossConfig::default();
        let scaled = LossConfig {
            lambda2: 10.0,
            ..base
        };
        let a = ttc_total(&gt, &pred, &m, &base).unwrap();
        let b = ttc_total(&gt, &pred, &m, &scaled).unwrap();
        assert_eq!(a.l_reg, b.l_reg);
        let delta = b.total - a.total;
        assert!((delta - 9.0 * a.l_reg).abs() < 1e-12);
    }

    #[test]
    fn hard_count_mode_has_no_confidence_gradient_from_counting() {
        let gt = set(&[(0.0, 0.0)]);
        let pred = proposals(&[(0.2, 0.1, 0.9), (30.0, 3.0, 0.8)]);
        let m = Matching::new(vec![0], 2).unwrap();
        let hard = LossConfig {
            hrc_count_mode: HrcCountMode::Hard,
            lambda1: 0.0,
            ..LossConfig::default()
        };
        let r = ttc_total(&gt, &pred, &m, &hard).unwrap();
        assert!((r.l_cou - hrc_count_loss(1, 2.0, hard.epsilon)).abs() < 1e-15);
        assert!(r.grad_conf.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn unmatched_proposals_get_no_coordinate_gradient() {
        let gt = set(&[(0.0, 0.0)]);
        let pred = proposals(&[(7.0, 1.0, 0.4), (0.5, 0.2, 0.6)]);
        let m = Matching::new(vec![1], 2).unwrap();
        for variant in LossVariant::ablation_grid() {
            let r = evaluate_variant(&gt, &pred, &m, &LossConfig::default(), variant).unwrap();
            assert_eq!(r.grad_coords[0], Point::default(), "{variant}");
            assert_ne!(r.grad_coords[1], Point::default(), "{variant}");
        }
    }

    #[test]
    fn finite_diff_of_constant_is_zero() {
        let pred = proposals(&[(1.0, 2.0, 0.3), (4.0, 5.0, 0.6)]);
        let (c, t) = finite_diff_gradient(|_| 3.25, &pred, 1e-6);
        assert!(c.iter().all(|p| p.x == 0.0 && p.y == 0.0));
        assert!(t.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn wce_matched_gradient_hand_value() {
        let gt = set(&[(0.0, 0.0)]);
        let pred = proposals(&[(0.0, 0.0, 0.5), (5.0, 5.0, 0.2)]);
        let m = Matching::new(vec![0], 2).unwrap();
        let cfg = LossConfig {
            lambda2: 0.0,
            lambda3: 0.0,
            ..LossConfig::default()
        };
        let r = ttc_total(&gt, &pred, &m, &cfg).unwrap();
        let expected = -cfg.alpha / (1.0 * 0.5);
        assert!((r.grad_conf[0] - expected).abs() < 1e-15);
        let (_, fd) =
            finite_diff_gradient(|p| ttc_total(&gt, p, &m, &cfg).unwrap().total, &pred, 1e-6);
        assert!(((fd[0] - expected) / expected).abs() < 1e-5);
    }

    #[test]
    fn variant_names_round_trip() {
        let grid = LossVariant::ablation_grid();
        assert_eq!(grid.len(), 10);
        assert_eq!(grid[9], LossVariant::TTC);
        assert_eq!(grid[1].to_string(), "MSE+CE+MAE");
        for v in grid {
            assert_eq!(v.to_string().parse::<LossVariant>().unwrap(), v);
        }
        assert!("HSL1+WCE".parse::<LossVariant>().is_err());
    }
}
