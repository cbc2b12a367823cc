//! Domain types shared across the crate.
//!
//! Coordinates are raw pixels. Confidences are stored exactly as given;
//! clamping only happens inside logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

/// Ordered ground-truth coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("point {i} is not finite")));
        }
        Ok(Self { points })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub point: Point,
    pub confidence: f64,
}

impl Proposal {
    pub fn new(point: Point, confidence: f64) -> Result<Self> {
        if !point.is_finite() {
            return Err(Error::InvalidInput(
                "proposal coordinates are not finite".into(),
            ));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidInput(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(Self { point, confidence })
    }
}

/// Ordered predicted points with their confidences.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProposalSet {
    proposals: Vec<Proposal>,
}

impl ProposalSet {
    pub fn new(proposals: Vec<Proposal>) -> Result<Self> {
        for (j, p) in proposals.iter().enumerate() {
            Proposal::new(p.point, p.confidence)
                .map_err(|e| Error::InvalidInput(format!("proposal {j}: {e}")))?;
        }
        Ok(Self { proposals })
    }

    /// Skips range checks; used for finite-difference probes and by the
    /// fitting loop, which projects confidences itself.
    pub(crate) fn from_unchecked(proposals: Vec<Proposal>) -> Self {
        Self { proposals }
    }

    pub(crate) fn proposals_mut(&mut self) -> &mut [Proposal] {
        &mut self.proposals
    }

    pub fn from_parts(points: &[Point], confidences: &[f64]) -> Result<Self> {
        if points.len() != confidences.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                actual: confidences.len(),
            });
        }
        let proposals = points
            .iter()
            .zip(confidences)
            .map(|(&point, &confidence)| Proposal { point, confidence })
            .collect();
        Self::new(proposals)
    }

    pub fn len(&self) -> usize {
        self.proposals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proposals.is_empty()
    }

    pub fn proposals(&self) -> &[Proposal] {
        &self.proposals
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Proposal> {
        self.proposals.iter()
    }

    pub fn points(&self) -> Vec<Point> {
        self.proposals.iter().map(|p| p.point).collect()
    }

    pub fn confidences(&self) -> Vec<f64> {
        self.proposals.iter().map(|p| p.confidence).collect()
    }

    /// Sum of confidences, the differentiable stand-in for the positive count.
    pub fn soft_count(&self) -> f64 {
        self.proposals.iter().map(|p| p.confidence).sum()
    }
}

/// Injective map from ground-truth indices to proposal indices.
///
/// `assignment[i]` is the proposal matched to ground-truth point `i`;
/// `unmatched` lists the remaining proposals in ascending order. Reading
/// the matched proposals followed by the unmatched ones gives the
/// reordered proposal set used by the loss.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    assignment: Vec<usize>,
    unmatched: Vec<usize>,
}

impl Matching {
    /// Builds a matching over `num_proposals` proposals from an assignment.
    pub fn new(assignment: Vec<usize>, num_proposals: usize) -> Result<Self> {
        let mut used = vec![false; num_proposals];
        for (i, &j) in assignment.iter().enumerate() {
            if j >= num_proposals {
                return Err(Error::InvalidInput(format!(
                    "gt {i} assigned to proposal {j}, but only {num_proposals} proposals exist"
                )));
            }
            if used[j] {
                return Err(Error::InvalidInput(format!(
                    "proposal {j} assigned more than once"
                )));
            }
            used[j] = true;
        }
        let unmatched = (0..num_proposals).filter(|&j| !used[j]).collect();
        Ok(Self {
            assignment,
            unmatched,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn unmatched(&self) -> &[usize] {
        &self.unmatched
    }

    pub fn num_gt(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_proposals(&self) -> usize {
        self.assignment.len() + self.unmatched.len()
    }

    /// Proposal indices with matched ones first (in ground-truth order).
    pub fn order(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment.iter().chain(self.unmatched.iter()).copied()
    }

    /// Checks the permutation invariant against a proposal count.
    pub fn validate(&self, num_proposals: usize) -> Result<()> {
        if self.num_proposals() != num_proposals {
            return Err(Error::LengthMismatch {
                expected: num_proposals,
                actual: self.num_proposals(),
            });
        }
        let mut seen = vec![false; num_proposals];
        for j in self.order() {
            if j >= num_proposals || seen[j] {
                return Err(Error::InvalidInput(format!(
                    "matching is not a permutation (index {j})"
                )));
            }
            seen[j] = true;
        }
        if self.unmatched.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "unmatched indices not ascending".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WceMode {
    /// Binary cross-entropy reading: `ln(1 - t)` for unmatched proposals.
    #[default]
    Standard,
    /// The printed form with `(1 - ln t)` for unmatched proposals.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HrcCountMode {
    /// `#{j : t_j >= threshold}`; carries no gradient.
    Hard,
    /// `sum_j t_j`.
    #[default]
    Soft,
}

macro_rules! keyword_enum {
    ($ty:ty, $($variant:path => $name:literal),+ $(,)?) => {
        impl ::std::fmt::Display for $ty {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                let s = match self { $($variant => $name),+ };
                f.write_str(s)
            }
        }

        impl ::std::str::FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!(
                        "unknown value `{other}` (expected one of: {})",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}
pub(crate) use keyword_enum;

keyword_enum!(WceMode, WceMode::Standard => "standard", WceMode::Literal => "literal");
keyword_enum!(HrcCountMode, HrcCountMode::Hard => "hard", HrcCountMode::Soft => "soft");

/// Scalar hyperparameters of the cost matrix and the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Distance scale in the pairing cost.
    pub gamma: f64,
    /// Weight of matched terms in the classification loss.
    pub alpha: f64,
    /// Stabilizer in the count loss denominator.
    pub epsilon: f64,
    /// Classification weight.
    pub lambda1: f64,
    /// Regression weight.
    pub lambda2: f64,
    /// Counting weight.
    pub lambda3: f64,
    /// Confidences are clamped to `[clamp, 1 - clamp]` inside logarithms.
    pub confidence_clamp: f64,
    /// Positive-count threshold (inclusive).
    pub count_threshold: f64,
    pub wce_mode: WceMode,
    pub hrc_count_mode: HrcCountMode,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            gamma: 0.05,
            alpha: 0.5,
            epsilon: 1e-8,
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 1.0,
            confidence_clamp: 1e-7,
            count_threshold: 0.5,
            wce_mode: WceMode::Standard,
            hrc_count_mode: HrcCountMode::Soft,
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        key: key.to_string(),
        message: message.into(),
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(invalid("gamma", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("alpha", "must lie in [0, 1]"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(invalid("epsilon", "must be > 0"));
        }
        for (key, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(key, "must be >= 0"));
            }
        }
        if !(self.confidence_clamp > 0.0 && self.confidence_clamp < 0.5) {
            return Err(invalid("clamp", "must lie in (0, 0.5)"));
        }
        if !(self.count_threshold > 0.0 && self.count_threshold < 1.0) {
            return Err(invalid("threshold", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Clamps a confidence into the logarithm-safe interval.
    pub fn clamp_confidence(&self, t: f64) -> f64 {
        t.clamp(self.confidence_clamp, 1.0 - self.confidence_clamp)
    }
}

/// Loss components, weighted total and gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub l_reg: f64,
    pub l_cls: f64,
    pub l_cou: f64,
    pub total: f64,
    /// Gradient of `total` w.r.t. each proposal's coordinates.
    pub grad_coords: Vec<Point>,
    /// Gradient of `total` w.r.t. each proposal's confidence.
    pub grad_conf: Vec<f64>,
}
