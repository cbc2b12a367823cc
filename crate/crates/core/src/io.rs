//! Annotation files and configuration.
//!
//! Annotations are JSON lines, one record per image:
//!
//! ```text
//! {"image_id": "a", "points": [[x, y], ...]}                       ground truth
//! {"image_id": "a", "points": [[x, y], ...], "confidences": [t, ...]}  predictions
//! ```
//!
//! Ground-truth records may also carry `width` and `height` (pixels), which
//! scene-level commands use. Blank lines are ignored.
//!
//! Configuration is flat `key = value` text with `#` comments. Missing keys
//! take their defaults; unknown or repeated keys are rejected.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitConfig;
use crate::model::{LossConfig, Point, PointSet, Proposal, ProposalSet};
use crate::synth::Scene;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub image_id: String,
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidences: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
}

impl AnnotationRecord {
    pub fn ground_truth(image_id: impl Into<String>, points: &PointSet) -> Self {
        Self {
            image_id: image_id.into(),
            points: points.iter().map(|p| [p.x, p.y]).collect(),
            confidences: None,
            width: None,
            height: None,
        }
    }

    pub fn scene(image_id: impl Into<String>, scene: &Scene) -> Self {
        Self {
            width: Some(scene.width),
            height: Some(scene.height),
            ..Self::ground_truth(image_id, &scene.gt)
        }
    }

    pub fn prediction(image_id: impl Into<String>, pred: &ProposalSet) -> Self {
        Self {
            image_id: image_id.into(),
            points: pred.iter().map(|p| [p.point.x, p.point.y]).collect(),
            confidences: Some(pred.confidences()),
            width: None,
            height: None,
        }
    }

    fn point_set(&self, line: usize) -> Result<PointSet> {
        PointSet::new(self.points.iter().map(|&[x, y]| Point::new(x, y)).collect()).map_err(|e| {
            Error::Schema {
                line,
                message: e.to_string(),
            }
        })
    }
}

/// A ground-truth record with its optional image size.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub points: PointSet,
    pub size: Option<(u32, u32)>,
}

fn read_records<R: BufRead>(reader: R) -> Result<Vec<(usize, AnnotationRecord)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: AnnotationRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((line_no, record));
    }
    Ok(out)
}

pub fn read_ground_truth<R: BufRead>(reader: R) -> Result<Vec<GroundTruth>> {
    read_records(reader)?
        .into_iter()
        .map(|(line, rec)| {
            if rec.confidences.is_some() {
                return Err(Error::Schema {
                    line,
                    message: format!(
                        "ground-truth record `{}` must not carry confidences",
                        rec.image_id
                    ),
                });
            }
            let size = match (rec.width, rec.height) {
                (Some(w), Some(h)) if w > 0 && h > 0 => Some((w, h)),
                (None, None) => None,
                _ => {
                    return Err(Error::Schema {
                        line,
                        message: "width and height must both be positive when given".into(),
                    })
                }
            };
            Ok(GroundTruth {
                points: rec.point_set(line)?,
                image_id: rec.image_id,
                size,
            })
        })
        .collect()
}

pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<(String, ProposalSet)>> {
    read_records(reader)?
        .into_iter()
        .map(|(line, rec)| {
            let schema = |message: String| Error::Schema { line, message };
            let Some(confidences) = &rec.confidences else {
                return Err(schema(format!(
                    "prediction record `{}` is missing confidences",
                    rec.image_id
                )));
            };
            if confidences.len() != rec.points.len() {
                return Err(schema(format!(
                    "{} confidences for {} points",
                    confidences.len(),
                    rec.points.len()
                )));
            }
            if let Some(t) = confidences.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                return Err(schema(format!("confidence {t} outside [0, 1]")));
            }
            let proposals = rec
                .points
                .iter()
                .zip(confidences)
                .map(|(&[x, y], &t)| Proposal::new(Point::new(x, y), t))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| schema(e.to_string()))?;
            let set = ProposalSet::new(proposals).map_err(|e| schema(e.to_string()))?;
            Ok((rec.image_id, set))
        })
        .collect()
}

pub fn parse_ground_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruth>> {
    read_ground_truth(BufReader::new(File::open(path)?))
}

pub fn parse_predictions(path: impl AsRef<Path>) -> Result<Vec<(String, ProposalSet)>> {
    read_predictions(BufReader::new(File::open(path)?))
}

pub fn write_records<W: Write>(mut writer: W, records: &[AnnotationRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub const CONFIG_KEYS: [&str; 17] = [
    "gamma",
    "alpha",
    "epsilon",
    "lambda1",
    "lambda2",
    "lambda3",
    "clamp",
    "threshold",
    "wce_mode",
    "hrc_count_mode",
    "steps",
    "lr_coord",
    "lr_conf",
    "proposal_factor",
    "init",
    "rematch_every",
    "seed",
];

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e: T::Err| Error::Validation {
        key: key.to_string(),
        message: format!("cannot parse `{raw}`: {e}"),
    })
}

/// Parses configuration text; see the module docs for the format.
pub fn parse_config(text: &str) -> Result<(LossConfig, FitConfig)> {
    let mut loss = LossConfig::default();
    let mut fit = FitConfig::default();
    let mut seen = HashSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::Validation {
                key: key.to_string(),
                message: "unknown key".into(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Validation {
                key: key.to_string(),
                message: "key given more than once".into(),
            });
        }
        match key {
            "gamma" => loss.gamma = parse_value(key, value)?,
            "alpha" => loss.alpha = parse_value(key, value)?,
            "epsilon" => loss.epsilon = parse_value(key, value)?,
            "lambda1" => loss.lambda1 = parse_value(key, value)?,
            "lambda2" => loss.lambda2 = parse_value(key, value)?,
            "lambda3" => loss.lambda3 = parse_value(key, value)?,
            "clamp" => loss.confidence_clamp = parse_value(key, value)?,
            "threshold" => loss.count_threshold = parse_value(key, value)?,
            "wce_mode" => loss.wce_mode = parse_value(key, value)?,
            "hrc_count_mode" => loss.hrc_count_mode = parse_value(key, value)?,
            "steps" => fit.steps = parse_value(key, value)?,
            "lr_coord" => fit.lr_coord = parse_value(key, value)?,
            "lr_conf" => fit.lr_conf = parse_value(key, value)?,
            "proposal_factor" => fit.proposal_factor = parse_value(key, value)?,
            "init" => fit.init = parse_value(key, value)?,
            "rematch_every" => fit.rematch_every = parse_value(key, value)?,
            "seed" => fit.seed = parse_value(key, value)?,
            _ => unreachable!("key list checked above"),
        }
    }

    loss.validate()?;
    fit.validate()?;
    Ok((loss, fit))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<(LossConfig, FitConfig)> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_empty_list() {
        assert!(read_ground_truth(&b""[..]).unwrap().is_empty());
        assert!(read_predictions(&b"\n\n"[..]).unwrap().is_empty());
    }

    #[test]
    fn parses_ground_truth_line() {
        let text = br#"{"image_id":"a","points":[[1,2],[3,4]]}"#;
        let gt = read_ground_truth(&text[..]).unwrap();
        assert_eq!(gt.len(), 1);
        assert_eq!(gt[0].image_id, "a");
        assert_eq!(
            gt[0].points.points(),
            &[Point::new(1.0, 2.0), Point::new(3.0, 4.0)]
        );
        assert_eq!(gt[0].size, None);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let mut text = String::new();
        for i in 0..6 {
            text.push_str(&format!("{{\"image_id\":\"{i}\",\"points\":[]}}\n"));
        }
        text.push_str("{\"image_id\": \"bad\", \"points\": [[1,2]\n");
        match read_ground_truth(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ground_truth_rejects_confidences() {
        let text = br#"{"image_id":"a","points":[[1,2]],"confidences":[0.5]}"#;
        assert!(matches!(
            read_ground_truth(&text[..]),
            Err(Error::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn predictions_require_valid_confidences() {
        let missing = br#"{"image_id":"a","points":[[1,2]]}"#;
        assert!(matches!(
            read_predictions(&missing[..]),
            Err(Error::Schema { .. })
        ));
        let out_of_range = br#"{"image_id":"a","points":[[1,2]],"confidences":[1.5]}"#;
        assert!(matches!(
            read_predictions(&out_of_range[..]),
            Err(Error::Schema { .. })
        ));
        let short = br#"{"image_id":"a","points":[[1,2],[3,4]],"confidences":[0.5]}"#;
        assert!(matches!(
            read_predictions(&short[..]),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn unknown_record_fields_are_rejected() {
        let text = br#"{"image_id":"a","pionts":[[1,2]]}"#;
        assert!(matches!(
            read_ground_truth(&text[..]),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn empty_config_gives_defaults() {
        let (loss, fit) = parse_config("").unwrap();
        assert_eq!(loss, LossConfig::default());
        assert_eq!(fit, FitConfig::default());
        assert_eq!(loss.gamma, 0.05);
        assert_eq!(loss.alpha, 0.5);
        assert_eq!(loss.epsilon, 1e-8);
        assert_eq!((loss.lambda1, loss.lambda2, loss.lambda3), (1.0, 1.0, 1.0));
        assert_eq!(loss.count_threshold, 0.5);
    }

    #[test]
    fn config_parses_every_key() {
        let text = "\
# comment
gamma = 0.1
alpha=0.7
epsilon = 1e-6
lambda1 = 2
lambda2 = 0.5
lambda3 = 0.25
clamp = 1e-5
threshold = 0.4
wce_mode = literal
hrc_count_mode = hard
steps = 10
lr_coord = 0.2
lr_conf = 0.01
proposal_factor = 2
init = random
rematch_every = 3
seed = 99   # trailing comment
";
        let (loss, fit) = parse_config(text).unwrap();
        assert_eq!(loss.gamma, 0.1);
        assert_eq!(loss.wce_mode, crate::model::WceMode::Literal);
        assert_eq!(loss.hrc_count_mode, crate::model::HrcCountMode::Hard);
        assert_eq!(fit.steps, 10);
        assert_eq!(fit.init, crate::fit::Init::Random);
        assert_eq!(fit.rematch_every, 3);
        assert_eq!(fit.seed, 99);
    }

    fn failing_key(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Validation { key, .. }) => key,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation_names_the_key() {
        assert_eq!(failing_key("alpha=1.5"), "alpha");
        assert_eq!(failing_key("gammma=0.1"), "gammma");
        assert_eq!(failing_key("steps = many"), "steps");
        assert_eq!(failing_key("gamma = 1\ngamma = 2"), "gamma");
        assert_eq!(failing_key("rematch_every = 0"), "rematch_every");
        assert!(matches!(
            parse_config("just words"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
