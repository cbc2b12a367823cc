use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pointmatch::io::{
    load_config, parse_ground_truth, parse_predictions, write_records, AnnotationRecord,
    GroundTruth,
};
use pointmatch::metrics::evaluate_images;
use pointmatch::synth::compare_density;
use pointmatch::{
    build_cost_matrix, count_from_proposals, evaluate_variant, fit_points, generate_scene,
    hungarian_match, run_ablation, AblationSpec, Distribution, FitConfig, ImageCount, LossConfig,
    LossVariant, NoiseSpec, ProposalSet, Scene,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::{num, Report};
use crate::{Command, Common, DistributionArg, PairedInputs, SizeArgs};

pub(crate) fn run(command: Command) -> Result<String> {
    match command {
        Command::Match { inputs, common } => cmd_match(&inputs, &common),
        Command::Loss {
            inputs,
            variant,
            common,
        } => cmd_loss(&inputs, &variant, &common),
        Command::Eval { inputs, common } => cmd_eval(&inputs, &common),
        Command::Gen {
            out,
            noisy_out,
            scenes,
            width,
            height,
            points,
            distribution,
            clusters,
            spread,
            jitter,
            deletion_rate,
            seed,
        } => {
            let dist = match distribution {
                DistributionArg::Uniform => Distribution::Uniform,
                DistributionArg::Clustered => Distribution::Clustered {
                    clusters,
                    spread: spread.unwrap_or(0.08 * width.min(height) as f64),
                },
            };
            let noise = NoiseSpec {
                jitter_sigma: jitter,
                deletion_rate,
            };
            cmd_gen(
                &out,
                noisy_out.as_deref(),
                scenes,
                (width, height),
                points,
                dist,
                noise,
                seed,
            )
        }
        Command::Fit {
            gt,
            image_id,
            size,
            variant,
            steps,
            every,
            pred_out,
            common,
        } => cmd_fit(
            &gt,
            image_id.as_deref(),
            size,
            &variant,
            steps,
            every,
            pred_out.as_deref(),
            &common,
        ),
        Command::Ablate {
            gt,
            size,
            seeds,
            jitter,
            deletion_rate,
            variants,
            steps,
            common,
        } => {
            let noise = NoiseSpec {
                jitter_sigma: jitter,
                deletion_rate,
            };
            cmd_ablate(gt.as_deref(), size, seeds, noise, &variants, steps, &common)
        }
        Command::Density {
            gt,
            size,
            sigma,
            format,
        } => cmd_density(&gt, size, sigma)?.render(format),
    }
}

fn parse_variant(text: &str) -> Result<LossVariant> {
    text.parse().map_err(|e: String| anyhow!("--variant: {e}"))
}

fn configs(common: &Common) -> Result<(LossConfig, FitConfig)> {
    let (loss, mut fit) = match &common.config {
        Some(path) => {
            load_config(path).with_context(|| format!("loading config {}", path.display()))?
        }
        None => (LossConfig::default(), FitConfig::default()),
    };
    if let Some(seed) = common.seed {
        fit.seed = seed;
    }
    Ok((loss, fit))
}

fn read_gt(path: &Path) -> Result<Vec<GroundTruth>> {
    let mut records =
        parse_ground_truth(path).with_context(|| format!("reading {}", path.display()))?;
    let mut seen = HashSet::new();
    for r in &records {
        if !seen.insert(r.image_id.clone()) {
            bail!("{}: duplicate image_id `{}`", path.display(), r.image_id);
        }
    }
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    Ok(records)
}

/// Ground truth joined with predictions by `image_id`, sorted by id.
fn read_pairs(inputs: &PairedInputs) -> Result<Vec<(GroundTruth, ProposalSet)>> {
    let gt = read_gt(&inputs.gt)?;
    let mut preds = BTreeMap::new();
    for (id, set) in parse_predictions(&inputs.pred)
        .with_context(|| format!("reading {}", inputs.pred.display()))?
    {
        if preds.insert(id.clone(), set).is_some() {
            bail!("{}: duplicate image_id `{id}`", inputs.pred.display());
        }
    }
    let mut pairs = Vec::with_capacity(gt.len());
    for g in gt {
        let pred = preds
            .remove(&g.image_id)
            .ok_or_else(|| anyhow!("image `{}`: no predictions", g.image_id))?;
        pairs.push((g, pred));
    }
    if let Some(id) = preds.keys().next() {
        bail!("image `{id}`: predictions without ground truth");
    }
    Ok(pairs)
}

fn scene_of(record: &GroundTruth, size: SizeArgs, seed: u64) -> Result<Scene> {
    let (width, height) = match (size.width, size.height) {
        (Some(w), Some(h)) => (w, h),
        (None, None) => record.size.ok_or_else(|| {
            anyhow!(
                "image `{}`: no width/height in the record; pass --width and --height",
                record.image_id
            )
        })?,
        _ => bail!("--width and --height must be given together"),
    };
    if width == 0 || height == 0 {
        bail!("image `{}`: image size must be positive", record.image_id);
    }
    Ok(Scene::new(width, height, record.points.clone(), seed))
}

fn cmd_match(inputs: &PairedInputs, common: &Common) -> Result<String> {
    let (loss_cfg, _) = configs(common)?;
    loss_cfg.validate()?;
    let pairs = read_pairs(inputs)?;
    let results = pairs
        .par_iter()
        .map(|(g, pred)| {
            let cost = build_cost_matrix(&g.points, pred, loss_cfg.gamma)
                .and_then(|c| hungarian_match(&c).map(|m| (c, m)))
                .with_context(|| format!("image `{}`", g.image_id))?;
            Ok((g.image_id.as_str(), cost))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(
        vec!["image_id", "gt_index", "proposal_index", "cost"],
        Value::Null,
    );
    let mut images = Vec::new();
    for (id, (cost, matching)) in &results {
        for (i, &j) in matching.assignment().iter().enumerate() {
            report.rows.push(vec![
                id.to_string(),
                i.to_string(),
                j.to_string(),
                num(cost.get(i, j)),
            ]);
        }
        images.push(json!({
            "image_id": id,
            "assignment": matching.assignment(),
            "unmatched": matching.unmatched(),
            "total_cost": cost.assignment_cost(matching.assignment()),
        }));
    }
    report.json = json!({ "images": images });
    report.render(common.format)
}

fn cmd_loss(inputs: &PairedInputs, variant: &str, common: &Common) -> Result<String> {
    let variant = parse_variant(variant)?;
    let (loss_cfg, _) = configs(common)?;
    loss_cfg.validate()?;
    let pairs = read_pairs(inputs)?;
    let results = pairs
        .par_iter()
        .map(|(g, pred)| {
            let report = build_cost_matrix(&g.points, pred, loss_cfg.gamma)
                .and_then(|c| hungarian_match(&c))
                .and_then(|m| evaluate_variant(&g.points, pred, &m, &loss_cfg, variant))
                .with_context(|| format!("image `{}`", g.image_id))?;
            Ok((g, pred.len(), report))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = Report::new(
        vec![
            "image_id",
            "gt_count",
            "proposals",
            "l_reg",
            "l_cls",
            "l_cou",
            "total",
        ],
        Value::Null,
    );
    let mut images = Vec::new();
    for (g, m, r) in &results {
        report.rows.push(vec![
            g.image_id.clone(),
            g.points.len().to_string(),
            m.to_string(),
            num(r.l_reg),
            num(r.l_cls),
            num(r.l_cou),
            num(r.total),
        ]);
        images.push(json!({
            "image_id": g.image_id,
            "gt_count": g.points.len(),
            "proposals": m,
            "l_reg": r.l_reg,
            "l_cls": r.l_cls,
            "l_cou": r.l_cou,
            "total": r.total,
        }));
    }
    report.json = json!({ "variant": variant.to_string(), "images": images });
    report.render(common.format)
}

fn cmd_eval(inputs: &PairedInputs, common: &Common) -> Result<String> {
    let (loss_cfg, _) = configs(common)?;
    loss_cfg.validate()?;
    let pairs = read_pairs(inputs)?;
    let per_image: Vec<ImageCount> = pairs
        .par_iter()
        .map(|(g, pred)| ImageCount {
            image_id: g.image_id.clone(),
            gt_count: g.points.len(),
            pred_count: count_from_proposals(pred, loss_cfg.count_threshold),
        })
        .collect();
    let result = evaluate_images(per_image)?;

    let mut report = Report::new(
        vec!["image_id", "gt_count", "pred_count", "abs_error"],
        serde_json::to_value(&result)?,
    );
    for c in &result.per_image {
        report.rows.push(vec![
            c.image_id.clone(),
            c.gt_count.to_string(),
            c.pred_count.to_string(),
            c.gt_count.abs_diff(c.pred_count).to_string(),
        ]);
    }
    report
        .summary
        .push(format!("MAE={}, MSE={}", num(result.mae), num(result.mse)));
    report.render(common.format)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    out: &Path,
    noisy_out: Option<&Path>,
    scenes: usize,
    (width, height): (u32, u32),
    points: usize,
    dist: Distribution,
    noise: NoiseSpec,
    seed: u64,
) -> Result<String> {
    if width == 0 || height == 0 {
        bail!("image size must be positive");
    }
    if !(noise.jitter_sigma >= 0.0 && noise.jitter_sigma.is_finite()) {
        bail!("--jitter must be a finite non-negative number");
    }
    if !(0.0..=1.0).contains(&noise.deletion_rate) {
        bail!("--deletion-rate must lie in [0, 1]");
    }
    let width_digits = scenes.saturating_sub(1).to_string().len().max(3);
    let mut clean = Vec::with_capacity(scenes);
    let mut noisy = Vec::with_capacity(scenes);
    let mut report = Report::new(
        vec!["image_id", "width", "height", "points", "noisy_points"],
        Value::Null,
    );
    let mut images = Vec::new();
    for k in 0..scenes {
        let id = format!("scene-{k:0width_digits$}");
        let scene_seed = seed.wrapping_add(k as u64);
        let scene = generate_scene(width, height, points, dist, scene_seed);
        let dirty = noise.apply(&scene, scene_seed);
        report.rows.push(vec![
            id.clone(),
            width.to_string(),
            height.to_string(),
            scene.gt.len().to_string(),
            dirty.gt.len().to_string(),
        ]);
        images.push(json!({
            "image_id": id,
            "width": width,
            "height": height,
            "points": scene.gt.len(),
            "noisy_points": dirty.gt.len(),
        }));
        clean.push(AnnotationRecord::scene(id.clone(), &scene));
        noisy.push(AnnotationRecord::scene(id, &dirty));
    }
    write_file(out, &clean)?;
    if let Some(path) = noisy_out {
        write_file(path, &noisy)?;
    }
    report.json = json!({ "images": images });
    report.render(Default::default())
}

fn write_file(path: &Path, records: &[AnnotationRecord]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_records(BufWriter::new(file), records)
        .with_context(|| format!("writing {}", path.display()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    gt: &Path,
    image_id: Option<&str>,
    size: SizeArgs,
    variant: &str,
    steps: Option<usize>,
    every: usize,
    pred_out: Option<&Path>,
    common: &Common,
) -> Result<String> {
    if every == 0 {
        bail!("--every must be positive");
    }
    let (loss_cfg, mut fit_cfg) = configs(common)?;
    fit_cfg.variant = parse_variant(variant)?;
    if let Some(s) = steps {
        fit_cfg.steps = s;
    }
    let records = read_gt(gt)?;
    let record = match image_id {
        Some(id) => records
            .iter()
            .find(|r| r.image_id == id)
            .ok_or_else(|| anyhow!("image `{id}` not found in {}", gt.display()))?,
        None => records
            .first()
            .ok_or_else(|| anyhow!("{} has no records", gt.display()))?,
    };
    let scene = scene_of(record, size, fit_cfg.seed)?;
    let trace = fit_points(&scene, &loss_cfg, &fit_cfg)
        .with_context(|| format!("image `{}`", record.image_id))?;

    if let Some(path) = pred_out {
        write_file(
            path,
            &[AnnotationRecord::prediction(
                record.image_id.clone(),
                &trace.final_proposals,
            )],
        )?;
    }

    let last = trace.records.len() - 1;
    let shown: Vec<_> = trace
        .records
        .iter()
        .enumerate()
        .filter(|&(k, r)| r.step % every == 0 || k == last)
        .map(|(_, r)| r)
        .collect();
    let mut report = Report::new(
        vec![
            "step",
            "total",
            "l_reg",
            "l_cls",
            "l_cou",
            "mean_distance",
            "count",
        ],
        json!({
            "image_id": record.image_id,
            "gt_count": record.points.len(),
            "variant": fit_cfg.variant.to_string(),
            "records": shown,
        }),
    );
    for r in shown {
        report.rows.push(vec![
            r.step.to_string(),
            num(r.total),
            num(r.l_reg),
            num(r.l_cls),
            num(r.l_cou),
            num(r.mean_distance),
            r.count.to_string(),
        ]);
    }
    report.render(common.format)
}

fn default_suite() -> Vec<Scene> {
    (0..10u64)
        .map(|k| {
            let dist = if k % 2 == 0 {
                Distribution::Uniform
            } else {
                Distribution::clustered_default(256, 256)
            };
            generate_scene(256, 256, 50, dist, k)
        })
        .collect()
}

fn cmd_ablate(
    gt: Option<&Path>,
    size: SizeArgs,
    seeds: u64,
    noise: NoiseSpec,
    variants: &[String],
    steps: Option<usize>,
    common: &Common,
) -> Result<String> {
    let (loss_cfg, mut fit_cfg) = configs(common)?;
    if let Some(s) = steps {
        fit_cfg.steps = s;
    }
    let scenes = match gt {
        Some(path) => read_gt(path)?
            .iter()
            .map(|r| scene_of(r, size, 0))
            .collect::<Result<Vec<_>>>()?,
        None => default_suite(),
    };
    let variants = if variants.is_empty() {
        LossVariant::ablation_grid()
    } else {
        variants
            .iter()
            .map(|v| parse_variant(v))
            .collect::<Result<Vec<_>>>()?
    };
    let spec = AblationSpec {
        scenes,
        noise,
        seeds: (0..seeds).map(|s| fit_cfg.seed.wrapping_add(s)).collect(),
        variants,
    };
    let result = run_ablation(&spec, &loss_cfg, &fit_cfg)?;

    let mut report = Report::new(
        vec!["id", "variant", "mae", "mse", "fits"],
        json!({
            "scenes": spec.scenes.len(),
            "seeds": spec.seeds.len(),
            "noise": spec.noise,
            "rows": result.rows,
        }),
    );
    for r in &result.rows {
        report.rows.push(vec![
            r.id.to_string(),
            r.variant.clone(),
            num(r.mae),
            num(r.mse),
            r.fits.to_string(),
        ]);
    }
    report.render(common.format)
}

fn cmd_density(gt: &Path, size: SizeArgs, sigma: f64) -> Result<Report> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        bail!("--sigma must be a positive finite number");
    }
    let scenes = read_gt(gt)?
        .iter()
        .map(|r| Ok((r.image_id.clone(), scene_of(r, size, 0)?)))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<_> = scenes
        .par_iter()
        .map(|(id, scene)| (id, compare_density(scene, sigma)))
        .collect();

    let mut report = Report::new(
        vec![
            "image_id",
            "point_count",
            "sigma",
            "integral",
            "deficit",
            "expected_deficit",
        ],
        Value::Null,
    );
    let mut images = Vec::new();
    for (id, c) in &rows {
        report.rows.push(vec![
            id.to_string(),
            c.point_count.to_string(),
            num(c.sigma),
            num(c.integral),
            num(c.deficit),
            num(c.expected_deficit),
        ]);
        let mut entry = serde_json::to_value(c)?;
        entry["image_id"] = json!(id);
        images.push(entry);
    }
    report.json = json!({ "images": images });
    Ok(report)
}
