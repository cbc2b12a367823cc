//! Synthetic scenes, annotation-noise injectors and density maps.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, with Gaussian draws from `rand_distr::StandardNormal`.
//! Every generator derives its own stream from its seed, so results are
//! reproducible across platforms for a fixed crate version.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::model::{Point, PointSet};

/// Stream salts so that one user seed drives independent generators.
const SCENE_STREAM: u64 = 0x5CE7_E000;
const JITTER_STREAM: u64 = 0x7177_E400;
const DELETE_STREAM: u64 = 0xDE1E_7E00;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: u32,
    pub height: u32,
    pub gt: PointSet,
    pub seed: u64,
}

impl Scene {
    pub fn new(width: u32, height: u32, gt: PointSet, seed: u64) -> Self {
        Self {
            width,
            height,
            gt,
            seed,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x < self.width as f64 && p.y < self.height as f64
    }

    fn clip(&self, p: Point) -> Point {
        clip_to(self.width, self.height, p)
    }
}

fn clip_to(width: u32, height: u32, p: Point) -> Point {
    Point::new(
        p.x.clamp(0.0, (width as f64).next_down()),
        p.y.clamp(0.0, (height as f64).next_down()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform,
    /// Cluster centers drawn uniformly, members scattered around them with
    /// an isotropic Gaussian of standard deviation `spread` pixels.
    Clustered {
        clusters: usize,
        spread: f64,
    },
}

impl Distribution {
    pub fn clustered_default(width: u32, height: u32) -> Self {
        Distribution::Clustered {
            clusters: 5,
            spread: 0.08 * width.min(height) as f64,
        }
    }
}

pub fn generate_scene(
    width: u32,
    height: u32,
    n_points: usize,
    distribution: Distribution,
    seed: u64,
) -> Scene {
    let mut rng = rng_for(seed, SCENE_STREAM);
    let (w, h) = (width as f64, height as f64);
    let points: Vec<Point> = match distribution {
        Distribution::Uniform => (0..n_points)
            .map(|_| Point::new(rng.random::<f64>() * w, rng.random::<f64>() * h))
            .collect(),
        Distribution::Clustered { clusters, spread } => {
            let centers: Vec<Point> = (0..clusters.max(1))
                .map(|_| Point::new(rng.random::<f64>() * w, rng.random::<f64>() * h))
                .collect();
            (0..n_points)
                .map(|_| {
                    let c = centers[rng.random_range(0..centers.len())];
                    let dx: f64 = rng.sample(StandardNormal);
                    let dy: f64 = rng.sample(StandardNormal);
                    Point::new(c.x + spread * dx, c.y + spread * dy)
                })
                .collect()
        }
    };
    let points = points
        .into_iter()
        .map(|p| clip_to(width, height, p))
        .collect();
    Scene::new(width, height, PointSet::new(points).expect("finite"), seed)
}

/// Displaces every point by isotropic Gaussian noise (label noise).
pub fn inject_jitter(scene: &Scene, sigma: f64, seed: u64) -> Scene {
    if sigma == 0.0 {
        return scene.clone();
    }
    let mut rng = rng_for(seed, JITTER_STREAM);
    let points = scene
        .gt
        .iter()
        .map(|p| {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            scene.clip(p.translate(sigma * dx, sigma * dy))
        })
        .collect();
    Scene {
        gt: PointSet::new(points).expect("finite"),
        ..scene.clone()
    }
}

/// Drops each point independently with probability `rate` (missing
/// annotations).
pub fn inject_deletions(scene: &Scene, rate: f64, seed: u64) -> Scene {
    let mut rng = rng_for(seed, DELETE_STREAM);
    let points = scene
        .gt
        .iter()
        .filter(|_| rng.random::<f64>() >= rate)
        .copied()
        .collect();
    Scene {
        gt: PointSet::new(points).expect("finite"),
        ..scene.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    pub width: u32,
    pub height: u32,
    /// Row-major, `height * width` entries.
    pub values: Vec<f64>,
    pub sigma: f64,
}

impl DensityMap {
    pub fn get(&self, col: u32, row: u32) -> f64 {
        self.values[row as usize * self.width as usize + col as usize]
    }
}

/// Half-width of the sampled kernel window in standard deviations.
const KERNEL_RADIUS_SIGMAS: f64 = 5.0;

/// Unit-mass 1-D Gaussian sampled at pixel centers `c + 0.5` around `center`.
/// Returns the first pixel index of the window and the weights.
fn kernel_1d(center: f64, sigma: f64) -> (i64, Vec<f64>) {
    let radius = KERNEL_RADIUS_SIGMAS * sigma;
    let first = (center - radius - 0.5).ceil() as i64;
    let last = (center + radius - 0.5).floor() as i64;
    let mut weights: Vec<f64> = (first..=last)
        .map(|c| {
            let z = (c as f64 + 0.5 - center) / sigma;
            (-0.5 * z * z).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    (first, weights)
}

/// Sums one fixed-sigma Gaussian per point on the pixel grid. Each kernel
/// has unit mass before the image boundary cuts it off.
pub fn render_density_map(scene: &Scene, sigma: f64) -> DensityMap {
    assert!(sigma > 0.0, "sigma must be positive");
    let (w, h) = (scene.width as usize, scene.height as usize);
    let mut values = vec![0.0; w * h];
    for p in scene.gt.iter() {
        let (x0, kx) = kernel_1d(p.x, sigma);
        let (y0, ky) = kernel_1d(p.y, sigma);
        for (dy, wy) in ky.iter().enumerate() {
            let row = y0 + dy as i64;
            if row < 0 || row >= h as i64 {
                continue;
            }
            let base = row as usize * w;
            for (dx, wx) in kx.iter().enumerate() {
                let col = x0 + dx as i64;
                if col < 0 || col >= w as i64 {
                    continue;
                }
                values[base + col as usize] += wy * wx;
            }
        }
    }
    DensityMap {
        width: scene.width,
        height: scene.height,
        values,
        sigma,
    }
}

/// The density-framework count: the sum over the grid.
pub fn integrate_density(map: &DensityMap) -> f64 {
    map.values.iter().sum()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(z / std::f64::consts::SQRT_2))
}

/// Continuous Gaussian mass of a kernel at `p` that falls inside the image.
pub fn retained_kernel_mass(width: u32, height: u32, p: &Point, sigma: f64) -> f64 {
    let along = |c: f64, extent: f64| normal_cdf((extent - c) / sigma) - normal_cdf(-c / sigma);
    along(p.x, width as f64) * along(p.y, height as f64)
}

/// Expected mass lost to boundary truncation, summed over the scene.
pub fn expected_truncated_mass(scene: &Scene, sigma: f64) -> f64 {
    scene
        .gt
        .iter()
        .map(|p| 1.0 - retained_kernel_mass(scene.width, scene.height, p, sigma))
        .sum()
}

/// Point count against density integral for one scene.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityComparison {
    pub point_count: usize,
    pub sigma: f64,
    pub integral: f64,
    pub deficit: f64,
    pub expected_deficit: f64,
}

pub fn compare_density(scene: &Scene, sigma: f64) -> DensityComparison {
    let integral = integrate_density(&render_density_map(scene, sigma));
    let n = scene.gt.len();
    DensityComparison {
        point_count: n,
        sigma,
        integral,
        deficit: n as f64 - integral,
        expected_deficit: expected_truncated_mass(scene, sigma),
    }
}
