//! Procedural labeled scenes built from simple primitives.
//!
//! A [`Recipe`] lists primitives with a class id, an extent, a sampling
//! density (points per m² for surfaces, per m³ for volumes) and an optional
//! horizontal placement jitter. Point counts are `round(density * measure)`,
//! so class proportions only depend on the recipe. Every coordinate gets
//! Gaussian noise truncated at 3 sigma. Recipes can be written as TOML:
//!
//! ```toml
//! name = "demo"
//! noise_sigma = 0.01
//!
//! [[primitives]]
//! kind = "plane"
//! class = 1
//! center = [0.0, 0.0, 0.0]
//! size = [10.0, 10.0]
//! density = 100.0
//! ```

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::{ClassId, PointCloud};
use crate::geometry::Point3;
use crate::seed::{self, STREAM_SCENE};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    /// Horizontal rectangle centered at `center`.
    Plane {
        class: ClassId,
        center: [f64; 3],
        size: [f64; 2],
        density: f64,
        #[serde(default)]
        jitter: [f64; 2],
    },
    /// Vertical rectangle from `start` to `end` (xy), spanning `z0..z0+height`.
    Wall {
        class: ClassId,
        start: [f64; 2],
        end: [f64; 2],
        z0: f64,
        height: f64,
        density: f64,
        #[serde(default)]
        jitter: [f64; 2],
    },
    /// Axis-aligned box resting on `base` (bottom-center); the bottom face is
    /// not sampled.
    Box {
        class: ClassId,
        base: [f64; 3],
        size: [f64; 3],
        density: f64,
        #[serde(default)]
        jitter: [f64; 2],
    },
    /// Lateral surface of a vertical cylinder.
    Pole {
        class: ClassId,
        base: [f64; 3],
        radius: f64,
        height: f64,
        density: f64,
        #[serde(default)]
        jitter: [f64; 2],
    },
    /// Solid ball sampled uniformly in volume.
    Blob {
        class: ClassId,
        center: [f64; 3],
        radius: f64,
        density: f64,
        #[serde(default)]
        jitter: [f64; 2],
    },
    /// `count` points uniform in an axis-aligned box.
    Scatter {
        class: ClassId,
        min: [f64; 3],
        max: [f64; 3],
        count: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub name: String,
    pub noise_sigma: f64,
    pub primitives: Vec<Primitive>,
}

impl Recipe {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("recipe: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("recipe serializes")
    }

    /// A built-in recipe name, or a path to a TOML recipe file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match name_or_path {
            "street-v1" => Ok(Self::street_v1()),
            path => {
                let p = Path::new(path);
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Self::from_toml(&text)
            }
        }
    }

    /// Catalog of [`Recipe::street_v1`].
    pub fn street_v1_catalog() -> crate::cloud::ClassCatalog {
        crate::cloud::ClassCatalog::parse(
            "0:unclassified,1:ground,2:facade,3:car,4:pole,5:foliage,6:pedestrian",
            0,
        )
        .expect("static catalog")
    }

    /// A 60 m x 16 m street, about 2e5 points in six classes: ground (1),
    /// facades (2), parked cars (3), poles (4), tree foliage (5) and
    /// pedestrians (6), plus unclassified clutter (0). Object positions
    /// jitter with the seed.
    pub fn street_v1() -> Self {
        let mut p = vec![
            Primitive::Plane {
                class: 1,
                center: [30.0, 0.0, 0.0],
                size: [60.0, 16.0],
                density: 80.0,
                jitter: [0.0, 0.0],
            },
            Primitive::Wall {
                class: 2,
                start: [0.0, 8.0],
                end: [60.0, 8.0],
                z0: 0.0,
                height: 10.0,
                density: 40.0,
                jitter: [0.0, 0.0],
            },
            Primitive::Wall {
                class: 2,
                start: [0.0, -8.0],
                end: [60.0, -8.0],
                z0: 0.0,
                height: 10.0,
                density: 40.0,
                jitter: [0.0, 0.0],
            },
        ];
        for side in [1.0, -1.0] {
            for x in [6.0, 18.0, 30.0, 42.0, 54.0] {
                p.push(Primitive::Box {
                    class: 3,
                    base: [x, side * 4.0, 0.0],
                    size: [4.2, 1.8, 1.5],
                    density: 150.0,
                    jitter: [3.0, 0.3],
                });
            }
        }
        let poles_pos = [3.0, 19.0, 35.0, 51.0];
        let poles_neg = [11.0, 27.0, 43.0, 59.0];
        for (side, xs) in [(1.0, poles_pos), (-1.0, poles_neg)] {
            for x in xs {
                p.push(Primitive::Pole {
                    class: 4,
                    base: [x, side * 6.5, 0.0],
                    radius: 0.08,
                    height: 7.0,
                    density: 400.0,
                    jitter: [2.0, 0.2],
                });
            }
        }
        for (side, xs) in [(1.0, [11.0, 27.0, 43.0]), (-1.0, [3.0, 19.0, 35.0])] {
            for x in xs {
                p.push(Primitive::Blob {
                    class: 5,
                    center: [x, side * 6.0, 4.5],
                    radius: 1.6,
                    density: 200.0,
                    jitter: [2.0, 0.2],
                });
            }
        }
        for side in [1.0, -1.0] {
            for x in [7.0, 19.0, 31.0, 43.0, 55.0] {
                p.push(Primitive::Pole {
                    class: 6,
                    base: [x, side * 5.2, 0.0],
                    radius: 0.25,
                    height: 1.75,
                    density: 300.0,
                    jitter: [2.0, 0.3],
                });
            }
        }
        p.push(Primitive::Scatter {
            class: 0,
            min: [0.0, -8.0, 0.0],
            max: [60.0, 8.0, 10.0],
            count: 2000,
        });
        Self {
            name: "street-v1".into(),
            noise_sigma: 0.01,
            primitives: p,
        }
    }
}

fn count(density: f64, measure: f64) -> usize {
    (density * measure).round().max(0.0) as usize
}

fn offset(rng: &mut impl Rng, jitter: [f64; 2]) -> (f64, f64) {
    let j = |rng: &mut dyn rand::RngCore, a: f64| if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 };
    (j(rng, jitter[0]), j(rng, jitter[1]))
}

fn truncated_noise(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    loop {
        let v: f64 = StandardNormal.sample(rng);
        if v.abs() <= 3.0 {
            return v * sigma;
        }
    }
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("recipe: {what} must be positive, got {v}")))
    }
}

/// Samples every primitive of `recipe`; deterministic for a given seed.
pub fn generate_synthetic_scene(recipe: &Recipe, seed: u64) -> Result<PointCloud<f64>> {
    if recipe.primitives.is_empty() {
        return Err(Error::param("recipe has no primitives"));
    }
    if !(recipe.noise_sigma >= 0.0 && recipe.noise_sigma.is_finite()) {
        return Err(Error::param("recipe: noise_sigma must be >= 0"));
    }
    let mut rng = seed::rng(seed::derive(seed, STREAM_SCENE));
    let mut pts: Vec<Point3<f64>> = Vec::new();
    let mut labels: Vec<ClassId> = Vec::new();

    for prim in &recipe.primitives {
        let start = pts.len();
        let class = match *prim {
            Primitive::Plane {
                class,
                center,
                size,
                density,
                jitter,
            } => {
                check_positive("plane size", size[0].min(size[1]))?;
                let (dx, dy) = offset(&mut rng, jitter);
                for _ in 0..count(density, size[0] * size[1]) {
                    let x = center[0] + dx + rng.random_range(-0.5..0.5) * size[0];
                    let y = center[1] + dy + rng.random_range(-0.5..0.5) * size[1];
                    pts.push(Point3::new(x, y, center[2]));
                }
                class
            }
            Primitive::Wall {
                class,
                start: a,
                end: b,
                z0,
                height,
                density,
                jitter,
            } => {
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                check_positive("wall length", len)?;
                check_positive("wall height", height)?;
                let (dx, dy) = offset(&mut rng, jitter);
                for _ in 0..count(density, len * height) {
                    let t: f64 = rng.random_range(0.0..1.0);
                    let z = z0 + rng.random_range(0.0..height);
                    pts.push(Point3::new(a[0] + t * (b[0] - a[0]) + dx, a[1] + t * (b[1] - a[1]) + dy, z));
                }
                class
            }
            Primitive::Box {
                class,
                base,
                size,
                density,
                jitter,
            } => {
                check_positive("box size", size[0].min(size[1]).min(size[2]))?;
                let (dx, dy) = offset(&mut rng, jitter);
                let [sx, sy, sz] = size;
                let (cx, cy, z0) = (base[0] + dx, base[1] + dy, base[2]);
                // top, then the four sides
                for _ in 0..count(density, sx * sy) {
                    let x = cx + rng.random_range(-0.5..0.5) * sx;
                    let y = cy + rng.random_range(-0.5..0.5) * sy;
                    pts.push(Point3::new(x, y, z0 + sz));
                }
                for sign in [-0.5, 0.5] {
                    for _ in 0..count(density, sx * sz) {
                        let x = cx + rng.random_range(-0.5..0.5) * sx;
                        pts.push(Point3::new(x, cy + sign * sy, z0 + rng.random_range(0.0..sz)));
                    }
                    for _ in 0..count(density, sy * sz) {
                        let y = cy + rng.random_range(-0.5..0.5) * sy;
                        pts.push(Point3::new(cx + sign * sx, y, z0 + rng.random_range(0.0..sz)));
                    }
                }
                class
            }
            Primitive::Pole {
                class,
                base,
                radius,
                height,
                density,
                jitter,
            } => {
                check_positive("pole radius", radius)?;
                check_positive("pole height", height)?;
                let (dx, dy) = offset(&mut rng, jitter);
                for _ in 0..count(density, TAU * radius * height) {
                    let a = rng.random_range(0.0..TAU);
                    let z = base[2] + rng.random_range(0.0..height);
                    pts.push(Point3::new(base[0] + dx + radius * a.cos(), base[1] + dy + radius * a.sin(), z));
                }
                class
            }
            Primitive::Blob {
                class,
                center,
                radius,
                density,
                jitter,
            } => {
                check_positive("blob radius", radius)?;
                let (dx, dy) = offset(&mut rng, jitter);
                let c = Point3::new(center[0] + dx, center[1] + dy, center[2]);
                let n = count(density, 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3));
                while pts.len() - start < n {
                    let d = Point3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                    if d.norm_squared() <= 1.0 {
                        pts.push(c + d * radius);
                    }
                }
                class
            }
            Primitive::Scatter { class, min, max, count } => {
                for k in 0..3 {
                    check_positive("scatter extent", max[k] - min[k])?;
                }
                for _ in 0..count {
                    pts.push(Point3::new(
                        rng.random_range(min[0]..max[0]),
                        rng.random_range(min[1]..max[1]),
                        rng.random_range(min[2]..max[2]),
                    ));
                }
                class
            }
        };
        labels.resize(pts.len(), class);
    }

    let sigma = recipe.noise_sigma;
    for p in &mut pts {
        p.x += truncated_noise(&mut rng, sigma);
        p.y += truncated_noise(&mut rng, sigma);
        p.z += truncated_noise(&mut rng, sigma);
    }
    PointCloud::new(pts, None, Some(labels))
}
