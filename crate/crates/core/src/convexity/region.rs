//! Regions: a membership oracle with boundary tolerance plus a seeded sampler.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::distance_to_geodesic;
use crate::error::{Error, Result};
use crate::io::read_points;
use crate::manifold::vector::{dot, lin, norm, scale};
use crate::manifold::{Manifold, ManifoldKind, Point, TangentVec};

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-7;

/// Rejection-sampling attempts per requested sample.
const MAX_REJECTIONS: usize = 10_000;

pub type Oracle = dyn Fn(&Manifold, &Point, f64) -> bool + Send + Sync;
pub type Sampler = dyn Fn(&Manifold, &mut ChaCha8Rng) -> Result<Point> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Ball,
    Cap,
    Hemisphere,
    Halfspace,
    FiniteSet,
    Union,
    Intersection,
    Custom,
}

#[derive(Clone)]
pub struct CustomShape {
    pub name: String,
    pub oracle: Arc<Oracle>,
    pub sampler: Arc<Sampler>,
}

#[derive(Clone)]
pub enum Shape {
    /// Closed geodesic ball.
    Ball {
        center: Point,
        radius: f64,
    },
    /// Geodesic ball on a sphere.
    Cap {
        center: Point,
        radius: f64,
    },
    /// `⟨pole, x⟩ ≥ 0` in ambient coordinates.
    Hemisphere {
        pole: Point,
    },
    /// `⟨normal, x⟩ ≤ offset` in ambient coordinates.
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    FiniteSet(Vec<Point>),
    Union(Vec<Shape>),
    Intersection(Vec<Shape>),
    Custom(CustomShape),
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Ball { center, radius } => write!(f, "ball({:?}, {radius})", center.coords()),
            Shape::Cap { center, radius } => write!(f, "cap({:?}, {radius})", center.coords()),
            Shape::Hemisphere { pole } => write!(f, "hemisphere({:?})", pole.coords()),
            Shape::Halfspace { normal, offset } => write!(f, "halfspace({normal:?}, {offset})"),
            Shape::FiniteSet(pts) => write!(f, "points[{}]", pts.len()),
            Shape::Union(c) => f.debug_tuple("union").field(c).finish(),
            Shape::Intersection(c) => f.debug_tuple("intersect").field(c).finish(),
            Shape::Custom(c) => write!(f, "custom({})", c.name),
        }
    }
}

impl Shape {
    pub fn kind(&self) -> RegionKind {
        match self {
            Shape::Ball { .. } => RegionKind::Ball,
            Shape::Cap { .. } => RegionKind::Cap,
            Shape::Hemisphere { .. } => RegionKind::Hemisphere,
            Shape::Halfspace { .. } => RegionKind::Halfspace,
            Shape::FiniteSet(_) => RegionKind::FiniteSet,
            Shape::Union(_) => RegionKind::Union,
            Shape::Intersection(_) => RegionKind::Intersection,
            Shape::Custom(_) => RegionKind::Custom,
        }
    }

    fn contains(&self, m: &Manifold, x: &Point, tol: f64) -> bool {
        match self {
            Shape::Ball { center, radius } | Shape::Cap { center, radius } => {
                m.dist(center, x).is_ok_and(|d| d <= radius + tol)
            }
            Shape::Hemisphere { pole } => {
                dot(pole.coords(), x.coords()) >= -tol * norm(pole.coords())
            }
            Shape::Halfspace { normal, offset } => {
                dot(normal, x.coords()) <= offset + tol * norm(normal)
            }
            Shape::FiniteSet(pts) => pts.iter().any(|p| m.coord_distance(p, x) <= tol),
            Shape::Union(children) => children.iter().any(|c| c.contains(m, x, tol)),
            Shape::Intersection(children) => children.iter().all(|c| c.contains(m, x, tol)),
            Shape::Custom(c) => (c.oracle)(m, x, tol),
        }
    }

    fn sample(&self, m: &Manifold, rng: &mut ChaCha8Rng, tol: f64) -> Result<Point> {
        match self {
            Shape::Ball { center, radius } | Shape::Cap { center, radius } => {
                let u: f64 = rng.random();
                let r = radius * u.powf(1.0 / m.dim() as f64);
                let dir = m.random_direction(rng, center);
                m.exp_map(&TangentVec::new(center.clone(), scale(&dir, r)))
            }
            Shape::Hemisphere { pole } if m.kind() == ManifoldKind::Sphere => loop {
                let x = m.random_point(rng, 1.0)?;
                let s = dot(pole.coords(), x.coords());
                if s > 0.0 {
                    return Ok(x);
                }
                if s < 0.0 {
                    return Ok(Point::new(scale(x.coords(), -1.0)));
                }
            },
            Shape::Halfspace { normal, offset } if m.kind() == ManifoldKind::Euclidean => {
                let x = m.random_point(rng, 1.0 + offset.abs())?;
                let excess = dot(normal, x.coords()) - offset;
                if excess <= 0.0 {
                    return Ok(x);
                }
                let nn = dot(normal, normal);
                Ok(Point::new(lin(1.0, x.coords(), -2.0 * excess / nn, normal)))
            }
            Shape::Hemisphere { .. } | Shape::Halfspace { .. } => {
                for _ in 0..MAX_REJECTIONS {
                    let x = m.random_point(rng, 1.0)?;
                    if self.contains(m, &x, 0.0) {
                        return Ok(x);
                    }
                }
                Err(Error::SamplerExhausted {
                    attempts: MAX_REJECTIONS,
                    reason: format!("rejection sampling {:?}", self.kind()),
                })
            }
            Shape::FiniteSet(pts) => {
                if pts.is_empty() {
                    return Err(Error::SamplerExhausted {
                        attempts: 0,
                        reason: "empty point set".into(),
                    });
                }
                Ok(pts[rng.random_range(0..pts.len())].clone())
            }
            Shape::Union(children) => {
                if children.is_empty() {
                    return Err(Error::SamplerExhausted {
                        attempts: 0,
                        reason: "empty union".into(),
                    });
                }
                let i = rng.random_range(0..children.len());
                children[i].sample(m, rng, tol)
            }
            Shape::Intersection(children) => {
                let (first, _) = children
                    .split_first()
                    .ok_or_else(|| Error::SamplerExhausted {
                        attempts: 0,
                        reason: "empty intersection".into(),
                    })?;
                for _ in 0..MAX_REJECTIONS {
                    let x = first.sample(m, rng, tol)?;
                    if self.contains(m, &x, tol) {
                        return Ok(x);
                    }
                }
                Err(Error::SamplerExhausted {
                    attempts: MAX_REJECTIONS,
                    reason: "intersection rejection sampling".into(),
                })
            }
            Shape::Custom(c) => (c.sampler)(m, rng),
        }
    }
}

/// A subset of a manifold, known through its membership oracle and sampler.
#[derive(Clone)]
pub struct Region {
    manifold: Manifold,
    shape: Shape,
    tolerance: f64,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Region({:?} on {}, δ={})",
            self.shape, self.manifold, self.tolerance
        )
    }
}

impl Region {
    pub fn new(manifold: Manifold, shape: Shape) -> Self {
        Self {
            manifold,
            shape,
            tolerance: DEFAULT_BOUNDARY_TOL,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn kind(&self) -> RegionKind {
        self.shape.kind()
    }

    /// Membership; points within the boundary tolerance count as members.
    pub fn contains(&self, x: &Point) -> bool {
        self.manifold.validate(x).is_ok() && self.shape.contains(&self.manifold, x, self.tolerance)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Point> {
        self.shape.sample(&self.manifold, rng, self.tolerance)
    }

    pub fn ball(m: &Manifold, center: Point, radius: f64) -> Result<Self> {
        m.validate(&center)?;
        Ok(Self::new(m.clone(), Shape::Ball { center, radius }))
    }

    pub fn cap(m: &Manifold, center: Point, radius: f64) -> Result<Self> {
        if m.kind() != ManifoldKind::Sphere {
            return Err(Error::Parse(format!("cap requires a sphere, not {m}")));
        }
        m.validate(&center)?;
        Ok(Self::new(m.clone(), Shape::Cap { center, radius }))
    }

    pub fn hemisphere(m: &Manifold, pole: Point) -> Result<Self> {
        m.validate(&pole)?;
        Ok(Self::new(m.clone(), Shape::Hemisphere { pole }))
    }

    pub fn halfspace(m: &Manifold, normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.len() != m.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: m.ambient_dim(),
                got: normal.len(),
            });
        }
        Ok(Self::new(m.clone(), Shape::Halfspace { normal, offset }))
    }

    pub fn finite_set(m: &Manifold, points: Vec<Point>) -> Result<Self> {
        for p in &points {
            m.validate(p)?;
        }
        Ok(Self::new(m.clone(), Shape::FiniteSet(points)))
    }

    pub fn union(parts: Vec<Region>) -> Result<Self> {
        Self::combine(parts, Shape::Union)
    }

    pub fn intersection(parts: Vec<Region>) -> Result<Self> {
        Self::combine(parts, Shape::Intersection)
    }

    fn combine(parts: Vec<Region>, wrap: fn(Vec<Shape>) -> Shape) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Parse("union/intersection needs at least one region".into()))?;
        let manifold = first.manifold.clone();
        let tolerance = first.tolerance;
        let spec = manifold.to_string();
        let mut shapes = Vec::with_capacity(parts.len());
        for r in parts {
            if r.manifold.to_string() != spec {
                return Err(Error::Parse(format!(
                    "cannot combine regions on {spec} and {}",
                    r.manifold
                )));
            }
            shapes.push(r.shape);
        }
        Ok(Self {
            manifold,
            shape: wrap(shapes),
            tolerance,
        })
    }

    /// The minimizing geodesic arc between `a` and `b`.
    pub fn geodesic_arc(m: &Manifold, a: Point, b: Point) -> Result<Self> {
        let seg = m.geodesic(&a, &b)?;
        let oracle_seg = seg.clone();
        let oracle = move |_: &Manifold, x: &Point, tol: f64| {
            distance_to_geodesic(&oracle_seg, x, 65).is_ok_and(|d| d <= tol)
        };
        let sampler = move |_: &Manifold, rng: &mut ChaCha8Rng| seg.at(rng.random::<f64>());
        Ok(Self::new(
            m.clone(),
            Shape::Custom(CustomShape {
                name: "geodesic_arc".into(),
                oracle: Arc::new(oracle),
                sampler: Arc::new(sampler),
            }),
        ))
    }

    pub fn custom<O, S>(m: &Manifold, name: &str, oracle: O, sampler: S) -> Self
    where
        O: Fn(&Manifold, &Point, f64) -> bool + Send + Sync + 'static,
        S: Fn(&Manifold, &mut ChaCha8Rng) -> Result<Point> + Send + Sync + 'static,
    {
        Self::new(
            m.clone(),
            Shape::Custom(CustomShape {
                name: name.into(),
                oracle: Arc::new(oracle),
                sampler: Arc::new(sampler),
            }),
        )
    }

    /// Parses the region mini-language:
    /// `ball <center> <radius>`, `cap <center> <radius>`, `hemisphere <pole>`,
    /// `halfspace <normal> <offset>`, `points <file>`, `union(a, b, ...)`,
    /// `intersect(a, b, ...)`. Relative point files resolve against `base_dir`.
    pub fn parse(spec: &str, m: &Manifold, base_dir: Option<&Path>) -> Result<Self> {
        let spec = spec.trim();
        for (head, combine) in [
            ("union", Region::union as fn(Vec<Region>) -> Result<Region>),
            ("intersect", Region::intersection),
        ] {
            if let Some(rest) = spec.strip_prefix(head) {
                let inner = rest
                    .trim()
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("`{head}` expects `{head}(...)`")))?;
                let parts = split_top_level(inner)?
                    .into_iter()
                    .map(|p| Region::parse(p, m, base_dir))
                    .collect::<Result<Vec<_>>>()?;
                return combine(parts);
            }
        }

        let mut tokens = spec.split_whitespace();
        let head = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty region spec".into()))?;
        let rest: Vec<&str> = tokens.collect();
        let n = m.ambient_dim();
        let numbers = |want: usize| -> Result<Vec<f64>> {
            if rest.len() != want {
                return Err(Error::Parse(format!(
                    "`{head}` on {m} takes {want} numbers, got {}",
                    rest.len()
                )));
            }
            rest.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number `{t}` in `{spec}`")))
                })
                .collect()
        };
        match head {
            "ball" | "cap" => {
                let mut v = numbers(n + 1)?;
                let radius = v.pop().expect("n + 1 numbers");
                let center = m.point(v)?;
                if head == "ball" {
                    Region::ball(m, center, radius)
                } else {
                    Region::cap(m, center, radius)
                }
            }
            "hemisphere" => Region::hemisphere(m, m.point(numbers(n)?)?),
            "halfspace" => {
                let mut v = numbers(n + 1)?;
                let offset = v.pop().expect("n + 1 numbers");
                Region::halfspace(m, v, offset)
            }
            "points" => {
                let [file] = rest[..] else {
                    return Err(Error::Parse("`points` takes a single file path".into()));
                };
                let path = match base_dir {
                    Some(dir) => dir.join(file),
                    None => Path::new(file).to_path_buf(),
                };
                Region::finite_set(m, read_points(&path)?)
            }
            other => Err(Error::Parse(format!("unknown region kind `{other}`"))),
        }
    }
}

fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

/// A Gaussian tangent perturbation of `p` with the given spread.
pub fn jitter(m: &Manifold, rng: &mut ChaCha8Rng, p: &Point, spread: f64) -> Result<Point> {
    let dir = m.random_direction(rng, p);
    let r: f64 = spread * rng.sample::<f64, _>(StandardNormal);
    m.exp_map(&TangentVec::new(p.clone(), scale(&dir, r)))
}
