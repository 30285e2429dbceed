//! Points, tangent vectors, distances and minimizing geodesics.
//!
//! Euclidean space, the unit sphere and hyperbolic space (hyperboloid model)
//! use closed forms. Chart manifolds integrate the geodesic equation of a
//! coordinate metric and recover the logarithm by shooting.

mod chart;
pub mod vector;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use chart::{Chart, ChartConfig, ChartMetric, MetricFn};

use crate::error::{Error, Result};
use vector::{dot, lin, max_abs_diff, minkowski, norm, scale, sinc, sinhc, sub};

/// Antipodal pairs closer than this to π are treated as cut-locus pairs.
pub const CUT_LOCUS_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Wraps raw coordinates without checking them against any manifold.
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point(v.to_vec())
    }
}

/// A tangent vector in ambient (or chart) coordinates, attached to `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVec {
    pub base: Point,
    pub vec: Vec<f64>,
}

impl TangentVec {
    pub fn new(base: Point, vec: Vec<f64>) -> Self {
        Self { base, vec }
    }

    pub fn zero(base: Point) -> Self {
        let n = base.len();
        Self {
            base,
            vec: vec![0.0; n],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            vec: scale(&self.vec, s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Point-validity and tangency tolerance.
    pub point: f64,
    /// Accuracy expected of integrated chart results.
    pub chart: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            point: 1e-9,
            chart: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    Chart,
}

/// A manifold model together with its tolerances.
#[derive(Clone)]
pub struct Manifold {
    kind: ManifoldKind,
    dim: usize,
    tol: Tolerances,
    chart: Option<Arc<Chart>>,
}

impl fmt::Debug for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Manifold({self})")
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ManifoldKind::Euclidean => write!(f, "euclidean:{}", self.dim),
            ManifoldKind::Sphere => write!(f, "sphere:{}", self.dim),
            ManifoldKind::Hyperbolic => write!(f, "hyperbolic:{}", self.dim),
            ManifoldKind::Chart => write!(f, "chart:{}", self.chart_ref().name()),
        }
    }
}

impl FromStr for Manifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("manifold spec `{s}` lacks `kind:arg`")))?;
        let dim = || {
            arg.parse::<usize>()
                .ok()
                .filter(|d| *d >= 1)
                .ok_or_else(|| Error::Parse(format!("bad dimension in `{s}`")))
        };
        match kind {
            "euclidean" => Ok(Manifold::euclidean(dim()?)),
            "sphere" => Ok(Manifold::sphere(dim()?)),
            "hyperbolic" => Ok(Manifold::hyperbolic(dim()?)),
            "chart" if arg == "sphere2" => Ok(Manifold::chart_sphere2()),
            _ => Err(Error::Parse(format!("unknown manifold spec `{s}`"))),
        }
    }
}

impl Manifold {
    fn closed_form(kind: ManifoldKind, dim: usize) -> Self {
        assert!(dim >= 1, "manifold dimension must be positive");
        Self {
            kind,
            dim,
            tol: Tolerances::default(),
            chart: None,
        }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::closed_form(ManifoldKind::Euclidean, dim)
    }

    pub fn sphere(dim: usize) -> Self {
        Self::closed_form(ManifoldKind::Sphere, dim)
    }

    pub fn hyperbolic(dim: usize) -> Self {
        Self::closed_form(ManifoldKind::Hyperbolic, dim)
    }

    /// The unit 2-sphere in (colatitude, longitude) coordinates.
    pub fn chart_sphere2() -> Self {
        Self::chart(ChartMetric::Sphere2, ChartConfig::default())
    }

    pub fn chart(metric: ChartMetric, config: ChartConfig) -> Self {
        let chart = Chart { metric, config };
        Self {
            kind: ManifoldKind::Chart,
            dim: chart.dim(),
            tol: Tolerances::default(),
            chart: Some(Arc::new(chart)),
        }
    }

    /// A chart manifold from a user metric; Christoffel symbols come from
    /// central differences.
    pub fn chart_custom<F>(name: &str, dim: usize, metric: F, periods: Vec<Option<f64>>) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::chart(
            ChartMetric::Custom {
                name: name.to_string(),
                dim,
                metric: Arc::new(metric),
                periods,
            },
            ChartConfig::default(),
        )
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Tolerance appropriate to this manifold's exp/log pipeline.
    pub fn pipeline_tolerance(&self) -> f64 {
        match self.kind {
            ManifoldKind::Chart => self.tol.chart,
            _ => self.tol.point,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Sphere | ManifoldKind::Hyperbolic => self.dim + 1,
            ManifoldKind::Euclidean | ManifoldKind::Chart => self.dim,
        }
    }

    pub fn chart_data(&self) -> Option<&Chart> {
        self.chart.as_deref()
    }

    fn chart_ref(&self) -> &Chart {
        self.chart
            .as_deref()
            .expect("chart manifold carries chart data")
    }

    /// Distance beyond which minimizing geodesics may fail to be unique.
    pub fn cut_locus_distance(&self) -> f64 {
        match self.kind {
            ManifoldKind::Sphere => PI,
            ManifoldKind::Euclidean | ManifoldKind::Hyperbolic => f64::INFINITY,
            ManifoldKind::Chart => {
                let c = self.chart_ref();
                c.cut_locus().unwrap_or(c.config.horizon)
            }
        }
    }

    pub fn point(&self, coords: impl Into<Vec<f64>>) -> Result<Point> {
        let p = Point(coords.into());
        self.validate(&p)?;
        Ok(p)
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        let x = p.coords();
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinates {x:?}")));
        }
        let tol = self.tol.point;
        match self.kind {
            ManifoldKind::Euclidean => Ok(()),
            ManifoldKind::Sphere => {
                let r = norm(x);
                if (r - 1.0).abs() > tol {
                    return Err(Error::InvalidPoint(format!("|x| = {r} is not 1")));
                }
                Ok(())
            }
            ManifoldKind::Hyperbolic => {
                let q = minkowski(x, x);
                let last = x[self.dim];
                if last <= 0.0 || (q + 1.0).abs() > tol * last * last {
                    return Err(Error::InvalidPoint(format!(
                        "<x,x> = {q}, last coordinate {last}: not on the upper hyperboloid"
                    )));
                }
                Ok(())
            }
            ManifoldKind::Chart => self.chart_ref().validate(x),
        }
    }

    pub fn tangent(&self, base: Point, vec: Vec<f64>) -> Result<TangentVec> {
        let v = TangentVec::new(base, vec);
        self.validate_tangent(&v)?;
        Ok(v)
    }

    pub fn validate_tangent(&self, v: &TangentVec) -> Result<()> {
        self.validate(&v.base)?;
        if v.vec.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: v.vec.len(),
            });
        }
        if v.vec.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidTangent("non-finite components".into()));
        }
        let b = v.base.coords();
        let tol = self.tol.point;
        let off = match self.kind {
            ManifoldKind::Sphere => dot(b, &v.vec).abs() / norm(&v.vec).max(1.0),
            ManifoldKind::Hyperbolic => {
                let s = b.iter().chain(&v.vec).fold(1.0f64, |m, c| m.max(c.abs()));
                minkowski(b, &v.vec).abs() / (s * s)
            }
            _ => 0.0,
        };
        if off > tol {
            return Err(Error::InvalidTangent(format!(
                "vector is not tangent at its base (offset {off:e})"
            )));
        }
        Ok(())
    }

    /// Projects an ambient vector onto the tangent space at `base`.
    pub fn project_tangent(&self, base: &Point, vec: &[f64]) -> TangentVec {
        let b = base.coords();
        let v = match self.kind {
            ManifoldKind::Sphere => lin(1.0, vec, -dot(b, vec), b),
            ManifoldKind::Hyperbolic => lin(1.0, vec, minkowski(b, vec), b),
            _ => vec.to_vec(),
        };
        TangentVec::new(base.clone(), v)
    }

    /// Riemannian inner product at `base`.
    pub fn inner(&self, base: &Point, u: &[f64], v: &[f64]) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean | ManifoldKind::Sphere => dot(u, v),
            ManifoldKind::Hyperbolic => minkowski(u, v),
            ManifoldKind::Chart => self.chart_ref().inner(base.coords(), u, v),
        }
    }

    pub fn norm(&self, v: &TangentVec) -> f64 {
        self.inner(&v.base, &v.vec, &v.vec).max(0.0).sqrt()
    }

    /// Endpoint at parameter 1 of the geodesic with initial velocity `v`.
    pub fn exp_map(&self, v: &TangentVec) -> Result<Point> {
        self.validate_tangent(v)?;
        let p = v.base.coords();
        match self.kind {
            ManifoldKind::Euclidean => Ok(Point(vector::add(p, &v.vec))),
            ManifoldKind::Sphere => {
                let n = norm(&v.vec);
                let x = lin(n.cos(), p, sinc(n), &v.vec);
                let r = norm(&x);
                Ok(Point(scale(&x, 1.0 / r)))
            }
            ManifoldKind::Hyperbolic => {
                let n = minkowski(&v.vec, &v.vec).max(0.0).sqrt();
                let x = lin(n.cosh(), p, sinhc(n), &v.vec);
                let r = (-minkowski(&x, &x)).sqrt();
                Ok(Point(scale(&x, 1.0 / r)))
            }
            ManifoldKind::Chart => self.integrate_geodesic(v, 1.0),
        }
    }

    /// Initial velocity of the minimizing geodesic from `p` to `x`.
    pub fn log_map(&self, p: &Point, x: &Point) -> Result<TangentVec> {
        self.validate(p)?;
        self.validate(x)?;
        let (a, b) = (p.coords(), x.coords());
        match self.kind {
            ManifoldKind::Euclidean => Ok(TangentVec::new(p.clone(), sub(b, a))),
            ManifoldKind::Sphere => {
                let d = sphere_dist(a, b);
                if d > PI - CUT_LOCUS_MARGIN {
                    return Err(Error::CutLocus { distance: d });
                }
                let w = sub(b, a);
                let u = lin(1.0, &w, -dot(a, &w), a);
                let un = norm(&u);
                if un == 0.0 {
                    return Ok(TangentVec::zero(p.clone()));
                }
                Ok(TangentVec::new(p.clone(), scale(&u, d / un)))
            }
            ManifoldKind::Hyperbolic => {
                let d = hyperbolic_dist(a, b);
                let w = sub(b, a);
                let u = lin(1.0, &w, minkowski(a, &w), a);
                let un = minkowski(&u, &u).max(0.0).sqrt();
                if un == 0.0 {
                    return Ok(TangentVec::zero(p.clone()));
                }
                Ok(TangentVec::new(p.clone(), scale(&u, d / un)))
            }
            ManifoldKind::Chart => self.shoot_log(p, x),
        }
    }

    /// Geodesic distance. Symmetric by construction.
    pub fn dist(&self, p: &Point, x: &Point) -> Result<f64> {
        self.validate(p)?;
        self.validate(x)?;
        let (a, b) = (p.coords(), x.coords());
        match self.kind {
            ManifoldKind::Euclidean => Ok(norm(&sub(b, a))),
            ManifoldKind::Sphere => Ok(sphere_dist(a, b)),
            ManifoldKind::Hyperbolic => Ok(hyperbolic_dist(a, b)),
            ManifoldKind::Chart => {
                // Order the pair so both argument orders share one code path.
                let (s, e) = if a.partial_cmp(b) == Some(std::cmp::Ordering::Greater) {
                    (x, p)
                } else {
                    (p, x)
                };
                let v = self.shoot_log(s, e)?;
                Ok(self.norm(&v))
            }
        }
    }

    pub fn geodesic(&self, x: &Point, y: &Point) -> Result<GeodesicSegment> {
        let initial = self.log_map(x, y)?;
        Ok(GeodesicSegment {
            manifold: self.clone(),
            initial,
        })
    }

    /// Point at parameter `t` of the minimizing geodesic from `x` to `y`.
    pub fn geodesic_point(&self, x: &Point, y: &Point, t: f64) -> Result<Point> {
        let v = self.log_map(x, y)?;
        self.exp_map(&v.scaled(t))
    }

    /// Flows the chart geodesic with initial velocity `v` for parameter time `t`.
    pub fn integrate_geodesic(&self, v: &TangentVec, t: f64) -> Result<Point> {
        if self.kind != ManifoldKind::Chart {
            return Err(Error::NotAChart);
        }
        self.validate_tangent(v)?;
        let end = self.chart_ref().integrate(v.base.coords(), &v.vec, t)?;
        Ok(Point(end))
    }

    /// Boundary-value solve for the chart logarithm.
    pub fn shoot_log(&self, p: &Point, x: &Point) -> Result<TangentVec> {
        if self.kind != ManifoldKind::Chart {
            return Err(Error::NotAChart);
        }
        self.validate(p)?;
        self.validate(x)?;
        let v = self.chart_ref().shoot(p.coords(), x.coords())?;
        Ok(TangentVec::new(p.clone(), v))
    }

    /// Largest coordinate difference, short way round periodic chart coordinates.
    pub fn coord_distance(&self, a: &Point, b: &Point) -> f64 {
        match self.kind {
            ManifoldKind::Chart => self
                .chart_ref()
                .diff(a.coords(), b.coords())
                .iter()
                .fold(0.0, |m, c| m.max(c.abs())),
            _ => max_abs_diff(a.coords(), b.coords()),
        }
    }

    /// An orthonormal basis of the tangent space at `p`.
    pub fn tangent_basis(&self, p: &Point) -> Vec<Vec<f64>> {
        let n = self.ambient_dim();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.dim);
        for i in 0..n {
            if basis.len() == self.dim {
                break;
            }
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let mut v = self.project_tangent(p, &e).vec;
            for b in &basis {
                let c = self.inner(p, &v, b);
                v = lin(1.0, &v, -c, b);
            }
            let len = self.inner(p, &v, &v).max(0.0).sqrt();
            if len > 1e-6 {
                basis.push(scale(&v, 1.0 / len));
            }
        }
        basis
    }

    /// A unit tangent direction at `p`, uniformly distributed.
    pub fn random_direction<R: Rng + ?Sized>(&self, rng: &mut R, p: &Point) -> Vec<f64> {
        let basis = self.tangent_basis(p);
        loop {
            let coeffs: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let len = norm(&coeffs);
            if len < 1e-12 {
                continue;
            }
            let mut v = vec![0.0; self.ambient_dim()];
            for (c, b) in coeffs.iter().zip(&basis) {
                v = lin(1.0, &v, c / len, b);
            }
            return v;
        }
    }

    /// A canonical origin: zero vector, north pole, hyperboloid apex or the
    /// sphere chart's equator point.
    pub fn origin(&self) -> Point {
        let n = self.ambient_dim();
        let mut x = vec![0.0; n];
        match self.kind {
            ManifoldKind::Euclidean => {}
            ManifoldKind::Sphere | ManifoldKind::Hyperbolic => x[n - 1] = 1.0,
            ManifoldKind::Chart => {
                if let ChartMetric::Sphere2 = self.chart_ref().metric {
                    x[0] = PI / 2.0;
                }
            }
        }
        Point(x)
    }

    /// A loosely spread random point (Gaussian of width `spread` about the
    /// origin; uniform on the sphere).
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, spread: f64) -> Result<Point> {
        let n = self.ambient_dim();
        match self.kind {
            ManifoldKind::Euclidean => Ok(Point(
                (0..n)
                    .map(|_| spread * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            )),
            ManifoldKind::Sphere => loop {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let r = norm(&g);
                if r > 1e-9 {
                    return Ok(Point(scale(&g, 1.0 / r)));
                }
            },
            ManifoldKind::Hyperbolic | ManifoldKind::Chart => {
                let o = self.origin();
                let dir = self.random_direction(rng, &o);
                let r = spread * rng.sample::<f64, _>(StandardNormal).abs();
                self.exp_map(&TangentVec::new(o, scale(&dir, r)))
            }
        }
    }
}

fn sphere_dist(a: &[f64], b: &[f64]) -> f64 {
    let d = norm(&sub(b, a));
    let s = norm(&vector::add(a, b));
    2.0 * d.atan2(s)
}

fn hyperbolic_dist(a: &[f64], b: &[f64]) -> f64 {
    let w = sub(b, a);
    let q = minkowski(&w, &w).max(0.0);
    2.0 * (q.sqrt() / 2.0).asinh()
}

/// A geodesic `γ(t) = exp(t · initial)` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GeodesicSegment {
    pub manifold: Manifold,
    pub initial: TangentVec,
}

impl GeodesicSegment {
    pub fn start(&self) -> &Point {
        &self.initial.base
    }

    pub fn at(&self, t: f64) -> Result<Point> {
        if t == 0.0 {
            return Ok(self.initial.base.clone());
        }
        self.manifold.exp_map(&self.initial.scaled(t))
    }

    pub fn length(&self) -> f64 {
        self.manifold.norm(&self.initial)
    }

    /// Samples on a uniform grid of `steps` parameters (endpoints included).
    pub fn sample(&self, steps: usize) -> Result<Vec<Point>> {
        t_grid(steps).into_iter().map(|t| self.at(t)).collect()
    }
}

/// Uniform grid on [0, 1] with `steps` points; a single point grid is {0}.
pub fn t_grid(steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect(),
    }
}
