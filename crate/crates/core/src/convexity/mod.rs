//! Sampling-based convexity predicates.
//!
//! Every predicate draws member points from a region's seeded sampler and
//! checks geodesics against the membership oracle on a uniform parameter
//! grid. `HoldsOnSamples` is evidence, not proof; `Refuted` always comes with
//! a replayable witness.

mod region;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use region::{jitter, CustomShape, Region, RegionKind, Shape, DEFAULT_BOUNDARY_TOL};

use crate::contraction::{ContractionMap, DirectionPolicy};
use crate::error::{Error, Result};
use crate::manifold::{t_grid, GeodesicSegment, Manifold, Point, TangentVec};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnSamples,
    Refuted,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::HoldsOnSamples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    GeodesicallyConvex,
    PLambdaConvex,
    StarShaped,
}

/// A failing geodesic sample: `point = exp(t · initial)` at `start`, and the
/// oracle rejects `point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub pair_index: usize,
    pub x: Point,
    pub y: Point,
    pub start: Point,
    pub initial: Vec<f64>,
    pub t: f64,
    pub point: Point,
}

impl Witness {
    /// Recomputes the failing point and re-asks the oracle.
    pub fn replays(&self, region: &Region) -> bool {
        let m = region.manifold();
        let v = TangentVec::new(self.start.clone(), self.initial.clone());
        let Ok(again) = m.exp_map(&v.scaled(self.t)) else {
            return false;
        };
        m.coord_distance(&again, &self.point) <= m.pipeline_tolerance()
            && !region.contains(&self.point)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub predicate: Predicate,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub pairs_checked: usize,
    pub t_steps: usize,
    pub lambda: Option<f64>,
    pub seed: u64,
    /// Draws replaced because the pair sat on a cut locus.
    pub resampled: usize,
}

impl ConvexityReport {
    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalConvexityReport {
    pub verdict: Verdict,
    pub per_lambda: Vec<ConvexityReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaVerdict {
    pub lambda: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// Largest grid λ such that every grid value up to it holds; `None` when
    /// even the smallest grid value is refuted.
    pub zeta_hat: Option<f64>,
    pub lambda_grid: Vec<f64>,
    pub verdicts: Vec<LambdaVerdict>,
    pub profile: Vec<ConvexityReport>,
    pub probe_radius: f64,
    pub seed: u64,
}

/// Sampling budget shared by all predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub n_pairs: usize,
    pub t_steps: usize,
    pub seed: u64,
    pub execution: Execution,
    /// Cap on cut-locus replacements, as a multiple of `n_pairs`.
    pub resample_factor: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            n_pairs: 200,
            t_steps: 65,
            seed: 42,
            execution: Execution::default(),
            resample_factor: 10,
        }
    }
}

impl Sampling {
    pub fn new(n_pairs: usize, t_steps: usize, seed: u64) -> Self {
        Self {
            n_pairs,
            t_steps,
            seed,
            ..Self::default()
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

enum Outcome {
    Holds,
    Fails(Witness),
    CutLocus,
    Error(Error),
}

/// First grid sample of `start → exp(initial)` that leaves the region.
fn first_exit(
    region: &Region,
    initial: &TangentVec,
    t_steps: usize,
) -> Result<Option<(f64, Point)>> {
    let m = region.manifold();
    for t in t_grid(t_steps.max(2)) {
        let pt = if t == 0.0 {
            initial.base.clone()
        } else {
            m.exp_map(&initial.scaled(t))?
        };
        if !region.contains(&pt) {
            return Ok(Some((t, pt)));
        }
    }
    Ok(None)
}

fn segment_outcome(
    region: &Region,
    index: usize,
    x: &Point,
    y: &Point,
    from: &Point,
    to: &Point,
    t_steps: usize,
) -> Outcome {
    let initial = match region.manifold().log_map(from, to) {
        Ok(v) => v,
        Err(e) if e.is_cut_locus() => return Outcome::CutLocus,
        Err(e) => return Outcome::Error(e),
    };
    match first_exit(region, &initial, t_steps) {
        Ok(None) => Outcome::Holds,
        Ok(Some((t, point))) => Outcome::Fails(Witness {
            pair_index: index,
            x: x.clone(),
            y: y.clone(),
            start: from.clone(),
            initial: initial.vec,
            t,
            point,
        }),
        Err(e) => Outcome::Error(e),
    }
}

struct RunSummary {
    witness: Option<Witness>,
    checked: usize,
    resampled: usize,
}

/// Draws `n` items sequentially from one seeded stream, checks them with the
/// configured execution mode and replaces cut-locus draws until every slot
/// has a usable sample. Results merge by slot index.
fn run_slots<D, Draw, Check>(
    sampling: &Sampling,
    n: usize,
    mut draw: Draw,
    check: Check,
) -> Result<RunSummary>
where
    D: Send + Sync,
    Draw: FnMut(&mut ChaCha8Rng) -> Result<D>,
    Check: Fn(usize, &D) -> Outcome + Sync + Send,
{
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let mut outcomes: Vec<Option<Outcome>> = (0..n).map(|_| None).collect();
    let mut pending: Vec<usize> = (0..n).collect();
    let cap = sampling.resample_factor.max(1) * n.max(1);
    let mut resampled = 0usize;
    let mut first_round = true;

    while !pending.is_empty() {
        if !first_round {
            resampled += pending.len();
            if resampled > cap {
                return Err(Error::SamplerExhausted {
                    attempts: resampled,
                    reason: "too many cut-locus draws".into(),
                });
            }
        }
        first_round = false;
        let draws: Vec<(usize, D)> = pending
            .iter()
            .map(|&slot| draw(&mut rng).map(|d| (slot, d)))
            .collect::<Result<_>>()?;
        let results = par::map_slice(sampling.execution, &draws, |_, (slot, d)| check(*slot, d));
        pending.clear();
        for ((slot, _), outcome) in draws.iter().zip(results) {
            match outcome {
                Outcome::CutLocus => pending.push(*slot),
                other => outcomes[*slot] = Some(other),
            }
        }
    }

    for (slot, outcome) in outcomes.into_iter().enumerate() {
        match outcome.expect("every slot resolved") {
            Outcome::Holds => {}
            Outcome::Fails(w) => {
                return Ok(RunSummary {
                    witness: Some(w),
                    checked: slot + 1,
                    resampled,
                })
            }
            Outcome::Error(e) => return Err(Error::at(slot, e)),
            Outcome::CutLocus => unreachable!("cut-locus slots are redrawn"),
        }
    }
    Ok(RunSummary {
        witness: None,
        checked: n,
        resampled,
    })
}

fn report(
    predicate: Predicate,
    summary: RunSummary,
    sampling: &Sampling,
    lambda: Option<f64>,
) -> ConvexityReport {
    ConvexityReport {
        predicate,
        verdict: if summary.witness.is_some() {
            Verdict::Refuted
        } else {
            Verdict::HoldsOnSamples
        },
        witness: summary.witness,
        pairs_checked: summary.checked,
        t_steps: sampling.t_steps,
        lambda,
        seed: sampling.seed,
        resampled: summary.resampled,
    }
}

fn draw_pair(region: &Region) -> impl FnMut(&mut ChaCha8Rng) -> Result<(Point, Point)> + '_ {
    move |rng| Ok((region.sample(rng)?, region.sample(rng)?))
}

/// Does every sampled pair's minimizing geodesic stay in the region?
pub fn is_geodesically_convex(region: &Region, sampling: &Sampling) -> Result<ConvexityReport> {
    let summary = run_slots(
        sampling,
        sampling.n_pairs,
        draw_pair(region),
        |i, (x, y)| segment_outcome(region, i, x, y, x, y, sampling.t_steps),
    )?;
    Ok(report(
        Predicate::GeodesicallyConvex,
        summary,
        sampling,
        None,
    ))
}

/// Does the geodesic between the λ-contractions of every sampled pair stay in
/// the region?
pub fn is_p_lambda_convex(
    region: &Region,
    c: &ContractionMap,
    sampling: &Sampling,
) -> Result<ConvexityReport> {
    let summary = run_slots(
        sampling,
        sampling.n_pairs,
        draw_pair(region),
        |i, (x, y)| {
            let contracted = c
                .contract_point(x)
                .and_then(|cx| Ok((cx, c.contract_point(y)?)));
            match contracted {
                Ok((cx, cy)) => segment_outcome(region, i, x, y, &cx, &cy, sampling.t_steps),
                Err(e) => Outcome::Error(e),
            }
        },
    )?;
    Ok(report(
        Predicate::PLambdaConvex,
        summary,
        sampling,
        Some(c.lambda()),
    ))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Parse("empty λ grid".into()));
    }
    match grid.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
        Some(bad) => Err(Error::InvalidLambda(*bad)),
        None => Ok(()),
    }
}

/// p^λ-convexity at every λ of the grid, each run on the same seed.
pub fn is_totally_p_convex(
    region: &Region,
    p: &Point,
    policy: &DirectionPolicy,
    lambda_grid: &[f64],
    sampling: &Sampling,
) -> Result<TotalConvexityReport> {
    check_grid(lambda_grid)?;
    let per_lambda = lambda_grid
        .iter()
        .map(|&l| {
            let c = ContractionMap::new(region.manifold().clone(), p.clone(), l, policy.clone())?;
            is_p_lambda_convex(region, &c, sampling)
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if per_lambda.iter().all(ConvexityReport::holds) {
        Verdict::HoldsOnSamples
    } else {
        Verdict::Refuted
    };
    Ok(TotalConvexityReport {
        verdict,
        per_lambda,
    })
}

/// Does the geodesic from `p` (along the policy's direction) to each sampled
/// member stay in the region? Uses `n_pairs` as the number of sampled points.
pub fn is_star_shaped(
    region: &Region,
    p: &Point,
    policy: &DirectionPolicy,
    sampling: &Sampling,
) -> Result<ConvexityReport> {
    if !region.contains(p) {
        return Err(Error::BaseNotInRegion);
    }
    let c = ContractionMap::new(region.manifold().clone(), p.clone(), 1.0, policy.clone())?;
    let summary = run_slots(
        sampling,
        sampling.n_pairs,
        |rng| region.sample(rng),
        |i, x| {
            let initial = match c.direction(x) {
                Ok(v) => v,
                Err(e) if e.is_cut_locus() => return Outcome::CutLocus,
                Err(e) => return Outcome::Error(e),
            };
            match first_exit(region, &initial, sampling.t_steps) {
                Ok(None) => Outcome::Holds,
                Ok(Some((t, point))) => Outcome::Fails(Witness {
                    pair_index: i,
                    x: p.clone(),
                    y: x.clone(),
                    start: p.clone(),
                    initial: initial.vec,
                    t,
                    point,
                }),
                Err(e) => Outcome::Error(e),
            }
        },
    )?;
    Ok(report(Predicate::StarShaped, summary, sampling, None))
}

/// Distance from `x` to the segment: best grid sample, then a golden-section
/// refinement on the neighbouring grid cells.
pub fn distance_to_geodesic(seg: &GeodesicSegment, x: &Point, t_steps: usize) -> Result<f64> {
    let m = &seg.manifold;
    let grid = t_grid(t_steps.max(2));
    let mut best = (0usize, f64::INFINITY);
    for (i, &t) in grid.iter().enumerate() {
        let d = m.dist(&seg.at(t)?, x)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    let lo = grid[best.0.saturating_sub(1)];
    let hi = grid[(best.0 + 1).min(grid.len() - 1)];
    let f = |t: f64| -> Result<f64> { m.dist(&seg.at(t)?, x) };

    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if b - a < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    Ok(best.1.min(fc).min(fd))
}

/// Largest distance from a curve sample to the minimizing geodesic between the
/// curve's endpoints. Zero (to rounding) iff the samples lie on that geodesic.
pub fn geodesic_deviation(m: &Manifold, curve: &[Point], t_steps: usize) -> Result<f64> {
    geodesic_deviation_with(Execution::default(), m, curve, t_steps)
}

pub fn geodesic_deviation_with(
    exec: Execution,
    m: &Manifold,
    curve: &[Point],
    t_steps: usize,
) -> Result<f64> {
    let (Some(first), Some(last)) = (curve.first(), curve.last()) else {
        return Err(Error::CurveTooShort(curve.len()));
    };
    if curve.len() < 2 {
        return Err(Error::CurveTooShort(curve.len()));
    }
    let seg = m.geodesic(first, last)?;
    let dists = par::map_slice(exec, curve, |_, x| distance_to_geodesic(&seg, x, t_steps));
    let mut worst = 0.0f64;
    for (i, d) in dists.into_iter().enumerate() {
        worst = worst.max(d.map_err(|e| Error::at(i, e))?);
    }
    Ok(worst)
}

/// Default radius of the interior probe about the base point.
pub const DEFAULT_PROBE_RADIUS: f64 = 1e-3;

/// Estimates ζ: the largest grid λ such that the region is p^λ-convex for
/// every grid value not exceeding it.
pub fn contraction_threshold(
    region: &Region,
    p: &Point,
    policy: &DirectionPolicy,
    lambda_grid: &[f64],
    sampling: &Sampling,
    probe_radius: f64,
) -> Result<ThresholdReport> {
    check_grid(lambda_grid)?;
    let m = region.manifold();
    m.validate(p)?;
    if !region.contains(p) {
        return Err(Error::NotInterior {
            probe: p.coords().to_vec(),
        });
    }
    for e in m.tangent_basis(p) {
        for sign in [1.0, -1.0] {
            let v = TangentVec::new(
                p.clone(),
                e.iter().map(|c| sign * probe_radius * c).collect(),
            );
            let probe = m.exp_map(&v)?;
            if !region.contains(&probe) {
                return Err(Error::NotInterior {
                    probe: probe.into_coords(),
                });
            }
        }
    }

    let mut grid = lambda_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup();
    let mut profile = grid
        .iter()
        .map(|&l| {
            let c = ContractionMap::new(m.clone(), p.clone(), l, policy.clone())?;
            is_p_lambda_convex(region, &c, sampling)
        })
        .collect::<Result<Vec<_>>>()?;
    // Report ascending.
    grid.reverse();
    profile.reverse();

    let zeta_hat = grid
        .iter()
        .zip(&profile)
        .take_while(|(_, r)| r.holds())
        .last()
        .map(|(l, _)| *l);
    let verdicts = grid
        .iter()
        .zip(&profile)
        .map(|(&lambda, r)| LambdaVerdict {
            lambda,
            verdict: r.verdict,
        })
        .collect();
    Ok(ThresholdReport {
        zeta_hat,
        lambda_grid: grid,
        verdicts,
        profile,
        probe_radius,
        seed: sampling.seed,
    })
}

/// Samples of `V`: the union of geodesics between all pairs of contracted points.
pub fn inner_convex_set(
    points: &[Point],
    c: &ContractionMap,
    t_steps: usize,
) -> Result<Vec<Point>> {
    let contracted = c.contract_set(points)?;
    if contracted.len() <= 1 {
        return Ok(contracted);
    }
    let m = c.manifold();
    let mut pairs = Vec::new();
    for i in 0..contracted.len() {
        for j in i + 1..contracted.len() {
            pairs.push((i, j));
        }
    }
    let segments = par::map_slice(Execution::default(), &pairs, |_, &(i, j)| {
        m.geodesic(&contracted[i], &contracted[j])
            .and_then(|seg| seg.sample(t_steps.max(2)))
            .map_err(|e| Error::AtPair {
                first: i,
                second: j,
                source: Box::new(e),
            })
    });
    let mut out = Vec::with_capacity(pairs.len() * t_steps.max(2));
    for s in segments {
        out.extend(s?);
    }
    Ok(out)
}
