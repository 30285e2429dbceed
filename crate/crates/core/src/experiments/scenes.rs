//! The bundled scenes and the suites built on them.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use serde::Serialize;

use super::{stream_rng, uniform_grid, ExperimentConfig, Status, SuiteItem, SuiteResult};
use crate::contraction::{ContractionMap, DirectionPolicy};
use crate::convexity::{
    contraction_threshold, distance_to_geodesic, geodesic_deviation_with, is_geodesically_convex,
    is_p_lambda_convex, is_star_shaped, is_totally_p_convex, ConvexityReport, Region, Sampling,
    DEFAULT_PROBE_RADIUS,
};
use crate::error::Result;
use crate::io::points_csv;
use crate::manifold::vector::{add, dot, norm, scale};
use crate::manifold::{Manifold, Point};

use super::svg::orthographic_svg;

fn north() -> Point {
    [0.0, 0.0, 1.0].into()
}

/// Upper hemisphere plus two points at colatitude 2π/3; base point the north pole.
pub fn hemisphere_two_points() -> Result<(Region, Point)> {
    let m = Manifold::sphere(2);
    let (s, c) = (2.0 * FRAC_PI_3).sin_cos();
    let extra = vec![Point::new(vec![s, 0.0, c]), Point::new(vec![0.0, s, c])];
    let region = Region::union(vec![
        Region::hemisphere(&m, north())?,
        Region::finite_set(&m, extra)?,
    ])?;
    Ok((region, north()))
}

/// The equator arc from (1,0,0) to (0,1,0) together with the north pole.
pub fn equator_arc_and_pole() -> Result<(Region, Point)> {
    let m = Manifold::sphere(2);
    let region = Region::union(vec![
        Region::geodesic_arc(&m, [1.0, 0.0, 0.0].into(), [0.0, 1.0, 0.0].into())?,
        Region::finite_set(&m, vec![north()])?,
    ])?;
    Ok((region, north()))
}

/// Three non-collinear points of the plane plus the origin.
pub fn planar_finite_set() -> Result<(Region, Point)> {
    let m = Manifold::euclidean(2);
    let p: Point = [0.0, 0.0].into();
    let pts = vec![
        [1.0, 0.0].into(),
        [0.0, 2.0].into(),
        [-1.5, -1.0].into(),
        p.clone(),
    ];
    Ok((Region::finite_set(&m, pts)?, p))
}

/// The unit disc plus the isolated point (3, 0).
pub fn disc_and_far_point() -> Result<(Region, Point)> {
    let m = Manifold::euclidean(2);
    let p: Point = [0.0, 0.0].into();
    let region = Region::union(vec![
        Region::ball(&m, p.clone(), 1.0)?,
        Region::finite_set(&m, vec![[3.0, 0.0].into()])?,
    ])?;
    Ok((region, p))
}

/// Largest gap between consecutive grid values, counting from zero.
pub fn grid_step(grid: &[f64]) -> f64 {
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    let mut step = 0.0f64;
    for l in g {
        step = step.max(l - prev);
        prev = l;
    }
    step
}

fn lambda_label(l: f64) -> String {
    format!("{l}")
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleOutcome {
    pub lambda: f64,
    pub arc: Vec<Point>,
    pub contracted: Vec<Point>,
    pub geodesic: Vec<Point>,
    pub deviation: f64,
    /// Closed-form distance from the contracted arc's midpoint to the
    /// comparison geodesic.
    pub midpoint_gap: f64,
    pub control_deviation: f64,
    #[serde(skip)]
    pub csv: String,
    #[serde(skip)]
    pub svg: String,
    #[serde(skip)]
    pub result: SuiteResult,
}

/// Latitude midpoint vs. chord midpoint of the contracted equator arc.
fn closed_form_midpoint_gap(lambda: f64) -> f64 {
    let (s, c) = (lambda * FRAC_PI_2).sin_cos();
    let a = [s, 0.0, c];
    let b = [0.0, s, c];
    let h = s / 2f64.sqrt();
    let mid = [h, h, c];
    let chord = add(&a, &b);
    let chord = scale(&chord, 1.0 / norm(&chord));
    dot(&mid, &chord).clamp(-1.0, 1.0).acos()
}

/// Arc, contracted arc, geodesic through its endpoints, deviation.
type Curves = (Vec<Point>, Vec<Point>, Vec<Point>, f64);

/// Contracts the equator arc toward the north pole and measures how far the
/// result is from a geodesic, with a planar control.
pub fn run_counterexample_sphere(config: &ExperimentConfig) -> CounterexampleOutcome {
    let th = config.thresholds;
    let lambda = config.lambda;
    let mut result = SuiteResult::new(config.seed);
    let claim = "contracting a geodesic toward a point need not give a geodesic";
    let mut out = CounterexampleOutcome {
        lambda,
        arc: Vec::new(),
        contracted: Vec::new(),
        geodesic: Vec::new(),
        deviation: f64::NAN,
        midpoint_gap: closed_form_midpoint_gap(lambda),
        control_deviation: f64::NAN,
        csv: String::new(),
        svg: String::new(),
        result: SuiteResult::new(config.seed),
    };

    let sphere = Manifold::sphere(2);
    let t_steps = config.t_steps.max(65);
    let curves = (|| -> Result<Curves> {
        let arc = sphere
            .geodesic(&[1.0, 0.0, 0.0].into(), &[0.0, 1.0, 0.0].into())?
            .sample(33)?;
        let c = ContractionMap::canonical(sphere.clone(), north(), lambda)?;
        let contracted = c.contract_curve(&arc)?;
        let geodesic = sphere
            .geodesic(&contracted[0], &contracted[contracted.len() - 1])?
            .sample(33)?;
        let dev = geodesic_deviation_with(config.execution, &sphere, &contracted, t_steps)?;
        Ok((arc, contracted, geodesic, dev))
    })();
    match curves {
        Ok((arc, contracted, geodesic, dev)) => {
            out.arc = arc;
            out.contracted = contracted;
            out.geodesic = geodesic;
            out.deviation = dev;
            let item = SuiteItem::new("example1:deviation", claim).counts(out.contracted.len(), 0);
            let item = if lambda < 1.0 {
                item.gate(dev > th.min_counterexample_deviation)
                    .measured(dev, th.min_counterexample_deviation)
                    .detail(format!(
                        "λ = {lambda}, t_steps = {t_steps}; must exceed threshold"
                    ))
            } else {
                let tol = 2.0 * FRAC_PI_2 / t_steps as f64;
                item.gate(dev < tol)
                    .measured(dev, tol)
                    .detail("λ = 1: the arc itself, expected to be a geodesic")
            };
            result.push(item);
            let gap = (dev - out.midpoint_gap).abs();
            result.push(
                SuiteItem::new(
                    "example1:midpoint-gap",
                    "the measured deviation matches the closed-form midpoint gap",
                )
                .gate(gap <= th.midpoint_gap_tolerance)
                .counts(1, 0)
                .measured(gap, th.midpoint_gap_tolerance)
                .detail(format!("closed form {:.6} rad", out.midpoint_gap)),
            );
        }
        Err(e) => result.push(SuiteItem::failed("example1:deviation", claim, &e)),
    }

    let control_claim = "planar contraction of a segment is a segment";
    let plane = Manifold::euclidean(2);
    let control = (|| -> Result<f64> {
        let seg = plane
            .geodesic(&[1.0, 0.0].into(), &[0.0, 1.0].into())?
            .sample(33)?;
        let c = ContractionMap::canonical(plane.clone(), [0.0, 0.0].into(), lambda)?;
        geodesic_deviation_with(config.execution, &plane, &c.contract_curve(&seg)?, t_steps)
    })();
    match control {
        Ok(dev) => {
            out.control_deviation = dev;
            result.push(
                SuiteItem::new("example1:euclidean-control", control_claim)
                    .gate(dev < th.euclidean_control)
                    .counts(33, 0)
                    .measured(dev, th.euclidean_control),
            );
        }
        Err(e) => result.push(SuiteItem::failed(
            "example1:euclidean-control",
            control_claim,
            &e,
        )),
    }

    let rows = out
        .arc
        .iter()
        .map(|p| (p, "arc"))
        .chain(out.contracted.iter().map(|p| (p, "contracted")))
        .chain(out.geodesic.iter().map(|p| (p, "geodesic")));
    out.csv = points_csv(rows);
    out.svg = orthographic_svg(
        &format!("equator arc contracted toward the north pole, λ = {lambda}"),
        &[
            ("equator arc", &out.arc, "#1f77b4"),
            ("contracted arc", &out.contracted, "#d62728"),
            (
                "geodesic between contracted endpoints",
                &out.geodesic,
                "#2ca02c",
            ),
        ],
    );
    if let Some(i) = result.items.first_mut() {
        i.report = serde_json::to_value(&out).ok();
    }
    out.result = result;
    out
}

fn lambdas_with(config: &ExperimentConfig) -> Vec<f64> {
    let mut ls = config.lambda_grid.clone();
    if !ls.contains(&config.lambda) {
        ls.push(config.lambda);
    }
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    ls
}

fn refuted_item(name: String, claim: &str, rep: &ConvexityReport, region: &Region) -> SuiteItem {
    let replayed = rep.witness.as_ref().is_some_and(|w| w.replays(region));
    SuiteItem::new(name, claim)
        .gate(!rep.holds() && replayed)
        .counts(rep.pairs_checked, rep.resampled)
        .detail(format!(
            "verdict {:?}, witness replays: {replayed}",
            rep.verdict
        ))
        .with_report(rep)
}

fn holds_item(name: String, claim: &str, rep: &ConvexityReport) -> SuiteItem {
    SuiteItem::new(name, claim)
        .gate(rep.holds())
        .counts(rep.pairs_checked, rep.resampled)
        .detail(format!("verdict {:?}", rep.verdict))
        .with_report(rep)
}

/// Equator arc plus pole: not p^λ-convex for any λ. Star-shapedness about the
/// pole is reported but not gated.
pub fn example2_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let claim = "the equator arc plus the pole is not p^λ-convex for any λ";
    let mut items = Vec::new();
    let (region, p) = match equator_arc_and_pole() {
        Ok(s) => s,
        Err(e) => return vec![SuiteItem::failed("example2", claim, &e)],
    };
    let sampling = config.sampling();
    for l in lambdas_with(config) {
        let name = format!("example2:lambda={}", lambda_label(l));
        let rep = ContractionMap::new(
            region.manifold().clone(),
            p.clone(),
            l,
            DirectionPolicy::Canonical,
        )
        .and_then(|c| is_p_lambda_convex(&region, &c, &sampling));
        items.push(match rep {
            Ok(rep) => refuted_item(name, claim, &rep, &region),
            Err(e) => SuiteItem::failed(&name, claim, &e),
        });
    }
    let star_claim = "star-shapedness about the pole (reported only)";
    match is_star_shaped(&region, &p, &DirectionPolicy::Canonical, &sampling) {
        Ok(rep) => {
            let mut item = SuiteItem::new("example2:star-shaped", star_claim)
                .counts(rep.pairs_checked, rep.resampled)
                .detail(format!("verdict {:?}", rep.verdict))
                .with_report(&rep);
            item.status = Status::ReportOnly;
            items.push(item);
        }
        Err(e) => {
            let mut item =
                SuiteItem::new("example2:star-shaped", star_claim).detail(format!("error: {e}"));
            item.status = Status::ReportOnly;
            items.push(item);
        }
    }
    items
}

fn threshold_item(
    name: &str,
    claim: &str,
    region: &Region,
    p: &Point,
    grid: &[f64],
    expected: f64,
    sampling: &Sampling,
) -> SuiteItem {
    match contraction_threshold(
        region,
        p,
        &DirectionPolicy::Canonical,
        grid,
        sampling,
        DEFAULT_PROBE_RADIUS,
    ) {
        Ok(rep) => {
            let step = grid_step(grid);
            let miss = rep.zeta_hat.map_or(f64::INFINITY, |z| (z - expected).abs());
            SuiteItem::new(name, claim)
                .gate(miss <= step + 1e-12)
                .counts(grid.len() * sampling.n_pairs, 0)
                .measured(rep.zeta_hat.unwrap_or(f64::NAN), expected)
                .detail(format!(
                    "ζ̂ = {:?}, expected {expected:.4} ± {step}",
                    rep.zeta_hat
                ))
                .with_report(&rep)
        }
        Err(e) => SuiteItem::failed(name, claim, &e),
    }
}

/// p^λ verdicts at 0.5 and 0.95 and the threshold estimate.
pub fn hemisphere_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let claim = "outer points return to the hemisphere iff λ·2π/3 ≤ π/2";
    let (region, p) = match hemisphere_two_points() {
        Ok(s) => s,
        Err(e) => return vec![SuiteItem::failed("hemisphere-two-points", claim, &e)],
    };
    let sampling = config.sampling();
    let mut items = Vec::new();
    for (l, expect_holds) in [(0.5, true), (0.95, false)] {
        let name = format!("hemisphere-two-points:lambda={l}");
        let rep = ContractionMap::canonical(region.manifold().clone(), p.clone(), l)
            .and_then(|c| is_p_lambda_convex(&region, &c, &sampling));
        items.push(match rep {
            Ok(rep) if expect_holds => holds_item(name, claim, &rep),
            Ok(rep) => refuted_item(name, claim, &rep, &region),
            Err(e) => SuiteItem::failed(&name, claim, &e),
        });
    }
    items.push(hemisphere_threshold(config));
    items
}

fn hemisphere_threshold(config: &ExperimentConfig) -> SuiteItem {
    let name = "hemisphere-two-points:threshold";
    let claim = "the contraction threshold is 3/4";
    match hemisphere_two_points() {
        Ok((region, p)) => threshold_item(
            name,
            claim,
            &region,
            &p,
            &config.lambda_grid,
            0.75,
            &config.sampling(),
        ),
        Err(e) => SuiteItem::failed(name, claim, &e),
    }
}

/// A finite set of more than two points fails for every λ < 1.
pub fn finite_set_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let claim = "a planar finite set of more than two points is not p^λ-convex";
    let (region, p) = match planar_finite_set() {
        Ok(s) => s,
        Err(e) => return vec![SuiteItem::failed("finite-set", claim, &e)],
    };
    let sampling = config.sampling();
    let mut items = Vec::new();
    for l in lambdas_with(config) {
        let name = format!("finite-set:lambda={}", lambda_label(l));
        let rep = ContractionMap::canonical(region.manifold().clone(), p.clone(), l)
            .and_then(|c| is_p_lambda_convex(&region, &c, &sampling));
        items.push(match rep {
            Ok(rep) if l < 1.0 => refuted_item(name, claim, &rep, &region),
            Ok(rep) => {
                let mut item =
                    SuiteItem::new(name, "λ = 1 is plain geodesic convexity (reported only)")
                        .counts(rep.pairs_checked, rep.resampled)
                        .detail(format!("verdict {:?}", rep.verdict))
                        .with_report(&rep);
                item.status = Status::ReportOnly;
                item
            }
            Err(e) => SuiteItem::failed(&name, claim, &e),
        });
    }
    items
}

/// Threshold of the unit disc plus (3, 0) on the fine grid.
pub fn euclidean_threshold_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let name = "ball-threshold:threshold";
    let claim = "the far point contracts into the disc iff 3λ ≤ 1";
    let grid = uniform_grid(config.thresholds.fine_grid_size);
    vec![match disc_and_far_point() {
        Ok((region, p)) => threshold_item(
            name,
            claim,
            &region,
            &p,
            &grid,
            1.0 / 3.0,
            &config.sampling(),
        ),
        Err(e) => SuiteItem::failed(name, claim, &e),
    }]
}

/// Both threshold scenes.
pub(super) fn threshold_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let mut items = vec![hemisphere_threshold(config)];
    items.extend(euclidean_threshold_items(config));
    items
}

type Scene = (&'static str, Region, Point);

fn iterated_scenes() -> Result<Vec<Scene>> {
    let sphere = Manifold::sphere(2);
    let plane = Manifold::euclidean(2);
    let (hemi, hp) = hemisphere_two_points()?;
    Ok(vec![
        ("cap", Region::cap(&sphere, north(), FRAC_PI_4)?, north()),
        (
            "ball",
            Region::ball(&plane, [0.0, 0.0].into(), 1.0)?,
            [0.0, 0.0].into(),
        ),
        ("hemisphere-two-points", hemi, hp),
    ])
}

fn lambda_report(
    region: &Region,
    p: &Point,
    l: f64,
    sampling: &Sampling,
) -> Result<ConvexityReport> {
    let c = ContractionMap::canonical(region.manifold().clone(), p.clone(), l)?;
    is_p_lambda_convex(region, &c, sampling)
}

/// p^λ-convexity at λ carries over to λ² and λ³.
pub(super) fn iterated_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let claim = "p^λ-convexity implies p^(λⁿ)-convexity";
    let scenes = match iterated_scenes() {
        Ok(s) => s,
        Err(e) => return vec![SuiteItem::failed("iterated", claim, &e)],
    };
    let sampling = config.sampling();
    let mut items = Vec::new();
    for (name, region, p) in &scenes {
        for l in [config.lambda, 0.7] {
            let item_name = format!("iterated:{name}:lambda={l}");
            let run = || -> Result<(bool, Vec<bool>, usize)> {
                let base = lambda_report(region, p, l, &sampling)?;
                let mut powers = Vec::new();
                let mut checked = base.pairs_checked;
                for n in [2, 3] {
                    let rep = lambda_report(region, p, l.powi(n), &sampling)?;
                    checked += rep.pairs_checked;
                    powers.push(rep.holds());
                }
                Ok((base.holds(), powers, checked))
            };
            items.push(match run() {
                Ok((premise, powers, checked)) => SuiteItem::new(item_name, claim)
                    .gate(premise && powers.iter().all(|h| *h))
                    .counts(checked, 0)
                    .detail(format!("holds at λ: {premise}; at λ², λ³: {powers:?}")),
                Err(e) => SuiteItem::failed(&item_name, claim, &e),
            });
        }
    }
    items
}

/// Families sharing a base point: members and their intersection.
fn intersection_families() -> Result<Vec<(&'static str, Vec<Region>, Point)>> {
    let sphere = Manifold::sphere(2);
    let plane = Manifold::euclidean(2);
    let o: Point = [0.0, 0.0].into();
    let caps = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3]
        .iter()
        .map(|&r| Region::cap(&sphere, north(), r))
        .collect::<Result<Vec<_>>>()?;
    let balls = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| Region::ball(&plane, o.clone(), r))
        .collect::<Result<Vec<_>>>()?;
    let shifted = vec![
        Region::ball(&plane, [0.3, 0.0].into(), 1.0)?,
        Region::ball(&plane, [-0.2, 0.4].into(), 1.2)?,
        Region::ball(&plane, [0.0, -0.5].into(), 0.9)?,
    ];
    let (hemi, _) = hemisphere_two_points()?;
    let mixed = vec![hemi, Region::cap(&sphere, north(), 2.2)?];
    Ok(vec![
        ("concentric-caps", caps, north()),
        ("concentric-balls", balls, o.clone()),
        ("overlapping-balls", shifted, o),
        ("hemisphere-two-points-and-cap", mixed, north()),
    ])
}

/// If every member is p^λ-convex, so is the intersection.
pub(super) fn intersection_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let claim = "an intersection of p^λ-convex sets is p^λ-convex";
    let families = match intersection_families() {
        Ok(f) => f,
        Err(e) => return vec![SuiteItem::failed("intersection", claim, &e)],
    };
    let sampling = config.sampling();
    let l = config.lambda;
    families
        .into_iter()
        .map(|(name, members, p)| {
            let item_name = format!("intersection:{name}");
            let run = || -> Result<(Vec<bool>, bool, usize)> {
                let mut checked = 0;
                let mut each = Vec::new();
                for r in &members {
                    let rep = lambda_report(r, &p, l, &sampling)?;
                    checked += rep.pairs_checked;
                    each.push(rep.holds());
                }
                let meet = Region::intersection(members.clone())?;
                let rep = lambda_report(&meet, &p, l, &sampling)?;
                Ok((each, rep.holds(), checked + rep.pairs_checked))
            };
            match run() {
                Ok((each, meet, checked)) => SuiteItem::new(item_name, claim)
                    .gate(each.iter().all(|h| *h) && meet)
                    .counts(checked, 0)
                    .detail(format!("members {each:?}, intersection {meet}, λ = {l}")),
                Err(e) => SuiteItem::failed(&item_name, claim, &e),
            }
        })
        .collect()
}

/// Geodesically convex scenes are totally p-convex about sampled interior
/// base points.
pub(super) fn theorem_forward_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let claim = "a geodesically convex set is totally p-convex for every interior p";
    let sampling = config.sampling();
    let scenes = (|| -> Result<Vec<(&'static str, Region, Region)>> {
        let sphere = Manifold::sphere(2);
        let plane = Manifold::euclidean(2);
        let o: Point = [0.0, 0.0].into();
        Ok(vec![
            (
                "ball",
                Region::ball(&plane, o.clone(), 1.0)?,
                Region::ball(&plane, o, 0.8)?,
            ),
            (
                "cap",
                Region::cap(&sphere, north(), FRAC_PI_4)?,
                Region::cap(&sphere, north(), 0.8 * FRAC_PI_4)?,
            ),
        ])
    })();
    let scenes = match scenes {
        Ok(s) => s,
        Err(e) => return vec![SuiteItem::failed("theorem-forward", claim, &e)],
    };
    let mut items = Vec::new();
    for (k, (name, region, inner)) in scenes.iter().enumerate() {
        let item_name = format!("theorem-forward:{name}");
        let mut rng = stream_rng(config.seed, 300 + k as u64);
        let mut run = || -> Result<(Vec<(Point, bool)>, usize)> {
            let geo = is_geodesically_convex(region, &sampling)?;
            if !geo.holds() {
                return Ok((Vec::new(), geo.pairs_checked));
            }
            let mut bases = Vec::new();
            let mut checked = geo.pairs_checked;
            for _ in 0..config.thresholds.theorem_base_points {
                let p = inner.sample(&mut rng)?;
                let rep = is_totally_p_convex(
                    region,
                    &p,
                    &DirectionPolicy::Canonical,
                    &config.lambda_grid,
                    &sampling,
                )?;
                checked += rep
                    .per_lambda
                    .iter()
                    .map(|r| r.pairs_checked)
                    .sum::<usize>();
                bases.push((p, rep.verdict.holds()));
            }
            Ok((bases, checked))
        };
        items.push(match run() {
            Ok((bases, checked)) => SuiteItem::new(item_name, claim)
                .gate(
                    bases.len() == config.thresholds.theorem_base_points
                        && bases.iter().all(|b| b.1),
                )
                .counts(checked, 0)
                .detail(format!(
                    "{} base points, {} totally p-convex over {} λ values",
                    bases.len(),
                    bases.iter().filter(|b| b.1).count(),
                    config.lambda_grid.len()
                ))
                .with_report(&bases),
            Err(e) => SuiteItem::failed(&item_name, claim, &e),
        });
    }
    items
}

/// Distance from the midpoint of the contracted arc to the comparison
/// geodesic, measured on the manifold rather than in closed form.
pub fn measured_midpoint_gap(lambda: f64, t_steps: usize) -> Result<f64> {
    let sphere = Manifold::sphere(2);
    let c = ContractionMap::canonical(sphere.clone(), north(), lambda)?;
    let a = c.contract_point(&[1.0, 0.0, 0.0].into())?;
    let b = c.contract_point(&[0.0, 1.0, 0.0].into())?;
    let mid = c.contract_point(&Point::new(vec![FRAC_PI_4.cos(), FRAC_PI_4.sin(), 0.0]))?;
    distance_to_geodesic(&sphere.geodesic(&a, &b)?, &mid, t_steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_gap_matches_measured() {
        let gap = closed_form_midpoint_gap(0.5);
        assert!((gap - measured_midpoint_gap(0.5, 65).unwrap()).abs() < 1e-9);
        assert!(closed_form_midpoint_gap(1.0) < 1e-7);
    }

    #[test]
    fn grid_step_of_uniform_grid() {
        assert!((grid_step(&uniform_grid(20)) - 0.05).abs() < 1e-12);
        assert!((grid_step(&[0.5, 1.0, 0.25]) - 0.5).abs() < 1e-12);
    }
}
