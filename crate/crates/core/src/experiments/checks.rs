//! Randomized kernel and contraction-algebra checks.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{stream_rng, ExperimentConfig, SuiteItem};
use crate::contraction::ContractionMap;
use crate::error::Result;
use crate::manifold::vector::{dot, lin, max_abs_diff, norm, scale, sub};
use crate::manifold::{Manifold, ManifoldKind, Point, TangentVec};
use crate::par::{self, Execution};

/// Colatitude margin kept between sampled chart geodesics and the poles.
const POLE_CLEARANCE: f64 = 0.25;

pub fn sphere2_to_embedded(chart: &[f64]) -> [f64; 3] {
    let (st, ct) = chart[0].sin_cos();
    let (sp, cp) = chart[1].sin_cos();
    [st * cp, st * sp, ct]
}

pub fn sphere2_to_chart(x: &[f64]) -> [f64; 2] {
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    [rho.atan2(x[2]), x[1].atan2(x[0])]
}

fn sphere2_frame(chart: &[f64]) -> ([f64; 3], [f64; 3]) {
    let (st, ct) = chart[0].sin_cos();
    let (sp, cp) = chart[1].sin_cos();
    ([ct * cp, ct * sp, -st], [-st * sp, st * cp, 0.0])
}

fn sphere2_tangent_to_embedded(chart: &[f64], v: &[f64]) -> Vec<f64> {
    let (et, ep) = sphere2_frame(chart);
    lin(v[0], &et, v[1], &ep)
}

fn embedded_tangent_to_sphere2(chart: &[f64], v: &[f64]) -> Vec<f64> {
    let (et, ep) = sphere2_frame(chart);
    let s = chart[0].sin();
    vec![dot(v, &et), dot(v, &ep) / (s * s)]
}

/// Does the great-circle arc from `p` with velocity `v` keep clear of the poles?
fn clear_of_poles(p: &[f64], v: &[f64]) -> bool {
    let len = norm(v);
    let limit = POLE_CLEARANCE.cos();
    (0..=32).all(|k| {
        let s = len * k as f64 / 32.0;
        let z = if len == 0.0 {
            p[2]
        } else {
            s.cos() * p[2] + s.sin() * v[2] / len
        };
        z.abs() <= limit
    })
}

/// A random tangent vector for round-trip style checks.
#[derive(Debug, Clone)]
pub struct KernelSample {
    pub v: TangentVec,
}

/// Largest tangent length sampled for a manifold: 0.9 of the cut-locus
/// distance, or a fixed radius where that is infinite.
fn sampling_radius(m: &Manifold) -> f64 {
    let cut = m.cut_locus_distance();
    if cut.is_finite() {
        0.9 * cut
    } else if m.kind() == ManifoldKind::Hyperbolic {
        3.0
    } else {
        10.0
    }
}

fn random_chart_base(rng: &mut ChaCha8Rng) -> Point {
    Point::new(vec![
        rng.random_range(0.5..PI - 0.5),
        rng.random_range(-PI..PI),
    ])
}

/// Random `(p, v)` with `|v| ≤ max_len`; sphere-chart samples keep clear of
/// the poles along the whole geodesic.
pub fn random_tangent(m: &Manifold, rng: &mut ChaCha8Rng, max_len: f64) -> Result<TangentVec> {
    loop {
        let p = match m.kind() {
            ManifoldKind::Chart => random_chart_base(rng),
            ManifoldKind::Euclidean => m.random_point(rng, 3.0)?,
            _ => m.random_point(rng, 1.0)?,
        };
        let dir = m.random_direction(rng, &p);
        let r = max_len * rng.random::<f64>();
        let v = TangentVec::new(p, scale(&dir, r));
        if m.kind() == ManifoldKind::Chart {
            let base = v.base.coords();
            let emb = sphere2_to_embedded(base);
            if !clear_of_poles(&emb, &sphere2_tangent_to_embedded(base, &v.vec)) {
                continue;
            }
        }
        return Ok(v);
    }
}

/// Max coordinate error of `log(p, exp(v))` against `v`, and the number of
/// samples that errored.
pub fn round_trip(exec: Execution, m: &Manifold, samples: &[KernelSample]) -> (f64, usize) {
    let errs = par::map_slice(exec, samples, |_, s| -> Result<f64> {
        let x = m.exp_map(&s.v)?;
        let w = m.log_map(&s.v.base, &x)?;
        Ok(max_abs_diff(&w.vec, &s.v.vec))
    });
    fold_errors(errs)
}

fn fold_errors(errs: Vec<Result<f64>>) -> (f64, usize) {
    errs.into_iter()
        .fold((0.0, 0), |(worst, failed), e| match e {
            Ok(e) => (worst.max(e), failed),
            Err(_) => (worst, failed + 1),
        })
}

/// Sphere-chart integration and shooting against the embedded closed form.
/// Returns (integration error, shooting error, failures).
pub fn chart_vs_closed_form(
    exec: Execution,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> Result<(f64, f64, usize)> {
    let chart = Manifold::chart_sphere2();
    let sphere = Manifold::sphere(2);
    let mut cases = Vec::with_capacity(n);
    for _ in 0..n {
        let v = random_tangent(&chart, rng, PI / 2.0)?;
        let t: f64 = rng.random();
        cases.push((v, t));
    }
    let errs = par::map_slice(exec, &cases, |_, (v, t)| -> Result<(f64, f64)> {
        let base = v.base.coords();
        let emb_base = Point::new(sphere2_to_embedded(base).to_vec());
        let emb_v = TangentVec::new(emb_base.clone(), sphere2_tangent_to_embedded(base, &v.vec));

        let got = chart.integrate_geodesic(v, *t)?;
        let want = sphere.exp_map(&emb_v.scaled(*t))?;
        let want_chart = Point::new(sphere2_to_chart(want.coords()).to_vec());
        let e_int = chart.coord_distance(&got, &want_chart);

        let end = Point::new(sphere2_to_chart(sphere.exp_map(&emb_v)?.coords()).to_vec());
        let shot = chart.shoot_log(&v.base, &end)?;
        let emb_end = Point::new(sphere2_to_embedded(end.coords()).to_vec());
        let closed = sphere.log_map(&emb_base, &emb_end)?;
        let closed_chart = embedded_tangent_to_sphere2(base, &closed.vec);
        let e_shoot = max_abs_diff(&shot.vec, &closed_chart);
        Ok((e_int, e_shoot))
    });
    let mut worst = (0.0f64, 0.0f64, 0usize);
    for e in errs {
        match e {
            Ok((a, b)) => {
                worst.0 = worst.0.max(a);
                worst.1 = worst.1.max(b);
            }
            Err(_) => worst.2 += 1,
        }
    }
    Ok(worst)
}

/// A base point, a target and two contraction parameters.
#[derive(Debug, Clone)]
pub struct CompositionCase {
    pub p: Point,
    pub x: Point,
    pub lambda: f64,
    pub beta: f64,
}

pub fn composition_cases(
    m: &Manifold,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> Result<Vec<CompositionCase>> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (p, x) = match m.kind() {
            ManifoldKind::Chart => {
                let v = random_tangent(m, rng, sampling_radius(m))?;
                let x = m.exp_map(&v)?;
                (v.base, x)
            }
            ManifoldKind::Euclidean => (m.random_point(rng, 3.0)?, m.random_point(rng, 3.0)?),
            ManifoldKind::Hyperbolic => (m.random_point(rng, 1.0)?, m.random_point(rng, 1.5)?),
            ManifoldKind::Sphere => (m.random_point(rng, 1.0)?, m.random_point(rng, 1.0)?),
        };
        let lambda = 1.0 - rng.random::<f64>();
        let beta = 1.0 - rng.random::<f64>();
        out.push(CompositionCase { p, x, lambda, beta });
    }
    Ok(out)
}

/// Per-case outcome: `None` when the case sits on the cut locus of `p`.
fn composition_errors(
    exec: Execution,
    m: &Manifold,
    cases: &[CompositionCase],
) -> Vec<Result<Option<(f64, f64)>>> {
    par::map_slice(exec, cases, |_, c| -> Result<Option<(f64, f64)>> {
        let outer = ContractionMap::canonical(m.clone(), c.p.clone(), c.lambda)?;
        let inner = ContractionMap::canonical(m.clone(), c.p.clone(), c.beta)?;
        let joint = ContractionMap::canonical(m.clone(), c.p.clone(), c.lambda * c.beta)?;
        let left = match inner
            .contract_point(&c.x)
            .and_then(|y| outer.contract_point(&y))
        {
            Ok(y) => y,
            Err(e) if e.is_cut_locus() => return Ok(None),
            Err(e) => return Err(e),
        };
        let right = joint.contract_point(&c.x)?;
        let comp = m.coord_distance(&left, &right);

        let d0 = m.dist(&c.p, &c.x)?;
        let d1 = m.dist(&c.p, &outer.contract_point(&c.x)?)?;
        let want = c.lambda * d0;
        let scaling = if want > 1e-12 {
            (d1 - want).abs() / want
        } else {
            (d1 - want).abs()
        };
        Ok(Some((comp, scaling)))
    })
}

/// Composition error, radial-scaling relative error, skipped, failed.
pub fn composition_identity(
    exec: Execution,
    m: &Manifold,
    cases: &[CompositionCase],
) -> (f64, f64, usize, usize) {
    let mut acc = (0.0f64, 0.0f64, 0usize, 0usize);
    for r in composition_errors(exec, m, cases) {
        match r {
            Ok(Some((c, s))) => {
                acc.0 = acc.0.max(c);
                acc.1 = acc.1.max(s);
            }
            Ok(None) => acc.2 += 1,
            Err(_) => acc.3 += 1,
        }
    }
    acc
}

/// Radial scaling only: `|dist(p, C(x)) − λ dist(p, x)| / (λ dist(p, x))`.
pub fn radial_scaling(exec: Execution, m: &Manifold, cases: &[CompositionCase]) -> f64 {
    composition_identity(exec, m, cases).1
}

/// Largest distance of contracted segment samples from the line through the
/// contracted endpoints, over `n` random segments in ℝ³.
pub fn euclidean_segment_invariance(rng: &mut ChaCha8Rng, n: usize) -> Result<f64> {
    let m = Manifold::euclidean(3);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let a = m.random_point(rng, 3.0)?;
        let b = m.random_point(rng, 3.0)?;
        let p = m.random_point(rng, 3.0)?;
        let lambda = 1.0 - rng.random::<f64>();
        let c = ContractionMap::canonical(m.clone(), p, lambda)?;
        let samples: Vec<Point> = (0..33)
            .map(|i| {
                let t = i as f64 / 32.0;
                Point::new(lin(1.0 - t, a.coords(), t, b.coords()))
            })
            .collect();
        let out = c.contract_curve(&samples)?;
        let (s, e) = (out[0].coords(), out[32].coords());
        let dir = sub(e, s);
        let len = norm(&dir);
        if len < 1e-9 {
            continue;
        }
        let u = scale(&dir, 1.0 / len);
        for q in &out {
            let w = sub(q.coords(), s);
            let perp = lin(1.0, &w, -dot(&w, &u), &u);
            worst = worst.max(norm(&perp));
        }
    }
    Ok(worst)
}

const KINDS: [&str; 4] = ["euclidean:3", "sphere:2", "hyperbolic:2", "chart:sphere2"];

pub(super) fn kernel_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let th = config.thresholds;
    let mut items = Vec::new();
    for (k, spec) in KINDS.iter().enumerate() {
        let m: Manifold = spec.parse().expect("bundled manifold spec");
        let name = format!("round-trip:{spec}");
        let claim = "log(p, exp(v)) recovers v below the cut-locus distance";
        let start = Instant::now();
        let mut rng = stream_rng(config.seed, 100 + k as u64);
        let radius = sampling_radius(&m);
        let samples: Result<Vec<KernelSample>> = (0..th.round_trip_samples)
            .map(|_| random_tangent(&m, &mut rng, radius).map(|v| KernelSample { v }))
            .collect();
        let samples = match samples {
            Ok(s) => s,
            Err(e) => {
                items.push(SuiteItem::failed(&name, claim, &e));
                continue;
            }
        };
        let tol = if m.kind() == ManifoldKind::Chart {
            th.round_trip_chart
        } else {
            th.round_trip_closed_form
        };
        let (err, failed) = round_trip(config.execution, &m, &samples);
        let mut item = SuiteItem::new(name, claim)
            .gate(failed == 0 && err <= tol)
            .counts(samples.len(), 0)
            .measured(err, tol)
            .detail(format!("|v| ≤ {radius:.4}, {failed} errors"));
        item.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        items.push(item);
    }

    let claim = "sphere-chart integration and shooting agree with the embedded closed form";
    let mut rng = stream_rng(config.seed, 110);
    match chart_vs_closed_form(config.execution, &mut rng, th.chart_samples) {
        Ok((e_int, e_shoot, failed)) => {
            items.push(
                SuiteItem::new("chart-vs-closed-form:integrate", claim)
                    .gate(failed == 0 && e_int <= th.chart_match)
                    .counts(th.chart_samples, 0)
                    .measured(e_int, th.chart_match)
                    .detail(format!("{failed} errors")),
            );
            items.push(
                SuiteItem::new("chart-vs-closed-form:shoot", claim)
                    .gate(failed == 0 && e_shoot <= th.chart_match)
                    .counts(th.chart_samples, 0)
                    .measured(e_shoot, th.chart_match)
                    .detail(format!("{failed} errors")),
            );
        }
        Err(e) => items.push(SuiteItem::failed("chart-vs-closed-form", claim, &e)),
    }
    items
}

pub(super) fn algebra_items(config: &ExperimentConfig) -> Vec<SuiteItem> {
    let th = config.thresholds;
    let mut items = Vec::new();
    for (k, spec) in KINDS.iter().enumerate() {
        let m: Manifold = spec.parse().expect("bundled manifold spec");
        let mut rng = stream_rng(config.seed, 200 + k as u64);
        let comp_claim = "contracting by β then λ equals contracting by λβ";
        let cases = match composition_cases(&m, &mut rng, th.composition_samples) {
            Ok(c) => c,
            Err(e) => {
                items.push(SuiteItem::failed(
                    &format!("composition:{spec}"),
                    comp_claim,
                    &e,
                ));
                continue;
            }
        };
        let (comp, scaling, skipped, failed) = composition_identity(config.execution, &m, &cases);
        let checked = cases.len() - skipped;
        items.push(
            SuiteItem::new(format!("composition:{spec}"), comp_claim)
                .gate(failed == 0 && comp <= th.composition)
                .counts(checked, skipped)
                .measured(comp, th.composition)
                .detail(format!(
                    "{skipped} cut-locus cases skipped, {failed} errors"
                )),
        );
        items.push(
            SuiteItem::new(
                format!("radial-scaling:{spec}"),
                "contraction scales the distance to the base point by λ",
            )
            .gate(failed == 0 && scaling <= th.radial_scaling_relative)
            .counts(checked, skipped)
            .measured(scaling, th.radial_scaling_relative),
        );
    }

    let claim = "euclidean contraction maps segments onto segments";
    let mut rng = stream_rng(config.seed, 210);
    match euclidean_segment_invariance(&mut rng, 200) {
        Ok(res) => items.push(
            SuiteItem::new("segment-invariance:euclidean", claim)
                .gate(res < th.collinearity)
                .counts(200, 0)
                .measured(res, th.collinearity),
        ),
        Err(e) => items.push(SuiteItem::failed("segment-invariance:euclidean", claim, &e)),
    }
    items
}
