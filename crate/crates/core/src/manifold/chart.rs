//! Manifolds given by a metric in a single coordinate chart.
//!
//! Geodesics solve `x'' + Γ(x)(x', x') = 0` with a fixed-step classical RK4
//! scheme; the logarithm is recovered by shooting on the initial velocity.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type MetricFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartConfig {
    pub steps_per_unit: usize,
    /// Longest geodesic (in metric length) that exp and shooting accept.
    pub horizon: f64,
    /// Half-width of the rejected band around the sphere chart's poles.
    pub exclusion_band: f64,
    /// Central-difference step for Christoffel symbols of custom metrics.
    pub fd_step: f64,
    pub shoot_tol: f64,
    pub shoot_max_iter: usize,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self {
            steps_per_unit: 256,
            horizon: 3.0,
            exclusion_band: 1e-3,
            fd_step: 1e-5,
            shoot_tol: 1e-11,
            shoot_max_iter: 30,
        }
    }
}

#[derive(Clone)]
pub enum ChartMetric {
    /// Unit 2-sphere in colatitude/longitude: ds² = dθ² + sin²θ dφ².
    Sphere2,
    Custom {
        name: String,
        dim: usize,
        metric: Arc<MetricFn>,
        /// Period of each coordinate, if it wraps.
        periods: Vec<Option<f64>>,
    },
}

impl fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartMetric::Sphere2 => write!(f, "Sphere2"),
            ChartMetric::Custom { name, dim, .. } => write!(f, "Custom({name}, dim={dim})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub metric: ChartMetric,
    pub config: ChartConfig,
}

impl Chart {
    pub fn dim(&self) -> usize {
        match &self.metric {
            ChartMetric::Sphere2 => 2,
            ChartMetric::Custom { dim, .. } => *dim,
        }
    }

    pub fn name(&self) -> &str {
        match &self.metric {
            ChartMetric::Sphere2 => "sphere2",
            ChartMetric::Custom { name, .. } => name,
        }
    }

    fn period(&self, i: usize) -> Option<f64> {
        match &self.metric {
            ChartMetric::Sphere2 => (i == 1).then_some(TAU),
            ChartMetric::Custom { periods, .. } => periods.get(i).copied().flatten(),
        }
    }

    /// Cut-locus distance when the chart models a known closed-form space.
    pub fn cut_locus(&self) -> Option<f64> {
        match self.metric {
            ChartMetric::Sphere2 => Some(PI),
            ChartMetric::Custom { .. } => None,
        }
    }

    pub fn metric_at(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.metric {
            ChartMetric::Sphere2 => {
                let s = x[0].sin();
                DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, s * s]))
            }
            ChartMetric::Custom { metric, .. } => metric(x),
        }
    }

    pub fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        match &self.metric {
            ChartMetric::Sphere2 => {
                let s = x[0].sin();
                u[0] * v[0] + s * s * u[1] * v[1]
            }
            ChartMetric::Custom { .. } => {
                let g = self.metric_at(x);
                let mut acc = 0.0;
                for i in 0..u.len() {
                    for j in 0..v.len() {
                        acc += g[(i, j)] * u[i] * v[j];
                    }
                }
                acc
            }
        }
    }

    pub fn norm(&self, x: &[f64], v: &[f64]) -> f64 {
        self.inner(x, v, v).max(0.0).sqrt()
    }

    pub fn excluded(&self, x: &[f64]) -> bool {
        match self.metric {
            ChartMetric::Sphere2 => {
                let band = self.config.exclusion_band;
                x[0] < band || x[0] > PI - band
            }
            ChartMetric::Custom { .. } => false,
        }
    }

    pub fn validate(&self, x: &[f64]) -> Result<()> {
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!(
                "non-finite chart coordinates {x:?}"
            )));
        }
        if self.excluded(x) {
            return Err(Error::ChartSingularity { coords: x.to_vec() });
        }
        if let ChartMetric::Custom { .. } = self.metric {
            let g = self.metric_at(x);
            let sym = (&g - g.transpose()).amax();
            if sym > 1e-12 * g.amax().max(1.0) || g.clone().cholesky().is_none() {
                return Err(Error::InvalidPoint(format!(
                    "metric not symmetric positive definite at {x:?}"
                )));
            }
        }
        Ok(())
    }

    /// Wraps periodic coordinates into (-P/2, P/2].
    pub fn wrap(&self, x: &mut [f64]) {
        for (i, c) in x.iter_mut().enumerate() {
            if let Some(p) = self.period(i) {
                *c = wrap_centered(*c, p);
            }
        }
    }

    /// `b - a`, taking the short way round periodic coordinates.
    pub fn diff(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| match self.period(i) {
                Some(p) => wrap_centered(y - x, p),
                None => y - x,
            })
            .collect()
    }

    /// Writes `x'' = -Γ(x)(v, v)` into `out`.
    fn acceleration(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        match &self.metric {
            ChartMetric::Sphere2 => {
                let (s, c) = x[0].sin_cos();
                out[0] = s * c * v[1] * v[1];
                out[1] = -2.0 * (c / s) * v[0] * v[1];
            }
            ChartMetric::Custom { .. } => {
                let gamma = self.christoffel(x);
                let n = x.len();
                for k in 0..n {
                    let mut acc = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            acc += gamma[k][i * n + j] * v[i] * v[j];
                        }
                    }
                    out[k] = -acc;
                }
            }
        }
    }

    /// Christoffel symbols `Γ[k][i*n+j]` from central differences of the metric.
    pub fn christoffel(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        match self.metric {
            ChartMetric::Sphere2 => {
                let (s, c) = x[0].sin_cos();
                let mut gamma = vec![vec![0.0; 4]; 2];
                gamma[0][3] = -s * c;
                gamma[1][1] = c / s;
                gamma[1][2] = c / s;
                gamma
            }
            ChartMetric::Custom { .. } => {
                let h = self.config.fd_step;
                let mut dg = Vec::with_capacity(n);
                let mut xp = x.to_vec();
                for l in 0..n {
                    xp[l] = x[l] + h;
                    let plus = self.metric_at(&xp);
                    xp[l] = x[l] - h;
                    let minus = self.metric_at(&xp);
                    xp[l] = x[l];
                    dg.push((plus - minus) / (2.0 * h));
                }
                let ginv = self
                    .metric_at(x)
                    .try_inverse()
                    .unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
                let mut gamma = vec![vec![0.0; n * n]; n];
                for (k, gk) in gamma.iter_mut().enumerate() {
                    for i in 0..n {
                        for j in 0..n {
                            let mut acc = 0.0;
                            for l in 0..n {
                                acc +=
                                    ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                            }
                            gk[i * n + j] = 0.5 * acc;
                        }
                    }
                }
                gamma
            }
        }
    }

    /// Position after flowing the geodesic with initial velocity `v` from `x0`
    /// for parameter time `t`.
    pub fn integrate(&self, x0: &[f64], v: &[f64], t: f64) -> Result<Vec<f64>> {
        let length = self.norm(x0, v) * t.abs();
        if length > self.config.horizon {
            return Err(Error::BeyondHorizon {
                length,
                horizon: self.config.horizon,
            });
        }
        let mut out = self.integrate_raw(x0, v, t)?;
        self.wrap(&mut out);
        Ok(out)
    }

    fn integrate_raw(&self, x0: &[f64], v0: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = x0.len();
        let steps = ((self.config.steps_per_unit as f64) * t.abs())
            .ceil()
            .max(1.0) as usize;
        let h = t / steps as f64;

        let mut y = Vec::with_capacity(2 * n);
        y.extend_from_slice(x0);
        y.extend_from_slice(v0);
        let mut k1 = vec![0.0; 2 * n];
        let mut k2 = vec![0.0; 2 * n];
        let mut k3 = vec![0.0; 2 * n];
        let mut k4 = vec![0.0; 2 * n];
        let mut tmp = vec![0.0; 2 * n];

        let rhs = |s: &[f64], out: &mut [f64]| {
            out[..n].copy_from_slice(&s[n..]);
            let (pos, vel) = s.split_at(n);
            self.acceleration(pos, vel, &mut out[n..]);
        };

        for step in 0..steps {
            rhs(&y, &mut k1);
            for i in 0..2 * n {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            rhs(&tmp, &mut k2);
            for i in 0..2 * n {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            rhs(&tmp, &mut k3);
            for i in 0..2 * n {
                tmp[i] = y[i] + h * k3[i];
            }
            rhs(&tmp, &mut k4);
            for i in 0..2 * n {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            // A coordinate moving this far in one step means the step size no
            // longer resolves the trajectory (e.g. a near-pole pass).
            if y.iter().any(|c| !c.is_finite())
                || y[n..].iter().any(|c| (c * h).abs() > MAX_COORD_STEP)
            {
                return Err(Error::IntegrationDiverged {
                    at: h * (step + 1) as f64,
                });
            }
            if self.excluded(&y[..n]) {
                return Err(Error::ChartSingularity {
                    coords: y[..n].to_vec(),
                });
            }
        }
        y.truncate(n);
        Ok(y)
    }

    /// Solves for the initial velocity at `p` whose geodesic reaches `x` at
    /// parameter 1.
    pub fn shoot(&self, p: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let delta = self.diff(p, x);
        if delta.iter().all(|d| *d == 0.0) {
            return Ok(vec![0.0; p.len()]);
        }
        // No minimizing geodesic is longer than the chart segment, so longer
        // Newton solutions belong to another branch.
        let bound = self.segment_length(p, &delta) * (1.0 + 1e-6) + 1e-9;
        let accept = |v: Vec<f64>| -> Result<Vec<f64>> {
            let length = self.norm(p, &v);
            if length > self.config.horizon {
                Err(Error::BeyondHorizon {
                    length,
                    horizon: self.config.horizon,
                })
            } else if length > bound {
                Err(Error::ShootingNoConverge {
                    residual: length - bound,
                    iterations: 0,
                })
            } else {
                Ok(v)
            }
        };

        let first = match self
            .newton(p, x, self.initial_guess(p, &delta))
            .and_then(accept)
        {
            Ok(v) => return Ok(v),
            Err(e) => e,
        };
        // Continuation along the chart segment from p to x.
        for pieces in [2usize, 4, 8, 16] {
            if let Ok(v) = self.continuation(p, &delta, pieces).and_then(accept) {
                return Ok(v);
            }
        }
        Err(first)
    }

    /// Second-order guess: `x(1) ≈ p + v − ½Γ(v, v)`, with Γ taken at the
    /// segment midpoint.
    fn initial_guess(&self, p: &[f64], delta: &[f64]) -> Vec<f64> {
        let mid: Vec<f64> = p.iter().zip(delta).map(|(a, d)| a + 0.5 * d).collect();
        let mut acc = vec![0.0; p.len()];
        self.acceleration(&mid, delta, &mut acc);
        let guess: Vec<f64> = delta.iter().zip(&acc).map(|(d, a)| d - 0.5 * a).collect();
        if guess.iter().all(|c| c.is_finite()) {
            guess
        } else {
            delta.to_vec()
        }
    }

    /// Metric length of the chart segment `p + s·delta`, `s ∈ [0, 1]` (Simpson).
    fn segment_length(&self, p: &[f64], delta: &[f64]) -> f64 {
        const N: usize = 16;
        let speed = |s: f64| {
            let x: Vec<f64> = p.iter().zip(delta).map(|(a, d)| a + s * d).collect();
            self.norm(&x, delta)
        };
        let mut sum = speed(0.0) + speed(1.0);
        for k in 1..N {
            sum += if k % 2 == 1 { 4.0 } else { 2.0 } * speed(k as f64 / N as f64);
        }
        sum / (3.0 * N as f64)
    }

    fn continuation(&self, p: &[f64], delta: &[f64], pieces: usize) -> Result<Vec<f64>> {
        let mut guess: Vec<f64> = delta.iter().map(|d| d / pieces as f64).collect();
        for k in 1..=pieces {
            let frac = k as f64 / pieces as f64;
            let mut target: Vec<f64> = p.iter().zip(delta).map(|(a, d)| a + frac * d).collect();
            self.wrap(&mut target);
            let v = self.newton(p, &target, guess)?;
            let grow = (k + 1) as f64 / k as f64;
            guess = v.iter().map(|c| c * grow).collect();
            if k == pieces {
                return Ok(v);
            }
        }
        unreachable!("pieces >= 1")
    }

    fn residual(&self, p: &[f64], x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let end = self.integrate_raw(p, v, 1.0)?;
        Ok(self.diff(x, &end))
    }

    fn jacobian(&self, p: &[f64], x: &[f64], v: &[f64], r: &[f64]) -> Result<DMatrix<f64>> {
        let n = p.len();
        let mut jac = DMatrix::zeros(n, n);
        let h = 1e-7 * inf_norm(v).max(1e-3);
        let mut vp = v.to_vec();
        for j in 0..n {
            vp[j] = v[j] + h;
            let rp = self.residual(p, x, &vp)?;
            vp[j] = v[j];
            for i in 0..n {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        Ok(jac)
    }

    /// Quasi-Newton on the endpoint residual: a forward-difference Jacobian,
    /// Broyden updates while they keep reducing the residual, damped steps
    /// after each refresh.
    fn newton(&self, p: &[f64], x: &[f64], mut v: Vec<f64>) -> Result<Vec<f64>> {
        let n = p.len();
        let tol = self.config.shoot_tol;
        let mut r = self.residual(p, x, &v)?;
        let mut rn = inf_norm(&r);
        let mut jac: Option<DMatrix<f64>> = None;
        let mut iterations = 0;
        while rn > tol && iterations < self.config.shoot_max_iter {
            iterations += 1;
            let (j, fresh) = match jac.take() {
                Some(j) => (j, false),
                None => (self.jacobian(p, x, &v, &r)?, true),
            };
            let rhs = DVector::from_iterator(n, r.iter().map(|c| -c));
            let Some(step) = j.clone().lu().solve(&rhs) else {
                if fresh {
                    break;
                }
                continue;
            };

            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..if fresh { 12 } else { 1 } {
                let trial: Vec<f64> = v
                    .iter()
                    .zip(step.iter())
                    .map(|(a, s)| a + alpha * s)
                    .collect();
                if let Ok(rt) = self.residual(p, x, &trial) {
                    let tn = inf_norm(&rt);
                    if tn < rn {
                        accepted = Some((trial, rt, tn));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((trial, rt, tn)) => {
                    let s = step * alpha;
                    let dr = DVector::from_iterator(n, rt.iter().zip(&r).map(|(a, b)| a - b));
                    let update = (dr - &j * &s) * s.transpose() / s.dot(&s);
                    jac = Some(j + update);
                    v = trial;
                    r = rt;
                    rn = tn;
                }
                None if fresh => break,
                None => {}
            }
        }
        if rn <= tol {
            Ok(v)
        } else {
            Err(Error::ShootingNoConverge {
                residual: rn,
                iterations,
            })
        }
    }
}

/// Largest coordinate change per integration step before the trajectory is
/// treated as unresolved.
const MAX_COORD_STEP: f64 = 0.1;

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, c| m.max(c.abs()))
}

fn wrap_centered(c: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    let mut w = (c + half).rem_euclid(period) - half;
    if w == -half {
        w = half;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_chart() -> Chart {
        Chart {
            metric: ChartMetric::Sphere2,
            config: ChartConfig::default(),
        }
    }

    #[test]
    fn wrapping_is_centered() {
        assert!((wrap_centered(3.5 * PI, TAU) + 0.5 * PI).abs() < 1e-12);
        assert_eq!(wrap_centered(-PI, TAU), PI);
        assert!((wrap_centered(0.3, TAU) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn equator_is_a_geodesic() {
        let c = sphere_chart();
        let end = c
            .integrate(&[PI / 2.0, 0.0], &[0.0, 1.0], PI / 4.0)
            .unwrap();
        assert!((end[0] - PI / 2.0).abs() < 1e-12);
        assert!((end[1] - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn pole_crossing_is_rejected() {
        let c = sphere_chart();
        let err = c.integrate(&[0.3, 0.0], &[-1.0, 0.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::ChartSingularity { .. }));
    }

    #[test]
    fn horizon_is_enforced() {
        let c = sphere_chart();
        let err = c
            .integrate(&[PI / 2.0, 0.0], &[0.0, 10.0], 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::BeyondHorizon { .. }));
    }

    #[test]
    fn finite_difference_christoffels_match_analytic() {
        let analytic = sphere_chart();
        let custom = Chart {
            metric: ChartMetric::Custom {
                name: "fd-sphere".into(),
                dim: 2,
                metric: Arc::new(|x: &[f64]| {
                    let s = x[0].sin();
                    DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, s * s]))
                }),
                periods: vec![None, Some(TAU)],
            },
            config: ChartConfig::default(),
        };
        let x = [0.9, 0.4];
        let a = analytic.christoffel(&x);
        let b = custom.christoffel(&x);
        for k in 0..2 {
            for ij in 0..4 {
                assert!((a[k][ij] - b[k][ij]).abs() < 1e-8, "Γ[{k}][{ij}]");
            }
        }
    }

    #[test]
    fn shooting_recovers_velocity() {
        let c = sphere_chart();
        let p = [1.1, 0.2];
        let v = [0.35, -0.6];
        let x = c.integrate(&p, &v, 1.0).unwrap();
        let w = c.shoot(&p, &x).unwrap();
        assert!(
            (w[0] - v[0]).abs() < 1e-9 && (w[1] - v[1]).abs() < 1e-9,
            "{w:?}"
        );
    }
}
