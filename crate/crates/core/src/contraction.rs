//! Direction functions and the λ-radial contraction `x ↦ γ_px(λ)`.

use crate::error::{Error, Result};
use crate::manifold::{vector::max_abs_diff, Manifold, Point, TangentVec};
use crate::par::{self, Execution};

/// Coordinate tolerance for looking up table entries.
const LOOKUP_TOL: f64 = 1e-9;

/// Chooses, for each target `x`, one initial velocity at the base point whose
/// geodesic reaches `x` at parameter 1.
#[derive(Debug, Clone, Default)]
pub enum DirectionPolicy {
    /// The minimizing direction `log_p(x)`; fails on the cut locus.
    #[default]
    Canonical,
    /// Explicit choices. Targets without an entry fall back to the canonical
    /// direction only when `fallback` is set.
    Table {
        entries: Vec<(Point, TangentVec)>,
        fallback: bool,
    },
}

impl DirectionPolicy {
    /// A table policy; every entry is checked to reach its target.
    pub fn table(
        manifold: &Manifold,
        entries: Vec<(Point, TangentVec)>,
        fallback: bool,
    ) -> Result<Self> {
        let tol = manifold.tolerances().chart;
        for (target, v) in &entries {
            let reached = manifold.exp_map(v)?;
            let miss = manifold.coord_distance(&reached, target);
            if miss > tol {
                return Err(Error::InvalidOverride { miss });
            }
        }
        Ok(DirectionPolicy::Table { entries, fallback })
    }

    pub fn is_canonical(&self) -> bool {
        matches!(self, DirectionPolicy::Canonical)
    }

    fn lookup(&self, x: &Point) -> Option<&TangentVec> {
        match self {
            DirectionPolicy::Canonical => None,
            DirectionPolicy::Table { entries, .. } => entries
                .iter()
                .find(|(t, _)| {
                    t.len() == x.len() && max_abs_diff(t.coords(), x.coords()) <= LOOKUP_TOL
                })
                .map(|(_, v)| v),
        }
    }
}

/// The map `x ↦ γ_px(λ)` for a fixed base point, λ and direction policy.
#[derive(Debug, Clone)]
pub struct ContractionMap {
    manifold: Manifold,
    base: Point,
    lambda: f64,
    policy: DirectionPolicy,
}

impl ContractionMap {
    pub fn new(
        manifold: Manifold,
        base: Point,
        lambda: f64,
        policy: DirectionPolicy,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidLambda(lambda));
        }
        manifold.validate(&base)?;
        Ok(Self {
            manifold,
            base,
            lambda,
            policy,
        })
    }

    pub fn canonical(manifold: Manifold, base: Point, lambda: f64) -> Result<Self> {
        Self::new(manifold, base, lambda, DirectionPolicy::Canonical)
    }

    /// Same base and policy, different λ.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.manifold.clone(),
            self.base.clone(),
            lambda,
            self.policy.clone(),
        )
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn policy(&self) -> &DirectionPolicy {
        &self.policy
    }

    /// η_p(x): the chosen initial velocity at the base point towards `x`.
    pub fn direction(&self, x: &Point) -> Result<TangentVec> {
        self.manifold.validate(x)?;
        match &self.policy {
            DirectionPolicy::Canonical => self.manifold.log_map(&self.base, x),
            DirectionPolicy::Table { fallback, .. } => match self.policy.lookup(x) {
                Some(v) => Ok(v.clone()),
                None if *fallback => self.manifold.log_map(&self.base, x),
                None => Err(Error::MissingOverride(x.coords().to_vec())),
            },
        }
    }

    pub fn contract_point(&self, x: &Point) -> Result<Point> {
        if self.lambda == 1.0 {
            // γ_px(1) = x for every admissible direction.
            self.manifold.validate(x)?;
            return Ok(x.clone());
        }
        let v = self.direction(x)?;
        self.manifold.exp_map(&v.scaled(self.lambda))
    }

    pub fn contract_set(&self, points: &[Point]) -> Result<Vec<Point>> {
        self.contract_set_with(Execution::default(), points)
    }

    /// Elementwise contraction; the first failing element (by index) is reported.
    pub fn contract_set_with(&self, exec: Execution, points: &[Point]) -> Result<Vec<Point>> {
        par::map_slice(exec, points, |_, x| self.contract_point(x))
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| Error::at(i, e)))
            .collect()
    }

    /// Pointwise contraction of a sampled curve, order preserved.
    pub fn contract_curve(&self, curve: &[Point]) -> Result<Vec<Point>> {
        self.contract_set(curve)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn north() -> Point {
        [0.0, 0.0, 1.0].into()
    }

    #[test]
    fn euclidean_matches_affine_formula() {
        let m = Manifold::euclidean(2);
        let c = ContractionMap::canonical(m, [0.0, 0.0].into(), 0.5).unwrap();
        assert_eq!(
            c.contract_point(&[2.0, 0.0].into()).unwrap().coords(),
            &[1.0, 0.0]
        );
        let set = c
            .contract_set(&[[2.0, 0.0].into(), [0.0, 2.0].into()])
            .unwrap();
        assert_eq!(set, vec![Point::from([1.0, 0.0]), Point::from([0.0, 1.0])]);
        assert!(c.contract_set(&[]).unwrap().is_empty());
        assert_eq!(c.direction(&[2.0, 4.0].into()).unwrap().vec, vec![2.0, 4.0]);
    }

    #[test]
    fn sphere_contraction_halves_colatitude() {
        let m = Manifold::sphere(2);
        let c = ContractionMap::canonical(m, north(), 0.5).unwrap();
        let y = c.contract_point(&[1.0, 0.0, 0.0].into()).unwrap();
        assert!(max_abs_diff(y.coords(), &[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]) < 1e-15);
    }

    #[test]
    fn lambda_must_be_in_unit_interval() {
        let m = Manifold::euclidean(1);
        for bad in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(
                ContractionMap::canonical(m.clone(), [0.0].into(), bad),
                Err(Error::InvalidLambda(_))
            ));
        }
    }

    #[test]
    fn table_policy_handles_antipode() {
        let m = Manifold::sphere(2);
        let south: Point = [0.0, 0.0, -1.0].into();
        let meridian = TangentVec::new(north(), vec![PI, 0.0, 0.0]);
        let policy =
            DirectionPolicy::table(&m, vec![(south.clone(), meridian.clone())], false).unwrap();
        let c = ContractionMap::new(m.clone(), north(), 0.5, policy).unwrap();
        assert_eq!(c.direction(&south).unwrap(), meridian);
        let half = c.contract_point(&south).unwrap();
        assert!(max_abs_diff(half.coords(), &[1.0, 0.0, 0.0]) < 1e-15);

        let missing = c.direction(&[1.0, 0.0, 0.0].into()).unwrap_err();
        assert!(matches!(missing, Error::MissingOverride(_)));

        let canonical = ContractionMap::canonical(m.clone(), north(), 0.5).unwrap();
        assert!(canonical.direction(&south).unwrap_err().is_cut_locus());

        let wrong = TangentVec::new(north(), vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            DirectionPolicy::table(&m, vec![(south, wrong)], false),
            Err(Error::InvalidOverride { .. })
        ));
    }

    #[test]
    fn set_errors_carry_index() {
        let m = Manifold::sphere(2);
        let c = ContractionMap::canonical(m, north(), 0.5).unwrap();
        let pts: Vec<Point> = vec![[1.0, 0.0, 0.0].into(), [0.0, 0.0, -1.0].into()];
        match c.contract_set(&pts).unwrap_err() {
            Error::AtIndex { index, source } => {
                assert_eq!(index, 1);
                assert!(source.is_cut_locus());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
