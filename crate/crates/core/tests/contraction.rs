use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use radial_lab::{ContractionMap, DirectionPolicy, Error, Execution, Manifold, Point, TangentVec};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn close(a: &Point, b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.coords().iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn north() -> Point {
    [0.0, 0.0, 1.0].into()
}

#[test]
fn euclidean_direction_and_contraction() {
    let e = Manifold::euclidean(2);
    let c = ContractionMap::canonical(e.clone(), [0.0, 0.0].into(), 0.5).unwrap();
    assert_eq!(c.direction(&[2.0, 4.0].into()).unwrap().vec, vec![2.0, 4.0]);
    assert!(close(
        &c.contract_point(&[2.0, 0.0].into()).unwrap(),
        &[1.0, 0.0],
        1e-15
    ));
    let set = c
        .contract_set(&[[2.0, 0.0].into(), [0.0, 2.0].into()])
        .unwrap();
    assert!(close(&set[0], &[1.0, 0.0], 1e-15) && close(&set[1], &[0.0, 1.0], 1e-15));
    assert!(c.contract_set(&[]).unwrap().is_empty());
}

#[test]
fn sphere_pole_to_equator_halfway() {
    let s = Manifold::sphere(2);
    let c = ContractionMap::canonical(s, north(), 0.5).unwrap();
    let d = c.direction(&[1.0, 0.0, 0.0].into()).unwrap();
    assert!(close(&Point::new(d.vec), &[FRAC_PI_2, 0.0, 0.0], 1e-12));
    let out = c
        .contract_set(&[[1.0, 0.0, 0.0].into(), [0.0, 1.0, 0.0].into()])
        .unwrap();
    assert!(close(&out[0], &[H, 0.0, H], 1e-12));
    assert!(close(&out[1], &[0.0, H, H], 1e-12));
}

#[test]
fn contracted_equator_keeps_colatitude() {
    let s = Manifold::sphere(2);
    let arc = s
        .geodesic(&[1.0, 0.0, 0.0].into(), &[0.0, 1.0, 0.0].into())
        .unwrap()
        .sample(33)
        .unwrap();
    let c = ContractionMap::canonical(s, north(), 0.5).unwrap();
    let out = c.contract_curve(&arc).unwrap();
    assert_eq!(out.len(), 33);
    assert!(out.iter().all(|p| (p.coords()[2] - H).abs() < 1e-12));
}

#[test]
fn euclidean_segment_contracts_to_segment() {
    let e = Manifold::euclidean(2);
    let seg: Vec<Point> = (0..=8)
        .map(|i| Point::new(vec![0.25 * i as f64; 2]))
        .collect();
    let c = ContractionMap::canonical(e, [0.0, 0.0].into(), 0.5).unwrap();
    let out = c.contract_curve(&seg).unwrap();
    for (i, p) in out.iter().enumerate() {
        assert!(close(p, &[0.125 * i as f64; 2], 1e-15));
    }
}

#[test]
fn antipode_needs_a_table_entry() {
    let s = Manifold::sphere(2);
    let south: Point = [0.0, 0.0, -1.0].into();
    let canonical = ContractionMap::canonical(s.clone(), north(), 0.5).unwrap();
    assert!(canonical.direction(&south).unwrap_err().is_cut_locus());

    let meridian = TangentVec::new(north(), vec![PI, 0.0, 0.0]);
    let table = DirectionPolicy::table(&s, vec![(south.clone(), meridian)], false).unwrap();
    let c = ContractionMap::new(s.clone(), north(), 0.5, table).unwrap();
    assert!(close(
        &Point::new(c.direction(&south).unwrap().vec),
        &[PI, 0.0, 0.0],
        0.0
    ));
    assert!(close(
        &c.contract_point(&south).unwrap(),
        &[1.0, 0.0, 0.0],
        1e-12
    ));
    assert!(matches!(
        c.direction(&[1.0, 0.0, 0.0].into()),
        Err(Error::MissingOverride(_))
    ));
}

#[test]
fn bad_table_entries_are_rejected() {
    let s = Manifold::sphere(2);
    let wrong = TangentVec::new(north(), vec![1.0, 0.0, 0.0]);
    let err =
        DirectionPolicy::table(&s, vec![([0.0, 0.0, -1.0].into(), wrong)], false).unwrap_err();
    assert!(matches!(err, Error::InvalidOverride { .. }));
}

#[test]
fn lambda_outside_unit_interval_is_rejected() {
    let e = Manifold::euclidean(1);
    for l in [0.0, -0.5, 1.5, f64::NAN] {
        assert!(matches!(
            ContractionMap::canonical(e.clone(), [0.0].into(), l),
            Err(Error::InvalidLambda(_))
        ));
    }
}

#[test]
fn failing_element_is_reported_with_index() {
    let s = Manifold::sphere(2);
    let c = ContractionMap::canonical(s, north(), 0.5).unwrap();
    let pts: Vec<Point> = vec![
        [1.0, 0.0, 0.0].into(),
        [0.0, 1.0, 0.0].into(),
        [0.0, 0.0, -1.0].into(),
    ];
    match c.contract_set(&pts).unwrap_err() {
        Error::AtIndex { index, source } => {
            assert_eq!(index, 2);
            assert!(source.is_cut_locus());
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let s = Manifold::sphere(2);
    let c = ContractionMap::canonical(s.clone(), north(), 0.3).unwrap();
    let pts: Vec<Point> = (0..64)
        .map(|i| {
            let a = i as f64 * 0.1;
            let z = -0.9 + 0.025 * i as f64;
            let r = (1.0 - z * z).sqrt();
            Point::new(vec![r * a.cos(), r * a.sin(), z])
        })
        .collect();
    let a = c.contract_set_with(Execution::Sequential, &pts).unwrap();
    let b = c.contract_set_with(Execution::Parallel, &pts).unwrap();
    assert_eq!(a, b);
}

fn hyperboloid(x: f64, y: f64) -> Point {
    Point::new(vec![x, y, (1.0 + x * x + y * y).sqrt()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn euclidean_closed_form(p in prop::array::uniform3(-5.0f64..5.0), x in prop::array::uniform3(-5.0f64..5.0), l in 0.01f64..=1.0) {
        let e = Manifold::euclidean(3);
        let c = ContractionMap::canonical(e, p.into(), l).unwrap();
        let got = c.contract_point(&x.into()).unwrap();
        for i in 0..3 {
            prop_assert!((got.coords()[i] - (l * x[i] + (1.0 - l) * p[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn base_point_is_fixed(a in -2.0f64..2.0, b in -2.0f64..2.0, l in 0.01f64..=1.0) {
        let h = Manifold::hyperbolic(2);
        let p = hyperboloid(a, b);
        let c = ContractionMap::canonical(h, p.clone(), l).unwrap();
        prop_assert!(close(&c.contract_point(&p).unwrap(), p.coords(), 1e-9));
    }

    #[test]
    fn hyperbolic_composition_and_scaling(a in -1.5f64..1.5, b in -1.5f64..1.5, c in -1.5f64..1.5, d in -1.5f64..1.5, l in 0.01f64..=1.0, beta in 0.01f64..=1.0) {
        let h = Manifold::hyperbolic(2);
        let (p, x) = (hyperboloid(a, b), hyperboloid(c, d));
        let outer = ContractionMap::canonical(h.clone(), p.clone(), l).unwrap();
        let inner = outer.with_lambda(beta).unwrap();
        let joint = outer.with_lambda(l * beta).unwrap();
        let left = outer.contract_point(&inner.contract_point(&x).unwrap()).unwrap();
        let right = joint.contract_point(&x).unwrap();
        prop_assert!(close(&left, right.coords(), 1e-6));
        let d0 = h.dist(&p, &x).unwrap();
        let d1 = h.dist(&p, &outer.contract_point(&x).unwrap()).unwrap();
        prop_assert!((d1 - l * d0).abs() <= 1e-6 * (l * d0).max(1e-6));
    }

    #[test]
    fn unit_lambda_is_identity(theta in 0.1f64..3.0, phi in -3.0f64..3.0) {
        let s = Manifold::sphere(2);
        let x = Point::new(vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
        let c = ContractionMap::canonical(s, north(), 1.0).unwrap();
        prop_assert!(close(&c.contract_point(&x).unwrap(), x.coords(), 1e-9));
    }
}
