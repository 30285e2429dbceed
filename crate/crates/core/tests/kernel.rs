use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use radial_lab::{Error, Manifold, Point, TangentVec};

fn unit(v: [f64; 3]) -> Vec<f64> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.iter().map(|c| c / n).collect()
}

fn sphere_point() -> impl Strategy<Value = Vec<f64>> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("away from zero", |v| {
            v.iter().map(|c| c * c).sum::<f64>() > 0.05
        })
        .prop_map(unit)
}

fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() - 1;
    a[..n].iter().zip(&b[..n]).map(|(x, y)| x * y).sum::<f64>() - a[n] * b[n]
}

fn hyperboloid(x: f64, y: f64) -> Vec<f64> {
    vec![x, y, (1.0 + x * x + y * y).sqrt()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sphere_distance_matches_arccos(p in sphere_point(), x in sphere_point()) {
        let m = Manifold::sphere(2);
        let d = m.dist(&Point::new(p.clone()), &Point::new(x.clone())).unwrap();
        let dot: f64 = p.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((d - dot.clamp(-1.0, 1.0).acos()).abs() < 1e-7);
    }

    #[test]
    fn sphere_log_inverts_exp(p in sphere_point(), raw in prop::array::uniform3(-1.0f64..1.0), len in 0.0f64..(0.9 * PI)) {
        let m = Manifold::sphere(2);
        let p = Point::new(p);
        let v = m.project_tangent(&p, &raw);
        let n = m.norm(&v);
        prop_assume!(n > 1e-3);
        let v = v.scaled(len / n);
        let x = m.exp_map(&v).unwrap();
        let w = m.log_map(&p, &x).unwrap();
        for (a, b) in w.vec.iter().zip(&v.vec) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!((m.dist(&p, &x).unwrap() - len).abs() < 1e-9);
    }

    #[test]
    fn hyperbolic_distance_matches_arccosh(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let m = Manifold::hyperbolic(2);
        let (p, x) = (hyperboloid(a, b), hyperboloid(c, d));
        let got = m.dist(&Point::new(p.clone()), &Point::new(x.clone())).unwrap();
        let want = (-minkowski(&p, &x)).max(1.0).acosh();
        prop_assert!((got - want).abs() < 1e-6 * want.max(1.0));
    }

    #[test]
    fn distance_is_symmetric(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let m = Manifold::hyperbolic(2);
        let (p, x) = (Point::new(hyperboloid(a, b)), Point::new(hyperboloid(c, d)));
        prop_assert!((m.dist(&p, &x).unwrap() - m.dist(&x, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn geodesic_points_stay_on_the_segment(p in sphere_point(), x in sphere_point(), t in 0.0f64..1.0) {
        let m = Manifold::sphere(2);
        let (p, x) = (Point::new(p), Point::new(x));
        let d = m.dist(&p, &x).unwrap();
        prop_assume!(d < PI - 1e-3);
        let g = m.geodesic_point(&p, &x, t).unwrap();
        prop_assert!((m.dist(&p, &g).unwrap() - t * d).abs() < 1e-9);
        prop_assert!((m.dist(&g, &x).unwrap() - (1.0 - t) * d).abs() < 1e-9);
    }

    #[test]
    fn chart_distance_matches_embedded(t1 in 0.6f64..2.5, f1 in -3.0f64..3.0, t2 in 0.6f64..2.5, f2 in -3.0f64..3.0) {
        let chart = Manifold::chart_sphere2();
        let emb = |t: f64, f: f64| vec![t.sin() * f.cos(), t.sin() * f.sin(), t.cos()];
        let dot: f64 = emb(t1, f1).iter().zip(emb(t2, f2)).map(|(a, b)| a * b).sum();
        let want = dot.clamp(-1.0, 1.0).acos();
        // Keep the minimizing arc itself clear of the poles.
        prop_assume!(want < 2.0);
        let mid: Vec<f64> = emb(t1, f1).iter().zip(emb(t2, f2)).map(|(a, b)| a + b).collect();
        let mid_z = mid[2] / mid.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assume!(mid_z.abs() < 0.95);
        match chart.dist(&Point::new(vec![t1, f1]), &Point::new(vec![t2, f2])) {
            Ok(d) => prop_assert!((d - want).abs() < 1e-6, "chart {d} vs embedded {want}"),
            Err(e) => prop_assert!(false, "chart distance failed: {e}"),
        }
    }
}

#[test]
fn euclidean_exp_and_log_are_translation() {
    let m = Manifold::euclidean(2);
    let v = m.tangent([1.0, 2.0].into(), vec![0.5, -1.0]).unwrap();
    assert_eq!(m.exp_map(&v).unwrap(), Point::from([1.5, 1.0]));
    let w = m.log_map(&[1.0, 2.0].into(), &[4.0, 6.0].into()).unwrap();
    assert_eq!(w.vec, vec![3.0, 4.0]);
    assert_eq!(m.dist(&[0.0, 0.0].into(), &[3.0, 4.0].into()).unwrap(), 5.0);
}

#[test]
fn sphere_log_fails_at_the_antipode() {
    let m = Manifold::sphere(2);
    let err = m
        .log_map(&[0.0, 0.0, 1.0].into(), &[0.0, 0.0, -1.0].into())
        .unwrap_err();
    assert!(err.is_cut_locus());
}

#[test]
fn off_manifold_points_are_rejected() {
    let m = Manifold::sphere(2);
    assert!(matches!(
        m.point(vec![1.0, 1.0, 0.0]),
        Err(Error::InvalidPoint(_))
    ));
    assert!(matches!(
        m.point(vec![1.0, 0.0]),
        Err(Error::DimensionMismatch { .. })
    ));
    let h = Manifold::hyperbolic(2);
    assert!(h.point(vec![0.0, 0.0, -1.0]).is_err());
}

#[test]
fn chart_quarter_meridian() {
    let chart = Manifold::chart_sphere2();
    let v = TangentVec::new([FRAC_PI_2, 0.0].into(), vec![-0.5, 0.0]);
    let x = chart.integrate_geodesic(&v, 1.0).unwrap();
    assert!((x.coords()[0] - (FRAC_PI_2 - 0.5)).abs() < 1e-9);
    assert!(x.coords()[1].abs() < 1e-12);
}

#[test]
fn deviation_of_sampled_geodesic_is_small_and_reversible() {
    let m = Manifold::sphere(2);
    let a: Point = [1.0, 0.0, 0.0].into();
    let b = Point::new(unit([0.0, 1.0, 1.0]));
    let seg = m.geodesic(&a, &b).unwrap();
    let curve = seg.sample(17).unwrap();
    let t_steps = 65;
    let dev = radial_lab::convexity::geodesic_deviation(&m, &curve, t_steps).unwrap();
    assert!(dev < 2.0 * seg.length() / t_steps as f64);
    let mut rev = curve.clone();
    rev.reverse();
    let back = radial_lab::convexity::geodesic_deviation(&m, &rev, t_steps).unwrap();
    assert!((dev - back).abs() < 1e-9);
}

#[test]
fn dense_equator_deviation() {
    let m = Manifold::sphere(2);
    let curve = m
        .geodesic(&[1.0, 0.0, 0.0].into(), &[0.0, 1.0, 0.0].into())
        .unwrap()
        .sample(200)
        .unwrap();
    assert!(radial_lab::convexity::geodesic_deviation(&m, &curve, 1024).unwrap() < 2e-3);
}
