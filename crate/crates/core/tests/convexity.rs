use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use radial_lab::convexity::{
    contraction_threshold, inner_convex_set, is_geodesically_convex, is_p_lambda_convex,
    is_star_shaped, is_totally_p_convex, Predicate, DEFAULT_PROBE_RADIUS,
};
use radial_lab::experiments::scenes;
use radial_lab::{
    ContractionMap, DirectionPolicy, Error, Manifold, Point, Region, Sampling, Verdict,
};
use rand::Rng;

fn north() -> Point {
    [0.0, 0.0, 1.0].into()
}

fn sampling() -> Sampling {
    Sampling::new(200, 65, 42)
}

#[test]
fn three_points_are_not_convex() {
    let e = Manifold::euclidean(2);
    let r = Region::finite_set(
        &e,
        vec![[0.0, 0.0].into(), [1.0, 0.0].into(), [0.0, 1.0].into()],
    )
    .unwrap();
    let rep = is_geodesically_convex(&r, &sampling()).unwrap();
    assert_eq!(rep.verdict, Verdict::Refuted);
    assert_eq!(rep.predicate, Predicate::GeodesicallyConvex);
    let w = rep.witness.unwrap();
    assert!(w.replays(&r));
    assert!(!r.contains(&w.point));
}

#[test]
fn unit_ball_is_convex() {
    let e = Manifold::euclidean(2);
    let r = Region::ball(&e, [0.0, 0.0].into(), 1.0).unwrap();
    let rep = is_geodesically_convex(&r, &sampling()).unwrap();
    assert_eq!(rep.verdict, Verdict::HoldsOnSamples);
    assert_eq!(rep.pairs_checked, 200);
    assert!(rep.witness.is_none());
}

#[test]
fn unit_lambda_matches_geodesic_convexity() {
    let s = Manifold::sphere(2);
    let e = Manifold::euclidean(2);
    let (hemi, _) = scenes::hemisphere_two_points().unwrap();
    let (arc, _) = scenes::equator_arc_and_pole().unwrap();
    let regions = vec![
        (Region::cap(&s, north(), 1.0).unwrap(), north()),
        (hemi, north()),
        (arc, north()),
        (
            Region::parse("union(ball 0 0 1, ball 3 0 1)", &e, None).unwrap(),
            [0.0, 0.0].into(),
        ),
    ];
    for seed in [1, 2, 3] {
        let sampling = Sampling::new(100, 33, seed);
        for (r, p) in &regions {
            let c = ContractionMap::canonical(r.manifold().clone(), p.clone(), 1.0).unwrap();
            let a = is_p_lambda_convex(r, &c, &sampling).unwrap();
            let b = is_geodesically_convex(r, &sampling).unwrap();
            assert_eq!(a.verdict, b.verdict, "{r:?} seed {seed}");
        }
    }
}

#[test]
fn refutations_replay() {
    let (arc, p) = scenes::equator_arc_and_pole().unwrap();
    for l in [0.2, 0.5, 0.9, 1.0] {
        let c = ContractionMap::canonical(arc.manifold().clone(), p.clone(), l).unwrap();
        let rep = is_p_lambda_convex(&arc, &c, &sampling()).unwrap();
        assert_eq!(rep.verdict, Verdict::Refuted);
        assert!(rep.witness.unwrap().replays(&arc));
    }
}

#[test]
fn hemisphere_with_outer_points() {
    let (r, p) = scenes::hemisphere_two_points().unwrap();
    let half = ContractionMap::canonical(r.manifold().clone(), p.clone(), 0.5).unwrap();
    assert!(is_p_lambda_convex(&r, &half, &sampling()).unwrap().holds());
    let most = half.with_lambda(0.95).unwrap();
    assert!(!is_p_lambda_convex(&r, &most, &sampling()).unwrap().holds());
}

#[test]
fn planar_finite_sets_fail_below_one() {
    let (r, p) = scenes::planar_finite_set().unwrap();
    for l in [0.1, 0.5, 0.99] {
        let c = ContractionMap::canonical(r.manifold().clone(), p.clone(), l).unwrap();
        assert!(!is_p_lambda_convex(&r, &c, &sampling()).unwrap().holds());
    }
}

#[test]
fn cap_is_totally_convex_about_its_center() {
    let s = Manifold::sphere(2);
    let cap = Region::cap(&s, north(), FRAC_PI_4).unwrap();
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let rep = is_totally_p_convex(
        &cap,
        &north(),
        &DirectionPolicy::Canonical,
        &grid,
        &sampling(),
    )
    .unwrap();
    assert_eq!(rep.verdict, Verdict::HoldsOnSamples);
    assert_eq!(rep.per_lambda.len(), 10);

    let (arc, p) = scenes::equator_arc_and_pole().unwrap();
    let rep =
        is_totally_p_convex(&arc, &p, &DirectionPolicy::Canonical, &grid, &sampling()).unwrap();
    assert!(rep.per_lambda.iter().all(|r| r.verdict == Verdict::Refuted));
}

#[test]
fn unit_grid_matches_geodesic_verdict() {
    let e = Manifold::euclidean(2);
    for spec in ["ball 0 0 1", "union(ball 0 0 1, ball 3 0 1)"] {
        let r = Region::parse(spec, &e, None).unwrap();
        let total = is_totally_p_convex(
            &r,
            &[0.0, 0.0].into(),
            &DirectionPolicy::Canonical,
            &[1.0],
            &sampling(),
        )
        .unwrap();
        let geo = is_geodesically_convex(&r, &sampling()).unwrap();
        assert_eq!(total.verdict, geo.verdict);
    }
}

#[test]
fn invalid_grids_are_rejected() {
    let e = Manifold::euclidean(2);
    let r = Region::ball(&e, [0.0, 0.0].into(), 1.0).unwrap();
    let p: Point = [0.0, 0.0].into();
    let pol = DirectionPolicy::Canonical;
    assert!(is_totally_p_convex(&r, &p, &pol, &[], &sampling()).is_err());
    assert!(matches!(
        is_totally_p_convex(&r, &p, &pol, &[0.5, 1.5], &sampling()),
        Err(Error::InvalidLambda(_))
    ));
}

#[test]
fn star_shapedness() {
    let e = Manifold::euclidean(2);
    let ball = Region::ball(&e, [0.0, 0.0].into(), 1.0).unwrap();
    let pol = DirectionPolicy::Canonical;
    assert!(is_star_shaped(&ball, &[0.0, 0.0].into(), &pol, &sampling())
        .unwrap()
        .holds());

    let s = Manifold::sphere(2);
    let cap = Region::cap(&s, north(), 1.0).unwrap();
    assert!(is_star_shaped(&cap, &north(), &pol, &sampling())
        .unwrap()
        .holds());

    let (arc, p) = scenes::equator_arc_and_pole().unwrap();
    let rep = is_star_shaped(&arc, &p, &pol, &sampling()).unwrap();
    assert_eq!(rep.verdict, Verdict::Refuted);
    assert!(rep.witness.unwrap().replays(&arc));

    assert!(matches!(
        is_star_shaped(&ball, &[2.0, 0.0].into(), &pol, &sampling()),
        Err(Error::BaseNotInRegion)
    ));
}

#[test]
fn threshold_of_a_ball_is_one() {
    let e = Manifold::euclidean(2);
    let ball = Region::ball(&e, [0.0, 0.0].into(), 1.0).unwrap();
    let grid: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
    let rep = contraction_threshold(
        &ball,
        &[0.0, 0.0].into(),
        &DirectionPolicy::Canonical,
        &grid,
        &sampling(),
        DEFAULT_PROBE_RADIUS,
    )
    .unwrap();
    assert_eq!(rep.zeta_hat, Some(1.0));
    assert_eq!(rep.profile.len(), 20);
    assert!(rep.lambda_grid.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn threshold_needs_an_interior_base() {
    let e = Manifold::euclidean(2);
    let ball = Region::ball(&e, [0.0, 0.0].into(), 1.0).unwrap();
    let err = contraction_threshold(
        &ball,
        &[1.0, 0.0].into(),
        &DirectionPolicy::Canonical,
        &[0.5, 1.0],
        &sampling(),
        DEFAULT_PROBE_RADIUS,
    )
    .unwrap_err();
    assert!(matches!(err, Error::NotInterior { .. }));
}

#[test]
fn antipodal_pairs_are_resampled_not_refuted() {
    let s = Manifold::sphere(2);
    let poles = Region::finite_set(&s, vec![north(), [0.0, 0.0, -1.0].into()]).unwrap();
    let rep = is_geodesically_convex(&poles, &sampling()).unwrap();
    assert_eq!(rep.verdict, Verdict::HoldsOnSamples);
    assert!(rep.resampled > 0);
}

#[test]
fn empty_intersections_exhaust_the_sampler() {
    let e = Manifold::euclidean(2);
    let r = Region::parse("intersect(ball 0 0 1, ball 5 0 1)", &e, None).unwrap();
    assert!(matches!(
        is_geodesically_convex(&r, &sampling()),
        Err(Error::SamplerExhausted { .. })
    ));
}

#[test]
fn reports_do_not_depend_on_execution_mode() {
    let (r, p) = scenes::hemisphere_two_points().unwrap();
    let c = ContractionMap::canonical(r.manifold().clone(), p, 0.9).unwrap();
    let seq = is_p_lambda_convex(
        &r,
        &c,
        &sampling().with_execution(radial_lab::Execution::Sequential),
    )
    .unwrap();
    let par = is_p_lambda_convex(
        &r,
        &c,
        &sampling().with_execution(radial_lab::Execution::Parallel),
    )
    .unwrap();
    assert_eq!(
        serde_json::to_string(&seq).unwrap(),
        serde_json::to_string(&par).unwrap()
    );
}

#[test]
fn inner_set_of_two_points_is_their_segment() {
    let e = Manifold::euclidean(2);
    let c = ContractionMap::canonical(e, [0.0, 0.0].into(), 0.5).unwrap();
    let v = inner_convex_set(&[[2.0, 0.0].into(), [0.0, 2.0].into()], &c, 5).unwrap();
    assert_eq!(v.len(), 5);
    for (i, p) in v.iter().enumerate() {
        let t = i as f64 / 4.0;
        assert!((p.coords()[0] - (1.0 - t)).abs() < 1e-15 && (p.coords()[1] - t).abs() < 1e-15);
    }
    let only_p = inner_convex_set(&[[0.0, 0.0].into()], &c, 5).unwrap();
    assert_eq!(only_p, vec![Point::from([0.0, 0.0])]);
}

#[test]
fn inner_set_of_hemisphere_sample_stays_in_hemisphere() {
    let s = Manifold::sphere(2);
    let hemi = Region::hemisphere(&s, north()).unwrap();
    let mut rng = radial_lab::experiments::stream_rng(42, 0);
    let pts: Vec<Point> = (0..20).map(|_| hemi.sample(&mut rng).unwrap()).collect();
    let c = ContractionMap::canonical(s.clone(), north(), 0.5).unwrap();
    let v = inner_convex_set(&pts, &c, 17).unwrap();
    assert_eq!(v.len(), 190 * 17);
    assert!(v.iter().all(|p| p.coords()[2] > 0.0));

    // Geodesics between random members of V stay in the open hemisphere.
    let members = v.clone();
    let region = Region::custom(
        &s,
        "inner-set",
        |_, x, _| x.coords()[2] > 0.0,
        move |_, rng| Ok(members[rng.random_range(0..members.len())].clone()),
    );
    assert!(is_geodesically_convex(&region, &sampling())
        .unwrap()
        .holds());
    let colatitudes: Vec<f64> = v.iter().map(|p| p.coords()[2].acos()).collect();
    assert!(colatitudes.iter().all(|c| *c < FRAC_PI_2));
}

#[test]
fn inner_set_reports_the_failing_pair() {
    let s = Manifold::sphere(2);
    let c = ContractionMap::canonical(s, [1.0, 0.0, 0.0].into(), 1.0).unwrap();
    let err = inner_convex_set(
        &[
            north(),
            [0.5, 0.0, 0.75f64.sqrt()].into(),
            [0.0, 0.0, -1.0].into(),
        ],
        &c,
        5,
    )
    .unwrap_err();
    match err {
        Error::AtPair {
            first,
            second,
            source,
        } => {
            assert_eq!((first, second), (0, 2));
            assert!(source.is_cut_locus());
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn region_specs_parse() {
    let s = Manifold::sphere(2);
    let r = Region::parse("intersect(cap 0 0 1 1.2, hemisphere 1 0 0)", &s, None).unwrap();
    assert!(r.contains(&[0.6, 0.0, 0.8].into()));
    assert!(!r.contains(&[-0.6, 0.0, 0.8].into()));
    assert!(Region::parse("blob 1 2", &s, None).is_err());
    assert!(Region::parse("cap 0 0 2 1", &s, None).is_err());
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pts.txt"), "1 0 0\n0 1 0\n").unwrap();
    let r = Region::parse("points pts.txt", &s, Some(dir.path())).unwrap();
    assert!(r.contains(&[0.0, 1.0, 0.0].into()));
    assert!(!r.contains(&north()));
}
