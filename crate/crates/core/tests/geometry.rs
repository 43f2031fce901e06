use std::f64::consts::PI;

use invopt::geometry::{
    angle, build_cone, circumcenter_desk, extreme_rays, feasibility_program, incenter, min_ray_cosine,
    ConeDescription, Offsets,
};
use invopt::linalg::{dot, norm2};
use invopt::losses::Regularizer;
use invopt::model::{binary_points, IdentityFeatures};
use invopt::rng::{stream, STREAM_MISC};
use invopt::{Error, IODataset, IOInstance, Response, ThetaSet};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm2(v);
    v.iter().map(|x| x / n).collect()
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Rows with a random interior axis, unit length.
fn random_cone(rng: &mut ChaCha8Rng, p: usize, k: usize) -> Vec<Vec<f64>> {
    let axis = unit(&(0..p).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
    let mut rows = Vec::new();
    while rows.len() < k {
        let a = unit(&(0..p).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
        let c = dot(&a, &axis);
        if c < -0.2 {
            rows.push(a);
        } else if c > 0.2 {
            rows.push(a.iter().map(|x| -x).collect());
        }
    }
    rows
}

/// Extreme rays of a pointed 3D cone: pairwise cross products of rows that
/// satisfy every row.
fn rays_3d(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut rays: Vec<Vec<f64>> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let c = cross(&rows[i], &rows[j]);
            if norm2(&c) < 1e-9 {
                continue;
            }
            for cand in [unit(&c), unit(&c).iter().map(|v| -v).collect()] {
                if rows.iter().all(|a| dot(a, &cand) <= 1e-9) && !rays.iter().any(|e| dot(e, &cand) > 1.0 - 1e-9) {
                    rays.push(cand);
                }
            }
        }
    }
    rays
}

/// Maximizes `f` over the unit sphere by Fibonacci grids on shrinking caps.
fn sphere_argmax(f: impl Fn(&[f64]) -> f64, points: usize) -> Vec<f64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut center = vec![0.0, 0.0, 1.0];
    for cap in [PI, 0.1, 0.02, 0.004, 0.001] {
        let c = unit(&center);
        let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = unit(&cross(&helper, &c));
        let e2 = cross(&c, &e1);
        let zmin = f64::cos(cap);
        let mut best = (f(&c), c.clone());
        for k in 0..points {
            let z = 1.0 - (1.0 - zmin) * (k as f64 + 0.5) / points as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let (x, y) = (r * (golden * k as f64).cos(), r * (golden * k as f64).sin());
            let t: Vec<f64> = (0..3).map(|j| x * e1[j] + y * e2[j] + z * c[j]).collect();
            let v = f(&t);
            if v > best.0 {
                best = (v, t);
            }
        }
        center = best.1;
    }
    center
}

#[test]
fn circumcenter_matches_sphere_grid_on_random_3d_cones() {
    let mut rng = stream(31, STREAM_MISC);
    for _ in 0..5 {
        let rows = random_cone(&mut rng, 3, 5);
        let cone = ConeDescription::from_rows(rows.clone()).unwrap();
        let rays = rays_3d(&rows);
        let lib_rays = extreme_rays(&cone, &ThetaSet::All).unwrap();
        assert_eq!(rays.len(), lib_rays.len());
        for e in &lib_rays {
            assert!(rays.iter().any(|r| dot(r, e) > 1.0 - 1e-9));
        }
        let theta = circumcenter_desk(&cone, &ThetaSet::All, 8).unwrap();
        let best = sphere_argmax(|t| min_ray_cosine(t, &rays), 200_000);
        assert!(angle(&theta, &best).unwrap() <= 1e-3);
        assert!(min_ray_cosine(&theta, &rays) >= min_ray_cosine(&best, &rays) - 1e-9);
    }
}

#[test]
fn incenter_matches_sphere_grid_on_random_3d_cone() {
    let mut rng = stream(32, STREAM_MISC);
    let rows = random_cone(&mut rng, 3, 5);
    let cone = ConeDescription::from_rows(rows.clone()).unwrap();
    let r = incenter(&cone, &ThetaSet::All, Regularizer::HalfSqL2, &Offsets::RowNorm).unwrap();
    let best = sphere_argmax(|t| cone.min_boundary_angle(t), 200_000);
    assert!(angle(&r.theta, &best).unwrap() <= 1e-3);
}

#[test]
fn circumcenter_of_orthant_is_the_diagonal() {
    let rows = vec![vec![-1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, -1.0]];
    let cone = ConeDescription::from_rows(rows).unwrap();
    let t = circumcenter_desk(&cone, &ThetaSet::All, 8).unwrap();
    for v in t.iter() {
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-9);
    }
}

#[test]
fn symmetric_rows_leave_no_interior() {
    let rows: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / 3.0;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let cone = ConeDescription::from_rows(rows).unwrap();
    assert!(incenter(&cone, &ThetaSet::All, Regularizer::HalfSqL2, &Offsets::RowNorm).is_err());
}

fn consistent_dataset(seed: u64, n: usize, size: usize) -> (IODataset, Vec<f64>) {
    let mut rng = stream(seed, STREAM_MISC);
    let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let instances = (0..size)
        .map(|_| {
            let mut pts: Vec<Vec<i64>> = binary_points(n).collect();
            pts.retain(|_| rng.random_bool(0.6));
            if pts.is_empty() {
                pts.push(vec![0; n]);
            }
            let best = pts
                .iter()
                .min_by(|a, b| {
                    let ca: f64 = a.iter().zip(&theta).map(|(&x, t)| x as f64 * t).sum();
                    let cb: f64 = b.iter().zip(&theta).map(|(&x, t)| x as f64 * t).sum();
                    ca.total_cmp(&cb)
                })
                .unwrap()
                .clone();
            IOInstance::finite(pts.into_iter().map(Response::discrete).collect(), Response::discrete(best))
        })
        .collect();
    (IODataset::new(instances, seed).unwrap(), theta)
}

#[test]
fn cone_row_count_skips_zero_differences() {
    let (ds, _) = consistent_dataset(33, 3, 6);
    let cone = build_cone(&ds, &IdentityFeatures::new(3)).unwrap();
    let expected: usize = ds
        .instances
        .iter()
        .map(|i| i.oracle.enumerate(&i.signal).unwrap().iter().filter(|x| **x != i.response).count())
        .sum();
    assert_eq!(cone.len(), expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn consistent_data_yields_points_of_the_cone(seed in any::<u64>()) {
        let (ds, truth) = consistent_dataset(seed, 3, 8);
        let cone = build_cone(&ds, &IdentityFeatures::new(3)).unwrap();
        prop_assert!(cone.contains(&truth, 1e-12));
        if cone.is_empty() {
            return Ok(());
        }
        let f = feasibility_program(&cone, &ThetaSet::All).unwrap();
        prop_assert!(cone.contains(&f, 1e-9));
        prop_assert!((f.iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs() < 1e-9);
        match incenter(&cone, &ThetaSet::All, Regularizer::HalfSqL2, &Offsets::RowNorm) {
            Ok(r) => {
                prop_assert!(cone.contains(&r.theta, 1e-9));
                prop_assert!((norm2(&r.theta) - 1.0).abs() < 1e-12);
                prop_assert!((r.margin_r * norm2(&r.raw_theta) - 1.0).abs() < 1e-9);
            }
            // Responses on a common face can flatten the cone.
            Err(Error::NoStrictInterior) | Err(Error::Infeasible) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
