use ccvp_demo::{example1_rows, penalty_path, planar_cone, split};

fn grid() -> impl Iterator<Item = [f64; 2]> {
    (-6..=6).flat_map(|i| (-6..=6).map(move |j| [i as f64 * 0.7, j as f64 * 0.45]))
}

#[test]
fn splits_decompose_every_cone() {
    for name in ["orthant", "zero", "soc", "zero-orthant"] {
        let cone = planar_cone(name).unwrap();
        for y in grid() {
            let s = split(name, y).unwrap();
            for i in 0..2 {
                assert!((s.negative[i] + s.polar[i] - y[i]).abs() <= 1e-12, "{name} {y:?}");
            }
            let inner = s.negative[0] * s.polar[0] + s.negative[1] * s.polar[1];
            assert!(inner.abs() <= 1e-12, "{name} {y:?}: {inner}");
            let back = [-s.negative[0], -s.negative[1]];
            assert!(cone.contains(&back, 1e-12).unwrap(), "{name} {y:?}");
            assert!(cone.polar_contains(&s.polar, 1e-12).unwrap(), "{name} {y:?}");
        }
    }
}

#[test]
fn split_values() {
    let s = split("orthant", [1.0, -2.0]).unwrap();
    assert_eq!((s.negative, s.polar), ([0.0, -2.0], [1.0, 0.0]));
    let s = split("zero-orthant", [3.0, -2.0]).unwrap();
    assert_eq!((s.negative, s.polar), ([0.0, -2.0], [3.0, 0.0]));
    let s = split("zero", [3.0, -2.0]).unwrap();
    assert_eq!((s.negative, s.polar), ([0.0, 0.0], [3.0, -2.0]));
    // the planar second-order cone is the wedge |x| <= t
    let s = split("soc", [0.0, 1.0]).unwrap();
    for (a, b) in s.negative.iter().zip([-0.5, 0.5]) {
        assert!((a - b).abs() <= 1e-15);
    }
    for (a, b) in s.polar.iter().zip([0.5, 0.5]) {
        assert!((a - b).abs() <= 1e-15);
    }
    assert!(split("disk", [0.0, 0.0]).is_err());
}

#[test]
fn example1_columns() {
    let rows = example1_rows(2, 200).unwrap();
    assert_eq!(rows.len(), 199);
    for row in &rows {
        let k = row[0];
        assert!(row[1] <= 1e-12);
        let want = 2.0 / (3.0 * k);
        assert!((row[2] - want).abs() <= 1e-12 * want);
        let mu3 = 2.0 * k * k / 3.0;
        let norm = ((mu3 - 2.5).powi(2) + mu3 * mu3).sqrt();
        assert!((row[3] - norm).abs() <= 1e-12 * norm);
    }
    assert!(example1_rows(0, 5).is_err());
    assert!(example1_rows(5, 4).is_err());
}

#[test]
fn convex_path_reaches_the_weighted_sum_minimizer() {
    let path = penalty_path(0, 0.5, [0.0, 0.0], 12).unwrap();
    assert_eq!(path.len(), 12);
    let last = path.last().unwrap();
    assert!((last.x[0] - 1.0).abs() <= 1e-12 && last.x[1].abs() <= 1e-12, "{last:?}");
    assert!(path.iter().all(|p| p.mu_norm == 0.0));
    assert_eq!(path[3].rho, 1e3);
}

#[test]
fn example1_path_multipliers_grow() {
    let path = penalty_path(1, 0.5, [1.2, 0.1], 12).unwrap();
    let tail: Vec<f64> = path[8..].iter().map(|p| p.mu_norm).collect();
    assert!(tail.windows(2).all(|w| w[1] > w[0]), "{tail:?}");
}

#[test]
fn path_arguments_are_checked() {
    assert!(penalty_path(0, 1.5, [0.0, 0.0], 3).is_err());
    assert!(penalty_path(0, 0.5, [0.0, 0.0], 0).is_err());
    assert!(penalty_path(0, 0.5, [0.0, 0.0], 15).is_err());
    assert!(penalty_path(7, 0.5, [0.0, 0.0], 3).is_err());
    assert!(penalty_path(0, 0.5, [f64::NAN, 0.0], 3).is_err());
}
