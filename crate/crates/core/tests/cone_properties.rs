mod common;

use ccvp_core::Cone;
use proptest::prelude::*;

#[test]
fn moreau_split_on_random_points() {
    common::moreau_suite().unwrap();
}

fn soc3() -> Cone {
    Cone::second_order(3).unwrap()
}

proptest! {
    #[test]
    fn polar_projection_lands_in_polar(y in prop::collection::vec(-1e3f64..1e3, 3)) {
        let c = soc3();
        let pol = c.project_polar(&y).unwrap();
        prop_assert!(c.polar_contains(&pol, 1e-10).unwrap());
        prop_assert!(c.distance_to_polar(&pol).unwrap() <= 1e-10 * (1.0 + common::norm(&y)));
    }

    #[test]
    fn negative_cone_distance_is_polar_norm(y in prop::collection::vec(-1e3f64..1e3, 6)) {
        let c = Cone::product(vec![Cone::zero(1).unwrap(), soc3(), Cone::orthant(2).unwrap()]).unwrap();
        let d = c.distance_to_negative_cone(&y).unwrap();
        let pol = c.project_polar(&y).unwrap();
        prop_assert!((d - common::norm(&pol)).abs() <= 1e-10 * (1.0 + d));
    }

    #[test]
    fn projection_is_positively_homogeneous(y in prop::collection::vec(-10f64..10.0, 4), t in 0.01f64..100.0) {
        let c = Cone::second_order(4).unwrap();
        let a = c.project(&y).unwrap();
        let ty: Vec<f64> = y.iter().map(|v| t * v).collect();
        let b = c.project(&ty).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((t * u - v).abs() <= 1e-12 * (1.0 + t * common::norm(&y)));
        }
    }
}
