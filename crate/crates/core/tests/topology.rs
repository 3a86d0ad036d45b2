use std::f64::consts::TAU;

use capax_core::geometry::{
    apply_mobius, sample_hopf_link, Curve3, MobiusMap, MobiusPrimitive, Vec3,
};
use capax_core::topology::{crossing_count, gauss_sum, is_linked, linking_number, linking_number_s3, winding_lift, Line};
use nalgebra::Rotation3;
use proptest::prelude::*;

/// Unit circle in the `xy`-plane and a circle of radius `r` in the `xz`-plane centered at
/// `(d, 0, 0)`; they link iff exactly one of `d ± r` lies inside the unit disk.
fn circle_pair(d: f64, r: f64) -> (Curve3, Curve3) {
    let a = Curve3::circle(Vec3::zeros(), 1.0, Vec3::x(), Vec3::y(), 64).unwrap();
    let b = Curve3::circle(Vec3::new(d, 0.0, 0.0), r, Vec3::x(), Vec3::z(), 64).unwrap();
    (a, b)
}

fn expected_link(d: f64, r: f64) -> bool {
    ((d - r).abs() < 1.0) != ((d + r).abs() < 1.0)
}

/// Keeps the circles at least `gap` from touching each other.
fn clear(d: f64, r: f64, gap: f64) -> bool {
    ((d - r).abs() - 1.0).abs() > gap && ((d + r).abs() - 1.0).abs() > gap
}

fn similarity(angles: (f64, f64, f64), scale: f64, shift: Vec3) -> MobiusMap {
    MobiusMap::from_primitives(vec![MobiusPrimitive::Similarity {
        scale,
        rotation: Rotation3::from_euler_angles(angles.0, angles.1, angles.2),
        translation: shift,
    }])
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circle_pairs_link_as_predicted(d in 0.0..2.5f64, r in 0.2..1.5f64) {
        prop_assume!(clear(d, r, 0.1));
        let (a, b) = circle_pair(d, r);
        prop_assert_eq!(is_linked(&a, &b).unwrap(), expected_link(d, r));
    }

    #[test]
    fn gauss_sum_agrees_with_crossings(d in 0.0..2.5f64, r in 0.2..1.5f64, angles in (0.0..TAU, 0.0..TAU, 0.0..TAU)) {
        prop_assume!(clear(d, r, 0.1));
        let (a, b) = circle_pair(d, r);
        let m = similarity(angles, 1.0, Vec3::zeros());
        let (a, b) = (apply_mobius(&m, &a).unwrap(), apply_mobius(&m, &b).unwrap());
        let g = gauss_sum(&a, &b);
        prop_assert!((g - g.round()).abs() < 0.05, "gauss sum {}", g);
        prop_assert_eq!(g.round() as i64, crossing_count(&a, &b).unwrap());
    }

    #[test]
    fn linking_is_mobius_invariant(
        d in 0.3..1.7f64,
        r in 0.3..1.2f64,
        angles in (0.0..TAU, 0.0..TAU, 0.0..TAU),
        scale in 0.3..3.0f64,
        shift in vec3(),
        dir in vec3(),
        dist in 3.5..6.0f64,
        radius in 0.5..2.5f64,
    ) {
        prop_assume!(clear(d, r, 0.1) && dir.norm() > 0.1);
        let (a, b) = circle_pair(d, r);
        let before = linking_number(&a, &b).unwrap().linking_number;
        let sim = similarity(angles, scale, shift);
        let inversion = MobiusPrimitive::SphereInversion { center: dir.normalize() * dist * scale.max(1.0) + shift, radius };
        for m in [sim.clone(), sim.then(inversion)] {
            let (ma, mb) = (apply_mobius(&m, &a).unwrap(), apply_mobius(&m, &b).unwrap());
            let after = linking_number(&ma, &mb).unwrap().linking_number;
            let sign = if m.is_orientation_preserving() { 1 } else { -1 };
            prop_assert_eq!(after, sign * before);
        }
    }

    #[test]
    fn winding_around_an_axis_is_an_integer(turns in 1usize..4, tilt in -0.6..0.6f64, wobble in 0.0..0.3f64) {
        let n = 96 * turns;
        let pts = (0..n)
            .map(|k| {
                let s = TAU * k as f64 / n as f64;
                let radius = 1.0 + wobble * (3.0 * s).cos();
                Vec3::new(radius * (turns as f64 * s).cos(), radius * (turns as f64 * s).sin(), tilt * s.sin())
            })
            .collect();
        let c = Curve3::new(pts, true).unwrap();
        let lift = winding_lift(&c, &Line::z_axis()).unwrap();
        let total = (lift.last().unwrap() - lift[0]) / TAU;
        prop_assert!((total - turns as f64).abs() < 1e-9, "winding {}", total);
    }
}

#[test]
fn hopf_link_has_linking_number_one_in_every_sampling() {
    for n in [8, 32, 256] {
        let (h0, h1) = sample_hopf_link(n).unwrap();
        assert_eq!(linking_number_s3(&h0, &h1).unwrap().linking_number.abs(), 1);
    }
}
