use capax_core::analytic::ring_capacity_exact;
use capax_core::geometry::Vec3;
use capax_core::pde::{rasterize_sets, solve_capacity, CondenserSet, GridBox, InitialGuess, SolverSettings};
use proptest::prelude::*;

fn ring(a: f64, b: f64, h: f64, center: Vec3, solver: &SolverSettings) -> f64 {
    let pad = b + 2.0 * h;
    let bx = GridBox::new(center.add_scalar(-pad), center.add_scalar(pad)).unwrap();
    let grid = rasterize_sets(&[CondenserSet::Ball { center, radius: a }], &[CondenserSet::Exterior { center, radius: b }], &bx, h).unwrap();
    let res = solve_capacity(&grid, solver).unwrap();
    assert!(res.converged);
    assert!(res.u_min >= -1e-9 && res.u_max <= 1.0 + 1e-9);
    res.energy
}

#[test]
fn ring_error_shrinks_under_refinement() {
    let exact = ring_capacity_exact(0.5, 1.5).unwrap();
    let s = SolverSettings::default();
    let coarse = (ring(0.5, 1.5, 1.0 / 8.0, Vec3::zeros(), &s) / exact - 1.0).abs();
    let fine = (ring(0.5, 1.5, 1.0 / 16.0, Vec3::zeros(), &s) / exact - 1.0).abs();
    assert!(fine < coarse, "{fine} vs {coarse}");
    assert!(fine < 0.15, "{fine}");
}

#[test]
fn starting_field_does_not_change_the_limit() {
    let linear = SolverSettings { tol: 1e-8, ..Default::default() };
    let constant = SolverSettings { init: InitialGuess::Constant(0.5), ..linear.clone() };
    let a = ring(0.5, 1.5, 1.0 / 8.0, Vec3::zeros(), &linear);
    let b = ring(0.5, 1.5, 1.0 / 8.0, Vec3::zeros(), &constant);
    assert!((a / b - 1.0).abs() < 1e-4, "{a} vs {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// With `p = 3` the energy of a condenser in ℝ³ is invariant under dilation; scaling the
    /// grid with the sets gives the same discrete problem.
    #[test]
    fn dilation_and_lattice_shift_leave_energy_unchanged(a in 0.3..0.6f64, gap in 0.6..1.0f64, scale in 0.5..3.0f64, shift in (-3i32..3, -3i32..3, -3i32..3)) {
        let h = 1.0 / 8.0;
        let s = SolverSettings::default();
        let base = ring(a, a + gap, h, Vec3::zeros(), &s);
        let scaled = ring(scale * a, scale * (a + gap), scale * h, Vec3::zeros(), &s);
        let moved = ring(a, a + gap, h, Vec3::new(shift.0 as f64, shift.1 as f64, shift.2 as f64) * h, &s);
        prop_assert!((scaled / base - 1.0).abs() < 1e-6, "{} vs {}", scaled, base);
        prop_assert!((moved / base - 1.0).abs() < 1e-6, "{} vs {}", moved, base);
    }

    #[test]
    fn larger_inner_plate_raises_capacity(a in 0.3..0.5f64, grow in 0.1..0.3f64) {
        let s = SolverSettings::default();
        let small = ring(a, 1.5, 1.0 / 8.0, Vec3::zeros(), &s);
        let big = ring(a + grow, 1.5, 1.0 / 8.0, Vec3::zeros(), &s);
        prop_assert!(big >= small * (1.0 - 1e-6), "{} < {}", big, small);
    }
}
