use std::f64::consts::TAU;
use std::time::Instant;

use rand::Rng;
use serde_json::json;

use super::config::{ConfigError, ExperimentConfig};
use super::generate::{case_rng, random_linked_curve_with, LinkedCurveShape};
use super::hopf::{ladder, run_ladder, LadderSpec, HOPF_REFERENCE, HOPF_VERTICES};
use super::report::Report;
use crate::geometry::{sample_hopf_link, CliffordFrame, Curve3, CurveS3, EuclideanPoint, Polyline, Side, StereoChart, Vec3};
use crate::pde::{
    density_from_potential, rasterize_sets, solve_capacity, tube_sets, BoxChart, CapacityResult, CondenserSet, GridBox,
    Normalization, PdeError, SolverSettings,
};
use crate::symmetrization::{
    axis_linking, axisymmetric_surrogate, dihedral_symmetrize, even_reflect_density, lightest_wedge, reflect_half,
    select_component, DihedralFrame, HalfspaceFrame, SymmetrizationError,
};

const SALT_SWEEP: u64 = 0x6c69_6e6b;
const SALT_CHAIN: u64 = 0x6368_6169;

/// Noise scale of the chain inputs: large enough that every step moves the capacity by
/// more than the discretization noise in most cases.
pub const CHAIN_NOISE: f64 = 3.0;

/// Extent of a run that is not fixed by the config.
#[derive(Clone, Debug)]
pub struct SymmetrizeOptions {
    /// Cases of the purely geometric linking sweep.
    pub sweep_cases: usize,
    /// Ladder for the capacity of the lifted surrogate; `None` skips the terminal check.
    pub terminal: Option<LadderSpec>,
}

impl Default for SymmetrizeOptions {
    fn default() -> Self {
        SymmetrizeOptions {
            sweep_cases: 1000,
            terminal: Some(LadderSpec { hs: ladder(1.0 / 64.0).to_vec(), half: 3.0, ratio: 1.0, round_trip: None }),
        }
    }
}

#[derive(Debug)]
enum ChainError {
    Pde(PdeError),
    Sym(SymmetrizationError),
    Unlinked(&'static str),
}

impl std::fmt::Display for ChainError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChainError::Pde(e) => write!(f, "{e}"),
            ChainError::Sym(e) => write!(f, "{e}"),
            ChainError::Unlinked(step) => write!(f, "no component linked with the axis after {step}"),
        }
    }
}

impl From<PdeError> for ChainError {
    fn from(e: PdeError) -> Self {
        ChainError::Pde(e)
    }
}

impl From<SymmetrizationError> for ChainError {
    fn from(e: SymmetrizationError) -> Self {
        ChainError::Sym(e)
    }
}

/// `x ↦ (x − z̄ e_z) / ρ̄` with `ρ̄` the mean distance to the axis and `z̄` the mean height.
/// It commutes with every reflection in a plane through the axis and with rotations about
/// it, and it preserves the capacity against the axis.
pub fn normalize_about_axis(c: &Curve3) -> Curve3 {
    let v = c.vertices();
    let n = v.len() as f64;
    let rho = v.iter().map(|x| x.x.hypot(x.y)).sum::<f64>() / n;
    let z = v.iter().map(|x| x.z).sum::<f64>() / n;
    Curve3::new(v.iter().map(|x| (x - Vec3::new(0.0, 0.0, z)) / rho).collect(), c.is_closed()).expect("similar curve")
}

/// Grid and solver for capacities against the `z`-axis.
struct AxisSetup {
    axis: CurveS3,
    bx: GridBox,
    half: f64,
    h: f64,
    r: f64,
    solver: SolverSettings,
}

impl AxisSetup {
    /// Capacity between the axis and a curve, both thickened by `r`, after
    /// [`normalize_about_axis`].
    fn capacity(&self, c: &Curve3) -> Result<CapacityResult, PdeError> {
        let chart = BoxChart::new(Normalization::identity());
        let p0 = tube_sets(&self.axis, &chart, self.r, 4.0 * self.half);
        let p1 = vec![CondenserSet::tube(normalize_about_axis(c), self.r)];
        let grid = rasterize_sets(&p0, &p1, &self.bx, self.h)?;
        solve_capacity(&grid, &self.solver)
    }
}

struct Chain {
    energies: [f64; 5],
    linking: [i64; 4],
    flipped: bool,
    angle2: f64,
    angle4: f64,
    surrogate: Curve3,
}

fn chain(c: &Curve3, setup: &AxisSetup) -> Result<Chain, ChainError> {
    let p = setup.solver.p;
    let solve = |c: &Curve3| setup.capacity(c);
    let r0 = solve(c)?;
    let (_, even) = even_reflect_density(&density_from_potential(&r0), &HalfspaceFrame::new(0.0), p)?;
    let f1 = HalfspaceFrame { angle: 0.0, flipped: !even.kept_flagged_side };
    let c1 = select_component(&reflect_half(c, &f1)?.components).ok_or(ChainError::Unlinked("reflect_half"))?.clone();
    let r1 = solve(&c1)?;
    let (f2, _) = lightest_wedge(&density_from_potential(&r1), &DihedralFrame::new(0.0, 2)?, p);
    let c2 = select_component(&dihedral_symmetrize(&c1, &f2)?.components).ok_or(ChainError::Unlinked("k = 2"))?.clone();
    let r2 = solve(&c2)?;
    let (f4, _) = lightest_wedge(&density_from_potential(&r2), &DihedralFrame::new(0.0, 4)?, p);
    let c4 = select_component(&dihedral_symmetrize(&c2, &f4)?.components).ok_or(ChainError::Unlinked("k = 4"))?.clone();
    let r4 = solve(&c4)?;
    let sur = axisymmetric_surrogate(&c4, 256)?;
    let r5 = solve(&sur)?;
    Ok(Chain {
        energies: [r0.energy, r1.energy, r2.energy, r4.energy, r5.energy],
        linking: [axis_linking(c)?, axis_linking(&c1)?, axis_linking(&c2)?, axis_linking(&c4)?],
        flipped: f1.flipped,
        angle2: f2.angle,
        angle4: f4.angle,
        surrogate: normalize_about_axis(&sur),
    })
}

/// A seeded curve linked once with the `z`-axis, in the default chart.
fn axis_curve(seed: u64, noise: f64) -> Curve3 {
    let c = random_linked_curve_with(seed, &CliffordFrame::identity(), Side::Zero, &LinkedCurveShape { noise, ..Default::default() });
    let chart = StereoChart::default();
    Curve3::new(c.vertices().iter().map(|p| chart.project(p).finite().expect("away from the pole")).collect(), true)
        .expect("distinct vertices")
}

/// Linking sweep over reflections and dihedral symmetrizations; returns the failing cases.
fn linking_sweep(seed: u64, cases: usize) -> (Vec<u64>, usize) {
    let mut failures = Vec::new();
    let mut components = 0;
    for case in 0..cases as u64 {
        let mut rng = case_rng(seed, case, SALT_SWEEP);
        let noise = 3.0 * rng.random::<f64>();
        let c = axis_curve(rng.random(), noise);
        let half = HalfspaceFrame { angle: TAU * rng.random::<f64>(), flipped: rng.random() };
        let k = [2, 3, 4, 8][rng.random_range(0..4)];
        let frame = DihedralFrame::new(TAU * rng.random::<f64>(), k).expect("k > 0");
        let ok = reflect_half(&c, &half).ok().and_then(|s| {
            components += s.components.len();
            select_component(&s.components).cloned()
        });
        let ok = ok.and_then(|c1| dihedral_symmetrize(&c1, &frame).ok()).is_some_and(|s| {
            components += s.components.len();
            select_component(&s.components).is_some()
        });
        if !ok {
            failures.push(case);
        }
    }
    (failures, components)
}

/// [`cmd_symmetrize_with`] at the default extent.
pub fn cmd_symmetrize(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    cmd_symmetrize_with(cfg, &SymmetrizeOptions::default())
}

/// The linking sweep, then for each seeded curve linked with the `z`-axis the capacities
/// against the axis before, after `reflect_half`, after `k = 2`, after `k = 4` and of the
/// coaxial surrogate. Reflection sides and wedges are chosen from the density of the
/// previous solve. The surrogate is Möbius equivalent to the Hopf link; its capacity is
/// estimated from a ladder in the chart where both components are round.
pub fn cmd_symmetrize_with(cfg: &ExperimentConfig, opts: &SymmetrizeOptions) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let mut rep = Report::new(cfg);

    let t = Instant::now();
    let (failures, components) = linking_sweep(cfg.seed, opts.sweep_cases);
    let rec = rep.record(
        "linking sweep",
        &[7],
        json!({"cases": opts.sweep_cases, "orders": [2, 3, 4, 8]}),
        json!({"retained": opts.sweep_cases - failures.len(), "failures": failures, "components": components}),
    );
    rec.passed = Some(failures.is_empty());
    rec.runtime = t.elapsed();
    rep.check(7, "linking retained", failures.is_empty(), format!("{} of {} cases lost the link", failures.len(), opts.sweep_cases));

    let h = cfg.h.unwrap_or(1.0 / 24.0);
    // planes through the axis and quarter turns must map the lattice to itself
    let half = (cfg.half(2.0) / h - 1e-9).ceil() * h;
    let r = cfg.r_thick.unwrap_or(3.0 * h);
    let solver = cfg.solver();
    let slack = 1.1 * solver.tol;
    let (axis, _) = sample_hopf_link(HOPF_VERTICES).expect("enough vertices");
    let setup = AxisSetup { axis, bx: GridBox::cube(-half, half).expect("nonempty box"), half, h, r, solver: solver.clone() };
    let cases = cfg.cases(20);
    let mut violations = 0;
    let mut complete = 0;
    let mut surrogate = None;
    let mut surrogate_spread = 0.0f64;
    for case in 0..cases as u64 {
        let t = Instant::now();
        let c = axis_curve(case_rng(cfg.seed, case, SALT_CHAIN).random(), CHAIN_NOISE);
        let inputs = json!({"case": case, "h": h, "half": half, "r_thick": r, "noise": CHAIN_NOISE});
        match chain(&c, &setup) {
            Ok(ch) => {
                let e = ch.energies;
                let steps: Vec<f64> = e.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
                let bad = e.windows(2).filter(|w| w[1] > w[0] * (1.0 + slack)).count();
                violations += bad;
                complete += 1;
                // every normalized surrogate is the unit circle in the plane z = 0
                let dev = ch.surrogate.vertices().iter().map(|x| (x.x.hypot(x.y) - 1.0).abs().max(x.z.abs())).fold(0.0, f64::max);
                surrogate_spread = surrogate_spread.max(dev);
                surrogate.get_or_insert(ch.surrogate.clone());
                let rec = rep.record(
                    format!("chain {case:02}"),
                    &[8],
                    inputs,
                    json!({
                        "e_before": e[0], "e_half": e[1], "e_k2": e[2], "e_k4": e[3], "e_surrogate": e[4],
                        "steps": steps, "violations": bad, "linking": ch.linking, "flipped": ch.flipped,
                        "angle_k2": ch.angle2, "angle_k4": ch.angle4, "surrogate_deviation": dev,
                    }),
                );
                rec.passed = Some(bad == 0);
                rec.runtime = t.elapsed();
            }
            Err(e) => rep.failure(format!("chain {case:02}"), &[8], inputs, e, t.elapsed()),
        }
    }
    rep.check(
        8,
        "chain non-increasing",
        complete == cases && violations == 0,
        format!("{violations} increasing steps beyond 1.1·tol·E over {complete} of {cases} chains"),
    );

    if let (Some(spec), Some(sur)) = (&opts.terminal, surrogate) {
        let chart = StereoChart::default();
        let lifted: CurveS3 = Polyline::new(sur.vertices().iter().map(|x| chart.lift(&EuclideanPoint::Finite(*x))).collect(), true)
            .expect("distinct vertices");
        let ladder = run_ladder(&mut rep, "surrogate", &[8], (&setup.axis, &lifted), spec, &solver);
        let err = ladder.estimate.map(|e| ((e - HOPF_REFERENCE) / HOPF_REFERENCE).abs());
        rep.check(
            8,
            "terminal surrogate",
            err.is_some_and(|e| e <= 0.12),
            format!(
                "estimate {} ({}), surrogate deviation from the unit circle {surrogate_spread:.1e}",
                ladder.estimate.map_or("-".into(), |e| format!("{e:.5}")),
                err.map_or("-".into(), |e| format!("{:.2}%", 100.0 * e))
            ),
        );
        rep.summarize("terminal_estimate", ladder.estimate);
    }
    rep.summarize("step_violations", violations);
    Ok(rep)
}
