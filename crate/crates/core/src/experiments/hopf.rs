use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::config::{ConfigError, ExperimentConfig};
use super::report::Report;
use crate::analytic::{hopf_capacity_exact, hopf_profile, ring_capacity_exact, HopfClosedForm};
use crate::geometry::{sample_hopf_link, CurveS3, Vec3};
use crate::pde::{
    capacity, extrapolate_sqrt, flux_spread, rasterize_sets, round_trip, solve_capacity, symmetric_pole,
    CapacityResult, CapacitySettings, ChartChoice, CondenserSet, GridBox, PdeError, SolverSettings, FLUX_LEVELS,
};

/// `16π³/Γ(1/4)⁴` to 17 significant digits, evaluated independently in 50-digit arithmetic.
pub const HOPF_REFERENCE: f64 = 2.871_080_044_184_520_0;

/// Radii of the calibration ring.
pub const RING: (f64, f64) = (0.5, 1.5);

/// Vertices per Hopf circle.
pub const HOPF_VERTICES: usize = 256;

/// Largest allowed `(max − min) / mean` of the level-set fluxes.
pub const FLUX_TOLERANCE: f64 = 0.05;

fn rel(a: f64, b: f64) -> f64 {
    (a - b) / b
}

fn fraction(h: f64) -> String {
    let inv = 1.0 / h;
    if (inv - inv.round()).abs() < 1e-9 {
        format!("1/{}", inv.round())
    } else {
        format!("{h}")
    }
}

/// The ladder `4h, 2h, h`.
pub fn ladder(h: f64) -> [f64; 3] {
    [4.0 * h, 2.0 * h, h]
}

/// Hopf-link settings: pole on the Clifford torus, unrotated, so that `H₀` and `H₁` are
/// congruent circles.
pub fn hopf_settings(half: f64, h: f64, r_thick: f64, solver: SolverSettings) -> CapacitySettings {
    CapacitySettings {
        half,
        h,
        r_thick: Some(r_thick),
        chart: ChartChoice::Pole(symmetric_pole().coords()),
        fit_radius: None,
        solver,
    }
}

/// The ring `a ≤ |x| ≤ b` in the box `[-(b + 0.1), b + 0.1]³`.
pub fn ring_solve(h: f64, solver: &SolverSettings) -> Result<CapacityResult, PdeError> {
    let (a, b) = RING;
    let bx = GridBox::cube(-(b + 0.1), b + 0.1)?;
    let grid = rasterize_sets(
        &[CondenserSet::Ball { center: Vec3::zeros(), radius: a }],
        &[CondenserSet::Exterior { center: Vec3::zeros(), radius: b }],
        &bx,
        h,
    )?;
    solve_capacity(&grid, solver)
}

/// One row of the ring calibration table. `delta` is the discretization allowance used at
/// spacing `h`: the magnitude of the relative ring error.
#[derive(Clone, Debug, Serialize)]
pub struct CalibrationRow {
    pub h: f64,
    pub value: f64,
    pub exact: f64,
    pub rel_error: f64,
    pub delta: f64,
}

pub fn ring_calibration(h: f64, solver: &SolverSettings) -> Result<(CalibrationRow, CapacityResult), PdeError> {
    let res = ring_solve(h, solver)?;
    let exact = ring_capacity_exact(RING.0, RING.1).expect("valid radii");
    let e = rel(res.energy, exact);
    Ok((CalibrationRow { h, value: res.energy, exact, rel_error: e, delta: e.abs() }, res))
}

/// Solution values and level-set diagnostics of one rung.
#[derive(Clone, Debug, Serialize)]
pub struct Rung {
    pub h: f64,
    pub energy: f64,
    pub rel_error: f64,
    pub flux_mean: f64,
    pub flux_range: f64,
    pub boundary_contact: bool,
    pub converged: bool,
    pub iterations: usize,
    pub eps_bias: f64,
}

fn rung(res: &CapacityResult, h: f64, reference: f64) -> Result<Rung, PdeError> {
    let fs = flux_spread(res, &FLUX_LEVELS)?;
    Ok(Rung {
        h,
        energy: res.energy,
        rel_error: rel(res.energy, reference),
        flux_mean: fs.mean,
        flux_range: fs.range,
        boundary_contact: fs.levels.iter().any(|l| l.boundary_contact),
        converged: res.converged,
        iterations: res.iterations,
        eps_bias: res.eps_bias,
    })
}

/// A Hopf-type ladder: rungs that solved and the `√h` extrapolation when all did.
#[derive(Clone, Debug, Serialize)]
pub struct Ladder {
    pub rungs: Vec<Rung>,
    pub estimate: Option<f64>,
}

impl Ladder {
    /// `|error|` strictly decreasing along the rungs.
    pub fn monotone(&self) -> bool {
        self.rungs.windows(2).all(|w| w[1].rel_error.abs() < w[0].rel_error.abs())
    }
}

/// Spacings, box half-width and thickening ratio of a ladder.
#[derive(Clone, Debug)]
pub struct LadderSpec {
    pub hs: Vec<f64>,
    pub half: f64,
    pub ratio: f64,
    /// Rung whose solution also gets a density round trip.
    pub round_trip: Option<usize>,
}

/// Solves `(c0, c1)` at every rung of `hs` with thickening `ratio · h` and records each
/// rung in `rep` under `label`.
pub fn run_ladder(
    rep: &mut Report,
    label: &str,
    criteria: &[u8],
    curves: (&CurveS3, &CurveS3),
    spec: &LadderSpec,
    solver: &SolverSettings,
) -> Ladder {
    let LadderSpec { hs, half, ratio, .. } = spec;
    let (half, ratio) = (*half, *ratio);
    let mut rungs = Vec::new();
    for (i, &h) in hs.iter().enumerate() {
        let t = Instant::now();
        let s = hopf_settings(half, h, ratio * h, solver.clone());
        let inputs = json!({"h": h, "r_thick": ratio * h, "half": half, "chart": "pole (0, 1/√2, 0, 1/√2)"});
        let solved = capacity(curves.0, curves.1, &s).and_then(|run| Ok((rung(&run.result, h, HOPF_REFERENCE)?, run)));
        match solved {
            Ok((r, run)) => {
                let rec = rep.record(format!("{label} h={}", fraction(h)), criteria, inputs, serde_json::to_value(&r).unwrap());
                rec.reference = Some(HOPF_REFERENCE);
                rec.runtime = t.elapsed();
                rep.series.push((label.to_string(), h, r.energy));
                rungs.push(r);
                if spec.round_trip == Some(i) {
                    let t = Instant::now();
                    let rt = round_trip(&run.result);
                    let rec = rep.record(format!("{label} round trip h={}", fraction(h)), criteria, json!({"h": h}), serde_json::to_value(&rt).unwrap());
                    rec.runtime = t.elapsed();
                }
            }
            Err(e) => rep.failure(format!("{label} h={}", fraction(h)), criteria, inputs, e, t.elapsed()),
        }
    }
    let estimate = if rungs.len() == hs.len() {
        extrapolate_sqrt(hs, &rungs.iter().map(|r| r.energy).collect::<Vec<_>>())
    } else {
        None
    };
    if let Some(est) = estimate {
        let rec = rep.record(
            format!("{label} limit"),
            criteria,
            json!({"fit": "a + b·√h + c·h", "hs": hs}),
            json!({"estimate": est, "rel_error": rel(est, HOPF_REFERENCE)}),
        );
        rec.reference = Some(HOPF_REFERENCE);
    }
    Ladder { rungs, estimate }
}

/// Exact value, profile symmetry, the Hopf ladder, the ring ladder and the calibration
/// table.
pub fn cmd_hopf(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let mut rep = Report::new(cfg);
    let solver = cfg.solver();

    let t = Instant::now();
    let exact = hopf_capacity_exact();
    let elapsed = t.elapsed();
    let closed = HopfClosedForm::new();
    let err = rel(exact, HOPF_REFERENCE).abs();
    let rec = rep.record(
        "exact",
        &[1],
        json!({}),
        json!({"capacity": exact, "beta_form": closed.capacity, "c": closed.c, "rel_error": err}),
    );
    rec.reference = Some(HOPF_REFERENCE);
    rec.passed = Some(err <= 1e-11);
    rec.runtime = elapsed;
    rep.check(1, "exact value", err <= 1e-11, format!("relative error {err:.2e}"));
    let mid = hopf_profile(FRAC_PI_4).unwrap_or(f64::NAN);
    let rec = rep.record("profile", &[1], json!({"eta": FRAC_PI_4}), json!({"u": mid}));
    rec.reference = Some(0.5);
    rec.passed = Some((mid - 0.5).abs() <= 1e-12);
    rep.check(1, "profile at π/4", (mid - 0.5).abs() <= 1e-12, format!("u(π/4) = {mid}"));

    let h_fine = cfg.h.unwrap_or(1.0 / 64.0);
    let ratio = cfg.r_thick.map_or(1.0, |r| r / h_fine);
    let half = cfg.half(3.0);
    let hs = ladder(h_fine);
    let (h0, h1) = sample_hopf_link(HOPF_VERTICES).expect("enough vertices");
    let spec = LadderSpec { hs: hs.to_vec(), half, ratio, round_trip: Some(1) };
    let hopf = run_ladder(&mut rep, "hopf", &[3, 4], (&h0, &h1), &spec, &solver);

    let mut table = Vec::new();
    let mut ring = Vec::new();
    for &h in &hs {
        let t = Instant::now();
        let inputs = json!({"h": h, "a": RING.0, "b": RING.1, "half": RING.1 + 0.1});
        match ring_calibration(h, &solver).and_then(|(row, res)| Ok((row, rung(&res, h, ring_capacity_exact(RING.0, RING.1).unwrap())?))) {
            Ok((row, r)) => {
                let rec = rep.record(format!("ring h={}", fraction(h)), &[2, 4], inputs, serde_json::to_value(&r).unwrap());
                rec.reference = Some(row.exact);
                rec.runtime = t.elapsed();
                rep.series.push(("ring".into(), h, r.energy));
                table.push(row);
                ring.push(r);
            }
            Err(e) => rep.failure(format!("ring h={}", fraction(h)), &[2, 4], inputs, e, t.elapsed()),
        }
    }

    let ring_ok = ring.len() == hs.len();
    let ring_err = ring.last().filter(|_| ring_ok).map(|r| r.rel_error.abs());
    let shrinking = ring.windows(2).all(|w| w[1].rel_error.abs() < w[0].rel_error.abs());
    rep.check(
        2,
        "ring value",
        ring_err.is_some_and(|e| e <= 0.05),
        format!("relative error {} at h={}", ring_err.map_or("-".into(), |e| format!("{e:.4}")), fraction(h_fine)),
    );
    rep.check(2, "ring refinement", ring_ok && shrinking, format!("errors {:?}", ring.iter().map(|r| r.rel_error).collect::<Vec<_>>()));

    let est_err = hopf.estimate.map(|e| rel(e, HOPF_REFERENCE).abs());
    rep.check(
        3,
        "hopf estimate",
        est_err.is_some_and(|e| e <= 0.12),
        format!("extrapolated {} ({})", hopf.estimate.map_or("-".into(), |e| format!("{e:.5}")), est_err.map_or("-".into(), |e| format!("{:.2}%", 100.0 * e))),
    );
    rep.check(
        3,
        "hopf ladder",
        hopf.rungs.len() == hs.len() && hopf.monotone(),
        format!("errors {:?}", hopf.rungs.iter().map(|r| r.rel_error).collect::<Vec<_>>()),
    );
    for (name, rungs) in [("hopf", &hopf.rungs), ("ring", &ring)] {
        let last = rungs.last().filter(|_| rungs.len() == hs.len());
        rep.check(
            4,
            &format!("{name} flux"),
            last.is_some_and(|r| r.converged && r.flux_range <= FLUX_TOLERANCE),
            last.map_or("no finest rung".into(), |r| format!("range {:.4} of mean {:.5}", r.flux_range, r.flux_mean)),
        );
    }

    rep.summarize("hopf_estimate", hopf.estimate);
    rep.summarize("hopf_rungs", &hopf.rungs);
    rep.summarize("calibration", &table);
    Ok(rep)
}
