use std::time::Instant;

use rand::Rng;
use serde_json::json;

use super::config::{ConfigError, ExperimentConfig};
use super::generate::{case_rng, random_linked_curve};
use super::report::Report;
use crate::geometry::{sample_hopf_link, CliffordFrame, CurveS3, Polyline, Side};
use crate::pde::{capacity_in, BoxChart, CapacitySettings, ChartChoice, CondenserSet, ExtraPlates, PdeError};

const SALT: u64 = 0x6861_6c66;

/// Allowed `|median − 1|` at spacing `h`.
pub fn halving_tolerance(h: f64) -> f64 {
    if h <= 1.0 / 96.0 + 1e-12 {
        0.10
    } else {
        0.15
    }
}

/// The swap `(z1, z2) ↦ (z2, z1)`, which maps the Clifford torus to itself and exchanges
/// its sides.
pub fn swap(c: &CurveS3) -> CurveS3 {
    Polyline::new(c.vertices().iter().map(|p| p.swapped()).collect(), c.is_closed()).expect("swap is injective")
}

struct Sides {
    lhs: f64,
    rhs: f64,
}

/// `cap(C₀, φC₀)` and `cap(φC₀, 𝕋)` on one lattice, symmetric under the swap.
fn both_sides(c0: &CurveS3, s: &CapacitySettings) -> Result<Sides, PdeError> {
    let c1 = swap(c0);
    let chart = BoxChart::new(s.normalization(&[c0, &c1]));
    let lhs = capacity_in(Some(c0), Some(&c1), ExtraPlates::default(), &chart, s)?.result.energy;
    let side = CondenserSet::FrameSide { frame: CliffordFrame::identity(), side: Side::Zero, chart: chart.clone() };
    let rhs = capacity_in(None, Some(&c1), ExtraPlates { c0: vec![side], c1: vec![] }, &chart, s)?.result.energy;
    Ok(Sides { lhs, rhs })
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// For seeded `C₀` on side zero of `𝕋` and `C₁ = φ(C₀)`, compares `cap(C₀, C₁)` with
/// `½ cap(C₁, 𝕋)`. The quarter ratio `cap(C₀, C₁) / (¼ cap(C₁, 𝕋))` is reported alongside.
pub fn cmd_halving(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let mut rep = Report::new(cfg);
    let hs = cfg.h.map_or(vec![1.0 / 64.0, 1.0 / 96.0], |h| vec![h]);
    let cases = cfg.cases(20);
    let frame = CliffordFrame::identity();
    let curves: Vec<CurveS3> = (0..cases as u64)
        .map(|case| random_linked_curve(case_rng(cfg.seed, case, SALT).random(), &frame, Side::Zero))
        .collect();
    let mut medians = Vec::new();
    for (rung, &h) in hs.iter().enumerate() {
        // a lattice symmetric under the half-turn needs half/h integral
        let half = (cfg.half(1.25) / h - 1e-9).ceil() * h;
        let s = CapacitySettings {
            half,
            h,
            r_thick: cfg.r_thick.or(Some(h)),
            chart: ChartChoice::Symmetric,
            fit_radius: Some(1.0),
            solver: cfg.solver(),
        };
        let inputs = |case: &str| json!({"case": case, "h": h, "half": half, "r_thick": s.r_thick(), "fit_radius": 1.0});
        if rung == 0 {
            let t = Instant::now();
            let (_, core) = sample_hopf_link(256).expect("enough vertices");
            match both_sides(&core, &s) {
                Ok(v) => {
                    let rec = rep.record(
                        format!("core h={h:.6}"),
                        &[9],
                        inputs("core"),
                        json!({"lhs": v.lhs, "rhs": v.rhs, "ratio_half": v.lhs / (0.5 * v.rhs), "ratio_quarter": v.lhs / (0.25 * v.rhs)}),
                    );
                    rec.runtime = t.elapsed();
                }
                Err(e) => rep.failure(format!("core h={h:.6}"), &[9], inputs("core"), e, t.elapsed()),
            }
        }
        let mut ratios = Vec::new();
        let mut quarters = Vec::new();
        let mut below_quarter = 0;
        for (case, c0) in curves.iter().enumerate() {
            let t = Instant::now();
            let label = format!("case {case:02} h={h:.6}");
            match both_sides(c0, &s) {
                Ok(v) => {
                    let (r2, r4) = (v.lhs / (0.5 * v.rhs), v.lhs / (0.25 * v.rhs));
                    ratios.push(r2);
                    quarters.push(r4);
                    if r4 <= 1.0 {
                        below_quarter += 1;
                    }
                    let rec = rep.record(
                        label,
                        &[9],
                        inputs(&case.to_string()),
                        json!({"lhs": v.lhs, "rhs": v.rhs, "ratio_half": r2, "ratio_quarter": r4}),
                    );
                    rec.reference = Some(1.0);
                    rec.runtime = t.elapsed();
                }
                Err(e) => rep.failure(label, &[9], inputs(&case.to_string()), e, t.elapsed()),
            }
        }
        let tol = halving_tolerance(h);
        let m = median(ratios.clone()).filter(|_| ratios.len() == cases);
        rep.check(
            9,
            &format!("median ratio h={h:.6}"),
            m.is_some_and(|m| (m - 1.0).abs() <= tol),
            format!("median cap(C0,C1)/(cap(C1,T)/2) = {} over {} cases, allowed ±{tol}", m.map_or("-".into(), |m| format!("{m:.4}")), ratios.len()),
        );
        medians.push(json!({
            "h": h,
            "median_ratio_half": m,
            "median_ratio_quarter": median(quarters),
            "cases_at_or_below_quarter": below_quarter,
        }));
        rep.series.extend(m.map(|m| ("median_ratio_half".to_string(), h, m)));
    }
    rep.summarize("medians", medians);
    Ok(rep)
}
