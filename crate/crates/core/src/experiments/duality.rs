use std::time::Instant;

use serde_json::json;

use super::config::{ConfigError, ExperimentConfig};
use super::generate::{case_rng, random_graph};
use super::report::Report;
use crate::graph::{
    build_grid_graph, conjugate, connecting_modulus, cut_modulus, duality_product, GraphError, ModulusSettings,
    WeightedGraph,
};
use crate::pde::GridBox;

const SALT_DUALITY: u64 = 0x6475_616c;
const SALT_AXIOMS: u64 = 0x6178_696f;

/// Largest vertex count of the random graphs.
pub const MAX_VERTICES: usize = 30;

fn product(g: &WeightedGraph, s: &[usize], t: &[usize], p: f64, ms: &ModulusSettings) -> Result<(f64, f64, f64), GraphError> {
    let mp = connecting_modulus(g, s, t, p, ms)?;
    let mq = cut_modulus(g, s, t, conjugate(p), ms)?;
    Ok((mp.value, mq.value, duality_product(&mp, &mq)?))
}

fn series_parallel() -> Vec<(String, WeightedGraph, usize)> {
    let mut out = Vec::new();
    for k in [1, 2, 3, 5] {
        let mut g = WeightedGraph::new(2);
        for _ in 0..k {
            g.add_edge(0, 1, 1.0).unwrap();
        }
        out.push((format!("parallel {k}"), g, 1));
    }
    for m in [2, 3, 5] {
        let mut g = WeightedGraph::new(m + 1);
        for i in 0..m {
            g.add_edge(i, i + 1, 1.0).unwrap();
        }
        out.push((format!("series {m}"), g, m));
    }
    // two parallel paths of lengths 2 and 3
    let mut g = WeightedGraph::new(5);
    for (u, v) in [(0, 1), (1, 4), (0, 2), (2, 3), (3, 4)] {
        g.add_edge(u, v, 1.0).unwrap();
    }
    out.push(("paths 2 | 3".into(), g, 4));
    out
}

/// Connecting modulus with the terminals `s`, `t`.
fn modulus(g: &WeightedGraph, s: &[usize], t: &[usize], p: f64, ms: &ModulusSettings) -> Result<f64, GraphError> {
    Ok(connecting_modulus(g, s, t, p, ms)?.value)
}

/// Allowance for comparing moduli computed to residual `tol`: a density admissible up to
/// `tol` overestimates by at most a factor `(1 − tol)^{−p}`.
fn slack(p: f64, tol: f64, scale: f64) -> f64 {
    4.0 * p * tol * scale.abs().max(1e-300)
}

struct AxiomOutcome {
    values: serde_json::Value,
    violations: Vec<&'static str>,
}

/// Monotonicity under pendant growth and under enlarging `T`, subadditivity over a split
/// of `T`, and additivity over a disjoint union, on one seeded instance.
fn axioms(seed: u64, case: u64, p: f64, ms: &ModulusSettings) -> Result<AxiomOutcome, GraphError> {
    let mut rng = case_rng(seed, case, SALT_AXIOMS);
    let (g, s, t) = random_graph(&mut rng, MAX_VERTICES);
    let (g2, s2, t2) = random_graph(&mut rng, MAX_VERTICES / 2);
    let n = g.vertex_count();
    let mut violations = Vec::new();
    let base = modulus(&g, &s, &t, p, ms)?;

    // a pendant path hung on a non-terminal vertex
    let mut grown = g.clone();
    let anchor = (0..n).find(|v| !s.contains(v) && !t.contains(v)).unwrap_or(s[0]);
    let a = grown.add_vertex();
    let b = grown.add_vertex();
    grown.add_edge(anchor, a, 0.7).unwrap();
    grown.add_edge(a, b, 1.3).unwrap();
    let pendant = modulus(&grown, &s, &t, p, ms)?;
    if pendant > base + slack(p, ms.tol, base) {
        violations.push("pendant monotonicity");
    }

    // T ⊂ T' = T ∪ {w}
    let extra = (0..n).find(|v| !s.contains(v) && !t.contains(v));
    let bigger = match extra {
        Some(w) => {
            let mut t_big = t.clone();
            t_big.push(w);
            let m = modulus(&g, &s, &t_big, p, ms)?;
            if base > m + slack(p, ms.tol, m) {
                violations.push("terminal monotonicity");
            }
            Some((w, m))
        }
        None => None,
    };

    // T = T1 ∪ T2
    let split = match (extra, bigger) {
        (Some(w), Some((_, m_union))) => {
            let m1 = base;
            let m2 = modulus(&g, &s, &[w], p, ms)?;
            if m_union > m1 + m2 + slack(p, ms.tol, m1 + m2) {
                violations.push("subadditivity");
            }
            Some((m1, m2, m_union))
        }
        _ => None,
    };

    // disjoint union
    let union = g.disjoint_union(&g2);
    let shift = |v: &Vec<usize>| v.iter().map(|x| x + n).collect::<Vec<_>>();
    let s_all: Vec<usize> = s.iter().copied().chain(shift(&s2)).collect();
    let t_all: Vec<usize> = t.iter().copied().chain(shift(&t2)).collect();
    let other = modulus(&g2, &s2, &t2, p, ms)?;
    let joint = modulus(&union, &s_all, &t_all, p, ms)?;
    if (joint - base - other).abs() > slack(p, ms.tol, base + other) {
        violations.push("separated additivity");
    }

    Ok(AxiomOutcome {
        values: json!({
            "vertices": n, "edges": g.edges().len(), "modulus": base, "pendant": pendant,
            "enlarged_t": bigger.map(|b| b.1), "split": split.map(|(a, b, u)| json!([a, b, u])),
            "separate": [base, other], "union": joint,
        }),
        violations,
    })
}

/// Duality products on hand cases, seeded random graphs and a lattice ring; then the
/// modulus axioms on seeded instances.
pub fn cmd_duality(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let mut rep = Report::new(cfg);
    let p = cfg.p;
    let ms = ModulusSettings::with_tol(cfg.tol);

    let mut worst_hand = 0.0f64;
    let mut hand_ok = true;
    for (name, g, t_vertex) in series_parallel() {
        let t = Instant::now();
        match product(&g, &[0], &[t_vertex], p, &ms) {
            Ok((mp, mq, prod)) => {
                let dev = (prod - 1.0).abs();
                worst_hand = worst_hand.max(dev);
                hand_ok &= dev <= 1e-9;
                let rec = rep.record(name, &[5], json!({"p": p}), json!({"mod_p": mp, "mod_q": mq, "product": prod}));
                rec.reference = Some(1.0);
                rec.passed = Some(dev <= 1e-9);
                rec.runtime = t.elapsed();
            }
            Err(e) => {
                hand_ok = false;
                rep.failure(name, &[5], json!({"p": p}), e, t.elapsed());
            }
        }
    }
    rep.check(5, "hand cases", hand_ok, format!("largest |product − 1| = {worst_hand:.2e}"));

    let cases = cfg.cases(50);
    let mut worst = 0.0f64;
    let mut ok = true;
    for case in 0..cases as u64 {
        let t = Instant::now();
        let (g, s, tt) = random_graph(&mut case_rng(cfg.seed, case, SALT_DUALITY), MAX_VERTICES);
        let inputs = json!({"case": case, "vertices": g.vertex_count(), "edges": g.edges().len(), "s": s, "t": tt});
        match product(&g, &s, &tt, p, &ms) {
            Ok((mp, mq, prod)) => {
                let dev = (prod - 1.0).abs();
                worst = worst.max(dev);
                ok &= dev <= 1e-5;
                let rec = rep.record(format!("graph {case:02}"), &[5], inputs, json!({"mod_p": mp, "mod_q": mq, "product": prod}));
                rec.reference = Some(1.0);
                rec.passed = Some(dev <= 1e-5);
                rec.runtime = t.elapsed();
            }
            Err(e) => {
                ok = false;
                rep.failure(format!("graph {case:02}"), &[5], inputs, e, t.elapsed());
            }
        }
    }
    rep.check(5, "random graphs", ok, format!("largest |product − 1| = {worst:.2e} over {cases} graphs"));

    // lattice ring, coarse
    let t = Instant::now();
    let lattice = build_grid_graph(&GridBox::cube(-1.75, 1.75).expect("box"), 0.25).expect("lattice");
    let inner: Vec<usize> = (0..lattice.coords.len()).filter(|&i| lattice.coords[i].norm() <= 0.5 + 1e-9).collect();
    let outer: Vec<usize> = (0..lattice.coords.len()).filter(|&i| lattice.coords[i].norm() >= 1.5 - 1e-9).collect();
    let coarse = ModulusSettings::with_tol(1e-4);
    match product(&lattice.graph, &inner, &outer, p, &coarse) {
        Ok((mp, mq, prod)) => {
            let rec = rep.record("lattice ring", &[5], json!({"h": 0.25, "a": 0.5, "b": 1.5, "tol": 1e-4}), json!({"mod_p": mp, "mod_q": mq, "product": prod}));
            rec.reference = Some(1.0);
            rec.passed = Some((prod - 1.0).abs() <= 1e-3);
            rec.runtime = t.elapsed();
            rep.check(5, "lattice ring", (prod - 1.0).abs() <= 1e-3, format!("product {prod:.6}"));
        }
        Err(e) => {
            rep.failure("lattice ring", &[5], json!({"h": 0.25}), &e, t.elapsed());
            rep.check(5, "lattice ring", false, e.to_string());
        }
    }

    let instances = 100;
    let mut broken = Vec::new();
    for case in 0..instances {
        let t = Instant::now();
        match axioms(cfg.seed, case, p, &ms) {
            Ok(out) => {
                let rec = rep.record(format!("axioms {case:02}"), &[6], json!({"case": case}), out.values);
                rec.passed = Some(out.violations.is_empty());
                if !out.violations.is_empty() {
                    rec.error = Some(out.violations.join(", "));
                    broken.push(case);
                }
                rec.runtime = t.elapsed();
            }
            Err(e) => {
                broken.push(case);
                rep.failure(format!("axioms {case:02}"), &[6], json!({"case": case}), e, t.elapsed());
            }
        }
    }
    rep.check(6, "modulus axioms", broken.is_empty(), format!("{} of {instances} instances with violations", broken.len()));
    rep.summarize("worst_random_deviation", worst);
    rep.summarize("worst_hand_deviation", worst_hand);
    Ok(rep)
}
