use capax_core::experiments::generate::{case_rng, random_graph};
use capax_core::graph::{conjugate, connecting_modulus, cut_modulus, duality_product, ModulusSettings, WeightedGraph};
use proptest::prelude::*;

fn lengths() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.3..3.0f64, 1..6)
}

fn modulus(g: &WeightedGraph, s: &[usize], t: &[usize], p: f64) -> f64 {
    connecting_modulus(g, s, t, p, &ModulusSettings::with_tol(1e-9)).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Parallel edges: `Σ σᵢ^{1−p}`.
    #[test]
    fn parallel_rule(sigmas in lengths(), p in 1.5..4.0f64) {
        let mut g = WeightedGraph::new(2);
        for &s in &sigmas {
            g.add_edge(0, 1, s).unwrap();
        }
        let exact: f64 = sigmas.iter().map(|s| s.powf(1.0 - p)).sum();
        let m = modulus(&g, &[0], &[1], p);
        prop_assert!((m / exact - 1.0).abs() < 1e-7, "{} vs {}", m, exact);
    }

    /// A path: `(Σ σᵢ)^{1−p}`.
    #[test]
    fn series_rule(sigmas in lengths(), p in 1.5..4.0f64) {
        let mut g = WeightedGraph::new(sigmas.len() + 1);
        for (i, &s) in sigmas.iter().enumerate() {
            g.add_edge(i, i + 1, s).unwrap();
        }
        let exact = sigmas.iter().sum::<f64>().powf(1.0 - p);
        let m = modulus(&g, &[0], &[sigmas.len()], p);
        prop_assert!((m / exact - 1.0).abs() < 1e-7, "{} vs {}", m, exact);
    }

    #[test]
    fn duality_holds_on_random_graphs(seed in any::<u64>(), p in 1.5..4.0f64) {
        let (g, s, t) = random_graph(&mut case_rng(seed, 0, 0), 16);
        let ms = ModulusSettings::with_tol(1e-8);
        let mp = connecting_modulus(&g, &s, &t, p, &ms).unwrap();
        let mq = cut_modulus(&g, &s, &t, conjugate(p), &ms).unwrap();
        let prod = duality_product(&mp, &mq).unwrap();
        prop_assert!((prod - 1.0).abs() < 1e-5, "product {}", prod);
    }

    /// Shortening one edge can only raise the modulus.
    #[test]
    fn modulus_is_monotone_in_lengths(seed in any::<u64>(), edge in any::<prop::sample::Index>(), factor in 0.2..1.0f64) {
        let (g, s, t) = random_graph(&mut case_rng(seed, 1, 0), 16);
        let pick = edge.index(g.edges().len());
        let mut shorter = WeightedGraph::new(g.vertex_count());
        for (i, e) in g.edges().iter().enumerate() {
            let sigma = if i == pick { e.sigma * factor } else { e.sigma };
            shorter.add_edge_with_area(e.u, e.v, sigma, e.area).unwrap();
        }
        let before = modulus(&g, &s, &t, 3.0);
        let after = modulus(&shorter, &s, &t, 3.0);
        prop_assert!(after >= before * (1.0 - 1e-6), "{} < {}", after, before);
    }
}
