mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socsim::communities::cpm_communities;
use socsim::linkpred::{score_aa, score_cn, score_pa};
use socsim::sna::{betweenness, closeness};
use socsim::society::{derive_relations, GraphMode, PsiConfig};

#[test]
fn centralities_match_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..60 {
        let n = rng.random_range(1..=7);
        let p = rng.random_range(0.3..0.7);
        let g = if round % 2 == 0 {
            random_digraph(&mut rng, n, p)
        } else {
            random_graph(&mut rng, n, p)
        };
        for mode in [GraphMode::Directed, GraphMode::Symmetrized] {
            let (c, oc) = (closeness(&g, mode), oracle_closeness(&g, mode));
            let (b, ob) = (betweenness(&g, mode), oracle_betweenness(&g, mode));
            for v in g.nodes() {
                assert!((c[v] - oc[v]).abs() < 1e-9, "closeness {v} {mode:?}");
                assert!((b[v] - ob[v]).abs() < 1e-9, "betweenness {v} {mode:?}");
            }
        }
    }
}

#[test]
fn cpm_matches_clique_merging() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..60 {
        let n = rng.random_range(3..=9);
        let p = rng.random_range(0.3..0.8);
        let g = random_graph(&mut rng, n, p);
        let got: std::collections::BTreeSet<_> = cpm_communities(&g, 3)
            .unwrap()
            .into_iter()
            .map(|grp| grp.members)
            .collect();
        assert_eq!(got, oracle_cpm(&g, 3));
    }
}

#[test]
fn cpm_k4_matches_clique_merging() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..30 {
        let g = random_graph(&mut rng, 8, 0.7);
        let got: std::collections::BTreeSet<_> = cpm_communities(&g, 4)
            .unwrap()
            .into_iter()
            .map(|grp| grp.members)
            .collect();
        assert_eq!(got, oracle_cpm(&g, 4));
    }
}

#[test]
fn link_scores_match_set_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..40 {
        let n = rng.random_range(2..=8);
        let g = random_digraph(&mut rng, n, 0.35);
        for u in g.nodes() {
            for v in g.nodes() {
                assert_eq!(score_cn(&g, u, v).unwrap(), oracle_cn(&g, u, v));
                assert_eq!(score_aa(&g, u, v).unwrap(), oracle_aa(&g, u, v));
                assert_eq!(score_pa(&g, u, v).unwrap(), oracle_pa(&g, u, v));
            }
        }
    }
}

#[test]
fn agent_relations_equal_global_derivation() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for round in 0..40 {
        let len = rng.random_range(1..60);
        let events = random_stream(&mut rng, 5, len, 50);
        let psi = PsiConfig {
            decay: if round % 2 == 0 { 0.0 } else { 0.02 },
            threshold: 1.5,
            saturation: 1.0,
        };
        let now = 60;
        assert_eq!(
            derive_relations(&events, &psi, now).unwrap(),
            agent_relations(&events, &psi, now)
        );
    }
}
