mod common;

use std::collections::BTreeSet;

use coselect::evolution::{group_summary, node_age, prune_minor_groups, stage_networks};
use coselect::graph::{betweenness_all, clustering_all, connected_components, girvan_newman, modularity};
use coselect::ingest::{assign_windows, group_campaigns, parse_records};
use coselect::null_models::{er_gnm, geometric_from_positions, random_geometric, switch_randomize};
use coselect::stats::{kendall, pearson, spearman, zscore};
use coselect::{Graph, MiningThresholds, SeededRng};
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = Graph> {
    (1usize..=7, 0.05f64..0.95, any::<u64>()).prop_map(|(n, p, seed)| common::random_graph(n, p, seed))
}

fn medium_graph() -> impl Strategy<Value = Graph> {
    (2usize..=30, 0.05f64..0.6, any::<u64>()).prop_map(|(n, p, seed)| common::random_graph(n, p, seed))
}

fn paired_values() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(-5i32..5, n).prop_map(|v| v.into_iter().map(f64::from).collect()),
            prop::collection::vec(-5i32..5, n).prop_map(|v| v.into_iter().map(f64::from).collect()),
        )
    })
}

/// Rows `(campaign, item)`; item `i` has carbon `i / 100`.
fn record_rows() -> impl Strategy<Value = String> {
    prop::collection::vec((0u8..15, 0u8..8), 1..80).prop_map(|rows| {
        let mut text = String::from("campaign,grade,carbon\n");
        for (c, i) in rows {
            text.push_str(&format!("c{c},g{i},{}\n", f64::from(i) / 100.0));
        }
        text
    })
}

proptest! {
    #[test]
    fn metrics_match_oracles(graph in small_graph()) {
        let (bc, bc_ref) = (betweenness_all(&graph), common::betweenness(&graph));
        let (cc, cc_ref) = (clustering_all(&graph), common::clustering(&graph));
        for i in 0..graph.node_count() {
            prop_assert!((bc[i] - bc_ref[i]).abs() < 1e-9);
            prop_assert!((cc[i] - cc_ref[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn graphs_are_simple_and_symmetric(graph in medium_graph()) {
        prop_assert_eq!(graph.degrees().iter().sum::<usize>(), 2 * graph.edge_count());
        for u in 0..graph.node_count() {
            for &v in graph.neighbors(u) {
                prop_assert!(u != v);
                prop_assert!(graph.neighbors(v).contains(&u));
            }
        }
    }

    #[test]
    fn dendrogram_refines_and_modularity_matches_definition(graph in medium_graph()) {
        let partition = girvan_newman(&graph);
        let covered: Vec<usize> = {
            let mut all: Vec<usize> = partition.communities.concat();
            all.sort_unstable();
            all
        };
        prop_assert_eq!(covered, (0..graph.node_count()).collect::<Vec<_>>());
        prop_assert!((-1.0..=1.0).contains(&partition.modularity_q));
        for pair in partition.dendrogram.windows(2) {
            let (coarse, fine) = (&pair[0].communities, &pair[1].communities);
            prop_assert_eq!(fine.len(), coarse.len() + 1);
            for community in fine {
                let parent = coarse.iter().any(|c| community.iter().all(|n| c.contains(n)));
                prop_assert!(parent);
            }
        }
        let components = connected_components(&graph);
        let base = modularity(&graph, &components).unwrap();
        prop_assert!(partition.modularity_q >= base - 1e-12);
        let membership = partition.membership(graph.node_count());
        prop_assert!((partition.modularity_q - common::modularity(&graph, &membership)).abs() < 1e-12);
        prop_assert_eq!(girvan_newman(&graph), partition);
    }

    #[test]
    fn er_has_exact_counts(n in 0usize..40, fill in 0.0f64..=1.0, seed in any::<u64>()) {
        let m = (fill * (n * n.saturating_sub(1) / 2) as f64) as usize;
        let graph = er_gnm(n, m, &mut SeededRng::new(seed).replicate(0)).unwrap();
        prop_assert_eq!(graph.node_count(), n);
        prop_assert_eq!(graph.edge_count(), m);
        prop_assert_eq!(graph.edges().collect::<BTreeSet<_>>().len(), m);
        let again = er_gnm(n, m, &mut SeededRng::new(seed).replicate(0)).unwrap();
        prop_assert_eq!(again, graph);
    }

    #[test]
    fn switching_preserves_degrees(graph in medium_graph(), seed in any::<u64>()) {
        let swapped = switch_randomize(&graph, 3.0, &mut SeededRng::new(seed).replicate(1));
        prop_assert_eq!(swapped.degrees(), graph.degrees());
        prop_assert_eq!(swapped.edge_count(), graph.edge_count());
        prop_assert_eq!(swapped.labels(), graph.labels());
    }

    #[test]
    fn geometric_edges_are_exactly_close_pairs(n in 0usize..40, radius in 0.0f64..0.8, seed in any::<u64>()) {
        let sample = random_geometric(n, radius, &mut SeededRng::new(seed).replicate(2)).unwrap();
        let p = &sample.positions;
        let mut expected = BTreeSet::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if ((p[u][0] - p[v][0]).powi(2) + (p[u][1] - p[v][1]).powi(2)).sqrt() <= radius {
                    expected.insert((u, v));
                }
            }
        }
        prop_assert_eq!(sample.graph.edges().collect::<BTreeSet<_>>(), expected);
        prop_assert_eq!(geometric_from_positions(p.clone(), radius).graph, sample.graph);
    }

    #[test]
    fn spearman_is_pearson_on_ranks((x, y) in paired_values()) {
        let direct = spearman(&x, &y);
        let ranked = pearson(&common::ranks(&x), &common::ranks(&y));
        match (direct, ranked) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.value, b.value);
                prop_assert!(a.value.abs() <= 1.0 && (0.0..=1.0).contains(&a.p_value));
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn kendall_matches_pair_counts((x, y) in paired_values()) {
        let reference = common::kendall_tau_b(&x, &y);
        match kendall(&x, &y) {
            Ok(k) => {
                prop_assert!((k.value - reference).abs() < 1e-12);
                prop_assert!(k.value.abs() <= 1.0 && (0.0..=1.0).contains(&k.p_value));
            }
            Err(_) => prop_assert!(!reference.is_finite()),
        }
    }

    #[test]
    fn rank_correlations_ignore_monotone_maps((x, y) in paired_values(), scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let affine: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let cubed: Vec<f64> = x.iter().map(|v| v.powi(3) + shift).collect();
        if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&affine, &y)) {
            prop_assert!((a.value - b.value).abs() < 1e-9);
        }
        if let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&cubed, &y)) {
            prop_assert!((a.value - b.value).abs() < 1e-12);
        }
        if let (Ok(a), Ok(b)) = (kendall(&x, &y), kendall(&cubed, &y)) {
            prop_assert!((a.value - b.value).abs() < 1e-12);
        }
    }

    #[test]
    fn zscore_ignores_common_affine_maps(
        x in -3.0f64..3.0,
        reps in prop::collection::vec(-3.0f64..3.0, 2..30),
        scale in 0.1f64..10.0,
        shift in -5.0f64..5.0,
    ) {
        let mapped: Vec<f64> = reps.iter().map(|v| scale * v + shift).collect();
        match (zscore(x, &reps), zscore(scale * x + shift, &mapped)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-6 * (1.0 + a.abs())),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn stages_grow_and_ages_are_first_appearance(text in record_rows(), windows in 1usize..5) {
        let records = parse_records(&text, "grade", &["carbon"]).unwrap();
        let ts = group_campaigns(&records);
        prop_assume!(windows <= ts.len());
        let assignment = assign_windows(&ts, windows).unwrap();
        let series = stage_networks(&records, &ts, &assignment, MiningThresholds::default()).unwrap();
        prop_assert_eq!(series.len(), windows);
        for pair in series.stages.windows(2) {
            for label in pair[0].graph.labels() {
                prop_assert!(pair[1].graph.contains(label));
            }
        }
        let ages = node_age(&series);
        for (stage, network) in series.stages.iter().enumerate() {
            for label in network.graph.labels() {
                prop_assert!(ages.age_of[label] <= stage);
            }
        }
        for (item, &age) in &ages.age_of {
            prop_assert!(series.stages[age].graph.contains(item));
            prop_assert!(age == 0 || !series.stages[age - 1].graph.contains(item));
        }

        let final_graph = &series.final_stage().unwrap().graph;
        let groups: Vec<Vec<String>> = connected_components(final_graph)
            .iter()
            .map(|c| final_graph.labels_of(c))
            .collect();
        let summaries = group_summary(&groups, &records, &ts).unwrap();
        let total: f64 = summaries.iter().map(|g| g.slab_frequency).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(summaries.iter().all(|g| (0.0..=1.0).contains(&g.campaign_frequency)));
        let pruned = prune_minor_groups(final_graph, &summaries, 0.0).unwrap();
        prop_assert_eq!(pruned.labels(), final_graph.labels());
    }
}
