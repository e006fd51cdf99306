//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use coselect::graph::{betweenness_all, clustering_all, clustering_coefficient, girvan_newman, modularity};
use coselect::ingest::write_records_csv;
use coselect::mining::lift;
use coselect::null_models::{calibrate_radius, er_gnm, random_geometric, switch_randomize};
use coselect::pipeline::{self, AnalyzeConfig, CellStatus, Scope};
use coselect::stats::{ensemble_zscores, kendall, pearson, spearman};
use coselect::synth::{generate, LateItems, PlannerConfig, Popularity};
use coselect::{CorrelationKind, Graph, NullModelKind, NullModelSpec, SeededRng, Statistic, TransactionSet};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    if elapsed < budget {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, budget {budget:?}"))
    }
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let graphs = 300;
    let mut worst = 0.0f64;
    for g in 0..graphs {
        let n = rng.random_range(1..=7);
        let p = rng.random_range(0.1..0.9);
        let graph = common::random_graph(n, p, rng.random());
        let (bc, cc) = (betweenness_all(&graph), clustering_all(&graph));
        let (bc_ref, cc_ref) = (common::betweenness(&graph), common::clustering(&graph));
        for i in 0..n {
            let single = clustering_coefficient(&graph, graph.label(i)).unwrap();
            let err = (bc[i] - bc_ref[i])
                .abs()
                .max((cc[i] - cc_ref[i]).abs())
                .max((single - cc_ref[i]).abs());
            worst = worst.max(err);
            if err > 1e-9 {
                return Err(format!(
                    "graph {g} node {i}: betweenness {} vs {}, clustering {} vs {}",
                    bc[i], bc_ref[i], cc[i], cc_ref[i]
                ));
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{graphs} graphs, max error {worst:.1e}, {:?}", start.elapsed()))
}

fn formula_fixtures() -> Outcome {
    let baskets = TransactionSet::from_baskets([
        ("t1", vec!["A", "B"]),
        ("t2", vec!["A", "C", "D", "E"]),
        ("t3", vec!["B", "C", "D", "F"]),
        ("t4", vec!["A", "B", "C", "D"]),
    ]);
    let cd = lift("C", "D", &baskets).map_err(|e| e.to_string())?;
    if (cd - 4.0 / 3.0).abs() > 1e-12 {
        return Err(format!("lift(C,D) = {cd}"));
    }
    let table = "campaign,grade,width_mm,thickness_mm,carbon,manganese,silicon\n\
                 A,1,1800,55,0.010,0.010,0.005\n\
                 A,2,1750,65,0.010,0.020,0.015\n\
                 B,3,1800,65,0.020,0.020,0.010\n\
                 B,4,1750,70,0.020,0.010,0.025\n";
    let mined = pipeline::mine(table, "grade", None, Default::default()).map_err(|e| e.to_string())?;
    let components: BTreeSet<Vec<String>> = mined.components.iter().cloned().collect();
    let expected: BTreeSet<Vec<String>> = [
        vec!["1".to_string(), "2".to_string()],
        vec!["3".to_string(), "4".to_string()],
    ]
    .into_iter()
    .collect();
    if components != expected {
        return Err(format!("components {components:?}"));
    }
    let mut carbons = Vec::new();
    for component in &mined.components {
        let sum: f64 = component
            .iter()
            .map(|i| mined.network.node_attributes[i]["carbon"])
            .sum();
        carbons.push(sum / component.len() as f64);
    }
    carbons.sort_by(f64::total_cmp);
    check(
        (carbons[0] - 0.010).abs() < 1e-12 && (carbons[1] - 0.020).abs() < 1e-12,
        format!("lift(C,D) = {cd:.6}, components {{1,2}} {{3,4}}, mean carbon {carbons:?}"),
    )
}

fn community_recovery() -> Outcome {
    let graph = common::two_cliques_with_bridge(8);
    let partition = girvan_newman(&graph);
    let expected = vec![(0..8).collect::<Vec<_>>(), (8..16).collect()];
    if partition.communities != expected {
        return Err(format!("communities {:?}", partition.communities));
    }
    let triangles = Graph::from_edges(
        ["a", "b", "c", "x", "y", "z"],
        [("a", "b"), ("b", "c"), ("a", "c"), ("x", "y"), ("y", "z"), ("x", "z")],
    )
    .unwrap();
    let q = modularity(&triangles, &[vec![0, 1, 2], vec![3, 4, 5]]).map_err(|e| e.to_string())?;
    let q_ref = common::modularity(&triangles, &[0, 0, 0, 1, 1, 1]);
    check(
        (q - 0.5).abs() < 1e-12 && (q_ref - 0.5).abs() < 1e-12,
        format!(
            "two K8 recovered with Q = {:.4}, triangles Q = {q}",
            partition.modularity_q
        ),
    )
}

fn null_model_structure() -> Outcome {
    let start = Instant::now();
    let (n, m, replicates) = (100, 300, 1000);
    let root = SeededRng::new(21);
    let source = er_gnm(n, m, &mut root.derive(0).replicate(0)).map_err(|e| e.to_string())?;
    let degrees = source.degrees();
    let source_edges: BTreeSet<(usize, usize)> = source.edges().collect();
    let mut well_mixed = 0;
    for i in 0..replicates as u64 {
        let er = er_gnm(n, m, &mut root.derive(1).replicate(i)).map_err(|e| e.to_string())?;
        let distinct: BTreeSet<(usize, usize)> = er.edges().collect();
        if er.node_count() != n || er.edge_count() != m || distinct.len() != m || distinct.iter().any(|(u, v)| u >= v) {
            return Err(format!("ER replicate {i} is not a simple ({n}, {m}) graph"));
        }
        let swapped = switch_randomize(&source, 10.0, &mut root.derive(2).replicate(i));
        if swapped.degrees() != degrees || swapped.edge_count() != m {
            return Err(format!("switch replicate {i} changed the degree sequence"));
        }
        let changed = swapped.edges().filter(|e| !source_edges.contains(e)).count();
        if changed * 10 >= m {
            well_mixed += 1;
        }
    }
    if well_mixed * 100 < replicates * 95 {
        return Err(format!(
            "only {well_mixed}/{replicates} swap replicates changed 10% of edges"
        ));
    }
    let radius = calibrate_radius(n, m, &root.derive(3)).map_err(|e| e.to_string())?;
    let fresh = root.derive(4);
    let samples = 200;
    let mut total = 0usize;
    for i in 0..samples as u64 {
        total += random_geometric(n, radius, &mut fresh.replicate(i))
            .map_err(|e| e.to_string())?
            .graph
            .edge_count();
    }
    let mean = total as f64 / samples as f64;
    let relative = (mean - m as f64).abs() / m as f64;
    if relative >= 0.05 {
        return Err(format!("GRG mean edges {mean} vs target {m}"));
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "{replicates} ER and switch replicates exact, {well_mixed}/{replicates} well mixed, GRG r = {radius:.4} mean edges {mean:.1} ({:.2}%), {:?}",
        relative * 100.0,
        start.elapsed()
    ))
}

fn zscore_self_consistency() -> Outcome {
    let (n, m, trials, replicates) = (40, 80, 200, 200);
    let spec = NullModelSpec::ErdosRenyi { n, m };
    let root = SeededRng::new(31);
    let mut sums = [0.0; 2];
    let mut counts = [0usize; 2];
    for t in 0..trials as u64 {
        let observed = spec
            .sample(&mut root.derive(t).replicate(u64::MAX))
            .map_err(|e| e.to_string())?;
        let outcomes = ensemble_zscores(&observed, &spec, replicates, CorrelationKind::Spearman, &root.derive(t))
            .map_err(|e| e.to_string())?;
        for (slot, outcome) in outcomes.iter().enumerate() {
            if let Ok(summary) = &outcome.result {
                if let Some(z) = summary.z {
                    sums[slot] += z;
                    counts[slot] += 1;
                }
            }
        }
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let names: Vec<&str> = Statistic::ALL.iter().map(|s| s.name()).collect();
    check(
        counts.iter().all(|&c| c * 10 >= trials * 9) && means.iter().all(|z| z.abs() < 0.15),
        format!(
            "mean z {} = {:.4} over {} trials, {} = {:.4} over {} trials",
            names[0], means[0], counts[0], names[1], means[1], counts[1]
        ),
    )
}

const BANDS: [(f64, f64); 2] = [(0.01, 0.05), (0.15, 0.30)];
const PLANTED_SEED: u64 = 1;

fn planted_csv() -> (String, PlannerConfig) {
    let mut config = PlannerConfig::carbon_bands(&BANDS, 30, 5000, Popularity::Uniform);
    config.campaign_size = (1, 3);
    config.late_items = Some(LateItems {
        items: vec!["G030".into(), "G060".into()],
        from_campaign: 2500,
    });
    let records = generate(&config, &mut SeededRng::new(PLANTED_SEED).replicate(0)).unwrap();
    (write_records_csv(&records, "grade").unwrap(), config)
}

fn planted_config() -> AnalyzeConfig {
    AnalyzeConfig {
        seed: PLANTED_SEED,
        ..AnalyzeConfig::default()
    }
}

fn planted_recovery() -> Outcome {
    let (csv, planner) = planted_csv();
    let config = planted_config();
    let start = Instant::now();
    let out = pipeline::analyze(&csv, &config).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let report = &out.report;
    let mut failures = Vec::new();

    let final_stage = report.stages.last().ok_or("no stages")?;
    let band_of = |item: &str| {
        planner
            .bands
            .iter()
            .position(|b| b.items.iter().any(|i| i.item == item))
    };
    let aligned = final_stage.components.len() == 2
        && final_stage.components.iter().all(|c| {
            let bands: BTreeSet<Option<usize>> = c.items.iter().map(|i| band_of(i)).collect();
            let carbon = c.attribute_means["carbon"];
            bands.len() == 1 && BANDS.iter().any(|&(lo, hi)| lo <= carbon && carbon <= hi)
        });
    if !aligned {
        failures.push(format!(
            "(a) {} final-stage components not aligned with bands",
            final_stage.components.len()
        ));
    }

    let core: Vec<_> = report.zscores.iter().filter(|c| c.scope == Scope::Core).collect();
    let below = core
        .iter()
        .filter(|c| c.status == CellStatus::Ok && c.z.is_some_and(|z| z.abs() < 2.0))
        .count();
    let expected_cells = config.windows * config.models.len() * Statistic::ALL.len();
    if core.len() != expected_cells || below * 10 < core.len() * 8 {
        failures.push(format!("(b) {below}/{} core cells with |z| < 2", core.len()));
    }
    let mut by_model = Vec::new();
    for model in NullModelKind::ALL {
        for statistic in Statistic::ALL {
            let cells = core.iter().filter(|c| c.model == model && c.statistic == statistic);
            let (total, ok) = cells.fold((0, 0), |(t, o), c| {
                (
                    t + 1,
                    o + usize::from(c.status == CellStatus::Ok && c.z.is_some_and(|z| z.abs() < 2.0)),
                )
            });
            by_model.push(format!("{} {} {ok}/{total}", model.name(), statistic.name()));
        }
    }

    let ages: Vec<String> = ["G030", "G060"]
        .iter()
        .map(|item| format!("{item}={:?}", report.node_ages.get(*item)))
        .collect();
    if !["G030", "G060"]
        .iter()
        .all(|i| report.node_ages.get(*i).is_some_and(|&a| a > 0))
    {
        failures.push(format!("(c) late item ages {ages:?}"));
    }
    if elapsed >= Duration::from_secs(600) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    let detail = format!(
        "(a) {} components, core {}/{} items; (b) {below}/{} core cells |z| < 2 [{}]; (c) ages {}; {elapsed:?}",
        final_stage.components.len(),
        report.selection.core_items.len(),
        report.selection.items.len(),
        core.len(),
        by_model.join(", "),
        ages.join(" ")
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn determinism() -> Outcome {
    let (csv, _) = planted_csv();
    let config = AnalyzeConfig {
        ensemble: 200,
        ..planted_config()
    };
    let first = pipeline::analyze(&csv, &config).map_err(|e| e.to_string())?;
    let second = pipeline::analyze(&csv, &config).map_err(|e| e.to_string())?;
    let (a, b) = (first.report_json(), second.report_json());
    check(a == b, format!("report.json identical across runs ({} bytes)", a.len()))
}

fn correlation_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let samples = 2000;
    let mut kendall_checked = 0;
    for s in 0..samples {
        let n = rng.random_range(3..=8);
        // small value ranges force ties
        let levels = rng.random_range(2..=10);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.7).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 - 3.0).collect();
        let by_ranks = pearson(&common::ranks(&x), &common::ranks(&y));
        match (spearman(&x, &y), by_ranks) {
            (Ok(a), Ok(b)) if a.value == b.value && a.p_value == b.p_value => {}
            (Err(_), Err(_)) => {}
            (a, b) => return Err(format!("sample {s}: spearman {a:?} vs ranked pearson {b:?}")),
        }
        let reference = common::kendall_tau_b(&x, &y);
        match kendall(&x, &y) {
            Ok(k) if (k.value - reference).abs() < 1e-12 && (-1.0..=1.0).contains(&k.value) => kendall_checked += 1,
            Err(_) if !reference.is_finite() => {}
            other => return Err(format!("sample {s}: kendall {other:?} vs {reference}")),
        }
    }
    check(
        kendall_checked >= 500,
        format!("{samples} samples of length 3..=8, {kendall_checked} with defined tau-b"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("metric oracle equivalence", metric_oracles),
        ("formula fixtures", formula_fixtures),
        ("community recovery", community_recovery),
        ("null-model structure", null_model_structure),
        ("z-score self-consistency", zscore_self_consistency),
        ("planted recovery", planted_recovery),
        ("determinism", determinism),
        ("correlation identities", correlation_identities),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
