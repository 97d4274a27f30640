mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use loopcut::harness::{
    generate_corpus, load_corpus, read_bench_csv, run_bench, write_bench_csv, write_corpus,
    BenchAlgo, BenchOptions, CorpusSpec, GraphWeights, Instance,
};
use loopcut::loop_cutset::{rlc, split_graph, verify_loop_cutset, Dag};
use loopcut::oracle::{brute_force_min_wfvs, greedy_ga};
use loopcut::random_fvs::{selection_probabilities, SelectionMode};
use loopcut::reduce::{is_branchy, is_rich, reduce_to_branchy, reduce_to_rich};
use loopcut::{MultiGraph, RandomStream, RunConfig, VertexId, Weight};
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn reductions_meet_postconditions() {
    let mut rng = RandomStream::new(1).rng();
    for _ in 0..300 {
        let n = rng.gen_range(1..=14);
        let m = rng.gen_range(0..=3 * n as usize);
        let g = random_multigraph(&mut rng, n, m, true, true);
        let rich = reduce_to_rich(&g);
        assert!(is_rich(&rich.reduced));
        rich.reduced.check_invariants().unwrap();
        let branchy = reduce_to_branchy(&g);
        assert!(is_branchy(&branchy.reduced));
        branchy.reduced.check_invariants().unwrap();
        for forced in [&rich.forced, &branchy.forced] {
            assert!(forced.iter().all(|v| g.contains(*v)));
        }
    }
}

#[test]
fn oracle_is_invariant_under_renumbering() {
    let mut rng = RandomStream::new(2).rng();
    for _ in 0..60 {
        let n = rng.gen_range(2..=10);
        let g = random_multigraph(&mut rng, n, 2 * n as usize, true, false);
        let mut perm: Vec<u32> = (0..n).map(|i| i * 3 + 5).collect();
        perm.shuffle(&mut rng);
        let mut h = MultiGraph::new();
        for v in g.vertices() {
            h.add_vertex(VertexId(perm[v.0 as usize]), g.weight(v).unwrap())
                .unwrap();
        }
        for (u, v, mult) in g.edges() {
            h.add_edge(
                VertexId(perm[u.0 as usize]),
                VertexId(perm[v.0 as usize]),
                mult,
            )
            .unwrap();
        }
        let a = brute_force_min_wfvs(&g).unwrap().total_weight.as_f64();
        let b = brute_force_min_wfvs(&h).unwrap().total_weight.as_f64();
        assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn greedy_never_beats_the_oracle() {
    let mut rng = RandomStream::new(3).rng();
    for _ in 0..150 {
        let n = rng.gen_range(1..=11);
        let m = rng.gen_range(0..=3 * n as usize);
        let g = random_multigraph(&mut rng, n, m, true, true);
        let greedy = greedy_ga(&g).unwrap();
        assert!(g.verify_fvs(&greedy.members).unwrap());
        let best = brute_force_min_wfvs(&g).unwrap();
        assert!(greedy.total_weight.as_f64() >= best.total_weight.as_f64() - 1e-9);
        if g.is_forest() {
            assert!(greedy.members.is_empty());
        }
    }
}

#[test]
fn hit_probability_bounds() {
    let mut rng = RandomStream::new(4).rng();
    let (mut rich_seen, mut branchy_seen) = (0, 0);
    while rich_seen < 200 || branchy_seen < 200 {
        let n = rng.gen_range(3..=10);
        let m = rng.gen_range(n as usize..=3 * n as usize);
        let g = random_multigraph(&mut rng, n, m, true, false);

        let rich = reduce_to_rich(&g.unit_weighted()).reduced;
        if !rich.is_empty() && rich_seen < 200 {
            rich_seen += 1;
            let fvs = all_fvs(&rich);
            let k = fvs.iter().map(|f| f.len()).min().unwrap();
            let hitting: BTreeSet<VertexId> = fvs
                .iter()
                .filter(|f| f.len() == k)
                .flatten()
                .copied()
                .collect();
            let p: f64 = selection_probabilities(&rich, SelectionMode::DegreeProportional)
                .unwrap()
                .into_iter()
                .filter(|(v, _)| hitting.contains(v))
                .map(|(_, p)| p)
                .sum();
            assert!(p >= 0.25 - 1e-12, "rich hit probability {p}");
        }

        let branchy = reduce_to_branchy(&g).reduced;
        if !branchy.is_empty() && branchy_seen < 200 {
            branchy_seen += 1;
            let fixed = brute_force_min_wfvs(&branchy).unwrap().members;
            let p: f64 = selection_probabilities(&branchy, SelectionMode::DegreeProportional)
                .unwrap()
                .into_iter()
                .filter(|(v, _)| fixed.contains(v))
                .map(|(_, p)| p)
                .sum();
            assert!(p >= 1.0 / 6.0 - 1e-12, "branchy hit probability {p}");
        }
    }
}

/// p→v, p2→v, v→c, v→c2, p→c, p2→c2: two loops, three splitting-graph
/// cycles. The extra cycle enters `v` from both parents on its in-copy and
/// leaves to both children on its out-copy.
fn two_diamonds() -> Dag {
    let (p, p2, v, c, c2) = (0, 1, 2, 3, 4);
    let arcs = [(p, v), (p2, v), (v, c), (v, c2), (p, c), (p2, c2)];
    Dag::new(
        (0..5).map(|i| (VertexId(i), 2)),
        arcs.iter().map(|&(a, b)| (VertexId(a), VertexId(b))),
    )
    .unwrap()
}

#[test]
fn splitting_graph_can_have_more_cycles_than_loops() {
    let d = two_diamonds();
    assert_eq!(dag_loops(&d).len(), 2);
    let cycles = split_cycles(&d);
    assert_eq!(cycles.len(), 3);
    let images: BTreeSet<EdgeSet> = dag_loops(&d).iter().map(|lp| loop_image(&d, lp)).collect();
    let extra: Vec<&Vec<u32>> = cycles
        .iter()
        .filter(|(e, _)| !images.contains(*e))
        .map(|(_, p)| p)
        .collect();
    assert_eq!(extra.len(), 1);
    let split = split_graph(&d);
    let v = VertexId(2);
    let path: BTreeSet<VertexId> = extra[0].iter().map(|&x| VertexId(x)).collect();
    assert!(
        path.contains(&split.in_vertex(v).unwrap()) && path.contains(&split.out_vertex(v).unwrap())
    );
    assert_eq!(split.psi(&path).unwrap().len(), 5);
}

#[test]
fn loops_map_injectively_into_splitting_graph_cycles() {
    for seed in 0..150 {
        let n = 3 + (seed % 6) as usize;
        let arcs = (n * (n - 1) / 2).min(n + 1 + (seed % 4) as usize);
        let d = random_dag(seed, n, arcs, 2, 5);
        let loops = dag_loops(&d);
        let cycles = split_cycles(&d);
        let images: BTreeSet<EdgeSet> = loops.iter().map(|lp| loop_image(&d, lp)).collect();
        assert_eq!(
            images.len(),
            loops.len(),
            "seed {seed}: two loops share an image"
        );
        assert!(
            images.iter().all(|e| cycles.contains_key(e)),
            "seed {seed}: image is not a cycle"
        );
        assert!(loops.len() <= cycles.len());
    }
}

#[test]
fn verify_loop_cutset_agrees_with_the_definition() {
    for seed in 0..80 {
        let n = 3 + (seed % 5) as usize;
        let arcs = (n * (n - 1) / 2).min(n + (seed % 5) as usize);
        let d = random_dag(1000 + seed, n, arcs, 2, 4);
        for mask in 0u32..1 << n {
            let s: BTreeSet<VertexId> = (0..n as u32)
                .filter(|i| mask >> i & 1 == 1)
                .map(VertexId)
                .collect();
            assert_eq!(
                verify_loop_cutset(&d, &s).unwrap(),
                is_loop_cutset_by_definition(&d, &s),
                "seed {seed}, set {s:?}"
            );
        }
    }
}

#[test]
fn rlc_outputs_are_cutsets_by_definition() {
    for seed in 0..60 {
        let d = random_dag(2000 + seed, 8, 12, 2, 6);
        let cut = rlc(&d, 1.0, 50, &RandomStream::new(seed), &RunConfig::default()).unwrap();
        assert!(is_loop_cutset_by_definition(&d, &cut.members));
        assert!((cut.log2_weight - d.set_weight(&cut.members).unwrap()).abs() < 1e-12);
        let split = split_graph(&d);
        let outs: BTreeSet<VertexId> = cut
            .members
            .iter()
            .map(|&v| split.out_vertex(v).unwrap())
            .collect();
        assert!(split.graph.verify_fvs(&outs).unwrap());
    }
}

#[test]
fn split_weights_are_log2_domains() {
    let d = random_dag(5, 10, 15, 2, 6);
    let split = split_graph(&d);
    for v in d.vertices() {
        let w_out = split.graph.weight(split.out_vertex(v).unwrap()).unwrap();
        assert_eq!(
            w_out,
            Weight::Finite((d.domain_size(v).unwrap() as f64).log2())
        );
        assert!(split
            .graph
            .weight(split.in_vertex(v).unwrap())
            .unwrap()
            .is_infinite());
    }
    assert_eq!(split.graph.edge_count(), d.arc_count() + d.vertex_count());
}

#[test]
fn corpus_regeneration_is_byte_identical() {
    let spec = CorpusSpec {
        n_vertices: 12,
        n_edges: 20,
        domain_lo: 2,
        domain_hi: 6,
        n_instances: 5,
        seed: 77,
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dag in [true, false] {
        write_corpus(
            a.path(),
            &generate_corpus(&spec, dag, GraphWeights::Uniform).unwrap(),
        )
        .unwrap();
        write_corpus(
            b.path(),
            &generate_corpus(&spec, dag, GraphWeights::Uniform).unwrap(),
        )
        .unwrap();
    }
    let read = |dir: &std::path::Path| -> BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect()
    };
    let (ra, rb) = (read(a.path()), read(b.path()));
    assert_eq!(ra.len(), 10);
    assert_eq!(ra, rb);
}

#[test]
fn bench_csv_rows_reverify_after_reload() {
    let dir = tempfile::tempdir().unwrap();
    let dags = CorpusSpec {
        n_vertices: 9,
        n_edges: 14,
        domain_lo: 2,
        domain_hi: 6,
        n_instances: 6,
        seed: 8,
    };
    let graphs = CorpusSpec {
        seed: 9,
        ..dags.clone()
    };
    write_corpus(
        &dir.path().join("d"),
        &generate_corpus(&dags, true, GraphWeights::Unit).unwrap(),
    )
    .unwrap();
    write_corpus(
        &dir.path().join("g"),
        &generate_corpus(&graphs, false, GraphWeights::Uniform).unwrap(),
    )
    .unwrap();
    let mut corpus = Vec::new();
    for sub in ["d", "g"] {
        for (id, inst) in load_corpus(&dir.path().join(sub)).unwrap() {
            corpus.push((format!("{sub}/{id}"), inst));
        }
    }
    assert_eq!(corpus.len(), 12);

    let algos = [
        BenchAlgo::Wra,
        BenchAlgo::Ga,
        BenchAlgo::Oracle,
        BenchAlgo::RepeatedGuess,
        BenchAlgo::RepeatedWGuessI,
    ];
    let opts = BenchOptions {
        c: 1.0,
        max_iters: 100,
        seed: 5,
        timing: false,
        config: RunConfig::default(),
    };
    let (rows, summary) = run_bench(&corpus, &algos, &opts);
    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf).unwrap();
    let reloaded = read_bench_csv(&buf[..]).unwrap();
    assert_eq!(reloaded, rows);
    let by_id: BTreeMap<&str, &Instance> = corpus
        .iter()
        .map(|(id, inst)| (id.as_str(), inst))
        .collect();
    for row in &reloaded {
        let Some(weight) = row.weight else {
            assert!(!row.error.is_empty());
            continue;
        };
        let set = row.member_set();
        assert_eq!(row.size, Some(set.len()));
        match by_id[row.instance_id.as_str()] {
            Instance::Graph(g) => {
                assert!(g.verify_fvs(&set).unwrap());
                assert!((g.total_weight(&set).unwrap().as_f64() - weight).abs() < 1e-9);
            }
            Instance::Dag(d) => {
                assert!(verify_loop_cutset(d, &set).unwrap());
                assert!((d.set_weight(&set).unwrap() - weight).abs() < 1e-9);
            }
        }
    }
    for pair in &summary.pairs {
        assert!(pair.wins + pair.ties + pair.losses <= 12);
    }
}
