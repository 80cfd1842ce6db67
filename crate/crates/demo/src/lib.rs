//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each operation has a plain Rust function that does the work and a thin
//! `wasm_bindgen` wrapper.

use dycos::evaluation::{misclassification_bound, BoundParams};
use dycos::{
    build_vocabulary, classify_all, classify_node, generate_synthetic, ClassifyOptions, DynamicGraph, Label, NodeId,
    SyntheticSpec, Vocabulary, VocabularyConfig, WalkConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Bound for l = 1..=l_max at fixed label count and b.
pub fn bound_curve(labels: usize, b: f64, l_max: u32) -> Vec<f64> {
    (1..=l_max as u64)
        .map(|l| misclassification_bound(&BoundParams { b, l, label_count: labels }))
        .collect()
}

struct Ordering {
    graph: DynamicGraph,
    v: [NodeId; 4],
    a: Label,
    b: Label,
}

fn ordering_graph(with_v4: bool) -> Ordering {
    let mut g = DynamicGraph::new();
    let a = g.intern_label("A");
    let b = g.intern_label("B");
    let v1 = g.add_node(Some(a));
    let v2 = g.add_node(None);
    g.add_edge(v2, v1).unwrap();
    let v3 = g.add_node(Some(b));
    g.add_edge(v2, v3).unwrap();
    let mut v4 = NodeId(u32::MAX);
    if with_v4 {
        v4 = g.add_node(None);
        for u in [v1, v2, v3] {
            g.add_edge(u, v4).unwrap();
        }
    }
    Ordering { graph: g, v: [v1, v2, v3, v4], a, b }
}

/// Estimated probabilities, over `trials` single one-hop walks, that
/// (a) v2 becomes B at step 3, (b) v4 becomes A when v2 already holds A,
/// (c) v4 becomes A when v2 and v4 are labeled together.
pub fn ordering_probabilities(trials: u32, seed: u64) -> [f64; 3] {
    let one_hop = WalkConfig { walks: 1, walk_length: 1, structural_prob: 1.0, top_q: 1 };
    let vocab = Vocabulary::empty();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = trials.max(1);

    let s = ordering_graph(false);
    let a = (0..n)
        .filter(|_| classify_node(&s.graph, &vocab, s.v[1], &one_hop, &mut rng).unwrap().label == s.b)
        .count();

    let mut s = ordering_graph(true);
    s.graph.set_label(s.v[1], s.a).unwrap();
    let b = (0..n)
        .filter(|_| classify_node(&s.graph, &vocab, s.v[3], &one_hop, &mut rng).unwrap().label == s.a)
        .count();

    let s = ordering_graph(true);
    let c = (0..n)
        .filter(|&i| {
            let mut g = s.graph.clone();
            let opts = ClassifyOptions { seed: seed ^ (i as u64) << 20, ..Default::default() };
            classify_all(&mut g, &one_hop, &opts).unwrap();
            g.label_of(s.v[3]) == Some(s.a)
        })
        .count();
    [a, b, c].map(|hits| hits as f64 / n as f64)
}

#[derive(Debug, Serialize)]
pub struct PlantedNode {
    pub community: usize,
    /// Whether the label was visible to the classifier.
    pub given: bool,
    pub predicted: usize,
}

#[derive(Debug, Serialize)]
pub struct PlantedRun {
    pub accuracy: f64,
    pub classified: usize,
    pub vocabulary: Vec<String>,
    pub nodes: Vec<PlantedNode>,
    pub edges: Vec<(u32, u32)>,
}

/// Generates a planted-community graph, classifies it and scores the result.
pub fn planted_run(spec: &SyntheticSpec, walk: &WalkConfig, vocab_size: usize) -> Result<PlantedRun, String> {
    let synth = generate_synthetic(spec).map_err(|e| e.to_string())?;
    let mut ds = synth.to_dataset(Default::default()).map_err(|e| e.to_string())?;
    let given: Vec<bool> = (0..spec.node_count() as u64)
        .map(|id| ds.node(id).and_then(|v| ds.graph.label_of(v)).is_some())
        .collect();
    let vocab = match build_vocabulary(&ds.graph, &VocabularyConfig { size: vocab_size, sample_size: None, seed: spec.seed }) {
        Ok(v) => v,
        Err(dycos::Error::EmptyCorpus) => Vocabulary::empty(),
        Err(e) => return Err(e.to_string()),
    };
    let words = vocab.entries().iter().map(|e| e.word.clone()).collect();
    ds.graph.install_vocabulary(vocab);
    let opts = ClassifyOptions { seed: spec.seed, ..Default::default() };
    let out = classify_all(&mut ds.graph, walk, &opts).map_err(|e| e.to_string())?;

    let community = |name: &str| name.trim_start_matches('c').parse::<usize>().unwrap_or(0);
    let mut nodes = Vec::with_capacity(given.len());
    let mut correct = 0;
    for (id, &given) in given.iter().enumerate() {
        let truth = community(synth.true_label(id as u64).unwrap_or("c0"));
        let predicted = ds
            .node(id as u64)
            .and_then(|v| ds.graph.label_of(v))
            .map_or(truth, |l| community(ds.graph.label_name(l)));
        if !given {
            correct += usize::from(predicted == truth);
        }
        nodes.push(PlantedNode { community: truth, given, predicted });
    }
    let classified = out.assignments.len();
    Ok(PlantedRun {
        accuracy: if classified == 0 { 1.0 } else { correct as f64 / classified as f64 },
        classified,
        vocabulary: words,
        nodes,
        edges: synth.edges.iter().map(|&(a, b)| (a as u32, b as u32)).collect(),
    })
}

#[wasm_bindgen(js_name = boundCurve)]
pub fn bound_curve_js(labels: usize, b: f64, l_max: u32) -> Vec<f64> {
    bound_curve(labels, b, l_max)
}

#[wasm_bindgen(js_name = orderingProbabilities)]
pub fn ordering_probabilities_js(trials: u32, seed: u32) -> Vec<f64> {
    ordering_probabilities(trials, seed as u64).to_vec()
}

/// JSON-encoded [`PlantedRun`].
#[wasm_bindgen(js_name = plantedRun)]
#[allow(clippy::too_many_arguments)]
pub fn planted_run_js(
    communities: usize,
    nodes_per_community: usize,
    labeled_fraction: f64,
    intra_prob: f64,
    inter_prob: f64,
    topic_prob: f64,
    structural_prob: f64,
    walks: usize,
    walk_length: usize,
    seed: u32,
) -> Result<String, JsError> {
    let spec = SyntheticSpec {
        communities,
        nodes_per_community,
        labeled_fraction,
        intra_prob,
        inter_prob,
        shared_words: if topic_prob < 1.0 { 10 } else { 0 },
        topic_prob,
        seed: seed as u64,
        ..Default::default()
    };
    let walk = WalkConfig { walks, walk_length, structural_prob, top_q: 10 };
    let run = planted_run(&spec, &walk, 10).map_err(|e| JsError::new(&e))?;
    Ok(serde_json::to_string(&run).expect("run serializes"))
}
