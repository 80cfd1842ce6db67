use std::fs;

use dycos::graph::Direction;
use dycos::io::{load_dataset, load_dataset_files, parse_events, replay_events, write_events, DatasetSources};
use dycos::synth::{generate_synthetic, SyntheticSpec};
use proptest::prelude::*;

const SCENARIO: &str = include_str!("fixtures/order_dependence.jsonl");

#[test]
fn scenario_stream_builds_the_final_graph() {
    let events = parse_events(SCENARIO.as_bytes()).unwrap();
    let ds = replay_events(&events, Direction::Undirected).unwrap();
    let g = &ds.graph;
    assert_eq!(g.node_count(), 4);
    assert_eq!(g.edge_count(), 5);
    assert_eq!(g.labeled_count(), 2);
    let id = |x| ds.node(x).unwrap();
    assert_eq!(g.label_of(id(1)).map(|l| g.label_name(l)), Some("A"));
    assert_eq!(g.label_of(id(3)).map(|l| g.label_name(l)), Some("B"));
    assert!(g.has_edge(id(2), id(1)));
    assert!(g.has_edge(id(2), id(3)));
    for u in [1, 2, 3] {
        assert!(g.has_edge(id(u), id(4)));
    }
    assert_eq!(g.neighbors(id(4)).unwrap(), &[id(1), id(2), id(3)]);
    assert_eq!(g.time(), 4);
}

#[test]
fn replay_serialize_replay_is_stable() {
    let events = parse_events(SCENARIO.as_bytes()).unwrap();
    let once = replay_events(&events, Direction::Undirected).unwrap();
    let text = write_events(&once.to_events());
    let twice = replay_events(&parse_events(text.as_bytes()).unwrap(), Direction::Undirected).unwrap();
    assert_eq!(once.to_events(), twice.to_events());
    assert_eq!(once.graph.label_histogram(), twice.graph.label_histogram());
}

#[test]
fn static_files_and_event_stream_agree() {
    let synth = generate_synthetic(&SyntheticSpec { nodes_per_community: 30, ..Default::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    synth.write_to(dir.path()).unwrap();
    let from_files = load_dataset_files(
        Some(&dir.path().join("edges.tsv")),
        Some(&dir.path().join("labels.tsv")),
        Some(&dir.path().join("texts.tsv")),
        Direction::Undirected,
    )
    .unwrap();
    let stream = write_events(&from_files.to_events());
    fs::write(dir.path().join("events.jsonl"), &stream).unwrap();
    let replayed = replay_events(&parse_events(stream.as_bytes()).unwrap(), Direction::Undirected).unwrap();
    assert_eq!(from_files.to_events(), replayed.to_events());
    assert_eq!(from_files.graph.node_count(), replayed.graph.node_count());
    assert_eq!(from_files.graph.edge_count(), replayed.graph.edge_count());
    // same node insertion order; word ids may differ, so compare texts by string
    let (a, b) = (&from_files.graph, &replayed.graph);
    for v in a.node_ids() {
        let words = |g: &dycos::graph::DynamicGraph| {
            let mut t: Vec<(String, u32)> =
                g.text(v).unwrap().iter().map(|(&w, &c)| (g.word(w).to_string(), c)).collect();
            t.sort();
            t
        };
        assert_eq!(words(a), words(b));
        assert_eq!(a.label_of(v).map(|l| a.label_name(l)), b.label_of(v).map(|l| b.label_name(l)));
        let mut na = a.neighbors(v).unwrap().to_vec();
        let mut nb = b.neighbors(v).unwrap().to_vec();
        na.sort();
        nb.sort();
        assert_eq!(na, nb);
    }
}

#[derive(Debug, Clone)]
enum Step {
    Add(Option<bool>),
    Edge(u8, u8),
    Unedge(u8, u8),
    Remove(u8),
    Text(u8, u8),
    Label(u8, bool),
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        3 => proptest::option::of(any::<bool>()).prop_map(|l| Step::Add(l)),
        3 => (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Step::Edge(a, b)),
        1 => (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Step::Unedge(a, b)),
        1 => any::<u8>().prop_map(Step::Remove),
        2 => (any::<u8>(), any::<u8>()).prop_map(|(a, w)| Step::Text(a, w)),
        1 => (any::<u8>(), any::<bool>()).prop_map(|(a, l)| Step::Label(a, l)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn any_valid_stream_round_trips(steps in proptest::collection::vec(step(), 0..60)) {
        use std::collections::BTreeSet;
        let mut live: BTreeSet<u64> = BTreeSet::new();
        let mut edges: BTreeSet<(u64, u64)> = BTreeSet::new();
        let mut next = 0u64;
        let mut lines = Vec::new();
        let pick = |live: &BTreeSet<u64>, i: u8| live.iter().nth(i as usize % live.len().max(1)).copied();
        for (t, s) in steps.iter().enumerate() {
            let t = t as u64 / 3;
            match s {
                Step::Add(l) => {
                    let label = l.map(|b| if b { ",\"label\":\"yes\"" } else { ",\"label\":\"no\"" }).unwrap_or("");
                    lines.push(format!("{{\"t\":{t},\"op\":\"add_node\",\"node\":{next}{label}}}"));
                    live.insert(next);
                    next += 1;
                }
                Step::Edge(a, b) => if let (Some(a), Some(b)) = (pick(&live, *a), pick(&live, *b)) {
                    lines.push(format!("{{\"t\":{t},\"op\":\"add_edge\",\"from\":{a},\"to\":{b}}}"));
                    edges.insert((a, b));
                },
                Step::Unedge(a, b) => if let (Some(a), Some(b)) = (pick(&live, *a), pick(&live, *b)) {
                    if edges.remove(&(a, b)) {
                        lines.push(format!("{{\"t\":{t},\"op\":\"remove_edge\",\"from\":{a},\"to\":{b}}}"));
                    }
                },
                Step::Remove(a) => if let Some(a) = pick(&live, *a) {
                    lines.push(format!("{{\"t\":{t},\"op\":\"remove_node\",\"node\":{a}}}"));
                    live.remove(&a);
                    edges.retain(|&(x, y)| x != a && y != a);
                },
                Step::Text(a, w) => if let Some(a) = pick(&live, *a) {
                    lines.push(format!("{{\"t\":{t},\"op\":\"attach_text\",\"node\":{a},\"text\":\"Word{} and w{}\"}}", w % 7, w % 3));
                },
                Step::Label(a, l) => if let Some(a) = pick(&live, *a) {
                    lines.push(format!("{{\"t\":{t},\"op\":\"set_label\",\"node\":{a},\"label\":\"{}\"}}", if *l { "yes" } else { "no" }));
                },
            }
        }
        let stream = lines.join("\n");
        let first = replay_events(&parse_events(stream.as_bytes()).unwrap(), Direction::Undirected).unwrap();
        prop_assert_eq!(first.graph.edge_count(), edges.len());
        let canon = first.to_events();
        let second = replay_events(&parse_events(write_events(&canon).as_bytes()).unwrap(), Direction::Undirected).unwrap();
        prop_assert_eq!(second.to_events(), canon);
    }
}

#[test]
fn table_scale_files_ingest() {
    // a file pair of the size of the reference citation corpus: 19396 nodes, 75021 edges
    let nodes = 19_396u64;
    let mut edges = String::new();
    let mut count = 0;
    let mut x = 1u64;
    let mut seen = std::collections::HashSet::new();
    while count < 75_021 {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let (a, b) = ((x >> 33) % nodes, (x >> 13) % nodes);
        if seen.insert((a, b)) {
            edges.push_str(&format!("{a}\t{b}\n"));
            count += 1;
        }
    }
    let texts: String = (0..nodes).map(|v| format!("{v}\tpaper {v} about topic{}\n", v % 5)).collect();
    let labels: String = (0..14_814u64).map(|v| format!("{v}\tclass{}\n", v % 5)).collect();
    let ds = load_dataset(
        DatasetSources { edges: Some(edges.as_bytes()), labels: Some(labels.as_bytes()), texts: Some(texts.as_bytes()) },
        Direction::Undirected,
    )
    .unwrap();
    assert_eq!(ds.graph.node_count(), 19_396);
    assert_eq!(ds.graph.edge_count(), 75_021);
    assert_eq!(ds.graph.labeled_count(), 14_814);
    assert_eq!(ds.graph.label_count(), 5);
}
