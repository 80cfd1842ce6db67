#![allow(dead_code)]

pub mod oracles;

use dycos::graph::{DynamicGraph, Label, NodeId, TextPayload};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Four-node ordering scenario. At step 3: v1:A, v2 unlabeled, v3:B with
/// edges v2->v1, v2->v3. At step 4 (when `with_v4`): v4 unlabeled and edges
/// v1->v4, v2->v4, v3->v4.
pub struct Scenario {
    pub graph: DynamicGraph,
    pub v: [NodeId; 4],
    pub a: Label,
    pub b: Label,
}

pub fn scenario(with_v4: bool) -> Scenario {
    let mut g = DynamicGraph::new();
    let a = g.intern_label("A");
    let b = g.intern_label("B");
    let v1 = g.add_node(Some(a));
    let v2 = g.add_node(None);
    g.add_edge(v2, v1).unwrap();
    let v3 = g.add_node(Some(b));
    g.add_edge(v2, v3).unwrap();
    let v4 = if with_v4 {
        let v4 = g.add_node(None);
        for u in [v1, v2, v3] {
            g.add_edge(u, v4).unwrap();
        }
        v4
    } else {
        NodeId(u32::MAX)
    };
    Scenario { graph: g, v: [v1, v2, v3, v4], a, b }
}

pub fn attach(g: &mut DynamicGraph, v: NodeId, raw: &str) {
    if let Some(p) = TextPayload::from_raw(v, raw) {
        g.attach_text(&p).unwrap();
    }
}

/// Pearson statistic of observed counts against expected probabilities.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
    let n: u64 = observed.iter().sum();
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

/// Critical value of the chi-square distribution with `df` degrees of freedom at level `alpha`.
pub fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}
