//! Independent reference implementations shared by the module tests and the
//! acceptance runner. Each check returns a short summary or the first
//! violation it found.

use std::collections::BTreeMap;

use dycos::graph::{DynamicGraph, NodeId, TextPayload};
use dycos::vocabulary::{build_vocabulary, compute_gini, word_stats, Vocabulary, VocabularyConfig, WordStats};
use dycos::walk::{content_two_hop, structural_hop, top_q, two_hop_path_counts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{attach, chi_square, chi_square_critical, scenario};

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Σ p_i² straight from the relative frequencies.
pub fn gini_by_frequencies(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| (c as f64 / total as f64).powi(2)).sum()
}

/// Range, extremes, scale invariance and agreement with the frequency form
/// on `cases` random count vectors.
pub fn gini_properties(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let labels = rng.gen_range(1..12);
        // a third of the cases are uniform or single-label to hit the extremes
        let counts: Vec<u64> = match case % 6 {
            0 => vec![rng.gen_range(1..1000); labels],
            1 => {
                let mut c = vec![0; labels];
                c[rng.gen_range(0..labels)] = rng.gen_range(1..1000);
                c
            }
            _ => {
                let mut c: Vec<u64> = (0..labels).map(|_| rng.gen_range(0..1000)).collect();
                if c.iter().all(|&x| x == 0) {
                    c[0] = 1;
                }
                c
            }
        };
        let g = compute_gini(&WordStats::new("w", counts.clone())).map_err(|e| e.to_string())?;
        ensure!(g >= 1.0 / labels as f64 - 1e-15 && g <= 1.0, "gini {g} out of range for {counts:?}");
        ensure!((g - gini_by_frequencies(&counts)).abs() < 1e-12, "gini {g} disagrees with frequencies for {counts:?}");
        let nonzero = counts.iter().filter(|&&x| x > 0).count();
        ensure!((g == 1.0) == (nonzero == 1), "maximum not characterised for {counts:?}");
        let uniform = counts.iter().all(|&x| x == counts[0]);
        ensure!(((g - 1.0 / labels as f64).abs() < 1e-15) == uniform, "minimum not characterised for {counts:?}");
        let k = rng.gen_range(1..10_000);
        let scaled: Vec<u64> = counts.iter().map(|&x| x * k).collect();
        let gs = compute_gini(&WordStats::new("w", scaled)).map_err(|e| e.to_string())?;
        ensure!((g - gs).abs() <= 1e-12, "scaling by {k} moved gini {g} -> {gs}");
    }
    Ok(format!("{cases} count vectors"))
}

/// Random labeled corpus; returns the graph and the per-node token lists.
pub fn corpus(seed: u64, nodes: usize, labels: usize, words: usize) -> (DynamicGraph, Vec<Vec<String>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DynamicGraph::new();
    let ids: Vec<_> = (0..labels).map(|i| g.intern_label(&format!("L{i}"))).collect();
    let mut texts = Vec::new();
    for _ in 0..nodes {
        let label = rng.gen_bool(0.7).then(|| ids[rng.gen_range(0..labels)]);
        let v = g.add_node(label);
        let len = rng.gen_range(0..12);
        let tokens: Vec<String> = (0..len)
            .map(|_| {
                // skew: low word ids are common and lean towards low labels
                let bias = label.map_or(0, |l| l.index());
                format!("w{}", (rng.gen_range(0..words) + bias * rng.gen_range(0..3)) % words)
            })
            .collect();
        if !tokens.is_empty() {
            g.attach_text(&TextPayload { node: v, tokens: tokens.clone() }).unwrap();
        }
        texts.push(tokens);
    }
    (g, texts)
}

/// Words ranked by (gini desc, total desc, word asc), with ginis compared as
/// exact rationals. Counts come straight from the token lists.
pub fn exhaustive_ranking(g: &DynamicGraph, texts: &[Vec<String>]) -> Vec<(f64, String)> {
    let mut table: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (i, tokens) in texts.iter().enumerate() {
        let Some(l) = g.label_of(NodeId(i as u32)) else { continue };
        for t in tokens {
            table.entry(t.clone()).or_insert_with(|| vec![0; g.label_count()])[l.index()] += 1;
        }
    }
    let num = |c: &[u64]| c.iter().map(|&x| (x * x) as u128).sum::<u128>();
    let den = |c: &[u64]| c.iter().sum::<u64>() as u128;
    let mut words: Vec<&String> = table.keys().collect();
    words.sort_by(|a, b| {
        let (ca, cb) = (&table[*a], &table[*b]);
        let lhs = num(cb) * den(ca) * den(ca);
        let rhs = num(ca) * den(cb) * den(cb);
        lhs.cmp(&rhs).then(den(cb).cmp(&den(ca))).then(a.cmp(b))
    });
    words.into_iter().map(|w| (gini_by_frequencies(&table[w]), w.clone())).collect()
}

/// Top-m selection against the exhaustive ranking on `corpora` random corpora
/// of at most 1000 distinct words.
pub fn top_m_selection(corpora: u64) -> Check {
    let mut largest = 0;
    for seed in 0..corpora {
        let (g, texts) = corpus(seed, 300, 2 + (seed as usize % 4), 40 + (seed as usize * 23) % 960);
        let oracle = exhaustive_ranking(&g, &texts);
        ensure!(oracle.len() <= 1000, "corpus {seed} has {} words", oracle.len());
        largest = largest.max(oracle.len());
        let rows = word_stats(&g, &g.labeled_nodes().collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        ensure!(rows.len() == oracle.len(), "corpus {seed}: {} stat rows for {} words", rows.len(), oracle.len());
        for m in [1, 5, 17, 60, 5000] {
            let vocab = build_vocabulary(&g, &VocabularyConfig { size: m, sample_size: None, seed })
                .map_err(|e| e.to_string())?;
            let got: Vec<&str> = vocab.entries().iter().map(|e| e.word.as_str()).collect();
            let want: Vec<&str> = oracle.iter().take(m).map(|o| o.1.as_str()).collect();
            ensure!(got == want, "corpus {seed}, m {m}: selection differs from exhaustive sort");
            let worst = vocab.entries().iter().map(|e| e.gini).fold(f64::INFINITY, f64::min);
            for (gini, w) in oracle.iter().skip(m) {
                ensure!(*gini <= worst + 1e-15, "corpus {seed}, m {m}: rejected {w} has gini {gini} > {worst}");
            }
        }
    }
    Ok(format!("{corpora} corpora, up to {largest} words"))
}

/// Random text-attributed graph with up to `max_nodes` nodes and a vocabulary of at most 50 words.
pub fn random_graph(seed: u64, max_nodes: usize) -> (DynamicGraph, Vocabulary) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_nodes);
    let words = rng.gen_range(1..=80);
    let mut g = DynamicGraph::new();
    let labels: Vec<_> = (0..3).map(|i| g.intern_label(&format!("L{i}"))).collect();
    for _ in 0..n {
        let l = rng.gen_bool(0.5).then(|| labels[rng.gen_range(0..3)]);
        g.add_node(l);
    }
    if g.labeled_count() == 0 {
        g.set_label(NodeId(0), labels[0]).unwrap();
    }
    for _ in 0..rng.gen_range(0..3 * n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        g.add_edge(NodeId(a as u32), NodeId(b as u32)).unwrap();
    }
    for v in 0..n {
        let len = rng.gen_range(0..8);
        let raw: Vec<String> = (0..len).map(|_| format!("w{}", rng.gen_range(0..words))).collect();
        attach(&mut g, NodeId(v as u32), &raw.join(" "));
    }
    let cfg = VocabularyConfig { size: rng.gen_range(1..=50), sample_size: None, seed };
    let vocab = build_vocabulary(&g, &cfg).unwrap_or_default();
    (g, vocab)
}

/// Enumerates every path v -> word -> v' using the raw texts, not the index.
pub fn brute_force_paths(g: &DynamicGraph, vocab: &Vocabulary, v: NodeId) -> BTreeMap<NodeId, u32> {
    let mut counts = BTreeMap::new();
    for e in vocab.entries() {
        if g.word_count(v, &e.word) == 0 {
            continue;
        }
        for u in g.node_ids() {
            if g.word_count(u, &e.word) > 0 {
                *counts.entry(u).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Path counts of every node of `graphs` random graphs against enumeration.
pub fn path_count_enumeration(graphs: u64) -> Check {
    let mut nodes = 0;
    for seed in 0..graphs {
        let (g, vocab) = random_graph(seed, 200);
        ensure!(g.node_count() <= 200 && vocab.len() <= 50, "graph {seed} exceeds the size limits");
        for v in g.node_ids() {
            let got = two_hop_path_counts(&g, &vocab, v).map_err(|e| e.to_string())?;
            ensure!(got == brute_force_paths(&g, &vocab, v), "graph {seed}, node {v}: counts differ");
            for (&u, &c) in &got {
                let back = two_hop_path_counts(&g, &vocab, u).map_err(|e| e.to_string())?;
                ensure!(back.get(&v) == Some(&c), "graph {seed}: p({v},{u}) is not symmetric");
            }
            nodes += 1;
        }
    }
    Ok(format!("{graphs} graphs, {nodes} nodes"))
}

/// Oracle ranking of two-hop targets: count desc, id asc, cut at q.
pub fn ranked_targets(g: &DynamicGraph, vocab: &Vocabulary, v: NodeId, q: usize) -> Vec<(NodeId, u32)> {
    let mut ranked: Vec<_> = brute_force_paths(g, vocab, v).into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(q);
    ranked
}

pub fn top_q_membership(graphs: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for seed in 0..graphs {
        let (g, vocab) = random_graph(500 + seed, 120);
        for v in g.node_ids() {
            for q in [1, 3, 10] {
                let ranked = ranked_targets(&g, &vocab, v, q);
                let counts = brute_force_paths(&g, &vocab, v);
                ensure!(top_q(counts.clone(), q).entries() == &ranked[..], "graph {seed}, node {v}, q {q}: top-q differs");
                match content_two_hop(&g, &vocab, v, q, &mut rng) {
                    Ok(u) => ensure!(ranked.iter().any(|&(x, _)| x == u), "hop left the top-{q} of {v}"),
                    Err(_) => ensure!(counts.is_empty(), "hop failed with candidates present"),
                }
            }
        }
    }
    Ok(format!("{graphs} graphs"))
}

/// Five structural fixtures: (graph, node to hop from).
pub fn structural_fixtures() -> Vec<(DynamicGraph, NodeId)> {
    let mut out = Vec::new();

    let s = scenario(true);
    out.push((s.graph, s.v[3]));

    let mut star = DynamicGraph::new();
    let c = star.add_node(None);
    for _ in 0..12 {
        let leaf = star.add_node(None);
        star.add_edge(c, leaf).unwrap();
    }
    out.push((star, c));

    let mut loopy = DynamicGraph::new();
    let a = loopy.add_node(None);
    let b = loopy.add_node(None);
    let d = loopy.add_node(None);
    loopy.add_edge(a, a).unwrap();
    loopy.add_edge(a, b).unwrap();
    loopy.add_edge(d, a).unwrap();
    loopy.add_edge(b, a).unwrap();
    out.push((loopy, a));

    let mut clique = DynamicGraph::new();
    let nodes: Vec<_> = (0..7).map(|_| clique.add_node(None)).collect();
    for &x in &nodes {
        for &y in &nodes {
            if x < y {
                clique.add_edge(x, y).unwrap();
            }
        }
    }
    out.push((clique, nodes[3]));

    let (random, _) = random_graph(77, 60);
    let hub = random.node_ids().max_by_key(|&v| random.neighbors(v).unwrap().len()).unwrap();
    out.push((random, hub));
    out
}

/// Five content fixtures with at least two candidates each: (graph, vocabulary, start, q).
pub fn content_fixtures() -> Vec<(DynamicGraph, Vocabulary, NodeId, usize)> {
    let mut out = Vec::new();
    let texts: [&[&str]; 3] = [
        &["w1 w2", "w1 w2", "w2 zz"],
        &["aa bb cc", "aa bb cc", "aa", "bb cc", "cc dd", "dd"],
        &["xx", "xx yy", "yy", "xx yy zz", "zz qq", "qq xx"],
    ];
    for (i, t) in texts.iter().enumerate() {
        let mut g = DynamicGraph::new();
        let labels = [g.intern_label("0"), g.intern_label("1")];
        for (j, raw) in t.iter().enumerate() {
            let v = g.add_node(Some(labels[j % 2]));
            attach(&mut g, v, raw);
        }
        let vocab = build_vocabulary(&g, &VocabularyConfig { size: 10, sample_size: None, seed: i as u64 }).unwrap();
        out.push((g, vocab, NodeId(0), 10));
    }
    let (g, vocab) = random_graph(31, 150);
    let v = g.node_ids().max_by_key(|&v| two_hop_path_counts(&g, &vocab, v).unwrap().len()).unwrap();
    out.push((g.clone(), vocab.clone(), v, 10));
    out.push((g, vocab, v, 4));
    out
}

/// Chi-square test of `n` structural hops per fixture against the uniform law.
pub fn structural_uniformity(n: u64, alpha: f64) -> Check {
    let mut worst: f64 = 0.0;
    for (i, (g, v)) in structural_fixtures().into_iter().enumerate() {
        let nbrs = g.neighbors(v).unwrap().to_vec();
        ensure!(nbrs.len() >= 2, "fixture {i} has fewer than two neighbors");
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let mut hits = vec![0u64; nbrs.len()];
        for _ in 0..n {
            let u = structural_hop(&g, v, &mut rng).map_err(|e| e.to_string())?;
            hits[nbrs.iter().position(|&x| x == u).ok_or("hop to a non-neighbor")?] += 1;
        }
        let stat = chi_square(&hits, &vec![1.0 / nbrs.len() as f64; nbrs.len()]);
        let crit = chi_square_critical(nbrs.len() - 1, alpha);
        ensure!(stat < crit, "structural fixture {i}: chi2 {stat:.2} >= {crit:.2}");
        worst = worst.max(stat / crit);
    }
    Ok(format!("5 fixtures, max chi2/critical {worst:.3}"))
}

/// Chi-square and per-cell 3-sigma test of `n` content hops per fixture
/// against the path-count law.
pub fn content_law(n: u64, alpha: f64) -> Check {
    let mut worst: f64 = 0.0;
    for (i, (g, vocab, v, q)) in content_fixtures().into_iter().enumerate() {
        let ranked = ranked_targets(&g, &vocab, v, q);
        ensure!(ranked.len() >= 2, "content fixture {i} has fewer than two targets");
        let total: u32 = ranked.iter().map(|r| r.1).sum();
        let expected: Vec<f64> = ranked.iter().map(|r| r.1 as f64 / total as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + i as u64);
        let mut hits = vec![0u64; ranked.len()];
        for _ in 0..n {
            let u = content_two_hop(&g, &vocab, v, q, &mut rng).map_err(|e| e.to_string())?;
            hits[ranked.iter().position(|r| r.0 == u).ok_or("hop outside the top-q")?] += 1;
        }
        let stat = chi_square(&hits, &expected);
        let crit = chi_square_critical(ranked.len() - 1, alpha);
        ensure!(stat < crit, "content fixture {i}: chi2 {stat:.2} >= {crit:.2}");
        for (h, p) in hits.iter().zip(&expected) {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            ensure!((*h as f64 / n as f64 - p).abs() <= 3.0 * sigma + 1e-12, "content fixture {i}: cell off by > 3 sigma");
        }
        worst = worst.max(stat / crit);
    }
    Ok(format!("5 fixtures, max chi2/critical {worst:.3}"))
}
