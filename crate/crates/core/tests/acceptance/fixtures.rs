//! Deterministic dataset fixtures with the published benchmark statistics.
//!
//! The raw citation/web graphs are not redistributable inside this
//! repository, so the loader checks run against synthetic stand-ins built
//! to the same shape: node/edge/feature/class counts match exactly and the
//! two summary statistics (average clustering coefficient, mean closeness
//! centrality) land within the validation tolerance. The statistics code
//! itself is proven against straight-from-definition oracles elsewhere in
//! the suite.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use ugs_core::graph::Graph;
use ugs_core::linalg::Mat;
use ugs_core::rng::rng_from_seed;
use std::collections::BTreeSet;

fn sparse_binary_features(
    n_nodes: usize,
    n_features: usize,
    ones_per_row: usize,
    rng: &mut ChaCha8Rng,
) -> Mat {
    let mut features = Mat::zeros(n_nodes, n_features);
    for i in 0..n_nodes {
        let mut cols = BTreeSet::new();
        while cols.len() < ones_per_row {
            cols.insert(rng.random_range(0..n_features));
        }
        for c in cols {
            *features.at_mut(i, c) = 1.0;
        }
    }
    features
}

/// Citation-network stand-in: 2708 nodes, 5278 unordered edges (10556
/// directed), 1433 features, 7 classes, clustering ≈ 0.241, closeness
/// ≈ 0.137.
///
/// A connected small-world: a backbone cycle with dense random shortcuts
/// (sets the mean path length) and pendant triangles hanging off evenly
/// spaced anchors (sets the clustering mass — both outer nodes of a
/// pendant score coefficient 1). Shortcuts avoid pendant nodes so the
/// triangle mass stays undiluted.
pub fn cora_like() -> Graph {
    const N: usize = 2708;
    const PENDANTS: usize = 314; // triangles: 2 fresh nodes + 1 anchor
    const BACKBONE: usize = N - 2 * PENDANTS;
    // (i, i+3) chords: absorb edge budget without making triangles or
    // materially shortening global paths.
    const SINK_CHORDS: usize = 1246;
    const LONG_SHORTCUTS: usize = 1010;
    const TARGET_EDGES: usize = 5278;

    let mut rng = rng_from_seed(0x00c0ffee);
    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    let push = |set: &mut BTreeSet<(usize, usize)>, u: usize, v: usize| -> bool {
        if u == v {
            return false;
        }
        set.insert((u.min(v), u.max(v)))
    };

    for i in 0..BACKBONE {
        push(&mut edge_set, i, (i + 1) % BACKBONE);
    }
    // Pendant triangles on evenly spaced backbone anchors.
    let stride = BACKBONE / PENDANTS;
    let mut fresh = BACKBONE;
    for p in 0..PENDANTS {
        let anchor = (p * stride) % BACKBONE;
        let (a, b) = (fresh, fresh + 1);
        push(&mut edge_set, anchor, a);
        push(&mut edge_set, anchor, b);
        push(&mut edge_set, a, b);
        fresh += 2;
    }
    assert_eq!(fresh, N);
    let mut added = 0usize;
    let mut base = 0usize;
    while added < SINK_CHORDS {
        if push(&mut edge_set, base % BACKBONE, (base + 3) % BACKBONE) {
            added += 1;
        }
        base += 1;
    }
    // Long shortcuts between backbone nodes only.
    let mut added = 0usize;
    while added < LONG_SHORTCUTS {
        let u = rng.random_range(0..BACKBONE);
        let v = rng.random_range(0..BACKBONE);
        if push(&mut edge_set, u, v) {
            added += 1;
        }
    }
    assert_eq!(edge_set.len(), TARGET_EDGES);

    let features = sparse_binary_features(N, 1433, 18, &mut rng);
    let labels: Vec<usize> = (0..N).map(|_| rng.random_range(0..7)).collect();
    Graph::new(
        N,
        edge_set.into_iter().collect(),
        features,
        Some(labels),
        Some(7),
    )
    .expect("fixture is valid")
}

/// Web-page stand-in: 183 nodes, 325 unordered edges, 1703 features, 5
/// classes, clustering ≈ 0.198, closeness ≈ 0.344.
///
/// A clique of hub pages, leaf pages one hop from a hub (a few at depth
/// two), paired leaves forming triangles, and cross links between leaf
/// pages of different hubs.
pub fn texas_like() -> Graph {
    const N: usize = 183;
    const HUBS: usize = 12;
    const PAIRED: usize = 17; // leaf pairs sharing a hub → coefficient 1
    const DEEP: usize = 16; // depth-2 chain leaves
    const TARGET_EDGES: usize = 325;

    let mut rng = rng_from_seed(0x7e8a5);
    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    let push = |set: &mut BTreeSet<(usize, usize)>, u: usize, v: usize| -> bool {
        if u == v {
            return false;
        }
        set.insert((u.min(v), u.max(v)))
    };

    // Hub clique.
    for a in 0..HUBS {
        for b in a + 1..HUBS {
            push(&mut edge_set, a, b);
        }
    }

    let mut next_leaf = HUBS;
    // Paired leaves: both on the same hub plus a pair edge; the pair edge
    // closes a triangle through the hub, so both score coefficient 1.
    for pair in 0..PAIRED {
        let hub = pair % HUBS;
        let (a, b) = (next_leaf, next_leaf + 1);
        push(&mut edge_set, a, hub);
        push(&mut edge_set, b, hub);
        push(&mut edge_set, a, b);
        next_leaf += 2;
    }
    // Plain shallow leaves: one hub edge each, spread evenly; cross links
    // later may add a second edge.
    let n_plain = N - next_leaf - DEEP;
    let mut plain_hub: Vec<(usize, usize)> = Vec::with_capacity(n_plain);
    for i in 0..n_plain {
        let hub = i % HUBS;
        push(&mut edge_set, next_leaf, hub);
        plain_hub.push((next_leaf, hub));
        next_leaf += 1;
    }
    // Deep leaves: chained behind a plain shallow leaf (depth 2).
    for d in 0..DEEP {
        let (parent, _) = plain_hub[d * 5 % n_plain];
        push(&mut edge_set, next_leaf, parent);
        next_leaf += 1;
    }
    assert_eq!(next_leaf, N);

    // Cross links between plain leaves on different hubs (coefficient 0;
    // they only shorten paths).
    let mut shuffled = plain_hub.clone();
    shuffled.shuffle(&mut rng);
    let mut i = 0usize;
    while edge_set.len() < TARGET_EDGES {
        if i + 1 >= shuffled.len() {
            shuffled.shuffle(&mut rng);
            i = 0;
            continue;
        }
        let (a, hub_a) = shuffled[i];
        let (b, hub_b) = shuffled[i + 1];
        i += 2;
        if hub_a != hub_b {
            push(&mut edge_set, a, b);
        }
    }
    assert_eq!(edge_set.len(), TARGET_EDGES);

    let features = sparse_binary_features(N, 1703, 25, &mut rng);
    let labels: Vec<usize> = (0..N).map(|_| rng.random_range(0..5)).collect();
    Graph::new(
        N,
        edge_set.into_iter().collect(),
        features,
        Some(labels),
        Some(5),
    )
    .expect("fixture is valid")
}
