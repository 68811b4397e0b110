//! Straight-from-definition metric references. Deliberately naive: dense
//! double loops and exhaustive permutation matching, sharing no code with
//! the production implementations they check.

use ugs_core::graph::Graph;

fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n_nodes();
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in g.edges() {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    a
}

/// `Q = (1/2m)·Σ_ij (A_ij − d_i d_j / 2m)·δ(c_i, c_j)` evaluated literally.
pub fn modularity(g: &Graph, assignment: &[usize], _k: usize) -> f64 {
    let n = g.n_nodes();
    let a = dense_adjacency(g);
    let d: Vec<f64> = (0..n).map(|i| a[i].iter().sum()).collect();
    let two_m: f64 = d.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                q += a[i][j] - d[i] * d[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Mean over clusters of `cut(S)/vol(S)`, zero-volume clusters scoring 1.
pub fn conductance(g: &Graph, assignment: &[usize], k: usize) -> f64 {
    let n = g.n_nodes();
    let a = dense_adjacency(g);
    let mut total = 0.0;
    for cluster in 0..k {
        let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == cluster).collect();
        let mut cut = 0.0;
        let mut vol = 0.0;
        for &i in &members {
            for j in 0..n {
                vol += a[i][j];
                if assignment[j] != cluster {
                    cut += a[i][j];
                }
            }
        }
        total += if vol > 0.0 { cut / vol } else { 1.0 };
    }
    total / k as f64
}

/// NMI with arithmetic-mean normalization from an explicit contingency
/// table, natural log.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ka = a.iter().max().map(|&m| m + 1).unwrap_or(0);
    let kb = b.iter().max().map(|&m| m + 1).unwrap_or(0);
    let mut joint = vec![vec![0.0f64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        joint[x][y] += 1.0;
    }
    let row: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..kb).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let ent = |counts: &[f64]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| {
                let p = c / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_a = ent(&row);
    let h_b = ent(&col);
    if h_a == 0.0 && h_b == 0.0 {
        return 1.0;
    }
    if h_a == 0.0 || h_b == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x][y];
            if c > 0.0 {
                let p = c / n;
                mi += p * (p * n * n / (row[x] * col[y])).ln();
            }
        }
    }
    2.0 * mi / (h_a + h_b)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Macro-F1 values of every maximum-overlap cluster→class assignment
/// (exhaustive over permutations of the padded square contingency table).
/// The production Hungarian matching must land on one of these.
pub fn macro_f1_candidates(pred: &[usize], truth: &[usize], n_classes: usize) -> Vec<f64> {
    let k = pred.iter().max().map(|&m| m + 1).unwrap_or(1);
    let side = k.max(n_classes);
    let mut contingency = vec![vec![0.0f64; side]; side];
    for (&c, &l) in pred.iter().zip(truth) {
        contingency[c][l] += 1.0;
    }
    let perms = permutations(side);
    let overlap = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(row, &col)| contingency[row][col])
            .sum()
    };
    let best = perms
        .iter()
        .map(|p| overlap(p))
        .fold(f64::NEG_INFINITY, f64::max);

    let mut out = Vec::new();
    for perm in perms.iter().filter(|p| (overlap(p) - best).abs() < 1e-9) {
        // macro-F1 under this cluster→class mapping
        let mut total = 0.0;
        for class in 0..n_classes {
            let mut tp = 0.0;
            let mut predicted = 0.0;
            let mut support = 0.0;
            for (&c, &l) in pred.iter().zip(truth) {
                if l == class {
                    support += 1.0;
                }
                if perm[c] == class {
                    predicted += 1.0;
                    if l == class {
                        tp += 1.0;
                    }
                }
            }
            if predicted + support > 0.0 {
                total += 2.0 * tp / (predicted + support);
            }
        }
        out.push(total / n_classes as f64);
    }
    out
}
