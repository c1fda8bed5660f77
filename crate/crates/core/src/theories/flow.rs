//! Exact max-flow on bipartite transport problems (Edmonds–Karp).

use std::collections::VecDeque;

use crate::weight::Weight;

/// Maximum mass that can be shipped from `supply` to `demand` along `allowed`
/// edges, where `allowed(i, j)` permits uncapacitated transport from left
/// item `i` to right item `j`.
pub fn transport<W: Weight>(
    supply: &[W],
    demand: &[W],
    allowed: &dyn Fn(usize, usize) -> bool,
) -> W {
    let (n, m) = (supply.len(), demand.len());
    let source = n + m;
    let sink = source + 1;
    let size = sink + 1;
    let total: W = supply.iter().cloned().fold(W::zero(), |a, b| a + b);
    let mut cap = vec![vec![W::zero(); size]; size];
    for (i, s) in supply.iter().enumerate() {
        cap[source][i] = s.clone();
        for j in 0..m {
            if allowed(i, j) {
                cap[i][n + j] = total.clone();
            }
        }
    }
    for (j, d) in demand.iter().enumerate() {
        cap[n + j][sink] = d.clone();
    }

    let mut flow = W::zero();
    loop {
        let mut parent = vec![usize::MAX; size];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if u == sink {
                break;
            }
            for v in 0..size {
                if parent[v] == usize::MAX && cap[u][v] > W::zero() {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            return flow;
        }
        let mut bottleneck: Option<W> = None;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            bottleneck = Some(match bottleneck {
                Some(b) if b <= cap[u][v] => b,
                _ => cap[u][v].clone(),
            });
            v = u;
        }
        let b = bottleneck.expect("path has an edge");
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u][v] = cap[u][v].clone() - b.clone();
            cap[v][u] = cap[v][u].clone() + b.clone();
            v = u;
        }
        flow = flow + b;
    }
}

/// True when all of `supply` can be shipped.
pub fn feasible<W: Weight>(
    supply: &[W],
    demand: &[W],
    allowed: &dyn Fn(usize, usize) -> bool,
) -> bool {
    let total: W = supply.iter().cloned().fold(W::zero(), |a, b| a + b);
    transport(supply, demand, allowed) == total
}
