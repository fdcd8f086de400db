//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver it checks.
#![allow(dead_code)]

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random positive integer parts of `total`, `parts` of them.
pub fn random_composition<R: Rng>(rng: &mut R, total: i64, parts: usize) -> Vec<i64> {
    assert!(total >= parts as i64);
    let mut cuts: Vec<i64> = (1..total).collect();
    cuts.shuffle(rng);
    let mut chosen: Vec<i64> = cuts[..parts - 1].to_vec();
    chosen.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in chosen {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}

/// Rational marginals summing to one with denominators at most 20.
pub fn random_rational_marginals<R: Rng>(rng: &mut R, m: usize, n: usize) -> (Vec<Rational64>, Vec<Rational64>) {
    let lo = m.max(n) as i64;
    let ds = rng.gen_range(lo..=20);
    let dd = rng.gen_range(lo..=20);
    let s = random_composition(rng, ds, m)
        .into_iter()
        .map(|k| Rational64::new(k, ds))
        .collect();
    let d = random_composition(rng, dd, n)
        .into_iter()
        .map(|k| Rational64::new(k, dd))
        .collect();
    (s, d)
}

pub fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Minimum objective over every basic feasible solution of the
/// transportation polytope, flows computed in exact rational arithmetic.
pub fn brute_force_optimum(supply: &[Rational64], demand: &[Rational64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let cells = m * n;
    assert!(cells <= 20, "enumeration is exponential");
    let basis_size = m + n - 1;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() as usize != basis_size {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells)
            .filter(|&k| mask & (1 << k) != 0)
            .map(|k| (k / n, k % n))
            .collect();
        if let Some(flows) = basic_solution(supply, demand, &chosen) {
            let obj: f64 = chosen
                .iter()
                .zip(&flows)
                .map(|(&(i, j), &f)| to_f64(f) * cost[i][j])
                .sum();
            best = best.min(obj);
        }
    }
    best
}

/// Solves the basis given by `cells` if it is a spanning tree whose unique
/// flows are nonnegative.
fn basic_solution(supply: &[Rational64], demand: &[Rational64], cells: &[(usize, usize)]) -> Option<Vec<Rational64>> {
    let m = supply.len();
    let nodes = m + demand.len();
    // union-find to reject cycles
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(i, j) in cells {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        if a == b {
            return None;
        }
        parent[a] = b;
    }
    // leaf elimination
    let mut remaining: Vec<Rational64> = supply.iter().chain(demand).copied().collect();
    let mut flow = vec![Rational64::from_integer(0); cells.len()];
    let mut solved = vec![false; cells.len()];
    for _ in 0..cells.len() {
        let mut progress = false;
        for node in 0..nodes {
            let incident: Vec<usize> = (0..cells.len())
                .filter(|&c| !solved[c] && (cells[c].0 == node || m + cells[c].1 == node))
                .collect();
            if incident.len() == 1 {
                let c = incident[0];
                let f = remaining[node];
                let other = if cells[c].0 == node { m + cells[c].1 } else { cells[c].0 };
                flow[c] = f;
                remaining[node] -= f;
                remaining[other] -= f;
                solved[c] = true;
                progress = true;
                break;
            }
        }
        if !progress {
            return None;
        }
    }
    if flow.iter().any(|f| *f < Rational64::from_integer(0)) {
        return None;
    }
    Some(flow)
}

/// A random vertex of the transportation polytope: visit cells in random
/// order and ship as much as both endpoints allow.
pub fn random_feasible_plan<R: Rng>(rng: &mut R, supply: &[f64], demand: &[f64]) -> Vec<Vec<f64>> {
    let (m, n) = (supply.len(), demand.len());
    let mut order: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    order.shuffle(rng);
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut plan = vec![vec![0.0; n]; m];
    for (i, j) in order {
        let f = s[i].min(d[j]).max(0.0);
        plan[i][j] = f;
        s[i] -= f;
        d[j] -= f;
    }
    plan
}

/// Northwest-corner feasible plan.
pub fn northwest_corner(supply: &[f64], demand: &[f64]) -> Vec<Vec<f64>> {
    let (m, n) = (supply.len(), demand.len());
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut plan = vec![vec![0.0; n]; m];
    let (mut i, mut j) = (0, 0);
    while i < m && j < n {
        let f = s[i].min(d[j]);
        plan[i][j] = f;
        s[i] -= f;
        d[j] -= f;
        if i + 1 == m && j + 1 == n {
            break;
        }
        if (s[i] <= d[j] && i + 1 < m) || j + 1 == n {
            i += 1;
        } else {
            j += 1;
        }
    }
    plan
}

pub fn plan_cost(plan: &[Vec<f64>], cost: &[Vec<f64>]) -> f64 {
    plan.iter()
        .zip(cost)
        .flat_map(|(p, c)| p.iter().zip(c).map(|(a, b)| a * b))
        .sum()
}

/// Min-cost flow by successive shortest paths (Bellman-Ford on the
/// residual graph). Independent of the network simplex under test.
pub fn successive_shortest_paths(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let source = m + n;
    let sink = m + n + 1;
    let nodes = m + n + 2;
    struct Edge {
        to: usize,
        cap: f64,
        cost: f64,
    }
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let add = |edges: &mut Vec<Edge>, adj: &mut Vec<Vec<usize>>, a: usize, b: usize, cap: f64, c: f64| {
        adj[a].push(edges.len());
        edges.push(Edge { to: b, cap, cost: c });
        adj[b].push(edges.len());
        edges.push(Edge { to: a, cap: 0.0, cost: -c });
    };
    for i in 0..m {
        add(&mut edges, &mut adj, source, i, supply[i], 0.0);
    }
    for j in 0..n {
        add(&mut edges, &mut adj, m + j, sink, demand[j], 0.0);
    }
    for i in 0..m {
        for j in 0..n {
            add(&mut edges, &mut adj, i, m + j, f64::INFINITY, cost[i][j]);
        }
    }
    let eps = 1e-15;
    let mut total = 0.0;
    loop {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via = vec![usize::MAX; nodes];
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u] == f64::INFINITY {
                    continue;
                }
                for &e in &adj[u] {
                    let edge = &edges[e];
                    if edge.cap > eps && dist[u] + edge.cost < dist[edge.to] - 1e-14 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = e;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink] == f64::INFINITY {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while v != source {
            let e = via[v];
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = sink;
        while v != source {
            let e = via[v];
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            total += push * edges[e].cost;
            v = edges[e ^ 1].to;
        }
    }
    total
}

/// Weighted mean Euclidean distance, summed independently of the library.
pub fn weighted_mean_distance(point: &[f64], targets: &[(Vec<f64>, f64)]) -> f64 {
    let mut acc = 0.0;
    for (t, w) in targets {
        let mut sq = 0.0;
        for k in 0..point.len() {
            let d = point[k] - t[k];
            sq += d * d;
        }
        acc += w * sq.sqrt();
    }
    acc
}
