//! Fill-reducing column orderings.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::geometry::Point;
use crate::scalar::Scalar;

/// Minimum-degree ordering on an explicit elimination graph. Ties are broken
/// by the lower index. Suited to small and moderate systems.
pub fn minimum_degree(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut g: Vec<Vec<usize>> = adj.to_vec();
    let mut gone = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|v| Reverse((g[v].len(), v))).collect();
    let mut order = Vec::with_capacity(n);
    let mut nb: Vec<usize> = Vec::new();
    while let Some(Reverse((d, v))) = heap.pop() {
        if gone[v] || d != g[v].len() {
            continue;
        }
        gone[v] = true;
        order.push(v);
        nb.clear();
        nb.extend(g[v].iter().copied().filter(|&u| !gone[u]));
        for &u in &nb {
            let mut merged = Vec::with_capacity(g[u].len() + nb.len());
            let (a, b) = (&g[u], &nb);
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let x = match (a.get(i), b.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        j += 1;
                        y
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if x != u && !gone[x] {
                    merged.push(x);
                }
            }
            g[u] = merged;
            heap.push(Reverse((g[u].len(), u)));
        }
        g[v] = Vec::new();
    }
    order
}

/// Nested dissection guided by node coordinates: recursive coordinate
/// bisection with vertex separators taken from the graph. Separators are
/// numbered after both halves.
pub fn geometric_dissection<T: Scalar>(adj: &[Vec<usize>], coords: &[Point<T>]) -> Vec<usize> {
    let n = adj.len();
    let mut part = vec![0u32; n];
    let mut order = Vec::with_capacity(n);
    let mut next_id = 1u32;
    let nodes: Vec<usize> = (0..n).collect();
    // explicit stack of tasks: Split(set) or Emit(set)
    enum Task {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Task::Split(nodes)];
    while let Some(t) = stack.pop() {
        match t {
            Task::Emit(v) => order.extend(v),
            Task::Split(mut set) => {
                if set.len() <= 64 {
                    let local = local_min_degree(adj, &set, &mut part, &mut next_id);
                    order.extend(local);
                    continue;
                }
                let (mut x0, mut x1, mut y0, mut y1) = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
                for &v in &set {
                    let p = coords[v];
                    x0 = x0.min(p.x);
                    x1 = x1.max(p.x);
                    y0 = y0.min(p.y);
                    y1 = y1.max(p.y);
                }
                let by_x = x1 - x0 >= y1 - y0;
                let key = |v: usize| if by_x { coords[v].x } else { coords[v].y };
                set.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).expect("finite").then(a.cmp(&b)));
                let mid = set.len() / 2;
                let (ida, idb) = (next_id, next_id + 1);
                next_id += 2;
                for (k, &v) in set.iter().enumerate() {
                    part[v] = if k < mid { ida } else { idb };
                }
                let touches = |v: usize, other: u32, part: &[u32]| adj[v].iter().any(|&u| part[u] == other);
                let sep_a: Vec<usize> = set[..mid].iter().copied().filter(|&v| touches(v, idb, &part)).collect();
                let sep_b: Vec<usize> = set[mid..].iter().copied().filter(|&v| touches(v, ida, &part)).collect();
                let sep = if sep_a.len() <= sep_b.len() { sep_a } else { sep_b };
                let sid = next_id;
                next_id += 1;
                for &v in &sep {
                    part[v] = sid;
                }
                let a: Vec<usize> = set.iter().copied().filter(|&v| part[v] == ida).collect();
                let b: Vec<usize> = set.iter().copied().filter(|&v| part[v] == idb).collect();
                if a.is_empty() || b.is_empty() {
                    // degenerate split (coincident coordinates): fall back
                    let all: Vec<usize> = a.into_iter().chain(b).chain(sep).collect();
                    let local = local_min_degree(adj, &all, &mut part, &mut next_id);
                    order.extend(local);
                    continue;
                }
                stack.push(Task::Emit(sep));
                stack.push(Task::Split(b));
                stack.push(Task::Split(a));
            }
        }
    }
    order
}

/// Minimum degree restricted to the subgraph induced by `set`.
fn local_min_degree(adj: &[Vec<usize>], set: &[usize], part: &mut [u32], next_id: &mut u32) -> Vec<usize> {
    let id = *next_id;
    *next_id += 1;
    for &v in set {
        part[v] = id;
    }
    let local: Vec<Vec<usize>> = set
        .iter()
        .map(|&v| {
            let mut l: Vec<usize> = adj[v]
                .iter()
                .filter(|&&u| part[u] == id)
                .map(|&u| set.binary_search(&u).unwrap_or_else(|_| set.iter().position(|&w| w == u).expect("member")))
                .collect();
            l.sort_unstable();
            l
        })
        .collect();
    minimum_degree(&local).into_iter().map(|k| set[k]).collect()
}
