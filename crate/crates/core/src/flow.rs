//! Min-cost flow by successive shortest paths with Johnson potentials.
//!
//! Costs are integers so that every shortest-path comparison is exact.
//! Negative arc costs are allowed as long as the initial residual graph has no
//! negative cycle; potentials are seeded with Bellman-Ford.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: i64,
}

#[derive(Debug, Clone, Default)]
pub struct MinCostFlow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowResult {
    pub flow: i64,
    pub cost: i64,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        Self { edges: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    /// Adds an arc and returns its id; the reverse residual arc is `id ^ 1`.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently routed on arc `id`.
    pub fn flow(&self, id: usize) -> i64 {
        self.edges[id ^ 1].cap
    }

    fn bellman_ford(&self, source: usize) -> Vec<i64> {
        let n = self.adj.len();
        let mut dist = vec![INF; n];
        dist[source] = 0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u] == INF {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] {
                        dist[edge.to] = dist[u] + edge.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }

    /// Sends up to `limit` units from `source` to `sink` at minimum cost.
    pub fn run(&mut self, source: usize, sink: usize, limit: i64) -> FlowResult {
        let n = self.adj.len();
        let mut potential: Vec<i64> = self.bellman_ford(source).into_iter().map(|d| if d == INF { 0 } else { d }).collect();
        let mut result = FlowResult { flow: 0, cost: 0 };
        let mut dist = vec![INF; n];
        let mut parent = vec![usize::MAX; n];
        while result.flow < limit {
            dist.fill(INF);
            parent.fill(usize::MAX);
            dist[source] = 0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((0i64, source)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap <= 0 {
                        continue;
                    }
                    let nd = d + edge.cost + potential[u] - potential[edge.to];
                    if nd < dist[edge.to] {
                        dist[edge.to] = nd;
                        parent[edge.to] = e;
                        heap.push(Reverse((nd, edge.to)));
                    }
                }
            }
            if dist[sink] == INF {
                break;
            }
            for v in 0..n {
                if dist[v] < INF {
                    potential[v] += dist[v];
                }
            }
            let mut push = limit - result.flow;
            let mut v = sink;
            while v != source {
                let e = parent[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = parent[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                result.cost += push * self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            result.flow += push;
        }
        result
    }
}
