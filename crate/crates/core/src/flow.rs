//! Maximum flow on small real-capacity networks and residual reachability.
//!
//! Push-relabel with highest-label selection and the gap heuristic. The
//! preflow is converted to a proper flow (excess is returned to the source),
//! so reachability from the source in the residual graph is meaningful.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Directed network over `node_count` ordinary nodes plus a source and a
/// sink. Arcs are stored in pairs: arc `2i` and its reverse `2i + 1`, with
/// `flow[2i] = −flow[2i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    nodes: usize,
    head: Vec<usize>,
    cap: Vec<f64>,
    flow: Vec<f64>,
    adj: Vec<Vec<usize>>,
    value: Option<f64>,
}

/// Nodes on either side of the residual graph at maximum flow. Source and
/// sink are excluded; indices are ordinary node indices in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualReachability {
    pub from_source: Vec<usize>,
    pub to_sink: Vec<usize>,
}

impl FlowNetwork {
    pub fn new(node_count: usize) -> Self {
        FlowNetwork {
            nodes: node_count,
            head: Vec::new(),
            cap: Vec::new(),
            flow: Vec::new(),
            adj: vec![Vec::new(); node_count + 2],
            value: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> usize {
        self.nodes
    }

    pub fn sink(&self) -> usize {
        self.nodes + 1
    }

    fn push_pair(&mut self, from: usize, to: usize, forward: f64, backward: f64) -> Result<usize> {
        let total = self.nodes + 2;
        if from >= total || to >= total {
            return Err(Error::InvalidGraph("arc endpoint out of range".into()));
        }
        if from == to {
            return Err(Error::InvalidGraph("arc is a self-loop".into()));
        }
        for c in [forward, backward] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "capacity",
                    reason: "must be finite and non-negative",
                });
            }
        }
        let id = self.head.len();
        self.head.push(to);
        self.cap.push(forward);
        self.flow.push(0.0);
        self.adj[from].push(id);
        self.head.push(from);
        self.cap.push(backward);
        self.flow.push(0.0);
        self.adj[to].push(id + 1);
        self.value = None;
        Ok(id / 2)
    }

    /// Adds `from → to` with capacity `capacity`; returns the arc id.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64) -> Result<usize> {
        self.push_pair(from, to, capacity, 0.0)
    }

    /// Adds an undirected link: capacity `capacity` in both directions.
    pub fn add_undirected(&mut self, a: usize, b: usize, capacity: f64) -> Result<usize> {
        self.push_pair(a, b, capacity, capacity)
    }

    pub fn arc_count(&self) -> usize {
        self.head.len() / 2
    }

    /// Net flow along arc `arc` in its forward direction.
    pub fn arc_flow(&self, arc: usize) -> f64 {
        self.flow[2 * arc]
    }

    pub fn arc_capacity(&self, arc: usize) -> f64 {
        self.cap[2 * arc]
    }

    pub fn arc_endpoints(&self, arc: usize) -> (usize, usize) {
        (self.head[2 * arc + 1], self.head[2 * arc])
    }

    /// Flow value of the last [`max_flow`](Self::max_flow) call.
    pub fn value(&self) -> Option<f64> {
        self.value
    }

    fn residual(&self, e: usize) -> f64 {
        self.cap[e] - self.flow[e]
    }

    fn push(&mut self, e: usize, delta: f64, excess: &mut [f64]) {
        let u = self.head[e ^ 1];
        let v = self.head[e];
        if delta >= self.residual(e) {
            self.flow[e] = self.cap[e];
            self.flow[e ^ 1] = -self.cap[e];
        } else {
            self.flow[e] += delta;
            self.flow[e ^ 1] -= delta;
        }
        excess[u] -= delta;
        excess[v] += delta;
    }

    /// Computes a maximum flow from source to sink and returns its value.
    pub fn max_flow(&mut self) -> f64 {
        let n = self.nodes + 2;
        let (s, t) = (self.source(), self.sink());
        for f in self.flow.iter_mut() {
            *f = 0.0;
        }
        let mut excess = vec![0.0f64; n];
        // excess this small is rounding left over from cancelled pushes
        let dust = 1e-13 * self.cap.iter().fold(0.0f64, |m, c| m.max(*c));
        let mut label = self.sink_distances();
        label[s] = n;
        let max_label = 2 * n + 1;
        let mut count = vec![0usize; max_label + 1];
        for (v, &h) in label.iter().enumerate() {
            if v != s {
                count[h] += 1;
            }
        }

        let source_arcs = self.adj[s].clone();
        for e in source_arcs {
            let r = self.residual(e);
            if r > 0.0 {
                self.push(e, r, &mut excess);
            }
        }

        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_label + 1];
        let mut queued = vec![false; n];
        let mut top = 0;
        for v in 0..self.nodes {
            if excess[v] > dust {
                buckets[label[v]].push(v);
                queued[v] = true;
                top = top.max(label[v]);
            }
        }
        let mut current = vec![0usize; n];

        loop {
            while top > 0 && buckets[top].is_empty() {
                top -= 1;
            }
            let Some(u) = buckets[top].pop() else {
                break;
            };
            queued[u] = false;

            // discharge u
            while excess[u] > dust {
                if current[u] == self.adj[u].len() {
                    let old = label[u];
                    let mut best = usize::MAX;
                    for &e in &self.adj[u] {
                        if self.residual(e) > 0.0 {
                            best = best.min(label[self.head[e]]);
                        }
                    }
                    if best == usize::MAX {
                        break;
                    }
                    let new = best.saturating_add(1).min(max_label);
                    count[old] -= 1;
                    label[u] = new;
                    count[new] += 1;
                    current[u] = 0;
                    if old < n && count[old] == 0 {
                        // gap: nothing labelled in (old, n) can reach the sink
                        for v in 0..n {
                            if v != s && label[v] > old && label[v] < n {
                                if queued[v] {
                                    let h = label[v];
                                    buckets[h].retain(|&w| w != v);
                                    buckets[n + 1].push(v);
                                    top = top.max(n + 1);
                                }
                                count[label[v]] -= 1;
                                label[v] = n + 1;
                                count[n + 1] += 1;
                            }
                        }
                    }
                    continue;
                }
                let e = self.adj[u][current[u]];
                let v = self.head[e];
                let r = self.residual(e);
                if r > 0.0 && label[u] == label[v] + 1 {
                    let delta = excess[u].min(r);
                    self.push(e, delta, &mut excess);
                    if v != s && v != t && !queued[v] {
                        queued[v] = true;
                        buckets[label[v]].push(v);
                        top = top.max(label[v]);
                    }
                    if delta < r {
                        // excess exhausted, arc still admissible
                        continue;
                    }
                }
                current[u] += 1;
            }
        }
        let value = excess[t];
        self.value = Some(value);
        value
    }

    /// BFS distances to the sink over arcs with positive capacity; nodes
    /// that cannot reach the sink get `n + 1`.
    fn sink_distances(&self) -> Vec<usize> {
        let n = self.nodes + 2;
        let t = self.sink();
        let mut dist = vec![usize::MAX; n];
        dist[t] = 0;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.head[e];
                if dist[w] == usize::MAX && w != self.source() && self.residual(e ^ 1) > 0.0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        for d in dist.iter_mut() {
            if *d == usize::MAX {
                *d = n + 1;
            }
        }
        dist
    }

    /// Residual slack treated as zero when deciding reachability.
    pub fn reachability_epsilon(&self) -> f64 {
        let scale = self.cap.iter().fold(1.0f64, |m, c| m.max(*c));
        1e-10 * scale
    }

    /// Nodes reachable from the source and nodes that can reach the sink
    /// through arcs whose residual capacity exceeds
    /// [`reachability_epsilon`](Self::reachability_epsilon).
    pub fn residual_reachability(&self) -> ResidualReachability {
        let eps = self.reachability_epsilon();
        let n = self.nodes + 2;
        let (s, t) = (self.source(), self.sink());

        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.head[e];
                if !seen[w] && self.residual(e) > eps {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        let from_source = (0..self.nodes).filter(|&v| seen[v]).collect();

        let mut seen = vec![false; n];
        seen[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let w = self.head[e];
                if !seen[w] && self.residual(e ^ 1) > eps {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        let to_sink = (0..self.nodes).filter(|&v| seen[v]).collect();
        ResidualReachability {
            from_source,
            to_sink,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn min_cut_by_enumeration(net: &FlowNetwork) -> f64 {
        let k = net.node_count();
        let (s, t) = (net.source(), net.sink());
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << k) {
            let side = |v: usize| v == s || (v != t && mask & (1 << v) != 0);
            let mut cut = 0.0;
            for e in 0..net.head.len() {
                let (u, v) = (net.head[e ^ 1], net.head[e]);
                if side(u) && !side(v) {
                    cut += net.cap[e];
                }
            }
            best = best.min(cut);
        }
        best
    }

    fn check_feasible(net: &FlowNetwork) {
        let mut balance = vec![0.0; net.node_count() + 2];
        for e in (0..net.head.len()).step_by(2) {
            let f = net.flow[e];
            assert!(f <= net.cap[e] + 1e-12 && -f <= net.cap[e + 1] + 1e-12);
            balance[net.head[e ^ 1]] -= f;
            balance[net.head[e]] += f;
        }
        for (v, b) in balance.iter().enumerate().take(net.node_count()) {
            assert!(b.abs() < 1e-9, "node {v} imbalance {b}");
        }
    }

    #[test]
    fn series_bottleneck() {
        let mut net = FlowNetwork::new(1);
        let (s, t) = (net.source(), net.sink());
        net.add_arc(s, 0, 3.0).unwrap();
        net.add_arc(0, t, 2.0).unwrap();
        assert_eq!(net.max_flow(), 2.0);
        let reach = net.residual_reachability();
        assert_eq!(reach.from_source, vec![0]);
        assert!(reach.to_sink.is_empty());
    }

    #[test]
    fn parallel_paths() {
        let mut net = FlowNetwork::new(2);
        let (s, t) = (net.source(), net.sink());
        net.add_arc(s, 0, 1.0).unwrap();
        net.add_arc(s, 1, 1.0).unwrap();
        net.add_arc(0, t, 1.0).unwrap();
        net.add_arc(1, t, 1.0).unwrap();
        net.add_undirected(0, 1, 5.0).unwrap();
        assert_eq!(net.max_flow(), 2.0);
        assert!(net.residual_reachability().from_source.is_empty());
    }

    #[test]
    fn two_node_split_network() {
        for (internal, flow, splits) in [(0.5, 0.5, true), (1.0, 1.0, false)] {
            let mut net = FlowNetwork::new(2);
            let (s, t) = (net.source(), net.sink());
            net.add_arc(s, 0, 1.0).unwrap();
            net.add_arc(1, t, 1.0).unwrap();
            net.add_undirected(0, 1, internal).unwrap();
            assert_eq!(net.max_flow(), flow);
            let reach = net.residual_reachability();
            assert_eq!(!reach.from_source.is_empty(), splits);
            if splits {
                assert_eq!(reach.from_source, vec![0]);
                assert_eq!(reach.to_sink, vec![1]);
            }
        }
    }

    #[test]
    fn no_internal_resistance() {
        let mut net = FlowNetwork::new(4);
        let (s, t) = (net.source(), net.sink());
        net.add_arc(s, 0, 1.0).unwrap();
        net.add_arc(s, 2, 0.5).unwrap();
        net.add_arc(1, t, 2.0).unwrap();
        net.add_arc(3, t, 0.1).unwrap();
        net.add_undirected(0, 1, 0.0).unwrap();
        net.add_undirected(1, 2, 0.0).unwrap();
        net.add_undirected(2, 3, 0.0).unwrap();
        assert_eq!(net.max_flow(), 0.0);
        let reach = net.residual_reachability();
        assert_eq!(reach.from_source, vec![0, 2]);
        assert_eq!(reach.to_sink, vec![1, 3]);
    }

    #[test]
    fn excess_returns_to_source() {
        // node 0 receives 5 but can pass on only 1; the rest goes back
        let mut net = FlowNetwork::new(2);
        let (s, t) = (net.source(), net.sink());
        let a = net.add_arc(s, 0, 5.0).unwrap();
        net.add_arc(0, 1, 1.0).unwrap();
        net.add_arc(1, t, 4.0).unwrap();
        assert_eq!(net.max_flow(), 1.0);
        assert_eq!(net.arc_flow(a), 1.0);
        check_feasible(&net);
        let reach = net.residual_reachability();
        assert_eq!(reach.from_source, vec![0]);
        assert_eq!(reach.to_sink, vec![1]);
    }

    #[test]
    fn rejects_bad_capacity() {
        let mut net = FlowNetwork::new(1);
        assert!(net.add_arc(0, 1, -1.0).is_err());
        assert!(net.add_arc(0, 1, f64::NAN).is_err());
        assert!(net.add_arc(0, 0, 1.0).is_err());
        assert!(net.add_arc(0, 7, 1.0).is_err());
    }

    fn network(integer: bool) -> impl Strategy<Value = FlowNetwork> {
        (1usize..=10).prop_flat_map(move |k| {
            let arc = (0..k + 2, 0..k + 2, 0.0f64..10.0, any::<bool>());
            proptest::collection::vec(arc, 0..3 * k + 4).prop_map(move |arcs| {
                let mut net = FlowNetwork::new(k);
                for (u, v, c, undirected) in arcs {
                    let c = if integer { c.floor() } else { c };
                    if u == v || u == net.sink() || v == net.source() {
                        continue;
                    }
                    if undirected && u < k && v < k {
                        net.add_undirected(u, v, c).unwrap();
                    } else {
                        net.add_arc(u, v, c).unwrap();
                    }
                }
                net
            })
        })
    }

    proptest! {
        #[test]
        fn max_flow_equals_enumerated_min_cut(mut net in network(false)) {
            let cut = min_cut_by_enumeration(&net);
            let value = net.max_flow();
            prop_assert!((value - cut).abs() <= 1e-9 * (1.0 + cut));
            check_feasible(&net);
            let reach = net.residual_reachability();
            for v in &reach.from_source {
                prop_assert!(!reach.to_sink.contains(v));
            }
        }

        #[test]
        fn integer_capacities_give_integer_flow(mut net in network(true)) {
            let value = net.max_flow();
            prop_assert_eq!(value, value.round());
            prop_assert_eq!(value, min_cut_by_enumeration(&net));
        }

        #[test]
        fn relabelling_preserves_value(net in network(false), seed in any::<u64>()) {
            let k = net.node_count();
            let mut perm: Vec<usize> = (0..k).collect();
            let mut state = seed;
            for i in (1..k).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (state >> 33) as usize % (i + 1));
            }
            let map = |v: usize| if v < k { perm[v] } else { v };
            let mut relabelled = FlowNetwork::new(k);
            for e in (0..net.head.len()).step_by(2) {
                let (u, v) = (net.head[e + 1], net.head[e]);
                relabelled.push_pair(map(u), map(v), net.cap[e], net.cap[e + 1]).unwrap();
            }
            let mut net = net;
            let a = net.max_flow();
            let b = relabelled.max_flow();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }
    }
}
