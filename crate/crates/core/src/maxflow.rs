//! Exact s-t max-flow / min-cut for the binary graphs built by move solvers.
//!
//! The solver grows two search trees, one from each terminal, augments along
//! the path found where they meet and re-adopts orphaned nodes afterwards
//! (the augmenting-path scheme of Boykov and Kolmogorov, which is fast on
//! grid-shaped graphs). Capacities are integers.
//!
//! After [`FlowNetwork::min_cut`], the source side of the reported cut is
//! exactly the set of nodes reachable from the source in the residual graph;
//! every other node, including ones with no terminal capacity at all, is on
//! the sink side.

use std::collections::VecDeque;
use std::fmt::Write as _;
use thiserror::Error;

pub type Capacity = i64;
pub type NodeId = usize;

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("negative capacity {0}")]
    NegativeCapacity(Capacity),
    #[error("node {node} does not exist (network has {count} nodes)")]
    UnknownNode { node: NodeId, count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
}

/// Which terminal a node is cut with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Sink,
}

#[derive(Debug, Clone)]
struct Node {
    first: u32,
    parent: u32,
    ts: u32,
    dist: u32,
    /// Residual terminal capacity: > 0 toward the source, < 0 toward the sink.
    tr_cap: Capacity,
    is_sink: bool,
    active: bool,
}

#[derive(Debug, Clone)]
struct Arc {
    head: u32,
    next: u32,
    r_cap: Capacity,
}

/// Two-terminal flow network. Arcs are stored in sister pairs, so arc `a`
/// and `a ^ 1` are reverses of each other.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    edges: Vec<(u32, u32, Capacity, Capacity)>,
    source_cap: Vec<Capacity>,
    sink_cap: Vec<Capacity>,
    flow: Capacity,
    orphans: VecDeque<u32>,
    queue: VecDeque<u32>,
    time: u32,
}

/// Max-flow value and the matching minimum cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub flow_value: Capacity,
    source_side: Vec<bool>,
}

impl CutResult {
    pub fn side(&self, node: NodeId) -> Side {
        if self.source_side[node] {
            Side::Source
        } else {
            Side::Sink
        }
    }

    pub fn is_source_side(&self, node: NodeId) -> bool {
        self.source_side[node]
    }

    pub fn source_side(&self) -> &[bool] {
        &self.source_side
    }
}

impl FlowNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        Self {
            nodes: Vec::with_capacity(nodes),
            arcs: Vec::with_capacity(2 * edges),
            edges: Vec::with_capacity(edges),
            source_cap: Vec::with_capacity(nodes),
            sink_cap: Vec::with_capacity(nodes),
            ..Self::default()
        }
    }

    /// Removes every node and edge, keeping the allocations.
    pub fn clear(&mut self) {
        self.nodes.clear();
        self.arcs.clear();
        self.edges.clear();
        self.source_cap.clear();
        self.sink_cap.clear();
        self.flow = 0;
        self.orphans.clear();
        self.queue.clear();
        self.time = 0;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of non-terminal edges added so far.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn add_node(&mut self) -> NodeId {
        self.nodes.push(Node {
            first: NONE,
            parent: NONE,
            ts: 0,
            dist: 0,
            tr_cap: 0,
            is_sink: false,
            active: false,
        });
        self.source_cap.push(0);
        self.sink_cap.push(0);
        self.nodes.len() - 1
    }

    /// Adds `n` nodes, returning the id of the first.
    pub fn add_nodes(&mut self, n: usize) -> NodeId {
        let first = self.nodes.len();
        for _ in 0..n {
            self.add_node();
        }
        first
    }

    fn check_node(&self, node: NodeId) -> Result<(), FlowError> {
        if node < self.nodes.len() {
            Ok(())
        } else {
            Err(FlowError::UnknownNode {
                node,
                count: self.nodes.len(),
            })
        }
    }

    /// Edge `u -> v` with capacity `cap_uv` and reverse capacity `cap_vu`.
    pub fn add_edge(
        &mut self,
        u: NodeId,
        v: NodeId,
        cap_uv: Capacity,
        cap_vu: Capacity,
    ) -> Result<(), FlowError> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(FlowError::SelfLoop(u));
        }
        for c in [cap_uv, cap_vu] {
            if c < 0 {
                return Err(FlowError::NegativeCapacity(c));
            }
        }
        let a = self.arcs.len() as u32;
        self.arcs.push(Arc {
            head: v as u32,
            next: self.nodes[u].first,
            r_cap: cap_uv,
        });
        self.nodes[u].first = a;
        self.arcs.push(Arc {
            head: u as u32,
            next: self.nodes[v].first,
            r_cap: cap_vu,
        });
        self.nodes[v].first = a + 1;
        self.edges.push((u as u32, v as u32, cap_uv, cap_vu));
        Ok(())
    }

    /// Terminal links `source -> u` and `u -> sink`; repeated calls add up.
    pub fn add_terminal(
        &mut self,
        u: NodeId,
        cap_source: Capacity,
        cap_sink: Capacity,
    ) -> Result<(), FlowError> {
        self.check_node(u)?;
        for c in [cap_source, cap_sink] {
            if c < 0 {
                return Err(FlowError::NegativeCapacity(c));
            }
        }
        self.source_cap[u] += cap_source;
        self.sink_cap[u] += cap_sink;
        let node = &mut self.nodes[u];
        let (mut cs, mut ct) = (cap_source, cap_sink);
        if node.tr_cap > 0 {
            cs += node.tr_cap;
        } else {
            ct -= node.tr_cap;
        }
        self.flow += cs.min(ct);
        node.tr_cap = cs - ct;
        Ok(())
    }

    /// Accumulated `(source, sink)` capacities of `u`'s terminal links.
    pub fn terminal_capacity(&self, u: NodeId) -> (Capacity, Capacity) {
        (self.source_cap[u], self.sink_cap[u])
    }

    /// Capacity of the cut that puts exactly the `source_side` nodes with
    /// the source, measured on the original capacities.
    pub fn cut_capacity(&self, source_side: &[bool]) -> Capacity {
        let mut total: Capacity = source_side
            .iter()
            .take(self.nodes.len())
            .enumerate()
            .map(|(i, &src)| {
                if src {
                    self.sink_cap[i]
                } else {
                    self.source_cap[i]
                }
            })
            .sum();
        for &(u, v, cuv, cvu) in &self.edges {
            match (source_side[u as usize], source_side[v as usize]) {
                (true, false) => total += cuv,
                (false, true) => total += cvu,
                _ => {}
            }
        }
        total
    }

    /// Computes a maximum flow and returns the induced minimum cut.
    /// Calling it again after adding capacity continues from the current flow.
    pub fn min_cut(&mut self) -> CutResult {
        self.solve();
        let source_side = self
            .nodes
            .iter()
            .map(|n| n.parent != NONE && !n.is_sink)
            .collect();
        CutResult {
            flow_value: self.flow,
            source_side,
        }
    }

    /// True when the residual graph still has a source-to-sink path.
    pub fn has_augmenting_path(&self) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.tr_cap > 0 {
                seen[i] = true;
                stack.push(i);
            }
        }
        while let Some(i) = stack.pop() {
            if self.nodes[i].tr_cap < 0 {
                return true;
            }
            let mut a = self.nodes[i].first;
            while a != NONE {
                let arc = &self.arcs[a as usize];
                let j = arc.head as usize;
                if arc.r_cap > 0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
                a = arc.next;
            }
        }
        false
    }

    /// DIMACS max-flow text: node 1 is the source, 2 the sink, network node
    /// `i` is `i + 3`.
    pub fn to_dimacs(&self) -> String {
        let mut lines = Vec::new();
        for (i, (&s, &t)) in self.source_cap.iter().zip(&self.sink_cap).enumerate() {
            if s > 0 {
                lines.push((1, i + 3, s));
            }
            if t > 0 {
                lines.push((i + 3, 2, t));
            }
        }
        for &(u, v, cuv, cvu) in &self.edges {
            if cuv > 0 {
                lines.push((u as usize + 3, v as usize + 3, cuv));
            }
            if cvu > 0 {
                lines.push((v as usize + 3, u as usize + 3, cvu));
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "p max {} {}", self.nodes.len() + 2, lines.len());
        out.push_str("n 1 s\nn 2 t\n");
        for (u, v, c) in lines {
            let _ = writeln!(out, "a {u} {v} {c}");
        }
        out
    }

    fn set_active(&mut self, i: u32) {
        let n = &mut self.nodes[i as usize];
        if !n.active {
            n.active = true;
            self.queue.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.queue.pop_front() {
            let n = &mut self.nodes[i as usize];
            n.active = false;
            if n.parent != NONE {
                return Some(i);
            }
        }
        None
    }

    fn init_trees(&mut self) {
        self.queue.clear();
        self.orphans.clear();
        self.time = 0;
        for i in 0..self.nodes.len() {
            let n = &mut self.nodes[i];
            n.active = false;
            n.ts = 0;
            if n.tr_cap != 0 {
                n.is_sink = n.tr_cap < 0;
                n.parent = TERMINAL;
                n.dist = 1;
                self.set_active(i as u32);
            } else {
                n.parent = NONE;
                n.is_sink = false;
            }
        }
    }

    fn solve(&mut self) {
        self.init_trees();
        let mut current: Option<u32> = None;
        loop {
            let mut i = match current.take() {
                Some(c) => {
                    self.nodes[c as usize].active = false;
                    (self.nodes[c as usize].parent != NONE).then_some(c)
                }
                None => None,
            };
            if i.is_none() {
                i = self.next_active();
            }
            let Some(i) = i else { break };

            let middle = self.grow(i);
            self.time += 1;
            if let Some(a) = middle {
                self.nodes[i as usize].active = true;
                current = Some(i);
                self.augment(a);
                while let Some(o) = self.orphans.pop_front() {
                    if self.nodes[o as usize].is_sink {
                        self.process_orphan::<true>(o);
                    } else {
                        self.process_orphan::<false>(o);
                    }
                }
            }
        }
    }

    /// Expands the tree containing `i`; returns the arc from the source tree
    /// into the sink tree when the trees touch.
    fn grow(&mut self, i: u32) -> Option<u32> {
        let (is_sink, ts, dist) = {
            let n = &self.nodes[i as usize];
            (n.is_sink, n.ts, n.dist)
        };
        let mut a = self.nodes[i as usize].first;
        while a != NONE {
            let (head, next) = (self.arcs[a as usize].head, self.arcs[a as usize].next);
            let residual = if is_sink {
                self.arcs[(a ^ 1) as usize].r_cap
            } else {
                self.arcs[a as usize].r_cap
            };
            if residual > 0 {
                let j = &mut self.nodes[head as usize];
                if j.parent == NONE {
                    j.is_sink = is_sink;
                    j.parent = a ^ 1;
                    j.ts = ts;
                    j.dist = dist + 1;
                    self.set_active(head);
                } else if j.is_sink != is_sink {
                    return Some(if is_sink { a ^ 1 } else { a });
                } else if j.ts <= ts && j.dist > dist {
                    // shorten j's path to its terminal
                    j.parent = a ^ 1;
                    j.ts = ts;
                    j.dist = dist + 1;
                }
            }
            a = next;
        }
        None
    }

    fn make_orphan_front(&mut self, i: u32) {
        self.nodes[i as usize].parent = ORPHAN;
        self.orphans.push_front(i);
    }

    fn augment(&mut self, middle: u32) {
        // bottleneck along source side
        let mut bottleneck = self.arcs[middle as usize].r_cap;
        let mut i = self.arcs[(middle ^ 1) as usize].head;
        loop {
            let a = self.nodes[i as usize].parent;
            if a == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.arcs[(a ^ 1) as usize].r_cap);
            i = self.arcs[a as usize].head;
        }
        bottleneck = bottleneck.min(self.nodes[i as usize].tr_cap);
        // and along sink side
        let mut i = self.arcs[middle as usize].head;
        loop {
            let a = self.nodes[i as usize].parent;
            if a == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.arcs[a as usize].r_cap);
            i = self.arcs[a as usize].head;
        }
        bottleneck = bottleneck.min(-self.nodes[i as usize].tr_cap);

        self.arcs[(middle ^ 1) as usize].r_cap += bottleneck;
        self.arcs[middle as usize].r_cap -= bottleneck;

        let mut i = self.arcs[(middle ^ 1) as usize].head;
        loop {
            let a = self.nodes[i as usize].parent;
            if a == TERMINAL {
                break;
            }
            self.arcs[a as usize].r_cap += bottleneck;
            self.arcs[(a ^ 1) as usize].r_cap -= bottleneck;
            let next = self.arcs[a as usize].head;
            if self.arcs[(a ^ 1) as usize].r_cap == 0 {
                self.make_orphan_front(i);
            }
            i = next;
        }
        self.nodes[i as usize].tr_cap -= bottleneck;
        if self.nodes[i as usize].tr_cap == 0 {
            self.make_orphan_front(i);
        }

        let mut i = self.arcs[middle as usize].head;
        loop {
            let a = self.nodes[i as usize].parent;
            if a == TERMINAL {
                break;
            }
            self.arcs[(a ^ 1) as usize].r_cap += bottleneck;
            self.arcs[a as usize].r_cap -= bottleneck;
            let next = self.arcs[a as usize].head;
            if self.arcs[a as usize].r_cap == 0 {
                self.make_orphan_front(i);
            }
            i = next;
        }
        self.nodes[i as usize].tr_cap += bottleneck;
        if self.nodes[i as usize].tr_cap == 0 {
            self.make_orphan_front(i);
        }

        self.flow += bottleneck;
    }

    /// Tries to reattach orphan `i` to its own tree; frees it otherwise.
    fn process_orphan<const SINK: bool>(&mut self, i: u32) {
        let time = self.time;
        let mut best_arc = NONE;
        let mut best_dist = u32::MAX;

        let mut a0 = self.nodes[i as usize].first;
        while a0 != NONE {
            // residual capacity must point from the candidate parent toward i
            // (source tree) or from i toward it (sink tree)
            let residual = if SINK {
                self.arcs[a0 as usize].r_cap
            } else {
                self.arcs[(a0 ^ 1) as usize].r_cap
            };
            let head = self.arcs[a0 as usize].head;
            let jn = &self.nodes[head as usize];
            if residual > 0 && jn.is_sink == SINK && jn.parent != NONE {
                // walk to the root, checking that j does not hang off an orphan
                let mut j = head;
                let mut d: u32 = 0;
                let mut rooted = true;
                loop {
                    let n = &self.nodes[j as usize];
                    if n.ts == time {
                        d += n.dist;
                        break;
                    }
                    let a = n.parent;
                    d += 1;
                    if a == TERMINAL {
                        let n = &mut self.nodes[j as usize];
                        n.ts = time;
                        n.dist = 1;
                        break;
                    }
                    if a == ORPHAN {
                        rooted = false;
                        break;
                    }
                    j = self.arcs[a as usize].head;
                }
                if rooted {
                    if d < best_dist {
                        best_arc = a0;
                        best_dist = d;
                    }
                    // cache distances along the path
                    let mut j = head;
                    let mut d = d;
                    while self.nodes[j as usize].ts != time {
                        let n = &mut self.nodes[j as usize];
                        n.ts = time;
                        n.dist = d;
                        d -= 1;
                        j = self.arcs[n.parent as usize].head;
                    }
                }
            }
            a0 = self.arcs[a0 as usize].next;
        }

        if best_arc != NONE {
            let n = &mut self.nodes[i as usize];
            n.parent = best_arc;
            n.ts = time;
            n.dist = best_dist + 1;
            return;
        }

        self.nodes[i as usize].parent = NONE;
        let mut a0 = self.nodes[i as usize].first;
        while a0 != NONE {
            let head = self.arcs[a0 as usize].head;
            let (j_sink, j_parent) = {
                let n = &self.nodes[head as usize];
                (n.is_sink, n.parent)
            };
            if j_sink == SINK && j_parent != NONE {
                let residual = if SINK {
                    self.arcs[a0 as usize].r_cap
                } else {
                    self.arcs[(a0 ^ 1) as usize].r_cap
                };
                if residual > 0 {
                    self.set_active(head);
                }
                if j_parent != TERMINAL
                    && j_parent != ORPHAN
                    && self.arcs[j_parent as usize].head == i
                {
                    self.nodes[head as usize].parent = ORPHAN;
                    self.orphans.push_back(head);
                }
            }
            a0 = self.arcs[a0 as usize].next;
        }
    }
}
