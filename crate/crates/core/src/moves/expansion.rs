//! Alpha-expansion by graph cuts.
//!
//! For a label `alpha` the binary choice at every pixel is "keep the current
//! label" (source side) or "switch to alpha" (sink side). The graph has one
//! node per pixel, t-links carrying the two data costs, a plain edge for each
//! neighbour pair that currently agrees, and an auxiliary node with three
//! edges for each pair that currently disagrees.
//!
//! With a metric potential the gadget capacities are the usual
//! `V(l_p, alpha)`, `V(alpha, l_q)` and `V(l_p, l_q)`, and every cut costs
//! exactly the energy of its labeling. For a non-metric potential (the
//! truncated quadratic) the two outer capacities are raised just enough that
//! the cut cost is an upper bound on the true energy which is still tight at
//! the current labeling, so the minimum cut never increases the energy.

use super::{ConvergenceTrace, SolverConfig};
use crate::energy::{energy_of, Energy, GridEnergy, Labeling, PairTable};
use crate::maxflow::{Capacity, FlowNetwork};

/// Forces a pixel that already has label alpha onto the alpha side.
const FORCED: Capacity = 1 << 42;

/// An assembled expansion graph and its node census.
#[derive(Debug, Clone)]
pub struct ExpansionGraph {
    pub network: FlowNetwork,
    pub pixel_nodes: usize,
    pub aux_nodes: usize,
}

impl ExpansionGraph {
    /// Vertices including the two terminals.
    pub fn vertex_count(&self) -> usize {
        2 + self.pixel_nodes + self.aux_nodes
    }
}

/// Capacities `(p-aux, aux-q, aux-sink)` for a separated pair.
#[inline]
fn gadget(separated: Energy, p_to_alpha: Energy, alpha_to_q: Energy) -> (Energy, Energy, Energy) {
    let a = separated;
    let mut b1 = p_to_alpha.max(alpha_to_q - a);
    let mut b2 = alpha_to_q.max(p_to_alpha - a);
    if b1 + b2 < a {
        let d = a - b1 - b2;
        b1 += d / 2;
        b2 += d - d / 2;
    }
    (b1, b2, a)
}

/// Builds the graph for expanding `alpha` from `labeling` into `net`
/// (cleared first). Returns the number of auxiliary nodes.
fn build<M: GridEnergy>(
    net: &mut FlowNetwork,
    model: &M,
    pairs: &PairTable,
    labeling: &Labeling,
    alpha: usize,
) -> usize {
    let (w, h) = (model.width(), model.height());
    let n = w * h;
    net.clear();
    net.add_nodes(n);
    for p in 0..n {
        let lp = labeling.get(p);
        let to_alpha = model.unary(p, alpha);
        let keep = if lp == alpha {
            FORCED
        } else {
            model.unary(p, lp)
        };
        net.add_terminal(p, to_alpha, keep)
            .expect("data costs are non-negative");
    }
    let mut aux = 0;
    let mut link = |net: &mut FlowNetwork, p: usize, q: usize| {
        let (lp, lq) = (labeling.get(p), labeling.get(q));
        if lp == lq {
            let c = pairs.get(lp, alpha);
            if c > 0 {
                net.add_edge(p, q, c, c)
                    .expect("pairwise costs are non-negative");
            }
        } else {
            let (b1, b2, a) = gadget(
                pairs.get(lp, lq),
                pairs.get(lp, alpha),
                pairs.get(alpha, lq),
            );
            let node = net.add_node();
            net.add_edge(p, node, b1, b1).expect("valid gadget");
            net.add_edge(node, q, b2, b2).expect("valid gadget");
            net.add_terminal(node, 0, a).expect("valid gadget");
            aux += 1;
        }
    };
    for r in 0..h {
        for c in 0..w {
            let p = r * w + c;
            if c + 1 < w {
                link(net, p, p + 1);
            }
            if r + 1 < h {
                link(net, p, p + w);
            }
        }
    }
    aux
}

/// The expansion graph for `alpha` at `labeling`, for inspection.
pub fn expansion_graph<M: GridEnergy>(
    model: &M,
    labeling: &Labeling,
    alpha: usize,
) -> ExpansionGraph {
    let pairs = PairTable::new(model);
    let mut network = FlowNetwork::new();
    let aux_nodes = build(&mut network, model, &pairs, labeling, alpha);
    ExpansionGraph {
        network,
        pixel_nodes: model.pixel_count(),
        aux_nodes,
    }
}

pub(crate) struct Expander {
    pairs: PairTable,
    net: FlowNetwork,
    pub(crate) last_cut: Capacity,
}

impl Expander {
    pub(crate) fn new<M: GridEnergy>(model: &M) -> Self {
        Self {
            pairs: PairTable::new(model),
            net: FlowNetwork::new(),
            last_cut: 0,
        }
    }

    /// Performs the best expansion of `alpha`; applies it only if it lowers
    /// `energy`. Returns whether the labeling changed.
    pub(crate) fn step<M: GridEnergy>(
        &mut self,
        model: &M,
        labeling: &mut Labeling,
        energy: &mut Energy,
        alpha: usize,
    ) -> bool {
        build(&mut self.net, model, &self.pairs, labeling, alpha);
        let cut = self.net.min_cut();
        self.last_cut = cut.flow_value;
        let n = model.pixel_count();
        let mut candidate = labeling.clone();
        let mut moved = false;
        for p in 0..n {
            if !cut.is_source_side(p) && candidate.get(p) != alpha {
                candidate.set(p, alpha);
                moved = true;
            }
        }
        if !moved {
            return false;
        }
        let e = energy_of(model, &candidate);
        debug_assert!(e <= cut.flow_value, "cut cost must bound the energy");
        if e < *energy {
            *labeling = candidate;
            *energy = e;
            true
        } else {
            false
        }
    }
}

/// One alpha-expansion move: the lowest-energy labeling in which every pixel
/// keeps its label or switches to `alpha` (exact for metric potentials).
/// Returns the input unchanged when no such labeling is strictly better.
pub fn expansion_move<M: GridEnergy>(
    model: &M,
    labeling: &Labeling,
    alpha: usize,
) -> (Labeling, Energy) {
    let mut expander = Expander::new(model);
    let mut out = labeling.clone();
    let mut energy = energy_of(model, labeling);
    expander.step(model, &mut out, &mut energy, alpha);
    (out, energy)
}

/// Cycles expansion moves over every label until a full cycle no longer
/// improves the energy by more than `cfg.improvement_epsilon`.
pub fn run_expansion<M: GridEnergy>(
    model: &M,
    init: &Labeling,
    cfg: &SolverConfig,
) -> (Labeling, ConvergenceTrace) {
    let mut expander = Expander::new(model);
    let mut labeling = init.clone();
    let mut energy = energy_of(model, &labeling);
    let (mut trace, clock) = ConvergenceTrace::start(energy);
    let all: Vec<usize> = (0..model.label_count()).collect();
    let mut rng = None;
    for _ in 0..cfg.max_cycles.max(1) {
        let start = energy;
        for alpha in cfg.label_order.visit(&all, &mut rng) {
            expander.step(model, &mut labeling, &mut energy, alpha);
        }
        trace.record(energy, &clock);
        if start - energy <= cfg.improvement_epsilon {
            break;
        }
    }
    (labeling, trace)
}
