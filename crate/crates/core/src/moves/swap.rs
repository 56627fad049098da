//! Alpha-beta swap by graph cuts.
//!
//! Only pixels currently labelled alpha or beta take part; each may keep or
//! exchange its label. Pairwise costs against fixed neighbours fold into the
//! t-links, so the cut cost equals the local energy exactly for any
//! semimetric.

use super::{neighbors, ConvergenceTrace, LabelOrder, SolverConfig};
use crate::energy::{energy_of, Energy, GridEnergy, Labeling, PairTable};
use crate::maxflow::FlowNetwork;

const OUTSIDE: u32 = u32::MAX;

pub(crate) struct Swapper {
    pairs: PairTable,
    net: FlowNetwork,
    node_of: Vec<u32>,
}

impl Swapper {
    pub(crate) fn new<M: GridEnergy>(model: &M) -> Self {
        Self {
            pairs: PairTable::new(model),
            net: FlowNetwork::new(),
            node_of: vec![OUTSIDE; model.pixel_count()],
        }
    }

    /// Optimal swap of `alpha` and `beta` over `members` (the sorted pixels
    /// currently carrying either label). Applied only if it strictly lowers
    /// the energy; returns the (non-positive) energy change.
    pub(crate) fn step<M: GridEnergy>(
        &mut self,
        model: &M,
        labeling: &mut Labeling,
        members: &[u32],
        alpha: usize,
        beta: usize,
    ) -> Energy {
        if members.is_empty() || alpha == beta {
            return 0;
        }
        let (w, h) = (model.width(), model.height());
        for (k, &p) in members.iter().enumerate() {
            self.node_of[p as usize] = k as u32;
        }
        self.net.clear();
        self.net.add_nodes(members.len());
        let v_ab = self.pairs.get(alpha, beta);
        let mut old_local = 0;
        for (k, &p) in members.iter().enumerate() {
            let p = p as usize;
            let lp = labeling.get(p);
            let mut d_alpha = model.unary(p, alpha);
            let mut d_beta = model.unary(p, beta);
            old_local += model.unary(p, lp);
            for q in neighbors(p, w, h) {
                let kq = self.node_of[q];
                if kq == OUTSIDE {
                    let lq = labeling.get(q);
                    d_alpha += self.pairs.get(alpha, lq);
                    d_beta += self.pairs.get(beta, lq);
                    old_local += self.pairs.get(lp, lq);
                } else if q > p {
                    old_local += self.pairs.get(lp, labeling.get(q));
                    if v_ab > 0 {
                        self.net
                            .add_edge(k, kq as usize, v_ab, v_ab)
                            .expect("pairwise costs are non-negative");
                    }
                }
            }
            // source side keeps alpha, sink side takes beta
            self.net
                .add_terminal(k, d_beta, d_alpha)
                .expect("data costs are non-negative");
        }
        let cut = self.net.min_cut();
        for &p in members {
            self.node_of[p as usize] = OUTSIDE;
        }
        if cut.flow_value >= old_local {
            return 0;
        }
        for (k, &p) in members.iter().enumerate() {
            let l = if cut.is_source_side(k) { alpha } else { beta };
            labeling.set(p as usize, l);
        }
        cut.flow_value - old_local
    }
}

fn members_of(labeling: &Labeling, alpha: usize, beta: usize) -> Vec<u32> {
    (0..labeling.len())
        .filter(|&p| {
            let l = labeling.get(p);
            l == alpha || l == beta
        })
        .map(|p| p as u32)
        .collect()
}

/// One alpha-beta swap move: the lowest-energy labeling reachable by letting
/// alpha and beta pixels exchange labels. Returns the input unchanged when no
/// such labeling is strictly better.
pub fn swap_move<M: GridEnergy>(
    model: &M,
    labeling: &Labeling,
    alpha: usize,
    beta: usize,
) -> (Labeling, Energy) {
    let mut swapper = Swapper::new(model);
    let mut out = labeling.clone();
    let members = members_of(labeling, alpha, beta);
    let delta = swapper.step(model, &mut out, &members, alpha, beta);
    (out, energy_of(model, labeling) + delta)
}

fn merge(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Cycles swap moves over every unordered label pair until a full cycle no
/// longer improves the energy by more than `cfg.improvement_epsilon`.
pub fn run_swap<M: GridEnergy>(
    model: &M,
    init: &Labeling,
    cfg: &SolverConfig,
) -> (Labeling, ConvergenceTrace) {
    let m = model.label_count();
    let mut swapper = Swapper::new(model);
    let mut labeling = init.clone();
    let mut energy = energy_of(model, &labeling);
    let (mut trace, clock) = ConvergenceTrace::start(energy);

    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); m];
    for p in 0..labeling.len() {
        buckets[labeling.get(p)].push(p as u32);
    }
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
        .collect();
    let mut rng = None;

    for _ in 0..cfg.max_cycles.max(1) {
        let start = energy;
        let order = match cfg.label_order {
            LabelOrder::Ascending => pairs.clone(),
            _ => cfg.label_order.visit(&pairs, &mut rng),
        };
        for (alpha, beta) in order {
            if buckets[alpha].is_empty() && buckets[beta].is_empty() {
                continue;
            }
            let members = merge(&buckets[alpha], &buckets[beta]);
            let delta = swapper.step(model, &mut labeling, &members, alpha, beta);
            if delta < 0 {
                energy += delta;
                let (into_a, into_b): (Vec<u32>, Vec<u32>) = members
                    .iter()
                    .partition(|&&p| labeling.get(p as usize) == alpha);
                buckets[alpha] = into_a;
                buckets[beta] = into_b;
            }
        }
        trace.record(energy, &clock);
        if start - energy <= cfg.improvement_epsilon {
            break;
        }
    }
    debug_assert_eq!(energy, energy_of(model, &labeling));
    (labeling, trace)
}
