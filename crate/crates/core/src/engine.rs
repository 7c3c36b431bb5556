//! RANKING in its three equivalent views, plus time-indexed partial states.
//!
//! Vertices outside the order's domain are treated as deleted; frozen
//! vertices stay in the probe timeline but are never available.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Matching, Vertex};
use crate::rank::{BucketedRankVector, EdgeProbeTime, Permutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    VertexIterative,
    GreedyProbing,
    RestrictedArrival,
}

impl View {
    pub const ALL: [View; 3] = [
        View::VertexIterative,
        View::GreedyProbing,
        View::RestrictedArrival,
    ];
}

/// Anything that induces a total order on vertices.
pub trait VertexOrder {
    fn permutation(&self) -> Cow<'_, Permutation>;
}

impl VertexOrder for Permutation {
    fn permutation(&self) -> Cow<'_, Permutation> {
        Cow::Borrowed(self)
    }
}

impl VertexOrder for BucketedRankVector {
    fn permutation(&self) -> Cow<'_, Permutation> {
        Cow::Owned(self.induced_permutation())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeRecord {
    pub time: EdgeProbeTime,
    pub edge: (Vertex, Vertex),
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankingTrace {
    pub matching: Matching,
    pub probe_log: Vec<ProbeRecord>,
    pub view: View,
}

impl RankingTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartialState {
    pub t: EdgeProbeTime,
    pub partial_matching: Matching,
    pub available: Vec<Vertex>,
}

impl PartialState {
    pub fn is_available(&self, v: Vertex) -> bool {
        self.available.binary_search(&v).is_ok()
    }
}

/// The algorithm under test. `FAITHFUL` is RANKING; `MUTATED` silently
/// ignores frozen marks, a plausible bug that exists only to show the claim
/// checkers can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Engine {
    ignore_frozen: bool,
}

impl Engine {
    pub const FAITHFUL: Engine = Engine {
        ignore_frozen: false,
    };
    pub const MUTATED: Engine = Engine {
        ignore_frozen: true,
    };

    pub fn is_mutated(&self) -> bool {
        self.ignore_frozen
    }

    fn availability(&self, g: &Graph, order: &Permutation, frozen: &[Vertex]) -> Result<Vec<bool>> {
        let frozen = if self.ignore_frozen { &[][..] } else { frozen };
        initial_availability(g, order, frozen)
    }

    pub fn run(
        &self,
        g: &Graph,
        order: &impl VertexOrder,
        view: View,
        frozen: &[Vertex],
    ) -> Result<RankingTrace> {
        let order = order.permutation();
        let avail = self.availability(g, &order, frozen)?;
        Ok(match view {
            View::GreedyProbing => {
                let (matching, probe_log) =
                    self.probe(g, &order, avail, EdgeProbeTime::END, true);
                RankingTrace {
                    matching,
                    probe_log,
                    view,
                }
            }
            View::VertexIterative => self.vertex_iterative(g, &order, avail),
            View::RestrictedArrival => self.restricted_arrival(g, &order, avail),
        })
    }

    /// R^t and A^t: every edge probed strictly before `t` has been processed.
    pub fn partial_state(
        &self,
        g: &Graph,
        order: &impl VertexOrder,
        t: EdgeProbeTime,
        frozen: &[Vertex],
    ) -> Result<PartialState> {
        let order = order.permutation();
        let avail = self.availability(g, &order, frozen)?;
        let (partial_matching, _) = self.probe(g, &order, avail.clone(), t, false);
        let available = (0..g.vertex_count())
            .filter(|&v| avail[v] && !partial_matching.is_matched(v))
            .collect();
        Ok(PartialState {
            t,
            partial_matching,
            available,
        })
    }

    /// Final matching only; the cheapest path for sweeps.
    pub fn matching(
        &self,
        g: &Graph,
        order: &impl VertexOrder,
        frozen: &[Vertex],
    ) -> Result<Matching> {
        let order = order.permutation();
        let avail = self.availability(g, &order, frozen)?;
        Ok(self.fast_matching(g, &order, avail))
    }

    pub(crate) fn fast_matching(
        &self,
        g: &Graph,
        order: &Permutation,
        mut avail: Vec<bool>,
    ) -> Matching {
        let mut m = Matching::empty(g.vertex_count());
        for &v in order.order() {
            if !avail[v] {
                continue;
            }
            let pick = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| avail[w])
                .map(|w| (order.rank(w).expect("available implies ranked"), w));
            if let Some((_, w)) = pick.min() {
                m.pair(v, w);
                avail[v] = false;
                avail[w] = false;
            }
        }
        m
    }

    /// Greedy probing up to (excluding) `until`.
    fn probe(
        &self,
        g: &Graph,
        order: &Permutation,
        mut avail: Vec<bool>,
        until: EdgeProbeTime,
        log: bool,
    ) -> (Matching, Vec<ProbeRecord>) {
        let mut edges: Vec<(EdgeProbeTime, Vertex, Vertex)> = g
            .edges()
            .iter()
            .filter_map(|&(u, v)| EdgeProbeTime::of_edge(order, u, v).map(|t| (t, u, v)))
            .collect();
        edges.sort_unstable_by_key(|&(t, _, _)| t);
        let mut m = Matching::empty(g.vertex_count());
        let mut records = Vec::new();
        for (t, u, v) in edges {
            if t >= until {
                break;
            }
            let accepted = avail[u] && avail[v];
            if accepted {
                m.pair(u, v);
                avail[u] = false;
                avail[v] = false;
            }
            if log {
                records.push(ProbeRecord {
                    time: t,
                    edge: (u, v),
                    accepted,
                });
            }
        }
        (m, records)
    }

    fn vertex_iterative(&self, g: &Graph, order: &Permutation, mut avail: Vec<bool>) -> RankingTrace {
        let n = g.vertex_count();
        let mut m = Matching::empty(n);
        let mut probed = vec![false; n * n];
        let mut log = Vec::new();
        for &v in order.order() {
            if !avail[v] {
                continue;
            }
            let rv = order.rank(v).unwrap();
            let mut nbrs: Vec<(u32, Vertex)> = g
                .neighbors(v)
                .iter()
                .filter_map(|&w| order.rank(w).map(|r| (r, w)))
                .collect();
            nbrs.sort_unstable();
            for (rw, w) in nbrs {
                let accepted = avail[w];
                if !probed[v * n + w] {
                    probed[v * n + w] = true;
                    probed[w * n + v] = true;
                    log.push(ProbeRecord {
                        time: EdgeProbeTime::new(rv, rw),
                        edge: (v.min(w), v.max(w)),
                        accepted,
                    });
                }
                if accepted {
                    m.pair(v, w);
                    avail[v] = false;
                    avail[w] = false;
                    break;
                }
            }
        }
        RankingTrace {
            matching: m,
            probe_log: log,
            view: View::VertexIterative,
        }
    }

    /// Vertex of rank i arrives and probes S_i = {(i,1), ..., (i,i−1)}.
    fn restricted_arrival(&self, g: &Graph, order: &Permutation, mut avail: Vec<bool>) -> RankingTrace {
        let mut m = Matching::empty(g.vertex_count());
        let mut log = Vec::new();
        let seq = order.order();
        for i in 0..seq.len() {
            let v = seq[i];
            for j in 0..i {
                let w = seq[j];
                if !g.has_edge(v, w) {
                    continue;
                }
                let accepted = avail[v] && avail[w];
                log.push(ProbeRecord {
                    time: EdgeProbeTime::new(i as u32 + 1, j as u32 + 1),
                    edge: (v.min(w), v.max(w)),
                    accepted,
                });
                if accepted {
                    m.pair(v, w);
                    avail[v] = false;
                    avail[w] = false;
                }
            }
        }
        RankingTrace {
            matching: m,
            probe_log: log,
            view: View::RestrictedArrival,
        }
    }
}

pub(crate) fn initial_availability(
    g: &Graph,
    order: &Permutation,
    frozen: &[Vertex],
) -> Result<Vec<bool>> {
    if order.universe() != g.vertex_count() {
        return Err(Error::DomainMismatch(format!(
            "order ranges over {} vertices, graph has {}",
            order.universe(),
            g.vertex_count()
        )));
    }
    let mut avail: Vec<bool> = (0..g.vertex_count()).map(|v| order.contains(v)).collect();
    for &f in frozen {
        if !order.contains(f) {
            return Err(Error::DomainMismatch(format!(
                "frozen vertex {f} is not in the order"
            )));
        }
        avail[f] = false;
    }
    Ok(avail)
}

pub fn run_ranking(
    g: &Graph,
    order: &impl VertexOrder,
    view: View,
    frozen: &[Vertex],
) -> Result<RankingTrace> {
    Engine::FAITHFUL.run(g, order, view, frozen)
}

pub fn partial_state(
    g: &Graph,
    order: &impl VertexOrder,
    t: EdgeProbeTime,
    frozen: &[Vertex],
) -> Result<PartialState> {
    Engine::FAITHFUL.partial_state(g, order, t, frozen)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViewDivergence {
    pub order: Vec<Vertex>,
    pub matchings: Vec<(View, Vec<(Vertex, Vertex)>)>,
}

pub fn views_agree(g: &Graph, order: &impl VertexOrder) -> Result<Option<ViewDivergence>> {
    views_agree_with(Engine::FAITHFUL, g, order)
}

/// `None` when all three views produce the same matching.
pub fn views_agree_with(
    engine: Engine,
    g: &Graph,
    order: &impl VertexOrder,
) -> Result<Option<ViewDivergence>> {
    let order = order.permutation();
    let runs = View::ALL
        .iter()
        .map(|&view| engine.run(g, order.as_ref(), view, &[]).map(|t| (view, t.matching)))
        .collect::<Result<Vec<_>>>()?;
    if runs.iter().all(|(_, m)| *m == runs[0].1) {
        return Ok(None);
    }
    Ok(Some(ViewDivergence {
        order: order.order().to_vec(),
        matchings: runs.into_iter().map(|(v, m)| (v, m.edges())).collect(),
    }))
}
