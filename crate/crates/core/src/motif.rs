//! Core abnormal accounts and manipulation-pattern detection.
//!
//! The top-weighted edges of the leading base networks pick out a small core
//! of accounts. Their daily subgraphs are then scanned for six patterns:
//! self-loops, heavy one-way edges, heavy two-way pairs, directed triangles,
//! longer directed cycles, and stars. An edge is "heavy" when its daily
//! trade count reaches the repeat threshold; self-loops are reported at any
//! count since exchanges forbid them outright.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::date::CivilDate;
use crate::math;
use crate::record::{AccountId, TransactionTuple};
use crate::svd::SvdResult;

/// Union of top-|weight| edges across the selected base networks.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreSet {
    /// Distinct edges, lexicographic order.
    pub edges: BTreeSet<(AccountId, AccountId)>,
    /// Endpoints of those edges.
    pub accounts: BTreeSet<AccountId>,
    /// Top-k edges per base network, ranked by |weight| descending.
    pub per_base_top: Vec<Vec<(AccountId, AccountId)>>,
}

/// Ranks edges of each of the first `n` base networks by absolute weight and
/// keeps the top `k` of each (ties broken toward the lexicographically
/// smaller edge). `n` is clamped to the number of kept components.
pub fn core_accounts(
    svd: &SvdResult,
    edge_index: &[(AccountId, AccountId)],
    n: usize,
    k: usize,
) -> CoreSet {
    let n = n.min(svd.rank_kept());
    let mut per_base_top = Vec::with_capacity(n);
    let mut edges = BTreeSet::new();
    for i in 0..n {
        let weights = svd.v_row(i);
        let mut order: Vec<usize> = (0..edge_index.len()).collect();
        order.sort_by(|&a, &b| {
            math::abs(weights[b])
                .partial_cmp(&math::abs(weights[a]))
                .unwrap()
                .then(edge_index[a].cmp(&edge_index[b]))
        });
        let top: Vec<(AccountId, AccountId)> = order
            .into_iter()
            .take(k)
            .map(|idx| edge_index[idx])
            .collect();
        edges.extend(top.iter().copied());
        per_base_top.push(top);
    }
    let accounts = edges.iter().flat_map(|&(s, b)| [s, b]).collect();
    CoreSet {
        edges,
        accounts,
        per_base_top,
    }
}

/// One day's multigraph restricted to core accounts: edge -> trade count.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySubgraph {
    pub day: CivilDate,
    edges: BTreeMap<(AccountId, AccountId), u64>,
}

impl DailySubgraph {
    pub fn new(day: CivilDate) -> Self {
        DailySubgraph {
            day,
            edges: BTreeMap::new(),
        }
    }

    /// Builds directly from (edge, count) pairs; counts of zero are ignored.
    pub fn from_counts(
        day: CivilDate,
        counts: impl IntoIterator<Item = ((AccountId, AccountId), u64)>,
    ) -> Self {
        let mut sub = DailySubgraph::new(day);
        for (edge, count) in counts {
            if count > 0 {
                *sub.edges.entry(edge).or_insert(0) += count;
            }
        }
        sub
    }

    pub fn count(&self, seller: AccountId, buyer: AccountId) -> u64 {
        self.edges.get(&(seller, buyer)).copied().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = ((AccountId, AccountId), u64)> + '_ {
        self.edges.iter().map(|(e, c)| (*e, *c))
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn nodes(&self) -> BTreeSet<AccountId> {
        self.edges.keys().flat_map(|&(s, b)| [s, b]).collect()
    }
}

/// Day-t tuples with both endpoints in the core set, grouped to counts.
pub fn daily_subgraph(tuples: &[TransactionTuple], core: &CoreSet, day: CivilDate) -> DailySubgraph {
    DailySubgraph::from_counts(
        day,
        tuples
            .iter()
            .filter(|t| {
                t.timestamp.date() == day
                    && core.accounts.contains(&t.seller)
                    && core.accounts.contains(&t.buyer)
            })
            .map(|t| ((t.seller, t.buyer), 1)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MotifPattern {
    SelfLoop,
    Unidirection,
    Bidirection,
    Triangle,
    Polygon,
    Star,
}

impl core::fmt::Display for MotifPattern {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            MotifPattern::SelfLoop => "SelfLoop",
            MotifPattern::Unidirection => "Unidirection",
            MotifPattern::Bidirection => "Bidirection",
            MotifPattern::Triangle => "Triangle",
            MotifPattern::Polygon => "Polygon",
            MotifPattern::Star => "Star",
        };
        f.write_str(s)
    }
}

/// Detection thresholds. An edge is heavy when its count reaches
/// `min_repeats`; stars need `star_branches` distinct heavy counterparties;
/// cycle search stops at `max_cycle_len` and larger strongly connected
/// components are reported as truncated polygons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotifThresholds {
    pub min_repeats: u64,
    pub star_branches: usize,
    pub max_cycle_len: usize,
}

impl Default for MotifThresholds {
    fn default() -> Self {
        MotifThresholds {
            min_repeats: 10,
            star_branches: 4,
            max_cycle_len: 8,
        }
    }
}

/// One detected pattern instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifFinding {
    pub pattern: MotifPattern,
    /// For cycles: the rotation starting at the smallest account id. For
    /// stars: the center followed by the sorted branches.
    pub accounts: Vec<AccountId>,
    /// The supporting edges with their daily counts.
    pub edges: Vec<((AccountId, AccountId), u64)>,
    /// True when the finding stands in for a cycle structure longer than
    /// `max_cycle_len` (reported as its strongly connected component).
    pub truncated: bool,
}

/// All findings for one day.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifReport {
    pub day: CivilDate,
    pub findings: Vec<MotifFinding>,
}

/// Scans one daily subgraph for the six patterns.
///
/// Findings are deduplicated: each directed cycle is reported once (rotation
/// starting at its smallest account), triangles are not re-reported as
/// polygons, and a pair with traffic in both directions is never split into
/// two one-way findings.
pub fn detect_motifs(sub: &DailySubgraph, thresholds: &MotifThresholds) -> MotifReport {
    assert!(thresholds.min_repeats >= 1, "min_repeats must be >= 1");
    assert!(thresholds.star_branches >= 3, "star_branches must be >= 3");
    let r = thresholds.min_repeats;
    let mut findings = Vec::new();

    // Self-loops: any count counts.
    for ((s, b), count) in sub.edges() {
        if s == b {
            findings.push(MotifFinding {
                pattern: MotifPattern::SelfLoop,
                accounts: alloc::vec![s],
                edges: alloc::vec![((s, b), count)],
                truncated: false,
            });
        }
    }

    // Pair patterns over unordered pairs.
    let mut pairs: BTreeSet<(AccountId, AccountId)> = BTreeSet::new();
    for ((s, b), _) in sub.edges() {
        if s != b {
            pairs.insert(if s < b { (s, b) } else { (b, s) });
        }
    }
    for (a, b) in pairs {
        let forward = sub.count(a, b);
        let reverse = sub.count(b, a);
        if forward >= 1 && reverse >= 1 {
            if forward + reverse >= r {
                findings.push(MotifFinding {
                    pattern: MotifPattern::Bidirection,
                    accounts: alloc::vec![a, b],
                    edges: alloc::vec![((a, b), forward), ((b, a), reverse)],
                    truncated: false,
                });
            }
        } else if forward >= r {
            findings.push(MotifFinding {
                pattern: MotifPattern::Unidirection,
                accounts: alloc::vec![a, b],
                edges: alloc::vec![((a, b), forward)],
                truncated: false,
            });
        } else if reverse >= r {
            findings.push(MotifFinding {
                pattern: MotifPattern::Unidirection,
                accounts: alloc::vec![b, a],
                edges: alloc::vec![((b, a), reverse)],
                truncated: false,
            });
        }
    }

    // Heavy digraph (no self-loops) for cycles and stars.
    let mut heavy_out: BTreeMap<AccountId, Vec<AccountId>> = BTreeMap::new();
    let mut heavy_in: BTreeMap<AccountId, Vec<AccountId>> = BTreeMap::new();
    for ((s, b), count) in sub.edges() {
        if s != b && count >= r {
            heavy_out.entry(s).or_default().push(b);
            heavy_in.entry(b).or_default().push(s);
        }
    }

    let mut cycles = enumerate_cycles(&heavy_out, thresholds.max_cycle_len);
    cycles.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    for cycle in cycles {
        let pattern = if cycle.len() == 3 {
            MotifPattern::Triangle
        } else {
            MotifPattern::Polygon
        };
        let edges = cycle_edges(&cycle, sub);
        findings.push(MotifFinding {
            pattern,
            accounts: cycle,
            edges,
            truncated: false,
        });
    }

    // Components too large for exact cycle search get a truncated marker.
    for scc in strongly_connected_components(&heavy_out) {
        if scc.len() > thresholds.max_cycle_len {
            let members: BTreeSet<AccountId> = scc.iter().copied().collect();
            let edges: Vec<((AccountId, AccountId), u64)> = sub
                .edges()
                .filter(|((s, b), count)| {
                    s != b && *count >= r && members.contains(s) && members.contains(b)
                })
                .collect();
            findings.push(MotifFinding {
                pattern: MotifPattern::Polygon,
                accounts: scc,
                edges,
                truncated: true,
            });
        }
    }

    // Stars: enough distinct heavy counterparties on either side.
    let mut centers: BTreeSet<AccountId> = heavy_out.keys().copied().collect();
    centers.extend(heavy_in.keys().copied());
    for center in centers {
        if let Some(branches) = heavy_out.get(&center) {
            if branches.len() >= thresholds.star_branches {
                let mut accounts = alloc::vec![center];
                accounts.extend(branches.iter().copied());
                findings.push(MotifFinding {
                    pattern: MotifPattern::Star,
                    accounts,
                    edges: branches
                        .iter()
                        .map(|&b| ((center, b), sub.count(center, b)))
                        .collect(),
                    truncated: false,
                });
            }
        }
        if let Some(branches) = heavy_in.get(&center) {
            if branches.len() >= thresholds.star_branches {
                let mut accounts = alloc::vec![center];
                accounts.extend(branches.iter().copied());
                findings.push(MotifFinding {
                    pattern: MotifPattern::Star,
                    accounts,
                    edges: branches
                        .iter()
                        .map(|&b| ((b, center), sub.count(b, center)))
                        .collect(),
                    truncated: false,
                });
            }
        }
    }

    MotifReport {
        day: sub.day,
        findings,
    }
}

fn cycle_edges(cycle: &[AccountId], sub: &DailySubgraph) -> Vec<((AccountId, AccountId), u64)> {
    (0..cycle.len())
        .map(|i| {
            let s = cycle[i];
            let b = cycle[(i + 1) % cycle.len()];
            ((s, b), sub.count(s, b))
        })
        .collect()
}

/// Every directed simple cycle of length 3..=max_len, each reported once as
/// the rotation starting at its smallest node. DFS only walks nodes larger
/// than the start, so each cycle is discovered exactly once.
fn enumerate_cycles(
    out: &BTreeMap<AccountId, Vec<AccountId>>,
    max_len: usize,
) -> Vec<Vec<AccountId>> {
    let mut cycles = Vec::new();
    let mut path: Vec<AccountId> = Vec::new();
    let mut on_path: BTreeSet<AccountId> = BTreeSet::new();
    for &start in out.keys() {
        path.push(start);
        on_path.insert(start);
        walk(start, start, out, max_len, &mut path, &mut on_path, &mut cycles);
        path.pop();
        on_path.remove(&start);
    }
    cycles
}

#[allow(clippy::too_many_arguments)]
fn walk(
    start: AccountId,
    node: AccountId,
    out: &BTreeMap<AccountId, Vec<AccountId>>,
    max_len: usize,
    path: &mut Vec<AccountId>,
    on_path: &mut BTreeSet<AccountId>,
    cycles: &mut Vec<Vec<AccountId>>,
) {
    let Some(neighbors) = out.get(&node) else {
        return;
    };
    for &next in neighbors {
        if next == start {
            if path.len() >= 3 {
                cycles.push(path.clone());
            }
        } else if next > start && !on_path.contains(&next) && path.len() < max_len {
            path.push(next);
            on_path.insert(next);
            walk(start, next, out, max_len, path, on_path, cycles);
            path.pop();
            on_path.remove(&next);
        }
    }
}

/// Tarjan's algorithm over the heavy digraph; components come out with
/// sorted members, ordered by smallest member.
fn strongly_connected_components(
    out: &BTreeMap<AccountId, Vec<AccountId>>,
) -> Vec<Vec<AccountId>> {
    let mut nodes: BTreeSet<AccountId> = out.keys().copied().collect();
    for targets in out.values() {
        nodes.extend(targets.iter().copied());
    }
    let ids: Vec<AccountId> = nodes.into_iter().collect();
    let index_of: BTreeMap<AccountId, usize> =
        ids.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let n = ids.len();

    struct State {
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next_index: usize,
        components: Vec<Vec<usize>>,
    }

    fn strongconnect(
        v: usize,
        adjacency: &[Vec<usize>],
        st: &mut State,
    ) {
        st.index[v] = Some(st.next_index);
        st.low[v] = st.next_index;
        st.next_index += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for &w in &adjacency[v] {
            if st.index[w].is_none() {
                strongconnect(w, adjacency, st);
                st.low[v] = st.low[v].min(st.low[w]);
            } else if st.on_stack[w] {
                st.low[v] = st.low[v].min(st.index[w].unwrap());
            }
        }
        if st.low[v] == st.index[v].unwrap() {
            let mut component = Vec::new();
            loop {
                let w = st.stack.pop().unwrap();
                st.on_stack[w] = false;
                component.push(w);
                if w == v {
                    break;
                }
            }
            st.components.push(component);
        }
    }

    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (from, targets) in out {
        for to in targets {
            adjacency[index_of[from]].push(index_of[to]);
        }
    }
    let mut st = State {
        index: alloc::vec![None; n],
        low: alloc::vec![0; n],
        on_stack: alloc::vec![false; n],
        stack: Vec::new(),
        next_index: 0,
        components: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            strongconnect(v, &adjacency, &mut st);
        }
    }
    let mut components: Vec<Vec<AccountId>> = st
        .components
        .into_iter()
        .map(|c| {
            let mut members: Vec<AccountId> = c.into_iter().map(|i| ids[i]).collect();
            members.sort_unstable();
            members
        })
        .collect();
    components.sort();
    components
}
