//! Communication digraph and the graph constant `W`.
//!
//! Node ids are 1-based. An edge `(j, i)` means camera `i` receives from `j`.
//!
//! `W = min_{root} min_{spanning tree T of G_u} max_{edge E in T} sum_i delta_T(E; i) d_T(i)`,
//! where `d_T(i)` is the depth of `i` below the root and `delta_T(E; i)` is 1
//! when the root-to-`i` path uses `E`. For an edge whose child endpoint is `c`
//! the inner sum is the total depth of the subtree hanging below `c`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};

/// Largest graph `compute_w` will enumerate.
pub const ENUMERATION_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assumption1 {
    pub balanced: bool,
    pub strongly_connected: bool,
}

impl Assumption1 {
    pub fn holds(&self) -> bool {
        self.balanced && self.strongly_connected
    }
}

/// A spanning tree of `G_u` with its root and per-edge loads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeReport {
    pub root: usize,
    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub tree_edges: Vec<(usize, usize)>,
    pub d_tilde: u64,
    pub per_edge_load: BTreeMap<(usize, usize), u64>,
    /// `depths[i - 1]` is the depth of node `i`.
    pub depths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WReport {
    pub w: u64,
    pub witness: TreeReport,
}

impl Digraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (from, to) in edges {
            for id in [from, to] {
                if id == 0 || id > n {
                    return Err(Error::InvalidNode { id, n });
                }
            }
            if from == to {
                return Err(Error::Domain(format!("self-loop at node {from}")));
            }
            set.insert((from, to));
        }
        Ok(Digraph { n, edges: set })
    }

    /// Both directions of every listed pair.
    pub fn bidirectional(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let edges: Vec<_> = pairs.into_iter().flat_map(|(a, b)| [(a, b), (b, a)]).collect();
        Digraph::new(n, edges)
    }

    /// Bidirectional star with the given centre.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        Digraph::bidirectional(n, (1..=n).filter(|&i| i != center).map(|i| (center, i)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn check(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            Err(Error::InvalidNode { id: i, n: self.n })
        } else {
            Ok(())
        }
    }

    /// `N_i = { j : (j, i) in E }`.
    pub fn neighbors(&self, i: usize) -> Result<BTreeSet<usize>> {
        self.check(i)?;
        Ok(self
            .edges
            .iter()
            .filter(|&&(_, to)| to == i)
            .map(|&(from, _)| from)
            .collect())
    }

    /// Undirected simple edges `(a, b)`, `a < b`, sorted.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<_> = self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        set.into_iter().collect()
    }

    pub fn validate_assumption1(&self) -> Assumption1 {
        let mut indeg = vec![0usize; self.n + 1];
        let mut outdeg = vec![0usize; self.n + 1];
        for &(from, to) in &self.edges {
            outdeg[from] += 1;
            indeg[to] += 1;
        }
        let balanced = indeg == outdeg;
        let forward = reach(self.n, self.edges.iter().copied());
        let backward = reach(self.n, self.edges.iter().map(|&(a, b)| (b, a)));
        Assumption1 {
            balanced,
            strongly_connected: forward && backward,
        }
    }

    /// Whether the undirected version `G_u` is connected.
    pub fn undirected_connected(&self) -> bool {
        reach(
            self.n,
            self.undirected_edges().into_iter().flat_map(|(a, b)| [(a, b), (b, a)]),
        )
    }

    /// Exact `W` by enumerating every root and every spanning tree of `G_u`.
    ///
    /// Among minimizers the witness has the lexicographically smallest edge
    /// set, then the smallest root.
    pub fn compute_w(&self) -> Result<WReport> {
        if self.n > ENUMERATION_LIMIT {
            return Err(Error::EnumerationLimit {
                n: self.n,
                limit: ENUMERATION_LIMIT,
            });
        }
        if !self.undirected_connected() {
            return Err(Error::Disconnected);
        }
        let edges = self.undirected_edges();
        let mut best: Option<TreeReport> = None;
        let mut chosen = Vec::with_capacity(self.n.saturating_sub(1));
        let mut labels: Vec<usize> = (0..=self.n).collect();
        for_each_spanning_tree(self.n, &edges, 0, &mut chosen, &mut labels, &mut |tree| {
            for root in 1..=self.n {
                let report = evaluate_tree(self.n, root, tree);
                let better = match &best {
                    None => true,
                    Some(b) => (report.d_tilde, &report.tree_edges, report.root) < (b.d_tilde, &b.tree_edges, b.root),
                };
                if better {
                    best = Some(report);
                }
            }
        });
        let witness = best.expect("connected graph has a spanning tree");
        Ok(WReport {
            w: witness.d_tilde,
            witness,
        })
    }
}

fn reach(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut adj = vec![Vec::new(); n + 1];
    for (a, b) in edges {
        adj[a].push(b);
    }
    let mut seen = vec![false; n + 1];
    let mut queue = VecDeque::from([1]);
    seen[1] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen[1..].iter().all(|&s| s)
}

/// Include/exclude backtracking over `edges` in order. `labels` holds a
/// component label per node; merging relabels one component.
fn for_each_spanning_tree(
    n: usize,
    edges: &[(usize, usize)],
    next: usize,
    chosen: &mut Vec<(usize, usize)>,
    labels: &mut Vec<usize>,
    visit: &mut impl FnMut(&[(usize, usize)]),
) {
    let needed = n - 1 - chosen.len();
    if needed == 0 {
        visit(chosen);
        return;
    }
    if edges.len() - next < needed {
        return;
    }
    let (a, b) = edges[next];
    let (la, lb) = (labels[a], labels[b]);
    if la != lb {
        let saved = labels.clone();
        for l in labels.iter_mut() {
            if *l == lb {
                *l = la;
            }
        }
        chosen.push((a, b));
        for_each_spanning_tree(n, edges, next + 1, chosen, labels, visit);
        chosen.pop();
        *labels = saved;
    }
    for_each_spanning_tree(n, edges, next + 1, chosen, labels, visit);
}

/// Depths and per-edge loads of `tree` rooted at `root`.
pub fn evaluate_tree(n: usize, root: usize, tree: &[(usize, usize)]) -> TreeReport {
    let mut adj = vec![Vec::new(); n + 1];
    for &(a, b) in tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![0usize; n + 1];
    let mut depth = vec![usize::MAX; n + 1];
    let mut order = Vec::with_capacity(n);
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    // subtree depth sums, leaves first
    let mut subtree = vec![0u64; n + 1];
    let mut per_edge_load = BTreeMap::new();
    for &u in order.iter().rev() {
        subtree[u] += depth[u] as u64;
        if u != root {
            let p = parent[u];
            subtree[p] += subtree[u];
            per_edge_load.insert((p.min(u), p.max(u)), subtree[u]);
        }
    }
    let mut tree_edges: Vec<_> = tree.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    tree_edges.sort_unstable();
    TreeReport {
        root,
        tree_edges,
        d_tilde: per_edge_load.values().copied().max().unwrap_or(0),
        per_edge_load,
        depths: depth[1..].to_vec(),
    }
}
