//! Rooted-tree topology and the set predicates the caching model is built on.
//!
//! The cache in this model must always be a *subforest*: a node set closed
//! under taking descendants, i.e. a union of disjoint whole subtrees. Cache
//! modifications are *changesets*: a positive changeset is fetched wholesale
//! and must keep the cache a subforest, a negative changeset is evicted
//! wholesale under the same constraint. This module owns the immutable
//! topology, the `NodeSet` value type, the validity predicates and the
//! exhaustive changeset enumeration used by the reference decision backend
//! and the invariant checkers.

use serde::Serialize;

use crate::error::{Error, Result};

/// Dense node identifier, `0..node_count`.
pub type NodeId = u32;

/// Whether a request charges when the node is absent (positive) or present
/// (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// A single request in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Request {
    pub node: NodeId,
    pub sign: Sign,
}

impl Request {
    pub fn positive(node: NodeId) -> Request {
        Request { node, sign: Sign::Positive }
    }

    pub fn negative(node: NodeId) -> Request {
        Request { node, sign: Sign::Negative }
    }
}

/// Immutable rooted tree with parent/children/depth/height/degree queries.
///
/// Node ids are dense integers `0..node_count` assigned at load time; the
/// root is whatever the input declares. Children lists are ordered by node
/// id so every traversal in the crate is deterministic.
#[derive(Debug, Clone)]
pub struct TreeTopology {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<u32>,
    subtree_size: Vec<u32>,
    root: NodeId,
    height: u32,
    max_degree: u32,
}

impl TreeTopology {
    /// Builds a topology from a parent array (`-1` marks the root).
    ///
    /// Rejects multiple roots, out-of-range parents, self-loops and cycles.
    pub fn from_parents(parents: &[i64]) -> Result<TreeTopology> {
        let n = parents.len();
        if n == 0 {
            return Err(Error::MalformedTree("tree must have at least one node".into()));
        }
        let mut parent: Vec<Option<NodeId>> = Vec::with_capacity(n);
        let mut root = None;
        for (v, &p) in parents.iter().enumerate() {
            if p == -1 {
                if let Some(r) = root {
                    return Err(Error::MalformedTree(format!(
                        "multiple roots: {r} and {v}"
                    )));
                }
                root = Some(v as NodeId);
                parent.push(None);
            } else if p < 0 || p as usize >= n {
                return Err(Error::MalformedTree(format!(
                    "node {v} has out-of-range parent {p}"
                )));
            } else if p as usize == v {
                return Err(Error::MalformedTree(format!("node {v} is its own parent")));
            } else {
                parent.push(Some(p as NodeId));
            }
        }
        let root = root.ok_or_else(|| Error::MalformedTree("no root (-1) found".into()))?;

        let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = parent[v] {
                children[p as usize].push(v as NodeId);
            }
        }
        // children are already ordered by id because v runs in id order

        // BFS from the root assigns depths and detects unreachable nodes
        // (which is how a parent-array cycle manifests).
        let mut depth = vec![u32::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        depth[root as usize] = 0;
        queue.push_back(root);
        let mut seen = 1usize;
        while let Some(v) = queue.pop_front() {
            for &c in &children[v as usize] {
                depth[c as usize] = depth[v as usize] + 1;
                seen += 1;
                queue.push_back(c);
            }
        }
        if seen != n {
            return Err(Error::MalformedTree(
                "cycle detected: not all nodes reachable from the root".into(),
            ));
        }

        let mut subtree_size = vec![1u32; n];
        let order = {
            // reverse BFS order visits children before parents
            let mut order: Vec<NodeId> = (0..n as NodeId).collect();
            order.sort_by_key(|&v| std::cmp::Reverse(depth[v as usize]));
            order
        };
        for &v in &order {
            if let Some(p) = parent[v as usize] {
                subtree_size[p as usize] += subtree_size[v as usize];
            }
        }

        let height = depth.iter().max().copied().unwrap_or(0) + 1;
        let max_degree = children.iter().map(|c| c.len() as u32).max().unwrap_or(0);

        Ok(TreeTopology {
            parent,
            children,
            depth,
            subtree_size,
            root,
            height,
            max_degree,
        })
    }

    /// A path `0 -> 1 -> ... -> n-1` rooted at 0.
    pub fn path(n: usize) -> TreeTopology {
        let parents: Vec<i64> = (0..n).map(|v| v as i64 - 1).collect();
        TreeTopology::from_parents(&parents).expect("path is well formed")
    }

    /// A root (id 0) with `leaves` children.
    pub fn star(leaves: usize) -> TreeTopology {
        let mut parents = vec![-1i64];
        parents.extend(std::iter::repeat(0i64).take(leaves));
        TreeTopology::from_parents(&parents).expect("star is well formed")
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v as usize]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v as usize]
    }

    /// Depth in edges from the root (root has depth 0).
    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v as usize]
    }

    /// Height counted in nodes along the longest root-leaf path.
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Number of nodes in the subtree rooted at `v` (including `v`).
    pub fn subtree_size(&self, v: NodeId) -> u32 {
        self.subtree_size[v as usize]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v as usize].is_empty()
    }

    /// Checks a node id against the topology, as most public entry points do.
    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node: v as u64,
                node_count: self.node_count(),
            })
        }
    }

    /// `a == d` or `a` lies on the path from `d` to the root.
    pub fn is_ancestor_or_self(&self, a: NodeId, d: NodeId) -> bool {
        let mut cur = d;
        loop {
            if cur == a {
                return true;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// The path from the root down to `v`, inclusive.
    pub fn path_from_root(&self, v: NodeId) -> Vec<NodeId> {
        let mut path = Vec::with_capacity(self.depth(v) as usize + 1);
        let mut cur = v;
        loop {
            path.push(cur);
            match self.parent(cur) {
                Some(p) => cur = p,
                None => break,
            }
        }
        path.reverse();
        path
    }

    /// All node ids in order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        0..self.node_count() as NodeId
    }

    /// Nodes of the subtree rooted at `v`, in preorder.
    pub fn subtree_nodes(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.subtree_size(v) as usize);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in self.children(u).iter().rev() {
                stack.push(c);
            }
        }
        out
    }
}

/// A deterministic set of node ids, stored sorted.
///
/// Equality, hashing and iteration order all follow ascending node id, which
/// keeps engine runs and reports reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn empty() -> NodeSet {
        NodeSet(Vec::new())
    }

    pub fn from_vec(mut nodes: Vec<NodeId>) -> NodeSet {
        nodes.sort_unstable();
        nodes.dedup();
        NodeSet(nodes)
    }

    /// Wraps a vector that is already sorted and duplicate-free.
    pub(crate) fn from_sorted(nodes: Vec<NodeId>) -> NodeSet {
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        NodeSet(nodes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        NodeSet::from_vec(v)
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_disjoint_from(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    pub fn is_subset_of(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn symmetric_difference_len(&self, other: &NodeSet) -> usize {
        let (mut i, mut j, mut out) = (0usize, 0usize, 0usize);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out += 1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out += 1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out + (self.0.len() - i) + (other.0.len() - j)
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        NodeSet::from_vec(iter.into_iter().collect())
    }
}

impl std::fmt::Display for NodeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

fn check_set(topo: &TreeTopology, s: &NodeSet) -> Result<()> {
    for v in s.iter() {
        topo.check_node(v)?;
    }
    Ok(())
}

/// True iff every child of a member is a member (descendant closure).
pub fn is_subforest(topo: &TreeTopology, s: &NodeSet) -> Result<bool> {
    check_set(topo, s)?;
    for v in s.iter() {
        for &c in topo.children(v) {
            if !s.contains(c) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff `s` is an upper part of the subtree rooted at `v`: it contains
/// `v`, and with any member the whole path up to `v`.
pub fn is_tree_cap(topo: &TreeTopology, s: &NodeSet, v: NodeId) -> Result<bool> {
    check_set(topo, s)?;
    topo.check_node(v)?;
    if !s.contains(v) {
        return Ok(false);
    }
    for u in s.iter() {
        if u == v {
            continue;
        }
        match topo.parent(u) {
            Some(p) if s.contains(p) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Validates a changeset against the current cache.
///
/// Positive: `x` disjoint from the cache and `cache ∪ x` a subforest.
/// Negative: `x ⊆ cache` and `cache \ x` a subforest. The cache itself must
/// already be a subforest, otherwise this is a contract violation.
pub fn validate_changeset(
    topo: &TreeTopology,
    cache: &NodeSet,
    x: &NodeSet,
    sign: Sign,
) -> Result<bool> {
    check_set(topo, x)?;
    if !is_subforest(topo, cache)? {
        return Err(Error::ContractViolation(
            "validate_changeset: cache is not a subforest".into(),
        ));
    }
    if x.is_empty() {
        return Ok(false);
    }
    match sign {
        Sign::Positive => {
            if !x.is_disjoint_from(cache) {
                return Ok(false);
            }
            is_subforest(topo, &cache.union(x))
        }
        Sign::Negative => {
            if !x.is_subset_of(cache) {
                return Ok(false);
            }
            is_subforest(topo, &cache.difference(x))
        }
    }
}

/// Default node-count bound for the exhaustive enumerations below.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

fn check_enumeration_size(topo: &TreeTopology, limit: usize) -> Result<()> {
    if topo.node_count() > limit {
        Err(Error::SizeLimit {
            nodes: topo.node_count(),
            limit,
        })
    } else {
        Ok(())
    }
}

/// Maximal non-cached tree cap rooted at `u`: all non-cached nodes of the
/// subtree of `u`. Callers guarantee `u` is non-cached.
pub(crate) fn full_uncached_cap(topo: &TreeTopology, cached: &[bool], u: NodeId) -> Vec<NodeId> {
    debug_assert!(!cached[u as usize]);
    let mut out = Vec::new();
    let mut stack = vec![u];
    while let Some(v) = stack.pop() {
        out.push(v);
        for &c in topo.children(v) {
            if !cached[c as usize] {
                stack.push(c);
            }
        }
    }
    out.sort_unstable();
    out
}

/// All shapes a positive changeset can take inside the subtree of non-cached
/// node `n`, including the empty choice: either the whole non-cached cap at
/// `n`, or any union of such shapes over `n`'s non-cached children (with `n`
/// itself left out).
fn positive_shapes(topo: &TreeTopology, cached: &[bool], n: NodeId) -> Vec<Vec<NodeId>> {
    let mut out: Vec<Vec<NodeId>> = vec![Vec::new()];
    for &c in topo.children(n) {
        if cached[c as usize] {
            continue;
        }
        let child_shapes = positive_shapes(topo, cached, c);
        let mut next = Vec::with_capacity(out.len() * child_shapes.len());
        for base in &out {
            for cs in &child_shapes {
                let mut merged = base.clone();
                merged.extend_from_slice(cs);
                next.push(merged);
            }
        }
        out = next;
    }
    out.push(full_uncached_cap(topo, cached, n));
    out
}

/// All tree caps of the cached tree rooted at `n` (each contains `n`).
fn cached_caps(topo: &TreeTopology, cached: &[bool], n: NodeId) -> Vec<Vec<NodeId>> {
    debug_assert!(cached[n as usize]);
    let mut out: Vec<Vec<NodeId>> = vec![vec![n]];
    for &c in topo.children(n) {
        if !cached[c as usize] {
            continue;
        }
        let mut child_caps = cached_caps(topo, cached, c);
        child_caps.push(Vec::new());
        let mut next = Vec::with_capacity(out.len() * child_caps.len());
        for base in &out {
            for cs in &child_caps {
                let mut merged = base.clone();
                merged.extend_from_slice(cs);
                next.push(merged);
            }
        }
        out = next;
    }
    out
}

/// Root of the cached tree containing `v` (walk up while the parent stays
/// cached). Callers guarantee `v` is cached.
pub(crate) fn cached_tree_root(topo: &TreeTopology, cached: &[bool], v: NodeId) -> NodeId {
    debug_assert!(cached[v as usize]);
    let mut cur = v;
    while let Some(p) = topo.parent(cur) {
        if !cached[p as usize] {
            break;
        }
        cur = p;
    }
    cur
}

/// Roots of all cached trees, ascending.
pub(crate) fn cached_tree_roots(topo: &TreeTopology, cached: &[bool]) -> Vec<NodeId> {
    topo.nodes()
        .filter(|&v| {
            cached[v as usize]
                && topo
                    .parent(v)
                    .map_or(true, |p| !cached[p as usize])
        })
        .collect()
}

fn sorted_sets(mut raw: Vec<Vec<NodeId>>) -> Vec<NodeSet> {
    for s in raw.iter_mut() {
        s.sort_unstable();
    }
    raw.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    raw.dedup();
    raw.into_iter().map(NodeSet::from_sorted).collect()
}

pub(crate) fn enumerate_valid_changesets_flags(
    topo: &TreeTopology,
    cached: &[bool],
    sign: Sign,
    must_contain: NodeId,
) -> Vec<NodeSet> {
    let raw: Vec<Vec<NodeId>> = match sign {
        Sign::Positive => {
            if cached[must_contain as usize] || cached[topo.root() as usize] {
                return Vec::new();
            }
            // Every ancestor of a non-cached node is non-cached, so the
            // non-cached nodes form one cap at the tree root and any valid
            // positive changeset is a union of full non-cached caps at an
            // antichain of roots. The component holding `must_contain` is the
            // full cap at one of its ancestors; the rest is any shape hanging
            // off the strict-ancestor branches outside that component.
            let path = topo.path_from_root(must_contain);
            let mut out = Vec::new();
            for (i, &a) in path.iter().enumerate() {
                let base = full_uncached_cap(topo, cached, a);
                let mut combos: Vec<Vec<NodeId>> = vec![base];
                for &p in &path[..i] {
                    let on_path_child = path[path.iter().position(|&x| x == p).unwrap() + 1];
                    for &c in topo.children(p) {
                        if c == on_path_child || cached[c as usize] {
                            continue;
                        }
                        let shapes = positive_shapes(topo, cached, c);
                        let mut next = Vec::with_capacity(combos.len() * shapes.len());
                        for b in &combos {
                            for s in &shapes {
                                let mut merged = b.clone();
                                merged.extend_from_slice(s);
                                next.push(merged);
                            }
                        }
                        combos = next;
                    }
                }
                out.extend(combos);
            }
            out
        }
        Sign::Negative => {
            if !cached[must_contain as usize] {
                return Vec::new();
            }
            let home_root = cached_tree_root(topo, cached, must_contain);
            let mut combos: Vec<Vec<NodeId>> = cached_caps(topo, cached, home_root)
                .into_iter()
                .filter(|cap| cap.contains(&must_contain))
                .collect();
            for r in cached_tree_roots(topo, cached) {
                if r == home_root {
                    continue;
                }
                let mut caps = cached_caps(topo, cached, r);
                caps.push(Vec::new());
                let mut next = Vec::with_capacity(combos.len() * caps.len());
                for b in &combos {
                    for cap in &caps {
                        let mut merged = b.clone();
                        merged.extend_from_slice(cap);
                        next.push(merged);
                    }
                }
                combos = next;
            }
            combos
        }
    };
    sorted_sets(raw)
}

/// All valid changesets of the given sign that contain `must_contain`,
/// ordered by size then lexicographically.
///
/// This is the exhaustive reference used by the naive decision backend and
/// the cross-checking test suites; it refuses trees larger than `limit`
/// (default [`DEFAULT_ENUMERATION_LIMIT`]) because the result can be
/// exponential in the tree size.
pub fn enumerate_valid_changesets(
    topo: &TreeTopology,
    cache: &NodeSet,
    sign: Sign,
    must_contain: NodeId,
    limit: Option<usize>,
) -> Result<Vec<NodeSet>> {
    check_enumeration_size(topo, limit.unwrap_or(DEFAULT_ENUMERATION_LIMIT))?;
    topo.check_node(must_contain)?;
    if !is_subforest(topo, cache)? {
        return Err(Error::ContractViolation(
            "enumerate_valid_changesets: cache is not a subforest".into(),
        ));
    }
    let mut cached = vec![false; topo.node_count()];
    for v in cache.iter() {
        cached[v as usize] = true;
    }
    Ok(enumerate_valid_changesets_flags(topo, &cached, sign, must_contain))
}

/// Every valid changeset of the given sign for the cache, regardless of
/// membership. Used by the exhaustive strict-unsaturation checker.
pub(crate) fn enumerate_all_valid_changesets_flags(
    topo: &TreeTopology,
    cached: &[bool],
    sign: Sign,
) -> Vec<NodeSet> {
    let raw: Vec<Vec<NodeId>> = match sign {
        Sign::Positive => {
            if cached[topo.root() as usize] {
                return Vec::new();
            }
            positive_shapes(topo, cached, topo.root())
                .into_iter()
                .filter(|s| !s.is_empty())
                .collect()
        }
        Sign::Negative => {
            let mut combos: Vec<Vec<NodeId>> = vec![Vec::new()];
            for r in cached_tree_roots(topo, cached) {
                let mut caps = cached_caps(topo, cached, r);
                caps.push(Vec::new());
                let mut next = Vec::with_capacity(combos.len() * caps.len());
                for b in &combos {
                    for cap in &caps {
                        let mut merged = b.clone();
                        merged.extend_from_slice(cap);
                        next.push(merged);
                    }
                }
                combos = next;
            }
            combos.retain(|s| !s.is_empty());
            combos
        }
    };
    sorted_sets(raw)
}

/// All tree caps of `set` (assumed to be a single tree cap rooted at `root`),
/// each containing `root`. Used by the field-analysis snapshot checks.
pub(crate) fn tree_caps_within(
    topo: &TreeTopology,
    set: &NodeSet,
    root: NodeId,
) -> Vec<NodeSet> {
    fn rec(topo: &TreeTopology, set: &NodeSet, n: NodeId) -> Vec<Vec<NodeId>> {
        let mut out: Vec<Vec<NodeId>> = vec![vec![n]];
        for &c in topo.children(n) {
            if !set.contains(c) {
                continue;
            }
            let mut child_caps = rec(topo, set, c);
            child_caps.push(Vec::new());
            let mut next = Vec::with_capacity(out.len() * child_caps.len());
            for base in &out {
                for cs in &child_caps {
                    let mut merged = base.clone();
                    merged.extend_from_slice(cs);
                    next.push(merged);
                }
            }
            out = next;
        }
        out
    }
    sorted_sets(rec(topo, set, root))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[NodeId]) -> NodeSet {
        NodeSet::from_vec(ids.to_vec())
    }

    /// r(0) -> a(1) -> b(2)
    fn path3() -> TreeTopology {
        TreeTopology::path(3)
    }

    /// root 0 with leaves 1, 2, 3
    fn star3() -> TreeTopology {
        TreeTopology::star(3)
    }

    #[test]
    fn topology_metrics() {
        let t = path3();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.root(), 0);
        assert_eq!(t.height(), 3);
        assert_eq!(t.max_degree(), 1);
        assert_eq!(t.depth(2), 2);
        assert_eq!(t.subtree_size(0), 3);

        let s = star3();
        assert_eq!(s.height(), 2);
        assert_eq!(s.max_degree(), 3);
    }

    #[test]
    fn malformed_trees_rejected() {
        assert!(TreeTopology::from_parents(&[]).is_err());
        assert!(TreeTopology::from_parents(&[-1, -1]).is_err()); // two roots
        assert!(TreeTopology::from_parents(&[0]).is_err()); // self loop
        assert!(TreeTopology::from_parents(&[-1, 2, 1]).is_err()); // cycle 1<->2
        assert!(TreeTopology::from_parents(&[-1, 5]).is_err()); // out of range
    }

    #[test]
    fn subforest_basics() {
        let t = path3();
        assert!(is_subforest(&t, &set(&[2])).unwrap()); // leaf alone
        assert!(!is_subforest(&t, &set(&[1])).unwrap()); // child 2 missing
        assert!(is_subforest(&t, &NodeSet::empty()).unwrap());
        assert!(is_subforest(&t, &set(&[0, 1, 2])).unwrap());

        let s = TreeTopology::star(3);
        assert!(is_subforest(&s, &set(&[1, 3])).unwrap()); // two leaves

        assert!(matches!(
            is_subforest(&t, &set(&[7])),
            Err(Error::InvalidNode { .. })
        ));
    }

    #[test]
    fn tree_cap_basics() {
        let t = path3();
        assert!(is_tree_cap(&t, &set(&[0, 1]), 0).unwrap());
        assert!(!is_tree_cap(&t, &set(&[0, 2]), 0).unwrap()); // path broken at 1
        let s = TreeTopology::star(2);
        assert!(is_tree_cap(&s, &set(&[0, 1]), 0).unwrap());
        assert!(!is_tree_cap(&s, &set(&[1]), 0).unwrap()); // cap root missing
    }

    #[test]
    fn changeset_validation() {
        let t = path3();
        // fetching {0,1} onto {2} completes the path
        assert!(validate_changeset(&t, &set(&[2]), &set(&[0, 1]), Sign::Positive).unwrap());
        // evicting {2} from {1,2} strands node 1
        assert!(!validate_changeset(&t, &set(&[1, 2]), &set(&[2]), Sign::Negative).unwrap());
        // fetching a leaf onto the empty cache
        assert!(validate_changeset(&t, &NodeSet::empty(), &set(&[2]), Sign::Positive).unwrap());
        // empty changeset is never valid
        assert!(!validate_changeset(&t, &NodeSet::empty(), &NodeSet::empty(), Sign::Positive)
            .unwrap());
        // non-subforest cache is a contract violation
        assert!(matches!(
            validate_changeset(&t, &set(&[1]), &set(&[2]), Sign::Positive),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn enumerate_positive_on_path() {
        let t = path3();
        let got = enumerate_valid_changesets(&t, &NodeSet::empty(), Sign::Positive, 2, None)
            .unwrap();
        assert_eq!(got, vec![set(&[2]), set(&[1, 2]), set(&[0, 1, 2])]);
    }

    #[test]
    fn enumerate_negative_on_path() {
        let t = path3();
        let cache = set(&[0, 1, 2]);
        let got = enumerate_valid_changesets(&t, &cache, Sign::Negative, 0, None).unwrap();
        assert_eq!(got, vec![set(&[0]), set(&[0, 1]), set(&[0, 1, 2])]);
        let single = TreeTopology::path(1);
        let got = enumerate_valid_changesets(&single, &set(&[0]), Sign::Negative, 0, None)
            .unwrap();
        assert_eq!(got, vec![set(&[0])]);
    }

    #[test]
    fn enumerate_positive_includes_multi_component_sets() {
        // star with leaves 1,2,3: {1,3} is a valid positive changeset even
        // though it is not a single tree cap
        let s = star3();
        let got = enumerate_valid_changesets(&s, &NodeSet::empty(), Sign::Positive, 1, None)
            .unwrap();
        assert!(got.contains(&set(&[1, 3])));
        assert!(got.contains(&set(&[1])));
        assert!(got.contains(&set(&[0, 1, 2, 3])));
        assert!(!got.contains(&set(&[0, 1]))); // root without all leaves
        for x in &got {
            assert!(validate_changeset(&s, &NodeSet::empty(), x, Sign::Positive).unwrap());
        }
    }

    #[test]
    fn enumeration_size_guard() {
        let t = TreeTopology::path(25);
        assert!(matches!(
            enumerate_valid_changesets(&t, &NodeSet::empty(), Sign::Positive, 0, None),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn tree_caps_within_changeset() {
        let t = path3();
        let caps = tree_caps_within(&t, &set(&[0, 1, 2]), 0);
        assert_eq!(caps, vec![set(&[0]), set(&[0, 1]), set(&[0, 1, 2])]);
    }

    #[test]
    fn node_set_ops() {
        let a = set(&[1, 3, 5]);
        let b = set(&[3, 4]);
        assert_eq!(a.union(&b), set(&[1, 3, 4, 5]));
        assert_eq!(a.difference(&b), set(&[1, 5]));
        assert_eq!(a.symmetric_difference_len(&b), 3);
        assert!(set(&[3]).is_subset_of(&a));
        assert!(!a.is_disjoint_from(&b));
        assert_eq!(format!("{}", a), "{1,3,5}");
    }
}
