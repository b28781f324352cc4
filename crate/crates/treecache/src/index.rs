//! Incrementally maintained aggregates that let the engine decide in
//! `O(h + max{h, deg}·|X|)` operations with `O(|T|)` memory.
//!
//! Two structures live here, one per request sign:
//!
//! * For every non-cached node `u` the index keeps the counter sum and the
//!   size of the *full non-cached cap* at `u` (all non-cached nodes of `u`'s
//!   subtree). A fetch decision scans the requested node's ancestors from
//!   the root down and picks the first saturated cap.
//! * For every cached node `u` the index keeps an integer-scaled value of
//!   the best-valued tree cap rooted at `u`, where the value of a cap `A`
//!   is `cnt(A) - |A|·alpha + |A|/(|T|+1)`. Everything is scaled by
//!   `|T|+1`, so the stored quantity is `(cnt - |A|·alpha)·(|T|+1) + |A|`:
//!   exact integer arithmetic, never zero, and sign-faithful. An eviction
//!   decision walks to the cached-tree root and, when the stored value is
//!   positive, materializes the cap by descending into positive-valued
//!   children.
//!
//! Counter resets at phase boundaries are handled lazily with a phase stamp,
//! so a phase end costs time proportional to the evicted set, not the tree.

use crate::error::{Error, Result};
use crate::tree::{NodeId, NodeSet, Sign, TreeTopology};

#[derive(Debug, Clone)]
pub struct FastIndex {
    alpha: u64,
    /// `|T| + 1`, the denominator of the fractional tie-break term.
    scale: i64,
    phase: u32,
    cached: Vec<bool>,
    /// Counter sum of the full non-cached cap at each non-cached node.
    agg_cnt: Vec<u64>,
    /// Size of the full non-cached cap at each non-cached node.
    agg_size: Vec<u32>,
    /// Lazy validity stamp for `agg_cnt`/`agg_size`. A stale entry reads as
    /// `(0, subtree_size)`, the phase-start state.
    pos_stamp: Vec<u32>,
    /// Scaled value of the best cap rooted here; valid while cached.
    scaled_val: Vec<i64>,
    /// Sum over cached children of `max(scaled_val, 0)`; valid while cached.
    child_sum: Vec<i64>,
    ops: u64,
}

fn clamped(v: i64) -> i64 {
    v.max(0)
}

impl FastIndex {
    pub fn new(topo: &TreeTopology, alpha: u64) -> FastIndex {
        let n = topo.node_count();
        FastIndex {
            alpha,
            scale: n as i64 + 1,
            phase: 0,
            cached: vec![false; n],
            agg_cnt: vec![0; n],
            agg_size: vec![0; n],
            pos_stamp: vec![u32::MAX; n],
            scaled_val: vec![0; n],
            child_sum: vec![0; n],
            ops: 0,
        }
    }

    /// Basic operations performed so far (ancestor steps, child scans,
    /// materialization visits). Used by the complexity instrumentation.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn is_cached(&self, v: NodeId) -> bool {
        self.cached[v as usize]
    }

    fn pos_agg(&self, topo: &TreeTopology, u: NodeId) -> (u64, u32) {
        if self.pos_stamp[u as usize] == self.phase {
            (self.agg_cnt[u as usize], self.agg_size[u as usize])
        } else {
            (0, topo.subtree_size(u))
        }
    }

    fn touch_pos(&mut self, topo: &TreeTopology, u: NodeId) {
        if self.pos_stamp[u as usize] != self.phase {
            self.agg_cnt[u as usize] = 0;
            self.agg_size[u as usize] = topo.subtree_size(u);
            self.pos_stamp[u as usize] = self.phase;
        }
    }

    /// Folds one charged request into the aggregates. The engine calls this
    /// right after incrementing the node counter and before asking for a
    /// candidate. No-op requests never reach the index.
    pub fn on_charged_request(&mut self, topo: &TreeTopology, v: NodeId, sign: Sign) {
        match sign {
            Sign::Positive => {
                // Ancestors of a non-cached node are all non-cached, and the
                // requested node lies in each of their full caps.
                let mut cur = v;
                loop {
                    self.ops += 1;
                    self.touch_pos(topo, cur);
                    self.agg_cnt[cur as usize] += 1;
                    match topo.parent(cur) {
                        Some(p) => cur = p,
                        None => break,
                    }
                }
            }
            Sign::Negative => {
                // The counter term enters scaled by |T|+1; propagate the
                // clamped delta through cached ancestors.
                let old = self.scaled_val[v as usize];
                self.scaled_val[v as usize] = old + self.scale;
                let mut child_old = old;
                let mut child_new = old + self.scale;
                let mut cur = v;
                self.ops += 1;
                while let Some(p) = topo.parent(cur) {
                    if !self.cached[p as usize] {
                        break;
                    }
                    let delta = clamped(child_new) - clamped(child_old);
                    if delta == 0 {
                        break;
                    }
                    self.ops += 1;
                    child_old = self.scaled_val[p as usize];
                    self.child_sum[p as usize] += delta;
                    self.scaled_val[p as usize] += delta;
                    child_new = self.scaled_val[p as usize];
                    cur = p;
                }
            }
        }
    }

    /// Applies a changeset the engine just committed. Counters of `x` are
    /// already reset; `x` must be exactly the set the engine applied (a full
    /// non-cached cap for a fetch, a cap rooted at a cached-tree root for an
    /// eviction).
    pub fn on_cache_change(&mut self, topo: &TreeTopology, x: &NodeSet, sign: Sign) {
        let mut order: Vec<NodeId> = x.iter().collect();
        match sign {
            Sign::Positive => {
                // Deepest first: by the time a node is processed, its
                // non-cached children (all inside x) have pulled their
                // contributions out, so its residual aggregate is exactly
                // its own pre-reset counter.
                order.sort_by_key(|&v| std::cmp::Reverse(topo.depth(v)));
                for u in order {
                    self.ops += 1;
                    self.touch_pos(topo, u);
                    let residual_cnt = self.agg_cnt[u as usize];
                    debug_assert_eq!(self.agg_size[u as usize], 1);
                    let mut cur = u;
                    while let Some(p) = topo.parent(cur) {
                        self.ops += 1;
                        self.touch_pos(topo, p);
                        self.agg_cnt[p as usize] -= residual_cnt;
                        self.agg_size[p as usize] -= 1;
                        cur = p;
                    }
                    self.cached[u as usize] = true;
                    let mut sum = 0i64;
                    for &c in topo.children(u) {
                        self.ops += 1;
                        if self.cached[c as usize] {
                            sum += clamped(self.scaled_val[c as usize]);
                        }
                    }
                    self.child_sum[u as usize] = sum;
                    self.scaled_val[u as usize] = -(self.alpha as i64) * self.scale + 1 + sum;
                }
            }
            Sign::Negative => {
                // Closest to the root first: ancestors inside x are already
                // non-cached when a node re-enters the positive aggregates.
                order.sort_by_key(|&v| topo.depth(v));
                for u in order {
                    self.ops += 1;
                    self.cached[u as usize] = false;
                    let mut cnt = 0u64;
                    let mut size = 1u32;
                    for &c in topo.children(u) {
                        self.ops += 1;
                        if !self.cached[c as usize] {
                            let (cc, cs) = self.pos_agg(topo, c);
                            cnt += cc;
                            size += cs;
                        }
                    }
                    self.touch_pos(topo, u);
                    self.agg_cnt[u as usize] = cnt;
                    self.agg_size[u as usize] = size;
                    let mut cur = u;
                    while let Some(p) = topo.parent(cur) {
                        self.ops += 1;
                        self.touch_pos(topo, p);
                        self.agg_cnt[p as usize] += cnt;
                        self.agg_size[p as usize] += size;
                        cur = p;
                    }
                }
            }
        }
    }

    /// Phase boundary: the engine evicted everything and reset all counters.
    pub fn on_phase_reset(&mut self, evicted: &NodeSet) {
        self.phase += 1;
        for v in evicted.iter() {
            self.ops += 1;
            self.cached[v as usize] = false;
        }
    }

    /// Scans the requested node's ancestors from the root down and returns
    /// the first saturated full non-cached cap, if any.
    pub fn find_positive_candidate(
        &mut self,
        topo: &TreeTopology,
        v: NodeId,
    ) -> Result<Option<NodeSet>> {
        if self.cached[v as usize] {
            return Err(Error::ContractViolation(format!(
                "find_positive_candidate: node {v} is cached"
            )));
        }
        let path = topo.path_from_root(v);
        self.ops += path.len() as u64;
        for &u in &path {
            self.ops += 1;
            let (cnt, size) = self.pos_agg(topo, u);
            if cnt >= self.alpha * size as u64 {
                return Ok(Some(self.materialize_uncached_cap(topo, u)));
            }
        }
        Ok(None)
    }

    /// Walks to the root of the cached tree containing `v` and returns the
    /// best-valued cap there when it is saturated. A stored value of exactly
    /// zero cannot happen and is reported as an invariant violation.
    pub fn find_negative_candidate(
        &mut self,
        topo: &TreeTopology,
        v: NodeId,
    ) -> Result<Option<NodeSet>> {
        if !self.cached[v as usize] {
            return Err(Error::ContractViolation(format!(
                "find_negative_candidate: node {v} is not cached"
            )));
        }
        let mut u = v;
        while let Some(p) = topo.parent(u) {
            self.ops += 1;
            if !self.cached[p as usize] {
                break;
            }
            u = p;
        }
        let val = self.scaled_val[u as usize];
        if val < 0 {
            return Ok(None);
        }
        if val == 0 {
            return Err(Error::ContractViolation(format!(
                "find_negative_candidate: scaled value 0 at cached root {u}"
            )));
        }
        let mut members = Vec::new();
        let mut stack = vec![u];
        while let Some(n) = stack.pop() {
            self.ops += 1;
            members.push(n);
            for &c in topo.children(n) {
                self.ops += 1;
                if self.cached[c as usize] && self.scaled_val[c as usize] > 0 {
                    stack.push(c);
                }
            }
        }
        members.sort_unstable();
        Ok(Some(NodeSet::from_sorted(members)))
    }

    fn materialize_uncached_cap(&mut self, topo: &TreeTopology, u: NodeId) -> NodeSet {
        let mut members = Vec::new();
        let mut stack = vec![u];
        while let Some(n) = stack.pop() {
            self.ops += 1;
            members.push(n);
            for &c in topo.children(n) {
                self.ops += 1;
                if !self.cached[c as usize] {
                    stack.push(c);
                }
            }
        }
        members.sort_unstable();
        NodeSet::from_sorted(members)
    }

    /// Recomputes both aggregate families from scratch and compares them to
    /// the incrementally maintained state. Test and debugging instrumentation;
    /// `counter` must be the engine's current per-node counter view and
    /// `cached` the engine's cache flags.
    pub fn verify_against(
        &self,
        topo: &TreeTopology,
        cached: &[bool],
        counter: &dyn Fn(NodeId) -> u64,
    ) -> std::result::Result<(), String> {
        let n = topo.node_count();
        if cached.len() != n {
            return Err("cache flag length mismatch".into());
        }
        let mut order: Vec<NodeId> = (0..n as NodeId).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(topo.depth(v)));

        let mut ref_cnt = vec![0u64; n];
        let mut ref_size = vec![0u32; n];
        let mut ref_val = vec![0i64; n];
        for &v in &order {
            let vi = v as usize;
            if self.cached[vi] != cached[vi] {
                return Err(format!("cache flag mismatch at node {v}"));
            }
            if !cached[vi] {
                let mut cnt = counter(v);
                let mut size = 1u32;
                for &c in topo.children(v) {
                    if !cached[c as usize] {
                        cnt += ref_cnt[c as usize];
                        size += ref_size[c as usize];
                    }
                }
                ref_cnt[vi] = cnt;
                ref_size[vi] = size;
                let (got_cnt, got_size) = self.pos_agg(topo, v);
                if (got_cnt, got_size) != (cnt, size) {
                    return Err(format!(
                        "positive aggregate mismatch at node {v}: got ({got_cnt},{got_size}), want ({cnt},{size})"
                    ));
                }
            } else {
                let mut sum = 0i64;
                for &c in topo.children(v) {
                    if cached[c as usize] {
                        sum += clamped(ref_val[c as usize]);
                    }
                }
                let val =
                    (counter(v) as i64 - self.alpha as i64) * self.scale + 1 + sum;
                ref_val[vi] = val;
                if self.scaled_val[vi] != val || self.child_sum[vi] != sum {
                    return Err(format!(
                        "negative aggregate mismatch at node {v}: got ({}, sum {}), want ({val}, sum {sum})",
                        self.scaled_val[vi], self.child_sum[vi]
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Worked example: path 0->1->2, alpha = 2, so scale = 4.
    #[test]
    fn scaled_values_follow_the_recursion() {
        let topo = TreeTopology::path(3);
        let mut idx = FastIndex::new(&topo, 2);
        // fetch the whole path (deepest-first handled internally)
        idx.on_cache_change(&topo, &NodeSet::from_vec(vec![0, 1, 2]), Sign::Positive);
        // all counters zero: val({u}) scaled = (0-2)*4 + 1 = -7 at the leaf,
        // and the clamp keeps the parents at -7 too
        assert_eq!(idx.scaled_val[2], -7);
        assert_eq!(idx.scaled_val[1], -7);
        assert_eq!(idx.scaled_val[0], -7);

        // two charged negative requests at the leaf
        idx.on_charged_request(&topo, 2, Sign::Negative);
        idx.on_charged_request(&topo, 2, Sign::Negative);
        assert_eq!(idx.scaled_val[2], 1); // (2-2)*4 + 1
        assert_eq!(idx.scaled_val[1], -6); // -7 + clamp delta 1
        assert_eq!(idx.scaled_val[0], -6);
        // not saturated at the tree root: no eviction candidate
        assert_eq!(idx.find_negative_candidate(&topo, 2).unwrap(), None);
    }

    #[test]
    fn positive_aggregates_track_ancestors() {
        let topo = TreeTopology::path(3);
        let mut idx = FastIndex::new(&topo, 2);
        idx.on_charged_request(&topo, 2, Sign::Positive);
        for u in 0..3 {
            assert_eq!(idx.pos_agg(&topo, u), (1, 3 - u));
        }
        idx.on_charged_request(&topo, 2, Sign::Positive);
        // caps at 0 and 1 unsaturated, cap at 2 saturated
        let cand = idx.find_positive_candidate(&topo, 2).unwrap();
        assert_eq!(cand, Some(NodeSet::from_vec(vec![2])));
    }

    #[test]
    fn saturated_root_cap_is_returned_whole() {
        let topo = TreeTopology::path(3);
        let mut idx = FastIndex::new(&topo, 2);
        for v in [0, 1, 2] {
            idx.on_charged_request(&topo, v, Sign::Positive);
            idx.on_charged_request(&topo, v, Sign::Positive);
        }
        let cand = idx.find_positive_candidate(&topo, 2).unwrap();
        assert_eq!(cand, Some(NodeSet::from_vec(vec![0, 1, 2])));
    }

    #[test]
    fn eviction_of_saturated_tree() {
        let topo = TreeTopology::path(3);
        let mut idx = FastIndex::new(&topo, 2);
        idx.on_cache_change(&topo, &NodeSet::from_vec(vec![0, 1, 2]), Sign::Positive);
        for v in [2, 2, 1, 1, 0, 0] {
            idx.on_charged_request(&topo, v, Sign::Negative);
        }
        // scaled: leaf 1, mid 2, root 3 -> evict everything
        let cand = idx.find_negative_candidate(&topo, 0).unwrap();
        assert_eq!(cand, Some(NodeSet::from_vec(vec![0, 1, 2])));
    }

    #[test]
    fn fetch_and_evict_roundtrip_keeps_aggregates_consistent() {
        let topo = TreeTopology::path(3);
        let mut idx = FastIndex::new(&topo, 2);
        let counters = |_v: NodeId| 0u64;

        idx.on_cache_change(&topo, &NodeSet::from_vec(vec![2]), Sign::Positive);
        let cached = [false, false, true];
        idx.verify_against(&topo, &cached, &counters).unwrap();
        assert_eq!(idx.pos_agg(&topo, 0), (0, 2));

        idx.on_cache_change(&topo, &NodeSet::from_vec(vec![2]), Sign::Negative);
        let cached = [false, false, false];
        idx.verify_against(&topo, &cached, &counters).unwrap();
        assert_eq!(idx.pos_agg(&topo, 0), (0, 3));
    }

    #[test]
    fn phase_reset_restores_phase_start_state() {
        let topo = TreeTopology::star(3);
        let mut idx = FastIndex::new(&topo, 2);
        idx.on_charged_request(&topo, 1, Sign::Positive);
        idx.on_charged_request(&topo, 1, Sign::Positive);
        idx.on_cache_change(&topo, &NodeSet::from_vec(vec![1]), Sign::Positive);
        idx.on_phase_reset(&NodeSet::from_vec(vec![1]));
        let cached = [false; 4];
        idx.verify_against(&topo, &cached, &|_| 0).unwrap();
        assert_eq!(idx.pos_agg(&topo, 0), (0, 4));
    }
}
