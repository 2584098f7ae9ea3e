//! Rooted trees with dense integer vertex ids.
//!
//! The root `a` carries no weight data; everything indexed "over Γ*" uses the
//! star index returned by [`RootedTree::star_index`], which is the position of
//! a vertex among the non-root vertices in increasing id order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("vertex {0} has more than one parent")]
    DuplicateParent(usize),
    #[error("cycle detected through vertex {0}")]
    Cycle(usize),
    #[error("vertex {0} is not connected to the root")]
    Disconnected(usize),
    #[error("vertex id {0} is out of range")]
    InvalidVertex(usize),
    #[error("the root has no path (it is not in Γ*)")]
    RootHasNoPath,
    #[error("declared root {declared} does not match the parent list (root is {actual})")]
    RootMismatch { declared: usize, actual: usize },
    #[error("antichain enumeration stopped after {count} antichains (cap {cap})")]
    CapExceeded { count: usize, cap: usize },
    #[error("antichain is empty or has comparable vertices")]
    NotAnAntichain,
}

/// Immutable rooted tree. Children are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    /// Pre-order traversal starting at the root (children in id order).
    preorder: Vec<usize>,
    /// `subtree_end[v]`: one past the last pre-order position of v's subtree.
    subtree_end: Vec<usize>,
    position: Vec<usize>,
}

impl RootedTree {
    /// Builds a tree from `(child, parent)` pairs. The root is the unique id in
    /// `0..n` that never appears as a child.
    pub fn from_parent_list(pairs: &[(usize, usize)]) -> Result<Self, TreeError> {
        let n = pairs
            .iter()
            .map(|&(c, p)| c.max(p) + 1)
            .max()
            .unwrap_or(1);
        let mut parent = vec![None; n];
        for &(c, p) in pairs {
            if parent[c].is_some() {
                return Err(TreeError::DuplicateParent(c));
            }
            if c == p {
                return Err(TreeError::Cycle(c));
            }
            parent[c] = Some(p);
        }
        let roots: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).collect();
        let root = match roots.as_slice() {
            [] => return Err(TreeError::Cycle(0)),
            [r] => *r,
            [_, second, ..] => return Err(TreeError::Disconnected(*second)),
        };
        Self::assemble(root, parent)
    }

    /// Same as [`from_parent_list`](Self::from_parent_list) but also checks a
    /// declared root id (the JSON tree format carries one).
    pub fn with_root(root: usize, pairs: &[(usize, usize)]) -> Result<Self, TreeError> {
        if pairs.is_empty() {
            if root != 0 {
                return Err(TreeError::InvalidVertex(root));
            }
            return Self::assemble(0, vec![None]);
        }
        let tree = Self::from_parent_list(pairs)?;
        if tree.root != root {
            return Err(TreeError::RootMismatch {
                declared: root,
                actual: tree.root,
            });
        }
        Ok(tree)
    }

    /// Builds from a parent array (`None` only at the root).
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self, TreeError> {
        let pairs: Vec<(usize, usize)> = parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (c, p)))
            .collect();
        if pairs.is_empty() {
            return Self::assemble(0, vec![None; parent.len().max(1)]);
        }
        let tree = Self::from_parent_list(&pairs)?;
        if tree.vertex_count() != parent.len() {
            return Err(TreeError::Disconnected(parent.len() - 1));
        }
        Ok(tree)
    }

    fn assemble(root: usize, parent: Vec<Option<usize>>) -> Result<Self, TreeError> {
        let n = parent.len();
        // every vertex must reach the root
        let mut state = vec![0u8; n]; // 0 unknown, 1 in progress, 2 ok
        state[root] = 2;
        for start in 0..n {
            let mut chain = Vec::new();
            let mut v = start;
            while state[v] == 0 {
                state[v] = 1;
                chain.push(v);
                match parent[v] {
                    Some(p) => v = p,
                    None => return Err(TreeError::Disconnected(v)),
                }
            }
            if state[v] == 1 {
                return Err(TreeError::Cycle(v));
            }
            for c in chain {
                state[c] = 2;
            }
        }

        let mut children = vec![Vec::new(); n];
        for (c, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(c);
            }
        }

        let mut preorder = Vec::with_capacity(n);
        let mut depth = vec![0; n];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            preorder.push(v);
            for &c in children[v].iter().rev() {
                depth[c] = depth[v] + 1;
                stack.push(c);
            }
        }
        let mut position = vec![0; n];
        for (i, &v) in preorder.iter().enumerate() {
            position[v] = i;
        }
        let mut size = vec![1usize; n];
        for &v in preorder.iter().rev() {
            if let Some(p) = parent[v] {
                size[p] += size[v];
            }
        }
        let subtree_end = (0..n).map(|v| position[v] + size[v]).collect();

        Ok(Self {
            root,
            parent,
            children,
            depth,
            preorder,
            subtree_end,
            position,
        })
    }

    pub fn chain(len: usize) -> Self {
        let pairs: Vec<_> = (1..=len).map(|v| (v, v - 1)).collect();
        Self::with_root(0, &pairs).expect("chain is a valid tree")
    }

    pub fn star(leaves: usize) -> Self {
        let pairs: Vec<_> = (1..=leaves).map(|v| (v, 0)).collect();
        Self::with_root(0, &pairs).expect("star is a valid tree")
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    /// `|Γ*|`.
    pub fn star_count(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Vertices in pre-order (root first, parents before children).
    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// Position of `v` among Γ* in increasing id order.
    pub fn star_index(&self, v: usize) -> usize {
        debug_assert!(v != self.root);
        if v < self.root {
            v
        } else {
            v - 1
        }
    }

    /// Inverse of [`star_index`](Self::star_index).
    pub fn star_vertex(&self, i: usize) -> usize {
        if i < self.root {
            i
        } else {
            i + 1
        }
    }

    /// Γ* in increasing id order.
    pub fn star_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(move |&v| v != self.root)
    }

    /// `(child, parent)` pairs in child id order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (c, p)))
            .collect()
    }

    pub fn is_chain(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 1)
    }

    fn check(&self, v: usize) -> Result<(), TreeError> {
        if v >= self.vertex_count() {
            Err(TreeError::InvalidVertex(v))
        } else {
            Ok(())
        }
    }

    /// `s ⪯ t`: s lies on the path from the root to t (inclusive).
    pub fn precedes(&self, s: usize, t: usize) -> bool {
        let ps = self.position[s];
        let pt = self.position[t];
        ps <= pt && pt < self.subtree_end[s]
    }

    /// The path 𝒫_t from the child of the root down to `t`.
    pub fn path(&self, t: usize) -> Result<Vec<usize>, TreeError> {
        self.check(t)?;
        if t == self.root {
            return Err(TreeError::RootHasNoPath);
        }
        let mut path = Vec::with_capacity(self.depth[t]);
        let mut v = t;
        while v != self.root {
            path.push(v);
            v = self.parent[v].expect("non-root vertex has a parent");
        }
        path.reverse();
        Ok(path)
    }

    /// The shadow 𝒮_t (t and all its descendants), sorted by id.
    pub fn shadow(&self, t: usize) -> Result<Vec<usize>, TreeError> {
        self.check(t)?;
        let mut out = self.preorder[self.position[t]..self.subtree_end[t]].to_vec();
        if t == self.root {
            out.retain(|&v| v != self.root);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Pre-order slice of the subtree rooted at `t` (t first).
    pub fn subtree_preorder(&self, t: usize) -> &[usize] {
        &self.preorder[self.position[t]..self.subtree_end[t]]
    }

    /// Restriction to the vertices of depth `<= max_depth`, with the old ids
    /// kept in pre-order relabelled densely. Returns the new tree and the map
    /// new id -> old id.
    pub fn truncate(&self, max_depth: usize) -> (RootedTree, Vec<usize>) {
        let kept: Vec<usize> = (0..self.vertex_count())
            .filter(|&v| self.depth[v] <= max_depth)
            .collect();
        let mut new_id = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in kept.iter().enumerate() {
            new_id[v] = i;
        }
        let parent = kept
            .iter()
            .map(|&v| self.parent[v].map(|p| new_id[p]))
            .collect();
        let tree = Self::from_parents(parent).expect("truncation of a tree is a tree");
        (tree, kept)
    }

    /// Number of nonempty antichains of Γ*, saturating at `u128::MAX`.
    pub fn antichain_count(&self) -> u128 {
        // f(v) counts antichains of the subtree at v including the empty one
        let mut f = vec![1u128; self.vertex_count()];
        for &v in self.preorder.iter().rev() {
            let prod = self.children[v]
                .iter()
                .fold(1u128, |acc, &c| acc.saturating_mul(f[c]));
            f[v] = if v == self.root { prod } else { prod.saturating_add(1) };
        }
        f[self.root].saturating_sub(1)
    }

    /// Enumerates every nonempty antichain of Γ* in a fixed order. After `cap`
    /// antichains the iterator yields one `CapExceeded` error and stops.
    pub fn boundary_antichains(&self, cap: usize) -> AntichainIter<'_> {
        // position 0 is the root; Γ* starts at 1
        let stack = vec![Frame { pos: 1, stage: 0 }];
        AntichainIter {
            tree: self,
            stack,
            chosen: Vec::new(),
            emitted: 0,
            cap,
            done: false,
        }
    }
}

/// A nonempty set of pairwise incomparable vertices of Γ*, sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Antichain(Vec<usize>);

impl Antichain {
    pub fn new(tree: &RootedTree, mut vertices: Vec<usize>) -> Result<Self, TreeError> {
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.is_empty() {
            return Err(TreeError::NotAnAntichain);
        }
        for &v in &vertices {
            tree.check(v)?;
            if v == tree.root() {
                return Err(TreeError::NotAnAntichain);
            }
        }
        for (i, &s) in vertices.iter().enumerate() {
            for &t in &vertices[i + 1..] {
                if tree.precedes(s, t) || tree.precedes(t, s) {
                    return Err(TreeError::NotAnAntichain);
                }
            }
        }
        Ok(Self(vertices))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Membership mask of K = {a} ∪ ⋃_{t∈A} 𝒫_t.
    pub fn induced_subtree(&self, tree: &RootedTree) -> Vec<bool> {
        let mut in_k = vec![false; tree.vertex_count()];
        in_k[tree.root()] = true;
        for &t in &self.0 {
            let mut v = t;
            while !in_k[v] {
                in_k[v] = true;
                v = tree.parent(v).expect("non-root vertex has a parent");
            }
        }
        in_k
    }
}

/// Boundary of a subtree K given as a membership mask: its maximal vertices
/// other than the root.
pub fn subtree_boundary(tree: &RootedTree, in_k: &[bool]) -> Vec<usize> {
    tree.star_vertices()
        .filter(|&v| in_k[v] && tree.children(v).iter().all(|&c| !in_k[c]))
        .collect()
}

/// Membership test for the class 𝒦: K contains the root, is connected
/// (closed under parents), has a boundary inside Γ*, and no boundary vertex
/// has a strict descendant in K.
pub fn is_admissible_subtree(tree: &RootedTree, in_k: &[bool]) -> bool {
    if !in_k[tree.root()] {
        return false;
    }
    let connected = tree
        .star_vertices()
        .all(|v| !in_k[v] || in_k[tree.parent(v).expect("non-root")]);
    if !connected {
        return false;
    }
    let boundary = subtree_boundary(tree, in_k);
    if boundary.is_empty() {
        return false;
    }
    boundary.iter().all(|&s| {
        tree.subtree_preorder(s)
            .iter()
            .skip(1)
            .all(|&d| !in_k[d])
    })
}

struct Frame {
    pos: usize,
    stage: u8,
}

/// Backtracking enumeration over pre-order positions: each vertex is either
/// taken (and its subtree skipped) or left out.
pub struct AntichainIter<'a> {
    tree: &'a RootedTree,
    stack: Vec<Frame>,
    chosen: Vec<usize>,
    emitted: usize,
    cap: usize,
    done: bool,
}

impl Iterator for AntichainIter<'_> {
    type Item = Result<Antichain, TreeError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let m = self.tree.vertex_count();
        while let Some(frame) = self.stack.last_mut() {
            let pos = frame.pos;
            if pos == m {
                self.stack.pop();
                if self.chosen.is_empty() {
                    continue;
                }
                if self.emitted == self.cap {
                    self.done = true;
                    return Some(Err(TreeError::CapExceeded {
                        count: self.emitted,
                        cap: self.cap,
                    }));
                }
                self.emitted += 1;
                let mut vs = self.chosen.clone();
                vs.sort_unstable();
                return Some(Ok(Antichain(vs)));
            }
            let v = self.tree.preorder[pos];
            match frame.stage {
                0 => {
                    frame.stage = 1;
                    self.chosen.push(v);
                    let next = self.tree.subtree_end[v];
                    self.stack.push(Frame { pos: next, stage: 0 });
                }
                1 => {
                    frame.stage = 2;
                    self.chosen.pop();
                    self.stack.push(Frame {
                        pos: pos + 1,
                        stage: 0,
                    });
                }
                _ => {
                    self.stack.pop();
                }
            }
        }
        self.done = true;
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> RootedTree {
        RootedTree::with_root(0, &[(1, 0), (2, 0), (3, 1), (4, 1)]).unwrap()
    }

    fn all(tree: &RootedTree) -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = tree
            .boundary_antichains(usize::MAX)
            .map(|a| a.unwrap().vertices().to_vec())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn builds_small_trees() {
        let t = RootedTree::with_root(0, &[(1, 0)]).unwrap();
        assert_eq!(t.root(), 0);
        assert_eq!(t.children(0), &[1]);

        let chain = RootedTree::from_parent_list(&[(1, 0), (2, 1)]).unwrap();
        assert_eq!(chain.path(2).unwrap(), vec![1, 2]);
        assert!(chain.is_chain());

        let t = four();
        assert_eq!(t.path(4).unwrap(), vec![1, 4]);
        assert_eq!(t.path(3).unwrap(), vec![1, 3]);
        assert_eq!(t.children(1), &[3, 4]);
    }

    #[test]
    fn rejects_bad_parent_lists() {
        assert_eq!(
            RootedTree::from_parent_list(&[(1, 0), (1, 2)]),
            Err(TreeError::DuplicateParent(1))
        );
        assert!(matches!(
            RootedTree::from_parent_list(&[(1, 2), (2, 1), (3, 0)]),
            Err(TreeError::Cycle(_))
        ));
        assert!(matches!(
            RootedTree::from_parent_list(&[(1, 0), (3, 2)]),
            Err(TreeError::Disconnected(_))
        ));
        assert!(matches!(
            RootedTree::with_root(1, &[(1, 0)]),
            Err(TreeError::RootMismatch { .. })
        ));
    }

    #[test]
    fn non_zero_root() {
        let t = RootedTree::from_parent_list(&[(0, 2), (1, 2)]).unwrap();
        assert_eq!(t.root(), 2);
        assert_eq!(t.star_vertices().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(t.star_index(1), 1);
        assert_eq!(t.star_vertex(1), 1);
        let t = RootedTree::from_parent_list(&[(0, 1), (2, 1)]).unwrap();
        assert_eq!(t.star_index(2), 1);
        assert_eq!(t.star_vertex(1), 2);
    }

    #[test]
    fn paths_and_shadows() {
        let chain = RootedTree::chain(2);
        assert_eq!(chain.path(1).unwrap(), vec![1]);
        assert_eq!(chain.shadow(1).unwrap(), vec![1, 2]);
        assert_eq!(chain.shadow(2).unwrap(), vec![2]);
        assert_eq!(four().shadow(1).unwrap(), vec![1, 3, 4]);
        assert_eq!(chain.path(0), Err(TreeError::RootHasNoPath));
        assert_eq!(chain.shadow(7), Err(TreeError::InvalidVertex(7)));
    }

    #[test]
    fn antichains_small() {
        assert_eq!(all(&RootedTree::chain(2)), vec![vec![1], vec![2]]);
        assert_eq!(all(&RootedTree::star(2)), vec![vec![1], vec![1, 2], vec![2]]);
        assert_eq!(all(&RootedTree::chain(1)), vec![vec![1]]);
        // four-vertex tree: {1},{2},{3},{4},{1,2},{2,3},{2,4},{3,4},{2,3,4}
        assert_eq!(all(&four()).len(), 9);
        assert_eq!(four().antichain_count(), 9);
    }

    #[test]
    fn antichain_counts() {
        for n in 1..8 {
            assert_eq!(all(&RootedTree::chain(n)).len(), n);
            assert_eq!(RootedTree::chain(n).antichain_count(), n as u128);
        }
        for k in 1..8 {
            assert_eq!(all(&RootedTree::star(k)).len(), (1 << k) - 1);
        }
    }

    #[test]
    fn cap_is_reported() {
        let star = RootedTree::star(4);
        let items: Vec<_> = star.boundary_antichains(5).collect();
        assert_eq!(items.len(), 6);
        assert_eq!(
            items.last().unwrap().clone().unwrap_err(),
            TreeError::CapExceeded { count: 5, cap: 5 }
        );
    }

    #[test]
    fn antichain_validation() {
        let t = four();
        assert!(Antichain::new(&t, vec![1, 3]).is_err());
        assert!(Antichain::new(&t, vec![]).is_err());
        assert!(Antichain::new(&t, vec![0]).is_err());
        let a = Antichain::new(&t, vec![4, 2]).unwrap();
        assert_eq!(a.vertices(), &[2, 4]);
        let k = a.induced_subtree(&t);
        assert_eq!(k, vec![true, true, true, false, true]);
        assert_eq!(subtree_boundary(&t, &k), vec![2, 4]);
        assert!(is_admissible_subtree(&t, &k));
        // K = {a, 1, 3} with 4 missing is fine; {a, 3} is not connected
        assert!(!is_admissible_subtree(&t, &[true, false, false, true, false]));
    }

    #[test]
    fn truncation() {
        let t = four();
        let (tr, map) = t.truncate(1);
        assert_eq!(tr.vertex_count(), 3);
        assert_eq!(map, vec![0, 1, 2]);
        assert_eq!(tr.height(), 1);
    }
}
