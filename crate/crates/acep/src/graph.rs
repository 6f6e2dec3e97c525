//! Labeled digraphs and Stallings automata: folding, subgroup graphs,
//! cores, free bases, membership, and subgroup conjugacy.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::word::{Alphabet, Letter, Word};
use crate::Error;

/// Directed edge labeled by a generator index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub origin: usize,
    pub terminus: usize,
    pub label: usize,
}

/// A directed graph with edges labeled by generators. Vertices are dense
/// indices `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XDigraph {
    rank: usize,
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl XDigraph {
    pub fn new(rank: usize, vertex_count: usize) -> XDigraph {
        XDigraph { rank, vertex_count, edges: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn add_vertex(&mut self) -> usize {
        self.vertex_count += 1;
        self.vertex_count - 1
    }

    pub fn add_edge(&mut self, origin: usize, terminus: usize, label: usize) {
        assert!(origin < self.vertex_count && terminus < self.vertex_count);
        assert!(label < self.rank);
        self.edges.push(Edge { origin, terminus, label });
    }

    /// First Betti number `|E| - |V| + components`.
    pub fn rank_of_fundamental_group(&self) -> usize {
        let comps = self.component_count();
        (self.edges.len() + comps).saturating_sub(self.vertex_count)
    }

    /// Total degree per vertex; a loop contributes 2.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count];
        for e in &self.edges {
            deg[e.origin] += 1;
            deg[e.terminus] += 1;
        }
        deg
    }

    fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.origin].push(e.terminus);
            adj[e.terminus].push(e.origin);
        }
        adj
    }

    /// Connected components as vertex lists, ignoring edge directions.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.undirected_adjacency();
        let mut seen = vec![false; self.vertex_count];
        let mut out = Vec::new();
        for start in 0..self.vertex_count {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &u in &adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.components().len()
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Undirected BFS distances from `start`; `None` marks unreachable.
    pub fn bfs_distances(&self, start: usize) -> Vec<Option<usize>> {
        let adj = self.undirected_adjacency();
        let mut dist = vec![None; self.vertex_count];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &u in &adj[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Induced subgraph on `keep`, with vertices renumbered in order.
    /// Returns the subgraph and the map from new to old vertex ids.
    pub fn induced(&self, keep: &[bool]) -> (XDigraph, Vec<usize>) {
        assert_eq!(keep.len(), self.vertex_count);
        let old_of_new: Vec<usize> =
            (0..self.vertex_count).filter(|&v| keep[v]).collect();
        let mut new_of_old = vec![usize::MAX; self.vertex_count];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old] = new;
        }
        let mut g = XDigraph::new(self.rank, old_of_new.len());
        for e in &self.edges {
            if keep[e.origin] && keep[e.terminus] {
                g.add_edge(new_of_old[e.origin], new_of_old[e.terminus], e.label);
            }
        }
        (g, old_of_new)
    }

    /// Repeatedly strips degree-1 vertices; no vertex is exempt.
    pub fn stripped_to_core(&self) -> XDigraph {
        let mut g = self.clone();
        loop {
            let deg = g.degrees();
            let keep: Vec<bool> = deg.iter().map(|&d| d != 1).collect();
            if keep.iter().all(|&k| k) {
                return g;
            }
            g = g.induced(&keep).0;
        }
    }

    /// DOT rendering; the basepoint, when given, is drawn double-circled.
    /// `names` overrides vertex labels (used for pair-labeled product graphs).
    pub fn to_dot(
        &self,
        alphabet: &Alphabet,
        basepoint: Option<usize>,
        names: Option<&[String]>,
    ) -> String {
        let mut out = String::from("digraph stallings {\n");
        for v in 0..self.vertex_count {
            let label = match names {
                Some(ns) => ns[v].clone(),
                None => v.to_string(),
            };
            let shape = if Some(v) == basepoint { "doublecircle" } else { "circle" };
            out.push_str(&format!("  v{v} [label=\"{label}\", shape={shape}];\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -> v{} [label=\"{}\"];\n",
                e.origin,
                e.terminus,
                alphabet.symbol(e.label)
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// The Stallings graph of a finitely generated subgroup: a folded,
/// connected, base-pointed labeled digraph whose reduced basepoint cycles
/// spell exactly the subgroup. Non-basepoint vertices have degree at
/// least 2; the basepoint alone may have degree 0 or 1.
#[derive(Clone, Debug)]
pub struct StallingsGraph {
    graph: XDigraph,
    basepoint: usize,
    // folded adjacency: per vertex and generator, at most one edge each way
    out: Vec<Vec<Option<(usize, usize)>>>, // (target vertex, edge id)
    inn: Vec<Vec<Option<(usize, usize)>>>, // (source vertex, edge id)
}

impl StallingsGraph {
    /// Graph of the trivial subgroup: one vertex, no edges.
    pub fn trivial(rank: usize) -> StallingsGraph {
        fold(XDigraph::new(rank, 1), 0)
    }

    /// Wraps a graph already folded and connected without trimming.
    /// Covering graphs need this: their fibers over a degree-1 basepoint
    /// must survive.
    pub(crate) fn from_folded(graph: XDigraph, basepoint: usize) -> StallingsGraph {
        assert!(basepoint < graph.vertex_count());
        let mut out = vec![vec![None; graph.rank]; graph.vertex_count];
        let mut inn = vec![vec![None; graph.rank]; graph.vertex_count];
        for (id, e) in graph.edges.iter().enumerate() {
            assert!(out[e.origin][e.label].is_none(), "graph is not folded");
            assert!(inn[e.terminus][e.label].is_none(), "graph is not folded");
            out[e.origin][e.label] = Some((e.terminus, id));
            inn[e.terminus][e.label] = Some((e.origin, id));
        }
        assert!(graph.is_connected());
        StallingsGraph { graph, basepoint, out, inn }
    }

    pub fn graph(&self) -> &XDigraph {
        &self.graph
    }

    pub fn rank(&self) -> usize {
        self.graph.rank
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edges.len()
    }

    /// Rank of the subgroup: `|E| - |V| + 1`.
    pub fn subgroup_rank(&self) -> usize {
        self.graph.edges.len() + 1 - self.graph.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.graph.edges
    }

    /// Outgoing edge with the given label, if present.
    pub fn out_edge(&self, v: usize, label: usize) -> Option<(usize, usize)> {
        self.out[v][label]
    }

    /// Incoming edge with the given label, if present.
    pub fn in_edge(&self, v: usize, label: usize) -> Option<(usize, usize)> {
        self.inn[v][label]
    }

    /// Single step from `v` reading `letter`; positive letters traverse
    /// forward, negative letters traverse an incoming edge backward.
    pub fn step(&self, v: usize, letter: Letter) -> Option<(usize, usize)> {
        if letter.positive {
            self.out[v][letter.generator]
        } else {
            self.inn[v][letter.generator]
        }
    }

    /// Endpoint of the unique path from `v` labeled `w`, or `None` when no
    /// such path exists.
    pub fn trace(&self, v: usize, w: &Word) -> Option<usize> {
        assert!(v < self.vertex_count(), "invalid vertex id {v}");
        let mut cur = v;
        for &letter in w.letters() {
            cur = self.step(cur, letter)?.0;
        }
        Some(cur)
    }

    /// Like `trace` but also reports the edges traversed and their
    /// directions.
    pub fn trace_path(&self, v: usize, w: &Word) -> Option<(usize, Vec<(usize, bool)>)> {
        assert!(v < self.vertex_count(), "invalid vertex id {v}");
        let mut cur = v;
        let mut path = Vec::with_capacity(w.len());
        for &letter in w.letters() {
            let (next, edge) = self.step(cur, letter)?;
            path.push((edge, letter.positive));
            cur = next;
        }
        Some((cur, path))
    }

    /// Membership: `w` lies in the subgroup iff it traces a basepoint cycle.
    pub fn member(&self, w: &Word) -> bool {
        self.trace(self.basepoint, w) == Some(self.basepoint)
    }

    /// Vertices surviving the iterated strip of degree-1 vertices. The
    /// basepoint is not exempt here; only cycles survive.
    pub fn core_mask(&self) -> Vec<bool> {
        let mut keep = vec![true; self.vertex_count()];
        loop {
            let mut deg = vec![0usize; self.vertex_count()];
            for e in &self.graph.edges {
                if keep[e.origin] && keep[e.terminus] {
                    deg[e.origin] += 1;
                    deg[e.terminus] += 1;
                }
            }
            let mut changed = false;
            for v in 0..self.vertex_count() {
                if keep[v] && deg[v] == 1 {
                    keep[v] = false;
                    changed = true;
                }
            }
            if !changed {
                return keep;
            }
        }
    }

    /// The core `Type(Γ)`: the graph with its basepoint tail stripped.
    pub fn core(&self) -> XDigraph {
        let mask = self.core_mask();
        if mask.iter().all(|&k| k) {
            return self.graph.clone();
        }
        self.graph.induced(&mask).0
    }

    /// Shortest path label from `from` to `to`, traversing edges both ways.
    pub fn path_label(&self, from: usize, to: usize) -> Option<Word> {
        let mut prev: Vec<Option<(usize, Letter)>> = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut letters = Vec::new();
                let mut cur = v;
                while cur != from {
                    let (p, letter) = prev[cur].unwrap();
                    letters.push(letter);
                    cur = p;
                }
                letters.reverse();
                return Some(Word::reduce(letters));
            }
            for g in 0..self.rank() {
                for positive in [true, false] {
                    let letter = Letter::new(g, positive);
                    if let Some((u, _)) = self.step(v, letter) {
                        if !seen[u] {
                            seen[u] = true;
                            prev[u] = Some((v, letter));
                            queue.push_back(u);
                        }
                    }
                }
            }
        }
        None
    }

    /// Enumerates the reduced cycle labels at `v` of length at most
    /// `max_len`, i.e. the subgroup elements read off at that vertex.
    pub fn cycles_at(&self, v: usize, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        // stack of (vertex, last edge id, letters so far)
        let mut stack: Vec<(usize, Option<usize>, Vec<Letter>)> = vec![(v, None, Vec::new())];
        while let Some((cur, last_edge, letters)) = stack.pop() {
            if cur == v && !letters.is_empty() {
                out.push(Word::from_reduced_letters(letters.clone()));
            }
            if letters.len() == max_len {
                continue;
            }
            for g in 0..self.rank() {
                for positive in [true, false] {
                    let letter = Letter::new(g, positive);
                    if let Some((next, edge)) = self.step(cur, letter) {
                        if last_edge == Some(edge)
                            && letters.last().map(|l| l.is_inverse_of(letter)) == Some(true)
                        {
                            continue; // immediate backtrack
                        }
                        let mut ls = letters.clone();
                        ls.push(letter);
                        stack.push((next, Some(edge), ls));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn to_dot(&self, alphabet: &Alphabet) -> String {
        self.graph.to_dot(alphabet, Some(self.basepoint), None)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // keep the smaller root for deterministic compaction
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Stallings folding: identifies vertices joined by equal-label edges from
/// a common endpoint until the graph is deterministic in both directions,
/// then trims degree-1 non-basepoint vertices.
pub fn fold(g: XDigraph, basepoint: usize) -> StallingsGraph {
    assert!(basepoint < g.vertex_count);
    let mut uf = UnionFind::new(g.vertex_count);
    // worklist-free fixpoint: rescan after every merge; folding is confluent
    loop {
        let mut out_seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut in_seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut merged = false;
        for e in &g.edges {
            let o = uf.find(e.origin);
            let t = uf.find(e.terminus);
            if let Some(&t2) = out_seen.get(&(o, e.label)) {
                if t2 != t {
                    uf.union(t, t2);
                    merged = true;
                    break;
                }
            } else {
                out_seen.insert((o, e.label), t);
            }
            if let Some(&o2) = in_seen.get(&(t, e.label)) {
                if o2 != o {
                    uf.union(o, o2);
                    merged = true;
                    break;
                }
            } else {
                in_seen.insert((t, e.label), o);
            }
        }
        if !merged {
            break;
        }
    }

    // compact classes in vertex order
    let mut class_of = vec![usize::MAX; g.vertex_count];
    let mut count = 0;
    for v in 0..g.vertex_count {
        let root = uf.find(v);
        if class_of[root] == usize::MAX {
            class_of[root] = count;
            count += 1;
        }
        class_of[v] = class_of[root];
    }
    let mut edges: Vec<Edge> = g
        .edges
        .iter()
        .map(|e| Edge {
            origin: class_of[e.origin],
            terminus: class_of[e.terminus],
            label: e.label,
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let mut folded = XDigraph { rank: g.rank, vertex_count: count, edges };
    let mut base = class_of[basepoint];

    // trim degree-1 vertices away from the basepoint
    loop {
        let deg = folded.degrees();
        let keep: Vec<bool> =
            (0..folded.vertex_count).map(|v| v == base || deg[v] > 1).collect();
        if keep.iter().all(|&k| k) {
            break;
        }
        let (g2, old_of_new) = folded.induced(&keep);
        let mut new_of_old = vec![usize::MAX; folded.vertex_count];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old] = new;
        }
        base = new_of_old[base];
        folded = g2;
    }

    let mut out = vec![vec![None; folded.rank]; folded.vertex_count];
    let mut inn = vec![vec![None; folded.rank]; folded.vertex_count];
    for (id, e) in folded.edges.iter().enumerate() {
        assert!(out[e.origin][e.label].is_none(), "folding left an out-clash");
        assert!(inn[e.terminus][e.label].is_none(), "folding left an in-clash");
        out[e.origin][e.label] = Some((e.terminus, id));
        inn[e.terminus][e.label] = Some((e.origin, id));
    }
    let sg = StallingsGraph { graph: folded, basepoint: base, out, inn };
    debug_assert!(sg.graph.is_connected());
    sg
}

/// Builds the Stallings graph of the subgroup generated by the given
/// reduced words: a wedge of petals at the basepoint, folded. The empty
/// generator list yields the one-vertex graph of the trivial subgroup.
pub fn build_stallings(rank: usize, generators: &[Word]) -> StallingsGraph {
    for g in generators {
        assert!(
            g.max_generator().map_or(true, |m| m < rank),
            "generator uses a letter outside the alphabet"
        );
    }
    let mut g = XDigraph::new(rank, 1);
    for word in generators {
        if word.is_empty() {
            continue;
        }
        let mut cur = 0;
        let n = word.len();
        for (i, &letter) in word.letters().iter().enumerate() {
            let next = if i + 1 == n { 0 } else { g.add_vertex() };
            if letter.positive {
                g.add_edge(cur, next, letter.generator);
            } else {
                g.add_edge(next, cur, letter.generator);
            }
            cur = next;
        }
    }
    fold(g, 0)
}

/// Free basis of the subgroup read off a spanning tree: one word per
/// non-tree edge.
#[derive(Clone, Debug)]
pub struct SubgroupBasis {
    /// `true` at edge ids that belong to the spanning tree.
    pub spanning_tree: Vec<bool>,
    /// `h_e = P(o(e)) · label(e) · P(t(e))⁻¹` per non-tree edge.
    pub basis_words: Vec<Word>,
    /// Edge id of each basis word.
    pub basis_edges: Vec<usize>,
    /// Basis index per edge id; `None` on tree edges.
    pub basis_of_edge: Vec<Option<usize>>,
    /// Tree path label from the basepoint to each vertex.
    pub vertex_paths: Vec<Word>,
}

impl StallingsGraph {
    /// Spanning tree by BFS from the basepoint with edges ordered by
    /// (generator index, direction); deterministic for reproducible bases.
    pub fn basis(&self) -> SubgroupBasis {
        let n = self.vertex_count();
        let mut tree = vec![false; self.edge_count()];
        let mut parent: Vec<Option<(usize, Letter)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[self.basepoint] = true;
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(v) = queue.pop_front() {
            for g in 0..self.rank() {
                for positive in [true, false] {
                    let letter = Letter::new(g, positive);
                    if let Some((u, edge)) = self.step(v, letter) {
                        if !seen[u] {
                            seen[u] = true;
                            tree[edge] = true;
                            parent[u] = Some((v, letter));
                            queue.push_back(u);
                        }
                    }
                }
            }
        }
        let mut vertex_paths = vec![Word::empty(); n];
        // parents are discovered in BFS order, so a simple sweep suffices
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| self.tree_depth(&parent, v));
        for v in order {
            if let Some((p, letter)) = parent[v] {
                vertex_paths[v] = vertex_paths[p].concat(&Word::from_letter(letter));
            }
        }
        let mut basis_words = Vec::new();
        let mut basis_edges = Vec::new();
        let mut basis_of_edge = vec![None; self.edge_count()];
        for (id, e) in self.graph.edges.iter().enumerate() {
            if tree[id] {
                continue;
            }
            let h = Word::product([
                &vertex_paths[e.origin],
                &Word::from_letter(Letter::new(e.label, true)),
                &vertex_paths[e.terminus].inverse(),
            ]);
            basis_of_edge[id] = Some(basis_words.len());
            basis_words.push(h);
            basis_edges.push(id);
        }
        debug_assert_eq!(basis_words.len(), self.subgroup_rank());
        SubgroupBasis { spanning_tree: tree, basis_words, basis_edges, basis_of_edge, vertex_paths }
    }

    fn tree_depth(&self, parent: &[Option<(usize, Letter)>], mut v: usize) -> usize {
        let mut d = 0;
        while let Some((p, _)) = parent[v] {
            v = p;
            d += 1;
        }
        d
    }

    /// Expresses a subgroup element over the spanning-tree basis: tracing
    /// `w` from the basepoint and emitting one basis letter per non-tree
    /// edge crossed. `None` when `w` is not a member.
    pub fn rewrite_in_basis(&self, basis: &SubgroupBasis, w: &Word) -> Option<Vec<(usize, bool)>> {
        let (end, path) = self.trace_path(self.basepoint, w)?;
        if end != self.basepoint {
            return None;
        }
        let mut expr = Vec::new();
        for (edge, forward) in path {
            if let Some(index) = basis.basis_of_edge[edge] {
                expr.push((index, forward));
            }
        }
        Some(expr)
    }
}

/// A basis expression as a word over a synthetic alphabet of basis letters.
/// Tracing a reduced cycle never crosses the same non-tree edge in opposite
/// directions consecutively, so the expression is already freely reduced.
pub fn basis_expr_word(expr: &[(usize, bool)]) -> Word {
    let w = Word::reduce(expr.iter().map(|&(i, s)| Letter::new(i, s)));
    debug_assert_eq!(w.len(), expr.len());
    w
}

/// Substitutes basis words into an expression and reduces.
pub fn basis_expr_eval(expr: &[(usize, bool)], basis_words: &[Word]) -> Word {
    let parts: Vec<Word> = expr
        .iter()
        .map(|&(i, positive)| {
            if positive {
                basis_words[i].clone()
            } else {
                basis_words[i].inverse()
            }
        })
        .collect();
    Word::product(parts.iter())
}

/// Labeled-graph isomorphism between cores, basepoints ignored: decides
/// conjugacy of the subgroups. On folded graphs an isomorphism is
/// determined by a single vertex correspondence, so each candidate image
/// of a fixed vertex is propagated deterministically.
pub fn conjugate_subgroups(a: &StallingsGraph, b: &StallingsGraph) -> bool {
    conjugacy_witness(a, b).is_some()
}

/// As `conjugate_subgroups`, but produces `c` with `b = a^c`
/// (every cycle of `b` at its basepoint is `c⁻¹ h c` for a cycle `h` of
/// `a`); `None` when the subgroups are not conjugate.
pub fn conjugacy_witness(a: &StallingsGraph, b: &StallingsGraph) -> Option<Word> {
    assert_eq!(a.rank(), b.rank());
    let mask_a = a.core_mask();
    let mask_b = b.core_mask();
    let verts_a: Vec<usize> = (0..a.vertex_count()).filter(|&v| mask_a[v]).collect();
    let verts_b: Vec<usize> = (0..b.vertex_count()).filter(|&v| mask_b[v]).collect();
    if verts_a.len() != verts_b.len() {
        return None;
    }
    let edge_count = |g: &StallingsGraph, mask: &[bool]| {
        g.edges().iter().filter(|e| mask[e.origin] && mask[e.terminus]).count()
    };
    if edge_count(a, &mask_a) != edge_count(b, &mask_b) {
        return None;
    }
    let root = verts_a[0];
    for &candidate in &verts_b {
        if let Some(map) = propagate_iso(a, &mask_a, b, &mask_b, root, candidate) {
            // conjugator from the matched vertex pair
            let p1 = a.path_label(a.basepoint(), root).unwrap();
            let p2 = b.path_label(b.basepoint(), map[&root]).unwrap();
            return Some(p1.concat(&p2.inverse()));
        }
    }
    None
}

fn propagate_iso(
    a: &StallingsGraph,
    mask_a: &[bool],
    b: &StallingsGraph,
    mask_b: &[bool],
    root_a: usize,
    root_b: usize,
) -> Option<HashMap<usize, usize>> {
    let mut map = HashMap::new();
    map.insert(root_a, root_b);
    let mut queue = VecDeque::from([root_a]);
    while let Some(v) = queue.pop_front() {
        let image = map[&v];
        for g in 0..a.rank() {
            for positive in [true, false] {
                let letter = Letter::new(g, positive);
                let step_a = a.step(v, letter).filter(|&(u, _)| mask_a[u]);
                let step_b = b.step(image, letter).filter(|&(u, _)| mask_b[u]);
                match (step_a, step_b) {
                    (None, None) => {}
                    (Some((ua, _)), Some((ub, _))) => match map.get(&ua) {
                        Some(&prev) => {
                            if prev != ub {
                                return None;
                            }
                        }
                        None => {
                            map.insert(ua, ub);
                            queue.push_back(ua);
                        }
                    },
                    _ => return None,
                }
            }
        }
    }
    // connected cores and matched counts make the propagation a bijection
    let mut images: Vec<usize> = map.values().copied().collect();
    images.sort_unstable();
    images.dedup();
    if images.len() != map.len() || map.len() != mask_a.iter().filter(|&&k| k).count() {
        return None;
    }
    Some(map)
}

/// Basepoint-respecting isomorphism of whole Stallings graphs: equality of
/// subgroups.
pub fn same_subgroup(a: &StallingsGraph, b: &StallingsGraph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let all_a = vec![true; a.vertex_count()];
    let all_b = vec![true; b.vertex_count()];
    propagate_iso(a, &all_a, b, &all_b, a.basepoint(), b.basepoint()).is_some()
}

/// On-disk subgroup description shared by the CLI and the file formats.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub alphabet: Vec<String>,
    pub generators: Vec<String>,
}

impl SubgroupSpec {
    pub fn parse(&self) -> Result<(Alphabet, Vec<Word>), Error> {
        let mut symbols = Vec::new();
        for s in &self.alphabet {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => symbols.push(c),
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "alphabet entries must be single symbols, got {s:?}"
                    )))
                }
            }
        }
        let alphabet = Alphabet::new(symbols)?;
        let generators = self
            .generators
            .iter()
            .map(|g| alphabet.parse_word(g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((alphabet, generators))
    }

    pub fn from_json(text: &str) -> Result<SubgroupSpec, Error> {
        Ok(serde_json::from_str(text)?)
    }
}
