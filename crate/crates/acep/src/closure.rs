//! Covering graphs for finite-index normal subgroups, machine-checkable
//! certificates for membership and non-membership in normal closures,
//! the power-relator girth check, and the end-to-end length-criterion
//! experiment.
//!
//! Certificates come in two kinds. A positive certificate exhibits the
//! target as a reduced product of conjugated relators; re-reduction
//! verifies it with no trust in the search. A negative certificate is a
//! homomorphism of the ambient free source group onto permutations that
//! kills every relator but not the target; since kernels are normal, the
//! target then avoids the whole normal closure. No search result is
//! reported unverified.

use std::collections::{HashMap, VecDeque};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::{StallingsGraph, SubgroupBasis, XDigraph};
use crate::metric::{constants, gamma_h, omega, BallFamily, Constants};
use crate::word::{cyclic_reduce, Letter, Word};
use crate::Error;

// ---------------------------------------------------------------------------
// Permutations and finite quotients

/// Permutation of `{0, …, degree-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(degree: usize) -> Perm {
        Perm { images: (0..degree).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Perm {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            assert!(i < images.len() && !seen[i], "not a permutation");
            seen[i] = true;
        }
        Perm { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Group product `self * other`: apply `self` first, then `other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.degree(), other.degree());
        Perm { images: self.images.iter().map(|&i| other.images[i]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Perm { images }
    }

    /// Order of the permutation: least common multiple of cycle lengths.
    pub fn order(&self) -> usize {
        let mut seen = vec![false; self.degree()];
        let mut order = 1usize;
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = self.images[cur];
                len += 1;
            }
            order = order / gcd(order, len) * len;
        }
        order
    }

    /// Cycle notation with 1-based points; the identity prints as `()`.
    pub fn to_cycles(&self) -> String {
        let mut seen = vec![false; self.degree()];
        let mut out = String::new();
        for start in 0..self.degree() {
            if seen[start] || self.images[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = self.images[start];
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.images[cur];
            }
            out.push('(');
            out.push_str(
                &cycle.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(" "),
            );
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }

    /// Parses cycle notation like `(1 2 3)(4 5)`; `()` is the identity.
    /// The degree is the largest point mentioned, or `min_degree`.
    pub fn parse_cycles(text: &str, min_degree: usize) -> Result<Perm, Error> {
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut cur: Option<Vec<usize>> = None;
        let mut num = String::new();
        let flush_num = |num: &mut String, cur: &mut Option<Vec<usize>>| -> Result<(), Error> {
            if !num.is_empty() {
                let point: usize = num
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("bad point {num:?}")))?;
                if point == 0 {
                    return Err(Error::InvalidSpec("points are 1-based".into()));
                }
                cur.as_mut()
                    .ok_or_else(|| Error::InvalidSpec("point outside cycle".into()))?
                    .push(point - 1);
                num.clear();
            }
            Ok(())
        };
        for c in text.chars() {
            match c {
                '(' => {
                    if cur.is_some() {
                        return Err(Error::InvalidSpec("nested cycle".into()));
                    }
                    cur = Some(Vec::new());
                }
                ')' => {
                    flush_num(&mut num, &mut cur)?;
                    let cycle =
                        cur.take().ok_or_else(|| Error::InvalidSpec("stray ')'".into()))?;
                    if !cycle.is_empty() {
                        cycles.push(cycle);
                    }
                }
                ' ' | ',' => flush_num(&mut num, &mut cur)?,
                d if d.is_ascii_digit() => num.push(d),
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "unexpected {other:?} in permutation"
                    )))
                }
            }
        }
        if cur.is_some() {
            return Err(Error::InvalidSpec("unclosed cycle".into()));
        }
        let degree = cycles
            .iter()
            .flat_map(|c| c.iter())
            .map(|&p| p + 1)
            .max()
            .unwrap_or(0)
            .max(min_degree);
        let mut images: Vec<usize> = (0..degree).collect();
        let mut moved = vec![false; degree];
        for cycle in cycles {
            for window in 0..cycle.len() {
                let from = cycle[window];
                let to = cycle[(window + 1) % cycle.len()];
                if moved[from] {
                    return Err(Error::InvalidSpec("repeated point in cycles".into()));
                }
                moved[from] = true;
                images[from] = to;
            }
        }
        Ok(Perm { images })
    }
}

/// Permutation images for the generators of a free source group: the
/// alphabet letters of `F`, or the basis words of a subgroup `H`. Any
/// assignment defines a homomorphism since the source is free.
#[derive(Clone, Debug)]
pub struct FiniteQuotient {
    pub degree: usize,
    pub images: Vec<Perm>,
}

impl FiniteQuotient {
    pub fn new(images: Vec<Perm>) -> Result<FiniteQuotient, Error> {
        let degree = images.first().map(Perm::degree).unwrap_or(1);
        if images.iter().any(|p| p.degree() != degree) {
            return Err(Error::InvalidSpec("permutation degrees differ".into()));
        }
        Ok(FiniteQuotient { degree, images })
    }

    /// Image of a word over the source generators.
    pub fn evaluate(&self, word: &Word) -> Perm {
        let mut out = Perm::identity(self.degree);
        for letter in word.letters() {
            let image = &self.images[letter.generator];
            let step = if letter.positive { image.clone() } else { image.inverse() };
            out = out.compose(&step);
        }
        out
    }

    /// Elements of the generated permutation group, identity first.
    pub fn group_elements(&self) -> Vec<Perm> {
        let mut elems = vec![Perm::identity(self.degree)];
        let mut index: HashMap<Perm, usize> = HashMap::from([(elems[0].clone(), 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let cur = elems[i].clone();
            for image in &self.images {
                for step in [image.clone(), image.inverse()] {
                    let next = cur.compose(&step);
                    if !index.contains_key(&next) {
                        index.insert(next.clone(), elems.len());
                        elems.push(next);
                        queue.push_back(elems.len() - 1);
                    }
                }
            }
        }
        elems
    }
}

// ---------------------------------------------------------------------------
// Covering graphs

/// The covering graph `Γ(N)` of `Γ(H)` for `N` the kernel of a finite
/// quotient of `H`: vertices are pairs of a base vertex and a group
/// element, tree edges preserve the element, and each non-tree edge
/// multiplies by the image of its basis word.
#[derive(Clone, Debug)]
pub struct CoveringGraph {
    pub graph: StallingsGraph,
    /// Base vertex and group-element index of each cover vertex.
    pub fiber: Vec<(usize, usize)>,
    pub group_order: usize,
    group_elems: Vec<Perm>,
    group_index: HashMap<Perm, usize>,
    base_vertices: usize,
}

impl CoveringGraph {
    /// The base vertex a cover vertex lies over.
    pub fn project(&self, v: usize) -> usize {
        self.fiber[v].0
    }

    /// Cover vertex over `base` carrying group element `g`.
    pub fn lift(&self, base: usize, g: usize) -> usize {
        base * self.group_order + g
    }

    /// Label-preserving automorphism moving `v1` to `v2`, as a vertex
    /// permutation; the two must lie over the same base vertex. Deck
    /// transformations act by left multiplication on the fiber.
    pub fn deck_automorphism(&self, v1: usize, v2: usize) -> Option<Vec<usize>> {
        let (b1, g1) = self.fiber[v1];
        let (b2, g2) = self.fiber[v2];
        if b1 != b2 {
            return None;
        }
        let m = self.group_elems[g2].compose(&self.group_elems[g1].inverse());
        let map: Vec<usize> = (0..self.graph.vertex_count())
            .map(|v| {
                let (b, g) = self.fiber[v];
                let moved = m.compose(&self.group_elems[g]);
                self.lift(b, self.group_index[&moved])
            })
            .collect();
        debug_assert_eq!(map[v1], v2);
        Some(map)
    }

    /// Checks that a vertex map is a label-preserving automorphism.
    pub fn is_automorphism(&self, map: &[usize]) -> bool {
        let n = self.graph.vertex_count();
        if map.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &v in map {
            if v >= n || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        let mut edges: Vec<(usize, usize, usize)> = self
            .graph
            .edges()
            .iter()
            .map(|e| (e.origin, e.terminus, e.label))
            .collect();
        edges.sort_unstable();
        let mut mapped: Vec<(usize, usize, usize)> = self
            .graph
            .edges()
            .iter()
            .map(|e| (map[e.origin], map[e.terminus], e.label))
            .collect();
        mapped.sort_unstable();
        edges == mapped
    }

    /// Star bijections: per vertex and label, the cover has an outgoing
    /// (incoming) edge exactly when the base does. With foldedness this
    /// makes the projection a covering map.
    pub fn verify_covering(&self, base: &StallingsGraph) -> bool {
        for v in 0..self.graph.vertex_count() {
            let b = self.project(v);
            for label in 0..base.rank() {
                for positive in [true, false] {
                    let letter = Letter::new(label, positive);
                    let here = self.graph.step(v, letter).is_some();
                    let below = base.step(b, letter).is_some();
                    if here != below {
                        return false;
                    }
                }
            }
        }
        // edges project onto edges with the same label
        self.graph.edges().iter().all(|e| {
            base.edges().iter().any(|be| {
                be.label == e.label
                    && be.origin == self.project(e.origin)
                    && be.terminus == self.project(e.terminus)
            })
        })
    }
}

/// Builds `Γ(N)` for `N = ker(q)` with `q` given on the spanning-tree
/// basis of `Γ(H)`.
pub fn cover(
    h: &StallingsGraph,
    basis: &SubgroupBasis,
    q: &FiniteQuotient,
) -> Result<CoveringGraph, Error> {
    if q.images.len() != basis.basis_words.len() {
        return Err(Error::InvalidSpec(format!(
            "quotient assigns {} images but the subgroup has rank {}",
            q.images.len(),
            basis.basis_words.len()
        )));
    }
    let group_elems = q.group_elements();
    let order = group_elems.len();
    let group_index: HashMap<Perm, usize> =
        group_elems.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    // right-multiplication tables for the basis images
    let mut right_mul: Vec<Vec<usize>> = Vec::with_capacity(basis.basis_words.len());
    for image in &q.images {
        right_mul.push(group_elems.iter().map(|g| group_index[&g.compose(image)]).collect());
    }
    let base_vertices = h.vertex_count();
    let mut g = XDigraph::new(h.rank(), base_vertices * order);
    for (edge_id, e) in h.edges().iter().enumerate() {
        match basis.basis_of_edge[edge_id] {
            None => {
                for gi in 0..order {
                    g.add_edge(e.origin * order + gi, e.terminus * order + gi, e.label);
                }
            }
            Some(bidx) => {
                for gi in 0..order {
                    g.add_edge(
                        e.origin * order + gi,
                        e.terminus * order + right_mul[bidx][gi],
                        e.label,
                    );
                }
            }
        }
    }
    let basepoint = h.basepoint() * order; // identity is element 0
    let graph = StallingsGraph::from_folded(g, basepoint);
    let fiber: Vec<(usize, usize)> =
        (0..base_vertices * order).map(|v| (v / order, v % order)).collect();
    let covering = CoveringGraph {
        graph,
        fiber,
        group_order: order,
        group_elems,
        group_index,
        base_vertices,
    };
    debug_assert!(covering.verify_covering(h));
    debug_assert_eq!(covering.base_vertices, base_vertices);
    Ok(covering)
}

// ---------------------------------------------------------------------------
// Positive certificates: conjugated-relator products

#[derive(Clone, Debug)]
pub struct CertFactor {
    pub conjugator: Word,
    pub relator: Word,
    pub inverted: bool,
}

impl CertFactor {
    pub fn value(&self) -> Word {
        let core = if self.inverted { self.relator.inverse() } else { self.relator.clone() };
        Word::product([&self.conjugator, &core, &self.conjugator.inverse()])
    }
}

/// Verified witness that the target lies in the normal closure of the
/// relators: an explicit product of conjugated relator powers reducing to
/// the target.
#[derive(Clone, Debug)]
pub struct PositiveCertificate {
    pub target: Word,
    pub factors: Vec<CertFactor>,
}

impl PositiveCertificate {
    /// Pure word arithmetic re-check plus relator membership in `N`.
    pub fn verify(&self, n: &NRep) -> bool {
        let product = Word::product(
            self.factors.iter().map(CertFactor::value).collect::<Vec<_>>().iter(),
        );
        product == self.target && self.factors.iter().all(|f| n.contains_relator(&f.relator))
    }
}

/// How the normal subgroup `N` is given.
pub enum NRep<'a> {
    /// Finite-index `N ⊴ H` through its covering graph: exact membership.
    Cover(&'a CoveringGraph),
    /// `N = ⟨⟨relators⟩⟩_H` by a finite relator list (infinite index is
    /// fine); only listed relators and their inverses count as proven
    /// members.
    Relators(&'a [Word]),
}

impl NRep<'_> {
    fn contains_relator(&self, r: &Word) -> bool {
        match self {
            NRep::Cover(c) => c.graph.member(r),
            NRep::Relators(list) => list.iter().any(|w| w == r || &w.inverse() == r),
        }
    }

    /// Relator pool for the search: the given list, or basis words plus
    /// short cycles of the cover.
    fn relator_pool(&self, budgets: &SearchBudgets) -> Vec<Word> {
        let mut pool = match self {
            NRep::Relators(list) => list.to_vec(),
            NRep::Cover(c) => {
                let mut pool = c.graph.basis().basis_words;
                pool.sort_by_key(Word::len);
                pool.extend(c.graph.cycles_at(c.graph.basepoint(), budgets.short_cycle_len));
                pool
            }
        };
        pool.retain(|w| !w.is_empty());
        let mut seen = std::collections::HashSet::new();
        pool.retain(|w| seen.insert(w.clone()));
        pool.truncate(budgets.pool_cap);
        pool
    }
}

#[derive(Clone, Debug)]
pub struct SearchBudgets {
    pub max_factors: usize,
    pub max_conjugator_len: usize,
    pub pool_cap: usize,
    pub short_cycle_len: usize,
    pub max_expansions: usize,
}

impl Default for SearchBudgets {
    fn default() -> SearchBudgets {
        SearchBudgets {
            max_factors: 3,
            max_conjugator_len: 3,
            pool_cap: 4096,
            short_cycle_len: 6,
            max_expansions: 2_000_000,
        }
    }
}

fn all_reduced_words(rank: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for word in &frontier {
            for g in 0..rank {
                for positive in [true, false] {
                    let ext = word.concat(&Word::from_letter(Letter::new(g, positive)));
                    if ext.len() > word.len() {
                        next.push(ext);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Reusable iterative-deepening search over conjugated-relator products:
/// the factor table is built once and shared across targets.
pub struct ClosureSearcher {
    factor_of: HashMap<Word, CertFactor>,
    order: Vec<Word>,
    budgets: SearchBudgets,
}

impl ClosureSearcher {
    pub fn new(rank: usize, n: &NRep, budgets: &SearchBudgets) -> ClosureSearcher {
        let pool = n.relator_pool(budgets);
        // all factor values, first derivation wins
        let mut factor_of: HashMap<Word, CertFactor> = HashMap::new();
        let mut order: Vec<Word> = Vec::new();
        for conjugator in all_reduced_words(rank, budgets.max_conjugator_len) {
            for relator in &pool {
                for inverted in [false, true] {
                    let factor = CertFactor {
                        conjugator: conjugator.clone(),
                        relator: relator.clone(),
                        inverted,
                    };
                    let value = factor.value();
                    if value.is_empty() {
                        continue;
                    }
                    factor_of.entry(value.clone()).or_insert_with(|| {
                        order.push(value.clone());
                        factor
                    });
                }
            }
        }
        ClosureSearcher { factor_of, order, budgets: budgets.clone() }
    }

    /// Sound and verified, never complete: `None` just means the budget
    /// was exhausted.
    pub fn search(&self, target: &Word, n: &NRep) -> Option<PositiveCertificate> {
        if self.order.is_empty() {
            return None;
        }
        let mut expansions = self.budgets.max_expansions;
        let mut found: Option<Vec<CertFactor>> = None;
        for depth in 1..=self.budgets.max_factors {
            let mut partial: Vec<CertFactor> = Vec::new();
            if search_products(
                target,
                &self.factor_of,
                &self.order,
                depth,
                &Word::empty(),
                &mut partial,
                &mut expansions,
            ) {
                found = Some(partial);
                break;
            }
            if expansions == 0 {
                break;
            }
        }
        let cert = PositiveCertificate { target: target.clone(), factors: found? };
        assert!(cert.verify(n), "search must only produce verifiable certificates");
        Some(cert)
    }
}

/// One-shot wrapper around `ClosureSearcher`.
pub fn closure_member_search(
    target: &Word,
    rank: usize,
    n: &NRep,
    budgets: &SearchBudgets,
) -> Option<PositiveCertificate> {
    ClosureSearcher::new(rank, n, budgets).search(target, n)
}

fn search_products(
    target: &Word,
    factor_of: &HashMap<Word, CertFactor>,
    order: &[Word],
    depth_left: usize,
    partial: &Word,
    chosen: &mut Vec<CertFactor>,
    expansions: &mut usize,
) -> bool {
    if *expansions == 0 {
        return false;
    }
    *expansions -= 1;
    if depth_left == 1 {
        let needed = partial.inverse().concat(target);
        if let Some(factor) = factor_of.get(&needed) {
            chosen.push(factor.clone());
            return true;
        }
        return false;
    }
    for value in order {
        let next = partial.concat(value);
        chosen.push(factor_of[value].clone());
        if search_products(target, factor_of, order, depth_left - 1, &next, chosen, expansions) {
            return true;
        }
        chosen.pop();
        if *expansions == 0 {
            return false;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Negative certificates: finite quotients killing the relators

/// Verified witness that the target avoids the normal closure of the
/// relators in the free source group: a permutation quotient that kills
/// every relator but not the target. Sound because kernels are normal.
#[derive(Clone, Debug)]
pub struct NegativeCertificate {
    pub target: Word,
    pub quotient: FiniteQuotient,
}

impl NegativeCertificate {
    pub fn verify(&self, relators: &[Word]) -> bool {
        relators.iter().all(|r| self.quotient.evaluate(r).is_identity())
            && !self.quotient.evaluate(&self.target).is_identity()
    }
}

#[derive(Clone, Debug)]
pub struct QuotientLimits {
    pub max_degree: usize,
    pub exhaustive_budget: u64,
    pub random_tries_per_degree: usize,
    pub seed: u64,
}

impl Default for QuotientLimits {
    fn default() -> QuotientLimits {
        QuotientLimits {
            max_degree: 5,
            exhaustive_budget: 2_000_000,
            random_tries_per_degree: 4_000,
            seed: 0xACE9,
        }
    }
}

fn all_perms(degree: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut images: Vec<usize> = (0..degree).collect();
    permute(&mut images, 0, &mut out);
    out.sort_by(|a, b| a.images.cmp(&b.images));
    out
}

fn permute(images: &mut Vec<usize>, at: usize, out: &mut Vec<Perm>) {
    if at == images.len() {
        out.push(Perm { images: images.clone() });
        return;
    }
    for i in at..images.len() {
        images.swap(at, i);
        permute(images, at + 1, out);
        images.swap(at, i);
    }
}

/// Searches homomorphisms of the free source group (one generator per
/// image slot) into symmetric groups of degree up to the limit,
/// exhaustively while the tuple count stays within budget and randomly
/// beyond, for one killing every relator but not the target.
///
/// Long relator lists are screened with a short prefix first; a candidate
/// passing the screen is verified against the full list before being
/// reported, so soundness never depends on the screen.
pub fn quotient_nonmember(
    target: &Word,
    relators: &[Word],
    num_generators: usize,
    limits: &QuotientLimits,
) -> Option<NegativeCertificate> {
    if target.is_empty() {
        return None;
    }
    let screen_len = relators.len().min(24);
    let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
    for degree in 2..=limits.max_degree {
        let perms = all_perms(degree);
        let tuple_count = (perms.len() as u64).checked_pow(num_generators as u32);
        let exhaustive =
            tuple_count.map_or(false, |count| count <= limits.exhaustive_budget);
        if exhaustive {
            let mut indices = vec![0usize; num_generators];
            loop {
                let images: Vec<Perm> =
                    indices.iter().map(|&i| perms[i].clone()).collect();
                if let Some(cert) = try_quotient(target, relators, screen_len, images) {
                    return Some(cert);
                }
                // odometer
                let mut pos = 0;
                loop {
                    if pos == num_generators {
                        break;
                    }
                    indices[pos] += 1;
                    if indices[pos] < perms.len() {
                        break;
                    }
                    indices[pos] = 0;
                    pos += 1;
                }
                if pos == num_generators {
                    break;
                }
            }
        } else {
            for _ in 0..limits.random_tries_per_degree {
                let images: Vec<Perm> = (0..num_generators)
                    .map(|_| perms[rng.gen_range(0..perms.len())].clone())
                    .collect();
                if let Some(cert) = try_quotient(target, relators, screen_len, images) {
                    return Some(cert);
                }
            }
        }
    }
    None
}

fn try_quotient(
    target: &Word,
    relators: &[Word],
    screen_len: usize,
    images: Vec<Perm>,
) -> Option<NegativeCertificate> {
    let q = FiniteQuotient::new(images).ok()?;
    if q.evaluate(target).is_identity() {
        return None;
    }
    if !relators[..screen_len].iter().all(|r| q.evaluate(r).is_identity()) {
        return None;
    }
    if !relators[screen_len..].iter().all(|r| q.evaluate(r).is_identity()) {
        return None;
    }
    let cert = NegativeCertificate { target: target.clone(), quotient: q };
    debug_assert!(cert.verify(relators));
    Some(cert)
}

// ---------------------------------------------------------------------------
// Power-relator girth check

#[derive(Clone, Debug, serde::Serialize)]
pub struct NewmanReport {
    pub exponent: u32,
    pub bound: usize,
    pub samples: usize,
    pub violations: usize,
    pub min_length_seen: usize,
}

/// Samples nontrivial elements of `⟨⟨uⁿ⟩⟩_F` as reduced products of
/// conjugated relator powers and checks each against the length bound
/// `(n-1)·|u*|` with `u*` the cyclic reduction of `u`.
pub fn newman_check(
    u: &Word,
    n: u32,
    rank: usize,
    samples: usize,
    seed: u64,
) -> NewmanReport {
    assert!(!u.is_empty() && n >= 2);
    let relator = u.pow(n as i64);
    let (u_star, _) = cyclic_reduce(u);
    let bound = (n as usize - 1) * u_star.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut min_length = usize::MAX;
    let mut produced = 0;
    while produced < samples {
        let factor_count = rng.gen_range(1..=3);
        let mut product = Word::empty();
        for _ in 0..factor_count {
            let conj_len = rng.gen_range(0..=8);
            let conj = random_reduced_word(&mut rng, rank, conj_len);
            let sign = rng.gen_bool(0.5);
            let core = if sign { relator.clone() } else { relator.inverse() };
            product = product.concat(&Word::product([&conj, &core, &conj.inverse()]));
        }
        if product.is_empty() {
            continue; // resample: only nontrivial elements are claimed
        }
        produced += 1;
        min_length = min_length.min(product.len());
        if product.len() < bound {
            violations += 1;
        }
    }
    NewmanReport { exponent: n, bound, samples: produced, violations, min_length_seen: min_length }
}

/// Uniform random reduced word of exactly the given length.
pub fn random_reduced_word(rng: &mut ChaCha8Rng, rank: usize, len: usize) -> Word {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        loop {
            let letter = Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5));
            if letters.last().map(|l| l.is_inverse_of(letter)) != Some(true) {
                letters.push(letter);
                break;
            }
        }
    }
    Word::from_reduced_letters(letters)
}

// ---------------------------------------------------------------------------
// The end-to-end experiment

/// How `N ⊴ H` enters the experiment.
pub enum ExperimentN {
    /// Kernel of a finite quotient of `H`: full covering-graph treatment.
    Quotient(FiniteQuotient),
    /// Normal closure in `H` of a finite relator list (given as words of
    /// `F` lying in `H`); possibly infinite index, handled by searches.
    Relators(Vec<Word>),
}

#[derive(Clone, Debug, serde::Serialize)]
pub enum GammaHBound {
    Exact(Option<usize>),
    /// Minimum `|·|_H` over a bounded sample of N-elements: an upper
    /// bound on `γ_H(N)`, nothing more.
    SampledUpperBound(Option<usize>),
}

#[derive(Debug, serde::Serialize)]
pub struct ExperimentReport {
    pub constants: Constants,
    pub gamma_h: GammaHBound,
    /// Whether `γ_H(N) > C_H` held; `None` when `γ_H` is only sampled.
    pub hypothesis_met: Option<bool>,
    pub horizon: usize,
    pub elements_checked: usize,
    pub confirmed_in_n: usize,
    /// Words of `H \ N` that acquired a verified positive certificate;
    /// the length criterion predicts none when the hypothesis holds.
    pub counterexamples: Vec<String>,
    pub proven_exclusions: usize,
    /// Relator mode only: targets proven inside `⟨⟨N⟩⟩_F` whose
    /// N-membership stayed open.
    pub in_closure_only: usize,
    pub unresolved: usize,
    /// Targets proven inside `⟨⟨N⟩⟩_F` and outside `N`: ACEP failures.
    pub sigma_witnesses: Vec<String>,
}

pub struct ExperimentArgs {
    pub horizon: usize,
    pub explicit_targets: Vec<Word>,
    pub budgets: SearchBudgets,
    pub limits: QuotientLimits,
    /// Relator-mode sampling depth for the γ_H upper bound.
    pub gamma_sample_len: usize,
    /// How many non-members of `N` get the exclusion-certificate search.
    pub exclusion_sample: usize,
}

impl Default for ExperimentArgs {
    fn default() -> ExperimentArgs {
        ExperimentArgs {
            horizon: 10,
            explicit_targets: Vec::new(),
            // tighter than the standalone defaults: the horizon sweep
            // runs one search per enumerated word
            budgets: SearchBudgets {
                max_factors: 2,
                max_conjugator_len: 2,
                pool_cap: 512,
                ..SearchBudgets::default()
            },
            limits: QuotientLimits { max_degree: 4, ..QuotientLimits::default() },
            gamma_sample_len: 8,
            exclusion_sample: 8,
        }
    }
}

/// Runs the consistency experiment around the explicit length criterion:
/// computes `C_H` and `γ_H(N)`, reports whether the hypothesis
/// `γ_H(N) > C_H` holds, confirms every enumerated element of `N`, and
/// tries to disprove the criterion by finding a positive certificate for
/// some element of `H \ N`. Explicit targets additionally get both
/// certificate searches, flagging ACEP failures when a target lands in
/// `⟨⟨N⟩⟩_F \ N`.
pub fn acep_experiment(
    h: &StallingsGraph,
    alphabet: &crate::word::Alphabet,
    n: &ExperimentN,
    args: &ExperimentArgs,
) -> Result<ExperimentReport, Error> {
    let consts = constants(h);
    let basis = h.basis();
    let mut balls = BallFamily::new(h.rank(), omega(h));
    let mut report = ExperimentReport {
        constants: consts,
        gamma_h: GammaHBound::Exact(None),
        hypothesis_met: None,
        horizon: args.horizon,
        elements_checked: 0,
        confirmed_in_n: 0,
        counterexamples: Vec::new(),
        proven_exclusions: 0,
        in_closure_only: 0,
        unresolved: 0,
        sigma_witnesses: Vec::new(),
    };

    match n {
        ExperimentN::Quotient(q) => {
            let covering = cover(h, &basis, q)?;
            let value = gamma_h(&covering.graph, h, &mut balls)?;
            report.gamma_h = GammaHBound::Exact(value);
            report.hypothesis_met = Some(value.map_or(true, |v| v > consts.c_h));
            let n_rep = NRep::Cover(&covering);
            let f_relators = covering.graph.basis().basis_words;
            let searcher = ClosureSearcher::new(h.rank(), &n_rep, &args.budgets);
            let mut exclusion_budget = args.exclusion_sample;
            for word in h.cycles_at(h.basepoint(), args.horizon) {
                report.elements_checked += 1;
                if covering.graph.member(&word) {
                    report.confirmed_in_n += 1;
                    continue;
                }
                if let Some(cert) = searcher.search(&word, &n_rep) {
                    assert!(cert.verify(&n_rep));
                    report.counterexamples.push(alphabet.format_word(&word));
                    continue;
                }
                if exclusion_budget > 0 {
                    exclusion_budget -= 1;
                    if quotient_nonmember(&word, &f_relators, h.rank(), &args.limits)
                        .is_some()
                    {
                        report.proven_exclusions += 1;
                        continue;
                    }
                }
                report.unresolved += 1;
            }
        }
        ExperimentN::Relators(relators) => {
            for r in relators {
                if !h.member(r) {
                    return Err(Error::Precondition(
                        "relator does not lie in the subgroup".into(),
                    ));
                }
            }
            report.gamma_h =
                GammaHBound::SampledUpperBound(sample_gamma_h_upper(
                    relators,
                    h,
                    &mut balls,
                    args.gamma_sample_len,
                ));
            let n_rep = NRep::Relators(relators);
            let searcher = ClosureSearcher::new(h.rank(), &n_rep, &args.budgets);
            // rewrite relators over the basis for the H-side quotient search
            let relator_exprs: Vec<Word> = relators
                .iter()
                .map(|r| {
                    crate::graph::basis_expr_word(
                        &h.rewrite_in_basis(&basis, r).expect("relators lie in H"),
                    )
                })
                .collect();
            for target in &args.explicit_targets {
                report.elements_checked += 1;
                let positive = searcher.search(target, &n_rep);
                let negative = h.rewrite_in_basis(&basis, target).and_then(|expr| {
                    quotient_nonmember(
                        &crate::graph::basis_expr_word(&expr),
                        &relator_exprs,
                        basis.basis_words.len(),
                        &args.limits,
                    )
                });
                match (&positive, &negative) {
                    (Some(cert), Some(neg)) => {
                        assert!(cert.verify(&n_rep));
                        assert!(neg.verify(&relator_exprs));
                        report.sigma_witnesses.push(alphabet.format_word(target));
                    }
                    (Some(_), None) => report.in_closure_only += 1,
                    (None, Some(_)) => report.proven_exclusions += 1,
                    (None, None) => report.unresolved += 1,
                }
            }
        }
    }
    Ok(report)
}

/// Minimum `|·|_H` over products of up to two conjugated relators with
/// short conjugators: a sampled upper bound on `γ_H` for relator-given
/// `N`.
fn sample_gamma_h_upper(
    relators: &[Word],
    h: &StallingsGraph,
    balls: &mut BallFamily,
    conj_len: usize,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    let conjugators: Vec<Word> = h
        .cycles_at(h.basepoint(), conj_len)
        .into_iter()
        .chain([Word::empty()])
        .collect();
    for r in relators {
        for c in &conjugators {
            let elem = r.conjugate(c);
            if !elem.is_empty() {
                let len = balls.length(&elem);
                best = Some(best.map_or(len, |b| b.min(len)));
            }
        }
    }
    best
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Landau's function: the largest element order in the symmetric group of
/// each degree, up to 10.
const LANDAU: [usize; 11] = [1, 1, 2, 3, 4, 6, 6, 12, 15, 20, 30];

/// Seeded search for a quotient of `H` whose kernel has `γ_H` beyond the
/// threshold: random permutation images of growing degree, each candidate
/// checked exactly through its covering graph. Degrees whose element
/// orders force a power relation at or below the threshold are skipped,
/// and candidate images are rejected the same way before any group
/// enumeration.
pub fn search_quotient_with_girth(
    h: &StallingsGraph,
    threshold: usize,
    max_degree: usize,
    tries_per_degree: usize,
    seed: u64,
) -> Option<(FiniteQuotient, CoveringGraph, usize)> {
    let basis = h.basis();
    let rank = basis.basis_words.len();
    let longest = basis.basis_words.iter().map(Word::len).max()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for degree in 2..=max_degree {
        if degree < LANDAU.len() && LANDAU[degree] * longest <= threshold {
            continue; // some basis power is forced under the threshold
        }
        let perms = all_perms(degree);
        'tries: for _ in 0..tries_per_degree {
            let images: Vec<Perm> =
                (0..rank).map(|_| perms[rng.gen_range(0..perms.len())].clone()).collect();
            for (word, image) in basis.basis_words.iter().zip(&images) {
                if word.pow(image.order() as i64).len() <= threshold {
                    continue 'tries;
                }
            }
            let q = FiniteQuotient::new(images).ok()?;
            let covering = cover(h, &basis, &q).ok()?;
            // cheap girth screen before the metric computation
            let plain = crate::metric::gamma(&covering.graph);
            if plain.map_or(false, |g| g <= threshold) {
                continue;
            }
            let mut balls = BallFamily::new(h.rank(), omega(h));
            if let Ok(value) = gamma_h(&covering.graph, h, &mut balls) {
                if value.map_or(true, |v| v > threshold) {
                    return Some((q, covering, value.unwrap_or(usize::MAX)));
                }
            }
        }
    }
    None
}
