//! Decision procedure for the S-subgroup property and exact verification
//! of S-witnesses.
//!
//! `H` is an S-subgroup when some `w ∈ H` is conjugated into `H` by an
//! element of `F \ H` but by no element of `H`; this forces the failure
//! of the almost congruence extension property. Equivalently, the
//! subgroup graph carries two cycles with the same cyclically reduced
//! label, based at distinct vertices, such that neither is a rotation of
//! the other. Candidate pairs are mined from the dotted core product and
//! every reported witness is re-verified exactly by rewriting into the
//! free basis of `H`.

use std::collections::HashSet;

use crate::fiber::{components, ProductGraph};
use crate::graph::{basis_expr_word, StallingsGraph, SubgroupBasis};
use crate::word::{conjugate_in_free, cyclic_reduce, CyclicWord, Letter, Word};

/// Two distinct vertices carrying cycles with the same cyclically reduced
/// label, neither a rotation of the other.
#[derive(Clone, Debug)]
pub struct CyclePair {
    pub v: usize,
    pub v_prime: usize,
    pub label: CyclicWord,
}

/// A verified pair `(w, a)`: `w ∈ H`, `a ∉ H`, `w^a ∈ H`, and no `b ∈ H`
/// conjugates `w` to `w^a`.
#[derive(Clone, Debug)]
pub struct SWitness {
    pub w: Word,
    pub a: Word,
}

/// Outcome of the bounded S-detection search.
#[derive(Clone, Debug)]
pub enum SVerdict {
    Yes(SWitness),
    /// No witness among cyclically reduced cycle labels of length at most
    /// `bound`. `exact` is set when the non-diagonal product carries no
    /// cycles at all, in which case no candidate exists at any bound.
    NoWithinBound { bound: usize, exact: bool },
    /// The expansion budget ran out before the bound was covered.
    Unknown { bound: usize },
}

impl SVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, SVerdict::Yes(_))
    }
}

/// Default cycle-length budget: two wraps around the core product plus
/// the longest basis word.
pub fn default_bound(g: &StallingsGraph) -> usize {
    let product = ProductGraph::of_cores(g, false);
    let longest = g.basis().basis_words.iter().map(Word::len).max().unwrap_or(0);
    2 * product.edge_count() + longest
}

/// The rotation test behind the pair search: the cycle labeled `w` at
/// `v_prime` is a cyclic permutation of the one at `v` exactly when some
/// offset `k` fixes the label, `rotate(w, k) = w`, and the length-`k`
/// prefix leads from `v` to `v_prime`.
pub fn is_cyclic_permutation(
    g: &StallingsGraph,
    v: usize,
    v_prime: usize,
    label: &CyclicWord,
) -> bool {
    let n = label.len();
    let mut cur = v;
    for k in 0..n {
        if cur == v_prime && label.rotate(k).word() == label.word() {
            return true;
        }
        cur = match g.step(cur, label.word().letters()[k]) {
            Some((next, _)) => next,
            None => return false,
        };
    }
    false
}

struct PairSearch<'a> {
    graph: &'a StallingsGraph,
    bound: usize,
    budget: usize,
    exhausted: bool,
    tested: HashSet<(usize, usize, Word)>,
}

impl<'a> PairSearch<'a> {
    /// Tests one candidate: cycles labeled `label` at both coordinates of
    /// `pair`. Returns the pair when the rotation test fails both ways.
    fn consider(&mut self, pair: (usize, usize), label: &CyclicWord) -> Option<CyclePair> {
        let (v, v_prime) = pair;
        if v == v_prime || label.is_empty() {
            return None;
        }
        if !self.tested.insert((v, v_prime, label.word().clone())) {
            return None;
        }
        debug_assert_eq!(self.graph.trace(v, label.word()), Some(v));
        debug_assert_eq!(self.graph.trace(v_prime, label.word()), Some(v_prime));
        if is_cyclic_permutation(self.graph, v, v_prime, label) {
            return None;
        }
        Some(CyclePair { v, v_prime, label: label.clone() })
    }

    /// Re-anchors a closed walk label at `pair` to its cyclically reduced
    /// form and tests it.
    fn consider_reduced(&mut self, pair: (usize, usize), raw: &Word) -> Option<CyclePair> {
        let (cyclic, conj) = cyclic_reduce(raw);
        if cyclic.is_empty() {
            return None;
        }
        let a = self.graph.trace(pair.0, &conj)?;
        let b = self.graph.trace(pair.1, &conj)?;
        self.consider((a, b), &cyclic)
    }

    /// Structured candidates first: fundamental cycles of each
    /// non-diagonal component and products of two of them.
    fn structured_phase(&mut self, dotted: &ProductGraph) -> Option<CyclePair> {
        for comp in components(dotted) {
            if comp.rank == 0 {
                continue;
            }
            let anchor = comp.anchor;
            let cycles = fundamental_cycles(self.graph, anchor, self.bound);
            for c in &cycles {
                if let Some(pair) = self.consider_reduced(anchor, c) {
                    return Some(pair);
                }
            }
            for c1 in &cycles {
                for c2 in &cycles {
                    let prod = c1.concat(c2);
                    if prod.len() <= self.bound {
                        if let Some(pair) = self.consider_reduced(anchor, &prod) {
                            return Some(pair);
                        }
                    }
                }
            }
        }
        None
    }

    /// Exhaustive phase: every cyclically reduced cycle of length at most
    /// `bound` at every non-diagonal pair of the core product.
    fn exhaustive_phase(&mut self, dotted: &ProductGraph) -> Option<CyclePair> {
        for start in 0..dotted.vertex_count() {
            let pair = dotted.pairs()[start];
            // DFS over no-backtrack walks in the product
            let mut stack: Vec<(usize, Option<(usize, bool)>, Vec<Letter>)> =
                vec![(start, None, Vec::new())];
            while let Some((cur, last, letters)) = stack.pop() {
                if self.budget == 0 {
                    self.exhausted = true;
                    return None;
                }
                self.budget -= 1;
                if cur == start && !letters.is_empty() {
                    let first = letters[0];
                    let is_cyclic = !letters.last().unwrap().is_inverse_of(first);
                    if is_cyclic {
                        let word = Word::from_reduced_letters(letters.clone());
                        if let Some(found) = self.consider(pair, &CyclicWord::from_reduced(word)) {
                            return Some(found);
                        }
                    }
                }
                if letters.len() == self.bound {
                    continue;
                }
                for (id, e) in dotted.graph().edges().iter().enumerate() {
                    for forward in [true, false] {
                        let (from, to) = if forward {
                            (e.origin, e.terminus)
                        } else {
                            (e.terminus, e.origin)
                        };
                        if from != cur || last == Some((id, !forward)) {
                            continue;
                        }
                        let mut ls = letters.clone();
                        ls.push(Letter::new(e.label, forward));
                        stack.push((to, Some((id, forward)), ls));
                    }
                }
            }
        }
        None
    }
}

/// Labels of fundamental cycles of a spanning tree of the component of
/// `anchor` in the product, read as closed walks at `anchor` in the base
/// graph coordinates.
fn fundamental_cycles(g: &StallingsGraph, anchor: (usize, usize), bound: usize) -> Vec<Word> {
    // walk the component in the implicit product of g with itself
    let pair_step = |(a, b): (usize, usize), letter: Letter| -> Option<(usize, usize)> {
        match (g.step(a, letter), g.step(b, letter)) {
            (Some((na, _)), Some((nb, _))) => {
                if na == nb {
                    None // never step onto the diagonal
                } else {
                    Some((na, nb))
                }
            }
            _ => None,
        }
    };
    let mut tree_path: std::collections::HashMap<(usize, usize), Word> =
        std::collections::HashMap::new();
    tree_path.insert(anchor, Word::empty());
    let mut queue = std::collections::VecDeque::from([anchor]);
    let mut cycles = Vec::new();
    let mut crossed: HashSet<((usize, usize), Letter)> = HashSet::new();
    while let Some(p) = queue.pop_front() {
        for gidx in 0..g.rank() {
            for positive in [true, false] {
                let letter = Letter::new(gidx, positive);
                if let Some(q) = pair_step(p, letter) {
                    if !tree_path.contains_key(&q) {
                        let path = tree_path[&p].concat(&Word::from_letter(letter));
                        tree_path.insert(q, path);
                        queue.push_back(q);
                    } else if !crossed.contains(&(q, letter.inverse())) {
                        // non-tree edge: fundamental cycle through it
                        crossed.insert((p, letter));
                        let cycle = Word::product([
                            &tree_path[&p],
                            &Word::from_letter(letter),
                            &tree_path[&q].inverse(),
                        ]);
                        if !cycle.is_empty() && cycle.len() <= bound {
                            cycles.push(cycle);
                        }
                    }
                }
            }
        }
    }
    cycles.sort();
    cycles.dedup();
    cycles
}

/// Searches the non-diagonal core product for a cycle pair failing the
/// rotation test. `None` means no pair exists among cyclically reduced
/// labels of length at most `bound` (or the budget ran out; see
/// `is_s_subgroup` for the honest tri-state).
pub fn find_cycle_pair(g: &StallingsGraph, bound: usize) -> Option<CyclePair> {
    let (found, _, _) = cycle_pair_search(g, bound, DEFAULT_EXPANSION_BUDGET);
    found
}

const DEFAULT_EXPANSION_BUDGET: usize = 2_000_000;

fn cycle_pair_search(
    g: &StallingsGraph,
    bound: usize,
    budget: usize,
) -> (Option<CyclePair>, bool, bool) {
    assert!(bound >= 1);
    let dotted = ProductGraph::of_cores(g, true);
    let has_cycles = components(&dotted).iter().any(|c| c.rank > 0);
    if !has_cycles {
        return (None, false, false);
    }
    let mut search = PairSearch {
        graph: g,
        bound,
        budget,
        exhausted: false,
        tested: HashSet::new(),
    };
    if let Some(pair) = search.structured_phase(&dotted) {
        return (Some(pair), false, true);
    }
    let found = search.exhaustive_phase(&dotted);
    let exhausted = search.exhausted;
    (found, exhausted, true)
}

/// Builds the transported witness from a cycle pair: with `p`, `p'` the
/// basepoint paths to the two anchors, `w = p·label·p⁻¹` lies in `H` and
/// `a = p·p'⁻¹` conjugates it to `p'·label·p'⁻¹ ∈ H` while `a ∉ H`.
pub fn witness_from_pair(g: &StallingsGraph, pair: &CyclePair) -> SWitness {
    let p = g.path_label(g.basepoint(), pair.v).expect("graph is connected");
    let p_prime = g.path_label(g.basepoint(), pair.v_prime).expect("graph is connected");
    let w = Word::product([&p, pair.label.word(), &p.inverse()]);
    let a = p.concat(&p_prime.inverse());
    SWitness { w, a }
}

/// Exact witness check: membership of `w` and `w^a`, non-membership of
/// `a`, and non-conjugacy of `w` and `w^a` inside `H`, decided by
/// rewriting both into the free basis of `H` and testing conjugacy in the
/// free group on the basis.
pub fn verify_witness(g: &StallingsGraph, basis: &SubgroupBasis, w: &Word, a: &Word) -> bool {
    if !g.member(w) || g.member(a) {
        return false;
    }
    let conjugated = w.conjugate(a);
    if !g.member(&conjugated) {
        return false;
    }
    let expr_w = g.rewrite_in_basis(basis, w).expect("member rewrites");
    let expr_c = g.rewrite_in_basis(basis, &conjugated).expect("member rewrites");
    !conjugate_in_free(&basis_expr_word(&expr_w), &basis_expr_word(&expr_c))
}

/// Bounded decision of the S-property. Every `yes` carries a witness that
/// passed exact verification; `no_within_bound` is honest bounded
/// evidence except in the cycle-free case, where it is a proof.
pub fn is_s_subgroup(g: &StallingsGraph, bound: usize) -> SVerdict {
    let (found, exhausted, has_cycles) = cycle_pair_search(g, bound, DEFAULT_EXPANSION_BUDGET);
    if let Some(pair) = found {
        let witness = witness_from_pair(g, &pair);
        let basis = g.basis();
        if verify_witness(g, &basis, &witness.w, &witness.a) {
            return SVerdict::Yes(witness);
        }
        // a pair that fails exact verification falls through to honesty
        return SVerdict::Unknown { bound };
    }
    if !has_cycles {
        return SVerdict::NoWithinBound { bound, exact: true };
    }
    if exhausted {
        return SVerdict::Unknown { bound };
    }
    SVerdict::NoWithinBound { bound, exact: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{classify, CaseLabel};
    use crate::graph::build_stallings;
    use crate::word::Alphabet;

    fn ab() -> Alphabet {
        Alphabet::new(['x', 'y']).unwrap()
    }

    fn w(text: &str) -> Word {
        ab().parse_word(text).unwrap()
    }

    fn subgroup(gens: &[&str]) -> StallingsGraph {
        let words: Vec<Word> = gens.iter().map(|g| w(g)).collect();
        build_stallings(2, &words)
    }

    #[test]
    fn pair_found_for_conjugated_square() {
        let g = subgroup(&["xx", "Yxxy"]);
        let pair = find_cycle_pair(&g, default_bound(&g)).expect("pair exists");
        assert_ne!(pair.v, pair.v_prime);
        let label = pair.label.word();
        assert!(label == &w("xx") || label == &w("XX"));
    }

    #[test]
    fn no_pair_for_rank_four_example() {
        let alphabet = Alphabet::new(['a', 'b', 'c']).unwrap();
        let gens: Vec<Word> = ["aaaa", "aaba", "acaa", "bC"]
            .iter()
            .map(|s| alphabet.parse_word(s).unwrap())
            .collect();
        let g = build_stallings(3, &gens);
        assert!(find_cycle_pair(&g, default_bound(&g)).is_none());
        match is_s_subgroup(&g, default_bound(&g)) {
            SVerdict::NoWithinBound { exact, .. } => assert!(!exact),
            other => panic!("expected bounded no, got {other:?}"),
        }
    }

    #[test]
    fn no_pair_for_single_loop() {
        let g = subgroup(&["x"]);
        assert!(find_cycle_pair(&g, 4).is_none());
        match is_s_subgroup(&g, 4) {
            SVerdict::NoWithinBound { exact, .. } => assert!(exact),
            other => panic!("expected exact no, got {other:?}"),
        }
    }

    #[test]
    fn trivial_subgroup_is_exactly_non_s() {
        let g = StallingsGraph::trivial(2);
        match is_s_subgroup(&g, 1) {
            SVerdict::NoWithinBound { exact, .. } => assert!(exact),
            other => panic!("expected exact no, got {other:?}"),
        }
    }

    #[test]
    fn witness_for_h1_is_square_and_y() {
        let g = subgroup(&["xx", "Yxxy"]);
        let verdict = is_s_subgroup(&g, default_bound(&g));
        let witness = match verdict {
            SVerdict::Yes(w) => w,
            other => panic!("expected yes, got {other:?}"),
        };
        let basis = g.basis();
        assert!(verify_witness(&g, &basis, &witness.w, &witness.a));
        // the canonical witness here conjugates x^{±2} by y^{±1}
        assert!(witness.w == w("xx") || witness.w == w("XX"));
    }

    #[test]
    fn verify_rejects_bad_candidates() {
        let g = subgroup(&["xx", "Yxxy"]);
        let basis = g.basis();
        // a ∈ H
        assert!(!verify_witness(&g, &basis, &w("xx"), &w("xx")));
        // w^a ∉ H
        assert!(!verify_witness(&g, &basis, &w("xx"), &w("yy")));
        // conjugate inside H: b = w itself
        assert!(!verify_witness(&g, &basis, &w("xx"), &w("XX")));
        // trivial w never verifies
        assert!(!verify_witness(&g, &basis, &Word::empty(), &w("y")));
    }

    #[test]
    fn witness_from_pair_always_verifies() {
        for gens in [vec!["xx", "Yxxy"], vec!["xxx", "Yxxxy"], vec!["x", "Yxy"]] {
            let g = subgroup(&gens);
            if let Some(pair) = find_cycle_pair(&g, default_bound(&g)) {
                let witness = witness_from_pair(&g, &pair);
                let basis = g.basis();
                assert!(
                    verify_witness(&g, &basis, &witness.w, &witness.a),
                    "unverified witness for {gens:?}"
                );
            }
        }
    }

    #[test]
    fn squares_of_generators_subgroup_is_not_s_within_bound() {
        let g = subgroup(&["xxx", "yyy"]);
        match is_s_subgroup(&g, default_bound(&g)) {
            SVerdict::NoWithinBound { exact, .. } => assert!(!exact),
            other => panic!("expected bounded no, got {other:?}"),
        }
    }

    #[test]
    fn cases_two_and_three_always_yield_witnesses() {
        for gens in [
            vec!["xx", "yy", "xy"], // case 2 (normal of index 2)
            vec!["x", "Yxy"],       // case 3
            vec!["xy", "Yx"],       // case 3: intersection generated by xy
            vec!["xx", "yy", "xyx"],
        ] {
            let g = subgroup(&gens);
            let case = classify(&g).case;
            if matches!(case, CaseLabel::Case2 | CaseLabel::Case3) {
                assert!(
                    is_s_subgroup(&g, default_bound(&g)).is_yes(),
                    "case {case:?} must be an S-subgroup: {gens:?}"
                );
            }
        }
    }

    #[test]
    fn witness_transport_under_conjugation() {
        // conjugating H and the witness by b preserves verification
        let g = subgroup(&["xx", "Yxxy"]);
        let verdict = is_s_subgroup(&g, default_bound(&g));
        let witness = match verdict {
            SVerdict::Yes(w) => w,
            other => panic!("expected yes, got {other:?}"),
        };
        for b in ["x", "y", "xy", "Yx", "xyx", "XXY"] {
            let b = w(b);
            let basis = g.basis();
            let conj_gens: Vec<Word> =
                basis.basis_words.iter().map(|h| h.conjugate(&b)).collect();
            let hb = build_stallings(2, &conj_gens);
            let wb = witness.w.conjugate(&b);
            let ab_ = witness.a.conjugate(&b);
            let hb_basis = hb.basis();
            assert!(verify_witness(&hb, &hb_basis, &wb, &ab_), "transport by {b:?} failed");
        }
    }
}
