//! The `|·|_H` length function and its machinery: the finite family
//! `Ω(H)` of conjugate intersections, exact `|·|_Ω` computation through
//! reduction-saturated ball automata, the constants `C` and
//! `C_H = 6C + 2·diam(Γ(H))`, the girths `γ` and `γ_H`, and certified
//! upper bounds on the alternating-product distance.
//!
//! `|w|_Ω` counts the fewest factors needed to write `w` as a product of
//! single letters and elements of the Ω-members. The k-th ball is realized
//! as a nondeterministic automaton: k concatenated generator blocks, each
//! accepting one letter or one member element, saturated with
//! epsilon-shortcuts so that the reduced form of every accepted word is
//! accepted too. Saturation records how each shortcut arose, which lets a
//! successful run be expanded back into an explicit factorization.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::fiber::{components, diameter, ProductGraph};
use crate::graph::{conjugate_subgroups, fold, StallingsGraph};
use crate::word::{Letter, Word};
use crate::Error;

/// One member of `Ω(H)`: a folded graph whose basepoint cycles spell the
/// intersection `H^a ∩ H^b` for the anchor pair `(a, b)`.
#[derive(Clone, Debug)]
pub struct OmegaMember {
    pub graph: StallingsGraph,
    /// Anchor pair in `Γ(H)`, present when the member came from `omega`.
    pub anchor: Option<(usize, usize)>,
}

/// The finite family `Ω(H) = {H^a ∩ H^b | a ≠ b}` with trivial members
/// dropped and basepoint-isomorphic duplicates merged.
#[derive(Clone, Debug, Default)]
pub struct OmegaFamily {
    pub members: Vec<OmegaMember>,
}

impl OmegaFamily {
    pub fn empty() -> OmegaFamily {
        OmegaFamily { members: Vec::new() }
    }

    /// Ad-hoc family from arbitrary subgroup graphs, for direct `|·|_Ω`
    /// queries.
    pub fn from_subgroups(graphs: Vec<StallingsGraph>) -> OmegaFamily {
        OmegaFamily {
            members: graphs.into_iter().map(|g| OmegaMember { graph: g, anchor: None }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Builds `Ω(H)` from the dotted product of the full graph: one member per
/// non-diagonal product vertex whose component carries cycles, based at
/// that vertex and trimmed. Members with basepoint-respecting isomorphic
/// graphs are merged; the metric only sees each language once.
pub fn omega(g: &StallingsGraph) -> OmegaFamily {
    let product = ProductGraph::of(g, true);
    let comps = components(&product);
    let mut members: Vec<OmegaMember> = Vec::new();
    for comp in comps {
        if comp.rank == 0 {
            continue;
        }
        let in_comp: HashSet<(usize, usize)> = comp.vertices.iter().copied().collect();
        let mut keep = vec![false; product.vertex_count()];
        for (pid, pair) in product.pairs().iter().enumerate() {
            if in_comp.contains(pair) {
                keep[pid] = true;
            }
        }
        let (sub, old_of_new) = product.graph().induced(&keep);
        for (new_id, &old_id) in old_of_new.iter().enumerate() {
            let anchored = fold(sub.clone(), new_id);
            let member = OmegaMember { graph: anchored, anchor: Some(product.pairs()[old_id]) };
            if !members.iter().any(|m| crate::graph::same_subgroup(&m.graph, &member.graph)) {
                members.push(member);
            }
        }
    }
    OmegaFamily { members }
}

/// `Ω(H)` contains a conjugate of `H` itself exactly when the normalizer
/// of `H` is larger than `H`; then `|·|_H` is bounded on `H` and the
/// length-based criteria say nothing.
pub fn normalizer_warning(g: &StallingsGraph, family: &OmegaFamily) -> bool {
    family.members.iter().any(|m| conjugate_subgroups(&m.graph, g))
}

/// The explicit constants of the length-function criterion.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct Constants {
    /// Diameter of `Γ(H)`.
    pub diam_gamma: usize,
    /// `C = diam(Γ(H) ×̇ Γ(H)) + 1`; the empty dotted product gives 1.
    pub c: usize,
    /// `C_H = 6C + 2·diam(Γ(H))`.
    pub c_h: usize,
}

pub fn constants(g: &StallingsGraph) -> Constants {
    let diam_gamma = diameter(g.graph());
    let dotted = ProductGraph::of(g, true);
    let c = diameter(dotted.graph()) + 1;
    Constants { diam_gamma, c, c_h: 6 * c + 2 * diam_gamma }
}

/// `γ(N)`: length of the shortest nontrivial reduced basepoint cycle;
/// `None` for the trivial subgroup.
pub fn gamma(n: &StallingsGraph) -> Option<usize> {
    // BFS over directed edge steps; the arrival vertex is determined by
    // the step, and forbidding an immediate reversal keeps words reduced
    let mut seen = vec![false; 2 * n.edge_count()];
    let mut queue: VecDeque<(usize, (usize, bool), usize)> = VecDeque::new();
    for g in 0..n.rank() {
        for positive in [true, false] {
            if let Some((to, edge)) = n.step(n.basepoint(), Letter::new(g, positive)) {
                if to == n.basepoint() {
                    return Some(1);
                }
                seen[2 * edge + usize::from(positive)] = true;
                queue.push_back((to, (edge, positive), 1));
            }
        }
    }
    while let Some((v, (last_edge, last_dir), dist)) = queue.pop_front() {
        for g in 0..n.rank() {
            for positive in [true, false] {
                if let Some((to, edge)) = n.step(v, Letter::new(g, positive)) {
                    if edge == last_edge && positive != last_dir {
                        continue; // immediate backtrack
                    }
                    if to == n.basepoint() {
                        return Some(dist + 1);
                    }
                    let code = 2 * edge + usize::from(positive);
                    if !seen[code] {
                        seen[code] = true;
                        queue.push_back((to, (edge, positive), dist + 1));
                    }
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Ball automata with saturation provenance

type TransId = usize;
type EpsId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Attr {
    /// Single-letter transition of generator block `block`.
    LetterBlock { block: usize },
    /// Transition inside the copy of member `member` in block `block`.
    Member { block: usize, member: usize },
}

impl Attr {
    fn block(self) -> usize {
        match self {
            Attr::LetterBlock { block } | Attr::Member { block, .. } => block,
        }
    }
}

#[derive(Clone, Debug)]
struct Trans {
    from: usize,
    to: usize,
    letter: Letter,
    attr: Attr,
}

#[derive(Clone, Debug)]
enum Prov {
    /// Structural gluing; expands to nothing.
    Glue,
    /// Shortcut for `open · (chain) · close` where the chain reduces to
    /// the trivial word; expands to its letters.
    Shortcut { open: TransId, chain: Vec<EpsId>, close: TransId },
}

#[derive(Clone, Debug)]
struct Eps {
    from: usize,
    to: usize,
    prov: Prov,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    Step(TransId),
    Jump(EpsId),
}

/// The k-ball automaton of a generator family, grown block by block and
/// kept saturated.
#[derive(Clone)]
pub struct BallAutomaton {
    rank: usize,
    n_states: usize,
    start: usize,
    accept: usize,
    blocks: usize,
    trans: Vec<Trans>,
    out: Vec<Vec<TransId>>,
    eps: Vec<Eps>,
    eps_out: Vec<Vec<EpsId>>,
    eps_set: HashSet<(usize, usize)>,
    /// States of each member copy in each block, for sanity checks.
    state_count_per_block: Vec<usize>,
}

impl BallAutomaton {
    /// The 0-ball: accepts exactly the trivial word.
    pub fn new(rank: usize) -> BallAutomaton {
        BallAutomaton {
            rank,
            n_states: 1,
            start: 0,
            accept: 0,
            blocks: 0,
            trans: Vec::new(),
            out: vec![Vec::new()],
            eps: Vec::new(),
            eps_out: vec![Vec::new()],
            eps_set: HashSet::new(),
            state_count_per_block: vec![1],
        }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn state_count(&self) -> usize {
        self.n_states
    }

    fn add_state(&mut self) -> usize {
        self.n_states += 1;
        self.out.push(Vec::new());
        self.eps_out.push(Vec::new());
        self.n_states - 1
    }

    fn add_trans(&mut self, from: usize, to: usize, letter: Letter, attr: Attr) {
        let id = self.trans.len();
        self.trans.push(Trans { from, to, letter, attr });
        self.out[from].push(id);
    }

    fn add_eps(&mut self, from: usize, to: usize, prov: Prov) -> bool {
        if !self.eps_set.insert((from, to)) {
            return false;
        }
        let id = self.eps.len();
        self.eps.push(Eps { from, to, prov });
        self.eps_out[from].push(id);
        true
    }

    /// Appends one generator block (letters plus every member language)
    /// and re-saturates.
    pub fn push_block(&mut self, family: &OmegaFamily) {
        let block = self.blocks;
        self.blocks += 1;
        let entry = self.add_state();
        let exit = self.add_state();
        let prev_accept = self.accept;
        self.add_eps(prev_accept, entry, Prov::Glue);
        for g in 0..self.rank {
            for positive in [true, false] {
                self.add_trans(entry, exit, Letter::new(g, positive), Attr::LetterBlock { block });
            }
        }
        for (midx, member) in family.members.iter().enumerate() {
            let base = self.n_states;
            for _ in 0..member.graph.vertex_count() {
                self.add_state();
            }
            for e in member.graph.edges() {
                self.add_trans(
                    base + e.origin,
                    base + e.terminus,
                    Letter::new(e.label, true),
                    Attr::Member { block, member: midx },
                );
                self.add_trans(
                    base + e.terminus,
                    base + e.origin,
                    Letter::new(e.label, false),
                    Attr::Member { block, member: midx },
                );
            }
            let anchor = base + member.graph.basepoint();
            self.add_eps(entry, anchor, Prov::Glue);
            self.add_eps(anchor, exit, Prov::Glue);
        }
        self.accept = exit;
        self.state_count_per_block.push(self.n_states);
        self.saturate();
    }

    /// Epsilon-closure of `q`, recording one epsilon path per reached
    /// state.
    fn closure_with_paths(&self, q: usize) -> HashMap<usize, Vec<EpsId>> {
        let mut paths: HashMap<usize, Vec<EpsId>> = HashMap::new();
        paths.insert(q, Vec::new());
        let mut queue = VecDeque::from([q]);
        while let Some(s) = queue.pop_front() {
            let base = paths[&s].clone();
            for &eid in &self.eps_out[s] {
                let to = self.eps[eid].to;
                if !paths.contains_key(&to) {
                    let mut path = base.clone();
                    path.push(eid);
                    paths.insert(to, path);
                    queue.push_back(to);
                }
            }
        }
        paths
    }

    /// Benois saturation to a fixpoint: whenever `p -x-> q`, `q` reaches
    /// `r` through epsilon-shortcuts, and `r -x⁻¹-> s`, the pair `(p, s)`
    /// becomes an epsilon-shortcut; its derivation is recorded so runs can
    /// be expanded back into unreduced witnesses.
    fn saturate(&mut self) {
        loop {
            let mut pending: Vec<(usize, usize, Prov)> = Vec::new();
            for t1 in 0..self.trans.len() {
                let (p, q, x) = (self.trans[t1].from, self.trans[t1].to, self.trans[t1].letter);
                let closure = self.closure_with_paths(q);
                for (r, chain) in &closure {
                    for &t2 in &self.out[*r] {
                        if self.trans[t2].letter != x.inverse() {
                            continue;
                        }
                        let s = self.trans[t2].to;
                        if !self.eps_set.contains(&(p, s))
                            && !pending.iter().any(|&(a, b, _)| (a, b) == (p, s))
                        {
                            pending.push((
                                p,
                                s,
                                Prov::Shortcut { open: t1, chain: chain.clone(), close: t2 },
                            ));
                        }
                    }
                }
            }
            if pending.is_empty() {
                return;
            }
            for (from, to, prov) in pending {
                self.add_eps(from, to, prov);
            }
        }
    }

    fn closure_of_set(&self, set: &HashSet<usize>) -> HashSet<usize> {
        let mut out = set.clone();
        let mut queue: VecDeque<usize> = set.iter().copied().collect();
        while let Some(s) = queue.pop_front() {
            for &eid in &self.eps_out[s] {
                let to = self.eps[eid].to;
                if out.insert(to) {
                    queue.push_back(to);
                }
            }
        }
        out
    }

    /// Acceptance of a reduced word by the saturated automaton, which by
    /// the closure property decides membership of `w` in the reduced
    /// language of the ball.
    pub fn accepts(&self, w: &Word) -> bool {
        let mut cur: HashSet<usize> = HashSet::from([self.start]);
        cur = self.closure_of_set(&cur);
        for &letter in w.letters() {
            let mut next = HashSet::new();
            for &s in &cur {
                for &tid in &self.out[s] {
                    if self.trans[tid].letter == letter {
                        next.insert(self.trans[tid].to);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            cur = self.closure_of_set(&next);
        }
        cur.contains(&self.accept)
    }

    /// One accepting run on a reduced word, as moves through the
    /// saturated automaton.
    fn run(&self, w: &Word) -> Option<Vec<Move>> {
        // BFS over (state, consumed) with parent pointers
        let mut parent: HashMap<(usize, usize), ((usize, usize), Move)> = HashMap::new();
        let mut queue = VecDeque::from([(self.start, 0usize)]);
        let mut seen = HashSet::from([(self.start, 0usize)]);
        let target = (self.accept, w.len());
        while let Some((s, i)) = queue.pop_front() {
            if (s, i) == target {
                let mut moves = Vec::new();
                let mut cur = target;
                while cur != (self.start, 0) {
                    let (prev, mv) = parent[&cur];
                    moves.push(mv);
                    cur = prev;
                }
                moves.reverse();
                return Some(moves);
            }
            for &eid in &self.eps_out[s] {
                let next = (self.eps[eid].to, i);
                if seen.insert(next) {
                    parent.insert(next, ((s, i), Move::Jump(eid)));
                    queue.push_back(next);
                }
            }
            if i < w.len() {
                let letter = w.letters()[i];
                for &tid in &self.out[s] {
                    if self.trans[tid].letter == letter {
                        let next = (self.trans[tid].to, i + 1);
                        if seen.insert(next) {
                            parent.insert(next, ((s, i), Move::Step(tid)));
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        None
    }

    /// Expands a run into the letter transitions of the unsaturated
    /// automaton; shortcut derivations only reference earlier shortcuts,
    /// so the recursion is well-founded.
    fn expand(&self, moves: &[Move]) -> Vec<TransId> {
        let mut cache: HashMap<EpsId, Vec<TransId>> = HashMap::new();
        let mut out = Vec::new();
        for mv in moves {
            match mv {
                Move::Step(tid) => out.push(*tid),
                Move::Jump(eid) => out.extend(self.expand_eps(*eid, &mut cache)),
            }
        }
        out
    }

    fn expand_eps(&self, eid: EpsId, cache: &mut HashMap<EpsId, Vec<TransId>>) -> Vec<TransId> {
        if let Some(hit) = cache.get(&eid) {
            return hit.clone();
        }
        let result = match &self.eps[eid].prov {
            Prov::Glue => Vec::new(),
            Prov::Shortcut { open, chain, close } => {
                let mut seq = vec![*open];
                for &inner in chain {
                    debug_assert!(inner < eid);
                    seq.extend(self.expand_eps(inner, cache));
                }
                seq.push(*close);
                seq
            }
        };
        cache.insert(eid, result.clone());
        result
    }
}

/// One factor of an Ω-factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Letter(Letter),
    /// An element of the member's language, with the member index.
    Member { member: usize, word: Word },
}

/// Growable metric engine for one Ω-family: answers `|·|_Ω` queries and
/// recovers explicit factorizations. `machines[k]` is the saturated
/// k-block ball automaton.
pub struct BallFamily {
    pub family: OmegaFamily,
    machines: Vec<BallAutomaton>,
}

impl BallFamily {
    pub fn new(rank: usize, family: OmegaFamily) -> BallFamily {
        BallFamily { family, machines: vec![BallAutomaton::new(rank)] }
    }

    fn ensure_blocks(&mut self, k: usize) {
        while self.machines.len() <= k {
            let mut next = self.machines.last().unwrap().clone();
            next.push_block(&self.family);
            self.machines.push(next);
        }
    }

    /// Membership of a reduced word in the k-ball.
    pub fn ball_accepts(&mut self, w: &Word, k: usize) -> bool {
        self.ensure_blocks(k);
        self.machines[k].accepts(w)
    }

    /// Exact `|w|_Ω`: the least `k` whose ball accepts `w`. Terminates
    /// because `|w|_Ω ≤ |w|`.
    pub fn length(&mut self, w: &Word) -> usize {
        if w.is_empty() {
            return 0;
        }
        for k in 1..=w.len() {
            if self.ball_accepts(w, k) {
                return k;
            }
        }
        unreachable!("letters alone reach any reduced word at k = |w|")
    }

    /// Exact length together with an explicit factorization whose product
    /// reduces to `w`.
    pub fn factorization(&mut self, w: &Word) -> (usize, Vec<Factor>) {
        let k = self.length(w);
        if w.is_empty() {
            return (0, Vec::new());
        }
        let machine = &self.machines[k];
        let moves = machine.run(w).expect("length-k ball must accept");
        let expanded = machine.expand(&moves);
        let mut factors: Vec<Factor> = Vec::new();
        let mut last_block = None;
        let mut member_letters: Vec<Letter> = Vec::new();
        let mut member_idx = usize::MAX;
        let flush =
            |letters: &mut Vec<Letter>, idx: usize, factors: &mut Vec<Factor>| {
                if idx != usize::MAX {
                    let word = Word::reduce(letters.drain(..));
                    if !word.is_empty() {
                        factors.push(Factor::Member { member: idx, word });
                    }
                }
            };
        for tid in expanded {
            let t = &machine.trans[tid];
            let block = t.attr.block();
            debug_assert!(last_block.map_or(true, |b| block >= b), "blocks run forward");
            if last_block != Some(block) || !matches!(t.attr, Attr::Member { .. }) {
                flush(&mut member_letters, member_idx, &mut factors);
                member_idx = usize::MAX;
            }
            match t.attr {
                Attr::LetterBlock { .. } => factors.push(Factor::Letter(t.letter)),
                Attr::Member { member, .. } => {
                    member_idx = member;
                    member_letters.push(t.letter);
                }
            }
            last_block = Some(block);
        }
        flush(&mut member_letters, member_idx, &mut factors);

        // trust nothing: the factors must multiply back to w, stay within
        // their member languages, and not exceed k
        let product = Word::product(
            factors
                .iter()
                .map(|f| match f {
                    Factor::Letter(l) => Word::from_letter(*l),
                    Factor::Member { word, .. } => word.clone(),
                })
                .collect::<Vec<_>>()
                .iter(),
        );
        assert_eq!(&product, w, "recovered factorization must rebuild the word");
        assert!(factors.len() <= k);
        for f in &factors {
            if let Factor::Member { member, word } = f {
                assert!(self.family.members[*member].graph.member(word));
            }
        }
        (k, factors)
    }

    /// State counts of the balls built so far, smallest first.
    pub fn ball_state_counts(&self) -> Vec<usize> {
        self.machines.iter().map(BallAutomaton::state_count).collect()
    }
}

/// Exact `|w|_Ω` via iterated balls.
pub fn omega_length(w: &Word, family: &OmegaFamily, rank: usize) -> usize {
    BallFamily::new(rank, family.clone()).length(w)
}

/// `|w|_H = |w|_{Ω(H)}`.
pub fn h_length(w: &Word, g: &StallingsGraph) -> usize {
    omega_length(w, &omega(g), g.rank())
}

/// `γ_H(N)`: least `k` whose ball contains a nontrivial element of `N`,
/// decided by emptiness of the product of the ball automaton with the
/// cycle automaton of `Γ(N)`. `None` encodes infinity (trivial `N`).
///
/// The precondition `N ≤ H` is checked by sending the basis words of `N`
/// through membership in `Γ(H)`.
pub fn gamma_h(
    n: &StallingsGraph,
    h: &StallingsGraph,
    balls: &mut BallFamily,
) -> Result<Option<usize>, Error> {
    for word in &n.basis().basis_words {
        if !h.member(word) {
            return Err(Error::Precondition(format!(
                "N is not a subgroup of H: basis word of length {} fails membership",
                word.len()
            )));
        }
    }
    let Some(plain_gamma) = gamma(n) else {
        return Ok(None);
    };
    for k in 1..=plain_gamma {
        balls.ensure_blocks(k);
        if ball_meets_cycles(&balls.machines[k], n) {
            return Ok(Some(k));
        }
    }
    unreachable!("the γ(N)-ball contains a shortest element of N")
}

/// Emptiness of the intersection of the ball language with the nontrivial
/// reduced cycle language of `Γ(N)`: BFS over (ball state, N-vertex, last
/// letter) where the last letter forbids immediate backtracking. The
/// state space is marked densely; covers get large.
fn ball_meets_cycles(ball: &BallAutomaton, n: &StallingsGraph) -> bool {
    // states from which the accept state is epsilon-reachable
    let mut accepting = vec![false; ball.n_states];
    accepting[ball.accept] = true;
    loop {
        let mut changed = false;
        for e in &ball.eps {
            if accepting[e.to] && !accepting[e.from] {
                accepting[e.from] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let last_codes = 2 * n.rank() + 1; // letter index + 1, or 0 for none
    let encode = |s: usize, v: usize, last: usize| (s * n.vertex_count() + v) * last_codes + last;
    let mut seen = vec![false; ball.n_states * n.vertex_count() * last_codes];
    let start = (ball.start, n.basepoint(), 0usize);
    seen[encode(start.0, start.1, start.2)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some((s, v, last)) = queue.pop_front() {
        if last != 0 && v == n.basepoint() && accepting[s] {
            return true;
        }
        for &eid in &ball.eps_out[s] {
            let to = ball.eps[eid].to;
            let code = encode(to, v, last);
            if !seen[code] {
                seen[code] = true;
                queue.push_back((to, v, last));
            }
        }
        for &tid in &ball.out[s] {
            let letter = ball.trans[tid].letter;
            if last != 0 && last - 1 == letter.inverse().index() {
                continue;
            }
            if let Some((nv, _)) = n.step(v, letter) {
                let to = ball.trans[tid].to;
                let code = encode(to, nv, letter.index() + 1);
                if !seen[code] {
                    seen[code] = true;
                    queue.push_back((to, nv, letter.index() + 1));
                }
            }
        }
    }
    false
}

/// A fully verified alternating product `w_1 h_1 … h_{n-1} w_n` with its
/// weight `Σ(|w_i|+1) - 1`.
#[derive(Clone, Debug)]
pub struct AlternatingProduct {
    pub letter_blocks: Vec<Word>,
    pub h_syllables: Vec<Word>,
    pub weight: usize,
}

/// Certified upper bound on the alternating-product distance `d̂(1, h)`.
///
/// Two explicit products are considered: the single-block product `h`
/// itself (weight `|h|`), and, when an Ω-factorization of `h` uses member
/// factors, the factorization conjugated into `H` along basepoint paths
/// to the member anchors. Every candidate is re-verified: H-syllables are
/// nontrivial members, alternation prefixes stay outside `H`, prefixes
/// stay within `cap`, and the product reduces to `h`. The best surviving
/// weight is returned, which is `|h|` at worst.
pub fn alt_distance_upper(
    h_word: &Word,
    h: &StallingsGraph,
    balls: &mut BallFamily,
    cap: usize,
) -> usize {
    let mut best = h_word.len();
    if h_word.is_empty() {
        return 0;
    }
    if let Some(product) = conjugated_factorization(h_word, h, balls, cap) {
        best = best.min(product.weight);
    }
    best
}

/// Builds the alternating product out of an optimal Ω-factorization:
/// member factors become H-syllables after conjugation by a basepoint
/// path to one of their two anchors, the anchor being chosen so that each
/// alternation prefix stays outside `H`. Distinct anchors guarantee such
/// a choice exists.
fn conjugated_factorization(
    h_word: &Word,
    h: &StallingsGraph,
    balls: &mut BallFamily,
    cap: usize,
) -> Option<AlternatingProduct> {
    let (_k, factors) = balls.factorization(h_word);
    if !factors.iter().any(|f| matches!(f, Factor::Member { .. })) {
        return None;
    }
    // group into letter runs and member syllables
    let mut letter_runs: Vec<Word> = vec![Word::empty()];
    let mut syllables: Vec<(usize, Word)> = Vec::new();
    for f in factors {
        match f {
            Factor::Letter(l) => {
                let last = letter_runs.last_mut().unwrap();
                *last = last.concat(&Word::from_letter(l));
            }
            Factor::Member { member, word } => {
                syllables.push((member, word));
                letter_runs.push(Word::empty());
            }
        }
    }
    let s = syllables.len();
    debug_assert_eq!(letter_runs.len(), s + 1);

    // choose conjugators: b_i sends syllable i into H; the alternation
    // prefix before each inner letter block must avoid H
    let mut conjugators: Vec<Word> = Vec::with_capacity(s);
    let mut prefix = Word::empty();
    for i in 0..s {
        prefix = prefix.concat(&letter_runs[i]);
        let (member, _) = &syllables[i];
        // ad-hoc families carry no anchors; only omega-built ones do
        let (a, b) = balls.family.members[*member].anchor?;
        let beta = h.path_label(h.basepoint(), a).expect("connected");
        let beta_prime = h.path_label(h.basepoint(), b).expect("connected");
        let pick = if !h.member(&prefix.concat(&beta.inverse())) {
            beta
        } else {
            debug_assert!(
                !h.member(&prefix.concat(&beta_prime.inverse())),
                "anchors are distinct, one choice must leave H"
            );
            beta_prime
        };
        conjugators.push(pick);
        prefix = prefix.concat(&syllables[i].1);
    }

    // assemble w'_i = b_{i-1} w_i b_i⁻¹ and h'_i = b_i g_i b_i⁻¹
    let empty = Word::empty();
    let mut letter_blocks = Vec::with_capacity(s + 1);
    let mut h_syllables = Vec::with_capacity(s);
    for i in 0..=s {
        let left = if i == 0 { &empty } else { &conjugators[i - 1] };
        let right = if i == s { &empty } else { &conjugators[i] };
        letter_blocks.push(Word::product([left, &letter_runs[i], &right.inverse()]));
        if i < s {
            h_syllables.push(syllables[i].1.conjugate(&conjugators[i].inverse()));
        }
    }

    // full verification of the candidate product
    let mut running = Word::empty();
    for i in 0..=s {
        running = running.concat(&letter_blocks[i]);
        if running.len() > cap {
            return None;
        }
        if i < s {
            let syllable = &h_syllables[i];
            if syllable.is_empty() || !h.member(syllable) {
                return None;
            }
            if h.member(&running) {
                return None; // alternation constraint violated
            }
            running = running.concat(syllable);
            if running.len() > cap {
                return None;
            }
        }
    }
    if &running != h_word {
        return None;
    }
    let weight = letter_blocks.iter().map(|w| w.len() + 1).sum::<usize>() - 1;
    Some(AlternatingProduct { letter_blocks, h_syllables, weight })
}

/// Per-sample record of the Lipschitz comparison between `|·|_H` and the
/// alternating-product distance.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzRecord {
    pub word: String,
    pub length: usize,
    pub h_length: usize,
    pub alt_upper: usize,
    pub upper_ok: bool,
    pub lower_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub constants: Constants,
    pub records: Vec<LipschitzRecord>,
    pub violations: usize,
}

/// Checks `|h|_H ≤ C · alt_upper(h)` and
/// `alt_upper(h) ≤ (1 + 2·diam(Γ)) · |h|_H` on each sample.
pub fn lipschitz_report(
    g: &StallingsGraph,
    samples: &[Word],
    alphabet: &crate::word::Alphabet,
) -> Result<LipschitzReport, Error> {
    let consts = constants(g);
    let family = omega(g);
    let mut balls = BallFamily::new(g.rank(), family);
    let mut records = Vec::new();
    let mut violations = 0;
    for h_word in samples {
        if !g.member(h_word) {
            return Err(Error::Precondition(format!(
                "lipschitz sample {:?} is not a member of H",
                alphabet.format_word(h_word)
            )));
        }
        let hl = balls.length(h_word);
        let cap = (1 + 2 * consts.diam_gamma) * hl + 2 * consts.diam_gamma + 4 * h_word.len() + 16;
        let au = alt_distance_upper(h_word, g, &mut balls, cap);
        let upper_ok = hl <= consts.c * au;
        let lower_ok = au <= (1 + 2 * consts.diam_gamma) * hl;
        if !(upper_ok && lower_ok) {
            violations += 1;
        }
        records.push(LipschitzRecord {
            word: alphabet.format_word(h_word),
            length: h_word.len(),
            h_length: hl,
            alt_upper: au,
            upper_ok,
            lower_ok,
        });
    }
    Ok(LipschitzReport { constants: consts, records, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn omega_of_malnormal_and_trivial_is_empty() {
        assert!(omega(&subgroup(&["x"])).is_empty());
        assert!(omega(&StallingsGraph::trivial(2)).is_empty());
        assert!(omega(&subgroup(&["xxy", "xyy"])).is_empty());
    }

    #[test]
    fn omega_of_conjugated_square_contains_square_member() {
        let family = omega(&subgroup(&["xx", "Yxxy"]));
        assert!(!family.is_empty());
        // some member's language contains x² or its inverse
        assert!(family
            .members
            .iter()
            .any(|m| m.graph.member(&w("xx"))));
        for m in &family.members {
            assert!(m.anchor.is_some());
            assert!(m.graph.subgroup_rank() >= 1);
        }
    }

    /// Exhaustive factorization oracle: breadth-first search from the
    /// trivial word, one factor per step, factors being single letters or
    /// enumerated member elements; intermediate products may overshoot
    /// the target length by a generous pad.
    fn omega_ball_distances(family: &OmegaFamily, max_len: usize) -> HashMap<Word, usize> {
        let member_elems: Vec<Word> = family
            .members
            .iter()
            .flat_map(|m| m.graph.cycles_at(m.graph.basepoint(), 2 * max_len))
            .collect();
        let mut dist: HashMap<Word, usize> = HashMap::from([(Word::empty(), 0)]);
        let mut frontier = vec![Word::empty()];
        while !frontier.is_empty() {
            let mut next_frontier = Vec::new();
            for base in &frontier {
                let d = dist[base];
                let mut moves: Vec<Word> = Vec::new();
                for g in 0..2 {
                    for positive in [true, false] {
                        moves.push(base.concat(&Word::from_letter(Letter::new(g, positive))));
                    }
                }
                for elem in &member_elems {
                    moves.push(base.concat(elem));
                }
                for product in moves {
                    if product.len() <= max_len && !dist.contains_key(&product) {
                        dist.insert(product.clone(), d + 1);
                        next_frontier.push(product);
                    }
                }
            }
            frontier = next_frontier;
        }
        dist
    }

    fn all_reduced_words(max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for word in &frontier {
                for g in 0..2 {
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

    #[test]
    fn omega_length_with_empty_family_is_word_length() {
        let family = OmegaFamily::empty();
        for word in all_reduced_words(5) {
            assert_eq!(omega_length(&word, &family, 2), word.len());
        }
    }

    #[test]
    fn omega_length_examples() {
        let family = OmegaFamily::from_subgroups(vec![subgroup(&["x"])]);
        assert_eq!(omega_length(&Word::empty(), &family, 2), 0);
        assert_eq!(omega_length(&w("xxxxxy"), &family, 2), 2);
        assert_eq!(omega_length(&w("xxxxx"), &family, 2), 1);
        assert_eq!(omega_length(&w("yxxxxxy"), &family, 2), 3);
    }

    #[test]
    fn omega_length_matches_exhaustive_search() {
        let families = [
            OmegaFamily::empty(),
            OmegaFamily::from_subgroups(vec![subgroup(&["x"])]),
            omega(&subgroup(&["xxx", "Yxxxy"])),
        ];
        for family in &families {
            let mut balls = BallFamily::new(2, family.clone());
            let oracle = omega_ball_distances(family, 4 + 3);
            for word in all_reduced_words(4) {
                let got = balls.length(&word);
                let expected = oracle[&word];
                assert_eq!(got, expected, "family size {} word {:?}", family.len(), word);
            }
        }
    }

    #[test]
    fn omega_length_is_a_length_function() {
        let family = omega(&subgroup(&["xx", "Yxxy"]));
        let mut balls = BallFamily::new(2, family);
        let samples = ["", "x", "xx", "xyX", "xxxx", "yxxY", "xyxy"].map(|s| w(s));
        assert_eq!(balls.length(&Word::empty()), 0);
        for u in &samples {
            assert_eq!(balls.length(u), balls.length(&u.inverse()));
            for v in &samples {
                let prod = u.concat(v);
                assert!(balls.length(&prod) <= balls.length(u) + balls.length(v));
            }
        }
    }

    #[test]
    fn factorization_recovers_products() {
        let family = omega(&subgroup(&["xxx", "Yxxxy"]));
        let mut balls = BallFamily::new(2, family);
        for word in ["xxx", "xxxxxx", "yxxx", "xxxyX", "xy", "xxxxX"] {
            let word = w(word);
            let (k, factors) = balls.factorization(&word);
            assert_eq!(k, balls.length(&word));
            assert!(!factors.is_empty() || word.is_empty());
        }
        // a member factor genuinely appears when it shortens the word
        let (k, factors) = balls.factorization(&w("xxxxxxy"));
        assert!(k <= 3);
        assert!(factors.iter().any(|f| matches!(f, Factor::Member { .. })));
    }

    #[test]
    fn constants_frozen_examples() {
        let c = constants(&subgroup(&["x"]));
        assert_eq!(c, Constants { diam_gamma: 0, c: 1, c_h: 6 });

        // Γ(⟨x²,y²⟩): diam 2; dotted product diameter 1
        let c = constants(&subgroup(&["xx", "yy"]));
        assert_eq!(c, Constants { diam_gamma: 2, c: 2, c_h: 16 });

        let c2 = constants(&subgroup(&["xx", "yy"]));
        assert_eq!(c2.c_h, 6 * c2.c + 2 * c2.diam_gamma);
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&subgroup(&["xxxxx"])), Some(5));
        assert_eq!(gamma(&StallingsGraph::trivial(2)), None);
        assert_eq!(gamma(&subgroup(&["x", "y"])), Some(1));
        assert_eq!(gamma(&subgroup(&["xx", "yy", "xy"])), Some(2));
    }

    #[test]
    fn gamma_h_bounds_and_cross_check() {
        // malnormal H: |·|_H = |·| and γ_H = γ
        let h = subgroup(&["xxy", "xyy"]);
        let n = build_stallings(2, &[w("xxy").pow(3), w("xyy").pow(2)]);
        let mut balls = BallFamily::new(2, omega(&h));
        let got = gamma_h(&n, &h, &mut balls).unwrap();
        assert_eq!(got, gamma(&n));

        // H₁ with N = ⟨x⁶⟩: the x-powers are Ω-members, so γ_H = 1
        let h1 = subgroup(&["xxx", "Yxxxy"]);
        let n = subgroup(&["xxxxxx"]);
        let mut balls = BallFamily::new(2, omega(&h1));
        let got = gamma_h(&n, &h1, &mut balls).unwrap().unwrap();
        assert_eq!(got, 1);
        // enumeration cross-check: min |·|_H over N-elements of length ≤ 8
        let mut best = usize::MAX;
        for elem in n.cycles_at(n.basepoint(), 8) {
            best = best.min(balls.length(&elem));
        }
        assert_eq!(best, got);

        // γ_H ≤ γ in general
        assert!(got <= gamma(&n).unwrap());

        // trivial N gives infinity
        let mut balls = BallFamily::new(2, omega(&h1));
        assert_eq!(gamma_h(&StallingsGraph::trivial(2), &h1, &mut balls).unwrap(), None);
    }

    #[test]
    fn gamma_h_rejects_non_subgroups() {
        let h = subgroup(&["xx", "yy"]);
        let n = subgroup(&["x"]);
        let mut balls = BallFamily::new(2, omega(&h));
        assert!(gamma_h(&n, &h, &mut balls).is_err());
    }

    #[test]
    fn path_labels_in_dotted_product_have_small_h_length() {
        // any label carried by the dotted product has |w|_H ≤ C
        let h = subgroup(&["xxx", "Yxxxy"]);
        let consts = constants(&h);
        let dotted = ProductGraph::of(&h, true);
        let mut balls = BallFamily::new(2, omega(&h));
        let labels = dotted_path_labels(&dotted, 8);
        assert!(!labels.is_empty());
        for label in labels {
            assert!(
                balls.length(&label) <= consts.c,
                "label {:?} exceeds C = {}",
                ab().format_word(&label),
                consts.c
            );
        }
    }

    fn dotted_path_labels(p: &ProductGraph, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        for start in 0..p.vertex_count() {
            let mut stack: Vec<(usize, Option<(usize, bool)>, Vec<Letter>)> =
                vec![(start, None, Vec::new())];
            while let Some((cur, last, letters)) = stack.pop() {
                if !letters.is_empty() {
                    out.push(Word::from_reduced_letters(letters.clone()));
                }
                if letters.len() == max_len {
                    continue;
                }
                for (id, e) in p.graph().edges().iter().enumerate() {
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
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn long_words_trace_at_most_once() {
        // uniqueness of paths for |w|_H > C
        let h = subgroup(&["xxx", "Yxxxy"]);
        let consts = constants(&h);
        let mut balls = BallFamily::new(2, omega(&h));
        let mut checked = 0;
        for word in all_reduced_words(5) {
            if word.is_empty() || balls.length(&word) <= consts.c {
                continue;
            }
            let paths = (0..h.vertex_count())
                .filter(|&v| h.trace(v, &word).is_some())
                .count();
            assert!(paths <= 1, "word {:?} has {paths} paths", ab().format_word(&word));
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn alt_distance_examples() {
        // h = 1
        let h = subgroup(&["y"]);
        let mut balls = BallFamily::new(2, omega(&h));
        assert_eq!(alt_distance_upper(&Word::empty(), &h, &mut balls, 100), 0);

        // H = ⟨y⟩ is malnormal: x^k costs exactly k
        for k in 1..=5 {
            let word = w("x").pow(k);
            assert_eq!(alt_distance_upper(&word, &h, &mut balls, 100), k as usize);
        }

        // members of H cost at most their length
        let h1 = subgroup(&["xxx", "Yxxxy"]);
        let mut balls = BallFamily::new(2, omega(&h1));
        for member in h1.cycles_at(h1.basepoint(), 8) {
            let bound = alt_distance_upper(&member, &h1, &mut balls, 200);
            assert!(bound <= member.len());
        }
    }

    #[test]
    fn lipschitz_report_passes_on_samples() {
        let alphabet = ab();
        // malnormal example
        let h = subgroup(&["xxy", "xyy"]);
        let samples: Vec<Word> = h.cycles_at(h.basepoint(), 9);
        let report = lipschitz_report(&h, &samples, &alphabet).unwrap();
        assert_eq!(report.violations, 0);
        assert!(!report.records.is_empty());

        // H₁ with n = 3
        let h1 = subgroup(&["xxx", "Yxxxy"]);
        let samples: Vec<Word> = h1.cycles_at(h1.basepoint(), 9);
        let report = lipschitz_report(&h1, &samples, &alphabet).unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn lipschitz_rejects_non_members() {
        let h = subgroup(&["xx", "yy"]);
        assert!(lipschitz_report(&h, &[w("x")], &ab()).is_err());
    }

    #[test]
    fn normalizer_diagnostic() {
        // Norm(⟨x²⟩) ⊇ ⟨x⟩, so Ω contains a conjugate of H itself
        let h = subgroup(&["xx"]);
        let family = omega(&h);
        assert!(normalizer_warning(&h, &family));

        let h = subgroup(&["xxy", "xyy"]);
        assert!(!normalizer_warning(&h, &omega(&h)));
    }
}
