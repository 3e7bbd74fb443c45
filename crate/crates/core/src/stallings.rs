//! Stallings foldings carrying preimage labels.
//!
//! Every edge stores a word in the domain letters. Reading a closed path at
//! the base multiplies those labels into a preimage of the word read. Folding
//! keeps this true by regauging a state (conjugating the labels around it)
//! before two edges are identified.

use std::collections::{BTreeMap, VecDeque};

use crate::word::{self, Letter, Word};

#[derive(Clone, Debug)]
struct RawEdge {
    from: usize,
    letter: Letter,
    to: usize,
    label: Word,
}

/// Folded labelled graph for the subgroup generated by a list of reduced words.
#[derive(Clone, Debug)]
pub struct StallingsGraph {
    nstates: usize,
    /// `adj[q][signed letter] = (target, label)`.
    adj: Vec<BTreeMap<Letter, (usize, Word)>>,
    /// Spanning-tree word from the base to each state.
    tree: Vec<Word>,
    ngens: usize,
    trivial_gens: usize,
    label_conflict: bool,
}

fn dart(e: &RawEdge, forward: bool) -> (usize, Letter, usize, Word) {
    if forward {
        (e.from, e.letter, e.to, e.label.clone())
    } else {
        (e.to, -e.letter, e.from, word::inverse(&e.label))
    }
}

fn shift(edges: &mut [Option<RawEdge>], q: usize, c: &[Letter]) {
    let ci = word::inverse(c);
    for e in edges.iter_mut().flatten() {
        if e.from == q && e.to == q {
            e.label = word::mul(&word::mul(c, &e.label), &ci);
        } else if e.from == q {
            e.label = word::mul(c, &e.label);
        } else if e.to == q {
            e.label = word::mul(&e.label, &ci);
        }
    }
}

fn merge(edges: &mut [Option<RawEdge>], from: usize, into: usize) {
    for e in edges.iter_mut().flatten() {
        if e.from == from {
            e.from = into;
        }
        if e.to == from {
            e.to = into;
        }
    }
}

/// Folds until no state has two darts with the same signed letter.
/// Returns true when two parallel edges carried different labels.
fn fold(edges: &mut [Option<RawEdge>]) -> bool {
    let mut conflict = false;
    loop {
        let mut seen: BTreeMap<(usize, Letter), (usize, bool)> = BTreeMap::new();
        let mut found = None;
        'scan: for (i, e) in edges.iter().enumerate() {
            let Some(e) = e else { continue };
            for fwd in [true, false] {
                let (p, l, _, _) = dart(e, fwd);
                if let Some(&(j, fj)) = seen.get(&(p, l)) {
                    if j != i {
                        found = Some(((j, fj), (i, fwd)));
                        break 'scan;
                    }
                } else {
                    seen.insert((p, l), (i, fwd));
                }
            }
        }
        let Some(((e1, f1), (e2, f2))) = found else { return conflict };
        let (p, _, q1, u1) = dart(edges[e1].as_ref().unwrap(), f1);
        let (_, _, q2, u2) = dart(edges[e2].as_ref().unwrap(), f2);
        if q1 == q2 {
            if u1 != u2 {
                conflict = true;
            }
            edges[e2] = None;
            continue;
        }
        if q2 != 0 && q2 != p {
            shift(edges, q2, &word::mul(&word::inverse(&u1), &u2));
            merge(edges, q2, q1);
            edges[e2] = None;
        } else if q1 != 0 && q1 != p {
            shift(edges, q1, &word::mul(&word::inverse(&u2), &u1));
            merge(edges, q1, q2);
            edges[e1] = None;
        } else {
            // {q1, q2} = {p, base} with p away from the base.
            let (ub, up) = if q1 == 0 { (u1, u2) } else { (u2, u1) };
            shift(edges, p, &word::mul(&word::inverse(&ub), &up));
            merge(edges, p, 0);
            edges[e2] = None;
        }
    }
}

impl StallingsGraph {
    /// Folded graph of `<gens>`; domain letter `i + 1` labels generator `i`.
    pub fn new(gens: &[Word]) -> StallingsGraph {
        let mut edges: Vec<Option<RawEdge>> = Vec::new();
        let mut nstates = 1;
        let mut trivial = 0;
        for (i, g) in gens.iter().enumerate() {
            let w = word::reduce(g);
            if w.is_empty() {
                trivial += 1;
                continue;
            }
            let n = w.len();
            let mut prev = 0;
            for (j, &a) in w.iter().enumerate() {
                let next = if j + 1 == n {
                    0
                } else {
                    nstates += 1;
                    nstates - 1
                };
                let label = if j == 0 { vec![i as Letter + 1] } else { vec![] };
                let e = if a > 0 {
                    RawEdge { from: prev, letter: a, to: next, label }
                } else {
                    RawEdge { from: next, letter: -a, to: prev, label: word::inverse(&label) }
                };
                edges.push(Some(e));
                prev = next;
            }
        }
        let conflict = fold(&mut edges);
        Self::from_edges(nstates, edges, gens.len(), trivial, conflict)
    }

    fn from_edges(nstates: usize, edges: Vec<Option<RawEdge>>, ngens: usize, trivial: usize, conflict: bool) -> Self {
        let mut alive = vec![false; nstates];
        alive[0] = true;
        for e in edges.iter().flatten() {
            alive[e.from] = true;
            alive[e.to] = true;
        }
        let mut index = vec![usize::MAX; nstates];
        let mut n = 0;
        for q in 0..nstates {
            if alive[q] {
                index[q] = n;
                n += 1;
            }
        }
        let mut adj = vec![BTreeMap::new(); n];
        for e in edges.iter().flatten() {
            let (f, t) = (index[e.from], index[e.to]);
            adj[f].insert(e.letter, (t, e.label.clone()));
            adj[t].insert(-e.letter, (f, word::inverse(&e.label)));
        }
        let mut tree: Vec<Option<Word>> = vec![None; n];
        tree[0] = Some(vec![]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(q) = queue.pop_front() {
            let base = tree[q].clone().unwrap();
            for (&l, (t, _)) in &adj[q] {
                if tree[*t].is_none() {
                    let mut w = base.clone();
                    w.push(l);
                    tree[*t] = Some(w);
                    queue.push_back(*t);
                }
            }
        }
        StallingsGraph {
            nstates: n,
            adj,
            tree: tree.into_iter().map(|w| w.unwrap_or_default()).collect(),
            ngens,
            trivial_gens: trivial,
            label_conflict: conflict,
        }
    }

    /// Folds the current graph again; a folded graph comes back unchanged.
    pub fn refold(&self) -> StallingsGraph {
        let mut edges = Vec::new();
        for (q, m) in self.adj.iter().enumerate() {
            for (&l, (t, lab)) in m {
                if l > 0 {
                    edges.push(Some(RawEdge { from: q, letter: l, to: *t, label: lab.clone() }));
                }
            }
        }
        let conflict = fold(&mut edges);
        Self::from_edges(self.nstates, edges, self.ngens, self.trivial_gens, self.label_conflict || conflict)
    }

    pub fn num_states(&self) -> usize {
        self.nstates
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|m| m.len()).sum::<usize>() / 2
    }

    /// Rank of the subgroup (the folded graph is connected).
    pub fn rank(&self) -> usize {
        self.num_edges() + 1 - self.nstates
    }

    pub fn is_folded(&self) -> bool {
        // adjacency maps cannot hold two darts with one letter; check that
        // every dart has its reverse.
        self.adj.iter().enumerate().all(|(q, m)| {
            m.iter().all(|(&l, (t, lab))| {
                self.adj[*t].get(&-l).is_some_and(|(back, bl)| *back == q && *bl == word::inverse(lab))
            })
        })
    }

    /// The generators form a free basis of the subgroup they generate.
    pub fn is_basis(&self) -> bool {
        self.trivial_gens == 0 && !self.label_conflict && self.rank() == self.ngens
    }

    /// Longest readable prefix: (state reached, letters consumed, label product).
    fn trace(&self, w: &[Letter]) -> (usize, usize, Word) {
        let mut q = 0;
        let mut label = Vec::new();
        for (i, &l) in w.iter().enumerate() {
            match self.adj[q].get(&l) {
                Some((t, lab)) => {
                    word::append(&mut label, lab);
                    q = *t;
                }
                None => return (q, i, label),
            }
        }
        (q, w.len(), label)
    }

    pub fn contains(&self, w: &[Letter]) -> bool {
        let (q, n, _) = self.trace(w);
        q == 0 && n == w.len()
    }

    /// Domain word mapping onto `w`, when `w` is in the subgroup.
    pub fn preimage(&self, w: &[Letter]) -> Option<Word> {
        let (q, n, label) = self.trace(w);
        (q == 0 && n == w.len()).then_some(label)
    }

    /// Canonical representative of the right coset `H w`.
    pub fn right_coset_rep(&self, w: &[Letter]) -> Word {
        let (q, n, _) = self.trace(w);
        word::mul(&self.tree[q], &w[n..])
    }

    /// Canonical representative of the left coset `w H`.
    pub fn left_coset_rep(&self, w: &[Letter]) -> Word {
        word::inverse(&self.right_coset_rep(&word::inverse(w)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_and_parity() {
        let g = StallingsGraph::new(&[vec![1]]);
        assert!(g.contains(&[1, 1, 1]));
        let g = StallingsGraph::new(&[vec![1, 1], vec![2]]);
        assert!(!g.contains(&[1]));
        assert_eq!(g.preimage(&[1, 1, 2]), Some(vec![1, 2]));
        assert!(g.is_basis());
    }

    #[test]
    fn dependent_generators() {
        let g = StallingsGraph::new(&[vec![1], vec![1, 1]]);
        assert!(!g.is_basis());
        let g = StallingsGraph::new(&[vec![1, 2], vec![2], vec![1]]);
        assert!(!g.is_basis());
        assert_eq!(g.rank(), 2);
    }

    #[test]
    fn coset_reps() {
        let g = StallingsGraph::new(&[vec![1, 1], vec![2]]);
        // aH = a^-1 H since a^2 is in H
        assert_eq!(g.left_coset_rep(&[1]), g.left_coset_rep(&[-1]));
        assert_ne!(g.left_coset_rep(&[1]), g.left_coset_rep(&[]));
        assert_eq!(g.left_coset_rep(&[1, 2, 2]), g.left_coset_rep(&[1]));
    }
}
