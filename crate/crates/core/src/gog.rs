//! Graphs of groups: G-sequences, reduction, standard lengths, fundamental
//! group arithmetic, crossing maps and local Bass-Serre tree fragments.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::algebra::GroupLike;
use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement};
use crate::subgroup::{Membership, SubgroupOracle};

pub const DEFAULT_LENGTH_CUTOFF: usize = 48;
pub const DEFAULT_STATE_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug)]
pub struct Vertex {
    pub name: String,
    pub group: Group,
}

/// Edge `from -> to`; `iota` embeds the edge group into the `to` group,
/// `iota_bar` into the `from` group.
#[derive(Clone, Debug)]
pub struct Edge {
    pub name: String,
    pub from: usize,
    pub to: usize,
    pub group: Group,
    pub iota: SubgroupOracle,
    pub iota_bar: SubgroupOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrientedEdge {
    pub edge: usize,
    pub forward: bool,
}

impl OrientedEdge {
    pub fn fwd(edge: usize) -> Self {
        OrientedEdge { edge, forward: true }
    }

    pub fn bwd(edge: usize) -> Self {
        OrientedEdge { edge, forward: false }
    }

    pub fn rev(self) -> Self {
        OrientedEdge { edge: self.edge, forward: !self.forward }
    }
}

/// `(g0, e1, g1, ..., ek, gk)`; `g0` lives at `start`, `g_j` at `t(e_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GSequence {
    pub start: usize,
    pub elems: Vec<GroupElement>,
    pub edges: Vec<OrientedEdge>,
}

impl GSequence {
    pub fn edge_length(&self) -> usize {
        self.edges.len()
    }
}

/// A reduced loop at the base vertex, in canonical form when every oracle
/// supplies coset representatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pi1Element {
    seq: GSequence,
}

impl Pi1Element {
    pub fn sequence(&self) -> &GSequence {
        &self.seq
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Crossing {
    Defined(GroupElement),
    /// 1-based index of the first edge whose crossing is undefined.
    NotWellDefined { index: usize },
}

/// One step of the breadth-first search over groupoid paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Move {
    /// Right-multiply the last label by this symmetric generator of its vertex group.
    Gen(usize),
    Edge(OrientedEdge),
}

#[derive(Clone, Debug)]
struct PathState {
    seq: GSequence,
    dist: usize,
    parent: Option<usize>,
    mv: Option<Move>,
}

/// Breadth-first ball of groupoid paths from the base vertex.
#[derive(Clone, Debug, Default)]
struct PathBall {
    states: Vec<PathState>,
    index: HashMap<GSequence, usize>,
    sphere_starts: Vec<usize>,
    radius: usize,
}

pub struct GraphOfGroups {
    pub name: String,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub length_cutoff: usize,
    pub state_budget: usize,
    ball: Mutex<PathBall>,
}

impl std::fmt::Debug for GraphOfGroups {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphOfGroups").field("name", &self.name).field("vertices", &self.vertices).finish()
    }
}

/// Node of a local Bass-Serre tree fragment, standing for the coset `s G_v`.
#[derive(Clone, Debug)]
pub struct TreeNode {
    pub vertex: usize,
    /// Reduced path from the base with trivial last label.
    pub path: GSequence,
    pub parent: Option<usize>,
    /// Edge of the tree leading here: `(f, h)` with `h` a coset representative.
    pub via: Option<(OrientedEdge, GroupElement)>,
    pub depth: usize,
}

impl GraphOfGroups {
    pub fn new(name: impl Into<String>, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::GraphIllFormed("no vertices".into()));
        }
        for e in &edges {
            if e.from >= vertices.len() || e.to >= vertices.len() {
                return Err(Error::GraphIllFormed(format!("edge {} has an unknown endpoint", e.name)));
            }
            if e.iota.ambient() != &vertices[e.to].group || e.iota_bar.ambient() != &vertices[e.from].group {
                return Err(Error::GraphIllFormed(format!("edge {} embeds into the wrong vertex groups", e.name)));
            }
        }
        Ok(GraphOfGroups {
            name: name.into(),
            vertices,
            edges,
            length_cutoff: DEFAULT_LENGTH_CUTOFF,
            state_budget: DEFAULT_STATE_BUDGET,
            ball: Mutex::new(PathBall::default()),
        })
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn source(&self, f: OrientedEdge) -> usize {
        let e = &self.edges[f.edge];
        if f.forward { e.from } else { e.to }
    }

    pub fn target(&self, f: OrientedEdge) -> usize {
        let e = &self.edges[f.edge];
        if f.forward { e.to } else { e.from }
    }

    /// `iota_f`, landing in `G_{t(f)}`.
    pub fn iota(&self, f: OrientedEdge) -> &SubgroupOracle {
        let e = &self.edges[f.edge];
        if f.forward { &e.iota } else { &e.iota_bar }
    }

    /// `iota_{f bar}`, landing in `G_{i(f)}`.
    pub fn iota_rev(&self, f: OrientedEdge) -> &SubgroupOracle {
        self.iota(f.rev())
    }

    pub fn group(&self, v: usize) -> &Group {
        &self.vertices[v].group
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    /// Oriented edges in a fixed order: by edge, forward first.
    pub fn oriented_edges(&self) -> Vec<OrientedEdge> {
        (0..self.edges.len()).flat_map(|i| [OrientedEdge::fwd(i), OrientedEdge::bwd(i)]).collect()
    }

    pub fn has_canonical_forms(&self) -> bool {
        self.edges.iter().all(|e| e.iota.has_coset_reps() && e.iota_bar.has_coset_reps())
    }

    pub fn vertex_at(&self, s: &GSequence, j: usize) -> usize {
        if j == 0 { s.start } else { self.target(s.edges[j - 1]) }
    }

    pub fn end(&self, s: &GSequence) -> usize {
        self.vertex_at(s, s.edges.len())
    }

    pub fn trivial(&self, v: usize) -> GSequence {
        GSequence { start: v, elems: vec![self.group(v).identity()], edges: vec![] }
    }

    pub fn vertex_element(&self, v: usize, g: GroupElement) -> GSequence {
        GSequence { start: v, elems: vec![g], edges: vec![] }
    }

    /// Builds a sequence from labels and edges, checking well-formedness.
    pub fn sequence(&self, start: usize, elems: Vec<GroupElement>, edges: Vec<OrientedEdge>) -> Result<GSequence> {
        let s = GSequence { start, elems, edges };
        self.check_sequence(&s)?;
        Ok(s)
    }

    pub fn check_sequence(&self, s: &GSequence) -> Result<()> {
        if s.elems.len() != s.edges.len() + 1 {
            return Err(Error::SequenceIllFormed("need one more label than edges".into()));
        }
        if s.start >= self.vertices.len() {
            return Err(Error::SequenceIllFormed("unknown start vertex".into()));
        }
        let mut v = s.start;
        for (j, f) in s.edges.iter().enumerate() {
            if f.edge >= self.edges.len() {
                return Err(Error::SequenceIllFormed(format!("unknown edge at position {}", j + 1)));
            }
            if self.source(*f) != v {
                return Err(Error::SequenceIllFormed(format!("edge {} does not start where the path is", j + 1)));
            }
            self.group(v).check(&s.elems[j]).map_err(|_| Error::SequenceIllFormed(format!("label {j} has the wrong kind")))?;
            v = self.target(*f);
        }
        self.group(v).check(s.elems.last().unwrap()).map_err(|_| Error::SequenceIllFormed("last label has the wrong kind".into()))?;
        Ok(())
    }

    /// Concatenation, multiplying the junction labels.
    pub fn concat(&self, a: &GSequence, b: &GSequence) -> Result<GSequence> {
        let v = self.end(a);
        if v != b.start {
            return Err(Error::SequenceIllFormed("concatenated paths do not meet".into()));
        }
        let mut elems = a.elems.clone();
        let last = elems.pop().unwrap();
        elems.push(self.group(v).mul(&last, &b.elems[0]));
        elems.extend(b.elems[1..].iter().cloned());
        let mut edges = a.edges.clone();
        edges.extend(b.edges.iter().copied());
        Ok(GSequence { start: a.start, elems, edges })
    }

    pub fn inverse(&self, s: &GSequence) -> GSequence {
        let k = s.edges.len();
        let elems = (0..=k).rev().map(|j| self.group(self.vertex_at(s, j)).inv(&s.elems[j])).collect();
        let edges = s.edges.iter().rev().map(|f| f.rev()).collect();
        GSequence { start: self.end(s), elems, edges }
    }

    /// If `(g, f, mid, f bar, g')` reduces, the new label `g iota_{f bar}(h) g'`.
    fn try_pattern(&self, f: OrientedEdge, g: &GroupElement, mid: &GroupElement, g2: &GroupElement) -> Result<Option<GroupElement>> {
        let o = self.iota(f);
        match o.contains(mid)? {
            Membership::NotIn => Ok(None),
            Membership::Unknown => Err(Error::OracleUnknown),
            Membership::In => {
                let h = o.preimage(mid)?;
                let grp = self.group(self.source(f));
                let img = self.iota_rev(f).apply(&h)?;
                Ok(Some(grp.mul(&grp.mul(g, &img), g2)))
            }
        }
    }

    /// Reduction scanning left to right with a stack, to a fixpoint.
    pub fn reduce(&self, s: &GSequence) -> Result<GSequence> {
        self.check_sequence(s)?;
        let mut elems = vec![s.elems[0].clone()];
        let mut edges: Vec<OrientedEdge> = Vec::new();
        for (f, g) in s.edges.iter().zip(&s.elems[1..]) {
            edges.push(*f);
            elems.push(g.clone());
            loop {
                let n = edges.len();
                if n < 2 || edges[n - 1] != edges[n - 2].rev() {
                    break;
                }
                let f = edges[n - 2];
                match self.try_pattern(f, &elems[n - 2], &elems[n - 1], &elems[n])? {
                    None => break,
                    Some(new) => {
                        edges.truncate(n - 2);
                        elems.truncate(n - 2);
                        elems.push(new);
                    }
                }
            }
        }
        Ok(GSequence { start: s.start, elems, edges })
    }

    /// Reduction that always rewrites the rightmost reducible pattern.
    pub fn reduce_right_first(&self, s: &GSequence) -> Result<GSequence> {
        self.check_sequence(s)?;
        let mut cur = s.clone();
        'outer: loop {
            let k = cur.edges.len();
            for j in (1..k).rev() {
                if cur.edges[j] == cur.edges[j - 1].rev() {
                    let f = cur.edges[j - 1];
                    if let Some(new) = self.try_pattern(f, &cur.elems[j - 1], &cur.elems[j], &cur.elems[j + 1])? {
                        cur.edges.drain(j - 1..=j);
                        cur.elems.splice(j - 1..=j + 1, [new]);
                        continue 'outer;
                    }
                }
            }
            return Ok(cur);
        }
    }

    pub fn is_reduced(&self, s: &GSequence) -> Result<bool> {
        for j in 1..s.edges.len() {
            if s.edges[j] == s.edges[j - 1].rev() && self.iota(s.edges[j - 1]).is_member(&s.elems[j])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Moves every label but the last to its canonical coset representative.
    /// `None` when some oracle has no coset representatives.
    pub fn canonicalize(&self, s: &GSequence) -> Result<Option<GSequence>> {
        let mut out = s.clone();
        for j in 0..s.edges.len() {
            let f = out.edges[j];
            let o = self.iota_rev(f);
            let Some(c) = o.left_coset_rep(&out.elems[j])? else { return Ok(None) };
            let grp = self.group(self.source(f));
            let h = o.preimage(&grp.mul(&grp.inv(&c), &out.elems[j]))?;
            let next_grp = self.group(self.target(f));
            out.elems[j + 1] = next_grp.mul(&self.iota(f).apply(&h)?, &out.elems[j + 1]);
            out.elems[j] = c;
        }
        Ok(Some(out))
    }

    fn normal_form(&self, s: &GSequence) -> Result<GSequence> {
        let r = self.reduce(s)?;
        Ok(self.canonicalize(&r)?.unwrap_or(r))
    }

    /// Length in `G_v`; closed forms ignore `length_cutoff`.
    pub fn vertex_length(&self, v: usize, g: &GroupElement) -> Result<usize> {
        let grp = self.group(v);
        if let Some(l) = grp.closed_form_length(g) {
            return Ok(l);
        }
        grp.word_length(g, self.length_cutoff)?.ok_or_else(|| Error::budget("vertex word length", self.length_cutoff))
    }

    /// `L_Gamma(s) = k + sum_j L(g_j)`, `g_0` included.
    pub fn gamma_length(&self, s: &GSequence) -> Result<usize> {
        self.check_sequence(s)?;
        let mut total = s.edges.len();
        for j in 0..s.elems.len() {
            let v = self.vertex_at(s, j);
            total += self.vertex_length(v, &s.elems[j])?;
        }
        Ok(total)
    }

    pub fn pi1_identity(&self) -> Pi1Element {
        Pi1Element { seq: self.trivial(self.base()) }
    }

    /// The class of a loop at the base vertex.
    pub fn pi1(&self, s: &GSequence) -> Result<Pi1Element> {
        self.check_sequence(s)?;
        if s.start != self.base() || self.end(s) != self.base() {
            return Err(Error::SequenceIllFormed("not a loop at the base vertex".into()));
        }
        Ok(Pi1Element { seq: self.normal_form(s)? })
    }

    pub fn pi1_vertex(&self, g: GroupElement) -> Result<Pi1Element> {
        self.pi1(&self.vertex_element(self.base(), g))
    }

    pub fn pi1_multiply(&self, a: &Pi1Element, b: &Pi1Element) -> Result<Pi1Element> {
        Ok(Pi1Element { seq: self.normal_form(&self.concat(&a.seq, &b.seq)?)? })
    }

    pub fn pi1_inverse(&self, a: &Pi1Element) -> Result<Pi1Element> {
        Ok(Pi1Element { seq: self.normal_form(&self.inverse(&a.seq))? })
    }

    pub fn is_trivial_loop(&self, s: &GSequence) -> Result<bool> {
        let r = self.reduce(s)?;
        Ok(r.edges.is_empty() && r.elems[0] == self.group(r.start).identity())
    }

    /// Equality by reducing `a b^-1`.
    pub fn pi1_equal(&self, a: &Pi1Element, b: &Pi1Element) -> Result<bool> {
        self.is_trivial_loop(&self.concat(&a.seq, &self.inverse(&b.seq))?)
    }

    fn path_key(&self, s: &GSequence) -> Result<GSequence> {
        self.normal_form(s)
    }

    fn apply_move(&self, s: &GSequence, mv: Move) -> Result<GSequence> {
        match mv {
            Move::Gen(i) => {
                let v = self.end(s);
                let grp = self.group(v);
                let gen = &grp.symmetric_generators()[i];
                let mut out = s.clone();
                let last = out.elems.pop().unwrap();
                out.elems.push(grp.mul(&last, gen));
                Ok(out)
            }
            Move::Edge(f) => {
                let mut out = s.clone();
                out.edges.push(f);
                out.elems.push(self.group(self.target(f)).identity());
                self.path_key(&out)
            }
        }
    }

    fn moves_at(&self, v: usize) -> Vec<Move> {
        let mut mv: Vec<Move> = (0..self.group(v).symmetric_generators().len()).map(Move::Gen).collect();
        mv.extend(self.oriented_edges().into_iter().filter(|f| self.source(*f) == v).map(Move::Edge));
        mv
    }

    fn find_equal(&self, ball: &PathBall, s: &GSequence) -> Result<Option<usize>> {
        if let Some(&i) = ball.index.get(s) {
            return Ok(Some(i));
        }
        if self.has_canonical_forms() {
            return Ok(None);
        }
        let end = self.end(s);
        for (i, st) in ball.states.iter().enumerate() {
            if st.seq.edges == s.edges && self.end(&st.seq) == end && self.is_trivial_loop(&self.concat(&st.seq, &self.inverse(s))?)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    fn grow_ball(&self, ball: &mut PathBall, radius: usize) -> Result<()> {
        if ball.states.is_empty() {
            let s = self.trivial(self.base());
            ball.index.insert(s.clone(), 0);
            ball.states.push(PathState { seq: s, dist: 0, parent: None, mv: None });
            ball.sphere_starts = vec![0, 1];
            ball.radius = 0;
        }
        while ball.radius < radius {
            let (lo, hi) = (ball.sphere_starts[ball.radius], ball.sphere_starts[ball.radius + 1]);
            for i in lo..hi {
                let s = ball.states[i].seq.clone();
                for mv in self.moves_at(self.end(&s)) {
                    let t = self.apply_move(&s, mv)?;
                    if self.find_equal(ball, &t)?.is_none() {
                        if ball.states.len() >= self.state_budget {
                            return Err(Error::budget("fundamental-group ball", ball.radius));
                        }
                        ball.index.insert(t.clone(), ball.states.len());
                        ball.states.push(PathState { seq: t, dist: ball.radius + 1, parent: Some(i), mv: Some(mv) });
                    }
                }
            }
            ball.sphere_starts.push(ball.states.len());
            ball.radius += 1;
        }
        Ok(())
    }

    /// `L_G(g)`: minimal `L_Gamma` over representatives; `None` beyond `cutoff`.
    pub fn pi1_word_length(&self, g: &Pi1Element, cutoff: usize) -> Result<Option<usize>> {
        let key = self.path_key(&g.seq)?;
        let mut ball = self.ball.lock().unwrap();
        loop {
            if let Some(i) = self.find_equal(&ball, &key)? {
                let d = ball.states[i].dist;
                return Ok((d <= cutoff).then_some(d));
            }
            if ball.radius >= cutoff {
                return Ok(None);
            }
            let r = ball.radius + 1;
            self.grow_ball(&mut ball, r)?;
        }
    }

    /// All elements of `B_{L_G}(r)` with their lengths and shortlex-least
    /// geodesic move words, in breadth-first order.
    pub fn pi1_ball(&self, r: usize) -> Result<Vec<(Pi1Element, usize, Vec<Move>)>> {
        let mut ball = self.ball.lock().unwrap();
        self.grow_ball(&mut ball, r)?;
        let end = ball.sphere_starts[r + 1];
        let mut out = Vec::new();
        for i in 0..end {
            let st = &ball.states[i];
            if self.end(&st.seq) != self.base() {
                continue;
            }
            let mut moves = Vec::new();
            let mut j = i;
            while let Some(p) = ball.states[j].parent {
                moves.push(ball.states[j].mv.unwrap());
                j = p;
            }
            moves.reverse();
            out.push((Pi1Element { seq: st.seq.clone() }, st.dist, moves));
        }
        Ok(out)
    }

    /// The sequence spelled by a move word, without any reduction.
    pub fn spell(&self, moves: &[Move]) -> GSequence {
        let mut s = self.trivial(self.base());
        for &mv in moves {
            match mv {
                Move::Gen(i) => {
                    let grp = self.group(self.end(&s));
                    let g = grp.symmetric_generators()[i].clone();
                    let last = s.elems.pop().unwrap();
                    s.elems.push(grp.mul(&last, &g));
                }
                Move::Edge(f) => {
                    s.edges.push(f);
                    s.elems.push(self.group(self.target(f)).identity());
                }
            }
        }
        s
    }

    /// `c_{e_l} o ... o c_{e_1}(a)` along an edge path.
    pub fn crossing_path(&self, p: &[OrientedEdge], a: &GroupElement) -> Result<Crossing> {
        let Some(first) = p.first() else { return Ok(Crossing::Defined(a.clone())) };
        let mut v = self.source(*first);
        self.group(v).check(a)?;
        let mut cur = a.clone();
        for (i, f) in p.iter().enumerate() {
            if self.source(*f) != v {
                return Err(Error::SequenceIllFormed(format!("path breaks at edge {}", i + 1)));
            }
            let o = self.iota_rev(*f);
            if !o.is_member(&cur)? {
                return Ok(Crossing::NotWellDefined { index: i + 1 });
            }
            let h = o.preimage(&cur)?;
            cur = self.iota(*f).apply(&h)?;
            v = self.target(*f);
        }
        Ok(Crossing::Defined(cur))
    }

    /// `p` is well-defined at `a` but `p e` is not.
    pub fn is_maximal(&self, p: &[OrientedEdge], a: &GroupElement, e: OrientedEdge) -> Result<bool> {
        if !matches!(self.crossing_path(p, a)?, Crossing::Defined(_)) {
            return Ok(false);
        }
        let mut pe = p.to_vec();
        pe.push(e);
        Ok(matches!(self.crossing_path(&pe, a)?, Crossing::NotWellDefined { .. }))
    }

    /// Fragment of the Bass-Serre tree around the base coset. Coset
    /// representatives are drawn from vertex balls of radius `rep_cutoff`.
    pub fn local_tree(&self, depth: usize, rep_cutoff: usize, max_nodes: usize) -> Result<Vec<TreeNode>> {
        let mut nodes = vec![TreeNode { vertex: self.base(), path: self.trivial(self.base()), parent: None, via: None, depth: 0 }];
        let mut frontier = vec![0usize];
        for d in 0..depth {
            let mut next = Vec::new();
            for &ni in &frontier {
                let node = nodes[ni].clone();
                let v = node.vertex;
                let grp = self.group(v);
                let ball = grp.ball(rep_cutoff)?;
                for f in self.oriented_edges().into_iter().filter(|f| self.source(*f) == v) {
                    let o = self.iota_rev(f);
                    let back = node.path.edges.last().is_some_and(|last| *last == f.rev());
                    let mut reps: Vec<GroupElement> = Vec::new();
                    for h in ball.ball(rep_cutoff) {
                        if back && o.is_member(h)? {
                            continue;
                        }
                        let mut fresh = true;
                        for r in &reps {
                            if o.is_member(&grp.mul(&grp.inv(r), h))? {
                                fresh = false;
                                break;
                            }
                        }
                        if fresh {
                            reps.push(h.clone());
                        }
                    }
                    for h in reps {
                        let mut path = node.path.clone();
                        *path.elems.last_mut().unwrap() = h.clone();
                        path.edges.push(f);
                        path.elems.push(self.group(self.target(f)).identity());
                        if nodes.len() >= max_nodes {
                            return Err(Error::budget("local tree", d));
                        }
                        nodes.push(TreeNode { vertex: self.target(f), path, parent: Some(ni), via: Some((f, h)), depth: d + 1 });
                        next.push(nodes.len() - 1);
                    }
                }
            }
            frontier = next;
        }
        Ok(nodes)
    }

    /// Pairwise check that fragment nodes stand for distinct cosets.
    pub fn tree_nodes_distinct(&self, nodes: &[TreeNode]) -> Result<bool> {
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if nodes[i].vertex != nodes[j].vertex {
                    continue;
                }
                let loop_ = self.concat(&self.inverse(&nodes[i].path), &nodes[j].path)?;
                if self.reduce(&loop_)?.edges.is_empty() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Human-readable form `(g0, e, g1, ...)` with bars on reversed edges.
    pub fn format_sequence(&self, s: &GSequence) -> String {
        let mut parts = vec![self.group(s.start).format(&s.elems[0])];
        for (j, f) in s.edges.iter().enumerate() {
            let name = &self.edges[f.edge].name;
            parts.push(if f.forward { name.clone() } else { format!("{name}bar") });
            parts.push(self.group(self.target(*f)).format(&s.elems[j + 1]));
        }
        format!("({})", parts.join(", "))
    }

    /// Parses `"1, e, y3, ebar, x3 x1^4 x3^-1, e, y3^-1, ebar, 1"` starting at `start`.
    pub fn parse_sequence(&self, start: usize, text: &str) -> Result<GSequence> {
        let parts: Vec<&str> = text.trim().trim_start_matches('(').trim_end_matches(')').split(',').map(str::trim).collect();
        if parts.len().is_multiple_of(2) {
            return Err(Error::SequenceIllFormed("expected label, edge, label, ...".into()));
        }
        let mut v = start;
        let mut elems = vec![self.group(v).parse(parts[0])?];
        let mut edges = Vec::new();
        for pair in parts[1..].chunks(2) {
            let (name, forward) = match pair[0].strip_suffix("bar") {
                Some(n) => (n, false),
                None => (pair[0], true),
            };
            let e = self.edge_index(name).ok_or_else(|| Error::SequenceIllFormed(format!("unknown edge {name:?}")))?;
            let f = OrientedEdge { edge: e, forward };
            if self.source(f) != v {
                return Err(Error::SequenceIllFormed(format!("edge {} does not continue the path", pair[0])));
            }
            v = self.target(f);
            edges.push(f);
            elems.push(self.group(v).parse(pair[1])?);
        }
        self.sequence(start, elems, edges)
    }
}
