#![allow(dead_code)]

use gogbench::algebra::GroupLike;
use gogbench::gog::{GSequence, GraphOfGroups, OrientedEdge};
use gogbench::groups::GroupElement;
use gogbench::scenarios;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn graph(id: &str) -> GraphOfGroups {
    scenarios::load(id).unwrap().build_graph().unwrap()
}

pub fn graph_ids() -> Vec<&'static str> {
    scenarios::ids().filter(|id| scenarios::load(id).unwrap().has_graph()).collect()
}

/// Random element of `G_v` as a product of up to `len` symmetric generators.
pub fn random_vertex_elem(gog: &GraphOfGroups, v: usize, len: usize, rng: &mut ChaCha8Rng) -> GroupElement {
    let grp = gog.group(v);
    let gens = grp.symmetric_generators();
    let mut g = grp.identity();
    for _ in 0..rng.gen_range(0..=len) {
        g = grp.mul(&g, &gens[rng.gen_range(0..gens.len())]);
    }
    g
}

/// Random element of the edge group of `f`, pushed into `G_{t(f)}` by `iota(f)`.
pub fn random_edge_image(gog: &GraphOfGroups, f: OrientedEdge, len: usize, rng: &mut ChaCha8Rng) -> GroupElement {
    let dom = gog.iota(f).domain().clone();
    let gens = dom.symmetric_generators();
    let mut h = dom.identity();
    for _ in 0..rng.gen_range(0..=len) {
        h = dom.mul(&h, &gens[rng.gen_range(0..gens.len())]);
    }
    gog.iota(f).apply(&h).unwrap()
}

/// Random G-sequence from the base. Backtracks `f, iota(f)(h), fbar` are
/// inserted often so that reductions actually happen.
pub fn random_sequence(gog: &GraphOfGroups, steps: usize, rng: &mut ChaCha8Rng) -> GSequence {
    let mut v = gog.base();
    let mut elems = vec![random_vertex_elem(gog, v, 2, rng)];
    let mut edges = Vec::new();
    for _ in 0..steps {
        let out: Vec<OrientedEdge> = gog.oriented_edges().into_iter().filter(|f| gog.source(*f) == v).collect();
        if out.is_empty() {
            break;
        }
        let f = out[rng.gen_range(0..out.len())];
        if rng.gen_bool(0.5) {
            edges.push(f);
            elems.push(random_edge_image(gog, f, 2, rng));
            edges.push(f.rev());
            elems.push(random_vertex_elem(gog, v, 2, rng));
        } else {
            edges.push(f);
            v = gog.target(f);
            elems.push(random_vertex_elem(gog, v, 2, rng));
        }
    }
    gog.sequence(gog.base(), elems, edges).unwrap()
}

/// Random loop at the base: `s g s^-1`, times a random walk along loop edges.
pub fn random_loop(gog: &GraphOfGroups, steps: usize, rng: &mut ChaCha8Rng) -> GSequence {
    let s = random_sequence(gog, steps, rng);
    let g = gog.vertex_element(gog.end(&s), random_vertex_elem(gog, gog.end(&s), 3, rng));
    let conj = gog.concat(&gog.concat(&s, &g).unwrap(), &gog.inverse(&s)).unwrap();
    let loops: Vec<OrientedEdge> =
        gog.oriented_edges().into_iter().filter(|f| gog.source(*f) == gog.base() && gog.target(*f) == gog.base()).collect();
    if loops.is_empty() || rng.gen_bool(0.5) {
        return conj;
    }
    let f = loops[rng.gen_range(0..loops.len())];
    let b = gog.base();
    let hop = gog.sequence(b, vec![random_vertex_elem(gog, b, 2, rng), random_vertex_elem(gog, b, 2, rng)], vec![f]).unwrap();
    gog.concat(&conj, &hop).unwrap()
}
