//! Empirical distortion: Disto curves, seemingly polynomial distortion along
//! edge paths, tight dynamics and linear separation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::GroupLike;
use crate::error::{Error, Result};
use crate::gog::{Crossing, GSequence, GraphOfGroups, OrientedEdge};
use crate::groups::{Group, GroupElement};
use crate::growth::{classify_growth, Growth};
use crate::subgroup::{Membership, SubgroupOracle};
use crate::word;

#[derive(Clone, Debug, Serialize)]
pub struct DistoPoint {
    pub n: usize,
    /// `diam_H(H cap B_G(n))`, or a witnessed lower bound for it.
    pub diam: usize,
    pub disto: f64,
    /// `D(n) = max L_H(h) / L_G(h)` over `h` in `H cap B_G(n)`; exact mode only.
    pub d_ratio: Option<f64>,
    /// Elements realising the diameter.
    pub witness: (String, String),
    pub elements: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionCurve {
    pub mode: &'static str,
    pub points: Vec<DistoPoint>,
    pub classification: Option<Growth>,
    /// `2 D(2m) >= Disto(m)` wherever both sides were measured.
    pub cross_check_ok: bool,
    /// Set when the ambient ball hit the budget; the curve stops at this radius.
    pub truncated_at: Option<usize>,
}

fn h_length(h: &SubgroupOracle, pre: &GroupElement) -> Result<usize> {
    h.domain().word_length(pre, usize::MAX)?.ok_or_else(|| Error::budget("subgroup word length", 0))
}

fn classify_disto(points: &[DistoPoint]) -> Option<Growth> {
    let disto: Vec<(f64, f64)> = points.iter().filter(|p| p.n > 0).map(|p| (p.n as f64, p.disto)).collect();
    match classify_growth(&disto) {
        Ok(Growth::Bounded) => Some(Growth::Bounded),
        Ok(_) => {
            let diam: Vec<(f64, f64)> = points.iter().filter(|p| p.n > 0).map(|p| (p.n as f64, p.diam as f64)).collect();
            classify_growth(&diam).ok()
        }
        Err(_) => None,
    }
}

/// Exact curve from balls of the ambient group.
pub fn disto_curve(ambient: &Group, h: &SubgroupOracle, n_max: usize) -> Result<DistortionCurve> {
    let mut members: Vec<(GroupElement, GroupElement)> = Vec::new();
    let mut points = Vec::new();
    let (mut diam, mut witness) = (0usize, (ambient.identity(), ambient.identity()));
    let mut d_best: f64 = 0.0;
    let mut truncated_at = None;
    for n in 0..=n_max {
        let ball = match ambient.ball(n) {
            Ok(b) => b,
            Err(Error::BudgetExceeded { .. }) => {
                truncated_at = Some(n.saturating_sub(1));
                break;
            }
            Err(e) => return Err(e),
        };
        let old = members.len();
        for g in ball.sphere(n) {
            if h.contains(g)? == Membership::In {
                let pre = h.preimage(g)?;
                if n > 0 {
                    d_best = d_best.max(h_length(h, &pre)? as f64 / n as f64);
                }
                members.push((g.clone(), pre));
            }
        }
        let dom = h.domain();
        for i in old..members.len() {
            let xi = dom.inv(&members[i].1);
            for j in 0..=i {
                let l = h_length(h, &dom.mul(&xi, &members[j].1))?;
                if l > diam {
                    diam = l;
                    witness = (members[i].0.clone(), members[j].0.clone());
                }
            }
        }
        points.push(DistoPoint {
            n,
            diam,
            disto: if n == 0 { 0.0 } else { diam as f64 / n as f64 },
            d_ratio: Some(d_best),
            witness: (ambient.format(&witness.0), ambient.format(&witness.1)),
            elements: members.len(),
        });
    }
    let mut cross_check_ok = true;
    for p in &points {
        if let Some(q) = points.iter().find(|q| q.n == 2 * p.n) {
            if p.n > 0 && 2.0 * q.d_ratio.unwrap() + 1e-12 < p.disto {
                cross_check_ok = false;
            }
        }
    }
    Ok(DistortionCurve { mode: "exact", classification: classify_disto(&points), points, cross_check_ok, truncated_at })
}

/// Substitutes `k` into a template such as `"t^{k} e1 t^{-k}"`.
pub fn instantiate(template: &str, k: i64) -> String {
    template.replace("{-k}", &(-k).to_string()).replace("{k}", &k.to_string())
}

/// Number of generator letters in a word written with declared generators.
pub fn written_length(group: &Group, text: &str) -> Result<usize> {
    let toks = word::tokenize(text).map_err(|reason| Error::WordParse { word: text.into(), reason })?;
    let names = group.generator_names();
    let mut n = 0;
    for (name, e) in toks {
        if !names.contains(&name.as_str()) {
            return Err(Error::WordParse { word: text.into(), reason: format!("{name} is not a declared generator") });
        }
        n += e.unsigned_abs() as usize;
    }
    Ok(n)
}

/// Lower-bound curve from witnesses `h_k`, written with `n_k` generator
/// letters: `h_k^-1` and `h_k` lie in `B_G(n_k)`, so `diam(n_k) >= L_H(h_k^2)`.
pub fn disto_witness_curve(ambient: &Group, h: &SubgroupOracle, template: &str, k_max: i64) -> Result<DistortionCurve> {
    let mut points: Vec<DistoPoint> = Vec::new();
    let mut best = 0;
    let dom = h.domain();
    for k in 0..=k_max {
        let text = instantiate(template, k);
        let n = written_length(ambient, &text)?;
        let g = ambient.parse(&text)?;
        let pre = h.preimage(&g)?;
        let l = h_length(h, &dom.mul(&pre, &pre))?;
        best = best.max(l);
        points.push(DistoPoint {
            n,
            diam: best,
            disto: if n == 0 { 0.0 } else { best as f64 / n as f64 },
            d_ratio: None,
            witness: (ambient.format(&ambient.inv(&g)), ambient.format(&g)),
            elements: 2,
        });
    }
    Ok(DistortionCurve { mode: "witness", classification: classify_disto(&points), points, cross_check_ok: true, truncated_at: None })
}

/// Witness curve inside the fundamental group for `H` in the base vertex
/// group: `h_k = W^k core W^-k`, with `n_k = L_Gamma` of the unreduced loop
/// as an upper bound for `L_G(h_k)`.
pub fn pi1_disto_witness_curve(
    gog: &GraphOfGroups,
    h: &SubgroupOracle,
    conjugator: &GSequence,
    core: &GSequence,
    k_max: usize,
) -> Result<DistortionCurve> {
    let base = gog.base();
    for s in [conjugator, core] {
        if s.start != base || gog.end(s) != base {
            return Err(Error::SequenceIllFormed("witness pieces must be loops at the base vertex".into()));
        }
    }
    let dom = h.domain();
    let w_inv = gog.inverse(conjugator);
    let (mut left, mut right) = (gog.trivial(base), gog.trivial(base));
    let mut points = Vec::new();
    let mut best = 0;
    for k in 0..=k_max {
        if k > 0 {
            left = gog.concat(&left, conjugator)?;
            right = gog.concat(&w_inv, &right)?;
        }
        let s = gog.concat(&gog.concat(&left, core)?, &right)?;
        let n = gog.gamma_length(&s)?;
        let r = gog.reduce(&s)?;
        if !r.edges.is_empty() {
            return Err(Error::NotInSubgroup);
        }
        let g = &r.elems[0];
        let pre = h.preimage(g)?;
        best = best.max(h_length(h, &dom.mul(&pre, &pre))?);
        points.push(DistoPoint {
            n,
            diam: best,
            disto: if n == 0 { 0.0 } else { best as f64 / n as f64 },
            d_ratio: None,
            witness: (gog.format_sequence(&gog.inverse(&s)), gog.format_sequence(&s)),
            elements: 2,
        });
    }
    points.sort_by_key(|p| p.n);
    Ok(DistortionCurve { mode: "pi1_witness", classification: classify_disto(&points), points, cross_check_ok: true, truncated_at: None })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeeminglyPoint {
    pub n: usize,
    /// `max L_Gamma(g) / L_Gamma(p h p^-1)` over the samples of edge-length `n`.
    pub worst_ratio: f64,
    pub samples: usize,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeeminglyReport {
    pub points: Vec<SeeminglyPoint>,
    pub classification: Option<Growth>,
}

/// Reduced edge paths of length `n` (no immediate backtracking) starting anywhere.
pub fn reduced_paths(gog: &GraphOfGroups, n: usize) -> Vec<Vec<OrientedEdge>> {
    let mut out: Vec<Vec<OrientedEdge>> = if n == 0 { vec![] } else { gog.oriented_edges().into_iter().map(|f| vec![f]).collect() };
    for _ in 1..n {
        let mut next = Vec::new();
        for p in &out {
            let last = *p.last().unwrap();
            for f in gog.oriented_edges() {
                if gog.source(f) == gog.target(last) && f != last.rev() {
                    let mut q = p.clone();
                    q.push(f);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// Worst `L_Gamma(g) / L_Gamma(p h p^-1)` per edge-length, where `g = [p h p^-1]`
/// is built by pushing edge-group elements through the crossing maps.
pub fn seemingly_distortion_scan(
    gog: &GraphOfGroups,
    path_len_max: usize,
    edge_radius: usize,
    sample_budget: usize,
    seed: u64,
) -> Result<SeeminglyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![SeeminglyPoint { n: 0, worst_ratio: 1.0, samples: 1, witness: "trivial path".into() }];
    for n in 1..=path_len_max {
        let mut paths = reduced_paths(gog, n);
        paths.shuffle(&mut rng);
        let (mut worst, mut count, mut witness) = (0.0f64, 0usize, String::new());
        'paths: for p in &paths {
            let back: Vec<OrientedEdge> = p.iter().rev().map(|f| f.rev()).collect();
            // Push from the first edge forward and from the last edge backward.
            for (route, start_edge) in [(p, p[0]), (&back, back[0])] {
                let e = &gog.edges[start_edge.edge];
                let ball = e.group.ball(edge_radius)?;
                for x in ball.ball(edge_radius) {
                    if count >= sample_budget {
                        break 'paths;
                    }
                    let g = gog.iota_rev(start_edge).apply(x)?;
                    let Crossing::Defined(h) = gog.crossing_path(route, &g)? else { continue };
                    let v = gog.source(route[0]);
                    let w = gog.target(*route.last().unwrap());
                    let (lg, lh) = (gog.vertex_length(v, &g)?, gog.vertex_length(w, &h)?);
                    let ratio = lg as f64 / (2 * n + lh) as f64;
                    count += 1;
                    if ratio > worst {
                        worst = ratio;
                        witness = format!("g = {} at {}, h = {} at {}", gog.group(v).format(&g), gog.vertices[v].name, gog.group(w).format(&h), gog.vertices[w].name);
                    }
                }
            }
        }
        if count > 0 {
            points.push(SeeminglyPoint { n, worst_ratio: worst, samples: count, witness });
        }
    }
    if points.len() == 1 && path_len_max > 0 {
        return Err(Error::NoSamplesFound("no well-defined crossings".into()));
    }
    let curve: Vec<(f64, f64)> = points.iter().filter(|p| p.n > 0).map(|p| (p.n as f64, p.worst_ratio)).collect();
    Ok(SeeminglyReport { classification: classify_growth(&curve).ok(), points })
}

#[derive(Clone, Debug, Serialize)]
pub struct TightSample {
    pub a: String,
    pub b: String,
    pub f: String,
    pub coset_rep: String,
    /// Which of `a`, `b` the edge is maximal at: "a", "b" or "both".
    pub maximal_at: &'static str,
    pub lhs: usize,
    pub l_ab: usize,
    pub l_ab_f: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TightDynamicsReport {
    pub edge: String,
    pub samples: Vec<TightSample>,
    /// Samples with `L(b^-1 a) <= L(b_f^-1 a_f)`, satisfied automatically.
    pub auto_satisfied: usize,
    /// Samples skipped because no closest coset element was found within the radius.
    pub unresolved: usize,
    /// `(K, C_emp)`: smallest `C` making every sample with `L(b^-1 a) >= K` pass.
    pub constants: Vec<(usize, f64)>,
}

/// Structured samples of an edge group: generator powers times a small ball.
fn structured_samples(edge_group: &Group, k_max: i64, noise: usize) -> Result<Vec<GroupElement>> {
    let ball = edge_group.ball(noise)?;
    let mut out = Vec::new();
    for gen in edge_group.generators().iter().map(|(_, g)| g.clone()) {
        for k in -k_max..=k_max {
            let p = edge_group.pow(&gen, k);
            for x in ball.ball(noise) {
                out.push(edge_group.mul(&p, x));
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Tight-dynamics check for the lifted edge pair `(e, u f)` at `t(e)`.
pub fn tight_dynamics_scan(
    gog: &GraphOfGroups,
    e: OrientedEdge,
    k_max: i64,
    sample_budget: usize,
    radius: usize,
    seed: u64,
) -> Result<TightDynamicsReport> {
    let edge = &gog.edges[e.edge];
    if edge.from == edge.to {
        return Err(Error::GraphIllFormed("tight dynamics is only scanned on non-loop edges".into()));
    }
    let v = gog.source(e);
    let w = gog.target(e);
    let (gv, gw) = (gog.group(v), gog.group(w));
    let xs = structured_samples(&edge.group, k_max, 1)?;
    let a_side: Vec<GroupElement> = xs.iter().map(|x| gog.iota_rev(e).apply(x)).collect::<Result<_>>()?;
    let mut pairs: Vec<(usize, usize)> = (0..a_side.len()).flat_map(|i| (0..a_side.len()).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    pairs.truncate(sample_budget);
    let mut reps = vec![gw.identity()];
    reps.extend(gw.symmetric_generators());
    let mut samples = Vec::new();
    let (mut auto_satisfied, mut unresolved) = (0, 0);
    for f in gog.oriented_edges().into_iter().filter(|f| gog.source(*f) == w) {
        let fe = &gog.edges[f.edge];
        if fe.from == fe.to {
            continue;
        }
        let o = gog.iota_rev(f);
        for u in &reps {
            let u_inv = gw.inv(u);
            let in_coset = |g: &GroupElement| o.is_member(&gw.mul(&u_inv, g));
            let cross = |a: &GroupElement| -> Result<GroupElement> {
                match gog.crossing_path(&[e], a)? {
                    Crossing::Defined(c) => Ok(c),
                    Crossing::NotWellDefined { .. } => Err(Error::NotInSubgroup),
                }
            };
            for &(i, j) in &pairs {
                let (a, b) = (&a_side[i], &a_side[j]);
                let (ca, cb) = (cross(a)?, cross(b)?);
                let (ma, mb) = (!in_coset(&ca)?, !in_coset(&cb)?);
                let maximal_at = match (ma, mb) {
                    (true, true) => "both",
                    (true, false) => "a",
                    (false, true) => "b",
                    (false, false) => continue,
                };
                let (Some((af, da)), Some((bf, db))) = (o.nearest_in_coset(&ca, u, radius)?, o.nearest_in_coset(&cb, u, radius)?) else {
                    unresolved += 1;
                    continue;
                };
                let l_ab = gog.vertex_length(v, &gv.mul(&gv.inv(b), a))?;
                let l_ab_f = gog.vertex_length(w, &gw.mul(&gw.inv(&bf), &af))?;
                if l_ab <= l_ab_f {
                    auto_satisfied += 1;
                }
                samples.push(TightSample {
                    a: gv.format(a),
                    b: gv.format(b),
                    f: format!("{}{}", gog.edges[f.edge].name, if f.forward { "" } else { "bar" }),
                    coset_rep: gw.format(u),
                    maximal_at,
                    lhs: da + db,
                    l_ab,
                    l_ab_f,
                });
            }
        }
    }
    let mut constants = Vec::new();
    for k in [1usize, 2, 4, 8] {
        let mut c: f64 = 1.0;
        for s in samples.iter().filter(|s| s.l_ab >= k && s.l_ab > s.l_ab_f) {
            let diff = (s.l_ab - s.l_ab_f) as f64;
            c = c.max(if s.lhs == 0 { f64::INFINITY } else { diff / s.lhs as f64 });
        }
        constants.push((k, c));
    }
    Ok(TightDynamicsReport {
        edge: format!("{}{}", edge.name, if e.forward { "" } else { "bar" }),
        samples,
        auto_satisfied,
        unresolved,
        constants,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationPair {
    pub i: usize,
    pub j: usize,
    pub u: String,
    /// `d_S(H_i, u H_j)` over the sampled elements, or `None` when excluded.
    pub l: Option<usize>,
    pub excluded: bool,
    /// `(L_S(gamma_i), d_S(gamma_i, u H_j))` samples.
    pub distances: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub pairs: Vec<SeparationPair>,
    /// `(N, C(N))` with `C(N) = max L(gamma) / d(gamma, u H_j)` over `L(gamma) >= N + L`.
    pub table: Vec<(usize, f64)>,
    pub n_emp: Option<usize>,
    pub c_emp: Option<f64>,
}

/// Linear separation of the family `hs` inside `ambient`, sampled over `us`.
pub fn separation_scan(ambient: &Group, hs: &[&SubgroupOracle], us: &[GroupElement], radius: usize) -> Result<SeparationReport> {
    let ball = ambient.ball(radius)?;
    let mut pairs = Vec::new();
    for (i, hi) in hs.iter().enumerate() {
        let members: Vec<(GroupElement, usize)> = (0..=radius)
            .flat_map(|r| ball.sphere(r).iter().map(move |g| (g.clone(), r)))
            .filter_map(|(g, r)| match hi.contains(&g) {
                Ok(Membership::In) => Some(Ok((g, r))),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<_>>()?;
        for (j, hj) in hs.iter().enumerate() {
            for u in us {
                if i == j && hi.is_member(u)? {
                    pairs.push(SeparationPair { i, j, u: ambient.format(u), l: None, excluded: true, distances: vec![] });
                    continue;
                }
                let mut distances = Vec::new();
                for (g, lg) in &members {
                    if let Some((_, d)) = hj.nearest_in_coset(g, u, radius)? {
                        distances.push((*lg, d));
                    }
                }
                let l = distances.iter().map(|p| p.1).min();
                pairs.push(SeparationPair { i, j, u: ambient.format(u), l, excluded: false, distances });
            }
        }
    }
    let mut table = Vec::new();
    for n in 0..=radius {
        let mut c: f64 = 1.0;
        let mut any = false;
        for p in pairs.iter().filter(|p| !p.excluded) {
            let Some(l) = p.l else { continue };
            for &(lg, d) in &p.distances {
                if lg >= n + l && lg > 0 {
                    any = true;
                    c = c.max(if d == 0 { f64::INFINITY } else { lg as f64 / d as f64 });
                }
            }
        }
        if any {
            table.push((n, c));
        }
    }
    let best = table.iter().find(|(_, c)| c.is_finite()).copied();
    Ok(SeparationReport { pairs, table, n_emp: best.map(|b| b.0), c_emp: best.map(|b| b.1) })
}
