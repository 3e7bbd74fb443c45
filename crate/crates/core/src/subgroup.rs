//! Membership, preimage and coset services for edge-group images.

use serde::{Deserialize, Serialize};

use crate::algebra::GroupLike;
use crate::error::{Error, Result};
use crate::groups::{bs_normalize, mat_apply, mat_pow, Group, GroupElement, GroupKind};
use crate::lattice::Lattice;
use crate::stallings::StallingsGraph;
use crate::word::{self, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Stallings,
    IntegerLattice,
    FiberProjection,
    CyclicRoot,
    FactorProjection,
    BoundedSearch,
}

/// Oracle declaration as written in a config.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub backend: BackendKind,
    /// Generators declared for the oracle; they must coincide with the embedding images.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    /// Product-length cutoff for `bounded_search`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

impl OracleSpec {
    pub fn of(backend: BackendKind) -> Self {
        OracleSpec { backend, generators: None, cutoff: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    In,
    NotIn,
    Unknown,
}

#[derive(Clone, Debug)]
enum Engine {
    Stallings(StallingsGraph),
    Lattice(Lattice),
    FiberLattice(Lattice),
    FiberFree(StallingsGraph),
    Cyclic { z: GroupElement, free: Option<StallingsGraph> },
    Factor { map: Vec<Option<(usize, bool)>> },
    Bounded { table: std::collections::HashMap<GroupElement, GroupElement> },
}

/// Decision package for `iota(G_e)` inside an ambient catalog group.
#[derive(Clone, Debug)]
pub struct SubgroupOracle {
    ambient: Group,
    domain: Group,
    images: Vec<GroupElement>,
    backend: BackendKind,
    engine: Engine,
}

fn free_word(g: &GroupElement) -> &Word {
    match g {
        GroupElement::Free(w) => w,
        _ => unreachable!("checked by kind"),
    }
}

fn vector(g: &GroupElement) -> Vec<i64> {
    match g {
        GroupElement::Abelian(v) => v.clone(),
        GroupElement::Semidirect { v, .. } => v.to_vec(),
        _ => unreachable!("checked by kind"),
    }
}

/// `q = j / m^i` of a BS(1,m) element with its level, denominators reduced.
fn bs_affine(m: i64, g: &GroupElement) -> (i128, i64, i64) {
    let GroupElement::BaumslagSolitar { down, x, up } = g else { unreachable!() };
    let (mut j, mut i) = (*x, *down);
    while i > 0 && j % m as i128 == 0 {
        j /= m as i128;
        i -= 1;
    }
    (j, i, up - down)
}

impl SubgroupOracle {
    /// `images[i]` is the image of the i-th basis letter of `domain`.
    pub fn new(ambient: &Group, domain: &Group, images: Vec<GroupElement>, spec: &OracleSpec) -> Result<Self> {
        for g in &images {
            ambient.check(g)?;
        }
        let bad = |s: &str| Error::InvalidGroup(format!("{:?} backend: {s}", spec.backend));
        match domain.kind() {
            GroupKind::Free { rank } | GroupKind::FreeAbelian { rank } if *rank == images.len() => {}
            _ => return Err(bad("edge group must be free or free abelian with one image per basis letter")),
        }
        let engine = match spec.backend {
            BackendKind::Stallings => match ambient.kind() {
                GroupKind::Free { .. } => Engine::Stallings(StallingsGraph::new(
                    &images.iter().map(|g| free_word(g).clone()).collect::<Vec<_>>(),
                )),
                _ => return Err(bad("ambient group must be free")),
            },
            BackendKind::IntegerLattice => match ambient.kind() {
                GroupKind::FreeAbelian { rank } => {
                    Engine::Lattice(Lattice::new(&images.iter().map(vector).collect::<Vec<_>>(), *rank))
                }
                _ => return Err(bad("ambient group must be free abelian")),
            },
            BackendKind::FiberProjection => {
                if images.iter().any(|g| g.level() != Some(0)) {
                    return Err(bad("images must lie in the fiber"));
                }
                match ambient.kind() {
                    GroupKind::Semidirect { .. } => {
                        Engine::FiberLattice(Lattice::new(&images.iter().map(vector).collect::<Vec<_>>(), 2))
                    }
                    GroupKind::FreeByCyclic { .. } => Engine::FiberFree(StallingsGraph::new(
                        &images
                            .iter()
                            .map(|g| match g {
                                GroupElement::FreeByCyclic { w, .. } => w.clone(),
                                _ => unreachable!(),
                            })
                            .collect::<Vec<_>>(),
                    )),
                    _ => return Err(bad("ambient group must be a semidirect or free-by-cyclic group")),
                }
            }
            BackendKind::CyclicRoot => {
                if images.len() != 1 || images[0] == ambient.identity() {
                    return Err(bad("needs exactly one nontrivial generator"));
                }
                let z = images[0].clone();
                let free = match &z {
                    GroupElement::Free(w) => Some(StallingsGraph::new(std::slice::from_ref(w))),
                    GroupElement::FreeByCyclic { w, k: 0 } => Some(StallingsGraph::new(std::slice::from_ref(w))),
                    _ => None,
                };
                Engine::Cyclic { z, free }
            }
            BackendKind::FactorProjection => {
                let n = ambient.basis_names().len();
                let mut map = vec![None; n];
                for (i, g) in images.iter().enumerate() {
                    let idx = (0..n).find(|&j| ambient.basis_element(j) == *g);
                    let inv_idx = (0..n).find(|&j| ambient.inv(&ambient.basis_element(j)) == *g);
                    match (idx, inv_idx) {
                        (Some(j), _) if map[j].is_none() => map[j] = Some((i, true)),
                        (None, Some(j)) if map[j].is_none() => map[j] = Some((i, false)),
                        _ => return Err(bad("images must be distinct basis letters")),
                    }
                }
                if !matches!(ambient.kind(), GroupKind::Free { .. } | GroupKind::FreeAbelian { .. }) {
                    return Err(bad("ambient group must be free or free abelian"));
                }
                Engine::Factor { map }
            }
            BackendKind::BoundedSearch => {
                let cutoff = spec.cutoff.unwrap_or(8);
                let ball = domain.ball(cutoff)?;
                let mut table = std::collections::HashMap::new();
                for h in ball.ball(cutoff) {
                    let img = apply_images(ambient, &images, h);
                    table.entry(img).or_insert_with(|| h.clone());
                }
                Engine::Bounded { table }
            }
        };
        Ok(SubgroupOracle { ambient: ambient.clone(), domain: domain.clone(), images, backend: spec.backend, engine })
    }

    pub fn ambient(&self) -> &Group {
        &self.ambient
    }

    pub fn domain(&self) -> &Group {
        &self.domain
    }

    pub fn images(&self) -> &[GroupElement] {
        &self.images
    }

    pub fn backend(&self) -> BackendKind {
        self.backend
    }

    /// Whether the images form a basis of the subgroup they generate, when decidable.
    pub fn injective(&self) -> Option<bool> {
        match &self.engine {
            Engine::Stallings(s) | Engine::FiberFree(s) => Some(s.is_basis()),
            Engine::Lattice(l) | Engine::FiberLattice(l) => {
                let abelian_domain = matches!(self.domain.kind(), GroupKind::FreeAbelian { .. });
                Some(l.is_independent() && (abelian_domain || self.images.len() == 1))
            }
            Engine::Cyclic { .. } | Engine::Factor { .. } => Some(true),
            Engine::Bounded { .. } => None,
        }
    }

    /// `iota(h)` for an element of the edge group.
    pub fn apply(&self, h: &GroupElement) -> Result<GroupElement> {
        self.domain.check(h)?;
        Ok(apply_images(&self.ambient, &self.images, h))
    }

    fn domain_from_word(&self, w: &[i32]) -> GroupElement {
        match self.domain.kind() {
            GroupKind::Free { .. } => GroupElement::Free(word::reduce(w)),
            GroupKind::FreeAbelian { rank } => GroupElement::Abelian(word::exponent_sums(w, *rank)),
            _ => unreachable!(),
        }
    }

    fn domain_from_coeffs(&self, c: &[i64]) -> GroupElement {
        match self.domain.kind() {
            GroupKind::FreeAbelian { .. } => GroupElement::Abelian(c.to_vec()),
            GroupKind::Free { .. } => {
                let mut w = Vec::new();
                for (i, &k) in c.iter().enumerate() {
                    word::append(&mut w, &word::power(&[i as i32 + 1], k));
                }
                GroupElement::Free(w)
            }
            _ => unreachable!(),
        }
    }

    /// Exponent `k` with `z^k = g` for the cyclic backend.
    fn cyclic_exponent(&self, z: &GroupElement, free: &Option<StallingsGraph>, g: &GroupElement) -> Option<i64> {
        let amb = &self.ambient;
        let candidate: Option<i64> = match (z, g) {
            (GroupElement::Free(_), GroupElement::Free(w)) => {
                return free.as_ref().unwrap().preimage(w).map(|p| p.iter().map(|l| l.signum() as i64).sum());
            }
            (GroupElement::FreeByCyclic { k: 0, .. }, GroupElement::FreeByCyclic { w, k }) => {
                if *k != 0 {
                    return None;
                }
                return free.as_ref().unwrap().preimage(w).map(|p| p.iter().map(|l| l.signum() as i64).sum());
            }
            _ => {
                let lz = z.level().unwrap_or(0);
                if lz != 0 {
                    let lg = g.level().unwrap();
                    (lg % lz == 0).then_some(lg / lz)
                } else if g.level().is_some_and(|l| l != 0) {
                    None
                } else {
                    match (z, g) {
                        (GroupElement::Abelian(_), _) | (GroupElement::Semidirect { .. }, _) => {
                            let (zv, gv) = (vector(z), vector(g));
                            let i = zv.iter().position(|&c| c != 0).unwrap();
                            (gv[i] % zv[i] == 0).then(|| gv[i] / zv[i])
                        }
                        (GroupElement::BaumslagSolitar { .. }, GroupElement::BaumslagSolitar { .. }) => {
                            let GroupKind::BaumslagSolitar { m } = amb.kind() else { unreachable!() };
                            let (jz, iz, _) = bs_affine(*m, z);
                            let (jg, ig, _) = bs_affine(*m, g);
                            let d = iz.max(ig);
                            let num = jg * (*m as i128).pow((d - ig) as u32);
                            let den = jz * (*m as i128).pow((d - iz) as u32);
                            (num % den == 0).then(|| (num / den) as i64)
                        }
                        _ => None,
                    }
                }
            }
        };
        candidate.filter(|&k| amb.pow(z, k) == *g)
    }

    pub fn contains(&self, g: &GroupElement) -> Result<Membership> {
        self.ambient.check(g)?;
        let yes = |b: bool| if b { Membership::In } else { Membership::NotIn };
        Ok(match &self.engine {
            Engine::Stallings(s) => yes(s.contains(free_word(g))),
            Engine::Lattice(l) => yes(l.contains(&vector(g))),
            Engine::FiberLattice(l) => yes(g.level() == Some(0) && l.contains(&vector(g))),
            Engine::FiberFree(s) => match g {
                GroupElement::FreeByCyclic { w, k } => yes(*k == 0 && s.contains(w)),
                _ => unreachable!(),
            },
            Engine::Cyclic { z, free } => yes(self.cyclic_exponent(z, free, g).is_some()),
            Engine::Factor { map } => yes(self.factor_preimage(map, g).is_some()),
            Engine::Bounded { table, .. } => {
                if table.contains_key(g) {
                    Membership::In
                } else {
                    Membership::Unknown
                }
            }
        })
    }

    /// Membership as a plain boolean; `Unknown` becomes [`Error::OracleUnknown`].
    pub fn is_member(&self, g: &GroupElement) -> Result<bool> {
        match self.contains(g)? {
            Membership::In => Ok(true),
            Membership::NotIn => Ok(false),
            Membership::Unknown => Err(Error::OracleUnknown),
        }
    }

    fn factor_preimage(&self, map: &[Option<(usize, bool)>], g: &GroupElement) -> Option<GroupElement> {
        match g {
            GroupElement::Free(w) => {
                let mut out = Vec::with_capacity(w.len());
                for &l in w {
                    let (i, pos) = map[(l.unsigned_abs() - 1) as usize]?;
                    let s = if pos { 1 } else { -1 };
                    out.push(l.signum() * s * (i as i32 + 1));
                }
                Some(self.domain_from_word(&out))
            }
            GroupElement::Abelian(v) => {
                let mut c = vec![0i64; self.images.len()];
                for (j, &x) in v.iter().enumerate() {
                    match map[j] {
                        Some((i, pos)) => c[i] = if pos { x } else { -x },
                        None if x != 0 => return None,
                        None => {}
                    }
                }
                Some(self.domain_from_coeffs(&c))
            }
            _ => unreachable!(),
        }
    }

    /// `h` with `iota(h) = g`.
    pub fn preimage(&self, g: &GroupElement) -> Result<GroupElement> {
        self.ambient.check(g)?;
        let out = match &self.engine {
            Engine::Stallings(s) => s.preimage(free_word(g)).map(|w| self.domain_from_word(&w)),
            Engine::Lattice(l) => l.solve(&vector(g)).map(|c| self.domain_from_coeffs(&c)),
            Engine::FiberLattice(l) => {
                if g.level() == Some(0) {
                    l.solve(&vector(g)).map(|c| self.domain_from_coeffs(&c))
                } else {
                    None
                }
            }
            Engine::FiberFree(s) => match g {
                GroupElement::FreeByCyclic { w, k: 0 } => s.preimage(w).map(|p| self.domain_from_word(&p)),
                _ => None,
            },
            Engine::Cyclic { z, free } => {
                self.cyclic_exponent(z, free, g).map(|k| self.domain_from_word(&word::power(&[1], k)))
            }
            Engine::Factor { map } => self.factor_preimage(map, g),
            Engine::Bounded { table, .. } => match table.get(g) {
                Some(h) => Some(h.clone()),
                None => return Err(Error::OracleUnknown),
            },
        };
        out.ok_or(Error::NotInSubgroup)
    }

    /// Whether [`SubgroupOracle::left_coset_rep`] is available.
    pub fn has_coset_reps(&self) -> bool {
        !matches!(self.engine, Engine::Bounded { .. })
    }

    /// Canonical representative of the left coset `g H`.
    pub fn left_coset_rep(&self, g: &GroupElement) -> Result<Option<GroupElement>> {
        self.ambient.check(g)?;
        let amb = &self.ambient;
        Ok(match &self.engine {
            Engine::Stallings(s) => Some(GroupElement::Free(s.left_coset_rep(free_word(g)))),
            Engine::Lattice(l) => Some(GroupElement::Abelian(l.reduce(&vector(g)))),
            Engine::FiberLattice(_) => {
                let GroupElement::Semidirect { v, k } = g else { unreachable!() };
                let GroupKind::Semidirect { matrix } = amb.kind() else { unreachable!() };
                let ak = mat_pow(matrix, *k);
                let moved: Vec<Vec<i64>> = self.images.iter().map(|h| mat_apply(&ak, vector(h).try_into().unwrap()).to_vec()).collect();
                let r = Lattice::new(&moved, 2).reduce(v);
                Some(GroupElement::Semidirect { v: [r[0], r[1]], k: *k })
            }
            Engine::FiberFree(_) => {
                let GroupElement::FreeByCyclic { w, k } = g else { unreachable!() };
                let t = amb.pow(&amb.basis_element(amb.basis_names().len() - 1), *k);
                let moved: Vec<Word> = self
                    .images
                    .iter()
                    .map(|h| match amb.mul(&amb.mul(&t, h), &amb.inv(&t)) {
                        GroupElement::FreeByCyclic { w, .. } => w,
                        _ => unreachable!(),
                    })
                    .collect();
                let rep = StallingsGraph::new(&moved).left_coset_rep(w);
                Some(GroupElement::FreeByCyclic { w: rep, k: *k })
            }
            Engine::Cyclic { z, free } => Some(self.cyclic_coset_rep(z, free, g)),
            Engine::Factor { map } => Some(match g {
                GroupElement::Free(w) => {
                    let mut w = w.clone();
                    while w.last().is_some_and(|l| map[(l.unsigned_abs() - 1) as usize].is_some()) {
                        w.pop();
                    }
                    GroupElement::Free(w)
                }
                GroupElement::Abelian(v) => GroupElement::Abelian(
                    v.iter().enumerate().map(|(j, &x)| if map[j].is_some() { 0 } else { x }).collect(),
                ),
                _ => unreachable!(),
            }),
            Engine::Bounded { .. } => None,
        })
    }

    fn cyclic_coset_rep(&self, z: &GroupElement, free: &Option<StallingsGraph>, g: &GroupElement) -> GroupElement {
        let amb = &self.ambient;
        let lz = z.level().unwrap_or(0);
        if lz != 0 {
            let lg = g.level().unwrap();
            let k = (lg.rem_euclid(lz.abs()) - lg) / lz;
            return amb.mul(g, &amb.pow(z, k));
        }
        match (z, g) {
            (GroupElement::Free(_), GroupElement::Free(w)) => GroupElement::Free(free.as_ref().unwrap().left_coset_rep(w)),
            (GroupElement::FreeByCyclic { w: zw, .. }, GroupElement::FreeByCyclic { w, k }) => {
                let t = amb.pow(&amb.basis_element(amb.basis_names().len() - 1), *k);
                let zz = amb.mul(&amb.mul(&t, &GroupElement::FreeByCyclic { w: zw.clone(), k: 0 }), &amb.inv(&t));
                let GroupElement::FreeByCyclic { w: moved, .. } = zz else { unreachable!() };
                GroupElement::FreeByCyclic { w: StallingsGraph::new(&[moved]).left_coset_rep(w), k: *k }
            }
            (GroupElement::Abelian(zv), GroupElement::Abelian(gv)) => {
                let i = zv.iter().position(|&c| c != 0).unwrap();
                let k = (gv[i].rem_euclid(zv[i].abs()) - gv[i]) / zv[i];
                GroupElement::Abelian(gv.iter().zip(zv).map(|(a, b)| a + k * b).collect())
            }
            (GroupElement::Semidirect { v: zv, .. }, GroupElement::Semidirect { v, k }) => {
                let GroupKind::Semidirect { matrix } = amb.kind() else { unreachable!() };
                let u = mat_apply(&mat_pow(matrix, *k), *zv);
                let i = u.iter().position(|&c| c != 0).unwrap();
                let s = (v[i].rem_euclid(u[i].abs()) - v[i]) / u[i];
                GroupElement::Semidirect { v: [v[0] + s * u[0], v[1] + s * u[1]], k: *k }
            }
            (GroupElement::BaumslagSolitar { .. }, GroupElement::BaumslagSolitar { .. }) => {
                let GroupKind::BaumslagSolitar { m } = amb.kind() else { unreachable!() };
                let m = *m;
                let (jz, iz, _) = bs_affine(m, z);
                let (jg, ig, lg) = bs_affine(m, g);
                // step s = m^lg * jz / m^iz, written over m^ds with ds >= 0
                let (mut sn, mut ds) = (jz, iz - lg);
                if ds < 0 {
                    sn *= (m as i128).pow((-ds) as u32);
                    ds = 0;
                }
                while ds > 0 && sn % m as i128 == 0 {
                    sn /= m as i128;
                    ds -= 1;
                }
                let d = ig.max(ds);
                let jn = jg * (m as i128).pow((d - ig) as u32);
                let sn = sn * (m as i128).pow((d - ds) as u32);
                bs_normalize(m, jn.rem_euclid(sn.abs()), d, lg)
            }
            _ => unreachable!("cyclic backend kinds are fixed at construction"),
        }
    }

    /// Element of `rep * H` closest to `target` within `radius`, with its distance.
    pub fn nearest_in_coset(
        &self,
        target: &GroupElement,
        rep: &GroupElement,
        radius: usize,
    ) -> Result<Option<(GroupElement, usize)>> {
        self.ambient.check(target)?;
        self.ambient.check(rep)?;
        let amb = &self.ambient;
        let ball = amb.ball(radius)?;
        let rep_inv = amb.inv(rep);
        for r in 0..=radius {
            for d in ball.sphere(r) {
                let m = amb.mul(target, d);
                if self.is_member(&amb.mul(&rep_inv, &m))? {
                    return Ok(Some((m, r)));
                }
            }
        }
        Ok(None)
    }
}

fn apply_images(ambient: &Group, images: &[GroupElement], h: &GroupElement) -> GroupElement {
    match h {
        GroupElement::Free(w) => {
            let mut acc = ambient.identity();
            for &l in w {
                let g = &images[(l.unsigned_abs() - 1) as usize];
                let g = if l > 0 { g.clone() } else { ambient.inv(g) };
                acc = ambient.mul(&acc, &g);
            }
            acc
        }
        GroupElement::Abelian(c) => {
            let mut acc = ambient.identity();
            for (g, &k) in images.iter().zip(c) {
                acc = ambient.mul(&acc, &ambient.pow(g, k));
            }
            acc
        }
        _ => unreachable!("edge groups are free or free abelian"),
    }
}
