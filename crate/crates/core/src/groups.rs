//! Catalog groups: canonical forms, multiplication and word lengths.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::algebra::{GroupLike, LengthTable};
use crate::error::{Error, Result};
use crate::word::{self, Word};

pub const DEFAULT_BUDGET: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindTag {
    Free,
    FreeAbelian,
    Semidirect,
    FreeByCyclic,
    BaumslagSolitar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedWord {
    pub name: String,
    pub word: String,
}

/// Declarative description of a catalog group, as it appears in configs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDef {
    pub kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Names of the basis letters (defaults depend on the kind).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<String>,
    /// Declared generating set; empty means the basis itself.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<NamedWord>,
    /// Extra names usable in words, not generators.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<NamedWord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[i64; 2]; 2]>,
    /// Automorphism images of the fiber basis (free-by-cyclic).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inverse_images: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
}

impl GroupDef {
    pub fn new(kind: KindTag) -> Self {
        GroupDef {
            kind,
            rank: None,
            basis: vec![],
            generators: vec![],
            aliases: vec![],
            matrix: None,
            images: vec![],
            inverse_images: vec![],
            m: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    Semidirect { matrix: [[i64; 2]; 2] },
    FreeByCyclic { rank: usize, images: Vec<Word>, inverse_images: Vec<Word> },
    BaumslagSolitar { m: i64 },
}

/// Canonical form of a catalog group element; equality is form equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Freely reduced word.
    Free(Word),
    Abelian(Vec<i64>),
    /// `v * t^k`.
    Semidirect { v: [i64; 2], k: i64 },
    /// `w * t^k`.
    FreeByCyclic { w: Word, k: i64 },
    /// Britton form `t^-down x^x t^up`.
    BaumslagSolitar { down: i64, x: i128, up: i64 },
}

impl GroupElement {
    pub fn kind_name(&self) -> &'static str {
        match self {
            GroupElement::Free(_) => "free",
            GroupElement::Abelian(_) => "free_abelian",
            GroupElement::Semidirect { .. } => "semidirect",
            GroupElement::FreeByCyclic { .. } => "free_by_cyclic",
            GroupElement::BaumslagSolitar { .. } => "baumslag_solitar",
        }
    }

    /// The Z-coordinate of the kinds that map onto Z by a stable letter.
    pub fn level(&self) -> Option<i64> {
        match self {
            GroupElement::Semidirect { k, .. } | GroupElement::FreeByCyclic { k, .. } => Some(*k),
            GroupElement::BaumslagSolitar { down, up, .. } => Some(up - down),
            _ => None,
        }
    }
}

struct Inner {
    def: GroupDef,
    kind: GroupKind,
    basis_names: Vec<String>,
    generators: Vec<(String, GroupElement)>,
    aliases: Vec<(String, GroupElement)>,
    standard: bool,
    budget: usize,
    ball: Mutex<Arc<LengthTable<GroupElement>>>,
}

/// A catalog group with a declared finite generating set. Cheap to clone.
#[derive(Clone)]
pub struct Group(Arc<Inner>);

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({:?}, gens {:?})", self.0.kind, self.generator_names())
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.def == other.0.def
    }
}

fn mat_mul(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut c = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = (0..2)
                .map(|l| a[i][l].checked_mul(b[l][j]).expect("matrix entry overflow"))
                .fold(0i64, |s, x| s.checked_add(x).expect("matrix entry overflow"));
        }
    }
    c
}

/// `A^k` for `A` in SL2(Z), any integer `k`.
pub fn mat_pow(a: &[[i64; 2]; 2], k: i64) -> [[i64; 2]; 2] {
    let base = if k < 0 { [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]] } else { *a };
    let mut result = [[1, 0], [0, 1]];
    let mut b = base;
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &b);
        }
        e >>= 1;
        if e > 0 {
            b = mat_mul(&b, &b);
        }
    }
    result
}

pub fn mat_apply(a: &[[i64; 2]; 2], v: [i64; 2]) -> [i64; 2] {
    let f = |i: usize| {
        a[i][0]
            .checked_mul(v[0])
            .and_then(|x| a[i][1].checked_mul(v[1]).and_then(|y| x.checked_add(y)))
            .expect("vector entry overflow")
    };
    [f(0), f(1)]
}

fn pow_i128(m: i64, e: i64) -> i128 {
    (m as i128).checked_pow(e as u32).expect("Baumslag-Solitar exponent overflow")
}

/// Britton form of `J / m^I` at level `l`.
pub(crate) fn bs_normalize(m: i64, mut j: i128, mut i: i64, l: i64) -> GroupElement {
    let mm = m as i128;
    while i > 0 && j % mm == 0 {
        j /= mm;
        i -= 1;
    }
    if j == 0 {
        i = 0;
    }
    let down = i.max(-l);
    let x = j.checked_mul(pow_i128(m, down - i)).expect("Baumslag-Solitar overflow");
    GroupElement::BaumslagSolitar { down, x, up: l + down }
}

fn bs_mul(m: i64, a: (i64, i128, i64), b: (i64, i128, i64)) -> GroupElement {
    let (i1, j1, k1) = a;
    let (i2, j2, k2) = b;
    let s = k1 - i2;
    let l = k1 - i1 + k2 - i2;
    let (j, i) = if s >= 0 {
        (j1.checked_add(pow_i128(m, s).checked_mul(j2).expect("overflow")).expect("overflow"), i1)
    } else {
        (j1.checked_mul(pow_i128(m, -s)).expect("overflow").checked_add(j2).expect("overflow"), i1 + i2 - k1)
    };
    bs_normalize(m, j, i, l)
}

/// Exact length of `x^k` in BS(1,m) with generators {x, t}.
///
/// Geodesics for `x^k` climb to some level `j`, writing `k = sum a_l m^l`
/// with small digits below the top level; the minimum of `2j + sum |a_l|`
/// over all `j` is the length. Checked against breadth-first search in tests.
pub fn bs_power_length(m: i64, k: i128) -> u64 {
    if k == 0 {
        return 0;
    }
    let mm = m as i128;
    let mut states: HashMap<i128, u64> = HashMap::from([(k, 0u64)]);
    let mut best = u64::MAX;
    let mut level = 0u64;
    while !states.is_empty() {
        for (&v, &c) in &states {
            best = best.min(2 * level + c + v.unsigned_abs() as u64);
        }
        if 2 * (level + 1) >= best {
            break;
        }
        let mut next: HashMap<i128, u64> = HashMap::new();
        for (&v, &c) in &states {
            let r = v.rem_euclid(mm);
            let digits: &[i128] = if r == 0 { &[0] } else { &[r, r - mm] };
            for &a in digits {
                let nv = (v - a) / mm;
                let nc = c + a.unsigned_abs() as u64;
                let e = next.entry(nv).or_insert(nc);
                *e = (*e).min(nc);
            }
        }
        states = next;
        level += 1;
    }
    best
}

impl Group {
    pub fn build(def: GroupDef) -> Result<Group> {
        Self::build_with_budget(def, DEFAULT_BUDGET)
    }

    pub fn build_with_budget(def: GroupDef, budget: usize) -> Result<Group> {
        let bad = |s: String| Error::InvalidGroup(s);
        let (default_names, kind_partial): (Vec<String>, GroupKind) = match def.kind {
            KindTag::Free => {
                let rank = def.rank.unwrap_or(def.basis.len());
                if rank == 0 {
                    return Err(bad("free group needs rank or basis".into()));
                }
                ((1..=rank).map(|i| format!("x{i}")).collect(), GroupKind::Free { rank })
            }
            KindTag::FreeAbelian => {
                let rank = def.rank.unwrap_or(def.basis.len());
                if rank == 0 {
                    return Err(bad("free abelian group needs rank or basis".into()));
                }
                ((1..=rank).map(|i| format!("e{i}")).collect(), GroupKind::FreeAbelian { rank })
            }
            KindTag::Semidirect => {
                let matrix = def.matrix.ok_or_else(|| bad("semidirect group needs a matrix".into()))?;
                let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
                if det != 1 {
                    return Err(bad(format!("matrix must lie in SL2(Z), determinant is {det}")));
                }
                (vec!["e1".into(), "e2".into(), "t".into()], GroupKind::Semidirect { matrix })
            }
            KindTag::FreeByCyclic => {
                let rank = def.rank.unwrap_or(def.images.len());
                if rank == 0 || def.images.len() != rank {
                    return Err(bad("free-by-cyclic group needs one image per fiber letter".into()));
                }
                let mut names: Vec<String> = (1..=rank).map(|i| format!("x{i}")).collect();
                names.push("t".into());
                (names, GroupKind::FreeByCyclic { rank, images: vec![], inverse_images: vec![] })
            }
            KindTag::BaumslagSolitar => {
                let m = def.m.unwrap_or(2);
                if m < 2 {
                    return Err(bad(format!("BS(1,m) needs m >= 2, got {m}")));
                }
                (vec!["x".into(), "t".into()], GroupKind::BaumslagSolitar { m })
            }
        };
        let basis_names = if def.basis.is_empty() { default_names.clone() } else { def.basis.clone() };
        if basis_names.len() != default_names.len() {
            return Err(bad(format!("expected {} basis names, got {}", default_names.len(), basis_names.len())));
        }
        let mut kind = kind_partial;
        if let GroupKind::FreeByCyclic { rank, images, inverse_images } = &mut kind {
            let fiber = &basis_names[..*rank];
            let parse = |s: &str| parse_free_word(s, fiber);
            *images = def.images.iter().map(|s| parse(s)).collect::<Result<_>>()?;
            *inverse_images = if def.inverse_images.is_empty() {
                triangular_inverse(images).ok_or_else(|| {
                    bad("automorphism is not unitriangular; supply inverse_images".into())
                })?
            } else {
                def.inverse_images.iter().map(|s| parse(s)).collect::<Result<_>>()?
            };
            check_automorphism(*rank, images, inverse_images)?;
        }
        let inner = Inner {
            def: def.clone(),
            kind,
            basis_names,
            generators: vec![],
            aliases: vec![],
            standard: true,
            budget,
            ball: Mutex::new(Arc::new(LengthTable::new(GroupElement::Free(vec![])))),
        };
        let mut g = Group(Arc::new(inner));
        let identity = g.identity();
        let mut generators = Vec::new();
        if def.generators.is_empty() {
            for (i, n) in g.0.basis_names.iter().enumerate() {
                generators.push((n.clone(), g.basis_element(i)));
            }
        } else {
            for nw in &def.generators {
                let e = g.parse(&nw.word)?;
                if e == identity {
                    return Err(bad(format!("generator {} is trivial", nw.name)));
                }
                generators.push((nw.name.clone(), e));
            }
        }
        let mut aliases = Vec::new();
        for nw in &def.aliases {
            aliases.push((nw.name.clone(), g.parse(&nw.word)?));
        }
        let mut basis_elems: Vec<GroupElement> = (0..g.0.basis_names.len()).map(|i| g.basis_element(i)).collect();
        basis_elems.sort();
        let mut gen_elems: Vec<GroupElement> = generators.iter().map(|(_, e)| e.clone()).collect();
        gen_elems.sort();
        let standard = basis_elems == gen_elems;
        let inner = Arc::get_mut(&mut g.0).expect("fresh group");
        inner.generators = generators;
        inner.aliases = aliases;
        inner.standard = standard;
        inner.ball = Mutex::new(Arc::new(LengthTable::new(identity)));
        Ok(g)
    }

    /// Same group and generators with a different element budget (fresh cache).
    pub fn with_budget(&self, budget: usize) -> Group {
        Group::build_with_budget(self.0.def.clone(), budget).expect("definition already validated")
    }

    pub fn free(rank: usize) -> Group {
        let mut d = GroupDef::new(KindTag::Free);
        d.rank = Some(rank);
        Group::build(d).unwrap()
    }

    pub fn free_named(names: &[&str]) -> Group {
        let mut d = GroupDef::new(KindTag::Free);
        d.basis = names.iter().map(|s| s.to_string()).collect();
        Group::build(d).unwrap()
    }

    pub fn free_abelian(rank: usize) -> Group {
        let mut d = GroupDef::new(KindTag::FreeAbelian);
        d.rank = Some(rank);
        Group::build(d).unwrap()
    }

    pub fn free_abelian_named(names: &[&str]) -> Group {
        let mut d = GroupDef::new(KindTag::FreeAbelian);
        d.basis = names.iter().map(|s| s.to_string()).collect();
        Group::build(d).unwrap()
    }

    pub fn semidirect(matrix: [[i64; 2]; 2]) -> Result<Group> {
        let mut d = GroupDef::new(KindTag::Semidirect);
        d.matrix = Some(matrix);
        Group::build(d)
    }

    pub fn baumslag_solitar(m: i64) -> Result<Group> {
        let mut d = GroupDef::new(KindTag::BaumslagSolitar);
        d.m = Some(m);
        Group::build(d)
    }

    pub fn free_by_cyclic(images: &[&str]) -> Result<Group> {
        let mut d = GroupDef::new(KindTag::FreeByCyclic);
        d.images = images.iter().map(|s| s.to_string()).collect();
        Group::build(d)
    }

    pub fn def(&self) -> &GroupDef {
        &self.0.def
    }

    pub fn kind(&self) -> &GroupKind {
        &self.0.kind
    }

    pub fn budget(&self) -> usize {
        self.0.budget
    }

    pub fn basis_names(&self) -> &[String] {
        &self.0.basis_names
    }

    pub fn generators(&self) -> &[(String, GroupElement)] {
        &self.0.generators
    }

    pub fn generator_names(&self) -> Vec<&str> {
        self.0.generators.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// True when the declared generators are exactly the basis letters.
    pub fn is_standard(&self) -> bool {
        self.0.standard
    }

    pub fn kind_name(&self) -> &'static str {
        match self.0.kind {
            GroupKind::Free { .. } => "free",
            GroupKind::FreeAbelian { .. } => "free_abelian",
            GroupKind::Semidirect { .. } => "semidirect",
            GroupKind::FreeByCyclic { .. } => "free_by_cyclic",
            GroupKind::BaumslagSolitar { .. } => "baumslag_solitar",
        }
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        let ok = match (&self.0.kind, g) {
            (GroupKind::Free { .. }, GroupElement::Free(_)) => true,
            (GroupKind::FreeAbelian { rank }, GroupElement::Abelian(v)) => v.len() == *rank,
            (GroupKind::Semidirect { .. }, GroupElement::Semidirect { .. }) => true,
            (GroupKind::FreeByCyclic { .. }, GroupElement::FreeByCyclic { .. }) => true,
            (GroupKind::BaumslagSolitar { .. }, GroupElement::BaumslagSolitar { .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ElementKindMismatch { expected: self.kind_name().into(), found: g.kind_name().into() })
        }
    }

    /// The i-th basis letter as an element.
    pub fn basis_element(&self, i: usize) -> GroupElement {
        match &self.0.kind {
            GroupKind::Free { .. } => GroupElement::Free(vec![i as i32 + 1]),
            GroupKind::FreeAbelian { rank } => {
                let mut v = vec![0; *rank];
                v[i] = 1;
                GroupElement::Abelian(v)
            }
            GroupKind::Semidirect { .. } => match i {
                0 => GroupElement::Semidirect { v: [1, 0], k: 0 },
                1 => GroupElement::Semidirect { v: [0, 1], k: 0 },
                _ => GroupElement::Semidirect { v: [0, 0], k: 1 },
            },
            GroupKind::FreeByCyclic { rank, .. } => {
                if i < *rank {
                    GroupElement::FreeByCyclic { w: vec![i as i32 + 1], k: 0 }
                } else {
                    GroupElement::FreeByCyclic { w: vec![], k: 1 }
                }
            }
            GroupKind::BaumslagSolitar { .. } => {
                if i == 0 {
                    GroupElement::BaumslagSolitar { down: 0, x: 1, up: 0 }
                } else {
                    GroupElement::BaumslagSolitar { down: 0, x: 0, up: 1 }
                }
            }
        }
    }

    fn alpha_power(&self, u: &[i32], k: i64) -> Word {
        let GroupKind::FreeByCyclic { images, inverse_images, .. } = &self.0.kind else { unreachable!() };
        let imgs = if k >= 0 { images } else { inverse_images };
        let mut w = u.to_vec();
        for _ in 0..k.unsigned_abs() {
            w = word::substitute(&w, imgs);
        }
        w
    }

    /// `multiply` with kind checks.
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn invert(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(self.inv(a))
    }

    pub fn pow(&self, a: &GroupElement, k: i64) -> GroupElement {
        let mut base = if k < 0 { self.inv(a) } else { a.clone() };
        let mut acc = self.identity();
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn resolve(&self, name: &str) -> Option<GroupElement> {
        self.0
            .generators
            .iter()
            .chain(self.0.aliases.iter())
            .find(|(n, _)| n == name)
            .map(|(_, e)| e.clone())
            .or_else(|| self.0.basis_names.iter().position(|n| n == name).map(|i| self.basis_element(i)))
    }

    /// Parses a word such as `"x3 x1^4 x3^-1"` over generator, alias and basis names.
    pub fn parse(&self, s: &str) -> Result<GroupElement> {
        let toks = word::tokenize(s).map_err(|reason| Error::WordParse { word: s.into(), reason })?;
        let mut acc = self.identity();
        for (name, exp) in toks {
            let e = self.resolve(&name).ok_or_else(|| Error::WordParse {
                word: s.into(),
                reason: format!("unknown generator {name:?}"),
            })?;
            acc = self.mul(&acc, &self.pow(&e, exp));
        }
        Ok(acc)
    }

    /// Evaluates a word in the declared generators (letter i+1 = generator i).
    pub fn eval_generator_word(&self, w: &[i32]) -> GroupElement {
        let mut acc = self.identity();
        for &l in w {
            let g = &self.0.generators[(l.unsigned_abs() - 1) as usize].1;
            let g = if l > 0 { g.clone() } else { self.inv(g) };
            acc = self.mul(&acc, &g);
        }
        acc
    }

    /// Renders an element as a word over basis names that [`Group::parse`] accepts.
    pub fn format(&self, g: &GroupElement) -> String {
        let names = &self.0.basis_names;
        let mut toks: Vec<(String, i64)> = Vec::new();
        let mut push = |name: &str, e: i64| {
            if e == 0 {
                return;
            }
            match toks.last_mut() {
                Some((n, k)) if n == name => *k += e,
                _ => toks.push((name.to_string(), e)),
            }
        };
        match g {
            GroupElement::Free(w) => w.iter().for_each(|&l| push(&names[(l.unsigned_abs() - 1) as usize], l.signum() as i64)),
            GroupElement::Abelian(v) => v.iter().enumerate().for_each(|(i, &c)| push(&names[i], c)),
            GroupElement::Semidirect { v, k } => {
                push(&names[0], v[0]);
                push(&names[1], v[1]);
                push(&names[2], *k);
            }
            GroupElement::FreeByCyclic { w, k } => {
                w.iter().for_each(|&l| push(&names[(l.unsigned_abs() - 1) as usize], l.signum() as i64));
                push(&names[names.len() - 1], *k);
            }
            GroupElement::BaumslagSolitar { down, x, up } => {
                push(&names[1], -down);
                push(&names[0], *x as i64);
                push(&names[1], *up);
            }
        }
        if toks.is_empty() {
            return "1".into();
        }
        toks.iter()
            .map(|(n, e)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Word length without search, when the generators are the basis and the
    /// element has a closed-form length.
    pub fn closed_form_length(&self, g: &GroupElement) -> Option<usize> {
        if !self.0.standard {
            return None;
        }
        match (&self.0.kind, g) {
            (GroupKind::Free { .. }, GroupElement::Free(w)) => Some(w.len()),
            (GroupKind::FreeAbelian { .. }, GroupElement::Abelian(v)) => Some(v.iter().map(|c| c.unsigned_abs() as usize).sum()),
            (GroupKind::BaumslagSolitar { m }, GroupElement::BaumslagSolitar { down: 0, x, up: 0 }) => {
                Some(bs_power_length(*m, *x) as usize)
            }
            _ => None,
        }
    }

    /// Exact word length w.r.t. the declared generators, `None` beyond `cutoff`.
    pub fn word_length(&self, g: &GroupElement, cutoff: usize) -> Result<Option<usize>> {
        self.check(g)?;
        if let Some(l) = self.closed_form_length(g) {
            return Ok(if l <= cutoff { Some(l) } else { None });
        }
        if let GroupKind::Free { rank } = self.0.kind {
            return self.astar_free_length(g, rank, cutoff);
        }
        self.bfs_length(g, cutoff)
    }

    /// Length through the cached ball, growing it on demand.
    pub fn bfs_length(&self, g: &GroupElement, cutoff: usize) -> Result<Option<usize>> {
        let gens = self.symmetric_generators();
        let mut guard = self.0.ball.lock().unwrap();
        loop {
            if let Some(l) = guard.length(g) {
                return Ok(if l <= cutoff { Some(l) } else { None });
            }
            if guard.radius >= cutoff {
                return Ok(None);
            }
            let target = guard.radius + 1;
            Arc::make_mut(&mut guard).extend_to(self, &gens, target, self.0.budget)?;
        }
    }

    fn astar_free_length(&self, g: &GroupElement, rank: usize, cutoff: usize) -> Result<Option<usize>> {
        let GroupElement::Free(target) = g else { unreachable!() };
        let gens = self.symmetric_generators();
        let gen_words: Vec<&Word> = gens
            .iter()
            .map(|e| match e {
                GroupElement::Free(w) => w,
                _ => unreachable!(),
            })
            .collect();
        let scale = gen_words
            .iter()
            .map(|w| word::exponent_sums(w, rank).iter().map(|c| c.unsigned_abs()).sum::<u64>())
            .max()
            .unwrap_or(1)
            .max(1);
        let goal = word::exponent_sums(target, rank);
        let h = |w: &Word| -> usize {
            let ab = word::exponent_sums(w, rank);
            let d: u64 = ab.iter().zip(&goal).map(|(a, b)| (a - b).unsigned_abs()).sum();
            d.div_ceil(scale) as usize
        };
        let mut dist: HashMap<Word, usize> = HashMap::new();
        let mut heap = BinaryHeap::new();
        dist.insert(vec![], 0);
        heap.push(Reverse((h(&vec![]), 0usize, Vec::<i32>::new())));
        while let Some(Reverse((f, d, w))) = heap.pop() {
            if f > cutoff {
                return Ok(None);
            }
            if &w == target {
                return Ok(Some(d));
            }
            if dist.get(&w).is_some_and(|&best| best < d) {
                continue;
            }
            for s in &gen_words {
                let y = word::mul(&w, s);
                let nd = d + 1;
                if dist.get(&y).is_none_or(|&best| nd < best) {
                    dist.insert(y.clone(), nd);
                    heap.push(Reverse((nd + h(&y), nd, y)));
                    if dist.len() > self.0.budget {
                        return Err(Error::budget("free-group length search", d));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Exact ball of radius `r` (shares the length cache).
    pub fn ball_enumerate(&self, r: usize) -> Result<LengthTable<GroupElement>> {
        Ok(self.ball(r)?.truncated(r))
    }

    /// Shared snapshot of the cached ball, grown to at least radius `r`.
    pub fn ball(&self, r: usize) -> Result<Arc<LengthTable<GroupElement>>> {
        let gens = self.symmetric_generators();
        let mut guard = self.0.ball.lock().unwrap();
        if guard.radius < r {
            Arc::make_mut(&mut guard).extend_to(self, &gens, r, self.0.budget)?;
        }
        Ok(Arc::clone(&guard))
    }

    /// Abelianization determinant check and `alpha(alpha^-1(x)) = x` on the basis.
    pub fn automorphism_images(&self) -> Option<(&[Word], &[Word])> {
        match &self.0.kind {
            GroupKind::FreeByCyclic { images, inverse_images, .. } => Some((images, inverse_images)),
            _ => None,
        }
    }
}

fn parse_free_word(s: &str, names: &[String]) -> Result<Word> {
    let toks = word::tokenize(s).map_err(|reason| Error::WordParse { word: s.into(), reason })?;
    let mut w = Vec::new();
    for (n, e) in toks {
        let i = names.iter().position(|x| *x == n).ok_or_else(|| Error::WordParse {
            word: s.into(),
            reason: format!("unknown letter {n:?}"),
        })?;
        word::append(&mut w, &word::power(&[i as i32 + 1], e));
    }
    Ok(w)
}

/// Inverse of `x_i -> x_i w_i` with `w_i` over letters after `x_i`.
fn triangular_inverse(images: &[Word]) -> Option<Vec<Word>> {
    let n = images.len();
    let mut inv: Vec<Word> = vec![vec![]; n];
    for i in (0..n).rev() {
        let img = &images[i];
        if img.first() != Some(&(i as i32 + 1)) || img[1..].iter().any(|&l| (l.unsigned_abs() as usize) <= i + 1) {
            return None;
        }
        let tail: Word = img[1..].to_vec();
        let mut partial = inv.clone();
        partial[i] = vec![i as i32 + 1];
        let pulled = word::substitute(&tail, &partial);
        inv[i] = word::mul(&[i as i32 + 1], &word::inverse(&pulled));
    }
    Some(inv)
}

fn check_automorphism(rank: usize, images: &[Word], inverse_images: &[Word]) -> Result<()> {
    let mut m = vec![vec![0i128; rank]; rank];
    for (i, img) in images.iter().enumerate() {
        for (j, c) in word::exponent_sums(img, rank).into_iter().enumerate() {
            m[j][i] = c as i128;
        }
    }
    let det = determinant(&m);
    if det.abs() != 1 {
        return Err(Error::InvalidGroup(format!("automorphism has abelianized determinant {det}")));
    }
    for i in 0..rank {
        let x = vec![i as i32 + 1];
        let there = word::substitute(&word::substitute(&x, inverse_images), images);
        let back = word::substitute(&word::substitute(&x, images), inverse_images);
        if there != x || back != x {
            return Err(Error::InvalidGroup("inverse_images do not invert the automorphism".into()));
        }
    }
    Ok(())
}

fn determinant(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<i128>> =
                m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, &x)| x).collect()).collect();
            let sign = if c % 2 == 0 { 1 } else { -1 };
            sign * m[0][c] * determinant(&minor)
        })
        .sum()
}

impl GroupLike for Group {
    type Elem = GroupElement;

    fn identity(&self) -> GroupElement {
        match &self.0.kind {
            GroupKind::Free { .. } => GroupElement::Free(vec![]),
            GroupKind::FreeAbelian { rank } => GroupElement::Abelian(vec![0; *rank]),
            GroupKind::Semidirect { .. } => GroupElement::Semidirect { v: [0, 0], k: 0 },
            GroupKind::FreeByCyclic { .. } => GroupElement::FreeByCyclic { w: vec![], k: 0 },
            GroupKind::BaumslagSolitar { .. } => GroupElement::BaumslagSolitar { down: 0, x: 0, up: 0 },
        }
    }

    fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        use GroupElement as E;
        match (&self.0.kind, a, b) {
            (_, E::Free(x), E::Free(y)) => E::Free(word::mul(x, y)),
            (_, E::Abelian(x), E::Abelian(y)) => {
                E::Abelian(x.iter().zip(y).map(|(p, q)| p.checked_add(*q).expect("overflow")).collect())
            }
            (GroupKind::Semidirect { matrix }, E::Semidirect { v, k }, E::Semidirect { v: w, k: l }) => {
                let aw = mat_apply(&mat_pow(matrix, *k), *w);
                E::Semidirect { v: [v[0] + aw[0], v[1] + aw[1]], k: k + l }
            }
            (GroupKind::FreeByCyclic { .. }, E::FreeByCyclic { w, k }, E::FreeByCyclic { w: u, k: l }) => {
                E::FreeByCyclic { w: word::mul(w, &self.alpha_power(u, *k)), k: k + l }
            }
            (
                GroupKind::BaumslagSolitar { m },
                E::BaumslagSolitar { down: i1, x: j1, up: k1 },
                E::BaumslagSolitar { down: i2, x: j2, up: k2 },
            ) => bs_mul(*m, (*i1, *j1, *k1), (*i2, *j2, *k2)),
            _ => panic!("element kinds do not match group kind {}", self.kind_name()),
        }
    }

    fn inv(&self, a: &GroupElement) -> GroupElement {
        use GroupElement as E;
        match (&self.0.kind, a) {
            (_, E::Free(x)) => E::Free(word::inverse(x)),
            (_, E::Abelian(x)) => E::Abelian(x.iter().map(|c| -c).collect()),
            (GroupKind::Semidirect { matrix }, E::Semidirect { v, k }) => {
                let w = mat_apply(&mat_pow(matrix, -k), *v);
                E::Semidirect { v: [-w[0], -w[1]], k: -k }
            }
            (GroupKind::FreeByCyclic { .. }, E::FreeByCyclic { w, k }) => {
                E::FreeByCyclic { w: self.alpha_power(&word::inverse(w), -k), k: -k }
            }
            (_, E::BaumslagSolitar { down, x, up }) => E::BaumslagSolitar { down: *up, x: -x, up: *down },
            _ => panic!("element kind does not match group kind {}", self.kind_name()),
        }
    }

    fn symmetric_generators(&self) -> Vec<GroupElement> {
        let mut out: Vec<GroupElement> = Vec::new();
        let id = self.identity();
        for (_, g) in &self.0.generators {
            for e in [g.clone(), self.inv(g)] {
                if e != id && !out.contains(&e) {
                    out.push(e);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_examples() {
        let z2 = Group::free_abelian(2);
        let a = GroupElement::Abelian(vec![3, -2]);
        assert_eq!(z2.multiply(&a, &GroupElement::Abelian(vec![-3, 2])).unwrap(), z2.identity());
        assert_eq!(z2.word_length(&a, 10).unwrap(), Some(5));

        let f2 = Group::free_named(&["a", "b"]);
        let ab = f2.parse("a b").unwrap();
        assert_eq!(f2.multiply(&ab, &f2.parse("b^-1 a").unwrap()).unwrap(), f2.parse("a^2").unwrap());
        assert_eq!(f2.word_length(&f2.parse("a b a^-1").unwrap(), 10).unwrap(), Some(3));

        let bs = Group::baumslag_solitar(2).unwrap();
        let x2 = bs.parse("x^2").unwrap();
        assert_eq!(bs.mul(&x2, &x2), bs.parse("x^4").unwrap());
        assert_eq!(bs.parse("t x t^-1").unwrap(), x2);
        assert_eq!(bs.parse("t^-1 x^2 t").unwrap(), bs.parse("x").unwrap());
    }

    #[test]
    fn kind_mismatch() {
        let f2 = Group::free(2);
        let err = f2.multiply(&GroupElement::Abelian(vec![1, 0]), &f2.identity()).unwrap_err();
        assert!(matches!(err, Error::ElementKindMismatch { .. }));
    }

    #[test]
    fn format_round_trip() {
        let groups = [
            Group::free(3),
            Group::free_abelian(2),
            Group::semidirect([[2, 1], [1, 1]]).unwrap(),
            Group::baumslag_solitar(2).unwrap(),
            Group::free_by_cyclic(&["x1 x2^2 x3^3", "x2 x3^4", "x3"]).unwrap(),
        ];
        for g in &groups {
            let ball = g.ball_enumerate(3).unwrap();
            for e in ball.ball(3) {
                assert_eq!(&g.parse(&g.format(e)).unwrap(), e, "{}", g.format(e));
            }
        }
    }

    #[test]
    fn free_by_cyclic_inverse() {
        let g = Group::free_by_cyclic(&["x1 x2^2 x3^3", "x2 x3^4", "x3"]).unwrap();
        let t = g.parse("t").unwrap();
        let x1 = g.parse("x1").unwrap();
        assert_eq!(g.mul(&g.mul(&t, &x1), &g.inv(&t)), g.parse("x1 x2^2 x3^3").unwrap());
        assert!(Group::free_by_cyclic(&["x1 x2", "x1"]).is_err());
    }

    #[test]
    fn bs_power_length_small() {
        assert_eq!(bs_power_length(2, 1), 1);
        assert_eq!(bs_power_length(2, 4), 4);
        assert_eq!(bs_power_length(2, 16), 8);
        assert_eq!(bs_power_length(2, -16), 8);
    }
}
