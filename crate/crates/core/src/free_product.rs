//! The free product `G_Gamma` of the vertex groups with the free group on the
//! edges, normal sets, the hat lift and the norm-pair construction.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use serde::Serialize;

use crate::algebra::GroupLike;
use crate::error::{Error, Result};
use crate::functions::SupportedFunction;
use crate::gog::{GSequence, GraphOfGroups, Move, Pi1Element};
use crate::groups::GroupElement;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Syllable {
    Vertex { vertex: usize, elem: GroupElement },
    Edge { edge: usize, power: i64 },
}

/// Alternating normal form in `G_Gamma`; the empty list is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeProductElement {
    syllables: Vec<Syllable>,
}

impl FreeProductElement {
    pub fn identity() -> Self {
        FreeProductElement::default()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn vertex(gog: &GraphOfGroups, vertex: usize, elem: GroupElement) -> Self {
        let mut out = Self::identity();
        out.push(gog, Syllable::Vertex { vertex, elem });
        out
    }

    pub fn edge(edge: usize, power: i64) -> Self {
        let mut s = Self::identity();
        if power != 0 {
            s.syllables.push(Syllable::Edge { edge, power });
        }
        s
    }

    /// Appends one syllable, merging with the last one when they share a factor.
    fn push(&mut self, gog: &GraphOfGroups, syl: Syllable) {
        let merged = match (self.syllables.last(), &syl) {
            (Some(Syllable::Vertex { vertex: v, elem: a }), Syllable::Vertex { vertex: w, elem: b }) if v == w => {
                let g = gog.group(*v);
                Some(Syllable::Vertex { vertex: *v, elem: g.mul(a, b) })
            }
            (Some(Syllable::Edge { edge: e, power: p }), Syllable::Edge { edge: f, power: q }) if e == f => {
                Some(Syllable::Edge { edge: *e, power: p + q })
            }
            _ => None,
        };
        let syl = match merged {
            Some(m) => {
                self.syllables.pop();
                m
            }
            None => syl,
        };
        let trivial = match &syl {
            Syllable::Vertex { vertex, elem } => *elem == gog.group(*vertex).identity(),
            Syllable::Edge { power, .. } => *power == 0,
        };
        if !trivial {
            self.syllables.push(syl);
        }
    }

    pub fn mul(&self, gog: &GraphOfGroups, other: &Self) -> Self {
        let mut out = self.clone();
        for s in &other.syllables {
            out.push(gog, s.clone());
        }
        out
    }

    pub fn inv(&self, gog: &GraphOfGroups) -> Self {
        let syllables = self
            .syllables
            .iter()
            .rev()
            .map(|s| match s {
                Syllable::Vertex { vertex, elem } => Syllable::Vertex { vertex: *vertex, elem: gog.group(*vertex).inv(elem) },
                Syllable::Edge { edge, power } => Syllable::Edge { edge: *edge, power: -power },
            })
            .collect();
        FreeProductElement { syllables }
    }

    /// The word `g0 t_{e1}^{+-1} g1 ...` of a G-sequence.
    pub fn from_sequence(gog: &GraphOfGroups, s: &GSequence) -> Self {
        let mut out = Self::vertex(gog, s.start, s.elems[0].clone());
        for (j, f) in s.edges.iter().enumerate() {
            out.push(gog, Syllable::Edge { edge: f.edge, power: if f.forward { 1 } else { -1 } });
            out.push(gog, Syllable::Vertex { vertex: gog.target(*f), elem: s.elems[j + 1].clone() });
        }
        out
    }

    /// Word length for the union of vertex generators and edge letters.
    pub fn length(&self, gog: &GraphOfGroups) -> Result<usize> {
        let mut total = 0;
        for s in &self.syllables {
            total += match s {
                Syllable::Vertex { vertex, elem } => gog
                    .group(*vertex)
                    .word_length(elem, gog.length_cutoff)?
                    .ok_or_else(|| Error::budget("vertex word length", gog.length_cutoff))?,
                Syllable::Edge { power, .. } => power.unsigned_abs() as usize,
            };
        }
        Ok(total)
    }

    pub fn format(&self, gog: &GraphOfGroups) -> String {
        if self.syllables.is_empty() {
            return "1".into();
        }
        let parts: Vec<String> = self
            .syllables
            .iter()
            .map(|s| match s {
                Syllable::Vertex { vertex, elem } => format!("[{}:{}]", gog.vertices[*vertex].name, gog.group(*vertex).format(elem)),
                Syllable::Edge { edge, power } => format!("{}^{}", gog.edges[*edge].name, power),
            })
            .collect();
        parts.join(" ")
    }
}

#[derive(Clone, Debug)]
pub struct NormalEntry {
    pub element: Pi1Element,
    /// `L_G` of the element.
    pub length: usize,
    /// Shortlex-least geodesic move word and the sequence it spells.
    pub moves: Vec<Move>,
    pub geodesic: GSequence,
    /// The reduced sequence and its image in `G_Gamma`.
    pub reduced: GSequence,
    pub hat: FreeProductElement,
    pub hat_length: usize,
}

/// Normal sets over the ball `B_{L_G}(radius)`.
#[derive(Clone, Debug)]
pub struct NormalSets {
    pub radius: usize,
    pub entries: Vec<NormalEntry>,
    index: HashMap<Pi1Element, usize>,
}

impl NormalSets {
    pub fn build(gog: &GraphOfGroups, radius: usize) -> Result<NormalSets> {
        let ball = gog.pi1_ball(radius)?;
        let mut entries = Vec::with_capacity(ball.len());
        let mut index = HashMap::new();
        let mut hats = HashMap::new();
        for (element, length, moves) in ball {
            let geodesic = gog.spell(&moves);
            let reduced = gog.reduce(&geodesic)?;
            let hat = FreeProductElement::from_sequence(gog, &reduced);
            let hat_length = hat.length(gog)?;
            if hats.insert(hat.clone(), entries.len()).is_some() {
                return Err(Error::NoCanonicalForm("two ball elements share a lift".into()));
            }
            index.insert(element.clone(), entries.len());
            entries.push(NormalEntry { element, length, moves, geodesic, reduced, hat, hat_length });
        }
        Ok(NormalSets { radius, entries, index })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, gog: &GraphOfGroups, g: &Pi1Element) -> Result<Option<&NormalEntry>> {
        if let Some(&i) = self.index.get(g) {
            return Ok(Some(&self.entries[i]));
        }
        if gog.has_canonical_forms() {
            return Ok(None);
        }
        for e in &self.entries {
            if gog.pi1_equal(&e.element, g)? {
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    pub fn hat(&self, gog: &GraphOfGroups, g: &Pi1Element) -> Result<FreeProductElement> {
        Ok(self.lookup(gog, g)?.ok_or(Error::SupportOutsideDomain)?.hat.clone())
    }

    /// Elements of `B_{L_G}(r)`.
    pub fn ball(&self, r: usize) -> impl Iterator<Item = &Pi1Element> {
        self.entries.iter().filter(move |e| e.length <= r).map(|e| &e.element)
    }

    /// `max { L_Gamma(g hat) : L_G(g) = r }` for `r = 0..=radius`.
    pub fn lift_length_curve(&self) -> Vec<(usize, usize)> {
        let mut m: BTreeMap<usize, usize> = BTreeMap::new();
        for e in &self.entries {
            let slot = m.entry(e.length).or_insert(0);
            *slot = (*slot).max(e.hat_length);
        }
        m.into_iter().collect()
    }
}

/// Context id used for functions on `G_Gamma` derived from a `pi_1` context.
pub fn lifted_context(context: u64) -> u64 {
    context ^ 0x5a5a_5a5a_5a5a_5a5a
}

/// `f hat (g hat) = f(g)`.
pub fn hat_lift(
    gog: &GraphOfGroups,
    ns: &NormalSets,
    f: &SupportedFunction<Pi1Element>,
) -> Result<SupportedFunction<FreeProductElement>> {
    f.map_support(lifted_context(f.context()), |g| ns.hat(gog, g))
}

pub fn pi1_convolve(
    gog: &GraphOfGroups,
    f: &SupportedFunction<Pi1Element>,
    g: &SupportedFunction<Pi1Element>,
) -> Result<SupportedFunction<Pi1Element>> {
    f.try_convolve(g, |a, b| gog.pi1_multiply(a, b))
}

pub fn free_product_convolve(
    gog: &GraphOfGroups,
    f: &SupportedFunction<FreeProductElement>,
    g: &SupportedFunction<FreeProductElement>,
) -> Result<SupportedFunction<FreeProductElement>> {
    f.convolve(g, |a, b| a.mul(gog, b))
}

/// Outcome of the norm-pair construction, with every quantity exact.
#[derive(Clone, Debug, Serialize)]
pub struct MagicReport {
    /// Number of `(v, u)` assignments made to `G`.
    pub assignments: usize,
    /// Assignments that hit an already assigned point.
    pub collisions: usize,
    /// Collisions that asked for a different value.
    pub inconsistencies: usize,
    #[serde(serialize_with = "ser_rational")]
    pub conv_sq: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub lifted_conv_sq: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub f_sq: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub lifted_f_sq: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub g_sq: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub lifted_g_sq: BigRational,
    /// Points `u` where `(F * G)(u hat) = (f * g)(u)`, out of `pointwise_total`.
    pub pointwise_ok: usize,
    pub pointwise_total: usize,
}

pub fn ser_rational<S: serde::Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

impl MagicReport {
    pub fn conv_equal(&self) -> bool {
        self.conv_sq == self.lifted_conv_sq
    }

    pub fn f_equal(&self) -> bool {
        self.f_sq == self.lifted_f_sq
    }

    pub fn g_equal(&self) -> bool {
        self.g_sq == self.lifted_g_sq
    }

    pub fn all_equal(&self) -> bool {
        self.conv_equal() && self.f_equal() && self.g_equal()
    }
}

/// `F(v hat) = f(v)` and `G(v hat^-1 u hat) = g(v^-1 u)` for `v` in the
/// support of `f` and `u` in `supp f . supp g`.
pub fn magic_pair(
    gog: &GraphOfGroups,
    ns: &NormalSets,
    f: &SupportedFunction<Pi1Element>,
    g: &SupportedFunction<Pi1Element>,
) -> Result<(SupportedFunction<FreeProductElement>, SupportedFunction<FreeProductElement>, MagicReport)> {
    let ctx = lifted_context(f.context());
    let big_f = hat_lift(gog, ns, f)?;
    let fg = pi1_convolve(gog, f, g)?;
    let us: Vec<Pi1Element> = fg.support().cloned().collect();
    let den = g.denominator();
    let mut assigned: BTreeMap<FreeProductElement, i128> = BTreeMap::new();
    let (mut assignments, mut collisions, mut inconsistencies) = (0, 0, 0);
    for v in f.support() {
        let vhat_inv = ns.hat(gog, v)?.inv(gog);
        let v_inv = gog.pi1_inverse(v)?;
        for u in &us {
            let w = gog.pi1_multiply(&v_inv, u)?;
            let num = g.numerator(&w);
            let key = vhat_inv.mul(gog, &ns.hat(gog, u)?);
            assignments += 1;
            match assigned.get(&key) {
                Some(&old) => {
                    collisions += 1;
                    if old != num {
                        inconsistencies += 1;
                    }
                }
                None => {
                    assigned.insert(key, num);
                }
            }
        }
    }
    let big_g = SupportedFunction::from_fractions(ctx, assigned, den)?;
    let big_fg = free_product_convolve(gog, &big_f, &big_g)?;
    let mut pointwise_ok = 0;
    for u in &us {
        if big_fg.value(&ns.hat(gog, u)?) == fg.value(u) {
            pointwise_ok += 1;
        }
    }
    let report = MagicReport {
        assignments,
        collisions,
        inconsistencies,
        conv_sq: fg.l2_norm_sq(),
        lifted_conv_sq: big_fg.l2_norm_sq(),
        f_sq: f.l2_norm_sq(),
        lifted_f_sq: big_f.l2_norm_sq(),
        g_sq: g.l2_norm_sq(),
        lifted_g_sq: big_g.l2_norm_sq(),
        pointwise_ok,
        pointwise_total: us.len(),
    };
    Ok((big_f, big_g, report))
}
