//! Minimal group interface and exact ball enumeration.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Anything with an exact multiplication on canonical forms.
pub trait GroupLike {
    type Elem: Clone + Eq + Hash + Ord + Debug;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    /// Declared generators together with their inverses, without repeats.
    fn symmetric_generators(&self) -> Vec<Self::Elem>;
}

/// Exact word lengths for every element of a ball, stored sphere by sphere.
#[derive(Clone, Debug)]
pub struct LengthTable<E: Clone + Eq + Hash> {
    pub radius: usize,
    pub entries: HashMap<E, usize>,
    pub spheres: Vec<Vec<E>>,
}

impl<E: Clone + Eq + Hash + Ord + Debug> LengthTable<E> {
    pub fn new(identity: E) -> Self {
        let mut entries = HashMap::new();
        entries.insert(identity.clone(), 0);
        LengthTable { radius: 0, entries, spheres: vec![vec![identity]] }
    }

    pub fn length(&self, e: &E) -> Option<usize> {
        self.entries.get(e).copied()
    }

    pub fn sphere(&self, r: usize) -> &[E] {
        self.spheres.get(r).map(|s| s.as_slice()).unwrap_or(&[])
    }

    pub fn ball_size(&self, r: usize) -> usize {
        self.spheres.iter().take(r + 1).map(|s| s.len()).sum()
    }

    /// Elements of B(r) in BFS order.
    pub fn ball(&self, r: usize) -> impl Iterator<Item = &E> {
        self.spheres.iter().take(r + 1).flatten()
    }

    /// Copy restricted to radius `r` (which must not exceed the stored radius).
    pub fn truncated(&self, r: usize) -> Self {
        let r = r.min(self.radius);
        let spheres: Vec<Vec<E>> = self.spheres[..=r].to_vec();
        let entries = spheres
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |e| (e.clone(), i)))
            .collect();
        LengthTable { radius: r, entries, spheres }
    }

    /// Grows the table one sphere at a time until `radius`, refusing to hold
    /// more than `budget` elements. On failure the table keeps its last
    /// complete sphere.
    pub fn extend_to<G>(&mut self, group: &G, gens: &[E], radius: usize, budget: usize) -> Result<()>
    where
        G: GroupLike<Elem = E>,
    {
        while self.radius < radius {
            let mut next = Vec::new();
            let mut fresh: HashMap<E, usize> = HashMap::new();
            for x in &self.spheres[self.radius] {
                for s in gens {
                    let y = group.mul(x, s);
                    if !self.entries.contains_key(&y) && !fresh.contains_key(&y) {
                        fresh.insert(y.clone(), self.radius + 1);
                        next.push(y);
                        if self.entries.len() + next.len() > budget {
                            return Err(Error::budget("ball enumeration", self.radius));
                        }
                    }
                }
            }
            self.entries.extend(fresh);
            self.spheres.push(next);
            self.radius += 1;
        }
        Ok(())
    }
}

/// Breadth-first ball of radius `r` for any [`GroupLike`].
pub fn enumerate_ball<G: GroupLike>(group: &G, r: usize, budget: usize) -> Result<LengthTable<G::Elem>> {
    let mut t = LengthTable::new(group.identity());
    t.extend_to(group, &group.symmetric_generators(), r, budget)?;
    Ok(t)
}
