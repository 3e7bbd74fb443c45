//! Sampled Rapid Decay ratios and amenable lower bounds.

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::GroupLike;
use crate::error::{Error, Result};
use crate::free_product::ser_rational;
use crate::functions::{squared_ratio, to_f64, SupportedFunction};
use crate::groups::{bs_power_length, Group, GroupElement, GroupKind};
use crate::growth::{classify_growth, Growth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GStrategy {
    RandomNonneg,
    FolnerIndicator,
    SphereIndicator,
}

impl GStrategy {
    pub fn tag(self) -> &'static str {
        match self {
            GStrategy::RandomNonneg => "random_nonneg",
            GStrategy::FolnerIndicator => "folner_indicator",
            GStrategy::SphereIndicator => "sphere_indicator",
        }
    }
}

/// Folner radius `R(r) = factor * r`.
pub const DEFAULT_FOLNER_FACTOR: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct RdPoint {
    pub r: usize,
    /// Worst `||f*g||^2 / (||f||^2 ||g||^2)` found; a lower bound for the sup.
    #[serde(serialize_with = "ser_rational")]
    pub ratio_sq: BigRational,
    pub ratio: f64,
    pub samples: usize,
    pub strategy: GStrategy,
    /// Which `f` achieved the maximum.
    pub best_f: String,
    pub best_g: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RdCurve {
    pub points: Vec<RdPoint>,
    pub classification: Option<Growth>,
}

impl RdCurve {
    pub fn worst_ratio(&self, r: usize) -> Option<f64> {
        self.points.iter().find(|p| p.r == r).map(|p| p.ratio)
    }
}

fn random_function(rng: &mut ChaCha8Rng, support: &[GroupElement]) -> Result<SupportedFunction<GroupElement>> {
    let density = *[1.0, 0.5, 0.15].choose(rng).unwrap();
    let mut vals: Vec<(GroupElement, i128)> = Vec::new();
    for e in support {
        if rng.gen_bool(density) {
            vals.push((e.clone(), rng.gen_range(1..=5)));
        }
    }
    if vals.is_empty() {
        vals.push((support.choose(rng).unwrap().clone(), 1));
    }
    SupportedFunction::from_integers(0, vals)
}

struct Best {
    ratio: BigRational,
    f: String,
    g: String,
}

impl Best {
    fn offer(&mut self, q: BigRational, f: &str, g: &str) {
        if q > self.ratio {
            self.ratio = q;
            self.f = f.to_string();
            self.g = g.to_string();
        }
    }
}

/// `{k : L(x^k) <= r}` in BS(1,m), as exponents.
pub fn bs_cyclic_ball(m: i64, r: usize, budget: usize) -> Result<Vec<i128>> {
    let bound = (r as i128 + 1) * (m as i128).checked_pow((r / 2) as u32).ok_or_else(|| Error::Overflow("cyclic ball bound".into()))?;
    if bound as u128 > budget as u128 {
        return Err(Error::budget("cyclic subgroup ball", r));
    }
    Ok((-bound..=bound).filter(|&k| bs_power_length(m, k) <= r as u64).collect())
}

/// Worst sampled ratio for each `1 <= r <= r_max`, with `f` supported in `B(r)`.
pub fn rd_ratio_curve(group: &Group, r_max: usize, strategy: GStrategy, samples: usize, seed: u64) -> Result<RdCurve> {
    let mul = |a: &GroupElement, b: &GroupElement| group.mul(a, b);
    let mut points = Vec::new();
    for r in 1..=r_max {
        // One stream per radius, so more samples only extend the search.
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let mut best = Best { ratio: BigRational::from_integer(0.into()), f: String::new(), g: String::new() };
        let mut count = 0;
        match (strategy, group.kind()) {
            (GStrategy::FolnerIndicator, GroupKind::BaumslagSolitar { m }) => {
                // Folner sets inside the amenable subgroup <x>, in exponent coordinates.
                let fs = bs_cyclic_ball(*m, r, group.budget())?;
                let gs = bs_cyclic_ball(*m, DEFAULT_FOLNER_FACTOR * r, group.budget())?;
                let f = SupportedFunction::indicator(0, fs);
                let g = SupportedFunction::indicator(0, gs);
                let q = squared_ratio(&f, &g, |a: &i128, b: &i128| a + b)?;
                best.offer(q, "indicator(<x> in B(r))", "indicator(<x> in B(4r))");
                count += 1;
            }
            (GStrategy::FolnerIndicator, _) => {
                let table = group.ball(DEFAULT_FOLNER_FACTOR * r)?;
                let f = SupportedFunction::indicator(0, table.ball(r).cloned());
                let g = SupportedFunction::indicator(0, table.ball(DEFAULT_FOLNER_FACTOR * r).cloned());
                best.offer(squared_ratio(&f, &g, mul)?, "indicator(B(r))", "indicator(B(4r))");
                count += 1;
            }
            (GStrategy::SphereIndicator, _) => {
                let table = group.ball(r)?;
                let fs = [
                    ("indicator(B(r))", SupportedFunction::indicator(0, table.ball(r).cloned())),
                    ("indicator(S(r))", SupportedFunction::indicator(0, table.sphere(r).iter().cloned())),
                ];
                for k in 0..=r {
                    let g = SupportedFunction::indicator(0, table.sphere(k).iter().cloned());
                    for (name, f) in &fs {
                        best.offer(squared_ratio(f, &g, mul)?, name, &format!("indicator(S({k}))"));
                        count += 1;
                    }
                }
            }
            (GStrategy::RandomNonneg, _) => {
                let table = group.ball(r)?;
                let support: Vec<GroupElement> = table.ball(r).cloned().collect();
                let indicator = SupportedFunction::indicator(0, support.iter().cloned());
                for i in 0..samples.max(1) {
                    let (f, fname) = if i == 0 { (indicator.clone(), "indicator(B(r))".to_string()) } else { (random_function(&mut rng, &support)?, format!("random#{i}")) };
                    let g = random_function(&mut rng, &support)?;
                    best.offer(squared_ratio(&f, &g, mul)?, &fname, &format!("random#{i}"));
                    count += 1;
                }
            }
        }
        points.push(RdPoint { r, ratio: to_f64(&best.ratio).sqrt(), ratio_sq: best.ratio, samples: count, strategy, best_f: best.f, best_g: best.g });
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.r as f64, p.ratio)).collect();
    Ok(RdCurve { classification: classify_growth(&pts).ok(), points })
}

#[derive(Clone, Debug, Serialize)]
pub struct AmenableBound {
    pub r: usize,
    pub big_r: usize,
    #[serde(serialize_with = "ser_rational")]
    pub ratio_sq: BigRational,
    /// `||chi_B(r) * chi_B(R)|| / ||chi_B(R)||`, a lower bound for the operator norm.
    pub ratio: f64,
    /// `|B(r)| = ||chi_B(r)||_1`, the limit as `R` grows.
    pub ball_size: usize,
}

/// Lower bound for the convolution operator norm of `chi_B(r)` in Z or Z^2.
pub fn amenable_lower_bound(h: &Group, r: usize, big_r: usize) -> Result<AmenableBound> {
    match h.kind() {
        GroupKind::FreeAbelian { rank } if *rank <= 2 => {}
        _ => return Err(Error::InvalidGroup("amenable bound needs Z or Z^2".into())),
    }
    let table = h.ball(r.max(big_r))?;
    let f = SupportedFunction::indicator(0, table.ball(r).cloned());
    let g = SupportedFunction::indicator(0, table.ball(big_r).cloned());
    let ratio_sq = f.convolve(&g, |a, b| h.mul(a, b))?.l2_norm_sq() / g.l2_norm_sq();
    Ok(AmenableBound { r, big_r, ratio: to_f64(&ratio_sq).sqrt(), ratio_sq, ball_size: table.ball_size(r) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_amenable_bound() {
        let z = Group::free_abelian(1);
        let b = amenable_lower_bound(&z, 1, 1).unwrap();
        // chi * chi on Z: values 1,2,3,2,1 -> 19, divided by 3
        assert_eq!(b.ratio_sq, BigRational::new(19.into(), 3.into()));
        let far = amenable_lower_bound(&z, 1, 200).unwrap();
        assert!(far.ratio > 2.95 && far.ratio < 3.0);
    }

    #[test]
    fn cyclic_ball_in_bs() {
        assert_eq!(bs_cyclic_ball(2, 3, 1 << 20).unwrap(), vec![-3, -2, -1, 0, 1, 2, 3]);
        // x^8 = t^2 x^2 t^-2 has length 6
        let ks = bs_cyclic_ball(2, 6, 1 << 20).unwrap();
        assert!(ks.contains(&8) && ks.contains(&6) && !ks.contains(&12) && !ks.contains(&11));
    }
}
