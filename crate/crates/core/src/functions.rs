//! Finitely supported nonnegative rational functions on a group and their
//! convolution.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Values are `numerator / den` with positive `i128` numerators and a
/// common positive denominator. Zero values are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportedFunction<E: Ord> {
    context: u64,
    den: i128,
    values: BTreeMap<E, i128>,
}

fn overflow(what: &str) -> Error {
    Error::Overflow(what.to_string())
}

impl<E: Ord + Clone> SupportedFunction<E> {
    /// The zero function in group context `context`.
    pub fn zero(context: u64) -> Self {
        SupportedFunction { context, den: 1, values: BTreeMap::new() }
    }

    pub fn delta(context: u64, e: E) -> Self {
        let mut f = Self::zero(context);
        f.values.insert(e, 1);
        f
    }

    pub fn indicator<I: IntoIterator<Item = E>>(context: u64, support: I) -> Self {
        let mut f = Self::zero(context);
        for e in support {
            f.values.insert(e, 1);
        }
        f
    }

    /// Integer values; zeros are dropped, negatives rejected.
    pub fn from_integers<I: IntoIterator<Item = (E, i128)>>(context: u64, values: I) -> Result<Self> {
        Self::from_fractions(context, values, 1)
    }

    /// Values `n / den` for a shared positive denominator.
    pub fn from_fractions<I: IntoIterator<Item = (E, i128)>>(context: u64, values: I, den: i128) -> Result<Self> {
        if den <= 0 {
            return Err(Error::Overflow("denominator must be positive".into()));
        }
        let mut f = SupportedFunction { context, den, values: BTreeMap::new() };
        for (e, n) in values {
            if n < 0 {
                return Err(Error::Overflow("negative value".into()));
            }
            if n > 0 {
                let slot = f.values.entry(e).or_insert(0);
                *slot = slot.checked_add(n).ok_or_else(|| overflow("value"))?;
            }
        }
        f.normalize();
        Ok(f)
    }

    fn normalize(&mut self) {
        let g = self.values.values().fold(self.den, |g, &n| g.gcd(&n));
        if g > 1 {
            self.den /= g;
            for n in self.values.values_mut() {
                *n /= g;
            }
        }
    }

    pub fn context(&self) -> u64 {
        self.context
    }

    pub fn support_size(&self) -> usize {
        self.values.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &E> {
        self.values.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, e: &E) -> BigRational {
        match self.values.get(e) {
            Some(&n) => BigRational::new(n.into(), self.den.into()),
            None => BigRational::zero(),
        }
    }

    /// `(element, numerator)` pairs over the common denominator.
    pub fn numerators(&self) -> impl Iterator<Item = (&E, i128)> {
        self.values.iter().map(|(e, &n)| (e, n))
    }

    /// Numerator of the value at `e` over the common denominator.
    pub fn numerator(&self, e: &E) -> i128 {
        self.values.get(e).copied().unwrap_or(0)
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    fn check_context(&self, other: &Self) -> Result<()> {
        if self.context != other.context {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let l = self.den.lcm(&other.den);
        let (a, b) = (l / self.den, l / other.den);
        let mut values = BTreeMap::new();
        for (e, &n) in &self.values {
            values.insert(e.clone(), n.checked_mul(a).ok_or_else(|| overflow("sum"))?);
        }
        for (e, &n) in &other.values {
            let v = n.checked_mul(b).ok_or_else(|| overflow("sum"))?;
            let slot = values.entry(e.clone()).or_insert(0i128);
            *slot = slot.checked_add(v).ok_or_else(|| overflow("sum"))?;
        }
        let mut f = SupportedFunction { context: self.context, den: l, values };
        f.normalize();
        Ok(f)
    }

    /// `(f * g)(y) = sum_m f(m) g(m^-1 y)`, with `mul` the group law.
    pub fn convolve(&self, other: &Self, mul: impl Fn(&E, &E) -> E) -> Result<Self> {
        self.try_convolve(other, |a, b| Ok(mul(a, b)))
    }

    /// Convolution with a fallible group law.
    pub fn try_convolve(&self, other: &Self, mut mul: impl FnMut(&E, &E) -> Result<E>) -> Result<Self> {
        self.check_context(other)?;
        let den = self.den.checked_mul(other.den).ok_or_else(|| overflow("convolution denominator"))?;
        let mut values: BTreeMap<E, i128> = BTreeMap::new();
        for (a, &p) in &self.values {
            for (b, &q) in &other.values {
                let v = p.checked_mul(q).ok_or_else(|| overflow("convolution"))?;
                let slot = values.entry(mul(a, b)?).or_insert(0);
                *slot = slot.checked_add(v).ok_or_else(|| overflow("convolution"))?;
            }
        }
        let mut f = SupportedFunction { context: self.context, den, values };
        f.normalize();
        Ok(f)
    }

    /// Moves the function along an injective map of supports.
    pub fn map_support<F: Ord + Clone>(&self, context: u64, mut map: impl FnMut(&E) -> Result<F>) -> Result<SupportedFunction<F>> {
        let mut values = BTreeMap::new();
        for (e, &n) in &self.values {
            if values.insert(map(e)?, n).is_some() {
                return Err(Error::SupportOutsideDomain);
            }
        }
        Ok(SupportedFunction { context, den: self.den, values })
    }

    pub fn l2_norm_sq(&self) -> BigRational {
        let num: BigInt = self.values.values().map(|&n| BigInt::from(n) * BigInt::from(n)).sum();
        BigRational::new(num, BigInt::from(self.den) * BigInt::from(self.den))
    }

    pub fn l1_norm(&self) -> BigRational {
        let num: BigInt = self.values.values().map(|&n| BigInt::from(n)).sum();
        BigRational::new(num, BigInt::from(self.den))
    }
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `||f * g||^2 / (||f||^2 ||g||^2)`; zero when either factor vanishes.
pub fn squared_ratio<E: Ord + Clone>(f: &SupportedFunction<E>, g: &SupportedFunction<E>, mul: impl Fn(&E, &E) -> E) -> Result<BigRational> {
    let denom = f.l2_norm_sq() * g.l2_norm_sq();
    if denom.is_zero() {
        return Ok(BigRational::zero());
    }
    Ok(f.convolve(g, mul)?.l2_norm_sq() / denom)
}
