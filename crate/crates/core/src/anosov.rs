//! Hyperbolic elements of SL2(Z) acting on Z^2: eigen-data, foliation
//! length, slope, iterate windows and meridian decompositions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::mat_pow;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnosovMap {
    pub matrix: [[i64; 2]; 2],
    /// Unstable eigenvalue, signed; `lambda = |mu_u| > 1`.
    pub mu_u: f64,
    pub lambda: f64,
    pub v_u: [f64; 2],
    pub v_s: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FoliationCoordinates {
    pub a_u: f64,
    pub a_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Slope {
    Finite(f64),
    Infinite,
}

impl Slope {
    pub fn value(self) -> f64 {
        match self {
            Slope::Finite(x) => x,
            Slope::Infinite => f64::INFINITY,
        }
    }
}

fn unit_eigenvector(m: &[[i64; 2]; 2], mu: f64) -> [f64; 2] {
    let (a, b, c, d) = (m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64);
    let v = if b.abs() >= c.abs() { [b, mu - a] } else { [mu - d, c] };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let s = if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) { -1.0 } else { 1.0 };
    [s * v[0] / n, s * v[1] / n]
}

pub fn l1(v: [i128; 2]) -> i128 {
    v[0].abs() + v[1].abs()
}

/// Exact `A^j v`.
pub fn apply_power(m: &[[i64; 2]; 2], j: i64, v: [i128; 2]) -> [i128; 2] {
    let p = mat_pow(m, j);
    [
        p[0][0] as i128 * v[0] + p[0][1] as i128 * v[1],
        p[1][0] as i128 * v[0] + p[1][1] as i128 * v[1],
    ]
}

/// Row of the iterate table: `j`, foliation length and L1 length of `phi^j(gamma^n)`.
#[derive(Clone, Debug, Serialize)]
pub struct IterateRow {
    pub j: i64,
    pub foliation: f64,
    pub l1: i128,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowReport {
    pub gamma: [i64; 2],
    pub n_max: i64,
    pub j_range: i64,
    /// Window bound for the foliation length.
    pub m_gamma: i64,
    /// Window bound for the L1 word length on `{e1, e2}`.
    pub m_gamma_l1: i64,
    /// Per `n`: growth rate of the foliation length in `j` just past the window,
    /// `(l(M + 12) / l(M + 1))^(1/11)`, on the positive and the negative side.
    pub growth_rates: Vec<(i64, f64, f64)>,
    pub table: Vec<(i64, Vec<IterateRow>)>,
}

impl WindowReport {
    /// Largest relative deviation of the measured rates from `lambda`.
    pub fn worst_rate_error(&self, lambda: f64) -> f64 {
        self.growth_rates.iter().flat_map(|&(_, p, m)| [p, m]).map(|r| (r - lambda).abs() / lambda).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeridianReport {
    pub gamma: [i64; 2],
    pub eta: [i64; 2],
    /// Worst `L(gamma^n) / L(eta^(vn))` over shortened iterates.
    pub c_emp: f64,
    /// `(n, worst ratio for that n, number of shortened iterates)`.
    pub per_n: Vec<(i64, f64, usize)>,
    /// Shortened iterates with no `eta` part at all.
    pub eta_free: usize,
}

impl AnosovMap {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<AnosovMap> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det != 1 {
            return Err(Error::InvalidGroup(format!("determinant {det}, expected 1")));
        }
        let trace = matrix[0][0] + matrix[1][1];
        if trace.abs() <= 2 {
            return Err(Error::NotHyperbolic { trace });
        }
        let t = trace as f64;
        let disc = (t * t - 4.0).sqrt();
        let mu_u = if t > 0.0 { (t + disc) / 2.0 } else { (t - disc) / 2.0 };
        let mu_s = 1.0 / mu_u;
        Ok(AnosovMap { matrix, mu_u, lambda: mu_u.abs(), v_u: unit_eigenvector(&matrix, mu_u), v_s: unit_eigenvector(&matrix, mu_s) })
    }

    /// Largest entry of `A v - mu v` over both eigenpairs.
    pub fn eigen_residual(&self) -> f64 {
        let m = self.matrix.map(|r| r.map(|x| x as f64));
        let res = |v: [f64; 2], mu: f64| {
            let av = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
            (av[0] - mu * v[0]).abs().max((av[1] - mu * v[1]).abs())
        };
        res(self.v_u, self.mu_u).max(res(self.v_s, 1.0 / self.mu_u))
    }

    pub fn coordinates(&self, v: [f64; 2]) -> FoliationCoordinates {
        let det = self.v_u[0] * self.v_s[1] - self.v_s[0] * self.v_u[1];
        FoliationCoordinates {
            a_u: (v[0] * self.v_s[1] - self.v_s[0] * v[1]) / det,
            a_s: (self.v_u[0] * v[1] - v[0] * self.v_u[1]) / det,
        }
    }

    pub fn coords(&self, g: [i128; 2]) -> FoliationCoordinates {
        self.coordinates([g[0] as f64, g[1] as f64])
    }

    /// `|a_u| + |a_s|`.
    pub fn foliation_length(&self, g: [i128; 2]) -> f64 {
        let c = self.coords(g);
        c.a_u.abs() + c.a_s.abs()
    }

    /// `|a_u| / |a_s|`.
    pub fn slope(&self, g: [i128; 2]) -> Result<Slope> {
        if g == [0, 0] {
            return Err(Error::ZeroVector);
        }
        let c = self.coords(g);
        if c.a_s == 0.0 {
            return Ok(Slope::Infinite);
        }
        Ok(Slope::Finite(c.a_u.abs() / c.a_s.abs()))
    }

    pub fn apply(&self, g: [i128; 2]) -> [i128; 2] {
        apply_power(&self.matrix, 1, g)
    }

    pub fn iterate(&self, j: i64, g: [i128; 2]) -> [i128; 2] {
        apply_power(&self.matrix, j, g)
    }

    /// Counts integer vectors with `||g||_inf <= bound` where
    /// `|phi(g)| < |g|` disagrees with `sl(g) < threshold`.
    pub fn shrink_equivalence_violations(&self, bound: i128, threshold: f64) -> (usize, usize) {
        let (mut checked, mut bad) = (0, 0);
        for x in -bound..=bound {
            for y in -bound..=bound {
                if x == 0 && y == 0 {
                    continue;
                }
                let g = [x, y];
                let shrinks = self.foliation_length(self.apply(g)) < self.foliation_length(g);
                let small = self.slope(g).map(|s| s.value() < threshold).unwrap_or(false);
                checked += 1;
                if shrinks != small {
                    bad += 1;
                }
            }
        }
        (checked, bad)
    }

    /// `phi(g) = g^k` for some `0 < |k| <= kmax`.
    pub fn sends_to_own_power(&self, g: [i128; 2], kmax: i128) -> bool {
        let p = self.apply(g);
        (-kmax..=kmax).filter(|&k| k != 0).any(|k| p == [k * g[0], k * g[1]])
    }

    pub fn min_iterate_window(&self, gamma: [i64; 2], n_max: i64, j_range: i64) -> Result<WindowReport> {
        if gamma == [0, 0] {
            return Err(Error::ZeroVector);
        }
        let g = [gamma[0] as i128, gamma[1] as i128];
        let (mut m_fol, mut m_l1) = (0i64, 0i64);
        let mut table = Vec::new();
        let mut growth_rates = Vec::new();
        for n in 1..=n_max {
            let gn = [g[0] * n as i128, g[1] * n as i128];
            let rows: Vec<IterateRow> = (-j_range..=j_range)
                .map(|j| {
                    let v = self.iterate(j, gn);
                    IterateRow { j, foliation: self.foliation_length(v), l1: l1(v) }
                })
                .collect();
            let base = &rows[j_range as usize];
            for r in &rows {
                if r.foliation <= base.foliation * (1.0 + 1e-12) {
                    m_fol = m_fol.max(r.j.abs());
                }
                if r.l1 <= base.l1 {
                    m_l1 = m_l1.max(r.j.abs());
                }
            }
            table.push((n, rows));
        }
        for (n, rows) in &table {
            let at = |j: i64| rows[(j + j_range) as usize].foliation;
            let rate = |a: i64, b: i64| (at(b) / at(a)).powf(1.0 / (b - a).abs() as f64);
            let lo = m_fol + 1;
            let hi = (m_fol + 12).min(j_range);
            if hi > lo {
                growth_rates.push((*n, rate(lo, hi), rate(-lo, -hi)));
            }
        }
        Ok(WindowReport { gamma, n_max, j_range, m_gamma: m_fol, m_gamma_l1: m_l1, growth_rates, table })
    }

    /// Integer exponents `(p, q)` with `phi^j(gamma^n) = gamma^p eta^q`.
    pub fn meridian_decomposition(&self, gamma: [i64; 2], eta: [i64; 2], j: i64, n: i64) -> Result<(i128, i128)> {
        let det = gamma[0] as i128 * eta[1] as i128 - eta[0] as i128 * gamma[1] as i128;
        if det.abs() != 1 {
            return Err(Error::NotABasis { det: det as i64 });
        }
        let v = self.iterate(j, [gamma[0] as i128 * n as i128, gamma[1] as i128 * n as i128]);
        let p = (v[0] * eta[1] as i128 - eta[0] as i128 * v[1]) / det;
        let q = (gamma[0] as i128 * v[1] - v[0] * gamma[1] as i128) / det;
        Ok((p, q))
    }

    /// Empirical constant of the meridian lower bound in L1 length over
    /// `1 <= n <= n_max`, `|j| <= j_range`.
    pub fn meridian_constant(&self, gamma: [i64; 2], eta: [i64; 2], n_max: i64, j_range: i64) -> Result<MeridianReport> {
        let eta_len = (eta[0].abs() + eta[1].abs()) as f64;
        let mut per_n = Vec::new();
        let mut c_emp: f64 = 0.0;
        let mut eta_free = 0;
        for n in 1..=n_max {
            let gn = l1([gamma[0] as i128 * n as i128, gamma[1] as i128 * n as i128]);
            let mut worst: f64 = 0.0;
            let mut count = 0;
            for j in -j_range..=j_range {
                let v = self.iterate(j, [gamma[0] as i128 * n as i128, gamma[1] as i128 * n as i128]);
                if l1(v) >= gn {
                    continue;
                }
                count += 1;
                let (_, q) = self.meridian_decomposition(gamma, eta, j, n)?;
                if q == 0 {
                    eta_free += 1;
                    worst = f64::INFINITY;
                    continue;
                }
                worst = worst.max(gn as f64 / (q.abs() as f64 * eta_len));
            }
            c_emp = c_emp.max(worst);
            per_n.push((n, worst, count));
        }
        Ok(MeridianReport { gamma, eta, c_emp: c_emp.max(1.0), per_n, eta_free })
    }

    /// `(c1, c2)` with `|g|_phi <= c1 L1(g)` and `L1(g) <= c2 |g|_phi`.
    pub fn bi_lipschitz_constants(&self) -> (f64, f64) {
        let p = [[self.v_u[0], self.v_s[0]], [self.v_u[1], self.v_s[1]]];
        let c2 = (p[0][0].abs() + p[1][0].abs()).max(p[0][1].abs() + p[1][1].abs());
        let e1 = self.coordinates([1.0, 0.0]);
        let e2 = self.coordinates([0.0, 1.0]);
        let c1 = (e1.a_u.abs() + e1.a_s.abs()).max(e2.a_u.abs() + e2.a_s.abs());
        (c1, c2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAT: [[i64; 2]; 2] = [[2, 1], [1, 1]];

    #[test]
    fn cat_map_eigen_data() {
        let a = AnosovMap::new(CAT).unwrap();
        assert!(a.eigen_residual() < 1e-12);
        assert!((a.lambda - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(matches!(AnosovMap::new([[1, 1], [0, 1]]), Err(Error::NotHyperbolic { trace: 2 })));
    }

    #[test]
    fn meridian_reads_columns() {
        let a = AnosovMap::new(CAT).unwrap();
        assert_eq!(a.meridian_decomposition([1, 0], [0, 1], 1, 1).unwrap(), (2, 1));
        assert_eq!(a.meridian_decomposition([1, 0], [0, 1], 0, 5).unwrap(), (5, 0));
        assert!(matches!(a.meridian_decomposition([1, 0], [2, 2], 0, 1), Err(Error::NotABasis { det: 2 })));
    }

    #[test]
    fn zero_vector() {
        let a = AnosovMap::new(CAT).unwrap();
        assert_eq!(a.foliation_length([0, 0]), 0.0);
        assert_eq!(a.slope([0, 0]), Err(Error::ZeroVector));
    }
}
