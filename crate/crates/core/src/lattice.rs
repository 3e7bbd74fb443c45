//! Integer lattices in Z^n through an echelon (Hermite) basis.

/// Sublattice of Z^n spanned by `gens`, with the transform back to them.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    ngens: usize,
    rows: Vec<Vec<i128>>,
    pivots: Vec<usize>,
    /// `rows[i] = sum_j coeffs[i][j] * gens[j]`.
    coeffs: Vec<Vec<i128>>,
    relations: usize,
}

impl Lattice {
    pub fn new(gens: &[Vec<i64>], dim: usize) -> Lattice {
        let n = gens.len();
        let mut m: Vec<Vec<i128>> = gens.iter().map(|g| g.iter().map(|&x| x as i128).collect()).collect();
        let mut t: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
        let mut top = 0;
        let mut pivots = Vec::new();
        for col in 0..dim {
            loop {
                let mut best: Option<usize> = None;
                for r in top..n {
                    if m[r][col] != 0 && best.is_none_or(|b| m[r][col].abs() < m[b][col].abs()) {
                        best = Some(r);
                    }
                }
                let Some(b) = best else { break };
                m.swap(top, b);
                t.swap(top, b);
                let mut done = true;
                for r in top + 1..n {
                    if m[r][col] != 0 {
                        let q = m[r][col].div_euclid(m[top][col]);
                        for c in 0..dim {
                            m[r][c] -= q * m[top][c];
                        }
                        for c in 0..n {
                            t[r][c] -= q * t[top][c];
                        }
                        if m[r][col] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            if top < n && m[top][col] != 0 {
                if m[top][col] < 0 {
                    m[top].iter_mut().for_each(|x| *x = -*x);
                    t[top].iter_mut().for_each(|x| *x = -*x);
                }
                pivots.push(col);
                top += 1;
            }
        }
        Lattice {
            dim,
            ngens: n,
            rows: m[..top].to_vec(),
            pivots,
            coeffs: t[..top].to_vec(),
            relations: n - top,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// True when the generators are linearly independent (the span map is injective).
    pub fn is_independent(&self) -> bool {
        self.relations == 0
    }

    fn reduce_inner(&self, v: &[i64], exact: bool) -> (Vec<i128>, Vec<i128>) {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let mut c = vec![0i128; self.ngens];
        for (row, (&p, co)) in self.rows.iter().zip(self.pivots.iter().zip(&self.coeffs)) {
            let q = if exact {
                if w[p] % row[p] != 0 {
                    continue;
                }
                w[p] / row[p]
            } else {
                w[p].div_euclid(row[p])
            };
            if q != 0 {
                for k in 0..self.dim {
                    w[k] -= q * row[k];
                }
                for k in 0..self.ngens {
                    c[k] += q * co[k];
                }
            }
        }
        (w, c)
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce_inner(v, true).0.iter().all(|&x| x == 0)
    }

    /// Coefficients `c` with `v = sum c_j gens[j]`, if `v` is in the lattice.
    pub fn solve(&self, v: &[i64]) -> Option<Vec<i64>> {
        let (w, c) = self.reduce_inner(v, true);
        if w.iter().any(|&x| x != 0) {
            return None;
        }
        Some(c.into_iter().map(|x| i64::try_from(x).expect("lattice coefficient overflow")).collect())
    }

    /// Canonical representative of `v + L`: pivot coordinates land in `[0, pivot)`.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        self.reduce_inner(v, false).0.into_iter().map(|x| i64::try_from(x).expect("overflow")).collect()
    }
}
