//! Signed-letter words over a free basis.
//!
//! Letter `i + 1` is the i-th basis generator and `-(i + 1)` its inverse.

pub type Letter = i32;
pub type Word = Vec<Letter>;

/// Appends `b` to `a` with free cancellation at the junction.
pub fn append(a: &mut Word, b: &[Letter]) {
    for &l in b {
        if a.last() == Some(&-l) {
            a.pop();
        } else {
            a.push(l);
        }
    }
}

pub fn reduce(w: &[Letter]) -> Word {
    let mut out = Vec::with_capacity(w.len());
    append(&mut out, w);
    out
}

pub fn mul(a: &[Letter], b: &[Letter]) -> Word {
    let mut out = a.to_vec();
    append(&mut out, b);
    out
}

pub fn inverse(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| -l).collect()
}

pub fn is_reduced(w: &[Letter]) -> bool {
    w.windows(2).all(|p| p[0] != -p[1]) && !w.contains(&0)
}

pub fn power(w: &[Letter], k: i64) -> Word {
    let base = if k < 0 { inverse(w) } else { w.to_vec() };
    let mut out = Vec::new();
    for _ in 0..k.unsigned_abs() {
        append(&mut out, &base);
    }
    out
}

/// Substitutes `images[i]` for letter `i + 1` and reduces.
pub fn substitute(w: &[Letter], images: &[Word]) -> Word {
    let mut out = Vec::new();
    for &l in w {
        let img = &images[(l.unsigned_abs() - 1) as usize];
        if l > 0 {
            append(&mut out, img);
        } else {
            append(&mut out, &inverse(img));
        }
    }
    out
}

/// Exponent sum of each basis letter.
pub fn exponent_sums(w: &[Letter], rank: usize) -> Vec<i64> {
    let mut v = vec![0i64; rank];
    for &l in w {
        v[(l.unsigned_abs() - 1) as usize] += l.signum() as i64;
    }
    v
}

/// Splits `"x1^-2 x3 t^4"` (spaces or `*` separated) into `(name, exponent)` tokens.
pub fn tokenize(s: &str) -> Result<Vec<(String, i64)>, String> {
    let mut out = Vec::new();
    for tok in s.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
        if tok == "1" {
            continue;
        }
        let (name, exp) = match tok.split_once('^') {
            Some((n, e)) => {
                let e = e.trim_start_matches('(').trim_end_matches(')');
                (n, e.parse::<i64>().map_err(|_| format!("bad exponent in {tok:?}"))?)
            }
            None => (tok, 1),
        };
        if name.is_empty() {
            return Err(format!("empty generator name in {tok:?}"));
        }
        out.push((name.to_string(), exp));
    }
    Ok(out)
}
