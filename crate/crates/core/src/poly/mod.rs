//! Exact polynomial algebra over the rationals: multi-indices, scalar and
//! vector polynomials, and closed-form kernel moments.

mod moments;
mod multi_index;
mod polynomial;
mod vector;

pub use moments::{kernel_moment, moment_of};
pub use multi_index::{factorial, MultiIndex};
pub use polynomial::{poly_arith, rat_to_f64, ArithOp, FloatPoly, Polynomial};
pub use vector::VectorPolyField;

pub type Rational = num_rational::BigRational;

/// Builds `p/q` from machine integers.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

/// Parses a small polynomial expression such as `4 - y2^2 - 3/2*y1*y3`.
///
/// Supports sums of terms, each an optional rational coefficient followed by
/// `*`-joined powers `yk^e`. Variables are 1-based. Intended for fixtures,
/// tests and CLI input; panics on malformed input.
pub fn parse_poly(dim: usize, src: &str) -> Polynomial {
    try_parse_poly(dim, src).unwrap_or_else(|e| panic!("bad polynomial {src:?}: {e}"))
}

pub fn try_parse_poly(dim: usize, src: &str) -> crate::Result<Polynomial> {
    use crate::Error;
    let bad = |msg: &str| Error::InvalidInput(format!("{msg} in {src:?}"));
    let mut p = Polynomial::zero(dim);
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() || s == "0" {
        return Ok(p);
    }
    // split into signed terms
    let mut terms = Vec::new();
    let mut cur = String::new();
    for (i, ch) in s.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    for t in terms {
        let (neg, body) = match t.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, t.strip_prefix('+').unwrap_or(&t)),
        };
        let mut coeff = rat(1, 1);
        let mut exps = vec![0u32; dim];
        for factor in body.split('*') {
            if let Some(var) = factor.strip_prefix('y') {
                let (idx, e) = match var.split_once('^') {
                    Some((i, e)) => (i, e.parse::<u32>().map_err(|_| bad("bad exponent"))?),
                    None => (var, 1),
                };
                let idx: usize = idx.parse().map_err(|_| bad("bad variable"))?;
                if idx == 0 || idx > dim {
                    return Err(bad("variable out of range"));
                }
                exps[idx - 1] += e;
            } else {
                let r = match factor.split_once('/') {
                    Some((n, d)) => {
                        let n: i64 = n.parse().map_err(|_| bad("bad numerator"))?;
                        let d: i64 = d.parse().map_err(|_| bad("bad denominator"))?;
                        if d == 0 {
                            return Err(bad("zero denominator"));
                        }
                        rat(n, d)
                    }
                    None => rat(factor.parse::<i64>().map_err(|_| bad("bad number"))?, 1),
                };
                coeff *= r;
            }
        }
        if neg {
            coeff = -coeff;
        }
        p.add_term(MultiIndex::new(exps), coeff);
    }
    Ok(p)
}

/// Parses a 3D vector field written as `;`-separated components.
pub fn parse_field(src: &str) -> VectorPolyField {
    try_parse_field(src).unwrap_or_else(|e| panic!("bad field {src:?}: {e}"))
}

pub fn try_parse_field(src: &str) -> crate::Result<VectorPolyField> {
    let comps = src
        .split(';')
        .map(|c| try_parse_poly(3, c))
        .collect::<crate::Result<Vec<_>>>()?;
    if comps.len() != 3 {
        return Err(crate::Error::InvalidInput(format!(
            "a 3D field needs 3 components, got {}",
            comps.len()
        )));
    }
    VectorPolyField::new(comps)
}
