use super::multi_index::{factorial, MultiIndex};
use super::{Rational, VectorPolyField};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact multivariate polynomial with rational coefficients.
///
/// Only nonzero coefficients are stored; the zero polynomial has no terms
/// and `degree() == None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Binary arithmetic with dimension checking.
pub fn poly_arith(a: &Polynomial, b: &Polynomial, op: ArithOp) -> Result<Polynomial> {
    a.check_dim(b)?;
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
    })
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Self::monomial(MultiIndex::zeros(dim), c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rational::one())
    }

    pub fn monomial(beta: MultiIndex, c: Rational) -> Self {
        let dim = beta.dim();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(beta, c);
        }
        Polynomial { dim, terms }
    }

    /// The coordinate `y_{axis+1}`.
    pub fn var(dim: usize, axis: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, axis), Rational::one())
    }

    /// Builds from `(exponents, numerator, denominator)` triples; handy in tests and fixtures.
    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, i64, i64)>,
    {
        let mut p = Polynomial::zero(dim);
        for (e, n, d) in terms {
            assert_eq!(e.len(), dim, "exponent length must equal dim");
            p.add_term(MultiIndex::new(e), Rational::new(n.into(), d.into()));
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    /// The graded-lex largest term.
    pub fn leading_term(&self) -> Option<(&MultiIndex, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, beta: &MultiIndex) -> Rational {
        self.terms.get(beta).cloned().unwrap_or_else(Rational::zero)
    }

    /// Highest total order among stored terms, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(MultiIndex::order)
    }

    /// Smallest total order among stored terms.
    pub fn min_order(&self) -> Option<u32> {
        self.terms.keys().next().map(MultiIndex::order)
    }

    /// The part of exact total order `k`.
    pub fn homogeneous_part(&self, k: u32) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.order() == k)
                .map(|(b, c)| (b.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn add_term(&mut self, beta: MultiIndex, c: Rational) {
        assert_eq!(beta.dim(), self.dim);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(beta);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn check_dim(&self, other: &Polynomial) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(b, v)| (b.clone(), v * c)).collect(),
        }
    }

    /// Iterated partial derivative `D^γ p`.
    pub fn derive(&self, gamma: &MultiIndex) -> Result<Polynomial> {
        if gamma.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: gamma.dim(),
            });
        }
        let mut out = Polynomial::zero(self.dim);
        for (beta, c) in &self.terms {
            if let Some(rest) = beta.checked_sub(gamma) {
                let falling: BigInt = beta
                    .entries()
                    .iter()
                    .zip(rest.entries())
                    .map(|(&b, &r)| factorial(b) / factorial(r))
                    .product();
                out.add_term(rest, c * Rational::from_integer(falling));
            }
        }
        Ok(out)
    }

    /// `∂p/∂y_{axis+1}`.
    pub fn partial(&self, axis: usize) -> Polynomial {
        self.derive(&MultiIndex::unit(self.dim, axis))
            .expect("unit index has matching dim")
    }

    pub fn laplacian(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for i in 0..self.dim {
            let mut two = vec![0; self.dim];
            two[i] = 2;
            out = &out + &self.derive(&MultiIndex::new(two)).expect("same dim");
        }
        out
    }

    /// `(−Δ)^j p`.
    pub fn neg_laplacian_power(&self, j: u32) -> Polynomial {
        let mut out = self.clone();
        for _ in 0..j {
            out = -&out.laplacian();
        }
        out
    }

    pub fn gradient(&self) -> VectorPolyField {
        VectorPolyField::new((0..self.dim).map(|i| self.partial(i)).collect())
            .expect("components share dim")
    }

    /// Euler operator `y·∇p`, which scales each term by its order.
    pub fn euler(&self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.order() > 0)
                .map(|(b, c)| (b.clone(), c * Rational::from_integer(b.order().into())))
                .collect(),
        }
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate_exact(&self, y: &[Rational]) -> Result<Rational> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: y.len(),
            });
        }
        let mut acc = Rational::zero();
        for (beta, c) in &self.terms {
            let mut t = c.clone();
            for (yi, &e) in y.iter().zip(beta.entries()) {
                t *= num_traits::pow(yi.clone(), e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating evaluation by direct term summation.
    pub fn evaluate(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: y.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(beta, c)| {
                let mono: f64 = y
                    .iter()
                    .zip(beta.entries())
                    .map(|(yi, &e)| yi.powi(e as i32))
                    .product();
                rat_to_f64(c) * mono
            })
            .sum())
    }

    /// Converts to a compact floating form for repeated evaluation.
    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            dim: self.dim,
            max_exp: self
                .terms
                .keys()
                .flat_map(|b| b.entries().iter().copied())
                .max()
                .unwrap_or(0),
            terms: self
                .terms
                .iter()
                .map(|(b, c)| (b.entries().to_vec(), rat_to_f64(c)))
                .collect(),
        }
    }

    /// Largest absolute coefficient as f64.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| rat_to_f64(c).abs())
            .fold(0.0, f64::max)
    }
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back to a scaled division for huge num/den
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Floating copy of a [`Polynomial`] for fast pointwise evaluation.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    dim: usize,
    max_exp: u32,
    terms: Vec<(Vec<u32>, f64)>,
}

impl FloatPoly {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim);
        if self.terms.is_empty() {
            return 0.0;
        }
        let p = self.max_exp as usize + 1;
        let mut pows = [[1.0f64; 16]; 8];
        if self.dim <= 8 && p <= 16 {
            for (i, &yi) in y.iter().enumerate() {
                for e in 1..p {
                    pows[i][e] = pows[i][e - 1] * yi;
                }
            }
            return self
                .terms
                .iter()
                .map(|(e, c)| {
                    c * e
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| pows[i][k as usize])
                        .product::<f64>()
                })
                .sum();
        }
        self.terms
            .iter()
            .map(|(e, c)| {
                c * y
                    .iter()
                    .zip(e)
                    .map(|(yi, &k)| yi.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (b, c) in &rhs.terms {
            out.add_term(b.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (b, c) in &rhs.terms {
            out.add_term(b.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = Polynomial::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(b, c)| (b.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest order first reads more naturally
        for (i, (beta, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mono: Vec<String> = beta
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| {
                    if e == 1 {
                        format!("y{}", j + 1)
                    } else {
                        format!("y{}^{}", j + 1, e)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{abs}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    beta: Vec<u32>,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(b, c)| TermRepr {
                    beta: b.entries().to_vec(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PolyRepr::deserialize(d)?;
        let mut p = Polynomial::zero(repr.dim);
        for t in repr.terms {
            if t.beta.len() != repr.dim {
                return Err(D::Error::custom(format!(
                    "term exponent length {} does not match dim {}",
                    t.beta.len(),
                    repr.dim
                )));
            }
            let num: BigInt = t.num.parse().map_err(D::Error::custom)?;
            let den: BigInt = t.den.parse().map_err(D::Error::custom)?;
            if den.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            p.add_term(MultiIndex::new(t.beta), Rational::new(num, den));
        }
        Ok(p)
    }
}
