use super::{Polynomial, Rational};
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// An `N`-component vector field whose components are polynomials in `N` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorPolyField {
    components: Vec<Polynomial>,
}

impl VectorPolyField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        if let Some(first) = components.first() {
            for c in &components {
                first.check_dim(c)?;
            }
        }
        Ok(VectorPolyField { components })
    }

    pub fn zero(dim: usize) -> Self {
        VectorPolyField {
            components: vec![Polynomial::zero(dim); dim],
        }
    }

    /// Space dimension of the components (0 for an empty field).
    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, Polynomial::dim)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    /// `div v = Σ ∂ᵢ vᵢ`; requires as many components as variables.
    pub fn divergence(&self) -> Result<Polynomial> {
        let dim = self.dim();
        if self.components.len() != dim {
            return Err(Error::DimensionMismatch {
                left: self.components.len(),
                right: dim,
            });
        }
        let mut out = Polynomial::zero(dim);
        for (i, c) in self.components.iter().enumerate() {
            out = &out + &c.partial(i);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> VectorPolyField {
        VectorPolyField {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &VectorPolyField) -> Result<VectorPolyField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VectorPolyField) -> Result<VectorPolyField> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &VectorPolyField,
        f: impl Fn(&Polynomial, &Polynomial) -> Polynomial,
    ) -> Result<VectorPolyField> {
        if self.len() != other.len() || self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(VectorPolyField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    /// `Σ vᵢ wᵢ`.
    pub fn dot(&self, other: &VectorPolyField) -> Result<Polynomial> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        let mut out = Polynomial::zero(self.dim());
        for (a, b) in self.components.iter().zip(&other.components) {
            out = &out + &(a * b);
        }
        Ok(out)
    }

    /// Exact convection term `(self·∇) w`.
    pub fn convect(&self, w: &VectorPolyField) -> Result<VectorPolyField> {
        let dim = self.dim();
        if self.len() != dim || w.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: w.dim(),
            });
        }
        let components = w
            .components
            .iter()
            .map(|wc| {
                let mut acc = Polynomial::zero(dim);
                for (j, vj) in self.components.iter().enumerate() {
                    acc = &acc + &(vj * &wc.partial(j));
                }
                acc
            })
            .collect();
        Ok(VectorPolyField { components })
    }

    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.evaluate(y)).collect()
    }

    pub fn degree(&self) -> Option<u32> {
        self.components.iter().filter_map(Polynomial::degree).max()
    }
}

impl fmt::Display for VectorPolyField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    dim: usize,
    components: Vec<Polynomial>,
}

impl Serialize for VectorPolyField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldRepr {
            dim: self.dim(),
            components: self.components.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorPolyField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FieldRepr::deserialize(d)?;
        if repr.components.iter().any(|c| c.dim() != repr.dim) {
            return Err(D::Error::custom("component dim does not match field dim"));
        }
        Ok(VectorPolyField {
            components: repr.components,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_field;

    #[test]
    fn rotation_is_solenoidal() {
        let v = parse_field("0; -y3; y2");
        assert!(v.divergence().unwrap().is_zero());
    }

    #[test]
    fn div_grad_is_laplacian() {
        let p = crate::poly::parse_poly(3, "y1^3*y2 - 2*y2*y3^2 + 5");
        assert_eq!(p.gradient().divergence().unwrap(), p.laplacian());
    }

    #[test]
    fn rotation_self_convection() {
        let v = parse_field("0; -y3; y2");
        assert_eq!(v.convect(&v).unwrap(), parse_field("0; -y2; -y3"));
    }

    #[test]
    fn json_roundtrip() {
        let v = parse_field("4 - y2^2 - y3^2; y1*y2; -y1*y3");
        let s = serde_json::to_string(&v).unwrap();
        let back: VectorPolyField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
