//! Closed-form moments of the rescaled kernel `F` of `∂ₜ + (−Δ)^m`.
//!
//! With `F̂(ξ) = e^{−|ξ|^{2m}}` the Taylor series `Σⱼ (−1)ʲ |ξ|^{2mj}/j!` gives
//! `∫ y^β F dy = i^{|β|} β! [ξ^β] F̂`. The coefficient of `ξ^β` in
//! `|ξ|^{2mj} = (Σ ξᵢ²)^{mj}` is the multinomial `(mj)!/Π(βᵢ/2)!` when every
//! `βᵢ` is even and `|β| = 2mj`, and zero otherwise.

use super::multi_index::{factorial, MultiIndex};
use super::{Polynomial, Rational};
use num_traits::Zero;

/// `M_β = ∫ y^β F(y) dy`, exact.
pub fn kernel_moment(beta: &MultiIndex, m: u32) -> Rational {
    assert!(m >= 1, "kernel order m must be >= 1");
    if beta.entries().iter().any(|e| e % 2 == 1) {
        return Rational::zero();
    }
    let order = beta.order();
    if order % (2 * m) != 0 {
        return Rational::zero();
    }
    let j = order / (2 * m);
    let halves: num_bigint::BigInt = beta.entries().iter().map(|&e| factorial(e / 2)).product();
    let value = beta.factorial() * factorial(m * j) / (factorial(j) * halves);
    // i^{|β|} (−1)^j = (−1)^{mj + j}
    let sign_neg = (m * j + j) % 2 == 1;
    let r = Rational::from_integer(value);
    if sign_neg {
        -r
    } else {
        r
    }
}

/// `∫ p F dy` for a polynomial `p`.
pub fn moment_of(p: &Polynomial, m: u32) -> Rational {
    p.terms()
        .map(|(beta, c)| c * kernel_moment(beta, m))
        .fold(Rational::zero(), |acc, t| acc + t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn mi(v: [u32; 3]) -> MultiIndex {
        v.into()
    }

    #[test]
    fn normalization() {
        for m in 1..=4 {
            assert!(kernel_moment(&mi([0, 0, 0]), m).is_one());
        }
    }

    #[test]
    fn second_moment_gaussian() {
        // 1D quadrature of y² (4π)^{-1/2} e^{-y²/4} by composite Simpson on [-40, 40]
        let n = 40_000;
        let (a, b) = (-40.0f64, 40.0f64);
        let h = (b - a) / n as f64;
        let f = |y: f64| y * y * (4.0 * std::f64::consts::PI).powf(-0.5) * (-y * y / 4.0).exp();
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        let quad = s * h / 3.0;
        assert!((quad - 2.0).abs() < 1e-10);
        assert_eq!(
            kernel_moment(&mi([2, 0, 0]), 1),
            Rational::from_integer(2.into())
        );
    }

    #[test]
    fn odd_moments_vanish() {
        assert!(kernel_moment(&mi([1, 0, 0]), 2).is_zero());
        assert!(kernel_moment(&mi([3, 2, 0]), 1).is_zero());
    }

    #[test]
    fn gaussian_double_factorial_law() {
        for beta in MultiIndex::up_to_order(3, 8) {
            let expected: Rational = beta
                .entries()
                .iter()
                .map(|&e| {
                    if e % 2 == 1 {
                        Rational::zero()
                    } else {
                        let dfact: num_bigint::BigInt =
                            (1..e).step_by(2).map(num_bigint::BigInt::from).product();
                        Rational::from_integer(dfact * num_bigint::BigInt::from(2u32).pow(e / 2))
                    }
                })
                .fold(Rational::one(), |a, b| a * b);
            assert_eq!(kernel_moment(&beta, 1), expected, "beta {beta}");
        }
    }

    #[test]
    fn biharmonic_fourth_moment() {
        // ∫ y₁⁴ F = 4!·(-1)^{2+1}·2!/(1!·2!) = -24 for m = 2
        assert_eq!(
            kernel_moment(&mi([4, 0, 0]), 2),
            Rational::from_integer((-24).into())
        );
        assert!(kernel_moment(&mi([2, 0, 0]), 2).is_zero());
    }
}
