//! Interpolation exponents C̃ ≲ A^α E_q^β with α = (9−3q−3qk)/(6−2q), β = 3k/(3−q).

use num_rational::Rational64;

pub type Rational = Rational64;

pub fn alpha_exact(q: Rational, k: Rational) -> Rational {
    let three = Rational::from_integer(3);
    (Rational::from_integer(9) - three * q - three * q * k) / (Rational::from_integer(6) - Rational::from_integer(2) * q)
}

pub fn beta_exact(q: Rational, k: Rational) -> Rational {
    Rational::from_integer(3) * k / (Rational::from_integer(3) - q)
}

pub fn alpha(q: f64, k: f64) -> f64 {
    (9.0 - 3.0 * q - 3.0 * q * k) / (6.0 - 2.0 * q)
}

pub fn beta(q: f64, k: f64) -> f64 {
    3.0 * k / (3.0 - q)
}

/// Exact k bounds (3−q)/(5q−6) ≤ k ≤ (3−q)/3.
pub fn k_bounds_exact(q: Rational) -> (Rational, Rational) {
    let three = Rational::from_integer(3);
    ((three - q) / (Rational::from_integer(5) * q - Rational::from_integer(6)), (three - q) / three)
}

/// Sobolev exponent q* = 3q/(3−q).
pub fn sobolev_star(q: Rational) -> Rational {
    Rational::from_integer(3) * q / (Rational::from_integer(3) - q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn well_known_case() {
        assert_eq!(alpha_exact(r(2, 1), r(1, 4)), r(3, 4));
        assert_eq!(beta_exact(r(2, 1), r(1, 4)), r(3, 4));
    }

    #[test]
    fn upper_endpoint_case() {
        for (n, d) in [(9, 5), (19, 10), (2, 1), (37, 20)] {
            let q = r(n, d);
            let k = (r(3, 1) - q) / r(3, 1);
            assert_eq!(alpha_exact(q, k), (r(3, 1) - q) / r(2, 1));
            assert_eq!(beta_exact(q, k), r(1, 1));
        }
    }

    #[test]
    fn homogeneity_degree_three() {
        for (n, d) in [(9, 5), (2, 1), (19, 10)] {
            let q = r(n, d);
            let (lo, hi) = k_bounds_exact(q);
            for k in [lo, hi, (lo + hi) / r(2, 1)] {
                assert_eq!(r(2, 1) * alpha_exact(q, k) + q * beta_exact(q, k), r(3, 1));
            }
        }
        assert_eq!(k_bounds_exact(r(2, 1)), (r(1, 4), r(1, 3)));
        assert_eq!(sobolev_star(r(2, 1)), r(6, 1));
    }
}
