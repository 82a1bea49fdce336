//! Reduced fractions, continued-fraction expansions in the trailing-one
//! convention, the alternating quotient statistics `f_{r,±}`, exact Dedekind
//! sums, and the cotangent sum `c_0`.

use num_integer::gcd;
use num_rational::Ratio;
use std::f64::consts::PI;
use thiserror::Error;

/// Exact rational value of a Dedekind sum.
pub type DedekindValue = Ratio<i128>;

#[derive(Debug, Error, PartialEq)]
pub enum RationalsError {
    #[error("{a} and {q} are not coprime")]
    NotCoprime { a: u64, q: u64 },
    #[error("fraction {a}/{q} outside the domain 0 < a < q, q >= 2")]
    BadFraction { a: u64, q: u64 },
}

/// A fraction `a/q` in lowest terms with `0 < a < q`, `q >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedFraction {
    a: u64,
    q: u64,
}

impl ReducedFraction {
    pub fn new(a: u64, q: u64) -> Result<Self, RationalsError> {
        if q < 2 || a == 0 || a >= q {
            return Err(RationalsError::BadFraction { a, q });
        }
        if gcd(a, q) != 1 {
            return Err(RationalsError::NotCoprime { a, q });
        }
        Ok(ReducedFraction { a, q })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.a as f64 / self.q as f64
    }

    /// The fraction `(q-a)/q`, i.e. `-a/q` mod 1.
    pub fn negated(&self) -> ReducedFraction {
        ReducedFraction {
            a: self.q - self.a,
            q: self.q,
        }
    }
}

/// Continued fraction `[0; b_1, ..., b_k, 1]`: the stored quotients exclude
/// the fixed trailing 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFExpansion {
    pub quotients: Vec<u64>,
    pub trailing_one: bool,
}

impl CFExpansion {
    /// Number of stored quotients (the trailing 1 is not counted).
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    /// Rebuild `a/q` exactly from `[0; b_1, ..., b_k, 1]`.
    pub fn reconstruct(&self) -> (u64, u64) {
        // Fold from the tail: start at the trailing 1 = 1/1.
        let (mut num, mut den) = (1u128, 1u128);
        for &b in self.quotients.iter().rev() {
            // x -> 1/(b + x)
            let new_den = b as u128 * den + num;
            num = den;
            den = new_den;
        }
        (num as u64, den as u64)
    }
}

/// Euclidean continued fraction of `a/q`, normalized so the final quotient
/// is 1: a canonical `[0; c_1, ..., c_m]` with `c_m >= 2` becomes
/// `[0; c_1, ..., c_m - 1, 1]`.
pub fn cf_expand(x: ReducedFraction) -> CFExpansion {
    let (mut num, mut den) = (x.q, x.a); // quotients of q/a after the leading 0
    let mut quotients = Vec::new();
    while den > 0 {
        quotients.push(num / den);
        let r = num % den;
        num = den;
        den = r;
    }
    // gcd(a,q)=1 and 0<a<q guarantee the canonical tail quotient is >= 2.
    let last = quotients.last_mut().expect("nonempty expansion");
    debug_assert!(*last >= 2);
    *last -= 1;
    CFExpansion {
        quotients,
        trailing_one: true,
    }
}

/// `f_{r,±}(a/q) = sum_{j=1}^{k} (±1)^j b_j^{r/2}` over the stored
/// quotients (the trailing 1 is excluded).
pub fn f_moment(x: ReducedFraction, r: u32, sign: i8) -> f64 {
    assert!(sign == 1 || sign == -1);
    let cf = cf_expand(x);
    let half_r = r as f64 / 2.0;
    let mut acc = 0.0;
    let mut s = 1.0;
    for &b in &cf.quotients {
        s *= sign as f64;
        acc += s * (b as f64).powf(half_r);
    }
    acc
}

/// Dedekind sum `s(a, q) = sum_{n=1}^{q-1} ((n/q)) ((n a / q))` in exact
/// rational arithmetic. `a` may be any integer coprime to `q`.
pub fn dedekind_sum(a: i64, q: u64) -> Result<DedekindValue, RationalsError> {
    assert!(q >= 1);
    let am = a.rem_euclid(q as i64) as u64;
    if q > 1 && gcd(am, q) != 1 {
        return Err(RationalsError::NotCoprime { a: am, q });
    }
    if q == 1 {
        return Ok(Ratio::new(0, 1));
    }
    // ((n/q)) = (2n - q)/(2q) for 0 < n < q; n a mod q never vanishes.
    let qi = q as i128;
    let mut num_acc: i128 = 0;
    let mut m: u64 = 0;
    for n in 1..q {
        m = (m + am) % q;
        num_acc += (2 * n as i128 - qi) * (2 * m as i128 - qi);
    }
    Ok(Ratio::new(num_acc, 4 * qi * qi))
}

/// Cotangent sum `c_0(a/q) = -sum_{m=1}^{q-1} (m/q) cot(pi m a / q)`.
pub fn cotangent_sum_c0(x: ReducedFraction) -> f64 {
    let q = x.q;
    let a = x.a;
    let mut acc = 0.0;
    let mut r: u64 = 0;
    for m in 1..q {
        r = (r + a) % q; // m a mod q, never 0
        let t = PI * r as f64 / q as f64;
        acc -= (m as f64 / q as f64) * (t.cos() / t.sin());
    }
    acc
}

/// Multiplicative inverse of `a` mod `q`, in `[1, q-1]`.
pub fn mod_inverse(a: u64, q: u64) -> Result<u64, RationalsError> {
    assert!(q >= 2);
    let am = a % q;
    if gcd(am, q) != 1 {
        return Err(RationalsError::NotCoprime { a: am, q });
    }
    let (mut old_r, mut r) = (am as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    debug_assert_eq!(old_r, 1);
    Ok(old_s.rem_euclid(q as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fraction_validation() {
        assert!(ReducedFraction::new(1, 2).is_ok());
        assert!(ReducedFraction::new(0, 5).is_err());
        assert!(ReducedFraction::new(5, 5).is_err());
        assert!(ReducedFraction::new(2, 4).is_err());
        assert!(ReducedFraction::new(3, 1).is_err());
    }

    #[test]
    fn cf_examples() {
        let half = cf_expand(ReducedFraction::new(1, 2).unwrap());
        assert_eq!(half.quotients, vec![1]);
        let third = cf_expand(ReducedFraction::new(1, 3).unwrap());
        assert_eq!(third.quotients, vec![2]);
        let five_sevenths = cf_expand(ReducedFraction::new(5, 7).unwrap());
        assert_eq!(five_sevenths.quotients, vec![1, 2, 1]);
        assert!(five_sevenths.trailing_one);
    }

    #[test]
    fn cf_reconstruction_exact_small() {
        for q in 2..200u64 {
            for a in 1..q {
                if gcd(a, q) != 1 {
                    continue;
                }
                let x = ReducedFraction::new(a, q).unwrap();
                assert_eq!(cf_expand(x).reconstruct(), (a, q));
            }
        }
    }

    #[test]
    fn f_moment_examples() {
        let half = ReducedFraction::new(1, 2).unwrap();
        assert!((f_moment(half, 1, 1) - 1.0).abs() < 1e-15); // (+1)^1 * 1
        let third = ReducedFraction::new(1, 3).unwrap();
        assert!((f_moment(third, 2, 1) - 2.0).abs() < 1e-15);
        let fs = ReducedFraction::new(5, 7).unwrap();
        // quotients (1,2,1), signs (-,+,-): -1 + sqrt(2) - 1
        assert!((f_moment(fs, 1, -1) - (2.0f64.sqrt() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn dedekind_examples() {
        assert_eq!(dedekind_sum(1, 2).unwrap(), Ratio::new(0, 1));
        assert_eq!(dedekind_sum(1, 3).unwrap(), Ratio::new(1, 18));
        // Reciprocity instance: s(3,7) + s(7,3) = -1/4 + (3/7 + 7/3 + 1/21)/12
        let lhs = dedekind_sum(3, 7).unwrap() + dedekind_sum(7, 3).unwrap();
        let rhs = Ratio::new(-1i128, 4)
            + (Ratio::new(3, 7) + Ratio::new(7, 3) + Ratio::new(1, 21)) / 12;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dedekind_oddness_exact() {
        for q in [5u64, 12, 35, 101, 1009] {
            for a in 1..q.min(40) {
                if gcd(a, q) != 1 {
                    continue;
                }
                let neg = (q - a) as i64;
                assert_eq!(
                    dedekind_sum(neg, q).unwrap(),
                    -dedekind_sum(a as i64, q).unwrap()
                );
            }
        }
    }

    #[test]
    fn cotangent_examples() {
        let half = ReducedFraction::new(1, 2).unwrap();
        assert!(cotangent_sum_c0(half).abs() < 1e-15);
        let third = ReducedFraction::new(1, 3).unwrap();
        // -(1/3)cot(pi/3) - (2/3)cot(2 pi/3) = (1/3)cot(pi/3) = 1/(3 sqrt 3)
        assert!((cotangent_sum_c0(third) - 1.0 / (3.0 * 3.0f64.sqrt())).abs() < 1e-12);
        let two_sevenths = ReducedFraction::new(2, 7).unwrap();
        assert!((cotangent_sum_c0(two_sevenths) - 0.175_159_303_524_176_2).abs() < 1e-12);
    }

    #[test]
    fn cotangent_oddness() {
        for &(a, q) in &[(2u64, 7u64), (3, 11), (17, 101), (40, 499)] {
            let x = ReducedFraction::new(a, q).unwrap();
            assert!(
                (cotangent_sum_c0(x.negated()) + cotangent_sum_c0(x)).abs() < 1e-9,
                "c0 oddness at {a}/{q}"
            );
        }
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(1, 11).unwrap(), 1);
        assert_eq!(mod_inverse(2, 5).unwrap(), 3);
        assert_eq!(mod_inverse(17, 101).unwrap(), 6);
        assert!(mod_inverse(6, 9).is_err());
    }

    proptest! {
        #[test]
        fn cf_reconstruction_exact(q in 2u64..5000, a_seed in 1u64..5000) {
            let a = a_seed % q;
            prop_assume!(a > 0 && gcd(a, q) == 1);
            let x = ReducedFraction::new(a, q).unwrap();
            prop_assert_eq!(cf_expand(x).reconstruct(), (a, q));
        }

        #[test]
        fn cf_size_sanity(q in 2u64..5000, a_seed in 1u64..5000) {
            let a = a_seed % q;
            prop_assume!(a > 0 && gcd(a, q) == 1);
            let cf = cf_expand(ReducedFraction::new(a, q).unwrap());
            // Depth/size: quotient sum including the trailing 1 >= log2 q.
            let sum: u64 = cf.quotients.iter().sum::<u64>() + 1;
            prop_assert!(sum as f64 >= (q as f64).log2());
            // Product bound: b_1 ... b_k <= q.
            let prod: u128 = cf.quotients.iter().map(|&b| b as u128).product();
            prop_assert!(prod <= q as u128);
        }

        #[test]
        fn dedekind_reciprocity(a in 1u64..2000, q in 2u64..2000) {
            prop_assume!(a < q && gcd(a, q) == 1 && a >= 1);
            let lhs = dedekind_sum(a as i64, q).unwrap() + dedekind_sum(q as i64, a).unwrap();
            let (ai, qi) = (a as i128, q as i128);
            let rhs = Ratio::new(-1i128, 4)
                + (Ratio::new(ai, qi) + Ratio::new(qi, ai) + Ratio::new(1, ai * qi)) / 12;
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mod_inverse_roundtrip(a in 1u64..10_000, q in 2u64..10_000) {
            prop_assume!(gcd(a % q, q) == 1 && a % q != 0);
            let inv = mod_inverse(a, q).unwrap();
            prop_assert_eq!((a as u128 * inv as u128 % q as u128) as u64, 1);
        }
    }
}
