//! Small modular-arithmetic helpers shared by the batch evaluators and the
//! character machinery: primality testing, modular powers, primitive roots.

/// Deterministic primality test by trial division. Intended for moduli up to
/// about 10^12; all callers stay far below that.
pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // wheel over residues coprime to 30
    let mut d = 7u64;
    let steps = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut i = 0;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += steps[i];
        i = (i + 1) % steps.len();
    }
    true
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root modulo an odd prime q.
pub(crate) fn primitive_root(q: u64) -> u64 {
    assert!(is_prime(q) && q >= 3, "primitive_root requires an odd prime");
    let order = q - 1;
    let factors = prime_factors(order);
    'outer: for g in 2..q {
        for &p in &factors {
            if pow_mod(g, order / p, q) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("every odd prime has a primitive root");
}
