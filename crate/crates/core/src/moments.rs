//! Moment statistics over a prime modulus: brute-force mixed moments of the
//! even and odd twisted divisor sums, power moments of the central twisted
//! averages and of continued-fraction functionals, the closed-form main
//! terms they converge to, and convergence studies across lists of primes.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::is_prime;
use crate::characters::{
    axe_max_residual, cf_approximation, twisted_moment_table, CfTarget, CharactersError,
};
use crate::estermann::{
    estermann_batch_half, gamma_ups, BatchMethod, EstermannError, ShiftConfig, ShiftPair,
};
use crate::expsums::ArithmeticTables;
use crate::numerics::{riemann_zeta, NumericsError, EULER_GAMMA};
use crate::rationals::{f_moment, RationalsError, ReducedFraction};

#[derive(Debug, Error)]
pub enum MomentsError {
    #[error(transparent)]
    Estermann(#[from] EstermannError),
    #[error(transparent)]
    Characters(#[from] CharactersError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Rationals(#[from] RationalsError),
    #[error("parameter outside the supported region: {0}")]
    Region(&'static str),
    #[error("shift pair too close to the diagonal: {0}")]
    PoleCollision(&'static str),
}

/// Exponent constants of the mixed-moment error term, kept as exact
/// rationals so the three tabulated values can be asserted without rounding.
pub struct Constants;

impl Constants {
    pub const EULER_GAMMA: f64 = EULER_GAMMA;

    /// Current best subconvexity exponent entering the power saving.
    pub fn theta() -> Ratio<i128> {
        Ratio::new(7, 64)
    }

    /// Power saving `(k - 2 - 3 theta) / (2k + 5)` of the mixed-moment
    /// asymptotic, as an exact rational.
    pub fn delta(k: u32) -> Result<Ratio<i128>, MomentsError> {
        if k < 3 {
            return Err(MomentsError::Region("power saving needs k >= 3"));
        }
        let k = i128::from(k);
        Ok(Ratio::new(64 * k - 149, 64 * (2 * k + 5)))
    }
}

/// One row of a convergence study. `ratio` is only filled in when the main
/// term's own evaluation error (`tail_bound`) is below a millionth of its
/// size; identity studies report a `residual` instead.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub q: u64,
    pub k: u32,
    pub r: Option<u32>,
    pub brute_value: Complex64,
    pub main_term: Complex64,
    pub ratio: Option<Complex64>,
    pub residual: Option<f64>,
    /// 0 when the main term was evaluated in closed form.
    pub truncation_n: u64,
    pub tail_bound: f64,
    pub elapsed: f64,
}

fn guarded_ratio(brute: Complex64, main: Complex64, tail_bound: f64) -> Option<Complex64> {
    if main.norm() > 0.0 && tail_bound < main.norm() * 1e-6 {
        Some(brute / main)
    } else {
        None
    }
}

/// Batch engine choice by modulus size: bucket accumulation until the
/// quadratic cost bites, group transform beyond.
pub fn recommended_method(q: u64) -> BatchMethod {
    if q <= 4096 {
        BatchMethod::Bucket
    } else {
        BatchMethod::GroupDft
    }
}

const HALF: Complex64 = Complex64::new(0.5, 0.0);

fn check_prime(q: u64) -> Result<(), MomentsError> {
    if q < 3 || !is_prime(q) {
        return Err(MomentsError::Region("modulus must be an odd prime"));
    }
    Ok(())
}

/// Mean over residues of the k-fold product of central even/odd components,
/// `(1/phi(q)) sum_a prod_i D_i(1/2, a/q)`, each factor taking the odd part
/// when its index lies in the twist set and the even part otherwise.
///
/// One batch table is built per distinct shift pair; the product is then a
/// single pass over the residues.
pub fn mixed_moment_bruteforce(q: u64, cfg: &ShiftConfig) -> Result<Complex64, MomentsError> {
    check_prime(q)?;
    let mut distinct: Vec<(Complex64, Complex64)> = Vec::new();
    let mut table_of = vec![0usize; cfg.k()];
    for i in 0..cfg.k() {
        let pair = cfg.pair(i);
        let key = (pair.alpha(), pair.beta());
        match distinct.iter().position(|&d| d == key) {
            Some(j) => table_of[i] = j,
            None => {
                table_of[i] = distinct.len();
                distinct.push(key);
            }
        }
    }
    let method = recommended_method(q);
    let tables = distinct
        .iter()
        .map(|&(alpha, beta)| {
            let pair = ShiftPair::new(alpha, beta)?;
            estermann_batch_half(q, &pair, HALF, method)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut total = Complex64::new(0.0, 0.0);
    for a in 1..q {
        let mut prod = Complex64::new(1.0, 0.0);
        for i in 0..cfg.k() {
            let table = &tables[table_of[i]];
            prod *= if cfg.in_upsilon(i) {
                table.sin_at(a)
            } else {
                table.cos_at(a)
            };
        }
        total += prod;
    }
    Ok(total / (q - 1) as f64)
}

/// One shifted main-term summand for a fixed assignment of each pair's two
/// shifts to the (alpha, beta) roles.
fn swap_term(
    q: u64,
    cfg: &ShiftConfig,
    alphas: &[Complex64],
    betas: &[Complex64],
) -> Result<Complex64, MomentsError> {
    let k = cfg.k();
    let half_k = Complex64::new(k as f64 / 2.0, 0.0);
    let sum_a: Complex64 = alphas.iter().sum();
    let sum_b: Complex64 = betas.iter().sum();
    let mut prod = riemann_zeta(half_k - sum_a)? * riemann_zeta(half_k + sum_b)?
        / riemann_zeta(Complex64::new(k as f64, 0.0) - (sum_a - sum_b))?;
    let q_over_pi = Complex64::new(q as f64 / PI, 0.0);
    for i in 0..k {
        let ups = cfg.in_upsilon(i);
        let a = alphas[i];
        let b = betas[i];
        let quarter = Complex64::new(0.25, 0.0);
        prod *= gamma_ups(ups, quarter - a / 2.0) / gamma_ups(ups, quarter + a / 2.0);
        prod *= q_over_pi.powc(-a);
        prod *= riemann_zeta(Complex64::new(1.0, 0.0) - a + b)?;
    }
    let scale = (q as f64).powf(k as f64 / 2.0 - 1.0) / 2f64.powi(k as i32 - 1);
    Ok(scale * prod)
}

/// Closed-form main term of the mixed moment: the sum over all 2^k ways of
/// assigning each pair's two shifts to the numerator and denominator roles.
/// With `zero_shift_limit` the residue form is used instead, which only
/// depends on the twist set:
///
/// ```text
/// q^{k/2} / (2^{k-1} phi(q)) * sum_n 2^{nu(n)} n^{-k/2} prod_i (log(q/8npi) + gamma + c_i)
/// ```
///
/// with `c_i = +pi/2` on twisted slots and `-pi/2` otherwise. The n-series
/// is evaluated exactly through derivatives of `zeta(s)^2/zeta(2s)`.
pub fn main_term_mtws(
    q: u64,
    cfg: &ShiftConfig,
    zero_shift_limit: bool,
) -> Result<Complex64, MomentsError> {
    check_prime(q)?;
    let k = cfg.k();
    if k < 3 {
        return Err(MomentsError::Region("mixed main term needs k >= 3"));
    }
    if zero_shift_limit {
        return zero_shift_main(q, cfg);
    }
    for i in 0..k {
        if (cfg.alphas()[i] - cfg.betas()[i]).norm() < 1e-6 {
            return Err(MomentsError::PoleCollision(
                "each pair needs alpha and beta at least 1e-6 apart, or the zero-shift flag",
            ));
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0u32..(1 << k) {
        let mut alphas = Vec::with_capacity(k);
        let mut betas = Vec::with_capacity(k);
        for i in 0..k {
            if mask >> i & 1 == 0 {
                alphas.push(cfg.alphas()[i]);
                betas.push(cfg.betas()[i]);
            } else {
                alphas.push(cfg.betas()[i]);
                betas.push(cfg.alphas()[i]);
            }
        }
        total += swap_term(q, cfg, &alphas, &betas)?;
    }
    Ok(total)
}

fn zero_shift_main(q: u64, cfg: &ShiftConfig) -> Result<Complex64, MomentsError> {
    let k = cfg.k();
    let l1 = (q as f64 / (8.0 * PI)).ln() + EULER_GAMMA;
    // coefficients of prod_i (x + c_i) in ascending powers of x
    let mut coeffs = vec![0.0f64; k + 1];
    coeffs[0] = 1.0;
    for i in 0..k {
        let c = if cfg.in_upsilon(i) { PI / 2.0 } else { -PI / 2.0 };
        for m in (0..=i).rev() {
            coeffs[m + 1] += coeffs[m];
            coeffs[m] *= c;
        }
    }
    let (derivs, _err) = dirichlet_f_derivatives(k as f64 / 2.0, k)?;
    let mut series = 0.0;
    for (m, &cm) in coeffs.iter().enumerate() {
        for j in 0..=m {
            series += cm * binomial(m as u32, j as u32) * l1.powi((m - j) as i32) * derivs[j];
        }
    }
    let scale = (q as f64).powf(k as f64 / 2.0) / (2f64.powi(k as i32 - 1) * (q - 1) as f64);
    Ok(Complex64::new(scale * series, 0.0))
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut v = 1.0f64;
    for j in 0..k.min(n - k) {
        v = v * (n - j) as f64 / (j + 1) as f64;
    }
    v
}

/// Derivatives `F^{(j)}(s0)` for `j = 0..=jmax` of the Dirichlet series
/// `F(s) = sum_n 2^{nu(n)} n^{-s} = zeta(s)^2 / zeta(2s)`, via circle
/// quadrature around `s0`. Requires `s0 >= 1.4` so the circle of radius 0.35
/// stays clear of the pole at 1. Returns the derivatives and an error
/// estimate from doubling the node count.
fn dirichlet_f_derivatives(s0: f64, jmax: usize) -> Result<(Vec<f64>, f64), MomentsError> {
    if s0 < 1.4 {
        return Err(MomentsError::Region("series abscissa below 1.4"));
    }
    if jmax > 12 {
        return Err(MomentsError::Region("derivative order above 12"));
    }
    let rho = 0.35;
    let coeffs_at = |nodes: usize| -> Result<Vec<Complex64>, MomentsError> {
        let mut acc = vec![Complex64::new(0.0, 0.0); jmax + 1];
        for t in 0..nodes {
            let th = TAU * t as f64 / nodes as f64;
            let z = Complex64::from_polar(rho, th);
            let zs = riemann_zeta(Complex64::new(s0, 0.0) + z)?;
            let z2 = riemann_zeta(Complex64::new(2.0 * s0, 0.0) + 2.0 * z)?;
            let f = zs * zs / z2;
            for (j, slot) in acc.iter_mut().enumerate() {
                *slot += f * Complex64::from_polar(1.0, -(j as f64) * th);
            }
        }
        Ok(acc
            .iter()
            .enumerate()
            .map(|(j, v)| v / nodes as f64 / rho.powi(j as i32))
            .collect())
    };
    let coarse = coeffs_at(256)?;
    let fine = coeffs_at(512)?;
    let mut derivs = Vec::with_capacity(jmax + 1);
    let mut err = 0.0f64;
    let mut fact = 1.0f64;
    for j in 0..=jmax {
        if j > 0 {
            fact *= j as f64;
        }
        derivs.push(fine[j].re * fact);
        err = err.max((fine[j] - coarse[j]).norm() * fact);
        err = err.max(fine[j].im.abs() * fact);
    }
    Ok((derivs, err))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem1Variant {
    /// `(log(q/8npi))^k + (-pi)^k` per term, as displayed.
    AsStated,
    /// `(log(q/8npi) + gamma)^k + (-pi/2)^k` per term, as the derivation
    /// chain produces.
    AsDerived,
}

fn variant_parts(q: u64, k: u32, variant: Theorem1Variant) -> (f64, f64) {
    let base = (q as f64 / (8.0 * PI)).ln();
    match variant {
        Theorem1Variant::AsStated => (base, (-PI).powi(k as i32)),
        Theorem1Variant::AsDerived => (base + EULER_GAMMA, (-PI / 2.0).powi(k as i32)),
    }
}

/// Main term of the k-th power moment of the twisted averages,
/// `sum_n 2^{nu(n)} n^{-k/2} ((log-term)_n^k + const^k)`, evaluated exactly:
/// expanding `(l1 - ln n)^k` binomially turns the n-series into derivatives
/// of `zeta(s)^2/zeta(2s)` at `s = k/2`. Direct truncation is hopeless here;
/// at k=3 the remainder past n = 10^6 still exceeds the value itself (the
/// logarithm grows while n^{-3/2} decays only slowly), so the closed route
/// is the only honest one. `theorem1_partial_sum` exposes the truncated sum
/// with a rigorous majorant for diagnostics.
pub fn theorem1_main_term(q: u64, k: u32, variant: Theorem1Variant) -> Result<f64, MomentsError> {
    if k < 3 {
        return Err(MomentsError::Region("power moment main term needs k >= 3"));
    }
    let (l1, cpow) = variant_parts(q, k, variant);
    let (derivs, _err) = dirichlet_f_derivatives(k as f64 / 2.0, k as usize)?;
    let mut series = cpow * derivs[0];
    for j in 0..=k {
        series += binomial(k, j) * l1.powi((k - j) as i32) * derivs[j as usize];
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy)]
pub struct TruncatedSeries {
    pub value: f64,
    pub tail_bound: f64,
    pub n_cutoff: u64,
}

/// Upper incomplete gamma at integer shape, `Gamma(m+1, z)`.
fn upper_gamma_int(m: u32, z: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut fact = 1.0f64;
    for t in 1..=m {
        term *= z / t as f64;
        sum += term;
        fact *= t as f64;
    }
    fact * (-z).exp() * sum
}

/// Bound on `sum_{n>N} d(n) n^{-s0} (c + ln n)^j` by partial summation
/// against the divisor-count bound `D(x) <= x(ln x + 1)`; the surviving
/// integral is an upper incomplete gamma.
fn divisor_tail_majorant(s0: f64, c: f64, j: u32, n_cutoff: u64) -> f64 {
    let s = s0 - 1.0;
    let cp = c.max(1.0);
    let z = s * ((n_cutoff as f64).ln() + cp);
    s0 * (s * cp).exp() * s.powi(-(j as i32) - 2) * upper_gamma_int(j + 1, z)
}

/// Partial sum of the power-moment series through `n_cutoff`, with a tail
/// majorant from `2^{nu(n)} <= d(n)`. The bound is crude but rigorous: the
/// change under doubling the cutoff never exceeds it.
pub fn theorem1_partial_sum(
    q: u64,
    k: u32,
    variant: Theorem1Variant,
    n_cutoff: u64,
) -> Result<TruncatedSeries, MomentsError> {
    if k < 3 {
        return Err(MomentsError::Region("power moment series needs k >= 3"));
    }
    if !(16..=20_000_000).contains(&n_cutoff) {
        return Err(MomentsError::Region("cutoff outside 16..=2e7"));
    }
    let (l1, cpow) = variant_parts(q, k, variant);
    let s0 = k as f64 / 2.0;
    let tables = ArithmeticTables::new(n_cutoff);
    let mut value = 0.0f64;
    for n in 1..=n_cutoff {
        let ln = l1 - (n as f64).ln();
        value += 2f64.powi(tables.nu(n) as i32) * (n as f64).powf(-s0) * (ln.powi(k as i32) + cpow);
    }
    let tail_bound = divisor_tail_majorant(s0, l1.abs(), k, n_cutoff)
        + cpow.abs() * divisor_tail_majorant(s0, 0.0, 0, n_cutoff);
    Ok(TruncatedSeries { value, tail_bound, n_cutoff })
}

/// `q^{-k/2} sum_{a=1}^{q-1} M(a,q)^k` from the twisted-moment table.
pub fn mk_from_twisted(q: u64, k: u32) -> Result<f64, MomentsError> {
    if k < 2 {
        return Err(MomentsError::Region("twisted power moment needs k >= 2"));
    }
    let table = twisted_moment_table(q)?;
    let sum: f64 = (1..q).map(|a| table.m(a).powi(k as i32)).sum();
    Ok(sum / (q as f64).powf(k as f64 / 2.0))
}

/// Mean over residues of the k-th power of the full central value,
/// `(1/phi(q)) sum_a D(1/2, a/q)^k` at zero shifts.
pub fn estermann_moment_bruteforce(q: u64, k: u32) -> Result<Complex64, MomentsError> {
    check_prime(q)?;
    if k == 0 {
        return Err(MomentsError::Region("power must be positive"));
    }
    let batch = estermann_batch_half(q, &ShiftPair::zero(), HALF, recommended_method(q))?;
    let total: Complex64 = (1..q).map(|a| batch.value_at(a).powu(k)).sum();
    Ok(total / (q - 1) as f64)
}

/// Closed main term the k-th power mean converges to. The compact form is
///
/// ```text
/// q^{k/2-1} 2^{1-k/2} zeta(k/2)^2/zeta(k) * Re((e^{i pi/4} (log(q/8pi)+gamma) - e^{-i pi/4} pi/2)^k)
/// ```
///
/// and `refined` replaces the single logarithm by the full n-series
/// `Re(e^{ik pi/4} (log(q/8npi)+gamma + i pi/2)^k)` summed with the
/// `2^{nu(n)}` weights, again in closed form.
pub fn estermann_moment_main(q: u64, k: u32, refined: bool) -> Result<Complex64, MomentsError> {
    if k < 3 {
        return Err(MomentsError::Region("power moment main term needs k >= 3"));
    }
    let l1 = (q as f64 / (8.0 * PI)).ln() + EULER_GAMMA;
    let value = if refined {
        let (derivs, _err) = dirichlet_f_derivatives(k as f64 / 2.0, k as usize)?;
        let z0 = Complex64::new(l1, PI / 2.0);
        let mut series = Complex64::new(0.0, 0.0);
        for j in 0..=k {
            series += binomial(k, j) * z0.powu(k - j) * derivs[j as usize];
        }
        let phase = Complex64::from_polar(1.0, k as f64 * PI / 4.0);
        let scale = (q as f64).powf(k as f64 / 2.0) * 2f64.powf(1.0 - k as f64 / 2.0)
            / (q - 1) as f64;
        scale * (phase * series).re
    } else {
        let z = Complex64::from_polar(1.0, PI / 4.0) * l1
            - Complex64::from_polar(1.0, -PI / 4.0) * (PI / 2.0);
        let zk = riemann_zeta(Complex64::new(k as f64 / 2.0, 0.0))?.re;
        let z2k = riemann_zeta(Complex64::new(k as f64, 0.0))?.re;
        let scale = (q as f64).powf(k as f64 / 2.0 - 1.0)
            * 2f64.powf(1.0 - k as f64 / 2.0)
            * zk
            * zk
            / z2k;
        scale * z.powu(k).re
    };
    Ok(Complex64::new(value, 0.0))
}

/// `sum_{a=1}^{q-1} f_{r,sign}(a/q)^k`, the exact continued-fraction moment.
pub fn cf_moment_bruteforce(q: u64, k: u32, r: u32, sign: i8) -> Result<f64, MomentsError> {
    check_prime(q)?;
    if sign != 1 && sign != -1 {
        return Err(MomentsError::Region("sign must be +1 or -1"));
    }
    if k == 0 || r == 0 {
        return Err(MomentsError::Region("powers must be positive"));
    }
    // fixed chunk boundaries and an ordered final fold keep the float
    // addition tree independent of thread scheduling
    const CHUNK: u64 = 4096;
    let chunks = (q - 1 + CHUNK - 1) / CHUNK;
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = 1 + c * CHUNK;
            let hi = (lo + CHUNK).min(q);
            (lo..hi)
                .map(|a| {
                    let x = ReducedFraction::new(a, q).expect("prime modulus");
                    f_moment(x, r, sign).powi(k as i32)
                })
                .sum()
        })
        .collect();
    Ok(partials.iter().sum())
}

/// Main term `2 zeta(kr/2)^2 / zeta(kr) * q^{kr/2}` of the
/// continued-fraction moment; depends on (k, r) only through the product.
pub fn cf_moment_main(q: u64, k: u32, r: u32) -> Result<f64, MomentsError> {
    let kr = k.checked_mul(r).ok_or(MomentsError::Region("kr overflow"))?;
    if kr < 3 {
        return Err(MomentsError::Region("zeta pole at kr <= 2"));
    }
    let z1 = riemann_zeta(Complex64::new(kr as f64 / 2.0, 0.0))?.re;
    let z2 = riemann_zeta(Complex64::new(kr as f64, 0.0))?.re;
    Ok(2.0 * z1 * z1 / z2 * (q as f64).powf(kr as f64 / 2.0))
}

/// What a convergence study computes per prime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StudyKind {
    /// Twisted power moment `q^{-k/2} sum_a M(a,q)^k` against its series
    /// main term.
    Theorem1 { k: u32, variant: Theorem1Variant },
    /// Power mean of the full central value against its closed main term.
    Caee { k: u32, refined: bool },
    /// Continued-fraction moment against `2 zeta(kr/2)^2/zeta(kr) q^{kr/2}`.
    Tinc { k: u32, r: u32, sign: i8 },
    /// Second twisted moment against `(2 pi^2)^{-1} (log q)^4`.
    FourthMoment,
    /// Central identity residual, maximized over residues.
    Axe,
    /// Worst-case continued-fraction approximation error over residues.
    CfApprox { target: CfTarget },
}

fn report_for(q: u64, which: StudyKind) -> Result<MomentReport, MomentsError> {
    let start = Instant::now();
    let mut report = match which {
        StudyKind::Theorem1 { k, variant } => {
            let brute = Complex64::new(mk_from_twisted(q, k)?, 0.0);
            let (l1, _) = variant_parts(q, k, variant);
            let (_, err) = dirichlet_f_derivatives(k as f64 / 2.0, k as usize)?;
            let main = Complex64::new(theorem1_main_term(q, k, variant)?, 0.0);
            // propagate the derivative error through the binomial weights
            let tail_bound = err * (1.0 + l1.abs()).powi(k as i32) * 2f64.powi(k as i32);
            MomentReport {
                q,
                k,
                r: None,
                brute_value: brute,
                main_term: main,
                ratio: guarded_ratio(brute, main, tail_bound),
                residual: None,
                truncation_n: 0,
                tail_bound,
                elapsed: 0.0,
            }
        }
        StudyKind::Caee { k, refined } => {
            let brute = estermann_moment_bruteforce(q, k)?;
            let main = estermann_moment_main(q, k, refined)?;
            MomentReport {
                q,
                k,
                r: None,
                brute_value: brute,
                main_term: main,
                ratio: guarded_ratio(brute, main, 0.0),
                residual: None,
                truncation_n: 0,
                tail_bound: 0.0,
                elapsed: 0.0,
            }
        }
        StudyKind::Tinc { k, r, sign } => {
            let brute = Complex64::new(cf_moment_bruteforce(q, k, r, sign)?, 0.0);
            let main = Complex64::new(cf_moment_main(q, k, r)?, 0.0);
            MomentReport {
                q,
                k,
                r: Some(r),
                brute_value: brute,
                main_term: main,
                ratio: guarded_ratio(brute, main, 0.0),
                residual: None,
                truncation_n: 0,
                tail_bound: 0.0,
                elapsed: 0.0,
            }
        }
        StudyKind::FourthMoment => {
            let brute = Complex64::new(mk_from_twisted(q, 2)?, 0.0);
            let lq = (q as f64).ln();
            let main = Complex64::new(lq.powi(4) / (2.0 * PI * PI), 0.0);
            MomentReport {
                q,
                k: 2,
                r: None,
                brute_value: brute,
                main_term: main,
                ratio: guarded_ratio(brute, main, 0.0),
                residual: None,
                truncation_n: 0,
                tail_bound: 0.0,
                elapsed: 0.0,
            }
        }
        StudyKind::Axe => {
            let worst = axe_max_residual(q)?;
            MomentReport {
                q,
                k: 1,
                r: None,
                brute_value: Complex64::new(worst, 0.0),
                main_term: Complex64::new(1.0, 0.0),
                ratio: None,
                residual: Some(worst),
                truncation_n: 0,
                tail_bound: 0.0,
                elapsed: 0.0,
            }
        }
        StudyKind::CfApprox { target } => {
            check_prime(q)?;
            let mut worst = 0.0f64;
            match target {
                CfTarget::M => {
                    let table = twisted_moment_table(q)?;
                    for a in 1..q {
                        let x = ReducedFraction::new(a, q)?;
                        worst = worst.max((table.m(a) - cf_approximation(&x, target)).abs());
                    }
                }
                CfTarget::Cos | CfTarget::Sin => {
                    let batch =
                        estermann_batch_half(q, &ShiftPair::zero(), HALF, recommended_method(q))?;
                    for a in 1..q {
                        let x = ReducedFraction::new(a, q)?;
                        let exact = match target {
                            CfTarget::Cos => batch.cos_at(a).re,
                            _ => batch.sin_at(a).re,
                        };
                        worst = worst.max((exact - cf_approximation(&x, target)).abs());
                    }
                }
            }
            let main = Complex64::new((q as f64).ln(), 0.0);
            MomentReport {
                q,
                k: 1,
                r: None,
                brute_value: Complex64::new(worst, 0.0),
                main_term: main,
                ratio: guarded_ratio(Complex64::new(worst, 0.0), main, 0.0),
                residual: Some(worst),
                truncation_n: 0,
                tail_bound: 0.0,
                elapsed: 0.0,
            }
        }
    };
    report.elapsed = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs one study per prime, in parallel, preserving the input order.
/// Per-prime failures are reported in place without aborting the rest.
pub fn convergence_study(
    primes: &[u64],
    which: StudyKind,
) -> Vec<(u64, Result<MomentReport, MomentsError>)> {
    primes
        .par_iter()
        .map(|&q| (q, report_for(q, which)))
        .collect()
}
