//! The shifted divisor generating function twisted by an additive character,
//!
//! ```text
//! D_{alpha,beta}(s, a/q) = sum_{n>=1} tau_{alpha,beta}(n) e(na/q) n^{-s},
//! tau_{alpha,beta}(n)   = sum_{d1 d2 = n} d1^{-alpha} d2^{-beta},
//! ```
//!
//! evaluated anywhere in the s-plane through its expansion over Hurwitz zeta
//! values at rationals,
//!
//! ```text
//! D(s, a/q) = q^{-alpha-beta-2s} sum_{m,n=1}^{q} e(mna/q)
//!                 zeta(s+alpha, m/q) zeta(s+beta, n/q).
//! ```
//!
//! Splitting each Hurwitz factor as `zeta(w,x) = zh(w,x) + 1/(w-1)` with `zh`
//! entire in `w` separates an entire twisted double sum from an a-independent
//! polar part. The odd component `D_sin` is built from the twisted sums alone,
//! so it stays finite at the poles `s = 1-alpha`, `s = 1-beta`; only the full
//! value and the even component `D_cos` carry the poles.
//!
//! Batch evaluation over all residues a mod a prime q is provided at three
//! cost levels: a cubic-time direct sum, a quadratic-time product-bucket sum
//! followed by one length-q transform, and a near-linear method that reindexes
//! both Hurwitz vectors along a primitive root and reduces the double sum to
//! cyclic convolutions of length q-1.
//!
//! Values for |Im s| beyond about 50 lose accuracy gradually: the underlying
//! Hurwitz evaluation keeps roughly |Im s| terms per point, and cancellation
//! in the double sum grows with the height. All tolerances quoted in tests are
//! calibrated for |Im s| <= 10.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{is_prime, mul_mod, primitive_root};
use crate::fft::{cyclic_convolution, dft_inverse};
use crate::numerics::{gamma, riemann_zeta_hat, zeta_hat_cfg, Precision};
use crate::rationals::ReducedFraction;

/// Half-width of the guard disc around the poles `s = 1-alpha`, `s = 1-beta`
/// inside which the full value is refused.
pub const POLE_GUARD: f64 = 1e-6;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Error, PartialEq)]
pub enum EstermannError {
    #[error("shift {0} outside the supported window")]
    ShiftOutOfRange(Complex64),
    #[error("s = {0} is within the guard disc of a pole of the full value")]
    PolarPole(Complex64),
    #[error("gamma factor argument {0} is too close to a nonpositive integer")]
    GammaPole(Complex64),
    #[error("batch evaluation requires an odd prime modulus, got {0}")]
    NonPrimeModulus(u64),
    #[error("modulus {q} too large for the {method:?} batch method")]
    ModulusTooLarge { q: u64, method: BatchMethod },
    #[error("shift lists must all have length k = {k}, got {got}")]
    BadShiftLength { k: usize, got: usize },
    #[error("twist index set must be a subset of 1..=k")]
    BadUpsilon,
    #[error("internal consistency check failed: {0}")]
    ConsistencyCheck(&'static str),
}

/// One pair of complex shifts `(alpha, beta)`.
///
/// The standard constructor enforces `|alpha|, |beta| <= 1/4`, the window in
/// which every asymptotic statement in this crate is exercised. The special
/// values at `s = 0` (Dedekind sums, cotangent sums) need integer shifts, so a
/// wide constructor admits `|shift| <= 2` for pointwise evaluation only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftPair {
    alpha: Complex64,
    beta: Complex64,
}

impl ShiftPair {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, EstermannError> {
        for z in [alpha, beta] {
            if !(z.norm() <= 0.25) {
                return Err(EstermannError::ShiftOutOfRange(z));
            }
        }
        Ok(ShiftPair { alpha, beta })
    }

    /// Admits shifts up to `|shift| <= 2`, for the integer-shift special
    /// values of the odd component.
    pub fn new_wide(alpha: Complex64, beta: Complex64) -> Result<Self, EstermannError> {
        for z in [alpha, beta] {
            if !(z.norm() <= 2.0) {
                return Err(EstermannError::ShiftOutOfRange(z));
            }
        }
        Ok(ShiftPair { alpha, beta })
    }

    pub fn zero() -> Self {
        ShiftPair { alpha: Complex64::new(0.0, 0.0), beta: Complex64::new(0.0, 0.0) }
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self, EstermannError> {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// The pair `(-alpha, -beta)` appearing on the dual side of the
    /// functional equations.
    pub fn negated(&self) -> Self {
        ShiftPair { alpha: -self.alpha, beta: -self.beta }
    }

    pub fn sum(&self) -> Complex64 {
        self.alpha + self.beta
    }
}

/// Shift data for a product of k twisted values: k shift pairs plus the set
/// of indices whose factor carries the odd (sine) component rather than the
/// even one.
///
/// Twist indices are 1-based in the constructor, matching the usual set
/// notation `Upsilon subset {1,..,k}`; internally a mask is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftConfig {
    k: usize,
    upsilon: Vec<bool>,
    alphas: Vec<Complex64>,
    betas: Vec<Complex64>,
}

impl ShiftConfig {
    pub fn new(
        k: usize,
        upsilon: &[usize],
        alphas: Vec<Complex64>,
        betas: Vec<Complex64>,
    ) -> Result<Self, EstermannError> {
        if k == 0 || k > 8 {
            return Err(EstermannError::BadShiftLength { k, got: k });
        }
        if alphas.len() != k {
            return Err(EstermannError::BadShiftLength { k, got: alphas.len() });
        }
        if betas.len() != k {
            return Err(EstermannError::BadShiftLength { k, got: betas.len() });
        }
        for z in alphas.iter().chain(betas.iter()) {
            if !(z.norm() <= 0.25) {
                return Err(EstermannError::ShiftOutOfRange(*z));
            }
        }
        let mut mask = vec![false; k];
        for &i in upsilon {
            if i == 0 || i > k || mask[i - 1] {
                return Err(EstermannError::BadUpsilon);
            }
            mask[i - 1] = true;
        }
        Ok(ShiftConfig { k, upsilon: mask, alphas, betas })
    }

    pub fn zero_shifts(k: usize, upsilon: &[usize]) -> Result<Self, EstermannError> {
        let z = vec![Complex64::new(0.0, 0.0); k];
        Self::new(k, upsilon, z.clone(), z)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Membership of the 0-based factor index in the twist set.
    pub fn in_upsilon(&self, i: usize) -> bool {
        self.upsilon[i]
    }

    pub fn upsilon_size(&self) -> usize {
        self.upsilon.iter().filter(|&&b| b).count()
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[Complex64] {
        &self.betas
    }

    /// The shift pair of the 0-based factor index.
    pub fn pair(&self, i: usize) -> ShiftPair {
        ShiftPair { alpha: self.alphas[i], beta: self.betas[i] }
    }

    pub fn negated(&self) -> Self {
        ShiftConfig {
            k: self.k,
            upsilon: self.upsilon.clone(),
            alphas: self.alphas.iter().map(|z| -z).collect(),
            betas: self.betas.iter().map(|z| -z).collect(),
        }
    }

    pub fn sum_alphas(&self) -> Complex64 {
        self.alphas.iter().sum()
    }

    pub fn sum_betas(&self) -> Complex64 {
        self.betas.iter().sum()
    }

    /// True when every alpha differs from every beta in the same pair, the
    /// hypothesis under which each term of the shifted main term is finite.
    pub fn shifts_distinct(&self) -> bool {
        self.alphas
            .iter()
            .zip(&self.betas)
            .all(|(a, b)| (a - b).norm() > 1e-12)
    }
}

/// `Gamma(z)` or `Gamma(1/2 + z)` according to whether the factor index lies
/// in the twist set. The shifted half keeps the odd component's completed
/// equation in the same shape as the even one.
pub(crate) fn gamma_ups(in_upsilon: bool, z: Complex64) -> Complex64 {
    if in_upsilon {
        gamma(z + 0.5)
    } else {
        gamma(z)
    }
}

/// The ratio of dual to direct completion factors for a k-fold product at the
/// central point,
///
/// ```text
/// X = prod_i [G_i((1/2-alpha_i)/2) G_i((1/2-beta_i)/2)]
///         / [G_i((1/2+alpha_i)/2) G_i((1/2+beta_i)/2)] * (q/pi)^{-alpha_i-beta_i},
/// ```
///
/// with `G_i = Gamma(1/2 + .)` on twisted indices and `Gamma` otherwise.
/// It equals 1 at zero shifts and satisfies `X_{a,b} X_{-a,-b} = 1`.
pub fn x_factor(cfg: &ShiftConfig, q: u64) -> Complex64 {
    let qp = q as f64 / std::f64::consts::PI;
    let mut x = Complex64::new(1.0, 0.0);
    for i in 0..cfg.k() {
        let a = cfg.alphas()[i];
        let b = cfg.betas()[i];
        let u = cfg.in_upsilon(i);
        let num = gamma_ups(u, (0.5 - a) / 2.0) * gamma_ups(u, (0.5 - b) / 2.0);
        let den = gamma_ups(u, (0.5 + a) / 2.0) * gamma_ups(u, (0.5 + b) / 2.0);
        x *= num / den * (-(a + b) * qp.ln()).exp();
    }
    x
}

/// Decomposition of one value `D(s, a/q)` into the entire twisted sums at
/// `a/q` and `-a/q` and the shared polar part.
#[derive(Debug, Clone, Copy)]
pub struct EstermannParts {
    s: Complex64,
    twisted_at_a: Complex64,
    twisted_at_neg_a: Complex64,
    /// `None` inside the guard disc of `s = 1-alpha` or `s = 1-beta`.
    polar: Option<Complex64>,
}

impl EstermannParts {
    /// The full value `D(s, a/q)`.
    pub fn eval(&self) -> Result<Complex64, EstermannError> {
        match self.polar {
            Some(p) => Ok(self.twisted_at_a + p),
            None => Err(EstermannError::PolarPole(self.s)),
        }
    }

    /// The full value at the negated fraction, `D(s, -a/q)`.
    pub fn eval_negated(&self) -> Result<Complex64, EstermannError> {
        match self.polar {
            Some(p) => Ok(self.twisted_at_neg_a + p),
            None => Err(EstermannError::PolarPole(self.s)),
        }
    }

    /// Even component; carries the poles of the full value.
    pub fn cos(&self) -> Result<Complex64, EstermannError> {
        match self.polar {
            Some(p) => Ok((self.twisted_at_a + self.twisted_at_neg_a) / 2.0 + p),
            None => Err(EstermannError::PolarPole(self.s)),
        }
    }

    /// Odd component; entire in s, so always available.
    pub fn sin(&self) -> Complex64 {
        (self.twisted_at_a - self.twisted_at_neg_a) / Complex64::new(0.0, 2.0)
    }
}

/// Unit phases `e^{2 pi i k / q}` for `k = 0..q-1`, each from one sin/cos
/// pair so no rotation error accumulates.
fn unit_phases(q: u64) -> Vec<Complex64> {
    (0..q)
        .map(|k| {
            let t = TAU * (k as f64) / (q as f64);
            Complex64::new(t.cos(), t.sin())
        })
        .collect()
}

/// Entire Hurwitz values `zh(w, m/q)` for `m = 1..q-1`, together with the
/// value at `x = 1` and the sum over the interior points.
fn build_zvec(w: Complex64, q: u64, prec: &Precision) -> (Vec<Complex64>, Complex64, Complex64) {
    let n = (q - 1) as usize;
    let vec: Vec<Complex64> = if n >= 4000 {
        (1..q)
            .into_par_iter()
            .map(|m| zeta_hat_cfg(w, m as f64 / q as f64, prec))
            .collect()
    } else {
        (1..q).map(|m| zeta_hat_cfg(w, m as f64 / q as f64, prec)).collect()
    };
    let at_one = riemann_zeta_hat(w);
    let sum = vec.iter().sum();
    (vec, at_one, sum)
}

/// Sums `za[m] zb[n]` into buckets indexed by `mn mod q`, for `m, n` in
/// `1..q-1`. Quadratic in q; the residue index is stepped additively.
fn bucket_products(za: &[Complex64], zb: &[Complex64], q: u64) -> Vec<Complex64> {
    let qe = q as usize;
    let mut g = vec![Complex64::new(0.0, 0.0); qe];
    for m in 1..qe {
        let am = za[m - 1];
        let mut r = 0usize;
        for n in 1..qe {
            r += m;
            if r >= qe {
                r -= qe;
            }
            g[r] += am * zb[n - 1];
        }
    }
    g
}

struct PointData {
    prefactor: Complex64,
    boundary: Complex64,
    polar: Option<Complex64>,
    za: Vec<Complex64>,
    zb: Vec<Complex64>,
}

fn point_data(s: Complex64, shift: &ShiftPair, q: u64, prec: &Precision) -> PointData {
    let wa = s + shift.alpha();
    let wb = s + shift.beta();
    let (za, za1, sa) = build_zvec(wa, q, prec);
    let (zb, zb1, sb) = if wb == wa {
        (za.clone(), za1, sa)
    } else {
        build_zvec(wb, q, prec)
    };
    let lnq = (q as f64).ln();
    let prefactor = (-(shift.sum() + 2.0 * s) * lnq).exp();
    // rows m = q and n = q of the double sum, where the phase is 1
    let boundary = za1 * sb + zb1 * sa + za1 * zb1;
    let pa = wa - 1.0;
    let pb = wb - 1.0;
    let polar = if pa.norm() < POLE_GUARD || pb.norm() < POLE_GUARD {
        None
    } else {
        let pa = 1.0 / pa;
        let pb = 1.0 / pb;
        Some(prefactor * (q as f64) * (za1 * pb + zb1 * pa + pa * pb))
    };
    PointData { prefactor, boundary, polar, za, zb }
}

/// Evaluates the decomposition of `D(s, x)` at a single fraction. Quadratic
/// in the denominator; use the batch interface to cover all residues of a
/// prime modulus at once.
pub fn estermann_parts_cfg(
    s: Complex64,
    shift: &ShiftPair,
    x: &ReducedFraction,
    prec: &Precision,
) -> EstermannParts {
    let q = x.q();
    let data = point_data(s, shift, q, prec);
    let g = bucket_products(&data.za, &data.zb, q);
    let phases = unit_phases(q);
    let mut t_pos = Complex64::new(0.0, 0.0);
    let mut t_neg = Complex64::new(0.0, 0.0);
    for (r, gr) in g.iter().enumerate() {
        let idx = mul_mod(r as u64, x.a(), q) as usize;
        t_pos += gr * phases[idx];
        t_neg += gr * phases[idx].conj();
    }
    EstermannParts {
        s,
        twisted_at_a: data.prefactor * (t_pos + data.boundary),
        twisted_at_neg_a: data.prefactor * (t_neg + data.boundary),
        polar: data.polar,
    }
}

pub fn estermann_parts(s: Complex64, shift: &ShiftPair, x: &ReducedFraction) -> EstermannParts {
    estermann_parts_cfg(s, shift, x, &Precision::default())
}

/// `D_{alpha,beta}(s, a/q)`; errors inside the pole guard discs.
pub fn estermann_eval(
    s: Complex64,
    shift: &ShiftPair,
    x: &ReducedFraction,
) -> Result<Complex64, EstermannError> {
    estermann_parts(s, shift, x).eval()
}

/// Even and odd components `(D_cos, D_sin)` at one point.
pub fn estermann_cos_sin(
    s: Complex64,
    shift: &ShiftPair,
    x: &ReducedFraction,
) -> Result<(Complex64, Complex64), EstermannError> {
    let parts = estermann_parts(s, shift, x);
    Ok((parts.cos()?, parts.sin()))
}

/// Which trigonometric component a completed value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaKind {
    Cos,
    Sin,
}

fn near_nonpositive_integer(z: Complex64, tol: f64) -> bool {
    z.im.abs() < tol && z.re < 0.5 && (z.re - z.re.round()).abs() < tol && z.re.round() <= 0.0
}

/// The factor `Gamma(.) Gamma(.) (q/pi)^{s+(alpha+beta)/2}` multiplying the
/// trigonometric component in the completed value; the gamma arguments are
/// `(s+shift)/2` for the even kind and `(1+s+shift)/2` for the odd kind.
/// Exposed so batch evaluations can be completed without re-deriving it.
pub fn completion_factor(
    kind: LambdaKind,
    s: Complex64,
    shift: &ShiftPair,
    q: u64,
) -> Result<Complex64, EstermannError> {
    let off = match kind {
        LambdaKind::Cos => Complex64::new(0.0, 0.0),
        LambdaKind::Sin => Complex64::new(1.0, 0.0),
    };
    let ga = (s + shift.alpha() + off) / 2.0;
    let gb = (s + shift.beta() + off) / 2.0;
    for z in [ga, gb] {
        if near_nonpositive_integer(z, POLE_GUARD) {
            return Err(EstermannError::GammaPole(z));
        }
    }
    let qp = q as f64 / std::f64::consts::PI;
    Ok(gamma(ga) * gamma(gb) * ((s + shift.sum() / 2.0) * qp.ln()).exp())
}

/// Completed value
///
/// ```text
/// Lambda_cos = Gamma((s+alpha)/2) Gamma((s+beta)/2) (q/pi)^{s+(alpha+beta)/2} D_cos,
/// Lambda_sin = Gamma((1+s+alpha)/2) Gamma((1+s+beta)/2) (q/pi)^{s+(alpha+beta)/2} D_sin.
/// ```
///
/// Both satisfy `Lambda_{alpha,beta}(s, a/q) = Lambda_{-alpha,-beta}(1-s, abar/q)`
/// with `abar` the inverse of a mod q. The sine completion is entire; the
/// cosine completion keeps four simple poles.
pub fn completed_lambda(
    kind: LambdaKind,
    s: Complex64,
    shift: &ShiftPair,
    x: &ReducedFraction,
) -> Result<Complex64, EstermannError> {
    let factor = completion_factor(kind, s, shift, x.q())?;
    let parts = estermann_parts(s, shift, x);
    let trig = match kind {
        LambdaKind::Cos => parts.cos()?,
        LambdaKind::Sin => parts.sin(),
    };
    Ok(factor * trig)
}

/// Residual of the completed functional equation at one point, normalized by
/// `max(1, |lhs|, |rhs|)`.
pub fn afce_residual(
    kind: LambdaKind,
    s: Complex64,
    shift: &ShiftPair,
    x: &ReducedFraction,
) -> Result<f64, EstermannError> {
    let lhs = completed_lambda(kind, s, shift, x)?;
    let abar = crate::rationals::mod_inverse(x.a(), x.q())
        .expect("reduced fraction has invertible numerator");
    let dual = ReducedFraction::new(abar, x.q()).expect("inverse stays reduced");
    let rhs = completed_lambda(kind, 1.0 - s, &shift.negated(), &dual)?;
    Ok((lhs - rhs).norm() / 1.0f64.max(lhs.norm()).max(rhs.norm()))
}

/// Residual of the raw functional equation
///
/// ```text
/// D_{alpha,beta}(s, a/q) = -(2/q) (q/2pi)^{2-2s-alpha-beta}
///     Gamma(1-s-alpha) Gamma(1-s-beta)
///     [ cos(pi(2s+alpha+beta)/2) D_{-alpha,-beta}(1-s, -abar/q)
///       - cos(pi(alpha-beta)/2)  D_{-alpha,-beta}(1-s,  abar/q) ],
/// ```
///
/// normalized by `max(1, |lhs|, |rhs|)`. Both dual values carry the negated
/// shifts; the printed source of this identity leaves the second one with the
/// original shifts, which fails numerically by many orders.
pub fn feest_residual(
    s: Complex64,
    shift: &ShiftPair,
    x: &ReducedFraction,
) -> Result<f64, EstermannError> {
    let q = x.q();
    let lhs = estermann_eval(s, shift, x)?;
    let abar = crate::rationals::mod_inverse(x.a(), q).expect("invertible numerator");
    let dual = ReducedFraction::new(abar, q).expect("inverse stays reduced");
    let parts = estermann_parts(1.0 - s, &shift.negated(), &dual);
    let d_plus = parts.eval()?;
    let d_minus = parts.eval_negated()?;
    let half_pi = std::f64::consts::PI / 2.0;
    let cos_s = ((2.0 * s + shift.sum()) * half_pi).cos();
    let cos_shift = ((shift.alpha() - shift.beta()) * half_pi).cos();
    let scale = (2.0 / q as f64)
        * ((2.0 - 2.0 * s - shift.sum()) * (q as f64 / TAU).ln()).exp();
    let rhs = -scale
        * gamma(1.0 - s - shift.alpha())
        * gamma(1.0 - s - shift.beta())
        * (cos_s * d_minus - cos_shift * d_plus);
    Ok((lhs - rhs).norm() / 1.0f64.max(lhs.norm()).max(rhs.norm()))
}

/// Strategy for evaluating all residues of a prime modulus at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchMethod {
    /// Cubic in q; reference implementation for cross-checks.
    Direct,
    /// Quadratic bucket accumulation plus one length-q transform.
    Bucket,
    /// Primitive-root reindexing and two cyclic convolutions of length q-1.
    GroupDft,
}

/// Values `D(s, a/q)` for every `a = 1..q-1` of an odd prime q.
#[derive(Debug, Clone)]
pub struct EstermannBatch {
    q: u64,
    s: Complex64,
    values: Vec<Complex64>,
}

impl EstermannBatch {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    /// The full value at `a/q`, `1 <= a < q`.
    pub fn value_at(&self, a: u64) -> Complex64 {
        assert!(a >= 1 && a < self.q, "numerator out of range");
        self.values[(a - 1) as usize]
    }

    pub fn cos_at(&self, a: u64) -> Complex64 {
        (self.value_at(a) + self.value_at(self.q - a)) / 2.0
    }

    pub fn sin_at(&self, a: u64) -> Complex64 {
        (self.value_at(a) - self.value_at(self.q - a)) / Complex64::new(0.0, 2.0)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Evaluates `D(s, a/q)` for all `a` of an odd prime modulus.
///
/// The polar part is shared by all residues, so s must stay outside the pole
/// guard discs. Two internal identities are verified on every call: the
/// bucket totals must reproduce the product of the two Hurwitz sums, and each
/// Hurwitz vector must satisfy the multiplication formula of its zeta
/// function (checked away from `w = 1`).
pub fn estermann_batch_half_cfg(
    q: u64,
    shift: &ShiftPair,
    s: Complex64,
    method: BatchMethod,
    prec: &Precision,
) -> Result<EstermannBatch, EstermannError> {
    if q < 3 || !is_prime(q) {
        return Err(EstermannError::NonPrimeModulus(q));
    }
    match method {
        BatchMethod::Direct if q > 2_000 => {
            return Err(EstermannError::ModulusTooLarge { q, method });
        }
        BatchMethod::Bucket if q > 20_000 => {
            return Err(EstermannError::ModulusTooLarge { q, method });
        }
        _ => {}
    }
    let data = point_data(s, shift, q, prec);
    let polar = match data.polar {
        Some(p) => p,
        None => return Err(EstermannError::PolarPole(s)),
    };
    multiplication_check(s + shift.alpha(), q, &data.za)?;
    multiplication_check(s + shift.beta(), q, &data.zb)?;

    let qe = q as usize;
    let twisted: Vec<Complex64> = match method {
        BatchMethod::Direct => {
            let phases = unit_phases(q);
            (1..q)
                .into_par_iter()
                .map(|a| {
                    let mut t = Complex64::new(0.0, 0.0);
                    for m in 1..qe {
                        let ma = mul_mod(m as u64, a, q);
                        let mut idx = 0u64;
                        let mut row = Complex64::new(0.0, 0.0);
                        for n in 1..qe {
                            idx += ma;
                            if idx >= q {
                                idx -= q;
                            }
                            row += data.zb[n - 1] * phases[idx as usize];
                        }
                        t += data.za[m - 1] * row;
                    }
                    t
                })
                .collect()
        }
        BatchMethod::Bucket => {
            let mut g = bucket_products(&data.za, &data.zb, q);
            check_bucket_total(&g, &data)?;
            // one unnormalized transform gives sum_r g[r] e(ra/q) for all a
            dft_inverse(&mut g);
            g[1..].to_vec()
        }
        BatchMethod::GroupDft => {
            let root = primitive_root(q);
            let n = qe - 1;
            let mut pow = vec![0usize; n];
            let mut t = 1u64;
            for p in pow.iter_mut() {
                *p = t as usize;
                t = mul_mod(t, root, q);
            }
            let a_vec: Vec<Complex64> = pow.iter().map(|&p| data.za[p - 1]).collect();
            let b_vec: Vec<Complex64> = pow.iter().map(|&p| data.zb[p - 1]).collect();
            // c[w] = sum over residues with product g^w of za*zb
            let c = cyclic_convolution(&a_vec, &b_vec);
            check_group_total(&c, &data)?;
            let phases = unit_phases(q);
            let kernel: Vec<Complex64> = pow.iter().map(|&p| phases[p]).collect();
            let c_rev: Vec<Complex64> = (0..n).map(|j| c[(n - j) % n]).collect();
            // t[u] = sum_w c[w] kernel[(w+u) mod n]
            let t_log = cyclic_convolution(&kernel, &c_rev);
            let mut out = vec![Complex64::new(0.0, 0.0); qe - 1];
            for (u, &p) in pow.iter().enumerate() {
                out[p - 1] = t_log[u];
            }
            out
        }
    };

    let values = twisted
        .into_iter()
        .map(|t| data.prefactor * (t + data.boundary) + polar)
        .collect();
    Ok(EstermannBatch { q, s, values })
}

pub fn estermann_batch_half(
    q: u64,
    shift: &ShiftPair,
    s: Complex64,
    method: BatchMethod,
) -> Result<EstermannBatch, EstermannError> {
    estermann_batch_half_cfg(q, shift, s, method, &Precision::default())
}

/// `sum_{n=1}^{q} zh(w, n/q) = q^w zh(w) + (q^w - q)/(w-1)`, the entire form
/// of the multiplication formula. Skipped within 1e-3 of `w = 1`, where the
/// second term needs its limit `q log q`.
fn multiplication_check(
    w: Complex64,
    q: u64,
    zvec: &[Complex64],
) -> Result<(), EstermannError> {
    if (w - 1.0).norm() < 1e-3 {
        return Ok(());
    }
    let lhs: Complex64 = zvec.iter().sum::<Complex64>() + riemann_zeta_hat(w);
    let qw = (w * (q as f64).ln()).exp();
    let rhs = qw * riemann_zeta_hat(w) + (qw - q as f64) / (w - 1.0);
    let scale = 1.0f64.max(lhs.norm()).max(rhs.norm());
    if (lhs - rhs).norm() / scale > 1e-7 {
        return Err(EstermannError::ConsistencyCheck(
            "Hurwitz multiplication formula violated by the zeta vector",
        ));
    }
    Ok(())
}

fn check_bucket_total(g: &[Complex64], data: &PointData) -> Result<(), EstermannError> {
    let total: Complex64 = g.iter().sum();
    let expect: Complex64 = data.za.iter().sum::<Complex64>() * data.zb.iter().sum::<Complex64>();
    let scale = 1.0f64.max(expect.norm());
    if (total - expect).norm() / scale > 1e-8 {
        return Err(EstermannError::ConsistencyCheck(
            "bucket totals disagree with the product of zeta sums",
        ));
    }
    Ok(())
}

fn check_group_total(c: &[Complex64], data: &PointData) -> Result<(), EstermannError> {
    let total: Complex64 = c.iter().sum();
    let expect: Complex64 = data.za.iter().sum::<Complex64>() * data.zb.iter().sum::<Complex64>();
    let scale = 1.0f64.max(expect.norm());
    if (total - expect).norm() / scale > 1e-8 {
        return Err(EstermannError::ConsistencyCheck(
            "convolution totals disagree with the product of zeta sums",
        ));
    }
    Ok(())
}
