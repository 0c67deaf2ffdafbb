//! Exact modular arithmetic and the number-theoretic oracles the rest of the
//! crate builds on or is tested against.
//!
//! Residues and moduli fit in `u64` with `u128` intermediates; exponents are
//! `u128`, processed bit by bit. Moduli are capped at [`MAX_MODULUS`] so that
//! the diffusion decision threshold `1/N^2` stays far above float roundoff.

use alloc::vec::Vec;
use core::fmt;

/// Largest supported modulus (desk scale).
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumTheoryError {
    /// The element shares a factor with the modulus.
    NotAUnit { value: u64, modulus: u64 },
    /// Input exceeds the configured arithmetic width.
    OutOfRange { value: u64 },
    /// The supplied prime-power list does not multiply to the modulus.
    BadFactorization,
    /// Modulus below 2, or value not reduced.
    InvalidResidue { value: u64, modulus: u64 },
}

impl fmt::Display for NumTheoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumTheoryError::NotAUnit { value, modulus } => {
                write!(f, "{value} is not a unit modulo {modulus}")
            }
            NumTheoryError::OutOfRange { value } => {
                write!(f, "{value} exceeds the supported arithmetic width")
            }
            NumTheoryError::BadFactorization => write!(f, "prime powers do not multiply to N"),
            NumTheoryError::InvalidResidue { value, modulus } => {
                write!(f, "invalid residue {value} mod {modulus}")
            }
        }
    }
}

/// An integer modulo `N`; the currency of all arithmetic in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: u64, modulus: u64) -> Result<Self, NumTheoryError> {
        if modulus < 2 {
            return Err(NumTheoryError::InvalidResidue { value, modulus });
        }
        Ok(Residue {
            value: value % modulus,
            modulus,
        })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_unit(self) -> bool {
        gcd(self.value, self.modulus) == 1
    }

    pub fn mul(self, rhs: u64) -> Residue {
        Residue {
            value: mul_mod(self.value, rhs % self.modulus, self.modulus),
            modulus: self.modulus,
        }
    }

    /// Multiplicative inverse, if the value is a unit.
    pub fn inverse(self) -> Result<Residue, NumTheoryError> {
        mod_inverse(self.value, self.modulus)
            .map(|v| Residue {
                value: v,
                modulus: self.modulus,
            })
            .ok_or(NumTheoryError::NotAUnit {
                value: self.value,
                modulus: self.modulus,
            })
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Greatest common divisor (Euclid). `gcd(0, 0) = 0` by convention.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m` via the extended Euclidean algorithm.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// `base^exponent mod N` by repeated squaring.
pub fn mod_pow(base: Residue, exponent: u128) -> Residue {
    Residue {
        value: mod_pow_raw(base.value, exponent, base.modulus),
        modulus: base.modulus,
    }
}

pub fn mod_pow_raw(base: u64, mut exponent: u128, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    let mut sq = base % m;
    while exponent != 0 {
        if exponent & 1 == 1 {
            acc = mul_mod(acc, sq, m);
        }
        sq = mul_mod(sq, sq, m);
        exponent >>= 1;
    }
    acc
}

/// Least `r >= 1` with `a^r = 1`, by successive multiplication.
///
/// Ground-truth oracle; everything order-related is tested against it.
pub fn order_bruteforce(a: Residue) -> Result<u64, NumTheoryError> {
    if !a.is_unit() {
        return Err(NumTheoryError::NotAUnit {
            value: a.value,
            modulus: a.modulus,
        });
    }
    let mut x = a.value;
    let mut r = 1u64;
    while x != 1 {
        x = mul_mod(x, a.value, a.modulus);
        r += 1;
    }
    Ok(r)
}

/// `n = 2^power * odd_part`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoAdicSplit {
    pub power: u32,
    pub odd_part: u64,
}

pub fn two_adic_split(n: u64) -> TwoAdicSplit {
    debug_assert!(n >= 1);
    let power = n.trailing_zeros();
    TwoAdicSplit {
        power,
        odd_part: n >> power,
    }
}

/// Order of `u^d` in a cyclic group of order `n`: `n / gcd(n, d)`.
pub fn cyclic_power_order(n: u64, d: u64) -> u64 {
    n / gcd(n, d)
}

/// Classification of the input integer before the factorization pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScreenResult {
    Even,
    Prime,
    PrimePower { base: u64, exponent: u32 },
    CompositeNonPrimePower,
}

/// Deterministic Miller-Rabin, exact for all `u64` inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let split = two_adic_split(n - 1);
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow_raw(a, split.odd_part as u128, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..split.power {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Integer `k`-th root of `n` (largest `x` with `x^k <= n`).
fn integer_kth_root(n: u64, k: u32) -> u64 {
    if k == 1 {
        return n;
    }
    let mut x = libm::pow(n as f64, 1.0 / k as f64) as u64;
    // float estimate, then adjust
    while checked_pow(x + 1, k).map_or(false, |p| p <= n) {
        x += 1;
    }
    while x > 0 && checked_pow(x, k).map_or(true, |p| p > n) {
        x -= 1;
    }
    x
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Classifies `N`: even, prime, a prime power, or a composite that is not a
/// prime power. The factorization pipeline requires the last case with odd N.
pub fn screen_input(n: u64) -> Result<ScreenResult, NumTheoryError> {
    if n < 2 || n > MAX_MODULUS {
        return Err(NumTheoryError::OutOfRange { value: n });
    }
    if n % 2 == 0 {
        return Ok(ScreenResult::Even);
    }
    if is_prime(n) {
        return Ok(ScreenResult::Prime);
    }
    let bits = 63 - n.leading_zeros();
    for k in 2..=bits + 1 {
        let root = integer_kth_root(n, k);
        if root >= 2 && checked_pow(root, k) == Some(n) && is_prime(root) {
            return Ok(ScreenResult::PrimePower {
                base: root,
                exponent: k,
            });
        }
    }
    Ok(ScreenResult::CompositeNonPrimePower)
}

/// The image of a unit under the CRT isomorphism, expressed as exponents of
/// fixed primitive roots per prime-power component. Oracle-only code path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtProfile {
    pub prime_powers: Vec<(u64, u32)>,
    /// Least primitive root per component.
    pub generators: Vec<u64>,
    /// Discrete logs: `generators[i]^exponents[i] = a mod p_i^{e_i}`.
    pub exponents: Vec<u64>,
}

impl CrtProfile {
    /// Group order of component `i`: `p^{e-1}(p-1)`.
    pub fn component_order(&self, i: usize) -> u64 {
        let (p, e) = self.prime_powers[i];
        checked_pow(p, e - 1).unwrap() * (p - 1)
    }

    /// CRT reconstruction of the profiled element.
    pub fn reconstruct(&self, modulus: u64) -> u64 {
        let mut acc = 0u64;
        for ((&(p, e), &u), &d) in self
            .prime_powers
            .iter()
            .zip(&self.generators)
            .zip(&self.exponents)
        {
            let q = checked_pow(p, e).unwrap();
            let rem = mod_pow_raw(u % q, d as u128, q);
            let cofactor = modulus / q;
            let inv = mod_inverse(cofactor % q, q).unwrap();
            let term = mul_mod(mul_mod(rem, inv, modulus), cofactor % modulus, modulus);
            acc = (acc + term) % modulus;
        }
        acc
    }
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
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Least primitive root modulo `p^e` (odd prime power), by exhaustive order check.
fn least_primitive_root(p: u64, e: u32) -> u64 {
    let q = checked_pow(p, e).unwrap();
    let group = checked_pow(p, e - 1).unwrap() * (p - 1);
    let factors = prime_factors(group);
    'cand: for u in 2..q {
        if gcd(u, q) != 1 {
            continue;
        }
        for &f in &factors {
            if mod_pow_raw(u, (group / f) as u128, q) == 1 {
                continue 'cand;
            }
        }
        return u;
    }
    unreachable!("odd prime powers have primitive roots")
}

/// Profiles a unit `a` against the CRT decomposition `N = prod p_i^{e_i}`.
///
/// Generators are least primitive roots; discrete logs are found by brute
/// force per component.
pub fn crt_profile(a: Residue, prime_powers: &[(u64, u32)]) -> Result<CrtProfile, NumTheoryError> {
    let n = a.modulus();
    let mut product = 1u64;
    for &(p, e) in prime_powers {
        product = product
            .checked_mul(checked_pow(p, e).ok_or(NumTheoryError::BadFactorization)?)
            .ok_or(NumTheoryError::BadFactorization)?;
    }
    if product != n {
        return Err(NumTheoryError::BadFactorization);
    }
    if !a.is_unit() {
        return Err(NumTheoryError::NotAUnit {
            value: a.value(),
            modulus: n,
        });
    }
    let mut generators = Vec::with_capacity(prime_powers.len());
    let mut exponents = Vec::with_capacity(prime_powers.len());
    for &(p, e) in prime_powers {
        let q = checked_pow(p, e).unwrap();
        let u = least_primitive_root(p, e);
        let group = checked_pow(p, e - 1).unwrap() * (p - 1);
        let target = a.value() % q;
        let mut x = u % q;
        let mut d = 1u64;
        while x != target {
            x = mul_mod(x, u, q);
            d += 1;
            debug_assert!(d <= group);
        }
        generators.push(u);
        exponents.push(d);
    }
    Ok(CrtProfile {
        prime_powers: prime_powers.to_vec(),
        generators,
        exponents,
    })
}

/// Exact unsigned rational, kept reduced. Feeds acceptance thresholds, so no
/// float drift is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Ratio {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn numer(self) -> u64 {
        self.num
    }

    pub fn denom(self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Ratio) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Ratio) -> core::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Success-probability lower bound `p(m) = 1 - (m+1)/2^m` for an `N` with
/// `m >= 2` distinct prime factors, as an exact rational.
pub fn p_success(m: u32) -> Ratio {
    assert!((2..=63).contains(&m), "m must be in 2..=63");
    let den = 1u64 << m;
    Ratio::new(den - (m as u64 + 1), den)
}
