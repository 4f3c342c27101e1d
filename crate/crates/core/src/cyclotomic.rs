//! Exact arithmetic in the cyclotomic field `Q(zeta_N)`.
//!
//! A [`CycNum`] is stored as a vector of `N` rationals `c_0..c_{N-1}`,
//! standing for `sum c_j zeta_N^j` in `Q[x]/(x^N - 1)`. That ring maps onto
//! `Q(zeta_N)` with a nontrivial kernel, so two representations can differ
//! and still be the same field element. Ring operations never reduce; only
//! [`CycNum::is_zero`] (and the helpers built on it) pays for a reduction
//! modulo the cyclotomic polynomial `Phi_N`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number with a normalized sign and reduced fraction.
pub type Rat = BigRational;

/// Builds `num/den` as a reduced rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// Rational polynomials
// ---------------------------------------------------------------------------

/// Dense polynomial over `Q`, lowest degree first, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatPoly {
    coeffs: Vec<Rat>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        RatPoly { coeffs: vec![Rat::one()] }
    }

    /// `x^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); n + 1];
        coeffs[0] = -Rat::one();
        coeffs[n] += Rat::one();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Euclidean division; returns `(quotient, remainder)`. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (RatPoly::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let factor = &rem[i] / &lead;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                if !d.is_zero() {
                    rem[i - dd + j] -= &factor * d;
                }
            }
            quot[i - dd] = factor;
        }
        rem.truncate(dd);
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    /// Extended Euclid: returns `(g, s, t)` with `s*self + t*other = g`, `g` monic
    /// (or zero when both inputs are zero).
    pub fn ext_gcd(&self, other: &RatPoly) -> (RatPoly, RatPoly, RatPoly) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (RatPoly::one(), RatPoly::zero());
        let (mut t0, mut t1) = (RatPoly::zero(), RatPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = &s0 - &(&q * &s1);
            let t = &t0 - &(&q * &t1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        match r0.leading().cloned() {
            Some(lead) if !lead.is_one() => {
                let inv = lead.recip();
                (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
            }
            _ => (r0, s0, t0),
        }
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rat::zero();
        RatPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rat::zero();
        RatPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) - rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: &RatPoly) -> RatPoly {
        if self.is_zero() || rhs.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        RatPoly::new(out)
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomials
// ---------------------------------------------------------------------------

/// Möbius function by trial division.
pub fn mobius(n: u64) -> i32 {
    assert!(n >= 1);
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1);
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// The `N`-th cyclotomic polynomial, `prod_{d | N} (x^{N/d} - 1)^{mu(d)}`.
pub fn cyclotomic_polynomial(n: u32) -> RatPoly {
    assert!(n >= 1, "cyclotomic polynomial of level 0");
    let n = n as usize;
    let mut numer = RatPoly::one();
    let mut denom = RatPoly::one();
    for d in (1..=n).filter(|d| n % d == 0) {
        match mobius(d as u64) {
            1 => numer = &numer * &RatPoly::x_pow_minus_one(n / d),
            -1 => denom = &denom * &RatPoly::x_pow_minus_one(n / d),
            _ => {}
        }
    }
    let (q, r) = numer.div_rem(&denom);
    debug_assert!(r.is_zero());
    q
}

fn phi_cached(n: u32) -> Arc<RatPoly> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<RatPoly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.read().unwrap().get(&n) {
        return Arc::clone(p);
    }
    let p = Arc::new(cyclotomic_polynomial(n));
    cache.write().unwrap().entry(n).or_insert(p).clone()
}

// ---------------------------------------------------------------------------
// Elements of Q(zeta_N)
// ---------------------------------------------------------------------------

/// An element `sum_j c_j zeta_N^j` of `Q(zeta_N)`, represented modulo `x^N - 1`.
///
/// `PartialEq` compares representations. Use [`CycNum::field_eq`] or
/// [`CycNum::is_zero`] for equality in the field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycNum {
    level: u32,
    coeffs: Vec<Rat>,
}

impl CycNum {
    pub fn new(level: u32, coeffs: Vec<Rat>) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        if coeffs.len() != level as usize {
            return Err(Error::LevelMismatch {
                left: level,
                right: coeffs.len() as u32,
            });
        }
        Ok(CycNum { level, coeffs })
    }

    pub fn zero(level: u32) -> Self {
        assert!(level >= 1);
        CycNum {
            level,
            coeffs: vec![Rat::zero(); level as usize],
        }
    }

    pub fn one(level: u32) -> Self {
        Self::from_rat(level, Rat::one())
    }

    pub fn from_rat(level: u32, r: Rat) -> Self {
        let mut out = Self::zero(level);
        out.coeffs[0] = r;
        out
    }

    /// `zeta_N^j`, i.e. `e(j/N)`.
    pub fn zeta_pow(level: u32, j: i64) -> Self {
        let mut out = Self::zero(level);
        out.coeffs[j.rem_euclid(level as i64) as usize] = Rat::one();
        out
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &Rat {
        &self.coeffs[j]
    }

    /// All stored rationals are zero.
    pub fn is_repr_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Some rational is nonzero and all others vanish except possibly index 0.
    pub fn as_rational(&self) -> Option<&Rat> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| &self.coeffs[0])
    }

    fn check_level(&self, other: &CycNum) -> Result<()> {
        if self.level != other.level {
            Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            })
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &CycNum) -> Result<CycNum> {
        self.check_level(other)?;
        Ok(CycNum {
            level: self.level,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &CycNum) -> Result<CycNum> {
        self.check_level(other)?;
        Ok(CycNum {
            level: self.level,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// Cyclic convolution of the coefficient vectors.
    pub fn checked_mul(&self, other: &CycNum) -> Result<CycNum> {
        self.check_level(other)?;
        let n = self.level as usize;
        let mut out = vec![Rat::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[(i + j) % n] += a * b;
                }
            }
        }
        Ok(CycNum {
            level: self.level,
            coeffs: out,
        })
    }

    pub fn scale(&self, c: &Rat) -> CycNum {
        CycNum {
            level: self.level,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplies by `zeta_N^j` (a cyclic rotation of the coefficients).
    pub fn mul_zeta_pow(&self, j: i64) -> CycNum {
        let n = self.level as usize;
        let shift = j.rem_euclid(n as i64) as usize;
        let mut coeffs = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(i + shift) % n] = c.clone();
        }
        CycNum {
            level: self.level,
            coeffs,
        }
    }

    /// Remainder of `sum c_j x^j` modulo `Phi_N`, as a polynomial of degree < phi(N).
    pub fn reduce_mod_phi(&self) -> RatPoly {
        let phi = phi_cached(self.level);
        let d = phi.degree().unwrap();
        let pc = phi.coeffs();
        let mut c = self.coeffs.clone();
        // Phi_N is monic with integer coefficients.
        for i in (d..c.len()).rev() {
            if c[i].is_zero() {
                continue;
            }
            let lead = std::mem::take(&mut c[i]);
            for (j, p) in pc[..d].iter().enumerate() {
                if !p.is_zero() {
                    c[i - d + j] -= &lead * p;
                }
            }
        }
        c.truncate(d);
        RatPoly::new(c)
    }

    /// True iff this element is zero in `Q(zeta_N)`.
    pub fn is_zero(&self) -> bool {
        if self.is_repr_zero() {
            return true;
        }
        self.reduce_mod_phi().is_zero()
    }

    /// Equality in the field.
    pub fn field_eq(&self, other: &CycNum) -> bool {
        self.level == other.level && self.checked_sub(other).unwrap().is_zero()
    }

    /// Canonical representative: the remainder modulo `Phi_N`, padded to `N` entries.
    pub fn reduced(&self) -> CycNum {
        let r = self.reduce_mod_phi();
        let mut coeffs = r.coeffs().to_vec();
        coeffs.resize(self.level as usize, Rat::zero());
        CycNum {
            level: self.level,
            coeffs,
        }
    }

    /// Multiplicative inverse in `Q(zeta_N)`, via extended gcd with `Phi_N`.
    pub fn inverse(&self) -> Result<CycNum> {
        let a = self.reduce_mod_phi();
        if a.is_zero() {
            return Err(Error::NotInvertible(self.level));
        }
        let phi = phi_cached(self.level);
        let (g, s, _) = a.ext_gcd(&phi);
        // Phi_N is irreducible, so any nonzero remainder is coprime to it.
        debug_assert_eq!(g, RatPoly::one());
        let s = s.div_rem(&phi).1;
        let mut coeffs = s.coeffs().to_vec();
        coeffs.resize(self.level as usize, Rat::zero());
        Ok(CycNum {
            level: self.level,
            coeffs,
        })
    }

    /// Evaluates at `zeta_N = exp(2 pi i / N)`.
    pub fn embed(&self) -> Complex64 {
        let n = self.level as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), TAU * j as f64 / n))
            .sum()
    }
}

/// `zeta_N^j` as a free function.
pub fn zeta_pow(level: u32, j: i64) -> CycNum {
    CycNum::zeta_pow(level, j)
}

pub fn embed_numeric(a: &CycNum) -> Complex64 {
    a.embed()
}

impl Add for &CycNum {
    type Output = CycNum;
    fn add(self, rhs: &CycNum) -> CycNum {
        self.checked_add(rhs).expect("CycNum level mismatch")
    }
}

impl Sub for &CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &CycNum) -> CycNum {
        self.checked_sub(rhs).expect("CycNum level mismatch")
    }
}

impl Mul for &CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &CycNum) -> CycNum {
        self.checked_mul(rhs).expect("CycNum level mismatch")
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for CycNum {
    /// Prints the canonical representative, with `z` standing for `zeta_N`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced();
        let mut first = true;
        for (j, c) in r.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            match (j, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => write!(f, "z^{j}")?,
                (_, false) => write!(f, "{mag}*z^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
