//! Exact q-expansions of the Eisenstein series `E^(k;N)_a`.
//!
//! For `z = x1 tau + x2` the expansion is
//!
//! ```text
//! E^(k)_z = a0 - sum_{mu >= 1, nu in x1 + Z, nu > 0} e(mu x2) nu^(k-1) q^(mu nu)
//!              + (-1)^(k+1) sum_{mu >= 1, nu in -x1 + Z, nu > 0} e(-mu x2) nu^(k-1) q^(mu nu)
//! ```
//!
//! and at the torsion point `x = (a1/N, a2/N)` every exponent `mu nu` lies in
//! `(1/N) Z`, every character value is a power of `zeta_N`, and `nu^(k-1)` is
//! rational, so the whole expansion is exact over `Q(zeta_N)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use crate::cyclotomic::{rat, rat_int, CycNum, Rat};
use crate::error::{Error, Result};
use crate::qseries::QExpansion;

/// `(k, N, a1, a2)` naming `E^(k;N)_(a1,a2)`, with residues stored in `0..N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EisensteinIndex {
    weight: u32,
    level: u32,
    a1: u32,
    a2: u32,
}

impl EisensteinIndex {
    /// Reduces `a1`, `a2` modulo `N`. Rejects `k = 0`, `N = 0` and the
    /// non-holomorphic `E^(2;N)_(0,0)`.
    pub fn new(weight: u32, level: u32, a1: i64, a2: i64) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        if weight == 0 {
            return Err(Error::InvalidIndex("weight must be at least 1".into()));
        }
        let n = level as i64;
        let idx = EisensteinIndex {
            weight,
            level,
            a1: a1.rem_euclid(n) as u32,
            a2: a2.rem_euclid(n) as u32,
        };
        if weight == 2 && idx.is_zero_parameter() {
            return Err(Error::NonHolomorphic);
        }
        Ok(idx)
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn a1(&self) -> u32 {
        self.a1
    }

    pub fn a2(&self) -> u32 {
        self.a2
    }

    pub fn is_zero_parameter(&self) -> bool {
        self.a1 == 0 && self.a2 == 0
    }

    /// The index with parameter `-a`.
    pub fn negated(&self) -> Self {
        EisensteinIndex::new(self.weight, self.level, -(self.a1 as i64), -(self.a2 as i64)).unwrap()
    }

    /// The index with parameter `a * gamma` (row vector times matrix).
    pub fn act(&self, gamma: [[i64; 2]; 2]) -> Self {
        let (a1, a2) = (self.a1 as i64, self.a2 as i64);
        let b1 = a1 * gamma[0][0] + a2 * gamma[1][0];
        let b2 = a1 * gamma[0][1] + a2 * gamma[1][1];
        // a * gamma is zero iff a is, so validity is preserved for gamma in SL2(Z).
        EisensteinIndex::new(self.weight, self.level, b1, b2).unwrap()
    }

    /// Every valid index with weight `k` and level `N`.
    pub fn all(weight: u32, level: u32) -> impl Iterator<Item = EisensteinIndex> {
        (0..level as i64)
            .flat_map(move |a1| (0..level as i64).map(move |a2| (a1, a2)))
            .filter_map(move |(a1, a2)| EisensteinIndex::new(weight, level, a1, a2).ok())
    }
}

impl fmt::Display for EisensteinIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E^({};{})_({},{})", self.weight, self.level, self.a1, self.a2)
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Bernoulli numbers `B_0..=B_m` from `sum_{j=0}^{m} C(m+1, j) B_j = 0`, so `B_1 = -1/2`.
pub fn bernoulli_numbers(m: u32) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(m as usize + 1);
    b.push(Rat::one());
    for n in 1..=m {
        let s: Rat = (0..n)
            .map(|j| &b[j as usize] * Rat::from_integer(binomial(n + 1, j)))
            .sum();
        b.push(-s / Rat::from_integer(BigInt::from(n + 1)));
    }
    b
}

pub fn bernoulli_number(m: u32) -> Rat {
    bernoulli_numbers(m).pop().unwrap()
}

/// `B_m(t) = sum_j C(m, j) B_j t^(m-j)`.
pub fn bernoulli_poly_eval(m: u32, t: &Rat) -> Rat {
    let b = bernoulli_numbers(m);
    (0..=m)
        .map(|j| Rat::from_integer(binomial(m, j)) * &b[j as usize] * t.pow((m - j) as i32))
        .sum()
}

/// Constant term of `E^(k;N)_a`.
///
/// For `k >= 2` it is `B_k(a1/N)/k`. For `k = 1` it is `0` when `a = 0`,
/// `-(1/2)(1 + zeta^a2)/(1 - zeta^a2)` when only `a1 = 0`, and `a1/N - 1/2` otherwise.
pub fn constant_term(idx: &EisensteinIndex) -> CycNum {
    let n = idx.level;
    let x1 = rat(idx.a1 as i64, n as i64);
    if idx.weight >= 2 {
        let c = bernoulli_poly_eval(idx.weight, &x1) / rat_int(idx.weight as i64);
        return CycNum::from_rat(n, c);
    }
    match (idx.a1, idx.a2) {
        (0, 0) => CycNum::zero(n),
        (0, a2) => {
            let one = CycNum::one(n);
            let z = CycNum::zeta_pow(n, a2 as i64);
            let numer = (&one + &z).scale(&rat(-1, 2));
            let denom = (&one - &z)
                .inverse()
                .expect("1 - zeta^a2 is nonzero for a2 != 0 mod N");
            &numer * &denom
        }
        _ => CycNum::from_rat(n, x1 - rat(1, 2)),
    }
}

/// The exact expansion of `E^(k;N)_a` to order `T` (exponents `n/N` with `n < T`).
pub fn eisenstein_qexp(idx: &EisensteinIndex, order: u32) -> QExpansion {
    let n = idx.level;
    let k = idx.weight;
    let big_n = Rat::from_integer(BigInt::from(n));
    let mut dense: Vec<Vec<Rat>> = vec![vec![Rat::zero(); n as usize]; order as usize];

    // sign = +1: nu = r/N with r = a1 mod N; sign = -1: r = -a1 mod N.
    for (sign, start) in [(1i64, idx.a1), (-1i64, (n - idx.a1) % n)] {
        let weight_sign = if sign == 1 || k % 2 == 0 { -1 } else { 1 };
        let first = if start == 0 { n } else { start };
        for r in (first..order).step_by(n as usize) {
            let nu_pow = (Rat::from_integer(BigInt::from(r)) / &big_n).pow((k - 1) as i32);
            let term = if weight_sign < 0 { -nu_pow } else { nu_pow };
            for mu in 1..=((order - 1) / r) {
                let j = (sign * mu as i64 * idx.a2 as i64).rem_euclid(n as i64) as usize;
                dense[(mu * r) as usize][j] += &term;
            }
        }
    }

    let mut out = QExpansion::constant(constant_term(idx), order);
    for (key, coeffs) in dense.into_iter().enumerate().skip(1) {
        if coeffs.iter().any(|c| !c.is_zero()) {
            out.add_to(key as u32, &CycNum::new(n, coeffs).unwrap());
        }
    }
    out
}

/// `s~^(k)_(a/N)(tau) = -N^(k-1) E^(k;N)_(a,0)(N tau)`, an expansion in integral powers of `q`.
///
/// The returned series keeps the level-`N` key convention, so every key is a
/// multiple of `N` and the order is `T*N`.
pub fn bg_tilde_s(weight: u32, level: u32, a: i64, order: u32) -> Result<QExpansion> {
    let idx = EisensteinIndex::new(weight, level, a, 0)?;
    let factor = -Rat::from_integer(BigInt::from(level).pow(weight - 1));
    Ok(eisenstein_qexp(&idx, order)
        .rescale_exponents(level)
        .scale_rat(&factor))
}

/// Sum of `d^p` over positive divisors `d` of `n`.
pub fn divisor_sigma(p: u32, n: u64) -> BigInt {
    (1..=n)
        .filter(|&d| n % d == 0)
        .map(|d| BigInt::from(d).pow(p))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli_number(0), rat_int(1));
        assert_eq!(bernoulli_number(1), rat(-1, 2));
        assert_eq!(bernoulli_number(2), rat(1, 6));
        assert_eq!(bernoulli_number(3), rat_int(0));
        assert_eq!(bernoulli_number(4), rat(-1, 30));
        assert_eq!(bernoulli_number(12), rat(-691, 2730));
    }

    #[test]
    fn bernoulli_polynomial_values() {
        assert_eq!(bernoulli_poly_eval(2, &rat_int(0)), rat(1, 6));
        assert_eq!(bernoulli_poly_eval(1, &rat(1, 2)), rat_int(0));
        assert_eq!(bernoulli_poly_eval(2, &rat(1, 2)), rat(-1, 12));
        // B_3(t) = t^3 - 3t^2/2 + t/2.
        let t = rat(1, 3);
        let direct = t.clone().pow(3) - rat(3, 2) * t.clone().pow(2) + rat(1, 2) * &t;
        assert_eq!(bernoulli_poly_eval(3, &t), direct);
        assert_eq!(direct, rat(1, 27));
    }

    #[test]
    fn index_validation() {
        assert_eq!(EisensteinIndex::new(2, 4, 0, 0).unwrap_err(), Error::NonHolomorphic);
        assert_eq!(EisensteinIndex::new(2, 4, 4, -8).unwrap_err(), Error::NonHolomorphic);
        assert!(EisensteinIndex::new(0, 4, 1, 0).is_err());
        assert!(EisensteinIndex::new(3, 0, 1, 0).is_err());
        let idx = EisensteinIndex::new(3, 5, -1, 7).unwrap();
        assert_eq!((idx.a1(), idx.a2()), (4, 2));
        assert_eq!(EisensteinIndex::all(2, 3).count(), 8);
        assert_eq!(EisensteinIndex::all(3, 3).count(), 9);
    }

    #[test]
    fn constant_terms() {
        let c = constant_term(&EisensteinIndex::new(4, 1, 0, 0).unwrap());
        assert_eq!(c.as_rational(), Some(&rat(-1, 120)));
        // -(1/2)(1+i)/(1-i) = -i/2.
        let c = constant_term(&EisensteinIndex::new(1, 4, 0, 1).unwrap());
        assert!(c.field_eq(&CycNum::zeta_pow(4, 1).scale(&rat(-1, 2))));
        let c = constant_term(&EisensteinIndex::new(1, 5, 2, 3).unwrap());
        assert_eq!(c.as_rational(), Some(&rat(-1, 10)));
        assert!(constant_term(&EisensteinIndex::new(1, 3, 0, 0).unwrap()).is_zero());
        assert!(constant_term(&EisensteinIndex::new(1, 2, 1, 0).unwrap()).is_zero());
    }

    #[test]
    fn level_one_weight_four_is_sigma_three() {
        let f = eisenstein_qexp(&EisensteinIndex::new(4, 1, 0, 0).unwrap(), 12);
        assert_eq!(f.coeff(0).as_rational(), Some(&rat(-1, 120)));
        assert_eq!(f.coeff(1).as_rational(), Some(&rat_int(-2)));
        assert_eq!(f.coeff(2).as_rational(), Some(&rat_int(-18)));
        assert_eq!(f.coeff(3).as_rational(), Some(&rat_int(-56)));
        for n in 1..12u32 {
            let expected = -Rat::from_integer(divisor_sigma(3, n as u64) * 2);
            assert_eq!(f.coeff(n).as_rational(), Some(&expected), "n={n}");
        }
    }

    #[test]
    fn odd_weight_level_one_vanishes() {
        for k in [1, 3, 5, 7] {
            let f = eisenstein_qexp(&EisensteinIndex::new(k, 1, 0, 0).unwrap(), 15);
            assert!(f.is_zero(), "k={k}");
        }
    }

    #[test]
    fn two_torsion_weight_one_vanishes() {
        // a = -a mod 2 and E^(1) is odd, so both sums cancel term by term.
        let f = eisenstein_qexp(&EisensteinIndex::new(1, 2, 1, 0).unwrap(), 6);
        assert!(f.coeff(0).is_zero());
        assert!(f.is_zero());
        let g = eisenstein_qexp(&EisensteinIndex::new(2, 2, 1, 0).unwrap(), 6);
        assert!(!g.coeff(1).is_zero());
    }

    #[test]
    fn tilde_s_has_integral_exponents() {
        let s = bg_tilde_s(1, 2, 1, 10).unwrap();
        assert!(s.coeff(0).is_zero());
        assert_eq!(s.order(), 20);
        assert!(s.terms().all(|(n, _)| n % 2 == 0));

        let s = bg_tilde_s(3, 3, 1, 10).unwrap();
        let expected = rat_int(-9) * bernoulli_poly_eval(3, &rat(1, 3)) / rat_int(3);
        assert_eq!(s.coeff(0).as_rational(), Some(&expected));
        assert_eq!(expected, rat(-1, 9));
        assert!(s.terms().all(|(n, _)| n % 3 == 0));

        assert_eq!(bg_tilde_s(2, 4, 0, 5).unwrap_err(), Error::NonHolomorphic);
    }

    #[test]
    fn divisor_sigma_small() {
        let s: Vec<BigInt> = (1..=6).map(|n| divisor_sigma(1, n)).collect();
        assert_eq!(s, [1, 3, 4, 7, 6, 12].map(BigInt::from));
    }
}
