//! Scaled-integer series used on the scan hot path.
//!
//! An [`IntSeries`] stores `num / den` with a single positive `i128`
//! denominator and dense `i128` numerators, one row of `N` coefficients
//! (powers of `zeta_N` mod `x^N - 1`) per exponent. All arithmetic is
//! checked; every operation returns `None` on overflow so that callers can
//! fall back to the arbitrary-precision path.

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::cyclotomic::{cyclotomic_polynomial, CycNum, Rat};
use crate::qseries::QExpansion;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSeries {
    level: usize,
    order: usize,
    den: i128,
    num: Vec<i128>,
    /// Exponents whose row is not identically zero, ascending.
    support: Vec<usize>,
}

impl IntSeries {
    /// Converts an exact expansion; `None` if a numerator or the common
    /// denominator does not fit in `i128`.
    pub fn from_qexp(f: &QExpansion) -> Option<IntSeries> {
        let level = f.level() as usize;
        let order = f.order() as usize;
        let mut den = num_bigint::BigInt::from(1);
        for (_, c) in f.terms() {
            for r in c.coeffs() {
                den = den.lcm(r.denom());
            }
        }
        let den_i = den.to_i128()?;
        let mut num = vec![0i128; level * order];
        for (n, c) in f.terms() {
            for (j, r) in c.coeffs().iter().enumerate() {
                if !r.is_zero() {
                    let v = r.numer() * (&den / r.denom());
                    num[n as usize * level + j] = v.to_i128()?;
                }
            }
        }
        Some(IntSeries::assemble(level, order, den_i, num))
    }

    fn assemble(level: usize, order: usize, den: i128, num: Vec<i128>) -> IntSeries {
        let support = (0..order)
            .filter(|&n| num[n * level..(n + 1) * level].iter().any(|&v| v != 0))
            .collect();
        let mut s = IntSeries {
            level,
            order,
            den,
            num,
            support,
        };
        s.reduce_content();
        s
    }

    fn reduce_content(&mut self) {
        let mut g = self.den;
        for &v in &self.num {
            if g == 1 {
                return;
            }
            g = g.gcd(&v);
        }
        if g > 1 {
            self.den /= g;
            for v in &mut self.num {
                *v /= g;
            }
        }
    }

    pub fn level(&self) -> u32 {
        self.level as u32
    }

    pub fn order(&self) -> u32 {
        self.order as u32
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    fn row(&self, n: usize) -> &[i128] {
        &self.num[n * self.level..(n + 1) * self.level]
    }

    /// Truncated product at order `min(T_f, T_g)`.
    pub fn mul(&self, other: &IntSeries) -> Option<IntSeries> {
        assert_eq!(self.level, other.level, "level mismatch in IntSeries::mul");
        let level = self.level;
        let order = self.order.min(other.order);
        let den = self.den.checked_mul(other.den)?;
        let mut num = vec![0i128; level * order];
        for &n in &self.support {
            if n >= order {
                break;
            }
            let ra = self.row(n);
            for &m in &other.support {
                if n + m >= order {
                    break;
                }
                let rb = other.row(m);
                let out = &mut num[(n + m) * level..(n + m + 1) * level];
                for (i, &x) in ra.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in rb.iter().enumerate() {
                        if y == 0 {
                            continue;
                        }
                        let slot = &mut out[(i + j) % level];
                        *slot = slot.checked_add(x.checked_mul(y)?)?;
                    }
                }
            }
        }
        Some(IntSeries::assemble(level, order, den, num))
    }

    /// `sum_i c_i s_i` at the given level and order.
    pub fn combine(level: usize, order: usize, terms: &[(&Rat, &IntSeries)]) -> Option<IntSeries> {
        let mut scales = Vec::with_capacity(terms.len());
        let mut den: i128 = 1;
        for (c, s) in terms {
            let p = c.numer().to_i128()?;
            let q = c.denom().to_i128()?.checked_mul(s.den)?;
            den = den.checked_div(den.gcd(&q))?.checked_mul(q)?;
            scales.push((p, q));
        }
        let mut num = vec![0i128; level * order];
        for ((p, q), (_, s)) in scales.into_iter().zip(terms) {
            assert_eq!(s.level, level, "level mismatch in IntSeries::combine");
            let factor = p.checked_mul(den / q)?;
            for &n in &s.support {
                if n >= order {
                    break;
                }
                for (j, &v) in s.row(n).iter().enumerate() {
                    let slot = &mut num[n * level + j];
                    *slot = slot.checked_add(v.checked_mul(factor)?)?;
                }
            }
        }
        Some(IntSeries::assemble(level, order, den, num))
    }

    /// First exponent whose coefficient is nonzero in `Q(zeta_N)`.
    /// The outer `None` signals overflow during the reduction mod `Phi_N`.
    pub fn first_nonzero_exponent(&self) -> Option<Option<u32>> {
        let phi = int_cyclotomic(self.level as u32)?;
        for &n in &self.support {
            if !row_is_zero_mod(self.row(n), &phi)? {
                return Some(Some(n as u32));
            }
        }
        Some(None)
    }

    pub fn to_qexp(&self) -> QExpansion {
        let den = Rat::from_integer(self.den.into());
        let terms = self.support.iter().map(|&n| {
            let coeffs = self
                .row(n)
                .iter()
                .map(|&v| Rat::from_integer(v.into()) / &den)
                .collect();
            (n as u32, CycNum::new(self.level as u32, coeffs).unwrap())
        });
        QExpansion::from_terms(self.level as u32, self.order as u32, terms).unwrap()
    }
}

/// Integer coefficients of `Phi_N`, low degree first.
fn int_cyclotomic(n: u32) -> Option<Vec<i128>> {
    cyclotomic_polynomial(n)
        .coeffs()
        .iter()
        .map(|c| c.to_integer().to_i128())
        .collect()
}

/// Remainder of an integer polynomial by the monic `phi` is zero.
fn row_is_zero_mod(row: &[i128], phi: &[i128]) -> Option<bool> {
    let d = phi.len() - 1;
    let mut r = row.to_vec();
    for top in (d..r.len()).rev() {
        let lead = r[top];
        if lead == 0 {
            continue;
        }
        for (i, &p) in phi.iter().enumerate() {
            let idx = top - d + i;
            r[idx] = r[idx].checked_sub(lead.checked_mul(p)?)?;
        }
    }
    Some(r.iter().all(|&v| v == 0))
}
