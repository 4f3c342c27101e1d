//! Truncated series in `q^(1/N)` with coefficients in `Q(zeta_N)`.
//!
//! Exponents are stored as integer numerators `n` over the fixed denominator
//! `N`, so the key `n` stands for `q^(n/N)`. A series of order `T` is exact for
//! every exponent `n/N` with `n < T`. All exponents are nonnegative, which is
//! what makes `order(f*g) = min(order f, order g)` valid.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::cyclotomic::{CycNum, Rat};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    level: u32,
    order: u32,
    coeffs: BTreeMap<u32, CycNum>,
}

impl QExpansion {
    pub fn zero(level: u32, order: u32) -> Self {
        assert!(level >= 1);
        QExpansion {
            level,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant series `c` (order `T`).
    pub fn constant(c: CycNum, order: u32) -> Self {
        let mut out = Self::zero(c.level(), order);
        out.insert(0, c);
        out
    }

    /// Builds a series from `(n, c_n)` pairs; keys `>= order` are rejected.
    pub fn from_terms(level: u32, order: u32, terms: impl IntoIterator<Item = (u32, CycNum)>) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        let mut out = Self::zero(level, order);
        for (n, c) in terms {
            if c.level() != level {
                return Err(Error::LevelMismatch {
                    left: level,
                    right: c.level(),
                });
            }
            if n >= order {
                return Err(Error::Parse(format!("exponent {n}/{level} beyond order {order}")));
            }
            out.add_to(n, &c);
        }
        Ok(out)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Stored coefficients, keyed by exponent numerator, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &CycNum)> {
        self.coeffs.iter().map(|(&n, c)| (n, c))
    }

    pub fn coeff(&self, n: u32) -> CycNum {
        self.coeffs.get(&n).cloned().unwrap_or_else(|| CycNum::zero(self.level))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    fn insert(&mut self, n: u32, c: CycNum) {
        if n < self.order && !c.is_repr_zero() {
            self.coeffs.insert(n, c);
        }
    }

    /// Adds `c` to the coefficient of `q^(n/N)`; silently drops `n >= order`.
    pub(crate) fn add_to(&mut self, n: u32, c: &CycNum) {
        if n >= self.order || c.is_repr_zero() {
            return;
        }
        match self.coeffs.get_mut(&n) {
            Some(slot) => {
                *slot = &*slot + c;
                if slot.is_repr_zero() {
                    self.coeffs.remove(&n);
                }
            }
            None => {
                self.coeffs.insert(n, c.clone());
            }
        }
    }

    fn check_level(&self, other: &QExpansion) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: other.level,
            });
        }
        Ok(())
    }

    /// Truncates to a smaller order (no-op if `order >= self.order`).
    pub fn truncate(&self, order: u32) -> QExpansion {
        let order = order.min(self.order);
        QExpansion {
            level: self.level,
            order,
            coeffs: self.coeffs.range(..order).map(|(&n, c)| (n, c.clone())).collect(),
        }
    }

    pub fn add(&self, other: &QExpansion) -> Result<QExpansion> {
        self.check_level(other)?;
        let mut out = self.truncate(other.order);
        for (&n, c) in other.coeffs.range(..out.order) {
            out.add_to(n, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &QExpansion) -> Result<QExpansion> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QExpansion {
        QExpansion {
            level: self.level,
            order: self.order,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n, -c)).collect(),
        }
    }

    /// Exact Cauchy product truncated at `min(order f, order g)`.
    pub fn mul(&self, other: &QExpansion) -> Result<QExpansion> {
        self.check_level(other)?;
        let order = self.order.min(other.order);
        let mut out = QExpansion::zero(self.level, order);
        for (&i, a) in self.coeffs.range(..order) {
            for (&j, b) in other.coeffs.range(..order - i) {
                out.add_to(i + j, &(a * b));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &CycNum) -> Result<QExpansion> {
        if c.level() != self.level {
            return Err(Error::LevelMismatch {
                left: self.level,
                right: c.level(),
            });
        }
        let mut out = QExpansion::zero(self.level, self.order);
        for (&n, a) in &self.coeffs {
            out.insert(n, a * c);
        }
        Ok(out)
    }

    pub fn scale_rat(&self, c: &Rat) -> QExpansion {
        let mut out = QExpansion::zero(self.level, self.order);
        if c.is_zero() {
            return out;
        }
        for (&n, a) in &self.coeffs {
            out.insert(n, a.scale(c));
        }
        out
    }

    /// True iff every coefficient is zero in `Q(zeta_N)`.
    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(CycNum::is_zero)
    }

    /// Smallest exponent numerator whose coefficient is nonzero in the field.
    pub fn first_nonzero_exponent(&self) -> Option<u32> {
        self.coeffs.iter().find(|(_, c)| !c.is_zero()).map(|(&n, _)| n)
    }

    /// Coefficientwise field equality at the common order.
    pub fn field_eq(&self, other: &QExpansion) -> bool {
        self.level == other.level && self.sub(other).unwrap().is_zero()
    }

    /// The substitution `q^(n/N) -> q^(nM/N)`, i.e. `tau -> M tau`.
    pub fn rescale_exponents(&self, m: u32) -> QExpansion {
        assert!(m >= 1, "rescale factor must be positive");
        QExpansion {
            level: self.level,
            order: self.order * m,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n * m, c.clone())).collect(),
        }
    }

    /// The substitution `tau -> tau + j`: the coefficient of `q^(n/N)` picks up `zeta_N^(nj)`.
    pub fn twist(&self, j: i64) -> QExpansion {
        QExpansion {
            level: self.level,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&n, c)| (n, c.mul_zeta_pow(n as i64 * j)))
                .collect(),
        }
    }

    /// Evaluates the truncated series at `tau` in the upper half-plane.
    pub fn eval_numeric(&self, tau: Complex64) -> Result<Complex64> {
        if tau.im <= 0.0 {
            return Err(Error::NotUpperHalfPlane(tau.im));
        }
        let n = self.level as f64;
        Ok(self
            .coeffs
            .iter()
            .map(|(&k, c)| c.embed() * (Complex64::i() * TAU * tau * (k as f64 / n)).exp())
            .sum())
    }

    /// `{"level": N, "order": T, "coeffs": [{"n": n, "c": [[num, den], ...]}]}`.
    ///
    /// Coefficients are written in their reduced form (degree below `phi(N)`,
    /// padded to `N` entries), so equal series serialize identically.
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .filter_map(|(&n, c)| {
                let r = c.reduced();
                (!r.is_repr_zero()).then(|| json!({ "n": n, "c": r.coeffs().iter().map(rat_to_json).collect::<Vec<_>>() }))
            })
            .collect();
        json!({ "level": self.level, "order": self.order, "coeffs": coeffs })
    }

    pub fn from_json(v: &Value) -> Result<QExpansion> {
        let field = |name: &str| v.get(name).ok_or_else(|| Error::Parse(format!("missing field {name:?}")));
        let as_u32 = |x: &Value, what: &str| {
            x.as_u64()
                .and_then(|u| u32::try_from(u).ok())
                .ok_or_else(|| Error::Parse(format!("{what} must be a nonnegative integer")))
        };
        let level = as_u32(field("level")?, "level")?;
        let order = as_u32(field("order")?, "order")?;
        let list = field("coeffs")?
            .as_array()
            .ok_or_else(|| Error::Parse("coeffs must be an array".into()))?;
        let mut terms = Vec::with_capacity(list.len());
        let mut last: Option<u32> = None;
        for entry in list {
            let n = as_u32(entry.get("n").unwrap_or(&Value::Null), "n")?;
            if last.is_some_and(|l| l >= n) {
                return Err(Error::Parse("exponent keys must be strictly ascending".into()));
            }
            last = Some(n);
            let cs = entry
                .get("c")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("c must be an array".into()))?;
            let rats = cs.iter().map(rat_from_json).collect::<Result<Vec<_>>>()?;
            terms.push((n, CycNum::new(level, rats)?));
        }
        QExpansion::from_terms(level, order, terms)
    }
}

/// `[num, den]`, each a JSON integer when it fits in 64 bits and a decimal string otherwise.
pub fn rat_to_json(r: &Rat) -> Value {
    let enc = |x: &BigInt| match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    };
    json!([enc(r.numer()), enc(r.denom())])
}

pub fn rat_from_json(v: &Value) -> Result<Rat> {
    let dec = |x: &Value| -> Result<BigInt> {
        match x {
            Value::Number(n) => n
                .as_i64()
                .map(BigInt::from)
                .ok_or_else(|| Error::Parse(format!("non-integer rational part {n}"))),
            Value::String(s) => s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}"))),
            other => Err(Error::Parse(format!("bad rational part {other}"))),
        }
    };
    match v.as_array().map(Vec::as_slice) {
        Some([num, den]) => {
            let (num, den) = (dec(num)?, dec(den)?);
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(Rat::new(num, den))
        }
        _ => Err(Error::Parse(format!("expected [num, den], got {v}"))),
    }
}

fn monomial(k: u32, n: u32) -> String {
    let g = num_integer::gcd(k, n);
    match (k / g, n / g) {
        (0, _) => String::new(),
        (1, 1) => "q".to_string(),
        (p, 1) => format!("q^{p}"),
        (p, d) => format!("q^({p}/{d})"),
    }
}

impl fmt::Display for QExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (&k, c) in self.coeffs.iter().filter(|(_, c)| !c.is_zero()) {
            match monomial(k, self.level).as_str() {
                "" => write!(f, "({c}) + ")?,
                mono => write!(f, "({c})*{mono} + ")?,
            }
        }
        match monomial(self.order, self.level).as_str() {
            "" => write!(f, "O(1)"),
            mono => write!(f, "O({mono})"),
        }
    }
}
