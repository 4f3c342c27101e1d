//! Bracket symbols `P[a, b]` and the three-term product relations.
//!
//! For `k = k1 + k2 + 2` and nonzero `a, b, c` in `(Z/N)^2` with `a + b + c = 0`:
//!
//! ```text
//! P[a,b] + Q[b,c] + R[c,a] = alpha E^(k)_a + beta E^(k)_b + gamma E^(k)_c
//! P = X^k1 Y^k2,  Q = (-X-Y)^k1 X^k2,  R = Y^k1 (-X-Y)^k2
//! alpha = (-1)^(k2+1)/(k2+1),  beta = (-1)^(k1+1)/(k1+1),
//! gamma = (-1)^(k1+k2+1) k1! k2! / (k1+k2+1)!
//! ```
//!
//! where `X^i Y^j [a, b] = E^(i+1;N)_a E^(j+1;N)_b`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cyclotomic::{rat, rat_int, Rat};
use crate::eisenstein::{eisenstein_qexp, EisensteinIndex};
use crate::error::{Error, Result};
use crate::kernel::IntSeries;
use crate::qseries::QExpansion;

// ---------------------------------------------------------------------------
// Homogeneous polynomials
// ---------------------------------------------------------------------------

/// Homogeneous polynomial `sum_i c_i X^i Y^(d-i)` of degree `d` over `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomPoly {
    coeffs: Vec<Rat>,
}

impl HomPoly {
    /// `coeffs[i]` is the coefficient of `X^i Y^(d-i)`; the degree is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Rat>) -> Self {
        assert!(!coeffs.is_empty(), "a homogeneous polynomial needs degree >= 0");
        HomPoly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    pub fn zero(degree: u32) -> Self {
        Self::new(vec![Rat::zero(); degree as usize + 1])
    }

    /// `X^i Y^j`.
    pub fn monomial(i: u32, j: u32) -> Self {
        let mut p = Self::zero(i + j);
        p.coeffs[i as usize] = Rat::one();
        p
    }

    /// `s X + t Y`.
    pub fn linear(s: i64, t: i64) -> Self {
        Self::new(vec![rat_int(t), rat_int(s)])
    }

    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of `X^i Y^(d-i)`.
    pub fn coeff(&self, i: u32) -> &Rat {
        &self.coeffs[i as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Equality as polynomials: all zero polynomials agree regardless of degree.
    pub fn same_as(&self, other: &HomPoly) -> bool {
        (self.is_zero() && other.is_zero()) || self == other
    }

    /// `P(1, 0)`.
    pub fn at_x(&self) -> Rat {
        self.coeffs.last().unwrap().clone()
    }

    /// `P(0, 1)`.
    pub fn at_y(&self) -> Rat {
        self.coeffs[0].clone()
    }

    /// `P(Y, X)`.
    pub fn swap(&self) -> HomPoly {
        HomPoly::new(self.coeffs.iter().rev().cloned().collect())
    }

    /// `dP/dX`; the derivative of a constant is the zero polynomial of degree 0.
    pub fn d_dx(&self) -> HomPoly {
        if self.degree() == 0 {
            return HomPoly::zero(0);
        }
        HomPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat_int(i as i64))
                .collect(),
        )
    }

    /// `dP/dY`; the derivative of a constant is the zero polynomial of degree 0.
    pub fn d_dy(&self) -> HomPoly {
        let d = self.degree() as i64;
        if d == 0 {
            return HomPoly::zero(0);
        }
        HomPoly::new(
            self.coeffs[..d as usize]
                .iter()
                .enumerate()
                .map(|(i, c)| c * rat_int(d - i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rat) -> HomPoly {
        HomPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &HomPoly) -> HomPoly {
        let mut out = HomPoly::zero(self.degree() + other.degree());
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> HomPoly {
        (0..e).fold(HomPoly::from_ints(&[1]), |acc, _| acc.mul(self))
    }

    fn check_degree(&self, other: &HomPoly) {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in HomPoly arithmetic");
    }
}

impl Add for &HomPoly {
    type Output = HomPoly;
    fn add(self, rhs: &HomPoly) -> HomPoly {
        self.check_degree(rhs);
        HomPoly::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &HomPoly {
    type Output = HomPoly;
    fn sub(self, rhs: &HomPoly) -> HomPoly {
        self.check_degree(rhs);
        HomPoly::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            let (i, j) = (i as u32, d - i as u32);
            match i {
                0 => {}
                1 => write!(f, "*X")?,
                _ => write!(f, "*X^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "*Y")?,
                _ => write!(f, "*Y^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// Indices equal to -1 give zero, mirroring the convention of the recurrences.
fn degree_of(k1: i64, k2: i64) -> u32 {
    (k1 + k2).max(0) as u32
}

/// `P_{k1,k2} = X^k1 Y^k2`.
pub fn poly_p(k1: i64, k2: i64) -> HomPoly {
    if k1 < 0 || k2 < 0 {
        return HomPoly::zero(degree_of(k1, k2));
    }
    HomPoly::monomial(k1 as u32, k2 as u32)
}

/// `Q_{k1,k2} = (-X-Y)^k1 X^k2`.
pub fn poly_q(k1: i64, k2: i64) -> HomPoly {
    if k1 < 0 || k2 < 0 {
        return HomPoly::zero(degree_of(k1, k2));
    }
    HomPoly::linear(-1, -1)
        .pow(k1 as u32)
        .mul(&HomPoly::linear(1, 0).pow(k2 as u32))
}

/// `R_{k1,k2} = Y^k1 (-X-Y)^k2`.
pub fn poly_r(k1: i64, k2: i64) -> HomPoly {
    if k1 < 0 || k2 < 0 {
        return HomPoly::zero(degree_of(k1, k2));
    }
    HomPoly::linear(0, 1)
        .pow(k1 as u32)
        .mul(&HomPoly::linear(-1, -1).pow(k2 as u32))
}

fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn factorial(n: i64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// `alpha_{k1,k2} = (-1)^(k2+1) / (k2+1)`.
pub fn coeff_alpha(k1: i64, k2: i64) -> Rat {
    if k1 < 0 || k2 < 0 {
        return Rat::zero();
    }
    rat(sign(k2 + 1), k2 + 1)
}

/// `beta_{k1,k2} = (-1)^(k1+1) / (k1+1)`.
pub fn coeff_beta(k1: i64, k2: i64) -> Rat {
    if k1 < 0 || k2 < 0 {
        return Rat::zero();
    }
    rat(sign(k1 + 1), k1 + 1)
}

/// `gamma_{k1,k2} = (-1)^(k1+k2+1) k1! k2! / (k1+k2+1)!`.
pub fn coeff_gamma(k1: i64, k2: i64) -> Rat {
    if k1 < 0 || k2 < 0 {
        return Rat::zero();
    }
    let r = Rat::new(factorial(k1) * factorial(k2), factorial(k1 + k2 + 1));
    if sign(k1 + k2 + 1) < 0 {
        -r
    } else {
        r
    }
}

// ---------------------------------------------------------------------------
// Relation data
// ---------------------------------------------------------------------------

/// Which coefficient of the relation a [`Perturbation`] touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coefficient {
    Alpha,
    Beta,
    Gamma,
    /// Coefficient of `X^i Y^(d-i)` in `P`.
    P(u32),
    Q(u32),
    R(u32),
}

/// A deliberate corruption of one coefficient, used to show that the zero
/// test is not vacuous. `split = None` applies it to every split.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub target: Coefficient,
    pub delta: Rat,
    pub split: Option<(u32, u32)>,
}

impl Perturbation {
    pub fn plus_one(target: Coefficient) -> Self {
        Perturbation {
            target,
            delta: Rat::one(),
            split: None,
        }
    }
}

/// The polynomials and constants of one relation.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationTerms {
    pub p: HomPoly,
    pub q: HomPoly,
    pub r: HomPoly,
    pub alpha: Rat,
    pub beta: Rat,
    pub gamma: Rat,
}

impl RelationTerms {
    pub fn closed_form(k1: u32, k2: u32) -> Self {
        let (a, b) = (k1 as i64, k2 as i64);
        RelationTerms {
            p: poly_p(a, b),
            q: poly_q(a, b),
            r: poly_r(a, b),
            alpha: coeff_alpha(a, b),
            beta: coeff_beta(a, b),
            gamma: coeff_gamma(a, b),
        }
    }

    pub fn with_perturbation(k1: u32, k2: u32, pert: Option<&Perturbation>) -> Self {
        let mut t = Self::closed_form(k1, k2);
        let Some(pert) = pert else { return t };
        if pert.split.is_some_and(|s| s != (k1, k2)) {
            return t;
        }
        let bump = |p: &mut HomPoly, i: u32| {
            if let Some(c) = p.coeffs.get_mut(i as usize) {
                *c += &pert.delta;
            }
        };
        match pert.target {
            Coefficient::Alpha => t.alpha += &pert.delta,
            Coefficient::Beta => t.beta += &pert.delta,
            Coefficient::Gamma => t.gamma += &pert.delta,
            Coefficient::P(i) => bump(&mut t.p, i),
            Coefficient::Q(i) => bump(&mut t.q, i),
            Coefficient::R(i) => bump(&mut t.r, i),
        }
        t
    }
}

pub type Param = (u32, u32);

fn reduce_param(level: u32, x: (i64, i64)) -> Param {
    let n = level as i64;
    (x.0.rem_euclid(n) as u32, x.1.rem_euclid(n) as u32)
}

/// One instantiation `(N, k, k1, k2, a, b, c)` of the relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationInstance {
    level: u32,
    weight: u32,
    k1: u32,
    k2: u32,
    a: Param,
    b: Param,
    c: Param,
}

impl RelationInstance {
    /// Builds the instance with `c = -a - b`, reducing all parameters mod `N`.
    pub fn new(level: u32, k1: u32, k2: u32, a: (i64, i64), b: (i64, i64)) -> Result<Self> {
        Self::with_c(level, k1, k2, a, b, (-a.0 - b.0, -a.1 - b.1))
    }

    pub fn with_c(level: u32, k1: u32, k2: u32, a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        let (a, b, c) = (reduce_param(level, a), reduce_param(level, b), reduce_param(level, c));
        let n = level;
        if (a.0 + b.0 + c.0) % n != 0 || (a.1 + b.1 + c.1) % n != 0 {
            return Err(Error::InvalidInstance("a + b + c must vanish mod N".into()));
        }
        for (name, x) in [("a", a), ("b", b), ("c", c)] {
            if x == (0, 0) {
                return Err(Error::InvalidInstance(format!("{name} must be nonzero mod N")));
            }
        }
        Ok(RelationInstance {
            level,
            weight: k1 + k2 + 2,
            k1,
            k2,
            a,
            b,
            c,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn split(&self) -> (u32, u32) {
        (self.k1, self.k2)
    }

    pub fn params(&self) -> (Param, Param, Param) {
        (self.a, self.b, self.c)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level,
            "weight": self.weight,
            "split": [self.k1, self.k2],
            "a": [self.a.0, self.a.1],
            "b": [self.b.0, self.b.1],
            "c": [self.c.0, self.c.1],
        })
    }
}

impl fmt::Display for RelationInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} k={} split=({},{}) a=({},{}) b=({},{}) c=({},{})",
            self.level, self.weight, self.k1, self.k2, self.a.0, self.a.1, self.b.0, self.b.1, self.c.0, self.c.1
        )
    }
}

// ---------------------------------------------------------------------------
// Exact residuals (reference path over Q(zeta_N))
// ---------------------------------------------------------------------------

/// Memoizes `E^(k;N)_a` at a fixed level and order.
pub struct ExpansionCache {
    level: u32,
    order: u32,
    map: HashMap<(u32, Param), QExpansion>,
}

impl ExpansionCache {
    pub fn new(level: u32, order: u32) -> Self {
        ExpansionCache {
            level,
            order,
            map: HashMap::new(),
        }
    }

    pub fn get(&mut self, weight: u32, a: Param) -> Result<&QExpansion> {
        let key = (weight, a);
        if !self.map.contains_key(&key) {
            let idx = EisensteinIndex::new(weight, self.level, a.0 as i64, a.1 as i64)?;
            self.map.insert(key, eisenstein_qexp(&idx, self.order));
        }
        Ok(&self.map[&key])
    }

    fn bracket(&mut self, p: &HomPoly, a: Param, b: Param) -> Result<QExpansion> {
        let d = p.degree();
        let mut acc = QExpansion::zero(self.level, self.order);
        for (i, c) in p.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let i = i as u32;
            let ea = self.get(i + 1, a)?.clone();
            let eb = self.get(d - i + 1, b)?;
            acc = acc.add(&ea.mul(eb)?.scale_rat(c))?;
        }
        Ok(acc)
    }
}

/// `P[a, b] = sum_i c_i E^(i+1;N)_a E^(d-i+1;N)_b` to order `T`.
pub fn bracket(p: &HomPoly, a: (i64, i64), b: (i64, i64), level: u32, order: u32) -> Result<QExpansion> {
    if level == 0 {
        return Err(Error::ZeroLevel);
    }
    ExpansionCache::new(level, order).bracket(p, reduce_param(level, a), reduce_param(level, b))
}

/// LHS minus RHS of the relation at the given instance, with explicit terms.
pub fn relation_residual_with(inst: &RelationInstance, terms: &RelationTerms, order: u32) -> Result<QExpansion> {
    let mut cache = ExpansionCache::new(inst.level, order);
    let (a, b, c) = inst.params();
    let k = inst.weight;
    let mut res = cache.bracket(&terms.p, a, b)?;
    res = res.add(&cache.bracket(&terms.q, b, c)?)?;
    res = res.add(&cache.bracket(&terms.r, c, a)?)?;
    for (coef, x) in [(&terms.alpha, a), (&terms.beta, b), (&terms.gamma, c)] {
        res = res.sub(&cache.get(k, x)?.scale_rat(coef))?;
    }
    Ok(res)
}

/// LHS minus RHS of the relation; zero in `Q(zeta_N)` at every order.
pub fn relation_residual(inst: &RelationInstance, order: u32) -> Result<QExpansion> {
    relation_residual_with(inst, &RelationTerms::closed_form(inst.k1, inst.k2), order)
}

fn nonzero_params(level: u32) -> Vec<Param> {
    (0..level)
        .flat_map(|x| (0..level).map(move |y| (x, y)))
        .filter(|&p| p != (0, 0))
        .collect()
}

/// Ordered nonzero pairs `(a, b)` with `c = -a - b` nonzero.
fn triples(level: u32) -> Vec<(Param, Param)> {
    let ps = nonzero_params(level);
    let mut out = Vec::new();
    for &a in &ps {
        for &b in &ps {
            if (a.0 + b.0) % level != 0 || (a.1 + b.1) % level != 0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Every instance with `2 <= k <= k_max`, every split and every ordered triple.
pub fn enumerate_instances(level: u32, k_max: u32) -> impl Iterator<Item = RelationInstance> {
    let pairs = if level >= 2 { triples(level) } else { Vec::new() };
    (2..=k_max)
        .flat_map(|k| (0..=k - 2).map(move |k1| (k1, k - 2 - k1)))
        .flat_map(move |(k1, k2)| {
            pairs
                .clone()
                .into_iter()
                .map(move |(a, b)| RelationInstance::new(level, k1, k2, widen(a), widen(b)).unwrap())
        })
}

fn widen(p: Param) -> (i64, i64) {
    (p.0 as i64, p.1 as i64)
}

// ---------------------------------------------------------------------------
// Verification reports and scans
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct VerificationReport {
    pub instance: RelationInstance,
    pub order: u32,
    pub residual_zero: bool,
    pub first_nonzero_exponent: Option<u32>,
}

impl VerificationReport {
    pub fn to_json(&self) -> Value {
        json!({
            "instance": self.instance.to_json(),
            "order": self.order,
            "residual_zero": self.residual_zero,
            "first_nonzero_exponent": self.first_nonzero_exponent,
        })
    }
}

/// Verifies one instance on the reference path.
pub fn verify_instance(inst: &RelationInstance, order: u32) -> Result<VerificationReport> {
    let res = relation_residual(inst, order)?;
    let first = res.first_nonzero_exponent();
    Ok(VerificationReport {
        instance: *inst,
        order,
        residual_zero: first.is_none(),
        first_nonzero_exponent: first,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanSummary {
    pub level_max: u32,
    pub weight_max: u32,
    pub order: u32,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    /// Instances that overflowed the integer kernel and were settled on the reference path.
    pub exact_fallbacks: usize,
    pub failures: Vec<VerificationReport>,
}

impl ScanSummary {
    pub fn to_json(&self) -> Value {
        json!({
            "level_max": self.level_max,
            "weight_max": self.weight_max,
            "order": self.order,
            "instances": self.instances,
            "passed": self.passed,
            "failed": self.failed,
            "exact_fallbacks": self.exact_fallbacks,
            "failures": self.failures.iter().map(VerificationReport::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Scan options beyond the ranges.
#[derive(Clone, Debug, Default)]
pub struct ScanOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub perturbation: Option<Perturbation>,
}

/// Verifies every instance with `2 <= N <= level_max` and `2 <= k <= weight_max` at order `T`.
pub fn scan(level_max: u32, weight_max: u32, order: u32, opts: &ScanOptions) -> Result<ScanSummary> {
    let run = || -> Result<Vec<(VerificationReport, bool)>> {
        let mut all = Vec::new();
        for level in 2..=level_max {
            all.extend(scan_level(level, weight_max, order, opts.perturbation.as_ref())?);
        }
        Ok(all)
    };
    let results = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let mut failures: Vec<VerificationReport> = results
        .iter()
        .filter(|(r, _)| !r.residual_zero)
        .map(|(r, _)| r.clone())
        .collect();
    failures.sort();
    let instances = results.len();
    Ok(ScanSummary {
        level_max,
        weight_max,
        order,
        instances,
        passed: instances - failures.len(),
        failed: failures.len(),
        exact_fallbacks: results.iter().filter(|(_, fb)| *fb).count(),
        failures,
    })
}

/// Per-level tables shared across all triples.
struct LevelTables {
    level: u32,
    order: u32,
    series: HashMap<(u32, Param), Option<IntSeries>>,
}

impl LevelTables {
    fn build(level: u32, weight_max: u32, order: u32) -> Self {
        let mut series = HashMap::new();
        for k in 1..=weight_max {
            for p in nonzero_params(level) {
                let idx = EisensteinIndex::new(k, level, p.0 as i64, p.1 as i64).unwrap();
                series.insert((k, p), IntSeries::from_qexp(&eisenstein_qexp(&idx, order)));
            }
        }
        LevelTables { level, order, series }
    }

    fn get(&self, k: u32, p: Param) -> Option<&IntSeries> {
        self.series.get(&(k, p)).and_then(Option::as_ref)
    }
}

fn scan_level(
    level: u32,
    weight_max: u32,
    order: u32,
    pert: Option<&Perturbation>,
) -> Result<Vec<(VerificationReport, bool)>> {
    if weight_max < 2 {
        return Ok(Vec::new());
    }
    let tables = LevelTables::build(level, weight_max, order);
    let groups = triples(level);
    let per_group: Vec<Result<Vec<(VerificationReport, bool)>>> = groups
        .par_iter()
        .map(|&(a, b)| scan_triple(&tables, a, b, weight_max, pert))
        .collect();
    let mut out = Vec::new();
    for g in per_group {
        out.extend(g?);
    }
    Ok(out)
}

fn scan_triple(
    tables: &LevelTables,
    a: Param,
    b: Param,
    weight_max: u32,
    pert: Option<&Perturbation>,
) -> Result<Vec<(VerificationReport, bool)>> {
    let level = tables.level;
    let order = tables.order;
    let c = reduce_param(level, (-(a.0 as i64) - b.0 as i64, -(a.1 as i64) - b.1 as i64));
    let pairs = [(a, b), (b, c), (c, a)];
    let mut products: HashMap<(usize, u32, u32), Option<IntSeries>> = HashMap::new();
    let mut out = Vec::new();

    for k in 2..=weight_max {
        for k1 in 0..=k - 2 {
            let k2 = k - 2 - k1;
            let inst = RelationInstance::new(level, k1, k2, widen(a), widen(b))?;
            let terms = RelationTerms::with_perturbation(k1, k2, pert);
            let fast = residual_fast(tables, &pairs, &mut products, k, &terms);
            let (first, fallback) = match fast {
                Some(first) => (first, false),
                None => (relation_residual_with(&inst, &terms, order)?.first_nonzero_exponent(), true),
            };
            out.push((
                VerificationReport {
                    instance: inst,
                    order,
                    residual_zero: first.is_none(),
                    first_nonzero_exponent: first,
                },
                fallback,
            ));
        }
    }
    Ok(out)
}

/// `Some(first nonzero exponent or None)`, or `None` if the integer kernel overflowed.
fn residual_fast(
    tables: &LevelTables,
    pairs: &[(Param, Param); 3],
    products: &mut HashMap<(usize, u32, u32), Option<IntSeries>>,
    k: u32,
    terms: &RelationTerms,
) -> Option<Option<u32>> {
    let polys = [&terms.p, &terms.q, &terms.r];
    for (slot, poly) in polys.iter().enumerate() {
        let d = poly.degree();
        for (i, coef) in poly.coeffs().iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let (wi, wj) = (i as u32 + 1, d - i as u32 + 1);
            if !products.contains_key(&(slot, wi, wj)) {
                let (x, y) = pairs[slot];
                let prod = tables.get(wi, x)?.mul(tables.get(wj, y)?);
                products.insert((slot, wi, wj), prod);
            }
        }
    }

    let mut combo: Vec<(&Rat, &IntSeries)> = Vec::new();
    for (slot, poly) in polys.iter().enumerate() {
        let d = poly.degree();
        for (i, coef) in poly.coeffs().iter().enumerate() {
            if !coef.is_zero() {
                combo.push((coef, products[&(slot, i as u32 + 1, d - i as u32 + 1)].as_ref()?));
            }
        }
    }
    let neg = [-&terms.alpha, -&terms.beta, -&terms.gamma];
    let rhs = [pairs[0].0, pairs[1].0, pairs[2].0];
    for (coef, x) in neg.iter().zip(rhs) {
        if !coef.is_zero() {
            combo.push((coef, tables.get(k, x)?));
        }
    }
    let residual = IntSeries::combine(tables.level as usize, tables.order as usize, &combo)?;
    residual.first_nonzero_exponent()
}

// ---------------------------------------------------------------------------
// Recurrence identities
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceEntry {
    pub k1: u32,
    pub k2: u32,
    pub identity: &'static str,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecurrenceReport {
    pub entries: Vec<RecurrenceEntry>,
}

impl RecurrenceReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RecurrenceEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "checked": self.entries.len(),
            "all_pass": self.all_pass(),
            "failures": self.failures().map(|e| json!({"split": [e.k1, e.k2], "identity": e.identity})).collect::<Vec<_>>(),
        })
    }
}

/// Checks the derivative conditions linking `(k1, k2)` to `(k1-1, k2)` and
/// `(k1, k2-1)` for every `k1 + k2 <= k_max - 2`, in exact arithmetic.
pub fn recurrence_check(k_max: u32) -> RecurrenceReport {
    let mut report = RecurrenceReport::default();
    for total in 0..=k_max.saturating_sub(2) {
        for k1 in 0..=total {
            let k2 = total - k1;
            check_split(k1, k2, &mut report.entries);
        }
    }
    report
}

fn check_split(k1: u32, k2: u32, out: &mut Vec<RecurrenceEntry>) {
    let (a, b) = (k1 as i64, k2 as i64);
    let km1 = rat_int(a + b + 1);
    let (fa, fb) = (rat_int(a), rat_int(b));
    let (p, q, r) = (poly_p(a, b), poly_q(a, b), poly_r(a, b));
    let (al, be, ga) = (coeff_alpha(a, b), coeff_beta(a, b), coeff_gamma(a, b));
    let mut push = |identity: &'static str, pass: bool| out.push(RecurrenceEntry { k1, k2, identity, pass });

    // Differentiation in u-bar.
    push("-dQ/dY = k1 Q[k1-1,k2]", q.d_dy().scale(&rat_int(-1)).same_as(&poly_q(a - 1, b).scale(&fa)));
    push("(dY - dX) R = k1 R[k1-1,k2]", (&r.d_dy() - &r.d_dx()).same_as(&poly_r(a - 1, b).scale(&fa)));
    push("(k-1) alpha + R(0,1) = k1 alpha[k1-1,k2]", &km1 * &al + r.at_y() == &fa * coeff_alpha(a - 1, b));
    push("Q(1,0) - P(0,1) = k1 beta[k1-1,k2]", q.at_x() - p.at_y() == &fa * coeff_beta(a - 1, b));
    push("-(k-1) gamma - R(1,0) = k1 gamma[k1-1,k2]", -(&km1 * &ga) - r.at_x() == &fa * coeff_gamma(a - 1, b));

    // Differentiation in v-bar.
    push("(dX - dY) Q = k2 Q[k1,k2-1]", (&q.d_dx() - &q.d_dy()).same_as(&poly_q(a, b - 1).scale(&fb)));
    push("-dR/dX = k2 R[k1,k2-1]", r.d_dx().scale(&rat_int(-1)).same_as(&poly_r(a, b - 1).scale(&fb)));
    push("R(0,1) - P(1,0) = k2 alpha[k1,k2-1]", r.at_y() - p.at_x() == &fb * coeff_alpha(a, b - 1));
    push("(k-1) beta + Q(1,0) = k2 beta[k1,k2-1]", &km1 * &be + q.at_x() == &fb * coeff_beta(a, b - 1));
    push("-(k-1) gamma - Q(0,1) = k2 gamma[k1,k2-1]", -(&km1 * &ga) - q.at_y() == &fb * coeff_gamma(a, b - 1));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_polynomials() {
        assert_eq!(poly_q(1, 1), HomPoly::from_ints(&[0, -1, -1]));
        for f in [poly_p, poly_q, poly_r] {
            assert_eq!(f(0, 0), HomPoly::from_ints(&[1]));
        }
        assert_eq!(poly_r(0, 2), HomPoly::from_ints(&[1, 2, 1]));
        assert!(poly_q(-1, 3).is_zero());
        assert_eq!(poly_q(-1, 3).degree(), 2);
    }

    #[test]
    fn closed_form_constants() {
        assert_eq!(coeff_alpha(0, 0), rat_int(-1));
        assert_eq!(coeff_beta(0, 0), rat_int(-1));
        assert_eq!(coeff_gamma(0, 0), rat_int(-1));
        assert_eq!(coeff_alpha(1, 0), rat_int(-1));
        assert_eq!(coeff_beta(1, 0), rat(1, 2));
        assert_eq!(coeff_gamma(1, 0), rat(1, 2));
        assert_eq!(coeff_gamma(2, 3), rat(1, 60));
        assert!(coeff_alpha(-1, 2).is_zero());
        assert!(coeff_gamma(3, -1).is_zero());
    }

    #[test]
    fn hompoly_calculus() {
        // X^2 Y - 3 Y^3, degree 3.
        let p = HomPoly::from_ints(&[-3, 0, 1, 0]);
        assert_eq!(p.d_dx(), HomPoly::from_ints(&[0, 2, 0]));
        assert_eq!(p.d_dy(), HomPoly::from_ints(&[-9, 0, 1]));
        assert_eq!(p.at_y(), rat_int(-3));
        assert_eq!(p.at_x(), rat_int(0));
        assert_eq!(p.swap(), HomPoly::from_ints(&[0, 1, 0, -3]));
        assert!(HomPoly::from_ints(&[5]).d_dx().is_zero());
        assert_eq!(p.to_string(), "(1)*X^2*Y + (-3)*Y^3");
    }

    #[test]
    fn instance_validation() {
        assert!(RelationInstance::new(3, 0, 0, (1, 0), (0, 1)).is_ok());
        let e = RelationInstance::new(3, 0, 0, (1, 0), (2, 0)).unwrap_err();
        assert!(matches!(e, Error::InvalidInstance(_)));
        assert!(RelationInstance::new(3, 0, 0, (0, 0), (1, 1)).is_err());
        assert!(RelationInstance::with_c(3, 0, 0, (1, 0), (0, 1), (1, 1)).is_err());
        let inst = RelationInstance::new(3, 1, 2, (1, 0), (0, 1)).unwrap();
        assert_eq!(inst.weight(), 5);
        assert_eq!(inst.params().2, (2, 2));
    }

    #[test]
    fn enumeration_counts_match_brute_force() {
        assert_eq!(enumerate_instances(1, 6).count(), 0);
        for level in 2..=4u32 {
            let mut brute = 0;
            for a1 in 0..level {
                for a2 in 0..level {
                    for b1 in 0..level {
                        for b2 in 0..level {
                            let c = ((2 * level - a1 - b1) % level, (2 * level - a2 - b2) % level);
                            if (a1, a2) != (0, 0) && (b1, b2) != (0, 0) && c != (0, 0) {
                                brute += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(enumerate_instances(level, 2).count(), brute, "N={level}");
            // weights 2..=4 contribute 1 + 2 + 3 splits.
            assert_eq!(enumerate_instances(level, 4).count(), 6 * brute);
        }
        assert_eq!(enumerate_instances(2, 2).count(), 6);
        assert_eq!(enumerate_instances(3, 2).count(), 56);
    }

    #[test]
    fn weight_two_relation_at_level_three() {
        let inst = RelationInstance::new(3, 0, 0, (1, 0), (0, 1)).unwrap();
        let res = relation_residual(&inst, 40).unwrap();
        assert!(res.is_zero());
        assert_eq!(res.order(), 40);
    }

    #[test]
    fn weight_two_form_by_hand() {
        // E1_a E1_b + E1_b E1_c + E1_c E1_a + E2_a + E2_b + E2_c = 0.
        let (n, t) = (4, 30);
        let (a, b, c) = ((1, 2), (3, 3), (0, 3));
        let mut cache = ExpansionCache::new(n, t);
        let mut sum = QExpansion::zero(n, t);
        for (x, y) in [(a, b), (b, c), (c, a)] {
            let ex = cache.get(1, x).unwrap().clone();
            sum = sum.add(&ex.mul(cache.get(1, y).unwrap()).unwrap()).unwrap();
        }
        for x in [a, b, c] {
            sum = sum.add(cache.get(2, x).unwrap()).unwrap();
        }
        assert!(sum.is_zero());
    }

    #[test]
    fn corrupted_gamma_leaves_a_residual() {
        let inst = RelationInstance::new(3, 0, 0, (1, 0), (0, 1)).unwrap();
        let pert = Perturbation::plus_one(Coefficient::Gamma);
        let terms = RelationTerms::with_perturbation(0, 0, Some(&pert));
        let res = relation_residual_with(&inst, &terms, 20).unwrap();
        assert!(!res.is_zero());
        assert!(res.first_nonzero_exponent().unwrap() < 20);
    }

    #[test]
    fn bracket_symmetry_and_linearity() {
        let (n, t) = (5, 25);
        let (a, b) = ((1, 3), (2, 0));
        let p = HomPoly::from_ints(&[2, -1, 0, 3]);
        let lhs = bracket(&p, a, b, n, t).unwrap();
        let rhs = bracket(&p.swap(), b, a, n, t).unwrap();
        assert!(lhs.field_eq(&rhs));

        let x = HomPoly::from_ints(&[0, 1]);
        let y = HomPoly::from_ints(&[1, 0]);
        let sum = bracket(&(&x + &y), a, b, n, t).unwrap();
        let parts = bracket(&x, a, b, n, t).unwrap().add(&bracket(&y, a, b, n, t).unwrap()).unwrap();
        assert!(sum.field_eq(&parts));

        // A degree-0 bracket is the product of two weight-one series.
        let one = bracket(&HomPoly::from_ints(&[1]), a, b, n, t).unwrap();
        let e1a = eisenstein_qexp(&EisensteinIndex::new(1, n, 1, 3).unwrap(), t);
        let e1b = eisenstein_qexp(&EisensteinIndex::new(1, n, 2, 0).unwrap(), t);
        assert!(one.field_eq(&e1a.mul(&e1b).unwrap()));
    }

    #[test]
    fn bracket_rejects_non_holomorphic_constituent() {
        // X [a, 0] involves E^(2)_0 through the weight-two slot on the right.
        let p = HomPoly::from_ints(&[1, 0]);
        assert_eq!(bracket(&p, (1, 0), (0, 0), 3, 10).unwrap_err(), Error::NonHolomorphic);
    }

    #[test]
    fn recurrences_hold_in_low_degree() {
        let report = recurrence_check(6);
        assert!(report.all_pass(), "{:?}", report.failures().collect::<Vec<_>>());
        // 1 + 2 + 3 + 4 + 5 splits, ten identities each.
        assert_eq!(report.entries.len(), 150);
    }

    #[test]
    fn recurrence_example_values() {
        // (k1, k2) = (1, 0): -d/dY(-X - Y) = 1 = 1 * Q_{0,0}.
        assert_eq!(poly_q(1, 0).d_dy().scale(&rat_int(-1)), HomPoly::from_ints(&[1]));
        // 2 alpha_{1,0} + R_{1,0}(0,1) = -1 = alpha_{0,0}.
        assert_eq!(rat_int(2) * coeff_alpha(1, 0) + poly_r(1, 0).at_y(), coeff_alpha(0, 0));
    }

    #[test]
    fn fast_scan_matches_reference_on_small_levels() {
        let summary = scan(3, 4, 20, &ScanOptions::default()).unwrap();
        assert_eq!(summary.failed, 0);
        assert_eq!(summary.instances, 6 * (6 + 56));
        assert_eq!(summary.exact_fallbacks, 0);
    }
}
