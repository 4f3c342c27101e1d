//! Double-precision evaluation of `E^(k)_z(tau)` at arbitrary real
//! coordinates `z = x1 tau + x2`, and numerical checks of the analytic
//! statements: the continuous three-term relation, the `d/dz-bar`
//! relations, modularity and the behaviour as `z -> 0`.
//!
//! Two independent evaluators are provided. The Fourier evaluator sums the
//! `mu` series in closed form for every `nu` below the cutoff; the lattice
//! evaluator (`k >= 3` only) sums `e(m x2 - n x1)/(m tau + n)^k` over the
//! lattice with a smooth radial cutoff, which converges much faster than a
//! sharp box.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::eisenstein::bernoulli_numbers;
use crate::error::{Error, Result};
use crate::relations::{coeff_alpha, coeff_beta, coeff_gamma, poly_p, poly_q, poly_r, HomPoly};

/// Tolerance for finite-difference checks.
pub const FD_TOL: f64 = 1e-5;
/// Tolerance for the limits as `z -> 0`.
pub const ASYMPTOTIC_TOL: f64 = 1e-6;
/// Inner radius (as a fraction of the cutoff) below which lattice terms carry full weight.
const LATTICE_FLAT: f64 = 0.3;

/// `z = x1 tau + x2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    pub x1: f64,
    pub x2: f64,
}

impl TorusPoint {
    pub fn new(x1: f64, x2: f64) -> Self {
        TorusPoint { x1, x2 }
    }

    /// Coordinates of the complex point `z` with respect to `(tau, 1)`.
    pub fn from_z(z: Complex64, tau: Complex64) -> Self {
        let x1 = z.im / tau.im;
        TorusPoint { x1, x2: z.re - x1 * tau.re }
    }

    pub fn z(&self, tau: Complex64) -> Complex64 {
        tau * self.x1 + self.x2
    }

    pub fn is_lattice(&self) -> bool {
        self.x1.fract() == 0.0 && self.x2.fract() == 0.0
    }

    /// Distance from `z` to the nearest point of `Z tau + Z`.
    pub fn lattice_distance(&self, tau: Complex64) -> f64 {
        let m0 = self.x1.round() as i64;
        let mut best = f64::INFINITY;
        for m in m0 - 1..=m0 + 1 {
            let re = (self.x1 - m as f64) * tau.re + self.x2;
            let n0 = re.round() as i64;
            for n in n0 - 1..=n0 + 1 {
                let d = TorusPoint::new(self.x1 - m as f64, self.x2 - n as f64).z(tau).norm();
                best = best.min(d);
            }
        }
        best
    }

    pub fn neg(&self) -> Self {
        TorusPoint::new(-self.x1, -self.x2)
    }

    pub fn add(&self, o: &TorusPoint) -> Self {
        TorusPoint::new(self.x1 + o.x1, self.x2 + o.x2)
    }

    /// `x gamma` for the row vector `x`.
    pub fn act(&self, g: [[i64; 2]; 2]) -> Self {
        TorusPoint::new(
            self.x1 * g[0][0] as f64 + self.x2 * g[1][0] as f64,
            self.x1 * g[0][1] as f64 + self.x2 * g[1][1] as f64,
        )
    }

    fn to_json(self) -> Value {
        json!([self.x1, self.x2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericConfig {
    pub tau: Complex64,
    /// Largest `nu` (and so the smallest omitted exponent) in the Fourier sums.
    pub fourier_terms: u32,
    /// Radius of the lattice sum in units of `|m tau + n|`.
    pub lattice_cutoff: u32,
    /// Tolerance of the relation and modularity checks.
    pub tol: f64,
    /// Tolerance of the finite-difference checks.
    pub fd_tol: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            tau: Complex64::new(0.3, 1.1),
            fourier_terms: 80,
            lattice_cutoff: 200,
            tol: 1e-8,
            fd_tol: FD_TOL,
        }
    }
}

impl NumericConfig {
    pub fn with_tau(tau: Complex64) -> Self {
        NumericConfig {
            tau,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau.im <= 0.0 || !self.tau.im.is_finite() {
            return Err(Error::NotUpperHalfPlane(self.tau.im));
        }
        if self.fourier_terms == 0 || self.lattice_cutoff == 0 {
            return Err(Error::Config("cutoffs must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.fd_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Bound on the Fourier tail for weight `k`: `T^(k-1) |q|^T / (1 - |q|)^2`.
    pub fn tail_estimate(&self, k: u32) -> f64 {
        let t = self.fourier_terms as f64;
        let aq = (-2.0 * PI * self.tau.im).exp();
        2.0 * t.powi(k as i32 - 1) * aq.powf(t) / (1.0 - aq).powi(2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericReport {
    pub check: String,
    pub params: Value,
    pub residual: f64,
    pub tail_estimate: f64,
    pub pass: bool,
}

impl NumericReport {
    fn new(check: &str, params: Value, residual: f64, tail_estimate: f64, tol: f64) -> Self {
        NumericReport {
            check: check.into(),
            params,
            residual,
            tail_estimate,
            pass: residual.is_finite() && residual < tol,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": self.check,
            "params": self.params,
            "residual": self.residual,
            "tail_estimate": self.tail_estimate,
            "pass": self.pass,
        })
    }
}

fn tau_json(tau: Complex64) -> Value {
    json!([tau.re, tau.im])
}

/// `e(x) = exp(2 pi i x)`.
fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// `exp(s) - 1` without cancellation for small `s`.
fn expm1(s: Complex64) -> Complex64 {
    let (a, b) = (s.re, s.im);
    let half = (b / 2.0).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// `B_k(t)` in floating point.
fn bernoulli_poly_f64(k: u32, t: f64) -> f64 {
    let b = bernoulli_numbers(k);
    let mut binom = 1.0;
    let mut acc = 0.0;
    for (j, bj) in b.iter().enumerate() {
        acc += binom * bj.to_f64().unwrap() * t.powi((k as usize - j) as i32);
        binom = binom * (k as usize - j) as f64 / (j + 1) as f64;
    }
    acc
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// `sum_{nu in start + Z_{>=0}, 0 < nu < T} nu^(k-1) w/(1-w)`, `w = e(x2) q^nu`.
fn geometric_branch(k: u32, start: f64, x2: f64, tau: Complex64, terms: u32) -> Complex64 {
    let mut acc = Complex64::zero();
    let mut nu = if start == 0.0 { 1.0 } else { start };
    while nu < terms as f64 {
        // w = exp(s) with s = 2 pi i (x2 + nu tau).
        let s = Complex64::new(0.0, 2.0 * PI) * (tau * nu + x2);
        let w = s.exp();
        acc += w / (-expm1(s)) * nu.powi(k as i32 - 1);
        nu += 1.0;
    }
    acc
}

/// `E^(k)_z(tau)` from its Fourier expansion.
pub fn eval_e_fourier(k: u32, p: TorusPoint, cfg: &NumericConfig) -> Result<Complex64> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::InvalidIndex("weight must be at least 1".into()));
    }
    if k == 2 && p.is_lattice() {
        return Err(Error::LatticePoint);
    }
    let tau = cfg.tau;
    let x1 = frac(p.x1);
    let constant = if k >= 2 {
        Complex64::from(bernoulli_poly_f64(k, x1) / k as f64)
    } else if p.is_lattice() {
        Complex64::zero()
    } else if x1 == 0.0 {
        // -(1/2)(1 + e(x2))/(1 - e(x2)).
        let s = Complex64::new(0.0, 2.0 * PI * p.x2);
        let em1 = expm1(s);
        -(em1 + 2.0) / (-em1) * 0.5
    } else {
        Complex64::from(x1 - 0.5)
    };
    let plus = geometric_branch(k, x1, p.x2, tau, cfg.fourier_terms);
    let minus = geometric_branch(k, frac(-p.x1), -p.x2, tau, cfg.fourier_terms);
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    Ok(constant - plus + minus * sign)
}

/// Smooth step from 1 (at `t <= LATTICE_FLAT`) to 0 (at `t >= 1`).
fn lattice_weight(t: f64) -> f64 {
    if t <= LATTICE_FLAT {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let x = (t - LATTICE_FLAT) / (1.0 - LATTICE_FLAT);
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    b / (a + b)
}

/// `E^(k)_z(tau) = -(k-1)!/(-2 pi i)^k sum' e(m x2 - n x1)/(m tau + n)^k` for `k >= 3`.
pub fn eval_e_lattice(k: u32, p: TorusPoint, cfg: &NumericConfig) -> Result<Complex64> {
    cfg.validate()?;
    if k < 3 {
        return Err(Error::LatticeWeight(k));
    }
    let tau = cfg.tau;
    let r = cfg.lattice_cutoff as f64;
    let m_max = (r / tau.im).ceil() as i64 + 2;
    let mut sum = Complex64::zero();
    for m in -m_max..=m_max {
        let centre = -(m as f64) * tau.re;
        let lo = (centre - r).floor() as i64 - 1;
        let hi = (centre + r).ceil() as i64 + 1;
        let mut row = Complex64::zero();
        for n in lo..=hi {
            if m == 0 && n == 0 {
                continue;
            }
            let lam = tau * m as f64 + n as f64;
            let w = lattice_weight(lam.norm() / r);
            if w == 0.0 {
                continue;
            }
            row += e(m as f64 * p.x2 - n as f64 * p.x1) / lam.powi(k as i32) * w;
        }
        sum += row;
    }
    let fact: f64 = (1..k).map(f64::from).product();
    let pref = -fact / Complex64::new(0.0, -2.0 * PI).powi(k as i32);
    Ok(sum * pref)
}

fn check_point(p: &TorusPoint, what: &str) -> Result<()> {
    if p.is_lattice() {
        return Err(Error::InvalidInstance(format!("{what} must not be a lattice point")));
    }
    Ok(())
}

/// `P[u, v] = sum_i c_i E^(i+1)_u E^(d-i+1)_v` at continuous parameters.
pub fn bracket_numeric(p: &HomPoly, u: TorusPoint, v: TorusPoint, cfg: &NumericConfig) -> Result<Complex64> {
    let d = p.degree();
    let mut acc = Complex64::zero();
    for (i, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let i = i as u32;
        let term = eval_e_fourier(i + 1, u, cfg)? * eval_e_fourier(d - i + 1, v, cfg)?;
        acc += term * c.to_f64().unwrap();
    }
    Ok(acc)
}

/// `|P[u,v] + Q[v,w] + R[w,u] - alpha E_u - beta E_v - gamma E_w|` with `w = -u - v`.
pub fn check_relation_numeric(
    k1: u32,
    k2: u32,
    u: TorusPoint,
    v: TorusPoint,
    cfg: &NumericConfig,
) -> Result<NumericReport> {
    let w = u.add(&v).neg();
    check_point(&u, "u")?;
    check_point(&v, "v")?;
    check_point(&w, "u + v")?;
    let (a, b) = (k1 as i64, k2 as i64);
    let k = k1 + k2 + 2;
    let lhs = bracket_numeric(&poly_p(a, b), u, v, cfg)?
        + bracket_numeric(&poly_q(a, b), v, w, cfg)?
        + bracket_numeric(&poly_r(a, b), w, u, cfg)?;
    let rhs = eval_e_fourier(k, u, cfg)? * coeff_alpha(a, b).to_f64().unwrap()
        + eval_e_fourier(k, v, cfg)? * coeff_beta(a, b).to_f64().unwrap()
        + eval_e_fourier(k, w, cfg)? * coeff_gamma(a, b).to_f64().unwrap();
    let params = json!({"split": [k1, k2], "u": u.to_json(), "v": v.to_json(), "tau": tau_json(cfg.tau)});
    Ok(NumericReport::new("relation", params, (lhs - rhs).norm(), cfg.tail_estimate(k), cfg.tol))
}

fn guard_step(p: &TorusPoint, h: f64, tau: Complex64) -> Result<()> {
    let distance = p.lattice_distance(tau);
    if h.is_nan() || h <= 0.0 || h >= 0.01 * distance {
        return Err(Error::StepTooLarge { h, distance });
    }
    Ok(())
}

/// `-(tau - tau-bar) d/dz-bar f` at `p` by central differences with step `h`,
/// using `d/dz-bar = (d/dx + i d/dy)/2` for `z = x + i y`.
pub fn dbar_fd<F>(f: F, p: TorusPoint, tau: Complex64, h: f64) -> Result<Complex64>
where
    F: Fn(TorusPoint) -> Result<Complex64>,
{
    // z + h and z + i h in torus coordinates.
    let dx = TorusPoint::new(0.0, h);
    let dy = TorusPoint::new(h / tau.im, -h * tau.re / tau.im);
    let fx = (f(p.add(&dx))? - f(p.add(&dx.neg()))?) / (2.0 * h);
    let fy = (f(p.add(&dy))? - f(p.add(&dy.neg()))?) / (2.0 * h);
    let dbar = (fx + Complex64::i() * fy) * 0.5;
    Ok(-Complex64::new(0.0, 2.0 * tau.im) * dbar)
}

/// `-(tau - tau-bar) dE^(k)_z/dz-bar` against `1` (`k = 1`) or `(k-1) E^(k-1)_z`.
pub fn check_diff_relation(k: u32, p: TorusPoint, cfg: &NumericConfig, h: f64) -> Result<NumericReport> {
    cfg.validate()?;
    check_point(&p, "z")?;
    guard_step(&p, h, cfg.tau)?;
    let fd = dbar_fd(|x| eval_e_fourier(k, x, cfg), p, cfg.tau, h)?;
    let target = if k == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        eval_e_fourier(k - 1, p, cfg)? * (k - 1) as f64
    };
    let params = json!({"weight": k, "z": p.to_json(), "h": h, "tau": tau_json(cfg.tau)});
    Ok(NumericReport::new("diff", params, (fd - target).norm(), cfg.tail_estimate(k), cfg.fd_tol))
}

/// Both derivative formulas for `P[u, v]`:
/// `-(tau - tau-bar) d/du-bar P[u,v] = (dP/dX)[u,v] + P(0,1) E^(k-1)_v` and
/// `-(tau - tau-bar) d/dv-bar P[u,v] = (dP/dY)[u,v] + P(1,0) E^(k-1)_u`.
/// The report residual is the larger of the two errors; `params` carries both.
pub fn check_diff_bracket(
    p: &HomPoly,
    u: TorusPoint,
    v: TorusPoint,
    cfg: &NumericConfig,
    h: f64,
) -> Result<NumericReport> {
    cfg.validate()?;
    check_point(&u, "u")?;
    check_point(&v, "v")?;
    guard_step(&u, h, cfg.tau)?;
    guard_step(&v, h, cfg.tau)?;
    let k = p.degree() + 2;
    let at_y = p.at_y().to_f64().unwrap();
    let at_x = p.at_x().to_f64().unwrap();

    let fd_u = dbar_fd(|x| bracket_numeric(p, x, v, cfg), u, cfg.tau, h)?;
    let mut target_u = eval_e_fourier(k - 1, v, cfg)? * at_y;
    let mut target_v = eval_e_fourier(k - 1, u, cfg)? * at_x;
    if k > 2 {
        target_u += bracket_numeric(&p.d_dx(), u, v, cfg)?;
        target_v += bracket_numeric(&p.d_dy(), u, v, cfg)?;
    }
    let fd_v = dbar_fd(|x| bracket_numeric(p, u, x, cfg), v, cfg.tau, h)?;
    let (eu, ev) = ((fd_u - target_u).norm(), (fd_v - target_v).norm());
    let params = json!({
        "poly": p.to_string(),
        "u": u.to_json(),
        "v": v.to_json(),
        "h": h,
        "tau": tau_json(cfg.tau),
        "error_u": eu,
        "error_v": ev,
    });
    Ok(NumericReport::new("bracket", params, eu.max(ev), cfg.tail_estimate(k), cfg.fd_tol))
}

/// `|E_x(gamma tau) - (c tau + d)^k E_(x gamma)(tau)|` where `E_x(tau) = E^(k)_(x1 tau + x2)(tau)`.
pub fn check_modularity(k: u32, x: TorusPoint, gamma: [[i64; 2]; 2], cfg: &NumericConfig) -> Result<NumericReport> {
    cfg.validate()?;
    let [[a, b], [c, d]] = gamma;
    let det = a * d - b * c;
    if det != 1 {
        return Err(Error::NotUnimodular(det));
    }
    let tau = cfg.tau;
    let gtau = (tau * a as f64 + b as f64) / (tau * c as f64 + d as f64);
    let cfg_g = NumericConfig { tau: gtau, ..*cfg };
    let lhs = eval_e_fourier(k, x, &cfg_g)?;
    let rhs = eval_e_fourier(k, x.act(gamma), cfg)? * (tau * c as f64 + d as f64).powi(k as i32);
    let tail = cfg.tail_estimate(k).max(cfg_g.tail_estimate(k));
    let params = json!({
        "weight": k,
        "x": x.to_json(),
        "gamma": gamma,
        "tau": tau_json(tau),
        "gamma_tau": tau_json(gtau),
    });
    Ok(NumericReport::new("modularity", params, (lhs - rhs).norm(), tail, cfg.tol))
}

/// `G_2(tau) = -1/24 + sum_{m, n >= 1} n q^(mn)`.
pub fn g2(tau: Complex64, terms: u32) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let mut acc = Complex64::new(-1.0 / 24.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..=terms {
        qn *= q;
        acc += qn * n as f64 / (Complex64::new(1.0, 0.0) - qn);
    }
    acc
}

/// Directions `(x1, x2)` of the rays `z_j = t_j (x1 tau + x2)` used for the limits.
pub const ASYMPTOTIC_RAYS: [(f64, f64); 3] = [
    (std::f64::consts::FRAC_1_SQRT_2, 0.577_350_269_189_625_8),
    (-0.447_213_595_499_958, 0.377_964_473_009_227_2),
    (0.0, 1.0),
];

/// Scales `t_j` of the sequence approaching `z = 0`.
pub const ASYMPTOTIC_SCALES: [f64; 6] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// `k = 1`: `E^(1)_z - 1/(2 pi i z) = eps(z)` with `eps(z)/z` bounded; the
/// residual is `|eps|` at the smallest `z` and the check also requires
/// `|eps/z|` not to grow along each ray.
/// `k = 2`: `E^(2)_z - x1/(2 pi i z) -> -2 G_2(tau)`; the residual is the
/// distance to the limit at the smallest `z`.
pub fn check_asymptotics(k: u32, cfg: &NumericConfig) -> Result<NumericReport> {
    cfg.validate()?;
    if !(k == 1 || k == 2) {
        return Err(Error::InvalidIndex(format!("asymptotics are defined for weight 1 or 2, got {k}")));
    }
    let tau = cfg.tau;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let limit = if k == 1 {
        Complex64::zero()
    } else {
        -g2(tau, cfg.fourier_terms) * 2.0
    };
    let mut residual: f64 = 0.0;
    let mut bounded = true;
    let mut ratios = Vec::new();
    for (d1, d2) in ASYMPTOTIC_RAYS {
        let mut ray_ratios = Vec::new();
        for t in ASYMPTOTIC_SCALES {
            let p = TorusPoint::new(t * d1, t * d2);
            let z = p.z(tau);
            let principal = if k == 1 { 1.0 / (two_pi_i * z) } else { p.x1 / (two_pi_i * z) };
            let eps = eval_e_fourier(k, p, cfg)? - principal - limit;
            ray_ratios.push(eps.norm() / z.norm());
            if t == *ASYMPTOTIC_SCALES.last().unwrap() {
                residual = residual.max(eps.norm());
            }
        }
        let first = ray_ratios[0];
        bounded &= ray_ratios.iter().all(|&r| r <= 10.0 * first + 1.0);
        ratios.push(ray_ratios);
    }
    let params = json!({
        "weight": k,
        "tau": tau_json(tau),
        "limit": [limit.re, limit.im],
        "rays": ASYMPTOTIC_RAYS.iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
        "scales": ASYMPTOTIC_SCALES,
        "eps_over_z": ratios,
        "bounded": bounded,
    });
    let mut report = NumericReport::new("asymptotics", params, residual, cfg.tail_estimate(k), ASYMPTOTIC_TOL);
    report.pass &= bounded;
    Ok(report)
}
