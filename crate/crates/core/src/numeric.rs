//! High-precision Weierstrass ℘ evaluation from the invariants (g2, g3) and
//! the vanishing oracle for identities the symbolic layer does not close.
//!
//! ℘ is summed from its Laurent expansion at the origin, so only small
//! arguments are ever evaluated; no periods are computed.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffop::DiffOp;
use crate::elliptic::{Argument, EllipticPoly};
use crate::random::argument_pool;
use crate::scalars::{BigComplex, Float, Rational, MIN_PRECISION_BITS};

pub const DEFAULT_SAMPLE_SCALE: f64 = 0.25;
const MAX_SERIES_TERMS: usize = 600;
const GUARD_BITS: usize = 32;
const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("degenerate curve: g2^3 = 27 g3^2 for (g2, g3) = ({0}, {1})")]
    DegenerateCurve(Rational, Rational),
    #[error("precision {0} is below the minimum of {MIN_PRECISION_BITS} bits")]
    PrecisionTooLow(usize),
    #[error("series for argument of modulus {0:.3e} did not converge")]
    NonConvergent(f64),
    #[error("argument is zero")]
    ZeroArgument,
    #[error("root finding for 4z^3 - g2 z - g3 failed: {0}")]
    RootFinding(String),
    #[error("could not draw a valid sample point after {0} attempts")]
    Sampling(usize),
    #[error("sample point has {got} variables but the polynomial needs {need}")]
    PointTooShort { got: usize, need: usize },
}

/// A numerically realized curve y² = 4x³ − g2 x − g3.
#[derive(Debug, Clone)]
pub struct EllipticContext {
    g2: Rational,
    g3: Rational,
    precision_bits: usize,
    sample_scale: f64,
    g2c: BigComplex,
    g3c: BigComplex,
    /// Laurent coefficients c_2, c_3, … at working precision.
    coeffs: Vec<Float>,
}

pub fn discriminant(g2: &Rational, g3: &Rational) -> Rational {
    g2.pow(3) - Rational::from_int(27) * g3.pow(2)
}

/// Exact Laurent coefficients of ℘ up to `c_{last}`; index 0 holds c_2.
pub fn laurent_coefficients(g2: &Rational, g3: &Rational, last: usize) -> Vec<Rational> {
    let mut c: Vec<Rational> = Vec::with_capacity(last.saturating_sub(1));
    for k in 2..=last {
        let v = match k {
            2 => g2 * &Rational::new(1, 20),
            3 => g3 * &Rational::new(1, 28),
            _ => {
                let s: Rational = (2..=k - 2).map(|m| &c[m - 2] * &c[k - m - 2]).sum();
                s * Rational::new(3, ((2 * k + 1) * (k - 3)) as i64)
            }
        };
        c.push(v);
    }
    c
}

impl EllipticContext {
    pub fn new(g2: Rational, g3: Rational, precision_bits: usize) -> Result<Self, NumericError> {
        Self::with_scale(g2, g3, precision_bits, DEFAULT_SAMPLE_SCALE)
    }

    pub fn with_scale(
        g2: Rational,
        g3: Rational,
        precision_bits: usize,
        sample_scale: f64,
    ) -> Result<Self, NumericError> {
        if precision_bits < MIN_PRECISION_BITS {
            return Err(NumericError::PrecisionTooLow(precision_bits));
        }
        if discriminant(&g2, &g3).is_zero() {
            return Err(NumericError::DegenerateCurve(g2, g3));
        }
        let work = precision_bits + GUARD_BITS;
        // The float recurrence only adds same-signed magnitudes up to cancellation
        // in c_3 terms; guard bits cover the loss.
        let c2 = (&g2 * &Rational::new(1, 20)).to_float(work);
        let c3 = (&g3 * &Rational::new(1, 28)).to_float(work);
        let mut coeffs = vec![c2, c3];
        for k in 4..(MAX_SERIES_TERMS + 2) {
            let mut s = Rational::zero().to_float(work);
            for m in 2..=k - 2 {
                s += &coeffs[m - 2] * &coeffs[k - m - 2];
            }
            let f = Rational::new(3, ((2 * k + 1) * (k - 3)) as i64).to_float(work);
            coeffs.push(fix(s * f, work));
        }
        Ok(EllipticContext {
            g2c: BigComplex::from_rational(&g2, precision_bits),
            g3c: BigComplex::from_rational(&g3, precision_bits),
            g2,
            g3,
            precision_bits,
            sample_scale,
            coeffs,
        })
    }

    pub fn default_contexts(precision_bits: usize) -> Result<Vec<Self>, NumericError> {
        [(4, 1, 0, 1), (0, 1, 4, 1), (7, 3, 5, 7)]
            .into_iter()
            .map(|(a, b, c, d)| Self::new(Rational::new(a, b), Rational::new(c, d), precision_bits))
            .collect()
    }

    pub fn g2(&self) -> &Rational {
        &self.g2
    }

    pub fn g3(&self) -> &Rational {
        &self.g3
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    pub fn sample_scale(&self) -> f64 {
        self.sample_scale
    }

    pub fn with_sample_scale(&self, sample_scale: f64) -> Self {
        EllipticContext { sample_scale, ..self.clone() }
    }

    /// Acceptance threshold for |value| / witness.
    pub fn threshold(&self) -> f64 {
        (-(self.precision_bits as f64) / 2.0).exp2()
    }

    /// ℘(z) and ℘′(z) together.
    pub fn wp_pair(&self, z: &BigComplex) -> Result<(BigComplex, BigComplex), NumericError> {
        if z.is_zero() {
            return Err(NumericError::ZeroArgument);
        }
        let p = self.precision_bits;
        let work = p + GUARD_BITS;
        let zr = to_work(z, work);
        let w = mul(&zr, &zr, work);
        let inv_w = inv(&w, work);
        let inv_z = inv(&zr, work);
        let mut wp = inv_w.clone();
        // −2 z⁻³
        let mut wpp = scale_i(&mul(&inv_w, &inv_z, work), -2, work);
        let mut wpow = one_f(work); // w^(k−2)
        let tol = (-(work as f64)).exp2();
        let mut small_run = 0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = i + 2;
            // c_k z^(2k−2) = c_k w^(k−1); derivative (2k−2) c_k z^(2k−3) = (2k−2) c_k w^(k−2) z
            let prev = wpow.clone();
            wpow = mul(&wpow, &w, work);
            let term = scale_f(&wpow, c, work);
            let dterm = scale_i(&scale_f(&mul(&prev, &zr, work), c, work), (2 * k - 2) as i64, work);
            wp = add(&wp, &term, work);
            wpp = add(&wpp, &dterm, work);
            let t = abs_f64(&term).max(abs_f64(&dterm) * z.abs_f64());
            // Lacunary series (g2 = 0 or g3 = 0) have vanishing coefficients;
            // only nonzero terms count toward the stopping rule.
            if t == 0.0 {
                continue;
            }
            if t <= tol * abs_f64(&wp) {
                small_run += 1;
                if small_run >= 2 {
                    return Ok((from_work(wp, p), from_work(wpp, p)));
                }
            } else {
                small_run = 0;
            }
        }
        Err(NumericError::NonConvergent(z.abs_f64()))
    }

    pub fn wp(&self, z: &BigComplex) -> Result<BigComplex, NumericError> {
        Ok(self.wp_pair(z)?.0)
    }

    pub fn wp_prime(&self, z: &BigComplex) -> Result<BigComplex, NumericError> {
        Ok(self.wp_pair(z)?.1)
    }

    /// |℘′² − 4℘³ + g2℘ + g3| / |4℘³| at z.
    pub fn ode_residual_ratio(&self, z: &BigComplex) -> Result<f64, NumericError> {
        let (w, wp) = self.wp_pair(z)?;
        let cube = w.powi(3).scale(&Rational::from_int(4));
        let r = &(&(&wp.square() - &cube) + &(&self.g2c * &w)) + &self.g3c;
        Ok(r.abs_f64() / cube.abs_f64())
    }

    /// Roots of 4z³ − g2z − g3 sorted by real part, then imaginary part.
    pub fn solve_e_roots(&self) -> Result<[BigComplex; 3], NumericError> {
        let p = self.precision_bits;
        let work = p + GUARD_BITS;
        let g2 = self.g2.to_float(work);
        let g3 = self.g3.to_float(work);
        let quarter = Rational::new(1, 4).to_float(work);
        // monic: z³ − (g2/4) z − g3/4
        let a1 = fix(&g2 * &quarter, work);
        let a0 = fix(&g3 * &quarter, work);
        let f = |z: &(Float, Float)| {
            let z2 = mul(z, z, work);
            let z3 = mul(&z2, z, work);
            let t = scale_f(z, &a1, work);
            sub(&sub(&z3, &t, work), &(a0.clone(), zero_f(work)), work)
        };
        let seed = (Rational::new(2, 5).to_float(work), Rational::new(9, 10).to_float(work));
        let mut roots = [one_f_pair(work), seed.clone(), mul(&seed, &seed, work)];
        let tol = (-(work as f64) + 8.0).exp2();
        let scale = 1.0 + abs_f64_f(&a1).sqrt() + abs_f64_f(&a0).cbrt();
        let mut converged = false;
        for _ in 0..2000 {
            let mut delta_max: f64 = 0.0;
            for i in 0..3 {
                let mut den = one_f_pair(work);
                for j in 0..3 {
                    if i != j {
                        den = mul(&den, &sub(&roots[i], &roots[j], work), work);
                    }
                }
                if abs_f64(&den) == 0.0 {
                    return Err(NumericError::RootFinding("coincident iterates".into()));
                }
                let step = div(&f(&roots[i]), &den, work);
                delta_max = delta_max.max(abs_f64(&step));
                roots[i] = sub(&roots[i], &step, work);
            }
            if delta_max <= tol * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(NumericError::RootFinding("Durand-Kerner did not converge".into()));
        }
        let mut out: Vec<BigComplex> = roots.into_iter().map(|r| from_work(r, p)).collect();
        let min_sep = (0..3)
            .flat_map(|i| ((i + 1)..3).map(move |j| (i, j)))
            .map(|(i, j)| (&out[i] - &out[j]).abs_f64())
            .fold(f64::INFINITY, f64::min);
        if min_sep < (-(p as f64) / 4.0).exp2() * scale {
            return Err(NumericError::RootFinding("near-degenerate discriminant".into()));
        }
        out.sort_by(|a, b| {
            let (ar, ai) = (a.re(), a.im());
            let (br, bi) = (b.re(), b.im());
            // Roots of a real cubic: compare real parts to a relative tolerance first.
            let rtol = (-(p as f64) / 2.0).exp2() * scale;
            let dr = (ar - br).to_f64().value();
            if dr.abs() > rtol {
                dr.partial_cmp(&0.0).unwrap()
            } else {
                ai.partial_cmp(bi).unwrap()
            }
        });
        Ok([out[0].clone(), out[1].clone(), out[2].clone()])
    }

    /// Deterministic sample points for `n_vars` variables.
    pub fn sample_points(&self, n_vars: usize, count: usize, seed: u64) -> Result<Vec<SamplePoint>, NumericError> {
        let mut rng = crate::random::rng(seed);
        let pool = argument_pool(n_vars);
        let lo = 0.02f64.min(self.sample_scale / 4.0);
        let hi = 0.06f64.min(self.sample_scale / 2.0);
        let min_arg = 0.01f64.min(self.sample_scale / 6.0);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            attempts += 1;
            if attempts > MAX_RESAMPLES * count.max(1) {
                return Err(NumericError::Sampling(attempts));
            }
            let xs: Vec<(f64, f64)> = (0..n_vars)
                .map(|_| {
                    let r = rng.gen_range(lo..=hi);
                    let t = rng.gen_range(0.0..(2.0 * PI));
                    (r * t.cos(), r * t.sin())
                })
                .collect();
            let ok = pool.iter().all(|a| {
                let (re, im) = a.iter().zip(&xs).fold((0.0, 0.0), |(u, v), (c, x)| {
                    (u + *c as f64 * x.0, v + *c as f64 * x.1)
                });
                let m = re.hypot(im);
                m >= min_arg && m <= self.sample_scale
            });
            if !ok {
                continue;
            }
            let pt = SamplePoint {
                coords: xs.iter().map(|&(re, im)| BigComplex::from_f64(re, im, self.precision_bits)).collect(),
            };
            let certified = pool.iter().all(|a| {
                let z = pt.eval_linear(a);
                matches!(self.ode_residual_ratio(&z), Ok(r) if r < self.threshold())
            });
            if certified {
                out.push(pt);
            }
        }
        Ok(out)
    }
}

/// A point in variable space.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub coords: Vec<BigComplex>,
}

impl SamplePoint {
    pub fn new(coords: Vec<BigComplex>) -> Self {
        SamplePoint { coords }
    }

    pub fn eval_linear(&self, coeffs: &[i64]) -> BigComplex {
        let p = self.coords[0].precision_bits();
        let mut acc = BigComplex::zero(p);
        for (c, x) in coeffs.iter().zip(&self.coords) {
            match c {
                0 => {}
                1 => acc = &acc + x,
                -1 => acc = &acc - x,
                _ => acc = &acc + &x.scale(&Rational::from_int(*c)),
            }
        }
        acc
    }
}

/// Caches ℘ and ℘′ powers of every argument seen at one point.
pub struct PointEvaluator<'a> {
    ctx: &'a EllipticContext,
    pt: &'a SamplePoint,
    values: HashMap<Argument, (Vec<BigComplex>, BigComplex)>,
    g2_pows: Vec<BigComplex>,
    g3_pows: Vec<BigComplex>,
}

impl<'a> PointEvaluator<'a> {
    pub fn new(ctx: &'a EllipticContext, pt: &'a SamplePoint) -> Self {
        let one = BigComplex::one(ctx.precision_bits);
        PointEvaluator { ctx, pt, values: HashMap::new(), g2_pows: vec![one.clone()], g3_pows: vec![one] }
    }

    fn power(pows: &mut Vec<BigComplex>, base: &BigComplex, k: usize) -> BigComplex {
        while pows.len() <= k {
            let next = pows.last().expect("nonempty") * base;
            pows.push(next);
        }
        pows[k].clone()
    }

    fn factor(&mut self, arg: &Argument, p: u16, pp: u8) -> Result<BigComplex, NumericError> {
        if arg.n_vars() > self.pt.coords.len() {
            return Err(NumericError::PointTooShort { got: self.pt.coords.len(), need: arg.n_vars() });
        }
        if !self.values.contains_key(arg) {
            let z = self.pt.eval_linear(&arg.to_vec());
            let (w, wp) = self.ctx.wp_pair(&z)?;
            let one = BigComplex::one(self.ctx.precision_bits);
            self.values.insert(*arg, (vec![one, w], wp));
        }
        let (pows, wp) = self.values.get_mut(arg).expect("inserted");
        let base = pows[1].clone();
        let mut v = Self::power(pows, &base, p as usize);
        if pp == 1 {
            v = &v * wp;
        } else if pp > 1 {
            v = &v * &wp.powi(pp as u32);
        }
        Ok(v)
    }

    /// Signed sum and Σ|term| of a polynomial at this point.
    pub fn eval(&mut self, poly: &EllipticPoly) -> Result<(BigComplex, f64), NumericError> {
        let prec = self.ctx.precision_bits;
        let mut value = BigComplex::zero(prec);
        let mut witness = 0.0f64;
        for (m, c) in poly.terms() {
            let mut t = BigComplex::from_rational(c, prec);
            if m.g2_exp() > 0 {
                let g2 = self.ctx.g2c.clone();
                t = &t * &Self::power(&mut self.g2_pows, &g2, m.g2_exp() as usize);
            }
            if m.g3_exp() > 0 {
                let g3 = self.ctx.g3c.clone();
                t = &t * &Self::power(&mut self.g3_pows, &g3, m.g3_exp() as usize);
            }
            for f in m.factors() {
                t = &t * &self.factor(&f.arg, f.p, f.pp)?;
            }
            witness += t.abs_f64();
            value += &t;
        }
        Ok((value, witness))
    }
}

pub fn eval_elliptic_poly(
    ctx: &EllipticContext,
    p: &EllipticPoly,
    pt: &SamplePoint,
) -> Result<(BigComplex, f64), NumericError> {
    PointEvaluator::new(ctx, pt).eval(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    /// Worst of two statuses: fail dominates inconclusive dominates pass.
    pub fn combine(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// Worst observed ratio for one coefficient of a residual operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDetail {
    pub coefficient_multiindex: Vec<u8>,
    pub max_ratio: f64,
    pub witness_scale: f64,
    pub point_index: usize,
    pub context_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub status: Status,
    pub max_ratio: f64,
    /// Largest witness over all coefficients and points.
    pub witness_scale: f64,
    pub trials: usize,
    pub structural_zero: bool,
    pub details: Vec<CoefficientDetail>,
    pub note: Option<String>,
}

/// Evaluates every coefficient of `residual` at `trials` points per context.
pub fn vanishing_oracle(
    contexts: &[EllipticContext],
    residual: &DiffOp,
    trials: usize,
    seed: u64,
) -> OracleOutcome {
    if residual.is_zero() {
        return OracleOutcome {
            status: Status::Pass,
            max_ratio: 0.0,
            witness_scale: 0.0,
            trials,
            structural_zero: true,
            details: Vec::new(),
            note: None,
        };
    }
    let n = residual.n_vars();
    // Trial jobs: (context index, point index, point, context used).
    let mut jobs = Vec::new();
    let mut note = None;
    for (ci, ctx) in contexts.iter().enumerate() {
        let mut ctx_used = ctx.clone();
        let mut pts = None;
        for attempt in 0..3 {
            match ctx_used.sample_points(n, trials, seed.wrapping_add(ci as u64 * 7919 + attempt)) {
                Ok(p) => {
                    pts = Some(p);
                    break;
                }
                Err(_) => ctx_used = ctx_used.with_sample_scale(ctx_used.sample_scale / 2.0),
            }
        }
        match pts {
            Some(pts) => {
                for (pi, pt) in pts.into_iter().enumerate() {
                    jobs.push((ci, pi, pt, ctx_used.clone()));
                }
            }
            None => note = Some(format!("context {ci}: no convergent sample points")),
        }
    }
    let results: Vec<Result<Vec<(f64, f64)>, NumericError>> = jobs
        .par_iter()
        .map(|(_, _, pt, ctx)| {
            let mut ev = PointEvaluator::new(ctx, pt);
            residual
                .terms()
                .iter()
                .map(|(_, f)| {
                    let (v, w) = ev.eval(f)?;
                    let a = v.abs_f64();
                    Ok((if a == 0.0 { 0.0 } else if w == 0.0 { f64::INFINITY } else { a / w }, w))
                })
                .collect()
        })
        .collect();
    let threshold = contexts.iter().map(|c| c.threshold()).fold(f64::INFINITY, f64::min);
    let mut details: Vec<CoefficientDetail> = residual
        .terms()
        .iter()
        .map(|(a, _)| CoefficientDetail {
            coefficient_multiindex: a.orders().to_vec(),
            max_ratio: 0.0,
            witness_scale: 0.0,
            point_index: 0,
            context_index: 0,
        })
        .collect();
    let mut inconclusive = note.is_some();
    for ((ci, pi, _, _), res) in jobs.iter().zip(results) {
        match res {
            Ok(vals) => {
                for (d, (ratio, w)) in details.iter_mut().zip(vals) {
                    d.witness_scale = d.witness_scale.max(w);
                    if ratio > d.max_ratio {
                        d.max_ratio = ratio;
                        d.point_index = *pi;
                        d.context_index = *ci;
                    }
                }
            }
            Err(e) => {
                inconclusive = true;
                note = Some(e.to_string());
            }
        }
    }
    let max_ratio = details.iter().map(|d| d.max_ratio).fold(0.0, f64::max);
    let witness_scale = details.iter().map(|d| d.witness_scale).fold(0.0, f64::max);
    let status = if max_ratio > threshold {
        Status::Fail
    } else if inconclusive || jobs.is_empty() {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    OracleOutcome { status, max_ratio, witness_scale, trials, structural_zero: false, details, note }
}

type CF = (Float, Float);

fn fix(x: Float, p: usize) -> Float {
    if x.precision() == p {
        x
    } else {
        x.with_precision(p).value()
    }
}

fn zero_f(p: usize) -> Float {
    Float::ZERO.with_precision(p).value()
}

fn one_f(p: usize) -> CF {
    (Float::ONE.with_precision(p).value(), zero_f(p))
}

fn one_f_pair(p: usize) -> CF {
    one_f(p)
}

fn to_work(z: &BigComplex, p: usize) -> CF {
    (fix(z.re().clone(), p), fix(z.im().clone(), p))
}

fn from_work(z: CF, p: usize) -> BigComplex {
    BigComplex::from_floats(z.0, z.1, p)
}

fn mul(a: &CF, b: &CF, p: usize) -> CF {
    (fix(&a.0 * &b.0 - &a.1 * &b.1, p), fix(&a.0 * &b.1 + &a.1 * &b.0, p))
}

fn add(a: &CF, b: &CF, p: usize) -> CF {
    (fix(&a.0 + &b.0, p), fix(&a.1 + &b.1, p))
}

fn sub(a: &CF, b: &CF, p: usize) -> CF {
    (fix(&a.0 - &b.0, p), fix(&a.1 - &b.1, p))
}

fn scale_f(a: &CF, s: &Float, p: usize) -> CF {
    (fix(&a.0 * s, p), fix(&a.1 * s, p))
}

fn scale_i(a: &CF, s: i64, p: usize) -> CF {
    let f = Rational::from_int(s).to_float(p);
    scale_f(a, &f, p)
}

fn inv(a: &CF, p: usize) -> CF {
    let den = fix(&a.0 * &a.0 + &a.1 * &a.1, p);
    (fix(&a.0 / &den, p), fix(-(&a.1 / &den), p))
}

fn div(a: &CF, b: &CF, p: usize) -> CF {
    mul(a, &inv(b, p), p)
}

fn abs_f64_f(x: &Float) -> f64 {
    x.to_f64().value().abs()
}

fn abs_f64(a: &CF) -> f64 {
    a.0.to_f64().value().hypot(a.1.to_f64().value())
}

#[cfg(test)]
mod tests;
