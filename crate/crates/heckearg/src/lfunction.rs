//! L(s,f), the completed function Λ(s,f), argument traces S(t,f), critical-line zeros,
//! argument-principle zero counts and the shifted abscissa σ_x.
//!
//! Λ(s) is the Mellin transform of Φ(y) = Σ λ(n)·√(n/A)·exp(−ny/A), A = √q/2π. The
//! transform is split at |y| = X, folded with Φ(1/y) = ε y² Φ(y), and both halves are
//! integrated along rays rotated by an angle close to π/2 so that the Gamma decay in
//! |t| is absorbed into the path.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::ln_gamma;
use crate::error::{invalid, Error, Result};
use crate::hecke::HeckeEigenform;
use crate::numeric::{gauss_legendre, principal_angle};

/// Heights covered by each quadrature band.
const BANDS: [f64; 7] = [2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0];
/// (π/2 − θ)·T for the ray angle θ of a band of height T.
const ROTATION_SLACK: f64 = 3.0;
/// Series terms are dropped once exp(−n·r·cos θ / A) < e^{−DECAY}.
const DECAY: f64 = 42.0;
/// Largest power of r the ray integrals must absorb (Re s ≤ 5.5).
const POWER_MARGIN: f64 = 6.0;
const GL_ORDER: usize = 16;
const MAX_PANEL: f64 = 0.5;
const PANEL_PHASE: f64 = 8.0;

pub const T_MAX: f64 = 50.0;
pub const SIGMA_START: f64 = 5.0;
pub const NEAR_ZERO_MODULUS: f64 = 1e-6;
pub const ZERO_EXCLUSION: f64 = 1e-4;
const MAX_HALVINGS: u32 = 20;
const TRACE_STEP: f64 = 0.05;
const ZERO_GRID: f64 = 0.01;
const ZERO_TOLERANCE: f64 = 1e-8;
const GRID_RETRIES: u32 = 4;
const BOX_LEFT: f64 = -1.0;
const BOX_RIGHT: f64 = 2.0;
const BOUNDARY_STEP: f64 = 0.05;
const BOUNDARY_PERTURB: f64 = 1e-3;
const PERTURB_TRIES: u32 = 10;
const SIGN_SEPARATION: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfeParams {
    pub target_abs_error: f64,
    /// Split point X of the Mellin integral.
    pub split: f64,
    pub t_max: f64,
}

impl Default for AfeParams {
    fn default() -> Self {
        Self { target_abs_error: 1e-8, split: 1.0, t_max: T_MAX }
    }
}

impl AfeParams {
    /// Number of series terms used at height t.
    pub fn truncation_length(&self, q: u64, t: f64) -> usize {
        let scale = (q as f64).sqrt() / (2.0 * PI);
        let band = band_index(t.abs()).unwrap_or(BANDS.len() - 1);
        terms_for_band(scale, self.split, band)
    }
}

fn band_index(t: f64) -> Option<usize> {
    BANDS.iter().position(|&b| t <= b)
}

fn band_angle(band: usize) -> f64 {
    (FRAC_PI_2 - ROTATION_SLACK / BANDS[band]).max(0.0)
}

fn terms_for_band(scale: f64, split: f64, band: usize) -> usize {
    let r_min = split.min(1.0 / split);
    let decay_terms = DECAY * scale / (r_min * band_angle(band).cos());
    let floor = 10.0 * scale * (1.0 + BANDS[band]);
    decay_terms.max(floor).ceil() as usize + 1
}

#[derive(Debug, Clone, Copy)]
struct Node {
    log_r: f64,
    weight: f64,
    phi: Complex64,
}

#[derive(Debug)]
struct Ray {
    theta: f64,
    upper: Vec<Node>,
    lower: Vec<Node>,
}

#[derive(Debug)]
pub struct LFunction {
    q: u64,
    form_id: usize,
    epsilon: i32,
    scale: f64,
    params: AfeParams,
    series: Vec<f64>,
    lambda: Vec<f64>,
    primes: Vec<(u64, f64)>,
    rays: Vec<OnceLock<Ray>>,
}

/// The unwrapped argument of L along σ + it, σ from σ_start down to ½.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgTrace {
    pub t: f64,
    pub sigma_grid: Vec<f64>,
    pub phase: Vec<f64>,
    pub s_value: f64,
    pub min_modulus: f64,
}

impl ArgTrace {
    pub fn max_increment(&self) -> f64 {
        self.phase.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroBox {
    pub form_id: usize,
    pub sigma: f64,
    pub height: f64,
    pub count: i64,
    pub boundary_arg_change: f64,
}

impl ZeroBox {
    pub fn residual(&self) -> f64 {
        (self.boundary_arg_change / (2.0 * PI) - self.count as f64).abs()
    }
}

/// Zeros on the critical line up to a height, with the argument-principle count of all
/// zeros of the same height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCensus {
    pub height: f64,
    pub ordinates: Vec<f64>,
    pub central_order: i64,
    pub box_count: i64,
    pub grid: f64,
}

impl ZeroCensus {
    pub fn line_count(&self) -> i64 {
        2 * self.ordinates.len() as i64 + self.central_order
    }

    pub fn certified(&self) -> bool {
        self.line_count() == self.box_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaX {
    pub sigma: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignFit {
    pub fitted: i32,
    pub residual_plus: f64,
    pub residual_minus: f64,
}

impl LFunction {
    pub fn new(form: &HeckeEigenform, params: &AfeParams) -> Result<Self> {
        Self::with_sign(form, params, form.epsilon)
    }

    /// As `new` but with an imposed root number.
    pub fn with_sign(form: &HeckeEigenform, params: &AfeParams, epsilon: i32) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return Err(invalid(format!("root number must be ±1, got {epsilon}")));
        }
        if !(params.split > 0.0 && params.split.is_finite()) {
            return Err(invalid("split point must be positive"));
        }
        if !(params.t_max > 0.0 && params.t_max <= T_MAX) {
            return Err(invalid(format!("t_max must lie in (0, {T_MAX}]")));
        }
        let q = form.q;
        let scale = (q as f64).sqrt() / (2.0 * PI);
        let top = band_index(params.t_max).unwrap_or(BANDS.len() - 1);
        let length = (0..=top).map(|b| terms_for_band(scale, params.split, b)).max().unwrap_or(1);
        if (length as u64) > form.p_max() {
            return Err(Error::TableTooShort { needed: length as u64, have: form.p_max() });
        }
        let lambda = form.lambda_table(length)?;
        let series = lambda.iter().enumerate().map(|(n, l)| l * (n as f64 / scale).sqrt()).collect();
        Ok(Self {
            q,
            form_id: form.id,
            epsilon,
            scale,
            params: *params,
            series,
            lambda,
            primes: form.lambda_p().collect(),
            rays: (0..BANDS.len()).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn epsilon(&self) -> i32 {
        self.epsilon
    }

    pub fn params(&self) -> &AfeParams {
        &self.params
    }

    /// λ_f(n) for n up to the truncation length.
    pub fn coefficients(&self) -> &[f64] {
        &self.lambda
    }

    fn ray(&self, band: usize) -> &Ray {
        self.rays[band].get_or_init(|| self.build_ray(band))
    }

    fn build_ray(&self, band: usize) -> Ray {
        let theta = band_angle(band);
        let n_terms = terms_for_band(self.scale, self.params.split, band).min(self.series.len() - 1);
        let upper = self.ray_nodes(theta, BANDS[band], self.params.split.ln(), n_terms);
        let lower = self.ray_nodes(theta, BANDS[band], -self.params.split.ln(), n_terms);
        Ray { theta, upper, lower }
    }

    fn ray_nodes(&self, theta: f64, height: f64, start: f64, n_terms: usize) -> Vec<Node> {
        let (gl_x, gl_w) = gauss_legendre(GL_ORDER);
        let (cos, sin) = (theta.cos(), theta.sin());
        let rate = height + POWER_MARGIN + (DECAY - 5.0) * sin / cos;
        let panel = MAX_PANEL.min(PANEL_PHASE / rate);
        let rotation = Complex64::new(cos, sin);
        let mut nodes = Vec::new();
        let mut left = start;
        loop {
            let r = left.exp();
            if r * cos / self.scale - POWER_MARGIN * left.max(0.0) > DECAY {
                break;
            }
            for (x, w) in gl_x.iter().zip(&gl_w) {
                let log_r = left + 0.5 * panel * (x + 1.0);
                let r = log_r.exp();
                let cutoff = ((DECAY * self.scale / (r * cos)).ceil() as usize + 2).min(n_terms);
                let ratio = (-rotation * r / self.scale).exp();
                let mut power = ratio;
                let mut phi = Complex64::new(0.0, 0.0);
                for coef in &self.series[1..=cutoff] {
                    phi += power * coef;
                    power *= ratio;
                }
                nodes.push(Node { log_r, weight: 0.5 * panel * w, phi });
            }
            left += panel;
        }
        nodes
    }

    /// Λ(s,f).
    pub fn completed(&self, s: Complex64) -> Result<Complex64> {
        if !(-1.5..=5.5).contains(&s.re) {
            return Err(invalid(format!("Re s = {} outside [-1.5, 5.5]", s.re)));
        }
        if s.im.abs() > self.params.t_max {
            return Err(invalid(format!("|Im s| = {} exceeds t_max = {}", s.im.abs(), self.params.t_max)));
        }
        if s.im < 0.0 {
            return Ok(self.completed(s.conj())?.conj());
        }
        let band = band_index(s.im).unwrap_or(BANDS.len() - 1);
        let ray = self.ray(band);
        let forward = s + 0.5;
        let backward = Complex64::new(1.5, 0.0) - s;
        let mut upper = Complex64::new(0.0, 0.0);
        for node in &ray.upper {
            upper += node.phi * (forward * node.log_r).exp() * node.weight;
        }
        let mut lower = Complex64::new(0.0, 0.0);
        for node in &ray.lower {
            lower += node.phi.conj() * (backward * node.log_r).exp() * node.weight;
        }
        let i = Complex64::i();
        Ok((i * ray.theta * forward).exp() * upper
            + (-i * ray.theta * backward).exp() * lower * self.epsilon as f64)
    }

    /// log(A^s Γ(s+½)).
    pub fn log_gamma_factor(&self, s: Complex64) -> Complex64 {
        s * self.scale.ln() + ln_gamma(s + 0.5)
    }

    /// |A^s Γ(s+½)|.
    pub fn gamma_weight(&self, s: Complex64) -> f64 {
        self.log_gamma_factor(s).re.exp()
    }

    /// L(s,f).
    pub fn value(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.completed(s)? * (-self.log_gamma_factor(s)).exp())
    }

    /// Plain Dirichlet series Σ_{n≤N} λ(n) n^{−s} and the tail bound Σ_{n>N} τ(n) n^{−Re s}.
    pub fn dirichlet_series(&self, s: Complex64) -> Result<(Complex64, f64)> {
        if s.re <= 1.3 {
            return Err(invalid("Dirichlet series needs Re s > 1.3"));
        }
        let n_max = self.lambda.len() - 1;
        let mut sum = Complex64::new(0.0, 0.0);
        for (n, l) in self.lambda.iter().enumerate().skip(1) {
            sum += Complex64::new(n as f64, 0.0).powc(-s) * l;
        }
        Ok((sum, divisor_tail(n_max as f64, s.re)))
    }

    /// log L(s,f) from the Euler product over the tabulated primes, with a bound on
    /// the omitted primes.
    pub fn euler_log(&self, s: Complex64) -> Result<(Complex64, f64)> {
        if s.re <= 1.5 {
            return Err(invalid("Euler product needs Re s > 1.5"));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for &(p, lam) in &self.primes {
            let x = Complex64::new(p as f64, 0.0).powc(-s);
            let factor = if p == self.q { 1.0 - x * lam } else { 1.0 - x * lam + x * x };
            sum -= factor.ln();
        }
        let p_max = self.primes.last().map_or(1, |p| p.0) as f64;
        let tail = 2.1 * p_max.powf(1.0 - s.re) / (s.re - 1.0);
        Ok((sum, tail))
    }

    /// Hardy's function and the discarded component of the rotated Λ(½+it).
    pub fn hardy_z_parts(&self, t: f64) -> Result<(f64, f64)> {
        let s = Complex64::new(0.5, t);
        let lambda = self.completed(s)?;
        let norm = self.scale.sqrt() * ln_gamma(Complex64::new(1.0, t)).re.exp();
        let z = lambda / norm;
        Ok(if self.epsilon == 1 { (z.re, z.im) } else { (z.im, z.re) })
    }

    pub fn hardy_z(&self, t: f64) -> Result<f64> {
        Ok(self.hardy_z_parts(t)?.0)
    }

    pub fn s_of_t(&self, t: f64) -> Result<ArgTrace> {
        self.s_of_t_with(t, SIGMA_START, TRACE_STEP)
    }

    pub fn s_of_t_with(&self, t: f64, sigma_start: f64, step: f64) -> Result<ArgTrace> {
        if t == 0.0 || t.abs() > self.params.t_max {
            return Err(invalid(format!("t = {t} must be nonzero with |t| <= t_max")));
        }
        if sigma_start < 3.0 || sigma_start > 5.5 {
            return Err(invalid("sigma_start must lie in [3, 5.5]"));
        }
        if let Some(gamma) = self.zero_near(t.abs(), ZERO_EXCLUSION)? {
            return Err(Error::NearZero { sigma: 0.5, modulus: (gamma - t.abs()).abs() });
        }
        let start = self.value(Complex64::new(sigma_start, t))?;
        let (euler, tail) = self.euler_log(Complex64::new(sigma_start, t))?;
        let mut phase = start.arg();
        if (principal_angle(euler.im) - phase).abs() > 1e-9 + tail + 1e-12 * phase.abs() {
            return Err(Error::Numerical(format!(
                "starting phase {phase} disagrees with Euler product {}",
                euler.im
            )));
        }
        let mut sigma_grid = vec![sigma_start];
        let mut phases = vec![phase];
        let mut min_modulus = start.norm();
        let mut sigma = sigma_start;
        let mut prev = start;
        let mut h = step;
        let mut halvings = 0;
        while sigma > 0.5 {
            let next_sigma = (sigma - h).max(0.5);
            let value = self.value(Complex64::new(next_sigma, t))?;
            let delta = principal_angle(value.arg() - prev.arg());
            if delta.abs() >= FRAC_PI_2 {
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::Numerical(format!("argument unwrapping failed at sigma = {sigma}")));
                }
                h *= 0.5;
                continue;
            }
            halvings = 0;
            let modulus = value.norm();
            min_modulus = min_modulus.min(modulus);
            if modulus < NEAR_ZERO_MODULUS {
                return Err(Error::NearZero { sigma: next_sigma, modulus });
            }
            phase += delta;
            sigma = next_sigma;
            prev = value;
            sigma_grid.push(sigma);
            phases.push(phase);
            h = (2.0 * h).min(step);
        }
        Ok(ArgTrace { t, sigma_grid, phase: phases, s_value: phase / PI, min_modulus })
    }

    /// A critical-line zero within `radius` of height t, if any.
    fn zero_near(&self, t: f64, radius: f64) -> Result<Option<f64>> {
        let lo = (t - 0.02).max(1e-6);
        let hi = (t + 0.02).min(self.params.t_max);
        let steps = 40;
        let h = (hi - lo) / steps as f64;
        let mut prev_t = lo;
        let mut prev_z = self.hardy_z(lo)?;
        for k in 1..=steps {
            let u = lo + k as f64 * h;
            let z = self.hardy_z(u)?;
            if z == 0.0 && (u - t).abs() < radius {
                return Ok(Some(u));
            }
            if prev_z * z < 0.0 {
                let gamma = self.bisect(prev_t, u, prev_z)?;
                if (gamma - t).abs() < radius {
                    return Ok(Some(gamma));
                }
            }
            prev_t = u;
            prev_z = z;
        }
        Ok(None)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, mut z_lo: f64) -> Result<f64> {
        while hi - lo > ZERO_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            let z = self.hardy_z(mid)?;
            if z == 0.0 {
                return Ok(mid);
            }
            if (z < 0.0) == (z_lo < 0.0) {
                lo = mid;
                z_lo = z;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Sign changes of Z on (0, height] at the given grid spacing.
    pub fn line_zeros(&self, height: f64, grid: f64) -> Result<Vec<f64>> {
        let steps = (height / grid).ceil() as usize;
        let h = height / steps as f64;
        let values: Vec<f64> = (0..=steps)
            .into_par_iter()
            .map(|k| self.hardy_z(if k == 0 { 1e-9 } else { k as f64 * h }))
            .collect::<Result<_>>()?;
        let mut zeros = Vec::new();
        for k in 1..=steps {
            let (a, b) = (values[k - 1], values[k]);
            if a * b < 0.0 {
                zeros.push(self.bisect((k - 1) as f64 * h, k as f64 * h, a)?);
            } else if b == 0.0 && k < steps {
                zeros.push(k as f64 * h);
            }
        }
        if self.epsilon == -1 {
            // Z is odd; the forced sign change next to t = 0 is the central zero.
            zeros.retain(|&g| g > 1e-6);
        }
        Ok(zeros)
    }

    /// Line zeros and the full-strip box count up to `height`, retrying with finer grids.
    /// Never fails on a count mismatch; see `ZeroCensus::certified`.
    pub fn zero_census(&self, height: f64) -> Result<ZeroCensus> {
        let mut grid = ZERO_GRID;
        let mut census = None;
        for _ in 0..=GRID_RETRIES {
            let probe = (height + PERTURB_TRIES as f64 * BOUNDARY_PERTURB + 0.01).min(self.params.t_max);
            let all = self.line_zeros(probe, grid)?;
            let mut top = height;
            let mut tries = 0;
            while all.iter().any(|g| (g - top).abs() <= BOUNDARY_PERTURB) {
                tries += 1;
                top += BOUNDARY_PERTURB;
                if tries > PERTURB_TRIES || top > self.params.t_max {
                    return Err(Error::Numerical(format!("box top near a zero at height {height}")));
                }
            }
            let central_order = self.central_order(all.first().copied())?;
            let winding = self.box_winding(BOX_LEFT, top)?;
            let ordinates: Vec<f64> = all.into_iter().filter(|&g| g <= height).collect();
            let current = ZeroCensus { height, ordinates, central_order, box_count: winding.0, grid };
            if current.certified() {
                return Ok(current);
            }
            census = Some(current);
            grid *= 0.5;
        }
        Ok(census.expect("at least one census attempt"))
    }

    /// Zeros on (0, height], certified against the argument-principle count.
    pub fn critical_zeros(&self, height: f64) -> Result<ZeroCensus> {
        let census = self.zero_census(height)?;
        if !census.certified() {
            return Err(Error::Numerical(format!(
                "zero census mismatch at height {height}: line {} vs box {}",
                census.line_count(),
                census.box_count
            )));
        }
        Ok(census)
    }

    fn central_order(&self, first_zero: Option<f64>) -> Result<i64> {
        let radius = first_zero.map_or(0.05, |g| (0.5 * g).min(0.05));
        let change = self.half_boundary_change(0.5 - radius, 0.5 + radius, radius)?;
        Ok(round_winding(change)?.0)
    }

    /// Winding of Λ around [sigma, 2] × [−height, height].
    fn box_winding(&self, sigma: f64, height: f64) -> Result<(i64, f64)> {
        let change = self.half_boundary_change(sigma, BOX_RIGHT, height)?;
        round_winding(change)
    }

    /// Twice the argument change of Λ along (right, 0) → (right, h) → (left, h) → (left, 0);
    /// the lower half mirrors it by Λ(s̄) = conj Λ(s).
    fn half_boundary_change(&self, left: f64, right: f64, height: f64) -> Result<f64> {
        let legs = [
            (Complex64::new(right, 0.0), Complex64::new(right, height)),
            (Complex64::new(right, height), Complex64::new(left, height)),
            (Complex64::new(left, height), Complex64::new(left, 0.0)),
        ];
        let mut total = 0.0;
        for (a, b) in legs {
            total += self.segment_arg_change(a, b)?;
        }
        Ok(2.0 * total)
    }

    fn segment_arg_change(&self, a: Complex64, b: Complex64) -> Result<f64> {
        let length = (b - a).norm();
        let mut pos = 0.0;
        let mut prev = self.completed(a)?;
        let mut change = 0.0;
        let mut h = BOUNDARY_STEP.min(length);
        let mut halvings = 0;
        while pos < length {
            let next = (pos + h).min(length);
            let value = self.completed(a + (b - a) * (next / length))?;
            let delta = principal_angle(value.arg() - prev.arg());
            if delta.abs() >= FRAC_PI_2 * 0.5 {
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::Numerical("boundary passes near a zero".into()));
                }
                h *= 0.5;
                continue;
            }
            halvings = 0;
            change += delta;
            pos = next;
            prev = value;
            h = (2.0 * h).min(BOUNDARY_STEP);
        }
        Ok(change)
    }

    /// N(f; σ, T): zeros with real part > σ and |ordinate| ≤ T.
    pub fn zero_count_box(&self, sigma: f64, height: f64) -> Result<ZeroBox> {
        if !(sigma > 0.5 && sigma <= 1.0) {
            return Err(invalid("sigma must lie in (1/2, 1]"));
        }
        let mut top = height;
        for _ in 0..=PERTURB_TRIES {
            if top > self.params.t_max {
                break;
            }
            if self.boundary_clear(sigma, top)? {
                let (count, change) = self.box_winding(sigma, top)?;
                return Ok(ZeroBox { form_id: self.form_id, sigma, height: top, count, boundary_arg_change: change });
            }
            top += BOUNDARY_PERTURB;
        }
        Err(Error::Numerical(format!("box boundary near a zero for sigma = {sigma}, T = {height}")))
    }

    fn boundary_clear(&self, sigma: f64, height: f64) -> Result<bool> {
        let steps = ((BOX_RIGHT - sigma) / 0.01).ceil() as usize;
        for k in 0..=steps {
            let x = sigma + (BOX_RIGHT - sigma) * k as f64 / steps as f64;
            if self.value(Complex64::new(x, height))?.norm() < 1e-4 {
                return Ok(false);
            }
        }
        let steps = (height / 0.01).ceil() as usize;
        for k in 0..=steps {
            let y = height * k as f64 / steps as f64;
            if self.value(Complex64::new(sigma, y))?.norm() < 1e-4 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// σ_{x,f,t}.
    pub fn sigma_x(&self, t: f64, x: f64) -> Result<SigmaX> {
        if x < 4.0 {
            return Err(invalid("sigma_x needs x >= 4"));
        }
        let floor = 5.0 / x.ln();
        let window = x.powf(1.5) / x.ln();
        let reach = t.abs() + window;
        if reach <= self.params.t_max {
            let census = self.zero_census(reach)?;
            if census.certified() {
                return Ok(SigmaX { sigma: 0.5 + 2.0 * floor, certified: true });
            }
        }
        let height = reach.min(self.params.t_max);
        let beta = self.off_line_extent(height)?;
        Ok(SigmaX { sigma: 0.5 + 2.0 * (beta - 0.5).max(floor), certified: false })
    }

    /// Upper estimate of the largest real part of a zero up to `height`, by bisection on
    /// box counts.
    fn off_line_extent(&self, height: f64) -> Result<f64> {
        let (mut lo, mut hi) = (0.5 + 1e-3, 1.0);
        if self.zero_count_box(lo, height)?.count == 0 {
            return Ok(lo);
        }
        for _ in 0..12 {
            let mid = 0.5 * (lo + hi);
            if self.zero_count_box(mid, height)?.count > 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

fn round_winding(change: f64) -> Result<(i64, f64)> {
    let turns = change / (2.0 * PI);
    let count = turns.round();
    if (turns - count).abs() >= 0.1 {
        return Err(Error::Numerical(format!("winding {turns} is not close to an integer")));
    }
    Ok((count as i64, change))
}

/// Σ_{n>N} τ(n) n^{−σ} ≤ ∫_N^∞ (log u + 2) u^{−σ} du.
pub fn divisor_tail(n_max: f64, sigma: f64) -> f64 {
    let a = sigma - 1.0;
    n_max.powf(-a) * (n_max.ln() / a + 1.0 / (a * a) + 2.0 / a)
}

/// σ_x from an explicit list of zeros (β, γ).
pub fn sigma_x_from_zeros(t: f64, x: f64, zeros: &[(f64, f64)]) -> f64 {
    let log_x = x.ln();
    let widest = zeros
        .iter()
        .filter(|(beta, gamma)| (t - gamma).abs() <= x.powf(3.0 * (beta - 0.5).abs()) / log_x)
        .map(|(beta, _)| (beta - 0.5).abs())
        .fold(0.0, f64::max);
    0.5 + 2.0 * widest.max(5.0 / log_x)
}

/// Root number fitted from the functional equation: the sign for which Λ does not
/// depend on the split point.
pub fn fitted_sign(form: &HeckeEigenform, t_max: f64) -> Result<SignFit> {
    let probes = [Complex64::new(0.8, 0.3), Complex64::new(0.6, 2.1)];
    let mut residuals = [0.0f64; 2];
    for (slot, sign) in [1, -1].into_iter().enumerate() {
        let base = AfeParams { split: 1.0, t_max, ..AfeParams::default() };
        let shifted = AfeParams { split: 1.25, ..base };
        let a = LFunction::with_sign(form, &base, sign)?;
        let b = LFunction::with_sign(form, &shifted, sign)?;
        for probe in probes {
            let r = (a.completed(probe)? - b.completed(probe)?).norm() / a.gamma_weight(probe);
            residuals[slot] = residuals[slot].max(r);
        }
    }
    let fitted = if residuals[0] < residuals[1] { 1 } else { -1 };
    let (best, worst) = if fitted == 1 { (residuals[0], residuals[1]) } else { (residuals[1], residuals[0]) };
    if best > 1e-6 || worst < SIGN_SEPARATION * best.max(1e-12) {
        return Err(Error::Numerical(format!(
            "sign fit inconclusive for form {}: residuals {residuals:?}",
            form.id
        )));
    }
    Ok(SignFit { fitted, residual_plus: residuals[0], residual_minus: residuals[1] })
}

/// Largest |Λ(s) − εΛ(1−s)| / |A^s Γ(s+½)| over a 20-point grid in ½ ≤ Re s ≤ 1,
/// |Im s| ≤ 5, with the two sides evaluated at different split points.
pub fn functional_equation_residual(form: &HeckeEigenform, epsilon: i32) -> Result<f64> {
    let base = AfeParams { t_max: 5.0, ..AfeParams::default() };
    let left = LFunction::with_sign(form, &base, epsilon)?;
    let right = LFunction::with_sign(form, &AfeParams { split: 1.25, ..base }, epsilon)?;
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..5 {
            let s = Complex64::new(0.5 + 0.5 * i as f64 / 3.0, -5.0 + 2.5 * j as f64);
            let lhs = left.completed(s)?;
            let rhs = right.completed(Complex64::new(1.0, 0.0) - s)? * epsilon as f64;
            worst = worst.max((lhs - rhs).norm() / left.gamma_weight(s));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrhEntry {
    pub q: u64,
    pub form_id: usize,
    pub t: f64,
    pub s_value: f64,
    pub normalized: f64,
}

/// |S(t,f)|·log log(|t|+q)/log(|t|+q) for each trace.
pub fn grh_diagnostic(q: u64, traces: &[(usize, ArgTrace)]) -> Vec<GrhEntry> {
    traces
        .iter()
        .map(|(form_id, trace)| {
            let height = trace.t.abs() + q as f64;
            GrhEntry {
                q,
                form_id: *form_id,
                t: trace.t,
                s_value: trace.s_value,
                normalized: trace.s_value.abs() * height.ln().ln() / height.ln(),
            }
        })
        .collect()
}
