//! Unicycle robot `ṙ = v·e(θ)` moving through a field, the time
//! derivatives of its field reading, and deviation bounds for a robot whose
//! heading rotates in one direction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characteristics::char_set_at;
use crate::error::{Error, Result};
use crate::field::{FieldSpec, ScalarField};
use crate::geometry::{Point2, Vec2};

/// Pose and speed of the robot. `theta` is cumulative, never wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub r: Point2,
    pub theta: f64,
    pub v: f64,
}

impl RobotState {
    pub fn heading(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub amplitude: f64,
    /// Angular frequency (rad/s).
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub value: f64,
}

/// Open-loop control signal on `[0, duration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `mean + Σ aₖ·sin(wₖ·t + φₖ)`
    Fourier { mean: f64, terms: Vec<FourierTerm> },
    /// Piecewise constant; each segment holds from its start until the next.
    Piecewise { segments: Vec<Segment> },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Fourier { mean, terms } => {
                mean + terms
                    .iter()
                    .map(|k| k.amplitude * (k.frequency * t + k.phase).sin())
                    .sum::<f64>()
            }
            Profile::Piecewise { segments } => segments
                .iter()
                .rev()
                .find(|s| s.start <= t)
                .or(segments.first())
                .map_or(0.0, |s| s.value),
        }
    }

    /// Value at `t` inside an integration step whose midpoint is `anchor`.
    /// Piecewise profiles are held at their midpoint value so that switches
    /// placed on grid nodes are integrated without a stage straddling them.
    fn eval_in_step(&self, t: f64, anchor: f64) -> f64 {
        match self {
            Profile::Piecewise { .. } => self.eval(anchor),
            _ => self.eval(t),
        }
    }

    /// Bounds `(min, max)` of the profile over all time.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Profile::Constant { value } => (*value, *value),
            Profile::Fourier { mean, terms } => {
                let a: f64 = terms.iter().map(|k| k.amplitude.abs()).sum();
                (mean - a, mean + a)
            }
            Profile::Piecewise { segments } => segments.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), s| (lo.min(s.value), hi.max(s.value)),
            ),
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        match self {
            Profile::Piecewise { segments } => {
                if segments.is_empty() {
                    return Err(Error::InvalidSettings(format!("{what}: no segments")));
                }
                if segments.windows(2).any(|w| w[1].start <= w[0].start) {
                    return Err(Error::InvalidSettings(format!(
                        "{what}: segment starts must increase"
                    )));
                }
            }
            Profile::Fourier { terms, .. } => {
                if terms.iter().any(|k| !(k.amplitude.is_finite() && k.frequency.is_finite())) {
                    return Err(Error::InvalidSettings(format!("{what}: non-finite term")));
                }
            }
            Profile::Constant { .. } => {}
        }
        let (lo, hi) = self.range();
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidSettings(format!("{what}: non-finite values")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringProgram {
    pub theta_dot: Profile,
    pub speed: Profile,
    pub duration: f64,
}

impl SteeringProgram {
    pub fn validate(&self, v_max: f64) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidSettings(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        self.theta_dot.validate("theta_dot")?;
        self.speed.validate("speed")?;
        let (lo, hi) = self.speed.range();
        if lo < 0.0 || hi > v_max * (1.0 + 1e-12) {
            return Err(Error::InvalidSettings(format!(
                "speed range [{lo}, {hi}] leaves [0, v_max = {v_max}]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: RobotState,
    /// Field reading `D(t, r)`.
    pub d: f64,
}

/// Uniformly sampled run of the robot through a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
    pub field: FieldSpec,
    pub program: SteeringProgram,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Closed-form reading rates at sample `i` (requires `v = v_max` there).
    pub fn reading_rates_at(&self, i: usize, v_max: f64) -> Result<ReadingRates> {
        let s = &self.samples[i];
        reading_rates(&self.field, s.t, &s.state, self.program.theta_dot.eval(s.t), v_max)
    }
}

/// Classical RK4 integration of `(ṙ, θ̇) = (v(t)·e(θ), θ̇(t))` on a uniform
/// grid. The step is adjusted down so that the grid ends exactly at
/// `duration`; the initial speed in `init` is replaced by the program's.
pub fn integrate(
    field: &FieldSpec,
    init: RobotState,
    prog: &SteeringProgram,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidSettings(format!("dt must be positive, got {dt}")));
    }
    if !(prog.duration.is_finite() && prog.duration > 0.0) || dt > prog.duration * (1.0 + 1e-12) {
        return Err(Error::InvalidSettings(format!(
            "dt = {dt} must not exceed duration = {}",
            prog.duration
        )));
    }
    let steps = ((prog.duration / dt).round() as usize).max(1);
    let h = prog.duration / steps as f64;

    let rhs = |t: f64, anchor: f64, theta: f64| -> (Vec2, f64) {
        let v = prog.speed.eval_in_step(t, anchor);
        (Vec2::from_angle(theta) * v, prog.theta_dot.eval_in_step(t, anchor))
    };

    let mut samples = Vec::with_capacity(steps + 1);
    let mut r = init.r;
    let mut theta = init.theta;
    let sample = |i: usize, r: Point2, theta: f64| {
        let t = if i == steps { prog.duration } else { i as f64 * h };
        Sample {
            t,
            state: RobotState {
                r,
                theta,
                v: prog.speed.eval(t),
            },
            d: field.value(t, r),
        }
    };
    samples.push(sample(0, r, theta));
    for i in 0..steps {
        let t = i as f64 * h;
        let mid = t + 0.5 * h;
        let (k1r, k1a) = rhs(t, mid, theta);
        let (k2r, k2a) = rhs(mid, mid, theta + 0.5 * h * k1a);
        let (k3r, k3a) = rhs(mid, mid, theta + 0.5 * h * k2a);
        let (k4r, k4a) = rhs(t + h, mid, theta + h * k3a);
        r += (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (h / 6.0);
        theta += (k1a + 2.0 * k2a + 2.0 * k3a + k4a) * (h / 6.0);
        samples.push(sample(i + 1, r, theta));
    }
    Ok(Trajectory {
        dt: h,
        samples,
        field: field.clone(),
        program: prog.clone(),
    })
}

/// Time derivatives of the field reading and the robot's velocity
/// components relative to the moving isoline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadingRates {
    pub d_dot: f64,
    pub d_ddot: f64,
    /// Normal velocity relative to the front, `⟨N, v·e⟩ − λ`.
    pub v_delta: f64,
    /// Tangential velocity `⟨v·e, T⟩`.
    pub v_t: f64,
}

/// `ḋ` and `d̈` from the isoline characteristics at the robot's location.
/// The second-derivative formula assumes travel at full speed, so
/// `state.v` must equal `v_max`.
pub fn reading_rates<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    state: &RobotState,
    theta_dot: f64,
    v_max: f64,
) -> Result<ReadingRates> {
    if (state.v - v_max).abs() > 1e-12 * v_max.abs().max(1.0) {
        return Err(Error::Contract(format!(
            "reading rates require v = v_max (v = {}, v_max = {v_max})",
            state.v
        )));
    }
    let jet = field.jet(t, state.r);
    let c = crate::characteristics::char_set(&jet).map_err(|e| e.at(t, state.r))?;
    let frame = crate::characteristics::frenet(&jet)?;
    let e = state.heading();
    let v_delta = v_max * frame.normal.dot(e) - c.lambda;
    let v_t = v_max * e.dot(frame.tangent);
    let d_dot = c.rho * v_delta;
    let d_ddot = c.rho
        * ((theta_dot - 2.0 * c.omega - c.kappa * v_t + 2.0 * v_delta * c.tau_rho) * v_t
            + 2.0 * c.v_rho * v_delta
            - c.alpha
            + v_delta * v_delta * c.n_rho);
    Ok(ReadingRates {
        d_dot,
        d_ddot,
        v_delta,
        v_t,
    })
}

/// `ḋ = ρ·(v·⟨N, e⟩ − λ)` at any speed.
pub fn reading_rate<F: ScalarField + ?Sized>(field: &F, t: f64, state: &RobotState) -> Result<f64> {
    let c = char_set_at(field, t, state.r)?;
    let n = field.jet(t, state.r).grad * (1.0 / c.rho);
    Ok(c.rho * (state.v * n.dot(state.heading()) - c.lambda))
}

/// Tangential speed recovered from the speed budget:
/// `sgn(σ)·√(v̄² − (λ + v_Δ)²)` with `σ = ⟨e, T⟩`.
pub fn tangential_speed(v_max: f64, lambda: f64, v_delta: f64, sigma: f64) -> f64 {
    let rest = v_max * v_max - (lambda + v_delta).powi(2);
    sigma.signum() * rest.max(0.0).sqrt()
}

/// Fourth-order central differences of the sampled readings at node `i`:
/// `(ḋ, d̈)`.
pub fn fd_reading_rates(traj: &Trajectory, i: usize) -> Result<(f64, f64)> {
    let n = traj.samples.len();
    if n < 5 || i < 2 || i > n - 3 {
        return Err(Error::IndexOutOfRange {
            index: i,
            lo: 2,
            hi: n.saturating_sub(3),
        });
    }
    let d = |k: usize| traj.samples[k].d;
    let h = traj.dt;
    let (m2, m1, c0, p1, p2) = (d(i - 2), d(i - 1), d(i), d(i + 1), d(i + 2));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * h * h);
    Ok((d1, d2))
}

fn check_bound_args(v_max: f64, omega_theta: f64, phi: f64) {
    debug_assert!(v_max > 0.0 && omega_theta > 0.0 && phi >= 0.0);
}

/// Deviation bound `q(φ) = (2v̄/ω_θ)⌊φ/2π⌋ + (v̄/ω_θ)(1 − cos min{⦅φ⦆, π})`,
/// evaluated exactly as stated. It is violated by admissible runs for some
/// fractional turns (see [`empirical_max_deviation`]); the ceiling form
/// [`deviation_bound_ceil`] is the one that holds.
pub fn deviation_bound_q(v_max: f64, omega_theta: f64, phi: f64) -> f64 {
    check_bound_args(v_max, omega_theta, phi);
    let turns = (phi / (2.0 * PI)).floor();
    let frac = phi - 2.0 * PI * turns;
    let u = v_max / omega_theta;
    2.0 * u * turns + u * (1.0 - frac.min(PI).cos())
}

/// Ceiling bound `(2v̄/ω_θ)·⌈φ/2π⌉` on the distance from the start.
pub fn deviation_bound_ceil(v_max: f64, omega_theta: f64, phi: f64) -> f64 {
    check_bound_args(v_max, omega_theta, phi);
    2.0 * v_max / omega_theta * (phi / (2.0 * PI)).ceil()
}

/// Bang-bang speed schedule in the turning-angle variable `s ∈ [0, φ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BangBang {
    pub start_on: bool,
    pub switches: Vec<f64>,
    pub deviation: f64,
}

fn bang_bang_deviation(u: f64, phi: f64, start_on: bool, switches: &[f64]) -> f64 {
    let mut on = start_on;
    let mut a = 0.0f64;
    let mut acc = Vec2::ZERO;
    for &s in switches.iter().chain(std::iter::once(&phi)) {
        if on {
            // ∫ₐˢ e(−σ) dσ
            acc += Vec2::new(s.sin() - a.sin(), s.cos() - a.cos());
        }
        on = !on;
        a = s;
    }
    u * acc.norm()
}

fn refine(u: f64, phi: f64, start_on: bool, mut sw: Vec<f64>) -> BangBang {
    let mut best = bang_bang_deviation(u, phi, start_on, &sw);
    let mut delta = phi / 8.0;
    let floor = 1e-14 * phi.max(1.0);
    let mut rounds = 0;
    while delta > floor && rounds < 4000 {
        rounds += 1;
        let mut improved = false;
        for i in 0..sw.len() {
            let lo = if i == 0 { 0.0 } else { sw[i - 1] };
            let hi = if i + 1 == sw.len() { phi } else { sw[i + 1] };
            for dir in [1.0, -1.0] {
                let old = sw[i];
                sw[i] = (old + dir * delta).clamp(lo, hi);
                let val = bang_bang_deviation(u, phi, start_on, &sw);
                if val > best {
                    best = val;
                    improved = true;
                } else {
                    sw[i] = old;
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    let (start_on, switches) = simplify(phi, start_on, sw);
    BangBang {
        start_on,
        switches,
        deviation: best,
    }
}

/// Drops empty intervals: coincident switch pairs and switches at the ends.
fn simplify(phi: f64, mut start_on: bool, sw: Vec<f64>) -> (bool, Vec<f64>) {
    let tol = 1e-12 * phi.max(1.0);
    let mut out: Vec<f64> = Vec::with_capacity(sw.len());
    for s in sw {
        if s <= tol && out.is_empty() {
            start_on = !start_on;
        } else if out.last().is_some_and(|&p| s - p <= tol) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    while out.last().is_some_and(|&p| phi - p <= tol) {
        out.pop();
    }
    (start_on, out)
}

fn seeds(phi: f64, k: usize, rng: &mut ChaCha8Rng) -> Vec<(bool, Vec<f64>)> {
    let mut out = Vec::new();
    if k <= 2 {
        let g = 24;
        let grid: Vec<f64> = (0..=g).map(|i| phi * i as f64 / g as f64).collect();
        for start_on in [true, false] {
            if k == 1 {
                for &a in &grid {
                    out.push((start_on, vec![a]));
                }
            } else {
                for (i, &a) in grid.iter().enumerate() {
                    for &b in &grid[i..] {
                        out.push((start_on, vec![a, b]));
                    }
                }
            }
        }
    }
    // switch patterns of "on while heading within ±π/2 of a direction"
    let nb = 96;
    for j in 0..nb {
        let beta = 2.0 * PI * j as f64 / nb as f64;
        let start_on = beta.cos() > 0.0;
        let mut sw = Vec::new();
        let mut s = PI / 2.0 - beta;
        while s <= 0.0 {
            s += PI;
        }
        while s < phi {
            sw.push(s);
            s += PI;
        }
        if sw.len() <= k {
            out.push((start_on, sw));
        } else {
            for first in 0..=(sw.len() - k) {
                let on = start_on ^ (first % 2 == 1);
                out.push((on, sw[first..first + k].to_vec()));
            }
        }
    }
    for _ in 0..32 {
        let mut sw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() * phi).collect();
        sw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push((rng.gen::<bool>(), sw));
    }
    out
}

/// Best bang-bang schedule found with at most `n_switch` switches.
pub fn empirical_max_program(v_max: f64, omega_theta: f64, phi: f64, n_switch: usize) -> BangBang {
    let u = v_max / omega_theta;
    let mut best = BangBang {
        start_on: true,
        switches: vec![],
        deviation: bang_bang_deviation(u, phi, true, &[]),
    };
    if phi <= 0.0 {
        return best;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0b5e);
    for k in 1..=n_switch {
        let mut candidates: Vec<(f64, bool, Vec<f64>)> = seeds(phi, k, &mut rng)
            .into_iter()
            .map(|(on, sw)| (bang_bang_deviation(u, phi, on, &sw), on, sw))
            .collect();
        candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        for (_, on, sw) in candidates.into_iter().take(12) {
            let cand = refine(u, phi, on, sw);
            if cand.deviation > best.deviation {
                best = cand;
            }
        }
    }
    best
}

/// Largest distance from the start found over bang-bang speed schedules
/// `u ∈ {0, v̄/ω_θ}` (in the turning-angle variable) with at most
/// `n_switch` switches. A lower bound on the true maximum deviation after
/// turning through `φ`.
pub fn empirical_max_deviation(v_max: f64, omega_theta: f64, phi: f64, n_switch: usize) -> f64 {
    empirical_max_program(v_max, omega_theta, phi, n_switch).deviation
}

/// Closed-loop-free circle: full speed, constant turn rate `-omega_theta`.
pub fn circle_program(v_max: f64, omega_theta: f64, duration: f64) -> SteeringProgram {
    SteeringProgram {
        theta_dot: Profile::constant(-omega_theta),
        speed: Profile::constant(v_max),
        duration,
    }
}

/// Random smooth heading-rate program (band-limited Fourier series).
pub fn random_smooth_program<R: Rng>(rng: &mut R, v_max: f64, duration: f64) -> SteeringProgram {
    let terms = (0..3)
        .map(|_| FourierTerm {
            amplitude: rng.gen_range(-1.0..1.0),
            frequency: rng.gen_range(0.5..4.0),
            phase: rng.gen_range(0.0..2.0 * PI),
        })
        .collect();
    SteeringProgram {
        theta_dot: Profile::Fourier {
            mean: rng.gen_range(-1.0..1.0),
            terms,
        },
        speed: Profile::constant(v_max),
        duration,
    }
}
