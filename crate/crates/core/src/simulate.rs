//! Trajectories of `x' = -(A - M) x + d` under bounded disturbances.
//!
//! Inputs are sampled at the start of each integration step and held over
//! the step (zero-order hold), so every integrator sees the same
//! piecewise-constant input. Under that input the exact discrete map
//! `x+ = Φ x + Γ d`, with `Φ = exp(-(A-M) h)` and `Γ = ∫_0^h exp(-(A-M) s) ds`,
//! is the reference; classical fourth-order Runge-Kutta is the default.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{analyze, robustness_vector};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::Network;

#[derive(Clone, Debug, PartialEq)]
pub enum DisturbanceSignal {
    /// Constant input vector.
    Constant(Vec<f64>),
    /// Constant `(A - M) v`; with `v = u` this is the all-ones input.
    WorstCasePlus(Vec<f64>),
    /// Constant `-(A - M) v`.
    WorstCaseMinus(Vec<f64>),
    /// I.i.d. uniform values in `[-amplitude_i, amplitude_i]`, redrawn every
    /// `dwell` time units. `(seed, stream)` fixes the realisation.
    PiecewiseRandom {
        seed: u64,
        stream: u64,
        amplitude: Vec<f64>,
        dwell: f64,
    },
    /// User-provided samples, held from each time until the next.
    Samples { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl DisturbanceSignal {
    pub fn zero(n: usize) -> Self {
        DisturbanceSignal::Constant(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        DisturbanceSignal::Constant(vec![1.0; n])
    }

    /// Random input with a common amplitude and the default dwell
    /// `1 / (2 max_i a_i)`.
    pub fn random(net: &Network, amplitude: f64, seed: u64, stream: u64) -> Self {
        DisturbanceSignal::PiecewiseRandom {
            seed,
            stream,
            amplitude: vec![amplitude; net.node_count()],
            dwell: default_dwell(net),
        }
    }

    /// Per-node bound on `|d_i(t)|`.
    pub fn amplitude(&self, net: &Network) -> Vec<f64> {
        match self {
            DisturbanceSignal::Constant(c) => c.iter().map(|x| x.abs()).collect(),
            DisturbanceSignal::WorstCasePlus(v) | DisturbanceSignal::WorstCaseMinus(v) => {
                net.apply_system(v).iter().map(|x| x.abs()).collect()
            }
            DisturbanceSignal::PiecewiseRandom { amplitude, .. } => amplitude.clone(),
            DisturbanceSignal::Samples { values, .. } => {
                let mut amp = vec![0.0f64; net.node_count()];
                for row in values {
                    for (a, x) in amp.iter_mut().zip(row) {
                        *a = a.max(x.abs());
                    }
                }
                amp
            }
        }
    }

    fn sampler(&self, net: &Network) -> Result<Sampler> {
        let n = net.node_count();
        let check = |len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                })
            }
        };
        Ok(match self {
            DisturbanceSignal::Constant(c) => {
                check(c.len())?;
                Sampler::Constant(c.clone())
            }
            DisturbanceSignal::WorstCasePlus(v) => {
                check(v.len())?;
                Sampler::Constant(net.apply_system(v))
            }
            DisturbanceSignal::WorstCaseMinus(v) => {
                check(v.len())?;
                Sampler::Constant(net.apply_system(v).iter().map(|x| -x).collect())
            }
            DisturbanceSignal::PiecewiseRandom {
                seed,
                stream,
                amplitude,
                dwell,
            } => {
                check(amplitude.len())?;
                if !(*dwell > 0.0) {
                    return Err(Error::InvalidArgument("dwell must be positive".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(*stream);
                Sampler::Random {
                    rng: Box::new(rng),
                    amplitude: amplitude.clone(),
                    dwell: *dwell,
                    values: Vec::new(),
                }
            }
            DisturbanceSignal::Samples { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidArgument(
                        "samples need matching, non-empty time and value lists".into(),
                    ));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidArgument(
                        "sample times must be strictly increasing".into(),
                    ));
                }
                for row in values {
                    check(row.len())?;
                }
                Sampler::Held {
                    times: times.clone(),
                    values: values.clone(),
                    zero: vec![0.0; n],
                }
            }
        })
    }
}

/// `1 / (2 max_i a_i)`.
pub fn default_dwell(net: &Network) -> f64 {
    0.5 / max_rate(net)
}

/// `1e-3 / max_i a_i`.
pub fn default_step(net: &Network) -> f64 {
    1e-3 / max_rate(net)
}

fn max_rate(net: &Network) -> f64 {
    net.self_feedback().iter().copied().fold(0.0, f64::max)
}

enum Sampler {
    Constant(Vec<f64>),
    Random {
        rng: Box<ChaCha8Rng>,
        amplitude: Vec<f64>,
        dwell: f64,
        values: Vec<Vec<f64>>,
    },
    Held {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
        zero: Vec<f64>,
    },
}

impl Sampler {
    /// Input value at time `t`; calls must not go backwards by more than
    /// the intervals already drawn.
    fn at(&mut self, t: f64) -> &[f64] {
        match self {
            Sampler::Constant(c) => c,
            Sampler::Random {
                rng,
                amplitude,
                dwell,
                values,
            } => {
                let k = (t / *dwell).floor().max(0.0) as usize;
                while values.len() <= k {
                    let row = amplitude
                        .iter()
                        .map(|&a| if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 })
                        .collect();
                    values.push(row);
                }
                &values[k]
            }
            Sampler::Held {
                times,
                values,
                zero,
            } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    zero
                } else {
                    &values[k - 1]
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta.
    #[default]
    Rk4,
    /// Exact discrete map for inputs held over each step.
    Exact,
}

#[derive(Clone, Debug)]
pub struct SimOptions {
    pub horizon: f64,
    /// Defaults to [`default_step`].
    pub step: Option<f64>,
    pub integrator: Integrator,
    /// Defaults to rest.
    pub x0: Option<Vec<f64>>,
    /// Keep every `record_stride`-th sample (peaks still use every step).
    pub record_stride: usize,
}

impl SimOptions {
    pub fn new(horizon: f64) -> Self {
        SimOptions {
            horizon,
            step: None,
            integrator: Integrator::Rk4,
            x0: None,
            record_stride: 1,
        }
    }

    pub fn step(mut self, h: f64) -> Self {
        self.step = Some(h);
        self
    }

    pub fn integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    #[serde(with = "crate::decimal")]
    pub step: f64,
    pub integrator: Integrator,
    #[serde(with = "crate::decimal::vec")]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<Vec<f64>>,
    #[serde(skip)]
    pub inputs: Vec<Vec<f64>>,
    /// `max_t |x_i(t)|` over every integration step.
    #[serde(with = "crate::decimal::vec")]
    pub peak: Vec<f64>,
    #[serde(with = "crate::decimal")]
    pub global_peak: f64,
    /// State at the final time.
    #[serde(with = "crate::decimal::vec")]
    pub final_state: Vec<f64>,
}

/// One-step map for a fixed network and step size.
enum Stepper {
    Rk4 { k: DMatrix<f64>, h: f64 },
    Exact { phi: DMatrix<f64>, gamma: DMatrix<f64> },
}

impl Stepper {
    fn new(net: &Network, h: f64, integrator: Integrator) -> Self {
        let k = net.system_matrix();
        match integrator {
            Integrator::Rk4 => Stepper::Rk4 { k, h },
            Integrator::Exact => {
                let n = k.nrows();
                let mut z = DMatrix::zeros(2 * n, 2 * n);
                z.view_mut((0, 0), (n, n)).copy_from(&(-&k * h));
                z.view_mut((0, n), (n, n))
                    .copy_from(&(DMatrix::identity(n, n) * h));
                let e = z.exp();
                Stepper::Exact {
                    phi: e.view((0, 0), (n, n)).into_owned(),
                    gamma: e.view((0, n), (n, n)).into_owned(),
                }
            }
        }
    }

    fn step(&self, x: &DVector<f64>, d: &DVector<f64>) -> DVector<f64> {
        match self {
            Stepper::Rk4 { k, h } => {
                let f = |y: &DVector<f64>| d - k * y;
                let k1 = f(x);
                let k2 = f(&(x + &k1 * (h / 2.0)));
                let k3 = f(&(x + &k2 * (h / 2.0)));
                let k4 = f(&(x + &k3 * *h));
                x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
            }
            Stepper::Exact { phi, gamma } => phi * x + gamma * d,
        }
    }
}

fn resolve_step(net: &Network, opts: &SimOptions) -> Result<(f64, usize)> {
    let h = opts.step.unwrap_or_else(|| default_step(net));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if !(opts.horizon >= 0.0 && opts.horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be nonnegative, got {}",
            opts.horizon
        )));
    }
    let steps = (opts.horizon / h - 1e-9).ceil().max(0.0) as usize;
    Ok((h, steps))
}

/// Integrates the network under `signal` and records the trajectory.
pub fn simulate(net: &Network, signal: &DisturbanceSignal, opts: &SimOptions) -> Result<Trajectory> {
    let (h, steps) = resolve_step(net, opts)?;
    let stepper = Stepper::new(net, h, opts.integrator);
    run(net, &stepper, signal, opts, h, steps, |_, _, _| true).map(|(t, _)| t)
}

/// Core loop. `visit(k, t, x)` sees every step's state and may stop early by
/// returning `false`; the flag is returned alongside the trajectory.
fn run(
    net: &Network,
    stepper: &Stepper,
    signal: &DisturbanceSignal,
    opts: &SimOptions,
    h: f64,
    steps: usize,
    mut visit: impl FnMut(usize, f64, &[f64]) -> bool,
) -> Result<(Trajectory, bool)> {
    let n = net.node_count();
    let mut sampler = signal.sampler(net)?;
    let x0 = match &opts.x0 {
        Some(x0) if x0.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.len(),
            })
        }
        Some(x0) => x0.clone(),
        None => vec![0.0; n],
    };
    let stride = opts.record_stride.max(1);
    let mut x = DVector::from_vec(x0);
    let mut peak: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let mut traj = Trajectory {
        step: h,
        integrator: opts.integrator,
        times: Vec::new(),
        states: Vec::new(),
        inputs: Vec::new(),
        peak: Vec::new(),
        global_peak: 0.0,
        final_state: Vec::new(),
    };
    let mut all_ok = visit(0, 0.0, x.as_slice());
    for k in 0..=steps {
        let t = k as f64 * h;
        let d = sampler.at(t).to_vec();
        if k % stride == 0 || k == steps {
            traj.times.push(t);
            traj.states.push(x.as_slice().to_vec());
            traj.inputs.push(d.clone());
        }
        if k == steps {
            break;
        }
        x = stepper.step(&x, &DVector::from_vec(d));
        let t_next = (k + 1) as f64 * h;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { time: t_next });
        }
        for (p, v) in peak.iter_mut().zip(x.iter()) {
            *p = p.max(v.abs());
        }
        all_ok &= visit(k + 1, t_next, x.as_slice());
    }
    traj.global_peak = peak.iter().copied().fold(0.0, f64::max);
    traj.peak = peak;
    traj.final_state = x.as_slice().to_vec();
    Ok((traj, all_ok))
}

/// Horizon after which transients from rest have decayed below `e^{-30}`
/// relative: the slowest decay rate of a stable network is at least
/// `1 / max_i u_i`, so `30 * gamma_min` time units suffice.
pub fn settling_horizon(gamma_min: f64) -> f64 {
    30.0 * gamma_min
}

#[derive(Clone, Debug)]
pub struct WitnessOptions {
    pub amplitude: f64,
    /// Defaults to [`settling_horizon`] of the minimal gain.
    pub horizon: Option<f64>,
    /// Integration steps per dwell interval.
    pub substeps: usize,
    pub integrator: Integrator,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            amplitude: 1.0,
            horizon: None,
            substeps: 10,
            integrator: Integrator::Exact,
        }
    }
}

/// Relative slack allowed on peaks for integration error.
pub const PEAK_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub stream: u64,
    #[serde(with = "crate::decimal")]
    pub peak: f64,
    #[serde(with = "crate::decimal")]
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    #[serde(with = "crate::decimal")]
    pub gamma: f64,
    #[serde(with = "crate::decimal")]
    pub gamma_min: f64,
    #[serde(with = "crate::decimal")]
    pub horizon: f64,
    #[serde(with = "crate::decimal")]
    pub step: f64,
    pub trials: Vec<TrialResult>,
    #[serde(with = "crate::decimal")]
    pub max_ratio: f64,
    /// No trial exceeded `gamma (1 + PEAK_TOLERANCE)`.
    pub passed: bool,
}

/// Runs `trials` random bounded-disturbance simulations from rest and
/// compares peak/amplitude with `gamma`. Trial `k` uses stream `k` of the
/// generator seeded with `seed`, so results do not depend on scheduling.
pub fn witness_bound(
    net: &Network,
    gamma: f64,
    trials: usize,
    seed: u64,
    opts: &WitnessOptions,
    tol: &Tolerances,
) -> Result<WitnessReport> {
    let report = analyze(net, tol)?;
    let gamma_min = match report.gamma_min {
        Some(g) if crate::config::within_level(g, gamma) => g,
        _ => {
            return Err(Error::precondition(format!(
                "network is not {gamma}-robust (minimal gain {:?})",
                report.gamma_min
            )))
        }
    };
    if !(opts.amplitude > 0.0) || opts.substeps == 0 {
        return Err(Error::InvalidArgument(
            "amplitude and substeps must be positive".into(),
        ));
    }
    let dwell = default_dwell(net);
    let h = dwell / opts.substeps as f64;
    let horizon = opts.horizon.unwrap_or_else(|| settling_horizon(gamma_min));
    let sim = SimOptions::new(horizon)
        .step(h)
        .integrator(opts.integrator)
        .record_stride(usize::MAX);
    let (_, steps) = resolve_step(net, &sim)?;
    let stepper = Stepper::new(net, h, opts.integrator);
    let results: Vec<TrialResult> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let stream = trial as u64;
            let signal = DisturbanceSignal::PiecewiseRandom {
                seed,
                stream,
                amplitude: vec![opts.amplitude; net.node_count()],
                dwell,
            };
            let (traj, _) = run(net, &stepper, &signal, &sim, h, steps, |_, _, _| true)?;
            Ok(TrialResult {
                trial,
                seed,
                stream,
                peak: traj.global_peak,
                ratio: traj.global_peak / opts.amplitude,
            })
        })
        .collect::<Result<_>>()?;
    let max_ratio = results.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(WitnessReport {
        gamma,
        gamma_min,
        horizon,
        step: h,
        trials: results,
        max_ratio,
        passed: max_ratio <= gamma * (1.0 + PEAK_TOLERANCE),
    })
}

/// Simulates two ordered input/initial-state pairs on a common grid and
/// checks `x_low(t_k) <= x_high(t_k)` at every step, up to a relative
/// rounding allowance of `1e-9`.
///
/// Fails with [`Error::PreconditionViolated`] when the sampled inputs or the
/// initial states are not ordered.
pub fn monotonicity_probe(
    net: &Network,
    d_low: &DisturbanceSignal,
    d_high: &DisturbanceSignal,
    x0_low: &[f64],
    x0_high: &[f64],
    opts: &SimOptions,
) -> Result<bool> {
    let n = net.node_count();
    for x0 in [x0_low, x0_high] {
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.len(),
            });
        }
    }
    if x0_low.iter().zip(x0_high).any(|(l, h)| l > h) {
        return Err(Error::precondition("x0_low must not exceed x0_high"));
    }
    let (h, steps) = resolve_step(net, opts)?;
    let mut lo = d_low.sampler(net)?;
    let mut hi = d_high.sampler(net)?;
    for k in 0..steps {
        let t = k as f64 * h;
        let (a, b) = (lo.at(t).to_vec(), hi.at(t));
        if a.iter().zip(b).any(|(x, y)| x > y) {
            return Err(Error::precondition(format!(
                "d_low exceeds d_high at t = {t}"
            )));
        }
    }
    let stepper = Stepper::new(net, h, opts.integrator);
    let quiet = SimOptions {
        record_stride: usize::MAX,
        ..opts.clone()
    };
    let low_opts = SimOptions {
        x0: Some(x0_low.to_vec()),
        ..quiet.clone()
    };
    let mut lows: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    run(net, &stepper, d_low, &low_opts, h, steps, |_, _, x| {
        lows.push(x.to_vec());
        true
    })?;
    let high_opts = SimOptions {
        x0: Some(x0_high.to_vec()),
        ..quiet
    };
    let (_, ordered) = run(net, &stepper, d_high, &high_opts, h, steps, |k, _, x| {
        lows[k]
            .iter()
            .zip(x)
            .all(|(l, u)| *l <= *u + 1e-9 * (1.0 + l.abs().max(u.abs())))
    })?;
    Ok(ordered)
}

/// `‖x(horizon) - u‖∞` for the constant all-ones input from rest.
pub fn equilibrium_gap(net: &Network, opts: &SimOptions, tol: &Tolerances) -> Result<f64> {
    let report = robustness_vector(net, tol)?;
    let traj = simulate(net, &DisturbanceSignal::ones(net.node_count()), opts)?;
    Ok(traj
        .final_state
        .iter()
        .zip(report.u())
        .map(|(x, u)| (x - u).abs())
        .fold(0.0, f64::max))
}
