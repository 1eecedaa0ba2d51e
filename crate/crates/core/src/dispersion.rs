//! Imaginary-time traces of `ln|⟨[H, O_k]⟩|` and extraction of `Δ_k` from
//! their asymptotic slope.

use std::collections::VecDeque;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ipeps::{Environment, EvolutionParams, IpepsError, IpepsState};
use crate::lattice::{self, LatticeError, Momentum, UnitCell};
use crate::model::{self, ModelError, TfimParams};

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error("invalid evolution parameters: {0}")]
    InvalidParams(String),

    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("fit window [{start}, {end}) holds fewer than {MIN_FIT_SAMPLES} samples")]
    WindowTooSmall { start: usize, end: usize },

    #[error(transparent)]
    Lattice(#[from] LatticeError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Ipeps(#[from] IpepsError),

    #[error("result format: {0}")]
    Format(#[from] serde_json::Error),
}

pub type DispersionResult<T> = Result<T, DispersionError>;

/// Smallest number of samples accepted by [`fit_slope`].
pub const MIN_FIT_SAMPLES: usize = 10;

/// `C_k(τ) = ln|⟨φ(τ)|[H, O_k]|φ(τ)⟩|` sampled after every sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub k: Momentum,
    pub dtau: f64,
    /// `(τ, C_k(τ))` pairs.
    pub samples: Vec<(f64, f64)>,
    /// τ at which `|⟨[H, O_k]⟩|` fell below the floor; no samples follow it.
    pub truncated_at: Option<f64>,
}

impl EvolutionTrace {
    pub fn new(k: Momentum, dtau: f64) -> Self {
        Self {
            k,
            dtau,
            samples: Vec::new(),
            truncated_at: None,
        }
    }

    pub fn from_samples(k: Momentum, dtau: f64, samples: Vec<(f64, f64)>) -> Self {
        Self {
            k,
            dtau,
            samples,
            truncated_at: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Half-open range `[start, end)` of sample indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub start: usize,
    pub end: usize,
}

impl FitWindow {
    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub k: Momentum,
    /// Minus the fitted slope.
    pub delta_k: f64,
    pub intercept: f64,
    /// `(τ_start, τ_end)` of the fitted samples.
    pub window: (f64, f64),
    pub samples: FitWindow,
    /// Root-mean-square residual of the linear fit.
    pub residual: f64,
    /// Standard error of the slope, including a split-half drift term (see [`fit_slope`]).
    pub slope_std: f64,
    pub plateau_ok: bool,
}

/// Plateau detection thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub rel_tol: f64,
    pub min_frac: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            min_frac: 0.2,
        }
    }
}

/// One step of a running trajectory, handed to observers.
pub struct TraceStep<'a> {
    pub step: usize,
    pub tau: f64,
    pub state: &'a IpepsState,
    /// Commutator expectation per momentum; `None` once a trace is truncated.
    pub values: &'a [Option<C64>],
}

/// Evolves one random iPEPS and records `C_k(τ)` for every momentum.
pub fn run_trace(
    params: &TfimParams,
    ev: &EvolutionParams,
    ks: &[Momentum],
    cell: &UnitCell,
) -> DispersionResult<Vec<EvolutionTrace>> {
    let state = IpepsState::init_random(cell, ev.seed, ev.d_max)?;
    run_trace_from(state, params, ev, ks, |_| {})
}

/// Like [`run_trace`] but starting from a given state and reporting every step to `observer`.
pub fn run_trace_from(
    mut state: IpepsState,
    params: &TfimParams,
    ev: &EvolutionParams,
    ks: &[Momentum],
    mut observer: impl FnMut(&TraceStep<'_>),
) -> DispersionResult<Vec<EvolutionTrace>> {
    ev.validate().map_err(DispersionError::InvalidParams)?;
    let cell = state.cell().clone();
    let term_sets = ks
        .iter()
        .map(|k| model::commutator_terms(params, k, &cell))
        .collect::<Result<Vec<_>, _>>()?;
    let gate = model::build_gate(params, ev.dtau)?;

    let mut traces: Vec<EvolutionTrace> = ks
        .iter()
        .map(|k| EvolutionTrace::new(k.clone(), ev.dtau))
        .collect();
    let mut values: Vec<Option<C64>> = vec![None; ks.len()];
    let mut active: Vec<usize> = (0..ks.len()).collect();

    for step in 1..=ev.max_steps {
        if active.is_empty() {
            break;
        }
        state.sweep(&gate)?;
        let tau = step as f64 * ev.dtau;
        state.set_tau(tau);

        let env = Environment::new(&state);
        let sets: Vec<_> = active.iter().map(|&i| term_sets[i].clone()).collect();
        let evaluated = env.evaluate_many(&sets)?;
        values.iter_mut().for_each(|v| *v = None);
        for (&i, v) in active.iter().zip(&evaluated) {
            values[i] = Some(*v);
        }
        observer(&TraceStep {
            step,
            tau,
            state: &state,
            values: &values,
        });

        active.retain(|&i| {
            let magnitude = values[i].map_or(0.0, |v| v.norm());
            if magnitude >= ev.floor && magnitude.is_finite() {
                traces[i].samples.push((tau, magnitude.ln()));
                true
            } else {
                traces[i].truncated_at = Some(tau);
                false
            }
        });
    }
    Ok(traces)
}

/// Central differences in the interior, one-sided at both ends.
pub fn numerical_derivative(trace: &EvolutionTrace) -> DispersionResult<Vec<(f64, f64)>> {
    let s = &trace.samples;
    let n = s.len();
    if n < 3 {
        return Err(DispersionError::TooFewSamples {
            needed: 3,
            found: n,
        });
    }
    let slope = |a: usize, b: usize| (s[b].1 - s[a].1) / (s[b].0 - s[a].0);
    Ok((0..n)
        .map(|i| {
            let d = match i {
                0 => slope(0, 1),
                i if i == n - 1 => slope(n - 2, n - 1),
                i => slope(i - 1, i + 1),
            };
            (s[i].0, d)
        })
        .collect())
}

/// Longest window of the trace over which the numerical derivative varies
/// (max − min) by less than `rel_tol` times its magnitude, and which covers
/// at least `min_frac` of the samples. Among equally long windows the
/// latest one wins.
///
/// Windows need not reach the end of the trace: once the commutator nears
/// the rounding floor the derivative turns to noise and no flat suffix exists.
pub fn detect_plateau(trace: &EvolutionTrace, rel_tol: f64, min_frac: f64) -> Option<FitWindow> {
    assert!(rel_tol > 0.0, "rel_tol must be positive");
    assert!(
        min_frac > 0.0 && min_frac < 1.0,
        "min_frac must lie in (0, 1)"
    );
    let deriv: Vec<f64> = numerical_derivative(trace)
        .ok()?
        .into_iter()
        .map(|(_, d)| d)
        .collect();
    let n = deriv.len();
    let min_len = ((min_frac * n as f64).ceil() as usize).max(MIN_FIT_SAMPLES);
    if min_len > n {
        return None;
    }

    // monotone deques of indices holding the running max and min
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut start = 0;
    let mut best: Option<FitWindow> = None;
    for end in 0..n {
        while maxq.back().is_some_and(|&i| deriv[i] <= deriv[end]) {
            maxq.pop_back();
        }
        maxq.push_back(end);
        while minq.back().is_some_and(|&i| deriv[i] >= deriv[end]) {
            minq.pop_back();
        }
        minq.push_back(end);

        while start <= end {
            let hi = deriv[maxq[0]];
            let lo = deriv[minq[0]];
            // |median| lies between |hi| and |lo| when both share a sign
            if hi - lo < rel_tol * hi.abs().min(lo.abs()) && hi * lo > 0.0 {
                break;
            }
            start += 1;
            if maxq[0] < start {
                maxq.pop_front();
            }
            if minq[0] < start {
                minq.pop_front();
            }
            if maxq.is_empty() || minq.is_empty() {
                break;
            }
        }
        if start > end {
            maxq.clear();
            minq.clear();
            continue;
        }
        let len = end + 1 - start;
        if len >= min_len && best.is_none_or(|b| len >= b.len()) {
            best = Some(FitWindow {
                start,
                end: end + 1,
            });
        }
    }
    best
}

/// `(slope, intercept, ssr, sxx)` of an ordinary least-squares line.
fn ols(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_c = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_c)).sum();
    let slope = sxy / sxx;
    let intercept = mean_c - slope * mean_t;
    let ssr: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, ssr, sxx)
}

/// Ordinary least squares of `C` against `τ` over `window`.
///
/// Residuals of a real trace are a smooth drift rather than white noise, so
/// the textbook slope error alone is far too optimistic. When the window is
/// long enough, half the difference between the slopes of its two halves is
/// added in quadrature as a systematic term.
pub fn fit_slope(
    trace: &EvolutionTrace,
    window: FitWindow,
    from_plateau: bool,
) -> DispersionResult<FitResult> {
    if window.end > trace.len() || window.len() < MIN_FIT_SAMPLES {
        return Err(DispersionError::WindowTooSmall {
            start: window.start,
            end: window.end,
        });
    }
    let pts = &trace.samples[window.start..window.end];
    let n = pts.len() as f64;
    let (slope, intercept, ssr, sxx) = ols(pts);
    let residual = (ssr / n).sqrt();
    let mut variance = ssr / (n - 2.0) / sxx;
    if pts.len() >= 2 * MIN_FIT_SAMPLES {
        let (first, second) = pts.split_at(pts.len() / 2);
        let drift = (ols(first).0 - ols(second).0) / 2.0;
        variance += drift * drift;
    }
    Ok(FitResult {
        k: trace.k.clone(),
        delta_k: -slope,
        intercept,
        window: (pts[0].0, pts[pts.len() - 1].0),
        samples: window,
        residual,
        slope_std: variance.sqrt(),
        plateau_ok: from_plateau && slope <= 0.0,
    })
}

/// Fits over the detected plateau, or over the trailing `min_frac` of the
/// trace when no plateau exists (flagged with `plateau_ok = false`).
pub fn fit_trace(trace: &EvolutionTrace, opts: &FitOptions) -> DispersionResult<FitResult> {
    if let Some(window) = detect_plateau(trace, opts.rel_tol, opts.min_frac) {
        return fit_slope(trace, window, true);
    }
    let n = trace.len();
    let len = ((opts.min_frac * n as f64).ceil() as usize)
        .max(MIN_FIT_SAMPLES)
        .min(n);
    fit_slope(
        trace,
        FitWindow {
            start: n - len,
            end: n,
        },
        false,
    )
}

/// How momenta are assigned to unit cells in [`compute_curve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellPolicy {
    /// One trajectory per distinct minimal cell.
    Minimal,
    /// One trajectory on the smallest cell fitting every momentum.
    Common,
    /// One trajectory on the given cell.
    Fixed(UnitCell),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub k: Momentum,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub created_unix: u64,
    pub code_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub params: TfimParams,
    pub d_max: usize,
    pub dtau: f64,
    /// Energy unit of `delta_k`: `"J"` or `"g"`.
    pub unit: String,
    pub points: Vec<FitResult>,
    #[serde(default)]
    pub failures: Vec<PointFailure>,
    pub provenance: Provenance,
}

impl DispersionCurve {
    pub fn point(&self, k: &Momentum) -> Option<&FitResult> {
        self.points.iter().find(|p| p.k.same_as(k))
    }

    pub fn to_json(&self) -> DispersionResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> DispersionResult<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A curve together with the raw traces it was fitted from.
#[derive(Clone, Debug)]
pub struct CurveRun {
    pub curve: DispersionCurve,
    pub traces: Vec<EvolutionTrace>,
}

/// Removes repeated momenta, keeping the first occurrence.
pub fn unique_momenta(ks: &[Momentum]) -> Vec<Momentum> {
    let mut out: Vec<Momentum> = Vec::new();
    for k in ks {
        if !out.iter().any(|q| q.same_as(k)) {
            out.push(k.clone());
        }
    }
    out
}

fn group_by_cell(
    ks: &[Momentum],
    policy: &CellPolicy,
) -> DispersionResult<Vec<(UnitCell, Vec<Momentum>)>> {
    let mut groups: Vec<(UnitCell, Vec<Momentum>)> = Vec::new();
    match policy {
        CellPolicy::Minimal => {
            for k in ks {
                let cell = lattice::minimal_cell_for(k)?;
                match groups.iter_mut().find(|(c, _)| *c == cell) {
                    Some((_, members)) => members.push(k.clone()),
                    None => groups.push((cell, vec![k.clone()])),
                }
            }
        }
        CellPolicy::Common => {
            let mut cell: Option<UnitCell> = None;
            for k in ks {
                let c = lattice::minimal_cell_for(k)?;
                cell = Some(match cell {
                    Some(prev) => prev.lcm(&c)?,
                    None => c,
                });
            }
            if let Some(cell) = cell {
                groups.push((cell, ks.to_vec()));
            }
        }
        CellPolicy::Fixed(cell) => {
            for k in ks {
                cell.check_commensurate(k)?;
            }
            groups.push((cell.clone(), ks.to_vec()));
        }
    }
    Ok(groups)
}

pub fn compute_curve(
    params: &TfimParams,
    ev: &EvolutionParams,
    momenta: &[Momentum],
    policy: &CellPolicy,
    fit: &FitOptions,
) -> DispersionResult<DispersionCurve> {
    Ok(compute_curve_with_traces(params, ev, momenta, policy, fit)?.curve)
}

/// Groups momenta by cell, runs one trajectory per group and fits every trace.
///
/// Numerical failures of a group or a fit are recorded per point instead of
/// aborting the whole curve.
pub fn compute_curve_with_traces(
    params: &TfimParams,
    ev: &EvolutionParams,
    momenta: &[Momentum],
    policy: &CellPolicy,
    fit: &FitOptions,
) -> DispersionResult<CurveRun> {
    params.validate()?;
    ev.validate().map_err(DispersionError::InvalidParams)?;
    let ks = unique_momenta(momenta);
    for k in &ks {
        if k.dimensionality() != params.dimensionality {
            return Err(LatticeError::DimensionMismatch {
                momentum: k.dimensionality(),
                expected: params.dimensionality,
            }
            .into());
        }
    }
    let groups = group_by_cell(&ks, policy)?;

    let outcomes: Vec<(Vec<Momentum>, DispersionResult<Vec<EvolutionTrace>>)> = groups
        .into_par_iter()
        .map(|(cell, members)| {
            let traces = run_trace(params, ev, &members, &cell);
            (members, traces)
        })
        .collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut traces = Vec::new();
    for (members, outcome) in outcomes {
        match outcome {
            Ok(group_traces) => traces.extend(group_traces),
            Err(e) => failures.extend(members.into_iter().map(|k| PointFailure {
                k,
                reason: e.to_string(),
            })),
        }
    }
    // report in request order
    let mut ordered = Vec::with_capacity(traces.len());
    for k in &ks {
        if let Some(pos) = traces.iter().position(|t: &EvolutionTrace| t.k.same_as(k)) {
            ordered.push(traces.swap_remove(pos));
        }
    }
    for trace in &ordered {
        match fit_trace(trace, fit) {
            Ok(r) => points.push(r),
            Err(e) => failures.push(PointFailure {
                k: trace.k.clone(),
                reason: e.to_string(),
            }),
        }
    }

    let created_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(CurveRun {
        curve: DispersionCurve {
            params: *params,
            d_max: ev.d_max,
            dtau: ev.dtau,
            unit: params.energy_unit().to_string(),
            points,
            failures,
            provenance: Provenance {
                seed: ev.seed,
                created_unix,
                code_version: env!("CARGO_PKG_VERSION").to_string(),
            },
        },
        traces: ordered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
        Normal::new(0.0, sigma).unwrap().sample(rng)
    }

    fn synthetic(f: impl Fn(f64) -> f64, n: usize, dtau: f64) -> EvolutionTrace {
        let samples = (1..=n).map(|i| {
            let t = i as f64 * dtau;
            (t, f(t))
        });
        EvolutionTrace::from_samples(Momentum::new(vec![0.0, 0.0]), dtau, samples.collect())
    }

    #[test]
    fn derivative_of_linear_trace() {
        let t = synthetic(|x| -2.0 * x + 1.0, 50, 0.01);
        for (_, d) in numerical_derivative(&t).unwrap() {
            assert!((d + 2.0).abs() < 1e-10);
        }
        let c = synthetic(|_| 4.2, 5, 0.01);
        assert!(numerical_derivative(&c)
            .unwrap()
            .iter()
            .all(|(_, d)| *d == 0.0));
    }

    #[test]
    fn derivative_of_quadratic() {
        let t = synthetic(|x| x * x, 200, 0.01);
        let d = numerical_derivative(&t).unwrap();
        for &(tau, v) in &d[1..d.len() - 1] {
            assert!((v - 2.0 * tau).abs() < 1e-6);
        }
        assert_eq!(d.len(), t.len());
    }

    #[test]
    fn derivative_needs_three_samples() {
        let t = synthetic(|x| x, 2, 0.01);
        assert!(matches!(
            numerical_derivative(&t),
            Err(DispersionError::TooFewSamples {
                needed: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn plateau_of_linear_trace_is_everything() {
        let t = synthetic(|x| -2.0 * x + 0.5, 300, 0.01);
        assert_eq!(
            detect_plateau(&t, 1e-3, 0.2),
            Some(FitWindow { start: 0, end: 300 })
        );
    }

    #[test]
    fn plateau_after_kink() {
        let t = synthetic(
            |x| {
                if x < 1.0 {
                    -3.0 * x
                } else {
                    -3.0 - 2.0 * (x - 1.0)
                }
            },
            400,
            0.01,
        );
        let w = detect_plateau(&t, 1e-3, 0.2).unwrap();
        assert!(t.samples[w.start].0 >= 1.0);
        assert_eq!(w.end, 400);
    }

    #[test]
    fn noise_has_no_plateau() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = synthetic(|_| 0.0, 300, 0.01);
        let samples = t
            .samples
            .iter()
            .map(|&(x, _)| (x, -x + gaussian(&mut rng, 0.5)))
            .collect();
        let noisy = EvolutionTrace::from_samples(t.k.clone(), 0.01, samples);
        assert_eq!(detect_plateau(&noisy, 1e-3, 0.2), None);
    }

    #[test]
    fn exact_linear_fit() {
        let t = synthetic(|x| -2.0201 * x + 0.3, 200, 0.01);
        let w = detect_plateau(&t, 1e-3, 0.2).unwrap();
        let r = fit_slope(&t, w, true).unwrap();
        assert!((r.delta_k - 2.0201).abs() < 1e-10);
        assert!(r.residual < 1e-12);
        assert!(r.plateau_ok);
        assert!((r.intercept - 0.3).abs() < 1e-10);
    }

    #[test]
    fn small_window_rejected() {
        let t = synthetic(|x| x, 20, 0.01);
        assert!(matches!(
            fit_slope(&t, FitWindow { start: 12, end: 20 }, false),
            Err(DispersionError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn noisy_slope_within_three_sigma() {
        let mut outside = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = synthetic(|x| -2.0 * x + 1.0, 400, 0.01);
            let samples = t
                .samples
                .iter()
                .map(|&(x, c)| (x, c + gaussian(&mut rng, 1e-4)))
                .collect();
            let noisy = EvolutionTrace::from_samples(t.k.clone(), 0.01, samples);
            let r = fit_slope(&noisy, FitWindow { start: 0, end: 400 }, false).unwrap();
            if (r.delta_k - 2.0).abs() > 3.0 * r.slope_std {
                outside += 1;
            }
        }
        // 3σ excursions happen 0.27% of the time
        assert!(outside <= 2, "{outside} of 100 fits outside 3σ");
    }

    #[test]
    fn fit_trace_falls_back_to_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = synthetic(|x| -x, 100, 0.01);
        let samples = t
            .samples
            .iter()
            .map(|&(x, c)| (x, c + gaussian(&mut rng, 0.1)))
            .collect();
        let noisy = EvolutionTrace::from_samples(t.k.clone(), 0.01, samples);
        let r = fit_trace(&noisy, &FitOptions::default()).unwrap();
        assert!(!r.plateau_ok);
        assert_eq!(
            r.samples,
            FitWindow {
                start: 80,
                end: 100
            }
        );
    }

    #[test]
    fn unique_momenta_drops_repeats() {
        let path = lattice::high_symmetry_path(2).unwrap();
        let ks = unique_momenta(&path);
        let labels: String = ks.iter().map(Momentum::label_str).collect();
        assert_eq!(labels, "XMSG");
    }

    #[test]
    fn grouping_by_minimal_cell() {
        let path = unique_momenta(&lattice::high_symmetry_path(2).unwrap());
        let groups = group_by_cell(&path, &CellPolicy::Minimal).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0.dims(), &[2, 2]);
        assert_eq!(groups[0].1.len(), 3);
        assert_eq!(groups[1].0.dims(), &[4, 4]);
        let common = group_by_cell(&path, &CellPolicy::Common).unwrap();
        assert_eq!(common.len(), 1);
        assert_eq!(common[0].0.dims(), &[4, 4]);
        let fixed = CellPolicy::Fixed(UnitCell::new(vec![2, 2]).unwrap());
        assert!(group_by_cell(&path, &fixed).is_err());
    }
}
