//! Integrating-factor Runge-Kutta time stepping for the alpha model and for
//! the fractional Navier-Stokes equations.
//!
//! The dissipation `nu |k|^{2 beta}` is integrated exactly per mode; the
//! quadratic term is advanced with the classical fourth-order Lawson scheme.
//! The nonlinearity is evaluated in rotational form `-u x curl v`, whose Leray
//! projection coincides with that of `u . grad v + v . grad u^T` once the
//! products are dealiased.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::energy_record;
use crate::error::{Error, Result};
use crate::fft::fft_nd;
use crate::field::{ScalarField, VectorField};
use crate::field_ops::{leray_project, project_in_place, ProjectedField};
use crate::grid::SpectralGrid;
use crate::helmholtz::filter;
use crate::spectral::dealias;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub nu: f64,
    pub beta: f64,
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    /// Switch the quadratic term off to isolate the dissipation.
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    /// Accept `beta < n/4` with a warning instead of an error.
    #[serde(default)]
    pub allow_exploratory_beta: bool,
}

fn default_true() -> bool {
    true
}

impl SolverParams {
    pub fn new(nu: f64, beta: f64, alpha: f64, dt: f64, t_end: f64) -> Self {
        Self {
            nu,
            beta,
            alpha,
            dt,
            t_end,
            dealias: true,
            nonlinear: true,
            allow_exploratory_beta: false,
        }
    }

    /// Check the parameter ranges for a `dim`-dimensional run and return any warnings.
    pub fn validate(&self, dim: usize) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::param(format!("viscosity must be positive, got {}", self.nu)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::param(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        let critical = dim as f64 / 4.0;
        if self.beta < critical {
            let msg = format!("beta = {} is below the critical value n/4 = {critical}", self.beta);
            if self.allow_exploratory_beta {
                warnings.push(msg);
            } else {
                return Err(Error::param(msg));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::param(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param(format!("final time must be nonnegative, got {}", self.t_end)));
        }
        if self.t_end > 0.0 && self.dt > self.t_end {
            return Err(Error::param(format!(
                "time step {} exceeds the final time {}",
                self.dt, self.t_end
            )));
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Advecting velocity `u = filter(v, alpha)`.
    CamassaHolm,
    /// Self-advection, `u = v`.
    FractionalNse,
}

/// Time and the (unfiltered) spectral velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    v: ProjectedField,
}

impl SimState {
    pub fn new(t: f64, v: ProjectedField) -> Self {
        Self { t, v }
    }

    /// Project an arbitrary field and start at time `t`.
    pub fn from_field(t: f64, v: &VectorField) -> Result<Self> {
        Ok(Self { t, v: leray_project(v)? })
    }

    pub fn velocity(&self) -> &VectorField {
        self.v.field()
    }

    pub fn projected(&self) -> &ProjectedField {
        &self.v
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.v.grid()
    }

    /// The filtered velocity `u`.
    pub fn filtered(&self, alpha: f64) -> Result<VectorField> {
        filter(self.velocity(), alpha)
    }
}

type Coeffs = Vec<Vec<Complex64>>;

/// Precomputed per-mode tables for one grid, parameter set and model.
pub struct Stepper {
    grid: SpectralGrid,
    params: SolverParams,
    model: Model,
    half_decay: Vec<f64>,
    full_decay: Vec<f64>,
    filter: Vec<f64>,
    /// Odd-symbol wavevector components per axis.
    k_odd: Vec<Vec<f64>>,
    resolved: Vec<bool>,
}

impl Stepper {
    pub fn new(grid: SpectralGrid, params: SolverParams, model: Model) -> Result<Self> {
        params.validate(grid.dim())?;
        let n = grid.len();
        let k2 = grid.wavenumber_sq_table();
        let rate = |k2: f64| params.nu * k2.powf(params.beta);
        let half_decay = k2.iter().map(|&k| (-0.5 * params.dt * rate(k)).exp()).collect();
        let full_decay = k2.iter().map(|&k| (-params.dt * rate(k)).exp()).collect();
        let a2 = match model {
            Model::CamassaHolm => params.alpha * params.alpha,
            Model::FractionalNse => 0.0,
        };
        let filter = k2.iter().map(|&k| 1.0 / (1.0 + a2 * k)).collect();
        let k_odd = (0..grid.dim())
            .map(|a| (0..n).map(|i| grid.odd_wavevector(i)[a]).collect())
            .collect();
        let resolved = (0..n).map(|i| !params.dealias || grid.is_resolved(i)).collect();
        Ok(Self { grid, params, model, half_decay, full_decay, filter, k_odd, resolved })
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Prepare an initial state: project, and dealias when the policy asks for it.
    pub fn initial_state(&self, v: &VectorField, t: f64) -> Result<SimState> {
        if v.grid() != &self.grid {
            return Err(Error::contract("initial datum lives on a different grid"));
        }
        let v = if self.params.dealias { dealias(&v.to_spectral())? } else { v.to_spectral() };
        SimState::from_field(t, &v)
    }

    /// Advance one step of `dt`.
    pub fn step(&self, state: &SimState) -> Result<SimState> {
        if state.grid() != &self.grid {
            return Err(Error::contract("state lives on a different grid"));
        }
        let v = to_coeffs(state.velocity())?;
        let next = if self.params.nonlinear {
            self.lawson_rk4(&v)
        } else {
            v.iter().map(|c| scale(c, &self.full_decay)).collect()
        };
        let t = state.t + self.params.dt;
        if next.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::BlowUp { t, reason: "non-finite Fourier coefficient".into() });
        }
        Ok(SimState { t, v: ProjectedField::trusted(from_coeffs(self.grid, next)?) })
    }

    fn lawson_rk4(&self, v: &Coeffs) -> Coeffs {
        let dt = self.params.dt;
        let e1 = &self.half_decay;
        let e2 = &self.full_decay;
        let k1 = self.rhs_scaled(v, dt);
        let a: Coeffs = v.iter().zip(&k1).map(|(v, k)| axpy_scale(v, 0.5, k, e1)).collect();
        let k2 = self.rhs_scaled(&a, dt);
        let ev: Coeffs = v.iter().map(|c| scale(c, e1)).collect();
        let b: Coeffs = ev.iter().zip(&k2).map(|(x, k)| axpy(x, 0.5, k)).collect();
        let k3 = self.rhs_scaled(&b, dt);
        let c: Coeffs = ev
            .iter()
            .zip(&k3)
            .map(|(x, k)| x.iter().zip(k).zip(e1).map(|((x, k), e)| (x + k) * e).collect())
            .collect();
        let k4 = self.rhs_scaled(&c, dt);
        (0..v.len())
            .map(|a| {
                (0..v[a].len())
                    .map(|i| {
                        let (h, f) = (e1[i], e2[i]);
                        f * v[a][i] + (f * k1[a][i] + 2.0 * h * (k2[a][i] + k3[a][i]) + k4[a][i]) / 6.0
                    })
                    .collect()
            })
            .collect()
    }

    /// `-dt P dealias(-u x curl v)`, with `u` the filtered velocity.
    fn rhs_scaled(&self, v: &Coeffs, dt: f64) -> Coeffs {
        let n = self.grid.len();
        let dim = self.grid.dim();
        let np = self.grid.points_per_axis();
        let i = Complex64::new(0.0, 1.0);
        let u_hat: Coeffs = v.iter().map(|c| scale(c, &self.filter)).collect();
        let k = &self.k_odd;
        let mut out: Coeffs = if dim == 2 {
            let w_hat: Vec<Complex64> = (0..n)
                .map(|p| i * (k[0][p] * v[1][p] - k[1][p] * v[0][p]))
                .collect();
            let (u0, u1) = inverse_pair(&u_hat[0], &u_hat[1], dim, np);
            let w = inverse_single(w_hat, dim, np);
            let n0: Vec<f64> = (0..n).map(|p| -u1[p] * w[p]).collect();
            let n1: Vec<f64> = (0..n).map(|p| u0[p] * w[p]).collect();
            let (a, b) = forward_pair(&self.grid, &n0, &n1);
            vec![a, b]
        } else {
            let curl = |a: usize, b: usize| -> Vec<Complex64> {
                (0..n).map(|p| i * (k[a][p] * v[b][p] - k[b][p] * v[a][p])).collect()
            };
            let (w0, w1) = inverse_pair(&curl(1, 2), &curl(2, 0), dim, np);
            let w2 = inverse_single(curl(0, 1), dim, np);
            let (u0, u1) = inverse_pair(&u_hat[0], &u_hat[1], dim, np);
            let u2 = inverse_single(u_hat[2].clone(), dim, np);
            let c0: Vec<f64> = (0..n).map(|p| -(u1[p] * w2[p] - u2[p] * w1[p])).collect();
            let c1: Vec<f64> = (0..n).map(|p| -(u2[p] * w0[p] - u0[p] * w2[p])).collect();
            let c2: Vec<f64> = (0..n).map(|p| -(u0[p] * w1[p] - u1[p] * w0[p])).collect();
            let (a, b) = forward_pair(&self.grid, &c0, &c1);
            let c = forward_single(&self.grid, &c2);
            vec![a, b, c]
        };
        for comp in out.iter_mut() {
            for (z, &keep) in comp.iter_mut().zip(&self.resolved) {
                if !keep {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
        project_in_place(&self.grid, &mut out);
        for comp in out.iter_mut() {
            comp.iter_mut().for_each(|z| *z *= -dt);
        }
        out
    }

    /// The projected nonlinear tendency `-P[N(u, v)]` of a spectral field, for testing.
    pub fn tendency(&self, v: &VectorField) -> Result<VectorField> {
        from_coeffs(self.grid, self.rhs_scaled(&to_coeffs(v)?, 1.0))
    }
}

fn scale(c: &[Complex64], s: &[f64]) -> Vec<Complex64> {
    c.iter().zip(s).map(|(z, s)| z * s).collect()
}

fn axpy(x: &[Complex64], a: f64, y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(x, y)| x + y * a).collect()
}

/// `(x + a y) * s` per entry.
fn axpy_scale(x: &[Complex64], a: f64, y: &[Complex64], s: &[f64]) -> Vec<Complex64> {
    x.iter().zip(y).zip(s).map(|((x, y), s)| (x + y * a) * s).collect()
}

/// Inverse transforms of two Hermitian coefficient arrays using one complex FFT.
fn inverse_pair(a: &[Complex64], b: &[Complex64], dim: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(a, b)| a + i * b).collect();
    fft_nd(&mut z, dim, n, true);
    (z.iter().map(|z| z.re).collect(), z.iter().map(|z| z.im).collect())
}

fn inverse_single(mut a: Vec<Complex64>, dim: usize, n: usize) -> Vec<f64> {
    fft_nd(&mut a, dim, n, true);
    a.into_iter().map(|z| z.re).collect()
}

/// Forward transforms of two real arrays using one complex FFT.
fn forward_pair(grid: &SpectralGrid, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&a, &b)| Complex64::new(a, b)).collect();
    fft_nd(&mut z, grid.dim(), grid.points_per_axis(), false);
    let half = Complex64::new(0.5, 0.0);
    let minus_half_i = Complex64::new(0.0, -0.5);
    let mut fa = Vec::with_capacity(z.len());
    let mut fb = Vec::with_capacity(z.len());
    for p in 0..z.len() {
        let zc = z[grid.partner_flat(p)].conj();
        fa.push((z[p] + zc) * half);
        fb.push((z[p] - zc) * minus_half_i);
    }
    (fa, fb)
}

fn forward_single(grid: &SpectralGrid, a: &[f64]) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = a.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    fft_nd(&mut z, grid.dim(), grid.points_per_axis(), false);
    z
}

fn to_coeffs(v: &VectorField) -> Result<Coeffs> {
    v.components()
        .iter()
        .map(|c| c.spectral().map(<[Complex64]>::to_vec))
        .collect()
}

fn from_coeffs(grid: SpectralGrid, c: Coeffs) -> Result<VectorField> {
    VectorField::new(
        c.into_iter()
            .map(|c| ScalarField::from_spectral(grid, c))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// One step of the alpha model.
pub fn step_ch_alpha(state: &SimState, params: &SolverParams) -> Result<SimState> {
    Stepper::new(*state.grid(), *params, Model::CamassaHolm)?.step(state)
}

/// One step of the fractional Navier-Stokes equations (`alpha` is ignored).
pub fn step_fractional_nse(state: &SimState, params: &SolverParams) -> Result<SimState> {
    Stepper::new(*state.grid(), *params, Model::FractionalNse)?.step(state)
}

/// Receives read-only snapshots every `stride` steps (step 0 included).
pub trait Observer {
    fn stride(&self) -> u64;
    fn observe(&mut self, step: u64, state: &SimState) -> Result<()>;
}

/// Records an [`crate::diagnostics::EnergyRecord`] at every observation.
pub struct EnergyRecorder {
    stride: u64,
    alpha: f64,
    beta: f64,
    pub records: Vec<crate::diagnostics::EnergyRecord>,
}

impl EnergyRecorder {
    /// `alpha` should be zero for fractional Navier-Stokes runs.
    pub fn new(stride: u64, alpha: f64, beta: f64) -> Self {
        Self { stride: stride.max(1), alpha, beta, records: Vec::new() }
    }
}

impl Observer for EnergyRecorder {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, _step: u64, state: &SimState) -> Result<()> {
        self.records.push(energy_record(state.velocity(), state.t, self.alpha, self.beta)?);
        Ok(())
    }
}

/// Keeps copies of the observed states.
pub struct SnapshotRecorder {
    stride: u64,
    pub snapshots: Vec<SimState>,
}

impl SnapshotRecorder {
    pub fn new(stride: u64) -> Self {
        Self { stride: stride.max(1), snapshots: Vec::new() }
    }
}

impl Observer for SnapshotRecorder {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, _step: u64, state: &SimState) -> Result<()> {
        self.snapshots.push(state.clone());
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: SimState,
    pub steps: u64,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

/// Number of steps needed to go from `t` to `t_end`.
pub fn steps_between(t: f64, t_end: f64, dt: f64) -> u64 {
    ((t_end - t) / dt).round().max(0.0) as u64
}

/// Project (and dealias) the initial datum, then step to `params.t_end`.
pub fn run(
    initial: &VectorField,
    params: &SolverParams,
    model: Model,
    observers: &mut [&mut dyn Observer],
) -> Result<RunSummary> {
    let stepper = Stepper::new(*initial.grid(), *params, model)?;
    let state = stepper.initial_state(initial, 0.0)?;
    run_from(&stepper, state, observers)
}

/// Continue from an existing state. Observation steps are counted from `t = 0`,
/// so a resumed run observes at the same times as an uninterrupted one.
pub fn run_from(stepper: &Stepper, mut state: SimState, observers: &mut [&mut dyn Observer]) -> Result<RunSummary> {
    let params = *stepper.params();
    let warnings = params.validate(stepper.grid().dim())?;
    let start = Instant::now();
    let first = steps_between(0.0, state.t, params.dt);
    let n_steps = steps_between(state.t, params.t_end, params.dt);
    let alpha = match stepper.model() {
        Model::CamassaHolm => params.alpha,
        Model::FractionalNse => 0.0,
    };
    let e0 = energy_record(state.velocity(), state.t, alpha, params.beta)?.energy;
    let notify = |step: u64, state: &SimState, observers: &mut [&mut dyn Observer]| -> Result<()> {
        for obs in observers.iter_mut() {
            if step % obs.stride() == 0 {
                obs.observe(step, state)?;
            }
        }
        Ok(())
    };
    notify(first, &state, observers)?;
    for s in 1..=n_steps {
        state = stepper.step(&state)?;
        let e = energy_record(state.velocity(), state.t, alpha, params.beta)?.energy;
        if e > 10.0 * e0 {
            return Err(Error::BlowUp {
                t: state.t,
                reason: format!("energy {e:e} exceeds ten times its initial value {e0:e}"),
            });
        }
        notify(first + s, &state, observers)?;
    }
    Ok(RunSummary {
        final_state: state,
        steps: n_steps,
        wall_time_s: start.elapsed().as_secs_f64(),
        warnings,
    })
}

/// Largest step allowed by `dt <= c dx / max|u|`; infinite for a zero field.
pub fn cfl_time_step(v: &VectorField, alpha: f64, c: f64) -> Result<f64> {
    let u = filter(v, alpha)?.to_physical();
    let grid = *u.grid();
    let comps = u
        .components()
        .iter()
        .map(|c| c.physical())
        .collect::<Result<Vec<_>>>()?;
    let umax = (0..grid.len())
        .map(|p| comps.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if umax == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(c * grid.spacing() / umax)
}
