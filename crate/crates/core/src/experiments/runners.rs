//! Scenario runners. Each computes a [`Report`] plus typed results; writing
//! files is left to [`run_experiment`].

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
use super::config::{ExperimentConfig, Scenario};
use super::output::{write_energy_csv, Check, Report, Status};
use crate::datum::{band_random, resolution_defect, scaled_bump, DatumSpec};
use crate::diagnostics::{
    energy_balance, energy_is_monotone, energy_record, fit_decay, fourier_amplitude_bound_check, lp_norm, seminorm_sq,
    solution_distance, time_average_decay_check, DecayFit, EnergyRecord, FitWindow,
};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::field_ops::{leray_project, orthogonality_defect};
use crate::grid::SpectralGrid;
use crate::helmholtz::{filter, filter_convergence_curve, filter_identity_residual, gamma_exponent, loglog_slope};
use crate::integrator::{run, run_from, Model, Observer, SimState, SnapshotRecorder, SolverParams, Stepper};
use crate::kernels::{
    expected_kernel_slope, gagliardo_seminorm_double_integral_1d, gagliardo_seminorm_fourier_1d,
    heat_kernel_values, integral_fractional_laplacian, kernel_lp_norm_slope, multiplier_fractional_laplacian_1d,
    normalization_constant, scaling_deviation, HeatKernelSpec, IntegralOptions, KernelVariant,
};
use crate::multiplier::Multiplier;
use crate::spectral::{apply_multiplier, fractional_laplacian, lambda_power};

fn effective_alpha(config: &ExperimentConfig) -> f64 {
    match config.model {
        Model::CamassaHolm => config.params.alpha,
        Model::FractionalNse => 0.0,
    }
}

fn build_datum(config: &ExperimentConfig, grid: &SpectralGrid) -> Result<VectorField> {
    config.datum.build(grid)
}

/// Records energy entries and `|grad^m v|^2` for `m = 2..=order`.
struct DecayObserver {
    stride: u64,
    alpha: f64,
    beta: f64,
    order: u32,
    records: Vec<EnergyRecord>,
    higher: Vec<Vec<(f64, f64)>>,
}

impl Observer for DecayObserver {
    fn stride(&self) -> u64 {
        self.stride
    }

    fn observe(&mut self, _step: u64, state: &SimState) -> Result<()> {
        let v = state.velocity();
        self.records.push(energy_record(v, state.t, self.alpha, self.beta)?);
        for (i, m) in (2..=self.order).enumerate() {
            self.higher[i].push((state.t, seminorm_sq(v, m as f64)?));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedFit {
    pub quantity: String,
    pub predicted: f64,
    pub fit: Option<DecayFit>,
    pub error: Option<String>,
}

impl NamedFit {
    fn new(quantity: &str, predicted: f64, series: &[(f64, f64)], window: FitWindow) -> Self {
        match fit_decay(series, window) {
            Ok(fit) => Self { quantity: quantity.into(), predicted, fit: Some(fit), error: None },
            Err(e) => Self { quantity: quantity.into(), predicted, fit: None, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecayOutcome {
    pub report: Report,
    pub records: Vec<EnergyRecord>,
    pub fits: Vec<NamedFit>,
}

impl DecayOutcome {
    pub fn fit(&self, quantity: &str) -> Option<&DecayFit> {
        self.fits.iter().find(|f| f.quantity == quantity).and_then(|f| f.fit.as_ref())
    }
}

/// Run the model from the datum and fit decay exponents of `E`, `|v|^2`,
/// `|grad v|^2` and `|grad^m v|^2`.
pub fn decay_experiment(config: &ExperimentConfig) -> Result<DecayOutcome> {
    let grid = config.grid.build()?;
    let mut report = Report::new(config);
    report.warnings = config.validate()?;
    let params = config.params;
    let alpha = effective_alpha(config);
    let v0 = build_datum(config, &grid)?;
    let order = config.fit.gradient_order.max(1);
    let mut obs = DecayObserver {
        stride: config.sample_stride,
        alpha,
        beta: params.beta,
        order,
        records: Vec::new(),
        higher: vec![Vec::new(); order.saturating_sub(1) as usize],
    };
    let result = run(&v0, &params, config.model, &mut [&mut obs]);
    if let Err(e) = result {
        return match e {
            Error::BlowUp { .. } => {
                report.blow_up(e.to_string());
                Ok(DecayOutcome { report, records: obs.records, fits: Vec::new() })
            }
            other => Err(other),
        };
    }

    let window = match (config.fit.t_lo, config.fit.t_hi) {
        (Some(lo), Some(hi)) => FitWindow::new(lo, hi)?,
        (lo, hi) => {
            let default = FitWindow::default_for_horizon(params.t_end)?;
            FitWindow::new(lo.unwrap_or(default.t_lo), hi.unwrap_or(default.t_hi))?
        }
    };
    report.fit_windows.push(("decay".into(), window.t_lo, window.t_hi));
    let n = grid.dim() as f64;
    let b = params.beta;
    let base = -n / (2.0 * b);
    let series = |f: fn(&EnergyRecord) -> f64| obs.records.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>();
    let mut fits = vec![
        NamedFit::new("E", base, &series(|r| r.energy), window),
        NamedFit::new("v_l2", base, &series(|r| r.v_l2), window),
        NamedFit::new("gradv_l2", base - 1.0 / b, &series(|r| r.gradv_l2), window),
    ];
    for (i, m) in (2..=order).enumerate() {
        fits.push(NamedFit::new(&format!("grad{m}v_l2"), base - m as f64 / b, &obs.higher[i], window));
    }

    let (target, band, r2) = match config.scenario {
        Scenario::GradientDecay => ("gradv_l2", config.fit.gradient_band, config.fit.gradient_r2),
        _ => ("E", config.fit.energy_band, config.fit.energy_r2),
    };
    let tf = fits.iter().find(|f| f.quantity == target).expect("target fit exists");
    match &tf.fit {
        Some(fit) => {
            report.push(Check::within(
                format!("{target} exponent"),
                fit.exponent,
                tf.predicted - band,
                tf.predicted + band,
            ));
            report.push(Check::at_least(format!("{target} fit r^2"), fit.r_squared, r2));
        }
        None => report.fail(format!("{target} fit failed: {}", tf.error.clone().unwrap_or_default())),
    }
    let e0 = obs.records.first().map(|r| r.energy).unwrap_or(0.0);
    report.push(Check::flag("energy nonincreasing", energy_is_monotone(&obs.records, 1e-12), "E(t_{j+1}) <= E(t_j) + 1e-12 E(0)"));
    let norms: Vec<(f64, f64)> = obs.records.iter().map(|r| (r.t, r.v_l2.sqrt())).collect();
    let cesaro = time_average_decay_check(&norms)?;
    report.push(Check::flag("time average of |v| decreasing", cesaro.passed, "nonincreasing over the final half"));
    let amp = fourier_amplitude_bound_check(&obs.records);
    report.push(Check::flag("Fourier amplitude ratio bounded", amp.bounded, "no growth in the second half"));
    let balance = energy_balance(&obs.records, params.nu);

    report.details = json!({
        "fits": fits,
        "initial_energy": e0,
        "energy_balance": { "max_step_residual": balance.max_step_residual, "cumulative_drift": balance.cumulative_drift },
        "amplitude_bound": { "max_ratio": amp.max_ratio, "first_half_max": amp.first_half_max, "second_half_max": amp.second_half_max },
        "time_average": { "mid_mean": cesaro.mid_mean, "end_mean": cesaro.end_mean },
        "sample_stride": config.sample_stride,
    });
    Ok(DecayOutcome { report, records: obs.records, fits })
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyMember {
    pub epsilon: f64,
    pub u0_l2: f64,
    pub grad_u0_l2: f64,
    pub grad2_u0_l2: f64,
    pub v0_l2: f64,
    pub grad_v0_l2: f64,
    /// `|u0|^2 + 2 a^2 eps^2 |grad u0|^2 + a^4 eps^4 |lap u0|^2` from the unit member.
    pub v0_l2_predicted: f64,
    pub half_life: Option<f64>,
    /// Largest `(|u0|^2 - E(t)) / (eps^2 t)` over samples in `(0, horizon]`.
    pub loss_rate: f64,
    /// Largest `|grad v(t)|^2 / eps^2` along the run.
    pub sup_grad_v_scaled: f64,
    pub records: Vec<EnergyRecord>,
}

#[derive(Debug, Clone)]
pub struct FamilyOutcome {
    pub report: Report,
    pub members: Vec<FamilyMember>,
    /// The fitted constant of the lower bound.
    pub c_fit: f64,
}

/// The family `u0^eps = eps^{n/2} u0(eps x)` with `v0^eps = (1 - a^2 Lap) u0^eps`.
pub fn scaled_family_experiment(config: &ExperimentConfig) -> Result<FamilyOutcome> {
    let grid = config.grid.build()?;
    let mut report = Report::new(config);
    report.warnings = config.validate()?;
    let DatumSpec::Scaled { amplitude, width, .. } = config.datum else {
        return Err(Error::Config("scaled-family needs a datum of kind \"scaled\"".into()));
    };
    let params = config.params;
    let alpha = effective_alpha(config);
    let fam = &config.family;
    let inverse_filter = Multiplier::radial(grid, |k| 1.0 + alpha * alpha * k * k)?;

    // Initial data and resolution checks, in the order given.
    let mut data = Vec::new();
    for &eps in &fam.epsilons {
        let u0 = scaled_bump(&grid, amplitude, width, eps)?.to_spectral();
        let v0 = apply_multiplier(&u0, &inverse_filter)?;
        let defect = resolution_defect(&v0);
        if defect > fam.resolution_tolerance {
            return Err(Error::Resolution(format!(
                "member eps = {eps} has resolution defect {defect:e} > {:e}; enlarge the box or refine the grid",
                fam.resolution_tolerance
            )));
        }
        data.push((eps, u0, v0));
    }
    let unit = scaled_bump(&grid, amplitude, width, 1.0)?;
    let (n0, g0, l0) = (unit.l2_norm_sq(), seminorm_sq(&unit, 1.0)?, seminorm_sq(&unit, 2.0)?);

    let members: Vec<FamilyMember> = data
        .par_iter()
        .map(|(eps, u0, v0)| -> Result<FamilyMember> {
            let eps = *eps;
            let stepper = Stepper::new(grid, params, config.model)?;
            let mut state = stepper.initial_state(v0, 0.0)?;
            let stride = config.sample_stride;
            let mut records = vec![energy_record(state.velocity(), 0.0, alpha, params.beta)?];
            let e0 = records[0].energy;
            let mut sup_grad = records[0].gradv_l2;
            let mut step: u64 = 0;
            let mut half_life = None;
            let cap_steps = (fam.half_life_cap / params.dt).round() as u64;
            let horizon_steps = (fam.horizon / params.dt).round() as u64;
            while step < cap_steps {
                state = stepper.step(&state)?;
                step += 1;
                let r = energy_record(state.velocity(), state.t, alpha, params.beta)?;
                if r.energy > 10.0 * e0 {
                    return Err(Error::BlowUp { t: state.t, reason: "energy exceeds ten times its initial value".into() });
                }
                sup_grad = sup_grad.max(r.gradv_l2);
                if half_life.is_none() && r.energy <= 0.5 * e0 {
                    let prev = records.last().expect("initial record");
                    // Linear interpolation between the last sample and this step.
                    let frac = (prev.energy - 0.5 * e0) / (prev.energy - r.energy);
                    half_life = Some(prev.t + frac * (r.t - prev.t));
                }
                if step % stride == 0 || half_life.is_some() {
                    records.push(r);
                }
                if half_life.is_some() && step >= horizon_steps {
                    break;
                }
            }
            let u0_l2 = u0.l2_norm_sq();
            let loss_rate = records
                .iter()
                .filter(|r| r.t > 0.0 && r.t <= fam.horizon + 1e-9)
                .map(|r| (u0_l2 - r.energy) / (eps * eps * r.t))
                .fold(f64::NEG_INFINITY, f64::max);
            let e2 = eps * eps;
            Ok(FamilyMember {
                epsilon: eps,
                u0_l2,
                grad_u0_l2: seminorm_sq(u0, 1.0)?,
                grad2_u0_l2: seminorm_sq(u0, 2.0)?,
                v0_l2: v0.l2_norm_sq(),
                grad_v0_l2: seminorm_sq(v0, 1.0)?,
                v0_l2_predicted: n0 + 2.0 * alpha.powi(2) * e2 * g0 + alpha.powi(4) * e2 * e2 * l0,
                half_life,
                loss_rate,
                sup_grad_v_scaled: sup_grad / e2,
                records,
            })
        })
        .collect::<Result<Vec<_>>>()
        .or_else(|e| match e {
            Error::BlowUp { .. } => {
                report.blow_up(e.to_string());
                Ok(Vec::new())
            }
            other => Err(other),
        })?;
    if report.status == Status::BlowUp {
        return Ok(FamilyOutcome { report, members, c_fit: f64::NAN });
    }

    let c_fit = members.iter().map(|m| m.loss_rate).fold(0.0, f64::max);
    let c_bound = 2.0 * params.nu * members.iter().map(|m| m.sup_grad_v_scaled).fold(0.0, f64::max);
    let c_initial = members.first().map(|m| m.grad_v0_l2 / (m.epsilon * m.epsilon)).unwrap_or(0.0);
    for m in &members {
        let e = m.epsilon;
        report.push(Check::at_most(format!("eps={e}: | |u0^eps| / |u0| - 1 |"), ((m.u0_l2 / n0).sqrt() - 1.0).abs(), 1e-6));
        report.push(Check::at_most(
            format!("eps={e}: | |grad u0^eps| / |grad u0| - eps |"),
            ((m.grad_u0_l2 / g0).sqrt() - e).abs(),
            1e-4,
        ));
        report.push(Check::at_most(
            format!("eps={e}: | |grad^2 u0^eps| / |grad^2 u0| - eps^2 |"),
            ((m.grad2_u0_l2 / l0).sqrt() - e * e).abs(),
            1e-4,
        ));
        report.push(Check::at_most(
            format!("eps={e}: relative error of |v0^eps|^2 expansion"),
            ((m.v0_l2 - m.v0_l2_predicted) / m.v0_l2_predicted).abs(),
            1e-6,
        ));
        report.push(Check::at_most(
            format!("eps={e}: |grad v0^eps|^2 / eps^2"),
            m.grad_v0_l2 / (e * e),
            c_initial * (1.0 + 1e-9),
        ));
        let worst = m
            .records
            .iter()
            .filter(|r| r.t <= fam.horizon + 1e-9)
            .map(|r| (m.u0_l2 - c_fit * e * e * r.t) - r.energy)
            .fold(f64::NEG_INFINITY, f64::max);
        report.push(Check::at_most(format!("eps={e}: max(|u0|^2 - C eps^2 t - E(t))"), worst, 1e-12 * m.u0_l2));
        report.push(Check::flag(
            format!("eps={e}: energy halves before t = {}", fam.half_life_cap),
            m.half_life.is_some(),
            "half-life found",
        ));
    }
    report.push(Check::at_most("fitted C against 2 nu sup |grad v|^2 / eps^2", c_fit, c_bound));
    let lives: Vec<Option<f64>> = members.iter().map(|m| m.half_life).collect();
    let increasing = lives.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b > a));
    report.push(Check::flag("half-life strictly increasing as eps decreases", increasing, "t_half(eps_{i+1}) > t_half(eps_i)"));
    report.fit_windows.push(("lower-bound".into(), 0.0, fam.horizon));
    report.details = json!({
        "c_fit": c_fit,
        "c_bound": c_bound,
        "members": members.iter().map(|m| json!({
            "epsilon": m.epsilon,
            "u0_l2": m.u0_l2,
            "grad_u0_l2": m.grad_u0_l2,
            "v0_l2": m.v0_l2,
            "grad_v0_l2": m.grad_v0_l2,
            "half_life": m.half_life,
            "loss_rate": m.loss_rate,
            "sup_grad_v_scaled": m.sup_grad_v_scaled,
        })).collect::<Vec<_>>(),
    });
    Ok(FamilyOutcome { report, members, c_fit })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub alpha: f64,
    /// Largest sampled `|v_alpha(t) - w(t)|_{L^q}`.
    pub distance: f64,
    /// Largest sampled `|v_alpha|_{L^l} + |Lambda^beta v_alpha|_{L^l}`.
    pub uniform_bound: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: Report,
    pub points: Vec<SweepPoint>,
    pub order: f64,
    pub guaranteed_order: f64,
    pub q: f64,
    /// Distance between the alpha = 0 run and the reference.
    pub zero_alpha_distance: f64,
}

/// Distance of the filtered model from the fractional Navier-Stokes reference
/// as the filter width shrinks.
pub fn alpha_sweep_experiment(config: &ExperimentConfig) -> Result<SweepOutcome> {
    let grid = config.grid.build()?;
    let mut report = Report::new(config);
    report.warnings = config.validate()?;
    let sweep = config.sweep.clone().ok_or_else(|| Error::Config("alpha-sweep needs a [sweep] section".into()))?;
    let params = config.params;
    let (s, q) = sweep.exponents(grid.dim(), params.beta)?;
    let l = sweep.l_exponent;
    let gamma = gamma_exponent(grid.dim(), l, q);
    let guaranteed = 0.5 * params.beta - gamma;
    let v0 = build_datum(config, &grid)?;
    let stride = config.sample_stride;

    let reference = {
        let mut snaps = SnapshotRecorder::new(stride);
        match run(&v0, &params, Model::FractionalNse, &mut [&mut snaps]) {
            Ok(_) => snaps.snapshots,
            Err(e @ Error::BlowUp { .. }) => {
                report.blow_up(format!("reference run: {e}"));
                return Ok(SweepOutcome {
                    report,
                    points: Vec::new(),
                    order: f64::NAN,
                    guaranteed_order: guaranteed,
                    q,
                    zero_alpha_distance: f64::NAN,
                });
            }
            Err(e) => return Err(e),
        }
    };

    let member = |alpha: f64| -> Result<SweepPoint> {
        let mut p = params;
        p.alpha = alpha;
        let mut snaps = SnapshotRecorder::new(stride);
        run(&v0, &p, Model::CamassaHolm, &mut [&mut snaps])?;
        let mut distance = 0.0f64;
        let mut bound = 0.0f64;
        for (a, w) in snaps.snapshots.iter().zip(&reference) {
            distance = distance.max(solution_distance(a.velocity(), w.velocity(), q)?);
            let v = a.velocity();
            bound = bound.max(lp_norm(&v.to_physical(), l)? + lp_norm(&lambda_power(v, params.beta)?.to_physical(), l)?);
        }
        Ok(SweepPoint { alpha, distance, uniform_bound: bound })
    };
    let mut alphas = sweep.alphas.clone();
    alphas.push(0.0);
    let mut results = alphas.par_iter().map(|&a| member(a)).collect::<Result<Vec<_>>>();
    if let Err(e @ Error::BlowUp { .. }) = &results {
        report.blow_up(e.to_string());
        results = Ok(Vec::new());
    }
    let mut points = results?;
    if report.status == Status::BlowUp {
        return Ok(SweepOutcome { report, points, order: f64::NAN, guaranteed_order: guaranteed, q, zero_alpha_distance: f64::NAN });
    }
    let zero = points.pop().expect("alpha = 0 member").distance;
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.alpha, p.distance)).collect();
    let order = loglog_slope(&pairs)?;
    let monotone = points.windows(2).all(|w| w[1].distance <= w[0].distance);
    report.push(Check::flag("distance nonincreasing as alpha decreases", monotone, "d(alpha_{i+1}) <= d(alpha_i)"));
    report.push(Check::at_least("fitted order in alpha", order, sweep.min_order.max(guaranteed)));
    report.push(Check::at_least("guaranteed order beta/2 - gamma", guaranteed, f64::MIN_POSITIVE));
    report.push(Check::at_most("alpha = 0 distance to reference", zero, 1e-10));
    report.details = json!({
        "q": q, "s": s, "l": l, "gamma": gamma,
        "guaranteed_order": guaranteed,
        "fitted_order": order,
        "points": points,
        "zero_alpha_distance": zero,
        "uniform_bound_sup": points.iter().map(|p| p.uniform_bound).fold(0.0, f64::max),
        "time_sampling_stride": stride,
    });
    Ok(SweepOutcome { report, points, order, guaranteed_order: guaranteed, q, zero_alpha_distance: zero })
}

/// Random solenoidal fields over every resolved mode.
fn random_fields(grid: &SpectralGrid, seed: u64, count: usize) -> Result<Vec<VectorField>> {
    let hi = grid.points_per_axis() as f64;
    (0..count as u64).map(|i| band_random(grid, seed.wrapping_add(i), [1.0, hi], 1.0)).collect()
}

fn datum_seed(config: &ExperimentConfig) -> u64 {
    match config.datum {
        DatumSpec::BandRandom { seed, .. } => seed,
        _ => 0,
    }
}

/// Helmholtz filter identities on random fields.
pub fn filter_check(config: &ExperimentConfig) -> Result<Report> {
    let grid = config.grid.build()?;
    let mut report = Report::new(config);
    report.warnings = config.validate()?;
    let fields = random_fields(&grid, datum_seed(config), config.check.samples)?;
    for &alpha in &config.check.alphas {
        let mut worst = [0.0f64; 3];
        let mut contraction = true;
        let mut identity_exact = true;
        for v in &fields {
            for (m, w) in worst.iter_mut().enumerate() {
                *w = w.max(filter_identity_residual(v, alpha, m as u32)?);
            }
            let u = filter(v, alpha)?;
            contraction &= u.l2_norm_sq() <= v.l2_norm_sq() * (1.0 + 1e-14);
            if alpha == 0.0 {
                identity_exact &= u == *v;
            }
        }
        for (m, w) in worst.iter().enumerate() {
            report.push(Check::at_most(format!("alpha={alpha}: filter identity residual, m={m}"), *w, 1e-12));
        }
        report.push(Check::flag(format!("alpha={alpha}: |u| <= |v|"), contraction, "filtering does not increase L2"));
        if alpha == 0.0 {
            report.push(Check::flag("alpha=0: filter is the identity", identity_exact, "bitwise equal"));
        }
    }
    let smooth = build_datum(config, &grid)?;
    let curve = filter_convergence_curve(&smooth, &[0.2, 0.1, 0.05, 0.025], 2.0)?;
    report.details = json!({ "convergence_curve": curve });
    Ok(report)
}

/// Heat kernel scaling and `L^p` slopes, singular-integral closure and seminorms.
pub fn kernel_check(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(config);
    report.warnings = config.validate()?;
    let dim = 2;
    let radii = [0.0, 0.5, 1.0, 2.0, 5.0];
    let mut slopes = Vec::new();
    for &g in &config.check.gamma0 {
        let spec = HeatKernelSpec::new(g, dim)?;
        report.push(Check::at_most(
            format!("gamma0={g}: scaling deviation"),
            scaling_deviation(&spec, &[0.25, 1.0, 4.0], &radii)?,
            1e-10,
        ));
        if g == 2.0 {
            let mut worst = 0.0f64;
            for t in [0.5, 1.0, 3.0] {
                for (r, v) in radii.iter().zip(heat_kernel_values(&spec, t, &radii)?) {
                    let exact = (-r * r / (4.0 * t)).exp() / (4.0 * PI * t);
                    worst = worst.max(((v - exact) / exact).abs());
                }
            }
            report.push(Check::at_most("gamma0=2: relative error against the Gaussian", worst, 1e-8));
        }
        let times = [0.5, 1.0, 2.0, 4.0];
        for variant in [
            KernelVariant::PLAIN,
            KernelVariant { derivative: 1, fractional: 0.0 },
            KernelVariant { derivative: 0, fractional: 0.5 * g },
        ] {
            for p in [1.0, 2.0, f64::INFINITY] {
                let fit = kernel_lp_norm_slope(&spec, variant, p, &times)?;
                report.push(Check::at_most(
                    format!("gamma0={g} k={} a={} p={p}: slope deviation", variant.derivative, variant.fractional),
                    fit.deviation(),
                    0.02,
                ));
                slopes.push(json!({
                    "gamma0": g, "k": variant.derivative, "a": variant.fractional, "p": p,
                    "slope": fit.slope, "expected": expected_kernel_slope(&spec, variant, p),
                }));
            }
        }
    }

    // Singular integral against the multiplier on a 1D Gaussian; the long box
    // keeps the periodic images of the multiplier negligible.
    let (n, len) = (16384usize, 800.0);
    let h = len / n as f64;
    let xs: Vec<f64> = (0..n).map(|j| -0.5 * len + j as f64 * h).collect();
    let samples: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
    let f = |y: &[f64]| (-y[0] * y[0]).exp();
    for beta in [0.5, 0.75] {
        let spectral = multiplier_fractional_laplacian_1d(&samples, h, beta)?;
        let mut worst = 0.0f64;
        for j in [n / 2, n / 2 + 7, n / 2 + 20, n / 2 + 41, n / 2 + 80] {
            let v = integral_fractional_laplacian(&f, beta, &[xs[j]], &IntegralOptions::default())?;
            worst = worst.max(((v - spectral[j]) / spectral[j]).abs());
        }
        report.push(Check::at_most(format!("beta={beta}: integral vs multiplier on a Gaussian"), worst, 1e-3));
    }
    let c = normalization_constant(1, 0.5)?;
    report.push(Check::at_most("C(1, 1/2) against 1/pi", (c * PI - 1.0).abs(), 1e-10));

    // Seminorm: Fourier form against the double integral on a 1D Gaussian.
    let (n, len) = (400usize, 20.0);
    let h = len / n as f64;
    let samples: Vec<f64> = (0..n).map(|j| (-(-0.5 * len + j as f64 * h).powi(2)).exp()).collect();
    for beta in [0.25, 0.5, 0.75] {
        let a = gagliardo_seminorm_fourier_1d(&samples, h, beta)?;
        let b = gagliardo_seminorm_double_integral_1d(&samples, h, beta)?;
        report.push(Check::at_most(format!("beta={beta}: seminorm Fourier vs double integral"), ((a - b) / a).abs(), 1e-2));
    }
    report.details = json!({ "slopes": slopes });
    Ok(report)
}

/// Quick consistency battery over every module.
pub fn selftest(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(config);
    report.warnings = config.validate()?;
    let grid = SpectralGrid::new(2, 32, 2.0 * PI)?;

    // Single Fourier mode under the fractional Laplacian.
    let beta = 0.75;
    let mode = VectorField::from_fn(grid, |x| [(3.0 * x[1]).cos(), (2.0 * x[0] + x[1]).sin(), 0.0]);
    let out = fractional_laplacian(&mode, beta)?;
    let k0 = 9f64.powf(beta);
    let k1 = 5f64.powf(beta);
    let expect = VectorField::from_fn(grid, |x| [k0 * (3.0 * x[1]).cos(), k1 * (2.0 * x[0] + x[1]).sin(), 0.0]);
    report.push(Check::at_most("single-mode multiplier", out.max_abs_diff(&expect)? / expect.max_abs(), 1e-12));

    let fields = random_fields(&grid, 11, 6)?;
    let mut worst = 0.0f64;
    for v in &fields {
        for m in 0..3 {
            worst = worst.max(filter_identity_residual(v, 0.5, m)?);
        }
    }
    report.push(Check::at_most("filter identity", worst, 1e-12));

    let mut worst = 0.0f64;
    for pair in fields.chunks(2) {
        worst = worst.max(orthogonality_defect(&pair[0], &pair[1])?);
    }
    report.push(Check::at_most("trilinear orthogonality", worst, 1e-9));

    let once = leray_project(&VectorField::from_fn(grid, |x| [x[0].sin() * x[1].cos(), x[0].cos(), 0.0]))?;
    let twice = leray_project(once.field())?;
    report.push(Check::at_most("projection idempotent", twice.field().max_abs_diff(once.field())?, 1e-14));

    let params = SolverParams::new(0.05, beta, 0.0, 1e-2, 0.1);
    let ch = Stepper::new(grid, params, Model::CamassaHolm)?;
    let nse = Stepper::new(grid, params, Model::FractionalNse)?;
    let s0 = ch.initial_state(&fields[0], 0.0)?;
    let a = ch.step(&s0)?;
    let b = nse.step(&s0)?;
    report.push(Check::at_most("alpha=0 step matches Navier-Stokes", a.velocity().max_abs_diff(b.velocity())?, 1e-12));

    let bytes = encode_checkpoint(&a, &params);
    let back = decode_checkpoint(&bytes)?;
    report.push(Check::flag("checkpoint round trip", back.state == a, "bitwise equal state"));

    let mut p = SolverParams::new(0.05, beta, 0.3, 2.5e-3, 0.2);
    p.dealias = true;
    let mut rec = crate::integrator::EnergyRecorder::new(1, p.alpha, beta);
    run(&fields[1], &p, Model::CamassaHolm, &mut [&mut rec])?;
    let bal = energy_balance(&rec.records, p.nu);
    report.push(Check::at_most("energy law drift / E(0)", bal.cumulative_drift / rec.records[0].energy, 1e-6));

    let spec = HeatKernelSpec::new(2.0, 2)?;
    let v = heat_kernel_values(&spec, 1.0, &[0.0, 1.0, 2.0])?;
    let worst = [0.0f64, 1.0, 2.0]
        .iter()
        .zip(&v)
        .map(|(r, v)| (v / ((-r * r / 4.0).exp() / (4.0 * PI)) - 1.0).abs())
        .fold(0.0, f64::max);
    report.push(Check::at_most("Gaussian heat kernel", worst, 1e-8));
    report.push(Check::at_most("C(1, 1/2) against 1/pi", (normalization_constant(1, 0.5)? * PI - 1.0).abs(), 1e-10));
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub report: Report,
    pub records: Vec<EnergyRecord>,
    pub final_state: Option<SimState>,
}

/// Plain run from the datum or a checkpoint, with energy diagnostics.
pub fn simulate(config: &ExperimentConfig) -> Result<SimulateOutcome> {
    let grid = config.grid.build()?;
    let mut report = Report::new(config);
    report.warnings = config.validate()?;
    let params = config.params;
    let alpha = effective_alpha(config);
    let stepper = Stepper::new(grid, params, config.model)?;
    let state = match &config.resume_from {
        Some(path) => {
            let c = load_checkpoint(path)?;
            if c.state.grid() != &grid {
                return Err(Error::Config(format!("checkpoint {} was written on a different grid", path.display())));
            }
            if !c.matches(&params) {
                return Err(Error::Config(format!("checkpoint {} was written with different parameters", path.display())));
            }
            c.state
        }
        None => stepper.initial_state(&build_datum(config, &grid)?, 0.0)?,
    };
    let mut rec = crate::integrator::EnergyRecorder::new(config.sample_stride, alpha, params.beta);
    let final_state = match run_from(&stepper, state, &mut [&mut rec]) {
        Ok(summary) => Some(summary.final_state),
        Err(e @ Error::BlowUp { .. }) => {
            report.blow_up(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    if final_state.is_some() {
        report.push(Check::flag("energy nonincreasing", energy_is_monotone(&rec.records, 1e-12), "E(t_{j+1}) <= E(t_j) + 1e-12 E(0)"));
        let bal = energy_balance(&rec.records, params.nu);
        report.details = json!({
            "samples": rec.records.len(),
            "final_time": rec.records.last().map(|r| r.t),
            "energy_balance": { "max_step_residual": bal.max_step_residual, "cumulative_drift": bal.cumulative_drift },
        });
    }
    Ok(SimulateOutcome { report, records: rec.records, final_state })
}

/// Run the configured scenario and write its outputs to `output_dir`:
/// `report.json` always, `energy*.csv` for runs, `final.chk` for simulate.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let dir = config.output_dir.as_path();
    std::fs::create_dir_all(dir)?;
    let report = match config.scenario {
        Scenario::Simulate => {
            let out = simulate(config)?;
            write_energy_csv(&dir.join("energy.csv"), &out.records)?;
            if let Some(state) = &out.final_state {
                save_checkpoint(state, &config.params, &dir.join("final.chk"))?;
            }
            out.report
        }
        Scenario::Decay | Scenario::GradientDecay => {
            let out = decay_experiment(config)?;
            write_energy_csv(&dir.join("energy.csv"), &out.records)?;
            out.report
        }
        Scenario::ScaledFamily => {
            let out = scaled_family_experiment(config)?;
            for m in &out.members {
                write_energy_csv(&dir.join(format!("energy_eps{}.csv", m.epsilon)), &m.records)?;
            }
            out.report
        }
        Scenario::AlphaSweep => alpha_sweep_experiment(config)?.report,
        Scenario::FilterCheck => filter_check(config)?,
        Scenario::KernelCheck => kernel_check(config)?,
        Scenario::Selftest => selftest(config)?,
    };
    report.write(dir)?;
    Ok(report)
}

/// Write a report for a run that failed before producing one.
pub fn write_failure(dir: &Path, config: &ExperimentConfig, error: &Error) -> Result<()> {
    let mut report = Report::new(config);
    match error {
        Error::BlowUp { .. } => report.blow_up(error.to_string()),
        _ => report.fail(error.to_string()),
    }
    report.write(dir)
}
