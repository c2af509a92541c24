use std::f64::consts::PI;

use chfrac::datum::band_random;
use chfrac::integrator::{run, EnergyRecorder, Model, Observer, SolverParams, Stepper};
use chfrac::{SpectralGrid, VectorField};

fn final_velocity(v0: &VectorField, params: &SolverParams, model: Model) -> VectorField {
    run(v0, params, model, &mut [] as &mut [&mut dyn Observer]).unwrap().final_state.velocity().to_physical()
}

#[test]
fn shear_mode_decays_exactly() {
    // A single shear mode makes the quadratic term a pure gradient.
    let grid = SpectralGrid::new(2, 32, 2.0 * PI).unwrap();
    let (nu, beta) = (0.1, 0.75);
    let v0 = VectorField::from_fn(grid, |x| [(2.0 * x[1]).sin(), 0.0, 0.0]);
    let params = SolverParams::new(nu, beta, 0.4, 0.01, 1.0);
    let got = final_velocity(&v0, &params, Model::CamassaHolm);
    let expect = v0.scaled((-nu * 4f64.powf(beta)).exp());
    assert!(got.max_abs_diff(&expect).unwrap() < 1e-12);
}

#[test]
fn cellular_flow_on_one_shell_decays_exactly() {
    // Stream function cos x + cos y: every mode has |k| = 1, so u is parallel
    // to v and both the advection and the stretching terms are gradients.
    let grid = SpectralGrid::new(2, 32, 2.0 * PI).unwrap();
    let nu = 0.05;
    let v0 = VectorField::from_fn(grid, |x| [x[1].sin(), -x[0].sin(), 0.0]);
    let params = SolverParams::new(nu, 0.6, 0.7, 0.02, 2.0);
    let got = final_velocity(&v0, &params, Model::CamassaHolm);
    let expect = v0.scaled((-nu * 2.0).exp());
    assert!(got.max_abs_diff(&expect).unwrap() < 1e-12);
}

#[test]
fn linear_run_multiplies_each_mode_by_its_decay() {
    let grid = SpectralGrid::new(3, 16, 2.0 * PI).unwrap();
    let (nu, beta) = (0.2, 0.9);
    let v0 = VectorField::from_fn(grid, |x| [(x[1] + 2.0 * x[2]).cos(), (3.0 * x[2]).sin(), (x[0] - x[1]).cos()]);
    let mut params = SolverParams::new(nu, beta, 0.3, 0.05, 1.0);
    params.nonlinear = false;
    let got = final_velocity(&v0, &params, Model::CamassaHolm);
    let decay = |k2: f64| (-nu * k2.powf(beta)).exp();
    let expect = VectorField::from_fn(grid, |x| {
        [
            decay(5.0) * (x[1] + 2.0 * x[2]).cos(),
            decay(9.0) * (3.0 * x[2]).sin(),
            decay(2.0) * (x[0] - x[1]).cos(),
        ]
    });
    assert!(got.max_abs_diff(&expect).unwrap() < 1e-12);
}

#[test]
fn zero_alpha_reproduces_navier_stokes() {
    let grid = SpectralGrid::new(3, 16, 2.0 * PI).unwrap();
    let v0 = band_random(&grid, 9, [1.0, 3.0], 1.0).unwrap();
    let params = SolverParams::new(0.05, 0.8, 0.0, 0.01, 0.2);
    let a = final_velocity(&v0, &params, Model::CamassaHolm);
    let b = final_velocity(&v0, &params, Model::FractionalNse);
    assert!(a.max_abs_diff(&b).unwrap() < 1e-13);
}

#[test]
fn three_dimensional_energy_is_monotone() {
    let grid = SpectralGrid::new(3, 16, 2.0 * PI).unwrap();
    let v0 = band_random(&grid, 21, [1.0, 4.0], 3.0).unwrap();
    let params = SolverParams::new(0.05, 1.0, 0.2, 0.01, 0.3);
    let mut rec = EnergyRecorder::new(1, params.alpha, params.beta);
    run(&v0, &params, Model::CamassaHolm, &mut [&mut rec]).unwrap();
    let e0 = rec.records[0].energy;
    assert!(rec.records.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-12 * e0));
    assert!(rec.records.last().unwrap().energy < e0);
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let grid = SpectralGrid::new(2, 64, 2.0 * PI).unwrap();
    let v0 = band_random(&grid, 4, [1.0, 6.0], 1.0).unwrap();
    let params = SolverParams::new(0.05, 0.75, 0.2, 0.01, 0.2);
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut rec = EnergyRecorder::new(1, params.alpha, params.beta);
            let s = run(&v0, &params, Model::CamassaHolm, &mut [&mut rec]).unwrap();
            (s.final_state, rec.records)
        })
    };
    let (a, ra) = run_with(1);
    let (b, rb) = run_with(4);
    assert!(a == b);
    assert_eq!(ra, rb);
}

#[test]
fn stepping_in_pieces_matches_one_run() {
    let grid = SpectralGrid::new(2, 32, 2.0 * PI).unwrap();
    let v0 = band_random(&grid, 13, [1.0, 5.0], 1.0).unwrap();
    let params = SolverParams::new(0.05, 0.75, 0.2, 0.01, 0.3);
    let stepper = Stepper::new(grid, params, Model::CamassaHolm).unwrap();
    let mut state = stepper.initial_state(&v0, 0.0).unwrap();
    for _ in 0..30 {
        state = stepper.step(&state).unwrap();
    }
    let whole = run(&v0, &params, Model::CamassaHolm, &mut [] as &mut [&mut dyn Observer]).unwrap().final_state;
    assert!(state == whole);
}
