use std::f64::consts::PI;

use proptest::prelude::*;

use chfrac::datum::band_random;
use chfrac::diagnostics::{fit_decay, lp_norm, seminorm_sq, solution_distance, FitWindow};
use chfrac::field_ops::{divergence_defect, leray_project, orthogonality_defect};
use chfrac::helmholtz::filter;
use chfrac::integrator::{run, EnergyRecorder, Model, SolverParams};
use chfrac::spectral::{apply_multiplier, fractional_laplacian};
use chfrac::{Multiplier, ScalarField, SpectralGrid, VectorField};

fn grid2() -> SpectralGrid {
    SpectralGrid::new(2, 16, 2.0 * PI).unwrap()
}

fn grid3() -> SpectralGrid {
    SpectralGrid::new(3, 8, 3.0).unwrap()
}

/// Arbitrary real vector field (not solenoidal) from raw samples.
fn any_field(grid: SpectralGrid) -> impl Strategy<Value = VectorField> {
    let n = grid.len();
    let dim = grid.dim();
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, n), dim).prop_map(move |comps| {
        VectorField::new(comps.into_iter().map(|c| ScalarField::from_physical(grid, c).unwrap()).collect()).unwrap()
    })
}

fn any_grid_field() -> impl Strategy<Value = VectorField> {
    prop_oneof![any_field(grid2()), any_field(grid3())]
}

fn solenoidal(grid: SpectralGrid) -> impl Strategy<Value = VectorField> {
    let hi = grid.points_per_axis() as f64;
    any::<u64>().prop_map(move |seed| band_random(&grid, seed, [1.0, hi], 1.0).unwrap())
}

fn rel_diff(a: &VectorField, b: &VectorField) -> f64 {
    let scale = a.max_abs().max(b.max_abs()).max(1e-300);
    a.to_physical().max_abs_diff(&b.to_physical()).unwrap() / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn multiplier_is_linear(f in any_field(grid2()), g in any_field(grid2()), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let m = Multiplier::radial(grid2(), |k| (1.0 + k * k).sqrt()).unwrap();
        let (f, g) = (f.to_spectral(), g.to_spectral());
        let lhs = apply_multiplier(&f.combine(a, b, &g).unwrap(), &m).unwrap();
        let rhs = apply_multiplier(&f, &m).unwrap().combine(a, b, &apply_multiplier(&g, &m).unwrap()).unwrap();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn fractional_powers_compose(f in any_grid_field(), b1 in 0.05..0.5f64, b2 in 0.05..0.5f64) {
        let twice = fractional_laplacian(&fractional_laplacian(&f, b1).unwrap(), b2).unwrap();
        let once = fractional_laplacian(&f, b1 + b2).unwrap();
        prop_assert!(rel_diff(&twice, &once) < 1e-11);
    }

    #[test]
    fn even_multipliers_keep_fields_real(f in any_grid_field(), beta in 0.05..1.0f64) {
        let out = fractional_laplacian(&f, beta).unwrap();
        for c in out.components() {
            prop_assert!(c.to_spectral().hermitian_defect().unwrap() <= 1e-12 * (1.0 + c.to_spectral().l2_norm_sq().sqrt()));
        }
        let (_, residue) = out.to_physical_with_residue();
        prop_assert!(residue <= 1e-10);
    }

    #[test]
    fn projection_is_idempotent_and_solenoidal(f in any_grid_field()) {
        let once = leray_project(&f).unwrap();
        let twice = leray_project(once.field()).unwrap();
        prop_assert!(rel_diff(once.field(), twice.field()) < 1e-13);
        prop_assert!(divergence_defect(once.field()).unwrap() < 1e-12);
    }

    #[test]
    fn projection_is_self_adjoint(f in any_field(grid2()), g in any_field(grid2())) {
        let pf = leray_project(&f).unwrap().into_inner().to_physical();
        let pg = leray_project(&g).unwrap().into_inner().to_physical();
        let a = pf.inner(&g).unwrap();
        let b = f.inner(&pg).unwrap();
        let scale = (f.l2_norm_sq() * g.l2_norm_sq()).sqrt();
        prop_assert!((a - b).abs() <= 1e-12 * scale);
    }

    #[test]
    fn nonlinear_term_is_orthogonal_to_the_filtered_velocity(u in solenoidal(grid2()), v in solenoidal(grid2())) {
        prop_assert!(orthogonality_defect(&u, &v).unwrap() <= 1e-9);
    }

    #[test]
    fn nonlinear_term_is_orthogonal_in_three_dimensions(u in solenoidal(grid3()), v in solenoidal(grid3())) {
        prop_assert!(orthogonality_defect(&u, &v).unwrap() <= 1e-9);
    }

    #[test]
    fn filter_contracts_and_is_monotone_in_alpha(v in any_grid_field(), a in 0.0..2.0f64, da in 0.0..2.0f64) {
        let u1 = filter(&v, a).unwrap();
        let u2 = filter(&v, a + da).unwrap();
        let (n0, n1, n2) = (v.l2_norm_sq(), u1.l2_norm_sq(), u2.l2_norm_sq());
        prop_assert!(n1 <= n0 * (1.0 + 1e-13));
        prop_assert!(n2 <= n1 * (1.0 + 1e-13));
    }

    #[test]
    fn decay_fit_is_invariant_under_rescaling(
        exponent in -4.0..-0.5f64,
        scale in 1e-3..1e3f64,
        wobble in prop::collection::vec(-0.05..0.05f64, 40),
    ) {
        let series: Vec<(f64, f64)> = wobble
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let t = 1.0 + i as f64;
                (t, (1.0 + t).powf(exponent) * (1.0 + w))
            })
            .collect();
        let scaled: Vec<(f64, f64)> = series.iter().map(|&(t, y)| (t, scale * y)).collect();
        let window = FitWindow::new(1.0, 40.0).unwrap();
        let a = fit_decay(&series, window).unwrap();
        let b = fit_decay(&scaled, window).unwrap();
        prop_assert!((a.exponent - b.exponent).abs() <= 1e-10);
        prop_assert!((b.intercept - a.intercept - scale.ln()).abs() <= 1e-10);
    }

    #[test]
    fn distance_obeys_the_triangle_inequality(
        a in any_field(grid2()),
        b in any_field(grid2()),
        c in any_field(grid2()),
        q in prop_oneof![Just(1.0), Just(2.0), Just(8.0 / 3.0), Just(f64::INFINITY)],
    ) {
        let ab = solution_distance(&a, &b, q).unwrap();
        let bc = solution_distance(&b, &c, q).unwrap();
        let ac = solution_distance(&a, &c, q).unwrap();
        prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12));
        prop_assert_eq!(solution_distance(&a, &a, q).unwrap(), 0.0);
    }

    #[test]
    fn lebesgue_norms_are_consistent_with_hoelder(f in any_grid_field(), p in 1.0..4.0f64, dq in 0.1..4.0f64) {
        // On a box of volume V: |f|_p <= V^{1/p - 1/q} |f|_q for p < q.
        let q = p + dq;
        let volume = f.grid().box_length().powi(f.grid().dim() as i32);
        let np = lp_norm(&f, p).unwrap();
        let nq = lp_norm(&f, q).unwrap();
        let ninf = lp_norm(&f, f64::INFINITY).unwrap();
        prop_assert!(np <= volume.powf(1.0 / p - 1.0 / q) * nq * (1.0 + 1e-12));
        prop_assert!(nq <= volume.powf(1.0 / q) * ninf * (1.0 + 1e-12));
    }

    #[test]
    fn parseval_matches_the_physical_norm(f in any_grid_field()) {
        let physical = lp_norm(&f, 2.0).unwrap().powi(2);
        let spectral = seminorm_sq(&f, 0.0).unwrap();
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn energy_never_increases(seed in any::<u64>(), alpha in 0.0..0.5f64, beta in 0.5..1.0f64) {
        let grid = SpectralGrid::new(2, 32, 2.0 * PI).unwrap();
        let v0 = band_random(&grid, seed, [1.0, 5.0], 2.0).unwrap();
        let params = SolverParams::new(0.05, beta, alpha, 5e-3, 0.25);
        let mut rec = EnergyRecorder::new(1, alpha, beta);
        run(&v0, &params, Model::CamassaHolm, &mut [&mut rec]).unwrap();
        let e0 = rec.records[0].energy;
        for w in rec.records.windows(2) {
            prop_assert!(w[1].energy <= w[0].energy + 1e-12 * e0);
        }
    }
}
