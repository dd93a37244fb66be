use std::f64::consts::PI;

use proptest::prelude::*;

use qma::equations::{ReducedEquation, Variant};
use qma::error::Error;
use qma::fields::{PeriodicGrid, ScalarField, Spectral};
use qma::verify::{
    audit, audit_estimates, compare_mod_constant, manufacture, normalization_check, random_field, seed_field,
    SeedSpec, DEFAULT_RANDOM_SEED,
};

#[test]
fn random_fields_are_deterministic_band_limited_and_scaled() {
    let grid = PeriodicGrid::cubic(5, 8).unwrap();
    let a = random_field(&grid, 3, 0.25, 42).unwrap();
    let b = random_field(&grid, 3, 0.25, 42).unwrap();
    let c = random_field(&grid, 3, 0.25, 43).unwrap();
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert!(a != c);
    assert!((a.sup_norm() - 0.25).abs() < 1e-15);
    assert!(a.mean().unwrap().abs() < 1e-16);
    // modes = 3 means |k_r| <= 2 on every axis
    let leak = Spectral::new(&grid).energy_beyond(a.values(), &[2; 5]);
    assert!(leak < 1e-28, "energy beyond the band {leak:e}");
}

#[test]
fn seed_grammar_builds_products_and_sums() {
    let grid = PeriodicGrid::cubic(4, 8).unwrap();
    let spec: SeedSpec = "0.5*cos(1,0,0,0)*sin(0,0,0,-1), 0.25*sin(0,2,0,0)".parse().unwrap();
    let phi = seed_field(&spec, &grid).unwrap();
    let expected = ScalarField::from_fn(&grid, |x| {
        0.5 * (2.0 * PI * x[0]).cos() * (-2.0 * PI * x[3]).sin() + 0.25 * (4.0 * PI * x[1]).sin()
    });
    assert!(phi.sub(&expected).unwrap().sup_norm() < 1e-15);
    let default_seeded: SeedSpec = "random(2, 0.1)".parse().unwrap();
    let explicit: SeedSpec = format!("random(2, 0.1, {DEFAULT_RANDOM_SEED})").parse().unwrap();
    assert_eq!(default_seeded, explicit);
}

#[test]
fn malformed_seed_specs_are_rejected() {
    for bad in ["", "cos(1,0)", "0.1*tan(1,0,0,0)", "random(0, 0.1)", "random(2)", "0.1*cos(1,0,0,0", "0.1*cos(a,0,0,0)"] {
        let parsed = bad.parse::<SeedSpec>();
        let grid = PeriodicGrid::cubic(4, 8).unwrap();
        let rejected = match parsed {
            Err(Error::SeedSpec(_)) => true,
            Ok(spec) => seed_field(&spec, &grid).is_err(),
            Err(e) => panic!("`{bad}` gave unexpected error {e}"),
        };
        assert!(rejected, "`{bad}` was accepted");
    }
    // wrong number of wavenumbers for the grid
    let spec: SeedSpec = "0.1*cos(1,0,0)".parse().unwrap();
    assert!(seed_field(&spec, &PeriodicGrid::cubic(4, 8).unwrap()).is_err());
}

#[test]
fn manufactured_problems_are_normalized_and_solved_by_the_seed() {
    for variant in Variant::ALL {
        let eq = ReducedEquation::new(variant);
        let grid = PeriodicGrid::cubic(variant.base_dim(), 8).unwrap();
        let seed = random_field(&grid, 3, 0.05, 10).unwrap();
        let p = manufacture(&eq, &seed).unwrap();
        assert_eq!(p.variant, variant);
        assert!(p.positivity_margin > 0.0);
        assert_eq!(p.amplitude_scale, 0.5f64.powi(p.halvings as i32));
        assert!(compare_mod_constant(&p.phi_star, &seed.scale(p.amplitude_scale)).unwrap() < 1e-15);
        assert!(normalization_check(&p.f).unwrap().abs() < 1e-13, "{variant}");
        let report = audit(&eq, &p.phi_star, &p.f).unwrap();
        assert!(report.residual_sup < 1e-13);
        assert!(report.ellipticity.symbol_elliptic && report.estimates.passed(), "{variant}: {report:?}");
    }
}

#[test]
fn manufacture_halves_large_seeds_until_elliptic() {
    let eq = ReducedEquation::new(Variant::T5);
    let grid = PeriodicGrid::cubic(5, 8).unwrap();
    let p = manufacture(&eq, &random_field(&grid, 3, 1.0, 11).unwrap()).unwrap();
    assert!(p.halvings > 0);
    assert!(audit(&eq, &p.phi_star, &p.f).unwrap().ellipticity.symbol_elliptic);
}

#[test]
fn manufacture_rejects_seeds_beyond_the_band_limit() {
    let eq = ReducedEquation::new(Variant::T4);
    let grid = PeriodicGrid::cubic(4, 8).unwrap();
    let seed = ScalarField::from_fn(&grid, |x| 0.01 * (6.0 * PI * x[0]).cos());
    assert!(matches!(manufacture(&eq, &seed), Err(Error::SeedSpec(_))));
}

#[test]
fn harnack_audit_detects_violations() {
    // Lap phi + 2 >= 2 e^{F/2} fails when F is raised without changing phi
    let eq = ReducedEquation::new(Variant::T5);
    let grid = PeriodicGrid::cubic(5, 8).unwrap();
    let p = manufacture(&eq, &random_field(&grid, 3, 0.05, 12).unwrap()).unwrap();
    let exact = audit_estimates(&eq, &p.phi_star, &p.f).unwrap();
    assert!(exact.harnack_pass && exact.harnack_margin >= -1e-12);
    let raised = audit_estimates(&eq, &p.phi_star, &p.f.map(|v| v + 0.5)).unwrap();
    assert!(!raised.harnack_pass && !raised.passed());
}

#[test]
fn audit_flags_non_positive_coefficients() {
    let eq = ReducedEquation::new(Variant::T5);
    let grid = PeriodicGrid::cubic(5, 8).unwrap();
    // B = 1 + phi_55 goes negative for a large cos(2 pi x5)
    let phi = ScalarField::from_fn(&grid, |x| 0.05 * (2.0 * PI * x[4]).cos());
    let report = audit(&eq, &phi, &ScalarField::zeros(&grid)).unwrap();
    assert!(report.b.min < 0.0 && !report.estimates.b_pass);
    assert!(!report.ellipticity.symbol_elliptic);
}

#[test]
fn strong_margin_is_reported_only_for_six_and_seven_dimensional_equations() {
    for variant in Variant::ALL {
        let eq = ReducedEquation::new(variant);
        let grid = PeriodicGrid::cubic(variant.base_dim(), 8).unwrap();
        let report = audit(&eq, &ScalarField::zeros(&grid), &ScalarField::zeros(&grid)).unwrap();
        let expect = matches!(variant, Variant::T6 | Variant::T7);
        assert_eq!(report.ellipticity.strong_margin.is_some(), expect);
        if expect {
            // flat state: a_i = 0, e^F = 1
            assert_eq!(report.ellipticity.strong_margin, Some(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn comparison_ignores_additive_constants(c in -100.0f64..100.0, seed in 0u64..500) {
        let grid = PeriodicGrid::cubic(4, 8).unwrap();
        let phi = random_field(&grid, 3, 1.0, seed).unwrap();
        let shifted = phi.map(|v| v + c);
        prop_assert!(compare_mod_constant(&phi, &shifted).unwrap() < 1e-12 * (1.0 + c.abs()));
        let other = random_field(&grid, 3, 1.0, seed + 1000).unwrap();
        prop_assert!(compare_mod_constant(&phi, &other).unwrap() > 1e-3);
    }

    #[test]
    fn normalization_of_log_shifted_data(shift in -2.0f64..2.0) {
        // F = shift everywhere integrates to e^shift - 1
        let grid = PeriodicGrid::cubic(4, 8).unwrap();
        let v = normalization_check(&ScalarField::constant(&grid, shift)).unwrap();
        prop_assert!((v - shift.exp_m1()).abs() < 1e-14);
    }
}
