use std::io::Write;

use proptest::prelude::*;
use radvisc::eos::relative_internal_energy;
use radvisc::initdata::{
    approx_velocity, build_initial_field, check_beta, clamp_band, clamp_density, cutoff_radius,
    farfield_cutoff, initial_functionals, mollify_sqrt_density, restrict_annulus, windowed_velocity,
    DataMode, InitialDataSpec, Mollifier,
};
use radvisc::profile::{bump, Profile, ProfileSpec, SampledProfile};
use radvisc::{Error, GasParams, RadialField, RadialGrid, ViscosityParams};

fn gas() -> GasParams {
    GasParams::new(2.0, 2, 1.0).unwrap()
}

fn bump_spec() -> ProfileSpec {
    ProfileSpec::Bump {
        amplitude: 0.5,
        center: 3.0,
        width: 1.0,
        momentum: 0.3,
    }
}

#[test]
fn clamp_band_examples() {
    let (lo, hi) = clamp_band(0.01, 1e-3);
    assert_eq!(lo, (1e-5f64).powf(0.25));
    assert_eq!(hi, (1e-5f64).powf(-0.5));
    assert_eq!(clamp_density(1.0, 0.01, 1e-3), 1.0);
    assert_eq!(clamp_density(0.0, 0.01, 1e-3), lo);
    assert_eq!(clamp_density(1e6, 0.01, 1e-3), hi);
}

#[test]
fn farfield_cutoff_examples() {
    let rc = cutoff_radius(0.01, 1e-3, 2);
    assert_eq!(rc, (1e-5f64).powf(-0.25));
    assert_eq!(farfield_cutoff(7.0, 2.0 * rc, 0.01, 1e-3, 2, 1.0), 1.0);
    assert_eq!(farfield_cutoff(7.0, 0.5 * rc, 0.01, 1e-3, 2, 1.0), 7.0);
    assert_eq!(farfield_cutoff(1.0, 0.5 * rc, 0.01, 1e-3, 2, 1.0), 1.0);
}

#[test]
fn beta_smallness_is_enforced() {
    assert!(check_beta(0.01, 1e-3, 2, 4.0).is_ok());
    let e = check_beta(0.01, 1e-3, 2, 20.0).unwrap_err();
    assert!(matches!(e, Error::Config { ref field, .. } if field == "initdata.beta"));
    assert!(check_beta(0.0, 1e-3, 2, 4.0).is_err());
    assert!(check_beta(0.5, 3.0, 2, 0.0).is_err());
}

#[test]
fn mollifier_reproduces_constants() {
    for dim in [2, 3, 4] {
        let m = Mollifier::new(0.3, dim, 24, 48).unwrap();
        for r in [0.0, 0.1, 1.0, 5.0] {
            assert!((m.apply(|_| 2.5, r) - 2.5).abs() < 1e-14);
            assert!((mollify_sqrt_density(|_| 4.0, &m, r) - 4.0).abs() < 1e-13);
        }
    }
}

/// Direct two-dimensional convolution on a Cartesian grid of the offset disc.
fn cartesian_oracle(f: impl Fn(f64) -> f64, sigma: f64, r: f64, n: usize) -> f64 {
    let h = 2.0 * sigma / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let y1 = -sigma + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y2 = -sigma + (j as f64 + 0.5) * h;
            let s2 = (y1 * y1 + y2 * y2) / (sigma * sigma);
            if s2 >= 1.0 {
                continue;
            }
            let k = (-1.0 / (1.0 - s2)).exp();
            num += k * f(((r - y1).powi(2) + y2 * y2).sqrt());
            den += k;
        }
    }
    num / den
}

#[test]
fn step_profile_matches_cartesian_convolution() {
    let sqrt_rho = |z: f64| -> f64 { if z < 1.0 { 1.0 } else { 2.0 } };
    let rho_hat = |z: f64| sqrt_rho(z).powi(2);
    let m = Mollifier::new(0.25, 2, 400, 800).unwrap();
    let val = mollify_sqrt_density(rho_hat, &m, 1.0);
    let oracle = cartesian_oracle(sqrt_rho, 0.25, 1.0, 2000).powi(2);
    assert!(val > 1.0 && val < 4.0);
    assert!((val - oracle).abs() < 2e-3, "{val} vs {oracle}");
    // the unit circle bends away from x, so the outer state gets slightly more weight
    assert!(val > 2.25 && val < 2.4, "{val}");
}

#[test]
fn smooth_profile_matches_cartesian_convolution() {
    let f = |z: f64| 1.0 + 0.5 * bump((z - 2.0) / 0.8);
    let m = Mollifier::new(0.4, 2, 64, 128).unwrap();
    for r in [1.3, 1.9, 2.4] {
        let a = m.apply(f, r);
        let b = cartesian_oracle(f, 0.4, r, 1200);
        assert!((a - b).abs() < 1e-5, "r {r}: {a} vs {b}");
    }
}

#[test]
fn kinetic_energy_is_preserved_by_the_velocity_map() {
    let grid = RadialGrid::new(400, 0.1, 12.0, 2).unwrap();
    let rho0 = |r: f64| 1.0 + 0.5 * bump((r - 3.0) / 1.5);
    let m0 = |r: f64| 0.7 * bump((r - 4.0) / 2.0) - 0.2 * bump((r - 8.0) / 1.0);
    let rho_eps = |r: f64| 1.0 + 0.45 * bump((r - 3.1) / 1.7);
    let lhs: Vec<f64> = grid
        .r()
        .iter()
        .map(|&r| rho_eps(r) * approx_velocity(m0(r), rho0(r), rho_eps(r)).unwrap().powi(2))
        .collect();
    let rhs: Vec<f64> = grid.r().iter().map(|&r| m0(r).powi(2) / rho0(r)).collect();
    let (a, b) = (grid.integrate(&lhs), grid.integrate(&rhs));
    assert!(b > 0.0);
    assert!((a - b).abs() / b <= 1e-12, "{a} vs {b}");
}

#[test]
fn velocity_map_edge_cases() {
    assert_eq!(approx_velocity(0.0, 2.0, 3.0).unwrap(), 0.0);
    assert!((approx_velocity(1.5, 2.0, 2.0).unwrap() - 0.75).abs() < 1e-15);
    assert_eq!(approx_velocity(0.0, 0.0, 0.1).unwrap(), 0.0);
    assert!(matches!(approx_velocity(1.0, 0.0, 0.1), Err(Error::InputContract(_))));
}

fn wide_pulse() -> Profile {
    Profile::from_spec(
        &ProfileSpec::Pulse {
            amplitude: 0.4,
            center: 0.0,
            width: 100.0,
        },
        1.0,
    )
    .unwrap()
}

#[test]
fn windowed_velocity_support() {
    let p = wide_pulse();
    for delta in [0.4, 0.2, 0.1] {
        let m = Mollifier::new(delta, 2, 24, 48).unwrap();
        for r in [0.5 * delta, 1.99 * delta, 1.0 + 1.0 / delta + 1e-3, 2.0 / delta] {
            assert_eq!(windowed_velocity(&p, 1.0, delta, &m, r).unwrap(), 0.0, "delta {delta} r {r}");
        }
        for r in [5.0 * delta, 0.5 / delta] {
            assert!(windowed_velocity(&p, 1.0, delta, &m, r).unwrap() > 0.0);
        }
    }
    let rest = Profile::from_spec(&ProfileSpec::Rest, 1.0).unwrap();
    let m = Mollifier::new(0.1, 2, 24, 48).unwrap();
    assert_eq!(windowed_velocity(&rest, 1.0, 0.1, &m, 3.0).unwrap(), 0.0);
}

#[test]
fn windowed_energy_approaches_unwindowed_as_delta_shrinks() {
    let p = Profile::from_spec(
        &ProfileSpec::Pulse {
            amplitude: 0.5,
            center: 3.0,
            width: 2.95,
        },
        1.0,
    )
    .unwrap();
    let r: Vec<f64> = (0..3000).map(|k| (k as f64 + 0.5) * 0.004).collect();
    let full: f64 = r.iter().map(|&x| p.m0(x).powi(2) / p.rho0(x) * x * 0.004).sum();
    let mut gaps = Vec::new();
    for delta in [0.4, 0.2, 0.1] {
        let m = Mollifier::new(delta, 2, 32, 64).unwrap();
        let e: f64 = r
            .iter()
            .map(|&x| {
                let rho = p.rho0(x);
                rho * windowed_velocity(&p, rho, delta, &m, x).unwrap().powi(2) * x * 0.004
            })
            .sum();
        gaps.push((e - full).abs());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn momentum_on_vacuum_is_rejected_at_construction() {
    assert!(matches!(
        SampledProfile::new(vec![0.0, 10.0], vec![0.0, 0.0], vec![1.0, 1.0]),
        Err(Error::Parse { row: 2, .. })
    ));
    let spec = ProfileSpec::Riemann {
        interface: 2.0,
        rho_left: 0.0,
        rho_right: 1.0,
        u_left: 0.5,
        u_right: 0.0,
    };
    assert!(Profile::from_spec(&spec, 1.0).is_err());
    let spec = ProfileSpec::Bump {
        amplitude: -1.0,
        center: 3.0,
        width: 1.0,
        momentum: 1.0,
    };
    assert!(Profile::from_spec(&spec, 1.0).is_err());
}

#[test]
fn annulus_restriction() {
    let grid = RadialGrid::new(100, 0.1, 10.0, 2).unwrap();
    assert!(matches!(
        restrict_annulus(|_| 1.0, |_| 0.0, grid),
        Err(Error::Config { .. })
    ));
    let grid = RadialGrid::new(110, 0.1, 11.0, 2).unwrap();
    let f = restrict_annulus(|_| 1.3, |_| 0.0, grid.clone()).unwrap();
    assert!(f.rho.iter().all(|&x| x == 1.3));
    assert!(f.m.iter().all(|&x| x == 0.0));
    let expect: f64 = grid.r().iter().map(|r| 1.3 * r * grid.dr()).sum();
    assert!((f.mass() - expect).abs() <= 1e-12 * expect);
}

fn pipeline(eps: f64, delta: f64, b: f64, cells: usize, profile: ProfileSpec) -> RadialField {
    let v = ViscosityParams::new(eps, delta, 2).unwrap();
    let grid = RadialGrid::new(cells, delta, b, 2).unwrap();
    build_initial_field(&InitialDataSpec::new(profile), &gas(), &v, grid).unwrap()
}

#[test]
fn pipeline_output_stays_in_the_clamp_band() {
    let riemann = ProfileSpec::Riemann {
        interface: 3.0,
        rho_left: 0.0,
        rho_right: 1.0,
        u_left: 0.0,
        u_right: 0.0,
    };
    for (eps, profile) in [(0.1, bump_spec()), (0.01, riemann.clone()), (0.001, riemann)] {
        let f = pipeline(eps, 0.2, 8.0, 300, profile);
        let (lo, hi) = clamp_band(eps, 1e-3);
        assert!(f.rho.iter().all(|&r| r >= lo && r <= hi), "eps {eps}");
        assert!(f.first_nonfinite().is_none());
    }
}

#[test]
fn pipeline_window_support_on_grid() {
    let delta = 0.2;
    let f = pipeline(0.05, delta, 8.0, 390, bump_spec());
    for (i, &r) in f.grid.r().iter().enumerate() {
        if r < 2.0 * delta || r > 1.0 + 1.0 / delta {
            assert_eq!(f.m[i], 0.0, "r = {r}");
        }
    }
    assert!(f.m.iter().any(|&m| m != 0.0));
}

#[test]
fn rest_pipeline_is_rest() {
    let f = pipeline(0.05, 0.1, 11.0, 200, ProfileSpec::Rest);
    assert!(f.rho.iter().all(|&r| (r - 1.0).abs() < 1e-13));
    assert!(f.m.iter().all(|&m| m == 0.0));
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    let fs = initial_functionals(&f, &gas(), &v, 0.5);
    assert!(fs.e0.abs() < 1e-20 && fs.e2 == 0.0);
}

/// `E_1` bound `C sqrt(eps)` with `C` fitted on the largest `eps` and held fixed.
#[test]
fn e1_smallness_trend() {
    let eps_list = [0.1, 0.01, 0.001];
    let e1: Vec<f64> = eps_list
        .iter()
        .map(|&eps| {
            let f = pipeline(eps, 0.2, 8.0, 1560, bump_spec());
            let v = ViscosityParams::new(eps, 0.2, 2).unwrap();
            initial_functionals(&f, &gas(), &v, 0.5).e1
        })
        .collect();
    let c = e1[0] / eps_list[0].sqrt();
    for (e, eps) in e1.iter().zip(eps_list) {
        assert!(*e <= 1.5 * c * eps.sqrt(), "eps {eps}: {e} vs C = {c}");
    }
    assert!(e1[0] > e1[1] && e1[1] > e1[2]);
}

/// Weighted energy `int e (1 + r)^{N-1+vartheta} dr` against `eps^{-(N-1+vartheta)/(2N)}`.
#[test]
fn weighted_energy_growth_trend() {
    let g = gas();
    let vartheta = 0.5;
    let expo = (1.0 + vartheta) / 4.0;
    let vals: Vec<(f64, f64)> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&eps| {
            let f = pipeline(eps, 0.2, 8.0, 780, bump_spec());
            let w: f64 = f
                .grid
                .r()
                .iter()
                .zip(&f.rho)
                .map(|(&r, &rho)| {
                    relative_internal_energy(rho, &g).unwrap() * (1.0 + r).powf(1.0 + vartheta) * f.grid.dr()
                })
                .sum();
            (eps, w)
        })
        .collect();
    let c = vals[0].1 / vals[0].0.powf(-expo);
    for (eps, w) in vals {
        assert!(w <= 1.5 * c * eps.powf(-expo), "eps {eps}: {w}");
    }
}

#[test]
fn density_converges_in_l_gamma_on_compacts() {
    let g = gas();
    let profile = Profile::from_spec(&bump_spec(), 1.0).unwrap();
    let d: Vec<f64> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&eps| {
            let f = pipeline(eps, 0.2, 8.0, 780, bump_spec());
            let s: f64 = f
                .grid
                .r()
                .iter()
                .zip(&f.rho)
                .filter(|(r, _)| **r >= 1.0 && **r <= 6.0)
                .map(|(&r, &rho)| (rho - profile.rho0(r)).abs().powf(g.gamma()) * r * f.grid.dr())
                .sum();
            s.powf(1.0 / g.gamma())
        })
        .collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn direct_mode_samples_profile() {
    let v = ViscosityParams::new(0.0, 0.1, 2).unwrap();
    let grid = RadialGrid::new(50, 0.1, 5.0, 2).unwrap();
    let spec = InitialDataSpec::direct(bump_spec());
    assert_eq!(spec.mode, DataMode::Direct);
    let f = build_initial_field(&spec, &gas(), &v, grid.clone()).unwrap();
    let p = Profile::from_spec(&bump_spec(), 1.0).unwrap();
    for (i, &r) in grid.r().iter().enumerate() {
        assert_eq!(f.rho[i], p.rho0(r));
        assert_eq!(f.m[i], p.m0(r));
    }
    // the pipeline refuses epsilon = 0
    assert!(build_initial_field(&InitialDataSpec::new(bump_spec()), &gas(), &v, grid).is_err());
}

#[test]
fn csv_profiles_report_the_offending_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "r,rho0,m0\n0.0,1.0,0.0\n1.0,1.2,0.1\n0.5,1.0,0.0").unwrap();
    drop(f);
    match SampledProfile::from_csv(&path) {
        Err(Error::Parse { row, .. }) => assert_eq!(row, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
    std::fs::write(&path, "r,rho0\n0.0,1.0\n").unwrap();
    assert!(matches!(SampledProfile::from_csv(&path), Err(Error::Parse { row: 1, .. })));
    std::fs::write(&path, "r,rho0,m0\n0.0,1.0,0.0\n1.0,x,0.0\n").unwrap();
    assert!(matches!(SampledProfile::from_csv(&path), Err(Error::Parse { row: 3, .. })));
    std::fs::write(&path, "m0,r,rho0\n0.0,0.0,1.0\n0.5,2.0,3.0\n").unwrap();
    let p = Profile::Sampled(SampledProfile::from_csv(&path).unwrap());
    assert!((p.rho0(1.0) - 2.0).abs() < 1e-15);
    assert!((p.m0(1.0) - 0.25).abs() < 1e-15);
    assert_eq!(p.rho0(5.0), 3.0);
}

proptest! {
    #[test]
    fn clamp_is_idempotent_and_banded(rho in 0.0f64..1e8, eps in 1e-4f64..1.0, beta in 1e-5f64..1e-2) {
        let (lo, hi) = clamp_band(eps, beta);
        let c = clamp_density(rho, eps, beta);
        prop_assert!(c >= lo && c <= hi);
        prop_assert_eq!(clamp_density(c, eps, beta), c);
    }

    #[test]
    fn mollification_preserves_bounds(
        a in 0.01f64..5.0, b in 0.01f64..5.0, edge in 0.5f64..3.0, r in 0.0f64..5.0, sigma in 0.05f64..1.0
    ) {
        let m = Mollifier::new(sigma, 2, 16, 32).unwrap();
        let rho_hat = |z: f64| if z < edge { a } else { b };
        let v = mollify_sqrt_density(rho_hat, &m, r);
        prop_assert!(v >= a.min(b) * (1.0 - 1e-12) && v <= a.max(b) * (1.0 + 1e-12));
    }
}
