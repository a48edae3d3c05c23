use radvisc::diagnostics::relative_energy;
use radvisc::eos::{dissipation_constant, pressure};
use radvisc::solver::{Solver, SolverConfig, Splitting, ViscousTreatment};
use radvisc::{Error, GasParams, RadialField, RadialGrid, ViscosityParams};

fn gas2() -> GasParams {
    GasParams::new(2.0, 2, 1.0).unwrap()
}

fn bump_field(cells: usize) -> RadialField {
    let grid = RadialGrid::new(cells, 0.1, 10.0, 2).unwrap();
    RadialField::from_fn(grid, |r| 1.0 + 0.3 * (-(r - 4.0) * (r - 4.0)).exp(), |_| 0.0)
}

#[test]
fn cfl_examples() {
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    let s = Solver::new(gas2(), v, SolverConfig::new(1.0)).unwrap();
    let f = RadialField::uniform(RadialGrid::new(100, 1.0, 2.0, 2).unwrap(), 1.0, 0.0);
    assert!((s.cfl_dt(&f).unwrap() - 0.008).abs() < 1e-15);
    let coarse = RadialField::uniform(RadialGrid::new(50, 1.0, 2.0, 2).unwrap(), 1.0, 0.0);
    assert!((s.cfl_dt(&coarse).unwrap() - 2.0 * s.cfl_dt(&f).unwrap()).abs() < 1e-15);
    let up = RadialField::uniform(f.grid.clone(), 1.0, 3.0);
    let down = RadialField::uniform(f.grid.clone(), 1.0, -3.0);
    assert_eq!(s.cfl_dt(&up).unwrap(), s.cfl_dt(&down).unwrap());

    let mut bad = f.clone();
    bad.rho[7] = f64::NAN;
    assert!(matches!(s.cfl_dt(&bad), Err(Error::NonFinite { cell: 7, .. })));
}

#[test]
fn explicit_viscosity_caps_the_step() {
    let v = ViscosityParams::new(0.5, 0.1, 2).unwrap();
    let mut cfg = SolverConfig::new(1.0);
    let implicit = Solver::new(gas2(), v, cfg.clone()).unwrap();
    cfg.viscous = ViscousTreatment::Explicit;
    let explicit = Solver::new(gas2(), v, cfg).unwrap();
    let f = RadialField::uniform(RadialGrid::new(400, 1.0, 2.0, 2).unwrap(), 1.0, 0.0);
    assert!(explicit.cfl_dt(&f).unwrap() < implicit.cfl_dt(&f).unwrap());
}

#[test]
fn rest_state_is_steady() {
    for dim in [2, 3] {
        let g = GasParams::new(1.4, dim, 1.7).unwrap();
        let v = ViscosityParams::new(0.1, 0.2, dim).unwrap();
        for splitting in [Splitting::Lie, Splitting::Strang] {
            let mut cfg = SolverConfig::new(1.0);
            cfg.splitting = splitting;
            let s = Solver::new(g, v, cfg).unwrap();
            let mut f = RadialField::uniform(RadialGrid::new(300, 0.05, 8.0, dim).unwrap(), 1.7, 0.0);
            for _ in 0..100 {
                let dt = s.cfl_dt(&f).unwrap();
                s.step(&mut f, dt).unwrap();
                assert!(f.rho.iter().all(|&r| (r - 1.7).abs() <= 1e-14));
                assert!(f.m.iter().all(|&m| m.abs() <= 1e-14));
            }
        }
    }
}

#[test]
fn zero_end_time_returns_the_initial_state() {
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    let s = Solver::new(gas2(), v, SolverConfig::new(0.0)).unwrap();
    let f = bump_field(100);
    let tr = s.run(&f).unwrap();
    assert_eq!(tr.steps, 0);
    assert_eq!(tr.snapshots.len(), 1);
    assert_eq!(tr.final_state().field, f);
}

#[test]
fn mass_is_conserved_to_round_off() {
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    for splitting in [Splitting::Lie, Splitting::Strang] {
        let mut cfg = SolverConfig::new(0.5).with_snapshots(0.1);
        cfg.splitting = splitting;
        let s = Solver::new(gas2(), v, cfg).unwrap();
        let f = bump_field(400);
        let m0 = f.mass();
        let tr = s.run(&f).unwrap();
        for snap in &tr.snapshots {
            assert!(((snap.field.mass() - m0) / m0).abs() <= 1e-12);
        }
    }
}

#[test]
fn runs_are_bit_identical() {
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    let s = Solver::new(gas2(), v, SolverConfig::new(0.3).with_snapshots(0.1)).unwrap();
    let f = bump_field(200);
    let a = s.run(&f).unwrap();
    let b = s.run(&f).unwrap();
    assert_eq!(a.steps, b.steps);
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        assert_eq!(x.field, y.field);
        assert_eq!(x.acc, y.acc);
    }
}

#[test]
fn bump_energy_does_not_increase() {
    let g = gas2();
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    let s = Solver::new(g, v, SolverConfig::new(0.5).with_snapshots(0.025)).unwrap();
    let tr = s.run(&bump_field(400)).unwrap();
    let e: Vec<f64> = tr.snapshots.iter().map(|s| relative_energy(&s.field, &g)).collect();
    assert!(e[0] > 0.0);
    for w in e.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
    }
    // the accumulated dissipation accounts for the loss up to the discretization error
    let last = tr.final_state();
    let loss = e[0] - e[e.len() - 1];
    assert!(last.acc.dissipation_total() > 0.0);
    assert!(last.acc.dissipation_total() <= loss * (1.0 + 1e-9));
}

#[test]
fn dissipation_dominates_the_coercive_form() {
    // a_h(u) >= int (rho + c_N delta rho^alpha)(u_r^2 + u^2/r^2) r dr - O(dr) for N = 2
    let g = gas2();
    let v = ViscosityParams::new(0.05, 0.3, 2).unwrap();
    let c_n = dissipation_constant(v.alpha, 2);
    assert!(c_n > 0.0);
    let s = Solver::new(g, v, SolverConfig::new(1.0)).unwrap();
    let grid = RadialGrid::new(800, 0.5, 6.0, 2).unwrap();
    let mut f = RadialField::from_fn(
        grid,
        |r| 1.0 + 0.2 * (r - 3.0).cos(),
        |r| 0.3 * (std::f64::consts::PI * (r - 0.5) / 5.5).sin(),
    );
    let dt = s.cfl_dt(&f).unwrap();
    let info = s.step(&mut f, dt).unwrap();
    let total: f64 = info.dissipation.iter().sum::<f64>() / (dt * v.epsilon);

    let u = f.velocity();
    let grid = &f.grid;
    let h = grid.dr();
    let mut lower = 0.0;
    for i in 0..f.len() {
        let ur = if i == 0 {
            (u[1] - u[0]) / h
        } else if i + 1 == f.len() {
            (u[i] - u[i - 1]) / h
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * h)
        };
        let r = grid.r()[i];
        let q = ur * ur + u[i] * u[i] / (r * r);
        lower += (f.rho[i] + c_n * v.delta * f.rho[i].powf(v.alpha)) * q * grid.volume(i);
    }
    assert!(total >= lower * (1.0 - 20.0 * h), "{total} < {lower}");
    assert!(info.dissipation.iter().all(|&d| d >= 0.0));
}

#[test]
fn walls_carry_no_mass_flux() {
    // strong flow into both walls: mass stays put while momentum reverses
    let v = ViscosityParams::new(0.01, 0.1, 2).unwrap();
    let s = Solver::new(gas2(), v, SolverConfig::new(1.0)).unwrap();
    let grid = RadialGrid::new(200, 1.0, 3.0, 2).unwrap();
    let mut f = RadialField::from_fn(grid, |_| 1.0, |r| if r < 2.0 { -0.5 } else { 0.5 });
    let m0 = f.mass();
    for _ in 0..200 {
        let dt = s.cfl_dt(&f).unwrap();
        s.step(&mut f, dt).unwrap();
    }
    assert!(((f.mass() - m0) / m0).abs() <= 1e-12);
}

#[test]
fn implicit_and_explicit_viscosity_agree() {
    let v = ViscosityParams::new(0.1, 0.1, 2).unwrap();
    let f = bump_field(200);
    let mut cfg = SolverConfig::new(0.2);
    let a = Solver::new(gas2(), v, cfg.clone()).unwrap().run(&f).unwrap();
    cfg.viscous = ViscousTreatment::Explicit;
    let b = Solver::new(gas2(), v, cfg.clone()).unwrap().run(&f).unwrap();
    cfg.viscous = ViscousTreatment::Implicit;
    cfg.splitting = Splitting::Strang;
    let c = Solver::new(gas2(), v, cfg).unwrap().run(&f).unwrap();
    let diff = |x: &RadialField, y: &RadialField| {
        x.rho.iter().zip(&y.rho).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    };
    let (fa, fb, fc) = (&a.final_state().field, &b.final_state().field, &c.final_state().field);
    assert!(diff(fa, fb) < 1e-3, "{}", diff(fa, fb));
    assert!(diff(fa, fc) < 1e-3, "{}", diff(fa, fc));
    assert!(fa.t == 0.2 && fb.t == 0.2 && fc.t == 0.2);
}

#[test]
fn positivity_fault_names_the_cell() {
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    let s = Solver::new(gas2(), v, SolverConfig::new(1.0)).unwrap();
    let grid = RadialGrid::new(50, 1.0, 2.0, 2).unwrap();
    let mut f = RadialField::from_fn(grid, |_| 1.0, |r| if r < 1.5 { -2.0 } else { 2.0 });
    match s.step(&mut f, 0.05) {
        Err(Error::Positivity { cell, value, floor, .. }) => {
            assert!(cell < 50);
            assert!(value <= floor);
        }
        other => panic!("expected a positivity fault, got {other:?}"),
    }
}

#[test]
fn step_limit_and_budget_faults() {
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    let mut cfg = SolverConfig::new(1.0);
    cfg.max_steps = Some(3);
    let s = Solver::new(gas2(), v, cfg).unwrap();
    assert!(matches!(s.run(&bump_field(100)), Err(Error::StepLimit { steps: 3, .. })));

    let mut cfg = SolverConfig::new(1.0);
    cfg.wall_clock_budget_s = Some(0.0);
    let s = Solver::new(gas2(), v, cfg).unwrap();
    assert!(matches!(s.run(&bump_field(100)), Err(Error::Budget { .. })));
}

#[test]
fn invalid_solver_configs_are_rejected() {
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    for (cfl, t_end) in [(0.0, 1.0), (1.0, 1.0), (0.4, -1.0), (0.4, f64::NAN)] {
        let mut cfg = SolverConfig::new(t_end);
        cfg.cfl = cfl;
        assert!(Solver::new(gas2(), v, cfg).err().unwrap().is_config());
    }
    let cfg = SolverConfig::new(1.0).with_snapshots(0.0);
    assert!(Solver::new(gas2(), v, cfg).is_err());
}

#[test]
fn snapshots_land_on_the_interval() {
    let v = ViscosityParams::new(0.05, 0.1, 2).unwrap();
    let s = Solver::new(gas2(), v, SolverConfig::new(0.35).with_snapshots(0.1)).unwrap();
    let tr = s.run(&bump_field(100)).unwrap();
    let times: Vec<f64> = tr.snapshots.iter().map(|s| s.field.t).collect();
    let want = [0.0, 0.1, 0.2, 0.3, 0.35];
    assert_eq!(times.len(), want.len());
    for (a, b) in times.iter().zip(want) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

/// Position of the outgoing pulse peak of `sqrt(r) (rho - rho_bar)` beyond `r_min`,
/// refined by a parabola through the three largest samples.
fn pulse_peak(f: &RadialField, rho_bar: f64, r_min: f64) -> f64 {
    let r = f.grid.r();
    let w: Vec<f64> = r.iter().zip(&f.rho).map(|(r, p)| r.sqrt() * (p - rho_bar)).collect();
    let k = (1..w.len() - 1)
        .filter(|&i| r[i] > r_min)
        .max_by(|&a, &b| w[a].total_cmp(&w[b]))
        .unwrap();
    let (a, b, c) = (w[k - 1], w[k], w[k + 1]);
    r[k] + 0.5 * f.grid.dr() * (a - c) / (a - 2.0 * b + c)
}

fn acoustic_speed(cells: usize, epsilon: f64) -> f64 {
    let g = gas2();
    let grid = RadialGrid::new(cells, 1.0, 21.0, 2).unwrap();
    let f = RadialField::from_fn(grid, |r| 1.0 + 1e-3 * (-((r - 8.0) / 0.5).powi(2)).exp(), |_| 0.0);
    let cfg = SolverConfig::new(12.0).with_snapshots(4.0);
    let tr = if epsilon > 0.0 {
        let v = ViscosityParams::new(epsilon, 0.1, 2).unwrap();
        Solver::new(g, v, cfg).unwrap().run(&f).unwrap()
    } else {
        radvisc::euler::EulerSolver::new(g, cfg).unwrap().run(&f).unwrap()
    };
    let (s1, s3) = (&tr.snapshots[1].field, &tr.snapshots[3].field);
    (pulse_peak(s3, 1.0, 8.0) - pulse_peak(s1, 1.0, 8.0)) / (s3.t - s1.t)
}

#[test]
fn acoustic_pulse_travels_at_the_sound_speed() {
    let c = radvisc::eos::sound_speed(1.0, &gas2()).unwrap();
    assert_eq!(c, 0.5);
    for eps in [0.0, 1e-4] {
        let speed = acoustic_speed(1600, eps);
        assert!(((speed - c) / c).abs() < 0.02, "eps {eps}: speed {speed}");
    }
}

/// Manufactured solution on [1, 2] with u vanishing at both walls.
struct Manufactured {
    g: GasParams,
    v: ViscosityParams,
}

const MMS_A: f64 = 0.2;
const MMS_U: f64 = 0.3;

impl Manufactured {
    fn rho(&self, t: f64, r: f64) -> f64 {
        1.0 + MMS_A * (std::f64::consts::PI * (r - 1.0)).cos() * t.cos()
    }

    fn u(&self, t: f64, r: f64) -> f64 {
        MMS_U * (std::f64::consts::PI * (r - 1.0)).sin() * (-t).exp()
    }

    fn m(&self, t: f64, r: f64) -> f64 {
        self.rho(t, r) * self.u(t, r)
    }

    /// Residuals of the continuity and momentum equations, by nested central differences.
    fn source(&self, t: f64, r: f64) -> (f64, f64) {
        let h = 1e-4;
        let d_r = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let d_t = |f: &dyn Fn(f64) -> f64, s: f64| (f(s + h) - f(s - h)) / (2.0 * h);
        let geo = (self.g.dim() - 1) as f64;
        let m = self.m(t, r);
        let rho = self.rho(t, r);

        let s_rho = d_t(&|s| self.rho(s, r), t) + d_r(&|x| self.m(t, x), r) + geo * m / r;

        let flux = |x: f64| self.m(t, x).powi(2) / self.rho(t, x) + pressure(self.rho(t, x), &self.g).unwrap();
        let convective = d_t(&|s| self.m(s, r), t) + d_r(&flux, r) + geo * m * m / (rho * r);

        let div = |x: f64| d_r(&|y| self.u(t, y), x) + geo * self.u(t, x) / x;
        let bulk = |x: f64| {
            let p = self.rho(t, x);
            (self.v.mu(p) + self.v.lambda(p)) * div(x)
        };
        let mu_r = d_r(&|x| self.v.mu(self.rho(t, x)), r);
        let viscous = self.v.epsilon * (d_r(&bulk, r) - geo * mu_r * self.u(t, r) / r);
        (s_rho, convective - viscous)
    }
}

fn mms_error(cells: usize) -> (f64, f64) {
    let g = gas2();
    let v = ViscosityParams::new(0.1, 0.2, 2).unwrap();
    let mms = std::sync::Arc::new(Manufactured { g, v });
    let src = mms.clone();
    let s = Solver::new(g, v, SolverConfig::new(0.5))
        .unwrap()
        .with_source(Box::new(move |t, r| src.source(t, r)));
    let grid = RadialGrid::new(cells, 1.0, 2.0, 2).unwrap();
    let f = RadialField::from_fn(grid, |r| mms.rho(0.0, r), |r| mms.m(0.0, r));
    let tr = s.run(&f).unwrap();
    let end = &tr.final_state().field;
    let mut e = (0.0, 0.0);
    for i in 0..end.len() {
        let r = end.grid.r()[i];
        let w = end.grid.volume(i);
        e.0 += (end.rho[i] - mms.rho(end.t, r)).abs() * w;
        e.1 += (end.m[i] - mms.m(end.t, r)).abs() * w;
    }
    e
}

#[test]
fn manufactured_solution_converges_at_first_order() {
    let errs: Vec<(f64, f64)> = [50, 100, 200, 400].iter().map(|&m| mms_error(m)).collect();
    for w in errs.windows(2) {
        let (rr, rm) = (w[0].0 / w[1].0, w[0].1 / w[1].1);
        assert!((1.5..=2.6).contains(&rr), "density ratio {rr} from {errs:?}");
        assert!((1.5..=2.6).contains(&rm), "momentum ratio {rm} from {errs:?}");
    }
}
