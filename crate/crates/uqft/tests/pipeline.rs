use uqft::checks::escape_scenario;
use uqft::kepler::{kepler_radius, KeplerOrbit};
use uqft::l0_model::{integrate_l0_ode, l0_eliminated, validity_domain};
use uqft::likelihood::{amplitude, circular_orbit_amplitude, CircularOrbitCase, Regime};
use uqft::oracles::inverse_transform_quadrature;
use uqft::packets::{packet_position, MinimumPacket};
use uqft::trajectory::{integrate_newton, PairPotential, TrajectorySet};
use uqft::units::UnitSystem;
use uqft::Vec3;

#[test]
fn circular_pipeline_matches_reduced_amplitude() {
    let u = UnitSystem::natural();
    let (r, l0, g, c4) = (4000.0, 1000.0, 0.02, 100.0);
    let case = CircularOrbitCase::new(r, g, l0, c4, &u).unwrap();
    let traj = TrajectorySet::circular(r, g, 0.0).unwrap();
    for theta in [0.01, 0.1, 0.3] {
        let lambda = theta / (2.0 * g / (r * r * r)).sqrt();
        assert!((case.angle(lambda) - theta).abs() < 1e-14);
        let full = amplitude(&traj, 0.0, lambda, l0, l0, c4, Regime::Full, &u)
            .unwrap()
            .amplitude;
        let reduced = circular_orbit_amplitude(&case, theta);
        assert!(
            (full - reduced).abs() / reduced < 2e-3,
            "θ = {theta}: {full} vs {reduced}"
        );
    }
}

#[test]
fn auto_regime_never_reports_auto() {
    let u = UnitSystem::natural();
    let traj = TrajectorySet::circular(4000.0, 0.02, 0.0).unwrap();
    let res = amplitude(&traj, 0.0, 50.0, 1000.0, 1000.0, 100.0, Regime::Auto, &u).unwrap();
    assert_ne!(res.regime, Regime::Auto);
    assert!((0.0..=1.0).contains(&res.amplitude));
}

#[test]
fn integrated_orbit_follows_conic() {
    let g = 1e-3;
    let orbit = KeplerOrbit::from_eccentricity(0.5, 2.0, g).unwrap();
    let period = orbit.period().unwrap();
    let traj = integrate_newton(
        &orbit.snapshot(1.0).unwrap(),
        &PairPotential::InverseR(g),
        (0.0, 0.5 * period),
        1e-12,
    )
    .unwrap();
    for i in 0..=50 {
        let s = traj.snapshot(0.5 * period * i as f64 / 50.0).unwrap();
        let x = s.positions[0] - s.positions[1];
        let expected = kepler_radius(&orbit, x.y.atan2(x.x)).unwrap();
        assert!((x.norm() - expected).abs() / expected < 1e-8);
    }
}

#[test]
fn inverse_transform_recovers_position_packet() {
    let u = UnitSystem::natural();
    let pkt = MinimumPacket::new(
        Vec3::new(0.5, -0.2, 0.1),
        Vec3::new(0.1, 0.0, -0.2),
        1.5,
        2.0,
        &u,
    )
    .unwrap();
    for x in [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, -1.0, 0.5)] {
        let q = inverse_transform_quadrature(&pkt, &x, 1e-9).unwrap();
        let c = packet_position(&x, &pkt);
        assert!((q - c).norm() <= 1e-7 * c.norm());
    }
}

#[test]
fn escape_scenario_spread_follows_eliminated_form() {
    let u = UnitSystem::natural();
    let (dyn_, _, _) = escape_scenario().unwrap();
    let rho = dyn_.t_initial / dyn_.t_inf - 1.0;
    assert!(
        validity_domain(dyn_.t_inf, dyn_.l0_initial, rho, &u)
            .unwrap()
            .valid
    );
    let t_end = 3.0 * dyn_.t_inf;
    let sol = integrate_l0_ode(&dyn_, t_end, 1e-10).unwrap();
    let expected = l0_eliminated(t_end, &dyn_).unwrap();
    assert!((sol.last()[0] - expected).abs() / expected < 1e-4);
    assert!(expected > dyn_.l0_initial);
}
