use std::io::Write;

use biphoton_pmd::io::{sweep_csv_string, write_jsi_csv};
use biphoton_pmd::units::UnitSystem;
use biphoton_pmd::{
    build_jsa, concurrence_gaussian, concurrence_numeric, density_matrix_from_overlap,
    optimize_compensator, parse_profile, sweep_taub, wootters_concurrence, ConcurrenceModel,
    Engine, GridChoice, Method, PhotonPairSource, PmdScenario, PumpSpec, SpectralProfile,
};

#[test]
fn tabulated_filter_reproduces_gaussian() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "omega_rad_s,re,im").unwrap();
    for k in 0..=1600 {
        let w = -8.0 + 0.01 * k as f64;
        writeln!(file, "{w},{},0", (-w * w / 4.0).exp()).unwrap();
    }
    file.flush().unwrap();
    let spec = format!("table:{}", file.path().display());
    let table = parse_profile(&spec, &UnitSystem::Normalized).unwrap();
    assert!((table.rms_bandwidth() - 1.0).abs() < 1e-4);

    let g = SpectralProfile::gaussian(1.0, 0.0).unwrap();
    let pump = PumpSpec::gaussian(0.5).unwrap();
    let src = PhotonPairSource::new(pump, table, g);
    let jsa = build_jsa(&src, GridChoice::Auto { tau_max: 1.0 }).unwrap();
    let c = concurrence_numeric(&jsa, &PmdScenario::new(1.0, 0.4).unwrap()).unwrap();
    assert!((c.concurrence - concurrence_gaussian(0.5, 1.0, 1.0, 1.0, 0.4)).abs() < 1e-4);
}

#[test]
fn physical_units_end_to_end() {
    let u = UnitSystem::Physical;
    let f = parse_profile("gaussian:B=100GHz", &u).unwrap();
    let b = f.rms_bandwidth();
    let src = PhotonPairSource::new(PumpSpec::pulsed(f.clone()), f.clone(), f);
    let engine = Engine::build(&src, Method::FreqQuadrature, 2e-12).unwrap();
    let tau_a = u.time("1ps").unwrap();
    let res = optimize_compensator(&engine, tau_a, None, 1e-19).unwrap();
    assert!((res.tau_b_opt - 0.5e-12).abs() < 1e-16);
    let r = engine.evaluate(&PmdScenario::new(tau_a, res.tau_b_opt).unwrap()).unwrap();
    assert!((r.concurrence - concurrence_gaussian(b, b, b, tau_a, 0.5e-12)).abs() < 1e-9);
    let rho = density_matrix_from_overlap(r.kappa).unwrap();
    assert!((wootters_concurrence(&rho) - r.concurrence).abs() < 1e-9);
}

#[test]
fn sweep_csv_and_jsi_dump() {
    let src = PhotonPairSource::super_gaussian(3, 0.5, 1.0, 1.0).unwrap();
    let engine = Engine::build(&src, Method::FreqQuadrature, 2.0).unwrap();
    let grid: Vec<f64> = (0..=8).map(|k| 0.25 * k as f64).collect();
    let a = sweep_csv_string(&sweep_taub(&engine, 1.0, &grid).unwrap());
    let b = sweep_csv_string(&sweep_taub(&engine, 1.0, &grid).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 10);

    let mut buf = Vec::new();
    write_jsi_csv(engine.jsa().unwrap(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let n = engine.jsa().unwrap().grid().len();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), n + 1);
}

#[test]
fn trivial_single_point_sweep() {
    let src = PhotonPairSource::gaussian(1.0, 1.0, 1.0, 0.0).unwrap();
    let engine = Engine::build(&src, Method::FreqQuadrature, 1.0).unwrap();
    let curve = sweep_taub(&engine, 0.0, &[0.0]).unwrap();
    assert_eq!(curve.points, vec![(0.0, 1.0)]);
}
