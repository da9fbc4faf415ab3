use fissure_core::config::{ConfigError, SweepConfig};
use fissure_core::manufactured::manufactured_case;
use fissure_core::sweep::{column_trend, emit_report, read_report, run_sweep, ConvergenceReport, SweepRow, CSV_HEADER};
use std::path::Path;

const DEMO_GEOMETRY: &str = "[domain]\nx_lo = 0.0\nx_hi = 1.0\nbottom = 0.0\ntop = 1.2\n\n[[fissure]]\nheight = 0.2\nbreakpoints = [0.0, 1.0]\nsegments = [[0.5]]\n";

fn write_config(dir: &Path, eps: &str, target_h: f64, data: &str) -> SweepConfig {
    std::fs::write(dir.join("g.toml"), DEMO_GEOMETRY).unwrap();
    let text = format!("geometry = \"g.toml\"\neps = {eps}\ntarget_h = {target_h}\noutput = \"out\"\n\n[data]\n{data}");
    std::fs::write(dir.join("c.toml"), text).unwrap();
    SweepConfig::from_file(&dir.join("c.toml")).unwrap()
}

const DEMO_DATA: &str = "a1 = \"1\"\na2 = \"1\"\nalpha = \"0.1\"\nsource = \"1\"\n";

#[test]
fn zero_data_sweep_has_zero_differences() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), "[1.0, 0.5, 0.1]", 0.05, "a1 = \"1\"\na2 = \"1\"\nalpha = \"0.1\"\nsource = \"0\"\n");
    let r = run_sweep(&c).unwrap();
    for row in &r.rows {
        assert!(row.is_ok());
        for v in [row.err_u1_l2, row.err_eu2_l2, row.err_p1_h1, row.err_p2_h1] {
            assert!(v < 1e-12, "{row:?}");
        }
    }
}

#[test]
fn tangential_fields_give_discretization_level_differences() {
    let case = manufactured_case("uniform-tangential").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let data = format!(
        "a1 = \"{}\"\na2 = \"{}\"\nalpha = \"{}\"\nsource = \"{}\"\ndrained_pressure = \"{}\"\nfissure_end_flux = \"{}\"\n",
        case.data.a1, case.data.a2, case.data.alpha, case.data.source, case.data.drained_pressure, case.data.fissure_end_flux
    );
    let c = write_config(dir.path(), "[1.0]", 0.05, &data);
    let r = run_sweep(&c).unwrap();
    let row = &r.rows[0];
    for v in [row.err_u1_l2, row.err_eu2_l2, row.err_p1_h1, row.err_p2_h1] {
        assert!(v < 1e-9, "{row:?}");
    }
}

#[test]
fn coarse_demo_sweep_converges_and_turns_tangential() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), "[0.4, 0.2, 0.1]", 0.05, DEMO_DATA);
    let r = run_sweep(&c).unwrap();
    assert!(r.all_ok());
    for col in [r.column(|r| r.err_u1_l2), r.column(|r| r.err_eu2_l2), r.column(|r| r.err_p1_h1), r.column(|r| r.err_p2_h1)] {
        assert!(column_trend(&col).monotone, "{col:?}");
    }
    let ratio = r.column(|r| r.ratio_tau_n);
    assert!(ratio.windows(2).all(|w| w[1] >= 1.5 * w[0]), "{ratio:?}");
    // η stays bounded while ∂_z p² vanishes with ε.
    let dz: Vec<f64> = r.bounds.iter().map(|b| b.dz_p2_l2).collect();
    assert!(dz.windows(2).all(|w| w[1] < 0.6 * w[0]), "{dz:?}");
    assert!(r.bounds.iter().all(|b| b.eta_l2 <= r.bounds[0].eta_l2 * 1.01));
    for row in &r.rows {
        for v in row.values() {
            assert!(v.is_finite() && v >= 0.0);
        }
    }
}

fn sample_report() -> ConvergenceReport {
    let row = |eps: f64| SweepRow {
        eps,
        err_u1_l2: 0.1 * eps + 1.0 / 3.0,
        err_eu2_l2: std::f64::consts::PI * eps,
        err_p1_h1: 1e-300,
        err_p2_h1: 123456.789,
        ratio_tau_n: 1.0 / eps,
        eta_l2: 0.0,
        beta_h: 0.1 + 0.2,
        status: "ok".into(),
    };
    ConvergenceReport {
        rows: vec![row(0.4), row(0.2), row(0.1), SweepRow::failed(0.05, "singular system: x, y")],
        bounds: vec![],
        limit_beta_h: 0.5,
        mesh_h: 0.1,
        n_cells: 10,
        n_unknowns_eps: 20,
        n_unknowns_limit: 15,
        limit_velocity_l2: 1.0,
        limit_pressure_l2: 2.0,
        limit_tangential_l2: 1.0,
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let report = sample_report();
    emit_report(&report, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let back = read_report(dir.path()).unwrap();
    assert_eq!(back.len(), 4);
    for (a, b) in report.rows.iter().zip(&back) {
        assert_eq!(a.status, b.status);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()), "{x} {y}");
        }
    }
    assert!(back[3].status.starts_with("failed: "));
    for name in ["sweep.dat", "bounds.dat", "limit.dat"] {
        assert!(dir.path().join(name).exists());
    }
    // Only successful rows reach the plot data.
    let dat = std::fs::read_to_string(dir.path().join("sweep.dat")).unwrap();
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn bad_report_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sweep.csv"), "eps,err\n0.1,0.2\n").unwrap();
    assert!(read_report(dir.path()).is_err());
    assert!(read_report(&dir.path().join("missing")).is_err());
}

#[test]
fn config_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "geometry = \"g.toml\"\neps = []\ntarget_h = 0.1\noutput = \"o\"\n[data]\na1 = \"1\"\na2 = \"1\"\nalpha = \"0\"\nsource = \"0\"\n").unwrap();
    assert!(matches!(SweepConfig::from_file(&dir.path().join("c.toml")), Err(ConfigError::Invalid(_))));
    let c = write_config(dir.path(), "[0.5]", 0.05, DEMO_DATA);
    std::fs::remove_file(dir.path().join("g.toml")).unwrap();
    let err = run_sweep(&c).unwrap_err().to_string();
    assert!(err.contains("g.toml"), "{err}");
    let c = write_config(dir.path(), "[0.5]", 0.05, "a1 = \"0\"\na2 = \"1\"\nalpha = \"0\"\nsource = \"0\"\n");
    assert!(run_sweep(&c).unwrap_err().to_string().contains("a1"));
    let c = write_config(dir.path(), "[0.5]", 0.05, "a1 = \"1\"\na2 = \"1 + z\"\nalpha = \"0\"\nsource = \"0\"\n");
    assert!(run_sweep(&c).unwrap_err().to_string().contains("a2"));
}
