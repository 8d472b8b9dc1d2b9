use num_complex::Complex64;

use mcnls::grid::{make_grid, Field};
use mcnls::io::{read_field, read_trajectory, write_field, write_trajectory, TrajectoryManifest};
use mcnls::propagator::{evolve, Nonlinearity, SolverConfig};

#[test]
fn trajectory_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(1, 128, 8.0).unwrap();
    let u0 = Field::from_fn(g, |x| Complex64::from_polar((-x[0] * x[0]).exp(), x[0]));
    let cfg = SolverConfig::new(Nonlinearity::Focusing, 1, 1e-3).with_store_every(0.05);
    let traj = evolve(&u0, (0.0, 0.2), &cfg).unwrap();
    let path = write_trajectory(dir.path(), &traj).unwrap();
    let back = read_trajectory(&path).unwrap();
    assert_eq!(back.times, traj.times);
    assert_eq!(back.fields.len(), traj.fields.len());
    for (a, b) in back.fields.iter().zip(&traj.fields) {
        assert_eq!(a.values, b.values);
    }
    let manifest: TrajectoryManifest = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(manifest.stats.len(), traj.len());
    assert!(manifest.stats.iter().all(|s| s.mass > 0.0 && s.scale > 0.0));
    assert!(manifest.residual.is_some());
}

#[test]
fn snapshot_file_round_trip_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(2, 16, 4.0).unwrap();
    let f = Field::from_real_fn(g, |x| x[0] - 2.0 * x[1]);
    let path = dir.path().join("f.bin");
    write_field(&path, &f).unwrap();
    assert_eq!(read_field(&path).unwrap().values, f.values);
    assert!(read_field(&dir.path().join("missing.bin")).is_err());
}
