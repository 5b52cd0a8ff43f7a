use spdecrit_numerics::snapshot::{read_snapshot, read_trajectory, write_snapshot, write_trajectory};
use spdecrit_numerics::{sample_spatial_white, solve_z1_mild, Z1Params};

#[test]
fn snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for shape in [vec![64], vec![8, 16]] {
        let f = sample_spatial_white(&shape, 5).unwrap();
        let path = dir.path().join("f.spdf");
        write_snapshot(&path, &f).unwrap();
        assert_eq!(read_snapshot(&path).unwrap(), f);
        let bytes = std::fs::metadata(&path).unwrap().len() as usize;
        assert_eq!(bytes, 12 + 4 * shape.len() + 8 * f.len());
    }
}

#[test]
fn trajectory_round_trip_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let traj = solve_z1_mild(&Z1Params::heat(&[32], 0.01, 6, 9)).unwrap();
    let paths = write_trajectory(dir.path(), &traj, Some(9)).unwrap();
    assert_eq!(paths.len(), 8);
    let (back, manifest) = read_trajectory(dir.path()).unwrap();
    assert_eq!(back, traj);
    assert_eq!(manifest.n, 7);
    assert_eq!(manifest.seed, Some(9));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    for key in ["dt", "times", "n", "seed"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    // No stray temporary files.
    let names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into()).collect();
    assert!(names.iter().all(|n| !n.starts_with('.')), "{names:?}");
}

#[test]
fn rewriting_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let f = sample_spatial_white(&[128], 1).unwrap();
    let (a, b) = (dir.path().join("a.spdf"), dir.path().join("b.spdf"));
    write_snapshot(&a, &f).unwrap();
    write_snapshot(&b, &sample_spatial_white(&[128], 1).unwrap()).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn missing_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(read_snapshot(&dir.path().join("nope.spdf")).unwrap_err().code(), "E_IO");
}
