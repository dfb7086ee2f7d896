use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortexlab::acceptance::curve_fixtures;
use vortexlab::connections::random_connection;
use vortexlab::cylinder::CylinderDomain;
use vortexlab::gradflow::{downward_flow, Line};
use vortexlab::io::{
    connection_from_json, connection_to_json, curve_from_json, curve_to_json, load_pair, read_line_csv,
    read_samples_csv, save_pair, write_curvature_csv, write_line_csv, write_samples_csv, SCHEMA_VERSION,
};
use vortexlab::target::{TargetManifold, TargetPoint};
use vortexlab::vortex::floer_cylinder;

fn scratch_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("vortexlab-io-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_survive_a_round_trip(values in prop::collection::vec((-1e6..1e6f64, any::<f64>().prop_filter("finite", |v| v.is_finite())), 0..40)) {
        let mut buf = Vec::new();
        write_samples_csv(&values, &mut buf).unwrap();
        prop_assert_eq!(read_samples_csv(&buf[..]).unwrap(), values);
    }

    #[test]
    fn connections_survive_a_round_trip(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conn = random_connection(&mut rng, 3, 2);
        let json = connection_to_json(&conn).unwrap();
        prop_assert_eq!(connection_from_json(&json).unwrap(), conn);
    }
}

#[test]
fn pairs_survive_a_round_trip_on_disk() {
    let dir = scratch_dir("pair");
    let dom = CylinderDomain::new(3.0, 31, 8).unwrap();
    let pair = floer_cylinder(&TargetManifold::Sphere, 0.3, &TargetPoint::sphere_polar(1.1, 0.4), dom).unwrap();
    save_pair(&pair, &dir, "floer").unwrap();
    assert_eq!(load_pair(&dir, "floer").unwrap(), pair);
    let header = std::fs::read_to_string(dir.join("floer.json")).unwrap();
    assert!(header.contains(&format!("\"schema_version\": {SCHEMA_VERSION}")));
    assert!(header.contains("\"kind\": \"sphere\""));
    let csv = std::fs::read_to_string(dir.join("floer.csv")).unwrap();
    assert!(csv.starts_with("t,theta,a,phi0,phi1,phi2\n"));
    assert!(!csv.contains('\r'));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn lines_survive_a_round_trip() {
    let line = downward_flow(&TargetManifold::Sphere, &TargetPoint::sphere_polar(0.7, 0.1), (-1.0, 2.0), 0.1).unwrap();
    let mut buf = Vec::new();
    write_line_csv(&line, &mut buf).unwrap();
    let back = read_line_csv(&buf[..]).unwrap();
    assert_eq!(back.points, line.points);
    assert!((back.start - line.start).abs() < 1e-15 && (back.step - line.step).abs() < 1e-12);
    let uneven = "t,x0\n0,1\n0.1,2\n0.5,3\n";
    assert!(read_line_csv(uneven.as_bytes()).is_err());
    let short = Line { start: 0.0, step: 1.0, points: vec![vec![1.0]] };
    let mut buf = Vec::new();
    write_line_csv(&short, &mut buf).unwrap();
    assert!(read_line_csv(&buf[..]).is_err());
}

#[test]
fn curves_survive_a_round_trip() {
    for f in curve_fixtures() {
        let json = curve_to_json(&f.curve).unwrap();
        assert_eq!(curve_from_json(&json).unwrap(), f.curve, "{}", f.name);
        let bare = serde_json::to_string(&f.curve).unwrap();
        assert_eq!(curve_from_json(&bare).unwrap(), f.curve);
    }
    let wrong = r#"{"schema_version": 99, "curve": {"components": [], "marked": [], "nodes": []}}"#;
    assert!(curve_from_json(wrong).is_err());
}

#[test]
fn curvature_grid_has_one_row_per_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let conn = random_connection(&mut rng, 2, 1);
    let mut buf = Vec::new();
    write_curvature_csv(&conn, 2.0, 5, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert_eq!(text.lines().next(), Some("x,y,density"));
    assert!(write_curvature_csv(&conn, 2.0, 1, &mut Vec::new()).is_err());
}
