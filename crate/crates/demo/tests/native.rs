use hardy_demo::{bottom_eigenvalue_native, quasimode_ratio_native, scenario_names, weight_profile_native};

#[test]
fn level_zero_profile_is_one() {
    let p = weight_profile_native(0, 16).unwrap();
    assert_eq!(p.len(), 32);
    for pair in p.chunks(2) {
        assert!((pair[1] - 1.0).abs() < 1e-12, "{pair:?}");
    }
}

#[test]
fn level_one_profile_vanishes_at_the_boundary() {
    let p = weight_profile_native(1, 64).unwrap();
    let first = p[1];
    let last = p[p.len() - 1];
    assert!(first < 0.01 && last > first, "{first} {last}");
    // Nondecreasing in δ on (0, 1/2).
    assert!(p.chunks(2).map(|c| c[1]).collect::<Vec<_>>().windows(2).all(|w| w[1] >= w[0] - 1e-15));
}

#[test]
fn bottom_respects_known_lower_bound() {
    let b = bottom_eigenvalue_native("interval-delta2", 400).unwrap();
    assert!(b >= 0.25 - 1e-9, "{b}");
    assert!(bottom_eigenvalue_native("nowhere", 400).is_err());
    assert!(bottom_eigenvalue_native("interval-delta2", 2).is_err());
}

#[test]
fn ratio_shrinks_with_window_length() {
    let short = quasimode_ratio_native("interval-j0", 1.0, 100.0).unwrap();
    let long = quasimode_ratio_native("interval-j0", 1.0, 400.0).unwrap();
    assert!(long < short);
    assert!(quasimode_ratio_native("multipolar-2p-n3", 0.0, 100.0).is_err());
}

#[test]
fn names_cover_the_catalog() {
    assert!(scenario_names().split(',').any(|n| n == "ball3-j1"));
}
