use muellerkit::augment::{apply_mask, rotate_cube, QuarterTurn, SpatialTransform};
use muellerkit::dataio::*;
use muellerkit::error::Error;
use muellerkit::luchipman::{decompose_cube, DecomposeOptions, PixelStatus};
use muellerkit::par::with_workers;
use muellerkit::polcore::*;
use muellerkit::realizability::{project_cube, scan_cube, DEFAULT_CLIP, DEFAULT_TOL_PHYS};
use muellerkit::synth::{random_physical_cube, unphysical_tile_cube};

#[test]
fn every_truncation_of_a_cube_is_rejected() {
    let cube = normalize_cube(&random_physical_cube(2, 3, vec![500.0, 600.0], 1).unwrap()).unwrap();
    let masked = apply_mask(&cube, ElementMask::LINEAR_ONLY, 0.0).unwrap();
    for c in [cube, masked] {
        let bytes = encode_cube(&c);
        for len in 0..bytes.len() {
            match decode_cube(&bytes[..len]) {
                Err(Error::TruncatedFile { available, .. }) => assert_eq!(available, len as u64),
                other => panic!("length {len}: {other:?}"),
            }
        }
    }
}

#[test]
fn every_truncation_of_a_plane_is_rejected() {
    let p = PlaneFile::new(3, 2, PlaneKind::Label, PlaneData::U8(vec![0, 1, 255, 1, 0, 0])).unwrap();
    let bytes = p.encode();
    for len in 0..bytes.len() {
        assert!(matches!(PlaneFile::decode(&bytes[..len]), Err(Error::TruncatedFile { .. })));
    }
}

#[test]
fn projected_tile_cube_validates_clean() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("tile.mmc");
    let fixed = dir.path().join("fixed.mmc");
    write_cube(&unphysical_tile_cube(4, 4, vec![550.0]).unwrap(), &raw).unwrap();
    let before = validate_file(&raw).unwrap();
    assert_eq!(before.fraction_physical, 0.5);
    assert!(!before.is_clean());

    let projected = project_cube(&read_cube(&raw).unwrap(), DEFAULT_CLIP, DEFAULT_TOL_PHYS).unwrap();
    write_cube(&projected, &fixed).unwrap();
    let after = validate_file(&fixed).unwrap();
    assert!(after.is_clean(), "{after:?}");
    assert!(after.min_eigenvalue > 0.0);
}

#[test]
fn physical_cube_projects_to_identical_bytes() {
    let cube = random_physical_cube(5, 5, vec![500.0], 2).unwrap();
    let projected = project_cube(&cube, DEFAULT_CLIP, DEFAULT_TOL_PHYS).unwrap();
    assert_eq!(encode_cube(&projected), encode_cube(&cube));
}

#[test]
fn normalized_cube_keeps_invariants_through_projection() {
    let tile = unphysical_tile_cube(2, 2, vec![550.0]).unwrap();
    let scaled = MuellerCube::from_fn(2, 2, vec![550.0], |_, r, c| tile.get(0, r, c).scale(3.0)).unwrap();
    let n = normalize_cube(&scaled).unwrap();
    let p = project_cube(&n, DEFAULT_CLIP, DEFAULT_TOL_PHYS).unwrap();
    assert!(p.is_normalized());
    assert!(p.data().iter().all(|m| m.m(0, 0) == 1.0));
    assert_eq!(scan_cube(&p, DEFAULT_TOL_PHYS).unwrap().fraction_physical, 1.0);
}

#[test]
fn maps_survive_disk_and_transforms() {
    let cube = random_physical_cube(6, 4, vec![480.0, 520.0, 633.5], 3).unwrap();
    let opts = DecomposeOptions::default();
    let maps = decompose_cube(&cube, &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = write_maps(&maps, dir.path()).unwrap();
    assert_eq!(written.len(), 12);
    assert_eq!(read_maps(dir.path()).unwrap(), maps);

    let rotated = rotate_cube(&cube, SpatialTransform::rotate(QuarterTurn::Deg270)).unwrap();
    let path = dir.path().join("rot.mmc");
    write_cube(&rotated.clone().with_precision(Precision::F64), &path).unwrap();
    assert_eq!(read_cube(&path).unwrap(), rotated.clone().with_precision(Precision::F64));
    // f32 storage rounds once; after that the bytes are stable.
    write_cube(&rotated, &path).unwrap();
    let once = std::fs::read(&path).unwrap();
    assert_eq!(encode_cube(&read_cube(&path).unwrap()), once);
}

#[test]
fn worker_count_never_changes_results() {
    let cube = random_physical_cube(16, 16, vec![500.0, 600.0], 4).unwrap();
    let opts = DecomposeOptions::default();
    let one = with_workers(Some(1), || decompose_cube(&cube, &opts).unwrap());
    for w in [2, 5] {
        assert_eq!(with_workers(Some(w), || decompose_cube(&cube, &opts).unwrap()), one);
    }
    let scan1 = with_workers(Some(1), || scan_cube(&cube, DEFAULT_TOL_PHYS).unwrap().min_eigenvalue_plane());
    let scan4 = with_workers(Some(4), || scan_cube(&cube, DEFAULT_TOL_PHYS).unwrap().min_eigenvalue_plane());
    assert_eq!(
        scan1.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        scan4.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn dark_and_nan_pixels_are_flagged_not_fatal() {
    let mut cube = random_physical_cube(2, 2, vec![500.0], 5).unwrap();
    *cube.get_mut(0, 0, 0) = MuellerMatrix::ZERO;
    cube.get_mut(0, 1, 1).0[1][2] = f64::NAN;
    let maps = decompose_cube(&cube, &DecomposeOptions::default()).unwrap();
    let s = &maps.planes[0].status;
    assert_eq!(s[0], PixelStatus::UnphysicalInput);
    assert_eq!(s[3], PixelStatus::UnphysicalInput);
    assert_eq!(s[1], PixelStatus::Ok);
    assert!(maps.planes[0].depolarization.iter().all(|x| x.is_finite()));
}
