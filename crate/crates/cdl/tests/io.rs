use std::path::Path;

use cdl::io::*;
use cdl::Error;
use cdl_core::driver::{ConvergenceTrace, TraceRow};
use cdl_core::mask::make_random_mask;
use cdl_core::{CdlError, Dictionary, NormMode, Shape2};
use image::{GrayImage, Luma, Rgb, RgbImage};
use proptest::prelude::*;

proptest! {
    #[test]
    fn tensor_roundtrip_is_bitwise(dims in prop::collection::vec(1usize..5, 0..4), seed in any::<u64>()) {
        let n: usize = dims.iter().product();
        let data: Vec<f64> = (0..n).map(|i| f64::from_bits(seed.wrapping_mul(i as u64 + 1) >> 2)).collect();
        let t = Tensor::new(dims, data).unwrap();
        let bytes = encode_tensor(&t);
        let (back, used) = decode_tensor(&bytes, Path::new("t")).unwrap();
        prop_assert_eq!(used, bytes.len());
        prop_assert_eq!(&back.dims, &t.dims);
        prop_assert!(back.data.iter().zip(&t.data).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn trace_roundtrip_is_exact(vals in prop::collection::vec(-1e300f64..1e300, 8)) {
        let row = TraceRow {
            iter: 1, time_s: vals[0].abs(), objective: vals[1], fidelity: vals[2], l1: vals[3],
            r_primal_x: vals[4], r_dual_x: vals[5], r_primal_d: vals[6], r_dual_d: vals[7],
        };
        let tr = ConvergenceTrace { rows: vec![row] };
        prop_assert_eq!(parse_trace(&format_trace(&tr), Path::new("t")).unwrap(), tr);
    }
}

fn row(i: usize) -> TraceRow {
    TraceRow { iter: i, time_s: 0.0, objective: 1.0, fidelity: 0.5, l1: 5.0, r_primal_x: 0.0, r_dual_x: 0.0, r_primal_d: 0.0, r_dual_d: 0.0 }
}

#[test]
fn trace_files_have_one_line_per_row() {
    assert_eq!(format_trace(&ConvergenceTrace::default()), format!("{TRACE_HEADER}\n"));
    let t = ConvergenceTrace { rows: (1..=3).map(row).collect() };
    assert_eq!(format_trace(&t).lines().count(), 4);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    emit_trace(&t, &p).unwrap();
    assert_eq!(load_trace(&p).unwrap(), t);
}

#[test]
fn malformed_tensors_are_format_errors() {
    let t = Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let bytes = encode_tensor(&t);
    let p = Path::new("x");
    assert!(matches!(decode_tensor(&bytes[..bytes.len() - 3], p), Err(Error::Format { .. })));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode_tensor(&bad, p), Err(Error::Format { .. })));
    let mut bad = bytes;
    bad[4] = 9;
    assert!(matches!(decode_tensor(&bad, p), Err(Error::Format { .. })));
}

#[test]
fn dictionary_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let shape = Shape2::new(12, 10);
    for mode in [NormMode::UnitEquality, NormMode::UnitBall] {
        let d = Dictionary::random(shape, Shape2::new(4, 3), 5, 2, mode, 1).unwrap();
        let p = dir.path().join("d.cdlt");
        save_dictionary(&p, &d).unwrap();
        assert_eq!(load_dictionary(&p, shape).unwrap(), d);
        let (t, meta) = read_dictionary_file(&p).unwrap();
        assert_eq!(t.dims, [2, 5, 4, 3]);
        assert_eq!(meta.filter_shape, [4, 3]);
        assert_eq!(meta.norm_mode, mode.as_str());
    }
}

#[test]
fn mask_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let m = make_random_mask(Shape2::new(6, 5), 0.25, 3).unwrap();
    let p = dir.path().join("m.cdlt");
    save_tensor(&p, &mask_to_tensor(&m)).unwrap();
    assert_eq!(load_mask(&p).unwrap(), m);
}

#[test]
fn images_are_scaled_to_unit_range() {
    let dir = tempfile::tempdir().unwrap();
    GrayImage::from_pixel(4, 3, Luma([0])).save(dir.path().join("a.pgm")).unwrap();
    GrayImage::from_pixel(4, 3, Luma([255])).save(dir.path().join("b.png")).unwrap();
    let s = load_signals(dir.path(), true).unwrap();
    assert_eq!((s.images(), s.shape()), (2, Shape2::new(3, 4)));
    assert!(s.image(0, 0).iter().all(|&v| v == 0.0));
    assert!(s.image(0, 1).iter().all(|&v| v == 1.0));
}

#[test]
fn colour_images_use_bt601_luma() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.png");
    RgbImage::from_pixel(2, 2, Rgb([255, 0, 0])).save(&p).unwrap();
    let grey = load_images(std::slice::from_ref(&p), true).unwrap();
    assert!((grey.image(0, 0)[0] - 0.299).abs() < 1e-12);
    let colour = load_images(&[p], false).unwrap();
    assert_eq!(colour.channels(), 3);
    assert_eq!(colour.image(0, 0)[0], 1.0);
    assert_eq!(colour.image(1, 0)[0], 0.0);
}

#[test]
fn mixed_sizes_are_dimension_errors() {
    let dir = tempfile::tempdir().unwrap();
    GrayImage::new(4, 4).save(dir.path().join("a.pgm")).unwrap();
    GrayImage::new(5, 4).save(dir.path().join("b.pgm")).unwrap();
    assert!(matches!(load_signals(dir.path(), true), Err(Error::Core(CdlError::Dimension(_)))));
}

#[test]
fn signal_tensors_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let s = cdl::synth::noise_signals(Shape2::new(3, 4), 2, 3, 1);
    let p = dir.path().join("s.cdlt");
    save_tensor(&p, &signals_to_tensor(&s)).unwrap();
    assert_eq!(load_signals(&p, true).unwrap(), s);
}
