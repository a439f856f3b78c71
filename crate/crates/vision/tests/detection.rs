use archiguesser_vision::detect::{detect_markers, detect_markers_with, DetectorParams};
use archiguesser_vision::dictionary::{rotate, MarkerDictionary};
use archiguesser_vision::raster::{decode_gray, encode_pgm, encode_png};
use archiguesser_vision::synth::{
    add_gaussian_noise, expected_corners, random_marker_camera, render_board, render_marker,
    PlacedMarker, SHEET,
};
use archiguesser_vision::Homography;
use image::{GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corner_rms(a: &[[f64; 2]; 4], b: &[[f64; 2]; 4]) -> f64 {
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(p, q)| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2))
        .sum();
    (s / 4.0).sqrt()
}

fn unit(id: u32, rotation: u32) -> PlacedMarker {
    PlacedMarker { id, center: [0.0, 0.0], size: 1.0, rotation }
}

#[test]
fn every_id_and_rotation_under_noise() {
    let dict = MarkerDictionary::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut hits = 0;
    let mut rms_sum = 0.0;
    for id in 0..64u32 {
        for rotation in 0..4u32 {
            let marker = unit(id, rotation);
            let cam = random_marker_camera(&mut rng, 640, 480, 50.0, 160.0, 30.0, 0.08);
            let mut img = render_board(&dict, &[marker], &cam, 640, 480).unwrap();
            add_gaussian_noise(&mut img, 8.0, &mut rng);
            let dets = detect_markers(&img, &dict).unwrap();
            assert!(dets.len() <= 1, "spurious detections: {dets:?}");
            if let Some(d) = dets.iter().find(|d| d.marker_id == id && d.rotation == rotation) {
                hits += 1;
                rms_sum += corner_rms(&d.corners, &expected_corners(&marker, &cam)).powi(2);
            }
        }
    }
    assert!(hits >= 254, "{hits}/256 recovered");
    let rms = (rms_sum / hits as f64).sqrt();
    assert!(rms < 1.5, "corner rms {rms}");
}

#[test]
fn clean_corners_are_subpixel() {
    let dict = MarkerDictionary::builtin();
    let cam = Homography([[80.0, 0.0, 200.3], [0.0, 80.0, 150.7], [0.0, 0.0, 1.0]]);
    let marker = unit(12, 1);
    let img = render_board(&dict, &[marker], &cam, 400, 300).unwrap();
    let dets = detect_markers(&img, &dict).unwrap();
    assert_eq!(dets.len(), 1);
    assert_eq!((dets[0].marker_id, dets[0].rotation, dets[0].decode_errors), (12, 1, 0));
    let err = corner_rms(&dets[0].corners, &expected_corners(&marker, &cam));
    assert!(err < 0.5, "corner rms {err}");
}

/// Dictionary whose only entry differs from builtin code `id` in `flips` bits.
fn damaged(dict: &MarkerDictionary, id: u32, flips: &[u32]) -> MarkerDictionary {
    let mut code = dict.code(id).unwrap();
    for f in flips {
        code ^= 1 << f;
    }
    MarkerDictionary { grid: 5, min_distance: 1, seed: 0, codes: vec![code] }
}

#[test]
fn three_bit_errors_corrected_four_rejected() {
    let dict = MarkerDictionary::builtin();
    let cam = Homography([[90.0, 0.0, 160.0], [0.0, 90.0, 120.0], [0.0, 0.0, 1.0]]);
    let id = 20;
    let three = damaged(&dict, id, &[0, 12, 24]);
    let img = render_board(&three, &[unit(0, 2)], &cam, 320, 240).unwrap();
    let dets = detect_markers(&img, &dict).unwrap();
    assert_eq!(dets.len(), 1);
    assert_eq!((dets[0].marker_id, dets[0].rotation, dets[0].decode_errors), (id, 2, 3));

    // Four flips leave the code more than the correction capacity from every entry.
    let four_bits = [0, 6, 12, 24];
    let mut observed = dict.code(id).unwrap();
    for f in four_bits {
        observed ^= 1 << f;
    }
    assert_eq!(dict.identify(observed), None, "choose flips far from all codes");
    let four = damaged(&dict, id, &four_bits);
    let img = render_board(&four, &[unit(0, 2)], &cam, 320, 240).unwrap();
    assert!(detect_markers(&img, &dict).unwrap().is_empty());
}

#[test]
fn noise_images_have_no_markers() {
    let dict = MarkerDictionary::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let base = rng.gen_range(40..220u8);
        let mut img = GrayImage::from_pixel(320, 240, Luma([base]));
        add_gaussian_noise(&mut img, 30.0, &mut rng);
        assert!(detect_markers(&img, &dict).unwrap().is_empty());
    }
}

#[test]
fn printable_marker_is_detected_upright() {
    let dict = MarkerDictionary::builtin();
    let marker = render_marker(&dict, 33, 180).unwrap();
    let mut page = GrayImage::from_pixel(320, 320, Luma([SHEET]));
    image::imageops::overlay(&mut page, &marker, 70, 70);
    let dets = detect_markers(&page, &dict).unwrap();
    assert_eq!(dets.len(), 1);
    assert_eq!((dets[0].marker_id, dets[0].rotation), (33, 0));
}

#[test]
fn detection_survives_png_and_pgm() {
    let dict = MarkerDictionary::builtin();
    let cam = Homography([[70.0, 10.0, 150.0], [-8.0, 72.0, 120.0], [0.0002, 0.0001, 1.0]]);
    let img = render_board(&dict, &[unit(40, 3)], &cam, 320, 240).unwrap();
    for bytes in [encode_png(&img), encode_pgm(&img)] {
        let decoded = decode_gray(&bytes).unwrap();
        let dets = detect_markers(&decoded, &dict).unwrap();
        assert_eq!(dets.iter().map(|d| (d.marker_id, d.rotation)).collect::<Vec<_>>(), vec![(40, 3)]);
    }
}

#[test]
fn unrefined_corners_still_decode() {
    let dict = MarkerDictionary::builtin();
    let cam = Homography([[60.0, 0.0, 100.0], [0.0, 60.0, 100.0], [0.0, 0.0, 1.0]]);
    let img = render_board(&dict, &[unit(5, 0)], &cam, 200, 200).unwrap();
    let params = DetectorParams { refine_corners: false, ..DetectorParams::default() };
    let dets = detect_markers_with(&img, &dict, &params).unwrap();
    assert_eq!(dets[0].marker_id, 5);
}

#[test]
fn rotated_code_matches_rendered_payload() {
    // Rendering a marker turned once equals rendering the rotated code upright.
    let dict = MarkerDictionary::builtin();
    let cam = Homography([[70.0, 0.0, 100.0], [0.0, 70.0, 100.0], [0.0, 0.0, 1.0]]);
    let turned = render_board(&dict, &[unit(9, 1)], &cam, 200, 200).unwrap();
    let manual = MarkerDictionary {
        grid: 5,
        min_distance: 1,
        seed: 0,
        codes: vec![rotate(dict.code(9).unwrap(), 5, 1)],
    };
    let upright = render_board(&manual, &[unit(0, 0)], &cam, 200, 200).unwrap();
    assert_eq!(turned, upright);
}
