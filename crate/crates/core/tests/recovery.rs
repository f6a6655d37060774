use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torelli_core::ivhs::{self, canonical_point, CVector, EmbeddedPoint, IvhsPresentation, SynthConfig};
use torelli_core::numlin::CMatrix;
use torelli_core::ramlocus::ramification_divisor;
use torelli_core::surface::make_random_general;
use torelli_core::torelli::*;
use torelli_core::{Error, Stage};

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn true_points(h: i64, seed: u64) -> Vec<CVector> {
    let s = make_random_general(h, seed).unwrap();
    ramification_divisor(&s)
        .unwrap()
        .divisor
        .points
        .iter()
        .map(|(p, _)| canonical_point(p, h as usize).x)
        .collect()
}

#[test]
fn quadric_count_on_true_z() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for h in 3..=6 {
        let pts = true_points(h as i64, 11);
        assert_eq!(pts.len(), 10 * h + 8);
        let qs = quadrics_through(&pts, h, 1e-8);
        assert_eq!(qs.len(), (h - 1) * (h - 2) / 2, "h = {h}");
        let samples = sample_canonical_curve(h, 100, &mut rng);
        for q in &qs {
            assert!(samples.iter().all(|x| quadric_residual(q, x) <= 1e-9));
        }
    }
}

#[test]
fn roundtrip_at_largest_supported_genus() {
    let r = roundtrip(&make_random_general(6, 2).unwrap(), 9, &RecoveryConfig::default()).unwrap();
    assert!(r.is_ok());
    assert!(r.max_chordal.unwrap() < 1e-6);
    assert_eq!(r.quadric_dim, Some(10));
    assert_eq!(r.recovered_dl, Some(7));
    assert!(r.residual_max.unwrap() <= 1e-9);
    for stage in ["surface", "synthesize", "extract", "recover", "match"] {
        assert!(r.stage_timings_ms.contains_key(stage));
    }
}

#[test]
fn generic_subspaces_for_h3_have_no_rank_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..5 {
        let basis = (0..3).map(|_| random_matrix(&mut rng, 3, 3)).collect();
        let w = IvhsPresentation::new(3, 3, basis, None).unwrap();
        assert!(rank_one_oracle_bruteforce(&w).unwrap().is_empty());
        assert!(matches!(
            extract_rank_ones(&w, seed, &RecoveryConfig::default()),
            Err(Error::DegeneratePresentation(_))
        ));
    }
}

#[test]
fn non_general_surface_fails_at_surface_stage() {
    let s = torelli_core::surface::make_with_i2(3, &[torelli_core::series::rat(1)], 2).unwrap();
    let err = roundtrip(&s, 1, &RecoveryConfig::default()).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Surface));
}

#[test]
fn recovery_from_json_presentation() {
    let s = make_random_general(4, 5).unwrap();
    let (w, truth) = ivhs::synthesize(&s, 8, &SynthConfig::default()).unwrap();
    let text = serde_json::to_string(&w.to_json()).unwrap();
    let back = IvhsPresentation::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    let f = extract_rank_ones(&back, 2, &RecoveryConfig::default()).unwrap();
    let g = recover_geometry(&f, 4, &RecoveryConfig::default()).unwrap();
    assert_eq!(g.quadric_dim, 3);
    let xs: Vec<CVector> = truth.points.iter().map(|p| p.x.clone()).collect();
    assert!(match_points(&g.z_points, &xs).unwrap().max_chordal < 1e-6);
    let j = serde_json::to_value(g.to_json()).unwrap();
    assert_eq!(j["z_points"].as_array().unwrap().len(), 48);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn recovery_is_invariant_under_synthesis_randomness(
        synth_seed in any::<u64>(),
        extract_seed in any::<u64>(),
        lambda_min in 0.1f64..1.0,
        cond in 1.0f64..100.0,
    ) {
        let s = make_random_general(3, 4).unwrap();
        let cfg = SynthConfig { lambda_min, lambda_max: 10.0, mixer_cond: cond, with_gram: false };
        let (w, truth) = ivhs::synthesize(&s, synth_seed, &cfg).unwrap();
        let f = extract_rank_ones(&w, extract_seed, &RecoveryConfig::default()).unwrap();
        let xs: Vec<CVector> = truth.points.iter().map(|p| p.x.clone()).collect();
        let rec: Vec<CVector> = f.iter().map(|f| f.x.clone()).collect();
        prop_assert!(match_points(&rec, &xs).unwrap().max_chordal < 1e-6);
    }

    #[test]
    fn oracle_agrees_with_extractor_on_tiny_instances(seed in any::<u64>(), h in 2usize..=3, n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<EmbeddedPoint> = (0..n)
            .map(|_| {
                let x = CVector::from_fn(h, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                EmbeddedPoint {
                    base_point: torelli_core::binform::ProjectivePointP1::new(x[0], x[1]).unwrap(),
                    x: ivhs::normalize_projective(&x).unwrap(),
                }
            })
            .collect();
        let (w, _) = ivhs::synthesize_from_points(points, seed, &SynthConfig::default()).unwrap();
        let a = extract_rank_ones(&w, seed, &RecoveryConfig::default()).unwrap();
        let b = rank_one_oracle_bruteforce(&w).unwrap();
        prop_assert!(same_factor_set(&a, &b, 1e-8));
    }
}
