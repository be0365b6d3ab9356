//! Property suites: format round-trips, coefficient identities, spectral
//! bounds and permutation equivariance of the outlier test.

mod common;

use proptest::prelude::*;

use overlaprel::formats::{load_mask, save_mask, MaskFormat, MaskWriteFormat};
use overlaprel::grid::{GridDims, StudySet, VoxelMask};
use overlaprel::outlier::jackknife_test_matrix;
use overlaprel::overlap::{
    dice, dice_to_jaccard, jaccard, overlap_matrix, pair_counts, EmptyPolicy, OverlapKind,
    OverlapMatrix,
};
use overlaprel::spectral::{eigen_sym, summarize};
use overlaprel::synth::{oracle_jaccard, Xoshiro256};
use overlaprel::tdist::t_sf;

fn arb_dims() -> impl Strategy<Value = GridDims> {
    (1u32..=8, 1u32..=8, 1u32..=4).prop_map(|(nx, ny, nz)| GridDims::new(nx, ny, nz).unwrap())
}

fn arb_mask(label: &'static str) -> impl Strategy<Value = VoxelMask> {
    (arb_dims(), any::<u64>(), 0.0..=1.0f64).prop_map(move |(dims, seed, fill)| {
        let mut rng = Xoshiro256::seeded(seed);
        let mut mask = VoxelMask::empty(dims, label);
        for i in 0..dims.len() {
            if rng.bernoulli(fill) {
                mask.set_linear(i, true);
            }
        }
        mask
    })
}

fn pair_same_dims() -> impl Strategy<Value = (VoxelMask, VoxelMask)> {
    (arb_dims(), any::<u64>(), 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(dims, seed, fa, fb)| {
        let mut rng = Xoshiro256::seeded(seed);
        let mut a = VoxelMask::empty(dims, "a");
        let mut b = VoxelMask::empty(dims, "b");
        for i in 0..dims.len() {
            if rng.bernoulli(fa) {
                a.set_linear(i, true);
            }
            if rng.bernoulli(fb) {
                b.set_linear(i, true);
            }
        }
        (a, b)
    })
}

proptest! {
    #[test]
    fn msk1_round_trip(mask in arb_mask("m")) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.msk");
        save_mask(&mask, &p, MaskWriteFormat::Msk1).unwrap();
        let back = load_mask(&p, MaskFormat::Msk1).unwrap();
        prop_assert_eq!(back.dims(), mask.dims());
        prop_assert_eq!(back.words(), mask.words());
    }

    #[test]
    fn coords_round_trip(mask in arb_mask("m")) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.coords");
        save_mask(&mask, &p, MaskWriteFormat::Coords).unwrap();
        let back = load_mask(&p, MaskFormat::Coords).unwrap();
        prop_assert_eq!(back.dims(), mask.dims());
        prop_assert_eq!(back.words(), mask.words());
    }

    #[test]
    fn jaccard_dice_relation((a, b) in pair_same_dims()) {
        let c = pair_counts(&a, &b).unwrap();
        let d = dice(&c, EmptyPolicy::Zero).unwrap();
        let j = jaccard(&c, EmptyPolicy::Zero).unwrap();
        prop_assert!((j - dice_to_jaccard(d).unwrap()).abs() <= 1e-12);
        prop_assert!(j <= d + 1e-15);
        if (j - d).abs() < 1e-15 {
            prop_assert!(j < 1e-15 || (j - 1.0).abs() < 1e-15);
        }
        // symmetry
        let cr = pair_counts(&b, &a).unwrap();
        prop_assert_eq!(jaccard(&cr, EmptyPolicy::Zero).unwrap(), j);
    }

    #[test]
    fn bitpacked_matches_set_oracle((a, b) in pair_same_dims()) {
        let c = pair_counts(&a, &b).unwrap();
        let fast = jaccard(&c, EmptyPolicy::Zero).unwrap();
        let slow = oracle_jaccard(&a, &b, EmptyPolicy::Zero).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn spectral_bounds_hold(seed in any::<u64>(), m in 2usize..=10) {
        let mut rng = Xoshiro256::seeded(seed);
        let entries = common::random_overlap_entries(&mut rng, m);
        let labels = (0..m).map(|i| format!("s{i}")).collect();
        let matrix = OverlapMatrix::from_entries(OverlapKind::Jaccard, entries, labels).unwrap();
        let spectrum = eigen_sym(&matrix).unwrap();
        prop_assert!((spectrum.trace() - m as f64).abs() <= 1e-9 * m as f64);
        prop_assert!(spectrum.largest() >= 1.0 - 1e-9);
        prop_assert!(spectrum.largest() <= m as f64 + 1e-9);
        let summary = summarize(&matrix).unwrap();
        prop_assert!(summary.value >= -1e-9 && summary.value <= 1.0 + 1e-9);
    }

    #[test]
    fn t_sf_symmetry(x in -8.0..8.0f64, df in 1u32..40) {
        let s = t_sf(x, df).unwrap() + t_sf(-x, df).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }
}

#[test]
fn overlap_matrix_matches_oracle_on_randomized_masks() {
    // spec-level property: >= 200 randomized cases on small grids
    let mut rng = Xoshiro256::seeded(7);
    for case in 0..200 {
        let dims = GridDims::new(
            1 + (rng.next_u64() % 8) as u32,
            1 + (rng.next_u64() % 8) as u32,
            1 + (rng.next_u64() % 4) as u32,
        )
        .unwrap();
        let m = 2 + (case % 3);
        let masks: Vec<VoxelMask> = (0..m)
            .map(|j| common::random_mask(&mut rng, dims, 0.4, &format!("s{j}")))
            .collect();
        let set = StudySet::new(masks).unwrap();
        let matrix = overlap_matrix(&set, OverlapKind::Jaccard, EmptyPolicy::Zero).unwrap();
        for j in 0..m {
            for l in 0..m {
                let expected = if j == l {
                    1.0
                } else {
                    oracle_jaccard(&set.masks()[j], &set.masks()[l], EmptyPolicy::Zero).unwrap()
                };
                assert_eq!(matrix.get(j, l), expected, "case {case} entry ({j},{l})");
            }
        }
    }
}

#[test]
fn jackknife_permutation_equivariance() {
    // permuting study order permutes records identically and leaves the
    // flagged label set unchanged
    let m = 6;
    let mut rng = Xoshiro256::seeded(99);
    let dims = GridDims::new(12, 12, 3).unwrap();
    let mut masks: Vec<VoxelMask> = Vec::new();
    let core = common::random_mask(&mut rng, dims, 0.2, "core");
    for j in 0..m {
        let mut mask = common::random_mask(&mut rng, dims, 0.05, &format!("s{j}"));
        for i in core.active_indices() {
            if rng.bernoulli(0.8) {
                mask.set_linear(i, true);
            }
        }
        masks.push(mask);
    }
    // make study 4 an outlier: clear its core overlap
    for i in core.active_indices() {
        masks[4].set_linear(i, false);
    }

    let run = |order: &[usize]| {
        let permuted: Vec<VoxelMask> = order.iter().map(|&i| masks[i].clone()).collect();
        let set = StudySet::new(permuted).unwrap();
        let matrix = overlap_matrix(&set, OverlapKind::Jaccard, EmptyPolicy::Zero).unwrap();
        jackknife_test_matrix(&matrix, &[0.05, 0.01]).unwrap()
    };
    let identity = run(&[0, 1, 2, 3, 4, 5]);
    let shuffled = run(&[5, 3, 0, 4, 1, 2]);

    for rec in &identity.records {
        let other = shuffled
            .records
            .iter()
            .find(|r| r.label == rec.label)
            .expect("label present in both runs");
        assert!((rec.tau - other.tau).abs() < 1e-9);
        assert!((rec.p_value - other.p_value).abs() < 1e-9);
    }
    for (d1, d2) in identity.decisions.iter().zip(&shuffled.decisions) {
        let mut l1: Vec<&str> = d1.flagged.iter().map(|f| f.label.as_str()).collect();
        let mut l2: Vec<&str> = d2.flagged.iter().map(|f| f.label.as_str()).collect();
        l1.sort_unstable();
        l2.sort_unstable();
        assert_eq!(l1, l2);
    }
}

#[test]
fn flagged_sets_nest_across_q_levels() {
    let mut rng = Xoshiro256::seeded(123);
    for _ in 0..20 {
        let m = 8;
        let entries = common::random_overlap_entries(&mut rng, m);
        let labels = (0..m).map(|i| format!("s{i}")).collect();
        let matrix = OverlapMatrix::from_entries(OverlapKind::Jaccard, entries, labels).unwrap();
        if let Ok(report) = jackknife_test_matrix(&matrix, &[0.05, 0.01]) {
            let loose: Vec<usize> = report.decisions[0]
                .flagged
                .iter()
                .map(|f| f.study_index)
                .collect();
            for f in &report.decisions[1].flagged {
                assert!(loose.contains(&f.study_index));
            }
        }
    }
}
