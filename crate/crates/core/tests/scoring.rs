mod support;

use proptest::prelude::*;
use quscore::scoring::{compute_entity_curve, curve_auc, entity_score, evaluate_case};
use quscore::synth::{gen_uncertainty, make_phantom, GeneratorKind, PhantomParams};
use quscore::{
    extract_entity_masks, Entity, EntityMask, GridShape, ScoreVariant, SegmentationVolume,
    ThresholdGrid, UncertaintyMap,
};
use support::{naive_auc, naive_curve, naive_score};

const SHAPE: [usize; 3] = [6, 5, 4];

fn voxels() -> impl Strategy<Value = (Vec<bool>, Vec<bool>, Vec<f32>)> {
    let n = SHAPE.iter().product::<usize>();
    let unc = prop_oneof![
        0.0f32..=100.0,
        (0u8..=20).prop_map(|k| k as f32 * 5.0),
        Just(0.0f32),
        Just(100.0f32),
    ];
    (
        prop::collection::vec(any::<bool>(), n),
        prop::collection::vec(any::<bool>(), n),
        prop::collection::vec(unc, n),
    )
}

fn grid() -> impl Strategy<Value = ThresholdGrid> {
    prop_oneof![
        Just(ThresholdGrid::default()),
        Just("25,50,75,100".parse().unwrap()),
        prop::collection::btree_set(1u8..100, 1..8).prop_map(|s| {
            let mut taus: Vec<f64> = s.into_iter().map(f64::from).collect();
            taus.push(100.0);
            ThresholdGrid::new(taus).unwrap()
        }),
    ]
}

fn curve_for(
    gt: &[bool],
    pred: &[bool],
    unc: &[f32],
    grid: &ThresholdGrid,
) -> quscore::EntityCurve {
    let shape = GridShape::new(SHAPE).unwrap();
    let gt = EntityMask::new(shape, Entity::WholeTumor, gt.to_vec()).unwrap();
    let pred = EntityMask::new(shape, Entity::WholeTumor, pred.to_vec()).unwrap();
    let map = UncertaintyMap::new(shape, Entity::WholeTumor, unc.to_vec()).unwrap();
    compute_entity_curve(&gt, &pred, &map, grid, true).unwrap()
}

proptest! {
    #[test]
    fn curve_matches_naive_recount((gt, pred, unc) in voxels(), grid in grid()) {
        let curve = curve_for(&gt, &pred, &unc, &grid);
        let slow = naive_curve(&gt, &pred, &unc, grid.taus());
        for (f, s) in curve.counts.iter().zip(&slow.counts) {
            prop_assert_eq!((f.tp, f.tn, f.fp, f.fn_, f.filtered), (s.tp, s.tn, s.fp, s.fn_, s.filtered));
        }
        prop_assert_eq!(&curve.dsc, &slow.dsc);
        prop_assert_eq!(&curve.ftp, &slow.ftp);
        prop_assert_eq!(&curve.ftn, &slow.ftn);
        let score = entity_score(&curve, ScoreVariant::Full);
        let want = naive_score(
            naive_auc(grid.taus(), &slow.dsc),
            naive_auc(grid.taus(), &slow.ftp),
            naive_auc(grid.taus(), &slow.ftn),
        );
        prop_assert!((score.score - want).abs() <= 1e-12);
    }

    #[test]
    fn counts_partition_voxels_and_filtering_is_monotone((gt, pred, unc) in voxels(), grid in grid()) {
        let curve = curve_for(&gt, &pred, &unc, &grid);
        let total = gt.len() as u64;
        for c in &curve.counts {
            prop_assert_eq!(c.tp + c.tn + c.fp + c.fn_ + c.filtered, total);
        }
        for w in curve.counts.windows(2) {
            prop_assert!(w[0].filtered >= w[1].filtered);
            prop_assert!(w[0].tp <= w[1].tp && w[0].tn <= w[1].tn);
        }
        let last = curve.counts.last().unwrap();
        prop_assert_eq!(last.filtered, 0);
        prop_assert_eq!(*curve.ftp.last().unwrap(), 0.0);
        prop_assert_eq!(*curve.ftn.last().unwrap(), 0.0);
        for v in curve.dsc.iter().chain(&curve.ftp).chain(&curve.ftn) {
            prop_assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn scores_stay_in_unit_interval((gt, pred, unc) in voxels(), grid in grid()) {
        let curve = curve_for(&gt, &pred, &unc, &grid);
        for v in ScoreVariant::ALL {
            let s = entity_score(&curve, v);
            prop_assert!((0.0..=1.0).contains(&s.score), "{v:?}: {}", s.score);
        }
    }

    #[test]
    fn zero_uncertainty_scores_like_plain_dice((gt, pred, _) in voxels(), grid in grid()) {
        let unc = vec![0.0; gt.len()];
        let curve = curve_for(&gt, &pred, &unc, &grid);
        let s = entity_score(&curve, ScoreVariant::Full);
        let d = curve.dsc[0];
        prop_assert!(curve.dsc.iter().all(|&x| x == d));
        prop_assert!((s.auc_dsc - d).abs() < 1e-12);
        prop_assert_eq!(s.auc_ftp, 0.0);
        prop_assert_eq!(s.auc_ftn, 0.0);
    }

    #[test]
    fn auc_of_constant_is_constant(c in 0.0f64..=1.0, grid in grid()) {
        let ys = vec![c; grid.len()];
        if grid.len() > 1 {
            prop_assert!((curve_auc(grid.taus(), &ys).unwrap() - c).abs() < 1e-12);
        }
    }
}

#[test]
fn phantom_cases_agree_with_naive_scoring() {
    let grid = ThresholdGrid::default();
    for seed in 0..10 {
        let mut p = PhantomParams::new(GridShape::cube(20).unwrap(), seed);
        p.tumor_fraction = 0.05;
        p.error_rate = 0.3;
        let ph = make_phantom(&p).unwrap();
        let maps =
            Entity::ALL.map(|e| gen_uncertainty(&ph, e, GeneratorKind::PiecewiseSigmoid).unwrap());
        let result =
            evaluate_case("c", &ph.gt, &ph.pred, &maps, &grid, ScoreVariant::Full).unwrap();
        let gt = extract_entity_masks(&ph.gt);
        let pred = extract_entity_masks(&ph.pred);
        let mut total = 0.0;
        for (i, e) in Entity::ALL.into_iter().enumerate() {
            let slow = naive_curve(
                gt.get(e).as_slice(),
                pred.get(e).as_slice(),
                maps[i].values(),
                grid.taus(),
            );
            let want = naive_score(
                naive_auc(grid.taus(), &slow.dsc),
                naive_auc(grid.taus(), &slow.ftp),
                naive_auc(grid.taus(), &slow.ftn),
            );
            assert!((result.entity(e).score - want).abs() < 1e-12);
            total += want;
        }
        assert!((result.overall - total / 3.0).abs() < 1e-12);
    }
}

#[test]
fn mismatched_shapes_are_rejected() {
    let a = SegmentationVolume::zeros(GridShape::cube(4).unwrap());
    let b = SegmentationVolume::zeros(GridShape::new([4, 4, 5]).unwrap());
    let maps =
        Entity::ALL.map(|e| UncertaintyMap::constant(GridShape::cube(4).unwrap(), e, 0.0).unwrap());
    let grid = ThresholdGrid::default();
    assert!(evaluate_case("c", &a, &b, &maps, &grid, ScoreVariant::Full).is_err());
}
