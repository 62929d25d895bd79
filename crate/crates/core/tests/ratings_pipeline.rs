use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sseval_core::protocol::{ManifestEntry, Split};
use sseval_core::ratings::{
    aggregate, cronbach_alpha, final_rating, rater_item_matrix, read_ratings, replace_self_ratings, write_ratings,
    ScoreKind,
};
use sseval_core::{BackgroundCategory, DatasetManifest, ForegroundCategory, PromptSpec, RatingRecord};

fn rec(rater: &str, aff: &str, sys: &str, prompt: &str, fg: f64, bg: Option<f64>, q: f64) -> RatingRecord {
    RatingRecord {
        rater_id: rater.into(),
        rater_affiliation: aff.into(),
        system_id: sys.into(),
        prompt_id: prompt.into(),
        foreground_fit: fg,
        background_fit: bg,
        quality: q,
    }
}

fn manifest() -> DatasetManifest {
    let e = |id: &str, fg, bg, bg_text: &str| ManifestEntry {
        prompt: PromptSpec {
            prompt_id: id.into(),
            foreground_text: "a dog barks".into(),
            foreground_category: fg,
            background_category: bg,
            background_text: bg_text.into(),
        },
        audio_path: format!("{id}.wav"),
        split: Split::Eval,
    };
    DatasetManifest::new(vec![
        e("p1", ForegroundCategory::Animal, BackgroundCategory::Crowd, "people talking"),
        e("p2", ForegroundCategory::Vehicle, BackgroundCategory::None, ""),
    ])
}

#[test]
fn published_baseline_means_give_published_final_rating() {
    assert!((final_rating(3.3, 2.8, 3.8).unwrap() - 3.3).abs() < 1e-12);
}

#[test]
fn self_rating_fixture() {
    let records = vec![
        rec("T1", "sysA", "sysA", "p1", 9.0, Some(9.0), 9.0),
        rec("T1", "sysA", "sysB", "p1", 4.0, Some(4.0), 4.0),
        rec("T1", "sysA", "sysC", "p1", 6.0, Some(6.0), 6.0),
        rec("O1", "organizer", "sysA", "p1", 9.0, Some(9.0), 9.0),
    ];
    let out = replace_self_ratings(&records).unwrap();
    assert_eq!(out[0].foreground_fit, 5.0);
    assert_eq!(out[0].background_fit, Some(5.0));
    assert_eq!(out[0].quality, 5.0);
    assert_eq!(&out[1..], &records[1..]);
}

#[test]
fn hand_computed_alpha() {
    let m: Vec<Vec<f64>> = vec![vec![2.0, 4.0, 6.0, 8.0], vec![1.0, 4.0, 5.0, 8.0], vec![3.0, 5.0, 6.0, 9.0]];
    // per-rater sums of squares 20, 25, 18.75; column totals 6, 13, 17, 25 give 188.75
    let oracle: f64 = 1.5 * (1.0 - (20.0 + 25.0 + 18.75) / 188.75);
    assert!((cronbach_alpha(&m).unwrap() - oracle).abs() < 1e-12);
    assert!((oracle - 0.993_377_483_443_708_7).abs() < 1e-15);
}

#[test]
fn alpha_of_independent_noise_is_near_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let m: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..1000).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect();
    let a = cronbach_alpha(&m).unwrap();
    assert!(a.abs() < 0.15, "{a}");
}

#[test]
fn alpha_of_duplicated_raters_is_one() {
    let row: Vec<f64> = (0..20).map(|i| (i * 7 % 11) as f64).collect();
    let a = cronbach_alpha(&[row.clone(), row.clone(), row]).unwrap();
    assert!((a - 1.0).abs() < 1e-12);
}

#[test]
fn aggregate_excludes_background_on_none_prompts() {
    let records = vec![
        rec("r1", "organizer", "s", "p1", 6.0, Some(6.0), 6.0),
        rec("r2", "organizer", "s", "p1", 8.0, Some(8.0), 8.0),
        rec("r1", "organizer", "s", "p2", 7.0, None, 7.0),
    ];
    let scores = aggregate(&records, &manifest()).unwrap();
    let s = &scores[0];
    assert!((s.mean_fg() - 7.0).abs() < 1e-12);
    assert_eq!(s.background.unwrap().n, 2);
    let p1 = &s.per_background[&BackgroundCategory::Crowd];
    assert!((p1.foreground.std_err - 1.0).abs() < 1e-12);
    assert!(s.per_background[&BackgroundCategory::None].background.is_none());
}

#[test]
fn csv_roundtrip_then_aggregate() {
    let records = vec![
        rec("r1", "organizer", "s", "p1", 6.0, Some(5.5), 6.0),
        rec("r1", "organizer", "s", "p2", 7.0, None, 7.0),
    ];
    let mut buf = Vec::new();
    write_ratings(&records, &mut buf).unwrap();
    let back = read_ratings(buf.as_slice()).unwrap();
    assert_eq!(back, records);
    assert!(aggregate(&back, &manifest()).is_ok());
}

#[test]
fn alpha_over_rater_item_matrix() {
    let records: Vec<RatingRecord> = ["r1", "r2"]
        .iter()
        .flat_map(|r| {
            ["s1", "s2", "s3"]
                .iter()
                .enumerate()
                .map(move |(i, s)| rec(r, "organizer", s, "p1", 2.0 * i as f64, Some(1.0), 3.0 * i as f64))
        })
        .collect();
    let m = rater_item_matrix(&records, ScoreKind::Quality);
    assert_eq!(m.items.len(), 3);
    assert!((cronbach_alpha(&m.scores).unwrap() - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn final_rating_is_monotone_and_idempotent(
        x in 0.0f64..=10.0,
        a in 0.0f64..=10.0,
        b in 0.0f64..=10.0,
        c in 0.0f64..=10.0,
        bump in 0.0f64..=1.0,
    ) {
        prop_assert!((final_rating(x, x, x).unwrap() - x).abs() < 1e-12);
        let base = final_rating(a, b, c).unwrap();
        prop_assert!(final_rating((a + bump).min(10.0), b, c).unwrap() >= base);
        prop_assert!(final_rating(a, (b + bump).min(10.0), c).unwrap() >= base);
        prop_assert!(final_rating(a, b, (c + bump).min(10.0)).unwrap() >= base);
    }

    #[test]
    fn aggregate_ignores_record_order(
        scores in prop::collection::vec((0.0f64..=10.0, 0.0f64..=10.0, 0.0f64..=10.0), 2..12),
        seed in any::<u64>(),
    ) {
        let records: Vec<RatingRecord> = scores
            .iter()
            .enumerate()
            .map(|(i, &(f, b, q))| rec(&format!("r{i}"), "organizer", if i % 2 == 0 { "s1" } else { "s2" }, "p1", f, Some(b), q))
            .collect();
        let mut shuffled = records.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(aggregate(&records, &manifest()).unwrap(), aggregate(&shuffled, &manifest()).unwrap());
    }

    #[test]
    fn replacement_touches_only_self_ratings(
        vals in prop::collection::vec(0.0f64..=10.0, 3),
    ) {
        let records = vec![
            rec("T", "a", "a", "p1", vals[0], None, vals[0]),
            rec("T", "a", "b", "p1", vals[1], None, vals[1]),
            rec("T", "a", "c", "p1", vals[2], None, vals[2]),
        ];
        let out = replace_self_ratings(&records).unwrap();
        prop_assert_eq!(&out[1..], &records[1..]);
        prop_assert!((out[0].quality - (vals[1] + vals[2]) / 2.0).abs() < 1e-12);
    }
}
