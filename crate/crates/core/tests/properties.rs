use gazeread::calibrator::{CalibrationModel, GazeLinePair};
use gazeread::election::{elect, match_ratio, Candidate};
use gazeread::error_models::{synth_default_models, DriftModel, ErrorRangeModel, ErrorVectorModel, Offset};
use gazeread::geometry::{Point, Rect};
use gazeread::layout::{layout_document, LayoutConfig, SentenceSpan, WordSpan};
use gazeread::simulator::texts;
use proptest::prelude::*;

const PPCM: f64 = 55.5;

fn cloud(seed: u64) -> ErrorVectorModel<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let offsets = (0..200)
        .map(|_| {
            let dx: f64 = StandardNormal.sample(&mut rng);
            let dy: f64 = StandardNormal.sample(&mut rng);
            Offset { dx_cm: 1.8 * dx, dy_cm: 1.2 * dy }
        })
        .collect();
    ErrorVectorModel::new(offsets).unwrap()
}

fn rect() -> impl Strategy<Value = Rect<f64>> {
    (0.0..1800.0, 0.0..1000.0, 1.0..400.0, 1.0..120.0).prop_map(|(x, y, w, h)| Rect::new(x, y, x + w, y + h))
}

fn point() -> impl Strategy<Value = Point<f64>> {
    (0.0..1920.0, 0.0..1080.0).prop_map(|(x, y)| Point::new(x, y))
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(("[a-z]{1,12}", prop::sample::select(vec!["", "", "", ",", ".", "?", "!"])), 1..150)
        .prop_map(|ws| ws.into_iter().map(|(w, p)| w + p).collect::<Vec<_>>().join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn layout_preserves_tokens_and_lines(t in text()) {
        let layout = layout_document::<f64>(&t, &LayoutConfig::default()).unwrap();
        let words: Vec<&str> = layout.words.iter().map(|w| w.text.as_str()).collect();
        prop_assert_eq!(words, t.split_whitespace().collect::<Vec<_>>());
        for line in &layout.lines {
            prop_assert_eq!(layout.line_at_y(line.y_center_px), Some(line.index));
        }
    }

    #[test]
    fn anchors_in_region_is_an_ordered_subset(t in text(), region in prop::collection::vec(rect(), 0..6)) {
        let layout = layout_document::<f64>(&t, &LayoutConfig::default()).unwrap();
        let found = layout.anchors_in_region(&region);
        prop_assert!(found.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(found.iter().all(|&a| a < layout.anchors.len()));
        for a in &layout.anchors {
            let inside = region.iter().any(|r| r.contains(a.position));
            prop_assert_eq!(found.contains(&a.index), inside);
        }
    }

    #[test]
    fn overlap_is_a_monotone_fraction(seed in 0u64..50, gaze in point(), region in prop::collection::vec(rect(), 0..5), extra in rect()) {
        let m = cloud(seed);
        let f = m.overlap_fraction(gaze, &region, PPCM);
        prop_assert!((0.0..=1.0).contains(&f));
        let mut grown = region.clone();
        grown.push(extra);
        prop_assert!(m.overlap_fraction(gaze, &grown, PPCM) >= f);
    }

    #[test]
    fn overlap_adds_over_disjoint_regions(seed in 0u64..50, gaze in point(), a in rect(), gap in 0.0..50.0, w in 1.0..300.0) {
        let m = cloud(seed);
        let b = Rect::new(a.x1 + gap, a.y0, a.x1 + gap + w, a.y1);
        let sum = m.overlap_fraction(gaze, &[a], PPCM) + m.overlap_fraction(gaze, &[b], PPCM);
        prop_assert!((m.overlap_fraction(gaze, &[a, b], PPCM) - sum).abs() < 1e-12);
    }

    #[test]
    fn range_is_constant_within_a_cell(p in point(), q in point()) {
        let (range, _) = synth_default_models::<f64>(1);
        if range.cell_index(p) == range.cell_index(q) {
            prop_assert_eq!(range.range_at(p, PPCM), range.range_at(q, PPCM));
        }
    }

    #[test]
    fn drift_is_linear_in_time(rate in 0.0..0.1, t1 in 0.0..600.0, t2 in 0.0..600.0) {
        let d = DriftModel::<f64>::with_rate(rate);
        let (a, b, s) = (d.drift_offset(t1), d.drift_offset(t2), d.drift_offset(t1 + t2));
        prop_assert!((s.1 - (a.1 + b.1)).abs() < 1e-9);
        prop_assert!((s.0 - (a.0 + b.0)).abs() < 1e-9);
    }

    #[test]
    fn fit_minimises_squared_error(pairs in prop::collection::vec((100.0..1000.0, -50.0..50.0), 2..8), perturb in prop::collection::vec((-0.2..0.2, -40.0..40.0), 100)) {
        let mut m = CalibrationModel::default();
        for (g, off) in &pairs {
            m.record_pair(GazeLinePair::new(*g, g * 1.05 + off));
        }
        let Ok((k, b)) = m.fit() else { return Ok(()) };
        if !(0.5 < k && k < 2.0) {
            return Ok(());
        }
        let best = m.sse(k, b);
        prop_assert!(best <= m.sse(1.0, 0.0) + 1e-6);
        for (dk, db) in perturb {
            prop_assert!(best <= m.sse(k + dk, b + db) + 1e-6);
        }
    }

    #[test]
    fn calibration_is_affine_in_y_only(k in 0.6..1.8, b in -60.0..60.0, p1 in point(), p2 in point()) {
        let mut m = CalibrationModel::default();
        for g in [200.0, 400.0, 700.0] {
            m.record_pair(GazeLinePair::new(g, k * g + b));
        }
        let (fk, _) = m.fit().unwrap();
        let (a1, a2) = (m.apply(p1), m.apply(p2));
        prop_assert_eq!(a1.x, p1.x);
        prop_assert!(((a1.y - a2.y) - fk * (p1.y - p2.y)).abs() < 1e-9);
    }

    #[test]
    fn match_ratio_ignores_point_order(seed in 0u64..50, region in prop::collection::vec(rect(), 1..4), points in prop::collection::vec(point(), 1..30), rot in 0usize..30) {
        let m = cloud(seed);
        let r = match_ratio(&region, &points, &m, PPCM);
        prop_assert!((0.0..=1.0).contains(&r));
        let mut shuffled = points.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        prop_assert!((match_ratio(&region, &shuffled, &m, PPCM) - r).abs() < 1e-12);
    }

    #[test]
    fn a_better_point_raises_the_ratio(seed in 0u64..50, region in prop::collection::vec(rect(), 1..4), points in prop::collection::vec(point(), 1..20), extra in point()) {
        let m = cloud(seed);
        let r = match_ratio(&region, &points, &m, PPCM);
        let f = m.overlap_fraction(extra, &region, PPCM);
        let mut more = points.clone();
        more.push(extra);
        let r2 = match_ratio(&region, &more, &m, PPCM);
        if f > r + 1e-12 {
            prop_assert!(r2 > r);
        } else if f < r - 1e-12 {
            prop_assert!(r2 < r);
        }
    }

    #[test]
    fn election_is_shift_invariant(steps in prop::collection::vec(0u32..64, 2..8), shift_steps in -4i32..4, llm in prop::option::of(0usize..8)) {
        // Dyadic values keep the shifted sums exact.
        let ratios: Vec<f64> = steps.iter().map(|&s| f64::from(s) / 64.0).collect();
        let shift = f64::from(shift_steps) / 8.0;
        let make = |shift: f64| -> Vec<Candidate<f64>> {
            ratios
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let mut c = Candidate::new(i, SentenceSpan { word_range: WordSpan::new(i, i + 1), boxes: Vec::new() });
                    c.set_ratio(r + shift);
                    c
                })
                .collect()
        };
        let llm = llm.filter(|&i| i < ratios.len());
        let mut base = make(0.0);
        let mut shifted = make(shift);
        prop_assert_eq!(elect(&mut base, llm).unwrap(), elect(&mut shifted, llm).unwrap());
        if llm.is_none() {
            let w = elect(&mut make(0.0), None).unwrap();
            prop_assert!(ratios.iter().all(|&r| r <= ratios[w]));
            prop_assert!(ratios[..w].iter().all(|&r| r < ratios[w]));
        }
    }
}

#[test]
fn uniform_range_model_is_uniform() {
    let m = ErrorRangeModel::<f64>::uniform(4, 6, 1.0, 2.0, (1920, 1080)).unwrap();
    assert_eq!(m.range_at(Point::new(0.0, 0.0), 10.0), (10.0, 20.0));
    assert_eq!(m.range_at(Point::new(1919.0, 1079.0), 10.0), (10.0, 20.0));
}

#[test]
fn suite_texts_lay_out_on_one_screen() {
    for t in [texts::LIGHTHOUSE, texts::SOURDOUGH, texts::RIVER_MAPS] {
        let layout = layout_document::<f64>(t, &LayoutConfig::default()).unwrap();
        assert!(layout.lines.len() >= 10);
        assert!(!layout.anchors.is_empty());
    }
}
