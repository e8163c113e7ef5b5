use gazeread::error_models::{synth_default_models, DriftModel, SIGMA_H_CM, SIGMA_V_CM};
use gazeread::harness::{run_outcomes, RunConfig};
use gazeread::layout::DocumentLayout;
use gazeread::simulator::{linear_suite, simulate, texts, Action, ScenarioScript, DEFAULT_WPM};
use gazeread::tracker::TrackerEvent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn script(actions: Vec<Action>, seed: u64) -> ScenarioScript {
    ScenarioScript {
        name: format!("s{seed}"),
        document: texts::SOURDOUGH.into(),
        actions,
        seed,
        sample_rate_hz: 60.0,
        layout: None,
    }
}

#[test]
fn dwell_noise_matches_the_cloud() {
    let s = script(vec![Action::ReadLinear { from_word: 0, to_word: 3, wpm: DEFAULT_WPM }, Action::Dwell { duration_s: 300.0 }], 9);
    let layout: DocumentLayout<f64> = s.build_layout().unwrap();
    let (_, vectors) = synth_default_models::<f64>(42);
    let tr = simulate(&s, &layout, &vectors, &DriftModel::none()).unwrap();
    let tail = &tr.samples[tr.len() - 17_000..];
    let ppcm = layout.config.pixels_per_cm;
    let std = |f: &dyn Fn(usize) -> f64| {
        let v: Vec<f64> = (0..tail.len()).map(f).collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt() / ppcm
    };
    let sx = std(&|i| tail[i].p.x);
    let sy = std(&|i| tail[i].p.y);
    assert!((sx / SIGMA_H_CM - 1.0).abs() < 0.1, "{sx}");
    assert!((sy / SIGMA_V_CM - 1.0).abs() < 0.1, "{sy}");
}

#[test]
fn traces_are_bit_identical_per_seed() {
    for s in linear_suite(3, 20.0) {
        let layout: DocumentLayout<f64> = s.build_layout().unwrap();
        let (_, vectors) = synth_default_models::<f64>(5);
        let a = simulate(&s, &layout, &vectors, &DriftModel::default()).unwrap();
        let b = simulate(&s, &layout, &vectors, &DriftModel::default()).unwrap();
        assert!(a.samples.iter().zip(&b.samples).all(|(x, y)| x.p.x.to_bits() == y.p.x.to_bits() && x.p.y.to_bits() == y.p.y.to_bits()));
        assert_eq!(a, b);
    }
}

#[test]
fn drift_grows_the_error_over_time() {
    // A fast drift so the trend clears the noise within a minute.
    let drift = DriftModel::with_rate(0.05);
    let bins = 6;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for seed in 0..50 {
        let s = script(vec![Action::ReadLinear { from_word: 0, to_word: 80, wpm: DEFAULT_WPM }], seed);
        let layout: DocumentLayout<f64> = s.build_layout().unwrap();
        let (_, vectors) = synth_default_models::<f64>(seed);
        let noisy = simulate(&s, &layout, &vectors, &drift).unwrap();
        let clean = simulate(&s, &layout, &gazeread::error_models::ErrorVectorModel::noiseless(), &DriftModel::none()).unwrap();
        let span = noisy.samples.last().unwrap().t_ms as f64 + 1.0;
        for (a, b) in noisy.samples.iter().zip(&clean.samples) {
            let bin = ((a.t_ms as f64 / span) * bins as f64) as usize;
            sums[bin] += a.p.distance(b.p) / layout.config.pixels_per_cm;
            counts[bin] += 1;
        }
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect();
    assert!(means.windows(2).all(|w| w[1] > w[0]), "{means:?}");
}

#[test]
fn script_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(vec![Action::ReadLinear { from_word: 0, to_word: 9, wpm: 200.0 }, Action::Jump { target_word: 60 }, Action::LookAway { duration_s: 1.5 }], 3);
    let p = dir.path().join("s.json");
    s.write_json(&p).unwrap();
    assert_eq!(ScenarioScript::read_json(&p).unwrap(), s);
}

/// Hand-built jump: read into a line, jump at least four lines away to a
/// sentence start, read on for two lines.
fn jump_script(seed: u64) -> Option<(ScenarioScript, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let text = [texts::LIGHTHOUSE, texts::SOURDOUGH, texts::RIVER_MAPS][seed as usize % 3];
    let mut s = script(Vec::new(), seed);
    s.document = text.into();
    let layout: DocumentLayout<f64> = s.build_layout().unwrap();
    let n = layout.lines.len();
    let origin_line = rng.random_range(1..n - 1);
    let origin = layout.lines[origin_line].word_range.start + 2;
    let targets: Vec<usize> = layout
        .anchors
        .iter()
        .map(|a| a.word_index + 1)
        .filter(|&w| w < layout.words.len())
        .filter(|&w| {
            let line = layout.words[w].line_index;
            line.abs_diff(origin_line) >= 4 && line + 3 <= n
                && (layout.lines[line].x_right_px - layout.words[w].bounding_box.x0) / layout.config.char_width_px() >= 35.0
        })
        .collect();
    if targets.is_empty() {
        return None;
    }
    let target = targets[rng.random_range(0..targets.len())];
    let end = layout.lines[layout.words[target].line_index + 1].word_range.end - 1;
    s.actions = vec![
        Action::ReadLinear { from_word: 0, to_word: origin, wpm: DEFAULT_WPM },
        Action::Jump { target_word: target },
        Action::ReadLinear { from_word: target, to_word: end, wpm: DEFAULT_WPM },
    ];
    Some((s, target))
}

#[test]
fn correct_candidates_score_in_the_expected_band() {
    let jumps: Vec<(ScenarioScript, usize)> = (0..200).filter_map(jump_script).take(100).collect();
    assert_eq!(jumps.len(), 100);
    let cfg = RunConfig::new(jumps.iter().map(|j| j.0.clone()).collect());
    let outcomes = run_outcomes(&cfg).unwrap();
    let mut ratios = Vec::new();
    for (o, (_, target)) in outcomes.iter().zip(&jumps) {
        let anchor = o.layout.anchors.iter().position(|a| a.word_index + 1 == *target).unwrap();
        for e in &o.events {
            if let TrackerEvent::RelocationApplied { election: Some(trace), .. } = &e.event {
                if let Some(c) = trace.candidates.iter().find(|c| c.anchor == anchor) {
                    ratios.push(c.ratio);
                }
            }
        }
    }
    assert!(ratios.len() >= 80, "{}", ratios.len());
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((0.15..=0.5).contains(&mean), "mean correct-candidate ratio {mean}");
}
