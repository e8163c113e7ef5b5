use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{texts, Action, ScenarioScript, DEFAULT_SAMPLE_RATE_HZ, DEFAULT_WPM};
use crate::layout::{layout_document, DocumentLayout, LayoutConfig};

pub struct SuiteParagraph {
    pub name: &'static str,
    pub text: &'static str,
}

pub const SUITE_PARAGRAPHS: [SuiteParagraph; 3] = [
    SuiteParagraph { name: "lighthouse", text: texts::LIGHTHOUSE },
    SuiteParagraph { name: "sourdough", text: texts::SOURDOUGH },
    SuiteParagraph { name: "river", text: texts::RIVER_MAPS },
];

/// Minimum line distance between a jump's origin and target.
const MIN_JUMP_LINES: usize = 4;
/// Characters of text a landing word must leave on its line.
const MIN_LANDING_ROOM_CHARS: f64 = 35.0;

const BASE_SEED: u64 = 0x5EED_2024;

struct Builder<'a> {
    layout: &'a DocumentLayout<f64>,
    rng: ChaCha8Rng,
    actions: Vec<Action>,
    /// Next word to be read.
    at: usize,
}

impl Builder<'_> {
    fn line_of(&self, w: usize) -> usize {
        self.layout.words[w].line_index
    }

    fn read_to(&mut self, to: usize) {
        self.actions.push(Action::ReadLinear { from_word: self.at, to_word: to, wpm: DEFAULT_WPM });
        self.at = to + 1;
    }

    /// Reads up to a random word in the middle of `line`.
    fn read_into_line(&mut self, line: usize) {
        let r = self.layout.lines[line].word_range;
        let lo = self.at.max(r.start + 2).min(r.end - 1);
        let hi = (r.end - 3).max(lo);
        let to = self.rng.random_range(lo..=hi);
        self.read_to(to);
    }

    /// Reads through the end of the line after `word`'s line.
    fn read_past_next_line(&mut self) {
        let line = (self.line_of(self.at) + 1).min(self.layout.lines.len() - 1);
        self.read_to(self.layout.lines[line].word_range.end - 1);
    }

    /// Sentence-initial words usable as landing points, on lines at least
    /// `MIN_JUMP_LINES` above (`back`) or below the current one.
    fn targets(&self, back: bool) -> Vec<usize> {
        let cur = self.line_of(self.at.saturating_sub(1));
        let cw = self.layout.config.char_width_px();
        let last_ok = self.layout.lines.len().saturating_sub(3);
        self.layout
            .anchors
            .iter()
            .map(|a| a.word_index + 1)
            .filter(|&w| w < self.layout.words.len())
            .filter(|&w| {
                let line = self.layout.word_line(w);
                let room = (line.x_right_px - self.layout.words[w].bounding_box.x0) / cw;
                let far = if back { line.index + MIN_JUMP_LINES <= cur } else { line.index >= cur + MIN_JUMP_LINES };
                far && line.index <= last_ok && room >= MIN_LANDING_ROOM_CHARS
            })
            .collect()
    }

    fn jump(&mut self, back: bool) -> bool {
        let Some(&target) = self.targets(back).choose(&mut self.rng) else {
            return false;
        };
        self.actions.push(Action::Jump { target_word: target });
        self.at = target;
        self.read_past_next_line();
        true
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Linear,
    Review,
    Preview,
    Multi,
    LookAway,
}

impl Kind {
    fn label(self) -> &'static str {
        match self {
            Kind::Linear => "linear",
            Kind::Review => "review",
            Kind::Preview => "preview",
            Kind::Multi => "multi",
            Kind::LookAway => "lookaway",
        }
    }
}

const PER_PARAGRAPH: [(Kind, usize); 5] =
    [(Kind::Linear, 2), (Kind::Review, 8), (Kind::Preview, 6), (Kind::Multi, 4), (Kind::LookAway, 2)];

fn build(kind: Kind, layout: &DocumentLayout<f64>, seed: u64) -> Vec<Action> {
    let mut b = Builder { layout, rng: ChaCha8Rng::seed_from_u64(seed), actions: Vec::new(), at: 0 };
    let n_lines = layout.lines.len();
    let last_word = layout.words.len() - 1;
    // Retry origin lines until a landing exists; the text is long enough
    // that the first pick almost always works.
    let attempt = |b: &mut Builder, lines: std::ops::RangeInclusive<usize>, back: bool| {
        let saved = (b.actions.clone(), b.at);
        for _ in 0..32 {
            let line = b.rng.random_range(lines.clone());
            b.read_into_line(line);
            if b.jump(back) {
                return;
            }
            (b.actions, b.at) = saved.clone();
        }
        panic!("suite paragraph too short for a jump");
    };
    match kind {
        Kind::Linear => b.read_to(last_word),
        Kind::Review => attempt(&mut b, MIN_JUMP_LINES + 2..=n_lines - 2, true),
        Kind::Preview => attempt(&mut b, 0..=n_lines - MIN_JUMP_LINES - 4, false),
        Kind::Multi => {
            attempt(&mut b, MIN_JUMP_LINES + 2..=n_lines - 2, true);
            let saved = (b.actions.clone(), b.at);
            if !b.jump(false) {
                (b.actions, b.at) = saved;
                b.jump(true);
            }
        }
        Kind::LookAway => {
            let mid = layout.lines[n_lines / 3].word_range.start + 3;
            b.read_to(mid);
            b.actions.push(Action::LookAway { duration_s: 5.0 });
            b.read_into_line(n_lines / 2 + 1);
            b.jump(true);
        }
    }
    b.actions
}

/// Fixed-seed scenario suite over the three built-in paragraphs.
pub fn scenario_suite_default() -> Vec<ScenarioScript> {
    scenario_suite(None).expect("suite paragraphs fit the default layout")
}

/// The default suite's scripts rendered with `config` instead of the
/// default layout.
pub fn scenario_suite(config: Option<&LayoutConfig<f64>>) -> crate::error::Result<Vec<ScenarioScript>> {
    let default = LayoutConfig::<f64>::default();
    let cfg = config.unwrap_or(&default);
    let mut out = Vec::new();
    for (pi, para) in SUITE_PARAGRAPHS.iter().enumerate() {
        let layout = layout_document(para.text, cfg)?;
        for (kind, count) in PER_PARAGRAPH {
            for k in 0..count {
                let seed = BASE_SEED + (pi as u64) * 1000 + (out.len() as u64) * 17 + k as u64;
                out.push(ScenarioScript {
                    name: format!("{}-{}-{k}", para.name, kind.label()),
                    document: para.text.to_owned(),
                    actions: build(kind, &layout, seed),
                    seed,
                    sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
                    layout: config.cloned(),
                });
            }
        }
    }
    Ok(out)
}

/// `count` pure-linear reads of about `duration_s` each, cycling over the
/// suite paragraphs with distinct seeds.
pub fn linear_suite(count: usize, duration_s: f64) -> Vec<ScenarioScript> {
    (0..count)
        .map(|i| {
            let para = &SUITE_PARAGRAPHS[i % SUITE_PARAGRAPHS.len()];
            let n_words = para.text.split_whitespace().count();
            let to_word = ((duration_s * DEFAULT_WPM / 60.0).round() as usize).clamp(1, n_words) - 1;
            ScenarioScript {
                name: format!("{}-read-{i}", para.name),
                document: para.text.to_owned(),
                actions: vec![Action::ReadLinear { from_word: 0, to_word, wpm: DEFAULT_WPM }],
                seed: BASE_SEED + 500_000 + i as u64,
                sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
                layout: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_models::{DriftModel, ErrorVectorModel};
    use crate::simulator::simulate;

    #[test]
    fn suite_shape() {
        let suite = scenario_suite_default();
        assert!(suite.len() >= 30);
        assert!(suite.iter().any(|s| s.jump_count() == 0));
        let backward = suite
            .iter()
            .filter(|s| {
                let layout: DocumentLayout<f64> = s.build_layout().unwrap();
                let mut at = 0;
                s.actions.iter().any(|a| match *a {
                    Action::ReadLinear { to_word, .. } => {
                        at = to_word;
                        false
                    }
                    Action::Jump { target_word } => layout.words[target_word].line_index < layout.words[at].line_index,
                    _ => false,
                })
            })
            .count();
        assert!(backward >= 10, "{backward}");
        for s in &suite {
            let layout: DocumentLayout<f64> = s.build_layout().unwrap();
            s.validate(&layout).unwrap();
        }
    }

    #[test]
    fn linear_suite_durations() {
        let suite = linear_suite(4, 120.0);
        assert_eq!(suite.len(), 4);
        assert!(suite.iter().all(ScenarioScript::is_pure_linear));
        let s = &suite[1];
        let layout: DocumentLayout<f64> = s.build_layout().unwrap();
        let tr = simulate(s, &layout, &ErrorVectorModel::noiseless(), &DriftModel::none()).unwrap();
        let secs = tr.len() as f64 / DEFAULT_SAMPLE_RATE_HZ;
        assert!((secs - 120.0).abs() < 1.0, "{secs}");
    }

    #[test]
    fn paragraphs_have_suite_length() {
        for p in &SUITE_PARAGRAPHS {
            let n = p.text.split_whitespace().count();
            assert!((250..=270).contains(&n), "{} has {n} words", p.name);
        }
    }

    #[test]
    fn suite_is_reproducible() {
        assert_eq!(scenario_suite_default(), scenario_suite_default());
        let s = &scenario_suite_default()[3];
        let layout: DocumentLayout<f64> = s.build_layout().unwrap();
        let (_, vecs) = crate::error_models::synth_default_models::<f64>(3);
        let a = simulate(s, &layout, &vecs, &DriftModel::default()).unwrap();
        let b = simulate(s, &layout, &vecs, &DriftModel::default()).unwrap();
        assert_eq!(a, b);
        let _ = ErrorVectorModel::<f64>::noiseless();
    }
}
