use std::collections::HashSet;

use super::{ContextChooser, ElectionQuery, LlmError};
use crate::layout::ANCHOR_MARKS;

/// Number of leading option tokens compared against the history.
const OPENING_TOKENS: usize = 6;

/// Offline stand-in: picks the option whose opening words share the most
/// tokens with the last history sentence. Ties go to the lowest index.
#[derive(Debug, Default, Clone)]
pub struct MockChooser {
    pub calls: usize,
}

/// Lower-cased alphanumeric tokens of `s`.
pub fn tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn last_sentence(history: &str) -> &str {
    history
        .split(|c| ANCHOR_MARKS.contains(&c))
        .map(str::trim)
        .rfind(|s| !s.is_empty())
        .unwrap_or("")
}

impl ContextChooser for MockChooser {
    fn name(&self) -> &str {
        "mock"
    }

    fn choose_option(&mut self, query: &ElectionQuery) -> Result<usize, LlmError> {
        query.validate()?;
        self.calls += 1;
        let context: HashSet<String> = tokens(last_sentence(&query.recent_history)).into_iter().collect();
        let mut best = (0usize, 0usize);
        for (i, opt) in query.options.iter().enumerate() {
            let opening: HashSet<String> = tokens(opt).into_iter().take(OPENING_TOKENS).collect();
            let overlap = opening.intersection(&context).count();
            if overlap > best.1 {
                best = (i, overlap);
            }
        }
        Ok(best.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefers_lexical_continuation() {
        let q = ElectionQuery {
            material: String::new(),
            recent_history: "It was heated. Then the reaction consumed the acid.".into(),
            options: vec!["The acid reacted quickly.".into(), "Meanwhile in Paris it rained.".into()],
        };
        assert_eq!(MockChooser::default().choose_option(&q), Ok(0));
        let swapped = ElectionQuery { options: q.options.iter().rev().cloned().collect(), ..q };
        assert_eq!(MockChooser::default().choose_option(&swapped), Ok(1));
    }

    #[test]
    fn no_overlap_picks_first() {
        let q = ElectionQuery {
            material: String::new(),
            recent_history: "Alpha beta.".into(),
            options: vec!["Gamma.".into(), "Delta.".into(), "Epsilon.".into()],
        };
        assert_eq!(MockChooser::default().choose_option(&q), Ok(0));
    }

    #[test]
    fn last_sentence_split() {
        assert_eq!(last_sentence("One. Two? Three!"), "Three");
        assert_eq!(last_sentence("One. Two words"), "Two words");
        assert_eq!(last_sentence(""), "");
    }
}
