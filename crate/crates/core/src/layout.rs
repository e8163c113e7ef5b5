//! Plain-text layout: greedy word wrap into positioned lines, word boxes and
//! sentence-terminal punctuation anchors, plus the spatial queries the
//! tracker and relocation logic run against them.
//!
//! Glyph metrics use a monospace approximation: a word is `chars × mean
//! char width` wide, separated by one space of the same width. Lines are
//! stacked at a pitch of font height plus line spacing, and every line owns
//! the half-open vertical band `[top, top + pitch)`, so bands tile the
//! paragraph without gaps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{union_contains, Point, Rect};
use crate::scalar::Scalar;

/// Sentence-terminal marks used as relocation anchors.
pub const ANCHOR_MARKS: [char; 3] = ['.', '!', '?'];

/// Pixel density of a panel with the given resolution and diagonal.
pub fn pixels_per_cm_for_panel(width_px: u32, height_px: u32, diagonal_in: f64) -> f64 {
    let diag_px = (f64::from(width_px)).hypot(f64::from(height_px));
    diag_px / diagonal_in / 2.54
}

/// Half-open range of word indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WordSpan {
    pub start: usize,
    pub end: usize,
}

impl WordSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, w: usize) -> bool {
        w >= self.start && w < self.end
    }

    pub fn iter(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LayoutConfig<T> {
    pub screen_width_px: u32,
    pub screen_height_px: u32,
    pub pixels_per_cm: T,
    pub line_spacing_mm: T,
    pub font_height_mm: T,
    pub paragraph_rect: Rect<T>,
    pub mean_char_width_mm: T,
}

impl<T: Scalar> Default for LayoutConfig<T> {
    fn default() -> Self {
        Self {
            screen_width_px: 1920,
            screen_height_px: 1080,
            pixels_per_cm: T::lit(pixels_per_cm_for_panel(1920, 1080, 15.6)),
            line_spacing_mm: T::lit(4.5),
            font_height_mm: T::lit(4.0),
            paragraph_rect: Rect::new(T::lit(240.0), T::lit(200.0), T::lit(1680.0), T::lit(1000.0)),
            mean_char_width_mm: T::lit(2.2),
        }
    }
}

impl<T: Scalar> LayoutConfig<T> {
    pub fn mm_to_px(&self, mm: T) -> T {
        mm / T::lit(10.0) * self.pixels_per_cm
    }

    pub fn line_pitch_px(&self) -> T {
        self.mm_to_px(self.font_height_mm + self.line_spacing_mm)
    }

    pub fn font_height_px(&self) -> T {
        self.mm_to_px(self.font_height_mm)
    }

    pub fn char_width_px(&self) -> T {
        self.mm_to_px(self.mean_char_width_mm)
    }

    pub fn screen_rect(&self) -> Rect<T> {
        Rect::new(
            T::zero(),
            T::zero(),
            T::lit(f64::from(self.screen_width_px)),
            T::lit(f64::from(self.screen_height_px)),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if self.screen_width_px == 0 || self.screen_height_px == 0 {
            return Err(Error::Config("screen dimensions must be positive".into()));
        }
        if !positive(self.pixels_per_cm)
            || !positive(self.font_height_mm)
            || !positive(self.mean_char_width_mm)
        {
            return Err(Error::Config("layout metrics must be positive".into()));
        }
        if !(self.line_spacing_mm.is_finite() && self.line_spacing_mm >= T::zero()) {
            return Err(Error::Config("line spacing must be non-negative".into()));
        }
        if !self.paragraph_rect.is_valid() || !self.screen_rect().contains_rect(&self.paragraph_rect)
        {
            return Err(Error::Config("paragraph rectangle must lie within the screen".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Line<T> {
    pub index: usize,
    pub y_center_px: T,
    pub x_left_px: T,
    pub x_right_px: T,
    /// Top of the line's band, inclusive.
    pub band_top_px: T,
    /// Bottom of the line's band, exclusive; equals the next line's top.
    pub band_bottom_px: T,
    pub word_range: WordSpan,
}

impl<T: Scalar> Line<T> {
    pub fn width(&self) -> T {
        self.x_right_px - self.x_left_px
    }

    pub fn band(&self) -> Rect<T> {
        Rect::new(self.x_left_px, self.band_top_px, self.x_right_px, self.band_bottom_px)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Word<T> {
    pub index: usize,
    pub line_index: usize,
    pub bounding_box: Rect<T>,
    pub text: String,
}

impl<T: Scalar> Word<T> {
    pub fn center(&self) -> Point<T> {
        self.bounding_box.center()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SentenceSpan<T> {
    pub word_range: WordSpan,
    /// One box per covered line segment, spanning that line's full band.
    pub boxes: Vec<Rect<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PunctuationAnchor<T> {
    pub index: usize,
    pub mark: char,
    pub position: Point<T>,
    /// Word carrying the mark.
    pub word_index: usize,
    /// Byte offset of the mark in the source text.
    pub source_offset: usize,
    pub following_sentence: SentenceSpan<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DocumentLayout<T> {
    pub config: LayoutConfig<T>,
    pub lines: Vec<Line<T>>,
    pub words: Vec<Word<T>>,
    pub anchors: Vec<PunctuationAnchor<T>>,
    pub source_text: String,
}

struct Token<'a> {
    text: &'a str,
    offset: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(Token { text: &text[s..i], offset: s });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(Token { text: &text[s..], offset: s });
    }
    tokens
}

/// Position of the sentence-terminal mark in `token`, looking through
/// trailing closing quotes and brackets. Returns (char index, byte index, mark).
fn terminal_mark(token: &str) -> Option<(usize, usize, char)> {
    const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}'];
    let chars: Vec<(usize, char)> = token.char_indices().collect();
    let mut i = chars.len();
    while i > 0 && CLOSERS.contains(&chars[i - 1].1) {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let (byte, c) = chars[i - 1];
    ANCHOR_MARKS.contains(&c).then_some((i - 1, byte, c))
}

/// Lays `text` out inside the configured paragraph rectangle.
pub fn layout_document<T: Scalar>(text: &str, config: &LayoutConfig<T>) -> Result<DocumentLayout<T>> {
    config.validate()?;
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::InvalidInput("text contains no words".into()));
    }

    let cw = config.char_width_px();
    let pitch = config.line_pitch_px();
    let half_font = config.font_height_px() * T::half();
    let para = config.paragraph_rect;

    // Greedy wrap into per-line token index lists.
    let mut line_tokens: Vec<Vec<usize>> = vec![Vec::new()];
    let mut cursor = para.x0;
    for (i, tok) in tokens.iter().enumerate() {
        let w = T::lit(tok.text.chars().count() as f64) * cw;
        let current = line_tokens.last_mut().expect("at least one line");
        if current.is_empty() {
            current.push(i);
            cursor = para.x0 + w;
        } else if cursor + cw + w <= para.x1 {
            current.push(i);
            cursor = cursor + cw + w;
        } else {
            line_tokens.push(vec![i]);
            cursor = para.x0 + w;
        }
    }

    let bottom = para.y0 + T::lit(line_tokens.len() as f64) * pitch;
    if bottom > para.y1 {
        return Err(Error::InvalidInput(format!(
            "text needs {} lines and overflows the paragraph rectangle",
            line_tokens.len()
        )));
    }

    let mut lines = Vec::with_capacity(line_tokens.len());
    let mut words = Vec::with_capacity(tokens.len());
    for (li, toks) in line_tokens.iter().enumerate() {
        let top = para.y0 + T::lit(li as f64) * pitch;
        let band_bottom = para.y0 + T::lit((li + 1) as f64) * pitch;
        let y_center = top + pitch * T::half();
        let first_word = words.len();
        let mut x = para.x0;
        for &ti in toks {
            let w = T::lit(tokens[ti].text.chars().count() as f64) * cw;
            words.push(Word {
                index: words.len(),
                line_index: li,
                bounding_box: Rect::new(x, y_center - half_font, x + w, y_center + half_font),
                text: tokens[ti].text.to_string(),
            });
            x = x + w + cw;
        }
        let x_right = words.last().map(|w| w.bounding_box.x1).unwrap_or(para.x0);
        lines.push(Line {
            index: li,
            y_center_px: y_center,
            x_left_px: para.x0,
            x_right_px: x_right,
            band_top_px: top,
            band_bottom_px: band_bottom,
            word_range: WordSpan::new(first_word, words.len()),
        });
    }

    let mut marks = Vec::new();
    for (wi, tok) in tokens.iter().enumerate() {
        if let Some((char_idx, byte_idx, mark)) = terminal_mark(tok.text) {
            let b = words[wi].bounding_box;
            let position = Point::new(
                b.x0 + (T::lit(char_idx as f64) + T::half()) * cw,
                lines[words[wi].line_index].y_center_px,
            );
            marks.push((wi, mark, position, tok.offset + byte_idx));
        }
    }

    let mut anchors = Vec::with_capacity(marks.len());
    for (ai, &(wi, mark, position, source_offset)) in marks.iter().enumerate() {
        let end = marks.get(ai + 1).map(|m| m.0 + 1).unwrap_or(words.len());
        let span = WordSpan::new(wi + 1, end.max(wi + 1));
        anchors.push(PunctuationAnchor {
            index: ai,
            mark,
            position,
            word_index: wi,
            source_offset,
            following_sentence: SentenceSpan {
                word_range: span,
                boxes: segment_boxes(&lines, &words, span),
            },
        });
    }

    Ok(DocumentLayout {
        config: config.clone(),
        lines,
        words,
        anchors,
        source_text: text.to_string(),
    })
}

fn segment_boxes<T: Scalar>(lines: &[Line<T>], words: &[Word<T>], span: WordSpan) -> Vec<Rect<T>> {
    let mut boxes: Vec<Rect<T>> = Vec::new();
    let mut current_line = usize::MAX;
    for w in span.iter().map(|i| &words[i]) {
        let line = &lines[w.line_index];
        if w.line_index != current_line {
            current_line = w.line_index;
            boxes.push(Rect::new(
                w.bounding_box.x0,
                line.band_top_px,
                w.bounding_box.x1,
                line.band_bottom_px,
            ));
        } else if let Some(b) = boxes.last_mut() {
            b.x1 = w.bounding_box.x1;
        }
    }
    boxes
}

impl<T: Scalar> DocumentLayout<T> {
    pub fn pitch_px(&self) -> T {
        self.config.line_pitch_px()
    }

    /// Line whose half-open band contains `y_px`.
    pub fn line_at_y(&self, y_px: T) -> Option<usize> {
        let first = self.lines.first()?;
        let last = self.lines.last()?;
        if !(y_px >= first.band_top_px && y_px < last.band_bottom_px) {
            return None;
        }
        // Bands tile; first line whose bottom lies strictly below y.
        let idx = self.lines.partition_point(|l| l.band_bottom_px <= y_px);
        (idx < self.lines.len()).then_some(idx)
    }

    /// Line whose centre is vertically closest to `y_px`.
    pub fn nearest_line(&self, y_px: T) -> usize {
        if let Some(i) = self.line_at_y(y_px) {
            return i;
        }
        match self.lines.first() {
            Some(first) if y_px < first.band_top_px => 0,
            _ => self.lines.len() - 1,
        }
    }

    /// Word whose half-open box contains `p`.
    pub fn word_at(&self, p: Point<T>) -> Option<usize> {
        let line = &self.lines[self.line_at_y(p.y)?];
        let words = &self.words[line.word_range.start..line.word_range.end];
        let k = words.partition_point(|w| w.bounding_box.x0 <= p.x);
        let candidate = words.get(k.checked_sub(1)?)?;
        candidate.bounding_box.contains(p).then_some(candidate.index)
    }

    /// Anchors inside the union of `region`, in document order.
    pub fn anchors_in_region(&self, region: &[Rect<T>]) -> Vec<usize> {
        if region.is_empty() {
            return Vec::new();
        }
        self.anchors
            .iter()
            .filter(|a| union_contains(region, a.position))
            .map(|a| a.index)
            .collect()
    }

    /// Text of a span of words, single-space separated.
    pub fn span_text(&self, span: WordSpan) -> String {
        let end = span.end.min(self.words.len());
        let start = span.start.min(end);
        self.words[start..end]
            .iter()
            .map(|w| w.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Word ranges of all sentences, in order, covering every word once.
    pub fn sentences(&self) -> Vec<WordSpan> {
        let mut spans = Vec::with_capacity(self.anchors.len() + 1);
        let mut start = 0;
        for a in &self.anchors {
            spans.push(WordSpan::new(start, a.word_index + 1));
            start = a.word_index + 1;
        }
        if start < self.words.len() {
            spans.push(WordSpan::new(start, self.words.len()));
        }
        spans
    }

    /// Index into [`Self::sentences`] of the sentence holding word `w`.
    pub fn sentence_of_word(&self, w: usize) -> usize {
        self.anchors.partition_point(|a| a.word_index < w)
    }

    pub fn word_line(&self, w: usize) -> &Line<T> {
        &self.lines[self.words[w].line_index]
    }

    /// Serialisable view consumed by clients and the harness.
    pub fn export(&self) -> LayoutExport<T> {
        LayoutExport {
            config: self.config.clone(),
            lines: self
                .lines
                .iter()
                .map(|l| LineRecord {
                    index: l.index,
                    y_center: l.y_center_px,
                    x_left: l.x_left_px,
                    x_right: l.x_right_px,
                })
                .collect(),
            words: self
                .words
                .iter()
                .map(|w| WordRecord {
                    index: w.index,
                    line: w.line_index,
                    r#box: w.bounding_box,
                    text: w.text.clone(),
                })
                .collect(),
            anchors: self
                .anchors
                .iter()
                .map(|a| AnchorRecord {
                    index: a.index,
                    mark: a.mark,
                    x: a.position.x,
                    y: a.position.y,
                    sentence_word_range: [
                        a.following_sentence.word_range.start,
                        a.following_sentence.word_range.end,
                    ],
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LayoutExport<T> {
    pub config: LayoutConfig<T>,
    pub lines: Vec<LineRecord<T>>,
    pub words: Vec<WordRecord<T>>,
    pub anchors: Vec<AnchorRecord<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LineRecord<T> {
    pub index: usize,
    pub y_center: T,
    pub x_left: T,
    pub x_right: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WordRecord<T> {
    pub index: usize,
    pub line: usize,
    pub r#box: Rect<T>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AnchorRecord<T> {
    pub index: usize,
    pub mark: char,
    pub x: T,
    pub y: T,
    pub sentence_word_range: [usize; 2],
}
