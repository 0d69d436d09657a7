//! Model response parsing: the tagged `<Think>`/`<Answer>` layout or plain
//! labeled lines, the proposed move and the situation label.

use serde::Serialize;

use crate::board::Move;
use crate::dataset::{SituationLabel3, SituationLabel5};
use crate::notation::parse_iccs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseFormat {
    /// `<Think>..</Think><Answer>..</Answer>` with nothing else around.
    #[default]
    Tagged,
    /// `Situation Analysis:` and `Best Move:` lines.
    Labeled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelResponse {
    pub raw: String,
    pub think: Option<String>,
    pub answer: Option<String>,
    #[serde(serialize_with = "ser_move")]
    pub mv: Option<Move>,
    pub predicted_label5: Option<SituationLabel5>,
    /// Also set by phrases that name a side without a degree.
    pub predicted_label3: Option<SituationLabel3>,
    pub format_ok: bool,
}

fn ser_move<S: serde::Serializer>(mv: &Option<Move>, s: S) -> Result<S::Ok, S::Error> {
    match mv {
        Some(m) => s.serialize_some(&m.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMatch {
    Five(SituationLabel5),
    Three(SituationLabel3),
}

use LabelMatch::{Five, Three};
use SituationLabel3 as L3;
use SituationLabel5 as L5;

/// Accepted surface forms, matched case-insensitively. The earliest match in
/// the text wins; on a tie the longer form wins.
pub const LABEL_SYNONYMS: &[(&str, LabelMatch)] = &[
    ("clear_adv_red", Five(L5::ClearAdvRed)),
    ("slight_adv_red", Five(L5::SlightAdvRed)),
    ("clear_adv_black", Five(L5::ClearAdvBlack)),
    ("slight_adv_black", Five(L5::SlightAdvBlack)),
    ("adv_red", Three(L3::AdvRed)),
    ("adv_black", Three(L3::AdvBlack)),
    ("significant advantage for red", Five(L5::ClearAdvRed)),
    ("clear advantage for red", Five(L5::ClearAdvRed)),
    ("decisive advantage for red", Five(L5::ClearAdvRed)),
    ("red has a significant advantage", Five(L5::ClearAdvRed)),
    ("red has a clear advantage", Five(L5::ClearAdvRed)),
    ("red is clearly better", Five(L5::ClearAdvRed)),
    ("slight advantage for red", Five(L5::SlightAdvRed)),
    ("small advantage for red", Five(L5::SlightAdvRed)),
    ("red has a slight advantage", Five(L5::SlightAdvRed)),
    ("red is slightly better", Five(L5::SlightAdvRed)),
    ("significant advantage for black", Five(L5::ClearAdvBlack)),
    ("clear advantage for black", Five(L5::ClearAdvBlack)),
    ("decisive advantage for black", Five(L5::ClearAdvBlack)),
    ("black has a significant advantage", Five(L5::ClearAdvBlack)),
    ("black has a clear advantage", Five(L5::ClearAdvBlack)),
    ("black is clearly better", Five(L5::ClearAdvBlack)),
    ("slight advantage for black", Five(L5::SlightAdvBlack)),
    ("small advantage for black", Five(L5::SlightAdvBlack)),
    ("black has a slight advantage", Five(L5::SlightAdvBlack)),
    ("black is slightly better", Five(L5::SlightAdvBlack)),
    ("balanced", Five(L5::Balanced)),
    ("equal position", Five(L5::Balanced)),
    ("the position is equal", Five(L5::Balanced)),
    ("advantage for red", Three(L3::AdvRed)),
    ("red has the advantage", Three(L3::AdvRed)),
    ("red is better", Three(L3::AdvRed)),
    ("advantage for black", Three(L3::AdvBlack)),
    ("black has the advantage", Three(L3::AdvBlack)),
    ("black is better", Three(L3::AdvBlack)),
    ("红方大优", Five(L5::ClearAdvRed)),
    ("紅方大優", Five(L5::ClearAdvRed)),
    ("红方明显优势", Five(L5::ClearAdvRed)),
    ("紅方明顯優勢", Five(L5::ClearAdvRed)),
    ("红方优势明显", Five(L5::ClearAdvRed)),
    ("紅方優勢明顯", Five(L5::ClearAdvRed)),
    ("红大优", Five(L5::ClearAdvRed)),
    ("紅大優", Five(L5::ClearAdvRed)),
    ("红方稍优", Five(L5::SlightAdvRed)),
    ("紅方稍優", Five(L5::SlightAdvRed)),
    ("红方略优", Five(L5::SlightAdvRed)),
    ("紅方略優", Five(L5::SlightAdvRed)),
    ("红稍优", Five(L5::SlightAdvRed)),
    ("紅稍優", Five(L5::SlightAdvRed)),
    ("黑方大优", Five(L5::ClearAdvBlack)),
    ("黑方大優", Five(L5::ClearAdvBlack)),
    ("黑方明显优势", Five(L5::ClearAdvBlack)),
    ("黑方明顯優勢", Five(L5::ClearAdvBlack)),
    ("黑方优势明显", Five(L5::ClearAdvBlack)),
    ("黑方優勢明顯", Five(L5::ClearAdvBlack)),
    ("黑大优", Five(L5::ClearAdvBlack)),
    ("黑大優", Five(L5::ClearAdvBlack)),
    ("黑方稍优", Five(L5::SlightAdvBlack)),
    ("黑方稍優", Five(L5::SlightAdvBlack)),
    ("黑方略优", Five(L5::SlightAdvBlack)),
    ("黑方略優", Five(L5::SlightAdvBlack)),
    ("黑稍优", Five(L5::SlightAdvBlack)),
    ("黑稍優", Five(L5::SlightAdvBlack)),
    ("均势", Five(L5::Balanced)),
    ("均勢", Five(L5::Balanced)),
    ("势均力敌", Five(L5::Balanced)),
    ("勢均力敵", Five(L5::Balanced)),
    ("双方均势", Five(L5::Balanced)),
    ("雙方均勢", Five(L5::Balanced)),
    ("红优", Three(L3::AdvRed)),
    ("紅優", Three(L3::AdvRed)),
    ("红方优势", Three(L3::AdvRed)),
    ("紅方優勢", Three(L3::AdvRed)),
    ("红方占优", Three(L3::AdvRed)),
    ("紅方佔優", Three(L3::AdvRed)),
    ("黑优", Three(L3::AdvBlack)),
    ("黑優", Three(L3::AdvBlack)),
    ("黑方优势", Three(L3::AdvBlack)),
    ("黑方優勢", Three(L3::AdvBlack)),
    ("黑方占优", Three(L3::AdvBlack)),
    ("黑方佔優", Three(L3::AdvBlack)),
];

pub fn match_label(text: &str) -> Option<LabelMatch> {
    let lower = text.to_lowercase();
    let mut best: Option<(usize, usize, LabelMatch)> = None;
    for &(form, label) in LABEL_SYNONYMS {
        let mut from = 0;
        while let Some(off) = lower[from..].find(form) {
            let at = from + off;
            let end = at + form.len();
            let bounded = !form.is_ascii()
                || (!lower[..at].chars().next_back().is_some_and(is_word_char)
                    && !lower[end..].chars().next().is_some_and(is_word_char));
            if bounded {
                let better = match best {
                    None => true,
                    Some((b_at, b_len, _)) => at < b_at || (at == b_at && form.len() > b_len),
                };
                if better {
                    best = Some((at, form.len(), label));
                }
                break;
            }
            from = at + 1;
            while !lower.is_char_boundary(from) {
                from += 1;
            }
        }
    }
    best.map(|(_, _, l)| l)
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// First `a0a0`-shaped token (an optional `-` between the squares) that
/// stands on its own.
pub fn first_iccs_token(text: &str) -> Option<Move> {
    let b = text.as_bytes();
    let file = |c: u8| (b'a'..=b'i').contains(&c.to_ascii_lowercase());
    let rank = |c: u8| c.is_ascii_digit();
    for i in 0..b.len() {
        if i > 0 && (b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_') {
            continue;
        }
        for len in [4usize, 5] {
            if i + len > b.len() {
                continue;
            }
            let w = &b[i..i + len];
            let shaped = if len == 4 {
                file(w[0]) && rank(w[1]) && file(w[2]) && rank(w[3])
            } else {
                file(w[0]) && rank(w[1]) && w[2] == b'-' && file(w[3]) && rank(w[4])
            };
            let after_ok = b.get(i + len).is_none_or(|c| !(c.is_ascii_alphanumeric() || *c == b'_'));
            if shaped && after_ok {
                if let Ok(m) = parse_iccs(&text[i..i + len]) {
                    return Some(m);
                }
            }
        }
    }
    None
}

/// Text after `label` on its line, if such a line exists.
fn labeled_line<'a>(text: &'a str, label: &str) -> Option<&'a str> {
    let label = label.to_ascii_lowercase();
    text.lines().find_map(|line| {
        let trimmed = line.trim_start();
        let head = trimmed.get(..label.len())?;
        head.eq_ignore_ascii_case(&label).then(|| trimmed[label.len()..].trim())
    })
}

/// Byte range of the inside of the first `<tag>..</tag>` block at or after
/// `from`, plus the end of the closing tag.
fn tag_block(lower: &str, tag: &str, from: usize) -> Option<(usize, usize, usize, usize)> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = from + lower[from..].find(&open)?;
    let inner = start + open.len();
    let end = inner + lower[inner..].find(&close)?;
    Some((start, inner, end, end + close.len()))
}

pub fn parse_response(raw: &str, format: ResponseFormat) -> ModelResponse {
    // ASCII lowercasing keeps byte offsets aligned with `raw`
    let lower = raw.to_ascii_lowercase();
    let (think, answer, format_ok) = match format {
        ResponseFormat::Tagged => {
            let think = tag_block(&lower, "think", 0);
            let answer = think.and_then(|t| tag_block(&lower, "answer", t.3)).or_else(|| tag_block(&lower, "answer", 0));
            let format_ok = match (think, answer) {
                (Some(t), Some(a)) if a.0 >= t.3 => {
                    raw[..t.0].trim().is_empty() && raw[t.3..a.0].trim().is_empty() && raw[a.3..].trim().is_empty()
                }
                _ => false,
            };
            (
                think.map(|t| raw[t.1..t.2].to_owned()),
                answer.map(|a| raw[a.1..a.2].to_owned()),
                format_ok,
            )
        }
        ResponseFormat::Labeled => {
            let ok = labeled_line(raw, "Situation Analysis:").is_some() && labeled_line(raw, "Best Move:").is_some();
            (None, Some(raw.to_owned()), ok)
        }
    };
    let source = answer.as_deref().unwrap_or(raw);
    let mv = labeled_line(source, "Best Move:").and_then(first_iccs_token).or_else(|| first_iccs_token(source));
    let label = labeled_line(source, "Situation Analysis:").and_then(match_label).or_else(|| match_label(source));
    let (predicted_label5, predicted_label3) = match label {
        Some(Five(l)) => (Some(l), Some(l.coarsen())),
        Some(Three(l)) => (None, Some(l)),
        None => (None, None),
    };
    ModelResponse { raw: raw.to_owned(), think, answer, mv, predicted_label5, predicted_label3, format_ok }
}
