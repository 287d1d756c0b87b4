use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::extract::NUMBER;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum GoldValue {
    Integer(i64),
    Number(f64),
    String(String),
    List(Vec<String>),
    Unanswerable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldAnswer {
    pub value: GoldValue,
    /// Decimal places the answer is expected to be rounded to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub float_precision: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldType {
    Integer,
    Number,
    String,
    List,
    Unanswerable,
}

const UNANSWERABLE: [&str; 3] = ["unanswerable", "not answerable", "cannot be answered"];

impl GoldAnswer {
    pub fn integer(v: i64) -> Self {
        GoldAnswer {
            value: GoldValue::Integer(v),
            float_precision: None,
        }
    }

    pub fn number(v: f64, precision: Option<u32>) -> Self {
        GoldAnswer {
            value: GoldValue::Number(v),
            float_precision: precision,
        }
    }

    pub fn string(s: impl Into<String>) -> Self {
        GoldAnswer {
            value: GoldValue::String(s.into()),
            float_precision: None,
        }
    }

    pub fn list<S: Into<String>>(items: impl IntoIterator<Item = S>) -> Self {
        GoldAnswer {
            value: GoldValue::List(items.into_iter().map(Into::into).collect()),
            float_precision: None,
        }
    }

    pub fn unanswerable() -> Self {
        GoldAnswer {
            value: GoldValue::Unanswerable,
            float_precision: None,
        }
    }

    /// Builds a typed gold from a gold-file record, checking that the value
    /// has the declared shape.
    pub fn from_typed(kind: GoldType, answer: &Value, precision: Option<u32>) -> Result<Self, String> {
        let value = match kind {
            GoldType::Integer => match answer {
                Value::Number(n) if n.is_i64() => GoldValue::Integer(n.as_i64().unwrap_or_default()),
                Value::String(s) => match parse_number(s) {
                    Some((v, false)) if v.fract() == 0.0 && v.abs() < 9.0e15 => GoldValue::Integer(v as i64),
                    _ => return Err(format!("`{s}` is not an integer")),
                },
                other => return Err(format!("integer gold must be an integer, got {other}")),
            },
            GoldType::Number => match answer {
                Value::Number(n) => GoldValue::Number(n.as_f64().unwrap_or_default()),
                Value::String(s) => match parse_number(s) {
                    Some((v, pct)) => GoldValue::Number(if pct { v / 100.0 } else { v }),
                    None => return Err(format!("`{s}` is not a number")),
                },
                other => return Err(format!("number gold must be numeric, got {other}")),
            },
            GoldType::String => match answer {
                Value::String(s) if !s.trim().is_empty() => GoldValue::String(s.clone()),
                other => return Err(format!("string gold must be a non-empty string, got {other}")),
            },
            GoldType::List => match answer {
                Value::Array(items) if !items.is_empty() => GoldValue::List(
                    items
                        .iter()
                        .map(|v| v.as_str().map(str::to_string).ok_or("list items must be strings"))
                        .collect::<Result<_, _>>()?,
                ),
                other => return Err(format!("list gold must be a non-empty array of strings, got {other}")),
            },
            GoldType::Unanswerable => GoldValue::Unanswerable,
        };
        Ok(GoldAnswer {
            value,
            float_precision: precision,
        })
    }

    /// Guesses a typed gold from free answer text, as synthesized pairs carry
    /// no type. Decimal places in the text set the precision.
    pub fn infer(answer: &str) -> Self {
        let trimmed = answer.trim();
        if UNANSWERABLE.contains(&normalize_text(trimmed).as_str()) {
            return GoldAnswer::unanswerable();
        }
        let bare = trimmed.trim_end_matches('.');
        if let Some(m) = NUMBER.find(bare).filter(|m| m.start() == 0 && m.end() == bare.len()) {
            if let Some((v, pct)) = parse_number(m.as_str()) {
                let decimals = m
                    .as_str()
                    .split_once('.')
                    .map(|(_, d)| d.chars().take_while(char::is_ascii_digit).count() as u32);
                if !pct && decimals.is_none() && v.fract() == 0.0 && v.abs() < 9.0e15 {
                    return GoldAnswer::integer(v as i64);
                }
                let (value, precision) = if pct {
                    (v / 100.0, Some(decimals.unwrap_or(0) + 2))
                } else {
                    (v, decimals)
                };
                return GoldAnswer::number(value, precision);
            }
        }
        GoldAnswer::string(trimmed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    pub correct: bool,
    pub partial_f1: f64,
}

impl ItemScore {
    fn binary(correct: bool) -> Self {
        ItemScore {
            correct,
            partial_f1: if correct { 1.0 } else { 0.0 },
        }
    }
}

static NON_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[^\p{L}\p{N}\s]").unwrap());
static LIST_SPLIT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\s*(?:[,;\n]|\band\b|\bor\b|^\s*[-*•]\s*)\s*").unwrap());

/// Casefolds, drops punctuation and the articles a/an/the, collapses spaces.
/// Text made only of articles keeps them, so "A" stays a usable answer.
pub fn normalize_text(text: &str) -> String {
    let lowered = text.to_lowercase();
    let stripped = NON_WORD.replace_all(&lowered, " ");
    let words: Vec<&str> = stripped.split_whitespace().collect();
    let kept: Vec<&str> = words
        .iter()
        .copied()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect();
    if kept.is_empty() { words } else { kept }.join(" ")
}

/// Parses the first numeric token, returning the value and whether it
/// carried a percent sign.
pub fn parse_number(text: &str) -> Option<(f64, bool)> {
    let m = NUMBER.find(text)?;
    let token = m.as_str();
    let percent = token.trim_end().ends_with('%');
    let cleaned: String = token
        .chars()
        .filter(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '−'))
        .map(|c| if c == '−' { '-' } else { c })
        .collect();
    cleaned.parse::<f64>().ok().map(|v| (v, percent))
}

fn rounded(v: f64, precision: u32) -> i128 {
    (v * 10f64.powi(precision as i32)).round() as i128
}

fn numbers_match(candidate: f64, gold: f64, precision: Option<u32>) -> bool {
    match precision {
        Some(p) => rounded(candidate, p) == rounded(gold, p),
        None => (candidate - gold).abs() <= 1e-6 * gold.abs().max(1e-12),
    }
}

fn string_match(extracted: &str, gold: &str) -> bool {
    let e = normalize_text(extracted);
    let g = normalize_text(gold);
    if g.is_empty() {
        return e.is_empty();
    }
    e == g || format!(" {e} ").contains(&format!(" {g} "))
}

fn token_f1(extracted: &str, gold: &str) -> f64 {
    let mut gold_counts: BTreeMap<String, usize> = BTreeMap::new();
    let g = normalize_text(gold);
    let e = normalize_text(extracted);
    for t in g.split_whitespace() {
        *gold_counts.entry(t.to_string()).or_default() += 1;
    }
    let (e_len, g_len) = (e.split_whitespace().count(), g.split_whitespace().count());
    if e_len == 0 || g_len == 0 {
        return 0.0;
    }
    let mut common = 0usize;
    for t in e.split_whitespace() {
        if let Some(c) = gold_counts.get_mut(t).filter(|c| **c > 0) {
            *c -= 1;
            common += 1;
        }
    }
    f1(common, e_len, g_len)
}

fn f1(matched: usize, predicted: usize, gold: usize) -> f64 {
    if matched == 0 {
        return 0.0;
    }
    let p = matched as f64 / predicted as f64;
    let r = matched as f64 / gold as f64;
    2.0 * p * r / (p + r)
}

pub fn split_list(text: &str) -> Vec<String> {
    LIST_SPLIT
        .split(text)
        .map(|s| s.trim().to_string())
        .filter(|s| !normalize_text(s).is_empty())
        .collect()
}

/// Rule-based verdict for one extracted answer against a typed gold.
pub fn rule_score(extracted: &str, gold: &GoldAnswer) -> ItemScore {
    match &gold.value {
        GoldValue::Integer(g) => {
            let value = parse_number(extracted).map(|(v, pct)| if pct { v / 100.0 } else { v });
            ItemScore::binary(value.is_some_and(|v| v == *g as f64))
        }
        GoldValue::Number(g) => {
            let correct = parse_number(extracted).is_some_and(|(v, pct)| {
                let v = if pct { v / 100.0 } else { v };
                [v, v * 100.0, v / 100.0]
                    .into_iter()
                    .any(|c| numbers_match(c, *g, gold.float_precision))
            });
            ItemScore::binary(correct)
        }
        GoldValue::String(g) => {
            if string_match(extracted, g) {
                ItemScore::binary(true)
            } else {
                ItemScore {
                    correct: false,
                    partial_f1: token_f1(extracted, g),
                }
            }
        }
        GoldValue::List(items) => {
            let predicted = split_list(extracted);
            let mut used = vec![false; items.len()];
            let mut matched = 0;
            for p in &predicted {
                if let Some(i) = (0..items.len()).find(|&i| !used[i] && string_match(p, &items[i])) {
                    used[i] = true;
                    matched += 1;
                }
            }
            let score = f1(matched, predicted.len(), items.len());
            ItemScore {
                correct: matched == items.len() && matched == predicted.len(),
                partial_f1: score,
            }
        }
        GoldValue::Unanswerable => ItemScore::binary(UNANSWERABLE.contains(&normalize_text(extracted).as_str())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn appendix_ratio() {
        let gold = GoldAnswer::number(0.105, Some(3));
        assert!(rule_score("0.105", &gold).correct);
        assert!(rule_score("10.5%", &gold).correct);
        assert!(!rule_score("0.122", &gold).correct);
        // 10.5 / 100 lands a hair above 0.105 and must still round to it.
        assert_eq!(rounded(10.5 / 100.0, 3), 105);
    }

    #[test]
    fn list_half() {
        let s = rule_score("A and C", &GoldAnswer::list(["A", "B"]));
        assert!(!s.correct);
        assert!((s.partial_f1 - 0.5).abs() < 1e-12);
        assert!(rule_score("B, A", &GoldAnswer::list(["A", "B"])).correct);
    }

    #[test]
    fn strings_and_unanswerable() {
        assert!(rule_score("the Los Gatos office", &GoldAnswer::string("Los Gatos")).correct);
        assert!(!rule_score("Gatos", &GoldAnswer::string("Los Gatos")).correct);
        assert!(rule_score("Not answerable.", &GoldAnswer::unanswerable()).correct);
        assert!(!rule_score("0", &GoldAnswer::unanswerable()).correct);
        assert!(rule_score("1,204", &GoldAnswer::integer(1204)).correct);
        assert!(!rule_score("1204.5", &GoldAnswer::integer(1204)).correct);
    }

    #[test]
    fn infer_types() {
        assert_eq!(GoldAnswer::infer("0.105"), GoldAnswer::number(0.105, Some(3)));
        assert_eq!(GoldAnswer::infer("14.92%"), GoldAnswer::number(0.1492, Some(4)));
        assert_eq!(GoldAnswer::infer("42"), GoldAnswer::integer(42));
        assert_eq!(GoldAnswer::infer("Unanswerable"), GoldAnswer::unanswerable());
        assert_eq!(GoldAnswer::infer("$31,250; February 28, 2027"), GoldAnswer::string("$31,250; February 28, 2027"));
    }

    #[test]
    fn typed_records() {
        assert!(GoldAnswer::from_typed(GoldType::Integer, &serde_json::json!("3.5"), None).is_err());
        assert_eq!(
            GoldAnswer::from_typed(GoldType::Number, &serde_json::json!("10.5%"), Some(3)).unwrap(),
            GoldAnswer::number(0.105, Some(3))
        );
        assert!(GoldAnswer::from_typed(GoldType::List, &serde_json::json!([1]), None).is_err());
    }

    fn any_gold() -> impl Strategy<Value = GoldAnswer> {
        prop_oneof![
            (-1000i64..1000).prop_map(GoldAnswer::integer),
            ((-100000i64..100000), proptest::option::of(0u32..5))
                .prop_map(|(v, p)| GoldAnswer::number(v as f64 / 1000.0, p)),
            "[a-z]{1,8}( [a-z]{1,8}){0,2}".prop_map(GoldAnswer::string),
            proptest::collection::vec("[a-z]{1,6}", 1..4).prop_map(GoldAnswer::list),
            Just(GoldAnswer::unanswerable()),
        ]
    }

    proptest! {
        #[test]
        fn correct_means_full_f1(extracted in "[a-zA-Z0-9 .,%]{0,20}", gold in any_gold()) {
            let s = rule_score(&extracted, &gold);
            prop_assert!((0.0..=1.0).contains(&s.partial_f1));
            if s.correct {
                prop_assert_eq!(s.partial_f1, 1.0);
            }
        }

        #[test]
        fn case_and_spacing_do_not_matter(extracted in "[a-z0-9]{1,6}( [a-z0-9]{1,6}){0,3}", gold in any_gold()) {
            let shouted = format!("  {}\t", extracted.to_uppercase().replace(' ', "   "));
            prop_assert_eq!(rule_score(&extracted, &gold), rule_score(&shouted, &gold));
        }

        #[test]
        fn percent_reconciles(x in -100000i64..100000, gold in any_gold()) {
            let x = x as f64 / 100.0;
            prop_assert_eq!(rule_score(&format!("{x}%"), &gold).correct, rule_score(&format!("{}", x / 100.0), &gold).correct);
        }
    }
}
