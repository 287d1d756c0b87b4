use std::ops::Range;

/// Anything that splits text into tokens with byte spans. Spans must tile
/// the input: contiguous, in order, covering every byte.
pub trait TokenizerAdapter: Send + Sync {
    fn name(&self) -> &str;
    fn spans(&self, text: &str) -> Vec<Range<usize>>;

    fn count(&self, text: &str) -> usize {
        self.spans(text).len()
    }
}

/// One token per whitespace-separated word, with the following whitespace
/// attached to it. Leading whitespace joins the first token.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl TokenizerAdapter for WhitespaceTokenizer {
    fn name(&self) -> &str {
        "whitespace"
    }

    fn spans(&self, text: &str) -> Vec<Range<usize>> {
        let mut spans: Vec<Range<usize>> = Vec::new();
        let mut start = 0;
        let mut in_word = false;
        let mut seen_word = false;
        for (i, c) in text.char_indices() {
            if c.is_whitespace() {
                in_word = false;
            } else {
                if !in_word && seen_word {
                    spans.push(start..i);
                    start = i;
                }
                in_word = true;
                seen_word = true;
            }
        }
        if start < text.len() {
            spans.push(start..text.len());
        }
        spans
    }
}

/// True when `spans` covers `text` exactly, in order and without gaps.
pub fn spans_tile(text: &str, spans: &[Range<usize>]) -> bool {
    let mut at = 0;
    for s in spans {
        if s.start != at || s.end <= s.start || !text.is_char_boundary(s.end) {
            return false;
        }
        at = s.end;
    }
    at == text.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(text: &str) -> Vec<&str> {
        WhitespaceTokenizer.spans(text).into_iter().map(|r| &text[r]).collect()
    }

    #[test]
    fn splitting() {
        assert_eq!(words("a b  c\n"), ["a ", "b  ", "c\n"]);
        assert_eq!(words("  lead x"), ["  lead ", "x"]);
        assert_eq!(words("\n\n"), ["\n\n"]);
        assert!(words("").is_empty());
    }

    proptest! {
        #[test]
        fn spans_always_tile(text in "[a-z é\n\t]{0,40}") {
            let spans = WhitespaceTokenizer.spans(&text);
            prop_assert!(spans_tile(&text, &spans));
            let expected = text.split_whitespace().count().max(usize::from(!text.is_empty()));
            prop_assert_eq!(spans.len(), expected);
        }
    }
}
