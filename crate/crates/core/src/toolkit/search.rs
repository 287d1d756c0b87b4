use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::ToolError;
use crate::document::{compare_section_ids, ElementKind, Outline};

/// Which element field a hit was found in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchField {
    Text,
    GeneratedCaption,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub item_type: String,
    pub element_id: String,
    pub section_id: String,
    pub page_num: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_id: Option<String>,
    pub keyword: String,
    pub field: SearchField,
    pub snippet: String,
    /// `(start, len)` in chars within `snippet`, one per absorbed match.
    pub match_spans: Vec<(usize, usize)>,
    pub truncated_before: bool,
    pub truncated_after: bool,
    #[serde(skip)]
    order: (usize, usize),
}

/// Lowercases char by char, keeping chars whose lowercase form is longer
/// than one char, so offsets in the folded text match the original.
pub fn fold(text: &str) -> Vec<char> {
    text.chars()
        .map(|c| {
            let mut lower = c.to_lowercase();
            match (lower.next(), lower.next()) {
                (Some(l), None) => l,
                _ => c,
            }
        })
        .collect()
}

/// Collapses whitespace runs to one space and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn find_all(haystack: &[char], needle: &[char]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return Vec::new();
    }
    (0..=haystack.len() - needle.len())
        .filter(|&i| haystack[i..i + needle.len()] == *needle)
        .collect()
}

/// Case-insensitive substring search over element text and generated
/// captions. Keywords are matched independently; matches of one keyword in
/// one field are grouped greedily so each snippet window holds every match it
/// fully contains.
pub fn search(outline: &Outline, keywords: &[String], window: usize) -> Result<Vec<SearchHit>, ToolError> {
    let needles: Vec<(String, Vec<char>)> = keywords
        .iter()
        .map(|k| normalize_whitespace(k))
        .map(|k| {
            let folded = fold(&k);
            (k, folded)
        })
        .collect();
    if needles.is_empty() || needles.iter().any(|(k, _)| k.is_empty()) {
        return Err(ToolError::EmptyKeywords);
    }

    let mut hits = Vec::new();
    for (order, (section, element)) in outline.elements().enumerate() {
        let fields = [
            (SearchField::Text, Some(element.text.as_str())),
            (SearchField::GeneratedCaption, element.generated_caption.as_deref()),
        ];
        for (field, value) in fields {
            let Some(value) = value else { continue };
            let original: Vec<char> = normalize_whitespace(value).chars().collect();
            let folded = fold(&original.iter().collect::<String>());
            for (ki, (keyword, needle)) in needles.iter().enumerate() {
                let starts = find_all(&folded, needle);
                let mut i = 0;
                while i < starts.len() {
                    let first = starts[i];
                    let lo = first.saturating_sub(window);
                    let hi = (first + needle.len() + window).min(original.len());
                    let mut spans = Vec::new();
                    while i < starts.len() && starts[i] >= lo && starts[i] + needle.len() <= hi {
                        spans.push((starts[i] - lo, needle.len()));
                        i += 1;
                    }
                    hits.push(SearchHit {
                        item_type: element.kind.item_type().to_string(),
                        element_id: element.element_id.clone(),
                        section_id: section.section_id.clone(),
                        page_num: element.page_num,
                        table_id: (element.kind == ElementKind::Table).then(|| element.ordinal().to_string()),
                        keyword: keyword.clone(),
                        field,
                        snippet: original[lo..hi].iter().collect(),
                        match_spans: spans,
                        truncated_before: lo > 0,
                        truncated_after: hi < original.len(),
                        order: (order, ki),
                    });
                }
            }
        }
    }
    hits.sort_by(compare_hits);
    Ok(hits)
}

fn compare_hits(a: &SearchHit, b: &SearchHit) -> Ordering {
    a.page_num
        .cmp(&b.page_num)
        .then_with(|| compare_section_ids(&a.section_id, &b.section_id))
        .then_with(|| a.order.0.cmp(&b.order.0))
        .then_with(|| a.field.cmp(&b.field))
        .then_with(|| a.order.1.cmp(&b.order.1))
}

/// Renders hits in the `<Item ...>` observation format. At most `cap` items
/// are shown.
pub fn render_search(keywords: &[String], hits: &[SearchHit], cap: usize) -> String {
    let quoted = keywords
        .iter()
        .map(|k| format!("`{}`", normalize_whitespace(k)))
        .collect::<Vec<_>>()
        .join(", ");
    if hits.is_empty() {
        return format!("A Document search for {quoted} found 0 results.");
    }
    let mut out = format!("A Document search for {quoted} found {} results:", hits.len());
    for hit in hits.iter().take(cap) {
        out.push_str("\n<Item type=\"");
        out.push_str(&hit.item_type);
        out.push('"');
        if let Some(table_id) = &hit.table_id {
            out.push_str(&format!(" table_id=\"{table_id}\""));
        }
        out.push_str(&format!(
            " section_id=\"{}\" page_num=\"{}.0\">\n",
            hit.section_id, hit.page_num
        ));
        if hit.field == SearchField::GeneratedCaption {
            out.push_str("Generated caption: ");
        }
        if hit.truncated_before {
            out.push_str("...");
        }
        out.push_str(&hit.snippet);
        if hit.truncated_after {
            out.push_str("...");
        }
        out.push_str("\n</Item>");
    }
    if hits.len() > cap {
        out.push_str(&format!(
            "\n[{} more results not shown. Use more specific keywords to narrow the search.]",
            hits.len() - cap
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{Element, SectionNode};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn element(id: &str, kind: ElementKind, text: &str, page: u32) -> Element {
        Element {
            element_id: id.into(),
            kind,
            text: text.into(),
            caption: None,
            generated_caption: None,
            page_num: page,
            media_ref: None,
            table_html: None,
        }
    }

    fn section(id: &str, elements: Vec<Element>, children: Vec<SectionNode>) -> SectionNode {
        let pages = elements.iter().map(|e| e.page_num).chain(children.iter().flat_map(|c| [c.page_span.0, c.page_span.1]));
        let lo = pages.clone().min().unwrap_or(1);
        let hi = pages.max().unwrap_or(1);
        SectionNode {
            section_id: id.into(),
            title: id.into(),
            level: id.split('.').count() as u8,
            page_span: (lo, hi),
            elements,
            children,
        }
    }

    fn kw(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn no_match_is_empty() {
        let o = Outline::new("d", vec![section("1", vec![element("paragraph-1", ElementKind::Paragraph, "hello", 1)], vec![])]);
        assert!(search(&o, &kw(&["zzzqx"]), 300).unwrap().is_empty());
        assert_eq!(render_search(&kw(&["zzzqx"]), &[], 50), "A Document search for `zzzqx` found 0 results.");
    }

    #[test]
    fn blank_keywords_rejected() {
        let o = Outline::new("d", vec![]);
        assert_eq!(search(&o, &[], 300), Err(ToolError::EmptyKeywords));
        assert_eq!(search(&o, &kw(&["ok", "  "]), 300), Err(ToolError::EmptyKeywords));
    }

    #[test]
    fn case_and_whitespace_insensitive() {
        let o = Outline::new(
            "d",
            vec![section("1", vec![element("paragraph-1", ElementKind::Paragraph, "Total\n  ADVERTISING   spend", 2)], vec![])],
        );
        let hits = search(&o, &kw(&["advertising  spend"]), 300).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].snippet, "Total ADVERTISING spend");
        assert_eq!(hits[0].match_spans, vec![(6, 17)]);
    }

    #[test]
    fn window_bounds_snippet_and_clusters() {
        let text = format!("{}ad{}ad{}", "x".repeat(10), "y".repeat(3), "z".repeat(40));
        let o = Outline::new("d", vec![section("1", vec![element("paragraph-1", ElementKind::Paragraph, &text, 1)], vec![])]);
        let hits = search(&o, &kw(&["ad"]), 5).unwrap();
        // second match starts at 15, ends at 17; first window is [5, 17] so it is absorbed
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].snippet, "xxxxxadyyyad");
        assert_eq!(hits[0].match_spans, vec![(5, 2), (10, 2)]);
        assert!(hits[0].truncated_before && hits[0].truncated_after);

        let hits = search(&o, &kw(&["ad"]), 2).unwrap();
        assert_eq!(hits.len(), 2);
        assert!(hits.iter().all(|h| h.snippet.chars().count() <= 2 * 2 + 2));
    }

    #[test]
    fn generated_captions_are_searchable() {
        let mut chart = element("chart-1", ElementKind::Chart, "", 4);
        chart.generated_caption = Some("Bar chart of renewable share".into());
        let o = Outline::new("d", vec![section("1", vec![chart], vec![])]);
        let hits = search(&o, &kw(&["renewable"]), 300).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].field, SearchField::GeneratedCaption);
        assert!(render_search(&kw(&["renewable"]), &hits, 50).contains("<Item type=\"Chart\" section_id=\"1\" page_num=\"4.0\">\nGenerated caption: Bar chart"));
    }

    #[test]
    fn ordering_uses_numeric_section_ids() {
        let o = Outline::new(
            "d",
            vec![section(
                "3",
                vec![],
                vec![
                    section("3.9", vec![element("paragraph-1", ElementKind::Paragraph, "revenues", 3)], vec![]),
                    section("3.19", vec![element("paragraph-2", ElementKind::Paragraph, "revenues", 3)], vec![]),
                ],
            )],
        );
        let ids: Vec<_> = search(&o, &kw(&["revenues"]), 300).unwrap().into_iter().map(|h| h.section_id).collect();
        assert_eq!(ids, ["3.9", "3.19"]);
    }

    #[test]
    fn render_format_with_table_id_and_cap() {
        let o = Outline::new(
            "d",
            vec![section(
                "8",
                vec![],
                vec![section(
                    "8.20",
                    vec![element("table-5", ElementKind::Table, "Revenues $ 6,779,511", 19)],
                    vec![],
                )],
            )],
        );
        let hits = search(&o, &kw(&["Revenues"]), 300).unwrap();
        let text = render_search(&kw(&["Revenues"]), &hits, 50);
        assert_eq!(
            text,
            "A Document search for `Revenues` found 1 results:\n<Item type=\"HTML_Table\" table_id=\"5\" section_id=\"8.20\" page_num=\"19.0\">\nRevenues $ 6,779,511\n</Item>"
        );
        let capped = render_search(&kw(&["Revenues"]), &[hits[0].clone(), hits[0].clone()], 1);
        assert!(capped.ends_with("[1 more results not shown. Use more specific keywords to narrow the search.]"));
    }

    #[test]
    fn multiple_keywords_in_header() {
        assert_eq!(
            render_search(&kw(&["a", "b"]), &[], 50),
            "A Document search for `a`, `b` found 0 results."
        );
    }

    #[test]
    fn fold_keeps_length() {
        // U+0130 lowercases to two chars and is kept as is
        assert_eq!(fold("A\u{130}B"), vec!['a', '\u{130}', 'b']);
    }

    // Brute-force reference: every (section, page) whose element text or
    // generated caption contains any keyword, found by plain lowercase scan.
    fn oracle(outline: &Outline, keywords: &[String]) -> BTreeSet<(String, u32)> {
        let mut out = BTreeSet::new();
        for (section, element) in outline.elements() {
            for field in [Some(&element.text), element.generated_caption.as_ref()].into_iter().flatten() {
                let hay: String = normalize_whitespace(field).to_lowercase();
                if keywords.iter().any(|k| hay.contains(&normalize_whitespace(k).to_lowercase())) {
                    out.insert((section.section_id.clone(), element.page_num));
                }
            }
        }
        out
    }

    fn arb_outline() -> impl Strategy<Value = Outline> {
        let word = prop::sample::select(vec!["alpha", "Beta", "gamma", "delta", "ALPHA", "beta", "x", " ", "\n"]);
        let text = prop::collection::vec(word, 0..12).prop_map(|w| w.join(" "));
        let elem = (text, prop::option::of("[a-z ]{0,10}"), 1u32..6);
        let sec = prop::collection::vec(elem, 0..5);
        prop::collection::vec((sec, prop::collection::vec(prop::collection::vec((
            prop::sample::select(vec!["alpha beta", "gamma", "delta x"]), prop::option::of("[a-z]{1,6}"), 1u32..6), 0..4), 0..3)), 0..4)
            .prop_map(|roots| {
                let mut n = 0;
                let mut mk = |(t, g, p): (String, Option<String>, u32)| {
                    n += 1;
                    let mut e = element(&format!("paragraph-{n}"), ElementKind::Paragraph, &t, p);
                    e.generated_caption = g;
                    e
                };
                let roots = roots
                    .into_iter()
                    .enumerate()
                    .map(|(i, (elems, kids))| {
                        let id = (i + 1).to_string();
                        let elements: Vec<Element> = elems.into_iter().map(&mut mk).collect();
                        let children = kids
                            .into_iter()
                            .enumerate()
                            .map(|(j, ke)| {
                                let ke: Vec<Element> = ke.into_iter().map(|(t, g, p)| mk((t.to_string(), g, p))).collect();
                                section(&format!("{id}.{}", j + 1), ke, vec![])
                            })
                            .collect();
                        section(&id, elements, children)
                    })
                    .collect();
                Outline::new("p", roots)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn matches_naive_scan(outline in arb_outline(),
                              keys in prop::collection::vec(prop::sample::select(vec!["alpha", "BETA", "gam", "a b", "x", "alpha beta", "zz"]), 1..3),
                              window in 0usize..20) {
            let keys: Vec<String> = keys.into_iter().map(String::from).collect();
            let hits = search(&outline, &keys, window).unwrap();
            let got: BTreeSet<(String, u32)> = hits.iter().map(|h| (h.section_id.clone(), h.page_num)).collect();
            prop_assert_eq!(got, oracle(&outline, &keys));
            let longest = keys.iter().map(|k| normalize_whitespace(k).chars().count()).max().unwrap();
            for h in &hits {
                prop_assert!(h.snippet.chars().count() <= 2 * window + longest);
                let folded: String = fold(&h.snippet).into_iter().collect();
                prop_assert!(folded.contains(&fold(&h.keyword).into_iter().collect::<String>()));
            }
        }
    }
}
