use std::collections::BTreeMap;

use super::{Element, ElementKind, Outline, ParsedDocument, SectionNode};

pub const FRONT_MATTER_ID: &str = "0";
pub const FRONT_MATTER_TITLE: &str = "(front matter)";

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutlineOptions {
    /// Deepest title level produced by clustering.
    pub max_levels: u8,
    /// Relative drop between neighbouring distinct heights that opens a new level.
    pub gap_ratio: f64,
}

impl Default for OutlineOptions {
    fn default() -> Self {
        OutlineOptions {
            max_levels: 4,
            gap_ratio: 0.15,
        }
    }
}

/// Assigns a level (1 = largest) to each title height.
///
/// Distinct heights are sorted descending and split wherever the relative
/// drop to the next height exceeds `gap_ratio`. Clusters past `max_levels`
/// are folded into the deepest level.
pub fn cluster_title_levels(heights: &[f64], opts: &OutlineOptions) -> Vec<u8> {
    let mut distinct: Vec<f64> = heights.iter().copied().filter(|h| h.is_finite()).collect();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();

    let max_levels = opts.max_levels.max(1);
    let mut level_of: Vec<(f64, u8)> = Vec::with_capacity(distinct.len());
    let mut level = 1u8;
    for (i, &h) in distinct.iter().enumerate() {
        if i > 0 {
            let prev = distinct[i - 1];
            let gap = if prev > 0.0 { (prev - h) / prev } else { 0.0 };
            if gap > opts.gap_ratio {
                level = (level + 1).min(max_levels);
            }
        }
        level_of.push((h, level));
    }

    heights
        .iter()
        .map(|h| {
            level_of
                .iter()
                .find(|(d, _)| d == h)
                .map(|&(_, l)| l)
                .unwrap_or(max_levels)
        })
        .collect()
}

struct Node {
    title: String,
    level: u8,
    elements: Vec<Element>,
    children: Vec<usize>,
}

pub fn build_outline(doc: &ParsedDocument, opts: &OutlineOptions) -> Outline {
    let title_heights: Vec<f64> = doc
        .blocks()
        .filter(|(_, b)| b.kind == ElementKind::Title)
        .map(|(_, b)| b.effective_title_height())
        .collect();
    let mut title_levels = cluster_title_levels(&title_heights, opts).into_iter();

    let mut arena: Vec<Node> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut front_matter: Option<usize> = None;
    let mut counters: BTreeMap<ElementKind, usize> = BTreeMap::new();

    for (page_num, block) in doc.blocks() {
        if block.structural_noise() {
            continue;
        }
        let n = counters.entry(block.kind).or_insert(0);
        *n += 1;
        let mut element = Element {
            element_id: format!("{}-{}", block.kind.as_str(), n),
            kind: block.kind,
            text: block.text.clone(),
            caption: None,
            generated_caption: None,
            page_num,
            media_ref: block.media_ref.clone().filter(|_| block.kind.is_visual()),
            table_html: block.table_html.clone().filter(|_| block.kind == ElementKind::Table),
        };
        if element.kind == ElementKind::Table && element.text.trim().is_empty() {
            if let Some(html) = &element.table_html {
                element.text = html_to_text(html);
            }
        }

        if block.kind == ElementKind::Title {
            let clustered = title_levels.next().unwrap_or(1);
            let level = clustered.min(stack.len() as u8 + 1).max(1);
            stack.truncate(level as usize - 1);
            let idx = arena.len();
            arena.push(Node {
                title: block.text.trim().to_string(),
                level,
                elements: vec![element],
                children: Vec::new(),
            });
            match stack.last() {
                Some(&parent) => arena[parent].children.push(idx),
                None => roots.push(idx),
            }
            stack.push(idx);
        } else {
            let target = match stack.last() {
                Some(&top) => top,
                None => *front_matter.get_or_insert_with(|| {
                    let idx = arena.len();
                    arena.push(front_matter_node());
                    idx
                }),
            };
            arena[target].elements.push(element);
        }
    }

    if roots.is_empty() && front_matter.is_none() {
        arena.push(front_matter_node());
        front_matter = Some(arena.len() - 1);
    }

    let mut out_roots = Vec::with_capacity(roots.len() + 1);
    if let Some(fm) = front_matter {
        out_roots.push(materialize(&mut arena, fm, FRONT_MATTER_ID.to_string()));
    }
    for (i, &root) in roots.iter().enumerate() {
        out_roots.push(materialize(&mut arena, root, (i + 1).to_string()));
    }

    let mut outline = Outline::new(doc.doc_id.clone(), out_roots);
    outline.page_screenshots = doc
        .pages
        .iter()
        .filter_map(|p| p.screenshot_ref.clone().map(|s| (p.page_num, s)))
        .collect();
    outline
}

fn front_matter_node() -> Node {
    Node {
        title: FRONT_MATTER_TITLE.to_string(),
        level: 1,
        elements: Vec::new(),
        children: Vec::new(),
    }
}

fn materialize(arena: &mut [Node], idx: usize, section_id: String) -> SectionNode {
    let mut elements = std::mem::take(&mut arena[idx].elements);
    link_captions(&mut elements);
    let child_ids = std::mem::take(&mut arena[idx].children);
    let children: Vec<SectionNode> = child_ids
        .iter()
        .enumerate()
        .map(|(i, &c)| materialize(arena, c, format!("{section_id}.{}", i + 1)))
        .collect();

    let pages = elements
        .iter()
        .map(|e| (e.page_num, e.page_num))
        .chain(children.iter().map(|c| c.page_span));
    let page_span = pages
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
        .unwrap_or((1, 1));

    SectionNode {
        section_id,
        title: std::mem::take(&mut arena[idx].title),
        level: arena[idx].level,
        page_span,
        elements,
        children,
    }
}

/// Copies each caption's text onto the nearest uncaptioned matching visual
/// element in the same section. Ties go to the element after the caption.
fn link_captions(elements: &mut [Element]) {
    for i in 0..elements.len() {
        let targets: &[ElementKind] = match elements[i].kind {
            ElementKind::TableCaption => &[ElementKind::Table],
            ElementKind::ImageCaption => &[ElementKind::Image, ElementKind::Chart],
            _ => continue,
        };
        let text = elements[i].text.trim().to_string();
        if text.is_empty() {
            continue;
        }
        let best = elements
            .iter()
            .enumerate()
            .filter(|(_, e)| targets.contains(&e.kind) && e.caption.is_none())
            .min_by_key(|(j, _)| (j.abs_diff(i), *j < i))
            .map(|(j, _)| j);
        if let Some(j) = best {
            elements[j].caption = Some(text);
        }
    }
}

/// Drops markup from table HTML and decodes the common entities.
pub(crate) fn html_to_text(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut in_tag = false;
    for c in html.chars() {
        match c {
            '<' => {
                in_tag = true;
                out.push(' ');
            }
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    let decoded = out
        .replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&");
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}
