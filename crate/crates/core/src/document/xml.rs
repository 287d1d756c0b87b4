use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{DocumentError, Element, ElementKind, Outline, SectionNode};

/// Renders the outline as nested XML. Output depends only on the outline.
pub fn serialize_xml(outline: &Outline) -> String {
    let mut out = String::new();
    if outline.roots.is_empty() {
        let _ = write!(out, "<document doc_id=\"{}\"/>", escape(&outline.doc_id));
        return out;
    }
    let _ = writeln!(out, "<document doc_id=\"{}\">", escape(&outline.doc_id));
    for root in &outline.roots {
        write_section(&mut out, root, 1);
    }
    out.push_str("</document>");
    out
}

fn write_section(out: &mut String, node: &SectionNode, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = write!(
        out,
        "{pad}<section section_id=\"{}\" title=\"{}\" level=\"{}\" page=\"{}\"",
        escape(&node.section_id),
        escape(&node.title),
        node.level,
        node.page_span.0
    );
    if node.page_span.1 != node.page_span.0 {
        let _ = write!(out, " last_page=\"{}\"", node.page_span.1);
    }
    if node.elements.is_empty() && node.children.is_empty() {
        out.push_str("/>\n");
        return;
    }
    out.push_str(">\n");
    for element in &node.elements {
        let _ = write!(
            out,
            "{pad}  <element kind=\"{}\" element_id=\"{}\" page_num=\"{}\"",
            element.kind.as_str(),
            escape(&element.element_id),
            element.page_num
        );
        if let Some(caption) = &element.caption {
            let _ = write!(out, " caption=\"{}\"", escape(caption));
        }
        if let Some(caption) = &element.generated_caption {
            let _ = write!(out, " generated_caption=\"{}\"", escape(caption));
        }
        out.push_str("/>\n");
    }
    for child in &node.children {
        write_section(out, child, depth + 1);
    }
    let _ = writeln!(out, "{pad}</section>");
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            _ => out.push(c),
        }
    }
    out
}

/// Parses XML written by [`serialize_xml`] back into an outline skeleton:
/// element text, media and table markup are not part of the XML.
pub fn parse_xml(xml: &str) -> Result<Outline, DocumentError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(true);

    let mut doc_id: Option<String> = None;
    let mut stack: Vec<SectionNode> = Vec::new();
    let mut roots: Vec<SectionNode> = Vec::new();
    let mut closed = false;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| DocumentError::MalformedXml(e.to_string()))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                match e.name().as_ref() {
                    b"document" => {
                        if doc_id.is_some() {
                            return Err(bad("nested <document>"));
                        }
                        doc_id = Some(required(e, "doc_id")?);
                        if is_empty {
                            closed = true;
                        }
                    }
                    b"section" => {
                        if doc_id.is_none() {
                            return Err(bad("<section> outside <document>"));
                        }
                        let node = parse_section(e)?;
                        if is_empty {
                            attach(&mut stack, &mut roots, node);
                        } else {
                            stack.push(node);
                        }
                    }
                    b"element" => {
                        let element = parse_element(e)?;
                        let parent = stack.last_mut().ok_or_else(|| bad("<element> outside <section>"))?;
                        parent.elements.push(element);
                    }
                    other => {
                        return Err(bad(format!("unexpected tag <{}>", String::from_utf8_lossy(other))));
                    }
                }
            }
            Event::End(ref e) => match e.name().as_ref() {
                b"section" => {
                    let node = stack.pop().ok_or_else(|| bad("unbalanced </section>"))?;
                    attach(&mut stack, &mut roots, node);
                }
                b"document" => closed = true,
                b"element" => {}
                other => {
                    return Err(bad(format!("unexpected </{}>", String::from_utf8_lossy(other))));
                }
            },
            Event::Eof => break,
            _ => {}
        }
    }
    if !closed || !stack.is_empty() {
        return Err(bad("document not closed"));
    }
    let doc_id = doc_id.ok_or_else(|| bad("missing <document>"))?;
    Ok(Outline::new(doc_id, roots))
}

fn attach(stack: &mut [SectionNode], roots: &mut Vec<SectionNode>, node: SectionNode) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(node),
        None => roots.push(node),
    }
}

fn bad(msg: impl Into<String>) -> DocumentError {
    DocumentError::MalformedXml(msg.into())
}

fn attr(e: &BytesStart<'_>, name: &str) -> Result<Option<String>, DocumentError> {
    for a in e.attributes() {
        let a = a.map_err(|err| bad(err.to_string()))?;
        if a.key.as_ref() == name.as_bytes() {
            let value = a.unescape_value().map_err(|err| bad(err.to_string()))?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn required(e: &BytesStart<'_>, name: &str) -> Result<String, DocumentError> {
    attr(e, name)?.ok_or_else(|| {
        bad(format!(
            "<{}> missing attribute `{name}`",
            String::from_utf8_lossy(e.name().as_ref())
        ))
    })
}

fn number<T: std::str::FromStr>(e: &BytesStart<'_>, name: &str) -> Result<T, DocumentError> {
    let raw = required(e, name)?;
    raw.parse()
        .map_err(|_| bad(format!("attribute `{name}` is not a number: {raw}")))
}

fn parse_section(e: &BytesStart<'_>) -> Result<SectionNode, DocumentError> {
    let first: u32 = number(e, "page")?;
    let last = match attr(e, "last_page")? {
        Some(v) => v.parse().map_err(|_| bad(format!("bad last_page: {v}")))?,
        None => first,
    };
    Ok(SectionNode {
        section_id: required(e, "section_id")?,
        title: required(e, "title")?,
        level: number(e, "level")?,
        page_span: (first, last),
        elements: Vec::new(),
        children: Vec::new(),
    })
}

fn parse_element(e: &BytesStart<'_>) -> Result<Element, DocumentError> {
    let kind_name = required(e, "kind")?;
    let kind = ElementKind::from_name(&kind_name).ok_or_else(|| bad(format!("unknown element kind {kind_name}")))?;
    Ok(Element {
        element_id: required(e, "element_id")?,
        kind,
        text: String::new(),
        caption: attr(e, "caption")?,
        generated_caption: attr(e, "generated_caption")?,
        page_num: number(e, "page_num")?,
        media_ref: None,
        table_html: None,
    })
}
