use serde_json::{json, Map, Value};

pub fn search_schema() -> Value {
    json!({
        "type": "function",
        "function": {
            "name": "search",
            "description": "Find and extract all paragraphs and sections where any of the provided search terms appear",
            "parameters": {
                "type": "object",
                "properties": {
                    "keywords": {
                        "type": "array",
                        "items": {
                            "type": "string"
                        },
                        "description": "A list of query keywords for searching"
                    }
                },
                "required": ["keywords"]
            }
        }
    })
}

pub fn read_schema() -> Value {
    json!({
        "type": "function",
        "function": {
            "name": "read",
            "description": "Read multiple sections by section IDs and extract useful information from all content contained in those sections, including both visual elements and textual elements.",
            "parameters": {
                "type": "object",
                "properties": {
                    "section_ids": {
                        "type": "array",
                        "items": {
                            "type": "string"
                        },
                        "description": "A list of section IDs to read from the document"
                    },
                    "goal": {
                        "type": "string",
                        "description": "The user goal that guides what useful information should be extracted from the selected sections"
                    }
                },
                "required": ["section_ids", "goal"]
            }
        }
    })
}

/// Both tool schemas, search first.
pub fn tool_schemas() -> Vec<Value> {
    vec![search_schema(), read_schema()]
}

/// Pretty-prints a schema with 4-space indents, keeping arrays of scalars on
/// one line. No trailing newline.
pub fn render_schema(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    match value {
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            let pad = "    ".repeat(depth + 1);
            for (i, (key, v)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, v, depth + 1);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"    ".repeat(depth));
            out.push('}');
        }
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            let inner: Vec<String> = items.iter().map(Value::to_string).collect();
            out.push('[');
            out.push_str(&inner.join(", "));
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            let pad = "    ".repeat(depth + 1);
            for (i, v) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(out, v, depth + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&"    ".repeat(depth));
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

/// The `parameters` object of a schema document.
fn parameters(schema: &Value) -> Option<&Map<String, Value>> {
    schema.pointer("/function/parameters")?.as_object()
}

/// Checks call arguments against a tool schema: object shape, required
/// fields, and declared field types. Undeclared fields are ignored.
pub fn validate_arguments(schema: &Value, arguments: &Value) -> Result<(), String> {
    let params = parameters(schema).ok_or("schema has no parameters")?;
    let args = arguments
        .as_object()
        .ok_or_else(|| format!("arguments must be a JSON object, got {}", type_name(arguments)))?;
    if let Some(required) = params.get("required").and_then(Value::as_array) {
        for field in required.iter().filter_map(Value::as_str) {
            if !args.contains_key(field) {
                return Err(format!("missing required field `{field}`"));
            }
        }
    }
    if let Some(props) = params.get("properties").and_then(Value::as_object) {
        for (name, spec) in props {
            if let Some(value) = args.get(name) {
                check_type(name, spec, value)?;
            }
        }
    }
    Ok(())
}

fn check_type(name: &str, spec: &Value, value: &Value) -> Result<(), String> {
    let expected = spec.get("type").and_then(Value::as_str).unwrap_or("");
    let ok = match expected {
        "string" => value.is_string(),
        "array" => match value.as_array() {
            Some(items) => {
                if let Some(item_spec) = spec.get("items") {
                    for (i, item) in items.iter().enumerate() {
                        check_type(&format!("{name}[{i}]"), item_spec, item)?;
                    }
                }
                true
            }
            None => false,
        },
        "object" => value.is_object(),
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "field `{name}` must be of type {expected}, got {}",
            type_name(value)
        ))
    }
}

fn type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}
