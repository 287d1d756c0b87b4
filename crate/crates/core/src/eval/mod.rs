//! Answer extraction, rule-based scoring and judge-model scoring.

mod extract;
mod judge;
mod score;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clients::{ClientError, PolicyClient};
use crate::prompts::PromptSet;

pub use extract::{extract_answer, extract_answer_rule, Extraction, ExtractionMethod};
pub use judge::{judge_score, parse_verdict, JudgeVerdict};
pub use score::{normalize_text, parse_number, rule_score, split_list, GoldAnswer, GoldType, GoldValue, ItemScore};

/// One line of a gold file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub question: String,
    pub answer: Value,
    #[serde(rename = "type")]
    pub kind: GoldType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalInput {
    pub id: String,
    pub question: String,
    pub response: String,
    pub gold: GoldAnswer,
    /// Gold answer as text, shown to the judge.
    pub gold_text: String,
}

/// Pairs predictions with golds by id when every prediction has one, else
/// by line order. Errors name the 1-based line at fault.
pub fn pair_records(golds: &[GoldRecord], preds: &[PredictionRecord]) -> Result<Vec<EvalInput>, (usize, String)> {
    let typed = golds
        .iter()
        .enumerate()
        .map(|(i, g)| GoldAnswer::from_typed(g.kind, &g.answer, g.precision).map_err(|e| (i + 1, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let gold_text = |g: &GoldRecord| match &g.answer {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().filter_map(Value::as_str).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    };
    let make = |gi: usize, p: &PredictionRecord, id: String| EvalInput {
        id,
        question: golds[gi].question.clone(),
        response: p.response.clone(),
        gold: typed[gi].clone(),
        gold_text: gold_text(&golds[gi]),
    };

    if !preds.is_empty() && preds.iter().all(|p| p.id.is_some()) {
        let by_id: BTreeMap<&str, usize> = golds
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.id.as_deref().map(|id| (id, i)))
            .collect();
        preds
            .iter()
            .enumerate()
            .map(|(pi, p)| {
                let id = p.id.clone().unwrap_or_default();
                by_id
                    .get(id.as_str())
                    .map(|&gi| make(gi, p, id.clone()))
                    .ok_or((pi + 1, format!("no gold record with id `{id}`")))
            })
            .collect()
    } else {
        if !preds.is_empty() && preds.len() != golds.len() {
            return Err((
                preds.len().min(golds.len()) + 1,
                format!("{} predictions but {} gold records, and predictions carry no ids", preds.len(), golds.len()),
            ));
        }
        Ok(preds
            .iter()
            .enumerate()
            .map(|(i, p)| make(i, p, golds[i].id.clone().unwrap_or_else(|| (i + 1).to_string())))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub id: String,
    pub extracted: String,
    pub extraction: ExtractionMethod,
    pub correct: bool,
    pub partial_f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<JudgeVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub acc: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lasj: Option<f64>,
    /// Judge replies that matched no verdict word.
    pub judge_unparsed: usize,
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub aggregate: Aggregate,
    pub items: Vec<ScoredItem>,
}

/// Mean that does not depend on input order: values are summed in sorted
/// order.
fn mean(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn aggregate(items: &[ScoredItem]) -> Aggregate {
    let judged: Vec<f64> = items
        .iter()
        .filter_map(|i| i.judge.as_ref())
        .map(|j| if j.correct { 1.0 } else { 0.0 })
        .collect();
    let lasj = (!items.is_empty() && judged.len() == items.len()).then(|| mean(judged));
    Aggregate {
        count: items.len(),
        acc: mean(items.iter().map(|i| if i.correct { 1.0 } else { 0.0 }).collect()),
        f1: mean(items.iter().map(|i| i.partial_f1).collect()),
        lasj,
        judge_unparsed: items.iter().filter(|i| i.judge.as_ref().is_some_and(|j| !j.parsed)).count(),
        empty: items.is_empty(),
    }
}

#[derive(Clone, Copy)]
pub struct EvalOptions<'a> {
    pub extractor: Option<&'a dyn PolicyClient>,
    pub judge: Option<&'a dyn PolicyClient>,
    pub prompts: &'a PromptSet,
}

/// Scores every input in order. A failing judge aborts the run.
pub fn evaluate(inputs: &[EvalInput], options: EvalOptions<'_>) -> Result<ScoreReport, ClientError> {
    let mut items = Vec::with_capacity(inputs.len());
    for input in inputs {
        let extraction = extract_answer(&input.question, &input.response, options.extractor, &options.prompts.extract);
        let score = rule_score(&extraction.text, &input.gold);
        let judge = match options.judge {
            Some(j) => Some(judge_score(&input.question, &input.gold_text, &input.response, j, &options.prompts.judge)?),
            None => None,
        };
        items.push(ScoredItem {
            id: input.id.clone(),
            extracted: extraction.text,
            extraction: extraction.method,
            correct: score.correct,
            partial_f1: score.partial_f1,
            judge,
        });
    }
    Ok(ScoreReport {
        aggregate: aggregate(&items),
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clients::ScriptedClient;
    use serde_json::json;

    fn item(correct: bool, f1: f64) -> ScoredItem {
        ScoredItem {
            id: String::new(),
            extracted: String::new(),
            extraction: ExtractionMethod::Rule,
            correct,
            partial_f1: f1,
            judge: None,
        }
    }

    #[test]
    fn aggregate_means() {
        let empty = aggregate(&[]);
        assert!(empty.empty && empty.acc == 0.0 && empty.f1 == 0.0 && empty.lasj.is_none());
        assert_eq!(aggregate(&[item(true, 1.0), item(false, 0.0)]).acc, 0.5);
        assert_eq!(aggregate(&[item(true, 1.0), item(false, 0.5), item(false, 0.0)]).f1, 0.5);
    }

    #[test]
    fn pairing() {
        let golds = vec![
            GoldRecord { id: Some("a".into()), question: "q1".into(), answer: json!(0.105), kind: GoldType::Number, precision: Some(3) },
            GoldRecord { id: Some("b".into()), question: "q2".into(), answer: json!(["A", "B"]), kind: GoldType::List, precision: None },
        ];
        let preds = vec![PredictionRecord { id: Some("b".into()), response: "A and C".into() }];
        let inputs = pair_records(&golds, &preds).unwrap();
        assert_eq!(inputs[0].gold_text, "A, B");
        let unnamed = vec![PredictionRecord { id: None, response: "x".into() }];
        assert_eq!(pair_records(&golds, &unnamed).unwrap_err().0, 2);
        assert!(pair_records(&golds, &[]).unwrap().is_empty());
        let bad = vec![GoldRecord { id: None, question: "q".into(), answer: json!("x"), kind: GoldType::Integer, precision: None }];
        assert_eq!(pair_records(&bad, &[]).unwrap_err().0, 1);
    }

    #[test]
    fn evaluate_with_judge() {
        let golds = vec![GoldRecord { id: None, question: "ratio?".into(), answer: json!(0.105), kind: GoldType::Number, precision: Some(3) }];
        let preds = vec![PredictionRecord { id: None, response: "Rounded to three decimal places, the ratio is **0.105** (or 10.5%).".into() }];
        let inputs = pair_records(&golds, &preds).unwrap();
        let judge = ScriptedClient::ordered("j", ["CORRECT"]);
        let prompts = PromptSet::default();
        let report = evaluate(&inputs, EvalOptions { extractor: None, judge: Some(&judge), prompts: &prompts }).unwrap();
        assert_eq!(report.items[0].extracted, "0.105");
        assert_eq!(report.aggregate.acc, 1.0);
        assert_eq!(report.aggregate.lasj, Some(1.0));
    }
}
