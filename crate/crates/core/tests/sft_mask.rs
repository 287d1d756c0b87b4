use docseek_core::agent::{Action, Step, Termination, Trajectory};
use docseek_core::sft::{
    build_loss_mask, build_sample, masked_nll, spans_tile, LossMask, Segment, SegmentRole, SftError, TokenizerAdapter,
    TrainingSample, WhitespaceTokenizer,
};
use docseek_core::toolkit::ToolCall;
use proptest::prelude::*;
use serde_json::json;

// Word count as the whitespace tokenizer defines it, computed without it.
fn recount(text: &str) -> usize {
    let words = text.split_whitespace().count();
    if words == 0 && !text.is_empty() {
        1
    } else {
        words
    }
}

fn arb_step() -> impl Strategy<Value = Step> {
    let text = "[a-z0-9 \n]{0,30}";
    (text, text, prop::option::of(text), 0u8..3, any::<bool>()).prop_map(|(thought, body, obs, kind, forced)| {
        let action = match kind {
            0 => Action::ToolCall(ToolCall::new("search", json!({"keywords": [body]}))),
            1 => Action::FinalAnswer { text: body },
            _ => Action::Invalid {
                reason: "no action".into(),
            },
        };
        Step {
            raw: format!("<think>{thought}</think>"),
            thought,
            observation: obs,
            forced_prompt: forced.then(|| "Answer now.".to_string()),
            action,
            warnings: vec![],
        }
    })
}

fn arb_trajectory() -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(arb_step(), 1..8).prop_map(|steps| Trajectory {
        doc_id: "d".into(),
        question: "q".into(),
        task_context: "system text that is never scored".into(),
        steps,
        terminated_by: Termination::FinalAnswer,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn flags_follow_roles(traj in arb_trajectory()) {
        let sample = build_sample(&traj);
        let mask = build_loss_mask(&sample, &WhitespaceTokenizer);
        let mut at = 0;
        for seg in &sample.segments {
            prop_assert!(spans_tile(&seg.text, &WhitespaceTokenizer.spans(&seg.text)));
            let n = recount(&seg.text);
            for &flag in &mask.token_flags[at..at + n] {
                prop_assert_eq!(flag == 0, seg.role == SegmentRole::Observation);
            }
            at += n;
        }
        prop_assert_eq!(at, mask.len());
        let kept: usize = sample
            .segments
            .iter()
            .filter(|s| s.role != SegmentRole::Observation)
            .map(|s| recount(&s.text))
            .sum();
        prop_assert_eq!(mask.kept_count, kept);
    }

    #[test]
    fn uniform_minus_one_gives_one(traj in arb_trajectory()) {
        let mask = build_loss_mask(&build_sample(&traj), &WhitespaceTokenizer);
        match masked_nll(&vec![-1.0; mask.len()], &mask) {
            Ok(v) => prop_assert!((v - 1.0).abs() <= 1e-12),
            Err(e) => {
                prop_assert_eq!(mask.kept_count, 0);
                prop_assert_eq!(e, SftError::EmptyKeptSet);
            }
        }
    }

    #[test]
    fn appended_observation_changes_nothing(traj in arb_trajectory(), extra in "[a-z ]{1,40}", lps in prop::collection::vec(-9.0f64..0.0, 400)) {
        let mut sample = build_sample(&traj);
        let before = build_loss_mask(&sample, &WhitespaceTokenizer);
        sample.segments.push(Segment { role: SegmentRole::Observation, text: extra });
        let after = build_loss_mask(&sample, &WhitespaceTokenizer);
        prop_assume!(after.len() <= lps.len());
        prop_assert_eq!(
            masked_nll(&lps[..before.len()], &before),
            masked_nll(&lps[..after.len()], &after)
        );
    }

    #[test]
    fn segments_reassemble_episode(traj in arb_trajectory()) {
        let sample = build_sample(&traj);
        let mut expected = String::new();
        for step in &traj.steps {
            expected.push_str(step.forced_prompt.as_deref().unwrap_or(""));
            expected.push_str(&docseek_core::agent::assistant_content(step));
            expected.push_str(step.observation.as_deref().unwrap_or(""));
        }
        prop_assert_eq!(sample.text(), expected);
    }
}

#[test]
fn all_zero_mask_is_rejected() {
    let sample = TrainingSample {
        task_context: String::new(),
        segments: vec![Segment {
            role: SegmentRole::Observation,
            text: "tool output only".into(),
        }],
    };
    let mask = build_loss_mask(&sample, &WhitespaceTokenizer);
    assert_eq!(mask.kept_count, 0);
    assert_eq!(masked_nll(&[-1.0; 3], &mask), Err(SftError::EmptyKeptSet));
    assert_eq!(masked_nll(&[], &LossMask::from_flags([])), Err(SftError::EmptyKeptSet));
}
