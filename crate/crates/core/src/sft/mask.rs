use serde::{Deserialize, Serialize};

use super::{SegmentRole, TokenizerAdapter, TrainingSample};

/// One 0/1 flag per token of the sample's segments; 0 marks tokens excluded
/// from the loss. The task context is not tokenized here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossMask {
    pub token_flags: Vec<u8>,
    pub kept_count: usize,
}

impl LossMask {
    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Self {
        let token_flags: Vec<u8> = flags.into_iter().map(u8::from).collect();
        let kept_count = token_flags.iter().filter(|&&f| f == 1).count();
        LossMask { token_flags, kept_count }
    }

    pub fn len(&self) -> usize {
        self.token_flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_flags.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SftError {
    #[error("mask keeps no tokens")]
    EmptyKeptSet,
    #[error("{logprobs} log-probabilities for {flags} mask flags")]
    LengthMismatch { logprobs: usize, flags: usize },
}

/// Tokenizes each segment on its own, so no token spans two segments, and
/// flags observation tokens 0 and everything else 1.
pub fn build_loss_mask(sample: &TrainingSample, tok: &dyn TokenizerAdapter) -> LossMask {
    LossMask::from_flags(sample.segments.iter().flat_map(|s| {
        let keep = s.role != SegmentRole::Observation;
        std::iter::repeat_n(keep, tok.count(&s.text))
    }))
}

/// Mean negative log-likelihood over kept tokens.
///
/// Uses a running mean, so a constant log-probability `c` gives exactly
/// `-c` whatever the number of tokens.
pub fn masked_nll(logprobs: &[f64], mask: &LossMask) -> Result<f64, SftError> {
    if logprobs.len() != mask.token_flags.len() {
        return Err(SftError::LengthMismatch {
            logprobs: logprobs.len(),
            flags: mask.token_flags.len(),
        });
    }
    let mut mean = 0.0;
    let mut n = 0usize;
    for (&lp, &flag) in logprobs.iter().zip(&mask.token_flags) {
        if flag == 1 {
            n += 1;
            mean += (-lp - mean) / n as f64;
        }
    }
    if n == 0 {
        return Err(SftError::EmptyKeptSet);
    }
    Ok(mean)
}
