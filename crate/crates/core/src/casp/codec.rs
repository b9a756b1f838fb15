use std::collections::HashMap;

use thiserror::Error;

use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("unknown label {0}")]
    UnknownLabel(Label),
    #[error("unknown label code {0}")]
    UnknownCode(i64),
}

/// Injective numbering of labels. Codes start at 1 in registration order;
/// 0 stands for "no label".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelCodec {
    labels: Vec<Label>,
    codes: HashMap<Label, i64>,
}

impl LabelCodec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `label` if needed and returns its code.
    pub fn register(&mut self, label: &Label) -> i64 {
        if let Some(&c) = self.codes.get(label) {
            return c;
        }
        self.labels.push(label.clone());
        let code = self.labels.len() as i64;
        self.codes.insert(label.clone(), code);
        code
    }

    pub fn label_code(&self, label: &Label) -> Result<i64, CodecError> {
        self.codes
            .get(label)
            .copied()
            .ok_or_else(|| CodecError::UnknownLabel(label.clone()))
    }

    pub fn code_label(&self, code: i64) -> Result<&Label, CodecError> {
        usize::try_from(code)
            .ok()
            .and_then(|c| c.checked_sub(1))
            .and_then(|i| self.labels.get(i))
            .ok_or(CodecError::UnknownCode(code))
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.codes.contains_key(label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Registered labels in code order.
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}
