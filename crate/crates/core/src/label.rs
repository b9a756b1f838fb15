use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lex::is_identifier;

/// Name of an extension point. Shared by host programs (`extend{L}`) and
/// controller placements (`@L:{...}`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid label {0:?}: expected [A-Za-z_][A-Za-z0-9_]*")]
pub struct InvalidLabel(pub String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self, InvalidLabel> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(Label(name))
        } else {
            Err(InvalidLabel(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Label {
    type Err = InvalidLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
