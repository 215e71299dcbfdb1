// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

/// A 1-based position in an RTL source file.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSite {
    pub file: String,
    pub line: u32,
    pub col: u32,
}

impl SourceSite {
    pub fn new(file: impl Into<String>, line: u32, col: u32) -> Self {
        debug_assert!(line >= 1 && col >= 1);
        SourceSite {
            file: file.into(),
            line,
            col,
        }
    }
}

impl fmt::Display for SourceSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}
