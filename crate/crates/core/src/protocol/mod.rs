//! Prompt grammar, category grid, dataset manifest rules and caption
//! co-occurrence counting.

mod cooccur;
mod manifest;

pub use cooccur::{co_occurrence, CoOccurrence, KeywordGroup};
pub use manifest::{
    read_manifest, read_manifest_file, validate_manifest, write_manifest, DatasetManifest, ManifestEntry,
    ManifestFailure, ManifestReport, ManifestTargets, ManifestWarning, Split,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("unknown foreground category {0:?}")]
    UnknownForeground(String),
    #[error("unknown background category {0:?}")]
    UnknownBackground(String),
    #[error("unknown split {0:?}")]
    UnknownSplit(String),
    #[error("vehicle foregrounds are never paired with a traffic background")]
    ForbiddenPairing,
    #[error("background text must be empty exactly when the background category is none")]
    BackgroundTextMismatch,
    #[error("foreground text is empty")]
    EmptyForeground,
    #[error("keyword group {0:?} has no keywords")]
    EmptyKeywords(String),
    #[error("manifest row {row}: {message}")]
    Csv { row: u64, message: String },
    #[error("manifest I/O: {0}")]
    Io(String),
}

macro_rules! category_enum {
    ($(#[$meta:meta])* $name:ident, $err:ident, [$($variant:ident => $text:literal),+ $(,)?]) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ProtocolError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(ProtocolError::$err(other.to_owned())),
                }
            }
        }
    };
}

category_enum!(
    /// Action-based foreground sound source class.
    ForegroundCategory, UnknownForeground, [
        Animal => "animal",
        Vehicle => "vehicle",
        Human => "human",
        Alarm => "alarm",
        Tool => "tool",
        Entrance => "entrance",
    ]
);

category_enum!(
    /// Ambient background class; `None` means a clean foreground-only scene.
    BackgroundCategory, UnknownBackground, [
        Crowd => "crowd",
        Traffic => "traffic",
        Water => "water",
        Birds => "birds",
        None => "none",
    ]
);

/// Whether a foreground/background pair is admissible.
pub fn pairing_allowed(fg: ForegroundCategory, bg: BackgroundCategory) -> bool {
    !(fg == ForegroundCategory::Vehicle && bg == BackgroundCategory::Traffic)
}

/// Every admissible (foreground, background) pair, foreground-major.
pub fn category_grid() -> Vec<(ForegroundCategory, BackgroundCategory)> {
    ForegroundCategory::ALL
        .iter()
        .flat_map(|&fg| BackgroundCategory::ALL.iter().map(move |&bg| (fg, bg)))
        .filter(|&(fg, bg)| pairing_allowed(fg, bg))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub prompt_id: String,
    pub foreground_text: String,
    pub foreground_category: ForegroundCategory,
    pub background_category: BackgroundCategory,
    pub background_text: String,
}

impl PromptSpec {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.foreground_text.trim().is_empty() {
            return Err(ProtocolError::EmptyForeground);
        }
        if !pairing_allowed(self.foreground_category, self.background_category) {
            return Err(ProtocolError::ForbiddenPairing);
        }
        let no_bg = self.background_category == BackgroundCategory::None;
        if no_bg != self.background_text.trim().is_empty() {
            return Err(ProtocolError::BackgroundTextMismatch);
        }
        Ok(())
    }

    pub fn has_background(&self) -> bool {
        self.background_category != BackgroundCategory::None
    }
}

/// `"<fg> with <bg> in the background"`, or the bare foreground text when
/// there is no background.
pub fn render_prompt(spec: &PromptSpec) -> Result<String, ProtocolError> {
    spec.validate()?;
    let fg = spec.foreground_text.trim();
    if spec.has_background() {
        Ok(format!("{fg} with {} in the background", spec.background_text.trim()))
    } else {
        Ok(fg.to_owned())
    }
}
