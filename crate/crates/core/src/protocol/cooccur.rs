use serde::{Deserialize, Serialize};

use super::ProtocolError;

/// A category label with the caption keywords that indicate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordGroup {
    pub label: String,
    pub keywords: Vec<String>,
}

impl KeywordGroup {
    pub fn new(label: impl Into<String>, keywords: &[&str]) -> Self {
        Self {
            label: label.into(),
            keywords: keywords.iter().map(|k| (*k).to_owned()).collect(),
        }
    }

    fn matches(&self, lowered_caption: &str) -> bool {
        self.keywords
            .iter()
            .any(|k| lowered_caption.contains(&k.to_lowercase()))
    }
}

/// Foreground × background caption counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoOccurrence {
    pub foreground_labels: Vec<String>,
    pub background_labels: Vec<String>,
    /// `counts[f][b]`.
    pub counts: Vec<Vec<usize>>,
}

impl CoOccurrence {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

/// Counts captions mentioning at least one keyword of a foreground group and
/// one of a background group (case-insensitive substring match).
pub fn co_occurrence<S: AsRef<str>>(
    captions: &[S],
    foreground: &[KeywordGroup],
    background: &[KeywordGroup],
) -> Result<CoOccurrence, ProtocolError> {
    if let Some(g) = foreground.iter().chain(background).find(|g| g.keywords.is_empty()) {
        return Err(ProtocolError::EmptyKeywords(g.label.clone()));
    }
    let mut counts = vec![vec![0usize; background.len()]; foreground.len()];
    for caption in captions {
        let lowered = caption.as_ref().to_lowercase();
        let bg_hits: Vec<bool> = background.iter().map(|g| g.matches(&lowered)).collect();
        if !bg_hits.iter().any(|&b| b) {
            continue;
        }
        for (f, g) in foreground.iter().enumerate() {
            if g.matches(&lowered) {
                for (b, &hit) in bg_hits.iter().enumerate() {
                    if hit {
                        counts[f][b] += 1;
                    }
                }
            }
        }
    }
    Ok(CoOccurrence {
        foreground_labels: foreground.iter().map(|g| g.label.clone()).collect(),
        background_labels: background.iter().map(|g| g.label.clone()).collect(),
        counts,
    })
}
