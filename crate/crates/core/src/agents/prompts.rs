//! Prompt templates with `{{placeholder}}` substitution.
//!
//! Defaults are compiled in from `prompts/`; a directory with files of the
//! same names can override any subset of them.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

/// Bumped whenever a shipped prompt file changes.
pub const PROMPT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PromptKind {
    Judge,
    Critic,
    Refiner,
    FinalQuery,
    InitialChain,
    CuratorSimilarity,
    CuratorExpansion,
    FormatReminder,
}

impl PromptKind {
    pub const ALL: [PromptKind; 8] = [
        PromptKind::Judge,
        PromptKind::Critic,
        PromptKind::Refiner,
        PromptKind::FinalQuery,
        PromptKind::InitialChain,
        PromptKind::CuratorSimilarity,
        PromptKind::CuratorExpansion,
        PromptKind::FormatReminder,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            PromptKind::Judge => "judge.txt",
            PromptKind::Critic => "critic.txt",
            PromptKind::Refiner => "refiner.txt",
            PromptKind::FinalQuery => "final_query.txt",
            PromptKind::InitialChain => "initial_chain.txt",
            PromptKind::CuratorSimilarity => "curator_similarity.txt",
            PromptKind::CuratorExpansion => "curator_expansion.txt",
            PromptKind::FormatReminder => "format_reminder.txt",
        }
    }

    fn default_text(self) -> &'static str {
        match self {
            PromptKind::Judge => include_str!("../../prompts/judge.txt"),
            PromptKind::Critic => include_str!("../../prompts/critic.txt"),
            PromptKind::Refiner => include_str!("../../prompts/refiner.txt"),
            PromptKind::FinalQuery => include_str!("../../prompts/final_query.txt"),
            PromptKind::InitialChain => include_str!("../../prompts/initial_chain.txt"),
            PromptKind::CuratorSimilarity => include_str!("../../prompts/curator_similarity.txt"),
            PromptKind::CuratorExpansion => include_str!("../../prompts/curator_expansion.txt"),
            PromptKind::FormatReminder => include_str!("../../prompts/format_reminder.txt"),
        }
    }

    /// Placeholders each template must contain.
    pub fn placeholders(self) -> &'static [&'static str] {
        match self {
            PromptKind::Judge => &["error_tree", "case"],
            PromptKind::Critic => &["examples", "case"],
            PromptKind::Refiner => &["function_chain", "progress", "question", "critique", "table"],
            PromptKind::FinalQuery => &["table", "question"],
            PromptKind::InitialChain => &["table", "question"],
            PromptKind::CuratorSimilarity => &["parent_category", "list1", "list2"],
            PromptKind::CuratorExpansion => &["error_tree", "template"],
            PromptKind::FormatReminder => &["format"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("{file}: missing placeholder {{{{{name}}}}}")]
    MissingPlaceholder { file: &'static str, name: String },
    #[error("{file}: unknown placeholder {{{{{name}}}}}")]
    UnknownPlaceholder { file: &'static str, name: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{([a-z0-9_]+)\}\}").unwrap())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    texts: BTreeMap<PromptKind, String>,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            texts: PromptKind::ALL
                .iter()
                .map(|&k| (k, k.default_text().to_string()))
                .collect(),
        }
    }
}

impl PromptSet {
    /// Loads overrides from `dir`; files that are absent keep the default.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let mut set = PromptSet::default();
        for kind in PromptKind::ALL {
            let path = dir.as_ref().join(kind.file_name());
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| PromptError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            set.set(kind, text)?;
        }
        Ok(set)
    }

    /// Replaces one template after checking its placeholders.
    pub fn set(&mut self, kind: PromptKind, text: String) -> Result<(), PromptError> {
        check_placeholders(kind, &text)?;
        self.texts.insert(kind, text);
        Ok(())
    }

    pub fn text(&self, kind: PromptKind) -> &str {
        &self.texts[&kind]
    }

    /// Substitutes every `{{name}}` in one pass; substituted values are not
    /// rescanned. Trailing newlines of the template are dropped.
    pub fn render(&self, kind: PromptKind, values: &[(&str, &str)]) -> String {
        let text = self.text(kind);
        let out = placeholder_re().replace_all(text, |caps: &regex::Captures<'_>| {
            let name = &caps[1];
            values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| v.to_string())
                .unwrap_or_else(|| panic!("no value supplied for {{{{{name}}}}} in {}", kind.file_name()))
        });
        out.trim_end_matches('\n').to_string()
    }
}

fn check_placeholders(kind: PromptKind, text: &str) -> Result<(), PromptError> {
    let found: Vec<&str> = placeholder_re()
        .captures_iter(text)
        .map(|c| c.get(1).unwrap().as_str())
        .collect();
    for name in kind.placeholders() {
        if !found.contains(name) {
            return Err(PromptError::MissingPlaceholder {
                file: kind.file_name(),
                name: name.to_string(),
            });
        }
    }
    if let Some(extra) = found.iter().find(|n| !kind.placeholders().contains(n)) {
        return Err(PromptError::UnknownPlaceholder {
            file: kind.file_name(),
            name: extra.to_string(),
        });
    }
    Ok(())
}
