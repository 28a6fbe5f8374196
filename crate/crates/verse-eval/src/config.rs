//! Run configuration (TOML) and chapter selection syntax.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::providers::{ConfigError, ProviderConfig};

/// `all`, or a comma-separated list of chapters and inclusive ranges such as
/// `3,5,7-12,15-17`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ChapterSelection {
    #[default]
    All,
    Only(BTreeSet<u32>),
}

impl ChapterSelection {
    pub fn contains(&self, chapter: u32) -> bool {
        match self {
            ChapterSelection::All => true,
            ChapterSelection::Only(set) => set.contains(&chapter),
        }
    }

    /// The selected chapters among `available`, plus the explicitly selected
    /// chapters that are not available.
    pub fn resolve(&self, available: &[u32]) -> (Vec<u32>, Vec<u32>) {
        match self {
            ChapterSelection::All => (available.to_vec(), Vec::new()),
            ChapterSelection::Only(set) => {
                let (hit, miss): (Vec<u32>, Vec<u32>) =
                    set.iter().partition(|c| available.contains(c));
                (hit, miss)
            }
        }
    }
}

impl FromStr for ChapterSelection {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(ChapterSelection::All);
        }
        let bad = |part: &str| ConfigError(format!("invalid chapter selection element {part:?}"));
        let number = |part: &str| match part.trim().parse::<u32>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(bad(part)),
        };
        let mut set = BTreeSet::new();
        for part in s.split(',') {
            match part.split_once('-') {
                Some((lo, hi)) => {
                    let (lo, hi) = (number(lo)?, number(hi)?);
                    if lo > hi {
                        return Err(bad(part));
                    }
                    set.extend(lo..=hi);
                }
                None => {
                    set.insert(number(part)?);
                }
            }
        }
        Ok(ChapterSelection::Only(set))
    }
}

impl fmt::Display for ChapterSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChapterSelection::All => f.write_str("all"),
            ChapterSelection::Only(set) => {
                let parts: Vec<String> = set.iter().map(u32::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Parses `A:B` into a corpus pair.
pub fn parse_pair(s: &str) -> Result<(String, String), ConfigError> {
    match s.split_once(':') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
            Ok((a.trim().to_string(), b.trim().to_string()))
        }
        _ => Err(ConfigError(format!("pair {s:?} must look like A:B"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub fn all() -> Self {
        Self {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

impl FromStr for Formats {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut f = Formats::default();
        for part in s.split(',').map(str::trim) {
            match part {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return Err(ConfigError(format!("unknown output format {other:?}"))),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    /// Directory holding one sub-directory per corpus.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TextSection {
    pub stoplist: Option<PathBuf>,
    pub keep_stopwords: bool,
    pub top_k: usize,
}

impl Default for TextSection {
    fn default() -> Self {
        Self {
            stoplist: None,
            keep_stopwords: false,
            top_k: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SentimentSection {
    pub threshold: f64,
    /// Leave verses where both label sets are empty out of chapter means.
    pub skip_empty_pairs: bool,
    pub provider: ProviderConfig,
}

impl Default for SentimentSection {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            skip_empty_pairs: false,
            provider: ProviderConfig::mock(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SemanticSection {
    pub extremes_k: usize,
    pub provider: ProviderConfig,
}

impl Default for SemanticSection {
    fn default() -> Self {
        Self {
            extremes_k: 5,
            provider: ProviderConfig::mock(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Pairs as `A:B`.
    pub pairs: Vec<String>,
    pub chapters: String,
    pub output: PathBuf,
    pub formats: Vec<String>,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            chapters: "all".into(),
            output: PathBuf::from("report"),
            formats: vec!["csv".into(), "json".into(), "svg".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub corpus: CorpusSection,
    pub text: TextSection,
    pub sentiment: SentimentSection,
    pub semantic: SemanticSection,
    pub report: ReportSection,
}

impl RunConfig {
    /// Reads a TOML file; relative paths inside it are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = config.corpus.dir.as_mut() {
            rebase(p);
        }
        if let Some(p) = config.text.stoplist.as_mut() {
            rebase(p);
        }
        if let Some(p) = config.sentiment.provider.path.as_mut() {
            rebase(p);
        }
        if let Some(p) = config.semantic.provider.path.as_mut() {
            rebase(p);
        }
        rebase(&mut config.report.output);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sentiment.provider.validate()?;
        self.semantic.provider.validate()?;
        if !(self.sentiment.threshold > 0.0 && self.sentiment.threshold < 1.0) {
            return Err(ConfigError(
                "sentiment.threshold must lie strictly between 0 and 1".into(),
            ));
        }
        self.report.chapters.parse::<ChapterSelection>()?;
        self.report.formats.join(",").parse::<Formats>()?;
        for p in &self.report.pairs {
            parse_pair(p)?;
        }
        Ok(())
    }
}
