use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// How repeated (boilerplate) sentences are down-weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoilerplateScheme {
    /// `1 / (1 + ln df)`
    Idf,
    /// `1 / df`
    #[default]
    Lidf,
    /// Sentence length in characters.
    Length,
    None,
}

impl BoilerplateScheme {
    pub fn uses_df(self) -> bool {
        matches!(self, BoilerplateScheme::Idf | BoilerplateScheme::Lidf)
    }
}

impl fmt::Display for BoilerplateScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoilerplateScheme::Idf => "idf",
            BoilerplateScheme::Lidf => "lidf",
            BoilerplateScheme::Length => "length",
            BoilerplateScheme::None => "none",
        })
    }
}

impl FromStr for BoilerplateScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "idf" => Ok(BoilerplateScheme::Idf),
            "lidf" => Ok(BoilerplateScheme::Lidf),
            "length" => Ok(BoilerplateScheme::Length),
            "none" => Ok(BoilerplateScheme::None),
            other => Err(Error::Invalid(format!(
                "unknown boilerplate scheme {other:?}"
            ))),
        }
    }
}

/// Per-webdomain document frequency of each (normalized) sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoilerplateTable {
    pub df: HashMap<String, usize>,
}

impl BoilerplateTable {
    pub fn df(&self, sentence: &str) -> Option<usize> {
        self.df.get(&sentence_key(sentence)).copied()
    }
}

/// Whitespace runs collapsed to one space, ends trimmed, case kept.
pub fn sentence_key(sentence: &str) -> String {
    sentence.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Count, for every sentence, how many of `docs` contain it at least once.
pub fn build_boilerplate_table<'a>(
    docs: impl IntoIterator<Item = &'a Document>,
) -> BoilerplateTable {
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in docs {
        let unique: HashSet<String> = doc.sentences.iter().map(|s| sentence_key(s)).collect();
        for key in unique {
            *df.entry(key).or_insert(0) += 1;
        }
    }
    BoilerplateTable { df }
}

pub fn boilerplate_weight(
    sentence: &str,
    table: &BoilerplateTable,
    scheme: BoilerplateScheme,
) -> Result<f64> {
    let df = || {
        table.df(sentence).ok_or_else(|| Error::Missing {
            what: "document frequency",
            id: sentence.to_string(),
        })
    };
    Ok(match scheme {
        BoilerplateScheme::Idf => 1.0 / (1.0 + (df()? as f64).ln()),
        BoilerplateScheme::Lidf => 1.0 / df()? as f64,
        BoilerplateScheme::Length => sentence.chars().count() as f64,
        BoilerplateScheme::None => 1.0,
    })
}
