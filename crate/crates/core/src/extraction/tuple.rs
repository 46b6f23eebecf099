use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const QUOTES: &[char] = &[
    '\'', '"', '`', '\u{2018}', '\u{2019}', '\u{201c}', '\u{201d}',
];

fn canonical(field: &str) -> String {
    field
        .trim_matches(|c: char| c.is_whitespace() || QUOTES.contains(&c))
        .to_lowercase()
}

/// One atomic claim: the thing being described and what is said about it,
/// e.g. `(shoes, comfortable)`.
///
/// Both fields are stored trimmed of whitespace and quote characters and
/// lower-cased.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTuple")]
pub struct FactTuple {
    subject: String,
    description: String,
}

#[derive(Deserialize)]
struct RawTuple {
    subject: String,
    description: String,
}

impl TryFrom<RawTuple> for FactTuple {
    type Error = Error;

    fn try_from(raw: RawTuple) -> Result<Self> {
        FactTuple::new(&raw.subject, &raw.description)
    }
}

impl FactTuple {
    pub fn new(subject: &str, description: &str) -> Result<Self> {
        let subject = canonical(subject);
        let description = canonical(description);
        if subject.is_empty() || description.is_empty() {
            return Err(Error::invalid(format!(
                "fact tuple fields must be non-empty (got {subject:?}, {description:?})"
            )));
        }
        Ok(FactTuple {
            subject,
            description,
        })
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// True when either field has more than one word, which the extraction
    /// prompt asks the model to avoid.
    pub fn is_multi_word(&self) -> bool {
        self.subject.split_whitespace().count() > 1
            || self.description.split_whitespace().count() > 1
    }
}

impl std::fmt::Display for FactTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.subject, self.description)
    }
}

/// Fact tuples from one or more documents, in extraction order.
///
/// Duplicates are kept: a claim repeated across reviews carries more weight
/// in coverage.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactSet {
    tuples: Vec<FactTuple>,
    sources: Vec<usize>,
    documents: usize,
}

#[derive(Serialize, Deserialize)]
struct SourcedTuple {
    subject: String,
    description: String,
    source: usize,
}

#[derive(Serialize, Deserialize)]
struct FactSetRepr {
    tuples: Vec<SourcedTuple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    documents: Option<usize>,
}

impl FactSet {
    pub fn new(documents: usize) -> Self {
        FactSet {
            tuples: Vec::new(),
            sources: Vec::new(),
            documents,
        }
    }

    /// A fact set from a single document (e.g. a summary).
    pub fn from_tuples(tuples: Vec<FactTuple>) -> Self {
        let sources = vec![0; tuples.len()];
        FactSet {
            tuples,
            sources,
            documents: 1,
        }
    }

    pub fn push(&mut self, tuple: FactTuple, source: usize) -> Result<()> {
        if source >= self.documents {
            return Err(Error::invalid(format!(
                "source index {source} out of bounds for {} documents",
                self.documents
            )));
        }
        self.tuples.push(tuple);
        self.sources.push(source);
        Ok(())
    }

    /// Appends all tuples of one document, tagging them with `source`.
    pub fn extend_from_document(
        &mut self,
        source: usize,
        tuples: impl IntoIterator<Item = FactTuple>,
    ) -> Result<()> {
        for t in tuples {
            self.push(t, source)?;
        }
        Ok(())
    }

    pub fn tuples(&self) -> &[FactTuple] {
        &self.tuples
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn documents(&self) -> usize {
        self.documents
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FactTuple, usize)> {
        self.tuples.iter().zip(self.sources.iter().copied())
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("fact set serializes")
    }
}

impl Serialize for FactSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FactSetRepr {
            tuples: self
                .iter()
                .map(|(t, source)| SourcedTuple {
                    subject: t.subject.clone(),
                    description: t.description.clone(),
                    source,
                })
                .collect(),
            documents: Some(self.documents),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FactSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FactSetRepr::deserialize(deserializer)?;
        let needed = repr.tuples.iter().map(|t| t.source + 1).max().unwrap_or(0);
        let documents = repr.documents.unwrap_or(needed.max(1));
        let mut set = FactSet::new(documents);
        for t in repr.tuples {
            let tuple = FactTuple::new(&t.subject, &t.description).map_err(D::Error::custom)?;
            set.push(tuple, t.source).map_err(D::Error::custom)?;
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_case_and_quotes() {
        let t = FactTuple::new("  'Shoes' ", "\"Comfortable\"").unwrap();
        assert_eq!(t.subject(), "shoes");
        assert_eq!(t.description(), "comfortable");
        assert_eq!(t.to_string(), "(shoes, comfortable)");
    }

    #[test]
    fn rejects_empty_fields() {
        assert!(FactTuple::new("car", "  ").is_err());
        assert!(FactTuple::new("''", "fast").is_err());
    }

    #[test]
    fn multi_word_detection() {
        assert!(!FactTuple::new("car", "fast").unwrap().is_multi_word());
        assert!(FactTuple::new("car", "very fast").unwrap().is_multi_word());
    }

    #[test]
    fn provenance_bounds() {
        let mut set = FactSet::new(2);
        let t = FactTuple::new("car", "fast").unwrap();
        set.push(t.clone(), 1).unwrap();
        assert!(set.push(t, 2).is_err());
        assert_eq!(set.sources(), &[1]);
    }

    #[test]
    fn json_shape() {
        let mut set = FactSet::new(2);
        set.push(FactTuple::new("car", "bad").unwrap(), 0).unwrap();
        set.push(FactTuple::new("car", "bad").unwrap(), 1).unwrap();
        let v = set.to_json_value();
        assert_eq!(
            v,
            serde_json::json!({
                "tuples": [
                    {"subject": "car", "description": "bad", "source": 0},
                    {"subject": "car", "description": "bad", "source": 1}
                ],
                "documents": 2
            })
        );
        let back: FactSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn json_without_documents_infers_count() {
        let set: FactSet = serde_json::from_str(
            r#"{"tuples": [{"subject": "Car", "description": "fast", "source": 3}]}"#,
        )
        .unwrap();
        assert_eq!(set.documents(), 4);
        assert_eq!(set.tuples()[0].subject(), "car");
    }

    #[test]
    fn json_rejects_empty_subject() {
        let err = serde_json::from_str::<FactSet>(
            r#"{"tuples": [{"subject": "", "description": "fast", "source": 0}]}"#,
        );
        assert!(err.is_err());
    }
}
