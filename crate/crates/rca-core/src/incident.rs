//! Incident records, corpus filtering, and chronological splits.
//!
//! A corpus is a flat list of [`Incident`] values parsed from newline-delimited
//! JSON. Filtering removes tickets that cannot serve as retrieval examples
//! (wrong status, drill/test noise, missing fields), and splitting assigns the
//! survivors to retrieval / validation / test sets in creation order.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Lifecycle status of a ticket. Anything other than resolved or mitigated
/// collapses to [`Status::Other`] at parse time so that unknown states are
/// kept loadable and excluded by the default filter instead of rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Resolved,
    Mitigated,
    Other,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Resolved => "Resolved",
            Status::Mitigated => "Mitigated",
            Status::Other => "Other",
        }
    }
}

impl Serialize for Status {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Status {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Ok(match raw.as_str() {
            "Resolved" => Status::Resolved,
            "Mitigated" => Status::Mitigated,
            _ => Status::Other,
        })
    }
}

/// One incident ticket.
///
/// `summary_raw` / `root_cause_raw` hold the text as filed (serialized as
/// `summary` / `root_cause`). The `*_clean` fields are set by the cleansing
/// pass and the `*_short` fields by provider summarization; earlier stages
/// are never overwritten.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub id: String,
    pub title: String,
    #[serde(rename = "summary")]
    pub summary_raw: String,
    #[serde(rename = "root_cause")]
    pub root_cause_raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_clean: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_cause_clean: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_short: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_cause_short: Option<String>,
    pub severity: u8,
    pub status: Status,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owning_service: Option<String>,
}

impl Incident {
    /// Parse one newline-delimited JSON record. Rejects records whose `id`
    /// is empty; all other validity rules are the filter's job.
    pub fn parse_record(line: &str) -> Result<Incident, CorpusError> {
        let incident: Incident =
            serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord(e.to_string()))?;
        if incident.id.is_empty() {
            return Err(CorpusError::MalformedRecord("empty id".to_string()));
        }
        Ok(incident)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("incident serializes")
    }
}

/// Fields the filter may require to be non-blank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RequiredField {
    Title,
    Summary,
    RootCause,
}

/// Corpus filter: status allow-list, severity cap, title keyword exclusion,
/// and required non-blank fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub allowed_statuses: BTreeSet<Status>,
    pub max_severity: u8,
    /// Lowercase substrings; a title containing any of them is dropped.
    pub excluded_title_keywords: Vec<String>,
    pub require_fields: Vec<RequiredField>,
}

impl Default for FilterSpec {
    fn default() -> Self {
        let mut allowed_statuses = BTreeSet::new();
        allowed_statuses.insert(Status::Resolved);
        allowed_statuses.insert(Status::Mitigated);
        FilterSpec {
            allowed_statuses,
            max_severity: 4,
            excluded_title_keywords: ["ignore", "test", "dummy"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            require_fields: alloc::vec![
                RequiredField::Title,
                RequiredField::Summary,
                RequiredField::RootCause,
            ],
        }
    }
}

impl FilterSpec {
    /// Keyword entries must be non-empty; they are matched lowercase.
    pub fn validate(&self) -> Result<(), CorpusError> {
        for kw in &self.excluded_title_keywords {
            if kw.is_empty() {
                return Err(CorpusError::EmptyKeyword);
            }
        }
        Ok(())
    }

    fn retains(&self, incident: &Incident) -> bool {
        if !self.allowed_statuses.contains(&incident.status) {
            return false;
        }
        if incident.severity > self.max_severity {
            return false;
        }
        for field in &self.require_fields {
            let value = match field {
                RequiredField::Title => &incident.title,
                RequiredField::Summary => &incident.summary_raw,
                RequiredField::RootCause => &incident.root_cause_raw,
            };
            if value.trim().is_empty() {
                return false;
            }
        }
        let title = incident.title.to_lowercase();
        !self
            .excluded_title_keywords
            .iter()
            .any(|kw| title.contains(kw.as_str()))
    }
}

/// Chronologically contiguous retrieval / validation / test assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSplits {
    pub retrieval: Vec<Incident>,
    pub validation: Vec<Incident>,
    pub test: Vec<Incident>,
}

/// Requested split sizes, in assignment order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub retrieval: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.retrieval + self.validation + self.test
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CorpusError {
    #[error("malformed incident record: {0}")]
    MalformedRecord(String),
    #[error("filter keyword entries must be non-empty")]
    EmptyKeyword,
    #[error("split sizes total {requested} but only {available} incidents are available")]
    SplitSizesExceedCorpus { requested: usize, available: usize },
}

/// Keep exactly the incidents the spec retains. Already-filtered input passes
/// through unchanged, so filtering is idempotent.
pub fn filter_incidents(incidents: &[Incident], spec: &FilterSpec) -> Vec<Incident> {
    incidents
        .iter()
        .filter(|incident| spec.retains(incident))
        .cloned()
        .collect()
}

/// Sort by `created_at` ascending (ties by `id` ascending) and assign the
/// first block to retrieval, the next to validation, the last to test.
pub fn split_corpus(incidents: &[Incident], sizes: SplitSizes) -> Result<CorpusSplits, CorpusError> {
    if sizes.total() > incidents.len() {
        return Err(CorpusError::SplitSizesExceedCorpus {
            requested: sizes.total(),
            available: incidents.len(),
        });
    }
    let mut ordered: Vec<Incident> = incidents.to_vec();
    ordered.sort_by(|a, b| {
        a.created_at
            .cmp(&b.created_at)
            .then_with(|| a.id.cmp(&b.id))
    });
    let validation_start = sizes.retrieval;
    let test_start = validation_start + sizes.validation;
    let test_end = test_start + sizes.test;
    Ok(CorpusSplits {
        retrieval: ordered[..validation_start].to_vec(),
        validation: ordered[validation_start..test_start].to_vec(),
        test: ordered[test_start..test_end].to_vec(),
    })
}


#[cfg(test)]
mod tests {
    use super::testutil::sample;
    use super::*;

    #[test]
    fn parses_record_with_unknown_status_as_other() {
        let line = r#"{"id":"I1","title":"T","summary":"S","root_cause":"R","severity":2,"status":"Active","created_at":"2021-01-05T10:00:00Z"}"#;
        let incident = Incident::parse_record(line).unwrap();
        assert_eq!(incident.status, Status::Other);
        assert_eq!(incident.severity, 2);
    }

    #[test]
    fn rejects_record_missing_root_cause() {
        let line = r#"{"id":"I1","title":"T","summary":"S","severity":2,"status":"Resolved","created_at":"2021-01-05T10:00:00Z"}"#;
        assert!(Incident::parse_record(line).is_err());
    }

    #[test]
    fn rejects_empty_id() {
        let line = r#"{"id":"","title":"T","summary":"S","root_cause":"R","severity":2,"status":"Resolved","created_at":"2021-01-05T10:00:00Z"}"#;
        assert!(matches!(
            Incident::parse_record(line),
            Err(CorpusError::MalformedRecord(_))
        ));
    }

    #[test]
    fn filter_excludes_active_status() {
        let mut incident = sample("I1", 1);
        incident.status = Status::Other;
        assert!(filter_incidents(&[incident], &FilterSpec::default()).is_empty());
    }

    #[test]
    fn filter_excludes_keyword_titles_case_insensitively() {
        let mut incident = sample("I1", 1);
        incident.title = "Dummy alert for drill".to_string();
        assert!(filter_incidents(&[incident], &FilterSpec::default()).is_empty());
    }

    #[test]
    fn filter_retains_valid_incident() {
        let incident = sample("I1", 1);
        let kept = filter_incidents(&[incident.clone()], &FilterSpec::default());
        assert_eq!(kept, alloc::vec![incident]);
    }

    #[test]
    fn filter_requires_non_blank_fields() {
        let mut incident = sample("I1", 1);
        incident.root_cause_raw = "   ".to_string();
        assert!(filter_incidents(&[incident], &FilterSpec::default()).is_empty());
    }

    #[test]
    fn filter_is_idempotent() {
        let incidents: Vec<Incident> = (1..=6)
            .map(|i| {
                let mut inc = sample(&alloc::format!("I{i}"), i);
                if i % 2 == 0 {
                    inc.title = alloc::format!("test drill {i}");
                }
                inc
            })
            .collect();
        let spec = FilterSpec::default();
        let once = filter_incidents(&incidents, &spec);
        let twice = filter_incidents(&once, &spec);
        assert_eq!(once, twice);
    }

    #[test]
    fn validate_rejects_empty_keyword() {
        let spec = FilterSpec {
            excluded_title_keywords: alloc::vec![String::new()],
            ..FilterSpec::default()
        };
        assert_eq!(spec.validate(), Err(CorpusError::EmptyKeyword));
    }

    #[test]
    fn split_assigns_contiguous_blocks_by_date() {
        // Deliberately shuffled creation order.
        let incidents: Vec<Incident> = [5, 2, 9, 1, 7, 3, 8, 4, 10, 6]
            .iter()
            .map(|d| sample(&alloc::format!("I{d:02}"), *d))
            .collect();
        let splits = split_corpus(
            &incidents,
            SplitSizes {
                retrieval: 8,
                validation: 1,
                test: 1,
            },
        )
        .unwrap();
        assert_eq!(splits.retrieval.len(), 8);
        assert_eq!(splits.validation[0].id, "I09");
        assert_eq!(splits.test[0].id, "I10");
    }

    #[test]
    fn split_breaks_created_at_ties_by_id() {
        let mut incidents = alloc::vec![sample("B", 1), sample("A", 1), sample("C", 1)];
        incidents.rotate_left(1);
        let splits = split_corpus(
            &incidents,
            SplitSizes {
                retrieval: 1,
                validation: 1,
                test: 1,
            },
        )
        .unwrap();
        assert_eq!(splits.retrieval[0].id, "A");
        assert_eq!(splits.validation[0].id, "B");
        assert_eq!(splits.test[0].id, "C");
    }

    #[test]
    fn split_rejects_oversized_request() {
        let incidents: Vec<Incident> = (1..=5).map(|d| sample(&alloc::format!("I{d}"), d)).collect();
        let err = split_corpus(
            &incidents,
            SplitSizes {
                retrieval: 8,
                validation: 1,
                test: 1,
            },
        )
        .unwrap_err();
        assert_eq!(
            err,
            CorpusError::SplitSizesExceedCorpus {
                requested: 10,
                available: 5
            }
        );
    }
}
