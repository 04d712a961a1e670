//! Seeded synthetic incident corpus.
//!
//! Generates tickets drawn from a fixed set of root-cause families, each
//! with its own service and vocabulary. Within a family, the root cause is
//! word-for-word identical while titles and summaries vary (region, node,
//! error codes), so retrieval quality is directly measurable: pulling a
//! same-family example gives a near-perfect score, a cross-family example a
//! poor one. A sprinkling of incidents carries an injected stack-trace line
//! and Base64 blob to exercise the cleaning stage end to end.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{Duration, TimeZone, Utc};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::incident::{Incident, Status};
use crate::randutil::uniform_index;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SynthError {
    #[error("synthetic corpus supports at most {available} families, requested {requested}")]
    TooManyFamilies { requested: usize, available: usize },
    #[error("synthetic corpus needs at least one family and one incident")]
    EmptyRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    pub incidents: usize,
    pub families: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            incidents: 200,
            families: 20,
            seed: 7,
        }
    }
}

struct Family {
    service: &'static str,
    headline: &'static str,
    symptom: &'static str,
    detail: &'static str,
    root_cause: &'static str,
}

const FAMILIES: [Family; 20] = [
    Family {
        service: "payments-api",
        headline: "checkout requests failing with 502",
        symptom: "Checkout requests against the payments gateway returned 502 responses for a large share of buyers.",
        detail: "Connection wait times climbed past {ms} milliseconds on pool node {node}.",
        root_cause: "Connection pool capacity in the payments database was sized for half of observed peak traffic. Checkout transactions starved waiting for free connections.",
    },
    Family {
        service: "identity-login",
        headline: "sign-in loop for federated accounts",
        symptom: "Federated users were stuck in a sign-in loop and never reached the portal.",
        detail: "Token validation rejected audience claim {code} issued by the upstream identity provider.",
        root_cause: "An expired signing key in the identity federation metadata invalidated fresh login tokens. Key rollover had silently stopped after an earlier metadata cleanup.",
    },
    Family {
        service: "edge-gateway",
        headline: "tls handshake failures at the edge",
        symptom: "External clients saw tls handshake failures when connecting through the edge gateway.",
        detail: "Handshake alerts spiked on listener {node} shortly after midnight.",
        root_cause: "The tls certificate on the edge gateway expired before rotation ran. Automatic renewal had been disabled during a listener migration.",
    },
    Family {
        service: "stream-broker",
        headline: "broker partitions going offline",
        symptom: "Stream broker partitions dropped offline and consumer lag grew without bound.",
        detail: "Broker {node} logged disk usage at {pct} percent on its data volume.",
        root_cause: "Log segment compaction stalled on oversized segments and filled the broker data volumes. Retention settings never accounted for replicated partition copies.",
    },
    Family {
        service: "search-cluster",
        headline: "query latency regression",
        symptom: "Search queries slowed from tens of milliseconds to multiple seconds across the cluster.",
        detail: "Shard relocation storms were observed on data node {node} with queue depth {code}.",
        root_cause: "A runaway shard rebalancing loop kept moving hot shards between the same two data nodes. The allocator weighed disk watermarks incorrectly after a version upgrade.",
    },
    Family {
        service: "dns-zone",
        headline: "name resolution failures",
        symptom: "Internal name resolution failed intermittently for service discovery lookups.",
        detail: "Resolver {node} answered SERVFAIL for roughly {pct} percent of lookups.",
        root_cause: "A malformed zone transfer left secondary resolvers serving a truncated record set. Zone serial numbers were never bumped so caches refused the corrected data.",
    },
    Family {
        service: "report-runner",
        headline: "nightly report jobs stuck",
        symptom: "Nightly reporting jobs hung at the export stage and never produced output files.",
        detail: "Job worker {node} blocked on a file lock held for {ms} milliseconds and counting.",
        root_cause: "A leaked advisory file lock from a crashed exporter blocked every subsequent report job. The lock had no expiry so workers queued behind it indefinitely.",
    },
    Family {
        service: "container-platform",
        headline: "pods crash looping after rollout",
        symptom: "Application pods entered crash loops minutes after the morning rollout.",
        detail: "Liveness probes failed with exit code {code} on node pool {node}.",
        root_cause: "The rollout shipped a runtime image missing a shared native library. Health probes killed each pod before the fallback loader could finish.",
    },
    Family {
        service: "billing-ledger",
        headline: "duplicate invoice postings",
        symptom: "Customers received duplicate invoice postings for the same billing period.",
        detail: "Ledger writer {node} retried batch {code} after a timeout that had actually committed.",
        root_cause: "The ledger writer retried committed batches because acknowledgements raced the timeout. Idempotency keys were generated per attempt instead of per batch.",
    },
    Family {
        service: "mobile-push",
        headline: "notification delivery stalled",
        symptom: "Push notifications queued for hours before reaching devices.",
        detail: "Dispatcher {node} held {code} thousand undelivered messages in its outbound buffer.",
        root_cause: "A throttling rule meant for one misbehaving application was applied platform wide. The dispatcher honored the global limit and let the outbound buffer grow.",
    },
    Family {
        service: "object-store",
        headline: "upload throttling errors",
        symptom: "Bulk uploads to the object store failed with throttling errors.",
        detail: "Gateway {node} rejected {pct} percent of multipart uploads.",
        root_cause: "A tenant quota reset job wrote zero instead of the configured ceiling for every bucket. The admission layer then throttled all multipart traffic as over quota.",
    },
    Family {
        service: "feature-flags",
        headline: "stale flag evaluations",
        symptom: "Clients evaluated feature flags against week-old targeting rules.",
        detail: "Flag snapshot {code} was served from replica {node} long past its refresh window.",
        root_cause: "The flag delivery pipeline silently stopped publishing snapshots after a schema change. Replicas kept serving the last snapshot they had downloaded.",
    },
    Family {
        service: "vm-fleet",
        headline: "host reboots during patching",
        symptom: "Virtual machine hosts rebooted unexpectedly during the patching window.",
        detail: "Host {node} reported watchdog resets with fault {code}.",
        root_cause: "A firmware patch reset the watchdog timer interval to its factory value. Hosts under normal load tripped the shortened watchdog and rebooted.",
    },
    Family {
        service: "email-relay",
        headline: "outbound mail bouncing",
        symptom: "Outbound mail bounced with reputation warnings from major receivers.",
        detail: "Relay {node} saw bounce rates near {pct} percent for marketing traffic.",
        root_cause: "A misrouted marketing campaign went out through the transactional relay pool. Receiving providers rate limited the shared addresses for volume anomalies.",
    },
    Family {
        service: "metrics-pipeline",
        headline: "monitoring gaps and false alerts",
        symptom: "Dashboards showed gaps and alerting fired on missing rather than bad data.",
        detail: "Aggregator {node} dropped {code} thousand samples per minute at the ingest stage.",
        root_cause: "An ingest buffer was resized far below the documented minimum during cost tuning. Aggregators shed samples under entirely ordinary load.",
    },
    Family {
        service: "scheduler-core",
        headline: "cron tasks double firing",
        symptom: "Scheduled tasks executed twice within the same minute across regions.",
        detail: "Scheduler {node} and its standby both claimed leadership for window {code}.",
        root_cause: "Leader election split after a network blip because lease renewal used wall clock time. Both schedulers held what each believed was a valid lease.",
    },
    Family {
        service: "cdn-edge",
        headline: "stale assets after deploy",
        symptom: "Users kept receiving previous-release assets long after the deploy finished.",
        detail: "Edge cache {node} reported hit ratios above {pct} percent for purged paths.",
        root_cause: "The purge request fanned out with the previous deployment identifier. Edge caches dutifully kept the assets the purge never named.",
    },
    Family {
        service: "ml-inference",
        headline: "prediction timeouts under load",
        symptom: "Model predictions timed out once afternoon traffic ramped up.",
        detail: "Inference worker {node} queued {code} requests behind a single warm replica.",
        root_cause: "Autoscaling was keyed to cpu while the workload was memory bound. New replicas never launched and the warm one absorbed all traffic.",
    },
    Family {
        service: "data-warehouse",
        headline: "etl loads missing partitions",
        symptom: "Morning warehouse loads finished without the newest partitions.",
        detail: "Loader {node} skipped manifest {code} after a checksum mismatch.",
        root_cause: "An upstream export began compressing manifests without updating their checksums. Loaders treated the mismatches as corruption and skipped the partitions.",
    },
    Family {
        service: "api-quota",
        headline: "burst traffic rejected",
        symptom: "Legitimate burst traffic was rejected with quota exceeded responses.",
        detail: "Front door {node} enforced a ceiling of {code} requests per second.",
        root_cause: "Quota ceilings were copied from the staging environment during a config sync. Production traffic exceeded the staging numbers within minutes.",
    },
];

const REGIONS: [&str; 8] = [
    "east-us",
    "west-europe",
    "southeast-asia",
    "north-europe",
    "central-india",
    "brazil-south",
    "uk-south",
    "japan-east",
];

/// Deterministically generate `config.incidents` tickets across
/// `config.families` root-cause families.
pub fn generate_synthetic_corpus(config: &SynthConfig) -> Result<Vec<Incident>, SynthError> {
    if config.families == 0 || config.incidents == 0 {
        return Err(SynthError::EmptyRequest);
    }
    if config.families > FAMILIES.len() {
        return Err(SynthError::TooManyFamilies {
            requested: config.families,
            available: FAMILIES.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let base = Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap();
    let mut incidents = Vec::with_capacity(config.incidents);
    for i in 0..config.incidents {
        let family = &FAMILIES[i % config.families];
        // Draw in a fixed order so the stream stays aligned per incident.
        let region = REGIONS[uniform_index(&mut rng, REGIONS.len())];
        let node = uniform_index(&mut rng, 48) + 1;
        let code = 40_000 + uniform_index(&mut rng, 10_000);
        let pct = 55 + uniform_index(&mut rng, 45);
        let ms = 500 + uniform_index(&mut rng, 9_000);

        let detail = family
            .detail
            .replace("{node}", &node.to_string())
            .replace("{code}", &code.to_string())
            .replace("{pct}", &pct.to_string())
            .replace("{ms}", &ms.to_string());
        let mut summary = alloc::format!(
            "{} {} On-call acknowledged the page and began triage.",
            family.symptom,
            detail
        );
        if i % 13 == 5 {
            // Pasted noise that the cleaning stage removes.
            let blob: String = core::iter::repeat("QUJD").take(150).collect();
            summary.push_str(&alloc::format!(
                "\nat com.platform.Worker.process(Worker.java:{node})\n{blob}"
            ));
        }

        incidents.push(Incident {
            id: alloc::format!("INC-{:05}", i + 1),
            title: alloc::format!("{}: {} in {}", family.service, family.headline, region),
            summary_raw: summary,
            root_cause_raw: family.root_cause.to_string(),
            summary_clean: None,
            root_cause_clean: None,
            summary_short: None,
            root_cause_short: None,
            severity: (i % 5) as u8,
            status: if i % 2 == 0 {
                Status::Resolved
            } else {
                Status::Mitigated
            },
            created_at: base + Duration::hours(i as i64),
            owning_service: Some(family.service.to_string()),
        });
    }
    Ok(incidents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incident::{filter_incidents, FilterSpec};

    #[test]
    fn generation_is_seed_deterministic() {
        let config = SynthConfig::default();
        let a = generate_synthetic_corpus(&config).unwrap();
        let b = generate_synthetic_corpus(&config).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_corpus(&SynthConfig {
            seed: 8,
            ..config
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn corpus_survives_the_default_filter() {
        let corpus = generate_synthetic_corpus(&SynthConfig::default()).unwrap();
        assert_eq!(corpus.len(), 200);
        let kept = filter_incidents(&corpus, &FilterSpec::default());
        assert_eq!(kept.len(), corpus.len());
    }

    #[test]
    fn ids_are_unique_and_families_cycle() {
        let corpus = generate_synthetic_corpus(&SynthConfig::default()).unwrap();
        let mut ids: Vec<&str> = corpus.iter().map(|i| i.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), corpus.len());
        assert_eq!(corpus[0].owning_service, corpus[20].owning_service);
        assert_ne!(corpus[0].owning_service, corpus[1].owning_service);
        assert_eq!(corpus[0].root_cause_raw, corpus[20].root_cause_raw);
    }

    #[test]
    fn injected_noise_is_cleanable() {
        let corpus = generate_synthetic_corpus(&SynthConfig::default()).unwrap();
        let noisy = &corpus[5];
        assert!(noisy.summary_raw.contains("Worker.java"));
        let (cleaned, report) = crate::cleanse::clean_incident(noisy);
        assert_eq!(report.stack_lines_removed, 1);
        assert_eq!(report.images_removed, 1);
        assert!(!cleaned.summary_clean.as_ref().unwrap().contains("Worker.java"));
    }

    #[test]
    fn rejects_more_families_than_templates() {
        let err = generate_synthetic_corpus(&SynthConfig {
            incidents: 10,
            families: 21,
            seed: 0,
        })
        .unwrap_err();
        assert!(matches!(err, SynthError::TooManyFamilies { .. }));
    }
}
