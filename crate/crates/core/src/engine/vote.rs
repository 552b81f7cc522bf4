use serde::{Deserialize, Serialize};

use super::exec::ExecSettings;
use super::VeracityLabel;
use crate::eval::ClaimRecord;
use crate::handlers::SubTaskHandler;

/// What decides the label when the vote is tied or every program failed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackPolicy {
    /// Verify the raw claim text with the handler.
    #[default]
    DirectVerify,
    AlwaysSupported,
    AlwaysRefuted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vote {
    Decided(VeracityLabel),
    Tie,
    NoValidVotes,
}

/// Strict majority over present verdicts; absent entries are ignored and
/// duplicates count.
pub fn majority_vote(verdicts: &[Option<VeracityLabel>]) -> Vote {
    let supported = verdicts
        .iter()
        .filter(|v| **v == Some(VeracityLabel::Supported))
        .count();
    let refuted = verdicts
        .iter()
        .filter(|v| **v == Some(VeracityLabel::Refuted))
        .count();
    match (supported, refuted) {
        (0, 0) => Vote::NoValidVotes,
        (s, r) if s > r => Vote::Decided(VeracityLabel::Supported),
        (s, r) if r > s => Vote::Decided(VeracityLabel::Refuted),
        _ => Vote::Tie,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecidedBy {
    Majority,
    FallbackTie,
    FallbackNoValidPrograms,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub label: VeracityLabel,
    pub decided_by: DecidedBy,
    pub supported_votes: usize,
    pub refuted_votes: usize,
    pub failed_programs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_anomaly: Option<String>,
}

/// Majority vote with `policy` resolving ties and all-failed batches. The
/// handler and settings are only used by [`FallbackPolicy::DirectVerify`].
pub fn aggregate(
    verdicts: &[Option<VeracityLabel>],
    claim: &ClaimRecord,
    policy: FallbackPolicy,
    handler: &dyn SubTaskHandler,
    settings: &ExecSettings<'_>,
) -> Aggregate {
    let supported_votes = verdicts
        .iter()
        .filter(|v| **v == Some(VeracityLabel::Supported))
        .count();
    let refuted_votes = verdicts
        .iter()
        .filter(|v| **v == Some(VeracityLabel::Refuted))
        .count();
    let mut out = Aggregate {
        label: VeracityLabel::Refuted,
        decided_by: DecidedBy::Majority,
        supported_votes,
        refuted_votes,
        failed_programs: verdicts.len() - supported_votes - refuted_votes,
        fallback_anomaly: None,
    };
    out.decided_by = match majority_vote(verdicts) {
        Vote::Decided(label) => {
            out.label = label;
            return out;
        }
        Vote::Tie => DecidedBy::FallbackTie,
        Vote::NoValidVotes => DecidedBy::FallbackNoValidPrograms,
    };
    match policy {
        FallbackPolicy::AlwaysSupported => out.label = VeracityLabel::Supported,
        FallbackPolicy::AlwaysRefuted => out.label = VeracityLabel::Refuted,
        FallbackPolicy::DirectVerify => {
            let (docs, _) = settings.evidence_for(&claim.text);
            match handler.verify(&claim.text, &docs) {
                Ok(outcome) => {
                    out.label = VeracityLabel::from(outcome.value);
                    out.fallback_anomaly = outcome.anomaly;
                }
                Err(e) => {
                    out.label = VeracityLabel::Refuted;
                    out.fallback_anomaly = Some(format!("direct verify failed: {e}"));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::handlers::MockHandler;
    use VeracityLabel::{Refuted as R, Supported as S};

    fn run(verdicts: &[Option<VeracityLabel>], policy: FallbackPolicy) -> Aggregate {
        let claim = ClaimRecord::new("c", "Direct claim.", R);
        let handler = MockHandler::default().with_claim("Direct claim.", false);
        aggregate(
            verdicts,
            &claim,
            policy,
            &handler,
            &ExecSettings::closed_book(),
        )
    }

    #[test]
    fn examples() {
        assert_eq!(
            run(
                &[Some(S), Some(S), Some(R), Some(R), Some(S)],
                FallbackPolicy::DirectVerify
            )
            .label,
            S
        );
        assert_eq!(run(&[Some(S)], FallbackPolicy::DirectVerify).label, S);
        let a = run(
            &[Some(S), Some(R), None, None, None],
            FallbackPolicy::DirectVerify,
        );
        assert_eq!((a.label, a.decided_by), (R, DecidedBy::FallbackTie));
        assert_eq!(a.failed_programs, 3);
    }

    #[test]
    fn all_failed_uses_fallback() {
        let a = run(&[None, None], FallbackPolicy::AlwaysSupported);
        assert_eq!(
            (a.label, a.decided_by),
            (S, DecidedBy::FallbackNoValidPrograms)
        );
    }

    #[test]
    fn unknown_claim_fallback_carries_anomaly() {
        let claim = ClaimRecord::new("c", "Something else.", S);
        let a = aggregate(
            &[None],
            &claim,
            FallbackPolicy::DirectVerify,
            &MockHandler::default(),
            &ExecSettings::closed_book(),
        );
        assert_eq!(a.label, R);
        assert!(a.fallback_anomaly.is_some());
    }
}
