//! Verification reports: the verdict of a class sweep with enough witness
//! material to reproduce any collision by hand.

use serde::Serialize;
use serde_json::Value;

use hyperdeck_core::reconstruction::{CollisionReport, ContextKind};

use crate::document::HypergraphDocument;

#[derive(Debug, Serialize)]
pub struct ReportMember {
    /// SHA-256 of the member's canonical code, hex.
    pub code_digest: String,
    pub witness: HypergraphDocument,
}

#[derive(Debug, Serialize)]
pub struct ReportGroup {
    /// SHA-256 of the shared deck bytes, hex.
    pub deck_digest: String,
    pub members: Vec<ReportMember>,
}

/// JSON summary of one command run. Everything except `elapsed_ms` is
/// deterministic for fixed inputs.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub parameters: Value,
    pub tool_version: String,
    pub class_size: usize,
    pub collision_groups: Vec<ReportGroup>,
    pub elapsed_ms: u128,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn kind_name(kind: ContextKind) -> &'static str {
    match kind {
        ContextKind::Rc => "rc",
        ContextKind::Drc => "drc",
        ContextKind::LabeledRc => "labeled",
    }
}

pub fn from_collision_report(command: &str, parameters: Value, r: &CollisionReport) -> Report {
    let collision_groups = r
        .groups
        .iter()
        .map(|group| ReportGroup {
            deck_digest: hex(&group.deck_digest),
            members: group
                .members
                .iter()
                .map(|member| {
                    let mut witness = HypergraphDocument::from_structured(&member.structured);
                    if let Some(labeling) = &member.labeling {
                        witness.labeling = Some(labeling.labels().to_vec());
                    }
                    ReportMember {
                        code_digest: hex(&member.code.digest()),
                        witness,
                    }
                })
                .collect(),
        })
        .collect();
    Report {
        command: command.to_string(),
        parameters,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        class_size: r.class_size,
        collision_groups,
        elapsed_ms: r.elapsed.as_millis(),
    }
}

pub fn to_json_string(report: &Report) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    text.push('\n');
    text
}
