//! Offline transcript verification: replay the auditor and user checks a
//! live run would perform and tabulate per-epoch verdicts.

use anyhow::{ensure, Result};
use std::collections::BTreeMap;

use ppol_core::ppol::check_epoch_ppol;
use ppol_core::pvc::{verify_lookup_inclusion, verify_pk_inclusion, AuditorState};

use crate::transcript::Transcript;
use crate::{Curve, Fr, Srs};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Role {
    Auditor,
    User(usize),
    All,
}

#[derive(Clone, Debug)]
pub struct CheckRow {
    pub epoch: u64,
    pub check: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    fn push(&mut self, epoch: u64, check: impl Into<String>, pass: bool) {
        self.rows.push(CheckRow {
            epoch,
            check: check.into(),
            pass,
        });
    }

    pub fn render(&self) -> String {
        let mut out = String::from("epoch  verdict  check\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{:>5}  {:>7}  {}\n",
                row.epoch,
                if row.pass { "ok" } else { "FAIL" },
                row.check
            ));
        }
        out
    }
}

/// Verify a transcript in the given role.
///
/// Auditor verification stops at the first failing epoch (the auditor's
/// state can only advance past accepted epochs). User verification covers
/// exactly the epochs in which that user acted.
pub fn verify_transcript(transcript: &Transcript, srs: &Srs, role: &Role) -> Result<Report> {
    ensure!(
        srs.digest() == transcript.header.srs_digest,
        "SRS digest does not match the transcript header"
    );
    let mut report = Report::default();
    match role {
        Role::Auditor => replay_auditor(transcript, srs, &mut report),
        Role::User(i) => replay_user(transcript, srs, *i, &mut report),
        Role::All => {
            replay_auditor(transcript, srs, &mut report);
            let mut indices: Vec<usize> = Vec::new();
            for record in &transcript.epochs {
                for reg in &record.registrations {
                    indices.push(reg.index);
                }
            }
            indices.sort_unstable();
            indices.dedup();
            for i in indices {
                replay_user(transcript, srs, i, &mut report);
            }
        }
    }
    Ok(report)
}

fn replay_auditor(transcript: &Transcript, srs: &Srs, report: &mut Report) {
    let mut auditor = AuditorState::<Curve>::new();
    for record in &transcript.epochs {
        let epoch = record.bundle.base.epoch;
        let verdicts = check_epoch_ppol(&auditor, &record.bundle, srs);
        report.push(epoch, "auditor/epoch-number", verdicts.base.epoch_number);
        report.push(epoch, "auditor/apk", verdicts.base.apk);
        report.push(
            epoch,
            "auditor/aggregate-signature",
            verdicts.base.aggregate_signature,
        );
        report.push(epoch, "auditor/zerocheck", verdicts.base.zerocheck);
        report.push(epoch, "auditor/append-only", verdicts.base.append);
        report.push(
            epoch,
            "auditor/key-transition",
            verdicts.base.key_transition,
        );
        report.push(epoch, "auditor/range", verdicts.range);
        report.push(epoch, "auditor/sum", verdicts.sum);
        if !verdicts.all_ok() {
            break;
        }
        auditor.commit_epoch(&record.bundle.base);
    }
}

fn replay_user(transcript: &Transcript, srs: &Srs, index: usize, report: &mut Report) {
    // Reconstruct the user's expected (value, mask) trajectory from the
    // recorded update messages.
    let mut value = Fr::from(0u64);
    let mut mask = Fr::from(0u64);
    let mut pk = None;
    for record in &transcript.epochs {
        let epoch = record.bundle.base.epoch;
        let bundle = &record.bundle.base;
        let mut acted: BTreeMap<&str, bool> = BTreeMap::new();

        for reg in &record.registrations {
            if reg.index == index {
                pk = Some(reg.pk);
                let ok = match (
                    bundle.key_inclusion.get(&(index as u64)),
                    bundle.inclusion.get(&(index as u64)),
                ) {
                    (Some(key_incl), Some(db_incl)) => verify_pk_inclusion::<Curve>(
                        index,
                        &reg.pk,
                        bundle.key_com,
                        key_incl,
                        db_incl,
                        bundle.db_com,
                        srs,
                    ),
                    _ => false,
                };
                acted.insert("key-inclusion", ok);
            }
        }
        for update in &record.updates {
            if update.index == index {
                value += update.delta;
                mask += update.epsilon;
                let ok = match bundle.inclusion.get(&(index as u64)) {
                    Some(proof) => verify_lookup_inclusion::<Curve>(
                        index,
                        value,
                        mask,
                        bundle.db_com,
                        proof,
                        srs,
                    ),
                    None => false,
                };
                acted.insert("lookup", ok);
            }
        }
        for (check, pass) in acted {
            report.push(epoch, format!("user{index}/{check}"), pass);
        }
    }
    let _ = pk;
}
