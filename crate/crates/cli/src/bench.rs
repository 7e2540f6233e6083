//! Wall-clock phase benchmarks with a fixed CSV schema:
//! `phase,wall_ms,ops_per_s,proof_bytes` (medians over the repetitions).

use anyhow::Result;
use ark_serialize::CanonicalSerialize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;
use std::time::Instant;

use ppol_core::apk::keygen;
use ppol_core::ppol::{publish_ppol, verify_epoch_ppol};
use ppol_core::pvc::{AuditorState, ProviderState, UserState};

use crate::{Curve, Fr, Srs};

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub phase: &'static str,
    pub wall_ms: f64,
    pub ops_per_s: f64,
    pub proof_bytes: usize,
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("phase,wall_ms,ops_per_s,proof_bytes\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.3},{:.2},{}\n",
            row.phase, row.wall_ms, row.ops_per_s, row.proof_bytes
        ));
    }
    out
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

/// Time the protocol phases at size n.
///
/// Registers a small cohort, runs `repetitions` epochs of `updates_per_epoch`
/// updates each and reports per-phase medians. Keygen and registration are
/// timed once (they are one-time per-user costs).
pub fn run_bench(
    n: usize,
    updates_per_epoch: usize,
    repetitions: usize,
    srs: Arc<Srs>,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut provider = ProviderState::new(Arc::clone(&srs))?;
    let mut auditor = AuditorState::<Curve>::new();
    let cohort = updates_per_epoch.clamp(1, n / 2);

    // One-time costs, measured on the first user.
    let slot = provider.next_slot().expect("empty table");
    let start = Instant::now();
    let (sk, helpers) = keygen(slot, &srs, &mut rng)?;
    let keygen_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    provider.add_pk(&helpers)?;
    let add_pk_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut users = vec![UserState::<Curve>::new(sk, slot)];
    for _ in 1..cohort {
        let slot = provider.next_slot().expect("capacity");
        let (sk, helpers) = keygen(slot, &srs, &mut rng)?;
        provider.add_pk(&helpers)?;
        users.push(UserState::new(sk, slot));
    }
    let warmup = publish_ppol(&mut provider, &mut rng)?;
    assert!(verify_epoch_ppol(&mut auditor, &warmup, &srs).all_ok());

    let mut update_ms = Vec::new();
    let mut publish_ms = Vec::new();
    let mut audit_ms = Vec::new();
    let mut lookup_ms = Vec::new();
    let mut bundle_bytes = 0usize;
    let mut updates_done = 0usize;

    for _ in 0..repetitions.max(1) {
        let epoch = provider.epoch();
        for user in users.iter_mut() {
            let delta = Fr::from(rng.gen_range(0u64..1 << 32));
            let update = user.sign(epoch, delta, &srs, &mut rng)?;
            let start = Instant::now();
            provider.update_db(&update)?;
            update_ms.push(start.elapsed().as_secs_f64() * 1e3);
            updates_done += 1;
        }

        let start = Instant::now();
        let bundle = publish_ppol(&mut provider, &mut rng)?;
        publish_ms.push(start.elapsed().as_secs_f64() * 1e3);
        bundle_bytes = bundle.compressed_size();

        let start = Instant::now();
        let verdicts = verify_epoch_ppol(&mut auditor, &bundle, &srs);
        audit_ms.push(start.elapsed().as_secs_f64() * 1e3);
        assert!(verdicts.all_ok());

        let user = &users[0];
        let proof = &bundle.base.inclusion[&(user.index as u64)];
        let start = Instant::now();
        assert!(user.verify_lookup(bundle.base.db_com, proof, &srs));
        lookup_ms.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let _ = updates_done;

    let update_median = median(update_ms);
    Ok(vec![
        BenchRow {
            phase: "keygen",
            wall_ms: keygen_ms,
            ops_per_s: 1e3 / keygen_ms,
            proof_bytes: 0,
        },
        BenchRow {
            phase: "add_pk",
            wall_ms: add_pk_ms,
            ops_per_s: 1e3 / add_pk_ms,
            proof_bytes: 0,
        },
        BenchRow {
            phase: "update_db",
            wall_ms: update_median,
            ops_per_s: 1e3 / update_median,
            proof_bytes: 0,
        },
        BenchRow {
            phase: "publish",
            wall_ms: median(publish_ms.clone()),
            ops_per_s: 1e3 / median(publish_ms),
            proof_bytes: bundle_bytes,
        },
        BenchRow {
            phase: "verify_epoch",
            wall_ms: median(audit_ms.clone()),
            ops_per_s: 1e3 / median(audit_ms),
            proof_bytes: 0,
        },
        BenchRow {
            phase: "verify_lookup",
            wall_ms: median(lookup_ms.clone()),
            ops_per_s: 1e3 / median(lookup_ms),
            proof_bytes: 0,
        },
    ])
}
