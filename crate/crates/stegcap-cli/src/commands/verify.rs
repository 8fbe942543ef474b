//! `stegcap verify`: audits the configured code's stegotext distribution
//! against the covertext law, exactly when the block is small enough.

use crate::commands::codec::{handle_from_config, sim_failure};
use crate::config::Config;
use crate::runio::Run;
use crate::{Common, Failure};
use clap::Args;
use stegcap_core::wardensim::{exact_stego_distribution, sampled_stego_distribution};

#[derive(Args)]
pub struct VerifyCmd {
    #[command(flatten)]
    pub common: Common,
    /// Monte Carlo estimate instead of exact enumeration; the result is
    /// an estimate, never a proof of security
    #[arg(long)]
    sampled: bool,
    /// Sample count for --sampled
    #[arg(long)]
    samples: Option<u64>,
}

pub fn run(cmd: VerifyCmd) -> Result<(), Failure> {
    let cfg = cmd.common.load()?;
    let seed = cmd.common.resolve_seed(&cfg)?;
    cmd.common.configure_threads();
    let handle = handle_from_config(&cfg, seed)?;

    let (report, note) = if cmd.sampled {
        let samples = cmd
            .samples
            .or_else(|| cfg.warden.as_ref().and_then(|w| w.samples))
            .unwrap_or(100_000);
        let report =
            sampled_stego_distribution(&handle, samples, seed).map_err(sim_failure)?;
        (report, Some("sampled, not a proof"))
    } else {
        (exact_stego_distribution(&handle).map_err(sim_failure)?, None)
    };

    let mut json = serde_json::to_value(&report)
        .map_err(|e| Failure::config(format!("cannot serialize the report: {e}")))?;
    if let Some(note) = note {
        json.as_object_mut()
            .expect("report serializes to an object")
            .insert("note".into(), note.into());
    }

    let effective = Config {
        seed: Some(seed),
        ..cfg.clone()
    };
    let mut run = Run::start(&cmd.common, "verify", &effective, seed)?;
    run.write_json("security_report.json", &json)?;
    run.finish()?;

    if let Some(note) = note {
        println!(
            "sampled over {} draws ({note}): tv = {:.6}, max gap = {:.2e}",
            report.samples.unwrap_or(0),
            report.tv_distance,
            report.max_abs_gap,
        );
        return Ok(());
    }
    println!(
        "exact N={}: tv = {:.2e}, max gap = {:.2e}",
        report.n, report.tv_distance, report.max_abs_gap,
    );
    if report.tv_distance > 1e-12 {
        return Err(Failure::Security(format!(
            "stegotext law deviates from the covertext law: tv = {}",
            report.tv_distance
        )));
    }
    Ok(())
}
