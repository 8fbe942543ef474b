//! `stegcap exponent`: reliability-exponent curve over a rate grid.

use crate::commands::capacity::solver_failure;
use crate::config::Config;
use crate::runio::Run;
use crate::{display_digits, Common, Failure};
use clap::Args;
use serde_json::json;
use stegcap_core::gamesolver::{exponent_active, exponent_passive, GameConfig};

#[derive(Args)]
#[command(group = clap::ArgGroup::new("mode").required(true).multiple(false))]
pub struct ExponentCmd {
    #[command(flatten)]
    pub common: Common,
    /// Worst-case attack inside the declared budget at every rate
    #[arg(long, group = "mode")]
    active: bool,
    /// Watching-only warden
    #[arg(long, group = "mode")]
    passive: bool,
    /// Embedding budget override
    #[arg(long)]
    d1: Option<f64>,
    /// Attack budget override
    #[arg(long)]
    d2: Option<f64>,
    /// Auxiliary alphabet size override
    #[arg(long)]
    l: Option<usize>,
    /// Certificate tolerance override, bits
    #[arg(long)]
    tol: Option<f64>,
    /// Solver restart count override
    #[arg(long)]
    multistarts: Option<usize>,
}

pub fn run(cmd: ExponentCmd) -> Result<(), Failure> {
    let cfg = cmd.common.load()?;
    let seed = cmd.common.resolve_seed(&cfg)?;
    cmd.common.configure_threads();

    let mut section = cfg.exponent.clone().unwrap_or_default();
    if cmd.d1.is_some() {
        section.d1 = cmd.d1;
    }
    if cmd.d2.is_some() {
        section.d2 = cmd.d2;
    }
    if cmd.l.is_some() {
        section.l = cmd.l;
    }
    if cmd.tol.is_some() {
        section.tol = cmd.tol;
    }
    if cmd.multistarts.is_some() {
        section.multistarts = cmd.multistarts;
    }

    let d1 = section
        .d1
        .ok_or_else(|| Failure::config("exponent needs d1 (config section or --d1)"))?;
    let rates = section
        .rates
        .as_ref()
        .ok_or_else(|| Failure::config("exponent needs a \"rates\" grid in the config"))?
        .points()?;
    let tol = section.tol.unwrap_or(1e-3);
    let digits = display_digits(tol);
    let p_s = cfg.source()?;
    let d = cfg.distortion()?;

    let mode = if cmd.active { "active" } else { "passive" };
    let mut curve = Vec::with_capacity(rates.len());
    if cmd.active {
        let d2 = section.d2.unwrap_or(0.0);
        let game = GameConfig::new(p_s, d, d1, d2, section.l.unwrap_or(2))
            .with_tol(tol)
            .with_multistarts(section.multistarts.unwrap_or(12))
            .with_seed(seed);
        for &r in &rates {
            curve.push(exponent_active(&game, r).map_err(solver_failure)?);
        }
    } else {
        for &r in &rates {
            curve.push(exponent_passive(&p_s, &d, d1, r).map_err(solver_failure)?);
        }
    }

    // first grid rate at which the exponent is zero at tolerance
    let zero_rate = rates
        .iter()
        .zip(&curve)
        .find(|(_, &e)| e <= tol)
        .map(|(&r, _)| r);
    let summary = json!({
        "mode": mode,
        "d1": d1,
        "d2": section.d2,
        "rates": rates.len(),
        "tol": tol,
        "zero_rate": zero_rate,
    });

    let effective = Config {
        seed: Some(seed),
        exponent: Some(section.clone()),
        ..cfg.clone()
    };
    let mut run = Run::start(&cmd.common, &format!("exponent --{mode}"), &effective, seed)?;
    run.write_csv(
        "exponent_curve.csv",
        "rate,exponent",
        rates
            .iter()
            .zip(&curve)
            .map(|(r, e)| vec![format!("{r}"), format!("{e}")]),
    )?;
    run.write_json("exponent_summary.json", &summary)?;
    run.finish()?;

    match zero_rate {
        Some(r) => println!(
            "{mode} exponent over {} rates: {:.digits$} at R={}, zero from R={r}",
            rates.len(),
            curve[0],
            rates[0],
        ),
        None => println!(
            "{mode} exponent over {} rates: positive everywhere on the grid",
            rates.len(),
        ),
    }
    Ok(())
}
