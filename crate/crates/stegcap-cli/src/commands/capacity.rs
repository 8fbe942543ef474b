//! `stegcap capacity`: one game value or a budget sweep, in six flavors.

use crate::config::{Config, GameSection, SweepVar};
use crate::runio::Run;
use crate::{display_digits, Common, Failure};
use clap::Args;
use serde_json::json;
use stegcap_core::channels::{DistortionMatrix, Pmf};
use stegcap_core::gamesolver::{
    capacity_active, capacity_binary_hamming, capacity_no_cover, capacity_passive,
    capacity_pubwm, verify_no_loss_cyclic, GameConfig, SolverError,
};

#[derive(Args)]
#[command(group = clap::ArgGroup::new("mode").required(true).multiple(false))]
pub struct CapacityCmd {
    #[command(flatten)]
    pub common: Common,
    /// Marginal-preserving game against the worst feasible attack
    #[arg(long, group = "mode")]
    active: bool,
    /// Watching-only warden; the stegotext is forwarded unchanged
    #[arg(long, group = "mode")]
    passive: bool,
    /// Marginal-free watermarking game
    #[arg(long, group = "mode")]
    pubwm: bool,
    /// Binary Hamming closed form, no solver
    #[arg(long = "binary-closed-form", group = "mode")]
    binary_closed_form: bool,
    /// Keyed-noise baseline with no covertext to hide in
    #[arg(long = "no-cover", group = "mode")]
    no_cover: bool,
    /// Marginal-free vs marginal-preserving vs shift-restricted triple
    /// on a circulant instance
    #[arg(long = "verify-cyclic", group = "mode")]
    verify_cyclic: bool,
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

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Active,
    Passive,
    Pubwm,
    ClosedForm,
    NoCover,
    VerifyCyclic,
}

impl Mode {
    fn of(cmd: &CapacityCmd) -> Mode {
        if cmd.active {
            Mode::Active
        } else if cmd.passive {
            Mode::Passive
        } else if cmd.pubwm {
            Mode::Pubwm
        } else if cmd.binary_closed_form {
            Mode::ClosedForm
        } else if cmd.no_cover {
            Mode::NoCover
        } else {
            Mode::VerifyCyclic
        }
    }

    fn name(self) -> &'static str {
        match self {
            Mode::Active => "active",
            Mode::Passive => "passive",
            Mode::Pubwm => "pubwm",
            Mode::ClosedForm => "binary-closed-form",
            Mode::NoCover => "no-cover",
            Mode::VerifyCyclic => "verify-cyclic",
        }
    }
}

pub fn solver_failure(e: SolverError) -> Failure {
    Failure::config(e.to_string())
}

struct Point {
    d1: f64,
    d2: f64,
    value: f64,
    certificate_gap: Option<f64>,
    converged: Option<bool>,
}

fn solve_point(
    mode: Mode,
    cfg: &Config,
    section: &GameSection,
    seed: u64,
    d1: f64,
    d2: f64,
) -> Result<(Point, serde_json::Value), Failure> {
    let tol = section.tol.unwrap_or(1e-3);
    let game = |p_s: Pmf, d: DistortionMatrix| {
        GameConfig::new(p_s, d, d1, d2, section.l.unwrap_or(2))
            .with_tol(tol)
            .with_multistarts(section.multistarts.unwrap_or(16))
            .with_seed(seed)
    };
    match mode {
        Mode::Active | Mode::Passive | Mode::Pubwm => {
            let res = match mode {
                Mode::Active => capacity_active(&game(cfg.source()?, cfg.distortion()?)),
                Mode::Passive => capacity_passive(&cfg.source()?, &cfg.distortion()?, d1),
                _ => capacity_pubwm(&game(cfg.source()?, cfg.distortion()?)),
            }
            .map_err(solver_failure)?;
            let point = Point {
                d1,
                d2,
                value: res.value,
                certificate_gap: Some(res.certificate_gap),
                converged: Some(res.converged),
            };
            let json = serde_json::to_value(&res)
                .map_err(|e| Failure::config(format!("cannot serialize the result: {e}")))?;
            Ok((point, json))
        }
        Mode::ClosedForm => {
            let value = capacity_binary_hamming(d1, d2).map_err(solver_failure)?;
            Ok((
                Point {
                    d1,
                    d2,
                    value,
                    certificate_gap: None,
                    converged: None,
                },
                json!({"d1": d1, "d2": d2, "value": value}),
            ))
        }
        Mode::NoCover => {
            let value = capacity_no_cover(&cfg.source()?, &cfg.distortion()?, d2)
                .map_err(solver_failure)?;
            Ok((
                Point {
                    d1,
                    d2,
                    value,
                    certificate_gap: None,
                    converged: None,
                },
                json!({"d1": d1, "d2": d2, "value": value}),
            ))
        }
        Mode::VerifyCyclic => {
            let d = cfg.distortion()?;
            let report =
                verify_no_loss_cyclic(d.alphabet_size(), &d, d1, d2, section.l.unwrap_or(2))
                    .map_err(solver_failure)?;
            let point = Point {
                d1,
                d2,
                value: report.steg,
                certificate_gap: Some((report.pubwm - report.steg).abs()),
                converged: Some(report.passed),
            };
            let json = serde_json::to_value(&report)
                .map_err(|e| Failure::config(format!("cannot serialize the report: {e}")))?;
            Ok((point, json))
        }
    }
}

pub fn run(cmd: CapacityCmd) -> Result<(), Failure> {
    let cfg = cmd.common.load()?;
    let seed = cmd.common.resolve_seed(&cfg)?;
    cmd.common.configure_threads();
    let mode = Mode::of(&cmd);

    let mut section = cfg.capacity.clone().unwrap_or_default();
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
    let tol = section.tol.unwrap_or(1e-3);
    let digits = display_digits(tol);

    // compute everything up front so a failing run leaves no files
    let fixed_d1 = section.d1;
    let fixed_d2 = section.d2.unwrap_or(0.0);
    let mut points = Vec::new();
    let mut single_json = None;
    if let Some(sweep) = &section.sweep {
        if sweep.steps == 0 || sweep.to < sweep.from {
            return Err(Failure::config("sweep needs steps >= 1 and to >= from"));
        }
        let h = if sweep.steps == 1 {
            0.0
        } else {
            (sweep.to - sweep.from) / (sweep.steps - 1) as f64
        };
        for i in 0..sweep.steps {
            let v = sweep.from + h * i as f64;
            let (d1, d2) = match sweep.over {
                SweepVar::D1 => (v, fixed_d2),
                SweepVar::D2 => (
                    fixed_d1.ok_or_else(|| {
                        Failure::config("a d2 sweep needs a fixed d1 in the capacity section")
                    })?,
                    v,
                ),
            };
            points.push(solve_point(mode, &cfg, &section, seed, d1, d2)?.0);
        }
    } else {
        let d1 = fixed_d1
            .ok_or_else(|| Failure::config("capacity needs d1 (config section or --d1)"))?;
        let (point, json) = solve_point(mode, &cfg, &section, seed, d1, fixed_d2)?;
        single_json = Some(json);
        points.push(point);
    }

    let effective = Config {
        seed: Some(seed),
        capacity: Some(section.clone()),
        ..cfg.clone()
    };
    let mut run = Run::start(&cmd.common, &format!("capacity --{}", mode.name()), &effective, seed)?;
    if let Some(json) = &single_json {
        run.write_json("capacity.json", json)?;
        let p = &points[0];
        match p.converged {
            Some(ok) => println!(
                "{} capacity = {:.digits$} (gap {:.1e}, {})",
                mode.name(),
                p.value,
                p.certificate_gap.unwrap_or(0.0),
                if ok { "converged" } else { "NOT CONVERGED" },
            ),
            None => println!("{} capacity = {:.digits$}", mode.name(), p.value),
        }
    } else {
        let rows = points.iter().map(|p| {
            let mut row = vec![
                format!("{}", p.d1),
                format!("{}", p.d2),
                format!("{}", p.value),
            ];
            if mode != Mode::ClosedForm && mode != Mode::NoCover {
                row.push(format!("{}", p.certificate_gap.unwrap_or(0.0)));
                row.push(format!("{}", p.converged.unwrap_or(true)));
            }
            row
        });
        let header = if mode == Mode::ClosedForm || mode == Mode::NoCover {
            "d1,d2,value"
        } else {
            "d1,d2,value,certificate_gap,converged"
        };
        run.write_csv("capacity_sweep.csv", header, rows)?;
        println!(
            "{} sweep: {} points, values {:.digits$} .. {:.digits$}",
            mode.name(),
            points.len(),
            points.first().map(|p| p.value).unwrap_or(0.0),
            points.last().map(|p| p.value).unwrap_or(0.0),
        );
    }
    run.finish()?;

    if points.iter().any(|p| p.converged == Some(false)) {
        return Err(Failure::NotConverged(
            "solver finished without certifying the tolerance; outputs are written and flagged"
                .into(),
        ));
    }
    Ok(())
}
