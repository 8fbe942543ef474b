//! `stegcap codec`: build the codebook container, move symbol files
//! through encode/decode, and run Monte Carlo loopbacks.

use crate::config::{parse_generator, CodecFamily, Config};
use crate::runio::{read_symbols, symbols_to_string, Run};
use crate::{Common, Failure};
use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::{Path, PathBuf};
use stegcap_core::codec::{
    build_stacked_codebook, ccc_encode, mpmi_decode, nested_decode, nested_encode,
    read_codebook, rm_decode, rm_encode, write_codebook, CodecError, NestedLinearCode,
    RmKey, StackedCodebook,
};
use stegcap_core::typestat::Sequence;
use stegcap_core::wardensim::{estimate_error_prob, CodecHandle, SimError};

#[derive(Args)]
pub struct CodecCmd {
    #[command(subcommand)]
    action: CodecAction,
}

#[derive(Subcommand)]
enum CodecAction {
    /// Optimize the per-type arrays and write the codebook container
    Build {
        #[command(flatten)]
        common: Common,
    },
    /// Embed a message into a covertext symbol file
    Encode {
        #[command(flatten)]
        common: Common,
        /// Codebook container (stacked and rm families)
        #[arg(long, value_name = "FILE")]
        codebook: Option<PathBuf>,
        /// Covertext symbol file, one digit per symbol
        #[arg(long, value_name = "FILE")]
        covertext: PathBuf,
        /// Message index to embed
        #[arg(long)]
        message: usize,
        /// Secret-key seed (rm and nested families); defaults to the run seed
        #[arg(long)]
        key_seed: Option<u64>,
    },
    /// Recover the message index from a stegotext symbol file
    Decode {
        #[command(flatten)]
        common: Common,
        /// Codebook container (stacked and rm families)
        #[arg(long, value_name = "FILE")]
        codebook: Option<PathBuf>,
        /// Stegotext symbol file
        #[arg(long, value_name = "FILE")]
        stegotext: PathBuf,
        /// Secret-key seed (rm and nested families); defaults to the run seed
        #[arg(long)]
        key_seed: Option<u64>,
    },
    /// Monte Carlo encode-attack-decode error rate for the configured code
    Loopback {
        #[command(flatten)]
        common: Common,
        /// Trial count override
        #[arg(long)]
        trials: Option<u64>,
    },
}

pub fn codec_failure(e: CodecError) -> Failure {
    Failure::codec(e.to_string())
}

pub fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Codec(inner) => Failure::codec(inner.to_string()),
        other => Failure::config(other.to_string()),
    }
}

fn family(cfg: &Config) -> Result<CodecFamily, Failure> {
    Ok(cfg
        .codec
        .as_ref()
        .ok_or_else(|| Failure::config("config needs a \"codec\" section"))?
        .family)
}

fn build_prototype(cfg: &Config, seed: u64) -> Result<StackedCodebook, Failure> {
    let params = cfg.codec_params(seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    build_stacked_codebook(&params, &mut rng)
        .map_err(|e| Failure::config(format!("cannot build the codebook: {e}")))
}

fn load_prototype(path: Option<&Path>) -> Result<StackedCodebook, Failure> {
    let path = path.ok_or_else(|| {
        Failure::config("this family reads a container; pass --codebook FILE")
    })?;
    let mut f = std::fs::File::open(path)
        .map_err(|e| Failure::config(format!("cannot open {}: {e}", path.display())))?;
    read_codebook(&mut f).map_err(codec_failure)
}

pub fn nested_code(cfg: &Config) -> Result<NestedLinearCode, Failure> {
    let codec = cfg
        .codec
        .as_ref()
        .ok_or_else(|| Failure::config("config needs a \"codec\" section"))?;
    let gen2: Vec<u64> = codec
        .gen2
        .iter()
        .map(|g| parse_generator(g, codec.n))
        .collect::<Result<_, _>>()?;
    let gen1: Vec<u64> = codec
        .gen1
        .iter()
        .map(|g| parse_generator(g, codec.n))
        .collect::<Result<_, _>>()?;
    NestedLinearCode::new(codec.n, &gen2, &gen1)
        .map_err(|e| Failure::config(format!("bad nested code: {e}")))
}

/// The configured code as a simulation handle.
pub fn handle_from_config(cfg: &Config, seed: u64) -> Result<CodecHandle, Failure> {
    match family(cfg)? {
        CodecFamily::Stacked => Ok(CodecHandle::Stacked(build_prototype(cfg, seed)?)),
        CodecFamily::Rm => Ok(CodecHandle::Rm(build_prototype(cfg, seed)?)),
        CodecFamily::Nested => Ok(CodecHandle::Nested {
            code: nested_code(cfg)?,
            p_s: cfg.source()?,
        }),
    }
}

fn rm_key(n: usize, key_seed: u64) -> RmKey {
    RmKey::random(n, &mut ChaCha8Rng::seed_from_u64(key_seed))
}

fn nested_key(code: &NestedLinearCode, key_seed: u64) -> Sequence {
    let mut rng = ChaCha8Rng::seed_from_u64(key_seed);
    code.leader(rng.gen_range(0..code.coset_leaders().len()))
}

pub fn run(cmd: CodecCmd) -> Result<(), Failure> {
    match cmd.action {
        CodecAction::Build { common } => build(common),
        CodecAction::Encode {
            common,
            codebook,
            covertext,
            message,
            key_seed,
        } => encode(common, codebook.as_deref(), &covertext, message, key_seed),
        CodecAction::Decode {
            common,
            codebook,
            stegotext,
            key_seed,
        } => decode(common, codebook.as_deref(), &stegotext, key_seed),
        CodecAction::Loopback { common, trials } => loopback(common, trials),
    }
}

fn build(common: Common) -> Result<(), Failure> {
    let cfg = common.load()?;
    let seed = common.resolve_seed(&cfg)?;
    common.configure_threads();
    match family(&cfg)? {
        CodecFamily::Nested => {
            return Err(Failure::config(
                "nested codes are defined by their generators; there is nothing to build",
            ))
        }
        CodecFamily::Stacked | CodecFamily::Rm => {}
    }
    let cb = build_prototype(&cfg, seed)?;
    let mut bytes = Vec::new();
    write_codebook(&cb, &mut bytes).map_err(codec_failure)?;

    let effective = Config {
        seed: Some(seed),
        ..cfg.clone()
    };
    let mut run = Run::start(&common, "codec build", &effective, seed)?;
    run.write_bytes("codebook.sbcb", &bytes)?;
    run.finish()?;
    println!(
        "built codebook: N={}, {} type arrays, {} messages",
        cb.params().n,
        cb.arrays().len(),
        cb.message_count(),
    );
    Ok(())
}

fn encode(
    common: Common,
    codebook: Option<&Path>,
    covertext: &Path,
    message: usize,
    key_seed: Option<u64>,
) -> Result<(), Failure> {
    let cfg = common.load()?;
    let seed = common.resolve_seed(&cfg)?;
    common.configure_threads();
    let key_seed = key_seed.unwrap_or(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (x, fallback) = match family(&cfg)? {
        CodecFamily::Stacked => {
            let cb = load_prototype(codebook)?;
            let s = read_sequence(covertext, cb.params().alphabet_size())?;
            check_message(message, cb.message_count())?;
            let (x, fallback) = ccc_encode(&s, message, &cb, &mut rng).map_err(codec_failure)?;
            (x, fallback)
        }
        CodecFamily::Rm => {
            let cb = load_prototype(codebook)?;
            let s = read_sequence(covertext, cb.params().alphabet_size())?;
            check_message(message, cb.message_count())?;
            let key = rm_key(cb.params().n, key_seed);
            let x = rm_encode(&s, message, &cb, &key, &mut rng).map_err(codec_failure)?;
            (x, false)
        }
        CodecFamily::Nested => {
            let code = nested_code(&cfg)?;
            let s = read_sequence(covertext, 2)?;
            check_message(message, code.message_count())?;
            let key = nested_key(&code, key_seed);
            let x = nested_encode(&s, message, &code, &key).map_err(codec_failure)?;
            (x, false)
        }
    };

    let effective = Config {
        seed: Some(seed),
        ..cfg.clone()
    };
    let mut run = Run::start(&common, "codec encode", &effective, seed)?;
    run.write_text("stegotext.txt", &symbols_to_string(x.symbols()))?;
    run.finish()?;
    if fallback {
        println!("encoded message {message} (no matching codeword; type-preserving fallback)");
    } else {
        println!("encoded message {message}");
    }
    Ok(())
}

fn decode(
    common: Common,
    codebook: Option<&Path>,
    stegotext: &Path,
    key_seed: Option<u64>,
) -> Result<(), Failure> {
    let cfg = common.load()?;
    let seed = common.resolve_seed(&cfg)?;
    common.configure_threads();
    let key_seed = key_seed.unwrap_or(seed);

    let message = match family(&cfg)? {
        CodecFamily::Stacked => {
            let cb = load_prototype(codebook)?;
            let y = read_sequence(stegotext, cb.params().alphabet_size())?;
            mpmi_decode(&y, &cb).map_err(codec_failure)?
        }
        CodecFamily::Rm => {
            let cb = load_prototype(codebook)?;
            let y = read_sequence(stegotext, cb.params().alphabet_size())?;
            let key = rm_key(cb.params().n, key_seed);
            rm_decode(&y, &cb, &key).map_err(codec_failure)?
        }
        CodecFamily::Nested => {
            let code = nested_code(&cfg)?;
            let y = read_sequence(stegotext, 2)?;
            let key = nested_key(&code, key_seed);
            nested_decode(&y, &code, &key).map_err(codec_failure)?
        }
    };

    let effective = Config {
        seed: Some(seed),
        ..cfg.clone()
    };
    let mut run = Run::start(&common, "codec decode", &effective, seed)?;
    run.write_json("decoded.json", &json!({ "message": message }))?;
    run.finish()?;
    println!("decoded message {message}");
    Ok(())
}

fn loopback(common: Common, trials_flag: Option<u64>) -> Result<(), Failure> {
    let cfg = common.load()?;
    let seed = common.resolve_seed(&cfg)?;
    common.configure_threads();
    let handle = handle_from_config(&cfg, seed)?;
    let warden = cfg.warden.clone().unwrap_or_else(|| {
        serde_json::from_value(json!({})).expect("empty warden section is valid")
    });
    let spec = warden.attack.to_spec(warden.d2)?;
    let trials = trials_flag.or(warden.trials).unwrap_or(10_000);
    let report = estimate_error_prob(&handle, &spec, trials, seed).map_err(sim_failure)?;

    let effective = Config {
        seed: Some(seed),
        warden: Some(warden),
        ..cfg.clone()
    };
    let mut run = Run::start(&common, "codec loopback", &effective, seed)?;
    run.write_json("trial_report.json", &report)?;
    run.finish()?;
    println!(
        "loopback: {} errors in {} trials, pe = {:.6} (95% CI [{:.6}, {:.6}])",
        report.errors, report.trials, report.p_e_hat, report.wilson_ci_95.0, report.wilson_ci_95.1,
    );
    Ok(())
}

fn read_sequence(path: &Path, alphabet: usize) -> Result<Sequence, Failure> {
    let symbols = read_symbols(path, alphabet)?;
    Sequence::new(symbols, alphabet).map_err(|e| Failure::codec(e.to_string()))
}

fn check_message(message: usize, count: usize) -> Result<(), Failure> {
    if message >= count {
        return Err(Failure::codec(format!(
            "message {message} outside the codebook's {count} messages"
        )));
    }
    Ok(())
}
