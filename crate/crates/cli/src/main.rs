use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use tmldsa::dkg::{dkg, refresh};
use tmldsa::keystore::{decode_pk, Keystore};
use tmldsa::mldsa::{decode_signature, encode_signature, verify, verify_detailed};
use tmldsa::mpc::{mpc_r0_check, plaintext_r0_check, share_input, MpcConfig};
use tmldsa::params::{Q, R0_BOUND};
use tmldsa::stats::{self, BenchConfig};
use tmldsa::threshold::{dealer_keygen, sign_threshold, Fault, Profile, SignConfig, SigningSession};
use tmldsa::{Error, PartyId};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ABORT: u8 = 3;
const EXIT_BLAME: u8 = 4;

#[derive(Parser)]
#[command(name = "tmldsa", version, about = "Threshold ML-DSA-65 with pairwise-canceling masks")]
struct Cli {
    /// Seed for all randomness of this invocation; OS entropy if absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trusted-dealer key generation into a new keystore directory.
    Keygen {
        #[arg(short, long)]
        t: usize,
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Dealer-free key generation into a new keystore directory.
    Dkg {
        #[arg(short, long)]
        t: usize,
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Threshold-sign a message file.
    Sign {
        #[arg(short, long)]
        keystore: PathBuf,
        /// Comma-separated party indices.
        #[arg(short, long, value_delimiter = ',', required = true)]
        signers: Vec<PartyId>,
        #[arg(short, long)]
        message: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(short, long, default_value = "p1")]
        profile: Profile,
        #[arg(long, default_value_t = tmldsa::mldsa::DEFAULT_RETRY_CAP)]
        retries: usize,
        /// Write the session transcript as JSON.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Verify a raw signature against a public key file or keystore.
    Verify {
        #[arg(long)]
        pk: PathBuf,
        #[arg(short, long)]
        message: PathBuf,
        #[arg(short, long)]
        signature: PathBuf,
    },
    /// Re-randomize every share and advance the epoch.
    Refresh {
        #[arg(short, long)]
        keystore: PathBuf,
    },
    /// Measure per-attempt success rates.
    Bench {
        /// `T,N` pairs; repeat for several configurations.
        #[arg(short, long = "config", value_parser = parse_config, default_values = ["3,5", "8,15"])]
        configs: Vec<(usize, usize)>,
        #[arg(short, long, default_value = "p1")]
        profile: Profile,
        /// Minimum attempts per configuration.
        #[arg(short, long, default_value_t = 500)]
        attempts: usize,
        /// CSV output file.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Divergence bounds per signer-set size.
    Renyi {
        #[arg(short, long, value_delimiter = ',', default_values = ["4", "9", "17", "25", "33"])]
        sizes: Vec<usize>,
    },
    /// Run the distributed r0-check on random inputs and compare with plaintext.
    MpcDemo {
        #[arg(short, long, default_value_t = 3)]
        parties: usize,
        #[arg(short, long, default_value_t = 5)]
        instances: usize,
    },
    /// Inject a fault, run a few attempts, then force blame.
    BlameDemo {
        #[arg(short, long, default_value_t = 3)]
        t: usize,
        #[arg(short, long, default_value_t = 5)]
        n: usize,
        #[arg(short, long, value_enum)]
        fault: Option<FaultArg>,
        #[arg(long, default_value_t = 2)]
        party: PartyId,
        #[arg(short, long, default_value_t = 3)]
        attempts: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    Response,
    Commitment,
    Refuse,
}

fn parse_config(s: &str) -> Result<(usize, usize), String> {
    let (t, n) = s.split_once(',').ok_or_else(|| format!("expected T,N, got {s:?}"))?;
    Ok((t.trim().parse().map_err(|e| format!("{e}"))?, n.trim().parse().map_err(|e| format!("{e}"))?))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("TMLDSA_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Blame(_)) => EXIT_BLAME,
        Some(Error::RetryLimit(_) | Error::MpcAbort(_) | Error::TripleExhausted) => EXIT_ABORT,
        _ => EXIT_USAGE,
    }
}

fn rng_for(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn emit(json_mode: bool, value: serde_json::Value, text: String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        print!("{text}");
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let mut rng = rng_for(cli.seed);
    match &cli.cmd {
        Cmd::Keygen { t, n, out } => {
            let d = dealer_keygen(*t, *n, &mut rng)?;
            Keystore::create(out, &d.public_key, &d.registry, &d.shares)?;
            let summary = json!({ "dir": out, "threshold": t, "parties": n, "epoch": 0 });
            emit(cli.json, summary, format!("wrote keystore for T={t}, N={n} to {}\n", out.display()));
        }
        Cmd::Dkg { t, n, out } => {
            let d = dkg(*n, *t, &mut rng)?;
            Keystore::create(out, &d.public_key, &d.registry, &d.shares)?;
            let summary = json!({
                "dir": out, "threshold": t, "parties": n, "epoch": 0,
                "s1_norm": d.s1_norm, "s2_norm": d.s2_norm,
            });
            emit(
                cli.json,
                summary,
                format!(
                    "wrote DKG keystore for T={t}, N={n} to {}\naggregate norms: |s1|={} |s2|={}\n",
                    out.display(),
                    d.s1_norm,
                    d.s2_norm
                ),
            );
        }
        Cmd::Sign { keystore, signers, message, out, profile, retries, transcript } => {
            let ks = Keystore::open(keystore);
            let pk = ks.public_key()?;
            let registry = ks.registry()?;
            let shares = ks.shares(signers)?;
            let msg = fs::read(message).with_context(|| format!("reading {}", message.display()))?;
            let cfg = SignConfig {
                retry_cap: *retries,
                profile: *profile,
                record_transcript: transcript.is_some(),
                ..SignConfig::default()
            };
            let rep = sign_threshold(&pk, &registry, &shares, signers, &msg, &cfg, &mut rng)?;
            if !verify(&pk, &msg, &rep.signature) {
                bail!("internal verification of the combined signature failed");
            }
            fs::write(out, encode_signature(&rep.signature))?;
            if let (Some(path), Some(t)) = (transcript, &rep.transcript) {
                fs::write(path, t.to_json())?;
            }
            let mut aborts: BTreeMap<&str, usize> = BTreeMap::new();
            for a in &rep.aborts {
                *aborts.entry(stats::abort_name(a.kind)).or_default() += 1;
            }
            let summary = json!({
                "profile": profile.to_string(), "attempts": rep.attempts, "aborts": aborts,
                "mpc_rounds": rep.mpc.rounds, "mpc_and_depth": rep.mpc.and_depth,
                "mpc_bytes_per_party": rep.mpc.max_bytes_per_party, "signature": out,
            });
            let mut text = format!("signed with {profile} after {} attempts, aborts {aborts:?}\n", rep.attempts);
            if *profile == Profile::P2 {
                text += &format!(
                    "r0-check MPC: {} rounds, AND depth {}, up to {} bytes per party\n",
                    rep.mpc.rounds, rep.mpc.and_depth, rep.mpc.max_bytes_per_party
                );
            }
            emit(cli.json, summary, text);
        }
        Cmd::Verify { pk, message, signature } => {
            let pk_path = if pk.is_dir() { pk.join(Keystore::PK_FILE) } else { pk.clone() };
            let pk = decode_pk(&fs::read(&pk_path).with_context(|| format!("reading {}", pk_path.display()))?)?;
            let msg = fs::read(message)?;
            let sig = fs::read(signature)?;
            let result = decode_signature(&sig)
                .map_err(|e| e.to_string())
                .and_then(|s| verify_detailed(&pk, &msg, &s).map_err(|f| f.to_string()));
            let ok = result.is_ok();
            let reason = result.err();
            emit(
                cli.json,
                json!({ "valid": ok, "reason": reason }),
                match &reason {
                    None => "valid\n".to_string(),
                    Some(r) => format!("invalid: {r}\n"),
                },
            );
            return Ok(if ok { 0 } else { EXIT_VERIFY });
        }
        Cmd::Refresh { keystore } => {
            let ks = Keystore::open(keystore);
            let shares = ks.all_shares()?;
            let (next, registry) = refresh(&shares, &mut rng)?;
            ks.store_shares(&registry, &next)?;
            emit(cli.json, json!({ "epoch": registry.epoch }), format!("refreshed to epoch {}\n", registry.epoch));
        }
        Cmd::Bench { configs, profile, attempts, out } => {
            let seed = cli.seed.unwrap_or_else(|| rng.gen());
            let reports = configs
                .iter()
                .map(|&(t, n)| stats::run_bench(BenchConfig::new(t, n, *profile), *attempts, seed))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(path) = out {
                fs::write(path, stats::bench_csv(&reports)?)?;
            }
            emit(cli.json, serde_json::to_value(&reports)?, stats::bench_markdown(&reports));
        }
        Cmd::Renyi { sizes } => {
            if let Some(s) = sizes.iter().find(|&&s| s < 2) {
                bail!("signer-set size {s} is below 2");
            }
            let rows: Vec<_> = sizes.iter().map(|&s| stats::renyi_bound(s)).collect();
            let notes = stats::renyi_discrepancies();
            let mut text = stats::renyi_markdown(sizes);
            for n in &notes {
                text += &format!("note: {n}\n");
            }
            emit(cli.json, json!({ "rows": rows, "discrepancies": notes }), text);
        }
        Cmd::MpcDemo { parties, instances } => {
            if *parties < 2 {
                bail!("the MPC needs at least two parties");
            }
            let mut rows = Vec::new();
            let mut agree = true;
            for k in 0..*instances {
                let mut w: Vec<u32> = (0..tmldsa::params::N * tmldsa::params::K).map(|_| rng.gen_range(0..Q)).collect();
                if k % 2 == 1 {
                    // one coefficient exactly on the bound forces a failure
                    let at = rng.gen_range(0..w.len());
                    w[at] = R0_BOUND;
                }
                let inputs = share_input(&w, *parties, &mut rng);
                let out = mpc_r0_check(&inputs, &MpcConfig::default(), &mut rng)?;
                let expect = plaintext_r0_check(&w, R0_BOUND);
                agree &= out.pass == expect;
                rows.push(json!({
                    "pass": out.pass, "plaintext": expect, "rounds": out.rounds, "and_depth": out.and_depth,
                    "and_gates": out.and_gates, "bytes_per_party": out.bytes_per_party,
                    "edabit_resamples": out.edabit_resamples,
                }));
            }
            let text = rows
                .iter()
                .map(|r| {
                    format!(
                        "pass={} plaintext={} rounds={} and_depth={} and_gates={} bytes/party={}\n",
                        r["pass"], r["plaintext"], r["rounds"], r["and_depth"], r["and_gates"], r["bytes_per_party"][0]
                    )
                })
                .collect();
            emit(cli.json, json!({ "instances": rows, "agree": agree }), text);
            return Ok(if agree { 0 } else { EXIT_ABORT });
        }
        Cmd::BlameDemo { t, n, fault, party, attempts } => {
            let d = dealer_keygen(*t, *n, &mut rng)?;
            let signers: Vec<PartyId> = (1..=*t as PartyId + 1).collect();
            let mut faults = BTreeMap::new();
            if let Some(f) = fault {
                if !signers.contains(party) {
                    bail!("party {party} is not among signers {signers:?}");
                }
                let f = match f {
                    FaultArg::Response => Fault::TamperResponse { delta: 1 },
                    FaultArg::Commitment => Fault::TamperCommitment,
                    FaultArg::Refuse => Fault::RefuseReveal,
                };
                faults.insert(*party, f);
            }
            let mut s = SigningSession::new(
                &d.public_key,
                &d.registry,
                &d.shares,
                &signers,
                b"blame demo",
                Profile::P1,
                &faults,
                false,
            )?;
            for _ in 0..*attempts {
                s.attempt(&mut rng)?;
            }
            let blamed = s.blame();
            emit(cli.json, json!({ "signers": signers, "blamed": blamed }), format!("blamed parties: {blamed:?}\n"));
            return Ok(if blamed.is_empty() { 0 } else { EXIT_BLAME });
        }
    }
    Ok(0)
}
