//! Rejection-rate model, divergence bounds, naive baseline and the benchmark
//! harness.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::Result;
use crate::mldsa::sampling::{sample_in_ball, sample_mask};
use crate::mldsa::{AbortKind, SecretKey, Signer};
use crate::params::{ParamSet, BETA, GAMMA1, Z_BOUND};
use crate::threshold::{dealer_keygen, sign_threshold, Profile, SignConfig, PARTY_BYTES_PER_ATTEMPT};
use crate::PartyId;

/// Closed-form per-attempt pass probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RejectionModel {
    pub p_z: f64,
    pub p_r0: f64,
    pub p_combined: f64,
}

/// `((g1 - b) / g1)^(n l)`, `((g2 - b) / g2)^(n k)` and their product.
pub fn rejection_model(p: &ParamSet) -> RejectionModel {
    let b = p.beta as f64;
    let p_z = ((p.gamma1 as f64 - b) / p.gamma1 as f64).powi((p.n * p.l) as i32);
    let p_r0 = ((p.gamma2 as f64 - b) / p.gamma2 as f64).powi((p.n * p.k) as i32);
    RejectionModel { p_z, p_r0, p_combined: p_z * p_r0 }
}

/// Measured per-check pass rates of the single-signer loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CheckRates {
    pub attempts: usize,
    pub z: f64,
    pub r0: f64,
    pub hint: f64,
    pub success: f64,
}

pub fn measure_single<R: RngCore + CryptoRng>(sk: &SecretKey, attempts: usize, rng: &mut R) -> CheckRates {
    let signer = Signer::new(sk);
    let mut counts = [0usize; 4];
    let mut mu = [0u8; 32];
    for _ in 0..attempts {
        rng.fill_bytes(&mut mu);
        let (c, _) = signer.attempt(&mu, rng);
        for (k, ok) in [c.z_ok, c.r0_ok, c.hint_ok, c.passed()].into_iter().enumerate() {
            counts[k] += ok as usize;
        }
    }
    let f = |k: usize| counts[k] as f64 / attempts.max(1) as f64;
    CheckRates { attempts, z: f(0), r0: f(1), hint: f(2), success: f(3) }
}

/// Wilson score interval at 95%.
pub fn wilson_ci(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let mid = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((mid - half).max(0.0), (mid + half).min(1.0))
}

/// Divergence bound for one signer-set size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenyiRow {
    pub signers: usize,
    /// Per-party nonce range `2 floor(gamma1 / |S|)`.
    pub range: u64,
    pub r2_minus_1: f64,
    /// `log10` of the tail bound, which underflows `f64` for large sets.
    pub log10_tail: f64,
}

/// `R2 - 1 <= n^2 beta^2 / N^2` and `eps < (2 e beta / N)^n / sqrt(2 pi n)`.
pub fn renyi_bound(signers: usize) -> RenyiRow {
    assert!(signers >= 2, "a signer set has at least two members");
    let n = signers as f64;
    let range = 2 * (GAMMA1 as u64 / signers as u64);
    let big_n = range as f64;
    let b = BETA as f64;
    let r2_minus_1 = n * n * b * b / (big_n * big_n);
    let log10_tail = n * (2.0 * std::f64::consts::E * b / big_n).log10() - 0.5 * (2.0 * std::f64::consts::PI * n).log10();
    RenyiRow { signers, range, r2_minus_1, log10_tail }
}

/// Reference `(|S|, R2 - 1, tail exponent)` values the tool is compared against.
pub const RENYI_REFERENCE: [(usize, f64, i32); 5] =
    [(4, 8.9e-8, -10), (9, 2.3e-5, -19), (17, 2.9e-3, -30), (25, 1.4e-2, -40), (33, 4.1e-2, -49)];

/// Whether `a` and `b` agree to two significant figures.
pub fn same_two_figures(a: f64, b: f64) -> bool {
    format!("{a:.1e}") == format!("{b:.1e}")
}

/// Reference rows whose `R2 - 1` the formula does not reproduce to two figures.
pub fn renyi_discrepancies() -> Vec<String> {
    RENYI_REFERENCE
        .iter()
        .filter_map(|&(s, r, _)| {
            let got = renyi_bound(s).r2_minus_1;
            (!same_two_figures(got, r)).then(|| {
                format!("|S|={s}: formula gives {got:.2e}, reference lists {r:.1e} (ratio {:.0})", got / r)
            })
        })
        .collect()
}

/// Success probability when every party must pass on its own.
pub fn naive_success(t: u32) -> f64 {
    0.2f64.powi(t as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NaiveSim {
    pub parties: u32,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
}

/// Each of `t` parties holds an independent key and runs its own z-bound
/// check; an attempt succeeds only if all of them pass.
pub fn naive_simulation<R: RngCore + CryptoRng>(t: u32, trials: usize, rng: &mut R) -> NaiveSim {
    let keys: Vec<SecretKey> = (0..t)
        .map(|_| {
            let mut seed = [0u8; 32];
            rng.fill_bytes(&mut seed);
            crate::mldsa::keygen(&seed).1
        })
        .collect();
    let mut successes = 0;
    let mut c_tilde = [0u8; 48];
    for _ in 0..trials {
        let mut all = true;
        for sk in &keys {
            rng.fill_bytes(&mut c_tilde);
            let c = sample_in_ball(&c_tilde);
            let z = &sample_mask(rng) + &sk.s1.mul_poly(&c);
            all &= z.inf_norm() < Z_BOUND;
        }
        successes += all as usize;
    }
    NaiveSim { parties: t, trials, successes, rate: successes as f64 / trials.max(1) as f64 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BenchConfig {
    pub t: usize,
    pub n: usize,
    pub signers: usize,
    pub profile: Profile,
}

impl BenchConfig {
    /// `|S| = T + 1`, the smallest set allowed to sign.
    pub fn new(t: usize, n: usize, profile: Profile) -> Self {
        Self { t, n, signers: t + 1, profile }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub signatures: usize,
    pub attempts: usize,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_attempts: f64,
    pub bytes_per_party_attempt: usize,
    pub mpc_bytes_per_party: usize,
    pub aborts: BTreeMap<String, usize>,
    /// Naive-baseline speedup `(1 / 0.2^T) / mean_attempts`.
    pub speedup: f64,
    pub ms_per_signature: f64,
}

/// Signs until at least `min_attempts` attempts have run. Deterministic in `seed`.
pub fn run_bench(config: BenchConfig, min_attempts: usize, seed: u64) -> Result<BenchReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keys = dealer_keygen(config.t, config.n, &mut rng)?;
    let signers: Vec<PartyId> = (1..=config.signers as PartyId).collect();
    let cfg = SignConfig { profile: config.profile, blame_after: 0, ..SignConfig::default() };
    let (mut attempts, mut signatures, mut mpc_bytes) = (0, 0, 0);
    let mut aborts: BTreeMap<String, usize> = BTreeMap::new();
    let mut mu = [0u8; 32];
    let start = Instant::now();
    while attempts < min_attempts {
        rng.fill_bytes(&mut mu);
        let rep = sign_threshold(&keys.public_key, &keys.registry, &keys.shares, &signers, &mu, &cfg, &mut rng)?;
        attempts += rep.attempts;
        signatures += 1;
        mpc_bytes = mpc_bytes.max(rep.mpc.max_bytes_per_party);
        for a in rep.aborts {
            *aborts.entry(abort_name(a.kind).to_string()).or_default() += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let (ci_low, ci_high) = wilson_ci(signatures, attempts);
    let mean_attempts = attempts as f64 / signatures as f64;
    Ok(BenchReport {
        config,
        signatures,
        attempts,
        success_rate: signatures as f64 / attempts as f64,
        ci_low,
        ci_high,
        mean_attempts,
        bytes_per_party_attempt: PARTY_BYTES_PER_ATTEMPT,
        mpc_bytes_per_party: mpc_bytes,
        aborts,
        speedup: 1.0 / naive_success(config.t as u32) / mean_attempts,
        ms_per_signature: elapsed * 1e3 / signatures as f64,
    })
}

pub fn abort_name(k: AbortKind) -> &'static str {
    match k {
        AbortKind::ZBound => "z_bound",
        AbortKind::R0 => "r0",
        AbortKind::HintWeight => "hint",
        AbortKind::InvalidSignature => "invalid",
    }
}

const BENCH_COLUMNS: [&str; 14] = [
    "t",
    "n",
    "signers",
    "profile",
    "signatures",
    "attempts",
    "success_rate",
    "ci_low",
    "ci_high",
    "mean_attempts",
    "bytes_per_party_attempt",
    "mpc_bytes_per_party",
    "speedup",
    "ms_per_signature",
];

fn bench_row(r: &BenchReport) -> Vec<String> {
    vec![
        r.config.t.to_string(),
        r.config.n.to_string(),
        r.config.signers.to_string(),
        r.config.profile.to_string(),
        r.signatures.to_string(),
        r.attempts.to_string(),
        format!("{:.4}", r.success_rate),
        format!("{:.4}", r.ci_low),
        format!("{:.4}", r.ci_high),
        format!("{:.3}", r.mean_attempts),
        r.bytes_per_party_attempt.to_string(),
        r.mpc_bytes_per_party.to_string(),
        format!("{:.2e}", r.speedup),
        format!("{:.1}", r.ms_per_signature),
    ]
}

pub fn bench_csv(reports: &[BenchReport]) -> std::result::Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BENCH_COLUMNS)?;
    for r in reports {
        w.write_record(bench_row(r))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

pub fn bench_markdown(reports: &[BenchReport]) -> String {
    markdown(&BENCH_COLUMNS, reports.iter().map(bench_row))
}

pub fn renyi_markdown(sizes: &[usize]) -> String {
    let rows = sizes.iter().map(|&s| {
        let r = renyi_bound(s);
        vec![s.to_string(), r.range.to_string(), format!("{:.2e}", r.r2_minus_1), format!("1e{:.1}", r.log10_tail)]
    });
    markdown(&["|S|", "N", "R2-1", "tail"], rows)
}

pub fn naive_markdown(ts: &[u32], rate: f64) -> String {
    let rows = ts.iter().map(|&t| {
        let p = naive_success(t);
        vec![t.to_string(), format!("{p:.2e}"), format!("{:.1}%", rate * 100.0), format!("{:.1e}", rate / p)]
    });
    markdown(&["T", "naive", "masked", "speedup"], rows)
}

fn markdown(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = format!("| {} |\n|{}\n", header.join(" | "), " --- |".repeat(header.len()));
    for r in rows {
        out.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ML_DSA_65;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_model() {
        let m = rejection_model(&ML_DSA_65);
        assert!((0.615..=0.625).contains(&m.p_z), "{m:?}");
        assert!((0.31..=0.325).contains(&m.p_r0), "{m:?}");
        assert!((0.19..=0.21).contains(&m.p_combined), "{m:?}");
    }

    #[test]
    fn renyi_rows_and_monotonicity() {
        for (s, want, _) in RENYI_REFERENCE[2..].iter().copied() {
            assert!(same_two_figures(renyi_bound(s).r2_minus_1, want), "|S|={s}");
        }
        let rows: Vec<_> = (2..=40).map(renyi_bound).collect();
        for w in rows.windows(2) {
            assert!(w[1].r2_minus_1 > w[0].r2_minus_1);
            assert!(w[1].log10_tail < w[0].log10_tail);
        }
        for (s, _, exp) in RENYI_REFERENCE {
            assert!(renyi_bound(s).log10_tail < exp as f64, "|S|={s}");
        }
        let notes = renyi_discrepancies();
        assert_eq!(notes.len(), 2, "{notes:?}");
        assert!(notes[0].starts_with("|S|=4") && notes[1].starts_with("|S|=9"));
    }

    #[test]
    fn nonce_range_rounding() {
        assert_eq!(renyi_bound(17).range, 61680);
        assert_eq!(renyi_bound(4).range, 262144);
    }

    #[test]
    fn naive_values() {
        assert_eq!(naive_success(1), 0.2);
        assert!(same_two_figures(naive_success(8), 2.6e-6));
        assert!(same_two_figures(naive_success(16), 6.6e-12));
    }

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_ci(30, 100);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((hi - lo - 0.18).abs() < 0.01);
    }

    #[test]
    fn bench_is_reproducible_and_renders() {
        let cfg = BenchConfig::new(2, 3, Profile::P1);
        let a = run_bench(cfg, 10, 9).unwrap();
        let b = run_bench(cfg, 10, 9).unwrap();
        assert_eq!((a.attempts, a.signatures, &a.aborts), (b.attempts, b.signatures, &b.aborts));
        assert!(a.attempts >= 10);
        assert!((a.success_rate * a.mean_attempts - 1.0).abs() < 1e-9);
        let csv = bench_csv(&[a.clone()]).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("t,n,signers,profile"));
        assert_eq!(bench_markdown(&[a]).lines().count(), 3);
    }

    #[test]
    fn naive_simulation_degenerate_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sim = naive_simulation(1, 400, &mut rng);
        let p = rejection_model(&ML_DSA_65).p_z;
        let sd = (p * (1.0 - p) / 400.0).sqrt();
        assert!((sim.rate - p).abs() < 4.0 * sd, "{sim:?}");
    }
}
