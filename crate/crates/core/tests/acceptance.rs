//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are always printed.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::thread;

use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use tmldsa::dkg::{dkg, refresh};
use tmldsa::masking::{gen_mask, DealerSeeds, MaskDomain, MaskPurpose, SeedProvisioning};
use tmldsa::mldsa::sampling::sample_in_ball;
use tmldsa::mldsa::{decode_signature, encode_signature, keygen, verify};
use tmldsa::mpc::edabits::{gen_edabits, sample_below_q, RESAMPLE_RATE};
use tmldsa::mpc::{mpc_r0_check, p3_check, share_input, MpcConfig, MpcOutput};
use tmldsa::params::{ML_DSA_65, GAMMA2, K, L, N, Q, R0_BOUND, SIGNATURE_BYTES};
use tmldsa::ring::{centered, PolyVec};
use tmldsa::shamir::{lagrange_coeffs, reconstruct, share, ShareOf};
use tmldsa::stats::{
    measure_single, naive_simulation, naive_success, rejection_model, renyi_bound, renyi_discrepancies,
    run_bench, same_two_figures, BenchConfig, CheckRates, RENYI_REFERENCE,
};
use tmldsa::threshold::{
    dealer_keygen, reconstruct_secrets, sign_threshold, Fault, Profile, SignConfig, SigningSession,
};
use tmldsa::PartyId;

struct Line {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: u8, name: &'static str, pass: bool, detail: String) -> Line {
    Line { id, name, pass, detail }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn random_message(rng: &mut ChaCha20Rng) -> Vec<u8> {
    let mut m = vec![0u8; 1 + rng.gen_range(0..64)];
    rng.fill_bytes(&mut m);
    m
}

/// Signs with every profile on three configurations; returns verification
/// results and encodings.
fn threshold_signatures() -> (usize, usize, Vec<usize>) {
    let configs = [(3usize, 5usize), (5, 9), (8, 15)];
    let per_combo = 23;
    let results: Vec<(usize, usize, Vec<usize>)> = thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .flat_map(|&c| Profile::ALL.map(move |p| (c, p)))
            .enumerate()
            .map(|(k, ((t, n), profile))| {
                s.spawn(move || {
                    let mut r = rng(100 + k as u64);
                    let keys = dealer_keygen(t, n, &mut r).unwrap();
                    let cfg = SignConfig { profile, ..SignConfig::default() };
                    let (mut total, mut ok, mut sizes) = (0, 0, Vec::new());
                    for _ in 0..per_combo {
                        let size = t + 1 + r.gen_range(0..=n - t - 1);
                        let signers: Vec<PartyId> = sample(&mut r, n, size).iter().map(|i| i as PartyId + 1).collect();
                        let msg = random_message(&mut r);
                        let rep = sign_threshold(&keys.public_key, &keys.registry, &keys.shares, &signers, &msg, &cfg, &mut r)
                            .unwrap();
                        let bytes = encode_signature(&rep.signature);
                        sizes.push(bytes.len());
                        total += 1;
                        let decoded = decode_signature(&bytes).unwrap();
                        ok += verify(&keys.public_key, &msg, &decoded) as usize;
                    }
                    (total, ok, sizes)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    results.into_iter().fold((0, 0, Vec::new()), |(t, o, mut s), (t2, o2, s2)| {
        s.extend(s2);
        (t + t2, o + o2, s)
    })
}

fn c1_c2() -> Vec<Line> {
    let (total, ok, sizes) = threshold_signatures();
    let exact = sizes.iter().filter(|&&s| s == SIGNATURE_BYTES).count();
    vec![
        line(1, "FIPS-verify oracle", total >= 200 && ok == total, format!("{ok}/{total} threshold signatures verify")),
        line(
            2,
            "signature size",
            SIGNATURE_BYTES == 3309 && exact == sizes.len(),
            format!("{exact}/{} encodings are {SIGNATURE_BYTES} bytes", sizes.len()),
        ),
    ]
}

fn c3_c4() -> Vec<Line> {
    let model = rejection_model(&ML_DSA_65);
    let mut r = rng(3);
    let (_, sk) = keygen(&[7u8; 32]);
    let single: CheckRates = measure_single(&sk, 2400, &mut r);
    let closed = (0.615..=0.625).contains(&model.p_z)
        && (0.31..=0.325).contains(&model.p_r0)
        && (0.19..=0.21).contains(&model.p_combined);
    let measured = (single.z - model.p_z).abs() <= 0.03
        && (single.r0 - model.p_r0).abs() <= 0.03
        && (single.success - model.p_combined).abs() <= 0.03;
    let c3 = line(
        3,
        "rejection model",
        closed && measured,
        format!(
            "model z={:.4} r0={:.4} all={:.4}; measured over {} attempts z={:.4} r0={:.4} all={:.4}",
            model.p_z, model.p_r0, model.p_combined, single.attempts, single.z, single.r0, single.success
        ),
    );

    let reports: Vec<_> = thread::scope(|s| {
        let hs: Vec<_> = [(3, 5), (8, 15)]
            .into_iter()
            .map(|(t, n)| s.spawn(move || run_bench(BenchConfig::new(t, n, Profile::P1), 500, 40 + t as u64).unwrap()))
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let pass = reports.iter().all(|b| {
        b.attempts >= 500 && (0.18..=0.40).contains(&b.success_rate) && b.success_rate >= single.success - 0.03
    });
    let detail = reports
        .iter()
        .map(|b| {
            format!(
                "({},{}) {:.3} [{:.3},{:.3}] over {} attempts",
                b.config.t, b.config.n, b.success_rate, b.ci_low, b.ci_high, b.attempts
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    vec![c3, line(4, "threshold success rate", pass, format!("{detail}; single-signer {:.3}", single.success))]
}

fn c5() -> Line {
    let mut r = rng(5);
    let books = DealerSeeds::new(&mut r).provision(40);
    let mut checked = 0;
    let mut failures = 0;
    for size in [2usize, 3, 5, 17, 33] {
        for _ in 0..50 {
            let signers: Vec<PartyId> = {
                let mut v: Vec<PartyId> = sample(&mut r, 40, size).iter().map(|i| i as PartyId + 1).collect();
                v.sort_unstable();
                v
            };
            let mut nonce = [0u8; 32];
            r.fill_bytes(&mut nonce);
            for purpose in MaskPurpose::ALL {
                let dom = MaskDomain::new(purpose, &nonce, &signers);
                let masks: Vec<PolyVec> =
                    signers.iter().map(|&i| gen_mask(i, &books[i as usize - 1], &dom).unwrap()).collect();
                let sum: PolyVec = masks.iter().sum::<Option<PolyVec>>().unwrap();
                checked += 1;
                failures += (!sum.is_zero() || masks.iter().all(PolyVec::is_zero)) as usize;
            }
        }
    }
    line(5, "mask cancellation", failures == 0, format!("{checked} mask sums, {failures} non-zero"))
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn c6() -> Line {
    // big-integer Lagrange weights at zero for S = {1..T}
    let mut lagrange_ok = true;
    for t in 1..=22u64 {
        let set: Vec<PartyId> = (1..=t as PartyId).collect();
        let lib = lagrange_coeffs(&set).unwrap();
        for i in 1..=t as i64 {
            let (mut num, mut den) = (BigInt::from(1), BigInt::from(1));
            for j in 1..=t as i64 {
                if j != i {
                    num *= j;
                    den *= j - i;
                }
            }
            let exact = &num / &den;
            let sign = if i % 2 == 1 { 1 } else { -1 };
            let expect = binomial(t, i as u64) * sign;
            let got = BigInt::from(centered(lib.coeff(i as PartyId).unwrap()));
            lagrange_ok &= &exact * &den == num && exact == expect && got == expect;
        }
    }
    let mut r = rng(6);
    let mut trials = 0;
    let mut recon_ok = true;
    for (t, n) in [(3usize, 5usize), (8, 15), (16, 31)] {
        for _ in 0..100 {
            let secret = PolyVec::from_coeff_iter(L, (0..L * N).map(|_| r.gen_range(0..Q)));
            let shares: Vec<ShareOf> = share(&secret, t, n, &mut r).unwrap();
            let size = r.gen_range(t..=n);
            let subset: Vec<ShareOf> = sample(&mut r, n, size).iter().map(|i| shares[i].clone()).collect();
            recon_ok &= reconstruct(&subset, t).unwrap() == secret;
            trials += 1;
        }
    }
    line(
        6,
        "Lagrange and reconstruction",
        lagrange_ok && recon_ok,
        format!("T=1..22 weights match (-1)^(i-1) C(T,i): {lagrange_ok}; {trials} reconstructions exact: {recon_ok}"),
    )
}

/// Centered residue of the centered representative modulo `2 gamma2`, in `[-gamma2, gamma2)`.
fn mpc_oracle(w: &[u32], bound: u32) -> bool {
    let alpha = 2 * GAMMA2 as i64;
    w.iter().all(|&x| {
        let c = if x as i64 > (Q as i64 - 1) / 2 { x as i64 - Q as i64 } else { x as i64 };
        let mut r = c.rem_euclid(alpha);
        if r >= GAMMA2 as i64 {
            r -= alpha;
        }
        r.abs() < bound as i64
    })
}

/// Low part of the standard decomposition, written out independently.
fn fips_low_bits(x: u32) -> i64 {
    let alpha = 2 * GAMMA2 as i64;
    let mut r0 = (x as i64).rem_euclid(alpha);
    if r0 > alpha / 2 {
        r0 -= alpha;
    }
    if x as i64 - r0 == Q as i64 - 1 {
        r0 -= 1;
    }
    r0
}

fn near_boundary(r: &mut ChaCha20Rng, bound: u32) -> u32 {
    let alpha = 2 * GAMMA2;
    let base = match r.gen_range(0..4) {
        0 => bound,
        1 => Q - bound,
        2 => alpha * r.gen_range(1..16) + bound,
        _ => alpha * r.gen_range(1..16) - bound,
    } as i64;
    (base + r.gen_range(-2..=2)).rem_euclid(Q as i64) as u32
}

fn c7() -> Line {
    let cfg = MpcConfig::default();
    let b = R0_BOUND;
    let outcomes: Vec<(usize, usize, usize, bool)> = thread::scope(|s| {
        let hs: Vec<_> = (0..8u64)
            .map(|k| {
                let cfg = cfg.clone();
                s.spawn(move || {
                    let mut r = rng(700 + k);
                    let (mut runs, mut agree, mut passes, mut rounds_ok) = (0, 0, 0, true);
                    for _ in 0..125 {
                        let m = r.gen_range(1..=64);
                        let parties = r.gen_range(2..=6);
                        let mut w: Vec<u32> = (0..m).map(|_| r.gen_range(0..Q)).collect();
                        if r.gen_bool(0.5) {
                            for x in w.iter_mut() {
                                *x = near_boundary(&mut r, b);
                            }
                        }
                        let out: MpcOutput = mpc_r0_check(&share_input(&w, parties, &mut r), &cfg, &mut r).unwrap();
                        runs += 1;
                        agree += (out.pass == mpc_oracle(&w, b)) as usize;
                        passes += out.pass as usize;
                        rounds_ok &= out.rounds == 8;
                    }
                    (runs, agree, passes, rounds_ok)
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let (mut runs, mut agree, mut passes, mut rounds_ok) = (0, 0, 0, true);
    for (a, b2, c, d) in outcomes {
        runs += a;
        agree += b2;
        passes += c;
        rounds_ok &= d;
    }

    // exact boundaries, alone and inside a full-size vector
    let mut r = rng(71);
    let mut boundary_ok = true;
    for (x, expect) in [(b - 1, true), (b, false), (Q - (b - 1), true), (Q - b, false), (0, true)] {
        let mut w = vec![0u32; K * N];
        w[r.gen_range(0..K * N)] = x;
        let out = mpc_r0_check(&share_input(&w, 3, &mut r), &cfg, &mut r).unwrap();
        boundary_ok &= out.pass == expect && out.pass == mpc_oracle(&w, b) && out.rounds == 8;
    }

    let mut p3_agree = 0;
    let mut p3_pass = 0;
    let p3_runs = 1000;
    for k in 0..p3_runs {
        let w = PolyVec::from_coeff_iter(K, (0..K * N).map(|_| r.gen_range(0..Q)));
        let small = k % 2 == 0;
        let draw = |r: &mut ChaCha20Rng| {
            if small {
                PolyVec::from_coeff_iter(K, (0..K * N).map(|_| (r.gen_range(-98i64..=98)).rem_euclid(Q as i64) as u32))
            } else {
                PolyVec::from_coeff_iter(K, (0..K * N).map(|_| r.gen_range(0..Q)))
            }
        };
        let (s1, s2) = (draw(&mut r), draw(&mut r));
        let expect = w
            .coeffs()
            .zip(s1.coeffs())
            .zip(s2.coeffs())
            .all(|((a, x), y)| fips_low_bits(((a as i64 - x as i64 - y as i64).rem_euclid(Q as i64)) as u32).abs() < b as i64);
        let got = p3_check(&w, &s1, &s2);
        p3_agree += (got == expect) as usize;
        p3_pass += got as usize;
    }
    line(
        7,
        "MPC and P3 oracle equivalence",
        runs >= 1000 && agree == runs && rounds_ok && boundary_ok && p3_agree == p3_runs,
        format!(
            "MPC {agree}/{runs} agree ({passes} pass), rounds=8: {rounds_ok}, boundaries: {boundary_ok}; \
             P3 {p3_agree}/{p3_runs} agree ({p3_pass} pass)"
        ),
    )
}

fn c8() -> Line {
    let mut r = rng(8);
    let draws = 1_000_000u64;
    let (mut resamples, mut above) = (0u64, 0u64);
    for _ in 0..draws {
        let (x, rej) = sample_below_q(&mut r);
        resamples += rej;
        above += (x >= Q) as u64;
    }
    let key = tmldsa::mpc::arith::MacKey::random(3, &mut r);
    let eda = gen_edabits(4096, &key, &mut r);
    above += eda.binary_values().iter().filter(|&&v| v >= Q).count() as u64;
    let rate = resamples as f64 / (draws + resamples) as f64;
    let expect = 8191.0 / 8388608.0;
    line(
        8,
        "edaBits rejection sampling",
        above == 0 && (rate - expect).abs() <= 0.2 * expect && (RESAMPLE_RATE - expect).abs() < 1e-15,
        format!("{above} values >= q; resample rate {rate:.3e} vs {expect:.3e} over {} draws", draws + resamples),
    )
}

fn c9() -> Line {
    let rows: Vec<String> = RENYI_REFERENCE[2..]
        .iter()
        .map(|&(s, want, _)| {
            let got = renyi_bound(s).r2_minus_1;
            format!("{s}:{got:.2e}{}", if same_two_figures(got, want) { "" } else { "(mismatch)" })
        })
        .collect();
    let ok = RENYI_REFERENCE[2..].iter().all(|&(s, want, _)| same_two_figures(renyi_bound(s).r2_minus_1, want));
    let notes = renyi_discrepancies();
    let flagged = notes.len() == 2 && notes[0].starts_with("|S|=4") && notes[1].starts_with("|S|=9");
    line(9, "divergence table", ok && flagged, format!("{}; notes: {}", rows.join(" "), notes.join(" / ")))
}

fn c10() -> Line {
    let mut r = rng(10);
    let mut c_tilde = [0u8; 48];
    let mut invertible = 0;
    for _ in 0..10_000 {
        r.fill_bytes(&mut c_tilde);
        invertible += sample_in_ball(&c_tilde).ntt().is_invertible() as usize;
    }
    line(10, "challenge invertibility", invertible == 10_000, format!("{invertible}/10000 invertible"))
}

fn c11() -> Line {
    let mut r = rng(11);
    let p = rejection_model(&ML_DSA_65).p_z;
    let trials = 10_000;
    let mut detail = Vec::new();
    let mut ok = true;
    for t in 1..=3u32 {
        let sim = naive_simulation(t, trials, &mut r);
        let expect = p.powi(t as i32);
        let sd = (expect * (1.0 - expect) / trials as f64).sqrt();
        ok &= (sim.rate - expect).abs() <= 3.0 * sd;
        detail.push(format!("T={t} {:.4} vs {:.4}", sim.rate, expect));
    }
    let table = same_two_figures(naive_success(8), 2.6e-6) && same_two_figures(naive_success(16), 6.6e-12);
    detail.push(format!("0.2^8={:.1e} 0.2^16={:.1e}", naive_success(8), naive_success(16)));
    line(11, "naive comparison", ok && table, detail.join("; "))
}

fn c12() -> Line {
    let mut r = rng(12);
    let keys = dealer_keygen(3, 5, &mut r).unwrap();
    let (mut caught, mut false_acc) = (0, 0);
    for run in 0..100 {
        let signers: Vec<PartyId> = sample(&mut r, 5, 4).iter().map(|i| i as PartyId + 1).collect();
        let injected = run < 50;
        let mut faults = BTreeMap::new();
        let culprit = signers[r.gen_range(0..signers.len())];
        if injected {
            let f = if run % 2 == 0 {
                Fault::TamperResponse { delta: r.gen_range(1..1000) }
            } else {
                Fault::TamperCommitment
            };
            faults.insert(culprit, f);
        }
        let mut s = SigningSession::new(
            &keys.public_key,
            &keys.registry,
            &keys.shares,
            &signers,
            &random_message(&mut r),
            Profile::P1,
            &faults,
            false,
        )
        .unwrap();
        for _ in 0..2 {
            s.attempt(&mut r).unwrap();
        }
        let blamed = s.blame();
        if injected {
            caught += (blamed == vec![culprit]) as usize;
        } else {
            false_acc += blamed.len();
        }
    }
    line(12, "blame", caught == 50 && false_acc == 0, format!("{caught}/50 injected faults identified; {false_acc} false accusations in 50 honest runs"))
}

fn c13() -> Line {
    let mut r = rng(13);
    let cfg = SignConfig::default();
    let (mut dkg_ok, mut refresh_ok, mut recon_ok) = (0, 0, true);
    let mut max_norm = 0;
    for k in 0..20 {
        let out = dkg(5, 3, &mut r).unwrap();
        max_norm = max_norm.max(out.s1_norm);
        let signers: Vec<PartyId> = sample(&mut r, 5, 4).iter().map(|i| i as PartyId + 1).collect();
        let msg = random_message(&mut r);
        let rep = sign_threshold(&out.public_key, &out.registry, &out.shares, &signers, &msg, &cfg, &mut r).unwrap();
        dkg_ok += verify(&out.public_key, &msg, &rep.signature) as usize;

        let before = reconstruct_secrets(&out.shares[..3]).unwrap();
        let (mut shares, mut registry) = refresh(&out.shares, &mut r).unwrap();
        if k % 2 == 1 {
            (shares, registry) = refresh(&shares, &mut r).unwrap();
        }
        let idx = sample(&mut r, 5, 3).into_vec();
        let subset: Vec<_> = idx.iter().map(|&i| shares[i].clone()).collect();
        recon_ok &= reconstruct_secrets(&subset).unwrap() == before;
        let rep = sign_threshold(&out.public_key, &registry, &shares, &signers, &msg, &cfg, &mut r).unwrap();
        refresh_ok += verify(&out.public_key, &msg, &rep.signature) as usize;
    }
    line(
        13,
        "DKG and refresh",
        dkg_ok == 20 && refresh_ok == 20 && recon_ok,
        format!(
            "DKG-keyed {dkg_ok}/20 verify, refreshed {refresh_ok}/20 verify, reconstruction exact: {recon_ok}; \
             max aggregate |s1| = {max_norm}"
        ),
    )
}

fn main() -> ExitCode {
    let mut lines: Vec<Line> = thread::scope(|s| {
        let a = s.spawn(c1_c2);
        let b = s.spawn(c3_c4);
        let c = s.spawn(c7);
        let singles: Vec<Line> = vec![c5(), c6(), c8(), c9(), c10(), c11(), c12(), c13()];
        let mut all = a.join().unwrap();
        all.extend(b.join().unwrap());
        all.push(c.join().unwrap());
        all.extend(singles);
        all
    });
    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!("{} [{:>2}] {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
