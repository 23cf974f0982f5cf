// SPDX-License-Identifier: Apache-2.0

//! Acceptance gate. Runs each criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::collections::{BTreeSet, HashSet};
use std::collections::hash_map::RandomState;
use std::fs;
use std::hash::BuildHasher;
use std::io::{BufRead, BufReader};
use std::net::SocketAddr;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use pandora::client::replay_tcp;
use pandora::manifest::Manifest;
use pandora::server::{Server, ServerConfig};
use pandora_core::corpus::{self, challenge};
use pandora_core::exploit::{cyclic_pattern, pattern_offset, run_pipeline, PipelineConfig, MAX_PATTERN};
use pandora_core::pbf::{check_foreign_format, parse_binary, serialize_binary, ForeignKind, PandoraBinary, EXEC_FORMAT_ERROR};
use pandora_core::pov::wire::{
    decode_negotiation, encode_negotiation, NegotiationMessage, Type1Negotiation, Type1Request, Type2Negotiation,
};
use pandora_core::pov::{parse_pov, serialize_pov, PovScript};
use pandora_core::range::{
    decode_frame, encode_frame, encode_verdict, judge_type1, judge_type2, negotiate_type1, run_scripted_session,
    secret_page, Channel, Frame, NegotiationEcho, SessionConfig, SessionSeeds, Success, Verdict, DEFAULT_MASK_FLOOR,
};
use pandora_core::replay::{simulate, ReplayResult};
use pandora_core::rng::SplitMix64;
use pandora_core::svm::{run_with_io, ExitKind, FaultReason, FaultRecord, LineIo, Recording, Secret, SECRET_SIZE};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const BIN: &str = env!("CARGO_BIN_EXE_pandora");

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn pandora(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("PANDORA_PORT").env_remove("PANDORA_BUDGET").output().expect("spawn pandora")
}

fn utf8(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn is_hex8(s: &str) -> bool {
    s.len() == 8 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// Checks the 4-line type 1 report block and returns (ipmask, regmask, ipvalue, regvalue, regnum).
fn parse_type1_report(text: &str, name: &str) -> Result<[u32; 5], String> {
    let lines: Vec<&str> = text.lines().collect();
    ensure!(lines.len() == 4, "report has {} lines: {text:?}", lines.len());
    ensure!(lines[0] == format!("# {name}"), "bad title line {:?}", lines[0]);
    ensure!(lines[1] == "# negotiation type: 1", "bad type line {:?}", lines[1]);
    let masks: Vec<&str> = lines[2].strip_prefix("# type 1 masks: ").ok_or("bad masks line")?.split(' ').collect();
    ensure!(masks.len() == 2 && masks.iter().all(|m| is_hex8(m)), "bad masks {:?}", lines[2]);
    let pov: Vec<&str> = lines[3].strip_prefix("# type 1 pov: ").ok_or("bad pov line")?.split(' ').collect();
    ensure!(pov.len() == 3 && is_hex8(pov[0]) && is_hex8(pov[1]), "bad pov fields {:?}", lines[3]);
    ensure!(!pov[2].is_empty() && pov[2].bytes().all(|b| b.is_ascii_digit()), "bad regnum {:?}", pov[2]);
    let h = |s: &str| u32::from_str_radix(s, 16).unwrap();
    Ok([h(masks[0]), h(masks[1]), h(pov[0]), h(pov[1]), pov[2].parse().unwrap()])
}

/// `pandora serve` on an ephemeral port for one session.
fn spawn_serve(cb: &Path, seed: u64) -> (Child, u16) {
    let mut child = Command::new(BIN)
        .args(["serve", "--cb"])
        .arg(cb)
        .args(["--seed", &seed.to_string(), "--port", "0", "--sessions", "1"])
        .env_remove("PANDORA_PORT")
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .expect("spawn serve");
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let addr: SocketAddr = line.trim().rsplit(' ').next().unwrap().parse().expect("serve address");
    (child, addr.port())
}

fn serve_in_process(binary: &PandoraBinary, seed: u64, sessions: u64) -> (u16, thread::JoinHandle<Vec<Verdict>>) {
    let config = ServerConfig { seed, ..ServerConfig::default() };
    let server = Server::bind("127.0.0.1:0", binary.clone(), config).unwrap();
    let port = server.local_addr().unwrap().port();
    (port, thread::spawn(move || server.serve(Some(sessions)).unwrap()))
}

fn replay_once(binary: &PandoraBinary, script: &PovScript, seed: u64) -> (ReplayResult, Verdict) {
    let (port, handle) = serve_in_process(binary, seed, 1);
    let r = replay_tcp(script, "127.0.0.1", port, Duration::from_secs(10)).expect("replay");
    let v = handle.join().unwrap().pop().unwrap();
    (r, v)
}

fn crit1() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = pandora(&["corpus", "build", "--out-dir", d.to_str().unwrap()]);
    ensure!(out.status.success(), "corpus build failed: {}", utf8(&out.stderr));
    let entry = Manifest::bundled().get("greeter").cloned().ok_or("greeter missing from manifest")?;
    let seed_file = d.join("dialog.txt");
    fs::write(&seed_file, entry.seed_input.as_deref().unwrap_or_default()).unwrap();
    let cb = d.join("greeter.pbf");
    let (cb_s, seed_s) = (cb.to_str().unwrap(), seed_file.to_str().unwrap());

    let fuzz = pandora(&["fuzz", "--cb", cb_s, "--seed-input", seed_s, "--execs", "20000"]);
    ensure!(fuzz.status.success(), "fuzz found no crash: {}", utf8(&fuzz.stdout));

    let pov_path = d.join("out.pov");
    let ex = pandora(&["exploit", "--cb", cb_s, "--seed-input", seed_s, "--out", pov_path.to_str().unwrap()]);
    ensure!(ex.status.success(), "exploit failed: {}", utf8(&ex.stderr));
    let script = parse_pov(&fs::read_to_string(&pov_path).unwrap()).map_err(|e| e.to_string())?;
    ensure!(script.type1_request().is_some(), "synthesized POV is not type 1");

    let mut targets = BTreeSet::new();
    for seed in [0x11u64, 0x2222, 0x3333_3333] {
        let (mut child, port) = spawn_serve(&cb, seed);
        let r = pandora(&["replay", "--pov", pov_path.to_str().unwrap(), "--port", &port.to_string()]);
        child.wait().unwrap();
        let report = utf8(&r.stdout);
        ensure!(r.status.success(), "seed {seed:#x}: replay exit {:?}: {report}{}", r.status.code(), utf8(&r.stderr));
        ensure!(utf8(&r.stderr).contains("success: type1"), "seed {seed:#x}: not type1: {}", utf8(&r.stderr));
        let f = parse_type1_report(&report, "out.pov")?;
        targets.insert((f[2], f[3]));
    }
    ensure!(targets.len() == 3, "negotiated targets repeated across seeds: {targets:?}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    Ok(format!("3/3 server seeds type1, report format exact, {:.1}s", elapsed.as_secs_f64()))
}

fn crit2() -> Check {
    let greeter = challenge("greeter").unwrap();
    let reference = greeter.reference_pov.clone().ok_or("greeter has no reference POV")?;
    let entry = Manifest::bundled().get("greeter").cloned().unwrap();
    let mut log = Vec::new();
    let seeds = vec![entry.seed_input.unwrap_or_default().into_bytes()];
    let synth = run_pipeline(&greeter.binary, &seeds, &PipelineConfig::default(), &mut log)
        .map_err(|e| format!("pipeline: {e}"))?
        .script;
    let mut regnums = Vec::new();
    for (label, script, seed) in [("greeter_ref", &reference, 0xA1u64), ("synthesized", &synth, 0xB2)] {
        let (r, v) = replay_once(&greeter.binary, script, seed);
        ensure!(r.succeeded() && v.success == Success::Type1, "{label}: success {}", v.success);
        let NegotiationEcho::Type1(n) = v.negotiation else { return Err(format!("{label}: no type 1 negotiation")) };
        regnums.push(n.regnum);
    }
    ensure!(regnums == [5, 5], "regnums {regnums:?}, expected [5, 5]");
    Ok("greeter_ref and synthesized both type1 with regnum 5".into())
}

/// Source files under crates/*/src.
fn crate_sources() -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    let mut stack: Vec<PathBuf> = fs::read_dir(workspace().join("crates"))
        .unwrap()
        .map(|e| e.unwrap().path().join("src"))
        .filter(|p| p.is_dir())
        .collect();
    while let Some(p) = stack.pop() {
        for e in fs::read_dir(&p).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|x| x == "rs") {
                let text = fs::read_to_string(&path).unwrap();
                out.push((path, text));
            }
        }
    }
    out
}

fn crit3() -> Check {
    let corpus = corpus::build_corpus().map_err(|e| e.to_string())?;
    for ch in &corpus {
        let bytes = serialize_binary(&ch.binary).unwrap();
        let kind = check_foreign_format(&bytes);
        ensure!(
            !matches!(kind, ForeignKind::Elf | ForeignKind::Pe | ForeignKind::MachO) && kind == ForeignKind::Pbf,
            "{} classified as {kind}",
            ch.name
        );
    }

    let fixtures = workspace().join("crates/core/tests/fixtures");
    let mut rejected = 0;
    for e in fs::read_dir(&fixtures).unwrap() {
        let path = e.unwrap().path();
        let bytes = fs::read(&path).unwrap();
        match parse_binary(&bytes) {
            Err(err) => ensure!(err.to_string() == EXEC_FORMAT_ERROR, "{}: message {err}", path.display()),
            Ok(_) => return Err(format!("{} parsed as PBF", path.display())),
        }
        let out = pandora(&["run", path.to_str().unwrap()]);
        ensure!(out.status.code() == Some(1), "run {}: exit {:?}", path.display(), out.status.code());
        ensure!(utf8(&out.stderr).trim() == EXEC_FORMAT_ERROR, "run {}: stderr {:?}", path.display(), utf8(&out.stderr));
        rejected += 1;
    }
    ensure!(rejected >= 3, "only {rejected} fixtures");

    let counter = challenge("counter").unwrap();
    let mut io = LineIo::new(Vec::new());
    let (kind, m) = run_with_io(&counter.binary, 0, &secret_page(0), &mut io, 10_000, Recording::NONE).unwrap();
    ensure!(kind == ExitKind::BudgetExhausted && m.steps() == 10_000, "counter ended {kind:?}");
    ensure!(io.output.starts_with(b"0\n1\n2\n"), "counter printed {:?}", utf8(&io.output[..io.output.len().min(16)]));

    // The SVM is the only consumer of a parsed binary: nothing in the crates
    // hands bytes to the host loader, a process spawner or a dynamic linker.
    const FORBIDDEN: &[&str] = &[
        "process::Command",
        "Command::new",
        "CommandExt",
        "execv",
        "posix_spawn",
        "fork(",
        "dlopen",
        "libloading",
        "memmap",
        "mmap(",
        "PROT_EXEC",
        "transmute",
        "extern \"C\"",
        "asm!",
    ];
    let sources = crate_sources();
    ensure!(sources.len() > 10, "source scan found {} files", sources.len());
    for (path, text) in &sources {
        for f in FORBIDDEN {
            ensure!(!text.contains(f), "{} contains {f:?}", path.display());
        }
        for (i, line) in text.lines().enumerate() {
            if line.contains("std::process") && !line.contains("std::process::exit") {
                return Err(format!("{}:{} uses std::process", path.display(), i + 1));
            }
        }
        let is_svm = path.components().any(|c| c.as_os_str() == "svm");
        ensure!(is_svm || !text.contains("fn load("), "{} defines a loader", path.display());
    }
    Ok(format!(
        "corpus is PBF, {rejected} host executables rejected, counter runs in SVM, no other load path in {} files",
        sources.len()
    ))
}

fn crit4() -> Check {
    let greeter = challenge("greeter").unwrap();
    let input = b"1\nhello\n2\n3\n".to_vec();
    let trace = |seed| {
        let mut io = LineIo::new(input.clone());
        let (k, m) = run_with_io(&greeter.binary, seed, &secret_page(seed), &mut io, 1_000_000, Recording::ALL).unwrap();
        m.into_outcome(k, io.output)
    };
    let (a, b) = (trace(42), trace(42));
    ensure!(!a.trace.is_empty() && a == b, "exec outcomes differ");

    let reference = greeter.reference_pov.clone().unwrap();
    let seeds = SessionSeeds::from_server_seed(0xD00D);
    let s1 = simulate(&greeter.binary, &reference, seeds, SessionConfig::default()).map_err(|e| e.to_string())?;
    let s2 = simulate(&greeter.binary, &reference, seeds, SessionConfig::default()).map_err(|e| e.to_string())?;
    ensure!(s1.transcript == s2.transcript, "in-process transcripts differ");
    let client: Vec<u8> = s1
        .transcript
        .iter()
        .filter_map(|t| match t {
            pandora_core::replay::TranscriptEntry::Sent(f) => Some(encode_frame(f)),
            _ => None,
        })
        .flatten()
        .collect();
    let (o1, v1) = run_scripted_session(&greeter.binary, &client, seeds, SessionConfig::default()).unwrap();
    let (o2, v2) = run_scripted_session(&greeter.binary, &client, seeds, SessionConfig::default()).unwrap();
    ensure!(o1 == o2 && encode_verdict(&v1) == encode_verdict(&v2), "scripted session output differs");
    ensure!(v1.success == Success::Type1, "scripted session not type1");

    let (_, t1) = replay_once(&greeter.binary, &reference, 0xFEED);
    let (_, t2) = replay_once(&greeter.binary, &reference, 0xFEED);
    ensure!(encode_verdict(&t1) == encode_verdict(&t2), "TCP verdict frames differ");

    let entry = Manifest::bundled().get("greeter").cloned().unwrap();
    let fuzz_seeds = vec![entry.seed_input.unwrap_or_default().into_bytes()];
    let pov = || {
        let mut log = Vec::new();
        let e = run_pipeline(&greeter.binary, &fuzz_seeds, &PipelineConfig::default(), &mut log).unwrap();
        (serialize_pov(&e.script), log)
    };
    let (p1, l1) = pov();
    let (p2, l2) = pov();
    ensure!(p1 == p2 && l1 == l2, "pipeline output differs");
    Ok(format!("{} trace steps, session bytes, verdict frames and POV text identical", a.trace.len()))
}

fn random_message(rng: &mut SplitMix64) -> NegotiationMessage {
    match rng.below(5) {
        0 => NegotiationMessage::Type1Request(Type1Request {
            ipmask: rng.next_u32(),
            regmask: rng.next_u32(),
            regnum: rng.next_u32(),
        }),
        1 => NegotiationMessage::Type1Response { ipvalue: rng.next_u32(), regvalue: rng.next_u32() },
        2 => NegotiationMessage::Type2Request,
        3 => NegotiationMessage::Type2Response(Type2Negotiation {
            addr: rng.next_u32(),
            size: rng.next_u32(),
            length: rng.next_u32(),
        }),
        _ => {
            let mut b = vec![0; rng.below(64) as usize];
            rng.fill_bytes(&mut b);
            NegotiationMessage::Type2Submission(b)
        }
    }
}

/// A mask with exactly `k` bits set.
fn mask_with_popcount(rng: &mut SplitMix64, k: u32) -> u32 {
    let mut m = 0u32;
    while m.count_ones() < k {
        m |= 1 << rng.below(32);
    }
    m
}

fn oracle_type1(fault: &FaultRecord, n: &Type1Negotiation) -> bool {
    let Some(&reg) = fault.regs.get(n.regnum as usize) else { return false };
    (0..32).all(|bit| {
        let set = |w: u32| (w >> bit) & 1;
        (set(n.ipmask) == 0 || set(fault.fault_ip) == set(n.ipvalue))
            && (set(n.regmask) == 0 || set(reg) == set(n.regvalue))
    })
}

fn crit5() -> Check {
    let mut rng = SplitMix64::new(0x5EED_0005);
    let channels = [Channel::Stdin, Channel::Stdout, Channel::Negotiation, Channel::Verdict];
    for i in 0..10_000 {
        let len = if i % 100 == 0 { rng.below(65_537) } else { rng.below(300) } as usize;
        let mut payload = vec![0; len];
        rng.fill_bytes(&mut payload);
        let f = Frame::new(channels[rng.below(4) as usize], payload);
        let bytes = encode_frame(&f);
        let decoded = decode_frame(&bytes).map_err(|e| e.to_string())?;
        ensure!(decoded == Some((f, bytes.len())), "frame {i} did not round-trip");
    }
    for i in 0..10_000 {
        let m = random_message(&mut rng);
        ensure!(decode_negotiation(m.kind(), &encode_negotiation(&m)) == Ok(m.clone()), "message {i} {m:?}");
    }

    let mut rejected = 0;
    for k in 0..=32 {
        for _ in 0..200 {
            let (weak, strong) = (mask_with_popcount(&mut rng, k), mask_with_popcount(&mut rng, 32.max(k)));
            for (ipmask, regmask) in [(weak, strong), (strong, weak)] {
                let req = Type1Request { ipmask, regmask, regnum: rng.below(8) as u32 };
                let ok = negotiate_type1(req, &mut rng, DEFAULT_MASK_FLOOR).is_ok();
                ensure!(ok == (k >= 20), "popcount {k}: accepted={ok}");
                rejected += usize::from(!ok);
            }
        }
    }

    let mut agree_true = 0;
    for i in 0..1000 {
        let n = Type1Negotiation {
            ipmask: rng.next_u32(),
            regmask: rng.next_u32(),
            regnum: if i % 50 == 0 { 8 + rng.below(4) as u32 } else { rng.below(8) as u32 },
            ipvalue: rng.next_u32(),
            regvalue: rng.next_u32(),
        };
        let mut regs = [0u32; 8];
        regs.iter_mut().for_each(|r| *r = rng.next_u32());
        let mut fault_ip = rng.next_u32();
        if rng.below(2) == 0 && (n.regnum as usize) < 8 {
            // Satisfy the masks, then maybe break one masked bit.
            fault_ip = (n.ipvalue & n.ipmask) | (fault_ip & !n.ipmask);
            let r = &mut regs[n.regnum as usize];
            *r = (n.regvalue & n.regmask) | (*r & !n.regmask);
            if rng.below(3) == 0 && n.ipmask != 0 {
                fault_ip ^= 1 << n.ipmask.trailing_zeros();
            }
        }
        let fault = FaultRecord { reason: FaultReason::ExecFault, fault_ip, insn_ip: rng.next_u32(), access_addr: None, regs };
        let expect = oracle_type1(&fault, &n);
        ensure!(judge_type1(Some(&fault), &n) == expect, "pair {i}: {n:?} {fault:?}");
        ensure!(!judge_type1(None, &n), "judge_type1 accepted a missing fault");
        agree_true += usize::from(expect);
    }
    ensure!(agree_true > 100, "only {agree_true} positive pairs exercised");
    Ok(format!("10000 frames, 10000 messages, {rejected} weak masks rejected, 1000 judge pairs ({agree_true} true)"))
}

fn crit6() -> Check {
    let n = 4096;
    let p = cyclic_pattern(n).unwrap();
    for i in 0..=n - 4 {
        let w = [p[i], p[i + 1], p[i + 2], p[i + 3]];
        ensure!(pattern_offset(w, n) == Some(i), "offset of window {i}");
    }
    let full = cyclic_pattern(MAX_PATTERN).unwrap();
    ensure!(full.len() == 20280, "pattern length {}", full.len());
    let distinct: HashSet<&[u8]> = full.windows(4).collect();
    ensure!(distinct.len() == full.len() - 3, "{} distinct of {}", distinct.len(), full.len() - 3);
    Ok(format!("{} offsets exact, {} windows distinct", n - 3, distinct.len()))
}

fn brute_force_contains(secret: &[u8], size: usize, sub: &[u8], length: usize) -> bool {
    if sub.len() != length || sub.is_empty() {
        return false;
    }
    let hay = &secret[..size.min(secret.len())];
    let mut i = 0;
    while i + sub.len() <= hay.len() {
        let mut j = 0;
        while j < sub.len() && hay[i + j] == sub[j] {
            j += 1;
        }
        if j == sub.len() {
            return true;
        }
        i += 1;
    }
    false
}

fn crit7() -> Check {
    let leaky = challenge("leaky").unwrap();
    let reference = leaky.reference_pov.clone().ok_or("leaky has no reference POV")?;
    let state = RandomState::new();
    let seeds: Vec<u64> = (0..5u64).map(|i| state.hash_one(i)).collect();
    for &seed in &seeds {
        let (r, v) = replay_once(&leaky.binary, &reference, seed);
        ensure!(r.succeeded() && v.success == Success::Type2, "seed {seed:#x}: success {} ({})", v.success, v.note);
    }

    let mut rng = SplitMix64::new(0x5EED_0007);
    let mut positives = 0;
    for i in 0..1000 {
        let mut secret: Box<Secret> = Box::new([0; SECRET_SIZE]);
        if i % 4 == 0 {
            // Low-entropy pages make accidental matches likely.
            secret.iter_mut().for_each(|b| *b = rng.below(3) as u8);
        } else {
            rng.fill_bytes(&mut secret[..]);
        }
        let n = Type2Negotiation {
            addr: 0x4347_0000,
            size: [SECRET_SIZE as u32, 64, 4, 3, 0][rng.below(5) as usize],
            length: [4, 4, 4, 1, 0][rng.below(5) as usize],
        };
        let sub: Vec<u8> = match rng.below(3) {
            0 => {
                let len = n.length as usize;
                let at = rng.below((SECRET_SIZE - len) as u64 + 1) as usize;
                secret[at..at + len].to_vec()
            }
            1 => (0..n.length).map(|_| rng.below(3) as u8).collect(),
            _ => {
                let mut b = vec![0; rng.below(8) as usize];
                rng.fill_bytes(&mut b);
                b
            }
        };
        let expect = brute_force_contains(&secret[..], n.size as usize, &sub, n.length as usize);
        ensure!(judge_type2(&sub, &secret, &n) == expect, "submission {i}: {sub:02x?} size {} length {}", n.size, n.length);
        positives += usize::from(expect);
    }
    ensure!(positives > 100, "only {positives} positive submissions");
    Ok(format!("leaky_ref type2 for seeds {seeds:x?}; 1000 submissions agree ({positives} true)"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("end-to-end fuzz, exploit, serve, replay on greeter", crit1),
        ("reference and synthesized POVs agree on regnum", crit2),
        ("isolation by incompatibility", crit3),
        ("determinism", crit4),
        ("protocol conformance", crit5),
        ("cyclic pattern oracle", crit6),
        ("type 2 disclosure", crit7),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {}: {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
