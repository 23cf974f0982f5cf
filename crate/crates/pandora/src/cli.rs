// SPDX-License-Identifier: Apache-2.0

//! The `pandora` command line. Exit codes: 0 success, 1 operational failure,
//! 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;
use pandora_core::asm::{assemble, disassemble};
use pandora_core::corpus;
use pandora_core::exploit::{exploit_crashes, FuzzConfig, PipelineConfig, ReplayConfig};
use pandora_core::pbf::{parse_binary, serialize_binary, verify_binary, PandoraBinary, PbfError, EXEC_FORMAT_ERROR};
use pandora_core::pov::{parse_pov, serialize_pov};
use pandora_core::range::{secret_page, SessionConfig};
use pandora_core::svm::{run_with_io, ExitKind, Recording, Recv, SysIo, DEFAULT_BUDGET};

use crate::client::replay_tcp;
use crate::server::{Server, ServerConfig, DEFAULT_PORT};
use crate::workers::fuzz_parallel;

#[derive(Debug, Parser)]
#[command(name = "pandora", version, about = "Pandora cyber range")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble a source file into a PBF binary.
    Build {
        src: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a file against the PBF container rules.
    Verify { bin: PathBuf },
    /// Print a binary as assembly.
    Disasm { bin: PathBuf },
    /// Run a binary locally with this terminal as fd 0/1.
    Run {
        bin: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "PANDORA_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Serve a challenge binary to POV clients.
    Serve {
        #[arg(long)]
        cb: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "PANDORA_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, env = "PANDORA_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Exit after this many sessions.
        #[arg(long)]
        sessions: Option<u64>,
        /// Seconds a session waits for client input.
        #[arg(long, default_value_t = 30)]
        idle_timeout: u64,
    },
    /// Replay a POV script against a server and print the report.
    Replay {
        #[arg(long)]
        pov: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "PANDORA_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Seconds.
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
    },
    /// Fuzz a binary's stdin for crashes.
    Fuzz {
        #[arg(long)]
        cb: PathBuf,
        #[arg(long = "seed-input", required = true)]
        seed_input: Vec<PathBuf>,
        #[arg(long, default_value_t = 50_000)]
        execs: u64,
        #[arg(long, default_value_t = 0)]
        rng: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        workers: u64,
        /// Write each crash input here as crash-NNN.bin.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Fuzz, then turn a crash into a verified type 1 POV.
    Exploit {
        #[arg(long)]
        cb: PathBuf,
        #[arg(long = "seed-input", required = true)]
        seed_input: Vec<PathBuf>,
        /// Defaults to <cb stem>.pov next to the binary.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 50_000)]
        execs: u64,
        #[arg(long, default_value_t = 0)]
        rng: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        workers: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Transcript log; defaults to <out>.log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Bundled challenge corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    /// Write every corpus binary, reference POV and the manifest.
    Build {
        #[arg(long, default_value = "corpus-out")]
        out_dir: PathBuf,
    },
}

/// A failure whose message has already been printed.
#[derive(Debug)]
struct Reported;

impl std::fmt::Display for Reported {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("failed")
    }
}

impl std::error::Error for Reported {}

/// Parses `args` (program name first) and runs the command.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            if !e.is::<Reported>() {
                eprintln!("pandora: {e:#}");
            }
            1
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Loads a binary for execution. Non-PBF files get the shell's message.
pub fn load_binary(path: &Path) -> Result<PandoraBinary> {
    let bytes = read(path)?;
    match parse_binary(&bytes) {
        Ok(b) => Ok(b),
        Err(PbfError::Format { .. }) => {
            eprintln!("{EXEC_FORMAT_ERROR}");
            Err(Reported.into())
        }
        Err(e) => Err(anyhow!("{}: {e}", path.display())),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Build { src, out } => {
            let text = fs::read_to_string(&src).with_context(|| format!("reading {}", src.display()))?;
            let bin = assemble(&text).map_err(|e| anyhow!("{}: {e}", src.display()))?;
            write(&out, &serialize_binary(&bin)?)?;
            info!("wrote {}", out.display());
            Ok(0)
        }
        Command::Verify { bin } => {
            let bytes = read(&bin)?;
            let report = verify_binary(&bytes);
            println!("{}: {}", bin.display(), report.foreign_kind);
            println!("{report}");
            if report.passed() {
                return Ok(0);
            }
            if parse_binary(&bytes).is_err_and(|e| matches!(e, PbfError::Format { .. })) {
                eprintln!("{EXEC_FORMAT_ERROR}");
            }
            Ok(1)
        }
        Command::Disasm { bin } => {
            print!("{}", disassemble(&load_binary(&bin)?));
            Ok(0)
        }
        Command::Run { bin, seed, budget } => {
            let binary = load_binary(&bin)?;
            let stdin = io::stdin();
            let mut io = TerminalIo { input: stdin.lock(), line: Vec::new(), pos: 0, eof: false, out: io::stdout() };
            let (kind, m) = run_with_io(&binary, seed, &secret_page(seed), &mut io, budget, Recording::NONE)?;
            match kind {
                ExitKind::Exited(status) => {
                    eprintln!("exited with status {status} after {} instructions", m.steps());
                    Ok(0)
                }
                ExitKind::Faulted(f) => {
                    eprintln!("fault: {f}");
                    Ok(1)
                }
                ExitKind::BudgetExhausted => {
                    eprintln!("budget exhausted after {} instructions", m.steps());
                    Ok(1)
                }
            }
        }
        Command::Serve { cb, seed, budget, port, host, sessions, idle_timeout } => {
            let binary = load_binary(&cb)?;
            let config = ServerConfig {
                seed,
                session: SessionConfig { budget, ..SessionConfig::default() },
                idle_timeout: Duration::from_secs(idle_timeout),
            };
            let server = Server::bind((host.as_str(), port), binary, config)
                .with_context(|| format!("binding {host}:{port}"))?;
            eprintln!("serving {} on {}", file_name(&cb), server.local_addr()?);
            server.serve(sessions)?;
            Ok(0)
        }
        Command::Replay { pov, host, port, timeout } => {
            let text = fs::read_to_string(&pov).with_context(|| format!("reading {}", pov.display()))?;
            let script = parse_pov(&text).map_err(|e| anyhow!("{}: {e}", pov.display()))?;
            if !(timeout.is_finite() && timeout > 0.0) {
                bail!("--timeout must be positive");
            }
            let result = replay_tcp(&script, &host, port, Duration::from_secs_f64(timeout))?;
            println!("{}", result.report(&file_name(&pov)));
            let v = &result.verdict;
            eprintln!("success: {}, crashed: {}", v.success, v.crashed());
            if let Some(f) = v.fault() {
                eprintln!("fault: {f}");
            }
            if !v.note.is_empty() {
                eprintln!("note: {}", v.note);
            }
            Ok(if result.succeeded() { 0 } else { 1 })
        }
        Command::Fuzz { cb, seed_input, execs, rng, workers, out_dir } => {
            let binary = load_binary(&cb)?;
            let seeds = seed_input.iter().map(|p| read(p)).collect::<Result<Vec<_>>>()?;
            let config = FuzzConfig { execs, rng_seed: rng, ..FuzzConfig::default() };
            let crashes = fuzz_parallel(&binary, &seeds, config, workers as usize);
            if let Some(dir) = &out_dir {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            for (i, c) in crashes.iter().enumerate() {
                println!("crash {i}: {} bytes, {}", c.bytes.len(), c.fault);
                if let Some(dir) = &out_dir {
                    write(&dir.join(format!("crash-{i:03}.bin")), &c.bytes)?;
                }
            }
            println!("{} distinct crashes in {execs} execs", crashes.len());
            Ok(if crashes.is_empty() { 1 } else { 0 })
        }
        Command::Exploit { cb, seed_input, out, execs, rng, workers, trials, log } => {
            let binary = load_binary(&cb)?;
            let seeds = seed_input.iter().map(|p| read(p)).collect::<Result<Vec<_>>>()?;
            let out = out.unwrap_or_else(|| cb.with_extension("pov"));
            let log_path = log.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".log");
                PathBuf::from(p)
            });
            let config = PipelineConfig {
                fuzz: FuzzConfig { execs, rng_seed: rng, ..FuzzConfig::default() },
                replay: ReplayConfig::default(),
                trials,
                ..PipelineConfig::default()
            };
            let mut transcript = vec![format!("target: {}", file_name(&cb))];
            let crashes = fuzz_parallel(&binary, &seeds, config.fuzz, workers as usize);
            transcript.push(format!("fuzz: {execs} execs, {workers} workers, {} distinct crashes", crashes.len()));
            let result = exploit_crashes(&binary, &crashes, &config, &mut transcript);
            let mut log_text = transcript.join("\n");
            log_text.push('\n');
            write(&log_path, log_text.as_bytes())?;
            let exploit = result?;
            let text = format!("# {}: synthesized type 1 POV\n{}", file_name(&cb), serialize_pov(&exploit.script));
            write(&out, text.as_bytes())?;
            println!("{}", out.display());
            Ok(0)
        }
        Command::Corpus { action: CorpusAction::Build { out_dir } } => {
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            for src in &corpus::SOURCES {
                let ch = corpus::build_source(src)?;
                let path = out_dir.join(format!("{}.pbf", ch.name));
                write(&path, &serialize_binary(&ch.binary)?)?;
                println!("{}", path.display());
                if let (Some(file), Some(text)) = (src.pov_file, src.pov) {
                    write(&out_dir.join(file), text.as_bytes())?;
                }
            }
            write(&out_dir.join("manifest.toml"), corpus::MANIFEST.as_bytes())?;
            Ok(0)
        }
    }
}

/// fd 0/1 on the real terminal, one input line per receive.
struct TerminalIo<R, W> {
    input: R,
    line: Vec<u8>,
    pos: usize,
    eof: bool,
    out: W,
}

impl<R: BufRead, W: Write> SysIo for TerminalIo<R, W> {
    fn receive(&mut self, buf: &mut [u8]) -> Recv {
        if self.pos == self.line.len() {
            self.line.clear();
            self.pos = 0;
            if self.eof || matches!(self.input.read_until(b'\n', &mut self.line), Ok(0) | Err(_)) {
                self.eof = true;
                return Recv::Closed;
            }
        }
        let n = (self.line.len() - self.pos).min(buf.len());
        buf[..n].copy_from_slice(&self.line[self.pos..self.pos + n]);
        self.pos += n;
        Recv::Data(n)
    }

    fn transmit(&mut self, data: &[u8]) {
        let _ = self.out.write_all(data);
        let _ = self.out.flush();
    }

    fn stdin_ready(&mut self) -> bool {
        true
    }
}
