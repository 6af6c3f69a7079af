// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Every seed is an explicit flag, so repeated
//! invocations print the same thing.
//!
//! Exit codes: 0 success, 1 authentication rejected, 2 usage error,
//! 3 runtime failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ternpuf_core::device::DEFAULT_CELL_COUNT;
use ternpuf_core::enrollment::DEFAULT_READ_COUNT;
use ternpuf_core::metrics::{inter_device_study, intra_device_study, InterParams, IntraParams};
use ternpuf_core::{enroll, ApgConfig, Endianness, ExpanderVariant, HashInput, Vault};

use crate::device_spec::DeviceSpec;
use crate::error::{Error, Result};
use crate::session::{interactive_session, SessionConfig, DEFAULT_MSG_SIZE};
use crate::{map_file, report_csv, vault_file, wire};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ternpuf", version, about = "Ternary SRAM-PUF password manager")]
pub struct Cli {
    /// Expander convention: a rehashes all eight rotations, b keeps the
    /// original digest as the first block.
    #[arg(long, global = true, value_enum, default_value = "b")]
    expander_variant: VariantArg,
    /// Byte order for pairing long-digest bytes into addresses.
    #[arg(long, global = true, value_enum, default_value = "be")]
    endianness: EndianArg,
    /// What the first SHA-256 is computed over.
    #[arg(long, global = true, value_enum, default_value = "padded")]
    hash_input: HashArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    A,
    B,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EndianArg {
    Be,
    Le,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HashArg {
    /// Password zero-padded to 32 bytes.
    Padded,
    /// Password bytes as entered.
    Raw,
    /// User ID followed by password.
    IdPw,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Device spec management.
    #[command(subcommand)]
    Device(DeviceCommand),
    /// Power-cycle a device repeatedly and write its ternary map.
    EnrollDevice {
        #[arg(long)]
        device_spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_READ_COUNT)]
        reads: u32,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// Output map file.
        #[arg(long)]
        map: PathBuf,
    },
    /// Print the fraction of fuzzy cells in a map.
    Noise {
        #[arg(long)]
        map: PathBuf,
    },
    /// Add a user to a vault (created if missing).
    EnrollUser {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        vault: PathBuf,
        #[command(flatten)]
        creds: Credentials,
        /// Record timestamp; the current time when omitted.
        #[arg(long)]
        created_at: Option<u64>,
    },
    /// Check credentials against one fresh power-up. Exit 0 accept, 1 reject.
    Auth {
        #[arg(long)]
        device_spec: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        vault: PathBuf,
        #[command(flatten)]
        creds: Credentials,
        /// Power-up cycle seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Terminal session on stdin/stdout.
    Interactive {
        /// Enables the address and response blocks in verbose mode.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Read the response from a fresh power-up instead of the map.
        #[arg(long, requires = "map")]
        device_spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MSG_SIZE)]
        msg_size: usize,
        #[arg(long)]
        verbose: bool,
    },
    /// Run the TCP service (cleartext).
    Serve {
        #[arg(long)]
        device_spec: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Loaded if present, created otherwise; rewritten after each ENROLL.
        #[arg(long)]
        vault: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        /// Cycle seed of the first AUTH; later requests count up from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Hamming-distance study, one CSV row per trial.
    Metrics {
        #[command(flatten)]
        creds: Credentials,
        /// Device under test (intra-device study).
        #[arg(long, required_unless_present = "inter_pairs")]
        device_spec: Option<PathBuf>,
        #[arg(long, required_unless_present = "inter_pairs")]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        /// First power-up seed for intra trials, or first device seed for
        /// inter pairs.
        #[arg(long, default_value_t = 1_000_000)]
        seed: u64,
        /// Power-up seed of the reference response when masking is off.
        #[arg(long, default_value_t = 0)]
        reference_seed: u64,
        /// Read raw addresses without skipping fuzzy cells.
        #[arg(long)]
        no_mask: bool,
        /// Compare this many pairs of fresh devices instead.
        #[arg(long, conflicts_with_all = ["map", "no_mask"])]
        inter_pairs: Option<u32>,
        /// Cell count of inter-study devices.
        #[arg(long, default_value_t = DEFAULT_CELL_COUNT)]
        cells: usize,
        /// Bias model of inter-study devices.
        #[arg(long, default_value_t = 0.95)]
        stable_fraction: f64,
        #[arg(long, default_value_t = DEFAULT_READ_COUNT)]
        reads: u32,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum DeviceCommand {
    /// Write a device spec.
    New {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CELL_COUNT)]
        cells: usize,
        #[arg(long, default_value_t = 0.95)]
        stable_fraction: f64,
        #[arg(long, default_value_t = 0.05)]
        fuzzy_low: f64,
        #[arg(long, default_value_t = 0.95)]
        fuzzy_high: f64,
        /// Destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Credentials {
    #[arg(long)]
    id: String,
    #[arg(long)]
    password: String,
}

impl Cli {
    fn apg(&self) -> ApgConfig {
        ApgConfig {
            hash_input: match self.hash_input {
                HashArg::Padded => HashInput::PaddedPassword,
                HashArg::Raw => HashInput::Password,
                HashArg::IdPw => HashInput::IdPassword,
            },
            expander: match self.expander_variant {
                VariantArg::A => ExpanderVariant::RehashAll,
                VariantArg::B => ExpanderVariant::KeepOriginal,
            },
            endianness: match self.endianness {
                EndianArg::Be => Endianness::Big,
                EndianArg::Le => Endianness::Little,
            },
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn dispatch<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(&cli, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

fn load_device(path: &Path) -> Result<ternpuf_core::SramPufDevice> {
    DeviceSpec::load(path)?.build()
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn run(
    cli: &Cli,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let apg = cli.apg();
    match &cli.command {
        Command::Device(DeviceCommand::New {
            seed,
            cells,
            stable_fraction,
            fuzzy_low,
            fuzzy_high,
            out,
        }) => {
            let mut spec = DeviceSpec::new(*seed);
            spec.cell_count = *cells;
            spec.model.stable_fraction = *stable_fraction;
            spec.model.fuzzy_bias_low = *fuzzy_low;
            spec.model.fuzzy_bias_high = *fuzzy_high;
            // fail now rather than at enrollment
            spec.build()?;
            match out {
                Some(path) => {
                    spec.save(path)?;
                    writeln!(stdout, "wrote {}", path.display())?;
                }
                None => stdout.write_all(spec.to_text().as_bytes())?,
            }
        }
        Command::EnrollDevice {
            device_spec,
            reads,
            base_seed,
            map,
        } => {
            let device = load_device(device_spec)?;
            let enrolled = enroll(&device, *reads, *base_seed)?;
            map_file::write(map, &enrolled)?;
            writeln!(
                stdout,
                "cells={} fuzzy={} noise={:.6}",
                enrolled.cell_count(),
                enrolled.fuzzy_count(),
                enrolled.puf_noise()
            )?;
        }
        Command::Noise { map } => {
            writeln!(stdout, "{:.6}", map_file::read(map)?.puf_noise())?;
        }
        Command::EnrollUser {
            map,
            vault,
            creds,
            created_at,
        } => {
            let map = map_file::read(map)?;
            let mut v = if vault.exists() {
                vault_file::load(vault)?
            } else {
                Vault::new(map.device_id())
            };
            let at = created_at.unwrap_or_else(unix_now);
            v.enroll_user(
                &apg,
                creds.id.as_bytes(),
                creds.password.as_bytes(),
                &map,
                at,
            )?;
            vault_file::save(vault, &v)?;
            writeln!(stdout, "enrolled {}", creds.id)?;
        }
        Command::Auth {
            device_spec,
            map,
            vault,
            creds,
            seed,
        } => {
            let device = load_device(device_spec)?;
            let map = map_file::read(map)?;
            let v = vault_file::load(vault)?;
            let outcome = v.authenticate(
                &apg,
                creds.id.as_bytes(),
                creds.password.as_bytes(),
                &device,
                &map,
                *seed,
            )?;
            return Ok(if outcome.is_accept() {
                writeln!(stdout, "accept")?;
                EXIT_OK
            } else {
                writeln!(stdout, "reject")?;
                EXIT_REJECT
            });
        }
        Command::Interactive {
            map,
            device_spec,
            seed,
            msg_size,
            verbose,
        } => {
            let map = map.as_deref().map(map_file::read).transpose()?;
            let snapshot = match device_spec {
                Some(path) => {
                    let device = load_device(path)?;
                    if Some(device.device_id()) != map.as_ref().map(|m| m.device_id()) {
                        return Err(ternpuf_core::Error::MapMismatch.into());
                    }
                    Some(device.power_up_read(*seed))
                }
                None => None,
            };
            let config = SessionConfig {
                msg_size: *msg_size,
                verbose: *verbose,
                apg,
                map: map.as_ref(),
                snapshot: snapshot.as_ref(),
            };
            interactive_session(&mut BufReader::new(stdin), stdout, &config)?;
        }
        Command::Serve {
            device_spec,
            map,
            vault,
            listen,
            seed,
        } => {
            let device = load_device(device_spec)?;
            let map = map_file::read(map)?;
            let v = if vault.exists() {
                vault_file::load(vault)?
            } else {
                Vault::new(map.device_id())
            };
            let service = wire::Service::new(apg, device, map, v, *seed, Some(vault.clone()))?;
            let listener = wire::bind(listen)?;
            let local = listener.local_addr().map_err(Error::Stream)?;
            writeln!(stderr, "listening on {local} (cleartext, no TLS)")?;
            wire::serve(Arc::new(service), listener)?;
        }
        Command::Metrics {
            creds,
            device_spec,
            map,
            trials,
            seed,
            reference_seed,
            no_mask,
            inter_pairs,
            cells,
            stable_fraction,
            reads,
            base_seed,
            out,
        } => {
            let (id, pw) = (creds.id.as_bytes(), creds.password.as_bytes());
            let rows = match inter_pairs {
                Some(pairs) => {
                    let (model, cell_count) = match device_spec {
                        Some(path) => {
                            let spec = DeviceSpec::load(path)?;
                            (spec.model, spec.cell_count)
                        }
                        None => (
                            ternpuf_core::BiasModel::default()
                                .with_stable_fraction(*stable_fraction),
                            *cells,
                        ),
                    };
                    let params = InterParams {
                        device_pairs: *pairs,
                        first_device_seed: *seed,
                        cell_count,
                        read_count: *reads,
                        enroll_seed: *base_seed,
                    };
                    let study = inter_device_study(&model, &apg, id, pw, &params)?;
                    writeln!(
                        stderr,
                        "pairs={} hd_mean={:.6} hd_std={:.6}",
                        study.rows.len(),
                        study.hd_mean(),
                        study.hd_std()
                    )?;
                    study.rows
                }
                None => {
                    let (Some(spec_path), Some(map_path)) = (device_spec, map) else {
                        unreachable!("clap enforces both flags without --inter-pairs");
                    };
                    let device = load_device(spec_path)?;
                    let map = map_file::read(map_path)?;
                    if device.device_id() != map.device_id() {
                        return Err(ternpuf_core::Error::MapMismatch.into());
                    }
                    let params = IntraParams {
                        trials: *trials,
                        first_seed: *seed,
                        reference_seed: *reference_seed,
                        masking: !*no_mask,
                    };
                    let study = intra_device_study(&device, &map, &apg, id, pw, &params)?;
                    writeln!(
                        stderr,
                        "noise={:.6} trials={} hd_mean={:.6} hd_max={:.6}",
                        study.noise,
                        study.rows.len(),
                        study.hd_mean(),
                        study.hd_max()
                    )?;
                    study.rows
                }
            };
            match out {
                Some(path) => {
                    let f = File::create(path).map_err(|e| Error::io(path, e))?;
                    report_csv::write_rows(BufWriter::new(f), &rows)?;
                }
                None => report_csv::write_rows(stdout, &rows)?,
            }
        }
    }
    Ok(EXIT_OK)
}
