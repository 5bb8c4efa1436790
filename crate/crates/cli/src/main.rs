use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use circdlp::attack::{full_attack, DlogInstance};
use circdlp::bench::bench_exponentiation;
use circdlp::params::{
    desk_factorization, generate_generator, preset, validate_params, ParamSet, DEFAULT_EXP_BITS,
    DEFAULT_MIN_ORDER_BITS, PRESET_NAMES,
};
use circdlp::protocol::{
    dh_shared, elgamal_decrypt, elgamal_encrypt, keygen, message_capacity, Ciphertext, KeyFile,
};
use circdlp::{FieldSpec, Policy, SquarePermutation};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

/// Discrete-logarithm toolkit over circulant matrices.
#[derive(Parser)]
#[command(name = "circdlp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Shipped parameter set
    #[arg(long, conflicts_with = "params", value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    /// Parameter-set (or key) file
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
    /// Write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a parameter set over F_q with q = p^k
    GenParams {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = DEFAULT_MIN_ORDER_BITS)]
        min_order_bits: u32,
        #[arg(long, default_value_t = DEFAULT_EXP_BITS)]
        exp_bits: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Check every validity condition; exit 1 if any fails
    Validate {
        #[command(flatten)]
        source: Source,
        /// Override the set's own order threshold
        #[arg(long)]
        min_order_bits: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Create a key pair
    Keygen {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Run a two-party key agreement and compare both secrets
    DhDemo {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Encrypt a message to a key file
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        /// UTF-8 message
        #[arg(long, conflicts_with = "message_hex", required_unless_present = "message_hex")]
        message: Option<String>,
        #[arg(long)]
        message_hex: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Decrypt a ciphertext with a private key file
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        /// Ciphertext as hex
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        ciphertext: Option<String>,
        /// File holding the ciphertext hex
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Run the structural attacks on an instance
    Attack {
        /// Instance file; otherwise a known-answer instance is drawn
        #[arg(long, conflicts_with_all = ["preset", "params"])]
        instance: Option<PathBuf>,
        #[command(flatten)]
        source: Source,
        /// Secret exponent for the drawn instance
        #[arg(long)]
        m: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also save the drawn instance
        #[arg(long)]
        save_instance: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Count and time exponentiation
    Bench {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 128)]
        exp_bits: u32,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Print the squaring permutation for odd d
    SquarePerm {
        #[arg(long)]
        d: usize,
    },
}

enum Failure {
    Invalid(String),
    Usage(String),
    Runtime(String),
}

impl From<circdlp::Error> for Failure {
    fn from(e: circdlp::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn emit(out: &Output, text: &str) -> CliResult {
    match &out.out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => print_line(text),
    }
}

/// Stdout write that treats a closed pipe as success.
fn print_line(text: &str) -> CliResult {
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Runtime(e.to_string())),
        _ => Ok(()),
    }
}

fn emit_json(out: &Output, value: &Value) -> CliResult {
    emit(out, &serde_json::to_string_pretty(value).expect("serializable"))
}

fn load_params(source: &Source) -> Result<ParamSet, Failure> {
    match (&source.preset, &source.params) {
        (Some(name), _) => Ok(preset(name)?),
        (None, Some(path)) => Ok(ParamSet::from_json(&read(path)?)?),
        (None, None) => Err(Failure::Usage("one of --preset or --params is required".into())),
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn require_valid(ps: &ParamSet) -> CliResult {
    if ps.is_valid() {
        Ok(())
    } else {
        Err(Failure::Invalid(format!(
            "parameter set fails: {}",
            ps.checks.failures().join(", ")
        )))
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::GenParams { d, p, k, min_order_bits, exp_bits, seed, out } => {
            let spec = FieldSpec::from_parts(p, k, None)?;
            let policy = Policy { min_order_bits, exp_bits };
            let factors = desk_factorization(spec, d);
            let a = generate_generator(spec, d, policy, factors.as_deref(), &mut rng(seed))?;
            let mut file = ParamSet::new(a, policy, factors)?.to_file();
            file.seed = Some(seed);
            emit(&out, &serde_json::to_string_pretty(&file).expect("serializable"))
        }
        Command::Validate { source, min_order_bits, out } => {
            let ps = load_params(&source)?;
            let report = validate_params(&ps, min_order_bits.unwrap_or(ps.policy.min_order_bits));
            emit_json(&out, &serde_json::to_value(&report).expect("serializable"))?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Invalid(format!("failed: {}", report.failures.join(", "))))
            }
        }
        Command::Keygen { source, seed, out } => {
            let ps = load_params(&source)?;
            require_valid(&ps)?;
            let mut file = keygen(&ps, &mut rng(seed))?.to_file();
            file.params.seed = Some(seed);
            emit(&out, &serde_json::to_string_pretty(&file).expect("serializable"))
        }
        Command::DhDemo { source, seed, out } => {
            let ps = load_params(&source)?;
            require_valid(&ps)?;
            let mut r = rng(seed);
            let alice = keygen(&ps, &mut r)?;
            let bob = keygen(&ps, &mut r)?;
            let sa = dh_shared(&alice.secret_m, &bob.public)?;
            let sb = dh_shared(&bob.secret_m, &alice.public)?;
            let agree = sa.value == sb.value;
            emit_json(
                &out,
                &json!({
                    "seed": seed,
                    "d": ps.d,
                    "alice_public_hex": alice.public.to_hex(),
                    "bob_public_hex": bob.public.to_hex(),
                    "alice_shared_hex": sa.value.to_hex(),
                    "bob_shared_hex": sb.value.to_hex(),
                    "agree": agree,
                    "degenerate": sa.degenerate || sb.degenerate,
                }),
            )?;
            if agree {
                Ok(())
            } else {
                Err(Failure::Runtime("shared secrets differ".into()))
            }
        }
        Command::Encrypt { key, message, message_hex, seed, out } => {
            let (ps, public) = KeyFile::from_json(&read(&key)?)?.public_key()?;
            require_valid(&ps)?;
            let msg = match (message, message_hex) {
                (Some(m), _) => m.into_bytes(),
                (None, Some(h)) => hex::decode(h.trim()).map_err(|e| Failure::Usage(format!("--message-hex: {e}")))?,
                (None, None) => unreachable!("clap requires one"),
            };
            if message_capacity(ps.spec, ps.d).is_none() {
                return Err(Failure::Runtime(format!(
                    "d = {} over F_{} is too small to carry a byte message",
                    ps.d,
                    ps.q()
                )));
            }
            let ct = elgamal_encrypt(&ps, &public, &msg, &mut rng(seed))?;
            emit(&out, &ct.to_hex())
        }
        Command::Decrypt { key, ciphertext, input, out } => {
            let kp = KeyFile::from_json(&read(&key)?)?.key_pair()?;
            let hex_text = match (ciphertext, input) {
                (Some(c), _) => c,
                (None, Some(path)) => read(&path)?,
                (None, None) => unreachable!("clap requires one"),
            };
            let ct = Ciphertext::from_hex(kp.params.spec, hex_text.trim())?;
            let msg = elgamal_decrypt(&kp, &ct)?;
            emit_json(
                &out,
                &json!({
                    "message_hex": hex::encode(&msg),
                    "message_utf8": String::from_utf8(msg).ok(),
                }),
            )
        }
        Command::Attack { instance, source, m, seed, save_instance, out } => {
            let (inst, drawn) = match instance {
                Some(path) => (DlogInstance::from_json(&read(&path)?)?, false),
                None => {
                    let ps = load_params(&source)?;
                    let m = match m {
                        Some(text) => BigUint::parse_bytes(text.trim().as_bytes(), 10)
                            .ok_or_else(|| Failure::Usage(format!("--m {text:?} is not a decimal integer")))?,
                        None => {
                            use rand::Rng;
                            let bits = ps.policy.exp_bits.min(64);
                            let top = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
                            rng(seed).gen_range(0..=top).into()
                        }
                    };
                    (DlogInstance::known_answer(&ps, m)?, true)
                }
            };
            if let Some(path) = save_instance {
                fs::write(&path, inst.to_json()).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            }
            let report = full_attack(&inst);
            emit_json(
                &out,
                &json!({
                    "seed": drawn.then_some(seed),
                    "d": inst.params.d,
                    "report": report,
                }),
            )
        }
        Command::Bench { source, exp_bits, reps, seed, out } => {
            let ps = load_params(&source)?;
            require_valid(&ps)?;
            let report = bench_exponentiation(&ps, exp_bits, reps, seed)?;
            emit_json(&out, &serde_json::to_value(&report).expect("serializable"))
        }
        Command::SquarePerm { d } => {
            let perm = SquarePermutation::new(d).map_err(|e| Failure::Usage(e.to_string()))?;
            let line: Vec<String> = perm.table().iter().map(usize::to_string).collect();
            print_line(&line.join(" "))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("circdlp: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("circdlp: error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("circdlp: usage: {msg}");
            ExitCode::from(2)
        }
    }
}
