use std::fmt;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use cbc_chaos::chaos::{
    unreachable_pair_document, MAX_EPSILON_EXPONENT,
};
use cbc_chaos::{
    cbc_decrypt, cbc_encrypt, chaos_verdict, edge_table_csv, export_dot, pad,
    periodic_witness, sensitivity_certificate, trajectory, transitive_witness, unpad, Bits, Block,
    BlockSize, ChaosStatus, Configuration, ConnectivityMode, Error, KeyedPermutation,
    MessageSemantics, MessageSeq, PhasePoint, TransitionGraph, UnreachablePair,
};

const MAX_N_ENV: &str = "CBC_CHAOS_MAX_N";

#[derive(Parser)]
#[command(
    name = "cbc-chaos",
    version,
    about = "Analyze the CBC mode of operation as a dynamical system: \
             connectivity verdicts, chaos witnesses, simulation and codec"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide strong connectivity of the transition graph and report the
    /// chaos verdict as JSON
    Analyze(AnalyzeArgs),
    /// Emit the transition graph as a CSV edge table or DOT
    Graph(GraphArgs),
    /// Iterate the system from an initial state and print the orbit
    Simulate(SimulateArgs),
    /// Reference CBC encryption and decryption with padding
    Cbc(CbcCmd),
    /// Construct verifiable witnesses: periodic, transitive, sensitivity
    Witness(WitnessCmd),
}

#[derive(Args)]
struct ConfigArgs {
    /// Block size in bits
    #[arg(long)]
    n: u8,
    /// Cipher: identity | negation | caesar:<k> | table:<path>
    #[arg(long)]
    cipher: String,
    /// Message semantics: bit-index | full-block | xor
    #[arg(long, default_value = "bit-index")]
    semantics: String,
    /// Acknowledge the CBC_CHAOS_MAX_N environment override
    #[arg(long)]
    allow_max_n_override: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Connectivity algorithm: implicit | explicit
    #[arg(long, default_value = "implicit")]
    mode: String,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output format: csv | dot
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Initial state block value (decimal)
    #[arg(long)]
    iv: u64,
    /// Comma-separated message labels
    #[arg(long, default_value = "")]
    message: String,
    /// Steps to iterate (defaults to the message length)
    #[arg(long)]
    steps: Option<usize>,
    /// Output format: text | json
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Args)]
struct CbcCmd {
    #[command(subcommand)]
    op: CbcOp,
}

#[derive(Subcommand)]
enum CbcOp {
    /// Pad (optionally) and encrypt a bit string; prints ciphertext blocks
    Encrypt(CbcArgs),
    /// Decrypt ciphertext blocks and (optionally) unpad; prints the bits
    Decrypt(CbcArgs),
}

#[derive(Args)]
struct CbcArgs {
    /// Block size in bits
    #[arg(long)]
    n: u8,
    /// Cipher: identity | negation | caesar:<k> | table:<path>
    #[arg(long)]
    cipher: String,
    /// Acknowledge the CBC_CHAOS_MAX_N environment override
    #[arg(long)]
    allow_max_n_override: bool,
    /// IV block value (decimal)
    #[arg(long)]
    iv: u64,
    /// Bit string to encrypt (01 or hex:<digits>/<bitlen>), or
    /// comma-separated ciphertext block values to decrypt
    #[arg(long)]
    input: String,
    /// Apply padding on encrypt / strip it on decrypt
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pad: bool,
}

#[derive(Args)]
struct WitnessCmd {
    #[command(subcommand)]
    kind: WitnessKind,
}

#[derive(Subcommand)]
enum WitnessKind {
    /// A periodic point within 10^(-q) of the anchor, replay-verified
    Periodic(PeriodicArgs),
    /// A point within 10^(-q) of the source whose orbit hits the target
    Transitive(TransitiveArgs),
    /// A divergence pair certifying sensitivity with delta = 1
    Sensitivity(SensitivityArgs),
}

#[derive(Args)]
struct EpsilonArgs {
    /// Epsilon exponent: the neighborhood radius is 10^(-q)
    #[arg(long, conflicts_with = "epsilon")]
    q: Option<u32>,
    /// Decimal epsilon, rounded down to a power of ten (0.05 -> 10^-2)
    #[arg(long)]
    epsilon: Option<String>,
}

#[derive(Args)]
struct PeriodicArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    eps: EpsilonArgs,
    /// Anchor state (sampled from --seed when omitted)
    #[arg(long)]
    state: Option<u64>,
    /// Anchor message labels, comma-separated (sampled when omitted)
    #[arg(long)]
    message: Option<String>,
    /// Seed for sampled anchors
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TransitiveArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    eps: EpsilonArgs,
    /// Source state (sampled when omitted)
    #[arg(long)]
    from_state: Option<u64>,
    /// Source message labels (sampled when omitted)
    #[arg(long)]
    from_message: Option<String>,
    /// Target state (sampled when omitted)
    #[arg(long)]
    to_state: Option<u64>,
    /// Target message labels (sampled when omitted)
    #[arg(long)]
    to_message: Option<String>,
    /// Seed for sampled endpoints
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    eps: EpsilonArgs,
    /// Anchor state (sampled when omitted)
    #[arg(long)]
    state: Option<u64>,
    /// Anchor message labels, comma-separated (sampled when omitted)
    #[arg(long)]
    message: Option<String>,
    /// Seed for sampled anchors
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Config(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => e.fmt(f),
            CliError::Config(reason) => reason.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::GraphTooLarge { .. }) => 3,
            CliError::Lib(Error::NotStronglyConnected { .. }) => 4,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Graph(args) => cmd_graph(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Cbc(cmd) => match cmd.op {
            CbcOp::Encrypt(args) => cmd_cbc_encrypt(args),
            CbcOp::Decrypt(args) => cmd_cbc_decrypt(args),
        },
        Command::Witness(cmd) => cmd_witness(cmd.kind),
    }
}

/// Effective block-size ceiling: the default unless the environment
/// override is both set and acknowledged.
fn effective_max_n(acknowledged: bool) -> Result<u8, CliError> {
    match std::env::var(MAX_N_ENV) {
        Err(_) if acknowledged => Err(CliError::Config(format!(
            "--allow-max-n-override given but {MAX_N_ENV} is not set"
        ))),
        Err(_) => Ok(BlockSize::DEFAULT_MAX),
        Ok(_) if !acknowledged => Err(CliError::Config(format!(
            "{MAX_N_ENV} is set; pass --allow-max-n-override to acknowledge it"
        ))),
        Ok(raw) => raw.parse::<u8>().map_err(|_| {
            CliError::Config(format!("{MAX_N_ENV}='{raw}' is not a block size"))
        }),
    }
}

impl ConfigArgs {
    fn resolve(&self) -> Result<(KeyedPermutation, MessageSemantics), CliError> {
        let max = effective_max_n(self.allow_max_n_override)?;
        let size = BlockSize::with_max(self.n, max)?;
        let cipher = KeyedPermutation::parse_spec(&self.cipher, size)?;
        let semantics: MessageSemantics = self
            .semantics
            .parse()
            .map_err(|_| CliError::Config(format!(
                "unknown semantics '{}': expected bit-index, full-block or xor",
                self.semantics
            )))?;
        Ok((cipher, semantics))
    }
}

impl EpsilonArgs {
    fn resolve(&self) -> Result<u32, CliError> {
        match (self.q, &self.epsilon) {
            (Some(q), None) => Ok(q),
            (None, Some(e)) => {
                let q = parse_epsilon(e)?;
                eprintln!("epsilon {e} rounded down to 10^-{q}");
                Ok(q)
            }
            (Some(_), Some(_)) => Err(CliError::Config(
                "--q and --epsilon are mutually exclusive".to_string(),
            )),
            (None, None) => Err(CliError::Config(
                "pass --q <exponent> or --epsilon <decimal>".to_string(),
            )),
        }
    }
}

/// Smallest q >= 0 such that 10^(-q) <= epsilon, computed exactly from
/// the decimal string.
fn parse_epsilon(s: &str) -> Result<u32, CliError> {
    let bad = |reason: &str| CliError::Config(format!("invalid epsilon '{s}': {reason}"));
    let t = s.trim();
    let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad("empty"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad("expected a plain decimal like 0.05"));
    }
    let value: BigUint = format!("0{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad("unparseable"))?;
    if value == BigUint::from(0u32) {
        return Err(bad("must be positive"));
    }
    let target = BigUint::from(10u32).pow(frac_part.len() as u32);
    let mut scaled = value;
    let mut q = 0u32;
    while scaled < target {
        scaled *= 10u32;
        q += 1;
        if q > MAX_EPSILON_EXPONENT {
            return Err(bad("too small"));
        }
    }
    Ok(q)
}

fn parse_labels(s: &str) -> Result<Vec<u64>, CliError> {
    let t = s.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(',')
        .map(|token| {
            token.trim().parse().map_err(|_| {
                CliError::Config(format!("'{}' is not a message label", token.trim()))
            })
        })
        .collect()
}

fn parse_mode(s: &str) -> Result<ConnectivityMode, CliError> {
    match s {
        "implicit" => Ok(ConnectivityMode::Implicit),
        "explicit" => Ok(ConnectivityMode::Explicit),
        other => Err(CliError::Config(format!(
            "unknown mode '{other}': expected implicit or explicit"
        ))),
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    n: u8,
    cipher: String,
    semantics: String,
    strongly_connected: bool,
    status: ChaosStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<UnreachablePair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scc_count: Option<u64>,
    elapsed_ms: u128,
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode, CliError> {
    let (cipher, semantics) = args.config.resolve()?;
    let mode = parse_mode(&args.mode)?;
    let started = Instant::now();
    let verdict = chaos_verdict(&cipher, semantics, mode)?;
    let report = AnalyzeReport {
        n: verdict.configuration.n,
        cipher: verdict.configuration.cipher,
        semantics: verdict.configuration.semantics,
        strongly_connected: verdict.connectivity.strongly_connected,
        status: verdict.status,
        witness: verdict.connectivity.witness,
        scc_count: verdict.connectivity.scc_count,
        elapsed_ms: started.elapsed().as_millis(),
    };
    println!("{}", serde_json::to_string(&report).unwrap());
    Ok(ExitCode::SUCCESS)
}

fn cmd_graph(args: GraphArgs) -> Result<ExitCode, CliError> {
    let (cipher, semantics) = args.config.resolve()?;
    let graph = TransitionGraph::new(&cipher, semantics);
    let rendered = match args.format.as_str() {
        "csv" => edge_table_csv(&graph)?,
        "dot" => export_dot(&graph)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown format '{other}': expected csv or dot"
            )))
        }
    };
    print!("{rendered}");
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SimulateReport {
    states: Vec<u64>,
    states_binary: Vec<String>,
    ciphertext: Vec<u64>,
    tail_zeros_consumed: usize,
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, CliError> {
    let (cipher, semantics) = args.config.resolve()?;
    let size = cipher.block_size();
    let iv = Block::new(args.iv, size)?;
    let labels = parse_labels(&args.message)?;
    let message = MessageSeq::new(labels, semantics, size)?;
    let steps = args.steps.unwrap_or_else(|| message.prefix_len());
    let start = PhasePoint::new(iv, message);
    let t = trajectory(&cipher, &start, steps, semantics)?;
    match args.format.as_str() {
        "text" => {
            for (i, p) in t.points.iter().enumerate() {
                println!("X^{i}: {} ({})", p.state.value(), p.state.binary_string());
            }
            if !t.ciphertext_blocks.is_empty() {
                let joined: Vec<String> =
                    t.ciphertext_blocks.iter().map(|b| b.value().to_string()).collect();
                println!("ciphertext: {}", joined.join(","));
            }
            if t.tail_zeros_consumed > 0 {
                println!("tail_zeros_consumed: {}", t.tail_zeros_consumed);
            }
        }
        "json" => {
            let report = SimulateReport {
                states: t.points.iter().map(|p| p.state.value()).collect(),
                states_binary: t.points.iter().map(|p| p.state.binary_string()).collect(),
                ciphertext: t.ciphertext_blocks.iter().map(|b| b.value()).collect(),
                tail_zeros_consumed: t.tail_zeros_consumed,
            };
            println!("{}", serde_json::to_string(&report).unwrap());
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown format '{other}': expected text or json"
            )))
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cbc_cipher(args: &CbcArgs) -> Result<(KeyedPermutation, Block), CliError> {
    let max = effective_max_n(args.allow_max_n_override)?;
    let size = BlockSize::with_max(args.n, max)?;
    let cipher = KeyedPermutation::parse_spec(&args.cipher, size)?;
    let iv = Block::new(args.iv, size)?;
    Ok((cipher, iv))
}

fn cmd_cbc_encrypt(args: CbcArgs) -> Result<ExitCode, CliError> {
    let (cipher, iv) = cbc_cipher(&args)?;
    let bits: Bits = args.input.parse()?;
    let blocks = if args.pad {
        pad(&bits, cipher.block_size())
    } else {
        bits.to_blocks(cipher.block_size())?
    };
    let ciphertext = cbc_encrypt(&cipher, iv, &blocks)?;
    let joined: Vec<String> = ciphertext.iter().map(|b| b.value().to_string()).collect();
    println!("{}", joined.join(","));
    Ok(ExitCode::SUCCESS)
}

fn cmd_cbc_decrypt(args: CbcArgs) -> Result<ExitCode, CliError> {
    let (cipher, iv) = cbc_cipher(&args)?;
    let values = parse_labels(&args.input)?;
    let blocks: Vec<Block> = values
        .into_iter()
        .map(|v| Block::new(v, cipher.block_size()))
        .collect::<Result<_, _>>()?;
    let plaintext = cbc_decrypt(&cipher, iv, &blocks)?;
    if args.pad {
        println!("{}", unpad(&plaintext)?);
    } else {
        println!("{}", Bits::from_blocks(&plaintext));
    }
    Ok(ExitCode::SUCCESS)
}

struct PointSampler {
    rng: ChaCha8Rng,
}

impl PointSampler {
    fn new(seed: u64) -> Self {
        PointSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Use the given state/message or sample missing parts reproducibly.
    fn resolve(
        &mut self,
        cipher: &KeyedPermutation,
        semantics: MessageSemantics,
        state: Option<u64>,
        message: Option<&str>,
        q: u32,
    ) -> Result<PhasePoint, CliError> {
        let size = cipher.block_size();
        let state = match state {
            Some(v) => Block::new(v, size)?,
            None => Block::new(self.rng.random_range(0..size.block_count()), size).unwrap(),
        };
        let labels = match message {
            Some(s) => parse_labels(s)?,
            None => {
                let count = semantics.label_count(size);
                (0..q as usize + 3)
                    .map(|_| self.rng.random_range(0..count))
                    .collect()
            }
        };
        Ok(PhasePoint::new(state, MessageSeq::new(labels, semantics, size)?))
    }
}

fn print_witness_json<T: Serialize>(doc: &T) {
    println!("{}", serde_json::to_string(doc).unwrap());
}

/// Shared failure path: a disconnected graph turns into the JSON
/// disconnection certificate on stdout plus exit code 4.
fn witness_outcome<T: Serialize>(
    result: Result<T, Error>,
    configuration: Configuration,
) -> Result<ExitCode, CliError> {
    match result {
        Ok(doc) => {
            print_witness_json(&doc);
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::NotStronglyConnected {
            from,
            to,
            forward_reachable,
            vertex_count,
        }) => {
            let doc =
                unreachable_pair_document(configuration, from, to, forward_reachable, vertex_count);
            print_witness_json(&doc);
            eprintln!(
                "error: transition graph is not strongly connected (no path {from} -> {to})"
            );
            Ok(ExitCode::from(4))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_witness(kind: WitnessKind) -> Result<ExitCode, CliError> {
    match kind {
        WitnessKind::Periodic(args) => {
            let (cipher, semantics) = args.config.resolve()?;
            let q = args.eps.resolve()?;
            let mut sampler = PointSampler::new(args.seed);
            let anchor =
                sampler.resolve(&cipher, semantics, args.state, args.message.as_deref(), q)?;
            let configuration = Configuration::of(&cipher, semantics);
            witness_outcome(
                periodic_witness(&cipher, semantics, &anchor, q)
                    .map(|w| w.to_document(configuration.clone())),
                configuration,
            )
        }
        WitnessKind::Transitive(args) => {
            let (cipher, semantics) = args.config.resolve()?;
            let q = args.eps.resolve()?;
            let mut sampler = PointSampler::new(args.seed);
            let from = sampler.resolve(
                &cipher,
                semantics,
                args.from_state,
                args.from_message.as_deref(),
                q,
            )?;
            let to = sampler.resolve(
                &cipher,
                semantics,
                args.to_state,
                args.to_message.as_deref(),
                q,
            )?;
            let configuration = Configuration::of(&cipher, semantics);
            witness_outcome(
                transitive_witness(&cipher, semantics, &from, &to, q)
                    .map(|w| w.to_document(configuration.clone())),
                configuration,
            )
        }
        WitnessKind::Sensitivity(args) => {
            let (cipher, semantics) = args.config.resolve()?;
            let q = args.eps.resolve()?;
            let mut sampler = PointSampler::new(args.seed);
            let anchor =
                sampler.resolve(&cipher, semantics, args.state, args.message.as_deref(), q)?;
            let configuration = Configuration::of(&cipher, semantics);
            // sensitivity holds regardless of connectivity; the verdict is
            // computed only to fill the document's status field
            let verdict = chaos_verdict(&cipher, semantics, ConnectivityMode::Implicit)?;
            witness_outcome(
                sensitivity_certificate(&cipher, semantics, &anchor, q)
                    .map(|c| c.to_document(configuration.clone(), verdict.status)),
                configuration,
            )
        }
    }
}
