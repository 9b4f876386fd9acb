mod error;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invcore::envs::{build_coop_keydoor, build_keydoor, random_family, CoopKeyDoorConfig, KeyDoorConfig};
use invcore::io::{
    peek_format, to_json, AbstractionFile, CoopFile, GameFile, KeyDoorFile, MdpFile, PolicyFile, ScheduleFile,
    SuccessesFile,
};
use invcore::{
    brute_force_core, brute_force_maximal, budget_of, build_trie, core_with, drift_report, enumerate_successes_with,
    induce_mdp, is_complete_with, maximal_common_subsequences, rollout, successful_leaves, variation_budget,
    Abstraction, CoreSet, EpisodeSequence, Limits, Mdp, Policy, SuccessSet, Symbol, DEFAULT_CORE_BUDGET,
    DEFAULT_NODE_BUDGET,
};
use serde::Serialize;
use serde_json::Value;

use error::{CliError, EXIT_INTERNAL};
use report::{emit, write_atomic, Input, Report};

#[derive(Parser)]
#[command(
    name = "invcore",
    version,
    about = "Success enumeration, invariant cores and drift reports for tabular MDPs and Markov games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output file (stdout when absent); a directory for `gen`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Node limit for common-subsequence search.
    #[arg(long, env = "INVCORE_BUDGET", default_value_t = DEFAULT_CORE_BUDGET,
          value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    budget: usize,
    /// Node limit for success enumeration.
    #[arg(long, env = "INVCORE_NODE_BUDGET", default_value_t = DEFAULT_NODE_BUDGET,
          value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    node_budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop terminal symbols from core members.
    #[arg(long)]
    strip_terminal: bool,
    /// Collapse runs of equal symbols after abstraction.
    #[arg(long)]
    collapse_runs: bool,
}

impl Common {
    fn limits(&self) -> Limits {
        Limits { node_budget: self.node_budget, core_budget: self.budget }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List every success of an MDP.
    Enumerate {
        mdp: PathBuf,
        /// Also write the trajectory trie as indented text.
        #[arg(long)]
        trie_out: Option<PathBuf>,
        /// Sample this many rollouts (with --seed) and check the rollout trie for completeness.
        #[arg(long)]
        rollouts: Option<usize>,
        /// Focal policy for rollouts; uniform when absent.
        #[arg(long, requires = "rollouts")]
        policy: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Mine the invariant core of an MDP, a success set or an enumerate report.
    Mine {
        input: PathBuf,
        /// Abstraction file; identity when absent.
        #[arg(long)]
        phi: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fold a peer policy into a game, writing the induced MDP.
    Induce {
        game: PathBuf,
        peer: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Variation budget of a game under a schedule, or of a list of MDP files.
    Budget {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Per-episode cores, vanished prototypes and the containment check.
    Drift {
        game: PathBuf,
        schedule: PathBuf,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a key–door instance into the --out directory.
    Gen {
        kind: EnvKind,
        /// Config file; defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the fast core miner with the brute-force oracle.
    OracleCheck {
        /// MDP or success-set file; random sequence families when absent.
        input: Option<PathBuf>,
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Number of random families.
        #[arg(long, default_value_t = 200)]
        cases: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvKind {
    Keydoor,
    Coop,
}

struct Ctx {
    args: Vec<String>,
    start: Instant,
}

impl Ctx {
    fn report<P: Serialize>(
        &self,
        command: &str,
        inputs: &[&Input],
        payload: P,
        out: Option<&Path>,
    ) -> Result<(), CliError> {
        let r = Report::new(command, self.args.clone(), inputs, payload, self.start.elapsed().as_millis());
        emit(out, &to_json(&r))
    }
}

fn load_phi(path: Option<&Path>, collapse: bool) -> Result<(Abstraction, Option<Input>), CliError> {
    let Some(path) = path else {
        return Ok((Abstraction::identity().with_collapse_runs(collapse), None));
    };
    let input = Input::read(path)?;
    let file: AbstractionFile = input.parse()?;
    let phi = file.to_abstraction().map_err(|e| input.format_error(e))?;
    let collapse = collapse || phi.collapse_runs();
    Ok((phi.with_collapse_runs(collapse), Some(input)))
}

fn load_mdp(input: &Input) -> Result<Mdp, CliError> {
    let file: MdpFile<f64> = input.parse()?;
    file.to_mdp().map_err(|e| input.format_error(e))
}

/// Success set from an MDP, a success-set file, or an enumerate report.
fn load_successes(input: &Input, node_budget: usize) -> Result<(SuccessSet, &'static str), CliError> {
    let format = peek_format(&input.text).map_err(|e| input.format_error(e))?;
    match format.as_str() {
        "invcore.mdp" => Ok((enumerate_successes_with(&load_mdp(input)?, node_budget)?, "mdp")),
        "invcore.report" => {
            let value: Value = serde_json::from_str(&input.text).map_err(|e| CliError::Usage(e.to_string()))?;
            let inner = value
                .pointer("/payload/successes")
                .ok_or_else(|| CliError::Usage(format!("{}: report carries no success set", input.path.display())))?;
            let nested = Input { path: input.path.clone(), text: inner.to_string() };
            let file: SuccessesFile = nested.parse()?;
            Ok((file.to_successes().map_err(|e| input.format_error(e))?, "report"))
        }
        _ => {
            let file: SuccessesFile = input.parse()?;
            Ok((file.to_successes().map_err(|e| input.format_error(e))?, "successes"))
        }
    }
}

#[derive(Serialize)]
struct RolloutSummary {
    count: usize,
    seed: u64,
    policy: String,
    successes_observed: usize,
    distinct_successes: usize,
    trie_nodes: usize,
    trie_complete: bool,
}

#[derive(Serialize)]
struct EnumeratePayload {
    successes: SuccessesFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    rollouts: Option<RolloutSummary>,
}

#[derive(Serialize)]
struct MinePayload {
    source: &'static str,
    success_count: usize,
    core: CoreSet,
}

#[derive(Serialize)]
struct GenPayload {
    kind: &'static str,
    files: Vec<GeneratedFile>,
}

#[derive(Serialize)]
struct GeneratedFile {
    path: String,
    format: &'static str,
    sha256: String,
}

#[derive(Serialize)]
struct Mismatch {
    case: String,
    fast: Vec<Vec<Symbol>>,
    oracle: Vec<Vec<Symbol>>,
}

#[derive(Serialize)]
struct OraclePayload {
    mode: &'static str,
    cases: u64,
    agreements: u64,
    mismatches: Vec<Mismatch>,
}

fn run(cli: Cli, ctx: &Ctx) -> Result<(), CliError> {
    match cli.command {
        Command::Enumerate { mdp, trie_out, rollouts, policy, common } => {
            let input = Input::read(&mdp)?;
            let m = load_mdp(&input)?;
            let successes = enumerate_successes_with(&m, common.node_budget)?;
            let mut inputs = vec![&input];
            let policy_input = policy.as_deref().map(Input::read).transpose()?;
            let mut trie = build_trie(&successes);
            let rollouts = match rollouts {
                None => None,
                Some(n) => {
                    let pi = match &policy_input {
                        Some(p) => {
                            inputs.push(p);
                            let f: PolicyFile<f64> = p.parse()?;
                            f.to_policy().map_err(|e| p.format_error(e))?
                        }
                        None => Policy::uniform("uniform", m.num_states(), m.num_actions()),
                    };
                    let set = rollout(&m, &pi, n, common.seed)?;
                    trie = build_trie(&set.trajectories);
                    Some(RolloutSummary {
                        count: n,
                        seed: common.seed,
                        policy: pi.label().to_string(),
                        successes_observed: set.successes().count(),
                        distinct_successes: successful_leaves(&trie).len(),
                        trie_nodes: trie.node_count(),
                        trie_complete: is_complete_with(&trie, &m, common.node_budget)?,
                    })
                }
            };
            if let Some(path) = trie_out {
                write_atomic(&path, trie.dump_text().as_bytes())?;
            }
            let payload = EnumeratePayload { successes: SuccessesFile::from_successes(&successes), rollouts };
            ctx.report("enumerate", &inputs, payload, common.out.as_deref())
        }
        Command::Mine { input, phi, common } => {
            let input = Input::read(&input)?;
            let (phi, phi_input) = load_phi(phi.as_deref(), common.collapse_runs)?;
            let (successes, source) = load_successes(&input, common.node_budget)?;
            let core = core_with(&successes, &phi, common.strip_terminal, common.budget)?;
            let mut inputs = vec![&input];
            inputs.extend(phi_input.as_ref());
            let payload = MinePayload { source, success_count: successes.len(), core };
            ctx.report("mine", &inputs, payload, common.out.as_deref())
        }
        Command::Induce { game, peer, common } => {
            let game_input = Input::read(&game)?;
            let peer_input = Input::read(&peer)?;
            let game_file: GameFile<f64> = game_input.parse()?;
            let g = game_file.to_game().map_err(|e| game_input.format_error(e))?;
            let pf: PolicyFile<f64> = peer_input.parse()?;
            let p = pf.to_policy().map_err(|e| peer_input.format_error(e))?;
            let m = induce_mdp(&g, &p).map_err(invcore::Error::from)?;
            let mut doc = MdpFile::from_mdp(&m);
            doc.state_names = game_file.state_names;
            emit(common.out.as_deref(), &to_json(&doc))
        }
        Command::Budget { inputs, common } => {
            let files = inputs.iter().map(|p| Input::read(p)).collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&Input> = files.iter().collect();
            let first = peek_format(&files[0].text).map_err(|e| files[0].format_error(e))?;
            let report = if first == "invcore.game" {
                if files.len() != 2 {
                    return Err(CliError::Usage("budget over a game takes exactly GAME SCHEDULE".into()));
                }
                let seq = load_sequence(&files[0], &files[1])?;
                variation_budget(&seq)
            } else {
                let mdps = files.iter().map(load_mdp).collect::<Result<Vec<_>, _>>()?;
                budget_of(&mdps).map_err(invcore::Error::from)?
            };
            ctx.report("budget", &refs, report, common.out.as_deref())
        }
        Command::Drift { game, schedule, phi, common } => {
            let game_input = Input::read(&game)?;
            let schedule_input = Input::read(&schedule)?;
            let (phi, phi_input) = load_phi(phi.as_deref(), common.collapse_runs)?;
            let seq = load_sequence(&game_input, &schedule_input)?;
            let report = drift_report(&seq, &phi, common.strip_terminal, common.limits())?;
            let mut inputs = vec![&game_input, &schedule_input];
            inputs.extend(phi_input.as_ref());
            ctx.report("drift", &inputs, report, common.out.as_deref())
        }
        Command::Gen { kind, config, common } => {
            let dir = common.out.clone().ok_or_else(|| CliError::Usage("gen needs --out DIR".into()))?;
            std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            let config_input = config.as_deref().map(Input::read).transpose()?;
            let mut files = Vec::new();
            let mut write = |name: &str, format: &'static str, text: String| -> Result<(), CliError> {
                let path = dir.join(name);
                write_atomic(&path, text.as_bytes())?;
                files.push(GeneratedFile {
                    path: path.display().to_string(),
                    format,
                    sha256: report::sha256_hex(text.as_bytes()),
                });
                Ok(())
            };
            let kind_name = match kind {
                EnvKind::Keydoor => {
                    let cfg = match &config_input {
                        Some(i) => i.parse::<KeyDoorFile>()?.config,
                        None => KeyDoorConfig::default(),
                    };
                    let env = build_keydoor::<f64>(&cfg).map_err(invcore::Error::from)?;
                    write(
                        "mdp.json",
                        "invcore.mdp",
                        to_json(&MdpFile::from_mdp(&env.mdp).with_state_names(env.state_names)),
                    )?;
                    write("phi.json", "invcore.abstraction", to_json(&AbstractionFile::from_abstraction(&env.phi)))?;
                    "keydoor"
                }
                EnvKind::Coop => {
                    let cfg = match &config_input {
                        Some(i) => i.parse::<CoopFile>()?.config,
                        None => CoopKeyDoorConfig::default(),
                    };
                    let env = build_coop_keydoor::<f64>(&cfg).map_err(invcore::Error::from)?;
                    write(
                        "game.json",
                        "invcore.game",
                        to_json(&GameFile::from_game(&env.game).with_state_names(env.state_names)),
                    )?;
                    write("schedule.json", "invcore.schedule", to_json(&ScheduleFile::from_schedule(&env.schedule)))?;
                    write("phi.json", "invcore.abstraction", to_json(&AbstractionFile::from_abstraction(&env.phi)))?;
                    "coop"
                }
            };
            let inputs: Vec<&Input> = config_input.iter().collect();
            ctx.report("gen", &inputs, GenPayload { kind: kind_name, files }, None)
        }
        Command::OracleCheck { input, phi, cases, common } => {
            let (payload, inputs) = match input {
                Some(path) => {
                    let input = Input::read(&path)?;
                    let (phi, phi_input) = load_phi(phi.as_deref(), common.collapse_runs)?;
                    let (successes, _) = load_successes(&input, common.node_budget)?;
                    let fast = core_with(&successes, &phi, common.strip_terminal, common.budget)?;
                    let oracle = brute_force_core(&successes, &phi, common.strip_terminal)?;
                    let mut mismatches = Vec::new();
                    if fast != oracle {
                        mismatches.push(Mismatch {
                            case: path.display().to_string(),
                            fast: fast.members().to_vec(),
                            oracle: oracle.members().to_vec(),
                        });
                    }
                    let agreements = u64::from(mismatches.is_empty());
                    let mut inputs = vec![input];
                    inputs.extend(phi_input);
                    (OraclePayload { mode: "file", cases: 1, agreements, mismatches }, inputs)
                }
                None => {
                    let mut mismatches = Vec::new();
                    for i in 0..cases {
                        let seed = common.seed.wrapping_add(i);
                        let family = random_family(4, 10, 6, seed);
                        let fast = maximal_common_subsequences(&family, common.budget)?;
                        let oracle = brute_force_maximal(&family)?;
                        if fast != oracle {
                            mismatches.push(Mismatch { case: format!("seed {seed}"), fast, oracle });
                        }
                    }
                    let agreements = cases - mismatches.len() as u64;
                    (OraclePayload { mode: "random", cases, agreements, mismatches }, Vec::new())
                }
            };
            let failed = !payload.mismatches.is_empty();
            let refs: Vec<&Input> = inputs.iter().collect();
            ctx.report("oracle-check", &refs, payload, common.out.as_deref())?;
            if failed {
                return Err(CliError::Internal("fast core disagrees with the brute-force oracle".into()));
            }
            Ok(())
        }
    }
}

fn load_sequence(game: &Input, schedule: &Input) -> Result<EpisodeSequence<f64>, CliError> {
    let gf: GameFile<f64> = game.parse()?;
    let g = gf.to_game().map_err(|e| game.format_error(e))?;
    let sf: ScheduleFile<f64> = schedule.parse()?;
    let s = sf.to_schedule().map_err(|e| schedule.format_error(e))?;
    Ok(EpisodeSequence::new(g, s).map_err(invcore::Error::from)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { args: std::env::args().skip(1).collect(), start: Instant::now() };
    match std::panic::catch_unwind(|| run(cli, &ctx)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("invcore: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL as u8),
    }
}
