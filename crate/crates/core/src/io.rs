//! JSON file formats.
//!
//! Every document is an object whose first two fields are `"format"` (for
//! example `"invcore.mdp"`) and `"version"` (currently `1`). Probability
//! tables are dense and row-major, written one row per line: a kernel has one
//! row per `(s, a)` holding `P(· | s, a)`, a reward table one row per state.
//! Pairs are written `"(s,a)"`, terminal pairs `"(s,T)"`. Floats are printed
//! in shortest round-trip form; exact rationals as `[numerator, denominator]`.
//!
//! [`to_json`] renders any document in this layout and [`from_json`] checks
//! the header before decoding, reporting the JSON path of the offending field.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::abstraction::{Abstraction, Symbol};
use crate::envs::{CoopKeyDoorConfig, KeyDoorConfig};
use crate::error::ValidationError;
use crate::mdp::{Kernel, MarkovGame, PeerPolicy, RewardTable, TabularMdp};
use crate::scalar::Scalar;
use crate::trajectory::{Pair, SuccessSet, Trajectory};

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("{field}: {message} (line {line}, column {column})")]
    Json { field: String, message: String, line: usize, column: usize },
    #[error("expected a {expected} document, found format {found:?}")]
    WrongFormat { expected: &'static str, found: String },
    #[error("unsupported {format} version {version}")]
    UnsupportedVersion { format: String, version: u32 },
    #[error("{field}: expected {expected} entries, found {found}")]
    Shape { field: String, expected: usize, found: usize },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// A versioned document type.
pub trait Document: Serialize + DeserializeOwned {
    const FORMAT: &'static str;
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

fn json_error(e: serde_path_to_error::Error<serde_json::Error>) -> FormatError {
    let field = match e.path().to_string() {
        p if p == "." => "document".to_string(),
        p => p,
    };
    let inner = e.inner();
    FormatError::Json {
        field,
        message: inner.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        line: inner.line(),
        column: inner.column(),
    }
}

/// The `"format"` tag of a document, after checking it parses as one.
pub fn peek_format(text: &str) -> Result<String, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let header: Header = serde_path_to_error::deserialize(de).map_err(json_error)?;
    Ok(header.format)
}

/// Decodes a document after checking its format tag and version.
pub fn from_json<D: Document>(text: &str) -> Result<D, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let header: Header = serde_path_to_error::deserialize(de).map_err(json_error)?;
    if header.format != D::FORMAT {
        return Err(FormatError::WrongFormat { expected: D::FORMAT, found: header.format });
    }
    if header.version != VERSION {
        return Err(FormatError::UnsupportedVersion { format: header.format, version: header.version });
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc = serde_path_to_error::deserialize(de).map_err(json_error)?;
    Ok(doc)
}

/// Renders a document: objects indented by two spaces, arrays of scalars on
/// one line, arrays of arrays or objects one element per line. Ends with a
/// newline.
pub fn to_json<D: Serialize>(doc: &D) -> String {
    let value = serde_json::to_value(doc).expect("documents serialize to JSON");
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

fn indent(depth: usize, out: &mut String) {
    out.push('\n');
    out.extend(std::iter::repeat_n("  ", depth));
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(depth + 1, out);
                out.push_str(&serde_json::to_string(k).expect("string"));
                out.push_str(": ");
                write_value(v, depth + 1, out);
            }
            indent(depth, out);
            out.push('}');
        }
        Value::Array(items) if items.iter().any(|x| x.is_array() || x.is_object()) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(depth + 1, out);
                write_value(x, depth + 1, out);
            }
            indent(depth, out);
            out.push(']');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(x, depth, out);
            }
            out.push(']');
        }
        other => out.push_str(&serde_json::to_string(other).expect("scalar")),
    }
}

fn rows<T: Copy>(flat: &[T], width: usize) -> Vec<Vec<T>> {
    flat.chunks(width).map(<[T]>::to_vec).collect()
}

fn flatten<T: Copy>(field: &str, rows: &[Vec<T>], count: usize, width: usize) -> Result<Vec<T>, FormatError> {
    if rows.len() != count {
        return Err(FormatError::Shape { field: field.to_string(), expected: count, found: rows.len() });
    }
    let mut out = Vec::with_capacity(count * width);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(FormatError::Shape { field: format!("{field}[{i}]"), expected: width, found: r.len() });
        }
        out.extend_from_slice(r);
    }
    Ok(out)
}

fn check_len(field: &str, len: usize, expected: usize) -> Result<(), FormatError> {
    if len != expected {
        return Err(FormatError::Shape { field: field.to_string(), expected, found: len });
    }
    Ok(())
}

/// `invcore.mdp`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned"))]
pub struct MdpFile<T> {
    pub format: String,
    pub version: u32,
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub goals: Vec<usize>,
    pub goal_absorbing: bool,
    pub initial: Vec<T>,
    /// One row per `(s, a)`, `s` major.
    pub kernel: Vec<Vec<T>>,
    /// One row per state.
    pub reward: Vec<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_names: Option<Vec<String>>,
}

impl<T: Scalar + Serialize + DeserializeOwned> Document for MdpFile<T> {
    const FORMAT: &'static str = "invcore.mdp";
}

impl<T: Scalar> MdpFile<T> {
    pub fn from_mdp(mdp: &TabularMdp<T>) -> Self {
        MdpFile {
            format: "invcore.mdp".to_string(),
            version: VERSION,
            num_states: mdp.num_states(),
            num_actions: mdp.num_actions(),
            horizon: mdp.horizon(),
            goals: mdp.goals().iter().copied().collect(),
            goal_absorbing: mdp.goal_absorbing(),
            initial: mdp.initial().to_vec(),
            kernel: rows(mdp.kernel().as_slice(), mdp.num_states()),
            reward: rows(mdp.reward().as_slice(), mdp.num_actions()),
            state_names: None,
        }
    }

    pub fn with_state_names(mut self, names: Vec<String>) -> Self {
        self.state_names = Some(names);
        self
    }

    pub fn to_mdp(&self) -> Result<TabularMdp<T>, FormatError> {
        let (n, a) = (self.num_states, self.num_actions);
        let kernel = Kernel::from_dense(n, a, flatten("kernel", &self.kernel, n * a, n)?)?;
        let reward = RewardTable::from_dense(n, a, flatten("reward", &self.reward, n, a)?)?;
        check_len("initial", self.initial.len(), n)?;
        if let Some(names) = &self.state_names {
            check_len("state_names", names.len(), n)?;
        }
        let mdp = TabularMdp::new(
            kernel,
            reward,
            self.horizon,
            self.goals.iter().copied(),
            self.initial.clone(),
            self.goal_absorbing,
        )?;
        Ok(mdp)
    }
}

/// `invcore.game`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned"))]
pub struct GameFile<T> {
    pub format: String,
    pub version: u32,
    pub num_states: usize,
    pub num_actions_1: usize,
    pub num_actions_2: usize,
    pub horizon: usize,
    pub goals: Vec<usize>,
    pub initial: Vec<T>,
    /// One row per `(s, a1, a2)`, `s` major then `a1`.
    pub kernel: Vec<Vec<T>>,
    /// Focal reward, one row per `(s, a1)` over `a2`.
    pub reward_1: Vec<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_names: Option<Vec<String>>,
}

impl<T: Scalar + Serialize + DeserializeOwned> Document for GameFile<T> {
    const FORMAT: &'static str = "invcore.game";
}

impl<T: Scalar> GameFile<T> {
    pub fn from_game(game: &MarkovGame<T>) -> Self {
        GameFile {
            format: "invcore.game".to_string(),
            version: VERSION,
            num_states: game.num_states(),
            num_actions_1: game.num_actions_1(),
            num_actions_2: game.num_actions_2(),
            horizon: game.horizon(),
            goals: game.goals().iter().copied().collect(),
            initial: game.initial().to_vec(),
            kernel: rows(game.joint_kernel(), game.num_states()),
            reward_1: rows(game.reward_table(), game.num_actions_2()),
            state_names: None,
        }
    }

    pub fn with_state_names(mut self, names: Vec<String>) -> Self {
        self.state_names = Some(names);
        self
    }

    pub fn to_game(&self) -> Result<MarkovGame<T>, FormatError> {
        let (n, a1, a2) = (self.num_states, self.num_actions_1, self.num_actions_2);
        let kernel = flatten("kernel", &self.kernel, n * a1 * a2, n)?;
        let reward = flatten("reward_1", &self.reward_1, n * a1, a2)?;
        check_len("initial", self.initial.len(), n)?;
        if let Some(names) = &self.state_names {
            check_len("state_names", names.len(), n)?;
        }
        let game =
            MarkovGame::new(n, a1, a2, kernel, reward, self.horizon, self.goals.iter().copied(), self.initial.clone())?;
        Ok(game)
    }
}

/// Body of a policy table, shared by policy and schedule documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned"))]
pub struct PolicyTable<T> {
    pub label: String,
    pub num_states: usize,
    pub num_actions: usize,
    /// One row per state.
    pub probs: Vec<Vec<T>>,
}

impl<T: Scalar> PolicyTable<T> {
    pub fn from_policy(p: &PeerPolicy<T>) -> Self {
        PolicyTable {
            label: p.label().to_string(),
            num_states: p.num_states(),
            num_actions: p.num_actions(),
            probs: rows(p.as_slice(), p.num_actions()),
        }
    }

    fn to_policy(&self, field: &str) -> Result<PeerPolicy<T>, FormatError> {
        let probs = flatten(field, &self.probs, self.num_states, self.num_actions)?;
        Ok(PeerPolicy::new(self.label.clone(), self.num_states, self.num_actions, probs)?)
    }
}

/// `invcore.policy`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned"))]
pub struct PolicyFile<T> {
    pub format: String,
    pub version: u32,
    pub label: String,
    pub num_states: usize,
    pub num_actions: usize,
    /// One row per state.
    pub probs: Vec<Vec<T>>,
}

impl<T: Scalar + Serialize + DeserializeOwned> Document for PolicyFile<T> {
    const FORMAT: &'static str = "invcore.policy";
}

impl<T: Scalar> PolicyFile<T> {
    pub fn from_policy(p: &PeerPolicy<T>) -> Self {
        let t = PolicyTable::from_policy(p);
        PolicyFile {
            format: "invcore.policy".to_string(),
            version: VERSION,
            label: t.label,
            num_states: t.num_states,
            num_actions: t.num_actions,
            probs: t.probs,
        }
    }

    pub fn to_policy(&self) -> Result<PeerPolicy<T>, FormatError> {
        let probs = flatten("probs", &self.probs, self.num_states, self.num_actions)?;
        Ok(PeerPolicy::new(self.label.clone(), self.num_states, self.num_actions, probs)?)
    }
}

/// `invcore.schedule`: the peer policy of each episode, in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned"))]
pub struct ScheduleFile<T> {
    pub format: String,
    pub version: u32,
    pub episodes: Vec<PolicyTable<T>>,
}

impl<T: Scalar + Serialize + DeserializeOwned> Document for ScheduleFile<T> {
    const FORMAT: &'static str = "invcore.schedule";
}

impl<T: Scalar> ScheduleFile<T> {
    pub fn from_schedule(schedule: &[PeerPolicy<T>]) -> Self {
        ScheduleFile {
            format: "invcore.schedule".to_string(),
            version: VERSION,
            episodes: schedule.iter().map(PolicyTable::from_policy).collect(),
        }
    }

    pub fn to_schedule(&self) -> Result<Vec<PeerPolicy<T>>, FormatError> {
        self.episodes.iter().enumerate().map(|(i, p)| p.to_policy(&format!("episodes[{i}].probs"))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstractionMode {
    Identity,
    Map,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractionEntry {
    pub pair: Pair,
    pub symbol: Symbol,
}

/// `invcore.abstraction`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractionFile {
    pub format: String,
    pub version: u32,
    pub label: String,
    pub mode: AbstractionMode,
    #[serde(default)]
    pub collapse_runs: bool,
    #[serde(default)]
    pub entries: Vec<AbstractionEntry>,
}

impl Document for AbstractionFile {
    const FORMAT: &'static str = "invcore.abstraction";
}

impl AbstractionFile {
    pub fn from_abstraction(phi: &Abstraction) -> Self {
        let (mode, entries) = match phi.mapping() {
            None => (AbstractionMode::Identity, Vec::new()),
            Some(m) => (
                AbstractionMode::Map,
                m.iter().map(|(&pair, symbol)| AbstractionEntry { pair, symbol: symbol.clone() }).collect(),
            ),
        };
        AbstractionFile {
            format: "invcore.abstraction".to_string(),
            version: VERSION,
            label: phi.label().to_string(),
            mode,
            collapse_runs: phi.collapse_runs(),
            entries,
        }
    }

    pub fn to_abstraction(&self) -> Result<Abstraction, FormatError> {
        let phi = match self.mode {
            AbstractionMode::Identity => {
                check_len("entries", self.entries.len(), 0)?;
                Abstraction::identity()
            }
            AbstractionMode::Map => {
                let mut map = BTreeMap::new();
                for (i, e) in self.entries.iter().enumerate() {
                    if map.insert(e.pair, e.symbol.clone()).is_some() {
                        return Err(FormatError::Json {
                            field: format!("entries[{i}].pair"),
                            message: format!("duplicate entry for {}", e.pair),
                            line: 0,
                            column: 0,
                        });
                    }
                }
                Abstraction::from_map(self.label.clone(), map)
            }
        };
        Ok(phi.with_collapse_runs(self.collapse_runs))
    }
}

/// `invcore.successes`: a success set in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuccessesFile {
    pub format: String,
    pub version: u32,
    pub count: usize,
    pub trajectories: Vec<Trajectory>,
}

impl Document for SuccessesFile {
    const FORMAT: &'static str = "invcore.successes";
}

impl SuccessesFile {
    pub fn from_successes(s: &SuccessSet) -> Self {
        SuccessesFile {
            format: "invcore.successes".to_string(),
            version: VERSION,
            count: s.len(),
            trajectories: s.iter().cloned().collect(),
        }
    }

    pub fn to_successes(&self) -> Result<SuccessSet, FormatError> {
        check_len("trajectories", self.trajectories.len(), self.count)?;
        Ok(self.trajectories.iter().cloned().collect())
    }
}

/// `invcore.keydoor`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyDoorFile {
    pub format: String,
    pub version: u32,
    pub config: KeyDoorConfig,
}

impl Document for KeyDoorFile {
    const FORMAT: &'static str = "invcore.keydoor";
}

impl KeyDoorFile {
    pub fn new(config: KeyDoorConfig) -> Self {
        KeyDoorFile { format: "invcore.keydoor".to_string(), version: VERSION, config }
    }
}

/// `invcore.coop`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoopFile {
    pub format: String,
    pub version: u32,
    pub config: CoopKeyDoorConfig,
}

impl Document for CoopFile {
    const FORMAT: &'static str = "invcore.coop";
}

impl CoopFile {
    pub fn new(config: CoopKeyDoorConfig) -> Self {
        CoopFile { format: "invcore.coop".to_string(), version: VERSION, config }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{build_coop_keydoor, build_keydoor};
    use crate::mdp::tests::chain;
    use num_rational::Ratio;

    #[test]
    fn mdp_round_trip_and_layout() {
        let m = chain(4);
        let text = to_json(&MdpFile::from_mdp(&m));
        assert!(text.starts_with("{\n  \"format\": \"invcore.mdp\",\n  \"version\": 1,"), "{text}");
        assert!(text.contains("\n    [0.0, 1.0, 0.0],\n"), "{text}");
        let back: MdpFile<f64> = from_json(&text).unwrap();
        assert_eq!(back.to_mdp().unwrap(), m);
    }

    #[test]
    fn rational_mdp_round_trip() {
        let m = crate::envs::random_mdp::<Ratio<i64>>(4, 2, 4, 5);
        let back: MdpFile<Ratio<i64>> = from_json(&to_json(&MdpFile::from_mdp(&m))).unwrap();
        assert_eq!(back.to_mdp().unwrap(), m);
    }

    #[test]
    fn game_schedule_and_phi_round_trip() {
        let env = build_coop_keydoor::<f64>(&Default::default()).unwrap();
        let g: GameFile<f64> = from_json(&to_json(&GameFile::from_game(&env.game))).unwrap();
        assert_eq!(g.to_game().unwrap(), env.game);
        let s: ScheduleFile<f64> = from_json(&to_json(&ScheduleFile::from_schedule(&env.schedule))).unwrap();
        assert_eq!(s.to_schedule().unwrap(), env.schedule);
        let phi: AbstractionFile = from_json(&to_json(&AbstractionFile::from_abstraction(&env.phi))).unwrap();
        assert_eq!(phi.to_abstraction().unwrap(), env.phi);
    }

    #[test]
    fn keydoor_phi_and_identity_round_trip() {
        let kd = build_keydoor::<f64>(&Default::default()).unwrap();
        let phi = kd.phi.with_collapse_runs(true);
        let back: AbstractionFile = from_json(&to_json(&AbstractionFile::from_abstraction(&phi))).unwrap();
        assert_eq!(back.to_abstraction().unwrap(), phi);
        let id = Abstraction::identity();
        let back: AbstractionFile = from_json(&to_json(&AbstractionFile::from_abstraction(&id))).unwrap();
        assert_eq!(back.to_abstraction().unwrap(), id);
    }

    #[test]
    fn configs_round_trip() {
        let k = KeyDoorFile::new(KeyDoorConfig::default());
        assert_eq!(from_json::<KeyDoorFile>(&to_json(&k)).unwrap(), k);
        let c = CoopFile::new(CoopKeyDoorConfig::default());
        let text = to_json(&c);
        assert!(text.contains("\"schedule\": [\"helper\", \"independent\"]"), "{text}");
        assert_eq!(from_json::<CoopFile>(&text).unwrap(), c);
    }

    #[test]
    fn successes_round_trip() {
        let s = crate::mdp::enumerate_successes(&chain(4)).unwrap();
        let text = to_json(&SuccessesFile::from_successes(&s));
        assert!(text.contains("[\"(0,1)\", \"(1,1)\", \"(2,T)\"]"), "{text}");
        let back: SuccessesFile = from_json(&text).unwrap();
        assert_eq!(back.to_successes().unwrap(), s);
    }

    #[test]
    fn errors_name_the_field() {
        let mut doc = MdpFile::from_mdp(&chain(4));
        doc.kernel[3].pop();
        let err = from_json::<MdpFile<f64>>(&to_json(&doc)).unwrap().to_mdp().unwrap_err();
        assert_eq!(err, FormatError::Shape { field: "kernel[3]".into(), expected: 3, found: 2 });

        let text = to_json(&MdpFile::from_mdp(&chain(4))).replace("\"horizon\": 4", "\"horizon\": \"four\"");
        match from_json::<MdpFile<f64>>(&text).unwrap_err() {
            FormatError::Json { field, line, .. } => {
                assert_eq!(field, "horizon");
                assert!(line > 1);
            }
            other => panic!("{other:?}"),
        }

        let text = to_json(&MdpFile::from_mdp(&chain(4))).replace("\"reward\"", "\"rewards\"");
        assert!(matches!(from_json::<MdpFile<f64>>(&text), Err(FormatError::Json { .. })));
    }

    #[test]
    fn header_is_checked_first() {
        let text = to_json(&MdpFile::from_mdp(&chain(4)));
        assert!(matches!(from_json::<GameFile<f64>>(&text), Err(FormatError::WrongFormat { .. })));
        let text = text.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(from_json::<MdpFile<f64>>(&text), Err(FormatError::UnsupportedVersion { version: 2, .. })));
        assert_eq!(peek_format("{\"format\": \"x\", \"version\": 1}").unwrap(), "x");
    }

    #[test]
    fn invalid_probabilities_surface_as_validation() {
        let mut doc = MdpFile::from_mdp(&chain(4));
        doc.kernel[0] = vec![0.5, 0.6, 0.0];
        assert!(matches!(doc.to_mdp(), Err(FormatError::Validation(ValidationError::RowSum { .. }))));
    }
}
