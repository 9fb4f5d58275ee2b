//! CEAML document parsing.
//!
//! The concrete syntax is YAML shaped like TOSCA node templates:
//!
//! ```yaml
//! metadata:
//!   name: acc-uc2orbk
//!   version: 0.0.4
//! registry:
//!   host: registry.example.com
//! components:
//!   gameserver:
//!     type: ceaml.nodes.Container
//!     image: registry.example.com/acc/gameserver:0.0.4
//!     hardware: { cpu_cores: 0.5, memory_mib: 512 }
//!     ports: [{ port: 7777, protocol: UDP }]
//!     external_ip: true
//! workflows: {}
//! ```
//!
//! Parsing runs in three passes: YAML syntax (including duplicate keys),
//! the strict schema (unknown keys rejected), then model validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize};

use crate::model::{
    self, ActionSpec, CeamlModel, Comparison, ComponentKind, ComponentSpec, ConditionExpr, HardwareReq, PortSpec,
    RegistryRef, StorageReq, ValidationReport, WorkflowSpec, WorkflowStep,
};

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Io,
    Syntax,
    Schema,
    Validation,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error at {location}: {message}")]
    Syntax { message: String, location: Location },
    #[error("schema error{}: {message}", location.map(|l| format!(" at {l}")).unwrap_or_default())]
    Schema {
        message: String,
        location: Option<Location>,
    },
    #[error("model is invalid:\n{0}")]
    Validation(ValidationReport),
}

impl ParseError {
    pub fn kind(&self) -> ParseErrorKind {
        match self {
            ParseError::Io { .. } => ParseErrorKind::Io,
            ParseError::Syntax { .. } => ParseErrorKind::Syntax,
            ParseError::Schema { .. } => ParseErrorKind::Schema,
            ParseError::Validation(_) => ParseErrorKind::Validation,
        }
    }

    pub fn location(&self) -> Option<Location> {
        match self {
            ParseError::Syntax { location, .. } => Some(*location),
            ParseError::Schema { location, .. } => *location,
            _ => None,
        }
    }

    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            ParseError::Validation(r) => Some(r),
            _ => None,
        }
    }
}

/// Clamps a reported position into the text. Parsers report end-of-input
/// errors one line past the last one.
fn clamp_location(text: &str, line: usize, column: usize) -> Location {
    let lines: Vec<&str> = text.split('\n').collect();
    if line > lines.len() {
        let last = lines.len();
        return Location {
            line: last,
            column: lines[last - 1].chars().count() + 1,
        };
    }
    let line = line.max(1);
    let width = lines[line - 1].chars().count() + 1;
    Location {
        line,
        column: column.clamp(1, width),
    }
}

fn yaml_location(text: &str, err: &serde_yaml::Error) -> Option<Location> {
    err.location().map(|l| clamp_location(text, l.line(), l.column()))
}

const NODE_TYPES: &str = "ceaml.nodes.Container or ceaml.nodes.VM";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum NodeType {
    #[serde(rename = "ceaml.nodes.Container")]
    Container,
    #[serde(rename = "ceaml.nodes.VM")]
    Vm,
}

impl From<NodeType> for ComponentKind {
    fn from(t: NodeType) -> Self {
        match t {
            NodeType::Container => ComponentKind::Pod,
            NodeType::Vm => ComponentKind::VirtualMachine,
        }
    }
}

impl From<ComponentKind> for NodeType {
    fn from(k: ComponentKind) -> Self {
        match k {
            ComponentKind::Pod => NodeType::Container,
            ComponentKind::VirtualMachine => NodeType::Vm,
        }
    }
}

/// Deserializes a YAML scalar into its string form, so `PORT: 8080` and
/// `PORT: "8080"` mean the same thing.
fn scalar_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Scalar {
        Bool(bool),
        Int(i64),
        UInt(u64),
        Float(f64),
        Text(String),
    }
    let raw = BTreeMap::<String, Scalar>::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|(k, v)| {
            let v = match v {
                Scalar::Bool(b) => b.to_string(),
                Scalar::Int(i) => i.to_string(),
                Scalar::UInt(u) => u.to_string(),
                Scalar::Float(f) => f.to_string(),
                Scalar::Text(s) => s,
            };
            (k, v)
        })
        .collect())
}

fn version_string<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Text(String),
        Float(f64),
    }
    match Raw::deserialize(d)? {
        Raw::Int(i) => Ok(i.to_string()),
        Raw::Text(s) => Ok(s),
        Raw::Float(f) => Err(serde::de::Error::custom(format!(
            "version `{f}` was read as a number; quote it to keep every digit"
        ))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    metadata: Metadata,
    registry: RegistryRef,
    components: IndexMap<String, Component>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    workflows: IndexMap<String, Workflow>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Metadata {
    name: String,
    #[serde(deserialize_with = "version_string")]
    version: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Component {
    #[serde(rename = "type")]
    node_type: NodeType,
    image: String,
    hardware: HardwareReq,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ports: Vec<PortSpec>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    external_ip: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    storage: Option<StorageReq>,
    #[serde(default, deserialize_with = "scalar_map", skip_serializing_if = "BTreeMap::is_empty")]
    env: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    actions: Vec<RawAction>,
}

/// Like [`ActionSpec`] but lenient about scalar parameter values.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    name: String,
    verb: model::ActionVerb,
    #[serde(default, deserialize_with = "scalar_map", skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Workflow {
    condition: Condition,
    #[serde(default)]
    steps: Vec<WorkflowStep>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Condition {
    metric: String,
    operator: Comparison,
    threshold: f64,
}

impl Document {
    fn into_model(self) -> CeamlModel {
        CeamlModel {
            app_name: self.metadata.name,
            app_version: self.metadata.version,
            registry: self.registry,
            components: self
                .components
                .into_iter()
                .map(|(name, c)| ComponentSpec {
                    name,
                    kind: c.node_type.into(),
                    image: c.image,
                    hardware: c.hardware,
                    ports: c.ports,
                    needs_external_ip: c.external_ip,
                    storage: c.storage,
                    env: c.env,
                    actions: c
                        .actions
                        .into_iter()
                        .map(|a| ActionSpec {
                            name: a.name,
                            verb: a.verb,
                            params: a.params,
                        })
                        .collect(),
                })
                .collect(),
            workflows: self
                .workflows
                .into_iter()
                .map(|(name, w)| WorkflowSpec {
                    name,
                    condition: ConditionExpr {
                        metric: w.condition.metric,
                        operator: w.condition.operator,
                        threshold: w.condition.threshold,
                    },
                    steps: w.steps,
                })
                .collect(),
        }
    }

    fn from_model(model: &CeamlModel) -> Self {
        Document {
            metadata: Metadata {
                name: model.app_name.clone(),
                version: model.app_version.clone(),
            },
            registry: model.registry.clone(),
            components: model
                .components
                .iter()
                .map(|c| {
                    (
                        c.name.clone(),
                        Component {
                            node_type: c.kind.into(),
                            image: c.image.clone(),
                            hardware: c.hardware,
                            ports: c.ports.clone(),
                            external_ip: c.needs_external_ip,
                            storage: c.storage.clone(),
                            env: c.env.clone(),
                            actions: c
                                .actions
                                .iter()
                                .map(|a| RawAction {
                                    name: a.name.clone(),
                                    verb: a.verb,
                                    params: a.params.clone(),
                                })
                                .collect(),
                        },
                    )
                })
                .collect(),
            workflows: model
                .workflows
                .iter()
                .map(|w| {
                    (
                        w.name.clone(),
                        Workflow {
                            condition: Condition {
                                metric: w.condition.metric.clone(),
                                operator: w.condition.operator,
                                threshold: w.condition.threshold,
                            },
                            steps: w.steps.clone(),
                        },
                    )
                })
                .collect(),
        }
    }
}

/// Parses and validates a CEAML document held in memory.
pub fn parse_text(text: &str) -> Result<CeamlModel, ParseError> {
    if let Some(location) = excessive_flow_nesting(text) {
        return Err(ParseError::Syntax {
            message: format!("flow collections nested deeper than {MAX_FLOW_DEPTH} levels"),
            location,
        });
    }
    // Pass 1: plain YAML. Duplicate mapping keys fail here.
    if let Err(e) = serde_yaml::from_str::<serde_yaml::Value>(text) {
        return Err(ParseError::Syntax {
            message: e.to_string(),
            location: yaml_location(text, &e).unwrap_or(Location { line: 1, column: 1 }),
        });
    }
    // Pass 2: strict schema.
    let doc: Document = serde_yaml::from_str(text).map_err(|e| ParseError::Schema {
        message: schema_message(&e),
        location: yaml_location(text, &e),
    })?;
    // Pass 3: model invariants.
    let model = doc.into_model();
    let report = model::validate(&model);
    if report.is_valid() {
        Ok(model)
    } else {
        Err(ParseError::Validation(report))
    }
}

/// The YAML scanner does work proportional to the whole run of open
/// brackets before its own recursion limit (128) triggers, so absurd
/// nesting is cut off up front. Set well above that limit so a miscounted
/// bracket in a block scalar can never reject a document the YAML parser
/// would accept.
const MAX_FLOW_DEPTH: usize = 1000;

/// Location of the first `[` or `{` that opens more than [`MAX_FLOW_DEPTH`]
/// levels, skipping quoted scalars and comments.
fn excessive_flow_nesting(text: &str) -> Option<Location> {
    #[derive(PartialEq)]
    enum State {
        Plain,
        Single,
        Double,
        Comment,
    }
    let (mut line, mut column) = (1, 0);
    let mut depth = 0usize;
    let mut state = State::Plain;
    let mut prev = '\n';
    let mut escaped = false;
    for ch in text.chars() {
        column += 1;
        match state {
            State::Plain => match ch {
                '[' | '{' => {
                    depth += 1;
                    if depth > MAX_FLOW_DEPTH {
                        return Some(Location { line, column });
                    }
                }
                ']' | '}' => depth = depth.saturating_sub(1),
                '\'' if !prev.is_alphanumeric() => state = State::Single,
                '"' if !prev.is_alphanumeric() => state = State::Double,
                '#' if prev.is_whitespace() => state = State::Comment,
                _ => {}
            },
            State::Single if ch == '\'' => state = State::Plain,
            State::Double if escaped => escaped = false,
            State::Double if ch == '\\' => escaped = true,
            State::Double if ch == '"' => state = State::Plain,
            _ => {}
        }
        if ch == '\n' {
            line += 1;
            column = 0;
            if state == State::Comment {
                state = State::Plain;
            }
        }
        prev = ch;
    }
    None
}

fn schema_message(e: &serde_yaml::Error) -> String {
    let msg = e.to_string();
    if msg.contains("unknown variant") && msg.contains("ceaml.nodes") {
        format!("{msg} (component type must be {NODE_TYPES})")
    } else {
        msg
    }
}

/// Like [`parse_text`] for raw bytes; non UTF-8 input is a syntax error.
pub fn parse_bytes(bytes: &[u8]) -> Result<CeamlModel, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_text(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(ParseError::Syntax {
                message: format!("input is not valid UTF-8: {e}"),
                location: Location { line, column },
            })
        }
    }
}

pub fn parse_file(path: impl AsRef<Path>) -> Result<CeamlModel, ParseError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ParseError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_bytes(&bytes)
}

/// Writes a model back in the concrete syntax. Only meaningful for valid
/// models: components and workflows are keyed by name.
pub fn serialize_model(model: &CeamlModel) -> String {
    serde_yaml::to_string(&Document::from_model(model)).expect("model documents always serialize")
}

/// One entry of the uniform entity view over a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeEntity<'a> {
    Component(&'a ComponentSpec),
    Workflow(&'a WorkflowSpec),
}

impl<'a> NodeEntity<'a> {
    pub fn name(&self) -> &'a str {
        match self {
            NodeEntity::Component(c) => &c.name,
            NodeEntity::Workflow(w) => &w.name,
        }
    }
}

/// Every component followed by every workflow, in document order, tied to
/// the model it came from.
#[derive(Debug, Clone)]
pub struct NodeList<'a> {
    model: &'a CeamlModel,
    entities: Vec<NodeEntity<'a>>,
}

impl<'a> NodeList<'a> {
    pub fn model(&self) -> &'a CeamlModel {
        self.model
    }

    pub fn entities(&self) -> &[NodeEntity<'a>] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = &'a ComponentSpec> + Clone + '_ {
        self.entities.iter().filter_map(|e| match e {
            NodeEntity::Component(c) => Some(*c),
            NodeEntity::Workflow(_) => None,
        })
    }

    pub fn workflows(&self) -> impl Iterator<Item = &'a WorkflowSpec> + Clone + '_ {
        self.entities.iter().filter_map(|e| match e {
            NodeEntity::Workflow(w) => Some(*w),
            NodeEntity::Component(_) => None,
        })
    }
}

pub fn node_list(model: &CeamlModel) -> NodeList<'_> {
    let entities = model
        .components
        .iter()
        .map(NodeEntity::Component)
        .chain(model.workflows.iter().map(NodeEntity::Workflow))
        .collect();
    NodeList { model, entities }
}
