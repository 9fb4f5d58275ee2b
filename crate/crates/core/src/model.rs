//! Validated domain types for CEAML application models.
//!
//! A [`CeamlModel`] is plain data: it can be built by the parser or assembled
//! in code. Every generator runs [`validate`] first and refuses models with a
//! non-empty [`ValidationReport`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::identity::{naming, NONCE_LEN, REPLICA_PREFIX};

/// Maximum length of an application name.
pub const MAX_APP_NAME_LEN: usize = 32;

/// Maximum length of a component name. Leaves room for the longest derived
/// resource suffix (`-regcred`) inside a 63 character DNS label.
pub const MAX_COMPONENT_NAME_LEN: usize = 55;

#[derive(Debug, Clone, PartialEq)]
pub struct CeamlModel {
    pub app_name: String,
    pub app_version: String,
    pub registry: RegistryRef,
    pub components: Vec<ComponentSpec>,
    pub workflows: Vec<WorkflowSpec>,
}

impl CeamlModel {
    pub fn component(&self, name: &str) -> Option<&ComponentSpec> {
        self.components.iter().find(|c| c.name == name)
    }
}

/// Private registry the component images are pulled from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryRef {
    pub host: String,
    /// Name of the externally supplied credential. The token itself is
    /// never part of the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    Pod,
    VirtualMachine,
}

impl ComponentKind {
    /// TOSCA-style node type used in the concrete syntax.
    pub fn node_type(self) -> &'static str {
        match self {
            ComponentKind::Pod => "ceaml.nodes.Container",
            ComponentKind::VirtualMachine => "ceaml.nodes.VM",
        }
    }

    pub fn from_node_type(s: &str) -> Option<Self> {
        match s {
            "ceaml.nodes.Container" => Some(ComponentKind::Pod),
            "ceaml.nodes.VM" => Some(ComponentKind::VirtualMachine),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub name: String,
    pub kind: ComponentKind,
    pub image: String,
    pub hardware: HardwareReq,
    pub ports: Vec<PortSpec>,
    pub needs_external_ip: bool,
    pub storage: Option<StorageReq>,
    pub env: BTreeMap<String, String>,
    pub actions: Vec<ActionSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortSpec {
    /// Kept wider than `u16` so out-of-range values surface as violations.
    pub port: u32,
    #[serde(default)]
    pub protocol: Protocol,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[default]
    #[serde(rename = "TCP")]
    Tcp,
    #[serde(rename = "UDP")]
    Udp,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Tcp => "TCP",
            Protocol::Udp => "UDP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareReq {
    pub cpu_cores: Millicores,
    pub memory_mib: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk_gib: Option<u64>,
    #[serde(default)]
    pub gpu_count: u32,
}

/// CPU quantity in thousandths of a core.
///
/// Written as decimal cores (`0.5`, `2`, `1.25`) with at most three
/// fractional digits, which is the finest granularity Kubernetes accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Millicores(pub u32);

impl Millicores {
    pub fn from_cores(cores: u32) -> Self {
        Millicores(cores * 1000)
    }

    /// Kubernetes quantity string, always in milli form (`500m`).
    pub fn to_quantity(self) -> String {
        format!("{}m", self.0)
    }

    pub fn from_quantity(s: &str) -> Option<Self> {
        match s.strip_suffix('m') {
            Some(milli) => milli.parse().ok().map(Millicores),
            None => s.parse().ok(),
        }
    }
}

impl fmt::Display for Millicores {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 1000;
        let frac = self.0 % 1000;
        if frac == 0 {
            write!(f, "{whole}")
        } else {
            let digits = format!("{frac:03}");
            write!(f, "{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid CPU quantity `{0}`: expected decimal cores with at most 3 fractional digits")]
pub struct MillicoresParseError(String);

impl FromStr for Millicores {
    type Err = MillicoresParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || MillicoresParseError(s.to_string());
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if whole.is_empty() || !all_digits(whole) || !all_digits(frac) || frac.len() > 3 {
            return Err(err());
        }
        if s.contains('.') && frac.is_empty() {
            return Err(err());
        }
        let whole: u32 = whole.parse().map_err(|_| err())?;
        let mut frac_val = 0u32;
        for (i, b) in frac.bytes().enumerate() {
            frac_val += u32::from(b - b'0') * 10u32.pow(2 - i as u32);
        }
        whole
            .checked_mul(1000)
            .and_then(|w| w.checked_add(frac_val))
            .map(Millicores)
            .ok_or_else(err)
    }
}

impl Serialize for Millicores {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_multiple_of(1000) {
            serializer.serialize_u64(u64::from(self.0 / 1000))
        } else {
            serializer.serialize_f64(f64::from(self.0) / 1000.0)
        }
    }
}

impl<'de> Deserialize<'de> for Millicores {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Float(f64),
            Text(String),
        }
        let text = match Raw::deserialize(deserializer)? {
            Raw::Int(i) => i.to_string(),
            // Shortest round-trip formatting recovers the written decimal.
            Raw::Float(f) if f.is_finite() && f >= 0.0 => format!("{f}"),
            Raw::Float(f) => f.to_string(),
            Raw::Text(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageReq {
    pub size_gib: u64,
    pub mount_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub name: String,
    pub verb: ActionVerb,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionVerb {
    Deploy,
    Terminate,
    ScaleOut,
    Restart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowSpec {
    pub name: String,
    pub condition: ConditionExpr,
    pub steps: Vec<WorkflowStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionExpr {
    pub metric: String,
    pub operator: Comparison,
    pub threshold: f64,
}

/// Comparison operator of a workflow condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Comparison {
    pub const ALL: [Comparison; 5] = [
        Comparison::Lt,
        Comparison::Le,
        Comparison::Gt,
        Comparison::Ge,
        Comparison::Eq,
    ];

    /// Canonical ASCII spelling.
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
            Comparison::Eq => "==",
        }
    }

    /// Accepts the canonical symbols plus `≤`, `≥` and the mnemonic forms
    /// `lt`, `le`, `gt`, `ge`, `eq`.
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "<" | "lt" => Comparison::Lt,
            "<=" | "≤" | "le" => Comparison::Le,
            ">" | "gt" => Comparison::Gt,
            ">=" | "≥" | "ge" => Comparison::Ge,
            "==" | "eq" => Comparison::Eq,
            _ => return None,
        })
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Comparison {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Comparison {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Comparison::parse(&s).ok_or_else(|| {
            serde::de::Error::custom(format!(
                "unknown comparison operator `{s}`, expected one of <, <=, >, >=, =="
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowStep {
    pub component: String,
    pub action: String,
}

/// Machine-readable violation class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ViolationCode {
    InvalidAppName,
    InvalidVersion,
    EmptyRegistryHost,
    /// A generated instance or running instance name would exceed 63 characters.
    NameTooLong,
    InvalidComponentName,
    DuplicateComponentName,
    EmptyImage,
    NonPositiveCpu,
    NonPositiveMemory,
    NonPositiveDisk,
    InvalidPort,
    DuplicatePort,
    ExternalIpWithoutPorts,
    NonPositiveStorage,
    RelativeMountPath,
    InvalidEnvName,
    InvalidActionName,
    DuplicateActionName,
    InvalidWorkflowName,
    DuplicateWorkflowName,
    EmptyMetric,
    NonFiniteThreshold,
    EmptyWorkflowSteps,
    DanglingWorkflowReference,
    UnknownWorkflowAction,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Dotted path to the offending value, e.g. `components[1].ports[0].port`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    fn push(&mut self, code: ViolationCode, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            code,
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("model is valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Application names: lowercase alphanumerics and hyphens, starting and
/// ending with an alphanumeric, at most [`MAX_APP_NAME_LEN`] characters.
pub fn is_valid_app_name(name: &str) -> bool {
    name.len() <= MAX_APP_NAME_LEN && naming::is_dns1123_label(name)
}

/// Dotted decimal: one or more non-empty digit-only segments.
pub fn is_valid_version(version: &str) -> bool {
    !version.is_empty()
        && version
            .split('.')
            .all(|seg| !seg.is_empty() && seg.bytes().all(|b| b.is_ascii_digit()))
}

pub fn is_valid_component_name(name: &str) -> bool {
    name.len() <= MAX_COMPONENT_NAME_LEN && naming::is_dns1123_label(name)
}

/// Action and workflow identifiers.
pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_' || b == b'.')
}

fn is_env_name(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic() || b == b'_')
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.')
}

fn instance_id_len(model: &CeamlModel) -> usize {
    model.app_name.len() + 1 + model.app_version.len() + 1 + NONCE_LEN
}

/// Length of the first replica's running instance name.
fn running_name_len(id_len: usize, component: &str) -> usize {
    id_len + 1 + component.len() + 1 + NONCE_LEN + 1 + REPLICA_PREFIX.len() + 1
}

/// Checks every model invariant. Violations are reported in document order.
pub fn validate(model: &CeamlModel) -> ValidationReport {
    use ViolationCode::*;
    let mut report = ValidationReport::default();

    if !is_valid_app_name(&model.app_name) {
        report.push(
            InvalidAppName,
            "metadata.name",
            format!(
                "`{}` must be 1-{MAX_APP_NAME_LEN} lowercase alphanumerics or '-', starting and ending alphanumeric",
                model.app_name
            ),
        );
    }
    if !is_valid_version(&model.app_version) {
        report.push(
            InvalidVersion,
            "metadata.version",
            format!("`{}` is not a dotted decimal version", model.app_version),
        );
    }
    if model.registry.host.trim().is_empty() {
        report.push(EmptyRegistryHost, "registry.host", "registry host is empty");
    }
    let id_len =
        (is_valid_app_name(&model.app_name) && is_valid_version(&model.app_version)).then(|| instance_id_len(model));
    if let Some(len) = id_len.filter(|&len| len > naming::MAX_LABEL_LEN) {
        report.push(
            NameTooLong,
            "metadata",
            format!("instance ids for this name and version are {len} characters, over the 63 limit"),
        );
    }

    let mut seen_components = HashSet::new();
    for (ci, c) in model.components.iter().enumerate() {
        let at = |rest: &str| format!("components[{ci}]{rest}");
        if !is_valid_component_name(&c.name) {
            report.push(
                InvalidComponentName,
                at(".name"),
                format!(
                    "`{}` must be a DNS-1123 label of at most {MAX_COMPONENT_NAME_LEN} characters",
                    c.name
                ),
            );
        }
        if let (Some(id_len), true) = (id_len, is_valid_component_name(&c.name)) {
            let len = running_name_len(id_len, &c.name);
            if id_len <= naming::MAX_LABEL_LEN && len > naming::MAX_LABEL_LEN {
                report.push(
                    NameTooLong,
                    at(".name"),
                    format!(
                        "running instance names for `{}` are {len} characters, over the 63 limit",
                        c.name
                    ),
                );
            }
        }
        if !seen_components.insert(c.name.as_str()) {
            report.push(
                DuplicateComponentName,
                at(".name"),
                format!("component `{}` is declared more than once", c.name),
            );
        }
        if c.image.trim().is_empty() {
            report.push(EmptyImage, at(".image"), "image reference is empty");
        }
        if c.hardware.cpu_cores.0 == 0 {
            report.push(NonPositiveCpu, at(".hardware.cpu_cores"), "cpu_cores must be > 0");
        }
        if c.hardware.memory_mib == 0 {
            report.push(NonPositiveMemory, at(".hardware.memory_mib"), "memory_mib must be > 0");
        }
        if c.hardware.disk_gib == Some(0) {
            report.push(NonPositiveDisk, at(".hardware.disk_gib"), "disk_gib must be > 0");
        }
        let mut seen_ports = HashSet::new();
        for (pi, p) in c.ports.iter().enumerate() {
            if !(1..=65535).contains(&p.port) {
                report.push(
                    InvalidPort,
                    at(&format!(".ports[{pi}].port")),
                    format!("port {} outside 1-65535", p.port),
                );
            }
            if !seen_ports.insert((p.port, p.protocol)) {
                report.push(
                    DuplicatePort,
                    at(&format!(".ports[{pi}]")),
                    format!("{}/{} declared twice", p.port, p.protocol.as_str()),
                );
            }
        }
        if c.needs_external_ip && c.ports.is_empty() {
            report.push(
                ExternalIpWithoutPorts,
                at(".external_ip"),
                "an external IP requires at least one declared port",
            );
        }
        if let Some(storage) = &c.storage {
            if storage.size_gib == 0 {
                report.push(NonPositiveStorage, at(".storage.size_gib"), "size_gib must be > 0");
            }
            if !storage.mount_path.starts_with('/') {
                report.push(
                    RelativeMountPath,
                    at(".storage.mount_path"),
                    format!("`{}` is not an absolute path", storage.mount_path),
                );
            }
        }
        for key in c.env.keys() {
            if !is_env_name(key) {
                report.push(
                    InvalidEnvName,
                    at(&format!(".env.{key}")),
                    format!("`{key}` is not a valid environment variable name"),
                );
            }
        }
        let mut seen_actions = HashSet::new();
        for (ai, a) in c.actions.iter().enumerate() {
            if !is_identifier(&a.name) {
                report.push(
                    InvalidActionName,
                    at(&format!(".actions[{ai}].name")),
                    format!("`{}` is not a valid identifier", a.name),
                );
            }
            if !seen_actions.insert(a.name.as_str()) {
                report.push(
                    DuplicateActionName,
                    at(&format!(".actions[{ai}].name")),
                    format!("action `{}` declared twice in `{}`", a.name, c.name),
                );
            }
        }
    }

    let mut seen_workflows = HashSet::new();
    for (wi, w) in model.workflows.iter().enumerate() {
        let at = |rest: &str| format!("workflows[{wi}]{rest}");
        if !is_identifier(&w.name) {
            report.push(
                InvalidWorkflowName,
                at(".name"),
                format!("`{}` is not a valid identifier", w.name),
            );
        }
        if !seen_workflows.insert(w.name.as_str()) {
            report.push(
                DuplicateWorkflowName,
                at(".name"),
                format!("workflow `{}` declared twice", w.name),
            );
        }
        if w.condition.metric.trim().is_empty() {
            report.push(EmptyMetric, at(".condition.metric"), "metric name is empty");
        }
        if !w.condition.threshold.is_finite() {
            report.push(
                NonFiniteThreshold,
                at(".condition.threshold"),
                "threshold must be a finite number",
            );
        }
        if w.steps.is_empty() {
            report.push(EmptyWorkflowSteps, at(".steps"), "workflow has no steps");
        }
        for (si, step) in w.steps.iter().enumerate() {
            match model.component(&step.component) {
                None => report.push(
                    DanglingWorkflowReference,
                    at(&format!(".steps[{si}].component")),
                    format!("component `{}` does not exist", step.component),
                ),
                Some(c) if !c.actions.iter().any(|a| a.name == step.action) => report.push(
                    UnknownWorkflowAction,
                    at(&format!(".steps[{si}].action")),
                    format!("component `{}` declares no action `{}`", c.name, step.action),
                ),
                Some(_) => {}
            }
        }
    }

    report
}
