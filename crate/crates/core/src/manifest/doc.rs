use std::collections::BTreeMap;
use std::fmt;

use serde_json::{Map, Value};

use super::labels;
use crate::identity::InstanceId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ManifestKind {
    Namespace,
    Secret,
    PersistentVolume,
    PersistentVolumeClaim,
    Deployment,
    VirtualMachine,
    Service,
}

impl ManifestKind {
    pub const ALL: [ManifestKind; 7] = [
        ManifestKind::Namespace,
        ManifestKind::Secret,
        ManifestKind::PersistentVolume,
        ManifestKind::PersistentVolumeClaim,
        ManifestKind::Deployment,
        ManifestKind::VirtualMachine,
        ManifestKind::Service,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ManifestKind::Namespace => "Namespace",
            ManifestKind::Secret => "Secret",
            ManifestKind::PersistentVolume => "PersistentVolume",
            ManifestKind::PersistentVolumeClaim => "PersistentVolumeClaim",
            ManifestKind::Deployment => "Deployment",
            ManifestKind::VirtualMachine => "VirtualMachine",
            ManifestKind::Service => "Service",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn api_version(self) -> &'static str {
        match self {
            ManifestKind::Deployment => "apps/v1",
            ManifestKind::VirtualMachine => "kubevirt.io/v1",
            _ => "v1",
        }
    }

    /// Cluster-scoped kinds carry no namespace.
    pub fn is_namespaced(self) -> bool {
        !matches!(self, ManifestKind::Namespace | ManifestKind::PersistentVolume)
    }

    /// Position in the apply order. Deployments and virtual machines share a
    /// rank and keep component document order between them.
    pub fn apply_rank(self) -> u8 {
        match self {
            ManifestKind::Namespace => 0,
            ManifestKind::Secret => 1,
            ManifestKind::PersistentVolume => 2,
            ManifestKind::PersistentVolumeClaim => 3,
            ManifestKind::Deployment | ManifestKind::VirtualMachine => 4,
            ManifestKind::Service => 5,
        }
    }
}

impl fmt::Display for ManifestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One Kubernetes or Kubevirt resource document.
///
/// `body` holds every top-level field besides `apiVersion`, `kind` and
/// `metadata` (`spec`, `data`, `type`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestDoc {
    pub api_version: String,
    pub kind: ManifestKind,
    pub name: String,
    pub namespace: Option<String>,
    pub labels: BTreeMap<String, String>,
    pub annotations: BTreeMap<String, String>,
    pub body: Map<String, Value>,
}

impl ManifestDoc {
    pub fn new(kind: ManifestKind, name: impl Into<String>, namespace: Option<&InstanceId>) -> Self {
        ManifestDoc {
            api_version: kind.api_version().to_string(),
            kind,
            name: name.into(),
            namespace: namespace.map(|id| id.as_str().to_string()),
            labels: BTreeMap::new(),
            annotations: BTreeMap::new(),
            body: Map::new(),
        }
    }

    pub fn with_body(mut self, key: &str, value: Value) -> Self {
        self.body.insert(key.to_string(), value);
        self
    }

    /// Component this document belongs to, if any.
    pub fn component(&self) -> Option<&str> {
        self.labels.get(labels::COMPONENT).map(String::as_str)
    }

    /// Full document tree as applied to a cluster.
    pub fn to_value(&self) -> Value {
        let mut metadata = Map::new();
        metadata.insert("name".into(), Value::String(self.name.clone()));
        if let Some(ns) = &self.namespace {
            metadata.insert("namespace".into(), Value::String(ns.clone()));
        }
        if !self.labels.is_empty() {
            metadata.insert("labels".into(), string_map(&self.labels));
        }
        if !self.annotations.is_empty() {
            metadata.insert("annotations".into(), string_map(&self.annotations));
        }
        let mut root = Map::new();
        root.insert("apiVersion".into(), Value::String(self.api_version.clone()));
        root.insert("kind".into(), Value::String(self.kind.as_str().into()));
        root.insert("metadata".into(), Value::Object(metadata));
        for (k, v) in &self.body {
            root.insert(k.clone(), v.clone());
        }
        Value::Object(root)
    }

    /// Inverse of [`ManifestDoc::to_value`].
    pub fn from_value(value: &Value) -> Option<Self> {
        let root = value.as_object()?;
        let kind = ManifestKind::parse(root.get("kind")?.as_str()?)?;
        let metadata = root.get("metadata")?.as_object()?;
        let read_map = |key: &str| -> Option<BTreeMap<String, String>> {
            match metadata.get(key) {
                None => Some(BTreeMap::new()),
                Some(v) => v
                    .as_object()?
                    .iter()
                    .map(|(k, v)| Some((k.clone(), v.as_str()?.to_string())))
                    .collect(),
            }
        };
        let mut body = root.clone();
        for key in ["apiVersion", "kind", "metadata"] {
            body.remove(key);
        }
        Some(ManifestDoc {
            api_version: root.get("apiVersion")?.as_str()?.to_string(),
            kind,
            name: metadata.get("name")?.as_str()?.to_string(),
            namespace: match metadata.get("namespace") {
                Some(v) => Some(v.as_str()?.to_string()),
                None => None,
            },
            labels: read_map("labels")?,
            annotations: read_map("annotations")?,
            body,
        })
    }
}

fn string_map(map: &BTreeMap<String, String>) -> Value {
    Value::Object(map.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
}

/// Converts a JSON tree to YAML with every mapping's keys in sorted order,
/// independent of how the JSON map happens to be ordered.
pub(crate) fn to_sorted_yaml(value: &Value) -> serde_yaml::Value {
    match value {
        Value::Null => serde_yaml::Value::Null,
        Value::Bool(b) => serde_yaml::Value::Bool(*b),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                serde_yaml::Value::Number(u.into())
            } else if let Some(i) = n.as_i64() {
                serde_yaml::Value::Number(i.into())
            } else {
                serde_yaml::Value::Number(n.as_f64().unwrap_or(f64::NAN).into())
            }
        }
        Value::String(s) => serde_yaml::Value::String(s.clone()),
        Value::Array(items) => serde_yaml::Value::Sequence(items.iter().map(to_sorted_yaml).collect()),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let mut out = serde_yaml::Mapping::new();
            for k in keys {
                out.insert(serde_yaml::Value::String(k.clone()), to_sorted_yaml(&map[k]));
            }
            serde_yaml::Value::Mapping(out)
        }
    }
}
