//! Orchestrator-facing projections of a model: matchmaking (hardware
//! requirements), actions per component, and condition-triggered workflows.
//!
//! Each submodel serializes to a YAML document with a common header:
//!
//! ```yaml
//! model: matchmaking        # or actions / workflows
//! instance: acc-uc2orbk-0-0-4-00036
//! application: acc-uc2orbk
//! version: 0.0.4
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::identity::{IdentityError, InstanceId, NONCE_LEN};
use crate::model::{
    self, ActionSpec, ActionVerb, CeamlModel, Comparison, ComponentKind, HardwareReq, ValidationReport,
};
use crate::parser::NodeList;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SubmodelError {
    #[error("model is invalid:\n{0}")]
    InvalidModel(ValidationReport),
    #[error("workflow `{workflow}` step {component}/{action} resolves to no declared action")]
    DanglingReference {
        workflow: String,
        component: String,
        action: String,
    },
    #[error("cannot read submodel: {0}")]
    Read(String),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

fn require_valid(model: &CeamlModel) -> Result<(), SubmodelError> {
    let report = model::validate(model);
    if report.is_valid() {
        Ok(())
    } else {
        Err(SubmodelError::InvalidModel(report))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchmakingEntry {
    pub component: String,
    pub kind: ComponentKind,
    pub hardware: HardwareReq,
}

/// Components with their hardware requirements, for host selection.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchmakingModel {
    pub instance: InstanceId,
    pub entries: Vec<MatchmakingEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub component: String,
    #[serde(default)]
    pub actions: Vec<ActionSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionModel {
    pub instance: InstanceId,
    pub entries: Vec<ActionEntry>,
}

/// Condition with the operator canonicalized and the threshold written as
/// a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizedCondition {
    pub metric: String,
    pub operator: Comparison,
    pub threshold: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowStepRef {
    pub component: String,
    pub action: String,
    pub verb: ActionVerb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowEntry {
    pub name: String,
    pub condition: NormalizedCondition,
    pub steps: Vec<WorkflowStepRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowModel {
    pub instance: InstanceId,
    pub workflows: Vec<WorkflowEntry>,
}

/// The three submodels of one deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct OrchestrationSubmodels {
    pub matchmaking: MatchmakingModel,
    pub actions: ActionModel,
    pub workflows: WorkflowModel,
}

/// Decimal rendering of a threshold: shortest exact form, no exponent,
/// no trailing `.0`.
pub fn normalize_threshold(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    format!("{value}")
}

pub fn matchmaking_model(nodes: &NodeList<'_>, id: &InstanceId) -> Result<MatchmakingModel, SubmodelError> {
    require_valid(nodes.model())?;
    Ok(MatchmakingModel {
        instance: id.clone(),
        entries: nodes
            .components()
            .map(|c| MatchmakingEntry {
                component: c.name.clone(),
                kind: c.kind,
                hardware: c.hardware,
            })
            .collect(),
    })
}

pub fn action_model(nodes: &NodeList<'_>, id: &InstanceId) -> Result<ActionModel, SubmodelError> {
    require_valid(nodes.model())?;
    Ok(ActionModel {
        instance: id.clone(),
        entries: nodes
            .components()
            .map(|c| ActionEntry {
                component: c.name.clone(),
                actions: c.actions.clone(),
            })
            .collect(),
    })
}

pub fn workflow_model(nodes: &NodeList<'_>, id: &InstanceId) -> Result<WorkflowModel, SubmodelError> {
    let model = nodes.model();
    let mut workflows = Vec::new();
    for w in nodes.workflows() {
        let mut steps = Vec::with_capacity(w.steps.len());
        for step in &w.steps {
            let action = model
                .component(&step.component)
                .and_then(|c| c.actions.iter().find(|a| a.name == step.action))
                .ok_or_else(|| SubmodelError::DanglingReference {
                    workflow: w.name.clone(),
                    component: step.component.clone(),
                    action: step.action.clone(),
                })?;
            steps.push(WorkflowStepRef {
                component: step.component.clone(),
                action: step.action.clone(),
                verb: action.verb,
            });
        }
        workflows.push(WorkflowEntry {
            name: w.name.clone(),
            condition: NormalizedCondition {
                metric: w.condition.metric.clone(),
                operator: w.condition.operator,
                threshold: normalize_threshold(w.condition.threshold),
            },
            steps,
        });
    }
    require_valid(model)?;
    Ok(WorkflowModel {
        instance: id.clone(),
        workflows,
    })
}

/// All three submodels at once.
pub fn orchestration_submodels(nodes: &NodeList<'_>, id: &InstanceId) -> Result<OrchestrationSubmodels, SubmodelError> {
    Ok(OrchestrationSubmodels {
        matchmaking: matchmaking_model(nodes, id)?,
        actions: action_model(nodes, id)?,
        workflows: workflow_model(nodes, id)?,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    model: String,
    instance: String,
    application: String,
    version: String,
}

impl Header {
    fn new(kind: &str, id: &InstanceId) -> Self {
        Header {
            model: kind.to_string(),
            instance: id.as_str().to_string(),
            application: id.app_name().to_string(),
            version: id.version(),
        }
    }

    fn instance(&self, kind: &str) -> Result<InstanceId, SubmodelError> {
        if self.model != kind {
            return Err(SubmodelError::Read(format!(
                "expected a `{kind}` submodel, found `{}`",
                self.model
            )));
        }
        let nonce_at = self.instance.len().saturating_sub(NONCE_LEN);
        let nonce = self.instance.get(nonce_at..).unwrap_or_default();
        let id = InstanceId::new(&self.application, &self.version, nonce)?;
        if id.as_str() != self.instance {
            return Err(SubmodelError::Read(format!(
                "instance `{}` does not match application {} version {}",
                self.instance, self.application, self.version
            )));
        }
        Ok(id)
    }
}

#[derive(Serialize, Deserialize)]
struct Wire<T> {
    #[serde(flatten)]
    header: Header,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize, Deserialize)]
struct EntriesBody<E> {
    entries: Vec<E>,
}

#[derive(Serialize, Deserialize)]
struct WorkflowsBody {
    workflows: Vec<WorkflowEntry>,
}

/// A submodel with a YAML form that [`read_submodel`] reads back.
pub trait Submodel: Sized {
    const KIND: &'static str;
    /// File name used when the CLI writes the submodel to a directory.
    const FILE_NAME: &'static str;

    fn to_yaml(&self) -> String;
    fn from_yaml(text: &str) -> Result<Self, SubmodelError>;
}

fn write<T: Serialize>(kind: &str, id: &InstanceId, body: T) -> String {
    let wire = Wire {
        header: Header::new(kind, id),
        body,
    };
    serde_yaml::to_string(&wire).expect("submodels always serialize")
}

fn read<T: DeserializeOwned>(kind: &str, text: &str) -> Result<(InstanceId, T), SubmodelError> {
    let wire: Wire<T> = serde_yaml::from_str(text).map_err(|e| SubmodelError::Read(e.to_string()))?;
    Ok((wire.header.instance(kind)?, wire.body))
}

impl Submodel for MatchmakingModel {
    const KIND: &'static str = "matchmaking";
    const FILE_NAME: &'static str = "matchmaking.yaml";

    fn to_yaml(&self) -> String {
        write(
            Self::KIND,
            &self.instance,
            EntriesBody {
                entries: self.entries.clone(),
            },
        )
    }

    fn from_yaml(text: &str) -> Result<Self, SubmodelError> {
        let (instance, body): (_, EntriesBody<MatchmakingEntry>) = read(Self::KIND, text)?;
        Ok(MatchmakingModel {
            instance,
            entries: body.entries,
        })
    }
}

impl Submodel for ActionModel {
    const KIND: &'static str = "actions";
    const FILE_NAME: &'static str = "actions.yaml";

    fn to_yaml(&self) -> String {
        write(
            Self::KIND,
            &self.instance,
            EntriesBody {
                entries: self.entries.clone(),
            },
        )
    }

    fn from_yaml(text: &str) -> Result<Self, SubmodelError> {
        let (instance, body): (_, EntriesBody<ActionEntry>) = read(Self::KIND, text)?;
        Ok(ActionModel {
            instance,
            entries: body.entries,
        })
    }
}

impl Submodel for WorkflowModel {
    const KIND: &'static str = "workflows";
    const FILE_NAME: &'static str = "workflows.yaml";

    fn to_yaml(&self) -> String {
        write(
            Self::KIND,
            &self.instance,
            WorkflowsBody {
                workflows: self.workflows.clone(),
            },
        )
    }

    fn from_yaml(text: &str) -> Result<Self, SubmodelError> {
        let (instance, body): (_, WorkflowsBody) = read(Self::KIND, text)?;
        Ok(WorkflowModel {
            instance,
            workflows: body.workflows,
        })
    }
}

pub fn serialize_submodel<S: Submodel>(submodel: &S) -> String {
    submodel.to_yaml()
}

pub fn read_submodel<S: Submodel>(text: &str) -> Result<S, SubmodelError> {
    S::from_yaml(text)
}
