//! Deployment, termination and scale-out plans.
//!
//! Each plan is computed entirely in memory and returned as one value; a
//! failure at any stage returns only the error.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::identity::{self, IdentityError, InstanceId, RunningInstanceName};
use crate::manifest::{self, DeployInputs, ManifestBundle, ManifestError, ManifestKind};
use crate::model::CeamlModel;
use crate::parser::{self, node_list, ParseError};
use crate::submodel::{self, OrchestrationSubmodels, SubmodelError};

/// Pipeline stage a plan failed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStage {
    LoadModel,
    CheckInputs,
    MintInstanceId,
    Namespace,
    Matchmaking,
    Secrets,
    Manifests,
    Actions,
    Workflows,
    ResolveInstance,
}

impl fmt::Display for PlanStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PlanStage::LoadModel => "load model",
            PlanStage::CheckInputs => "check inputs",
            PlanStage::MintInstanceId => "mint instance id",
            PlanStage::Namespace => "namespace",
            PlanStage::Matchmaking => "matchmaking model",
            PlanStage::Secrets => "secrets",
            PlanStage::Manifests => "manifests",
            PlanStage::Actions => "action model",
            PlanStage::Workflows => "workflow model",
            PlanStage::ResolveInstance => "resolve running instance",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("{stage}: {source}")]
    Parse {
        stage: PlanStage,
        #[source]
        source: ParseError,
    },
    #[error("{stage}: {source}")]
    Identity {
        stage: PlanStage,
        #[source]
        source: IdentityError,
    },
    #[error("{stage}: {source}")]
    Manifest {
        stage: PlanStage,
        #[source]
        source: ManifestError,
    },
    #[error("{stage}: {source}")]
    Submodel {
        stage: PlanStage,
        #[source]
        source: SubmodelError,
    },
    #[error("version {input} does not match the model version {model}")]
    VersionMismatch { input: String, model: String },
}

impl PlanError {
    pub fn stage(&self) -> PlanStage {
        match self {
            PlanError::Parse { stage, .. }
            | PlanError::Identity { stage, .. }
            | PlanError::Manifest { stage, .. }
            | PlanError::Submodel { stage, .. } => *stage,
            PlanError::VersionMismatch { .. } => PlanStage::CheckInputs,
        }
    }
}

fn at<E, F: FnOnce(PlanStage, E) -> PlanError>(stage: PlanStage, wrap: F) -> impl FnOnce(E) -> PlanError {
    move |e| wrap(stage, e)
}

fn parse_err(stage: PlanStage, source: ParseError) -> PlanError {
    PlanError::Parse { stage, source }
}

fn identity_err(stage: PlanStage, source: IdentityError) -> PlanError {
    PlanError::Identity { stage, source }
}

fn manifest_err(stage: PlanStage, source: ManifestError) -> PlanError {
    PlanError::Manifest { stage, source }
}

fn submodel_err(stage: PlanStage, source: SubmodelError) -> PlanError {
    PlanError::Submodel { stage, source }
}

fn load(path: &Path) -> Result<CeamlModel, PlanError> {
    parser::parse_file(path).map_err(at(PlanStage::LoadModel, parse_err))
}

fn check_inputs(model: &CeamlModel, inputs: &DeployInputs) -> Result<(), PlanError> {
    inputs.validate().map_err(at(PlanStage::CheckInputs, manifest_err))?;
    if inputs.version != model.app_version {
        return Err(PlanError::VersionMismatch {
            input: inputs.version.clone(),
            model: model.app_version.clone(),
        });
    }
    Ok(())
}

/// Everything needed to deploy one instance onto one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentPlan {
    pub bundle: ManifestBundle,
    pub submodels: OrchestrationSubmodels,
}

impl DeploymentPlan {
    pub fn instance(&self) -> &InstanceId {
        &self.bundle.instance
    }
}

pub fn plan_deployment<R: Rng + ?Sized>(
    model_path: impl AsRef<Path>,
    inputs: &DeployInputs,
    nonce: Option<&str>,
    rng: &mut R,
) -> Result<DeploymentPlan, PlanError> {
    let model = load(model_path.as_ref())?;
    deployment_plan_for(&model, inputs, nonce, rng)
}

/// [`plan_deployment`] for a model already in memory.
pub fn deployment_plan_for<R: Rng + ?Sized>(
    model: &CeamlModel,
    inputs: &DeployInputs,
    nonce: Option<&str>,
    rng: &mut R,
) -> Result<DeploymentPlan, PlanError> {
    use PlanStage::*;
    let report = crate::model::validate(model);
    if !report.is_valid() {
        return Err(parse_err(LoadModel, ParseError::Validation(report)));
    }
    check_inputs(model, inputs)?;
    let nodes = node_list(model);

    let id = identity::generate_instance_id(&model.app_name, &model.app_version, nonce, rng)
        .map_err(at(MintInstanceId, identity_err))?;
    let namespace = identity::generate_namespace(&id);
    let matchmaking = submodel::matchmaking_model(&nodes, &id).map_err(at(Matchmaking, submodel_err))?;
    let secrets =
        manifest::generate_secrets(&inputs.registry_token_b64, &id, model).map_err(at(Secrets, manifest_err))?;
    let resources = manifest::generate_resources(&nodes, &id, inputs, rng).map_err(at(Manifests, manifest_err))?;
    let actions = submodel::action_model(&nodes, &id).map_err(at(Actions, submodel_err))?;
    let workflows = submodel::workflow_model(&nodes, &id).map_err(at(Workflows, submodel_err))?;

    let mut docs = vec![namespace];
    docs.extend(secrets);
    docs.extend(resources);
    Ok(DeploymentPlan {
        bundle: ManifestBundle::assemble(id, &inputs.cluster_id, docs),
        submodels: OrchestrationSubmodels {
            matchmaking,
            actions,
            workflows,
        },
    })
}

/// A resource to delete.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DeletionTarget {
    #[serde(rename = "apiVersion")]
    pub api_version: String,
    pub kind: String,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub namespace: Option<String>,
}

impl DeletionTarget {
    fn new(kind: ManifestKind, name: String, id: &InstanceId) -> Self {
        DeletionTarget {
            api_version: kind.api_version().to_string(),
            kind: kind.as_str().to_string(),
            name,
            namespace: kind.is_namespaced().then(|| id.as_str().to_string()),
        }
    }
}

/// Options for [`plan_termination`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TerminationOptions {
    /// The component is the last one running in the namespace, so the
    /// namespace is deleted as well.
    pub last_component: bool,
}

/// Deletion references for one running component, in reverse apply order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminationPlan {
    pub instance: InstanceId,
    pub component: String,
    pub running_instance: RunningInstanceName,
    pub targets: Vec<DeletionTarget>,
}

impl TerminationPlan {
    pub fn to_yaml(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            instance: &'a str,
            component: &'a str,
            running_instance: &'a str,
            targets: &'a [DeletionTarget],
        }
        serde_yaml::to_string(&Wire {
            instance: self.instance.as_str(),
            component: &self.component,
            running_instance: self.running_instance.as_str(),
            targets: &self.targets,
        })
        .expect("termination plans always serialize")
    }
}

pub fn plan_termination(
    running_instance_name: &str,
    model_path: impl AsRef<Path>,
    options: TerminationOptions,
) -> Result<TerminationPlan, PlanError> {
    let model = load(model_path.as_ref())?;
    termination_plan_for(running_instance_name, &model, options)
}

/// [`plan_termination`] for a model already in memory.
pub fn termination_plan_for(
    running_instance_name: &str,
    model: &CeamlModel,
    options: TerminationOptions,
) -> Result<TerminationPlan, PlanError> {
    let report = crate::model::validate(model);
    if !report.is_valid() {
        return Err(parse_err(PlanStage::LoadModel, ParseError::Validation(report)));
    }
    let running = identity::parse_running_instance(running_instance_name, model)
        .map_err(at(PlanStage::ResolveInstance, identity_err))?;
    let id = running.instance().clone();
    let component = model
        .component(running.component())
        .expect("parse_running_instance only matches model components");
    let mut targets: Vec<DeletionTarget> = manifest::component_doc_refs(&id, component)
        .into_iter()
        .rev()
        .map(|(kind, name)| DeletionTarget::new(kind, name, &id))
        .collect();
    if options.last_component {
        targets.push(DeletionTarget::new(
            ManifestKind::Namespace,
            id.as_str().to_string(),
            &id,
        ));
    }
    Ok(TerminationPlan {
        instance: id,
        component: component.name.clone(),
        running_instance: running,
        targets,
    })
}

/// Component-scoped bundle to run the same instance on another cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleOutPlan {
    pub instance: InstanceId,
    pub component: String,
    pub source: RunningInstanceName,
    /// Name of the new replica: same instance, fresh random segment, next ordinal.
    pub replica: RunningInstanceName,
    pub target_cluster: String,
    pub bundle: ManifestBundle,
}

/// Scale-out onto `inputs.cluster_id`.
pub fn plan_scale_out<R: Rng + ?Sized>(
    running_instance_name: &str,
    model_path: impl AsRef<Path>,
    inputs: &DeployInputs,
    rng: &mut R,
) -> Result<ScaleOutPlan, PlanError> {
    let model = load(model_path.as_ref())?;
    scale_out_plan_for(running_instance_name, &model, inputs, rng)
}

/// [`plan_scale_out`] for a model already in memory.
pub fn scale_out_plan_for<R: Rng + ?Sized>(
    running_instance_name: &str,
    model: &CeamlModel,
    inputs: &DeployInputs,
    rng: &mut R,
) -> Result<ScaleOutPlan, PlanError> {
    let report = crate::model::validate(model);
    if !report.is_valid() {
        return Err(parse_err(PlanStage::LoadModel, ParseError::Validation(report)));
    }
    check_inputs(model, inputs)?;
    let source = identity::parse_running_instance(running_instance_name, model)
        .map_err(at(PlanStage::ResolveInstance, identity_err))?;
    let random = loop {
        let r = identity::random_segment(rng);
        if r != source.random() {
            break r;
        }
    };
    let replica = RunningInstanceName::new(
        source.instance().clone(),
        source.component(),
        source.replica_index() + 1,
        &random,
    )
    .map_err(at(PlanStage::MintInstanceId, identity_err))?;
    let nodes = node_list(model);
    let bundle =
        manifest::component_bundle(&nodes, &replica, inputs).map_err(at(PlanStage::Manifests, manifest_err))?;
    Ok(ScaleOutPlan {
        instance: source.instance().clone(),
        component: source.component().to_string(),
        source,
        replica,
        target_cluster: inputs.cluster_id.clone(),
        bundle,
    })
}
