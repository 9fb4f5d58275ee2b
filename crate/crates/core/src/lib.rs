//! Reasoner for CEAML application models.
//!
//! Parses a CEAML model and produces Kubernetes and Kubevirt plans:
//! deployment bundles, termination plans and scale-out plans, along with the
//! matchmaking, action and workflow submodels consumed by orchestrators.

pub mod cli;
pub mod identity;
pub mod manifest;
pub mod model;
pub mod parser;
pub mod plan;
pub mod submodel;

pub use identity::{InstanceId, RunningInstanceName};
pub use manifest::{DeployInputs, GpuDevice, ManifestBundle, ManifestDoc, ManifestKind};
pub use model::{validate, CeamlModel, ValidationReport};
pub use parser::{node_list, parse_file, parse_text, NodeList, ParseError};
pub use plan::{plan_deployment, plan_scale_out, plan_termination, DeploymentPlan, ScaleOutPlan, TerminationPlan};
pub use submodel::OrchestrationSubmodels;
