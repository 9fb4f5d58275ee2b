mod common;

use std::collections::BTreeSet;

use ceaml::identity::IdentityError;
use ceaml::manifest::{labels, ManifestError, ManifestKind};
use ceaml::plan::{self, PlanError, PlanStage, TerminationOptions};
use common::*;

fn reference_plan() -> ceaml::DeploymentPlan {
    let mut rng = ceaml::cli::rng_for_nonce(Some("00036"));
    plan::plan_deployment(reference_model_path(), &reference_inputs(), Some("00036"), &mut rng).unwrap()
}

#[test]
fn deployment_shares_one_instance() {
    let p = reference_plan();
    assert_eq!(p.instance().as_str(), REFERENCE_ID);
    assert_eq!(p.submodels.matchmaking.instance, *p.instance());
    assert_eq!(p.submodels.actions.instance, *p.instance());
    assert_eq!(p.submodels.workflows.instance, *p.instance());
    assert_eq!(p.bundle.cluster_id, "edge-1");
}

#[test]
fn reference_termination() {
    let t = plan::plan_termination(REFERENCE_RUNNING, reference_model_path(), TerminationOptions::default()).unwrap();
    assert_eq!(t.instance.as_str(), REFERENCE_ID);
    assert_eq!(t.component, "gameserver");
    let targets: Vec<(&str, &str, Option<&str>)> = t
        .targets
        .iter()
        .map(|x| (x.kind.as_str(), x.name.as_str(), x.namespace.as_deref()))
        .collect();
    assert_eq!(
        targets,
        [
            ("Service", "gameserver-svc", Some(REFERENCE_ID)),
            ("Deployment", "gameserver", Some(REFERENCE_ID)),
            ("Secret", "gameserver-regcred", Some(REFERENCE_ID)),
        ]
    );

    // Set difference against what the deployment emitted for the component.
    let deployed: BTreeSet<(String, String)> = reference_plan()
        .bundle
        .component_docs("gameserver")
        .map(|d| (d.kind.as_str().to_string(), d.name.clone()))
        .collect();
    let targeted: BTreeSet<(String, String)> = t.targets.iter().map(|x| (x.kind.clone(), x.name.clone())).collect();
    assert_eq!(deployed.symmetric_difference(&targeted).count(), 0);

    let yaml: serde_yaml::Value = serde_yaml::from_str(&t.to_yaml()).unwrap();
    assert_eq!(yaml["instance"].as_str(), Some(REFERENCE_ID));
    assert_eq!(yaml["targets"][0]["kind"].as_str(), Some("Service"));
}

#[test]
fn termination_of_the_vm_and_last_component() {
    let name = "acc-uc2orbk-0-0-4-00036-vmcomp-abcde-min1";
    let t = plan::plan_termination(
        name,
        reference_model_path(),
        TerminationOptions { last_component: true },
    )
    .unwrap();
    let kinds: Vec<&str> = t.targets.iter().map(|x| x.kind.as_str()).collect();
    assert_eq!(
        kinds,
        [
            "VirtualMachine",
            "PersistentVolumeClaim",
            "PersistentVolume",
            "Secret",
            "Namespace"
        ]
    );
    let pv = &t.targets[2];
    assert_eq!(pv.name, "acc-uc2orbk-0-0-4-00036-vmcomp-pv");
    assert_eq!(pv.namespace, None, "persistent volumes are cluster scoped");
    assert_eq!(t.targets[4].name, REFERENCE_ID);
}

#[test]
fn unknown_component_is_unparseable() {
    let err = plan::plan_termination(
        "acc-uc2orbk-0-0-4-00036-cache-7reio-min1",
        reference_model_path(),
        TerminationOptions::default(),
    )
    .unwrap_err();
    assert_eq!(err.stage(), PlanStage::ResolveInstance);
    assert!(matches!(
        err,
        PlanError::Identity {
            source: IdentityError::Unparseable { .. },
            ..
        }
    ));
}

#[test]
fn deployment_failures_name_their_stage() {
    let mut rng = rng(0);
    let mut inputs = reference_inputs();
    inputs.version = "0.0.5".into();
    let err = plan::plan_deployment(reference_model_path(), &inputs, None, &mut rng).unwrap_err();
    assert!(matches!(err, PlanError::VersionMismatch { .. }), "{err}");

    let mut inputs = reference_inputs();
    inputs.external_ips.clear();
    let err = plan::plan_deployment(reference_model_path(), &inputs, None, &mut rng).unwrap_err();
    assert_eq!(err.stage(), PlanStage::Manifests);
    assert!(matches!(
        err,
        PlanError::Manifest {
            source: ManifestError::InsufficientExternalIps { .. },
            ..
        }
    ));

    let err = plan::plan_deployment("/nonexistent.yaml", &reference_inputs(), None, &mut rng).unwrap_err();
    assert_eq!(err.stage(), PlanStage::LoadModel);

    let err = plan::plan_deployment(reference_model_path(), &reference_inputs(), Some("BAD"), &mut rng).unwrap_err();
    assert_eq!(err.stage(), PlanStage::MintInstanceId);
}

#[test]
fn scale_out_keeps_the_instance() {
    let mut inputs = reference_inputs();
    inputs.cluster_id = "edge-2".into();
    inputs.external_ips = vec!["10.0.1.7".parse().unwrap()];
    let so = plan::plan_scale_out(REFERENCE_RUNNING, reference_model_path(), &inputs, &mut rng(5)).unwrap();
    assert_eq!(so.instance.as_str(), REFERENCE_ID);
    assert_eq!(so.bundle.instance.as_str(), REFERENCE_ID);
    assert_eq!(so.target_cluster, "edge-2");
    assert_eq!(so.component, "gameserver");
    assert_eq!(so.replica.replica_index(), 2);
    assert_ne!(so.replica.random(), "7reio");

    let docs: Vec<(ManifestKind, &str)> = so.bundle.docs.iter().map(|d| (d.kind, d.name.as_str())).collect();
    assert_eq!(
        docs,
        [
            (ManifestKind::Namespace, REFERENCE_ID),
            (ManifestKind::Secret, "gameserver-regcred"),
            (ManifestKind::Deployment, "gameserver"),
            (ManifestKind::Service, "gameserver-svc"),
        ]
    );
    for d in &so.bundle.docs {
        assert_eq!(d.labels.get(labels::CLUSTER).map(String::as_str), Some("edge-2"));
        if d.kind.is_namespaced() {
            assert_eq!(d.namespace.as_deref(), Some(REFERENCE_ID));
        }
    }
    let deployment = so
        .bundle
        .docs
        .iter()
        .find(|d| d.kind == ManifestKind::Deployment)
        .unwrap();
    assert_eq!(
        deployment.labels.get(labels::RUNNING_INSTANCE).map(String::as_str),
        Some(so.replica.as_str())
    );
}

#[test]
fn scale_out_needs_resources_on_the_target() {
    let mut inputs = reference_inputs();
    inputs.external_ips.clear();
    let err = plan::plan_scale_out(REFERENCE_RUNNING, reference_model_path(), &inputs, &mut rng(5)).unwrap_err();
    assert_eq!(err.stage(), PlanStage::Manifests);
    // The VM needs no external IP, so it scales out without one.
    let vm = "acc-uc2orbk-0-0-4-00036-vmcomp-abcde-min1";
    assert!(plan::plan_scale_out(vm, reference_model_path(), &inputs, &mut rng(5)).is_ok());
}
