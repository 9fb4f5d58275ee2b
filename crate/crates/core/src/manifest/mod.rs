//! Kubernetes and Kubevirt manifest generation.
//!
//! [`tosca_to_k8s`] turns a validated model plus the deployment inputs into
//! a [`ManifestBundle`]: one Namespace, one image-pull Secret per component,
//! a PersistentVolume/PersistentVolumeClaim pair per storage request, one
//! Deployment or VirtualMachine per component and one LoadBalancer Service
//! per component that needs an external IP.

mod doc;

use std::collections::BTreeMap;
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use rand::Rng;
use serde_json::{json, Map, Value};

pub(crate) use doc::to_sorted_yaml;
pub use doc::{ManifestDoc, ManifestKind};

use crate::identity::{self, naming, IdentityError, InstanceId, RunningInstanceName};
use crate::model::{self, CeamlModel, ComponentKind, ComponentSpec, ValidationReport};
use crate::parser::NodeList;

/// Label and annotation keys stamped on generated documents.
pub mod labels {
    pub const APP: &str = "app.kubernetes.io/name";
    pub const VERSION: &str = "app.kubernetes.io/version";
    pub const INSTANCE: &str = "app.kubernetes.io/instance";
    pub const COMPONENT: &str = "app.kubernetes.io/component";
    pub const CLUSTER: &str = "ceaml.io/cluster";
    pub const RUNNING_INSTANCE: &str = "ceaml.io/running-instance";
    /// Annotation listing the GPU device ids assigned to a workload.
    pub const GPU_DEVICES: &str = "ceaml.io/gpu-devices";
    /// Annotation naming the registry credential the secret was built for.
    pub const CREDENTIAL: &str = "ceaml.io/credential";
}

/// Host directory under which persistent volumes are created.
pub const HOST_PATH_ROOT: &str = "/mnt/ceaml";

/// Replica ordinal of a component's first running instance.
pub const INITIAL_REPLICA: u32 = 1;

/// Resource names derived from component names.
pub mod names {
    use crate::identity::InstanceId;

    pub fn secret(component: &str) -> String {
        format!("{component}-regcred")
    }

    pub fn service(component: &str) -> String {
        format!("{component}-svc")
    }

    pub fn claim(component: &str) -> String {
        format!("{component}-pvc")
    }

    /// Persistent volumes are cluster scoped, so the instance is part of the name.
    pub fn volume(id: &InstanceId, component: &str) -> String {
        format!("{id}-{component}-pv")
    }

    pub fn workload(component: &str) -> String {
        component.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifestError {
    #[error("registry token is not valid base64: {0}")]
    BadToken(String),
    #[error("invalid deployment input: {0}")]
    InvalidInputs(String),
    #[error("{needed} external IPs needed but only {available} provided")]
    InsufficientExternalIps { needed: usize, available: usize },
    #[error("{needed} GPUs needed but only {available} provided")]
    InsufficientGpus { needed: usize, available: usize },
    #[error("model is invalid:\n{0}")]
    InvalidModel(ValidationReport),
    #[error("component `{0}` is not part of the model")]
    UnknownComponent(String),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

/// One GPU available on the target cluster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GpuDevice {
    /// Extended resource name, e.g. `nvidia.com/gpu`.
    pub resource: String,
    pub device_id: String,
}

impl fmt::Display for GpuDevice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.resource, self.device_id)
    }
}

impl FromStr for GpuDevice {
    type Err = ManifestError;

    /// `<resource>=<device id>`, e.g. `nvidia.com/gpu=GPU-0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (resource, device_id) = s.split_once('=').ok_or_else(|| {
            ManifestError::InvalidInputs(format!("GPU `{s}` must be written as <resource>=<device id>"))
        })?;
        Ok(GpuDevice {
            resource: resource.to_string(),
            device_id: device_id.to_string(),
        })
    }
}

/// Caller-supplied inputs for one deployment onto one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct DeployInputs {
    /// Registry access token, already base64 encoded.
    pub registry_token_b64: String,
    pub version: String,
    pub external_ips: Vec<Ipv4Addr>,
    pub cluster_id: String,
    /// May be empty when the cluster has no GPUs.
    pub gpus: Vec<GpuDevice>,
}

impl DeployInputs {
    pub fn validate(&self) -> Result<(), ManifestError> {
        decode_token(&self.registry_token_b64)?;
        if !model::is_valid_version(&self.version) {
            return Err(ManifestError::InvalidInputs(format!(
                "version `{}` is not dotted decimal",
                self.version
            )));
        }
        if self.cluster_id.is_empty() || !naming::is_label_value(&self.cluster_id) {
            return Err(ManifestError::InvalidInputs(format!(
                "cluster id `{}` must be a non-empty Kubernetes label value",
                self.cluster_id
            )));
        }
        for (i, ip) in self.external_ips.iter().enumerate() {
            if self.external_ips[..i].contains(ip) {
                return Err(ManifestError::InvalidInputs(format!("external IP {ip} listed twice")));
            }
        }
        for (i, gpu) in self.gpus.iter().enumerate() {
            if !is_resource_name(&gpu.resource) {
                return Err(ManifestError::InvalidInputs(format!(
                    "`{}` is not a qualified resource name",
                    gpu.resource
                )));
            }
            if gpu.device_id.is_empty() || gpu.device_id.contains(',') {
                return Err(ManifestError::InvalidInputs(format!(
                    "GPU device id `{}` must be non-empty without commas",
                    gpu.device_id
                )));
            }
            if self.gpus[..i].contains(gpu) {
                return Err(ManifestError::InvalidInputs(format!("GPU {gpu} listed twice")));
            }
        }
        Ok(())
    }
}

fn decode_token(token: &str) -> Result<Vec<u8>, ManifestError> {
    match BASE64.decode(token.trim()) {
        Ok(bytes) if !bytes.is_empty() => Ok(bytes),
        Ok(_) => Err(ManifestError::BadToken("token is empty".into())),
        Err(e) => Err(ManifestError::BadToken(e.to_string())),
    }
}

/// `prefix/name` qualified name as used for extended resources.
fn is_resource_name(s: &str) -> bool {
    let (prefix, name) = match s.split_once('/') {
        Some((p, n)) => (Some(p), n),
        None => (None, s),
    };
    let name_ok = naming::is_label_value(name) && !name.is_empty();
    name_ok && prefix.is_none_or(naming::is_dns1123_subdomain)
}

/// Every document for one application instance on one cluster, in apply order.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestBundle {
    pub instance: InstanceId,
    pub cluster_id: String,
    pub docs: Vec<ManifestDoc>,
}

impl ManifestBundle {
    /// Orders the documents by apply rank (stable, so component order is
    /// kept within a rank) and stamps instance and cluster labels on all of them.
    pub fn assemble(instance: InstanceId, cluster_id: &str, mut docs: Vec<ManifestDoc>) -> Self {
        docs.sort_by_key(|d| d.kind.apply_rank());
        for d in &mut docs {
            d.labels.insert(labels::APP.into(), instance.app_name().into());
            d.labels.insert(labels::VERSION.into(), instance.version_slug().into());
            d.labels.insert(labels::INSTANCE.into(), instance.as_str().into());
            d.labels.insert(labels::CLUSTER.into(), cluster_id.into());
        }
        ManifestBundle {
            instance,
            cluster_id: cluster_id.to_string(),
            docs,
        }
    }

    pub fn count(&self, kind: ManifestKind) -> usize {
        self.docs.iter().filter(|d| d.kind == kind).count()
    }

    pub fn component_docs<'a>(&'a self, component: &'a str) -> impl Iterator<Item = &'a ManifestDoc> + 'a {
        self.docs.iter().filter(move |d| d.component() == Some(component))
    }
}

/// Multi-document YAML, one `---` line before each document, keys sorted.
pub fn serialize_bundle(bundle: &ManifestBundle) -> String {
    serialize_docs(&bundle.docs)
}

pub(crate) fn serialize_docs(docs: &[ManifestDoc]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str("---\n");
        out.push_str(&to_yaml_string(&d.to_value()));
    }
    out
}

pub(crate) fn to_yaml_string(value: &Value) -> String {
    serde_yaml::to_string(&to_sorted_yaml(value)).expect("JSON trees always serialize to YAML")
}

fn require_valid(model: &CeamlModel) -> Result<(), ManifestError> {
    let report = model::validate(model);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ManifestError::InvalidModel(report))
    }
}

fn component_doc(kind: ManifestKind, name: String, id: &InstanceId, component: &str) -> ManifestDoc {
    let namespace = kind.is_namespaced().then_some(id);
    let mut d = ManifestDoc::new(kind, name, namespace);
    d.labels.insert(labels::COMPONENT.into(), component.into());
    d
}

fn secret_doc(token_b64: &str, id: &InstanceId, model: &CeamlModel, component: &str) -> ManifestDoc {
    let config = json!({ "auths": { model.registry.host.clone(): { "auth": token_b64.trim() } } });
    let payload = BASE64.encode(serde_json::to_string(&config).expect("static JSON"));
    let mut d = component_doc(ManifestKind::Secret, names::secret(component), id, component)
        .with_body("type", json!("kubernetes.io/dockerconfigjson"))
        .with_body("data", json!({ ".dockerconfigjson": payload }));
    if let Some(cred) = &model.registry.credential {
        d.annotations.insert(labels::CREDENTIAL.into(), cred.clone());
    }
    d
}

/// One image-pull Secret per component, named `<component>-regcred`.
pub fn generate_secrets(
    token_b64: &str,
    id: &InstanceId,
    model: &CeamlModel,
) -> Result<Vec<ManifestDoc>, ManifestError> {
    decode_token(token_b64)?;
    require_valid(model)?;
    Ok(model
        .components
        .iter()
        .map(|c| secret_doc(token_b64, id, model, &c.name))
        .collect())
}

/// Per-component share of the cluster's external IPs and GPUs.
#[derive(Debug, Clone, Default, PartialEq)]
struct Assignment {
    external_ip: Option<Ipv4Addr>,
    gpus: Vec<GpuDevice>,
}

/// First-fit in document order; all-or-nothing on shortage.
fn assign<'a>(
    components: impl Iterator<Item = &'a ComponentSpec> + Clone,
    inputs: &DeployInputs,
) -> Result<Vec<Assignment>, ManifestError> {
    let ips_needed = components.clone().filter(|c| c.needs_external_ip).count();
    if ips_needed > inputs.external_ips.len() {
        return Err(ManifestError::InsufficientExternalIps {
            needed: ips_needed,
            available: inputs.external_ips.len(),
        });
    }
    let gpus_needed: usize = components.clone().map(|c| c.hardware.gpu_count as usize).sum();
    if gpus_needed > inputs.gpus.len() {
        return Err(ManifestError::InsufficientGpus {
            needed: gpus_needed,
            available: inputs.gpus.len(),
        });
    }
    let mut ips = inputs.external_ips.iter().copied();
    let mut gpu_cursor = 0;
    Ok(components
        .map(|c| {
            let external_ip = if c.needs_external_ip { ips.next() } else { None };
            let take = c.hardware.gpu_count as usize;
            let gpus = inputs.gpus[gpu_cursor..gpu_cursor + take].to_vec();
            gpu_cursor += take;
            Assignment { external_ip, gpus }
        })
        .collect())
}

fn gib(n: u64) -> String {
    format!("{n}Gi")
}

fn port_name(port: &model::PortSpec) -> String {
    format!("{}-{}", port.protocol.as_str().to_lowercase(), port.port)
}

fn gpu_limits(gpus: &[GpuDevice]) -> Map<String, Value> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for g in gpus {
        *counts.entry(g.resource.as_str()).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(k, n)| (k.to_string(), Value::String(n.to_string())))
        .collect()
}

struct ComponentContext<'a> {
    id: &'a InstanceId,
    cluster_id: &'a str,
    component: &'a ComponentSpec,
    running: &'a RunningInstanceName,
    assignment: Assignment,
}

impl ComponentContext<'_> {
    fn name(&self) -> &str {
        &self.component.name
    }

    fn selector(&self) -> Value {
        json!({
            labels::INSTANCE: self.id.as_str(),
            labels::COMPONENT: self.name(),
        })
    }

    fn template_labels(&self) -> Value {
        json!({
            labels::APP: self.id.app_name(),
            labels::INSTANCE: self.id.as_str(),
            labels::COMPONENT: self.name(),
            labels::CLUSTER: self.cluster_id,
            labels::RUNNING_INSTANCE: self.running.as_str(),
        })
    }

    fn workload_doc(&self, kind: ManifestKind) -> ManifestDoc {
        let mut d = component_doc(kind, names::workload(self.name()), self.id, self.name());
        d.labels
            .insert(labels::RUNNING_INSTANCE.into(), self.running.as_str().into());
        if !self.assignment.gpus.is_empty() {
            let ids: Vec<&str> = self.assignment.gpus.iter().map(|g| g.device_id.as_str()).collect();
            d.annotations.insert(labels::GPU_DEVICES.into(), ids.join(","));
        }
        d
    }

    fn deployment(&self) -> ManifestDoc {
        let c = self.component;
        let mut requests = Map::new();
        requests.insert("cpu".into(), json!(c.hardware.cpu_cores.to_quantity()));
        requests.insert("memory".into(), json!(format!("{}Mi", c.hardware.memory_mib)));
        if let Some(disk) = c.hardware.disk_gib {
            requests.insert("ephemeral-storage".into(), json!(gib(disk)));
        }
        let mut resources = Map::new();
        resources.insert("requests".into(), Value::Object(requests));
        if !self.assignment.gpus.is_empty() {
            resources.insert("limits".into(), Value::Object(gpu_limits(&self.assignment.gpus)));
        }

        let mut container = Map::new();
        container.insert("name".into(), json!(c.name));
        container.insert("image".into(), json!(c.image));
        container.insert("resources".into(), Value::Object(resources));
        if !c.ports.is_empty() {
            let ports: Vec<Value> = c
                .ports
                .iter()
                .map(|p| json!({ "name": port_name(p), "containerPort": p.port, "protocol": p.protocol.as_str() }))
                .collect();
            container.insert("ports".into(), Value::Array(ports));
        }
        if !c.env.is_empty() {
            let env: Vec<Value> = c.env.iter().map(|(k, v)| json!({ "name": k, "value": v })).collect();
            container.insert("env".into(), Value::Array(env));
        }

        let mut pod = Map::new();
        pod.insert("imagePullSecrets".into(), json!([{ "name": names::secret(&c.name) }]));
        if let Some(storage) = &c.storage {
            container.insert(
                "volumeMounts".into(),
                json!([{ "name": "data", "mountPath": storage.mount_path }]),
            );
            pod.insert(
                "volumes".into(),
                json!([{ "name": "data", "persistentVolumeClaim": { "claimName": names::claim(&c.name) } }]),
            );
        }
        pod.insert("containers".into(), Value::Array(vec![Value::Object(container)]));

        self.workload_doc(ManifestKind::Deployment).with_body(
            "spec",
            json!({
                "replicas": 1,
                "selector": { "matchLabels": self.selector() },
                "template": {
                    "metadata": { "labels": self.template_labels() },
                    "spec": Value::Object(pod),
                },
            }),
        )
    }

    fn cloud_init(&self) -> Option<String> {
        let c = self.component;
        let mut config = Map::new();
        if let Some(storage) = &c.storage {
            let device = "/dev/disk/by-id/virtio-data";
            config.insert(
                "fs_setup".into(),
                json!([{ "device": device, "filesystem": "ext4", "overwrite": false }]),
            );
            config.insert(
                "mounts".into(),
                json!([[device, storage.mount_path, "auto", "defaults,nofail"]]),
            );
        }
        if !c.env.is_empty() {
            let content: String = c.env.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
            config.insert(
                "write_files".into(),
                json!([{ "path": "/etc/environment", "append": true, "content": content }]),
            );
        }
        if config.is_empty() {
            return None;
        }
        Some(format!("#cloud-config\n{}", to_yaml_string(&Value::Object(config))))
    }

    fn virtual_machine(&self) -> ManifestDoc {
        let c = self.component;
        let mut disks = vec![json!({ "name": "rootdisk", "disk": { "bus": "virtio" } })];
        let mut volumes = vec![json!({
            "name": "rootdisk",
            "containerDisk": { "image": c.image, "imagePullSecret": names::secret(&c.name) },
        })];
        if c.storage.is_some() {
            disks.push(json!({ "name": "datadisk", "serial": "data", "disk": { "bus": "virtio" } }));
            volumes.push(json!({
                "name": "datadisk",
                "persistentVolumeClaim": { "claimName": names::claim(&c.name) },
            }));
        }
        if let Some(disk) = c.hardware.disk_gib {
            disks.push(json!({ "name": "scratch", "disk": { "bus": "virtio" } }));
            volumes.push(json!({ "name": "scratch", "emptyDisk": { "capacity": gib(disk) } }));
        }
        if let Some(user_data) = self.cloud_init() {
            disks.push(json!({ "name": "cloudinit", "disk": { "bus": "virtio" } }));
            volumes.push(json!({ "name": "cloudinit", "cloudInitNoCloud": { "userData": user_data } }));
        }

        let mut interface = Map::new();
        interface.insert("name".into(), json!("default"));
        interface.insert("masquerade".into(), json!({}));
        if !c.ports.is_empty() {
            let ports: Vec<Value> = c
                .ports
                .iter()
                .map(|p| json!({ "name": port_name(p), "port": p.port, "protocol": p.protocol.as_str() }))
                .collect();
            interface.insert("ports".into(), Value::Array(ports));
        }

        let mut devices = Map::new();
        devices.insert("disks".into(), Value::Array(disks));
        devices.insert("interfaces".into(), json!([Value::Object(interface)]));
        if !self.assignment.gpus.is_empty() {
            let gpus: Vec<Value> = self
                .assignment
                .gpus
                .iter()
                .enumerate()
                .map(|(i, g)| json!({ "name": format!("gpu{i}"), "deviceName": g.resource }))
                .collect();
            devices.insert("gpus".into(), Value::Array(gpus));
        }

        self.workload_doc(ManifestKind::VirtualMachine).with_body(
            "spec",
            json!({
                "runStrategy": "Always",
                "template": {
                    "metadata": { "labels": self.template_labels() },
                    "spec": {
                        "domain": {
                            "resources": { "requests": {
                                "cpu": c.hardware.cpu_cores.to_quantity(),
                                "memory": format!("{}Mi", c.hardware.memory_mib),
                            } },
                            "devices": Value::Object(devices),
                        },
                        "networks": [{ "name": "default", "pod": {} }],
                        "volumes": volumes,
                    },
                },
            }),
        )
    }

    fn volume_pair(&self) -> Option<(ManifestDoc, ManifestDoc)> {
        let storage = self.component.storage.as_ref()?;
        let name = self.name();
        let pv_name = names::volume(self.id, name);
        let pv = component_doc(ManifestKind::PersistentVolume, pv_name.clone(), self.id, name).with_body(
            "spec",
            json!({
                "capacity": { "storage": gib(storage.size_gib) },
                "accessModes": ["ReadWriteOnce"],
                "persistentVolumeReclaimPolicy": "Retain",
                "storageClassName": "",
                "hostPath": {
                    "path": format!("{HOST_PATH_ROOT}/{}/{name}", self.id),
                    "type": "DirectoryOrCreate",
                },
                "claimRef": { "namespace": self.id.as_str(), "name": names::claim(name) },
            }),
        );
        let pvc = component_doc(ManifestKind::PersistentVolumeClaim, names::claim(name), self.id, name).with_body(
            "spec",
            json!({
                "accessModes": ["ReadWriteOnce"],
                "storageClassName": "",
                "volumeName": pv_name,
                "resources": { "requests": { "storage": gib(storage.size_gib) } },
            }),
        );
        Some((pv, pvc))
    }

    fn service(&self) -> Option<ManifestDoc> {
        let ip = self.assignment.external_ip?;
        let ports: Vec<Value> = self
            .component
            .ports
            .iter()
            .map(|p| {
                json!({
                    "name": port_name(p),
                    "port": p.port,
                    "targetPort": p.port,
                    "protocol": p.protocol.as_str(),
                })
            })
            .collect();
        Some(
            component_doc(ManifestKind::Service, names::service(self.name()), self.id, self.name()).with_body(
                "spec",
                json!({
                    "type": "LoadBalancer",
                    "selector": self.selector(),
                    "ports": ports,
                    "externalIPs": [ip.to_string()],
                }),
            ),
        )
    }

    /// Component documents in apply order (secret excluded).
    fn resources(&self) -> Vec<ManifestDoc> {
        let mut docs = Vec::new();
        if let Some((pv, pvc)) = self.volume_pair() {
            docs.push(pv);
            docs.push(pvc);
        }
        docs.push(match self.component.kind {
            ComponentKind::Pod => self.deployment(),
            ComponentKind::VirtualMachine => self.virtual_machine(),
        });
        docs.extend(self.service());
        docs
    }
}

/// Volumes, claims, workloads and services for every component. Each
/// component gets a running instance name with replica ordinal
/// [`INITIAL_REPLICA`] and a random segment drawn from `rng`.
pub fn generate_resources<R: Rng + ?Sized>(
    nodes: &NodeList<'_>,
    id: &InstanceId,
    inputs: &DeployInputs,
    rng: &mut R,
) -> Result<Vec<ManifestDoc>, ManifestError> {
    let model = nodes.model();
    require_valid(model)?;
    inputs.validate()?;
    let assignments = assign(nodes.components(), inputs)?;
    let running: Vec<RunningInstanceName> = nodes
        .components()
        .map(|c| identity::running_instance_name(id, &c.name, INITIAL_REPLICA, None, rng))
        .collect::<Result<_, _>>()?;
    let mut docs = Vec::new();
    for ((component, assignment), running) in nodes.components().zip(assignments).zip(&running) {
        let ctx = ComponentContext {
            id,
            cluster_id: &inputs.cluster_id,
            component,
            running,
            assignment,
        };
        docs.extend(ctx.resources());
    }
    Ok(docs)
}

/// The complete bundle: namespace, secrets and every component's resources.
pub fn tosca_to_k8s<R: Rng + ?Sized>(
    nodes: &NodeList<'_>,
    id: &InstanceId,
    inputs: &DeployInputs,
    rng: &mut R,
) -> Result<ManifestBundle, ManifestError> {
    let mut docs = vec![identity::generate_namespace(id)];
    docs.extend(generate_secrets(&inputs.registry_token_b64, id, nodes.model())?);
    docs.extend(generate_resources(nodes, id, inputs, rng)?);
    Ok(ManifestBundle::assemble(id.clone(), &inputs.cluster_id, docs))
}

/// Bundle holding only `running.component()`: the namespace, its secret
/// and its resources, with external IPs and GPUs taken first-fit from
/// `inputs` as if it were the only component.
pub fn component_bundle(
    nodes: &NodeList<'_>,
    running: &RunningInstanceName,
    inputs: &DeployInputs,
) -> Result<ManifestBundle, ManifestError> {
    let model = nodes.model();
    require_valid(model)?;
    inputs.validate()?;
    let component = model
        .component(running.component())
        .ok_or_else(|| ManifestError::UnknownComponent(running.component().to_string()))?;
    let id = running.instance();
    let assignment = assign(std::iter::once(component), inputs)?.pop().unwrap_or_default();
    let ctx = ComponentContext {
        id,
        cluster_id: &inputs.cluster_id,
        component,
        running,
        assignment,
    };
    let mut docs = vec![
        identity::generate_namespace(id),
        secret_doc(&inputs.registry_token_b64, id, model, &component.name),
    ];
    docs.extend(ctx.resources());
    Ok(ManifestBundle::assemble(id.clone(), &inputs.cluster_id, docs))
}

/// `(kind, name)` of every document generated for `component`, in apply
/// order, derived from the model alone.
pub fn component_doc_refs(id: &InstanceId, component: &ComponentSpec) -> Vec<(ManifestKind, String)> {
    let name = component.name.as_str();
    let mut refs = vec![(ManifestKind::Secret, names::secret(name))];
    if component.storage.is_some() {
        refs.push((ManifestKind::PersistentVolume, names::volume(id, name)));
        refs.push((ManifestKind::PersistentVolumeClaim, names::claim(name)));
    }
    let workload = match component.kind {
        ComponentKind::Pod => ManifestKind::Deployment,
        ComponentKind::VirtualMachine => ManifestKind::VirtualMachine,
    };
    refs.push((workload, names::workload(name)));
    if component.needs_external_ip {
        refs.push((ManifestKind::Service, names::service(name)));
    }
    refs
}
