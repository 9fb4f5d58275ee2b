//! Seeded generator of valid models and matching deploy inputs, shared by
//! the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::net::Ipv4Addr;
use std::path::PathBuf;

use ceaml::manifest::{DeployInputs, GpuDevice, ManifestDoc, ManifestKind};
use ceaml::model::{
    ActionSpec, ActionVerb, CeamlModel, Comparison, ComponentKind, ComponentSpec, ConditionExpr, HardwareReq,
    Millicores, PortSpec, Protocol, RegistryRef, StorageReq, WorkflowSpec, WorkflowStep,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub const CORPUS_SIZE: usize = 200;
pub const CORPUS_SEED: u64 = 0x00C0_FFEE;

/// `cm9ib3Q6czNjcmV0` is `robot:s3cret`.
pub const TOKEN_B64: &str = "cm9ib3Q6czNjcmV0";
pub const REGISTRY_HOST: &str = "registry.example.com";
pub const REFERENCE_ID: &str = "acc-uc2orbk-0-0-4-00036";
pub const REFERENCE_RUNNING: &str = "acc-uc2orbk-0-0-4-00036-gameserver-7reio-min1";

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn reference_model_path() -> PathBuf {
    workspace_root().join("docs/examples/reference-model.yaml")
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn reference_inputs() -> DeployInputs {
    DeployInputs {
        registry_token_b64: TOKEN_B64.into(),
        version: "0.0.4".into(),
        external_ips: vec![Ipv4Addr::new(10, 0, 0, 7)],
        cluster_id: "edge-1".into(),
        gpus: vec![],
    }
}

/// `CORPUS_SIZE` valid models from a fixed seed.
pub fn corpus() -> Vec<CeamlModel> {
    corpus_of(CORPUS_SIZE, CORPUS_SEED)
}

pub fn corpus_of(n: usize, seed: u64) -> Vec<CeamlModel> {
    let mut rng = rng(seed);
    (0..n).map(|_| random_model(&mut rng)).collect()
}

const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
const WORDS: &[&str] = &[
    "game", "server", "db", "cache", "api", "edge", "vm", "worker", "web", "proxy", "stream", "ml", "gpu", "store",
];

fn word<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.7) {
        WORDS.choose(rng).unwrap().to_string()
    } else {
        let len = rng.gen_range(1..=6);
        (0..len).map(|_| *ALNUM.choose(rng).unwrap() as char).collect()
    }
}

/// Hyphenated words, so names share prefixes and contain hyphens.
fn dashed<R: Rng>(rng: &mut R, max_words: usize, max_len: usize) -> String {
    loop {
        let n = rng.gen_range(1..=max_words);
        let s = (0..n).map(|_| word(rng)).collect::<Vec<_>>().join("-");
        if s.len() <= max_len {
            return s;
        }
    }
}

fn version<R: Rng>(rng: &mut R) -> String {
    let segments = rng.gen_range(1..=3);
    (0..segments)
        .map(|_| rng.gen_range(0..100).to_string())
        .collect::<Vec<_>>()
        .join(".")
}

fn hardware<R: Rng>(rng: &mut R) -> HardwareReq {
    HardwareReq {
        cpu_cores: Millicores(if rng.gen_bool(0.5) {
            rng.gen_range(1..=16) * 1000
        } else {
            rng.gen_range(1..=16_000)
        }),
        memory_mib: rng.gen_range(1..=65_536),
        disk_gib: rng.gen_bool(0.4).then(|| rng.gen_range(1..=500)),
        gpu_count: if rng.gen_bool(0.25) { rng.gen_range(1..=2) } else { 0 },
    }
}

fn ports<R: Rng>(rng: &mut R) -> Vec<PortSpec> {
    let n = rng.gen_range(0..=3);
    let mut out: Vec<PortSpec> = Vec::new();
    while out.len() < n {
        let p = PortSpec {
            port: rng.gen_range(1..=65_535),
            protocol: if rng.gen_bool(0.5) {
                Protocol::Tcp
            } else {
                Protocol::Udp
            },
        };
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn env<R: Rng>(rng: &mut R) -> BTreeMap<String, String> {
    let n = rng.gen_range(0..=3);
    (0..n)
        .map(|i| {
            let key = format!(
                "{}_{i}",
                word(rng).to_uppercase().replace(|c: char| c.is_ascii_digit(), "N")
            );
            let value = match rng.gen_range(0..4) {
                0 => rng.gen_range(0..10_000).to_string(),
                1 => "true".to_string(),
                2 => String::new(),
                _ => dashed(rng, 3, 30),
            };
            (key, value)
        })
        .collect()
}

fn actions<R: Rng>(rng: &mut R) -> Vec<ActionSpec> {
    const VERBS: [ActionVerb; 4] = [
        ActionVerb::Deploy,
        ActionVerb::Terminate,
        ActionVerb::ScaleOut,
        ActionVerb::Restart,
    ];
    let n = rng.gen_range(0..=3);
    let mut out: Vec<ActionSpec> = Vec::new();
    while out.len() < n {
        let verb = *VERBS.choose(rng).unwrap();
        let name = format!("{}-{}", word(rng), out.len());
        let mut params = BTreeMap::new();
        if rng.gen_bool(0.5) {
            params.insert("max_replicas".to_string(), rng.gen_range(1..10).to_string());
        }
        out.push(ActionSpec { name, verb, params });
    }
    out
}

fn component<R: Rng>(rng: &mut R, name: String) -> ComponentSpec {
    let kind = if rng.gen_bool(0.6) {
        ComponentKind::Pod
    } else {
        ComponentKind::VirtualMachine
    };
    let ports = ports(rng);
    let needs_external_ip = !ports.is_empty() && rng.gen_bool(0.5);
    ComponentSpec {
        image: format!("{REGISTRY_HOST}/{name}:{}", rng.gen_range(0..50)),
        kind,
        hardware: hardware(rng),
        ports,
        needs_external_ip,
        storage: rng.gen_bool(0.4).then(|| StorageReq {
            size_gib: rng.gen_range(1..=1000),
            mount_path: format!("/{}", dashed(rng, 2, 20)),
        }),
        env: env(rng),
        actions: actions(rng),
        name,
    }
}

fn workflows<R: Rng>(rng: &mut R, components: &[ComponentSpec]) -> Vec<WorkflowSpec> {
    let targets: Vec<(&str, &str)> = components
        .iter()
        .flat_map(|c| c.actions.iter().map(move |a| (c.name.as_str(), a.name.as_str())))
        .collect();
    if targets.is_empty() {
        return Vec::new();
    }
    let n = rng.gen_range(0..=2);
    (0..n)
        .map(|i| {
            let steps = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let (component, action) = *targets.choose(rng).unwrap();
                    WorkflowStep {
                        component: component.into(),
                        action: action.into(),
                    }
                })
                .collect();
            let threshold = match rng.gen_range(0..3) {
                0 => f64::from(rng.gen_range(0..1000)),
                1 => f64::from(rng.gen_range(-1000..1000)) / 8.0,
                _ => rng.gen_range(0.0..1.0),
            };
            WorkflowSpec {
                name: format!("wf-{i}-{}", word(rng)),
                condition: ConditionExpr {
                    metric: word(rng),
                    operator: *Comparison::ALL.choose(rng).unwrap(),
                    threshold,
                },
                steps,
            }
        })
        .collect()
}

pub fn random_model<R: Rng>(rng: &mut R) -> CeamlModel {
    let app_name = dashed(rng, 2, 14);
    let app_version = version(rng);
    // instance id + "-<component>-xxxxx-min1" must fit in 63 characters.
    let id_len = app_name.len() + app_version.len() + 7;
    let max_component = 63 - id_len - 12;
    let count = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=5) };
    let mut names: Vec<String> = Vec::new();
    while names.len() < count {
        let name = if !names.is_empty() && rng.gen_bool(0.3) {
            // Extend an existing name to exercise longest-match parsing.
            format!("{}-{}", names.choose(rng).unwrap(), word(rng))
        } else {
            dashed(rng, 3, max_component)
        };
        if name.len() <= max_component && !names.contains(&name) {
            names.push(name);
        }
    }
    let components: Vec<ComponentSpec> = names.into_iter().map(|n| component(rng, n)).collect();
    let workflows = workflows(rng, &components);
    CeamlModel {
        app_name,
        app_version,
        registry: RegistryRef {
            host: REGISTRY_HOST.into(),
            credential: rng.gen_bool(0.5).then(|| "robot".to_string()),
        },
        components,
        workflows,
    }
}

/// Inputs with enough external IPs and GPUs for `model`, sometimes with spare.
pub fn inputs_for<R: Rng>(model: &CeamlModel, rng: &mut R) -> DeployInputs {
    let ips = model.components.iter().filter(|c| c.needs_external_ip).count() + rng.gen_range(0..=2);
    let gpus = model
        .components
        .iter()
        .map(|c| c.hardware.gpu_count as usize)
        .sum::<usize>()
        + rng.gen_range(0..=2);
    const RESOURCES: [&str; 2] = ["nvidia.com/gpu", "amd.com/gpu"];
    DeployInputs {
        registry_token_b64: TOKEN_B64.into(),
        version: model.app_version.clone(),
        external_ips: (0..ips).map(|i| Ipv4Addr::new(192, 0, 2, 10 + i as u8)).collect(),
        cluster_id: format!("cluster-{}", rng.gen_range(0..100)),
        gpus: (0..gpus)
            .map(|i| GpuDevice {
                resource: RESOURCES[rng.gen_range(0..RESOURCES.len())].into(),
                device_id: format!("GPU-{i}"),
            })
            .collect(),
    }
}

/// Independent expectation for the bundle size.
pub fn expected_doc_count(model: &CeamlModel) -> usize {
    let mut n = 1;
    for c in &model.components {
        n += 1; // secret
        if c.storage.is_some() {
            n += 2;
        }
        n += 1; // deployment or virtual machine
        if c.needs_external_ip {
            n += 1;
        }
    }
    n
}

/// `(kind, name)` pairs the deployer is expected to emit for `component`,
/// read from the emitted documents through their component label.
pub fn emitted_refs<'a>(docs: impl IntoIterator<Item = &'a ManifestDoc>) -> Vec<(ManifestKind, String)> {
    docs.into_iter().map(|d| (d.kind, d.name.clone())).collect()
}

pub fn kind_schema_file(kind: ManifestKind) -> &'static str {
    match kind {
        ManifestKind::Namespace => "v1-namespace.json",
        ManifestKind::Secret => "v1-secret.json",
        ManifestKind::PersistentVolume => "v1-persistentvolume.json",
        ManifestKind::PersistentVolumeClaim => "v1-persistentvolumeclaim.json",
        ManifestKind::Service => "v1-service.json",
        ManifestKind::Deployment => "apps-v1-deployment.json",
        ManifestKind::VirtualMachine => "kubevirt-v1-virtualmachine.json",
    }
}

pub fn load_schemas() -> Vec<(ManifestKind, Value)> {
    ManifestKind::ALL
        .iter()
        .map(|&k| {
            let path = fixture_dir().join("schemas").join(kind_schema_file(k));
            let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            (k, serde_json::from_str(&text).unwrap())
        })
        .collect()
}

/// Label value at `metadata.labels[key]` of a document tree.
pub fn label<'a>(doc: &'a Value, key: &str) -> Option<&'a str> {
    doc.pointer("/metadata/labels")?.get(key)?.as_str()
}
