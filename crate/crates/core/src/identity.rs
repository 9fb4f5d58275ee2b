//! Application instance identifiers, running-instance names and the
//! per-instance namespace.
//!
//! An instance ID renders as `<app>-<version slug>-<nonce>`, e.g.
//! `acc-uc2orbk-0-0-4-00036`, where the version slug is the dotted version
//! with `.` replaced by `-`. A running instance appends the component, a
//! five character random segment and the replica ordinal:
//! `acc-uc2orbk-0-0-4-00036-gameserver-7reio-min1`.

use std::fmt;

use rand::Rng;

use crate::manifest::{labels, ManifestDoc, ManifestKind};
use crate::model::{self, CeamlModel};

/// Length of the nonce and of the per-replica random segment.
pub const NONCE_LEN: usize = 5;

/// Prefix of the replica ordinal segment.
pub const REPLICA_PREFIX: &str = "min";

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

/// DNS-1123 name checks shared by every generated resource.
pub mod naming {
    pub const MAX_LABEL_LEN: usize = 63;
    pub const MAX_SUBDOMAIN_LEN: usize = 253;

    fn is_lower_alnum(b: u8) -> bool {
        b.is_ascii_lowercase() || b.is_ascii_digit()
    }

    /// RFC 1123 label: lowercase alphanumerics and `-`, alphanumeric at both
    /// ends, at most 63 characters.
    pub fn is_dns1123_label(s: &str) -> bool {
        let b = s.as_bytes();
        !b.is_empty()
            && b.len() <= MAX_LABEL_LEN
            && is_lower_alnum(b[0])
            && is_lower_alnum(b[b.len() - 1])
            && b.iter().all(|&c| is_lower_alnum(c) || c == b'-')
    }

    /// RFC 1123 subdomain: dot separated labels, at most 253 characters.
    pub fn is_dns1123_subdomain(s: &str) -> bool {
        s.len() <= MAX_SUBDOMAIN_LEN && s.split('.').all(is_dns1123_label)
    }

    /// Kubernetes label value: empty, or at most 63 characters of
    /// alphanumerics, `-`, `_`, `.` with alphanumerics at both ends.
    pub fn is_label_value(s: &str) -> bool {
        let b = s.as_bytes();
        if b.is_empty() {
            return true;
        }
        b.len() <= MAX_LABEL_LEN
            && b[0].is_ascii_alphanumeric()
            && b[b.len() - 1].is_ascii_alphanumeric()
            && b.iter()
                .all(|&c| c.is_ascii_alphanumeric() || matches!(c, b'-' | b'_' | b'.'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentityError {
    #[error("invalid application name `{0}`")]
    InvalidAppName(String),
    #[error("invalid version `{0}`: expected dotted decimal segments")]
    InvalidVersion(String),
    #[error("invalid random segment `{0}`: expected {NONCE_LEN} lowercase alphanumerics")]
    InvalidNonce(String),
    #[error("invalid component name `{0}`")]
    InvalidComponent(String),
    #[error("`{name}` is {len} characters, longer than the 63 character DNS label limit")]
    TooLong { name: String, len: usize },
    #[error("`{0}` is not a valid DNS-1123 label")]
    NotDns1123(String),
    #[error("cannot parse running instance `{name}`: {reason}")]
    Unparseable { name: String, reason: String },
}

/// Maps a dotted version to its DNS-safe slug (`0.0.4` -> `0-0-4`).
pub fn version_slug(version: &str) -> String {
    version.replace('.', "-")
}

/// Draws a random lowercase alphanumeric segment of [`NONCE_LEN`] characters.
pub fn random_segment<R: Rng + ?Sized>(rng: &mut R) -> String {
    (0..NONCE_LEN)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect()
}

fn is_segment(s: &str) -> bool {
    s.len() == NONCE_LEN && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
}

fn check_label(rendered: String) -> Result<String, IdentityError> {
    if rendered.len() > naming::MAX_LABEL_LEN {
        return Err(IdentityError::TooLong {
            len: rendered.len(),
            name: rendered,
        });
    }
    if !naming::is_dns1123_label(&rendered) {
        return Err(IdentityError::NotDns1123(rendered));
    }
    Ok(rendered)
}

/// Unique identifier of one deployed application instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InstanceId {
    app_name: String,
    version_slug: String,
    nonce: String,
    rendered: String,
}

impl InstanceId {
    pub fn new(app_name: &str, version: &str, nonce: &str) -> Result<Self, IdentityError> {
        if !model::is_valid_app_name(app_name) {
            return Err(IdentityError::InvalidAppName(app_name.to_string()));
        }
        if !model::is_valid_version(version) {
            return Err(IdentityError::InvalidVersion(version.to_string()));
        }
        if !is_segment(nonce) {
            return Err(IdentityError::InvalidNonce(nonce.to_string()));
        }
        let slug = version_slug(version);
        let rendered = check_label(format!("{app_name}-{slug}-{nonce}"))?;
        Ok(InstanceId {
            app_name: app_name.to_string(),
            version_slug: slug,
            nonce: nonce.to_string(),
            rendered,
        })
    }

    /// Rebuilds an ID from its slug form, as carried by serialized submodels.
    pub fn from_slug(app_name: &str, version_slug: &str, nonce: &str) -> Result<Self, IdentityError> {
        Self::new(app_name, &version_slug.replace('-', "."), nonce)
    }

    pub fn app_name(&self) -> &str {
        &self.app_name
    }

    pub fn version_slug(&self) -> &str {
        &self.version_slug
    }

    /// The dotted version the slug was derived from.
    pub fn version(&self) -> String {
        self.version_slug.replace('-', ".")
    }

    pub fn nonce(&self) -> &str {
        &self.nonce
    }

    pub fn as_str(&self) -> &str {
        &self.rendered
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered)
    }
}

/// Mints an instance ID. With `nonce` given the result is deterministic,
/// otherwise a fresh nonce is drawn from `rng`.
pub fn generate_instance_id<R: Rng + ?Sized>(
    app_name: &str,
    version: &str,
    nonce: Option<&str>,
    rng: &mut R,
) -> Result<InstanceId, IdentityError> {
    match nonce {
        Some(n) => InstanceId::new(app_name, version, n),
        None => InstanceId::new(app_name, version, &random_segment(rng)),
    }
}

/// Name of one running replica of a component.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunningInstanceName {
    instance: InstanceId,
    component: String,
    random: String,
    replica_index: u32,
    rendered: String,
}

impl RunningInstanceName {
    pub fn new(instance: InstanceId, component: &str, replica_index: u32, random: &str) -> Result<Self, IdentityError> {
        if !naming::is_dns1123_label(component) {
            return Err(IdentityError::InvalidComponent(component.to_string()));
        }
        if !is_segment(random) {
            return Err(IdentityError::InvalidNonce(random.to_string()));
        }
        let rendered = check_label(format!(
            "{instance}-{component}-{random}-{REPLICA_PREFIX}{replica_index}"
        ))?;
        Ok(RunningInstanceName {
            instance,
            component: component.to_string(),
            random: random.to_string(),
            replica_index,
            rendered,
        })
    }

    pub fn instance(&self) -> &InstanceId {
        &self.instance
    }

    pub fn component(&self) -> &str {
        &self.component
    }

    pub fn random(&self) -> &str {
        &self.random
    }

    pub fn replica_index(&self) -> u32 {
        self.replica_index
    }

    /// `<random>-min<replica_index>`.
    pub fn replica_tag(&self) -> String {
        format!("{}-{REPLICA_PREFIX}{}", self.random, self.replica_index)
    }

    pub fn as_str(&self) -> &str {
        &self.rendered
    }
}

impl fmt::Display for RunningInstanceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered)
    }
}

pub fn running_instance_name<R: Rng + ?Sized>(
    id: &InstanceId,
    component: &str,
    replica_index: u32,
    random: Option<&str>,
    rng: &mut R,
) -> Result<RunningInstanceName, IdentityError> {
    match random {
        Some(r) => RunningInstanceName::new(id.clone(), component, replica_index, r),
        None => RunningInstanceName::new(id.clone(), component, replica_index, &random_segment(rng)),
    }
}

/// Splits a running instance name using the model to find the component
/// boundary. Component names may contain hyphens, so the longest component
/// name with a well-formed `<random>-min<n>` tail wins.
pub fn parse_running_instance(name: &str, model: &CeamlModel) -> Result<RunningInstanceName, IdentityError> {
    let fail = |reason: String| IdentityError::Unparseable {
        name: name.to_string(),
        reason,
    };
    let prefix = format!("{}-{}-", model.app_name, version_slug(&model.app_version));
    let rest = name.strip_prefix(&prefix).ok_or_else(|| {
        fail(format!(
            "expected prefix `{prefix}` from model {} {}",
            model.app_name, model.app_version
        ))
    })?;
    let (nonce, rest) = match (rest.get(..NONCE_LEN), rest.get(NONCE_LEN..)) {
        (Some(n), Some(r)) if is_segment(n) && r.starts_with('-') => (n, &r[1..]),
        _ => return Err(fail("missing instance nonce".into())),
    };

    let mut candidates: Vec<&str> = model.components.iter().map(|c| c.name.as_str()).collect();
    candidates.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    for component in candidates {
        let Some(tail) = rest.strip_prefix(component).and_then(|t| t.strip_prefix('-')) else {
            continue;
        };
        if let Some((random, index)) = split_replica_tag(tail) {
            let id = InstanceId::new(&model.app_name, &model.app_version, nonce)?;
            return RunningInstanceName::new(id, component, index, random);
        }
    }
    Err(fail("no model component matches".into()))
}

fn split_replica_tag(tail: &str) -> Option<(&str, u32)> {
    let (random, ordinal) = tail.split_once('-')?;
    let digits = ordinal.strip_prefix(REPLICA_PREFIX)?;
    let canonical =
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) && (digits == "0" || !digits.starts_with('0'));
    if !is_segment(random) || !canonical {
        return None;
    }
    digits.parse().ok().map(|i| (random, i))
}

/// The Namespace holding every resource of the instance.
pub fn generate_namespace(id: &InstanceId) -> ManifestDoc {
    let mut doc = ManifestDoc::new(ManifestKind::Namespace, id.as_str(), None);
    doc.labels.insert(labels::APP.into(), id.app_name().into());
    doc.labels.insert(labels::VERSION.into(), id.version_slug().into());
    doc.labels.insert(labels::INSTANCE.into(), id.as_str().into());
    doc
}
