//! Keys, signatures, digests, and the content-addressed payload store.
//!
//! Message payloads live off-chain in a [`ContentStore`] keyed by their
//! SHA-256 digest (an IPFS stand-in); ledgers commit only the digests.
//! Signing is Ed25519: deterministic, 32-byte public keys, 64-byte
//! signatures. All key material is derived from the scenario seed, so a rerun
//! regenerates identical keys.

use crate::domain::{ClusterId, VehicleId};
use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use sha2::{Digest as _, Sha256};
use std::collections::BTreeMap;
use std::fmt;

/// 256-bit digest used for content ids, message digests, and block hashes.
pub type Digest32 = [u8; 32];

pub fn sha256(bytes: &[u8]) -> Digest32 {
    Sha256::digest(bytes).into()
}

/// Signing + verification key pair. The private half never appears in debug
/// output, logs, or serialized artifacts.
#[derive(Clone)]
pub struct KeyPair {
    signing: SigningKey,
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &hex::encode(self.public_bytes()))
            .finish_non_exhaustive()
    }
}

impl KeyPair {
    pub fn verifying_key(&self) -> VerifyingKey {
        self.signing.verifying_key()
    }

    pub fn public_bytes(&self) -> [u8; 32] {
        self.signing.verifying_key().to_bytes()
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        self.signing.sign(msg)
    }
}

/// Derive the key pair of one entity from the scenario seed. `domain`
/// separates entity kinds ("vehicle", "cluster", ...) so id spaces cannot
/// collide; `epoch` supports key rotation for a fixed entity.
pub fn derive_keypair(seed: u64, domain: &str, entity: u64, epoch: u64) -> KeyPair {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([0x1f]);
    h.update(domain.as_bytes());
    h.update([0x1f]);
    h.update(entity.to_le_bytes());
    h.update(epoch.to_le_bytes());
    let secret: [u8; 32] = h.finalize().into();
    KeyPair { signing: SigningKey::from_bytes(&secret) }
}

/// Content-addressed payload store: key = SHA-256 of the payload. `put` is
/// idempotent; `get` of a stored id returns exactly the stored bytes.
#[derive(Debug, Clone, Default)]
pub struct ContentStore {
    entries: BTreeMap<Digest32, Vec<u8>>,
}

impl ContentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, payload: Vec<u8>) -> Digest32 {
        let id = sha256(&payload);
        self.entries.entry(id).or_insert(payload);
        id
    }

    pub fn get(&self, id: &Digest32) -> Option<&[u8]> {
        self.entries.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total stored payload bytes (for reporting).
    pub fn total_bytes(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    /// Test hook: overwrite the payload behind an id without changing the id,
    /// simulating off-chain storage corruption.
    pub fn tamper(&mut self, id: &Digest32, payload: Vec<u8>) -> bool {
        match self.entries.get_mut(id) {
            Some(slot) => {
                *slot = payload;
                true
            }
            None => false,
        }
    }

    /// Test hook: drop a payload, simulating store data loss.
    pub fn remove(&mut self, id: &Digest32) -> bool {
        self.entries.remove(id).is_some()
    }
}

/// A message as it travels from a member vehicle to its cluster head: the
/// payload digest doubles as the content-store id, and the signature binds
/// (digest, sender, cluster, round) under the sender's key.
#[derive(Debug, Clone)]
pub struct SignedMessage {
    pub payload_digest: Digest32,
    pub content_id: Digest32,
    pub sender: VehicleId,
    pub cluster_id: ClusterId,
    pub round: u64,
    pub signature: Signature,
}

fn message_signing_bytes(
    digest: &Digest32,
    sender: VehicleId,
    cluster: ClusterId,
    round: u64,
) -> Vec<u8> {
    let mut buf = Vec::with_capacity(4 + 32 + 8 + 8 + 8);
    buf.extend_from_slice(b"msg:");
    buf.extend_from_slice(digest);
    buf.extend_from_slice(&sender.0.to_be_bytes());
    buf.extend_from_slice(&cluster.0.to_be_bytes());
    buf.extend_from_slice(&round.to_be_bytes());
    buf
}

/// Hash the payload, store it, and sign the digest tuple.
pub fn sign_message(
    payload: Vec<u8>,
    sender: VehicleId,
    cluster_id: ClusterId,
    round: u64,
    key: &KeyPair,
    store: &mut ContentStore,
) -> SignedMessage {
    let payload_digest = sha256(&payload);
    let content_id = store.put(payload);
    debug_assert_eq!(payload_digest, content_id);
    let signature = key.sign(&message_signing_bytes(&payload_digest, sender, cluster_id, round));
    SignedMessage { payload_digest, content_id, sender, cluster_id, round, signature }
}

/// Why a message failed receiver-side verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    BadSignature,
    MissingContent,
    ContentMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOutcome {
    Accepted,
    Rejected(RejectReason),
}

impl VerifyOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, VerifyOutcome::Accepted)
    }
}

/// Receiver-side authenticity check: the signature must verify under the
/// sender's public key and the stored payload must hash back to the digest.
pub fn verify_message(
    sm: &SignedMessage,
    sender_public: &VerifyingKey,
    store: &ContentStore,
) -> VerifyOutcome {
    let bytes = message_signing_bytes(&sm.payload_digest, sm.sender, sm.cluster_id, sm.round);
    if sender_public.verify(&bytes, &sm.signature).is_err() {
        return VerifyOutcome::Rejected(RejectReason::BadSignature);
    }
    match store.get(&sm.content_id) {
        None => VerifyOutcome::Rejected(RejectReason::MissingContent),
        Some(payload) if sha256(payload) != sm.payload_digest => {
            VerifyOutcome::Rejected(RejectReason::ContentMismatch)
        }
        Some(_) => VerifyOutcome::Accepted,
    }
}

/// A member message countersigned by its cluster head with the cluster key,
/// as handed to the SDN controller.
#[derive(Debug, Clone)]
pub struct ClusterEnvelope {
    pub message: SignedMessage,
    pub endorsement: Signature,
}

fn endorsement_bytes(sm: &SignedMessage) -> Vec<u8> {
    let mut buf = Vec::with_capacity(4 + 32 + 8 + 8);
    buf.extend_from_slice(b"fwd:");
    buf.extend_from_slice(&sm.payload_digest);
    buf.extend_from_slice(&sm.cluster_id.0.to_be_bytes());
    buf.extend_from_slice(&sm.round.to_be_bytes());
    buf
}

/// Cluster-head endorsement: signs the digest under the cluster key.
pub fn endorse_message(sm: SignedMessage, cluster_key: &KeyPair) -> ClusterEnvelope {
    let endorsement = cluster_key.sign(&endorsement_bytes(&sm));
    ClusterEnvelope { message: sm, endorsement }
}

/// Check only the cluster endorsement of an envelope.
pub fn verify_endorsement(env: &ClusterEnvelope, cluster_public: &VerifyingKey) -> bool {
    cluster_public.verify(&endorsement_bytes(&env.message), &env.endorsement).is_ok()
}
