//! Hash-chained ledgers and gas accounting.
//!
//! Two tiers share one block format: every cluster keeps its own chain of
//! vote / registration / message-digest transactions, and a single cloud
//! chain periodically absorbs verification records that anchor cluster-block
//! digests, giving the dual-layer design its audit trail.
//!
//! Hashing is SHA-256 over a canonical byte layout (fixed field order,
//! big-endian integers, length-prefixed transaction bytes), so chain hashes
//! are reproducible across implementations.

use crate::config::GasModel;
use crate::crypto::{sha256, Digest32};
use crate::domain::{ClusterId, RsuId, VehicleId};
use crate::error::LedgerError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

/// Which layer of the dual-layer design a ledger belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LedgerTier {
    Cluster,
    Cloud,
}

/// One vote cast during a head election.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteEntry {
    pub voter: RsuId,
    pub candidate: VehicleId,
    pub score: f64,
}

/// Ledger transaction kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tx {
    /// Election outcome with its full vote record.
    Vote { cluster: ClusterId, elected: VehicleId, entries: Vec<VoteEntry> },
    /// Commitment of one accepted message digest.
    MessageDigest {
        #[serde(with = "hex::serde")]
        digest: Digest32,
        sender: VehicleId,
        message_round: u64,
    },
    /// Birth certificate of a cluster: anchor RSU, head, and cluster key.
    ClusterRegistration {
        cluster: ClusterId,
        rsu: RsuId,
        head: VehicleId,
        #[serde(with = "hex::serde")]
        cluster_public_key: [u8; 32],
        members: Vec<VehicleId>,
    },
    /// Cloud-tier record that a cluster-ledger block was verified and
    /// anchored: the cluster chain's block digest at a given height.
    VerificationRecord {
        cluster: ClusterId,
        height: u64,
        #[serde(with = "hex::serde")]
        digest: Digest32,
    },
}

impl Tx {
    /// Canonical byte encoding used for block hashing: 1-byte tag, then the
    /// fields in declaration order, integers big-endian, floats as IEEE-754
    /// bit patterns, vectors length-prefixed with u32.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64);
        match self {
            Tx::Vote { cluster, elected, entries } => {
                out.push(0x01);
                out.extend_from_slice(&cluster.0.to_be_bytes());
                out.extend_from_slice(&elected.0.to_be_bytes());
                out.extend_from_slice(&(entries.len() as u32).to_be_bytes());
                for e in entries {
                    out.extend_from_slice(&e.voter.0.to_be_bytes());
                    out.extend_from_slice(&e.candidate.0.to_be_bytes());
                    out.extend_from_slice(&e.score.to_bits().to_be_bytes());
                }
            }
            Tx::MessageDigest { digest, sender, message_round } => {
                out.push(0x02);
                out.extend_from_slice(digest);
                out.extend_from_slice(&sender.0.to_be_bytes());
                out.extend_from_slice(&message_round.to_be_bytes());
            }
            Tx::ClusterRegistration { cluster, rsu, head, cluster_public_key, members } => {
                out.push(0x03);
                out.extend_from_slice(&cluster.0.to_be_bytes());
                out.extend_from_slice(&rsu.0.to_be_bytes());
                out.extend_from_slice(&head.0.to_be_bytes());
                out.extend_from_slice(cluster_public_key);
                out.extend_from_slice(&(members.len() as u32).to_be_bytes());
                for m in members {
                    out.extend_from_slice(&m.0.to_be_bytes());
                }
            }
            Tx::VerificationRecord { cluster, height, digest } => {
                out.push(0x04);
                out.extend_from_slice(&cluster.0.to_be_bytes());
                out.extend_from_slice(&height.to_be_bytes());
                out.extend_from_slice(digest);
            }
        }
        out
    }
}

/// One block: header fields plus its transactions. `timestamp` is the
/// simulation round the block was committed in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub index: u64,
    #[serde(with = "hex::serde")]
    pub prev_hash: Digest32,
    pub timestamp: u64,
    pub transactions: Vec<Tx>,
    pub tx_count: u64,
    pub gas_used: f64,
    #[serde(with = "hex::serde")]
    pub hash: Digest32,
}

impl Block {
    /// Bytes the block hash commits to: every field above `hash`, in order.
    fn hashable_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 64 * self.transactions.len());
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(&self.prev_hash);
        out.extend_from_slice(&self.timestamp.to_be_bytes());
        out.extend_from_slice(&self.tx_count.to_be_bytes());
        out.extend_from_slice(&self.gas_used.to_bits().to_be_bytes());
        for tx in &self.transactions {
            let bytes = tx.canonical_bytes();
            out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn compute_hash(&self) -> Digest32 {
        sha256(&self.hashable_bytes())
    }
}

/// What a full-chain validation found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainStatus {
    Valid,
    Invalid { height: u64, fault: ChainFault },
}

impl ChainStatus {
    pub fn is_valid(&self) -> bool {
        matches!(self, ChainStatus::Valid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainFault {
    /// Genesis block malformed (wrong index or nonzero prev_hash).
    Genesis,
    /// Stored hash does not recompute from the block's fields.
    HashMismatch,
    /// prev_hash does not equal the predecessor's stored hash.
    BrokenLink,
    /// Block index is not predecessor index + 1.
    IndexGap,
    /// tx_count disagrees with the transaction list length.
    TxCountMismatch,
    /// gas_used disagrees with the gas model for tx_count.
    GasMismatch,
    /// Non-genesis block carries no transactions.
    EmptyBlock,
}

impl fmt::Display for ChainFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChainFault::Genesis => "malformed genesis",
            ChainFault::HashMismatch => "hash mismatch",
            ChainFault::BrokenLink => "broken prev_hash link",
            ChainFault::IndexGap => "index gap",
            ChainFault::TxCountMismatch => "tx_count mismatch",
            ChainFault::GasMismatch => "gas mismatch",
            ChainFault::EmptyBlock => "empty non-genesis block",
        };
        f.write_str(s)
    }
}

/// An append-only hash chain of blocks, starting at an all-zero-prev genesis.
/// The gas model is fixed at creation and every block's `gas_used` must match
/// it. A digest index gives O(log n) membership checks for committed message
/// digests (the step-1 lookup of two-step verification).
#[derive(Debug, Clone)]
pub struct Ledger {
    pub tier: LedgerTier,
    pub gas_model: GasModel,
    blocks: Vec<Block>,
    message_digests: BTreeSet<Digest32>,
}

impl Ledger {
    /// Create a ledger with its genesis block at the given round.
    pub fn new(tier: LedgerTier, gas_model: GasModel, round: u64) -> Self {
        let mut genesis = Block {
            index: 0,
            prev_hash: [0u8; 32],
            timestamp: round,
            transactions: Vec::new(),
            tx_count: 0,
            gas_used: gas_model.cost(0),
            hash: [0u8; 32],
        };
        genesis.hash = genesis.compute_hash();
        Self { tier, gas_model, blocks: vec![genesis], message_digests: BTreeSet::new() }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Height of the newest block (genesis = 0).
    pub fn height(&self) -> u64 {
        (self.blocks.len() - 1) as u64
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("a ledger always has a genesis block")
    }

    /// Was this message digest committed in some block?
    pub fn contains_message_digest(&self, digest: &Digest32) -> bool {
        self.message_digests.contains(digest)
    }

    /// Append a block of transactions committed at `round`. The tail block is
    /// re-verified first so appending to a tampered chain fails; full-history
    /// audits use [`Ledger::validate_chain`].
    pub fn append_block(&mut self, transactions: Vec<Tx>, round: u64) -> Result<&Block, LedgerError> {
        if transactions.is_empty() {
            return Err(LedgerError::EmptyBlock);
        }
        let tip = self.tip();
        if tip.hash != tip.compute_hash() {
            return Err(LedgerError::HashMismatch { index: tip.index });
        }
        let expected = (self.blocks.len() - 1) as u64;
        if tip.index != expected {
            return Err(LedgerError::IndexGap { index: tip.index, expected });
        }

        let tx_count = transactions.len() as u64;
        let mut block = Block {
            index: tip.index + 1,
            prev_hash: tip.hash,
            timestamp: round,
            transactions,
            tx_count,
            gas_used: self.gas_model.cost(tx_count),
            hash: [0u8; 32],
        };
        block.hash = block.compute_hash();
        for tx in &block.transactions {
            if let Tx::MessageDigest { digest, .. } = tx {
                self.message_digests.insert(*digest);
            }
        }
        self.blocks.push(block);
        Ok(self.tip())
    }

    /// Re-verify the whole chain: hash recomputation, prev-hash links, index
    /// monotonicity, tx counts, and gas recomputation. Reports the first
    /// failing height.
    pub fn validate_chain(&self) -> ChainStatus {
        for (i, block) in self.blocks.iter().enumerate() {
            let fault = if i == 0 {
                if block.index != 0 || block.prev_hash != [0u8; 32] {
                    Some(ChainFault::Genesis)
                } else {
                    None
                }
            } else {
                let prev = &self.blocks[i - 1];
                if block.index != prev.index + 1 {
                    Some(ChainFault::IndexGap)
                } else if block.prev_hash != prev.hash {
                    Some(ChainFault::BrokenLink)
                } else if block.transactions.is_empty() {
                    Some(ChainFault::EmptyBlock)
                } else {
                    None
                }
            };
            let fault = fault
                .or_else(|| {
                    (block.tx_count != block.transactions.len() as u64)
                        .then_some(ChainFault::TxCountMismatch)
                })
                .or_else(|| {
                    (block.gas_used != self.gas_model.cost(block.tx_count))
                        .then_some(ChainFault::GasMismatch)
                })
                .or_else(|| {
                    (block.hash != block.compute_hash()).then_some(ChainFault::HashMismatch)
                });
            if let Some(fault) = fault {
                return ChainStatus::Invalid { height: block.index, fault };
            }
        }
        ChainStatus::Valid
    }

    /// Total gas consumed across all blocks.
    pub fn total_gas(&self) -> f64 {
        self.blocks.iter().map(|b| b.gas_used).sum()
    }

    /// Test hook: mutable access to blocks for tamper harnesses.
    #[doc(hidden)]
    pub fn blocks_mut(&mut self) -> &mut Vec<Block> {
        &mut self.blocks
    }
}

/// Ordinary least-squares line over (tx_count, gas) measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LineFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Calibrated gas model equivalent to this line: the whole per-tx rate
    /// goes to the base term and the intercept becomes the per-block
    /// overhead.
    pub fn as_gas_model(&self) -> GasModel {
        GasModel {
            base_gas_per_tx: self.slope,
            complexity_gas_per_tx: 0.0,
            fixed_overhead: self.intercept,
        }
    }
}

/// Least-squares fit of gas consumption against transaction count. Needs at
/// least two rows with distinct tx counts. R² is 1 for an exactly constant
/// target.
pub fn fit_gas_table(points: &[(f64, f64)]) -> Result<LineFit, LedgerError> {
    if points.len() < 2 {
        return Err(LedgerError::DegenerateFit);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(LedgerError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit { slope, intercept, r_squared })
}

/// Read a two-column (tx_count, gas) CSV with a header row.
pub fn read_gas_csv<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64)>, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut rows = Vec::new();
    for record in rdr.deserialize::<(f64, f64)>() {
        rows.push(record?);
    }
    Ok(rows)
}

#[derive(Serialize)]
struct ExportHeader<'a> {
    record: &'static str,
    format: u32,
    label: &'a str,
    tier: LedgerTier,
    signature_scheme: &'static str,
    hash_scheme: &'static str,
    gas_model: GasModel,
    blocks: u64,
}

#[derive(Serialize)]
struct ExportBlock<'a> {
    record: &'static str,
    #[serde(flatten)]
    block: &'a Block,
}

/// Export one ledger as JSON lines: a header record naming the schemes in
/// use, then one record per block with hex-encoded hashes. Several ledgers
/// may be concatenated into one file; each starts with its own header.
pub fn export_jsonl<W: Write>(w: &mut W, label: &str, ledger: &Ledger) -> std::io::Result<()> {
    let header = ExportHeader {
        record: "header",
        format: 1,
        label,
        tier: ledger.tier,
        signature_scheme: "ed25519",
        hash_scheme: "sha256",
        gas_model: ledger.gas_model,
        blocks: ledger.blocks().len() as u64,
    };
    serde_json::to_writer(&mut *w, &header)?;
    w.write_all(b"\n")?;
    for block in ledger.blocks() {
        serde_json::to_writer(&mut *w, &ExportBlock { record: "block", block })?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
