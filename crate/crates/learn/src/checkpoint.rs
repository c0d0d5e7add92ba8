//! Self-describing binary checkpoints.
//!
//! Layout: 8-byte magic, u32 format version, u64 header length, a JSON
//! header, then every parameter and optimiser section as little-endian f64
//! in header order. The header carries a SHA-256 of that blob.

use std::fs;
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adam::Adam;
use crate::nn::Mlp;
use crate::policy::GaussianPolicy;
use crate::sac::{Critics, SacAgent, SacConfig};

pub const MAGIC: &[u8; 8] = b"UAVMECCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("cannot access checkpoint {path}", path = path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checkpoint header is malformed: {0}")]
    Header(String),
    #[error("checkpoint payload hash mismatch")]
    Corrupt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Section {
    name: String,
    len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct OptimiserMeta {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
}

impl From<&Adam> for OptimiserMeta {
    fn from(a: &Adam) -> Self {
        Self {
            lr: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.eps,
            step: a.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RngState {
    seed: Vec<u8>,
    stream: u64,
    /// Decimal string: the word position is a u128.
    word_pos: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    config: SacConfig,
    actor_sizes: Vec<usize>,
    critic_sizes: Vec<usize>,
    log_alpha: f64,
    updates: u64,
    optimisers: Vec<OptimiserMeta>,
    rng: RngState,
    sections: Vec<Section>,
    blob_sha256: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn optimisers(agent: &SacAgent) -> [&Adam; 4] {
    [&agent.actor_opt, &agent.q1_opt, &agent.q2_opt, &agent.alpha_opt]
}

/// Serialises the full learner state.
pub fn to_bytes(agent: &SacAgent) -> Vec<u8> {
    let mut sections: Vec<(&str, &[f64])> = vec![
        ("actor", agent.policy.net.params()),
        ("critic1", agent.critics.q1.params()),
        ("critic2", agent.critics.q2.params()),
        ("target1", agent.critics.target1.params()),
        ("target2", agent.critics.target2.params()),
    ];
    let names = ["actor_opt", "critic1_opt", "critic2_opt", "alpha_opt"];
    let opts = optimisers(agent);
    let moment_names: Vec<(String, String)> =
        names.iter().map(|n| (format!("{n}.first"), format!("{n}.second"))).collect();
    for (opt, (first, second)) in opts.iter().zip(&moment_names) {
        sections.push((first, &opt.first));
        sections.push((second, &opt.second));
    }
    let mut blob = Vec::with_capacity(sections.iter().map(|s| s.1.len() * 8).sum());
    for (_, data) in &sections {
        for x in *data {
            blob.extend_from_slice(&x.to_le_bytes());
        }
    }
    let header = Header {
        config: agent.config.clone(),
        actor_sizes: agent.policy.net.sizes().to_vec(),
        critic_sizes: agent.critics.q1.sizes().to_vec(),
        log_alpha: agent.log_alpha,
        updates: agent.updates,
        optimisers: opts.iter().map(|o| OptimiserMeta::from(*o)).collect(),
        rng: RngState {
            seed: agent.rng.get_seed().to_vec(),
            stream: agent.rng.get_stream(),
            word_pos: agent.rng.get_word_pos().to_string(),
        },
        sections: sections
            .iter()
            .map(|(name, data)| Section {
                name: name.to_string(),
                len: data.len(),
            })
            .collect(),
        blob_sha256: hex(&Sha256::digest(&blob)),
    };
    let json = serde_json::to_vec(&header).expect("header is serialisable");
    let mut out = Vec::with_capacity(8 + 4 + 8 + json.len() + blob.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&blob);
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8], CheckpointError> {
    if bytes.len() < n {
        return Err(CheckpointError::Truncated);
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

pub fn from_bytes(mut bytes: &[u8]) -> Result<SacAgent, CheckpointError> {
    if take(&mut bytes, 8)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32::from_le_bytes(take(&mut bytes, 4)?.try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let header_len = u64::from_le_bytes(take(&mut bytes, 8)?.try_into().expect("8 bytes")) as usize;
    let header: Header =
        serde_json::from_slice(take(&mut bytes, header_len)?).map_err(|e| CheckpointError::Header(e.to_string()))?;
    let total: usize = header.sections.iter().map(|s| s.len).sum();
    let blob = take(&mut bytes, total * 8)?;
    if !bytes.is_empty() {
        return Err(CheckpointError::Header("trailing bytes after payload".into()));
    }
    if hex(&Sha256::digest(blob)) != header.blob_sha256 {
        return Err(CheckpointError::Corrupt);
    }
    let mut values = blob
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut sections = Vec::with_capacity(header.sections.len());
    for s in &header.sections {
        sections.push((s.name.clone(), values.by_ref().take(s.len).collect::<Vec<f64>>()));
    }
    let mut next = |name: &str| -> Result<Vec<f64>, CheckpointError> {
        match sections.first() {
            Some((n, _)) if n == name => Ok(sections.remove(0).1),
            _ => Err(CheckpointError::Header(format!("missing section {name}"))),
        }
    };
    let net = |sizes: &[usize], params: Vec<f64>, name: &str| {
        Mlp::from_params(sizes, params).ok_or_else(|| CheckpointError::Header(format!("{name} has the wrong length")))
    };
    let policy = GaussianPolicy {
        net: net(&header.actor_sizes, next("actor")?, "actor")?,
    };
    let critics = Critics {
        q1: net(&header.critic_sizes, next("critic1")?, "critic1")?,
        q2: net(&header.critic_sizes, next("critic2")?, "critic2")?,
        target1: net(&header.critic_sizes, next("target1")?, "target1")?,
        target2: net(&header.critic_sizes, next("target2")?, "target2")?,
    };
    if header.optimisers.len() != 4 {
        return Err(CheckpointError::Header("expected four optimisers".into()));
    }
    let mut opts = Vec::with_capacity(4);
    for (meta, name) in header
        .optimisers
        .iter()
        .zip(["actor_opt", "critic1_opt", "critic2_opt", "alpha_opt"])
    {
        let first = next(&format!("{name}.first"))?;
        let second = next(&format!("{name}.second"))?;
        if first.len() != second.len() {
            return Err(CheckpointError::Header(format!("{name} moments differ in length")));
        }
        opts.push(Adam {
            lr: meta.lr,
            beta1: meta.beta1,
            beta2: meta.beta2,
            eps: meta.eps,
            step: meta.step,
            first,
            second,
        });
    }
    let seed: [u8; 32] = header
        .rng
        .seed
        .as_slice()
        .try_into()
        .map_err(|_| CheckpointError::Header("rng seed must be 32 bytes".into()))?;
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(header.rng.stream);
    rng.set_word_pos(
        header
            .rng
            .word_pos
            .parse()
            .map_err(|_| CheckpointError::Header("bad rng word position".into()))?,
    );
    let mut opts = opts.into_iter();
    Ok(SacAgent {
        config: header.config,
        policy,
        critics,
        log_alpha: header.log_alpha,
        actor_opt: opts.next().expect("four"),
        q1_opt: opts.next().expect("four"),
        q2_opt: opts.next().expect("four"),
        alpha_opt: opts.next().expect("four"),
        rng,
        updates: header.updates,
    })
}

pub fn save(agent: &SacAgent, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, to_bytes(agent)).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: &Path) -> Result<SacAgent, CheckpointError> {
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replay::ReplayBuffer;
    use rand::Rng;

    fn trained_agent() -> SacAgent {
        let cfg = SacConfig {
            hidden: vec![8],
            batch_size: 4,
            buffer_capacity: 16,
            seed: 9,
            ..Default::default()
        };
        let mut agent = SacAgent::new(3, 2, cfg).unwrap();
        let mut buf = ReplayBuffer::new(16, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..16 {
            let s: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = agent.act(&s);
            buf.push(&s, &a, -rng.random::<f64>(), &s, false);
        }
        for _ in 0..3 {
            agent.update(&buf).unwrap();
        }
        agent
    }

    fn same(a: &SacAgent, b: &SacAgent) -> bool {
        a.policy == b.policy
            && a.critics == b.critics
            && a.log_alpha.to_bits() == b.log_alpha.to_bits()
            && a.actor_opt == b.actor_opt
            && a.q1_opt == b.q1_opt
            && a.q2_opt == b.q2_opt
            && a.alpha_opt == b.alpha_opt
            && a.rng == b.rng
            && a.updates == b.updates
            && a.config == b.config
    }

    #[test]
    fn round_trip_is_exact() {
        let agent = trained_agent();
        let back = from_bytes(&to_bytes(&agent)).unwrap();
        assert!(same(&agent, &back));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agent.ckpt");
        let agent = trained_agent();
        save(&agent, &path).unwrap();
        assert!(same(&agent, &load(&path).unwrap()));
        assert!(matches!(load(&dir.path().join("missing")), Err(CheckpointError::Io { .. })));
    }

    #[test]
    fn damage_is_detected() {
        let bytes = to_bytes(&trained_agent());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(from_bytes(&bad), Err(CheckpointError::BadMagic)));

        let mut bad = bytes.clone();
        bad[8..12].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(
            from_bytes(&bad),
            Err(CheckpointError::Version { found: 99, expected: 1 })
        ));

        let mut bad = bytes.clone();
        let last = bad.len() - 1;
        bad[last] ^= 0x40;
        assert!(matches!(from_bytes(&bad), Err(CheckpointError::Corrupt)));

        assert!(matches!(from_bytes(&bytes[..bytes.len() - 3]), Err(CheckpointError::Truncated)));
    }
}
