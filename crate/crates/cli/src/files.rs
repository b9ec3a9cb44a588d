//! JSON input files.
//!
//! | kind    | shape |
//! |---------|-------|
//! | channel | `{"kernel": [[P(y|x) ...] ...]}` |
//! | network | `{"input_alphabets", "output_alphabets", "kernel", "demands"}` with an optional `d` |
//! | code    | `{"n", "message_sizes", "encoders", "decoders", "pipe"}` tables as written by `search-code --out` |
//! | source  | `{"n", "initial", "transition"}`, `{"n", "iid"}` or `{"n", "base", "kernels"}` |
//! | set     | `{"members": [[y_1 .. y_n] ...]}` or `{"center": [...], "radius": r}` |
//! | joint   | `{"n", "a1", "a2", "z_dist", "conditionals"}` |

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use nitk_core::coupling::{blowup_set, EventSet, MarkovSource};
use nitk_core::model::{validate_network, Channel, Code, Distribution, Network, NetworkDescription};
use nitk_core::regions::WringingInput;

use crate::error::{CliError, CliResult};

/// Raw bytes plus their SHA-256, hex encoded.
pub struct Loaded<T> {
    pub value: T,
    pub digest: String,
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> CliResult<T> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn field_err(path: &Path, field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Field { path: path.to_path_buf(), field: field.to_string(), message: e.to_string() }
}

pub fn load_channel(path: &Path) -> CliResult<Loaded<Channel>> {
    #[derive(Deserialize)]
    struct Raw {
        kernel: Vec<Vec<f64>>,
    }
    let bytes = read(path)?;
    let raw: Raw = parse(path, &bytes)?;
    let value = Channel::new(raw.kernel).map_err(|e| field_err(path, "kernel", e))?;
    Ok(Loaded { value, digest: digest(&bytes) })
}

pub fn load_network(path: &Path) -> CliResult<Loaded<Network>> {
    let bytes = read(path)?;
    let desc: NetworkDescription = parse(path, &bytes)?;
    let value = validate_network(desc).map_err(|e| field_err(path, "network", e))?;
    Ok(Loaded { value, digest: digest(&bytes) })
}

pub fn load_code(path: &Path, net: &Network) -> CliResult<Loaded<Code>> {
    let bytes = read(path)?;
    let value: Code = parse(path, &bytes)?;
    value.validate(net).map_err(|e| field_err(path, "code", e))?;
    Ok(Loaded { value, digest: digest(&bytes) })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSource {
    Markov { n: usize, initial: Vec<f64>, transition: Vec<Vec<f64>> },
    Iid { n: usize, iid: Vec<f64> },
    Kernels { n: usize, base: usize, kernels: Vec<Vec<f64>> },
}

pub fn load_source(path: &Path) -> CliResult<Loaded<MarkovSource>> {
    let bytes = read(path)?;
    let raw: RawSource = parse(path, &bytes)?;
    let value = match raw {
        RawSource::Markov { n, initial, transition } => {
            let init = Distribution::new(initial).map_err(|e| field_err(path, "initial", e))?;
            MarkovSource::markov(&init, &transition, n).map_err(|e| field_err(path, "transition", e))?
        }
        RawSource::Iid { n, iid } => {
            let p = Distribution::new(iid).map_err(|e| field_err(path, "iid", e))?;
            MarkovSource::iid(&p, n).map_err(|e| field_err(path, "n", e))?
        }
        RawSource::Kernels { n, base, kernels } => MarkovSource::new(n, base, kernels).map_err(|e| field_err(path, "kernels", e))?,
    };
    Ok(Loaded { value, digest: digest(&bytes) })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSet {
    Members { members: Vec<Vec<usize>> },
    Ball { center: Vec<usize>, radius: usize },
}

pub fn load_set(path: &Path, base: usize, n: usize) -> CliResult<Loaded<EventSet>> {
    let bytes = read(path)?;
    let raw: RawSet = parse(path, &bytes)?;
    let value = match raw {
        RawSet::Members { members } => EventSet::from_sequences(base, n, &members).map_err(|e| field_err(path, "members", e))?,
        RawSet::Ball { center, radius } => {
            let c = EventSet::from_sequences(base, n, &[center]).map_err(|e| field_err(path, "center", e))?;
            blowup_set(&c, radius)
        }
    };
    Ok(Loaded { value, digest: digest(&bytes) })
}

pub fn load_joint(path: &Path) -> CliResult<Loaded<WringingInput>> {
    let bytes = read(path)?;
    let value: WringingInput = parse(path, &bytes)?;
    Ok(Loaded { value, digest: digest(&bytes) })
}

pub fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.clone(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str, body: &str) -> PathBuf {
        let p = std::env::temp_dir().join(format!("nitk-{}-{name}", std::process::id()));
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn digest_is_sha256_hex() {
        assert_eq!(digest(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn source_shapes() {
        let p = tmp("iid.json", r#"{"n": 2, "iid": [0.5, 0.5]}"#);
        let s = load_source(&p).unwrap().value;
        assert_eq!((s.n, s.base), (2, 2));
        let p = tmp("bad-src.json", r#"{"n": 2, "iid": [0.5, 0.6]}"#);
        assert!(matches!(load_source(&p), Err(CliError::Field { field, .. }) if field == "iid"));
    }

    #[test]
    fn ball_set_is_blown_up() {
        let p = tmp("ball.json", r#"{"center": [0, 0, 0], "radius": 1}"#);
        assert_eq!(load_set(&p, 2, 3).unwrap().value.len(), 4);
        let p = tmp("members.json", r#"{"members": [[0, 2]]}"#);
        assert!(load_set(&p, 2, 2).is_err());
    }
}
