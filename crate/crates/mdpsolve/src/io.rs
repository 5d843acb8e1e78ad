//! Model files: a triplet-based JSON format for interchange and a compact
//! binary variant for large instances, plus the SIS parameter config.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::model::MdpModel;
use crate::sis::SisParams;

/// JSON refuses models past this many transition entries; the binary format
/// has no such limit.
pub const JSON_NNZ_GUARD: usize = 20_000_000;

const BINARY_MAGIC: &[u8; 4] = b"MDPB";
const BINARY_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MdpJson {
    n: usize,
    m: usize,
    gamma: f64,
    transitions: Vec<ActionTriplets>,
    costs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ActionTriplets {
    action: usize,
    triplets: Vec<(usize, usize, f64)>,
}

/// Writes a model, choosing the format by extension: `.json` or `.mdpb`.
pub fn write_model(path: &Path, model: &MdpModel) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => write_model_json(path, model),
        Some("mdpb") => write_model_binary(path, model),
        other => Err(Error::Format(format!(
            "unsupported model extension {other:?}; use .json or .mdpb"
        ))),
    }
}

/// Reads a model, sniffing the binary magic to pick the format.
pub fn read_model(path: &Path) -> Result<MdpModel> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 4];
    let got = file.read(&mut magic)?;
    drop(file);
    if got == 4 && &magic == BINARY_MAGIC {
        read_model_binary(path)
    } else {
        read_model_json(path)
    }
}

pub fn write_model_json(path: &Path, model: &MdpModel) -> Result<()> {
    write_model_json_guarded(path, model, JSON_NNZ_GUARD)
}

fn write_model_json_guarded(path: &Path, model: &MdpModel, guard: usize) -> Result<()> {
    let nnz: usize = (0..model.num_actions())
        .map(|a| model.transition(a).nnz())
        .sum();
    if nnz > guard {
        return Err(Error::TooLarge {
            what: "JSON model (use the .mdpb binary format)",
            size: nnz as u128,
            max: guard as u128,
        });
    }
    let doc = MdpJson {
        n: model.num_states(),
        m: model.num_actions(),
        gamma: model.gamma(),
        transitions: (0..model.num_actions())
            .map(|action| ActionTriplets {
                action,
                triplets: model.transition(action).iter().collect(),
            })
            .collect(),
        costs: (0..model.num_states())
            .map(|i| {
                (0..model.num_actions())
                    .map(|a| model.cost(i, a))
                    .collect()
            })
            .collect(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &doc)?;
    out.flush()?;
    Ok(())
}

pub fn read_model_json(path: &Path) -> Result<MdpModel> {
    let doc: MdpJson = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let mut seen = vec![false; doc.m];
    let mut quads = Vec::new();
    for block in &doc.transitions {
        if block.action >= doc.m {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: block.action,
                bound: doc.m,
            });
        }
        if seen[block.action] {
            return Err(Error::Format(format!(
                "action {} listed more than once",
                block.action
            )));
        }
        seen[block.action] = true;
        for &(i, j, p) in &block.triplets {
            quads.push((i, block.action, j, p));
        }
    }
    MdpModel::build(doc.n, doc.m, doc.gamma, &quads, doc.costs)
}

pub fn write_model_binary(path: &Path, model: &MdpModel) -> Result<()> {
    let n = model.num_states();
    let m = model.num_actions();
    if n > u32::MAX as usize {
        return Err(Error::TooLarge {
            what: "binary model state space",
            size: n as u128,
            max: u32::MAX as u128,
        });
    }
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&BINARY_VERSION.to_le_bytes())?;
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&(m as u64).to_le_bytes())?;
    out.write_all(&model.gamma().to_le_bytes())?;
    for a in 0..m {
        let p = model.transition(a);
        out.write_all(&(p.nnz() as u64).to_le_bytes())?;
        for &r in p.row_ptr() {
            out.write_all(&(r as u64).to_le_bytes())?;
        }
        for &c in p.col_indices() {
            out.write_all(&(c as u32).to_le_bytes())?;
        }
        for &v in p.values() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    for i in 0..n {
        for a in 0..m {
            out.write_all(&model.cost(i, a).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_model_binary(path: &Path) -> Result<MdpModel> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Format("missing binary model magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != BINARY_VERSION {
        return Err(Error::Format(format!("unsupported binary version {version}")));
    }
    let n = read_u64(&mut input)? as usize;
    let m = read_u64(&mut input)? as usize;
    let gamma = read_f64(&mut input)?;
    if n == 0 || m == 0 || n > u32::MAX as usize {
        return Err(Error::Format("implausible dimensions".into()));
    }
    let mut matrices = Vec::with_capacity(m);
    for _ in 0..m {
        let nnz = read_u64(&mut input)? as usize;
        let mut row_ptr = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            row_ptr.push(read_u64(&mut input)? as usize);
        }
        let mut col_idx = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            col_idx.push(read_u32(&mut input)? as usize);
        }
        let mut values = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            values.push(read_f64(&mut input)?);
        }
        matrices.push(CsrMatrix::from_raw_parts(n, n, row_ptr, col_idx, values)?);
    }
    let mut costs = Vec::with_capacity(n * m);
    for _ in 0..n * m {
        costs.push(read_f64(&mut input)?);
    }
    MdpModel::from_parts(gamma, matrices, costs)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

/// Reads SIS parameters from JSON; absent fields take the defaults.
pub fn read_sis_params(path: &Path) -> Result<SisParams> {
    let params: SisParams = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    params.validate()?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{generate_random, RandomMdpSpec};

    fn sample_model() -> MdpModel {
        generate_random(&RandomMdpSpec {
            n: 9,
            m: 3,
            gamma: 0.85,
            density: 0.4,
            seed: 77,
            ensure_regular: true,
        })
        .unwrap()
    }

    fn models_equal(a: &MdpModel, b: &MdpModel) {
        assert_eq!(a.num_states(), b.num_states());
        assert_eq!(a.num_actions(), b.num_actions());
        assert_eq!(a.gamma().to_bits(), b.gamma().to_bits());
        for action in 0..a.num_actions() {
            assert_eq!(a.transition(action), b.transition(action));
        }
        for i in 0..a.num_states() {
            for action in 0..a.num_actions() {
                assert_eq!(a.cost(i, action).to_bits(), b.cost(i, action).to_bits());
            }
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = sample_model();
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        models_equal(&model, &back);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.mdpb");
        let model = sample_model();
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        models_equal(&model, &back);
    }

    #[test]
    fn json_rejects_duplicate_triplets() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.json");
        std::fs::write(
            &path,
            r#"{"n":1,"m":1,"gamma":0.5,
                "transitions":[{"action":0,"triplets":[[0,0,0.5],[0,0,0.5]]}],
                "costs":[[1.0]]}"#,
        )
        .unwrap();
        assert!(matches!(
            read_model(&path),
            Err(Error::DuplicateEntry { .. })
        ));
    }

    #[test]
    fn json_rejects_duplicate_action_blocks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dupaction.json");
        std::fs::write(
            &path,
            r#"{"n":1,"m":1,"gamma":0.5,
                "transitions":[{"action":0,"triplets":[[0,0,1.0]]},
                               {"action":0,"triplets":[[0,0,1.0]]}],
                "costs":[[1.0]]}"#,
        )
        .unwrap();
        assert!(matches!(read_model(&path), Err(Error::Format(_))));
    }

    #[test]
    fn json_accepts_unordered_triplets() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shuffled.json");
        std::fs::write(
            &path,
            r#"{"n":2,"m":1,"gamma":0.5,
                "transitions":[{"action":0,"triplets":[[1,0,1.0],[0,1,0.25],[0,0,0.75]]}],
                "costs":[[1.0],[2.0]]}"#,
        )
        .unwrap();
        let model = read_model(&path).unwrap();
        assert_eq!(model.transition(0).row(0), (&[0usize, 1][..], &[0.75, 0.25][..]));
    }

    #[test]
    fn json_guard_kicks_in() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.json");
        let model = sample_model();
        assert!(matches!(
            write_model_json_guarded(&path, &model, 2),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn unknown_extension_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.xyz");
        assert!(write_model(&path, &sample_model()).is_err());
    }

    #[test]
    fn sis_params_partial_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sis.json");
        std::fs::write(&path, r#"{"population": 42, "gamma": 0.7}"#).unwrap();
        let params = read_sis_params(&path).unwrap();
        assert_eq!(params.population, 42);
        assert_eq!(params.gamma, 0.7);
        assert_eq!(params.w_f, 1.0);
        assert_eq!(params.c_f.len(), 5);
    }
}
