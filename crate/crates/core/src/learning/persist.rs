//! Binary model files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic "MTMFQMOD" | version u32 | algorithm u8 | layout u8 | reserved u16
//! num_types u32 | action_count u32 | obs_dim or obs_bins u32 | mean_dim u32
//! weight count u64 | weights f64 × count | target weights f64 × count
//! ```
//!
//! Weights are always stored as `f64`, so a file written from an `f32` model
//! loads into either precision.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::model::{Algorithm, FeatureLayout, QModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"MTMFQMOD";
const VERSION: u32 = 1;

fn to_u32(x: usize, what: &str) -> Result<u32> {
    u32::try_from(x).map_err(|_| Error::ModelFormat(format!("{what} {x} does not fit the header")))
}

pub fn write_model<S: Scalar, W: Write>(model: &QModel<S>, mut out: W) -> Result<()> {
    let (layout_code, obs, mean_dim) = match model.layout() {
        FeatureLayout::Linear { obs_dim, mean_dim } => (0u8, obs_dim, mean_dim),
        FeatureLayout::Tabular { obs_bins, mean_dim } => (1u8, obs_bins, mean_dim),
    };
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[model.algorithm().code(), layout_code])?;
    out.write_all(&0u16.to_le_bytes())?;
    for (x, what) in [
        (model.num_types(), "type count"),
        (model.action_count(), "action count"),
        (obs, "observation size"),
        (mean_dim, "mean-action size"),
    ] {
        out.write_all(&to_u32(x, what)?.to_le_bytes())?;
    }
    out.write_all(&(model.dim() as u64).to_le_bytes())?;
    for w in model.weights().iter().chain(model.target_weights()) {
        out.write_all(&w.as_f64().to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::ModelFormat("file is truncated".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn read_u32<R: Read>(input: &mut R) -> Result<usize> {
    Ok(u32::from_le_bytes(read_array(input)?) as usize)
}

pub fn read_model<S: Scalar, R: Read>(mut input: R) -> Result<QModel<S>> {
    if &read_array::<8, _>(&mut input)? != MAGIC {
        return Err(Error::ModelFormat("not a model file".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let [alg, layout_code] = read_array::<2, _>(&mut input)?;
    let _reserved: [u8; 2] = read_array(&mut input)?;
    let algorithm = Algorithm::from_code(alg).ok_or_else(|| Error::ModelFormat(format!("unknown algorithm code {alg}")))?;
    let num_types = read_u32(&mut input)?;
    let action_count = read_u32(&mut input)?;
    let obs = read_u32(&mut input)?;
    let mean_dim = read_u32(&mut input)?;
    let layout = match layout_code {
        0 => FeatureLayout::Linear { obs_dim: obs, mean_dim },
        1 => FeatureLayout::Tabular { obs_bins: obs, mean_dim },
        c => return Err(Error::ModelFormat(format!("unknown layout code {c}"))),
    };
    let count = u64::from_le_bytes(read_array(&mut input)?);
    let expected = QModel::<S>::new(algorithm, num_types, action_count, layout)
        .map_err(|e| Error::ModelFormat(e.to_string()))?
        .dim();
    if count != expected as u64 {
        return Err(Error::ModelFormat(format!("header declares {count} weights, shape needs {expected}")));
    }
    let mut read_weights = || -> Result<Vec<S>> {
        (0..expected)
            .map(|_| Ok(S::lit(f64::from_le_bytes(read_array(&mut input)?))))
            .collect()
    };
    let weights = read_weights()?;
    let target = read_weights()?;
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::ModelFormat("trailing bytes after weights".into()));
    }
    QModel::from_parts(algorithm, num_types, action_count, layout, weights, target)
}

pub fn save_model<S: Scalar>(model: &QModel<S>, path: impl AsRef<Path>) -> Result<()> {
    write_model(model, BufWriter::new(File::create(path)?))
}

pub fn load_model<S: Scalar>(path: impl AsRef<Path>) -> Result<QModel<S>> {
    read_model(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::learning::MeanAction;

    fn sample_model() -> QModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut m = QModel::linear(Algorithm::Mtmfq, 2, 5, 4, 3).unwrap();
        for w in m.weights_mut() {
            *w = rng.gen_range(-10.0..10.0);
        }
        m.soft_update(0.3);
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let model = sample_model();
        let mut bytes = Vec::new();
        write_model(&model, &mut bytes).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        let back: QModel<f64> = read_model(bytes.as_slice()).unwrap();
        assert_eq!(back, model);
        let obs = [0.1, 0.2, 0.3, 1.0];
        let means = vec![MeanAction::uniform(3), MeanAction::one_hot(1, 3)];
        assert_eq!(back.q_values(&obs, &means).unwrap(), model.q_values(&obs, &means).unwrap());
    }

    #[test]
    fn file_round_trip_and_f32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let model = QModel::<f64>::tabular(Algorithm::Mtmfq, 2, 2, 1, 2).unwrap();
        save_model(&model, &path).unwrap();
        assert_eq!(load_model::<f64>(&path).unwrap(), model);
        let narrow: QModel<f32> = load_model(&path).unwrap();
        assert_eq!(narrow.dim(), model.dim());
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = Vec::new();
        write_model(&sample_model(), &mut bytes).unwrap();
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(read_model::<f64, _>(bad_magic.as_slice()), Err(Error::ModelFormat(_))));
        assert!(matches!(read_model::<f64, _>(&bytes[..bytes.len() - 3]), Err(Error::ModelFormat(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(read_model::<f64, _>(extra.as_slice()), Err(Error::ModelFormat(_))));
        let mut bad_version = bytes.clone();
        bad_version[8] = 9;
        assert!(matches!(read_model::<f64, _>(bad_version.as_slice()), Err(Error::ModelFormat(_))));
        let mut bad_count = bytes;
        bad_count[32] ^= 1;
        assert!(matches!(read_model::<f64, _>(bad_count.as_slice()), Err(Error::ModelFormat(_))));
    }
}
