//! Binary model files and vector files.
//!
//! Model file layout:
//!
//! ```text
//! paravec-model v1\n
//! <u64 LE byte length><UTF-8 metadata: key=value lines, then `vocab`,
//!                      then one `surface\tcount` line per position>
//! W rows cols\n <rows*cols f32 LE>
//! D rows cols\n <...>
//! out_nodes rows cols\n <...>          (hierarchical)
//! U rows cols\n <...> b rows 1\n <...> (full softmax)
//! ```
//!
//! The Huffman coding is rebuilt from the vocabulary counts on load.
//! Vector files are `paravec-vec v1 <rows> <cols>\n` followed by row-major
//! f32 LE values.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, ParamMatrix};
use crate::model::{ModelConfig, OutputParams, PvModel};
use crate::scalar::Scalar;

pub const MODEL_MAGIC: &str = "paravec-model";
pub const MODEL_VERSION: &str = "v1";
pub const VECTOR_MAGIC: &str = "paravec-vec";

/// Everything in a model file ahead of the parameter arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelHeader {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub n_paragraphs: usize,
}

impl ModelHeader {
    fn metadata(&self) -> String {
        let c = &self.config;
        let mut s = format!(
            "mode={}\ncomposition={}\noutput_layer={}\nuse_bias={}\nsymmetric={}\n\
             dim_word={}\ndim_para={}\nwindow={}\nM={}\nN={}\nvocab\n",
            c.mode,
            c.composition,
            c.output_layer,
            c.use_bias,
            c.symmetric,
            c.dim_word,
            c.dim_para,
            c.window,
            self.vocab.len(),
            self.n_paragraphs,
        );
        for (surface, count) in self.vocab.entries() {
            s.push_str(&format!("{surface}\t{count}\n"));
        }
        s
    }

    fn parse(text: &str, offset: u64) -> Result<Self> {
        let corrupt = |reason: String| Error::CorruptModel { offset, reason };
        let mut lines = text.lines();
        let mut fields = std::collections::HashMap::new();
        for line in lines.by_ref() {
            if line == "vocab" {
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| corrupt(format!("bad metadata line `{line}`")))?;
            fields.insert(k, v);
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| corrupt(format!("metadata lacks `{k}`")))
        };
        fn parsed<T: std::str::FromStr>(v: &str, k: &str, offset: u64) -> Result<T> {
            v.parse().map_err(|_| Error::CorruptModel {
                offset,
                reason: format!("bad value `{v}` for `{k}`"),
            })
        }
        let config = ModelConfig {
            mode: parsed(get("mode")?, "mode", offset)?,
            composition: parsed(get("composition")?, "composition", offset)?,
            output_layer: parsed(get("output_layer")?, "output_layer", offset)?,
            use_bias: parsed(get("use_bias")?, "use_bias", offset)?,
            symmetric: parsed(get("symmetric")?, "symmetric", offset)?,
            dim_word: parsed(get("dim_word")?, "dim_word", offset)?,
            dim_para: parsed(get("dim_para")?, "dim_para", offset)?,
            window: parsed(get("window")?, "window", offset)?,
        };
        config.validate().map_err(|e| corrupt(e.to_string()))?;
        let m: usize = parsed(get("M")?, "M", offset)?;
        let n_paragraphs: usize = parsed(get("N")?, "N", offset)?;
        let mut entries = Vec::with_capacity(m);
        for line in lines {
            let (s, c) = line
                .rsplit_once('\t')
                .ok_or_else(|| corrupt(format!("bad vocabulary line `{line}`")))?;
            entries.push((s.to_owned(), parsed(c, "count", offset)?));
        }
        if entries.len() != m {
            return Err(corrupt(format!(
                "header says M={m} but lists {} vocabulary entries",
                entries.len()
            )));
        }
        let vocab = Vocabulary::from_entries(entries).map_err(|e| corrupt(e.to_string()))?;
        Ok(ModelHeader {
            config,
            vocab,
            n_paragraphs,
        })
    }
}

fn write_array<F: Scalar, W: Write>(out: &mut W, name: &str, m: &ParamMatrix<F>) -> std::io::Result<()> {
    write!(out, "{name} {} {}\n", m.rows(), m.cols())?;
    let mut buf = Vec::with_capacity(m.rows() * m.cols() * 4);
    for v in m.to_vec() {
        buf.extend_from_slice(&(v.widen() as f32).to_le_bytes());
    }
    out.write_all(&buf)
}

/// Writes `model` in the model-file layout. Parameters are stored as f32.
pub fn save_model<F: Scalar, W: Write>(model: &PvModel<F>, mut out: W) -> Result<()> {
    let header = ModelHeader {
        config: model.config().clone(),
        vocab: model.vocab().clone(),
        n_paragraphs: model.n_paragraphs(),
    };
    let meta = header.metadata();
    write!(out, "{MODEL_MAGIC} {MODEL_VERSION}\n")?;
    out.write_all(&(meta.len() as u64).to_le_bytes())?;
    out.write_all(meta.as_bytes())?;
    write_array(&mut out, "W", model.words())?;
    write_array(&mut out, "D", model.paragraphs())?;
    match model.output() {
        OutputParams::Hierarchical { nodes } => write_array(&mut out, "out_nodes", nodes)?,
        OutputParams::Full { weights, bias } => {
            write_array(&mut out, "U", weights)?;
            write_array(&mut out, "b", bias)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn model_to_bytes<F: Scalar>(model: &PvModel<F>) -> Vec<u8> {
    let mut buf = Vec::new();
    save_model(model, &mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn save_model_file<F: Scalar>(model: &PvModel<F>, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    save_model(model, std::io::BufWriter::new(file))
}

/// Byte cursor that reports its offset in errors.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn corrupt(&self, reason: impl Into<String>) -> Error {
        Error::CorruptModel {
            offset: self.pos as u64,
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.corrupt(format!(
                "truncated {what}: need {n} bytes, {} left",
                self.bytes.len() - self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn line(&mut self, what: &str) -> Result<&'a str> {
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .take(256)
            .position(|&b| b == b'\n')
            .ok_or_else(|| self.corrupt(format!("missing {what} line")))?;
        let line = std::str::from_utf8(&rest[..end]).map_err(|_| self.corrupt(format!("{what} is not UTF-8")))?;
        self.pos += end + 1;
        Ok(line)
    }

    fn array<F: Scalar>(&mut self, name: &str, rows: usize, cols: usize) -> Result<ParamMatrix<F>> {
        let start = self.pos;
        let line = self.line(&format!("`{name}` array header"))?;
        let parts: Vec<&str> = line.split(' ').collect();
        let dims: Option<(usize, usize)> = match parts[..] {
            [n, r, c] if n == name => r.parse().ok().zip(c.parse().ok()),
            _ => None,
        };
        let Some((r, c)) = dims else {
            return Err(Error::CorruptModel {
                offset: start as u64,
                reason: format!("expected `{name} {rows} {cols}`, found `{line}`"),
            });
        };
        if (r, c) != (rows, cols) {
            return Err(Error::CorruptModel {
                offset: start as u64,
                reason: format!("`{name}` is {r}x{c} but the header implies {rows}x{cols}"),
            });
        }
        let n = r
            .checked_mul(c)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| self.corrupt("array size overflows"))?;
        let data = self.take(n, &format!("`{name}` payload"))?;
        let values = data
            .chunks_exact(4)
            .map(|b| F::cast(f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64))
            .collect();
        Ok(ParamMatrix::from_vec(r, c, values))
    }
}

/// Reads the magic line and metadata block, returning the header and the
/// offset where the arrays begin.
pub fn read_header(bytes: &[u8]) -> Result<(ModelHeader, usize)> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.line("magic")?;
    match magic.split_once(' ') {
        Some((MODEL_MAGIC, MODEL_VERSION)) => {}
        Some((MODEL_MAGIC, found)) => {
            return Err(Error::VersionMismatch {
                found: found.to_owned(),
            })
        }
        _ => return Err(Error::CorruptModel { offset: 0, reason: "not a paravec model file".into() }),
    }
    let len_bytes = cur.take(8, "metadata length")?;
    let len = u64::from_le_bytes(len_bytes.try_into().expect("eight bytes"));
    let len = usize::try_from(len).map_err(|_| cur.corrupt("metadata length overflows"))?;
    let meta_offset = cur.pos as u64;
    let meta = cur.take(len, "metadata")?;
    let text = std::str::from_utf8(meta).map_err(|_| Error::CorruptModel {
        offset: meta_offset,
        reason: "metadata is not UTF-8".into(),
    })?;
    Ok((ModelHeader::parse(text, meta_offset)?, cur.pos))
}

pub fn load_model<F: Scalar>(bytes: &[u8]) -> Result<PvModel<F>> {
    let (header, pos) = read_header(bytes)?;
    let mut cur = Cursor { bytes, pos };
    let c = header.config;
    let (m, h) = (header.vocab.len(), c.hidden_dim());
    let words = cur.array("W", m, c.dim_word)?;
    let paragraphs = cur.array("D", header.n_paragraphs, c.dim_para)?;
    let output = match c.output_layer {
        crate::model::OutputLayer::Hierarchical => {
            let nodes = crate::corpus::HuffmanCoding::build(&header.vocab).node_count();
            OutputParams::Hierarchical {
                nodes: cur.array("out_nodes", nodes, h)?,
            }
        }
        crate::model::OutputLayer::Full => {
            let n = header.vocab.n_words();
            OutputParams::Full {
                weights: cur.array("U", n, h)?,
                bias: cur.array("b", n, 1)?,
            }
        }
    };
    if cur.pos != bytes.len() {
        return Err(cur.corrupt(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    PvModel::from_parts(c, header.vocab, words, paragraphs, output).map_err(|e| Error::CorruptModel {
        offset: pos as u64,
        reason: e.to_string(),
    })
}

pub fn load_model_file<F: Scalar>(path: impl AsRef<Path>) -> Result<PvModel<F>> {
    load_model(&fs::read(path)?)
}

/// Writes a vector file; entries are stored as f32.
pub fn write_vectors<F: Scalar, W: Write>(vectors: &DenseMatrix<F>, mut out: W) -> Result<()> {
    write!(out, "{VECTOR_MAGIC} v1 {} {}\n", vectors.rows(), vectors.cols())?;
    let mut buf = Vec::with_capacity(vectors.as_slice().len() * 4);
    for v in vectors.as_slice() {
        buf.extend_from_slice(&(v.widen() as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn read_vectors(bytes: &[u8]) -> Result<DenseMatrix<f32>> {
    let bad = |r: &str| Error::CorruptVectors(r.to_owned());
    let end = bytes
        .iter()
        .take(128)
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not ASCII"))?;
    let (rows, cols) = match header.split(' ').collect::<Vec<_>>()[..] {
        [VECTOR_MAGIC, "v1", r, c] => r
            .parse::<usize>()
            .ok()
            .zip(c.parse::<usize>().ok())
            .ok_or_else(|| bad("bad dimensions"))?,
        [VECTOR_MAGIC, v, _, _] => return Err(bad(&format!("unsupported version `{v}`"))),
        _ => return Err(bad("not a paravec vector file")),
    };
    let payload = &bytes[end + 1..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if payload.len() != expected {
        return Err(bad(&format!(
            "header says {rows}x{cols} ({expected} bytes) but payload has {} bytes",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn write_vectors_file<F: Scalar>(vectors: &DenseMatrix<F>, path: impl AsRef<Path>) -> Result<()> {
    write_vectors(vectors, std::io::BufWriter::new(fs::File::create(path)?))
}

pub fn read_vectors_file(path: impl AsRef<Path>) -> Result<DenseMatrix<f32>> {
    read_vectors(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::model::{Mode, OutputLayer};

    fn model(output_layer: OutputLayer) -> PvModel<f32> {
        let docs = vec![vec!["a", "b", "a", "c", "a", "b"]];
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        let config = ModelConfig {
            output_layer,
            ..ModelConfig::pv_dm(3, 3)
        };
        let m = PvModel::new(config, vocab, 2, 9).unwrap();
        if let OutputParams::Full { bias, .. } = m.output() {
            bias.set(1, 0, 0.25);
        }
        m
    }

    #[test]
    fn roundtrip_is_byte_exact() {
        for layer in [OutputLayer::Hierarchical, OutputLayer::Full] {
            let m = model(layer);
            let bytes = model_to_bytes(&m);
            assert!(bytes.starts_with(b"paravec-model v1\n"));
            let back: PvModel<f32> = load_model(&bytes).unwrap();
            assert_eq!(model_to_bytes(&back), bytes);
            assert_eq!(back.huffman(), m.huffman());
            assert_eq!(back.words().to_vec(), m.words().to_vec());
        }
    }

    #[test]
    fn every_truncation_is_reported() {
        let bytes = model_to_bytes(&model(OutputLayer::Full));
        for cut in 0..bytes.len() {
            match load_model::<f32>(&bytes[..cut]) {
                Err(Error::CorruptModel { offset, .. }) => assert!(offset as usize <= cut),
                other => panic!("cut at {cut}: {other:?}"),
            }
        }
    }

    #[test]
    fn version_and_vocab_size_are_checked() {
        let mut bytes = model_to_bytes(&model(OutputLayer::Hierarchical));
        bytes[15] = b'2';
        assert!(matches!(load_model::<f32>(&bytes), Err(Error::VersionMismatch { found }) if found == "v2"));

        let bytes = model_to_bytes(&model(OutputLayer::Hierarchical));
        let at = bytes.windows(4).position(|w| w == b"M=4\n").unwrap();
        let mut patched = bytes.clone();
        patched[at + 2] = b'5';
        assert!(matches!(load_model::<f32>(&patched), Err(Error::CorruptModel { .. })));
    }

    #[test]
    fn dbow_header_parses() {
        let docs = vec![vec!["x", "y"]];
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        let m = PvModel::<f64>::new(ModelConfig::pv_dbow(4, 3), vocab, 1, 1).unwrap();
        let bytes = model_to_bytes(&m);
        let (h, _) = read_header(&bytes).unwrap();
        assert_eq!(h.config.mode, Mode::Dbow);
        assert_eq!(h.n_paragraphs, 1);
    }

    #[test]
    fn vectors_roundtrip() {
        let v = DenseMatrix::<f32>::from_rows(&[vec![1.0, -2.5], vec![0.0, 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_vectors(&v, &mut buf).unwrap();
        assert!(buf.starts_with(b"paravec-vec v1 2 2\n"));
        assert_eq!(read_vectors(&buf).unwrap(), v);
        assert!(read_vectors(&buf[..buf.len() - 1]).is_err());
        assert!(read_vectors(b"").is_err());
    }
}
