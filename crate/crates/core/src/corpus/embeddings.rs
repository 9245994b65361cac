use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::SentenceCounts;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"EMB1";

/// Row-major matrix of sentence vectors, one row per sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    data: Vec<f32>,
}

/// Embedding matrices keyed by doc_id, in doc_id order.
pub type EmbeddingSet = BTreeMap<String, EmbeddingMatrix>;

impl EmbeddingMatrix {
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 && !data.is_empty() {
            return Err(Error::Dimension("zero dim with non-empty data".into()));
        }
        if dim > 0 && !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!(
                "{} values is not a multiple of dim {dim}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("embedding matrix".into()));
        }
        Ok(EmbeddingMatrix { dim, data })
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row of length {} in matrix of dim {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn empty(dim: usize) -> Self {
        EmbeddingMatrix {
            dim,
            data: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    /// Copy with every row scaled to unit L2 norm (zero rows stay zero).
    pub fn normalized(&self) -> Self {
        let mut data = self.data.clone();
        if self.dim > 0 {
            for row in data.chunks_exact_mut(self.dim) {
                crate::vector::unit_normalize_in_place(row);
            }
        }
        EmbeddingMatrix {
            dim: self.dim,
            data,
        }
    }
}

/// Write embeddings in the `EMB1` container. All matrices must share a dim.
pub fn store_embeddings(data: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut dim: Option<usize> = None;
    for (id, m) in data {
        match dim {
            None => dim = Some(m.dim()),
            Some(d) if d != m.dim() => {
                return Err(Error::Dimension(format!(
                    "doc_id {id:?} has dim {} but others have {d}",
                    m.dim()
                )))
            }
            _ => {}
        }
    }
    let dim = dim.unwrap_or(0);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    out.write_all(MAGIC).map_err(io)?;
    out.write_all(&(dim as u32).to_le_bytes()).map_err(io)?;
    out.write_all(&(data.len() as u64).to_le_bytes())
        .map_err(io)?;
    for (id, m) in data {
        out.write_all(&(id.len() as u32).to_le_bytes())
            .map_err(io)?;
        out.write_all(id.as_bytes()).map_err(io)?;
        out.write_all(&(m.rows() as u32).to_le_bytes())
            .map_err(io)?;
        for x in m.as_slice() {
            out.write_all(&x.to_le_bytes()).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

/// Read an `EMB1` container without cross-checking against a corpus.
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut input = BufReader::new(file);
    let mut reader = Reader {
        input: &mut input,
        path,
    };

    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(Error::parse(path, 0, "bad magic, expected EMB1"));
    }
    let dim = reader.u32("dim")? as usize;
    let count = reader.u64("record count")?;

    let mut out = EmbeddingSet::new();
    for rec in 0..count {
        let id_len = reader.u32("doc_id length")? as usize;
        let mut id = vec![0u8; id_len];
        reader.read_exact(&mut id, "doc_id")?;
        let id = String::from_utf8(id)
            .map_err(|_| Error::parse(path, rec as usize, "doc_id is not UTF-8"))?;
        let rows = reader.u32("row count")? as usize;
        if rows > 0 && dim == 0 {
            return Err(Error::Dimension(format!(
                "doc_id {id:?} has rows but dim is 0"
            )));
        }
        let mut bytes = vec![0u8; rows * dim * 4];
        reader.read_exact(&mut bytes, "embedding values")?;
        let data: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("embeddings of doc_id {id:?}")));
        }
        let matrix = EmbeddingMatrix::new(dim, data)?;
        if out.insert(id.clone(), matrix).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::parse(path, 0, "trailing bytes after last record"));
    }
    Ok(out)
}

/// Read an `EMB1` container and check it against the corpus sentence counts:
/// every expected doc must be present with the right number of rows, and no
/// unknown doc may appear.
pub fn load_embeddings(path: impl AsRef<Path>, expected: &SentenceCounts) -> Result<EmbeddingSet> {
    let set = read_embeddings(path)?;
    for (id, m) in &set {
        match expected.get(id) {
            None => {
                return Err(Error::Missing {
                    what: "corpus document",
                    id: id.clone(),
                })
            }
            Some(&n) if n != m.rows() => {
                return Err(Error::CountMismatch {
                    doc_id: id.clone(),
                    expected: n,
                    found: m.rows(),
                })
            }
            _ => {}
        }
    }
    let mut missing: Vec<&String> = expected
        .keys()
        .filter(|id| !set.contains_key(*id))
        .collect();
    missing.sort();
    if let Some(id) = missing.first() {
        return Err(Error::Missing {
            what: "embeddings",
            id: (*id).clone(),
        });
    }
    Ok(set)
}

struct Reader<'a, R> {
    input: &'a mut R,
    path: &'a Path,
}

impl<R: Read> Reader<'_, R> {
    fn read_exact(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        self.input.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::parse(self.path, 0, format!("truncated file while reading {what}"))
            } else {
                Error::io(self.path, e)
            }
        })
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b, what)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b, what)?;
        Ok(u64::from_le_bytes(b))
    }
}
