//! Little-endian binary artifacts.
//!
//! Every file starts with a four-byte magic and a `u32` version. Strings are
//! a `u32` byte length followed by UTF-8.
//!
//! | magic  | content |
//! |--------|---------|
//! | `GEMB` | dim, \|V\|, vocabulary (token, `u64` count), input then output matrix as `f32` |
//! | `GFEA` | count, F, records (image feature id, `f32` × F) |
//! | `GNCX` | count, dim, records (caption id, `f32` × dim); also used for place bases |
//! | `GHED` | kind byte, F, D, normalize byte, `f32` weights (F×D row-major), `f32` bias, `u64` axes digest |
//! | `GIDX` | space byte, dim, count, `u64` head digest, axis labels (place space only), records (post id, `f64` × dim) |

use std::fs;
use std::path::Path;

use geoembed_core::embedhead::{EmbeddingHead, ImageFeatureStore, TargetKind, TargetSet};
use geoembed_core::gazetteer::Axes;
use geoembed_core::neighctx::NeighborhoodBasis;
use geoembed_core::retrieval::{EmbeddingIndex, IndexSpace};
use geoembed_core::word2vec::{Vocabulary, WordEmbeddings};

use crate::error::{Error, Result};

pub const VERSION: u32 = 1;

/// A value with a binary file representation.
pub trait Artifact: Sized {
    const MAGIC: [u8; 4];

    fn encode_body(&self, out: &mut Vec<u8>);

    fn decode_body(r: &mut Reader<'_>) -> Result<Self, String>;

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&Self::MAGIC);
        put_u32(&mut out, VERSION);
        self.encode_body(&mut out);
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self, String> {
        let mut r = Reader { buf: bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != Self::MAGIC {
            return Err(format!(
                "bad magic {:?}, expected {}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(&Self::MAGIC)
            ));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(format!("unsupported version {version}"));
        }
        let value = Self::decode_body(&mut r)?;
        if r.pos != bytes.len() {
            return Err(format!("{} trailing bytes", bytes.len() - r.pos));
        }
        Ok(value)
    }
}

pub fn save<A: Artifact>(path: impl AsRef<Path>, value: &A) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, value.encode()).map_err(|e| Error::io(path, e))
}

pub fn load<A: Artifact>(path: impl AsRef<Path>) -> Result<A> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    A::decode(&bytes).map_err(|msg| Error::format(path, msg))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_len(out: &mut Vec<u8>, n: usize) {
    put_u32(out, u32::try_from(n).expect("length fits in u32"));
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_len(out, s.len());
    out.extend_from_slice(s.as_bytes());
}

fn put_f32s(out: &mut Vec<u8>, values: impl IntoIterator<Item = f32>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let bytes = &self.buf[self.pos..end];
        self.pos = end;
        Ok(bytes)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], String> {
        Ok(self.take(N)?.try_into().expect("slice has length N"))
    }

    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, String> {
        self.array().map(u32::from_le_bytes)
    }

    fn len(&mut self) -> Result<usize, String> {
        Ok(self.u32()? as usize)
    }

    fn u64(&mut self) -> Result<u64, String> {
        self.array().map(u64::from_le_bytes)
    }

    fn string(&mut self) -> Result<String, String> {
        let n = self.len()?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| format!("invalid UTF-8 before byte {}", self.pos))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, String> {
        let bytes = self.take(n.checked_mul(4).ok_or("matrix size overflows")?)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, String> {
        let bytes = self.take(n.checked_mul(8).ok_or("matrix size overflows")?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    /// Rejects counts that cannot fit in the remaining bytes before allocating.
    fn bounded(&mut self, per_item: usize) -> Result<usize, String> {
        let n = self.len()?;
        if n.saturating_mul(per_item) > self.buf.len() - self.pos {
            return Err(format!("count {n} exceeds file size"));
        }
        Ok(n)
    }
}

impl Artifact for WordEmbeddings {
    const MAGIC: [u8; 4] = *b"GEMB";

    fn encode_body(&self, out: &mut Vec<u8>) {
        put_len(out, self.dim());
        put_len(out, self.vocab().len());
        for (t, &c) in self.vocab().tokens().iter().zip(self.vocab().counts()) {
            put_str(out, t);
            out.extend_from_slice(&c.to_le_bytes());
        }
        put_f32s(out, self.input().iter().copied());
        put_f32s(out, self.output().iter().copied());
    }

    fn decode_body(r: &mut Reader<'_>) -> Result<Self, String> {
        let dim = r.len()?;
        let n = r.bounded(12)?;
        let mut tokens = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        for _ in 0..n {
            tokens.push(r.string()?);
            counts.push(r.u64()?);
        }
        let input = r.f32s(n * dim)?;
        let output = r.f32s(n * dim)?;
        let min_count = counts.iter().copied().min().unwrap_or(0);
        let vocab = Vocabulary::from_parts(tokens, counts, min_count).map_err(|e| e.to_string())?;
        WordEmbeddings::new(vocab, dim, input, output, None).map_err(|e| e.to_string())
    }
}

fn encode_table<T: Copy>(table: &geoembed_core::embedhead::VectorTable<T>, out: &mut Vec<u8>, f: impl Fn(T) -> f32) {
    put_len(out, table.len());
    put_len(out, table.dim());
    for (id, row) in table.iter() {
        put_str(out, id);
        put_f32s(out, row.iter().map(|&x| f(x)));
    }
}

type Records = Vec<(String, Vec<f32>)>;

fn decode_records(r: &mut Reader<'_>) -> Result<(usize, Records), String> {
    let n = r.bounded(4)?;
    let dim = r.len()?;
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let id = r.string()?;
        records.push((id, r.f32s(dim)?));
    }
    Ok((dim, records))
}

impl Artifact for ImageFeatureStore {
    const MAGIC: [u8; 4] = *b"GFEA";

    fn encode_body(&self, out: &mut Vec<u8>) {
        encode_table(self, out, |x| x);
    }

    fn decode_body(r: &mut Reader<'_>) -> Result<Self, String> {
        let (dim, records) = decode_records(r)?;
        let mut store = ImageFeatureStore::new(dim);
        for (id, v) in records {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(format!("non-finite feature for `{id}`"));
            }
            store.insert(id, &v).map_err(|e| e.to_string())?;
        }
        Ok(store)
    }
}

/// Targets are computed in `f64` and stored as `f32`.
impl Artifact for TargetSet {
    const MAGIC: [u8; 4] = *b"GNCX";

    fn encode_body(&self, out: &mut Vec<u8>) {
        encode_table(self, out, |x| x as f32);
    }

    fn decode_body(r: &mut Reader<'_>) -> Result<Self, String> {
        let (dim, records) = decode_records(r)?;
        let mut set = TargetSet::new(dim);
        for (id, v) in records {
            let wide: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
            set.insert(id, &wide).map_err(|e| e.to_string())?;
        }
        Ok(set)
    }
}

/// Place bases share the target layout: record ids are axis labels.
pub fn basis_to_table(basis: &NeighborhoodBasis) -> TargetSet {
    let mut t = TargetSet::new(basis.dim());
    for (j, label) in basis.axes().labels().iter().enumerate() {
        t.insert(label.clone(), basis.unit_row(j)).expect("axis labels are unique");
    }
    t
}

pub fn table_to_basis(table: &TargetSet) -> Result<NeighborhoodBasis> {
    let axes = Axes::new(table.ids().to_vec())?;
    let flat: Vec<f64> = table.iter().flat_map(|(_, row)| row.iter().copied()).collect();
    Ok(NeighborhoodBasis::from_vectors(axes, table.dim(), &flat)?)
}

impl Artifact for EmbeddingHead {
    const MAGIC: [u8; 4] = *b"GHED";

    fn encode_body(&self, out: &mut Vec<u8>) {
        out.push(match self.kind {
            TargetKind::NeighCtx => 0,
            TargetKind::Word => 1,
        });
        put_len(out, self.input_dim);
        put_len(out, self.output_dim);
        out.push(u8::from(self.normalize));
        put_f32s(out, self.weights.iter().map(|&w| w as f32));
        put_f32s(out, self.bias.iter().map(|&b| b as f32));
        out.extend_from_slice(&self.axes_digest.to_le_bytes());
    }

    fn decode_body(r: &mut Reader<'_>) -> Result<Self, String> {
        let kind = match r.u8()? {
            0 => TargetKind::NeighCtx,
            1 => TargetKind::Word,
            k => return Err(format!("unknown target kind byte {k}")),
        };
        let (f, d) = (r.len()?, r.len()?);
        let normalize = match r.u8()? {
            0 => false,
            1 => true,
            b => return Err(format!("bad normalization flag {b}")),
        };
        let mut head = EmbeddingHead::zeros(kind, f, d, normalize);
        head.weights = r.f32s(f.checked_mul(d).ok_or("head size overflows")?)?.into_iter().map(f64::from).collect();
        head.bias = r.f32s(d)?.into_iter().map(f64::from).collect();
        head.axes_digest = r.u64()?;
        head.validate().map_err(|e| e.to_string())?;
        Ok(head)
    }
}

impl Artifact for EmbeddingIndex {
    const MAGIC: [u8; 4] = *b"GIDX";

    fn encode_body(&self, out: &mut Vec<u8>) {
        out.push(match self.space {
            IndexSpace::NeighCtx(_) => 0,
            IndexSpace::Word { .. } => 1,
        });
        put_len(out, self.dim());
        put_len(out, self.len());
        out.extend_from_slice(&self.head_digest.to_le_bytes());
        if let IndexSpace::NeighCtx(axes) = &self.space {
            for label in axes.labels() {
                put_str(out, label);
            }
        }
        for (i, id) in self.ids.iter().enumerate() {
            put_str(out, id);
            for v in self.row(i) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }

    fn decode_body(r: &mut Reader<'_>) -> Result<Self, String> {
        let space_byte = r.u8()?;
        let dim = r.len()?;
        let n = r.bounded(4)?;
        let digest = r.u64()?;
        let space = match space_byte {
            0 => {
                let labels = (0..dim).map(|_| r.string()).collect::<Result<Vec<_>, _>>()?;
                IndexSpace::NeighCtx(Axes::new(labels).map_err(|e| e.to_string())?)
            }
            1 => IndexSpace::Word { dim },
            b => return Err(format!("unknown index space byte {b}")),
        };
        let mut ids = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n * dim);
        for _ in 0..n {
            ids.push(r.string()?);
            rows.extend(r.f64s(dim)?);
        }
        EmbeddingIndex::new(space, ids, rows, digest).map_err(|e| e.to_string())
    }
}
