//! Exact and 8-bit-quantized L2 nearest-neighbor indexes.
//!
//! [`FlatIndex`] stores raw f32 vectors and scans them exactly; it is the
//! ground truth. [`QuantizedIndex`] compresses each vector to one byte per
//! component with a per-entry min/max scale, trading a bounded per-component
//! reconstruction error (≤ (max−min)/255) for 4x less memory. Both search
//! by exact-arithmetic scan over their stored representation, break distance
//! ties by id, and serialize to the same binary container.
//!
//! Relevance is `clamp(1 − d²/2, 0, 1)`, which equals cosine similarity for
//! unit vectors and maps distance 0 → 1.0 and orthogonality → 0.0.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::embed::EmbeddingVector;

/// Leading bytes of every serialized index.
pub const INDEX_MAGIC: &[u8; 7] = b"RCAIDX1";
/// Current container version.
pub const INDEX_VERSION: u8 = 1;

const KIND_FLAT: u8 = 0;
const KIND_QUANTIZED: u8 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IndexError {
    #[error("cannot build an index from zero vectors")]
    EmptyIndex,
    #[error("duplicate id in index: {0}")]
    DuplicateId(String),
    #[error("vector dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("not an index file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported index version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported index kind byte {0}")]
    UnsupportedKind(u8),
    #[error("index file is truncated")]
    Truncated,
    #[error("index file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("index entry id is not valid UTF-8")]
    InvalidId,
}

/// One search result. `distance` is exact L2 over the index's stored
/// representation; `relevance` is `clamp(1 − d²/2, 0, 1)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchHit {
    pub id: String,
    pub distance: f64,
    pub relevance: f64,
}

/// Cosine-style relevance in [0, 1] from an L2 distance between unit vectors.
pub fn relevance_from_distance(distance: f64) -> Result<f64, IndexError> {
    if distance < 0.0 {
        return Err(IndexError::NegativeDistance(distance));
    }
    Ok((1.0 - distance * distance / 2.0).clamp(0.0, 1.0))
}

fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    let mut sum = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = *x as f64 - *y as f64;
        sum += d * d;
    }
    sum
}

fn rank_hits(
    ids: &[String],
    mut scored: Vec<(usize, f64)>,
    k: usize,
) -> Vec<SearchHit> {
    scored.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then_with(|| ids[a.0].cmp(&ids[b.0])));
    scored
        .into_iter()
        .take(k)
        .map(|(idx, d2)| {
            let distance = libm::sqrt(d2);
            SearchHit {
                id: ids[idx].clone(),
                distance,
                relevance: relevance_from_distance(distance).expect("distance >= 0"),
            }
        })
        .collect()
}

fn unique_id_positions(ids: &[String]) -> Result<BTreeMap<String, usize>, IndexError> {
    let mut by_id = BTreeMap::new();
    for (pos, id) in ids.iter().enumerate() {
        if by_id.insert(id.clone(), pos).is_some() {
            return Err(IndexError::DuplicateId(id.clone()));
        }
    }
    Ok(by_id)
}

/// Exact index over raw f32 vectors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatIndex {
    dimension: usize,
    ids: Vec<String>,
    vectors: Vec<f32>,
    by_id: BTreeMap<String, usize>,
}

/// Build a [`FlatIndex`] from `(id, vector)` pairs. Input order is preserved
/// in the serialized form; ids must be unique and dimensions uniform.
pub fn build_flat_index(pairs: &[(String, EmbeddingVector)]) -> Result<FlatIndex, IndexError> {
    let Some((_, first)) = pairs.first() else {
        return Err(IndexError::EmptyIndex);
    };
    let dimension = first.dimension();
    let mut ids = Vec::with_capacity(pairs.len());
    let mut vectors = Vec::with_capacity(pairs.len() * dimension);
    for (id, vector) in pairs {
        if vector.dimension() != dimension {
            return Err(IndexError::DimensionMismatch {
                expected: dimension,
                actual: vector.dimension(),
            });
        }
        ids.push(id.clone());
        vectors.extend_from_slice(vector.values());
    }
    let by_id = unique_id_positions(&ids)?;
    Ok(FlatIndex {
        dimension,
        ids,
        vectors,
        by_id,
    })
}

impl FlatIndex {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn row(&self, pos: usize) -> &[f32] {
        &self.vectors[pos * self.dimension..(pos + 1) * self.dimension]
    }

    pub fn vector_of(&self, id: &str) -> Option<Vec<f32>> {
        self.by_id.get(id).map(|&pos| self.row(pos).to_vec())
    }

    /// The `min(k, len)` nearest entries by exact L2 distance, ascending,
    /// ties broken by id ascending. Identical to an exhaustive scan.
    pub fn search(&self, query: &[f32], k: usize) -> Result<Vec<SearchHit>, IndexError> {
        if query.len() != self.dimension {
            return Err(IndexError::DimensionMismatch {
                expected: self.dimension,
                actual: query.len(),
            });
        }
        let scored = (0..self.len())
            .map(|pos| (pos, squared_distance(query, self.row(pos))))
            .collect();
        Ok(rank_hits(&self.ids, scored, k))
    }
}

/// Per-entry min/max scalar quantization of a [`FlatIndex`] to u8 codes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedIndex {
    dimension: usize,
    ids: Vec<String>,
    codes: Vec<u8>,
    scales: Vec<(f32, f32)>,
    by_id: BTreeMap<String, usize>,
}

/// Compress every vector to 8-bit codes with a per-entry (min, max) scale.
pub fn quantize(flat: &FlatIndex) -> QuantizedIndex {
    let dimension = flat.dimension;
    let mut codes = Vec::with_capacity(flat.len() * dimension);
    let mut scales = Vec::with_capacity(flat.len());
    for pos in 0..flat.len() {
        let row = flat.row(pos);
        let mut min = f32::INFINITY;
        let mut max = f32::NEG_INFINITY;
        for &v in row {
            min = min.min(v);
            max = max.max(v);
        }
        let range = (max - min) as f64;
        for &v in row {
            let code = if range == 0.0 {
                0
            } else {
                libm::round(((v - min) as f64 / range) * 255.0) as u8
            };
            codes.push(code);
        }
        scales.push((min, max));
    }
    QuantizedIndex {
        dimension,
        ids: flat.ids.clone(),
        codes,
        scales,
        by_id: flat.by_id.clone(),
    }
}

impl QuantizedIndex {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn dequantized_row(&self, pos: usize) -> Vec<f32> {
        let (min, max) = self.scales[pos];
        let step = (max - min) as f64 / 255.0;
        self.codes[pos * self.dimension..(pos + 1) * self.dimension]
            .iter()
            .map(|&code| (min as f64 + code as f64 * step) as f32)
            .collect()
    }

    pub fn vector_of(&self, id: &str) -> Option<Vec<f32>> {
        self.by_id.get(id).map(|&pos| self.dequantized_row(pos))
    }

    /// Nearest entries by L2 distance over the dequantized codes.
    pub fn search(&self, query: &[f32], k: usize) -> Result<Vec<SearchHit>, IndexError> {
        if query.len() != self.dimension {
            return Err(IndexError::DimensionMismatch {
                expected: self.dimension,
                actual: query.len(),
            });
        }
        let scored = (0..self.len())
            .map(|pos| (pos, squared_distance(query, &self.dequantized_row(pos))))
            .collect();
        Ok(rank_hits(&self.ids, scored, k))
    }
}

/// Either index flavor, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexKind {
    Flat(FlatIndex),
    Quantized(QuantizedIndex),
}

impl IndexKind {
    pub fn dimension(&self) -> usize {
        match self {
            IndexKind::Flat(index) => index.dimension(),
            IndexKind::Quantized(index) => index.dimension(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            IndexKind::Flat(index) => index.len(),
            IndexKind::Quantized(index) => index.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> &[String] {
        match self {
            IndexKind::Flat(index) => index.ids(),
            IndexKind::Quantized(index) => index.ids(),
        }
    }

    pub fn contains(&self, id: &str) -> bool {
        match self {
            IndexKind::Flat(index) => index.by_id.contains_key(id),
            IndexKind::Quantized(index) => index.by_id.contains_key(id),
        }
    }

    pub fn vector_of(&self, id: &str) -> Option<Vec<f32>> {
        match self {
            IndexKind::Flat(index) => index.vector_of(id),
            IndexKind::Quantized(index) => index.vector_of(id),
        }
    }

    pub fn search(&self, query: &[f32], k: usize) -> Result<Vec<SearchHit>, IndexError> {
        match self {
            IndexKind::Flat(index) => index.search(query, k),
            IndexKind::Quantized(index) => index.search(query, k),
        }
    }

    /// Distance and relevance between `query` and one stored entry.
    pub fn relevance_of(&self, query: &[f32], id: &str) -> Option<SearchHit> {
        let stored = self.vector_of(id)?;
        if stored.len() != query.len() {
            return None;
        }
        let distance = libm::sqrt(squared_distance(query, &stored));
        Some(SearchHit {
            id: id.to_string(),
            distance,
            relevance: relevance_from_distance(distance).expect("distance >= 0"),
        })
    }
}

// ── Binary container ─────────────────────────────────────────────────────
// magic "RCAIDX1" | u8 version | u8 kind | u32 dimension | u64 count |
// per entry: u32 id_len, id bytes, then either `dimension` f32 values (flat)
// or f32 min, f32 max, `dimension` u8 codes (quantized). Little-endian,
// bit-exact across platforms.

/// Serialize an index to the binary container format.
pub fn encode_index(index: &IndexKind) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(INDEX_MAGIC);
    out.push(INDEX_VERSION);
    match index {
        IndexKind::Flat(flat) => {
            out.push(KIND_FLAT);
            out.extend_from_slice(&(flat.dimension as u32).to_le_bytes());
            out.extend_from_slice(&(flat.len() as u64).to_le_bytes());
            for pos in 0..flat.len() {
                push_id(&mut out, &flat.ids[pos]);
                for &value in flat.row(pos) {
                    out.extend_from_slice(&value.to_le_bytes());
                }
            }
        }
        IndexKind::Quantized(quantized) => {
            out.push(KIND_QUANTIZED);
            out.extend_from_slice(&(quantized.dimension as u32).to_le_bytes());
            out.extend_from_slice(&(quantized.len() as u64).to_le_bytes());
            for pos in 0..quantized.len() {
                push_id(&mut out, &quantized.ids[pos]);
                let (min, max) = quantized.scales[pos];
                out.extend_from_slice(&min.to_le_bytes());
                out.extend_from_slice(&max.to_le_bytes());
                out.extend_from_slice(
                    &quantized.codes[pos * quantized.dimension..(pos + 1) * quantized.dimension],
                );
            }
        }
    }
    out
}

fn push_id(out: &mut Vec<u8>, id: &str) {
    out.extend_from_slice(&(id.len() as u32).to_le_bytes());
    out.extend_from_slice(id.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        if self.pos + n > self.bytes.len() {
            return Err(IndexError::Truncated);
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, IndexError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, IndexError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn id(&mut self) -> Result<String, IndexError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        core::str::from_utf8(bytes)
            .map(|s| s.to_string())
            .map_err(|_| IndexError::InvalidId)
    }
}

/// Parse the binary container format produced by [`encode_index`].
pub fn decode_index(bytes: &[u8]) -> Result<IndexKind, IndexError> {
    let mut reader = Reader { bytes, pos: 0 };
    if reader.take(INDEX_MAGIC.len())? != INDEX_MAGIC {
        return Err(IndexError::BadMagic);
    }
    let version = reader.u8()?;
    if version != INDEX_VERSION {
        return Err(IndexError::UnsupportedVersion(version));
    }
    let kind = reader.u8()?;
    let dimension = reader.u32()? as usize;
    let count = reader.u64()? as usize;
    let index = match kind {
        KIND_FLAT => {
            let mut ids = Vec::with_capacity(count);
            let mut vectors = Vec::with_capacity(count * dimension);
            for _ in 0..count {
                ids.push(reader.id()?);
                for _ in 0..dimension {
                    vectors.push(reader.f32()?);
                }
            }
            let by_id = unique_id_positions(&ids)?;
            IndexKind::Flat(FlatIndex {
                dimension,
                ids,
                vectors,
                by_id,
            })
        }
        KIND_QUANTIZED => {
            let mut ids = Vec::with_capacity(count);
            let mut codes = Vec::with_capacity(count * dimension);
            let mut scales = Vec::with_capacity(count);
            for _ in 0..count {
                ids.push(reader.id()?);
                let min = reader.f32()?;
                let max = reader.f32()?;
                scales.push((min, max));
                codes.extend_from_slice(reader.take(dimension)?);
            }
            let by_id = unique_id_positions(&ids)?;
            IndexKind::Quantized(QuantizedIndex {
                dimension,
                ids,
                codes,
                scales,
                by_id,
            })
        }
        other => return Err(IndexError::UnsupportedKind(other)),
    };
    if reader.pos != bytes.len() {
        return Err(IndexError::TrailingBytes(bytes.len() - reader.pos));
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(dimension: usize, axis: usize) -> EmbeddingVector {
        let mut values = alloc::vec![0.0f64; dimension];
        values[axis] = 1.0;
        EmbeddingVector::from_unnormalized(&values).unwrap()
    }

    fn basis_index() -> FlatIndex {
        build_flat_index(&[
            ("a".to_string(), basis(3, 0)),
            ("b".to_string(), basis(3, 1)),
            ("c".to_string(), basis(3, 2)),
        ])
        .unwrap()
    }

    #[test]
    fn build_counts_entries() {
        assert_eq!(basis_index().len(), 3);
    }

    #[test]
    fn build_rejects_duplicate_ids() {
        let err = build_flat_index(&[
            ("a".to_string(), basis(3, 0)),
            ("a".to_string(), basis(3, 1)),
        ])
        .unwrap_err();
        assert_eq!(err, IndexError::DuplicateId("a".to_string()));
    }

    #[test]
    fn build_rejects_mixed_dimensions() {
        let err = build_flat_index(&[
            ("a".to_string(), basis(3, 0)),
            ("b".to_string(), basis(4, 1)),
        ])
        .unwrap_err();
        assert!(matches!(err, IndexError::DimensionMismatch { .. }));
    }

    #[test]
    fn build_rejects_empty_input() {
        assert_eq!(build_flat_index(&[]).unwrap_err(), IndexError::EmptyIndex);
    }

    #[test]
    fn search_orders_by_distance_then_id() {
        let index = basis_index();
        let hits = index.search(basis(3, 0).values(), 2).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].id, "a");
        assert!(hits[0].distance.abs() < 1e-9);
        assert!((hits[0].relevance - 1.0).abs() < 1e-9);
        // b and c are both at sqrt(2); the id tie-break picks b.
        assert_eq!(hits[1].id, "b");
        assert!((hits[1].distance - core::f64::consts::SQRT_2).abs() < 1e-6);
        assert!(hits[1].relevance.abs() < 1e-6);
    }

    #[test]
    fn search_k_zero_and_k_beyond_len() {
        let index = basis_index();
        assert!(index.search(basis(3, 0).values(), 0).unwrap().is_empty());
        assert_eq!(index.search(basis(3, 0).values(), 10).unwrap().len(), 3);
    }

    #[test]
    fn search_rejects_dimension_mismatch() {
        let index = basis_index();
        assert!(matches!(
            index.search(&[1.0, 0.0], 1),
            Err(IndexError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn relevance_endpoints() {
        assert_eq!(relevance_from_distance(0.0).unwrap(), 1.0);
        assert!((relevance_from_distance(core::f64::consts::SQRT_2).unwrap()).abs() < 1e-12);
        // Antipodal unit vectors clamp to zero.
        assert_eq!(relevance_from_distance(2.0).unwrap(), 0.0);
        assert!(matches!(
            relevance_from_distance(-0.1),
            Err(IndexError::NegativeDistance(_))
        ));
    }

    #[test]
    fn relevance_is_monotone_non_increasing() {
        let mut last = 1.0;
        for step in 0..=20 {
            let d = step as f64 * 0.1;
            let r = relevance_from_distance(d).unwrap();
            assert!(r <= last);
            last = r;
        }
    }

    #[test]
    fn quantize_preserves_count_and_bounds_error() {
        let pairs: Vec<(String, EmbeddingVector)> = (0..20)
            .map(|i| {
                let values: Vec<f64> = (0..8)
                    .map(|j| ((i * 31 + j * 17) % 13) as f64 - 6.0)
                    .collect();
                (alloc::format!("v{i:02}"), EmbeddingVector::from_unnormalized(&values).unwrap())
            })
            .collect();
        let flat = build_flat_index(&pairs).unwrap();
        let quantized = quantize(&flat);
        assert_eq!(quantized.len(), flat.len());
        for (id, vector) in &pairs {
            let original = vector.values();
            let restored = quantized.vector_of(id).unwrap();
            let min = original.iter().cloned().fold(f32::INFINITY, f32::min);
            let max = original.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
            let bound = ((max - min) / 255.0) as f64 + 1e-9;
            for (o, r) in original.iter().zip(&restored) {
                assert!(
                    ((*o as f64) - (*r as f64)).abs() <= bound,
                    "component error above quantization step"
                );
            }
        }
    }

    #[test]
    fn quantized_top1_matches_flat_on_separated_data() {
        let flat = basis_index();
        let quantized = quantize(&flat);
        for axis in 0..3 {
            let query = basis(3, axis);
            let flat_top = &flat.search(query.values(), 1).unwrap()[0];
            let quant_top = &quantized.search(query.values(), 1).unwrap()[0];
            assert_eq!(flat_top.id, quant_top.id);
        }
    }

    #[test]
    fn codec_round_trips_both_kinds() {
        let flat = basis_index();
        for index in [
            IndexKind::Flat(flat.clone()),
            IndexKind::Quantized(quantize(&flat)),
        ] {
            let bytes = encode_index(&index);
            let decoded = decode_index(&bytes).unwrap();
            assert_eq!(decoded, index);
        }
    }

    #[test]
    fn codec_rejects_bad_magic() {
        let mut bytes = encode_index(&IndexKind::Flat(basis_index()));
        bytes[0] = b'X';
        assert_eq!(decode_index(&bytes).unwrap_err(), IndexError::BadMagic);
    }

    #[test]
    fn codec_rejects_unknown_version() {
        let mut bytes = encode_index(&IndexKind::Flat(basis_index()));
        bytes[7] = 99;
        assert_eq!(
            decode_index(&bytes).unwrap_err(),
            IndexError::UnsupportedVersion(99)
        );
    }

    #[test]
    fn codec_rejects_truncation_and_trailing_bytes() {
        let bytes = encode_index(&IndexKind::Flat(basis_index()));
        assert_eq!(
            decode_index(&bytes[..bytes.len() - 3]).unwrap_err(),
            IndexError::Truncated
        );
        let mut padded = bytes.clone();
        padded.extend_from_slice(&[0, 0]);
        assert_eq!(
            decode_index(&padded).unwrap_err(),
            IndexError::TrailingBytes(2)
        );
    }

    #[test]
    fn relevance_of_known_entry() {
        let index = IndexKind::Flat(basis_index());
        let hit = index.relevance_of(basis(3, 0).values(), "a").unwrap();
        assert!((hit.relevance - 1.0).abs() < 1e-9);
        assert!(index.relevance_of(basis(3, 0).values(), "zz").is_none());
    }
}
