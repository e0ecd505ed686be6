//! Assembly of the 27-variable upper-triangular QUBO matrix and evaluation /
//! decoding of binary assignments.
//!
//! Layout: v = [t1..t7, i1, i2, m1..m6, r1..r4, l1..l8]. Diagonal entries are
//! -score - lambda_group; within-group pairs carry +2*lambda_group from the
//! one-hot penalty expansion; thumb-finger pairs carry -norm_overlap; the 16
//! incompatible ring-little pairs carry +lambda_rl. The constant sum of
//! lambdas from expanding the one-hot squares is excluded from the quadratic
//! form and reported separately as `constant_offset`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::{compatibility, Finger};
use crate::error::{Error, Result};
use crate::metrics::{pair_key, EvaluationTable};

/// One-hot and interaction penalty coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltyConfig {
    pub lambda_t: f64,
    pub lambda_i: f64,
    pub lambda_m: f64,
    pub lambda_r: f64,
    pub lambda_l: f64,
    pub lambda_rl: f64,
}

impl Default for PenaltyConfig {
    /// Twice the candidate count per family; ring-little interaction is the
    /// sum of the two family penalties.
    fn default() -> Self {
        Self {
            lambda_t: 14.0,
            lambda_i: 4.0,
            lambda_m: 12.0,
            lambda_r: 8.0,
            lambda_l: 16.0,
            lambda_rl: 24.0,
        }
    }
}

impl PenaltyConfig {
    pub fn lambda(&self, finger: Finger) -> f64 {
        match finger {
            Finger::Thumb => self.lambda_t,
            Finger::Index => self.lambda_i,
            Finger::Middle => self.lambda_m,
            Finger::Ring => self.lambda_r,
            Finger::Little => self.lambda_l,
        }
    }

    pub fn sum(&self) -> f64 {
        self.lambda_t + self.lambda_i + self.lambda_m + self.lambda_r + self.lambda_l
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_t", self.lambda_t),
            ("lambda_i", self.lambda_i),
            ("lambda_m", self.lambda_m),
            ("lambda_r", self.lambda_r),
            ("lambda_l", self.lambda_l),
            ("lambda_rl", self.lambda_rl),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// The 27 candidate ids in vector order with contiguous family ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableLayout {
    order: Vec<String>,
}

impl VariableLayout {
    /// The canonical layout [t1..t7, i1, i2, m1..m6, r1..r4, l1..l8].
    pub fn standard() -> Self {
        let mut order = Vec::with_capacity(27);
        for f in Finger::ALL {
            for v in 1..=f.variant_count() {
                order.push(f.id(v));
            }
        }
        Self { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.order.iter().position(|o| o == id)
    }

    /// 0-based index range of a finger family in the vector.
    pub fn group_range(&self, finger: Finger) -> std::ops::Range<usize> {
        let mut start = 0;
        for f in Finger::ALL {
            let len = f.variant_count();
            if f == finger {
                return start..start + len;
            }
            start += len;
        }
        unreachable!()
    }

    pub fn group_of(&self, index: usize) -> Finger {
        for f in Finger::ALL {
            if self.group_range(f).contains(&index) {
                return f;
            }
        }
        panic!("index {index} out of layout range");
    }

    /// 1-based variant number of a variable index within its family.
    pub fn variant_of(&self, index: usize) -> usize {
        let f = self.group_of(index);
        index - self.group_range(f).start + 1
    }
}

impl Default for VariableLayout {
    fn default() -> Self {
        Self::standard()
    }
}

/// A binary assignment over the 27 design variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    bits: Vec<u8>,
}

impl Assignment {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidInput("assignment bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    /// Builds an assignment from a bitmask, bit p of `mask` = variable p.
    pub fn from_mask(mask: u32, n: usize) -> Self {
        Self {
            bits: (0..n).map(|p| ((mask >> p) & 1) as u8).collect(),
        }
    }

    pub fn to_mask(&self) -> u32 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |m, (p, &b)| m | ((b as u32) << p))
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn set(&mut self, p: usize, v: u8) {
        self.bits[p] = v;
    }

    /// Bit string with variable 0 leftmost, e.g. "0001000010000010100000010".
    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        let bits: Result<Vec<u8>> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect();
        Ok(Self { bits: bits? })
    }

    /// Ids of the selected variables under `layout`.
    pub fn selected_ids<'a>(&self, layout: &'a VariableLayout) -> Vec<&'a str> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(p, _)| layout.order()[p].as_str())
            .collect()
    }
}

/// Upper-triangular QUBO coefficients with the layout and dropped constant.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    pub diag: Vec<f64>,
    /// Strictly upper-triangular entries, keyed (p, q) with p < q.
    pub offdiag: BTreeMap<(usize, usize), f64>,
    pub layout: VariableLayout,
    /// The constant sum of lambdas dropped from the quadratic form.
    pub constant_offset: f64,
    pub penalties: PenaltyConfig,
    /// Grid resolution and voxel size the coefficients were computed at.
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub resolution: f64,
    pub voxel_size: f64,
}

impl QuboMatrix {
    pub fn n(&self) -> usize {
        self.diag.len()
    }
}

/// Assembles the QUBO matrix from an evaluation table and penalty config.
pub fn build_qubo(
    table: &EvaluationTable,
    penalties: &PenaltyConfig,
    layout: &VariableLayout,
) -> Result<QuboMatrix> {
    penalties.validate()?;
    let n = layout.len();
    let mut diag = Vec::with_capacity(n);
    for p in 0..n {
        let id = &layout.order()[p];
        let score = table
            .score(id)
            .ok_or_else(|| Error::MissingEntry(format!("score for {id}")))?;
        diag.push(-score - penalties.lambda(layout.group_of(p)));
    }

    let mut offdiag = BTreeMap::new();
    // One-hot cross terms: +2 lambda on every within-group pair.
    for f in Finger::ALL {
        let range = layout.group_range(f);
        let lam = penalties.lambda(f);
        for p in range.clone() {
            for q in p + 1..range.end {
                offdiag.insert((p, q), 2.0 * lam);
            }
        }
    }
    // Overlap rewards: -norm_overlap on every thumb-finger pair.
    let thumbs = layout.group_range(Finger::Thumb);
    for p in thumbs.clone() {
        for q in thumbs.end..n {
            let key = pair_key(&layout.order()[p], &layout.order()[q]);
            let o = table
                .norm_overlap
                .get(&key)
                .ok_or_else(|| Error::MissingEntry(format!("overlap for {key}")))?;
            offdiag.insert((p, q), -o);
        }
    }
    // Structural penalty on the incompatible ring-little pairs.
    let rings = layout.group_range(Finger::Ring);
    let littles = layout.group_range(Finger::Little);
    for p in rings {
        for q in littles.clone() {
            if !compatibility(layout.variant_of(p), layout.variant_of(q))? {
                offdiag.insert((p, q), penalties.lambda_rl);
            }
        }
    }

    Ok(QuboMatrix {
        diag,
        offdiag,
        layout: layout.clone(),
        constant_offset: penalties.sum(),
        penalties: *penalties,
        provenance: Provenance {
            resolution: table.resolution,
            voxel_size: table.voxel_size,
        },
    })
}

/// The quadratic form over the stored coefficients (constant excluded).
pub fn objective(q: &QuboMatrix, a: &Assignment) -> Result<f64> {
    if a.len() != q.n() {
        return Err(Error::DimensionMismatch(format!(
            "assignment has {} bits, matrix has {} variables",
            a.len(),
            q.n()
        )));
    }
    let bits = a.bits();
    let mut obj = 0.0;
    for (p, &b) in bits.iter().enumerate() {
        if b == 1 {
            obj += q.diag[p];
        }
    }
    for (&(p, r), &v) in &q.offdiag {
        if bits[p] == 1 && bits[r] == 1 {
            obj += v;
        }
    }
    Ok(obj)
}

/// Per-finger selection decoded from an assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Selected variant ids per finger, in family order.
    pub selected: BTreeMap<Finger, Vec<String>>,
    /// Exactly one variant selected in every group.
    pub one_hot_ok: bool,
    /// Ring-little compatibility of the selected pair (vacuously true when
    /// either group violates one-hot).
    pub pairwise_ok: bool,
}

/// Reads the selected variants and constraint flags out of a bit vector.
pub fn decode(a: &Assignment, layout: &VariableLayout) -> SelectionReport {
    let mut selected: BTreeMap<Finger, Vec<String>> = BTreeMap::new();
    for f in Finger::ALL {
        let ids = layout
            .group_range(f)
            .filter(|&p| a.bits()[p] == 1)
            .map(|p| layout.order()[p].clone())
            .collect();
        selected.insert(f, ids);
    }
    let one_hot_ok = selected.values().all(|v| v.len() == 1);
    let ring_ok = selected[&Finger::Ring].len() == 1;
    let little_ok = selected[&Finger::Little].len() == 1;
    let pairwise_ok = if ring_ok && little_ok {
        let rp = layout.index_of(&selected[&Finger::Ring][0]).unwrap();
        let lp = layout.index_of(&selected[&Finger::Little][0]).unwrap();
        compatibility(layout.variant_of(rp), layout.variant_of(lp)).unwrap_or(false)
    } else {
        true
    };
    SelectionReport {
        selected,
        one_hot_ok,
        pairwise_ok,
    }
}

// --- serialization ---------------------------------------------------------

/// JSON document for external samplers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuboFile {
    pub layout: Vec<String>,
    pub diag: Vec<f64>,
    pub offdiag: Vec<CooEntry>,
    pub constant_offset: f64,
    pub penalties: PenaltyConfig,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CooEntry {
    pub p: usize,
    pub q: usize,
    pub value: f64,
}

impl QuboMatrix {
    pub fn to_file(&self) -> QuboFile {
        QuboFile {
            layout: self.layout.order().to_vec(),
            diag: self.diag.clone(),
            offdiag: self
                .offdiag
                .iter()
                .map(|(&(p, q), &value)| CooEntry { p, q, value })
                .collect(),
            constant_offset: self.constant_offset,
            penalties: self.penalties,
            provenance: self.provenance,
        }
    }

    pub fn from_file(file: &QuboFile) -> Result<Self> {
        let layout = VariableLayout {
            order: file.layout.clone(),
        };
        if file.diag.len() != layout.len() {
            return Err(Error::Parse(format!(
                "diagonal has {} entries for {} variables",
                file.diag.len(),
                layout.len()
            )));
        }
        let mut offdiag = BTreeMap::new();
        for e in &file.offdiag {
            if e.p >= e.q || e.q >= layout.len() {
                return Err(Error::Parse(format!(
                    "off-diagonal entry ({}, {}) is not strictly upper-triangular",
                    e.p, e.q
                )));
            }
            offdiag.insert((e.p, e.q), e.value);
        }
        Ok(Self {
            diag: file.diag.clone(),
            offdiag,
            layout,
            constant_offset: file.constant_offset,
            penalties: file.penalties,
            provenance: file.provenance,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }

    /// Plain-text COO export: header then one "p q value" line per entry,
    /// 0-based, p <= q, diagonal entries as p = q. The `{:?}` float format
    /// is shortest-round-trip, so re-parsing reproduces the exact bits.
    pub fn write_coo<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# qubo n={} offset={:?}",
            self.n(),
            self.constant_offset
        )?;
        let mut buf = String::new();
        for (p, &v) in self.diag.iter().enumerate() {
            buf.clear();
            writeln!(buf, "{p} {p} {v:?}").expect("string write");
            w.write_all(buf.as_bytes())?;
        }
        for (&(p, q), &v) in &self.offdiag {
            buf.clear();
            writeln!(buf, "{p} {q} {v:?}").expect("string write");
            w.write_all(buf.as_bytes())?;
        }
        Ok(())
    }

    /// Parses the COO text format back into coefficients. The layout cannot
    /// be recovered from COO, so the standard layout is assumed.
    pub fn read_coo(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty COO file".into()))?;
        let mut n = None;
        let mut offset = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("n=") {
                n = Some(v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?);
            } else if let Some(v) = tok.strip_prefix("offset=") {
                offset = Some(v.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
            }
        }
        let n = n.ok_or_else(|| Error::Parse("COO header missing n=".into()))?;
        let offset = offset.ok_or_else(|| Error::Parse("COO header missing offset=".into()))?;
        let layout = VariableLayout::standard();
        if layout.len() != n {
            return Err(Error::Parse(format!(
                "COO declares n={n}, expected {}",
                layout.len()
            )));
        }
        let mut diag = vec![0.0; n];
        let mut offdiag = BTreeMap::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse(format!(
                    "expected 3 fields on line {}, got {}",
                    lineno + 2,
                    toks.len()
                )));
            }
            let p: usize = toks[0].parse().map_err(|e: std::num::ParseIntError| Error::Parse(e.to_string()))?;
            let q: usize = toks[1].parse().map_err(|e: std::num::ParseIntError| Error::Parse(e.to_string()))?;
            let v: f64 = toks[2].parse().map_err(|e: std::num::ParseFloatError| Error::Parse(e.to_string()))?;
            if p > q || q >= n {
                return Err(Error::Parse(format!(
                    "entry ({p}, {q}) on line {} out of range",
                    lineno + 2
                )));
            }
            if p == q {
                diag[p] = v;
            } else {
                offdiag.insert((p, q), v);
            }
        }
        Ok(Self {
            diag,
            offdiag,
            layout,
            constant_offset: offset,
            penalties: PenaltyConfig::default(),
            provenance: Provenance {
                resolution: f64::NAN,
                voxel_size: f64::NAN,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_group_ranges() {
        let layout = VariableLayout::standard();
        assert_eq!(layout.len(), 27);
        assert_eq!(layout.group_range(Finger::Thumb), 0..7);
        assert_eq!(layout.group_range(Finger::Index), 7..9);
        assert_eq!(layout.group_range(Finger::Middle), 9..15);
        assert_eq!(layout.group_range(Finger::Ring), 15..19);
        assert_eq!(layout.group_range(Finger::Little), 19..27);
        assert_eq!(layout.order()[0], "t1");
        assert_eq!(layout.order()[26], "l8");
        assert_eq!(layout.variant_of(15), 1);
        assert_eq!(layout.variant_of(26), 8);
    }

    #[test]
    fn assignment_roundtrip() {
        let a = Assignment::from_mask(0b101, 27);
        assert_eq!(a.bits()[0], 1);
        assert_eq!(a.bits()[1], 0);
        assert_eq!(a.bits()[2], 1);
        let s = a.to_bitstring();
        assert_eq!(Assignment::from_bitstring(&s).unwrap(), a);
        assert_eq!(a.to_mask(), 0b101);
    }

    #[test]
    fn assignment_rejects_non_binary() {
        assert!(Assignment::new(vec![0, 2, 1]).is_err());
    }

    fn select(layout: &VariableLayout, ids: &[&str]) -> Assignment {
        let mut a = Assignment::zeros(layout.len());
        for id in ids {
            a.set(layout.index_of(id).unwrap(), 1);
        }
        a
    }

    #[test]
    fn decode_feasible_selection() {
        let layout = VariableLayout::standard();
        let a = select(&layout, &["t4", "i1", "m6", "r2", "l2"]);
        let rep = decode(&a, &layout);
        assert!(rep.one_hot_ok);
        assert!(rep.pairwise_ok);
        assert_eq!(rep.selected[&Finger::Thumb], vec!["t4"]);
    }

    #[test]
    fn decode_one_hot_violation() {
        let layout = VariableLayout::standard();
        let a = select(&layout, &["t1", "t2", "i1", "m1", "r1", "l1"]);
        let rep = decode(&a, &layout);
        assert!(!rep.one_hot_ok);
    }

    #[test]
    fn decode_pairwise_violation() {
        let layout = VariableLayout::standard();
        let a = select(&layout, &["t1", "i1", "m1", "r1", "l3"]);
        let rep = decode(&a, &layout);
        assert!(rep.one_hot_ok);
        assert!(!rep.pairwise_ok);
    }

    #[test]
    fn objective_of_empty_assignment_is_zero() {
        let layout = VariableLayout::standard();
        let q = QuboMatrix {
            diag: vec![-1.0; 27],
            offdiag: BTreeMap::new(),
            layout,
            constant_offset: 54.0,
            penalties: PenaltyConfig::default(),
            provenance: Provenance {
                resolution: 0.1,
                voxel_size: 0.05,
            },
        };
        let a = Assignment::zeros(27);
        assert_eq!(objective(&q, &a).unwrap(), 0.0);
        let b = Assignment::from_mask(1, 27);
        assert_eq!(objective(&q, &b).unwrap(), -1.0);
    }

    #[test]
    fn objective_rejects_length_mismatch() {
        let layout = VariableLayout::standard();
        let q = QuboMatrix {
            diag: vec![0.0; 27],
            offdiag: BTreeMap::new(),
            layout,
            constant_offset: 54.0,
            penalties: PenaltyConfig::default(),
            provenance: Provenance {
                resolution: 0.1,
                voxel_size: 0.05,
            },
        };
        assert!(objective(&q, &Assignment::zeros(5)).is_err());
    }
}
