//! Normalized evaluation metrics feeding the QUBO coefficients: thumb scores
//! from manipulability, finger scores with a DoF penalty, and per-pair
//! normalized thumb-finger overlap volumes.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, DesignCandidate, Finger};
use crate::error::{Error, Result};
use crate::kinematics::global_manipulability;
use crate::workspace::{overlap_volume, reachable_voxels, sample_joint_grid};

/// Key for a (thumb, finger) pair in the overlap maps, e.g. `"t3:m6"`.
pub fn pair_key(thumb_id: &str, finger_id: &str) -> String {
    format!("{thumb_id}:{finger_id}")
}

/// Raw and normalized per-candidate scores plus thumb-finger overlaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTable {
    /// Global manipulability per candidate id (M_T, M_F).
    pub raw_manipulability: BTreeMap<String, f64>,
    /// Actuated DoF per candidate id.
    pub dof: BTreeMap<String, u32>,
    /// Raw overlap voxel counts per "thumb:finger" pair key.
    pub raw_overlap: BTreeMap<String, u64>,
    /// Normalized thumb scores in [0, 1].
    pub thumb_score: BTreeMap<String, f64>,
    /// Finger scores in [-0.5, 0.5] (manipulability reward minus DoF cost).
    pub finger_score: BTreeMap<String, f64>,
    /// Normalized overlaps in [0, 1] per "thumb:finger" pair key.
    pub norm_overlap: BTreeMap<String, f64>,
    /// Maximum achievable hand DoF used in the DoF normalization.
    pub d_h: u32,
    /// Joint-grid resolution the table was computed at (rad).
    pub resolution: f64,
    /// Voxel edge length the overlaps were computed at.
    pub voxel_size: f64,
}

/// Divides every value by the family maximum, mapping the family into [0, 1]
/// with max = 1. A family whose maximum is zero normalizes to all zeros (with
/// a warning) rather than dividing by zero.
pub fn normalize_family(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        log::warn!("family maximum is zero; normalized values set to 0");
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| v / max).collect()
}

/// 0.5 * m_norm - 0.5 * dof / d_h.
pub fn finger_score(m_norm: f64, dof: u32, d_h: u32) -> Result<f64> {
    if dof > d_h {
        return Err(Error::InvalidInput(format!(
            "dof {dof} exceeds maximum hand DoF {d_h}"
        )));
    }
    if d_h == 0 {
        return Err(Error::InvalidInput("d_h must be at least 1".into()));
    }
    Ok(0.5 * m_norm - 0.5 * dof as f64 / d_h as f64)
}

/// Maximum achievable hand DoF over all feasible one-hot combinations, with
/// each physical palm joint counted once at hand level.
pub fn max_hand_dof(catalog: &Catalog) -> u32 {
    let families: Vec<Vec<_>> = Finger::ALL
        .iter()
        .map(|&f| catalog.family(f).collect::<Vec<_>>())
        .collect();
    let mut best = 0u32;
    // Odometer over one candidate per non-empty family.
    let sizes: Vec<usize> = families.iter().map(|f| f.len().max(1)).collect();
    let total: usize = sizes.iter().product();
    for mut idx in 0..total {
        let mut picks = Vec::with_capacity(5);
        for (fam, &size) in families.iter().zip(&sizes).rev() {
            let k = idx % size;
            idx /= size;
            picks.push(fam.get(k));
        }
        picks.reverse();
        let ring = picks[3].copied();
        let little = picks[4].copied();
        if let (Some(r), Some(l)) = (ring, little) {
            if r.palm_mr != l.palm_mr {
                continue;
            }
        }
        let mut dof = 0u32;
        let mut palm_mr = false;
        let mut palm_rl = false;
        for cand in picks.into_iter().flatten() {
            dof += (cand.dof_count - cand.palm_joint_count()) as u32;
            palm_mr |= cand.palm_mr;
            palm_rl |= cand.palm_rl;
        }
        dof += palm_mr as u32 + palm_rl as u32;
        best = best.max(dof);
    }
    best
}

/// Evaluates manipulability and overlap for every candidate and pair, then
/// normalizes into QUBO-ready scores.
pub fn evaluate_catalog(
    catalog: &Catalog,
    resolution: f64,
    voxel_size: f64,
    d_h_override: Option<u32>,
) -> Result<EvaluationTable> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidInput(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    if !(voxel_size > 0.0) {
        return Err(Error::InvalidInput(format!(
            "voxel_size must be positive, got {voxel_size}"
        )));
    }

    // Per-candidate sweeps: global manipulability and reachable voxel set.
    let per_candidate: Vec<Result<_>> = catalog
        .candidates
        .par_iter()
        .map(|cand| {
            let grid = sample_joint_grid(cand.chain.joint_limits(), resolution)?;
            let w_g = global_manipulability(&cand.chain, &grid)?;
            let voxels = reachable_voxels(&cand.chain, &grid, voxel_size)?;
            Ok((cand.id.clone(), w_g, voxels))
        })
        .collect();

    let mut raw_manipulability = BTreeMap::new();
    let mut dof = BTreeMap::new();
    let mut voxel_sets = BTreeMap::new();
    for res in per_candidate {
        let (id, w_g, voxels) = res?;
        raw_manipulability.insert(id.clone(), w_g);
        voxel_sets.insert(id, voxels);
    }
    for cand in &catalog.candidates {
        dof.insert(cand.id.clone(), cand.dof_count as u32);
    }

    let mut raw_overlap = BTreeMap::new();
    for thumb in catalog.family(Finger::Thumb) {
        let tv = &voxel_sets[&thumb.id];
        for cand in &catalog.candidates {
            if cand.finger == Finger::Thumb {
                continue;
            }
            let o = overlap_volume(tv, &voxel_sets[&cand.id])?;
            raw_overlap.insert(pair_key(&thumb.id, &cand.id), o as u64);
        }
    }

    let d_h = d_h_override.unwrap_or_else(|| max_hand_dof(catalog));

    // Thumb scores: self-normalized manipulability.
    let mut thumb_score = BTreeMap::new();
    let thumb_ids: Vec<&str> = catalog.family(Finger::Thumb).map(|c| c.id.as_str()).collect();
    let thumb_raw: Vec<f64> = thumb_ids.iter().map(|id| raw_manipulability[*id]).collect();
    for (id, s) in thumb_ids.iter().zip(normalize_family(&thumb_raw)) {
        thumb_score.insert(id.to_string(), s);
    }

    // Finger scores: per-family normalized manipulability minus DoF cost.
    let mut fscore = BTreeMap::new();
    for &family in &[Finger::Index, Finger::Middle, Finger::Ring, Finger::Little] {
        let cands: Vec<&DesignCandidate> = catalog.family(family).collect();
        let raw: Vec<f64> = cands.iter().map(|c| raw_manipulability[&c.id]).collect();
        for (cand, m_norm) in cands.iter().zip(normalize_family(&raw)) {
            fscore.insert(
                cand.id.clone(),
                finger_score(m_norm, cand.dof_count as u32, d_h)?,
            );
        }
    }

    // Overlap normalization, independent per thumb-family block.
    let mut norm_overlap = BTreeMap::new();
    for &family in &[Finger::Index, Finger::Middle, Finger::Ring, Finger::Little] {
        let keys: Vec<String> = catalog
            .family(Finger::Thumb)
            .flat_map(|t| catalog.family(family).map(move |f| pair_key(&t.id, &f.id)))
            .collect();
        let fam_max = keys.iter().map(|k| raw_overlap[k]).max().unwrap_or(0);
        if fam_max == 0 {
            log::warn!("family {family:?} has no thumb overlap anywhere; norm_overlap set to 0");
        }
        for k in keys {
            let v = if fam_max > 0 {
                raw_overlap[&k] as f64 / fam_max as f64
            } else {
                0.0
            };
            norm_overlap.insert(k, v);
        }
    }

    Ok(EvaluationTable {
        raw_manipulability,
        dof,
        raw_overlap,
        thumb_score,
        finger_score: fscore,
        norm_overlap,
        d_h,
        resolution,
        voxel_size,
    })
}

impl EvaluationTable {
    /// Normalized score for any candidate id (thumb or finger).
    pub fn score(&self, id: &str) -> Option<f64> {
        self.thumb_score
            .get(id)
            .or_else(|| self.finger_score.get(id))
            .copied()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// CSV of the raw per-candidate metrics.
    pub fn write_raw_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "id,dof,raw_manipulability,score")?;
        for (id, m) in &self.raw_manipulability {
            writeln!(
                w,
                "{id},{},{:?},{:?}",
                self.dof[id],
                m,
                self.score(id).unwrap_or(f64::NAN)
            )?;
        }
        writeln!(w, "pair,raw_overlap,norm_overlap")?;
        for (k, o) in &self.raw_overlap {
            writeln!(w, "{k},{o},{:?}", self.norm_overlap[k])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_catalog, HandParameters};
    use approx::assert_relative_eq;

    #[test]
    fn finger_score_arithmetic() {
        // Max manipulability with maximal DoF cancels to zero.
        assert_relative_eq!(finger_score(1.0, 23, 23).unwrap(), 0.0);
        assert_relative_eq!(
            finger_score(1.0, 4, 23).unwrap(),
            0.5 - 2.0 / 23.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            finger_score(0.0, 4, 23).unwrap(),
            -2.0 / 23.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn finger_score_rejects_dof_above_dh() {
        assert!(finger_score(1.0, 24, 23).is_err());
    }

    #[test]
    fn max_hand_dof_default_catalog() {
        let cat = build_catalog(&HandParameters::default()).unwrap();
        // 5 (thumb) + 4 * 4 (fingers) + 2 (palms, counted once) = 23.
        assert_eq!(max_hand_dof(&cat), 23);
    }

    #[test]
    fn max_hand_dof_without_palms() {
        let mut cat = build_catalog(&HandParameters::default()).unwrap();
        cat.candidates.retain(|c| !c.palm_mr && !c.palm_rl);
        assert_eq!(max_hand_dof(&cat), 21);
    }

    #[test]
    fn max_hand_dof_degenerate_catalog() {
        let mut cat = build_catalog(&HandParameters::default()).unwrap();
        cat.candidates
            .retain(|c| ["t1", "i2", "m2", "r2", "l2"].contains(&c.id.as_str()));
        // 5 + 3 + 3 + 3 + 3, no palms.
        assert_eq!(max_hand_dof(&cat), 17);
    }
}
