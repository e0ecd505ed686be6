//! The 27-candidate design catalog: 7 thumb, 2 index, 6 middle, 4 ring, and
//! 8 little finger variants, each carrying its kinematic chain and limits.
//!
//! Lengths are normalized hand-length units (total hand length = 1). Fingers
//! extend along +y from the palm line; lateral offsets run along +z at 0,
//! a_w, 2a_w, 3a_w for index/middle/ring/little. The thumb is rooted at the
//! base origin. Palm pivots sit at 1.5a_w (middle-ring) and 2.5a_w
//! (ring-little).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{DhRow, KinematicChain};

/// Finger families, in variable-layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
}

impl Finger {
    pub const ALL: [Finger; 5] = [
        Finger::Thumb,
        Finger::Index,
        Finger::Middle,
        Finger::Ring,
        Finger::Little,
    ];

    /// Number of design candidates in this family.
    pub fn variant_count(self) -> usize {
        match self {
            Finger::Thumb => 7,
            Finger::Index => 2,
            Finger::Middle => 6,
            Finger::Ring => 4,
            Finger::Little => 8,
        }
    }

    pub fn prefix(self) -> char {
        match self {
            Finger::Thumb => 't',
            Finger::Index => 'i',
            Finger::Middle => 'm',
            Finger::Ring => 'r',
            Finger::Little => 'l',
        }
    }

    pub fn id(self, variant: usize) -> String {
        format!("{}{}", self.prefix(), variant)
    }
}

/// Normalized kinematic parameters of the hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HandParameters {
    pub d_a: f64,
    pub l_3d1: f64,
    pub l_3d2: f64,
    pub l_3d3: f64,
    pub l_2d1: f64,
    pub l_2d2: f64,
    pub l_t: f64,
    pub l_t1: f64,
    pub a_w: f64,
    /// Middle-finger mount heights, strictly increasing in steps of 0.05.
    pub d_w_steps: Vec<f64>,
}

impl Default for HandParameters {
    fn default() -> Self {
        Self {
            d_a: 0.46,
            l_3d1: 0.18,
            l_3d2: 0.18,
            l_3d3: 0.18,
            l_2d1: 0.27,
            l_2d2: 0.27,
            l_t: 0.60,
            l_t1: 0.10,
            a_w: 0.18,
            d_w_steps: vec![0.46, 0.51, 0.56],
        }
    }
}

impl HandParameters {
    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("d_a", self.d_a),
            ("l_3d1", self.l_3d1),
            ("l_3d2", self.l_3d2),
            ("l_3d3", self.l_3d3),
            ("l_2d1", self.l_2d1),
            ("l_2d2", self.l_2d2),
            ("l_t", self.l_t),
            ("l_t1", self.l_t1),
            ("a_w", self.a_w),
        ];
        for (name, v) in lengths {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be a positive length, got {v}"
                )));
            }
        }
        let total = self.d_a + self.l_3d1 + self.l_3d2 + self.l_3d3;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "d_a + l_3d1 + l_3d2 + l_3d3 must equal 1, got {total}"
            )));
        }
        if self.d_w_steps.is_empty() {
            return Err(Error::InvalidInput("d_w_steps must not be empty".into()));
        }
        for pair in self.d_w_steps.windows(2) {
            if (pair[1] - pair[0] - 0.05).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "d_w_steps must increase in steps of 0.05, got {} -> {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }
}

/// One of the 27 finger design variants.
#[derive(Debug, Clone)]
pub struct DesignCandidate {
    pub id: String,
    pub finger: Finger,
    /// 1-based index within the finger family.
    pub variant: usize,
    pub chain: KinematicChain,
    /// Actuated joints in the chain (palm joints included).
    pub dof_count: usize,
    /// Palm DoF between middle and ring present in this chain.
    pub palm_mr: bool,
    /// Palm DoF between ring and little present in this chain.
    pub palm_rl: bool,
    pub meta: String,
}

impl DesignCandidate {
    /// Palm joints contained in this candidate's chain.
    pub fn palm_joint_count(&self) -> usize {
        self.palm_mr as usize + self.palm_rl as usize
    }
}

/// The full design catalog plus the parameters it was built from.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub candidates: Vec<DesignCandidate>,
    pub parameters: HandParameters,
}

impl Catalog {
    pub fn get(&self, id: &str) -> Option<&DesignCandidate> {
        self.candidates.iter().find(|c| c.id == id)
    }

    pub fn family(&self, finger: Finger) -> impl Iterator<Item = &DesignCandidate> {
        self.candidates.iter().filter(move |c| c.finger == finger)
    }
}

/// Thumb segment length ratios for variants t1..t7, in order.
pub const THUMB_RATIOS: [(u32, u32, u32); 7] = [
    (1, 1, 1),
    (2, 1, 1),
    (1, 2, 1),
    (1, 1, 2),
    (2, 2, 1),
    (2, 1, 2),
    (1, 2, 2),
];

/// Splits the total thumb length over three segments in the given ratio.
pub fn thumb_segment_lengths(ratio: (u32, u32, u32), l_t: f64) -> Result<(f64, f64, f64)> {
    let (a, b, c) = ratio;
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::InvalidInput(format!(
            "ratio entries must be positive, got {ratio:?}"
        )));
    }
    if !(l_t > 0.0 && l_t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "thumb length must be positive, got {l_t}"
        )));
    }
    let sum = (a + b + c) as f64;
    Ok((
        l_t * a as f64 / sum,
        l_t * b as f64 / sum,
        l_t * c as f64 / sum,
    ))
}

// Ranges of motion (Tables 5-6 of the underlying kinematic model).
const THUMB_LIMITS: [(f64, f64); 5] = [
    (0.0, PI / 2.0),
    (-PI / 2.0, 0.0),
    (-PI / 6.0, PI / 6.0),
    (-PI / 2.0, 0.0),
    (-PI / 2.0, 0.0),
];
const AA_LIMIT: (f64, f64) = (-PI / 12.0, PI / 12.0);
const FE1_LIMIT: (f64, f64) = (-PI / 2.0, PI / 9.0);
const FE_LIMIT: (f64, f64) = (-PI / 2.0, 0.0);
const PALM_MR_LIMIT: (f64, f64) = (0.0, PI / 9.0);
const PALM_RL_LIMIT: (f64, f64) = (0.0, PI / 6.0);

fn thumb_chain(params: &HandParameters, ratio: (u32, u32, u32)) -> Result<KinematicChain> {
    let (l_t2, l_t3, l_t4) = thumb_segment_lengths(ratio, params.l_t)?;
    let rows = vec![
        DhRow::actuated(-PI / 3.0, 0.0, 0.0, 0.0, 0),
        DhRow::actuated(-PI / 2.0, params.l_t1, 0.0, 0.0, 1),
        DhRow::actuated(PI / 2.0, l_t2, 0.0, 0.0, 2),
        DhRow::actuated(-PI / 2.0, 0.0, 0.0, 0.0, 3),
        DhRow::actuated(0.0, l_t3, 0.0, 0.0, 4),
        DhRow::fixed(0.0, l_t4, 0.0, 0.0),
    ];
    KinematicChain::new(rows, THUMB_LIMITS.to_vec())
}

/// Finger chain without palm joints: A/A then up to three F/E joints.
/// 3-DoF variants keep the distal segment but freeze its joint at 0.
fn plain_finger_chain(
    params: &HandParameters,
    lateral: f64,
    mount: f64,
    four_dof: bool,
) -> Result<KinematicChain> {
    let distal = if four_dof {
        DhRow::actuated(0.0, params.l_3d2, 0.0, 0.0, 3)
    } else {
        DhRow::fixed(0.0, params.l_3d2, 0.0, 0.0)
    };
    let rows = vec![
        DhRow::fixed(0.0, 0.0, lateral, PI / 2.0),
        DhRow::actuated(PI / 2.0, mount, 0.0, 0.0, 0),
        DhRow::actuated(-PI / 2.0, 0.0, 0.0, 0.0, 1),
        DhRow::actuated(0.0, params.l_3d1, 0.0, 0.0, 2),
        distal,
        DhRow::fixed(0.0, params.l_3d3, 0.0, 0.0),
    ];
    let mut limits = vec![AA_LIMIT, FE1_LIMIT, FE_LIMIT];
    if four_dof {
        limits.push(FE_LIMIT);
    }
    KinematicChain::new(rows, limits)
}

/// Finger chain reached through one or two palm pivots. `legs` lists the
/// lateral leg lengths; a leg with `Some(limit)` carries a palm joint.
fn palm_finger_chain(
    params: &HandParameters,
    legs: &[(f64, Option<(f64, f64)>)],
    four_dof: bool,
) -> Result<KinematicChain> {
    let mut rows = vec![DhRow::fixed(-PI / 2.0, 0.0, 0.0, -PI / 2.0)];
    let mut limits = Vec::new();
    let mut joint = 0usize;
    let (last, pivots) = legs.split_last().expect("at least one leg");
    for &(a, palm) in pivots {
        let limit = palm.expect("interior legs carry palm joints");
        rows.push(DhRow::actuated(0.0, a, 0.0, 0.0, joint));
        limits.push(limit);
        joint += 1;
    }
    rows.push(DhRow::fixed(0.0, last.0, params.d_a, 0.0));
    rows.push(DhRow::actuated(-PI / 2.0, 0.0, 0.0, -PI / 2.0, joint));
    limits.push(AA_LIMIT);
    rows.push(DhRow::actuated(-PI / 2.0, 0.0, 0.0, 0.0, joint + 1));
    limits.push(FE1_LIMIT);
    rows.push(DhRow::actuated(0.0, params.l_3d1, 0.0, 0.0, joint + 2));
    limits.push(FE_LIMIT);
    if four_dof {
        rows.push(DhRow::actuated(0.0, params.l_3d2, 0.0, 0.0, joint + 3));
        limits.push(FE_LIMIT);
    } else {
        rows.push(DhRow::fixed(0.0, params.l_3d2, 0.0, 0.0));
    }
    rows.push(DhRow::fixed(0.0, params.l_3d3, 0.0, 0.0));
    KinematicChain::new(rows, limits)
}

/// Builds the full 27-candidate catalog.
pub fn build_catalog(params: &HandParameters) -> Result<Catalog> {
    params.validate()?;
    let aw = params.a_w;
    let mut candidates = Vec::with_capacity(27);

    for (v, &ratio) in THUMB_RATIOS.iter().enumerate() {
        let chain = thumb_chain(params, ratio)?;
        candidates.push(DesignCandidate {
            id: Finger::Thumb.id(v + 1),
            finger: Finger::Thumb,
            variant: v + 1,
            dof_count: chain.joint_count(),
            chain,
            palm_mr: false,
            palm_rl: false,
            meta: format!("segment ratio {}:{}:{}", ratio.0, ratio.1, ratio.2),
        });
    }

    for (v, four_dof) in [(1, true), (2, false)] {
        let chain = plain_finger_chain(params, 0.0, params.d_a, four_dof)?;
        candidates.push(DesignCandidate {
            id: Finger::Index.id(v),
            finger: Finger::Index,
            variant: v,
            dof_count: chain.joint_count(),
            chain,
            palm_mr: false,
            palm_rl: false,
            meta: format!("{} DoF", if four_dof { 4 } else { 3 }),
        });
    }

    // Middle variants pair mount height with DoF count:
    // m1=(d_w[0],4), m2=(d_w[0],3), m3=(d_w[1],4), ...
    let mut v = 1;
    for &d_w in &params.d_w_steps {
        for four_dof in [true, false] {
            let chain = plain_finger_chain(params, aw, d_w, four_dof)?;
            candidates.push(DesignCandidate {
                id: Finger::Middle.id(v),
                finger: Finger::Middle,
                variant: v,
                dof_count: chain.joint_count(),
                chain,
                palm_mr: false,
                palm_rl: false,
                meta: format!("d_w={d_w}, {} DoF", if four_dof { 4 } else { 3 }),
            });
            v += 1;
        }
    }

    for (v, four_dof, palm_mr) in [
        (1, true, false),
        (2, false, false),
        (3, true, true),
        (4, false, true),
    ] {
        let chain = if palm_mr {
            palm_finger_chain(
                params,
                &[(1.5 * aw, Some(PALM_MR_LIMIT)), (0.5 * aw, None)],
                four_dof,
            )?
        } else {
            plain_finger_chain(params, 2.0 * aw, params.d_a, four_dof)?
        };
        candidates.push(DesignCandidate {
            id: Finger::Ring.id(v),
            finger: Finger::Ring,
            variant: v,
            dof_count: chain.joint_count(),
            chain,
            palm_mr,
            palm_rl: false,
            meta: format!(
                "{} DoF finger{}",
                if four_dof { 4 } else { 3 },
                if palm_mr { ", palm MR" } else { "" }
            ),
        });
    }

    for (v, four_dof, palm_mr, palm_rl) in [
        (1, true, false, false),
        (2, false, false, false),
        (3, true, true, false),
        (4, false, true, false),
        (5, true, false, true),
        (6, false, false, true),
        (7, true, true, true),
        (8, false, true, true),
    ] {
        let chain = match (palm_mr, palm_rl) {
            (false, false) => plain_finger_chain(params, 3.0 * aw, params.d_a, four_dof)?,
            (true, false) => palm_finger_chain(
                params,
                &[(1.5 * aw, Some(PALM_MR_LIMIT)), (1.5 * aw, None)],
                four_dof,
            )?,
            (false, true) => palm_finger_chain(
                params,
                &[(2.5 * aw, Some(PALM_RL_LIMIT)), (0.5 * aw, None)],
                four_dof,
            )?,
            (true, true) => palm_finger_chain(
                params,
                &[
                    (1.5 * aw, Some(PALM_MR_LIMIT)),
                    (aw, Some(PALM_RL_LIMIT)),
                    (0.5 * aw, None),
                ],
                four_dof,
            )?,
        };
        candidates.push(DesignCandidate {
            id: Finger::Little.id(v),
            finger: Finger::Little,
            variant: v,
            dof_count: chain.joint_count(),
            chain,
            palm_mr,
            palm_rl,
            meta: format!(
                "{} DoF finger, palms: MR={palm_mr} RL={palm_rl}",
                if four_dof { 4 } else { 3 }
            ),
        });
    }

    Ok(Catalog {
        candidates,
        parameters: params.clone(),
    })
}

/// Ring-little structural compatibility: both sides must agree on the
/// presence of the middle-ring palm DoF.
pub fn compatibility(ring_variant: usize, little_variant: usize) -> Result<bool> {
    if !(1..=4).contains(&ring_variant) {
        return Err(Error::InvalidInput(format!(
            "ring variant out of range: {ring_variant}"
        )));
    }
    if !(1..=8).contains(&little_variant) {
        return Err(Error::InvalidInput(format!(
            "little variant out of range: {little_variant}"
        )));
    }
    let ring_palm_mr = ring_variant >= 3;
    let little_palm_mr = matches!(little_variant, 3 | 4 | 7 | 8);
    Ok(ring_palm_mr == little_palm_mr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::kinematics::forward_kinematics;

    fn catalog() -> Catalog {
        build_catalog(&HandParameters::default()).unwrap()
    }

    #[test]
    fn equal_ratio_split() {
        let (a, b, c) = thumb_segment_lengths((1, 1, 1), 0.60).unwrap();
        assert_relative_eq!(a, 0.20, epsilon = 1e-15);
        assert_relative_eq!(b, 0.20, epsilon = 1e-15);
        assert_relative_eq!(c, 0.20, epsilon = 1e-15);
    }

    #[test]
    fn two_one_one_split() {
        let (a, b, c) = thumb_segment_lengths((2, 1, 1), 0.60).unwrap();
        assert_relative_eq!(a, 0.30, epsilon = 1e-15);
        assert_relative_eq!(b, 0.15, epsilon = 1e-15);
        assert_relative_eq!(c, 0.15, epsilon = 1e-15);
    }

    #[test]
    fn one_two_two_split() {
        let (a, b, c) = thumb_segment_lengths((1, 2, 2), 0.60).unwrap();
        assert_relative_eq!(a, 0.12, epsilon = 1e-15);
        assert_relative_eq!(b, 0.24, epsilon = 1e-15);
        assert_relative_eq!(c, 0.24, epsilon = 1e-15);
    }

    #[test]
    fn zero_ratio_rejected() {
        assert!(thumb_segment_lengths((0, 1, 1), 0.60).is_err());
    }

    #[test]
    fn counts_per_family() {
        let cat = catalog();
        assert_eq!(cat.candidates.len(), 27);
        let counts: Vec<usize> = Finger::ALL
            .iter()
            .map(|&f| cat.family(f).count())
            .collect();
        assert_eq!(counts, vec![7, 2, 6, 4, 8]);
    }

    #[test]
    fn ids_unique() {
        let cat = catalog();
        let mut ids: Vec<&str> = cat.candidates.iter().map(|c| c.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 27);
    }

    #[test]
    fn thumbs_have_five_dof() {
        let cat = catalog();
        for c in cat.family(Finger::Thumb) {
            assert_eq!(c.dof_count, 5, "{}", c.id);
        }
    }

    #[test]
    fn l7_has_six_dof() {
        let cat = catalog();
        assert_eq!(cat.get("l7").unwrap().dof_count, 6);
    }

    #[test]
    fn dof_count_matches_chain() {
        for c in &catalog().candidates {
            assert_eq!(c.dof_count, c.chain.joint_count(), "{}", c.id);
        }
    }

    #[test]
    fn palm_flags_match_the_catalog_table() {
        let cat = catalog();
        for c in cat.family(Finger::Ring) {
            assert_eq!(c.palm_mr, c.variant >= 3, "{}", c.id);
            assert!(!c.palm_rl);
        }
        for c in cat.family(Finger::Little) {
            assert_eq!(c.palm_mr, matches!(c.variant, 3 | 4 | 7 | 8), "{}", c.id);
            assert_eq!(c.palm_rl, matches!(c.variant, 5 | 6 | 7 | 8), "{}", c.id);
        }
    }

    #[test]
    fn thumb_segments_total_for_all_variants() {
        for &ratio in &THUMB_RATIOS {
            let (a, b, c) = thumb_segment_lengths(ratio, 0.60).unwrap();
            assert_relative_eq!(a + b + c, 0.60, epsilon = 1e-12);
        }
    }

    #[test]
    fn middle_finger_straight_length() {
        // All joints at zero: the three F/E segments are collinear, so the
        // fingertip sits l_3d1+l_3d2+l_3d3 = 0.54 beyond the MCP point.
        let cat = catalog();
        let c = cat.get("m1").unwrap();
        let p = forward_kinematics(&c.chain, &[0.0; 4]).unwrap();
        let mcp = nalgebra::Vector3::new(0.0, 0.46, 0.18);
        assert_relative_eq!((p - mcp).norm(), 0.54, epsilon = 1e-12);
    }

    #[test]
    fn lateral_layout() {
        // At the all-zero configuration every finger points along +y; the
        // z component is the lateral base offset.
        let cat = catalog();
        let aw = 0.18;
        for (id, dof, lateral) in [
            ("i1", 4, 0.0),
            ("m1", 4, aw),
            ("r1", 4, 2.0 * aw),
            ("r3", 5, 2.0 * aw),
            ("l1", 4, 3.0 * aw),
            ("l3", 5, 3.0 * aw),
            ("l5", 5, 3.0 * aw),
            ("l7", 6, 3.0 * aw),
        ] {
            let c = cat.get(id).unwrap();
            let p = forward_kinematics(&c.chain, &vec![0.0; dof]).unwrap();
            assert_relative_eq!(p.x, 0.0, epsilon = 1e-12);
            assert_relative_eq!(p.y, 1.0, epsilon = 1e-12);
            assert_relative_eq!(p.z, lateral, epsilon = 1e-12);
        }
    }

    #[test]
    fn compatibility_rule() {
        assert!(compatibility(1, 5).unwrap());
        assert!(!compatibility(1, 3).unwrap());
        assert!(compatibility(4, 8).unwrap());
        assert!(compatibility(2, 1).unwrap());
        assert!(!compatibility(3, 6).unwrap());
    }

    #[test]
    fn compatibility_half_of_pairs() {
        let mut count = 0;
        for r in 1..=4 {
            for l in 1..=8 {
                if compatibility(r, l).unwrap() {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 16);
    }

    #[test]
    fn compatibility_range_checked() {
        assert!(compatibility(0, 1).is_err());
        assert!(compatibility(1, 9).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mut p = HandParameters::default();
        p.d_a = 0.5;
        assert!(build_catalog(&p).is_err());
        let mut p = HandParameters::default();
        p.d_w_steps = vec![0.46, 0.52];
        assert!(build_catalog(&p).is_err());
    }
}
