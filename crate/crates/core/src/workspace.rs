//! Joint-range discretization, reachable fingertip point sets, voxelization,
//! and overlap volumes.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics_unchecked, KinematicChain};

/// Per-joint sample lists with a common angular step.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGrid {
    axes: Vec<Vec<f64>>,
    resolution: f64,
}

impl JointGrid {
    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn joint_count(&self) -> usize {
        self.axes.len()
    }

    /// Total number of configurations (product of axis lengths).
    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the configuration at lexicographic index `idx` (last axis
    /// fastest) into `q`.
    pub fn config_at(&self, mut idx: usize, q: &mut [f64]) {
        debug_assert_eq!(q.len(), self.axes.len());
        for (k, axis) in self.axes.iter().enumerate().rev() {
            q[k] = axis[idx % axis.len()];
            idx /= axis.len();
        }
    }

    /// Iterates configurations in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| {
            let mut q = vec![0.0; self.joint_count()];
            self.config_at(i, &mut q);
            q
        })
    }
}

/// Uniform samples over each joint range, endpoints included.
///
/// When the range is not an integer multiple of `resolution` the max endpoint
/// is appended; a degenerate range (min = max) yields a single sample.
pub fn sample_joint_grid(limits: &[(f64, f64)], resolution: f64) -> Result<JointGrid> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let mut axes = Vec::with_capacity(limits.len());
    for &(lo, hi) in limits {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInput(format!("invalid joint range [{lo}, {hi}]")));
        }
        let span = hi - lo;
        let steps = span / resolution;
        // Ranges that are exact multiples of the resolution (all catalog
        // ranges are) must land exactly on the max endpoint.
        let whole = (steps - steps.round()).abs() < 1e-9;
        let k_max = if whole { steps.round() as usize } else { steps.floor() as usize };
        let mut axis: Vec<f64> = (0..=k_max).map(|k| lo + k as f64 * resolution).collect();
        if whole {
            *axis.last_mut().unwrap() = hi;
        } else if axis.last().copied().unwrap_or(lo) < hi {
            axis.push(hi);
        }
        axes.push(axis);
    }
    Ok(JointGrid { axes, resolution })
}

/// A set of occupied voxel cells at a fixed edge length.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet {
    voxel_size: f64,
    cells: HashSet<[i64; 3]>,
}

impl VoxelSet {
    pub fn new(voxel_size: f64) -> Result<Self> {
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "voxel size must be positive, got {voxel_size}"
            )));
        }
        Ok(Self {
            voxel_size,
            cells: HashSet::new(),
        })
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn cells(&self) -> &HashSet<[i64; 3]> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell index of a world point: floor division anchored at the base-frame
    /// origin, so boundary points belong to the higher-index cell.
    pub fn cell_of(&self, p: &[f64; 3]) -> [i64; 3] {
        [
            (p[0] / self.voxel_size).floor() as i64,
            (p[1] / self.voxel_size).floor() as i64,
            (p[2] / self.voxel_size).floor() as i64,
        ]
    }

    pub fn insert_point(&mut self, p: &[f64; 3]) {
        let cell = self.cell_of(p);
        self.cells.insert(cell);
    }

    /// Dumps cells as CSV, one `x,y,z` integer triple per line, sorted.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut cells: Vec<_> = self.cells.iter().collect();
        cells.sort();
        for c in cells {
            writeln!(w, "{},{},{}", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

/// Raw fingertip positions over every grid configuration, lexicographic order.
pub fn fingertip_points(chain: &KinematicChain, grid: &JointGrid) -> Result<Vec<[f64; 3]>> {
    if grid.joint_count() != chain.joint_count() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} axes, chain has {} joints",
            grid.joint_count(),
            chain.joint_count()
        )));
    }
    let mut q = vec![0.0; chain.joint_count()];
    let mut points = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        grid.config_at(idx, &mut q);
        let p = forward_kinematics_unchecked(chain, &q);
        points.push([p.x, p.y, p.z]);
    }
    Ok(points)
}

/// Dumps fingertip positions as CSV, one `x,y,z` line per configuration.
pub fn write_points_csv<W: Write>(points: &[[f64; 3]], mut w: W) -> Result<()> {
    for p in points {
        writeln!(w, "{:?},{:?},{:?}", p[0], p[1], p[2])?;
    }
    Ok(())
}

/// Deduplicated voxel cells reachable by the fingertip over `grid`.
pub fn reachable_voxels(
    chain: &KinematicChain,
    grid: &JointGrid,
    voxel_size: f64,
) -> Result<VoxelSet> {
    if grid.joint_count() != chain.joint_count() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} axes, chain has {} joints",
            grid.joint_count(),
            chain.joint_count()
        )));
    }
    let proto = VoxelSet::new(voxel_size)?;
    let total = grid.len();
    if total == 0 {
        return Err(Error::InvalidInput("empty joint grid".into()));
    }
    const CHUNK: usize = 8192;
    let n_chunks = total.div_ceil(CHUNK);
    let cells = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut q = vec![0.0; chain.joint_count()];
            let mut local = HashSet::new();
            for idx in c * CHUNK..total.min((c + 1) * CHUNK) {
                grid.config_at(idx, &mut q);
                let p = forward_kinematics_unchecked(chain, &q);
                local.insert(proto.cell_of(&[p.x, p.y, p.z]));
            }
            local
        })
        .reduce(HashSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    Ok(VoxelSet { voxel_size, cells })
}

/// Number of voxels reachable by both sets.
pub fn overlap_volume(a: &VoxelSet, b: &VoxelSet) -> Result<usize> {
    if a.voxel_size != b.voxel_size {
        return Err(Error::DimensionMismatch(format!(
            "voxel sizes differ: {} vs {}",
            a.voxel_size, b.voxel_size
        )));
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    Ok(small.cells.iter().filter(|c| large.cells.contains(*c)).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn thumb_flexion_axis_has_19_samples() {
        let grid = sample_joint_grid(&[(0.0, PI / 2.0)], PI / 36.0).unwrap();
        assert_eq!(grid.axes()[0].len(), 19);
        assert_eq!(*grid.axes()[0].last().unwrap(), PI / 2.0);
    }

    #[test]
    fn symmetric_axis_has_13_samples() {
        let grid = sample_joint_grid(&[(-PI / 6.0, PI / 6.0)], PI / 36.0).unwrap();
        assert_eq!(grid.axes()[0].len(), 13);
    }

    #[test]
    fn degenerate_axis_is_a_single_sample() {
        let grid = sample_joint_grid(&[(0.3, 0.3)], 0.7).unwrap();
        assert_eq!(grid.axes()[0], vec![0.3]);
    }

    #[test]
    fn non_multiple_range_appends_endpoint() {
        let grid = sample_joint_grid(&[(0.0, 0.25)], 0.1).unwrap();
        assert_eq!(grid.axes()[0].len(), 4);
        assert_eq!(*grid.axes()[0].last().unwrap(), 0.25);
    }

    #[test]
    fn nonpositive_resolution_rejected() {
        assert!(sample_joint_grid(&[(0.0, 1.0)], 0.0).is_err());
        assert!(sample_joint_grid(&[(0.0, 1.0)], -0.1).is_err());
    }

    #[test]
    fn config_order_is_lexicographic() {
        let grid = sample_joint_grid(&[(0.0, 1.0), (0.0, 2.0)], 1.0).unwrap();
        let configs: Vec<_> = grid.iter().collect();
        assert_eq!(
            configs,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, 2.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![1.0, 2.0],
            ]
        );
    }

    #[test]
    fn self_overlap_is_cardinality() {
        let mut a = VoxelSet::new(0.05).unwrap();
        a.insert_point(&[0.01, 0.02, 0.03]);
        a.insert_point(&[0.2, 0.2, 0.2]);
        a.insert_point(&[-0.1, 0.0, 0.0]);
        assert_eq!(overlap_volume(&a, &a).unwrap(), a.len());
    }

    #[test]
    fn disjoint_sets_overlap_zero() {
        let mut a = VoxelSet::new(0.05).unwrap();
        let mut b = VoxelSet::new(0.05).unwrap();
        a.insert_point(&[0.0, 0.0, 0.0]);
        b.insert_point(&[1.0, 1.0, 1.0]);
        assert_eq!(overlap_volume(&a, &b).unwrap(), 0);
    }

    #[test]
    fn mismatched_voxel_size_rejected() {
        let a = VoxelSet::new(0.05).unwrap();
        let b = VoxelSet::new(0.1).unwrap();
        assert!(overlap_volume(&a, &b).is_err());
    }

    #[test]
    fn boundary_point_goes_to_higher_cell() {
        let a = VoxelSet::new(0.05).unwrap();
        assert_eq!(a.cell_of(&[0.05, -0.05, 0.0]), [1, -1, 0]);
    }
}
