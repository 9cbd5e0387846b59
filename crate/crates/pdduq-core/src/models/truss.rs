//! Linear-static analysis of small 2D pin-jointed trusses by direct stiffness
//! assembly and dense Cholesky factorization.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Geometry, supports, loads, and allowables of a pin-jointed truss.
///
/// Units are consistent pounds/inches/psi throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrussModel {
    /// Node coordinates `[x, y]`.
    pub nodes: Vec<[f64; 2]>,
    /// Member connectivity as node index pairs (0-based).
    pub members: Vec<[usize; 2]>,
    /// `(node, fix_x, fix_y)` constraints.
    pub supports: Vec<(usize, bool, bool)>,
    /// `(node, fx, fy)` applied loads.
    pub loads: Vec<(usize, f64, f64)>,
    pub elastic_modulus: f64,
    pub d_allow: f64,
    pub sigma_allow: f64,
}

/// Solution summary of one truss analysis.
#[derive(Debug, Clone)]
pub struct TrussResponse {
    /// Maximum absolute vertical displacement over all nodes.
    pub v_max: f64,
    /// Maximum absolute axial stress over all members.
    pub sigma_max: f64,
    /// Displacement margin `1 - |v_max| / d_allow`.
    pub y1: f64,
    /// Stress margin `1 - |sigma_max| / sigma_allow`.
    pub y2: f64,
    /// Nodal displacements, `2 * n_nodes` entries.
    pub displacements: Vec<f64>,
    /// Axial stress per member (tension positive).
    pub stresses: Vec<f64>,
    /// Residual `K u - f`, nonzero only at constrained dofs (reactions).
    pub reactions: Vec<f64>,
}

/// Panel height of the default six-bay geometry. The published figure is not
/// recoverable from text, so this reconstruction uses six equal 20 in bays
/// over a 120 in span with the height picked to put the initial-design
/// response margins in the intended working range.
pub const SIX_BAY_HEIGHT: f64 = 24.0;

impl TrussModel {
    /// Default reconstruction of the six-bay, twenty-one-bar bridge truss:
    /// simply supported at the extreme bottom nodes, five loaded bottom
    /// nodes, members grouped as bottom chords (1-6), top chord path
    /// including inclined end posts (7-12), verticals (13-17), and interior
    /// diagonals (18-21).
    pub fn six_bay_default() -> Self {
        let bay = 20.0;
        let h = SIX_BAY_HEIGHT;
        // Node numbering: odd numbers along the bottom chord, even numbers on
        // the top chord, node 12 at the far bottom support.
        let nodes = vec![
            [0.0, 0.0],       // 1
            [bay, h],         // 2
            [bay, 0.0],       // 3
            [2.0 * bay, h],   // 4
            [2.0 * bay, 0.0], // 5
            [3.0 * bay, h],   // 6
            [3.0 * bay, 0.0], // 7
            [4.0 * bay, h],   // 8
            [4.0 * bay, 0.0], // 9
            [5.0 * bay, h],   // 10
            [5.0 * bay, 0.0], // 11
            [6.0 * bay, 0.0], // 12
        ];
        let members = vec![
            // 1-6: bottom chords
            [0, 2],
            [2, 4],
            [4, 6],
            [6, 8],
            [8, 10],
            [10, 11],
            // 7-12: end posts and top chords
            [0, 1],
            [1, 3],
            [3, 5],
            [5, 7],
            [7, 9],
            [9, 11],
            // 13-17: verticals
            [1, 2],
            [3, 4],
            [5, 6],
            [7, 8],
            [9, 10],
            // 18-21: diagonals
            [1, 4],
            [3, 6],
            [7, 6],
            [9, 8],
        ];
        let supports = vec![(0, true, true), (11, false, true)];
        let loads = vec![
            (2, 0.0, -10_000.0),
            (4, 0.0, -10_000.0),
            (6, 0.0, -16_000.0),
            (8, 0.0, -10_000.0),
            (10, 0.0, -10_000.0),
        ];
        TrussModel {
            nodes,
            members,
            supports,
            loads,
            elastic_modulus: 1.0e7,
            d_allow: 0.266,
            sigma_allow: 37_680.0,
        }
    }

    /// Mean cross-sectional areas of the default design.
    pub fn six_bay_mean_areas() -> Vec<f64> {
        let mut a = Vec::with_capacity(21);
        a.extend(std::iter::repeat_n(2.0, 6));
        a.extend(std::iter::repeat_n(10.0, 6));
        a.extend(std::iter::repeat_n(3.0, 5));
        a.extend(std::iter::repeat_n(1.0, 4));
        a
    }

    pub fn validate(&self) -> Result<()> {
        for (m, pair) in self.members.iter().enumerate() {
            if pair[0] >= self.nodes.len() || pair[1] >= self.nodes.len() || pair[0] == pair[1] {
                return Err(Error::Truss(format!("member {m} has invalid connectivity {pair:?}")));
            }
        }
        for &(node, ..) in &self.supports {
            if node >= self.nodes.len() {
                return Err(Error::Truss(format!("support references missing node {node}")));
            }
        }
        for &(node, ..) in &self.loads {
            if node >= self.nodes.len() {
                return Err(Error::Truss(format!("load references missing node {node}")));
            }
        }
        Ok(())
    }

    /// Assembles and solves the linear system for the given member areas.
    pub fn solve(&self, areas: &[f64]) -> Result<TrussResponse> {
        let n_members = self.members.len();
        if areas.len() != n_members {
            return Err(Error::Truss(format!(
                "expected {n_members} areas, got {}",
                areas.len()
            )));
        }
        if let Some(bad) = areas.iter().position(|&a| !(a > 0.0)) {
            return Err(Error::Truss(format!("member {bad} has non-positive area")));
        }

        let ndof = 2 * self.nodes.len();
        let mut stiffness = vec![0.0; ndof * ndof];
        let mut geom = Vec::with_capacity(n_members);
        for (m, pair) in self.members.iter().enumerate() {
            let [i, j] = *pair;
            let dx = self.nodes[j][0] - self.nodes[i][0];
            let dy = self.nodes[j][1] - self.nodes[i][1];
            let len = dx.hypot(dy);
            let (c, s) = (dx / len, dy / len);
            let k = self.elastic_modulus * areas[m] / len;
            geom.push((len, c, s));
            let dofs = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1];
            let local = [c * c, c * s, s * s];
            // 4x4 bar stiffness: [B, -B; -B, B] with B = k [cc cs; cs ss].
            let b = [[local[0], local[1]], [local[1], local[2]]];
            for p in 0..2 {
                for q in 0..2 {
                    let v = k * b[p][q];
                    stiffness[dofs[p] * ndof + dofs[q]] += v;
                    stiffness[dofs[p + 2] * ndof + dofs[q + 2]] += v;
                    stiffness[dofs[p] * ndof + dofs[q + 2]] -= v;
                    stiffness[dofs[p + 2] * ndof + dofs[q]] -= v;
                }
            }
        }

        let mut fixed = vec![false; ndof];
        for &(node, fx, fy) in &self.supports {
            if fx {
                fixed[2 * node] = true;
            }
            if fy {
                fixed[2 * node + 1] = true;
            }
        }
        let free: Vec<usize> = (0..ndof).filter(|&d| !fixed[d]).collect();

        let mut force = vec![0.0; ndof];
        for &(node, fx, fy) in &self.loads {
            force[2 * node] += fx;
            force[2 * node + 1] += fy;
        }

        let nf = free.len();
        let mut reduced = vec![0.0; nf * nf];
        let mut rhs = vec![0.0; nf];
        for (a, &da) in free.iter().enumerate() {
            rhs[a] = force[da];
            for (b, &db) in free.iter().enumerate() {
                reduced[a * nf + b] = stiffness[da * ndof + db];
            }
        }
        let solution = cholesky_solve(&mut reduced, &rhs, nf)?;

        let mut displacements = vec![0.0; ndof];
        for (a, &da) in free.iter().enumerate() {
            displacements[da] = solution[a];
        }

        let mut stresses = Vec::with_capacity(n_members);
        for (m, pair) in self.members.iter().enumerate() {
            let [i, j] = *pair;
            let (len, c, s) = geom[m];
            let du = displacements[2 * j] - displacements[2 * i];
            let dv = displacements[2 * j + 1] - displacements[2 * i + 1];
            let elongation = c * du + s * dv;
            stresses.push(self.elastic_modulus * elongation / len);
        }

        let mut reactions = vec![0.0; ndof];
        for d in 0..ndof {
            let mut acc = 0.0;
            for q in 0..ndof {
                acc += stiffness[d * ndof + q] * displacements[q];
            }
            reactions[d] = acc - force[d];
        }

        let v_max = (0..self.nodes.len())
            .map(|k| displacements[2 * k + 1].abs())
            .fold(0.0, f64::max);
        let sigma_max = stresses.iter().map(|s| s.abs()).fold(0.0, f64::max);
        Ok(TrussResponse {
            v_max,
            sigma_max,
            y1: 1.0 - v_max / self.d_allow,
            y2: 1.0 - sigma_max / self.sigma_allow,
            displacements,
            stresses,
            reactions,
        })
    }
}

/// Dense Cholesky factorization and solve; errors on a non-positive pivot.
fn cholesky_solve(matrix: &mut [f64], rhs: &[f64], n: usize) -> Result<Vec<f64>> {
    for k in 0..n {
        let mut pivot = matrix[k * n + k];
        for p in 0..k {
            pivot -= matrix[k * n + p] * matrix[k * n + p];
        }
        if !(pivot > 0.0) {
            return Err(Error::Truss(format!("singular system (pivot {pivot} at row {k})")));
        }
        let pivot = pivot.sqrt();
        matrix[k * n + k] = pivot;
        for i in (k + 1)..n {
            let mut v = matrix[i * n + k];
            for p in 0..k {
                v -= matrix[i * n + p] * matrix[k * n + p];
            }
            matrix[i * n + k] = v / pivot;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = rhs[i];
        for p in 0..i {
            v -= matrix[i * n + p] * y[p];
        }
        y[i] = v / matrix[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for p in (i + 1)..n {
            v -= matrix[p * n + i] * x[p];
        }
        x[i] = v / matrix[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Single horizontal bar under axial load: tip displacement F L / (E A).
    #[test]
    fn single_bar_axial() {
        let truss = TrussModel {
            nodes: vec![[0.0, 0.0], [100.0, 0.0]],
            members: vec![[0, 1]],
            supports: vec![(0, true, true), (1, false, true)],
            loads: vec![(1, 5000.0, 0.0)],
            elastic_modulus: 1.0e7,
            d_allow: 1.0,
            sigma_allow: 1.0e9,
        };
        let r = truss.solve(&[2.0]).unwrap();
        let expect = 5000.0 * 100.0 / (1.0e7 * 2.0);
        assert_abs_diff_eq!(r.displacements[2], expect, epsilon = 1e-14);
        assert_abs_diff_eq!(r.stresses[0], 5000.0 / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn doubling_areas_halves_displacement() {
        let truss = TrussModel::six_bay_default();
        let a = TrussModel::six_bay_mean_areas();
        let a2: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let r1 = truss.solve(&a).unwrap();
        let r2 = truss.solve(&a2).unwrap();
        assert_abs_diff_eq!(r2.v_max, r1.v_max / 2.0, epsilon = 1e-10 * r1.v_max.max(1.0));
        for (s1, s2) in r1.stresses.iter().zip(&r2.stresses) {
            assert_abs_diff_eq!(*s2, s1 / 2.0, epsilon = 1e-10 * s1.abs().max(1.0));
        }
    }

    #[test]
    fn zero_loads_zero_response() {
        let mut truss = TrussModel::six_bay_default();
        truss.loads.clear();
        let r = truss.solve(&TrussModel::six_bay_mean_areas()).unwrap();
        assert_eq!(r.v_max, 0.0);
        assert_eq!(r.sigma_max, 0.0);
        assert_eq!(r.y1, 1.0);
        assert_eq!(r.y2, 1.0);
    }

    #[test]
    fn reactions_balance_applied_loads() {
        let truss = TrussModel::six_bay_default();
        let mut areas = TrussModel::six_bay_mean_areas();
        // Perturb the areas to break symmetry.
        for (k, a) in areas.iter_mut().enumerate() {
            *a *= 1.0 + 0.07 * ((k as f64) * 0.7).sin();
        }
        let r = truss.solve(&areas).unwrap();
        let total_fy: f64 = truss.loads.iter().map(|&(_, _, fy)| fy).sum();
        let reac_y: f64 = (0..truss.nodes.len()).map(|k| r.reactions[2 * k + 1]).sum();
        let reac_x: f64 = (0..truss.nodes.len()).map(|k| r.reactions[2 * k]).sum();
        assert_abs_diff_eq!(reac_y, -total_fy, epsilon = 1e-8 * total_fy.abs());
        assert_abs_diff_eq!(reac_x, 0.0, epsilon = 1e-8 * total_fy.abs());
    }

    #[test]
    fn default_design_is_in_the_working_range() {
        let truss = TrussModel::six_bay_default();
        let r = truss.solve(&TrussModel::six_bay_mean_areas()).unwrap();
        assert!(r.y1 > 0.0 && r.y1 < 0.5, "displacement margin {}", r.y1);
        assert!(r.y2 > 0.0 && r.y2 < 0.6, "stress margin {}", r.y2);
        // Peak stress sits in the midspan bottom chords (members 3 or 4).
        let peak = r
            .stresses
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0;
        assert!(peak == 2 || peak == 3, "peak stress member {peak}");
        assert!(r.solve_errors_on_bad_area_is_tested_elsewhere());
    }

    impl TrussResponse {
        fn solve_errors_on_bad_area_is_tested_elsewhere(&self) -> bool {
            true
        }
    }

    #[test]
    fn non_positive_area_rejected() {
        let truss = TrussModel::six_bay_default();
        let mut areas = TrussModel::six_bay_mean_areas();
        areas[4] = 0.0;
        assert!(truss.solve(&areas).is_err());
    }
}
