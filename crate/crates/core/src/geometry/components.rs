use super::cone::Cone;
use super::grid::Grid;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Labels of a planar grid: 0 marks occupied (amoeba) cells, `k > 0` the
/// k-th 4-connected component of the complement.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMap {
    pub grid: Grid,
    pub labels: Vec<u32>,
    pub count: u32,
}

#[derive(Serialize, Deserialize)]
struct ComponentMapJson {
    #[serde(rename = "box")]
    bx: Vec<f64>,
    shape: Vec<usize>,
    labels: Vec<u32>,
}

/// Morphological dilation of a cell mask with the 3x3 (8-connected)
/// structuring element, applied `radius` times.
pub fn dilate8(grid: &Grid, mask: &[bool], radius: usize) -> Vec<bool> {
    let (n1, n2) = grid.n2();
    let mut cur = mask.to_vec();
    for _ in 0..radius {
        let mut next = cur.clone();
        for i in 0..n1 {
            for j in 0..n2 {
                if !cur[i * n2 + j] {
                    continue;
                }
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if a >= 0 && b >= 0 && (a as usize) < n1 && (b as usize) < n2 {
                            next[a as usize * n2 + b as usize] = true;
                        }
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Labels maximal 4-connected unoccupied regions 1..K in row-major order
/// of their first cell.
pub fn flood_components(grid: &Grid, mask: &[bool]) -> ComponentMap {
    let (n1, n2) = grid.n2();
    assert_eq!(mask.len(), n1 * n2);
    let mut labels = vec![0u32; n1 * n2];
    let mut seen = mask.to_vec();
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n1 * n2 {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            labels[c] = count;
            let (i, j) = (c / n2, c % n2);
            let mut visit = |k: usize| {
                if !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            };
            if i > 0 {
                visit(c - n2);
            }
            if i + 1 < n1 {
                visit(c + n2);
            }
            if j > 0 {
                visit(c - 1);
            }
            if j + 1 < n2 {
                visit(c + 1);
            }
        }
    }
    ComponentMap { grid: grid.clone(), labels, count }
}

/// Euclidean distance (in cells) from every cell to the nearest seed cell,
/// by two-pass propagation of nearest-seed coordinates. Infinite when the
/// mask has no seeds.
pub fn distance_transform(grid: &Grid, seeds: &[bool]) -> Vec<f64> {
    let (n1, n2) = grid.n2();
    let mut near: Vec<Option<(i64, i64)>> =
        (0..n1 * n2).map(|k| if seeds[k] { Some(((k / n2) as i64, (k % n2) as i64)) } else { None }).collect();
    let d2 = |p: (i64, i64), q: (i64, i64)| ((p.0 - q.0).pow(2) + (p.1 - q.1).pow(2)) as f64;
    let fwd = [(-1i64, -1i64), (-1, 0), (-1, 1), (0, -1)];
    let bwd = [(1i64, 1i64), (1, 0), (1, -1), (0, 1)];
    for _ in 0..2 {
        for pass in 0..2 {
            let offsets = if pass == 0 { &fwd } else { &bwd };
            let order: Box<dyn Iterator<Item = usize>> =
                if pass == 0 { Box::new(0..n1 * n2) } else { Box::new((0..n1 * n2).rev()) };
            for k in order {
                let here = ((k / n2) as i64, (k % n2) as i64);
                for &(di, dj) in offsets {
                    let (a, b) = (here.0 + di, here.1 + dj);
                    if a < 0 || b < 0 || a >= n1 as i64 || b >= n2 as i64 {
                        continue;
                    }
                    if let Some(s) = near[a as usize * n2 + b as usize] {
                        let better = match near[k] {
                            None => true,
                            Some(cur) => d2(here, s) < d2(here, cur),
                        };
                        if better {
                            near[k] = Some(s);
                        }
                    }
                }
            }
        }
    }
    (0..n1 * n2)
        .map(|k| match near[k] {
            None => f64::INFINITY,
            Some(s) => d2(((k / n2) as i64, (k % n2) as i64), s).sqrt(),
        })
        .collect()
}

impl ComponentMap {
    pub fn label_at(&self, i: usize, j: usize) -> u32 {
        self.labels[self.grid.cell_index(i, j)]
    }

    pub fn occupied_mask(&self) -> Vec<bool> {
        self.labels.iter().map(|&l| l == 0).collect()
    }

    pub fn cells_of(&self, id: u32) -> Vec<(usize, usize)> {
        let n2 = self.grid.shape[1];
        self.labels.iter().enumerate().filter(|(_, &l)| l == id).map(|(k, _)| (k / n2, k % n2)).collect()
    }

    pub fn size(&self, id: u32) -> usize {
        self.labels.iter().filter(|&&l| l == id).count()
    }

    pub fn touches_boundary(&self, id: u32) -> bool {
        let (n1, n2) = self.grid.n2();
        (0..n1).any(|i| self.label_at(i, 0) == id || self.label_at(i, n2 - 1) == id)
            || (0..n2).any(|j| self.label_at(0, j) == id || self.label_at(n1 - 1, j) == id)
    }

    /// Distance (cells) from each cell to the amoeba mask.
    pub fn distance_to_amoeba(&self) -> Vec<f64> {
        distance_transform(&self.grid, &self.occupied_mask())
    }

    /// Cell of component `id` farthest from the amoeba, with its distance.
    /// Ties go to the first cell in row-major order.
    pub fn deepest_cell(&self, id: u32, dist: &[f64]) -> Option<((usize, usize), f64)> {
        let n2 = self.grid.shape[1];
        let mut best: Option<(usize, f64)> = None;
        for (k, &l) in self.labels.iter().enumerate() {
            if l == id && best.map_or(true, |(_, d)| dist[k] > d) {
                best = Some((k, dist[k]));
            }
        }
        best.map(|(k, d)| ((k / n2, k % n2), d))
    }

    /// Segment test on random cell pairs; a one-cell collar around the
    /// component is tolerated.
    pub fn is_convex_region(&self, id: u32, trials: usize) -> bool {
        let cells = self.cells_of(id);
        if cells.len() < 2 {
            return true;
        }
        let (n1, n2) = self.grid.n2();
        let near_id = |i: i64, j: i64| {
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a >= 0 && b >= 0 && a < n1 as i64 && b < n2 as i64 && self.label_at(a as usize, b as usize) == id {
                        return true;
                    }
                }
            }
            false
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + id as u64);
        for _ in 0..trials {
            let a = cells[rng.gen_range(0..cells.len())];
            let b = cells[rng.gen_range(0..cells.len())];
            let (da, db) = (b.0 as f64 - a.0 as f64, b.1 as f64 - a.1 as f64);
            let steps = (4.0 * da.abs().max(db.abs())).ceil() as usize + 1;
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                let i = (a.0 as f64 + 0.5 + t * da).floor() as i64;
                let j = (a.1 as f64 + 0.5 + t * db).floor() as i64;
                if !near_id(i, j) {
                    return false;
                }
            }
        }
        true
    }

    /// Directions (1 degree apart) along which every probed cell of the
    /// component stays inside it until leaving the grid or reaching
    /// `r_probe`. Probed cells are the component's inner boundary plus a
    /// strided subsample of the rest. Meant for square cells: on stretched
    /// cells the raster staircase of a slanted wall clips rays launched
    /// next to it and narrows the estimate.
    pub fn recession_cone_estimate(&self, id: u32, r_probe: f64) -> Cone {
        let cells = self.cells_of(id);
        if cells.is_empty() || !self.touches_boundary(id) {
            return Cone::zero(2);
        }
        if cells.len() == self.labels.len() {
            return Cone::full_plane();
        }
        let (n1, n2) = self.grid.n2();
        let (h1, h2) = (self.grid.h(0), self.grid.h(1));
        let mut probes: Vec<(usize, usize)> = Vec::new();
        let stride = (cells.len() / 200).max(1);
        for (k, &(i, j)) in cells.iter().enumerate() {
            let edge = (i > 0 && self.label_at(i - 1, j) != id)
                || (i + 1 < n1 && self.label_at(i + 1, j) != id)
                || (j > 0 && self.label_at(i, j - 1) != id)
                || (j + 1 < n2 && self.label_at(i, j + 1) != id);
            if edge || k % stride == 0 {
                probes.push((i, j));
            }
        }
        let step = 0.5 * h1.min(h2);
        let nsteps = (r_probe / step).ceil() as usize;
        let passes = |deg: usize| -> bool {
            let th = (deg as f64).to_radians();
            let (c, s) = (th.cos(), th.sin());
            probes.iter().all(|&(i, j)| {
                let x0 = self.grid.cell_center(i, j);
                for k in 1..=nsteps {
                    let t = k as f64 * step;
                    let x = [x0[0] + t * c, x0[1] + t * s];
                    match self.grid.cell_of(x) {
                        None => return true,
                        Some((a, b)) => {
                            if self.label_at(a, b) != id {
                                return false;
                            }
                        }
                    }
                }
                true
            })
        };
        let ok: Vec<bool> = (0..360).map(passes).collect();
        let npass = ok.iter().filter(|&&b| b).count();
        if npass == 360 {
            return Cone::full_plane();
        }
        if npass == 0 {
            return Cone::zero(2);
        }
        // longest circular run of passing directions
        let first_fail = ok.iter().position(|&b| !b).unwrap();
        let (mut best_start, mut best_len) = (0usize, 0usize);
        let (mut run_start, mut run_len) = (0usize, 0usize);
        for k in 1..=360 {
            let d = (first_fail + k) % 360;
            if ok[d] {
                if run_len == 0 {
                    run_start = d;
                }
                run_len += 1;
                if run_len > best_len {
                    best_len = run_len;
                    best_start = run_start;
                }
            } else {
                run_len = 0;
            }
        }
        let start = best_start as f64;
        let width = (best_len - 1) as f64;
        let mut angles = vec![start.to_radians(), (start + width).to_radians()];
        if width >= 180.0 {
            angles.push((start + 0.5 * width).to_radians());
        }
        Cone::from_angles(&angles)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ComponentMapJson {
            bx: self.grid.flat_box(),
            shape: self.grid.shape.clone(),
            labels: self.labels.clone(),
        })
        .expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<ComponentMap> {
        let j: ComponentMapJson = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let grid = Grid::from_box(&j.bx, j.shape)?;
        if j.labels.len() != grid.n_cells() {
            return Err(Error::DimensionMismatch { expected: grid.n_cells(), got: j.labels.len() });
        }
        let count = j.labels.iter().cloned().max().unwrap_or(0);
        Ok(ComponentMap { grid, labels: j.labels, count })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cone::{angular_mismatch_deg, ConeShape};

    fn grid(n: usize) -> Grid {
        Grid::square(0.0, n as f64, n).unwrap()
    }

    #[test]
    fn empty_mask_is_one_component() {
        let g = grid(8);
        let c = flood_components(&g, &vec![false; 64]);
        assert_eq!(c.count, 1);
        assert_eq!(c.recession_cone_estimate(1, 10.0).shape(), ConeShape::Full);
    }

    #[test]
    fn vertical_stripe_splits() {
        let g = grid(8);
        let mask: Vec<bool> = (0..64).map(|k| k / 8 == 3).collect();
        let c = flood_components(&g, &mask);
        assert_eq!(c.count, 2);
        assert_eq!(c.label_at(0, 0), 1);
        assert_eq!(c.label_at(7, 7), 2);
        assert_eq!(c.label_at(3, 5), 0);
    }

    #[test]
    fn diagonal_wall_blocks_four_connectivity() {
        let g = grid(6);
        let mask: Vec<bool> = (0..36).map(|k| k / 6 == k % 6).collect();
        assert_eq!(flood_components(&g, &mask).count, 2);
    }

    #[test]
    fn l_shape_is_not_convex_but_square_is() {
        let g = grid(40);
        let mask: Vec<bool> = (0..1600)
            .map(|k| {
                let (i, j) = (k / 40, k % 40);
                !((i < 30 && j < 10) || (i < 10 && j < 30))
            })
            .collect();
        let c = flood_components(&g, &mask);
        assert_eq!(c.count, 1);
        assert!(!c.is_convex_region(1, 500));
        let sq: Vec<bool> = (0..1600).map(|k| !((k / 40) < 20 && (k % 40) < 20)).collect();
        let c = flood_components(&g, &sq);
        assert!(c.is_convex_region(1, 500));
    }

    #[test]
    fn bounded_component_has_zero_cone() {
        let g = grid(20);
        let mask: Vec<bool> = (0..400)
            .map(|k| {
                let (i, j) = (k / 20, k % 20);
                (i == 5 || i == 14) && (5..=14).contains(&j) || (j == 5 || j == 14) && (5..=14).contains(&i)
            })
            .collect();
        let c = flood_components(&g, &mask);
        assert_eq!(c.count, 2);
        assert_eq!(c.recession_cone_estimate(2, 30.0).shape(), ConeShape::Zero);
    }

    #[test]
    fn quadrant_recession() {
        // complement of the closed first quadrant minus a collar, third
        // quadrant component should have the (-1,0),(0,-1) cone
        let g = Grid::square(-10.0, 10.0, 200).unwrap();
        let mut mask = vec![false; 200 * 200];
        for i in 0..200 {
            for j in 0..200 {
                let x = g.cell_center(i, j);
                if x[0].abs() < 0.15 && x[1] >= 0.0 || x[1].abs() < 0.15 && x[0] >= 0.0 || x[0].abs() < 0.15 && x[1].abs() < 0.15 {
                    mask[g.cell_index(i, j)] = true;
                }
                // ray towards (-1,-1) separating quadrant three
                if (x[0] - x[1]).abs() < 0.15 && x[0] <= 0.0 {
                    mask[g.cell_index(i, j)] = true;
                }
            }
        }
        let c = flood_components(&g, &mask);
        assert_eq!(c.count, 3);
        let first = c.label_at(0, 150);
        let est = c.recession_cone_estimate(first, 0.5 * g.diagonal());
        let want = Cone::from_angles(&[90f64.to_radians(), 225f64.to_radians()]);
        assert!(angular_mismatch_deg(&est, &want) <= 1.0, "{:?}", est.shape());
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let g = grid(30);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let seeds: Vec<bool> = (0..900).map(|_| rng.gen::<f64>() < 0.01).collect();
        let d = distance_transform(&g, &seeds);
        for k in 0..900 {
            let (i, j) = ((k / 30) as f64, (k % 30) as f64);
            let brute = (0..900)
                .filter(|&s| seeds[s])
                .map(|s| (((s / 30) as f64 - i).powi(2) + ((s % 30) as f64 - j).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            // nearest-seed propagation is exact up to rare sub-cell misses
            assert!(d[k] - brute < 0.5, "cell {k}: {} vs {brute}", d[k]);
            assert!(d[k] >= brute - 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = grid(4);
        let mask: Vec<bool> = (0..16).map(|k| k % 4 == 1).collect();
        let c = flood_components(&g, &mask);
        let back = ComponentMap::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
