//! Safest-path search over a scored grid.
//!
//! Moves are 8-connected. Entering a cell with score T costs
//! length·cell_size·(1 + λ·(1 − T)) where length is 1 for edge moves and √2
//! for diagonals; cells with T = 0 are impassable. Labels are compared by
//! cost, then by the path's lowest score (higher wins), then by the row-major
//! cell sequence, so the result is unique for a given grid.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::grid::{CellIndex, TerrainGrid};
use super::TraverseError;

/// Default weight of (1 − T) in the per-cell cost.
pub const DEFAULT_RISK_WEIGHT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlannerConfig {
    /// λ.
    pub risk_weight: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            risk_weight: DEFAULT_RISK_WEIGHT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Path {
    pub cells: Vec<CellIndex>,
    pub total_cost: f64,
    pub min_cell_score: f64,
}

pub(crate) const NEIGHBOURS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Cost of stepping onto a cell with score `t` by move `(dr, dc)`.
pub fn step_cost(cell_size: f64, risk_weight: f64, (dr, dc): (isize, isize), t: f64) -> f64 {
    let length = if dr != 0 && dc != 0 {
        core::f64::consts::SQRT_2
    } else {
        1.0
    };
    length * cell_size * (1.0 + risk_weight * (1.0 - t))
}

pub(crate) fn neighbours(
    grid: &TerrainGrid,
    (r, c): CellIndex,
) -> impl Iterator<Item = ((isize, isize), CellIndex)> + '_ {
    NEIGHBOURS.iter().filter_map(move |&(dr, dc)| {
        let nr = r.checked_add_signed(dr)?;
        let nc = c.checked_add_signed(dc)?;
        grid.contains((nr, nc)).then_some(((dr, dc), (nr, nc)))
    })
}

fn costs_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    cost: f64,
    min_score: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Max-heap: the cheapest, then safest, then lowest-index entry is greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(self.min_score.total_cmp(&other.min_score))
            .then(other.node.cmp(&self.node))
    }
}

fn trace(pred: &[Option<usize>], mut node: usize) -> Vec<usize> {
    let mut seq = alloc::vec![node];
    while let Some(p) = pred[node] {
        seq.push(p);
        node = p;
    }
    seq.reverse();
    seq
}

/// Plan the safest path between two cells of a scored grid.
pub fn plan_path(
    grid: &TerrainGrid,
    start: CellIndex,
    goal: CellIndex,
    config: &PlannerConfig,
) -> Result<Path, TraverseError> {
    grid.validate()?;
    for idx in [start, goal] {
        if !grid.contains(idx) {
            return Err(TraverseError::OutOfBounds(idx));
        }
    }
    let scores: Vec<f64> = grid
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| c.score.ok_or(TraverseError::Unscored(grid.index_of(i))))
        .collect::<Result<_, _>>()?;
    if scores[grid.flat(start)] == 0.0 {
        return Err(TraverseError::StartBlocked(start));
    }

    let n = scores.len();
    let mut cost = alloc::vec![f64::INFINITY; n];
    let mut min_score = alloc::vec![0.0; n];
    let mut pred: Vec<Option<usize>> = alloc::vec![None; n];
    let mut settled = alloc::vec![false; n];
    let s = grid.flat(start);
    let g = grid.flat(goal);
    cost[s] = 0.0;
    min_score[s] = scores[s];
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        cost: 0.0,
        min_score: scores[s],
        node: s,
    });

    while let Some(Entry { node: u, .. }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == g {
            break;
        }
        for (step, v_idx) in neighbours(grid, grid.index_of(u)) {
            let v = grid.flat(v_idx);
            let t = scores[v];
            if settled[v] || t == 0.0 {
                continue;
            }
            let new_cost = cost[u] + step_cost(grid.cell_size, config.risk_weight, step, t);
            let new_min = min_score[u].min(t);
            let better = if pred[v].is_none() && v != s {
                true
            } else if !costs_tie(new_cost, cost[v]) {
                new_cost < cost[v]
            } else if new_min != min_score[v] {
                new_min > min_score[v]
            } else {
                let old = pred[v].expect("reached cells have a predecessor");
                trace(&pred, u) < trace(&pred, old)
            };
            if better {
                cost[v] = new_cost;
                min_score[v] = new_min;
                pred[v] = Some(u);
                heap.push(Entry {
                    cost: new_cost,
                    min_score: new_min,
                    node: v,
                });
            }
        }
    }

    if !settled[g] || scores[g] == 0.0 {
        let mut frontier: Vec<CellIndex> = (0..n)
            .filter(|&i| scores[i] == 0.0)
            .filter(|&i| neighbours(grid, grid.index_of(i)).any(|(_, nb)| settled[grid.flat(nb)]))
            .map(|i| grid.index_of(i))
            .collect();
        frontier.sort();
        return Err(TraverseError::Infeasible {
            reachable: settled.iter().filter(|&&x| x).count(),
            frontier,
        });
    }

    Ok(Path {
        cells: trace(&pred, g)
            .into_iter()
            .map(|i| grid.index_of(i))
            .collect(),
        total_cost: cost[g],
        min_cell_score: min_score[g],
    })
}

/// Recompute the cost of an explicit cell sequence; `None` if it is not a
/// valid 8-connected walk over passable scored cells.
pub fn path_cost(grid: &TerrainGrid, cells: &[CellIndex], config: &PlannerConfig) -> Option<f64> {
    let mut total = 0.0;
    for (i, &idx) in cells.iter().enumerate() {
        if !grid.contains(idx) || grid.score(idx)? == 0.0 {
            return None;
        }
        if i > 0 {
            let prev = cells[i - 1];
            let dr = idx.0 as isize - prev.0 as isize;
            let dc = idx.1 as isize - prev.1 as isize;
            if dr.abs() > 1 || dc.abs() > 1 || (dr == 0 && dc == 0) {
                return None;
            }
            total += step_cost(
                grid.cell_size,
                config.risk_weight,
                (dr, dc),
                grid.score(idx)?,
            );
        }
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traverse::grid::Cell;
    use rand_chacha::rand_core::RngCore;

    fn grid_from(rows: usize, cols: usize, scores: &[f64]) -> TerrainGrid {
        TerrainGrid::new(
            rows,
            cols,
            0.1,
            scores.iter().map(|&t| Cell::scored(t)).collect(),
        )
        .unwrap()
    }

    fn random_grid(rows: usize, cols: usize, seed: u64, levels: &[f64]) -> TerrainGrid {
        let mut rng = crate::seed::rng(seed);
        let scores: Vec<f64> = (0..rows * cols)
            .map(|_| levels[(rng.next_u32() as usize) % levels.len()])
            .collect();
        grid_from(rows, cols, &scores)
    }

    /// All-pairs shortest costs by Floyd–Warshall; independent of the heap search.
    fn floyd(grid: &TerrainGrid, config: &PlannerConfig) -> Vec<Vec<f64>> {
        let n = grid.cells.len();
        let mut d = alloc::vec![alloc::vec![f64::INFINITY; n]; n];
        for i in 0..n {
            if grid.cells[i].score.unwrap() == 0.0 {
                continue;
            }
            d[i][i] = 0.0;
            for (step, nb) in neighbours(grid, grid.index_of(i)) {
                let t = grid.score(nb).unwrap();
                if t > 0.0 {
                    d[i][grid.flat(nb)] = step_cost(grid.cell_size, config.risk_weight, step, t);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    /// Exhaustive enumeration of simple paths ranked by the planner's
    /// lexicographic objective.
    fn exhaustive(
        grid: &TerrainGrid,
        start: CellIndex,
        goal: CellIndex,
        config: &PlannerConfig,
    ) -> Option<(f64, f64, Vec<CellIndex>)> {
        fn dfs(
            grid: &TerrainGrid,
            config: &PlannerConfig,
            goal: CellIndex,
            path: &mut Vec<CellIndex>,
            visited: &mut Vec<bool>,
            best: &mut Option<(f64, f64, Vec<CellIndex>)>,
        ) {
            let here = *path.last().unwrap();
            if here == goal {
                let cost = path_cost(grid, path, config).unwrap();
                let min = path
                    .iter()
                    .map(|&c| grid.score(c).unwrap())
                    .fold(1.0, f64::min);
                let replace = match best {
                    None => true,
                    Some((bc, bm, bp)) => {
                        if !costs_tie(cost, *bc) {
                            cost < *bc
                        } else if min != *bm {
                            min > *bm
                        } else {
                            path.as_slice() < bp.as_slice()
                        }
                    }
                };
                if replace {
                    *best = Some((cost, min, path.clone()));
                }
                return;
            }
            let nbs: Vec<CellIndex> = neighbours(grid, here).map(|(_, nb)| nb).collect();
            for nb in nbs {
                let f = grid.flat(nb);
                if visited[f] || grid.score(nb).unwrap() == 0.0 {
                    continue;
                }
                visited[f] = true;
                path.push(nb);
                dfs(grid, config, goal, path, visited, best);
                path.pop();
                visited[f] = false;
            }
        }
        let mut visited = alloc::vec![false; grid.cells.len()];
        visited[grid.flat(start)] = true;
        let mut best = None;
        dfs(
            grid,
            config,
            goal,
            &mut alloc::vec![start],
            &mut visited,
            &mut best,
        );
        best
    }

    #[test]
    fn uniform_grid_gives_geometric_length() {
        let grid = grid_from(5, 7, &[1.0; 35]);
        let path = plan_path(&grid, (0, 0), (4, 6), &PlannerConfig::default()).unwrap();
        let expected = 0.1 * (4.0 * core::f64::consts::SQRT_2 + 2.0);
        assert!((path.total_cost - expected).abs() < 1e-12);
        assert_eq!(path.cells.len(), 7);
        assert_eq!(path.min_cell_score, 1.0);
    }

    #[test]
    fn routes_through_gap() {
        // Wall across column 3 with a single opening in row 4.
        let mut scores = alloc::vec![1.0; 36];
        for r in 0..6 {
            if r != 4 {
                scores[r * 6 + 3] = 0.0;
            }
        }
        let grid = grid_from(6, 6, &scores);
        let path = plan_path(&grid, (1, 0), (1, 5), &PlannerConfig::default()).unwrap();
        assert!(path.cells.contains(&(4, 3)));
        assert!(path.cells.iter().all(|&c| grid.score(c).unwrap() > 0.0));
    }

    #[test]
    fn infeasible_reports_frontier() {
        let mut scores = alloc::vec![1.0; 25];
        for r in 0..5 {
            scores[r * 5 + 2] = 0.0;
        }
        let grid = grid_from(5, 5, &scores);
        match plan_path(&grid, (0, 0), (0, 4), &PlannerConfig::default()) {
            Err(TraverseError::Infeasible {
                frontier,
                reachable,
            }) => {
                assert_eq!(reachable, 10);
                assert_eq!(frontier, (0..5).map(|r| (r, 2)).collect::<Vec<_>>());
            }
            other => panic!("{other:?}"),
        }
        let goal_blocked = plan_path(&grid, (0, 0), (2, 2), &PlannerConfig::default());
        assert!(matches!(
            goal_blocked,
            Err(TraverseError::Infeasible { .. })
        ));
        assert_eq!(
            plan_path(&grid, (0, 2), (0, 0), &PlannerConfig::default()),
            Err(TraverseError::StartBlocked((0, 2)))
        );
        assert!(matches!(
            plan_path(&grid, (0, 0), (9, 9), &PlannerConfig::default()),
            Err(TraverseError::OutOfBounds(_))
        ));
    }

    #[test]
    fn start_equals_goal() {
        let grid = grid_from(2, 2, &[0.5, 1.0, 1.0, 1.0]);
        let p = plan_path(&grid, (0, 0), (0, 0), &PlannerConfig::default()).unwrap();
        assert_eq!(p.cells, alloc::vec![(0, 0)]);
        assert_eq!(p.total_cost, 0.0);
        assert_eq!(p.min_cell_score, 0.5);
    }

    #[test]
    fn matches_floyd_warshall_on_random_grids() {
        let config = PlannerConfig::default();
        for seed in 0..40 {
            let grid = random_grid(8, 8, seed, &[0.0, 0.2, 0.5, 0.8, 1.0, 1.0]);
            let d = floyd(&grid, &config);
            let s = (0usize, 0usize);
            let g = (7usize, 7usize);
            if grid.score(s).unwrap() == 0.0 {
                continue;
            }
            let opt = d[grid.flat(s)][grid.flat(g)];
            match plan_path(&grid, s, g, &config) {
                Ok(p) => {
                    assert!((p.total_cost - opt).abs() < 1e-9, "seed {seed}");
                    assert!(
                        (path_cost(&grid, &p.cells, &config).unwrap() - p.total_cost).abs() < 1e-12
                    );
                }
                Err(TraverseError::Infeasible { .. }) => assert!(opt.is_infinite()),
                Err(e) => panic!("{e:?}"),
            }
        }
    }

    #[test]
    fn tie_breaking_matches_exhaustive_search() {
        let config = PlannerConfig::default();
        for seed in 0..60 {
            let grid = random_grid(3, 3, 1000 + seed, &[0.0, 0.5, 1.0, 1.0]);
            let (s, g) = ((0, 0), (2, 2));
            if grid.score(s).unwrap() == 0.0 {
                continue;
            }
            let best = exhaustive(&grid, s, g, &config);
            match (plan_path(&grid, s, g, &config), best) {
                (Ok(p), Some((cost, min, cells))) => {
                    assert!(costs_tie(p.total_cost, cost), "seed {seed}");
                    assert_eq!(p.min_cell_score, min, "seed {seed}");
                    assert_eq!(p.cells, cells, "seed {seed}");
                }
                (Err(TraverseError::Infeasible { .. }), None) => {}
                (got, want) => panic!("seed {seed}: {got:?} vs {want:?}"),
            }
        }
    }

    #[test]
    fn deterministic() {
        let grid = random_grid(10, 10, 77, &[0.3, 0.6, 1.0]);
        let a = plan_path(&grid, (0, 0), (9, 9), &PlannerConfig::default()).unwrap();
        let b = plan_path(&grid, (0, 0), (9, 9), &PlannerConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unscored_cell_is_rejected() {
        let mut grid = grid_from(2, 2, &[1.0; 4]);
        grid.cells[3].score = None;
        assert_eq!(
            plan_path(&grid, (0, 0), (1, 1), &PlannerConfig::default()),
            Err(TraverseError::Unscored((1, 1)))
        );
    }
}
