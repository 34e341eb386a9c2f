//! Traversability scoring and safe-path selection.

use alloc::vec::Vec;

mod grid;
mod plan;
mod score;

pub use grid::{score_grid, Cell, CellIndex, CellSource, SoilModels, TerrainGrid};
pub use plan::{path_cost, plan_path, step_cost, Path, PlannerConfig, DEFAULT_RISK_WEIGHT};
pub use score::{traversability_score, TraversabilityParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraverseError {
    #[error("traversability parameters violate 0 <= d_min < d_max, 0 <= s_min < s_max <= 1, w1 + w2 = 1")]
    InvalidParams,
    #[error("prediction out of range: sinkage {sinkage} m, slip {slip}")]
    InvalidPrediction { sinkage: f64, slip: f64 },
    #[error("grid dimensions do not match its cell list or cell size is not positive")]
    BadShape,
    #[error("cell {0:?} has a score outside [0, 1]")]
    ScoreOutOfRange(CellIndex),
    #[error("no fitted model for cells {0:?}")]
    Unresolved(Vec<CellIndex>),
    #[error("cell {0:?} has not been scored")]
    Unscored(CellIndex),
    #[error("cell {0:?} is outside the grid")]
    OutOfBounds(CellIndex),
    #[error("start cell {0:?} is impassable")]
    StartBlocked(CellIndex),
    #[error("goal unreachable: {reachable} cells reachable, blocked by {} impassable cells", frontier.len())]
    Infeasible {
        reachable: usize,
        frontier: Vec<CellIndex>,
    },
}
