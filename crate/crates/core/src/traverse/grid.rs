use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::score::{traversability_score, TraversabilityParams};
use super::TraverseError;
use crate::probe::{predict_sinkage, predict_slip, SinkageModel, SlipModel};

/// (row, col).
pub type CellIndex = (usize, usize);

/// Where a cell's mobility estimate comes from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CellSource {
    /// Soil type whose fitted models are looked up by name.
    Soil(String),
    /// Sinkage (m) and slip already predicted for this cell.
    Probed {
        sinkage: f64,
        slip: f64,
    },
    /// Score supplied directly.
    Scored,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub source: CellSource,
    pub predicted_sinkage: Option<f64>,
    pub predicted_slip: Option<f64>,
    /// Traversability score in [0, 1].
    pub score: Option<f64>,
}

impl Cell {
    pub fn soil(name: &str) -> Self {
        Self::from_source(CellSource::Soil(name.into()))
    }

    pub fn scored(score: f64) -> Self {
        Self {
            score: Some(score),
            ..Self::from_source(CellSource::Scored)
        }
    }

    pub fn from_source(source: CellSource) -> Self {
        Self {
            source,
            predicted_sinkage: None,
            predicted_slip: None,
            score: None,
        }
    }
}

/// Row-major terrain grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TerrainGrid {
    pub rows: usize,
    pub cols: usize,
    /// Cell edge length, m.
    pub cell_size: f64,
    pub cells: Vec<Cell>,
}

impl TerrainGrid {
    pub fn new(
        rows: usize,
        cols: usize,
        cell_size: f64,
        cells: Vec<Cell>,
    ) -> Result<Self, TraverseError> {
        let grid = Self {
            rows,
            cols,
            cell_size,
            cells,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn filled(rows: usize, cols: usize, cell_size: f64, cell: Cell) -> Self {
        Self {
            rows,
            cols,
            cell_size,
            cells: alloc::vec![cell; rows * cols],
        }
    }

    pub fn validate(&self) -> Result<(), TraverseError> {
        if self.rows == 0 || self.cols == 0 || self.cells.len() != self.rows * self.cols {
            return Err(TraverseError::BadShape);
        }
        if !(self.cell_size > 0.0) {
            return Err(TraverseError::BadShape);
        }
        if let Some(i) = self
            .cells
            .iter()
            .position(|c| c.score.is_some_and(|t| !(0.0..=1.0).contains(&t)))
        {
            return Err(TraverseError::ScoreOutOfRange(self.index_of(i)));
        }
        Ok(())
    }

    pub fn index_of(&self, flat: usize) -> CellIndex {
        (flat / self.cols, flat % self.cols)
    }

    pub fn flat(&self, (row, col): CellIndex) -> usize {
        row * self.cols + col
    }

    pub fn contains(&self, (row, col): CellIndex) -> bool {
        row < self.rows && col < self.cols
    }

    pub fn cell(&self, idx: CellIndex) -> &Cell {
        &self.cells[self.flat(idx)]
    }

    pub fn cell_mut(&mut self, idx: CellIndex) -> &mut Cell {
        let i = self.flat(idx);
        &mut self.cells[i]
    }

    pub fn score(&self, idx: CellIndex) -> Option<f64> {
        self.cell(idx).score
    }
}

/// Fitted predictors for one soil type.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SoilModels {
    pub sinkage: SinkageModel,
    pub slip: SlipModel,
}

/// Score every soil-assigned or probed cell; pre-scored cells are kept.
///
/// Soil cells predict sinkage at `robot_load` and slip at `expected_drawbar`.
pub fn score_grid(
    grid: &TerrainGrid,
    models: &BTreeMap<String, SoilModels>,
    robot_load: f64,
    expected_drawbar: f64,
    params: &TraversabilityParams,
) -> Result<TerrainGrid, TraverseError> {
    grid.validate()?;
    params.validate()?;
    let mut out = grid.clone();
    let mut unresolved = Vec::new();
    for (i, cell) in out.cells.iter_mut().enumerate() {
        let (d, s) = match &cell.source {
            CellSource::Soil(name) => match models.get(name) {
                Some(m) => (
                    predict_sinkage(&m.sinkage, robot_load).value,
                    predict_slip(&m.slip, expected_drawbar).value,
                ),
                None => {
                    unresolved.push(grid.index_of(i));
                    continue;
                }
            },
            CellSource::Probed { sinkage, slip } => (*sinkage, *slip),
            CellSource::Scored if cell.score.is_some() => continue,
            CellSource::Scored | CellSource::Unknown => {
                unresolved.push(grid.index_of(i));
                continue;
            }
        };
        cell.predicted_sinkage = Some(d);
        cell.predicted_slip = Some(s);
        cell.score = Some(traversability_score(d, s, params)?);
    }
    if unresolved.is_empty() {
        Ok(out)
    } else {
        Err(TraverseError::Unresolved(unresolved))
    }
}
