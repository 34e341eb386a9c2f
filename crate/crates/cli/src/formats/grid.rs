//! Terrain grid definitions, path reports and the SVG heatmap.

use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wheelprobe_core::traverse::{Cell, CellIndex, CellSource, Path as PlannedPath, TerrainGrid};

use crate::error::{CliError, Result};

/// One cell of a hand-written grid: a soil name, a score, or predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridEntry {
    Score(f64),
    Soil(String),
    Probed { sinkage: f64, slip: f64 },
}

/// Compact grid definition, one inner list per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// m.
    pub cell_size: f64,
    pub cells: Vec<Vec<GridEntry>>,
}

impl GridSpec {
    pub fn to_grid(&self) -> Result<TerrainGrid, String> {
        let rows = self.cells.len();
        let cols = self.cells.first().map_or(0, Vec::len);
        if let Some(r) = self.cells.iter().position(|row| row.len() != cols) {
            return Err(format!(
                "row {r} has {} cells, expected {cols}",
                self.cells[r].len()
            ));
        }
        let cells = self
            .cells
            .iter()
            .flatten()
            .map(|e| match e {
                GridEntry::Score(t) => Cell::scored(*t),
                GridEntry::Soil(name) => Cell::soil(name),
                GridEntry::Probed { sinkage, slip } => Cell::from_source(CellSource::Probed {
                    sinkage: *sinkage,
                    slip: *slip,
                }),
            })
            .collect();
        TerrainGrid::new(rows, cols, self.cell_size, cells).map_err(|e| e.to_string())
    }
}

/// Either a [`GridSpec`] or a full (possibly scored) [`TerrainGrid`].
pub fn read_grid(path: &Path) -> Result<TerrainGrid> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::format(path, e))?;
    let grid = if value.get("rows").is_some() {
        let g: TerrainGrid =
            serde_json::from_value(value).map_err(|e| CliError::format(path, e))?;
        g.validate().map_err(|e| CliError::format(path, e))?;
        g
    } else {
        let spec: GridSpec =
            serde_json::from_value(value).map_err(|e| CliError::format(path, e))?;
        spec.to_grid().map_err(|e| CliError::format(path, e))?
    };
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub start: CellIndex,
    pub goal: CellIndex,
    /// (row, col) from start to goal.
    pub cells: Vec<CellIndex>,
    pub total_cost: f64,
    pub min_cell_score: f64,
    /// Geometric length, m.
    pub length: f64,
}

impl PathReport {
    pub fn new(path: &PlannedPath, cell_size: f64) -> Self {
        let length = path
            .cells
            .windows(2)
            .map(|w| {
                if w[0].0 != w[1].0 && w[0].1 != w[1].1 {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                }
            })
            .sum::<f64>()
            * cell_size;
        Self {
            start: path.cells[0],
            goal: *path.cells.last().expect("paths are non-empty"),
            cells: path.cells.clone(),
            total_cost: path.total_cost,
            min_cell_score: path.min_cell_score,
            length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleReport {
    pub start: CellIndex,
    pub goal: CellIndex,
    pub reason: String,
    pub reachable: usize,
    /// Impassable cells bordering the region reachable from the start.
    pub frontier: Vec<CellIndex>,
}

const CELL_PX: usize = 24;

/// Red (T = 0) through yellow to green (T = 1); grey when unscored.
fn colour(t: Option<f64>) -> String {
    match t {
        None => "#9e9e9e".into(),
        Some(0.0) => "#212121".into(),
        Some(t) => {
            let t = t.clamp(0.0, 1.0);
            let (r, g) = if t < 0.5 {
                (255.0, 510.0 * t)
            } else {
                (510.0 * (1.0 - t), 255.0)
            };
            format!("#{:02x}{:02x}40", r.round() as u8, g.round() as u8)
        }
    }
}

/// Heatmap of cell scores with the path overlaid; black cells are impassable.
pub fn heatmap_svg(grid: &TerrainGrid, path: Option<&[CellIndex]>) -> String {
    let (w, h) = (grid.cols * CELL_PX, grid.rows * CELL_PX);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            let t = grid.score((row, col));
            let _ = writeln!(
                s,
                r#"  <rect x="{}" y="{}" width="{CELL_PX}" height="{CELL_PX}" fill="{}"><title>({row}, {col}) T={}</title></rect>"#,
                col * CELL_PX,
                row * CELL_PX,
                colour(t),
                t.map_or("unscored".into(), |t| format!("{t:.3}")),
            );
        }
    }
    if let Some(cells) = path.filter(|c| !c.is_empty()) {
        let centre = |(r, c): CellIndex| ((c * CELL_PX + CELL_PX / 2), (r * CELL_PX + CELL_PX / 2));
        let pts: Vec<String> = cells
            .iter()
            .map(|&i| {
                let (x, y) = centre(i);
                format!("{x},{y}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"  <polyline points="{}" fill="none" stroke="#1565c0" stroke-width="3" stroke-linejoin="round"/>"##,
            pts.join(" ")
        );
        for (&i, fill) in [
            (&cells[0], "#ffffff"),
            (cells.last().expect("non-empty"), "#1565c0"),
        ] {
            let (x, y) = centre(i);
            let _ = writeln!(
                s,
                r##"  <circle cx="{x}" cy="{y}" r="5" fill="{fill}" stroke="#1565c0" stroke-width="2"/>"##
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_mixes_entry_kinds() {
        let spec: GridSpec = serde_json::from_str(
            r#"{"cell_size": 0.1, "cells": [["quartz", 0.5], [{"sinkage": 0.01, "slip": 0.2}, "desert"]]}"#,
        )
        .unwrap();
        let g = spec.to_grid().unwrap();
        assert_eq!((g.rows, g.cols), (2, 2));
        assert_eq!(g.cell((0, 0)).source, CellSource::Soil("quartz".into()));
        assert_eq!(g.score((0, 1)), Some(0.5));
        assert_eq!(
            g.cell((1, 0)).source,
            CellSource::Probed {
                sinkage: 0.01,
                slip: 0.2
            }
        );
    }

    #[test]
    fn ragged_rows_and_bad_scores_rejected() {
        let ragged = GridSpec {
            cell_size: 0.1,
            cells: vec![vec![GridEntry::Score(1.0)], vec![]],
        };
        assert!(ragged.to_grid().unwrap_err().contains("row 1"));
        let bad = GridSpec {
            cell_size: 0.1,
            cells: vec![vec![GridEntry::Score(1.5)]],
        };
        assert!(bad.to_grid().is_err());
    }

    #[test]
    fn svg_has_one_rect_per_cell_and_a_path() {
        let g = TerrainGrid::filled(3, 4, 0.1, Cell::scored(0.7));
        let svg = heatmap_svg(&g, Some(&[(0, 0), (1, 1), (2, 2)]));
        assert_eq!(svg.matches("<rect").count(), 12);
        assert!(svg.contains("<polyline points=\"12,12 36,36 60,60\""));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(colour(Some(1.0)), "#00ff40");
        assert_eq!(colour(Some(0.0)), "#212121");
    }
}
