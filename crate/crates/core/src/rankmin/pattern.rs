use std::fmt;

use nalgebra::DMatrix;

use crate::graph::SideInfoGraph;

/// Classification of one cell of the index-coding matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    /// Fixed to 0: the user neither wants nor caches this message.
    Zero,
    /// Fixed to 1: the wanted message.
    One,
    /// Free: the user caches this message.
    Star,
}

/// Symbolic pattern of the matrix to complete.
///
/// Square patterns come from a side-information graph (row `i` wants message
/// `i`). Rectangular patterns carry one row per receiver and one column per
/// message, with `One` at the wanted column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
}

impl PatternMatrix {
    /// Diagonal `One`, `Star` on edges, `Zero` elsewhere.
    pub fn from_graph(g: &SideInfoGraph) -> Self {
        let n = g.n();
        let mut cells = vec![Cell::Zero; n * n];
        for i in 0..n {
            cells[i * n + i] = Cell::One;
        }
        for (i, j) in g.edges() {
            cells[i * n + j] = Cell::Star;
        }
        PatternMatrix {
            rows: n,
            cols: n,
            cells,
        }
    }

    /// Identity pattern (no side information).
    pub fn identity(n: usize) -> Self {
        Self::from_graph(&SideInfoGraph::empty(n, crate::graph::GraphKind::Undirected))
    }

    /// Rectangular receiver pattern: row `k` wants `wants[k]` and caches `has[k]`.
    pub fn from_receivers(cols: usize, receivers: &[(usize, Vec<usize>)]) -> Self {
        let rows = receivers.len();
        let mut cells = vec![Cell::Zero; rows * cols];
        for (k, (want, has)) in receivers.iter().enumerate() {
            for &h in has {
                cells[k * cols + h] = Cell::Star;
            }
            cells[k * cols + want] = Cell::One;
        }
        PatternMatrix { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.cols + j]
    }

    /// Whether the pattern equals its transpose.
    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.cell(i, j) == self.cell(j, i)))
    }

    /// Number of `Star` cells in a row.
    pub fn stars_in_row(&self, i: usize) -> usize {
        (0..self.cols).filter(|&j| self.cell(i, j) == Cell::Star).count()
    }

    /// Column index of the `One` in row `i`, if any.
    pub fn wanted(&self, i: usize) -> Option<usize> {
        (0..self.cols).find(|&j| self.cell(i, j) == Cell::One)
    }

    /// Fixed cells as `(row, col, target)`.
    pub fn fixed_cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (0..self.cols).filter_map(move |j| match self.cell(i, j) {
                Cell::Zero => Some((i, j, 0.0)),
                Cell::One => Some((i, j, 1.0)),
                Cell::Star => None,
            })
        })
    }

    /// Whether `m` lies in the affine region of this pattern, up to `tol`.
    pub fn contains(&self, m: &DMatrix<f64>, tol: f64) -> bool {
        m.nrows() == self.rows
            && m.ncols() == self.cols
            && self
                .fixed_cells()
                .all(|(i, j, t)| (m[(i, j)] - t).abs() <= tol)
    }
}

impl fmt::Display for PatternMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(match self.cell(i, j) {
                    Cell::Zero => "0",
                    Cell::One => "1",
                    Cell::Star => "*",
                })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}
