//! Combinatorial baselines: greedy colouring of the complement graph and the
//! Least Difference Greedy (LDG) row-merging heuristic.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::SideInfoGraph;
use crate::rankmin::{Cell, PatternMatrix};
use crate::rng::RngSeed;

/// Partition of the vertex set into cliques.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueCover {
    pub cliques: Vec<Vec<usize>>,
}

impl CliqueCover {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Checks that the sets partition the vertices and each induces a clique in `g`.
    pub fn validate(&self, g: &SideInfoGraph) -> Result<()> {
        let mut seen = vec![false; g.n()];
        for clique in &self.cliques {
            for &v in clique {
                if v >= g.n() || seen[v] {
                    return Err(Error::Precondition(format!(
                        "vertex {v} missing from graph or covered twice"
                    )));
                }
                seen[v] = true;
                if let Some(&u) = clique.iter().find(|&&u| u != v && !g.has_edge(v, u)) {
                    return Err(Error::Precondition(format!("{v} and {u} are not adjacent")));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Precondition("cover misses a vertex".into()));
        }
        Ok(())
    }
}

/// Sequential greedy colouring of the complement of `g`, visiting vertices
/// by descending complement degree (ties by index). Colour classes are
/// cliques of `g`.
pub fn greedy_clique_cover(g: &SideInfoGraph) -> Result<CliqueCover> {
    if !g.is_symmetric() {
        return Err(Error::InvalidKind);
    }
    let n = g.n();
    let comp_deg = |v: usize| n - 1 - g.out_degree(v);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| comp_deg(b).cmp(&comp_deg(a)).then(a.cmp(&b)));


    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        // smallest colour with no complement-neighbour, i.e. all members adjacent in g
        let c = classes
            .iter()
            .position(|class| class.iter().all(|&u| g.has_edge(v, u)))
            .unwrap_or(classes.len());
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(v);

    }
    for class in &mut classes {
        class.sort_unstable();
    }
    Ok(CliqueCover { cliques: classes })
}

pub fn greedy_coloring_number(g: &SideInfoGraph) -> Result<usize> {
    greedy_clique_cover(g).map(|c| c.len())
}

/// How LDG picks among several mergeable rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LdgChoice {
    /// Lowest-index mergeable row.
    #[default]
    First,
    /// Uniformly random mergeable row from a seeded stream.
    Random(RngSeed),
}

/// Result of LDG: surviving symbolic rows and the users merged into each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdgMatrix {
    pub rows: Vec<Vec<Cell>>,
    pub origin: Vec<Vec<usize>>,
}

impl LdgMatrix {
    /// Code length.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Message indices summed in each transmission (positions holding `One`).
    pub fn transmissions(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &c)| c == Cell::One)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }
}

/// No column has `One` in one row and `Zero` in the other.
pub fn mergeable(a: &[Cell], b: &[Cell]) -> bool {
    a.iter().zip(b).all(|pair| {
        !matches!(
            pair,
            (Cell::One, Cell::Zero) | (Cell::Zero, Cell::One)
        )
    })
}

fn merge_into(dst: &mut [Cell], src: &[Cell]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        if *d == Cell::Star {
            *d = s;
        }
    }
}

/// Least Difference Greedy clique cover over a square pattern.
pub fn ldg(pattern: &PatternMatrix, choice: LdgChoice) -> LdgMatrix {
    let n = pattern.rows();
    let mut rows: Vec<Vec<Cell>> = (0..n)
        .map(|i| (0..pattern.cols()).map(|j| pattern.cell(i, j)).collect())
        .collect();
    let mut origin: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut rng = match choice {
        LdgChoice::Random(seed) => Some(seed.rng()),
        LdgChoice::First => None,
    };

    let mut i = 0;
    while i < rows.len() {
        loop {
            let candidates: Vec<usize> = (i + 1..rows.len())
                .filter(|&j| mergeable(&rows[i], &rows[j]))
                .collect();
            if candidates.is_empty() {
                break;
            }
            let j = match rng.as_mut() {
                Some(r) => candidates[r.random_range(0..candidates.len())],
                None => candidates[0],
            };
            let src = rows.remove(j);
            merge_into(&mut rows[i], &src);
            let members = origin.remove(j);
            origin[i].extend(members);
        }
        origin[i].sort_unstable();
        i += 1;
    }
    LdgMatrix { rows, origin }
}
