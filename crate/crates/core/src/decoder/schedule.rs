//! Deferral of check updates around punctured columns.
//!
//! A location (base edge) is only updated once every *other* column of its
//! row is either transmitted or a punctured column that has already received
//! a check message. Before that its outgoing message would be computed from
//! an all-zero punctured input and carry no information.

use crate::code::LiftedCode;

/// Per-iteration activity of base edges; iterations past the stored masks
/// are fully active.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activation {
    masks: Vec<Vec<bool>>,
}

fn edge_mask(code: &LiftedCode, row: usize, informed: &[bool]) -> Vec<(usize, bool)> {
    let edges = code.row_edges(row);
    edges
        .iter()
        .map(|&e| {
            let own = code.edge(e).col;
            let blocked = edges.iter().any(|&o| {
                let c = code.edge(o).col;
                c != own && code.base().is_punctured(c) && !informed[c]
            });
            (e, !blocked)
        })
        .collect()
}

impl Activation {
    /// Everything active from the start.
    pub fn all_active() -> Self {
        Activation { masks: Vec::new() }
    }

    /// Flooding: all rows see the informed set of the previous iteration.
    pub fn flooding(code: &LiftedCode) -> Self {
        let mut informed = vec![false; code.base().cols()];
        let mut masks = Vec::new();
        loop {
            let mut mask = vec![false; code.edge_count()];
            let mut newly = Vec::new();
            for r in 0..code.base().rows() {
                for (e, active) in edge_mask(code, r, &informed) {
                    mask[e] = active;
                    if active {
                        newly.push(code.edge(e).col);
                    }
                }
            }
            if mask.iter().all(|&a| a) {
                break;
            }
            let before = informed.clone();
            newly.into_iter().for_each(|c| informed[c] = true);
            masks.push(mask);
            if informed == before {
                // rows that block each other forever are released at once
                break;
            }
        }
        Activation { masks }
    }

    /// Row-layered: rows in ascending order see columns informed by
    /// earlier rows of the same sweep.
    pub fn layered(code: &LiftedCode) -> Self {
        let mut informed = vec![false; code.base().cols()];
        let mut masks = Vec::new();
        loop {
            let before = informed.clone();
            let mut mask = vec![false; code.edge_count()];
            for r in 0..code.base().rows() {
                for (e, active) in edge_mask(code, r, &informed) {
                    mask[e] = active;
                    if active {
                        informed[code.edge(e).col] = true;
                    }
                }
            }
            if mask.iter().all(|&a| a) {
                break;
            }
            masks.push(mask);
            if informed == before {
                break;
            }
        }
        Activation { masks }
    }

    /// Mask of iteration `i`, `None` when everything is active.
    pub fn mask(&self, iteration: usize) -> Option<&[bool]> {
        self.masks.get(iteration).map(|m| m.as_slice())
    }

    #[inline]
    pub fn is_active(&self, iteration: usize, edge: usize) -> bool {
        self.masks.get(iteration).is_none_or(|m| m[edge])
    }

    /// Number of leading iterations with deferred locations.
    pub fn deferred_iterations(&self) -> usize {
        self.masks.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{BaseGraph, LoadOptions};

    fn bg1() -> LiftedCode {
        LiftedCode::lift(&BaseGraph::nr_bg1_set0(), 2).unwrap()
    }

    fn has(code: &LiftedCode, r: usize, c: usize) -> bool {
        code.base().has_edge(r, c)
    }

    #[test]
    fn flooding_defers_only_the_first_iteration_on_bg1() {
        let code = bg1();
        let act = Activation::flooding(&code);
        assert_eq!(act.deferred_iterations(), 1);
        for (e, edge) in code.edges().iter().enumerate() {
            let (p0, p1) = (has(&code, edge.row, 0), has(&code, edge.row, 1));
            let expected = match edge.col {
                0 => !p1,
                1 => !p0,
                _ => !p0 && !p1,
            };
            assert_eq!(act.is_active(0, e), expected, "edge {e} {edge:?}");
            assert!(act.is_active(1, e));
        }
    }

    #[test]
    fn layered_informs_within_the_sweep() {
        let code = bg1();
        let act = Activation::layered(&code);
        assert_eq!(act.deferred_iterations(), 1);
        // first row that connects to column 1 but not column 0
        let r1 = (0..code.base().rows())
            .find(|&r| has(&code, r, 1) && !has(&code, r, 0))
            .unwrap();
        let r0 = (0..code.base().rows())
            .find(|&r| has(&code, r, 0) && !has(&code, r, 1))
            .unwrap();
        let both_after =
            (r0.max(r1) + 1..code.base().rows()).find(|&r| has(&code, r, 0) && has(&code, r, 1));
        if let Some(r) = both_after {
            assert!(code.row_edges(r).iter().all(|&e| act.is_active(0, e)));
        }
        // rows before either column is informed behave like flooding
        let flood = Activation::flooding(&code);
        for r in 0..r0.min(r1) {
            for &e in code.row_edges(r) {
                assert_eq!(act.is_active(0, e), flood.is_active(0, e));
            }
        }
    }

    #[test]
    fn no_puncturing_means_no_deferral() {
        let bg =
            BaseGraph::parse("2 4 2 4\n0 -1 0 0\n-1 1 0 -1\n", LoadOptions::default()).unwrap();
        let code = LiftedCode::lift(&bg, 3).unwrap();
        assert_eq!(Activation::flooding(&code).deferred_iterations(), 0);
        assert_eq!(Activation::layered(&code).deferred_iterations(), 0);
    }

    #[test]
    fn mutual_blocking_is_released() {
        // both punctured columns share every row
        let bg = BaseGraph::parse(
            "2 4 2 4\npunctured 0 1\n0 0 0 0\n0 0 0 0\n",
            LoadOptions::default(),
        )
        .unwrap();
        let code = LiftedCode::lift(&bg, 1).unwrap();
        let act = Activation::flooding(&code);
        assert_eq!(act.deferred_iterations(), 1);
        assert!((0..code.edge_count()).all(|e| act.is_active(1, e)));
    }
}
