use crate::grid::{Cell, GridMap};

pub const WAREHOUSE_ROWS: usize = 21;
pub const WAREHOUSE_COLS: usize = 35;

/// Reconstructed 21 x 35 warehouse: ten 1 x 10 shelves in two columns of
/// five, separated by three-row aisles, with two free rows above and below
/// and three free columns on each side. 100 blocked cells out of 735.
pub fn builtin_warehouse() -> GridMap {
    let mut map = GridMap::empty(WAREHOUSE_COLS, WAREHOUSE_ROWS);
    for shelf_row in [2, 6, 10, 14, 18] {
        for left in [3, 22] {
            for x in left..left + 10 {
                map.set_blocked(Cell::new(x, shelf_row), true);
            }
        }
    }
    map
}

pub fn builtin_empty(width: usize, height: usize) -> GridMap {
    GridMap::empty(width, height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Connectivity, MoveGraph, MoveModel};

    #[test]
    fn warehouse_dimensions_and_counts() {
        let m = builtin_warehouse();
        assert_eq!((m.height(), m.width()), (21, 35));
        assert_eq!(m.blocked_count(), 100);
        assert_eq!(m.len() - m.blocked_count(), 635);
        for y in [0, 1, 19, 20] {
            assert!((0..35).all(|x| !m.is_blocked_xy(x, y)));
        }
        for x in [0, 1, 2, 32, 33, 34] {
            assert!((0..21).all(|y| !m.is_blocked_xy(x, y)));
        }
    }

    #[test]
    fn warehouse_is_connected() {
        let m = builtin_warehouse();
        for conn in [Connectivity::Four, Connectivity::Eight] {
            let g = MoveGraph::new(&m, MoveModel::new(conn, 0.5 - 1e-6));
            let labels = g.components(&m);
            let free: Vec<usize> = m.free_cells().map(|c| labels[m.index(c)]).collect();
            assert!(free.iter().all(|&l| l == free[0]));
        }
    }
}
