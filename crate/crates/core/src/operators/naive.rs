//! Brute-force twins of the maximal operators: enumerate every cube of the
//! mode's family, compute its statistic by direct summation and scatter the
//! maximum to the covered cells. No prefix tables, no deques.

use super::BoundaryMode;
use crate::grid::{enumerate_cubes, CubeSelection, GridCube, Shape};

pub(crate) fn family(shape: Shape, mode: BoundaryMode, cap: usize) -> Vec<GridCube> {
    match mode {
        BoundaryMode::Restricted => enumerate_cubes(shape.n, shape.dim, CubeSelection::All).collect(),
        BoundaryMode::Dyadic => enumerate_cubes(shape.n, shape.dim, CubeSelection::Dyadic).collect(),
        BoundaryMode::ZeroExtension => {
            let mut out = Vec::new();
            let n = shape.n as i64;
            for side in 1..=cap {
                let lo = 1 - side as i64;
                for a0 in lo..n {
                    if shape.dim == 1 {
                        out.push(GridCube::new_1d(a0, side));
                    } else {
                        for a1 in lo..n {
                            out.push(GridCube::new_2d([a0, a1], side));
                        }
                    }
                }
            }
            out
        }
    }
}

pub(crate) fn naive_field(
    shape: Shape,
    values: &[f64],
    mode: BoundaryMode,
    cap: usize,
    oscillation: bool,
) -> Vec<f64> {
    let mut out = vec![0.0f64; shape.cells()];
    let mut covered = Vec::new();
    for q in family(shape, mode, cap) {
        covered.clear();
        covered.extend(q.cell_indices(shape));
        let cells = q.cell_count() as f64;
        let stat = if oscillation {
            let mut s = 0.0;
            for &i in &covered {
                s += values[i];
            }
            let mean = s / cells;
            let mut dev = 0.0;
            for &i in &covered {
                dev += (values[i] - mean).abs();
            }
            dev += (q.cell_count() - covered.len()) as f64 * mean.abs();
            dev / cells
        } else {
            let mut s = 0.0;
            for &i in &covered {
                s += values[i].abs();
            }
            s / cells
        };
        for &i in &covered {
            if stat > out[i] {
                out[i] = stat;
            }
        }
    }
    out
}
