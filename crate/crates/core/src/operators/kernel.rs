//! Per-side-length window kernels behind the maximal operators.
//!
//! For a fixed side `L` the statistic of every admissible window is computed
//! once (window means come from the prefix table), then each cell takes the
//! largest value among the windows covering it via [`spread_extreme`]. The
//! per-side fields are merged with an elementwise maximum, which is exact, so
//! the result does not depend on how the sides are scheduled.

use rayon::prelude::*;

use super::BoundaryMode;
use crate::grid::{GridCube, PrefixTable, Shape};
use crate::window::{spread_extreme, Extreme};

/// Statistic of a window that the maximal operator takes the supremum of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum WindowStat {
    /// Mean of `|f|`.
    AbsMean,
    /// Mean oscillation `|Q|^{-1} sum_Q |f - f_Q|`.
    Oscillation,
}

/// First anchor and anchor count along `axis` for windows of `side` cells.
fn anchor_span(shape: Shape, side: usize, axis: usize, zero_extension: bool) -> (i64, usize) {
    if axis >= shape.dim {
        (0, 1)
    } else if zero_extension {
        (1 - side as i64, shape.n + side - 1)
    } else {
        (0, shape.n - side + 1)
    }
}

/// Statistic of the window `q` of the zero-extended function `values`.
#[inline]
pub(crate) fn window_stat(
    shape: Shape,
    values: &[f64],
    table: &PrefixTable,
    q: &GridCube,
    stat: WindowStat,
) -> f64 {
    if q.side() == 1 {
        // unit cells are always inside the domain; read them exactly
        let a = q.anchor();
        let v = values[shape.index([a[0] as usize, a[1] as usize])];
        return match stat {
            WindowStat::AbsMean => v.abs(),
            WindowStat::Oscillation => 0.0,
        };
    }
    let cells = q.cell_count() as f64;
    match stat {
        WindowStat::AbsMean => table.clipped_abs_sum(q) / cells,
        WindowStat::Oscillation => {
            let mean = table.clipped_sum(q) / cells;
            oscillation_about(shape, values, q, mean)
        }
    }
}

/// `|Q|^{-1} sum_Q |f - c|` for the zero extension of `values`.
#[inline]
pub(crate) fn oscillation_about(shape: Shape, values: &[f64], q: &GridCube, c: f64) -> f64 {
    let e1 = shape.extent(1);
    let mut acc = 0.0;
    let mut inside = 0usize;
    if let Some([r0, r1]) = q.clipped_ranges(shape) {
        inside = r0.len() * r1.len();
        for i in r0 {
            let row = &values[i * e1 + r1.start..i * e1 + r1.end];
            for v in row {
                acc += (v - c).abs();
            }
        }
    }
    let cells = q.cell_count();
    acc += (cells - inside) as f64 * c.abs();
    acc / cells as f64
}

fn cube_at(shape: Shape, anchor: [i64; 2], side: usize) -> GridCube {
    if shape.dim == 1 {
        GridCube::new_1d(anchor[0], side)
    } else {
        GridCube::new_2d(anchor, side)
    }
}

/// Field of per-cell maxima over the windows of one side length.
fn side_field(
    shape: Shape,
    values: &[f64],
    table: &PrefixTable,
    side: usize,
    zero_extension: bool,
    stat: WindowStat,
) -> Vec<f64> {
    let (o0, n0) = anchor_span(shape, side, 0, zero_extension);
    let (o1, n1) = anchor_span(shape, side, 1, zero_extension);
    let mut w = Vec::with_capacity(n0 * n1);
    for a0 in 0..n0 {
        for a1 in 0..n1 {
            let q = cube_at(shape, [o0 + a0 as i64, o1 + a1 as i64], side);
            w.push(window_stat(shape, values, table, &q, stat));
        }
    }
    spread_extreme(
        &w,
        [n0, n1],
        [o0, o1],
        [side, shape.cube_extent(side, 1)],
        shape.extents(),
        Extreme::Max,
    )
}

/// Field of the dyadic level with cubes of `side` cells: each cell gets the
/// statistic of the dyadic cube that contains it.
fn dyadic_level(
    shape: Shape,
    values: &[f64],
    table: &PrefixTable,
    side: usize,
    stat: WindowStat,
) -> Vec<f64> {
    let e1 = shape.extent(1);
    let blocks1 = shape.extent(1) / shape.cube_extent(side, 1);
    let mut out = vec![0.0; shape.cells()];
    for b0 in 0..shape.n / side {
        for b1 in 0..blocks1 {
            let anchor = [(b0 * side) as i64, (b1 * side) as i64];
            let q = cube_at(shape, anchor, side);
            let v = window_stat(shape, values, table, &q, stat);
            for i in q.cell_indices(shape) {
                out[i] = v;
            }
        }
    }
    debug_assert_eq!(out.len() % e1, 0);
    out
}

fn merge_max(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        if y > *x {
            *x = y;
        }
    }
    a
}

/// Supremum field of `stat` over the cube family of `mode`.
///
/// `cap` bounds the side of zero-extension cubes; dyadic mode requires a
/// power-of-two `shape.n`. Cost is `O(N^d)` window evaluations per side
/// length for [`WindowStat::AbsMean`] and `O(N^d L^d)` for oscillations.
pub(crate) fn maximal_field(
    shape: Shape,
    values: &[f64],
    table: &PrefixTable,
    mode: BoundaryMode,
    cap: usize,
    stat: WindowStat,
) -> Vec<f64> {
    let zeros = || vec![0.0; shape.cells()];
    match mode {
        BoundaryMode::Dyadic => {
            debug_assert!(shape.n.is_power_of_two());
            let sides: Vec<usize> = (0..=shape.n.trailing_zeros()).map(|k| 1usize << k).collect();
            sides
                .into_par_iter()
                .map(|side| dyadic_level(shape, values, table, side, stat))
                .reduce(zeros, merge_max)
        }
        BoundaryMode::Restricted => (1..=shape.n)
            .into_par_iter()
            .map(|side| side_field(shape, values, table, side, false, stat))
            .reduce(zeros, merge_max),
        BoundaryMode::ZeroExtension => (1..=cap)
            .into_par_iter()
            .map(|side| side_field(shape, values, table, side, true, stat))
            .reduce(zeros, merge_max),
    }
}
