//! Sliding-window extrema with a monotone deque.
//!
//! [`spread_extreme`] pushes anchor-indexed window values back to the cells
//! each window covers, as two separable 1-d passes. 1-d grids use a trivial
//! second axis of extent 1.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Extreme {
    Max,
    #[cfg(test)]
    Min,
}

impl Extreme {
    /// True when `back` can never again be the answer once `new` is in the window.
    /// Equal values are kept, so results do not depend on scan direction.
    #[inline]
    fn dominated(self, back: f64, new: f64) -> bool {
        match self {
            Extreme::Max => back < new,
            #[cfg(test)]
            Extreme::Min => back > new,
        }
    }
}

/// For each query coordinate `x = first_query + i`, writes to `out[i]` the extreme of
/// `seq[k]` over the positions `offset + k` in `[x + 1 - width, x]`.
///
/// Every query window must contain at least one position of `seq`.
pub(crate) fn sliding_extreme(
    seq: &[f64],
    offset: i64,
    width: usize,
    first_query: i64,
    out: &mut [f64],
    ext: Extreme,
    deque: &mut VecDeque<usize>,
) {
    deque.clear();
    let mut next = 0usize;
    for (i, slot) in out.iter_mut().enumerate() {
        let x = first_query + i as i64;
        while next < seq.len() && offset + next as i64 <= x {
            while let Some(&b) = deque.back() {
                if ext.dominated(seq[b], seq[next]) {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = x + 1 - width as i64;
        while let Some(&f) = deque.front() {
            if offset + (f as i64) < lo {
                deque.pop_front();
            } else {
                break;
            }
        }
        *slot = seq[*deque.front().expect("query window covers no position")];
    }
}

/// For each cell of a `cells[0] x cells[1]` grid, the extreme of the window values
/// `w` (row-major over `anchors[0] x anchors[1]` anchors starting at `offsets`)
/// over all windows of size `win` that cover the cell.
pub(crate) fn spread_extreme(
    w: &[f64],
    anchors: [usize; 2],
    offsets: [i64; 2],
    win: [usize; 2],
    cells: [usize; 2],
    kind: Extreme,
) -> Vec<f64> {
    debug_assert_eq!(w.len(), anchors[0] * anchors[1]);
    let mut dq = VecDeque::new();

    let mut rows = vec![0.0; anchors[0] * cells[1]];
    for a in 0..anchors[0] {
        sliding_extreme(
            &w[a * anchors[1]..(a + 1) * anchors[1]],
            offsets[1],
            win[1],
            0,
            &mut rows[a * cells[1]..(a + 1) * cells[1]],
            kind,
            &mut dq,
        );
    }
    let mut out = vec![0.0; cells[0] * cells[1]];
    let mut col = vec![0.0; anchors[0]];
    let mut res = vec![0.0; cells[0]];
    for j in 0..cells[1] {
        for (a, c) in col.iter_mut().enumerate() {
            *c = rows[a * cells[1] + j];
        }
        sliding_extreme(&col, offsets[0], win[0], 0, &mut res, kind, &mut dq);
        for (i, r) in res.iter().enumerate() {
            out[i * cells[1] + j] = *r;
        }
    }
    out
}
