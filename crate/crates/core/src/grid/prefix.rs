use std::ops::Range;

use super::{GridCube, GridFunction, Shape, Weight};
use crate::error::Result;

/// Exclusive prefix sums `[0, v0, v0+v1, ..., total]` (length `n + 1`) computed
/// with a work-efficient up-sweep/down-sweep tree, so every entry is a sum of
/// `O(log n)` pairwise partial sums.
pub(crate) fn tree_exclusive_scan(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let m = n.next_power_of_two();
    let mut buf = vec![0.0; m];
    buf[..n].copy_from_slice(values);

    let mut stride = 1;
    while stride < m {
        let step = 2 * stride;
        for i in (0..m).step_by(step) {
            buf[i + step - 1] += buf[i + stride - 1];
        }
        stride = step;
    }
    let total = buf[m - 1];
    buf[m - 1] = 0.0;
    let mut stride = m / 2;
    while stride >= 1 {
        let step = 2 * stride;
        for i in (0..m).step_by(step) {
            let left = buf[i + stride - 1];
            buf[i + stride - 1] = buf[i + step - 1];
            buf[i + step - 1] += left;
        }
        stride /= 2;
    }

    let mut out = Vec::with_capacity(n + 1);
    out.extend_from_slice(&buf[..n]);
    out.push(total);
    out
}

/// Summed-area table with a leading row and column of zeros.
fn summed_area(shape: Shape, values: impl Fn(usize) -> f64) -> Vec<f64> {
    let [e0, e1] = shape.extents();
    let w = e1 + 1;
    let mut rows = vec![0.0; e0 * w];
    let mut row = vec![0.0; e1];
    for i in 0..e0 {
        for (j, r) in row.iter_mut().enumerate() {
            *r = values(i * e1 + j);
        }
        rows[i * w..(i + 1) * w].copy_from_slice(&tree_exclusive_scan(&row));
    }
    let mut table = vec![0.0; (e0 + 1) * w];
    let mut col = vec![0.0; e0];
    for j in 0..w {
        for (i, c) in col.iter_mut().enumerate() {
            *c = rows[i * w + j];
        }
        for (i, s) in tree_exclusive_scan(&col).into_iter().enumerate() {
            table[i * w + j] = s;
        }
    }
    table
}

/// Cumulative sums of a grid function and of its absolute value, for `O(1)`
/// sums over any cube.
#[derive(Clone, Debug)]
pub struct PrefixTable {
    shape: Shape,
    sums: Vec<f64>,
    abs_sums: Vec<f64>,
}

impl PrefixTable {
    pub fn new(f: &GridFunction) -> Self {
        PrefixTable::from_values(f.shape(), f.values())
    }

    /// Table over an arbitrary (not necessarily power-of-two) sub-grid.
    pub(crate) fn from_values(shape: Shape, values: &[f64]) -> Self {
        debug_assert_eq!(values.len(), shape.cells());
        PrefixTable {
            shape,
            sums: summed_area(shape, |i| values[i]),
            abs_sums: summed_area(shape, |i| values[i].abs()),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    fn cell_volume(&self) -> f64 {
        (1.0 / self.shape.n as f64).powi(self.shape.dim as i32)
    }

    #[inline]
    fn rect(table: &[f64], w: usize, r0: &Range<usize>, r1: &Range<usize>) -> f64 {
        table[r0.end * w + r1.end] - table[r0.start * w + r1.end] - table[r0.end * w + r1.start]
            + table[r0.start * w + r1.start]
    }

    /// Raw (unscaled) sum of the values on the domain cells covered by `q`;
    /// cells of `q` outside the domain contribute zero.
    #[inline]
    pub(crate) fn clipped_sum(&self, q: &GridCube) -> f64 {
        match q.clipped_ranges(self.shape) {
            Some([r0, r1]) => Self::rect(&self.sums, self.shape.extent(1) + 1, &r0, &r1),
            None => 0.0,
        }
    }

    #[inline]
    pub(crate) fn clipped_abs_sum(&self, q: &GridCube) -> f64 {
        match q.clipped_ranges(self.shape) {
            Some([r0, r1]) => Self::rect(&self.abs_sums, self.shape.extent(1) + 1, &r0, &r1),
            None => 0.0,
        }
    }

    /// Integral of the function over `q`: sum of covered cell values times the cell volume.
    pub fn cube_sum(&self, q: &GridCube) -> Result<f64> {
        q.check_within(self.shape)?;
        Ok(self.clipped_sum(q) * self.cell_volume())
    }

    /// Integral of `|f|` over `q`.
    pub fn cube_abs_sum(&self, q: &GridCube) -> Result<f64> {
        q.check_within(self.shape)?;
        Ok(self.clipped_abs_sum(q) * self.cell_volume())
    }

    /// The cube mean `f_Q`.
    pub fn cube_average(&self, q: &GridCube) -> Result<f64> {
        q.check_within(self.shape)?;
        Ok(self.clipped_sum(q) / q.cell_count() as f64)
    }

    /// Raw sum of every cell value.
    pub fn total(&self) -> f64 {
        let w = self.shape.extent(1) + 1;
        self.sums[self.shape.extent(0) * w + self.shape.extent(1)]
    }

    pub fn abs_total(&self) -> f64 {
        let w = self.shape.extent(1) + 1;
        self.abs_sums[self.shape.extent(0) * w + self.shape.extent(1)]
    }
}

/// The measure `w(Q)` induced by a weight.
#[derive(Clone, Debug)]
pub struct WeightedMeasure {
    table: PrefixTable,
}

impl WeightedMeasure {
    pub fn new(w: &Weight) -> Self {
        WeightedMeasure {
            table: PrefixTable::new(w.as_grid()),
        }
    }

    /// `w(Q)`, strictly positive for every cube inside the domain.
    pub fn measure(&self, q: &GridCube) -> Result<f64> {
        self.table.cube_sum(q)
    }

    pub fn table(&self) -> &PrefixTable {
        &self.table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{enumerate_cubes, CubeSelection};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_sum(f: &GridFunction, q: &GridCube) -> f64 {
        q.cell_indices(f.shape()).map(|i| f.values()[i]).sum::<f64>() * f.cell_volume()
    }

    #[test]
    fn scan_matches_sequential() {
        for n in [0usize, 1, 2, 3, 5, 8, 13, 64, 100] {
            let v: Vec<f64> = (0..n).map(|i| (i * i % 7) as f64 - 2.5).collect();
            let s = tree_exclusive_scan(&v);
            assert_eq!(s.len(), n + 1);
            let mut acc = 0.0;
            for i in 0..=n {
                assert!((s[i] - acc).abs() < 1e-12, "n={n} i={i}");
                if i < n {
                    acc += v[i];
                }
            }
        }
    }

    #[test]
    fn trivial_sums() {
        let f = GridFunction::constant(1, 8, 5.0).unwrap();
        let t = PrefixTable::new(&f);
        assert_eq!(t.cube_sum(&GridCube::whole(1, 8)).unwrap(), 5.0);
        let g = GridFunction::new(1, 4, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let t = PrefixTable::new(&g);
        assert_eq!(t.cube_sum(&GridCube::whole(1, 4)).unwrap(), 1.0);
        let h = GridFunction::new(1, 4, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(PrefixTable::new(&h).cube_average(&GridCube::whole(1, 4)).unwrap(), 0.5);
        let c = GridFunction::constant(2, 4, -1.5).unwrap();
        let t = PrefixTable::new(&c);
        for q in enumerate_cubes(4, 2, CubeSelection::All) {
            assert_eq!(t.cube_average(&q).unwrap(), -1.5);
        }
    }

    #[test]
    fn out_of_range() {
        let t = PrefixTable::new(&GridFunction::constant(1, 4, 1.0).unwrap());
        assert!(t.cube_sum(&GridCube::new_1d(2, 3)).is_err());
        assert!(t.cube_sum(&GridCube::new_1d(-1, 2)).is_err());
        assert!(t.cube_sum(&GridCube::new_2d([0, 0], 2)).is_err());
    }

    #[test]
    fn random_cubes_match_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(dim, n) in &[(1usize, 4096usize), (1, 64), (2, 32), (2, 8)] {
            let f = GridFunction::from_cells(dim, n, |_| rng.gen_range(-10.0..10.0)).unwrap();
            let t = PrefixTable::new(&f);
            for _ in 0..200 {
                let side = rng.gen_range(1..=n);
                let a0 = rng.gen_range(0..=(n - side)) as i64;
                let a1 = rng.gen_range(0..=(n - side)) as i64;
                let q = if dim == 1 {
                    GridCube::new_1d(a0, side)
                } else {
                    GridCube::new_2d([a0, a1], side)
                };
                let direct = direct_sum(&f, &q);
                let mass = direct_sum(&f.abs(), &q);
                let got = t.cube_sum(&q).unwrap();
                assert!((got - direct).abs() <= 1e-9 * mass.max(f64::MIN_POSITIVE), "{q}");
                let got_abs = t.cube_abs_sum(&q).unwrap();
                assert!((got_abs - mass).abs() <= 1e-9 * mass);
            }
        }
    }

    #[test]
    fn weighted_measure_of_unit_weight() {
        let w = Weight::unit(2, 8).unwrap();
        let m = WeightedMeasure::new(&w);
        assert_eq!(m.measure(&GridCube::whole(2, 8)).unwrap(), 1.0);
        assert_eq!(m.measure(&GridCube::new_2d([2, 2], 4)).unwrap(), 0.25);
    }
}
