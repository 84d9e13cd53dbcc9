//! Deterministic test functions and weights.
//!
//! Every generator is a pure function of its parameters (and seed, where it
//! takes one). [`Generator`] records the parameters for manifests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridCube, GridFunction, PrefixTable, Weight};
use crate::operators::{maximal, BoundaryMode};

/// A grid function together with its maximal function over all cubes of
/// `R^d`, known in closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticExample {
    pub label: String,
    pub grid_values: GridFunction,
    pub analytic_maximal: GridFunction,
}

/// Half-space `{x : x_axis >= boundary_cell / N}` (or its complement when
/// `positive` is false) bounded by a cell face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub axis: usize,
    pub boundary_cell: usize,
    pub positive: bool,
}

impl HalfSpace {
    pub fn contains(&self, cell: [usize; 2]) -> bool {
        (cell[self.axis] >= self.boundary_cell) == self.positive
    }
}

/// `f = 2 chi_H` with `Mf = 2` on `H` and `Mf = 1` off `H`.
pub fn half_space_example(n: usize, dim: usize, axis: usize, boundary_cell: usize) -> Result<AnalyticExample> {
    half_space_oriented(
        n,
        dim,
        HalfSpace {
            axis,
            boundary_cell,
            positive: true,
        },
    )
}

pub fn half_space_oriented(n: usize, dim: usize, h: HalfSpace) -> Result<AnalyticExample> {
    if h.axis >= dim {
        return Err(Error::InvalidParameter(format!("axis {} out of range for dimension {dim}", h.axis)));
    }
    if h.boundary_cell == 0 || h.boundary_cell >= n {
        return Err(Error::InvalidParameter(format!(
            "boundary cell {} must lie strictly inside 0..{n}",
            h.boundary_cell
        )));
    }
    let grid_values = GridFunction::from_cells(dim, n, |c| if h.contains(c) { 2.0 } else { 0.0 })?;
    let analytic_maximal = GridFunction::from_cells(dim, n, |c| if h.contains(c) { 2.0 } else { 1.0 })?;
    Ok(AnalyticExample {
        label: "half_space".into(),
        grid_values,
        analytic_maximal,
    })
}

fn check_center(dim: usize, center: [f64; 2]) -> Result<()> {
    if center[..dim].iter().all(|c| *c > 0.0 && *c < 1.0) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "center {:?} must lie strictly inside the unit cube",
            &center[..dim]
        )))
    }
}

fn distance(dim: usize, x: [f64; 2], c: [f64; 2]) -> f64 {
    (0..dim).map(|k| (x[k] - c[k]).powi(2)).sum::<f64>().sqrt()
}

/// `log |x - center|` at cell centers, with the distance clamped below at half a cell.
pub fn log_abs_demo(n: usize, dim: usize, center: [f64; 2]) -> Result<GridFunction> {
    check_center(dim, center)?;
    let h = 0.5 / n as f64;
    let cw = 1.0 / n as f64;
    GridFunction::from_cells(dim, n, |cell| {
        let x = [(cell[0] as f64 + 0.5) * cw, (cell[1] as f64 + 0.5) * cw];
        distance(dim, x, center).max(h).ln()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    /// Cells per axis of the sampled window around the singularity.
    pub cells: usize,
    /// Width of that window in units of the unit cube.
    pub width: f64,
    /// Maximal function of `|log|x||` at the cell touching the singularity.
    pub value: f64,
    /// `log(width / 2) - 1`, below which the value cannot fall on `R`.
    pub reference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub n: usize,
    pub dim: usize,
    pub rows: Vec<DivergenceRow>,
    pub nondecreasing: bool,
    pub above_reference: bool,
}

/// Maximal function of `log |x|` at the cell touching the origin, sampled on
/// cubes of `cells` cells per axis centered at the origin with cell width
/// `1/n`, for `cells = 2n, 4n, ...` up to `max_cells`.
///
/// The windows are nested, so the values are nondecreasing; they grow like
/// the logarithm of the window width without bound.
pub fn log_abs_divergence(n: usize, dim: usize, max_cells: usize) -> Result<DivergenceReport> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {dim}")));
    }
    if n == 0 || max_cells < 2 * n {
        return Err(Error::InvalidParameter(format!(
            "need max_cells >= 2n, got n = {n}, max_cells = {max_cells}"
        )));
    }
    let mut rows = Vec::new();
    let mut k = 2 * n;
    while k <= max_cells {
        let half = (k / 2) as f64;
        let cw = 1.0 / n as f64;
        let f = GridFunction::from_cells(dim, k, |c| {
            let x = [(c[0] as f64 + 0.5 - half) * cw, (c[1] as f64 + 0.5 - half) * cw];
            distance(dim, x, [0.0; 2]).max(0.5 * cw).ln().abs()
        })?;
        let table = PrefixTable::new(&f);
        // the cell with lower corner at the origin
        let x = [k / 2, if dim == 2 { k / 2 } else { 0 }];
        // earlier windows are nested inside this one, so their cubes still count
        let mut best = rows.last().map_or(0.0, |r: &DivergenceRow| r.value);
        for side in 1..=k {
            let lo = |c: usize| c.saturating_sub(side - 1);
            let hi = |c: usize| c.min(k - side);
            let (r1lo, r1hi) = if dim == 2 { (lo(x[1]), hi(x[1])) } else { (0, 0) };
            for a0 in lo(x[0])..=hi(x[0]) {
                for a1 in r1lo..=r1hi {
                    let q = if dim == 1 {
                        GridCube::new_1d(a0 as i64, side)
                    } else {
                        GridCube::new_2d([a0 as i64, a1 as i64], side)
                    };
                    best = best.max(table.clipped_abs_sum(&q) / q.cell_count() as f64);
                }
            }
        }
        let width = k as f64 / n as f64;
        rows.push(DivergenceRow {
            cells: k,
            width,
            value: best,
            reference: (width / 2.0).ln() - 1.0,
        });
        k *= 2;
    }
    let nondecreasing = rows.windows(2).all(|p| p[1].value >= p[0].value);
    let above_reference = rows.iter().all(|r| r.value >= r.reference);
    Ok(DivergenceReport {
        n,
        dim,
        rows,
        nondecreasing,
        above_reference,
    })
}

/// `|x - center|^a` at cell centers, distance clamped below at half a cell.
pub fn power_weight(n: usize, dim: usize, a: f64, center: [f64; 2]) -> Result<Weight> {
    if !(a > -(dim as f64)) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent must exceed -{dim}, got {a}")));
    }
    check_center(dim, center)?;
    let h = 0.5 / n as f64;
    let cw = 1.0 / n as f64;
    let g = GridFunction::from_cells(dim, n, |cell| {
        let x = [(cell[0] as f64 + 0.5) * cw, (cell[1] as f64 + 0.5) * cw];
        distance(dim, x, center).max(h).powf(a)
    })?;
    Ok(Weight::floored(g))
}

/// `1` below the midpoint of `axis`, `k` above it.
pub fn two_valued_weight(n: usize, dim: usize, axis: usize, k: f64) -> Result<Weight> {
    if axis >= dim {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range for dimension {dim}")));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("weight value must be positive, got {k}")));
    }
    Weight::new(GridFunction::from_cells(dim, n, |c| if c[axis] < n / 2 { 1.0 } else { k })?)
}

/// Sum of `+-amplitude` over the dyadic blocks of levels `1..=depth`, one
/// random sign per block.
pub fn random_dyadic_bmo(n: usize, dim: usize, depth: u32, amplitude: f64, seed: u64) -> Result<GridFunction> {
    if !n.is_power_of_two() || depth > n.trailing_zeros() {
        return Err(Error::InvalidParameter(format!("depth {depth} exceeds log2 N for N = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; n.pow(dim as u32)];
    let e1 = if dim == 2 { n } else { 1 };
    for level in 1..=depth {
        let side = n >> level;
        let blocks = n / side;
        let blocks1 = if dim == 2 { blocks } else { 1 };
        for b0 in 0..blocks {
            for b1 in 0..blocks1 {
                let s = if rng.gen::<bool>() { amplitude } else { -amplitude };
                let side1 = if dim == 2 { side } else { 1 };
                for i in b0 * side..(b0 + 1) * side {
                    for j in b1 * side1..(b1 + 1) * side1 {
                        values[i * e1 + j] += s;
                    }
                }
            }
        }
    }
    GridFunction::new(dim, n, values)
}

/// `(M mu)^delta` for a unit point mass `mu` on a cell drawn from `seed`.
pub fn a1_family(n: usize, dim: usize, delta: f64, seed: u64) -> Result<Weight> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = [rng.gen_range(0..n), if dim == 2 { rng.gen_range(0..n) } else { 0 }];
    a1_family_at(n, dim, delta, cell)
}

/// [`a1_family`] with the point mass on `cell`.
pub fn a1_family_at(n: usize, dim: usize, delta: f64, cell: [usize; 2]) -> Result<Weight> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    let mass = (n as f64).powi(dim as i32);
    let spike = GridFunction::from_cells(dim, n, |c| if c == cell { mass } else { 0.0 })?;
    let m = maximal(&spike, BoundaryMode::Restricted);
    Ok(Weight::floored(m.field.map(|v| v.powf(delta))?))
}

/// Weight equal to `height` on one cell and 1 elsewhere.
pub fn spike_weight(n: usize, dim: usize, cell: [usize; 2], height: f64) -> Result<Weight> {
    Weight::new(GridFunction::from_cells(dim, n, |c| if c == cell { height } else { 1.0 })?)
}

/// Parameters of one generator run, as recorded in manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", content = "params", rename_all = "snake_case")]
pub enum Generator {
    HalfSpace { n: usize, dim: usize, axis: usize, boundary_cell: usize },
    LogAbs { n: usize, dim: usize, center: [f64; 2] },
    PowerWeight { n: usize, dim: usize, exponent: f64, center: [f64; 2] },
    TwoValued { n: usize, dim: usize, axis: usize, k: f64 },
    RandomDyadicBmo { n: usize, dim: usize, depth: u32, amplitude: f64, seed: u64 },
    A1Family { n: usize, dim: usize, delta: f64, seed: u64 },
    Spike { n: usize, dim: usize, cell: [usize; 2], height: f64 },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::HalfSpace { .. } => "half_space",
            Generator::LogAbs { .. } => "log_abs",
            Generator::PowerWeight { .. } => "power_weight",
            Generator::TwoValued { .. } => "two_valued",
            Generator::RandomDyadicBmo { .. } => "random_dyadic_bmo",
            Generator::A1Family { .. } => "a1_family",
            Generator::Spike { .. } => "spike",
        }
    }

    pub fn is_weight(&self) -> bool {
        matches!(
            self,
            Generator::PowerWeight { .. } | Generator::TwoValued { .. } | Generator::A1Family { .. } | Generator::Spike { .. }
        )
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Generator::RandomDyadicBmo { seed, .. } | Generator::A1Family { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn generate(&self) -> Result<GridFunction> {
        match *self {
            Generator::HalfSpace { n, dim, axis, boundary_cell } => {
                Ok(half_space_example(n, dim, axis, boundary_cell)?.grid_values)
            }
            Generator::LogAbs { n, dim, center } => log_abs_demo(n, dim, center),
            Generator::PowerWeight { n, dim, exponent, center } => {
                Ok(power_weight(n, dim, exponent, center)?.into_grid())
            }
            Generator::TwoValued { n, dim, axis, k } => Ok(two_valued_weight(n, dim, axis, k)?.into_grid()),
            Generator::RandomDyadicBmo { n, dim, depth, amplitude, seed } => {
                random_dyadic_bmo(n, dim, depth, amplitude, seed)
            }
            Generator::A1Family { n, dim, delta, seed } => Ok(a1_family(n, dim, delta, seed)?.into_grid()),
            Generator::Spike { n, dim, cell, height } => Ok(spike_weight(n, dim, cell, height)?.into_grid()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{cube_min, CubeFamily};
    use crate::oscillation::{a1_constant, blo_seminorm, blo_w_on_cube, bmo_seminorm, fujii_wilson, log_plus_transform};

    #[test]
    fn half_space_oracle() {
        let ex = half_space_example(16, 2, 0, 8).unwrap();
        let chi = ex.grid_values.map(|v| v / 2.0).unwrap();
        assert!((bmo_seminorm(&chi, CubeFamily::All).value - 0.5).abs() < 1e-15);
        let q = GridCube::new_2d([6, 3], 4);
        assert_eq!(cube_min(&ex.analytic_maximal, &q).unwrap(), 1.0);
        let w = power_weight(16, 2, 1.0, [0.3, 0.6]).unwrap();
        let got = blo_w_on_cube(&ex.analytic_maximal, &w, &q).unwrap();
        let (mut wh, mut wq) = (0.0, 0.0);
        for i in q.cell_indices(w.shape()) {
            wq += w.values()[i];
            if w.shape().cell(i)[0] >= 8 {
                wh += w.values()[i];
            }
        }
        assert!((got - wh / wq).abs() < 1e-12);
        assert!(half_space_example(16, 2, 2, 8).is_err());
        assert!(half_space_example(16, 1, 0, 0).is_err());
    }

    #[test]
    fn log_abs_bmo_finite_and_divergence_grows() {
        for n in [16, 64, 256] {
            let f = log_abs_demo(n, 1, [0.5, 0.0]).unwrap();
            assert!(bmo_seminorm(&f, CubeFamily::All).value.is_finite());
        }
        assert!(log_abs_demo(8, 1, [1.0, 0.0]).is_err());
        let r = log_abs_divergence(4, 1, 8192).unwrap();
        assert_eq!(r.rows.len(), 11);
        assert!(r.nondecreasing && r.above_reference);
        assert!(r.rows.last().unwrap().value > r.rows[0].value + 3.0);
    }

    #[test]
    fn power_weights() {
        let w = power_weight(32, 1, 0.0, [0.5, 0.0]).unwrap();
        assert!(w.values().iter().all(|v| *v == 1.0));
        let a1 = fujii_wilson(&power_weight(64, 1, 1.0, [0.5, 0.0]).unwrap(), BoundaryMode::Restricted, CubeFamily::All);
        let a4 = fujii_wilson(&power_weight(64, 1, 4.0, [0.5, 0.0]).unwrap(), BoundaryMode::Restricted, CubeFamily::All);
        assert!(a4.a_infty > a1.a_infty);
        assert!(power_weight(8, 2, -2.0, [0.5, 0.5]).is_err());
    }

    #[test]
    fn dyadic_bmo_family() {
        let c = random_dyadic_bmo(64, 1, 0, 1.0, 3).unwrap();
        assert!(c.is_constant());
        let a = random_dyadic_bmo(64, 2, 4, 1.0, 1).unwrap();
        let b = random_dyadic_bmo(64, 2, 4, 1.0, 2).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, random_dyadic_bmo(64, 2, 4, 1.0, 1).unwrap());
        assert!(bmo_seminorm(&a, CubeFamily::Dyadic).value > 0.0);
        assert!(random_dyadic_bmo(8, 1, 4, 1.0, 1).is_err());
    }

    #[test]
    fn a1_family_members() {
        let small = a1_family(32, 1, 1e-6, 5).unwrap();
        assert!((a1_constant(&small, BoundaryMode::Restricted).0 - 1.0).abs() < 1e-4);
        for delta in [0.25, 0.5, 0.75] {
            let w = a1_family_at(32, 2, delta, [16, 16]).unwrap();
            let a1 = a1_constant(&w, BoundaryMode::Restricted).0;
            assert!(a1 >= 1.0 && a1.is_finite());
            let lw = log_plus_transform(&w.map(|v| v * 1e6).unwrap()).unwrap();
            assert!(blo_seminorm(&lw, CubeFamily::All).value.is_finite());
        }
        assert!(a1_family(8, 1, 1.0, 1).is_err());
    }

    #[test]
    fn generator_manifest_roundtrip() {
        let g = Generator::RandomDyadicBmo { n: 8, dim: 1, depth: 2, amplitude: 1.0, seed: 9 };
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"generator\":\"random_dyadic_bmo\""), "{s}");
        let back: Generator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.generate().unwrap(), random_dyadic_bmo(8, 1, 2, 1.0, 9).unwrap());
    }
}
