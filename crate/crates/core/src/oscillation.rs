//! Mean-oscillation seminorms and weight constants.
//!
//! Seminorm sweeps evaluate one cube at a time through the same routine that
//! re-evaluates a reported witness, so a report always reproduces exactly.
//! Maxima are reduced in parallel with ties broken by enumeration order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    enumerate_cubes, CubeFamily, GridCube, GridFunction, PrefixTable, Shape, Weight,
};
use crate::operators::{maximal, oscillation_about, BoundaryMode};

/// Largest `N^(d+1)` for which the Fujii-Wilson constant defaults to all
/// cubes. Its cost over all cubes grows like `N^(2d+2)`.
pub const ALL_CUBES_WORK: usize = 1 << 15;
/// Largest `N^(2d+1)` for which seminorms default to all cubes.
pub const ALL_CUBES_SEMINORM_WORK: usize = 1 << 30;

fn within(n: usize, power: usize, limit: usize) -> bool {
    n.checked_pow(power as u32).is_some_and(|w| w <= limit)
}

/// Family used by [`fujii_wilson`] when none is requested: all cubes for
/// d = 1 up to N = 128 and d = 2 up to N = 32, dyadic above.
pub fn default_family(n: usize, dim: usize) -> CubeFamily {
    if within(n, dim + 1, ALL_CUBES_WORK) {
        CubeFamily::All
    } else {
        CubeFamily::Dyadic
    }
}

/// Family used for seminorm sweeps when none is requested: all cubes for
/// d = 1 up to N = 1024 and d = 2 up to N = 64.
pub fn default_seminorm_family(n: usize, dim: usize) -> CubeFamily {
    if within(n, 2 * dim + 1, ALL_CUBES_SEMINORM_WORK) {
        CubeFamily::All
    } else {
        CubeFamily::Dyadic
    }
}

/// Boundary mode matching a cube family (restricted for all cubes).
pub fn family_mode(family: CubeFamily) -> BoundaryMode {
    match family {
        CubeFamily::All => BoundaryMode::Restricted,
        CubeFamily::Dyadic => BoundaryMode::Dyadic,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub value: f64,
    pub witness: GridCube,
    pub family: CubeFamily,
    pub mode: BoundaryMode,
}

/// Largest `value(q)` over `cubes`, first cube on ties.
fn arg_max<F>(cubes: &[GridCube], value: F) -> (f64, usize)
where
    F: Fn(&GridCube) -> f64 + Sync,
{
    cubes
        .par_iter()
        .enumerate()
        .map(|(i, q)| (value(q), i))
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        )
}

fn sweep<F>(shape: Shape, family: CubeFamily, value: F) -> SeminormReport
where
    F: Fn(&GridCube) -> f64 + Sync,
{
    let cubes: Vec<GridCube> = enumerate_cubes(shape.n, shape.dim, family.into()).collect();
    let (v, i) = arg_max(&cubes, value);
    SeminormReport {
        value: v,
        witness: cubes[i],
        family,
        mode: family_mode(family),
    }
}

/// `f` shifted by its global mean. Every seminorm here is shift invariant and
/// centering keeps prefix-table cancellation small.
fn centered(f: &GridFunction) -> Vec<f64> {
    let mean = f.values().iter().sum::<f64>() / f.len() as f64;
    f.values().iter().map(|v| v - mean).collect()
}

fn raw_min(shape: Shape, values: &[f64], q: &GridCube) -> f64 {
    q.cell_indices(shape).map(|i| values[i]).fold(f64::INFINITY, f64::min)
}

struct Bmo {
    shape: Shape,
    values: Vec<f64>,
    table: PrefixTable,
}

impl Bmo {
    fn new(f: &GridFunction) -> Self {
        let values = centered(f);
        let table = PrefixTable::from_values(f.shape(), &values);
        Bmo {
            shape: f.shape(),
            values,
            table,
        }
    }

    fn eval(&self, q: &GridCube) -> f64 {
        let mean = self.table.clipped_sum(q) / q.cell_count() as f64;
        oscillation_about(self.shape, &self.values, q, mean)
    }
}

struct Blo {
    shape: Shape,
    values: Vec<f64>,
    table: PrefixTable,
}

impl Blo {
    fn new(f: &GridFunction) -> Self {
        let values = centered(f);
        let table = PrefixTable::from_values(f.shape(), &values);
        Blo {
            shape: f.shape(),
            values,
            table,
        }
    }

    fn eval(&self, q: &GridCube) -> f64 {
        let mean = self.table.clipped_sum(q) / q.cell_count() as f64;
        (mean - raw_min(self.shape, &self.values, q)).max(0.0)
    }
}

struct BloW {
    shape: Shape,
    values: Vec<f64>,
    fw: PrefixTable,
    w: PrefixTable,
}

impl BloW {
    fn new(f: &GridFunction, w: &Weight) -> Result<Self> {
        if f.shape() != w.shape() {
            return Err(Error::InvalidGrid(format!(
                "function grid {:?} and weight grid {:?} differ",
                f.shape(),
                w.shape()
            )));
        }
        let values = centered(f);
        let fw: Vec<f64> = values.iter().zip(w.values()).map(|(a, b)| a * b).collect();
        Ok(BloW {
            shape: f.shape(),
            fw: PrefixTable::from_values(f.shape(), &fw),
            w: PrefixTable::new(w.as_grid()),
            values,
        })
    }

    fn eval(&self, q: &GridCube) -> f64 {
        let wq = self.w.clipped_sum(q);
        (self.fw.clipped_sum(q) / wq - raw_min(self.shape, &self.values, q)).max(0.0)
    }
}

/// `sup_Q |Q|^{-1} int_Q |f - f_Q|` over the family.
pub fn bmo_seminorm(f: &GridFunction, family: CubeFamily) -> SeminormReport {
    let k = Bmo::new(f);
    sweep(f.shape(), family, |q| k.eval(q))
}

/// `sup_Q |Q|^{-1} int_Q (f - min_Q f)` over the family.
pub fn blo_seminorm(f: &GridFunction, family: CubeFamily) -> SeminormReport {
    let k = Blo::new(f);
    sweep(f.shape(), family, |q| k.eval(q))
}

/// `sup_Q w(Q)^{-1} int_Q (f - min_Q f) w` over the family.
pub fn blo_w_seminorm(f: &GridFunction, w: &Weight, family: CubeFamily) -> Result<SeminormReport> {
    let k = BloW::new(f, w)?;
    Ok(sweep(f.shape(), family, |q| k.eval(q)))
}

/// BMO functional of `f` on one cube, as evaluated by [`bmo_seminorm`].
pub fn bmo_on_cube(f: &GridFunction, q: &GridCube) -> Result<f64> {
    q.check_within(f.shape())?;
    Ok(Bmo::new(f).eval(q))
}

pub fn blo_on_cube(f: &GridFunction, q: &GridCube) -> Result<f64> {
    q.check_within(f.shape())?;
    Ok(Blo::new(f).eval(q))
}

pub fn blo_w_on_cube(f: &GridFunction, w: &Weight, q: &GridCube) -> Result<f64> {
    q.check_within(f.shape())?;
    Ok(BloW::new(f, w)?.eval(q))
}

/// Brute-force seminorm over the family by direct double loops.
/// `weight = None` gives BMO (`lower = false`) or BLO (`lower = true`);
/// a weight gives weighted BLO.
pub fn seminorm_naive(f: &GridFunction, w: Option<&Weight>, lower: bool, family: CubeFamily) -> f64 {
    let shape = f.shape();
    let v = f.values();
    let mut best = 0.0f64;
    for q in enumerate_cubes(shape.n, shape.dim, family.into()) {
        let cells: Vec<usize> = q.cell_indices(shape).collect();
        let value = match w {
            Some(w) => {
                let min = cells.iter().map(|&i| v[i]).fold(f64::INFINITY, f64::min);
                let wq: f64 = cells.iter().map(|&i| w.values()[i]).sum();
                cells.iter().map(|&i| (v[i] - min) * w.values()[i]).sum::<f64>() / wq
            }
            None => {
                let mean = cells.iter().map(|&i| v[i]).sum::<f64>() / cells.len() as f64;
                if lower {
                    let min = cells.iter().map(|&i| v[i]).fold(f64::INFINITY, f64::min);
                    mean - min
                } else {
                    cells.iter().map(|&i| (v[i] - mean).abs()).sum::<f64>() / cells.len() as f64
                }
            }
        };
        best = best.max(value);
    }
    best
}

/// `max_x Mw(x) / w(x)`, with the cell attaining it.
pub fn a1_constant(w: &Weight, mode: BoundaryMode) -> (f64, usize) {
    let m = maximal(w.as_grid(), mode);
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, (a, b)) in m.values().iter().zip(w.values()).enumerate() {
        let r = a / b;
        if r > best.0 {
            best = (r, i);
        }
    }
    best
}

fn is_dyadic(q: &GridCube) -> bool {
    let s = q.side() as i64;
    q.side().is_power_of_two() && q.anchor()[..q.dim()].iter().all(|a| a % s == 0)
}

/// `M(w chi_Q)` on the cells of `Q`, row-major over `Q`'s sub-grid.
///
/// For the restricted and zero-extension families the maximizing cube at a
/// cell of `Q` can always be taken inside `Q`, and for a dyadic `Q` the dyadic
/// cubes above `Q` only average `w chi_Q` down, so both reduce to a maximal
/// function on the sub-grid. A non-dyadic `Q` in dyadic mode uses the full grid.
pub fn localized_maximal(w: &GridFunction, q: &GridCube, mode: BoundaryMode) -> Result<Vec<f64>> {
    q.check_within(w.shape())?;
    let sub = w.restrict(q)?;
    let shape = Shape::new(w.dim(), q.side());
    let local = |mode| {
        let table = PrefixTable::from_values(shape, &sub);
        crate::operators::field_on(shape, &sub, &table, mode)
    };
    match mode {
        BoundaryMode::Restricted | BoundaryMode::ZeroExtension => Ok(local(BoundaryMode::Restricted)),
        BoundaryMode::Dyadic if is_dyadic(q) => Ok(local(BoundaryMode::Dyadic)),
        BoundaryMode::Dyadic => {
            let m = maximal(&w.mask_outside(q)?, BoundaryMode::Dyadic);
            m.field.restrict(q)
        }
    }
}

/// Fujii-Wilson functional `w(Q)^{-1} int_Q M(w chi_Q)` on one cube.
pub fn fujii_wilson_on_cube(w: &Weight, q: &GridCube, mode: BoundaryMode) -> Result<f64> {
    let m = localized_maximal(w.as_grid(), q, mode)?;
    let wq: f64 = w.restrict(q)?.iter().sum();
    Ok(m.iter().sum::<f64>() / wq)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConstants {
    /// `max Mw / w` on the grid.
    pub a1: f64,
    /// Fujii-Wilson constant over `family`.
    pub a_infty: f64,
    pub mode: BoundaryMode,
    pub family: CubeFamily,
    pub a1_witness_cell: usize,
    pub a_infty_witness: GridCube,
}

/// A1 and Fujii-Wilson constants of `w`. The supremum for the latter ranges
/// over the cubes of `family`; the maximal function uses `mode`.
pub fn fujii_wilson(w: &Weight, mode: BoundaryMode, family: CubeFamily) -> WeightConstants {
    let shape = w.shape();
    let cubes: Vec<GridCube> = enumerate_cubes(shape.n, shape.dim, family.into()).collect();
    let (a_infty, i) = arg_max(&cubes, |q| {
        fujii_wilson_on_cube(w, q, mode).expect("enumerated cubes lie in the domain")
    });
    let (a1, cell) = a1_constant(w, mode);
    WeightConstants {
        a1,
        a_infty,
        mode,
        family,
        a1_witness_cell: cell,
        a_infty_witness: cubes[i],
    }
}

/// `[M(w chi_Q / w_Q)]^{1/2}` on the whole grid.
pub fn coifman_rochberg(w: &Weight, q: &GridCube, mode: BoundaryMode) -> Result<GridFunction> {
    let sub = w.restrict(q)?;
    let wq = sub.iter().sum::<f64>() / sub.len() as f64;
    let g = w.mask_outside(q)?.map(|v| v / wq)?;
    maximal(&g, mode).field.map(f64::sqrt)
}

/// Cellwise `max(0, log f)` for positive `f`.
pub fn log_plus_transform(f: &GridFunction) -> Result<GridFunction> {
    if let Some(i) = f.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::Domain(format!(
            "log+ needs positive values, cell {i} holds {}",
            f.values()[i]
        )));
    }
    f.map(|v| v.ln().max(0.0))
}

/// The weight `e^{alpha f}`, floored.
pub fn exp_weight(f: &GridFunction, alpha: f64) -> Result<Weight> {
    let g = f.map(|v| (alpha * v).exp())?;
    Ok(Weight::floored(g))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolder {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `w(E)/w(Q) <= 2 (|E|/|Q|)^{1/(2^{d+1} [w]_{A_inf})}` for `E` a set of cell
/// indices inside `Q`.
pub fn reverse_holder_check(
    w: &Weight,
    q: &GridCube,
    e: &[usize],
    mode: BoundaryMode,
    family: CubeFamily,
) -> Result<ReverseHolder> {
    let a = fujii_wilson(w, mode, family).a_infty;
    reverse_holder_check_with(w, q, e, a)
}

/// [`reverse_holder_check`] with a precomputed Fujii-Wilson constant.
pub fn reverse_holder_check_with(w: &Weight, q: &GridCube, e: &[usize], a_infty: f64) -> Result<ReverseHolder> {
    q.check_within(w.shape())?;
    let mut cells = e.to_vec();
    cells.sort_unstable();
    cells.dedup();
    for &i in &cells {
        if i >= w.len() || !q.contains_cell(w.shape().cell(i)) {
            return Err(Error::Containment { cube: q.to_string() });
        }
    }
    let wq: f64 = w.restrict(q)?.iter().sum();
    let we: f64 = cells.iter().map(|&i| w.values()[i]).sum();
    let lhs = we / wq;
    let rhs = if cells.is_empty() {
        0.0
    } else {
        let frac = cells.len() as f64 / q.cell_count() as f64;
        let exponent = 1.0 / (2f64.powi(w.dim() as i32 + 1) * a_infty);
        2.0 * frac.powf(exponent)
    };
    Ok(ReverseHolder {
        lhs,
        rhs,
        ok: lhs <= rhs + 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LLogLRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Compares `|Q|^{-1} int_Q M(w chi_Q)` with `|Q|^{-1} int_Q (1 + log+(w/w_Q)) w`.
pub fn llogl_ratio(w: &Weight, q: &GridCube, mode: BoundaryMode) -> Result<LLogLRatio> {
    let m = localized_maximal(w.as_grid(), q, mode)?;
    let sub = w.restrict(q)?;
    let cells = sub.len() as f64;
    let wq = sub.iter().sum::<f64>() / cells;
    let lhs = m.iter().sum::<f64>() / cells;
    let rhs = sub.iter().map(|v| (1.0 + (v / wq).ln().max(0.0)) * v).sum::<f64>() / cells;
    Ok(LLogLRatio {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CubeSelection;
    use crate::operators::maximal_naive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(dim: usize, n: usize, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridFunction::from_cells(dim, n, |_| rng.gen_range(-2.0..2.0)).unwrap()
    }

    fn random_weight(dim: usize, n: usize, seed: u64) -> Weight {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Weight::new(GridFunction::from_cells(dim, n, |_| rng.gen_range(0.05f64..3.0).powi(2)).unwrap()).unwrap()
    }

    #[test]
    fn constants_have_zero_seminorms() {
        let f = GridFunction::constant(2, 8, 4.0).unwrap();
        for fam in [CubeFamily::All, CubeFamily::Dyadic] {
            assert_eq!(bmo_seminorm(&f, fam).value, 0.0);
            assert_eq!(blo_seminorm(&f, fam).value, 0.0);
        }
    }

    #[test]
    fn half_indicator_has_bmo_one_half() {
        let f = GridFunction::from_cells(2, 16, |c| if c[0] < 8 { 1.0 } else { 0.0 }).unwrap();
        let r = bmo_seminorm(&f, CubeFamily::All);
        assert!((r.value - 0.5).abs() < 1e-12, "{}", r.value);
        assert_eq!(bmo_on_cube(&f, &r.witness).unwrap(), r.value);
    }

    #[test]
    fn blo_two_cells() {
        let f = GridFunction::new(1, 2, vec![0.0, 1.0]).unwrap();
        let r = blo_seminorm(&f, CubeFamily::All);
        assert_eq!(r.value, 0.5);
        assert_eq!(r.witness, GridCube::whole(1, 2));
    }

    #[test]
    fn seminorms_match_naive() {
        for (dim, n) in [(1, 64), (2, 8)] {
            let f = random(dim, n, 3);
            let w = random_weight(dim, n, 4);
            for fam in [CubeFamily::All, CubeFamily::Dyadic] {
                let checks = [
                    (bmo_seminorm(&f, fam), seminorm_naive(&f, None, false, fam)),
                    (blo_seminorm(&f, fam), seminorm_naive(&f, None, true, fam)),
                    (blo_w_seminorm(&f, &w, fam).unwrap(), seminorm_naive(&f, Some(&w), true, fam)),
                ];
                for (fast, slow) in checks {
                    assert!((fast.value - slow).abs() <= 1e-9 * slow.max(1.0), "{} vs {slow}", fast.value);
                }
            }
        }
    }

    #[test]
    fn witnesses_reproduce_and_invariances_hold() {
        let f = random(2, 16, 5);
        let w = random_weight(2, 16, 6);
        let shifted = f.map(|v| v + 1e3).unwrap();
        let scaled = f.map(|v| 2.5 * v).unwrap();
        let b = bmo_seminorm(&f, CubeFamily::All);
        let l = blo_seminorm(&f, CubeFamily::All);
        let lw = blo_w_seminorm(&f, &w, CubeFamily::All).unwrap();
        assert_eq!(bmo_on_cube(&f, &b.witness).unwrap(), b.value);
        assert_eq!(blo_on_cube(&f, &l.witness).unwrap(), l.value);
        assert_eq!(blo_w_on_cube(&f, &w, &lw.witness).unwrap(), lw.value);
        assert!((bmo_seminorm(&shifted, CubeFamily::All).value - b.value).abs() < 1e-12);
        assert!((blo_seminorm(&shifted, CubeFamily::All).value - l.value).abs() < 1e-12);
        assert!((blo_w_seminorm(&shifted, &w, CubeFamily::All).unwrap().value - lw.value).abs() < 1e-12);
        assert!((bmo_seminorm(&scaled, CubeFamily::All).value - 2.5 * b.value).abs() < 1e-12 * b.value * 2.5);
        assert!(b.value <= 2.0 * l.value + 1e-12);
        assert!(bmo_seminorm(&f, CubeFamily::Dyadic).value <= b.value);
        let unit = Weight::unit(2, 16).unwrap();
        assert!((blo_w_seminorm(&f, &unit, CubeFamily::All).unwrap().value - l.value).abs() < 1e-12);
    }

    #[test]
    fn a1_examples() {
        assert_eq!(a1_constant(&Weight::unit(2, 4).unwrap(), BoundaryMode::Restricted).0, 1.0);
        let w = Weight::new(GridFunction::new(1, 2, vec![1.0, 3.0]).unwrap()).unwrap();
        assert_eq!(a1_constant(&w, BoundaryMode::Restricted), (2.0, 0));
    }

    #[test]
    fn fujii_wilson_unit_and_lower_bound() {
        let c = fujii_wilson(&Weight::unit(1, 16).unwrap(), BoundaryMode::Restricted, CubeFamily::All);
        assert!((c.a_infty - 1.0).abs() < 1e-15);
        let w = random_weight(2, 8, 7);
        for mode in [BoundaryMode::Restricted, BoundaryMode::Dyadic] {
            for fam in [CubeFamily::All, CubeFamily::Dyadic] {
                let c = fujii_wilson(&w, mode, fam);
                assert!(c.a_infty >= 1.0 - 1e-12);
                if mode == BoundaryMode::Restricted {
                    assert!(c.a_infty <= c.a1 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn localized_maximal_matches_masked_full_grid() {
        let w = random_weight(2, 8, 8);
        for mode in [BoundaryMode::Restricted, BoundaryMode::ZeroExtension, BoundaryMode::Dyadic] {
            for q in enumerate_cubes(8, 2, CubeSelection::All).step_by(7) {
                let full = maximal_naive(&w.mask_outside(&q).unwrap(), mode);
                let expect = full.field.restrict(&q).unwrap();
                let got = localized_maximal(w.as_grid(), &q, mode).unwrap();
                for (a, b) in got.iter().zip(&expect) {
                    assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{mode} {q}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn fujii_wilson_scale_invariant() {
        let w = random_weight(1, 32, 9);
        let a = fujii_wilson(&w, BoundaryMode::Restricted, CubeFamily::All).a_infty;
        let b = fujii_wilson(&w.scaled(17.0).unwrap(), BoundaryMode::Restricted, CubeFamily::All).a_infty;
        assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn coifman_rochberg_at_least_one_on_q() {
        let w = Weight::new(GridFunction::from_cells(2, 8, |c| if c == [3, 5] { 50.0 } else { 1.0 }).unwrap()).unwrap();
        let q = GridCube::new_2d([2, 2], 4);
        let v = coifman_rochberg(&w, &q, BoundaryMode::Restricted).unwrap();
        for i in q.cell_indices(w.shape()) {
            assert!(v.values()[i] >= 1.0 - 1e-12);
        }
        let sub = w.restrict(&q).unwrap();
        let wq = sub.iter().sum::<f64>() / 16.0;
        let g = w.mask_outside(&q).unwrap().map(|x| x / wq).unwrap();
        let naive = maximal_naive(&g, BoundaryMode::Restricted);
        for (a, b) in v.values().iter().zip(naive.values()) {
            assert!((a - b.sqrt()).abs() < 1e-12);
        }
        let one = coifman_rochberg(&Weight::unit(1, 8).unwrap(), &GridCube::whole(1, 8), BoundaryMode::Restricted).unwrap();
        assert!(one.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn log_and_exp_transforms() {
        let one = GridFunction::constant(1, 4, 1.0).unwrap();
        assert!(log_plus_transform(&one).unwrap().values().iter().all(|v| *v == 0.0));
        let neg = GridFunction::new(1, 2, vec![1.0, -1.0]).unwrap();
        assert!(matches!(log_plus_transform(&neg), Err(Error::Domain(_))));
        let w = random_weight(1, 16, 10);
        let back = exp_weight(&w.map(f64::ln).unwrap(), 1.0).unwrap();
        for (a, b) in back.values().iter().zip(w.values()) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn reverse_holder_edges() {
        let w = random_weight(1, 16, 11);
        let q = GridCube::new_1d(4, 8);
        let all: Vec<usize> = (4..12).collect();
        let r = reverse_holder_check_with(&w, &q, &all, 1.5).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && r.rhs == 2.0 && r.ok);
        let r = reverse_holder_check_with(&w, &q, &[], 1.5).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ok), (0.0, 0.0, true));
        assert!(matches!(
            reverse_holder_check_with(&w, &q, &[2], 1.5),
            Err(Error::Containment { .. })
        ));
    }

    #[test]
    fn llogl_unit_weight() {
        let r = llogl_ratio(&Weight::unit(2, 8).unwrap(), &GridCube::new_2d([0, 4], 4), BoundaryMode::Restricted).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && (r.rhs - 1.0).abs() < 1e-15);
    }
}
