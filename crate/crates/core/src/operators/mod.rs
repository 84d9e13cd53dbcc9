//! Maximal operators on grid functions.
//!
//! Every operator takes a [`BoundaryMode`] fixing which cubes the supremum
//! ranges over. Each fast kernel has a brute-force twin (`*_naive`) used as a
//! test oracle.

mod kernel;
mod naive;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cube_min, triple, GridCube, GridFunction, PrefixTable, Shape};
use kernel::{maximal_field, WindowStat};

pub(crate) use kernel::oscillation_about;

/// Zero-extension cubes have side at most this many domain widths.
pub const ZERO_EXTENSION_WIDTHS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Cubes contained in the domain.
    Restricted,
    /// Cubes meeting the domain with side at most [`ZERO_EXTENSION_WIDTHS`]
    /// domain widths, `f` extended by zero.
    ZeroExtension,
    /// Dyadic cubes contained in the domain.
    Dyadic,
}

impl BoundaryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryMode::Restricted => "restricted",
            BoundaryMode::ZeroExtension => "zero_extension",
            BoundaryMode::Dyadic => "dyadic",
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "restricted" => Ok(BoundaryMode::Restricted),
            "zero_extension" | "zero" => Ok(BoundaryMode::ZeroExtension),
            "dyadic" => Ok(BoundaryMode::Dyadic),
            _ => Err(Error::InvalidParameter(format!(
                "unknown boundary mode {s:?} (expected restricted, zero_extension or dyadic)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    HardyLittlewood,
    Sharp,
}

/// A maximal function sampled on the grid of its input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalField {
    pub field: GridFunction,
    pub mode: BoundaryMode,
    pub kind: FieldKind,
    /// Zero-extension only: upper bound on what the cubes beyond the side cap
    /// could contribute at any cell.
    pub truncation_bound: Option<f64>,
}

impl MaximalField {
    pub fn values(&self) -> &[f64] {
        self.field.values()
    }
}

/// Hardy-Littlewood field of `values` on an arbitrary (sub)grid shape.
pub(crate) fn field_on(shape: Shape, values: &[f64], table: &PrefixTable, mode: BoundaryMode) -> Vec<f64> {
    maximal_field(shape, values, table, mode, default_cap(shape.n), WindowStat::AbsMean)
}

fn default_cap(n: usize) -> usize {
    ZERO_EXTENSION_WIDTHS * n
}

/// Bound on the mean of `|f|` over any cube with more than `cap` cells per side.
fn truncation_bound(table: &PrefixTable, cap: usize) -> f64 {
    table.abs_total() / ((cap + 1) as f64).powi(table.shape().dim as i32)
}

fn build(
    f: &GridFunction,
    values: &[f64],
    mode: BoundaryMode,
    cap: usize,
    kind: FieldKind,
    field: Vec<f64>,
) -> MaximalField {
    let truncation_bound = (mode == BoundaryMode::ZeroExtension).then(|| {
        let t = truncation_bound(&PrefixTable::from_values(f.shape(), values), cap);
        match kind {
            FieldKind::HardyLittlewood => t,
            FieldKind::Sharp => 2.0 * t,
        }
    });
    MaximalField {
        field: GridFunction::new(f.dim(), f.resolution(), field).expect("field has the input shape"),
        mode,
        kind,
        truncation_bound,
    }
}

/// Hardy-Littlewood maximal function: at each cell, the largest mean of `|f|`
/// over the mode's cubes containing the cell.
pub fn maximal(f: &GridFunction, mode: BoundaryMode) -> MaximalField {
    maximal_with_cap(f, mode, default_cap(f.resolution()))
}

/// [`maximal`] with an explicit side cap for zero-extension cubes (ignored by
/// the other modes).
pub fn maximal_with_cap(f: &GridFunction, mode: BoundaryMode, cap: usize) -> MaximalField {
    let table = PrefixTable::new(f);
    let field = maximal_field(f.shape(), f.values(), &table, mode, cap.max(1), WindowStat::AbsMean);
    build(f, f.values(), mode, cap.max(1), FieldKind::HardyLittlewood, field)
}

pub fn maximal_naive(f: &GridFunction, mode: BoundaryMode) -> MaximalField {
    let cap = default_cap(f.resolution());
    let field = naive::naive_field(f.shape(), f.values(), mode, cap, false);
    build(f, f.values(), mode, cap, FieldKind::HardyLittlewood, field)
}

/// Sharp maximal function: at each cell, the largest mean oscillation
/// `|Q|^{-1} sum_Q |f - f_Q|` over the mode's cubes containing the cell.
///
/// Window means come from a prefix table, oscillations are summed directly,
/// so the cost is `O(N^d sum_L L^d)` for the all-cubes modes and
/// `O(N^d log N)` in dyadic mode.
pub fn sharp_maximal(f: &GridFunction, mode: BoundaryMode) -> MaximalField {
    let cap = default_cap(f.resolution());
    // oscillations are shift invariant except under zero extension, so
    // centering keeps prefix-table cancellation small
    let values: Vec<f64> = if mode == BoundaryMode::ZeroExtension {
        f.values().to_vec()
    } else {
        let mean = f.values().iter().sum::<f64>() / f.len() as f64;
        f.values().iter().map(|v| v - mean).collect()
    };
    let table = PrefixTable::from_values(f.shape(), &values);
    let field = maximal_field(f.shape(), &values, &table, mode, cap, WindowStat::Oscillation);
    build(f, f.values(), mode, cap, FieldKind::Sharp, field)
}

/// Dyadic sharp maximal function, `O(N^d log N)`.
pub fn sharp_maximal_dyadic(f: &GridFunction) -> MaximalField {
    sharp_maximal(f, BoundaryMode::Dyadic)
}

pub fn sharp_maximal_naive(f: &GridFunction, mode: BoundaryMode) -> MaximalField {
    let cap = default_cap(f.resolution());
    let field = naive::naive_field(f.shape(), f.values(), mode, cap, true);
    build(f, f.values(), mode, cap, FieldKind::Sharp, field)
}

/// Largest cellwise `|a - b| / |b|` between a field and its reference.
/// Reference values below `1e-6 max|b|` are measured against that floor.
pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    let floor = 1e-6 * b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            if d == 0.0 {
                0.0
            } else {
                d / y.abs().max(floor).max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max)
}

/// `M_Q((f - f_Q) chi_Q)` on `Q`, with `M_Q` the maximal operator over the
/// dyadic subcubes of `Q`. Returned as a grid function on `Q`'s own sub-grid.
pub fn local_maximal(f: &GridFunction, q: &GridCube) -> Result<GridFunction> {
    q.check_within(f.shape())?;
    if !q.side().is_power_of_two() {
        return Err(Error::UnsupportedCube {
            cube: q.to_string(),
            reason: format!("side {} is not a power of two", q.side()),
        });
    }
    let sub = f.restrict(q)?;
    let mean = sub.iter().sum::<f64>() / sub.len() as f64;
    let h: Vec<f64> = sub.iter().map(|v| (v - mean).abs()).collect();
    let shape = Shape::new(f.dim(), q.side());
    let table = PrefixTable::from_values(shape, &h);
    let field = maximal_field(shape, &h, &table, BoundaryMode::Dyadic, 0, WindowStat::AbsMean);
    GridFunction::new(f.dim(), q.side(), field)
}

/// Brute-force twin of [`local_maximal`].
pub fn local_maximal_naive(f: &GridFunction, q: &GridCube) -> Result<GridFunction> {
    q.check_within(f.shape())?;
    if !q.side().is_power_of_two() {
        return Err(Error::UnsupportedCube {
            cube: q.to_string(),
            reason: format!("side {} is not a power of two", q.side()),
        });
    }
    let sub = f.restrict(q)?;
    let mean = sub.iter().sum::<f64>() / sub.len() as f64;
    let h: Vec<f64> = sub.iter().map(|v| (v - mean).abs()).collect();
    let shape = Shape::new(f.dim(), q.side());
    GridFunction::new(f.dim(), q.side(), naive::naive_field(shape, &h, BoundaryMode::Dyadic, 0, false))
}

/// `sup_t t |{|g| > t}| / normalization`, with `|.|` the Lebesgue measure of
/// the unit cube. The supremum is approached as `t` rises to a cell value
/// `v`, giving `v |{|g| >= v}|`.
pub fn weak_l1_quasinorm(g: &GridFunction, normalization: f64) -> Result<f64> {
    if !(normalization > 0.0) || !normalization.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "normalization must be positive and finite, got {normalization}"
        )));
    }
    let mut v: Vec<f64> = g.values().iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let vol = g.cell_volume();
    let mut best = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let t = v[i];
        let mut j = i;
        while j < v.len() && v[j] == t {
            j += 1;
        }
        best = best.max(t * j as f64 * vol);
        i = j;
    }
    Ok(best / normalization)
}

/// Outcome of the nonlocal-part probe on one cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// `max_{x in Q} (Mg(x) - essinf_Q Mf)^+ / M^# f(x)`.
    pub max_ratio: f64,
    /// Cell index attaining `max_ratio`.
    pub witness_cell: usize,
    pub cube: GridCube,
    pub tripled: GridCube,
    pub essinf_mf: f64,
    pub mode: BoundaryMode,
}

/// `f` with its values on `3Q` replaced by their mean.
pub fn nonlocal_part(f: &GridFunction, tripled: &GridCube) -> Result<GridFunction> {
    let mean = PrefixTable::new(f).cube_average(tripled)?;
    let mut values = f.values().to_vec();
    for i in tripled.cell_indices(f.shape()) {
        values[i] = mean;
    }
    GridFunction::new(f.dim(), f.resolution(), values)
}

/// Checks `Mg <= c M^#f + essinf_Q Mf` on `Q` for the nonlocal part
/// `g = f_{3Q} chi_{3Q} + f chi_{(3Q)^c}` and reports the smallest such `c`.
pub fn nonlocal_bound_probe(f: &GridFunction, q: &GridCube, mode: BoundaryMode) -> Result<ProbeReport> {
    if f.is_constant() {
        return Err(Error::DegenerateInput("f is constant, so M^#f vanishes".into()));
    }
    triple(q, f.resolution())?;
    q.check_within(f.shape())?;
    let mf = maximal(f, mode);
    let msharp = sharp_maximal(f, mode);
    nonlocal_bound_probe_with(f, q, &mf, &msharp)
}

/// [`nonlocal_bound_probe`] reusing precomputed `Mf` and `M^#f`.
pub fn nonlocal_bound_probe_with(
    f: &GridFunction,
    q: &GridCube,
    mf: &MaximalField,
    msharp: &MaximalField,
) -> Result<ProbeReport> {
    if f.is_constant() {
        return Err(Error::DegenerateInput("f is constant, so M^#f vanishes".into()));
    }
    let tripled = triple(q, f.resolution())?;
    let g = nonlocal_part(f, &tripled)?;
    let mg = maximal(&g, mf.mode);
    let essinf = cube_min(&mf.field, q)?;
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for i in q.cell_indices(f.shape()) {
        let s = msharp.values()[i];
        if s <= 0.0 {
            return Err(Error::DegenerateInput(format!("M^#f vanishes at cell {i}")));
        }
        let r = (mg.values()[i] - essinf).max(0.0) / s;
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(ProbeReport {
        max_ratio: best.0,
        witness_cell: best.1,
        cube: *q,
        tripled,
        essinf_mf: essinf,
        mode: mf.mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const MODES: [BoundaryMode; 3] = [
        BoundaryMode::Restricted,
        BoundaryMode::ZeroExtension,
        BoundaryMode::Dyadic,
    ];

    fn random(dim: usize, n: usize, rng: &mut ChaCha8Rng) -> GridFunction {
        GridFunction::from_cells(dim, n, |_| rng.gen_range(-3.0..3.0)).unwrap()
    }

    fn close(a: &[f64], b: &[f64], rel: f64) {
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).abs() <= rel * scale, "cell {i}: {x} vs {y}");
        }
    }

    #[test]
    fn constant_in_every_mode() {
        let f = GridFunction::constant(2, 8, -1.5).unwrap();
        for mode in MODES {
            close(maximal(&f, mode).values(), &[1.5; 64], 1e-12);
        }
        // zero extension sees the jump at the boundary
        for mode in [BoundaryMode::Restricted, BoundaryMode::Dyadic] {
            close(sharp_maximal(&f, mode).values(), &[0.0; 64], 1e-12);
        }
    }

    #[test]
    fn spike_restricted() {
        let f = GridFunction::new(1, 4, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        close(maximal(&f, BoundaryMode::Restricted).values(), &[4.0, 2.0, 4.0 / 3.0, 1.0], 1e-15);
        close(maximal_naive(&f, BoundaryMode::Restricted).values(), &[4.0, 2.0, 4.0 / 3.0, 1.0], 1e-15);
    }

    #[test]
    fn step_sharp_restricted() {
        let f = GridFunction::new(1, 4, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let m = sharp_maximal(&f, BoundaryMode::Restricted);
        assert!((m.values()[1] - 0.5).abs() < 1e-15);
        close(m.values(), sharp_maximal_naive(&f, BoundaryMode::Restricted).values(), 1e-12);
    }

    #[test]
    fn haar_step_dyadic() {
        // dyadic intervals of [1,-1,0,0]: singletons, [0,2) mean |.| 1, [2,4) 0, [0,4) 1/2
        let f = GridFunction::new(1, 4, vec![1.0, -1.0, 0.0, 0.0]).unwrap();
        let expect = [1.0, 1.0, 0.5, 0.5];
        close(maximal(&f, BoundaryMode::Dyadic).values(), &expect, 1e-15);
        close(maximal_naive(&f, BoundaryMode::Dyadic).values(), &expect, 1e-15);
    }

    #[test]
    fn zero_field_for_zero_input() {
        let f = GridFunction::constant(1, 8, 0.0).unwrap();
        for mode in MODES {
            assert!(maximal_naive(&f, mode).values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn fast_matches_naive_1d() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = 1 << (trial % 7 + 1);
            let f = random(1, n, &mut rng);
            let mode = MODES[trial % 3];
            close(maximal(&f, mode).values(), maximal_naive(&f, mode).values(), 1e-9);
            if n <= 64 {
                close(sharp_maximal(&f, mode).values(), sharp_maximal_naive(&f, mode).values(), 1e-9);
            }
        }
    }

    #[test]
    fn fast_matches_naive_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [1, 2, 4, 8] {
            let f = random(2, n, &mut rng);
            for mode in MODES {
                close(maximal(&f, mode).values(), maximal_naive(&f, mode).values(), 1e-9);
                close(sharp_maximal(&f, mode).values(), sharp_maximal_naive(&f, mode).values(), 1e-9);
            }
        }
    }

    #[test]
    fn sharp_at_most_twice_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dim in [1, 2] {
            let f = random(dim, 16, &mut rng);
            for mode in MODES {
                let m = maximal(&f, mode);
                let s = sharp_maximal(&f, mode);
                for (a, b) in s.values().iter().zip(m.values()) {
                    assert!(*a <= 2.0 * b + 1e-12);
                }
            }
        }
    }

    #[test]
    fn maximal_dominates_pointwise_and_nests() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f = random(2, 16, &mut rng).abs();
        let d = maximal(&f, BoundaryMode::Dyadic);
        let r = maximal(&f, BoundaryMode::Restricted);
        let z = maximal(&f, BoundaryMode::ZeroExtension);
        for i in 0..f.len() {
            assert!(r.values()[i] >= f.values()[i]);
            assert!(d.values()[i] <= r.values()[i] + 1e-12);
            assert!(r.values()[i] <= z.values()[i] + 1e-12);
        }
        assert!(z.truncation_bound.unwrap() > 0.0);
        assert!(r.truncation_bound.is_none());
    }

    #[test]
    fn local_maximal_examples() {
        let f = GridFunction::new(1, 2, vec![0.0, 1.0]).unwrap();
        let q = GridCube::whole(1, 2);
        assert_eq!(local_maximal(&f, &q).unwrap().values(), &[0.5, 0.5]);
        let c = GridFunction::constant(2, 4, 3.0).unwrap();
        let q = GridCube::new_2d([2, 0], 2);
        assert!(local_maximal(&c, &q).unwrap().values().iter().all(|v| *v == 0.0));
        let bad = GridCube::new_1d(0, 3);
        let g = GridFunction::constant(1, 4, 0.0).unwrap();
        assert!(matches!(local_maximal(&g, &bad), Err(Error::UnsupportedCube { .. })));
    }

    #[test]
    fn local_maximal_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let f = random(2, 8, &mut rng);
        for q in [GridCube::whole(2, 8), GridCube::new_2d([4, 2], 4), GridCube::new_2d([1, 3], 2)] {
            let a = local_maximal(&f, &q).unwrap();
            close(a.values(), local_maximal_naive(&f, &q).unwrap().values(), 1e-12);
        }
    }

    #[test]
    fn weak_l1_examples() {
        let g = GridFunction::constant(1, 4, -2.0).unwrap();
        assert_eq!(weak_l1_quasinorm(&g, 1.0).unwrap(), 2.0);
        let z = GridFunction::constant(1, 4, 0.0).unwrap();
        assert_eq!(weak_l1_quasinorm(&z, 1.0).unwrap(), 0.0);
        let s = GridFunction::new(1, 4, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(weak_l1_quasinorm(&s, 1.0).unwrap(), 1.0);
        assert!(weak_l1_quasinorm(&s, 0.0).is_err());
    }

    #[test]
    fn weak_l1_matches_threshold_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let g = random(1, 64, &mut rng);
        let mut best = 0.0f64;
        for t in g.values() {
            let t = t.abs();
            let count = g.values().iter().filter(|v| v.abs() >= t).count();
            best = best.max(t * count as f64 / 64.0);
        }
        assert!((weak_l1_quasinorm(&g, 0.5).unwrap() - 2.0 * best).abs() < 1e-12);
    }

    #[test]
    fn probe_rejects_constant_and_missing_triple() {
        let c = GridFunction::constant(1, 16, 1.0).unwrap();
        let q = GridCube::new_1d(4, 4);
        assert!(matches!(
            nonlocal_bound_probe(&c, &q, BoundaryMode::Restricted),
            Err(Error::DegenerateInput(_))
        ));
        let f = GridFunction::from_cells(1, 16, |c| c[0] as f64).unwrap();
        assert!(matches!(
            nonlocal_bound_probe(&f, &GridCube::new_1d(0, 4), BoundaryMode::Restricted),
            Err(Error::TriplingUnavailable { .. })
        ));
        let r = nonlocal_bound_probe(&f, &q, BoundaryMode::Restricted).unwrap();
        assert!(r.max_ratio.is_finite() && r.max_ratio >= 0.0);
        assert!(q.contains_cell(f.shape().cell(r.witness_cell)));
    }
}
