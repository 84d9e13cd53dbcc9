//! Both sides of the quantitative estimates, evaluated on grid inputs.
//!
//! The per-cell quantity behind most checks is the ratio field
//! `r(x) = (Mf(x) - min_Q Mf) / M^#f(x)` on a cube `Q`. [`FunctionFields`]
//! caches `Mf` and `M^#f` so a function can be paired with many weights,
//! cubes and exponents.

pub mod checks;
pub mod suite;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::corpus::{half_space_oriented, HalfSpace};
use crate::error::{Error, Result};
use crate::grid::{cube_min, CubeFamily, GridCube, GridFunction, Weight};
use crate::operators::{local_maximal, maximal, sharp_maximal, BoundaryMode, MaximalField};
use crate::oscillation::{blo_w_seminorm, bmo_seminorm, default_family, fujii_wilson};

/// Tail fits use the samples whose mass lies in this window.
pub const FIT_WINDOW: (f64, f64) = (1e-4, 0.5);

/// `Mf` and `M^#f` of one function in one mode.
#[derive(Clone, Debug)]
pub struct FunctionFields {
    pub mode: BoundaryMode,
    pub mf: MaximalField,
    pub msharp: MaximalField,
}

impl FunctionFields {
    pub fn compute(f: &GridFunction, mode: BoundaryMode) -> Result<Self> {
        if f.is_constant() {
            return Err(Error::DegenerateInput("f is constant, so M^#f vanishes".into()));
        }
        Ok(FunctionFields {
            mode,
            mf: maximal(f, mode),
            msharp: sharp_maximal(f, mode),
        })
    }
}

/// `(cell, r(x))` for the cells of `q`, in cell order.
pub fn ratio_field(fields: &FunctionFields, q: &GridCube) -> Result<Vec<(usize, f64)>> {
    let shape = fields.mf.field.shape();
    let floor = cube_min(&fields.mf.field, q)?;
    q.cell_indices(shape)
        .map(|i| {
            let s = fields.msharp.values()[i];
            if s <= 0.0 {
                return Err(Error::DegenerateInput(format!("M^#f vanishes at cell {i}")));
            }
            Ok((i, (fields.mf.values()[i] - floor) / s))
        })
        .collect()
}

/// `(cell, M_Q((f - f_Q) chi_Q)(x) / M^#f(x))` for the cells of `q`.
pub fn cp_field(f: &GridFunction, fields: &FunctionFields, q: &GridCube) -> Result<Vec<(usize, f64)>> {
    let local = local_maximal(f, q)?;
    if local.values().iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateInput(format!("f is constant on {q}")));
    }
    q.cell_indices(f.shape())
        .zip(local.values())
        .map(|(i, m)| {
            let s = fields.msharp.values()[i];
            if s <= 0.0 {
                return Err(Error::DegenerateInput(format!("M^#f vanishes at cell {i}")));
            }
            Ok((i, m / s))
        })
        .collect()
}

/// `(w(Q)^{-1} sum r^p w)^{1/p}` over the cells of a ratio field.
pub fn weighted_power_mean(ratio: &[(usize, f64)], w: &Weight, p: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for &(i, r) in ratio {
        let wi = w.values()[i];
        num += r.powf(p) * wi;
        den += wi;
    }
    (num / den).powf(1.0 / p)
}

/// One evaluation of a normalized ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub lhs: f64,
    pub p: f64,
    pub a_infty: f64,
    /// `lhs / (p a_infty)`.
    pub normalized: f64,
    pub f_ref: String,
    pub w_ref: String,
    pub cube: GridCube,
    pub mode: BoundaryMode,
    pub family: CubeFamily,
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must be finite and at least 1, got {p}")))
    }
}

fn record(lhs: f64, p: f64, w: &Weight, q: &GridCube, mode: BoundaryMode) -> RatioRecord {
    let family = default_family(w.resolution(), w.dim());
    let a_infty = fujii_wilson(w, mode, family).a_infty;
    RatioRecord {
        lhs,
        p,
        a_infty,
        normalized: lhs / (p * a_infty),
        f_ref: String::new(),
        w_ref: String::new(),
        cube: *q,
        mode,
        family,
    }
}

/// Left side of the weighted `L^p` estimate for `r`, normalized by `p [w]_{A_inf}`.
pub fn thm1_ratio(f: &GridFunction, w: &Weight, q: &GridCube, p: f64, mode: BoundaryMode) -> Result<RatioRecord> {
    check_p(p)?;
    let fields = FunctionFields::compute(f, mode)?;
    let lhs = weighted_power_mean(&ratio_field(&fields, q)?, w, p);
    Ok(record(lhs, p, w, q, mode))
}

/// As [`thm1_ratio`] with the local dyadic maximal function of `(f - f_Q) chi_Q`
/// in the numerator.
pub fn cp_ratio(f: &GridFunction, w: &Weight, q: &GridCube, p: f64) -> Result<RatioRecord> {
    check_p(p)?;
    let mode = BoundaryMode::Restricted;
    let fields = FunctionFields::compute(f, mode)?;
    let lhs = weighted_power_mean(&cp_field(f, &fields, q)?, w, p);
    Ok(record(lhs, p, w, q, mode))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub t_grid: Vec<f64>,
    /// `w({x in Q : r(x) > t}) / w(Q)` per `t`.
    pub mass: Vec<f64>,
    /// Slope of `log mass` against `t` over the fit window.
    pub fitted_rate: Option<f64>,
    pub fitted_intercept: Option<f64>,
    pub fit_points: usize,
}

/// Distribution function of a ratio field under `w`, exactly monotone:
/// cells are sorted by ratio and the masses are cumulative sums.
pub struct Distribution {
    sorted: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Distribution {
    pub fn new(ratio: &[(usize, f64)], w: &Weight) -> Self {
        let mut cells: Vec<(f64, f64)> = ratio.iter().map(|&(i, r)| (r, w.values()[i])).collect();
        cells.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut cumulative = Vec::with_capacity(cells.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for c in &cells {
            acc += c.1;
            cumulative.push(acc);
        }
        Distribution {
            sorted: cells.into_iter().map(|c| c.0).collect(),
            cumulative,
        }
    }

    /// `w({r > t}) / w(Q)`.
    pub fn mass_above(&self, t: f64) -> f64 {
        let k = self.sorted.partition_point(|r| *r > t);
        self.cumulative[k] / self.cumulative[self.sorted.len()]
    }

    pub fn max_ratio(&self) -> f64 {
        self.sorted.first().copied().unwrap_or(0.0)
    }
}

/// `t = 0, h, ..., (points - 1) h` with the last point just past `max_ratio`.
pub fn default_t_grid(max_ratio: f64, points: usize) -> Vec<f64> {
    let top = if max_ratio > 0.0 { max_ratio * 1.0001 } else { 1.0 };
    let h = top / (points - 1) as f64;
    (0..points).map(|k| k as f64 * h).collect()
}

/// Least-squares line through `(x, y)`; `None` below three points or when
/// `y` is constant.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 3 || ys.iter().all(|y| *y == ys[0]) {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub fn tail_profile_from(dist: &Distribution, t_grid: &[f64]) -> TailProfile {
    let mass: Vec<f64> = t_grid.iter().map(|t| dist.mass_above(*t)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(&mass)
        .filter(|(_, m)| **m >= FIT_WINDOW.0 && **m <= FIT_WINDOW.1)
        .map(|(t, m)| (*t, m.ln()))
        .unzip();
    let fit = fit_line(&xs, &ys);
    TailProfile {
        t_grid: t_grid.to_vec(),
        mass,
        fitted_rate: fit.map(|f| f.0),
        fitted_intercept: fit.map(|f| f.1),
        fit_points: xs.len(),
    }
}

/// Level-set masses of the ratio field of `f` on `q` under `w`.
pub fn tail_profile(
    f: &GridFunction,
    w: &Weight,
    q: &GridCube,
    mode: BoundaryMode,
    t_grid: &[f64],
) -> Result<TailProfile> {
    if t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidParameter("t grid must be strictly ascending".into()));
    }
    let fields = FunctionFields::compute(f, mode)?;
    let ratio = ratio_field(&fields, q)?;
    Ok(tail_profile_from(&Distribution::new(&ratio, w), t_grid))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodLambda {
    pub lambda: f64,
    pub gamma: f64,
    /// `w({Mf - min_Q Mf > lambda, M^#f <= gamma lambda}) / w(Q)`.
    pub mass: f64,
    /// `w({r > 1/gamma}) / w(Q)`.
    pub bound_mass: f64,
    /// Every cell of the first set lies in the second.
    pub inclusion: bool,
    pub ok: bool,
}

pub fn good_lambda_with(
    fields: &FunctionFields,
    dist: &Distribution,
    w: &Weight,
    q: &GridCube,
    lambda: f64,
    gamma: f64,
) -> Result<GoodLambda> {
    if !(lambda > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda and gamma must be positive, got {lambda} and {gamma}"
        )));
    }
    let shape = fields.mf.field.shape();
    let floor = cube_min(&fields.mf.field, q)?;
    let (mut inside, mut total) = (0.0, 0.0);
    let mut inclusion = true;
    for i in q.cell_indices(shape) {
        let wi = w.values()[i];
        total += wi;
        let excess = fields.mf.values()[i] - floor;
        let s = fields.msharp.values()[i];
        if excess > lambda && s <= gamma * lambda {
            inside += wi;
            inclusion &= excess / s > 1.0 / gamma;
        }
    }
    let mass = inside / total;
    let bound_mass = dist.mass_above(1.0 / gamma);
    Ok(GoodLambda {
        lambda,
        gamma,
        mass,
        bound_mass,
        inclusion,
        ok: inclusion && mass <= bound_mass + 1e-12,
    })
}

pub fn good_lambda(
    f: &GridFunction,
    w: &Weight,
    q: &GridCube,
    lambda: f64,
    gamma: f64,
    mode: BoundaryMode,
) -> Result<GoodLambda> {
    let fields = FunctionFields::compute(f, mode)?;
    let dist = Distribution::new(&ratio_field(&fields, q)?, w);
    good_lambda_with(&fields, &dist, w, q, lambda, gamma)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerCake {
    pub value: f64,
    /// Bound on `|value - (int_0^inf p t^{p-1} mass)^{1/p}|`.
    pub error_bound: f64,
}

/// `(p int t^{p-1} mass(t) dt)^{1/p}` by the trapezoid rule on the profile's grid.
///
/// `mass` is nonincreasing, so on each interval the integral lies between
/// `mass(t_{k+1}) (t_{k+1}^p - t_k^p)` and `mass(t_k) (t_{k+1}^p - t_k^p)`;
/// the spread of those brackets around the trapezoid sum bounds the error,
/// and `|a^{1/p} - b^{1/p}| <= |a - b|^{1/p}` carries it through the root.
/// A profile whose last mass is positive gets an infinite bound.
pub fn layer_cake_lp(profile: &TailProfile, p: f64) -> Result<LayerCake> {
    check_p(p)?;
    let t = &profile.t_grid;
    let m = &profile.mass;
    let (mut trap, mut lo, mut hi) = (0.0, 0.0, 0.0);
    for k in 1..t.len() {
        let g0 = p * t[k - 1].powf(p - 1.0) * m[k - 1];
        let g1 = p * t[k].powf(p - 1.0) * m[k];
        trap += 0.5 * (g0 + g1) * (t[k] - t[k - 1]);
        let span = t[k].powf(p) - t[k - 1].powf(p);
        lo += m[k] * span;
        hi += m[k - 1] * span;
    }
    if let (Some(t0), Some(m0)) = (t.first(), m.first()) {
        // mass is at most 1 below the first sample
        hi += t0.powf(p);
        lo += m0 * t0.powf(p);
    }
    let tail_open = m.last().is_some_and(|v| *v > 0.0);
    let err = (trap - lo).abs().max((hi - trap).abs());
    Ok(LayerCake {
        value: trap.max(0.0).powf(1.0 / p),
        error_bound: if tail_open { f64::INFINITY } else { err.powf(1.0 / p) },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaGrowth {
    pub p: f64,
    /// `Gamma(p+1)^{1/p} / p`.
    pub value: f64,
    pub ok: bool,
}

pub const GAMMA_GROWTH_BOUND: f64 = 1.2;

pub fn gamma_growth_check(p: f64) -> Result<GammaGrowth> {
    check_p(p)?;
    let value = (ln_gamma(p + 1.0) / p).exp() / p;
    Ok(GammaGrowth {
        p,
        value,
        ok: value <= GAMMA_GROWTH_BOUND,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XRow {
    pub label: String,
    pub blo_w: f64,
    pub bmo: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XEstimate {
    pub x_hat: f64,
    pub argmax: String,
    pub rows: Vec<XRow>,
}

/// A member of the function corpus for [`x_estimate`]: a function with its
/// maximal function, either computed on the grid or known in closed form.
#[derive(Clone, Debug)]
pub struct XMember {
    pub label: String,
    pub f: GridFunction,
    pub mf: GridFunction,
}

impl XMember {
    pub fn gridded(label: impl Into<String>, f: GridFunction, mode: BoundaryMode) -> Self {
        let mf = maximal(&f, mode).field;
        XMember { label: label.into(), f, mf }
    }
}

/// Both orientations of the central half-space along axis 0, with their
/// closed-form maximal functions.
pub fn half_space_members(n: usize, dim: usize) -> Result<Vec<XMember>> {
    [true, false]
        .into_iter()
        .map(|positive| {
            let ex = half_space_oriented(
                n,
                dim,
                HalfSpace {
                    axis: 0,
                    boundary_cell: n / 2,
                    positive,
                },
            )?;
            Ok(XMember {
                label: if positive { "half_space_upper" } else { "half_space_lower" }.into(),
                f: ex.grid_values,
                mf: ex.analytic_maximal,
            })
        })
        .collect()
}

/// `max_f ||Mf||_{BLO_w} / ||f||_BMO` over the members; seminorms over `family`.
pub fn x_estimate(w: &Weight, members: &[XMember], family: CubeFamily) -> Result<XEstimate> {
    if members.is_empty() {
        return Err(Error::InvalidParameter("x estimate needs at least one function".into()));
    }
    let mut rows = Vec::with_capacity(members.len());
    for m in members {
        let bmo = bmo_seminorm(&m.f, family).value;
        if bmo <= 0.0 {
            return Err(Error::DegenerateInput(format!("member {} is constant", m.label)));
        }
        let blo_w = blo_w_seminorm(&m.mf, w, family)?.value;
        rows.push(XRow {
            label: m.label.clone(),
            blo_w,
            bmo,
            ratio: blo_w / bmo,
        });
    }
    let best = rows
        .iter()
        .fold(&rows[0], |b, r| if r.ratio > b.ratio { r } else { b });
    Ok(XEstimate {
        x_hat: best.ratio,
        argmax: best.label.clone(),
        rows: rows.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharLowerBound {
    /// `w(Q cap H) / w(Q)` for the favorable side `H`.
    pub value: f64,
    /// Whether `H` is the upper half along axis 0.
    pub upper: bool,
    pub cube: GridCube,
    pub ok: bool,
}

/// Picks the half of the central straddling cube (the whole domain, split at
/// the midpoint of axis 0) carrying at least half the weight.
pub fn char_lower_bound(w: &Weight) -> Result<CharLowerBound> {
    let n = w.resolution();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two cells per axis".into()));
    }
    let q = GridCube::whole(w.dim(), n);
    let (mut upper, mut total) = (0.0, 0.0);
    for (i, v) in w.values().iter().enumerate() {
        total += v;
        if w.shape().cell(i)[0] >= n / 2 {
            upper += v;
        }
    }
    let lower = total - upper;
    let (value, up) = if upper >= lower { (upper / total, true) } else { (lower / total, false) };
    Ok(CharLowerBound {
        value,
        upper: up,
        cube: q,
        ok: value >= 0.5 - 1e-12,
    })
}
