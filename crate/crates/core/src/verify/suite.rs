//! Calibration suites: a fixed corpus of functions, weights and cubes per
//! (dimension, mode, family) group, the constants measured on it, and the
//! frozen-file comparison.
//!
//! Upper constants pass when the measured value is at most the frozen one
//! plus [`MARGIN`]; lower constants when it is at least the frozen one minus
//! [`MARGIN`] (both relative).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::corpus::Generator;
use crate::grid::{enumerate_cubes, CubeSelection};
use crate::operators::nonlocal_bound_probe_with;
use crate::oscillation::{
    a1_constant, coifman_rochberg, default_seminorm_family, fujii_wilson, llogl_ratio, log_plus_transform, reverse_holder_check_with,
    WeightConstants,
};
use crate::report::{grid_digest, sha256_hex, to_json};

/// Relative regression margin against frozen constants.
pub const MARGIN: f64 = 0.05;
/// Relative drift tolerated by the stability report when N doubles.
pub const STABILITY_TOLERANCE: f64 = 0.25;
/// Samples per tail profile.
pub const TAIL_POINTS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub dim: usize,
    pub n: usize,
    /// Mode of every maximal function in the group.
    pub mode: BoundaryMode,
    /// Cube family of the Fujii-Wilson constant.
    pub family: CubeFamily,
    /// Cube family of the seminorms in the `x_hat` estimate.
    pub x_family: CubeFamily,
    pub functions: Vec<Generator>,
    pub weights: Vec<Generator>,
    pub p_values: Vec<f64>,
    /// Random cubes added to the dyadic cubes of side at least N/8.
    pub random_cubes: usize,
    pub good_lambda_trials: usize,
    pub probe_trials: usize,
    pub holder_trials: usize,
    pub seed: u64,
}

impl GroupConfig {
    pub fn key(&self) -> String {
        format!("d{}_{}_{}", self.dim, self.mode, self.family)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub name: String,
    pub groups: Vec<GroupConfig>,
}

fn functions(n: usize, dim: usize) -> Vec<Generator> {
    let c = [0.37, 0.61];
    vec![
        Generator::RandomDyadicBmo { n, dim, depth: 4, amplitude: 1.0, seed: 1 },
        Generator::RandomDyadicBmo { n, dim, depth: n.trailing_zeros(), amplitude: 0.5, seed: 2 },
        Generator::LogAbs { n, dim, center: if dim == 1 { [c[0], 0.0] } else { c } },
        Generator::HalfSpace { n, dim, axis: 0, boundary_cell: n / 2 },
    ]
}

fn weights(n: usize, dim: usize) -> Vec<Generator> {
    let mid = if dim == 1 { [0.5, 0.0] } else { [0.5, 0.5] };
    let off = if dim == 1 { [0.3, 0.0] } else { [0.3, 0.7] };
    let spike = if dim == 1 { [n / 3, 0] } else { [n / 3, n / 4] };
    vec![
        Generator::PowerWeight { n, dim, exponent: 0.0, center: mid },
        Generator::PowerWeight { n, dim, exponent: -0.5, center: off },
        Generator::PowerWeight { n, dim, exponent: -0.95 * dim as f64, center: mid },
        Generator::PowerWeight { n, dim, exponent: 2.0, center: mid },
        Generator::PowerWeight { n, dim, exponent: 8.0, center: off },
        Generator::TwoValued { n, dim, axis: 0, k: 64.0 },
        Generator::A1Family { n, dim, delta: 0.5, seed: 3 },
        Generator::Spike { n, dim, cell: spike, height: (n as f64).powi(dim as i32) },
        Generator::Spike { n, dim, cell: spike, height: 1e9 },
    ]
}

fn group(dim: usize, n: usize, seed: u64) -> GroupConfig {
    GroupConfig {
        dim,
        n,
        mode: BoundaryMode::Restricted,
        family: default_family(n, dim),
        x_family: default_seminorm_family(n, dim),
        functions: functions(n, dim),
        weights: weights(n, dim),
        p_values: vec![1.0, 2.0, 4.0, 8.0],
        random_cubes: 8,
        good_lambda_trials: 100,
        probe_trials: 50,
        holder_trials: 100,
        seed,
    }
}

impl SuiteConfig {
    /// The calibration corpus: d = 1 at N = 512 and d = 2 at N = 64.
    pub fn default_suite() -> Self {
        SuiteConfig {
            name: "default".into(),
            groups: vec![group(1, 512, 11), group(2, 64, 12)],
        }
    }

    /// Same generators at small N, for fast end-to-end runs.
    pub fn quick_suite() -> Self {
        SuiteConfig {
            name: "quick".into(),
            groups: vec![group(1, 64, 11), group(2, 16, 12)],
        }
    }

    pub fn named(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default_suite()),
            "quick" => Ok(Self::quick_suite()),
            _ => Err(Error::InvalidParameter(format!("unknown suite {name:?} (expected default or quick)"))),
        }
    }

    /// Every group at twice the resolution.
    pub fn doubled(&self) -> Self {
        SuiteConfig {
            name: format!("{}_x2", self.name),
            groups: self
                .groups
                .iter()
                .map(|g| {
                    let mut d = group(g.dim, 2 * g.n, g.seed);
                    d.family = g.family;
                    d.x_family = g.x_family;
                    d.mode = g.mode;
                    d
                })
                .collect(),
        }
    }

    /// SHA-256 of the compact JSON encoding of the configuration.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("suite config serializes");
        sha256_hex(text.as_bytes())
    }
}

/// Constants measured on one group. Fields are `None` when the part that
/// measures them was not run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupConstants {
    /// Largest `lhs / (p [w]_{A_inf})`.
    pub c_star: Option<f64>,
    /// Same with the local dyadic numerator.
    pub c_star_cp: Option<f64>,
    /// Smallest `|rate| [w]_{A_inf}` over tail fits.
    pub kappa: Option<f64>,
    /// Smallest and largest `x_hat / [w]_{A_inf}`.
    pub x_lower: Option<f64>,
    pub x_upper: Option<f64>,
    pub llogl_lo: Option<f64>,
    pub llogl_hi: Option<f64>,
    /// Largest A1 constant of the Coifman-Rochberg weights.
    pub a1_cr: Option<f64>,
    /// Largest nonlocal-part probe ratio.
    pub nonlocal_c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upper,
    Lower,
}

impl GroupConstants {
    pub fn entries(&self) -> Vec<(&'static str, Direction, Option<f64>)> {
        use Direction::*;
        vec![
            ("c_star", Upper, self.c_star),
            ("c_star_cp", Upper, self.c_star_cp),
            ("kappa", Lower, self.kappa),
            ("x_lower", Lower, self.x_lower),
            ("x_upper", Upper, self.x_upper),
            ("llogl_lo", Lower, self.llogl_lo),
            ("llogl_hi", Upper, self.llogl_hi),
            ("a1_cr", Upper, self.a1_cr),
            ("nonlocal_c", Upper, self.nonlocal_c),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenGroup {
    pub dim: usize,
    pub n: usize,
    pub mode: BoundaryMode,
    pub family: CubeFamily,
    pub constants: GroupConstants,
    /// Weight constants of the corpus weights, keyed by weight reference.
    pub weights: BTreeMap<String, WeightSummary>,
}

/// A frozen calibration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub suite: String,
    pub corpus_hash: String,
    pub groups: BTreeMap<String, FrozenGroup>,
}

impl Calibration {
    /// The frozen weight whose grid digest is `digest`, with its group key.
    pub fn find_weight(&self, digest: &str) -> Option<(&str, &WeightSummary)> {
        self.groups
            .iter()
            .flat_map(|(k, g)| g.weights.values().map(move |w| (k.as_str(), w)))
            .find(|(_, w)| w.digest == digest)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, to_json(self)?)?;
        Ok(())
    }

    /// Errors unless the file was frozen from exactly `suite`.
    pub fn check_hash(&self, suite: &SuiteConfig) -> Result<()> {
        let found = suite.hash();
        if found != self.corpus_hash {
            return Err(Error::StaleCalibration {
                expected: self.corpus_hash.clone(),
                found,
            });
        }
        Ok(())
    }
}

/// Which parts of a group run to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parts {
    pub thm1: bool,
    pub cp: bool,
    pub tails: bool,
    pub good_lambda: bool,
    pub probe: bool,
    pub machinery: bool,
    pub x: bool,
    pub char_bound: bool,
}

impl Parts {
    pub const ALL: Parts = Parts {
        thm1: true,
        cp: true,
        tails: true,
        good_lambda: true,
        probe: true,
        machinery: true,
        x: true,
        char_bound: true,
    };
    pub const NONE: Parts = Parts {
        thm1: false,
        cp: false,
        tails: false,
        good_lambda: false,
        probe: false,
        machinery: false,
        x: false,
        char_bound: false,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub w_ref: String,
    /// [`grid_digest`] of the weight.
    pub digest: String,
    pub constants: WeightConstants,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSpread {
    pub f_ref: String,
    pub w_ref: String,
    /// Per `p`, the largest normalized ratio over the cubes.
    pub normalized: Vec<f64>,
    /// `max / min` of `normalized`.
    pub spread: f64,
    /// `max normalized / normalized` at the smallest `p`; at most 1 when the
    /// normalized ratio never grows with `p`.
    pub growth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub f_ref: String,
    pub w_ref: String,
    pub cube: GridCube,
    pub a_infty: f64,
    pub fitted_rate: Option<f64>,
    pub fit_points: usize,
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineryRow {
    pub w_ref: String,
    pub cube: GridCube,
    pub llogl: f64,
    pub a1_cr: f64,
    pub min_v_on_q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XSummary {
    pub w_ref: String,
    pub unit_weight: bool,
    pub a_infty: f64,
    pub estimate: XEstimate,
}

/// Everything measured on one group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub key: String,
    pub dim: usize,
    pub n: usize,
    pub mode: BoundaryMode,
    pub family: CubeFamily,
    pub cubes: Vec<GridCube>,
    pub weights: Vec<WeightSummary>,
    pub thm1: Vec<RatioRecord>,
    pub cp: Vec<RatioRecord>,
    /// Pairs and cubes where the power mean decreased in `p` beyond 1e-9.
    pub p_monotonicity_violations: usize,
    pub spreads: Vec<PairSpread>,
    pub tails: Vec<TailSummary>,
    pub good_lambda: Vec<GoodLambda>,
    pub probes: Vec<ProbeRecord>,
    pub holder: Vec<ReverseHolderRecord>,
    pub machinery: Vec<MachineryRow>,
    pub x: Vec<XSummary>,
    pub char_bounds: Vec<CharLowerBound>,
    pub constants: GroupConstants,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub f_ref: String,
    pub report: crate::operators::ProbeReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolderRecord {
    pub w_ref: String,
    pub cube: GridCube,
    pub cells: usize,
    pub check: crate::oscillation::ReverseHolder,
}

fn random_cube(rng: &mut ChaCha8Rng, n: usize, dim: usize, min_side: usize, max_side: usize) -> GridCube {
    let lo = min_side.trailing_zeros();
    let hi = max_side.trailing_zeros();
    let side = 1usize << rng.gen_range(lo..=hi);
    let mut a = [0i64; 2];
    for slot in a.iter_mut().take(dim) {
        *slot = rng.gen_range(0..=n - side) as i64;
    }
    GridCube::new(dim, &a[..dim], side).expect("random cube fits")
}

/// Dyadic cubes of side at least `N/8`, then `extra` random cubes with
/// power-of-two sides between 4 and `N/2`.
pub fn ratio_cubes(n: usize, dim: usize, extra: usize, rng: &mut ChaCha8Rng) -> Vec<GridCube> {
    let mut cubes: Vec<GridCube> = enumerate_cubes(n, dim, CubeSelection::Dyadic)
        .filter(|q| q.side() >= (n / 8).max(1))
        .collect();
    if n >= 8 {
        for _ in 0..extra {
            cubes.push(random_cube(rng, n, dim, 4, n / 2));
        }
    }
    cubes
}

fn min_opt(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.min(b)))
}

fn max_opt(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.max(b)))
}

struct PairOutput {
    thm1: Vec<RatioRecord>,
    cp: Vec<RatioRecord>,
    violations: usize,
    spread: Option<PairSpread>,
    tails: Vec<TailSummary>,
    good_lambda: Vec<GoodLambda>,
}

#[allow(clippy::too_many_arguments)]
fn run_pair(
    cfg: &GroupConfig,
    parts: Parts,
    (f_ref, f, fields): (&str, &GridFunction, &FunctionFields),
    (w_ref, w, a_infty): (&str, &Weight, f64),
    cubes: &[GridCube],
    seed: u64,
) -> Result<PairOutput> {
    let mut out = PairOutput {
        thm1: Vec::new(),
        cp: Vec::new(),
        violations: 0,
        spread: None,
        tails: Vec::new(),
        good_lambda: Vec::new(),
    };
    let rec = |lhs: f64, p: f64, q: &GridCube| RatioRecord {
        lhs,
        p,
        a_infty,
        normalized: lhs / (p * a_infty),
        f_ref: f_ref.to_string(),
        w_ref: w_ref.to_string(),
        cube: *q,
        mode: cfg.mode,
        family: cfg.family,
    };
    let mut best = vec![0.0f64; cfg.p_values.len()];
    let mut dists = Vec::new();
    for q in cubes {
        let ratio = ratio_field(fields, q)?;
        if parts.thm1 {
            let means: Vec<f64> = cfg.p_values.iter().map(|p| weighted_power_mean(&ratio, w, *p)).collect();
            out.violations += means.windows(2).filter(|m| m[1] < m[0] * (1.0 - 1e-9)).count();
            for (k, (&lhs, &p)) in means.iter().zip(&cfg.p_values).enumerate() {
                let r = rec(lhs, p, q);
                best[k] = best[k].max(r.normalized);
                out.thm1.push(r);
            }
        }
        if parts.cp && q.side().is_power_of_two() {
            match cp_field(f, fields, q) {
                Ok(cp) => {
                    for &p in &cfg.p_values {
                        out.cp.push(rec(weighted_power_mean(&cp, w, p), p, q));
                    }
                }
                // f constant on this cube: the estimate is vacuous there
                Err(Error::DegenerateInput(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if parts.tails || parts.good_lambda {
            let dist = Distribution::new(&ratio, w);
            if parts.tails {
                let prof = tail_profile_from(&dist, &default_t_grid(dist.max_ratio(), TAIL_POINTS));
                out.tails.push(TailSummary {
                    f_ref: f_ref.to_string(),
                    w_ref: w_ref.to_string(),
                    cube: *q,
                    a_infty,
                    fitted_rate: prof.fitted_rate,
                    fit_points: prof.fit_points,
                    monotone: prof.mass.windows(2).all(|m| m[1] <= m[0]),
                });
            }
            dists.push(dist);
        }
    }
    if parts.thm1 && !best.is_empty() {
        let hi = best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = best.iter().copied().fold(f64::INFINITY, f64::min);
        out.spread = Some(PairSpread {
            f_ref: f_ref.to_string(),
            w_ref: w_ref.to_string(),
            growth: hi / best[0],
            normalized: best,
            spread: hi / lo,
        });
    }
    if parts.good_lambda {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..cfg.good_lambda_trials {
            let k = rng.gen_range(0..cubes.len());
            let q = &cubes[k];
            let floor = cube_min(&fields.mf.field, q)?;
            let top = q
                .cell_indices(f.shape())
                .map(|i| fields.mf.values()[i] - floor)
                .fold(0.0f64, f64::max)
                .max(1e-3);
            let lambda = rng.gen_range(0.0..1.1) * top + 1e-6;
            let gamma = 10f64.powf(rng.gen_range(-1.5..1.5));
            out.good_lambda.push(good_lambda_with(fields, &dists[k], w, q, lambda, gamma)?);
        }
    }
    Ok(out)
}

/// Evaluates one group.
pub fn run_group(cfg: &GroupConfig, parts: Parts) -> Result<GroupReport> {
    let (n, dim) = (cfg.n, cfg.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cubes = ratio_cubes(n, dim, cfg.random_cubes, &mut rng);

    let fs: Vec<(String, GridFunction)> = cfg
        .functions
        .iter()
        .enumerate()
        .map(|(i, g)| Ok((format!("f{i}:{}", g.name()), g.generate()?)))
        .collect::<Result<_>>()?;
    let ws: Vec<(String, Weight)> = cfg
        .weights
        .iter()
        .enumerate()
        .map(|(i, g)| Ok((format!("w{i}:{}", g.name()), Weight::new(g.generate()?)?)))
        .collect::<Result<_>>()?;

    let need_fields = parts.thm1 || parts.cp || parts.tails || parts.good_lambda || parts.probe;
    let fields: Vec<FunctionFields> = if need_fields {
        fs.par_iter().map(|(_, f)| FunctionFields::compute(f, cfg.mode)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let need_constants = need_fields || parts.machinery || parts.x;
    let weights: Vec<WeightSummary> = if need_constants {
        ws.iter()
            .map(|(r, w)| WeightSummary {
                w_ref: r.clone(),
                digest: grid_digest(w),
                constants: fujii_wilson(w, cfg.mode, cfg.family),
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut report = GroupReport {
        key: cfg.key(),
        dim,
        n,
        mode: cfg.mode,
        family: cfg.family,
        cubes: cubes.clone(),
        weights: weights.clone(),
        thm1: Vec::new(),
        cp: Vec::new(),
        p_monotonicity_violations: 0,
        spreads: Vec::new(),
        tails: Vec::new(),
        good_lambda: Vec::new(),
        probes: Vec::new(),
        holder: Vec::new(),
        machinery: Vec::new(),
        x: Vec::new(),
        char_bounds: Vec::new(),
        constants: GroupConstants::default(),
    };
    let mut k = GroupConstants::default();

    if parts.thm1 || parts.cp || parts.tails || parts.good_lambda {
        let jobs: Vec<(usize, usize)> = (0..fs.len()).flat_map(|i| (0..ws.len()).map(move |j| (i, j))).collect();
        let outs: Vec<PairOutput> = jobs
            .par_iter()
            .map(|&(i, j)| {
                run_pair(
                    cfg,
                    parts,
                    (&fs[i].0, &fs[i].1, &fields[i]),
                    (&ws[j].0, &ws[j].1, weights[j].constants.a_infty),
                    &cubes,
                    cfg.seed ^ ((i as u64) << 32 | j as u64),
                )
            })
            .collect::<Result<_>>()?;
        for o in outs {
            report.thm1.extend(o.thm1);
            report.cp.extend(o.cp);
            report.p_monotonicity_violations += o.violations;
            report.spreads.extend(o.spread);
            report.tails.extend(o.tails);
            report.good_lambda.extend(o.good_lambda);
        }
        for r in &report.thm1 {
            k.c_star = max_opt(k.c_star, r.normalized);
        }
        for r in &report.cp {
            k.c_star_cp = max_opt(k.c_star_cp, r.normalized);
        }
        for t in &report.tails {
            if let Some(rate) = t.fitted_rate {
                k.kappa = min_opt(k.kappa, -rate * t.a_infty);
            }
        }
    }

    if parts.probe {
        let mut prng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
        let max_side = 1usize << (n / 3).max(1).ilog2();
        for t in 0..cfg.probe_trials {
            let i = t % fs.len();
            let side = 1usize << prng.gen_range(0..=max_side.trailing_zeros());
            let mut a = [0i64; 2];
            for slot in a.iter_mut().take(dim) {
                *slot = prng.gen_range(side..=n - 2 * side) as i64;
            }
            let q = GridCube::new(dim, &a[..dim], side)?;
            let r = nonlocal_bound_probe_with(&fs[i].1, &q, &fields[i].mf, &fields[i].msharp)?;
            k.nonlocal_c = max_opt(k.nonlocal_c, r.max_ratio);
            report.probes.push(ProbeRecord {
                f_ref: fs[i].0.clone(),
                report: r,
            });
        }
    }

    if parts.machinery {
        let mut hrng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
        for t in 0..cfg.holder_trials {
            let j = t % ws.len();
            let q = random_cube(&mut hrng, n, dim, 1, n);
            let density: f64 = hrng.gen_range(0.0..1.0);
            let e: Vec<usize> = q.cell_indices(ws[j].1.shape()).filter(|_| hrng.gen_bool(density)).collect();
            let check = reverse_holder_check_with(&ws[j].1, &q, &e, weights[j].constants.a_infty)?;
            report.holder.push(ReverseHolderRecord {
                w_ref: ws[j].0.clone(),
                cube: q,
                cells: e.len(),
                check,
            });
        }
        let mq: Vec<GridCube> = cubes.iter().filter(|q| q.side() >= n / 4).copied().collect();
        let rows: Vec<MachineryRow> = ws
            .par_iter()
            .zip(&weights)
            .flat_map_iter(|((r, w), s)| {
                let mut list = mq.clone();
                list.push(s.constants.a_infty_witness);
                list.into_iter().map(move |q| {
                    let llogl = llogl_ratio(w, &q, cfg.mode)?.ratio;
                    let v = coifman_rochberg(w, &q, BoundaryMode::Restricted)?;
                    let min_v_on_q = cube_min(&v, &q)?;
                    let a1_cr = a1_constant(&Weight::new(v)?, BoundaryMode::Restricted).0;
                    Ok(MachineryRow {
                        w_ref: r.clone(),
                        cube: q,
                        llogl,
                        a1_cr,
                        min_v_on_q,
                    })
                })
            })
            .collect::<Result<_>>()?;
        for row in &rows {
            k.llogl_lo = min_opt(k.llogl_lo, row.llogl);
            k.llogl_hi = max_opt(k.llogl_hi, row.llogl);
            k.a1_cr = max_opt(k.a1_cr, row.a1_cr);
        }
        report.machinery = rows;
    }

    if parts.x {
        let mut members: Vec<XMember> = fs
            .iter()
            .map(|(r, f)| XMember::gridded(r.clone(), f.clone(), cfg.mode))
            .collect();
        members.extend(half_space_members(n, dim)?);
        let xs: Vec<XSummary> = ws
            .par_iter()
            .zip(&weights)
            .map(|((r, w), s)| {
                let mut own = members.clone();
                // b = log+ v from the Coifman-Rochberg weight on the cube
                // attaining the Fujii-Wilson constant
                let v = coifman_rochberg(w, &s.constants.a_infty_witness, BoundaryMode::Restricted)?;
                let b = log_plus_transform(&v)?;
                if !b.is_constant() {
                    own.push(XMember::gridded("log_plus_v", b, cfg.mode));
                }
                Ok(XSummary {
                    w_ref: r.clone(),
                    unit_weight: w.is_constant(),
                    a_infty: s.constants.a_infty,
                    estimate: x_estimate(w, &own, cfg.x_family)?,
                })
            })
            .collect::<Result<_>>()?;
        for x in &xs {
            let ratio = x.estimate.x_hat / x.a_infty;
            k.x_lower = min_opt(k.x_lower, ratio);
            k.x_upper = max_opt(k.x_upper, ratio);
        }
        report.x = xs;
    }

    if parts.char_bound {
        report.char_bounds = ws.iter().map(|(_, w)| char_lower_bound(w)).collect::<Result<_>>()?;
    }

    report.constants = k;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub corpus_hash: String,
    pub groups: Vec<GroupReport>,
}

pub fn run_suite(suite: &SuiteConfig, parts: Parts) -> Result<SuiteReport> {
    let groups = suite.groups.iter().map(|g| run_group(g, parts)).collect::<Result<_>>()?;
    Ok(SuiteReport {
        suite: suite.name.clone(),
        corpus_hash: suite.hash(),
        groups,
    })
}

/// Freezes the constants of a full run.
pub fn calibration_freeze(suite: &SuiteConfig, report: &SuiteReport) -> Result<Calibration> {
    if report.corpus_hash != suite.hash() {
        return Err(Error::StaleCalibration {
            expected: suite.hash(),
            found: report.corpus_hash.clone(),
        });
    }
    let mut groups = BTreeMap::new();
    for g in &report.groups {
        if g.constants.entries().iter().any(|e| e.2.is_none()) {
            return Err(Error::InvalidParameter(format!(
                "group {} was not run with every part; cannot freeze",
                g.key
            )));
        }
        groups.insert(
            g.key.clone(),
            FrozenGroup {
                dim: g.dim,
                n: g.n,
                mode: g.mode,
                family: g.family,
                constants: g.constants.clone(),
                weights: g.weights.iter().map(|w| (w.w_ref.clone(), w.clone())).collect(),
            },
        );
    }
    Ok(Calibration {
        suite: suite.name.clone(),
        corpus_hash: suite.hash(),
        groups,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantCheck {
    pub group: String,
    pub name: String,
    pub direction: Direction,
    pub frozen: f64,
    pub value: f64,
    pub ok: bool,
}

/// Measured constants against the frozen ones, with the regression margin.
pub fn compare_constants(cal: &Calibration, report: &SuiteReport) -> Result<Vec<ConstantCheck>> {
    if cal.corpus_hash != report.corpus_hash {
        return Err(Error::StaleCalibration {
            expected: cal.corpus_hash.clone(),
            found: report.corpus_hash.clone(),
        });
    }
    let mut out = Vec::new();
    for g in &report.groups {
        let frozen = cal
            .groups
            .get(&g.key)
            .ok_or_else(|| Error::StaleCalibration {
                expected: cal.corpus_hash.clone(),
                found: format!("{} (group {} missing)", report.corpus_hash, g.key),
            })?;
        let fz = frozen.constants.entries();
        for ((name, dir, value), (_, _, fv)) in g.constants.entries().into_iter().zip(fz) {
            let (Some(value), Some(fv)) = (value, fv) else { continue };
            let ok = match dir {
                Direction::Upper => value <= fv + MARGIN * fv.abs(),
                Direction::Lower => value >= fv - MARGIN * fv.abs(),
            };
            out.push(ConstantCheck {
                group: g.key.clone(),
                name: name.to_string(),
                direction: dir,
                frozen: fv,
                value,
                ok,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub group: String,
    pub name: String,
    pub base: f64,
    pub doubled: f64,
    pub relative_change: f64,
    pub within: bool,
}

/// Reruns every group at twice the resolution and reports how far each
/// constant moved. Informational only. The `x_hat` constants are skipped
/// where all-cube seminorms at the doubled resolution are out of budget.
pub fn stability_report(suite: &SuiteConfig, base: &SuiteReport) -> Result<Vec<StabilityRow>> {
    let doubled: Vec<GroupReport> = suite
        .doubled()
        .groups
        .iter()
        .map(|g| {
            let x = g.x_family == CubeFamily::Dyadic || default_seminorm_family(g.n, g.dim) == CubeFamily::All;
            run_group(g, Parts { x, ..Parts::ALL })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (b, d) in base.groups.iter().zip(&doubled) {
        for ((name, _, bv), (_, _, dv)) in b.constants.entries().into_iter().zip(d.constants.entries()) {
            let (Some(bv), Some(dv)) = (bv, dv) else { continue };
            let rel = (dv - bv).abs() / bv.abs().max(f64::MIN_POSITIVE);
            rows.push(StabilityRow {
                group: b.key.clone(),
                name: name.to_string(),
                base: bv,
                doubled: dv,
                relative_change: rel,
                within: rel <= STABILITY_TOLERANCE,
            });
        }
    }
    Ok(rows)
}
