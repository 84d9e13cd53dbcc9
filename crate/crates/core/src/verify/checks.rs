//! Pass/fail lines for a suite run against a frozen calibration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::suite::{Calibration, FrozenGroup, GroupConfig, GroupReport, Parts, SuiteConfig, SuiteReport, MARGIN};
use super::*;
use crate::operators::{local_maximal, max_relative_error, local_maximal_naive, nonlocal_bound_probe};

/// Largest tolerated `max_p / min_p` of the per-pair normalized ratio.
pub const SPREAD_LIMIT: f64 = 4.0;
/// Absolute slack on the `v >= 1` and `1/2` lower bounds.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Acceptance item, such as `5b`.
    pub criterion: String,
    /// Group key, or `fixed` for checks independent of the corpus.
    pub scope: String,
    pub description: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    fn new(criterion: &str, scope: &str, description: &str, ok: bool, detail: String) -> Self {
        Check {
            criterion: criterion.into(),
            scope: scope.into(),
            description: description.into(),
            ok,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} ({})",
            if self.ok { "PASS" } else { "FAIL" },
            self.criterion,
            self.scope,
            self.description,
            self.detail
        )
    }
}

fn upper(value: Option<f64>, frozen: Option<f64>) -> (bool, String) {
    match (value, frozen) {
        (Some(v), Some(f)) => (v <= f + MARGIN * f.abs(), format!("{v:.6} vs frozen {f:.6}")),
        _ => (false, "constant missing".into()),
    }
}

fn lower(value: Option<f64>, frozen: Option<f64>) -> (bool, String) {
    match (value, frozen) {
        (Some(v), Some(f)) => (v >= f - MARGIN * f.abs(), format!("{v:.6} vs frozen {f:.6}")),
        _ => (false, "constant missing".into()),
    }
}

/// Checks for one group. Parts that were not run produce no lines.
pub fn group_checks(cfg: &GroupConfig, g: &GroupReport, frozen: &FrozenGroup) -> Vec<Check> {
    let key = g.key.as_str();
    let k = &g.constants;
    let fz = &frozen.constants;
    let mut out = Vec::new();
    let pairs = cfg.functions.len() * cfg.weights.len();

    if !g.thm1.is_empty() {
        out.push(Check::new(
            "5a",
            key,
            "lhs nondecreasing in p",
            g.p_monotonicity_violations == 0,
            format!("{} violations over {} records", g.p_monotonicity_violations, g.thm1.len()),
        ));
        let (ok, d) = upper(k.c_star, fz.c_star);
        out.push(Check::new("5b", key, "normalized ratio within frozen C*", ok, d));
        let worst = g.spreads.iter().fold(None::<&super::suite::PairSpread>, |b, s| match b {
            Some(b) if b.spread >= s.spread => Some(b),
            _ => Some(s),
        });
        let failing = g.spreads.iter().filter(|s| s.spread > SPREAD_LIMIT).count();
        let growth = g.spreads.iter().map(|s| s.growth).fold(0.0, f64::max);
        out.push(Check::new(
            "5c",
            key,
            "max_p / min_p of normalized ratio at most 4 per pair",
            failing == 0,
            match worst {
                Some(w) => format!(
                    "{failing} of {} pairs above 4; worst {:.4} for {} / {}; largest growth over p = 1 is {growth:.4}",
                    g.spreads.len(),
                    w.spread,
                    w.f_ref,
                    w.w_ref
                ),
                None => "no pairs".into(),
            },
        ));
        out.push(Check::new(
            "5",
            key,
            "corpus size",
            pairs >= 20,
            format!("{pairs} pairs"),
        ));
    }

    if !g.tails.is_empty() {
        let bad = g.tails.iter().filter(|t| !t.monotone).count();
        out.push(Check::new(
            "6",
            key,
            "tail mass nonincreasing in t",
            bad == 0,
            format!("{bad} of {} profiles not monotone", g.tails.len()),
        ));
        let kappa = fz.kappa.unwrap_or(f64::INFINITY);
        let floor = kappa - MARGIN * kappa.abs();
        let fitted: Vec<_> = g.tails.iter().filter_map(|t| t.fitted_rate.map(|r| (r, t.a_infty))).collect();
        let bad = fitted.iter().filter(|(r, a)| !(*r < 0.0 && -r * a >= floor)).count();
        out.push(Check::new(
            "6",
            key,
            "fitted decay rate negative with |rate| >= kappa / [w]",
            bad == 0 && !fitted.is_empty(),
            format!(
                "{bad} of {} fitted profiles fail; {} profiles without a resolved fit; kappa frozen {kappa:.6}",
                fitted.len(),
                g.tails.len() - fitted.len()
            ),
        ));
    }
    if !g.good_lambda.is_empty() {
        let bad = g.good_lambda.iter().filter(|c| !c.ok).count();
        let expected = pairs * cfg.good_lambda_trials;
        out.push(Check::new(
            "6",
            key,
            "good-lambda set inclusion",
            bad == 0 && g.good_lambda.len() == expected,
            format!("{} checks ({} per pair), {bad} failed", g.good_lambda.len(), cfg.good_lambda_trials),
        ));
    }

    if !g.cp.is_empty() {
        let (ok, d) = upper(k.c_star_cp, fz.c_star_cp);
        out.push(Check::new("7", key, "local dyadic ratio within frozen C*_cp", ok, d));
    }

    if !g.probes.is_empty() {
        let (ok, d) = upper(k.nonlocal_c, fz.nonlocal_c);
        out.push(Check::new(
            "8",
            key,
            "nonlocal part within frozen constant",
            ok && g.probes.len() == cfg.probe_trials,
            format!("{} probes; {d}", g.probes.len()),
        ));
    }

    if !g.holder.is_empty() {
        let bad = g.holder.iter().filter(|h| !h.check.ok).count();
        out.push(Check::new(
            "9",
            key,
            "reverse Holder inequality",
            bad == 0,
            format!("{bad} of {} (w, Q, E) fail", g.holder.len()),
        ));
    }
    if !g.machinery.is_empty() {
        let (lo_ok, lo) = lower(k.llogl_lo, fz.llogl_lo);
        let (hi_ok, hi) = upper(k.llogl_hi, fz.llogl_hi);
        out.push(Check::new(
            "9",
            key,
            "L log L ratio within frozen bounds",
            lo_ok && hi_ok,
            format!("low {lo}; high {hi}"),
        ));
        let (ok, d) = upper(k.a1_cr, fz.a1_cr);
        out.push(Check::new("9", key, "A1 constant of Coifman-Rochberg weights", ok, d));
        let min_v = g.machinery.iter().map(|r| r.min_v_on_q).fold(f64::INFINITY, f64::min);
        out.push(Check::new(
            "9",
            key,
            "Coifman-Rochberg weight at least 1 on Q",
            min_v >= 1.0 - BOUND_SLACK,
            format!("min {min_v:.16e}"),
        ));
    }

    if !g.x.is_empty() {
        let (lo_ok, lo) = lower(k.x_lower, fz.x_lower);
        let (hi_ok, hi) = upper(k.x_upper, fz.x_upper);
        out.push(Check::new(
            "10",
            key,
            "c [w] <= x_hat <= C [w] with frozen c, C",
            lo_ok && hi_ok,
            format!("c: {lo}; C: {hi}"),
        ));
        let units: Vec<f64> = g.x.iter().filter(|x| x.unit_weight).map(|x| x.estimate.x_hat).collect();
        out.push(Check::new(
            "10",
            key,
            "x_hat >= 1/2 for the unit weight",
            !units.is_empty() && units.iter().all(|v| *v >= 0.5 - BOUND_SLACK),
            format!("{units:?}"),
        ));
    }

    if !g.char_bounds.is_empty() {
        let min = g.char_bounds.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
        out.push(Check::new(
            "3",
            key,
            "favorable half carries at least half the weight",
            min >= 0.5 - BOUND_SLACK,
            format!("min {min:.16e} over {} weights", g.char_bounds.len()),
        ));
    }
    out
}

fn random_grid(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> GridFunction {
    let len = n.pow(dim as u32);
    GridFunction::new(dim, n, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("valid shape")
}

/// Corpus-independent checks attached to the selected parts.
pub fn fixed_checks(parts: Parts, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if parts.cp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let mut count = 0;
        for dim in [1, 2] {
            for _ in 0..10 {
                let f = random_grid(&mut rng, dim, 8);
                for side in [1, 2, 4, 8] {
                    for q in crate::grid::enumerate_cubes(8, dim, crate::grid::CubeSelection::Dyadic)
                        .filter(|q| q.side() == side)
                    {
                        let a = local_maximal(&f, &q)?;
                        let b = local_maximal_naive(&f, &q)?;
                        worst = worst.max(max_relative_error(a.values(), b.values()));
                        count += 1;
                    }
                }
            }
        }
        out.push(Check::new(
            "7",
            "fixed",
            "local dyadic maximal matches naive enumeration at N = 8",
            worst <= 1e-9,
            format!("{count} cubes, worst relative error {worst:.3e}"),
        ));
    }
    if parts.probe {
        let f = GridFunction::constant(1, 16, 2.0)?;
        let q = GridCube::new_1d(4, 4);
        let r = nonlocal_bound_probe(&f, &q, BoundaryMode::Restricted);
        out.push(Check::new(
            "8",
            "fixed",
            "constant input rejected as degenerate",
            matches!(r, Err(Error::DegenerateInput(_))),
            match r {
                Err(e) => e.to_string(),
                Ok(_) => "accepted".into(),
            },
        ));
    }
    if parts.machinery {
        let mut worst = 0.0f64;
        let mut all = true;
        for k in 0..64 {
            let p = 1.0 + 63.0 * k as f64 / 63.0;
            let g = gamma_growth_check(p)?;
            worst = worst.max(g.value);
            all &= g.ok;
        }
        out.push(Check::new(
            "9",
            "fixed",
            "Gamma(p+1)^(1/p) / p <= 1.2 on [1, 64]",
            all,
            format!("64 samples, largest {worst:.6}"),
        ));
    }
    Ok(out)
}

/// All lines for a suite run. Errors with a stale-calibration error when the
/// calibration was frozen from a different corpus.
pub fn suite_checks(suite: &SuiteConfig, report: &SuiteReport, cal: &Calibration, parts: Parts) -> Result<Vec<Check>> {
    cal.check_hash(suite)?;
    let mut out = Vec::new();
    for (cfg, g) in suite.groups.iter().zip(&report.groups) {
        let frozen = cal.groups.get(&g.key).ok_or_else(|| Error::StaleCalibration {
            expected: cal.corpus_hash.clone(),
            found: format!("{} (group {} missing)", suite.hash(), g.key),
        })?;
        out.extend(group_checks(cfg, g, frozen));
    }
    let seed = suite.groups.first().map_or(0, |g| g.seed);
    out.extend(fixed_checks(parts, seed)?);
    Ok(out)
}

