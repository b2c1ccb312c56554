use std::f64::consts::SQRT_2;

use bbm_fkpp::{gamma_star, ConstantsRegistry};
use serde_json::json;

use crate::ancestry::{angular_exceedance, is_decreasing, pairing_ratios, window_necessity_check};
use crate::gumbel::{gumbel_tail_fit, GumbelFit};
use crate::lalley::lalley_sellke_check;
use crate::laplace::laplace_compare;
use crate::report::{ReportBundle, TestReport, Verdict};
use crate::summary::common_shape;
use crate::{Protocol, Result, RunSummary, VerifyError};

pub const GAMMA_KEY: (&str, &str) = ("gamma", "step");
pub const C_PHI_NAME: &str = "c_phi";

/// Registry value for `C(φ)` or `γ`, or an error naming the missing entry.
pub fn registry_value(reg: &ConstantsRegistry, name: &str, phi: &str) -> Result<f64> {
    reg.lookup(name, phi)
        .map(|e| e.value)
        .ok_or_else(|| VerifyError::MissingInput(vec![format!("registry entry {name}/{phi}")]))
}

fn slope_report(name: &str, fit: &GumbelFit, p: &Protocol) -> TestReport {
    let target = -SQRT_2;
    let verdict = if fit.inconclusive { Verdict::Inconclusive } else { Verdict::from_bool(fit.within(target, p.slope_tolerance)) };
    let mut r = TestReport::new(
        name,
        fit.slope,
        format!("slope in −√2·(1 ± {})", p.slope_tolerance),
        verdict,
        fit.samples,
    )
    .with_details(fit);
    if let Some(ci) = fit.ci {
        r = r.with_ci(ci.lo, ci.hi);
    }
    r
}

/// Tail slope of `R*_t − m_t` over replicas.
pub fn max_tail_report(s: &[RunSummary], p: &Protocol) -> Result<TestReport> {
    let h: Vec<f64> = s.iter().map(|r| r.max_height()).collect();
    let fit = gumbel_tail_fit(&h, &p.tail_window, p.level, p.bootstrap_resamples, p.bootstrap_seed)?;
    Ok(slope_report("max-tail-slope", &fit, p))
}

/// Intensity slope of pooled clan-leader heights.
pub fn leader_tail_report(s: &[RunSummary], p: &Protocol) -> Result<TestReport> {
    let h: Vec<f64> = s.iter().flat_map(|r| r.leaders.iter().copied()).collect();
    let fit = gumbel_tail_fit(&h, &p.tail_window, p.level, p.bootstrap_resamples, p.bootstrap_seed)?;
    Ok(slope_report("leader-intensity-slope", &fit, p))
}

pub fn lalley_report(s: &[RunSummary], p: &Protocol, gamma: f64) -> Result<TestReport> {
    let (d, _) = common_shape(s)?;
    let pairs: Vec<(f64, f64)> = s
        .iter()
        .map(|r| Ok((r.obs(p.lalley_l).ok_or(VerifyError::MissingObservation(p.lalley_l))?.z, r.max_height())))
        .collect::<Result<_>>()?;
    let gs = gamma_star(gamma, d);
    let res = lalley_sellke_check(&pairs, gs, p.lalley_bins, &p.lalley_probes)?;
    Ok(TestReport::new(
        "lalley-sellke",
        res.max_discrepancy,
        format!("max CDF discrepancy per bin ≤ {}", p.lalley_ceiling),
        Verdict::from_bool(res.max_discrepancy <= p.lalley_ceiling),
        pairs.len(),
    )
    .with_details(&res))
}

pub fn laplace_reports(s: &[RunSummary], p: &Protocol, reg: &ConstantsRegistry) -> Result<Vec<TestReport>> {
    p.laplace_phis
        .iter()
        .enumerate()
        .map(|(i, phi)| {
            let c = registry_value(reg, C_PHI_NAME, &phi.key())?;
            let cmp = laplace_compare(phi, c, s, p.laplace_l, p.level, p.bootstrap_resamples, p.bootstrap_seed + i as u64)?;
            Ok(TestReport::new(
                &format!("laplace {}", phi.key()),
                cmp.lhs.estimate - cmp.rhs.estimate,
                format!("{}% bootstrap CIs of LHS and RHS overlap", p.level * 100.0),
                Verdict::from_bool(cmp.overlap),
                cmp.replicas,
            )
            .with_details(&cmp))
        })
        .collect()
}

pub fn window_report(s: &[RunSummary], p: &Protocol) -> Result<TestReport> {
    let v = window_necessity_check(s, p.window_y, &p.window_ls, p.level)?;
    let last = v.last().map_or(f64::NAN, |w| w.fraction);
    Ok(TestReport::new("window-necessity", last, "fraction decreasing in L".into(), Verdict::from_bool(is_decreasing(&v)), s.len())
        .with_details(&v))
}

pub fn angular_report(s: &[RunSummary], p: &Protocol) -> Result<TestReport> {
    let v = p.angular_ls.iter().map(|&l| angular_exceedance(s, p.angular_y, l, p.level)).collect::<Result<Vec<_>>>()?;
    let last = v.last().ok_or_else(|| VerifyError::Invalid("no angular L values".into()))?;
    let decreasing = v.windows(2).all(|w| w[1].fraction <= w[0].fraction);
    let ok = last.qualifying > 0 && last.fraction <= p.angular_ceiling && decreasing;
    Ok(TestReport::new(
        "angular-stability",
        last.fraction,
        format!("≤ {} at the largest L and non-increasing", p.angular_ceiling),
        Verdict::from_bool(ok),
        last.qualifying,
    )
    .with_ci(last.ci.lo, last.ci.hi)
    .with_details(&v))
}

pub fn pairing_report(s: &[RunSummary], p: &Protocol) -> Result<TestReport> {
    let v = p.pairing_ls.iter().map(|&l| pairing_ratios(s, l)).collect::<Result<Vec<_>>>()?;
    let (first, last) = (v.first().unwrap(), v.last().unwrap());
    let (lo, hi) = p.pairing_band;
    let band = |m: f64| lo <= m && m <= hi;
    let ok = band(last.median_one)
        && band(last.median_f)
        && (v.len() < 2 || (last.iqr_one < first.iqr_one && last.iqr_f < first.iqr_f));
    Ok(TestReport::new(
        "window-pairing",
        last.median_one,
        format!("median ratio in [{lo}, {hi}] at the last L, IQR shrinking"),
        Verdict::from_bool(ok),
        last.used,
    )
    .with_details(&json!({ "stats": v })))
}

/// Turns a too-small dataset into an inconclusive report; other errors pass through.
fn sparse_ok(name: &str, r: Result<TestReport>) -> Result<TestReport> {
    match r {
        Err(e @ VerifyError::TooFewSamples { .. }) => Ok(TestReport::new(
            name,
            f64::NAN,
            "enough samples".into(),
            Verdict::Inconclusive,
            0,
        )
        .with_details(&json!({ "error": e.to_string() }))),
        r => r,
    }
}

/// Every summary-based test in the protocol.
pub fn statistical_suite(s: &[RunSummary], p: &Protocol, reg: &ConstantsRegistry) -> Result<ReportBundle> {
    common_shape(s)?;
    let gamma = registry_value(reg, GAMMA_KEY.0, GAMMA_KEY.1)?;
    for phi in &p.laplace_phis {
        registry_value(reg, C_PHI_NAME, &phi.key())?;
    }
    let mut reports = vec![
        sparse_ok("max-tail-slope", max_tail_report(s, p))?,
        sparse_ok("leader-intensity-slope", leader_tail_report(s, p))?,
        sparse_ok("lalley-sellke", lalley_report(s, p, gamma))?,
    ];
    match laplace_reports(s, p, reg) {
        Err(VerifyError::TooFewSamples { .. }) => {
            for phi in &p.laplace_phis {
                let name = format!("laplace {}", phi.key());
                reports.push(sparse_ok(&name, Err(VerifyError::TooFewSamples { need: 100, have: s.len() }))?);
            }
        }
        r => reports.extend(r?),
    }
    reports.push(sparse_ok("window-necessity", window_report(s, p))?);
    reports.push(sparse_ok("angular-stability", angular_report(s, p))?);
    reports.push(sparse_ok("window-pairing", pairing_report(s, p))?);
    Ok(ReportBundle { reports })
}
