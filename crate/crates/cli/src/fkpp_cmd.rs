use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bbm_fkpp::{
    c_phi, evolve_checkpoints, extrapolate_inverse_sqrt, front_position, gamma_constant, step_profile,
    ConstantsRegistry, ConvergenceReport, Domain, RegistryEntry, SolverOptions, TailWeight, DEFAULT_DT, DEFAULT_DX,
};
use bbm_verify::{Phi, C_PHI_NAME, GAMMA_KEY};

use crate::config::FkppKeys;
use crate::svg::{line_chart, Series};
use crate::FkppArgs;

pub const DEFAULT_REGISTRY: &str = "registry.json";
pub const DEFAULT_ELL_MAX: f64 = 80.0;

fn parse_weight(s: &str) -> Result<TailWeight> {
    match s {
        "sqrt2" => Ok(TailWeight::Sqrt2),
        "sqrtw" => Ok(TailWeight::SqrtW),
        _ => bail!("--weight must be sqrt2 or sqrtw, got {s:?}"),
    }
}

fn write_convergence(dir: &Path, stem: &str, r: &ConvergenceReport) -> Result<()> {
    let mut buf = b"#schema=convergence/1\n".to_vec();
    r.write_csv(&mut buf)?;
    fs::write(dir.join(format!("{stem}.csv")), buf)?;
    let pts = r.ells.iter().copied().zip(r.values.iter().copied()).collect();
    fs::write(
        dir.join(format!("{stem}.svg")),
        line_chart(&format!("{stem}: tail integral against ℓ"), "ℓ", "value", &[Series { name: stem, points: pts }]),
    )?;
    Ok(())
}

/// Front position of the step solution and `m_t^(1)` for `t = 1..=t_max`.
pub fn front_trace(t_max: usize, dx: f64, dt: f64) -> Result<Vec<(f64, f64, f64)>> {
    let ts: Vec<f64> = (1..=t_max).map(|t| t as f64).collect();
    let sols = evolve_checkpoints(step_profile, &ts, &Domain { y_min: -60.0, y_max: 40.0 }, &SolverOptions::with_grid(dx, dt))?;
    sols.iter()
        .map(|s| Ok((s.time, front_position(s, 0.5)?, bbm_extremal::centring(1, s.time)?)))
        .collect()
}

pub fn write_front_trace(dir: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut csv = String::from("#schema=front/1\nt,front,m_t\n");
    for (t, f, m) in rows {
        csv.push_str(&format!("{t},{f},{m}\n"));
    }
    fs::write(dir.join("front_trace.csv"), csv)?;
    let svg = line_chart(
        "F-KPP front (u = 1/2) and centring",
        "t",
        "position",
        &[
            Series { name: "front", points: rows.iter().map(|r| (r.0, r.1)).collect() },
            Series { name: "m_t", points: rows.iter().map(|r| (r.0, r.2)).collect() },
        ],
    );
    fs::write(dir.join("front_trace.svg"), svg)?;
    Ok(())
}

pub fn run(a: FkppArgs, k: FkppKeys) -> Result<u8> {
    let gamma = a.gamma || k.gamma.unwrap_or(false);
    let cphis: Vec<String> = if a.cphi.is_empty() { k.cphi.unwrap_or_default() } else { a.cphi };
    if !gamma && cphis.is_empty() {
        bail!("nothing to do: pass --gamma and/or --cphi <spec>");
    }
    let ell_max = a.ell_max.or(k.ell_max).unwrap_or(DEFAULT_ELL_MAX);
    let dx = a.dx.or(k.dx).unwrap_or(DEFAULT_DX);
    let dt = a.dt.or(k.dt).unwrap_or(DEFAULT_DT);
    if !(dx > 0.0 && dt > 0.0 && ell_max > 0.0) {
        bail!("--dx, --dt and --ell-max must be positive");
    }
    let weight = parse_weight(a.weight.or(k.weight).as_deref().unwrap_or("sqrt2"))?;
    let registry_path: PathBuf = a.registry.or(k.registry).unwrap_or_else(|| DEFAULT_REGISTRY.into());
    let out = a.out.or(k.out);
    if let Some(o) = &out {
        fs::create_dir_all(o)?;
    }
    let phis = cphis
        .iter()
        .map(|s| Phi::from_key(s).with_context(|| format!("bad --cphi spec {s:?}; expected ramp:a=<a>,x0=<x0>,w=<w>")))
        .collect::<Result<Vec<_>>>()?;

    let mut reg = ConstantsRegistry::load(&registry_path)?;
    let mut all_converged = true;
    let mut record = |name: &str, phi: &str, r: &ConvergenceReport| -> Result<()> {
        let extrapolated = extrapolate_inverse_sqrt(&r.ells, &r.values).ok();
        println!(
            "{name} {phi}: {:.6} at ℓ = {ell_max} (converged: {}, last change {:.3}%, ℓ^(-1/2) extrapolation {})",
            r.value,
            r.converged,
            100.0 * r.rel_changes.last().copied().unwrap_or(f64::NAN),
            extrapolated.map_or("n/a".into(), |v| format!("{v:.6}"))
        );
        all_converged &= r.converged;
        reg.upsert(RegistryEntry::from_report(name, phi, None, dx, dt, weight, r));
        if let Some(o) = &out {
            let stem = format!("{name}_{}", phi.replace([':', ',', '='], "_"));
            write_convergence(o, &stem, r)?;
        }
        Ok(())
    };
    if gamma {
        if weight != TailWeight::Sqrt2 {
            bail!("γ is only defined with the sqrt2 weight");
        }
        let r = gamma_constant(ell_max, dx, dt)?;
        record(GAMMA_KEY.0, GAMMA_KEY.1, &r)?;
    }
    for phi in &phis {
        let p = *phi;
        let r = c_phi(move |x| p.eval(x), ell_max, dx, dt, weight)?;
        record(C_PHI_NAME, &phi.key(), &r)?;
    }
    reg.save(&registry_path)?;
    if let (true, Some(o)) = (gamma, &out) {
        write_front_trace(o, &front_trace(50, dx, dt)?)?;
    }
    if !all_converged {
        eprintln!("warning: the ℓ-doubling convergence criterion was not met; entries are recorded with converged = false");
        return Ok(2);
    }
    Ok(0)
}
