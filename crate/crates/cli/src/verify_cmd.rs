use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bbm_fkpp::{ConstantsRegistry, DEFAULT_DT, DEFAULT_DX};
use bbm_martingale::{kernel_ratio_table, DirectionGrid, KernelBand, Prefactor};
use bbm_verify::{
    common_shape, read_summaries, statistical_suite, LalleySellke, PairingStats, Protocol, ReportBundle, RunSummary,
    PROTOCOL_FILE,
};

use crate::config::VerifyKeys;
use crate::fkpp_cmd::{front_trace, write_front_trace, DEFAULT_REGISTRY};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::simulate_cmd::SUMMARIES_FILE;
use crate::svg::{line_chart, Series};
use crate::VerifyArgs;

pub const REPORTS_FILE: &str = "reports.json";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Every input `verify` needs that is absent.
pub fn missing_inputs(run: &Path, registry: &Path) -> Vec<String> {
    let mut v = Vec::new();
    for f in [MANIFEST_FILE, SUMMARIES_FILE] {
        if !run.join(f).is_file() {
            v.push(run.join(f).display().to_string());
        }
    }
    if !registry.is_file() {
        v.push(format!("{} (constants registry; create it with `bbmlab fkpp`)", registry.display()));
    }
    v
}

fn resolve_protocol(run: &Path, manifest: &mut RunManifest, given: Option<PathBuf>, allow_change: bool) -> Result<Protocol> {
    if Protocol::load(run)?.is_some() {
        manifest.require(&[PROTOCOL_FILE])?;
    }
    let p = match given {
        Some(path) => serde_json::from_str(&fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => Protocol::load(run)?.unwrap_or_default(),
    };
    let before = Protocol::load(run)?;
    p.register(run, allow_change)?;
    if before.as_ref() != Some(&p) {
        manifest.upsert_file(run, PROTOCOL_FILE)?;
        manifest.save(run)?;
    }
    Ok(p)
}

fn survival(sorted_desc: &[f64], y: f64) -> f64 {
    sorted_desc.partition_point(|&h| h > y) as f64
}

fn write_survival(out: &Path, s: &[RunSummary]) -> Result<()> {
    let mut maxima: Vec<f64> = s.iter().map(|r| r.max_height()).collect();
    maxima.sort_by(|a, b| b.total_cmp(a));
    let mut leaders: Vec<f64> = s.iter().flat_map(|r| r.leaders.iter().copied()).collect();
    leaders.sort_by(|a, b| b.total_cmp(a));
    let n = s.len() as f64;
    let mut csv = String::from("#schema=survival/1\ny,max_survival,leader_intensity,gumbel_survival\n");
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..=60 {
        let y = -2.0 + 0.1 * i as f64;
        let sm = survival(&maxima, y) / n;
        let sl = survival(&leaders, y) / n;
        let g = 1.0 - (-(-SQRT_2 * y).exp()).exp();
        let _ = writeln!(csv, "{y:.2},{sm},{sl},{g}");
        for (v, series) in [(sm, &mut a), (sl, &mut b)] {
            if v > 0.0 {
                series.push((y, v.ln()));
            }
        }
        c.push((y, g.ln()));
    }
    fs::write(out.join("survival.csv"), csv)?;
    let svg = line_chart(
        "Upper tails of R*_t − m_t and clan leaders",
        "y",
        "log survival / log intensity",
        &[
            Series { name: "maximum", points: a },
            Series { name: "leaders per replica", points: b },
            Series { name: "Gumbel(0, 1/√2)", points: c },
        ],
    );
    fs::write(out.join("survival.svg"), svg)?;
    Ok(())
}

fn write_details(out: &Path, bundle: &ReportBundle) -> Result<()> {
    for r in &bundle.reports {
        match r.name.as_str() {
            "window-pairing" => {
                let stats: Vec<PairingStats> = serde_json::from_value(r.details["stats"].clone())?;
                let mut csv = String::from("#schema=pairing/1\nl,median_one,iqr_one,median_f,iqr_f,used,skipped\n");
                for p in stats {
                    let _ = writeln!(csv, "{},{},{},{},{},{},{}", p.l, p.median_one, p.iqr_one, p.median_f, p.iqr_f, p.used, p.skipped);
                }
                fs::write(out.join("pairing.csv"), csv)?;
            }
            "lalley-sellke" => {
                let ls: LalleySellke = serde_json::from_value(r.details.clone())?;
                let mut csv = String::from("#schema=lalley/1\nz_lo,z_hi,z_mean,n,probe,predicted,empirical\n");
                for b in &ls.bins {
                    for (k, y) in ls.probes.iter().enumerate() {
                        let _ = writeln!(
                            csv,
                            "{},{},{},{},{},{},{}",
                            b.z_lo, b.z_hi, b.z_mean, b.n, y, b.predicted[k], b.empirical[k]
                        );
                    }
                }
                fs::write(out.join("lalley.csv"), csv)?;
            }
            _ => {}
        }
    }
    Ok(())
}

fn write_kernel_table(out: &Path, d: usize) -> Result<()> {
    let grid = match d {
        2 => DirectionGrid::circle(2048)?,
        3 => DirectionGrid::gauss_product(200),
        _ => return Ok(()),
    };
    let mut psi = vec![0.0; d];
    psi[0] = 1.0;
    let band = KernelBand::default();
    let mut csv = String::from("#schema=kernel-ratio/1\nl,x,ratio\n");
    let mut series = Vec::new();
    for l in [50.0, 100.0, 200.0] {
        let rows = kernel_ratio_table(l, &grid, &[psi.clone()], &band, 40, |_| 1.0, Prefactor::LaplaceMethod)?;
        for (x, r) in &rows {
            let _ = writeln!(csv, "{l},{x},{r}");
        }
        let sl = SQRT_2 * l;
        series.push((format!("L = {l}"), rows.iter().map(|(x, r)| (sl - x, *r)).collect::<Vec<_>>()));
    }
    fs::write(out.join("kernel_ratio.csv"), csv)?;
    let svg_series: Vec<Series> = series.iter().map(|(n, p)| Series { name: n, points: p.clone() }).collect();
    fs::write(
        out.join("kernel_ratio.svg"),
        line_chart("Kernel quadrature / Laplace asymptotic", "√2L − x", "ratio", &svg_series),
    )?;
    Ok(())
}

pub fn run(a: VerifyArgs, k: VerifyKeys) -> Result<u8> {
    let run = a.run.or(k.run).context("--run is required")?;
    let registry = a.registry.or(k.registry).unwrap_or_else(|| DEFAULT_REGISTRY.into());
    let missing = missing_inputs(&run, &registry);
    if !missing.is_empty() {
        bail!("missing inputs:\n  {}", missing.join("\n  "));
    }
    let mut manifest = RunManifest::load(&run)?;
    manifest.require(&[SUMMARIES_FILE])?;
    manifest.check_files(&run)?;
    manifest.check_csv_schemas(&run)?;
    let protocol = resolve_protocol(&run, &mut manifest, a.protocol.or(k.protocol), a.override_protocol)?;

    let file = fs::File::open(run.join(SUMMARIES_FILE))?;
    let summaries = read_summaries(BufReader::new(file))?;
    let (d, _) = common_shape(&summaries)?;
    let reg = ConstantsRegistry::load(&registry).with_context(|| format!("reading {}", registry.display()))?;
    let bundle = statistical_suite(&summaries, &protocol, &reg)?;

    let out = a.out.or(k.out).unwrap_or_else(|| run.join("verify"));
    fs::create_dir_all(&out)?;
    fs::write(out.join(REPORTS_FILE), serde_json::to_string_pretty(&bundle)? + "\n")?;
    let table = bundle.summary_table();
    fs::write(out.join(SUMMARY_FILE), &table)?;
    write_survival(&out, &summaries)?;
    write_details(&out, &bundle)?;
    write_kernel_table(&out, d)?;
    write_front_trace(&out, &front_trace(50, DEFAULT_DX, DEFAULT_DT)?)?;

    print!("{table}");
    for r in &bundle.reports {
        println!("{}", r.line());
    }
    Ok(if bundle.any_failed() { 1 } else { 0 })
}
