//! The six pipelines. Each returns its artifacts in memory; nothing touches
//! the file system here.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::Serialize;

use tmlambda::analysis::echo::{even_drives, solve_r_from_echo, synthetic_echo_dataset, EchoSolution};
use tmlambda::analysis::{extract_r_from_densities, extract_rho, fit_exponential, fit_nutation, FitResult, Measured};
use tmlambda::coherent::{
    composite_densities, nutation_trace, CompositeDensities, EchoModel, NutationParams, TwoPulseEcho,
};
use tmlambda::geometry::excited_sites;
use tmlambda::popdyn::{
    enumerate_classes, hole_decay, merge_features, spectrum_features, steady_state_fraction, LineShape, PumpParams,
    SpectrumFeature,
};
use tmlambda::trace::{Trace, UniformGrid};
use tmlambda::zeeman::{sweep_r, LambdaParams, SweepPoint};

use crate::noise::{self, Stream};
use crate::output::{num, opt_num, Artifacts, FitOutcome, RunReport};
use crate::scenario::Loaded;

/// Site groups that share splittings under a bisector-plane field.
pub const SITE_GROUPS: [(&str, &[u8]); 3] = [("3,5", &[3, 5]), ("4,6", &[4, 6]), ("1", &[1])];

/// Relative tolerance for calling two sites' sweep values identical.
const PAIR_TOL: f64 = 1e-9;

fn same(a: Option<LambdaParams>, b: Option<LambdaParams>) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= PAIR_TOL * x.abs().max(y.abs()).max(1.0);
    match (a, b) {
        (None, None) => true,
        (Some(p), Some(q)) => close(p.delta_g, q.delta_g) && close(p.delta_e, q.delta_e) && close(p.r, q.r),
        _ => false,
    }
}

#[derive(Debug, Serialize)]
struct GroupSummary {
    group: &'static str,
    /// Θ (degrees) and R at the largest R on the grid.
    r_max: Option<(f64, f64)>,
    /// Grid points where a splitting vanishes.
    gaps: usize,
    /// Θ values where the members of the group disagree.
    mismatches: Vec<f64>,
}

/// R(Θ) with Δg and Δe for each site group. Columns: Θ, group, Δg, Δe, R;
/// blank fields where a splitting vanishes.
pub fn run_sweep(l: &Loaded) -> Result<Artifacts> {
    let g = &l.scenario.grids;
    let grid = UniformGrid::new(g.theta_start_deg, g.theta_stop_deg, g.theta_points)?;
    let thetas: Vec<f64> = grid.points().collect();
    let b = l.scenario.field.magnitude_t;

    let mut per_group: Vec<Vec<SweepPoint>> = Vec::new();
    let mut summaries = Vec::new();
    for (name, ids) in SITE_GROUPS {
        let sweeps = ids
            .iter()
            .map(|&id| {
                sweep_r(&l.scenario.tensors, l.frames.site(id)?, &thetas, b).with_context(|| format!("site {id}"))
            })
            .collect::<Result<Vec<_>>>()?;
        let first = sweeps[0].clone();
        let mismatches = (0..first.len())
            .filter(|&i| sweeps[1..].iter().any(|s| !same(first[i].params, s[i].params)))
            .map(|i| first[i].theta)
            .collect();
        let r_max = first
            .iter()
            .filter_map(|p| p.params.map(|q| (p.theta, q.r)))
            .max_by(|x, y| x.1.total_cmp(&y.1));
        let gaps = first.iter().filter(|p| p.params.is_none()).count();
        summaries.push(GroupSummary {
            group: name,
            r_max,
            gaps,
            mismatches,
        });
        per_group.push(first);
    }

    let mut rows = Vec::with_capacity(thetas.len() * SITE_GROUPS.len());
    for (i, &theta) in thetas.iter().enumerate() {
        for (k, (name, _)) in SITE_GROUPS.iter().enumerate() {
            let p = per_group[k][i].params;
            rows.push(vec![
                num(theta),
                name.to_string(),
                opt_num(p.map(|q| q.delta_g)),
                opt_num(p.map(|q| q.delta_e)),
                opt_num(p.map(|q| q.r)),
            ]);
        }
    }

    let mut out = Artifacts::default();
    out.csv(
        "sweep.csv",
        &["theta_deg", "site_group", "delta_g_MHz", "delta_e_MHz", "R"],
        &rows,
    )?;
    #[derive(Serialize)]
    struct Results {
        sites: BTreeMap<String, Option<LambdaParams>>,
        groups: Vec<GroupSummary>,
        rows: usize,
    }
    let results = Results {
        sites: l.all_site_params()?,
        groups: summaries,
        rows: rows.len(),
    };
    out.json("sweep.json", &RunReport::new("sweep", l, results))?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SiteContribution {
    site: u8,
    /// Share of the absorption at ν₀ (squared coupling, normalized).
    weight: f64,
    params: Option<LambdaParams>,
}

/// Hole-burning spectrum after burning at ν₀ without repumping. Features
/// farther than half the probe window from ν₀ are reported but not drawn.
pub fn run_spectrum(l: &Loaded) -> Result<Artifacts> {
    let sc = &l.scenario;
    let excited = excited_sites(&l.frames, &l.polarization()?);
    ensure!(!excited.is_empty(), "polarization excites no site");
    let total: f64 = excited.iter().map(|c| c.coupling * c.coupling).sum();
    let rho = steady_state_fraction(&PumpParams { r: 0.0, ..sc.pump })?;

    let mut contributions = Vec::new();
    let mut features: Vec<SpectrumFeature> = Vec::new();
    let mut warnings = Vec::new();
    for c in &excited {
        let weight = c.coupling * c.coupling / total;
        let params = match l.site_params(c.site_id) {
            Ok(p) => Some(p),
            Err(e) if matches!(e.downcast_ref(), Some(tmlambda::Error::DegenerateField)) => {
                warnings.push(format!("site {}: zero splitting, no Λ structure", c.site_id));
                None
            }
            Err(e) => return Err(e),
        };
        if let Some(p) = params {
            let classes = enumerate_classes(p.delta_g, p.delta_e, p.mu_s, p.mu_w)
                .with_context(|| format!("site {}", c.site_id))?;
            features.extend(
                spectrum_features(&classes, &[rho; 4])?
                    .into_iter()
                    .map(|f| f.scaled(weight).with_site(c.site_id)),
            );
        }
        contributions.push(SiteContribution {
            site: c.site_id,
            weight,
            params,
        });
    }

    let half = sc.spectrum.window_mhz / 2.0;
    let (inside, outside): (Vec<_>, Vec<_>) = merge_features(features)
        .into_iter()
        .partition(|f| f.offset.abs() <= half);
    let grid = UniformGrid::new(-half, half, sc.grids.spectrum_points)?;
    let shape = LineShape {
        hole_width: sc.spectrum.hole_width_mhz,
        antihole_extra_width: sc.spectrum.antihole_extra_width_mhz,
        background_density: sc.spectrum.background_density,
    };
    let trace = synth_checked(&inside, &shape, &grid)?;
    warnings.extend(trace.warnings.iter().cloned());

    #[derive(Serialize)]
    struct Results {
        resonant_fraction: f64,
        sites: Vec<SiteContribution>,
        features: Vec<SpectrumFeature>,
        outside_window: Vec<SpectrumFeature>,
        warnings: Vec<String>,
    }
    let mut out = Artifacts::default();
    out.trace("spectrum.csv", &trace)?;
    let results = Results {
        resonant_fraction: rho,
        sites: contributions,
        features: inside,
        outside_window: outside,
        warnings,
    };
    out.json("features.json", &RunReport::new("spectrum", l, results))?;
    Ok(out)
}

fn synth_checked(features: &[SpectrumFeature], shape: &LineShape, grid: &UniformGrid) -> Result<Trace> {
    Ok(tmlambda::popdyn::synth_spectrum(features, shape, grid)?)
}

#[derive(Debug, Serialize)]
struct NutationCase {
    label: &'static str,
    omega_rad_per_us: f64,
    density: f64,
    fit: FitOutcome,
}

/// Four-case nutation family: (a) zero field, (b) repump at ν₀−Δg,
/// (c) repump at ν₀+Δg+Δe, (d) no repump. Each trace is fitted, and the
/// fits give ρ and R back.
pub fn run_nutation(l: &Loaded) -> Result<Artifacts> {
    let sc = &l.scenario;
    let r = l.injected_r()?;
    let d0 = sc.nutation.d0;
    let omega = sc.nutation.omega_rad_per_us;
    let rho = steady_state_fraction(&sc.pump)?;
    let rho_none = steady_state_fraction(&PumpParams { r: 0.0, ..sc.pump })?;
    let dens: CompositeDensities = composite_densities(d0, rho, r)?;
    let d_none = 2.0 / 3.0 * d0 * rho_none;

    let grid = UniformGrid::new(0.0, sc.grids.nutation_t_stop_us, sc.grids.nutation_points)?;
    // the strong leg keeps the zero-field Rabi frequency; the weak one is √R slower
    let cases: [(&str, &str, f64, f64); 4] = [
        ("a", "zero field", omega, d0),
        ("b", "repump at nu0 - delta_g", omega, dens.d_sw),
        ("c", "repump at nu0 + delta_g + delta_e", omega * r.sqrt(), dens.d_w),
        ("d", "no repump", omega, d_none),
    ];

    let mut out = Artifacts::default();
    let mut results_cases = BTreeMap::new();
    let mut fits: BTreeMap<&str, FitResult> = BTreeMap::new();
    for (k, (id, label, w, d)) in cases.iter().enumerate() {
        let mut trace =
            nutation_trace(&NutationParams { omega: *w, density: *d }, &grid).with_context(|| format!("case {id}"))?;
        noise::add_gaussian(
            &mut trace.values,
            sc.noise.trace_sigma,
            &mut noise::rng(sc.noise.seed, Stream::Nutation, k as u64),
        );
        out.trace(&format!("nutation_{id}.csv"), &trace)?;
        let fit = fit_nutation(&trace);
        if let Ok(f) = &fit {
            fits.insert(id, f.clone());
        }
        results_cases.insert(
            id.to_string(),
            NutationCase {
                label,
                omega_rad_per_us: *w,
                density: *d,
                fit: fit.into(),
            },
        );
    }

    let measured = |id: &str| -> Result<Measured> {
        let f = fits.get(id).ok_or_else(|| anyhow!("case {id} fit failed"))?;
        Ok(Measured::new(f.param("D"), f.sigma("D").unwrap_or(0.0)))
    };
    let rho_fit = extract_rho(measured("b")?, measured("a")?).context("extracting rho")?;
    let r_fit = extract_r_from_densities(measured("c")?, measured("b")?).context("extracting R")?;

    #[derive(Serialize)]
    struct Injected {
        #[serde(rename = "R")]
        r: f64,
        rho_repump: f64,
        rho_no_repump: f64,
        densities: CompositeDensities,
    }
    #[derive(Serialize)]
    struct Extraction {
        rho: Measured,
        #[serde(rename = "R")]
        r: Measured,
    }
    #[derive(Serialize)]
    struct Results {
        injected: Injected,
        cases: BTreeMap<String, NutationCase>,
        extraction: Extraction,
    }
    let results = Results {
        injected: Injected {
            r,
            rho_repump: rho,
            rho_no_repump: rho_none,
            densities: dens,
        },
        cases: results_cases,
        extraction: Extraction { rho: rho_fit, r: r_fit },
    };
    out.json("nutation.json", &RunReport::new("nutation", l, results))?;
    Ok(out)
}

/// Strong-leg echo samples over the configured drive range plus the weak
/// point at I₀, then the graphical solution for R.
pub fn run_echo(l: &Loaded) -> Result<Artifacts> {
    let sc = &l.scenario;
    let e = &sc.echo;
    let r = l.injected_r()?;
    let model = EchoModel::new(
        TwoPulseEcho {
            area_coeff: e.area_coeff,
        },
        1.0 / (1.0 + r),
    );
    let mut data = synthetic_echo_dataset(
        &model,
        e.i0,
        &even_drives(e.drive_min_rel, e.drive_max_rel, e.samples),
        r,
    );
    let mut rng = noise::rng(sc.noise.seed, Stream::Echo, 0);
    for s in data.strong.iter_mut() {
        s.echo = noise::apply_lognormal(s.echo, sc.noise.echo_log_sigma, &mut rng);
    }
    data.weak_echo = noise::apply_lognormal(data.weak_echo, sc.noise.echo_log_sigma, &mut rng);
    data.rel_sigma = sc.noise.echo_log_sigma;

    let mut rows: Vec<Vec<String>> = data
        .strong
        .iter()
        .map(|s| vec!["strong".into(), num(s.drive / data.i0), num(s.echo)])
        .collect();
    rows.push(vec!["weak".into(), num(1.0), num(data.weak_echo)]);
    let solution = solve_r_from_echo(&data, e.interpolation).context("solving for R")?;

    #[derive(Serialize)]
    struct Results {
        #[serde(rename = "injected_R")]
        injected_r: f64,
        solution: EchoSolution,
    }
    let mut out = Artifacts::default();
    out.csv("echo.csv", &["branch", "intensity_rel_drive", "echo_intensity"], &rows)?;
    out.json(
        "echo.json",
        &RunReport::new(
            "echo",
            l,
            Results {
                injected_r: r,
                solution,
            },
        ),
    )?;
    Ok(out)
}

#[derive(Debug, Serialize)]
struct DecayGroup {
    sites: Vec<u8>,
    t1_s: f64,
    fit: FitOutcome,
}

/// Hole depth vs delay for the excited sites: the observed site's group
/// decays with `t1_observed_s`, the others with `t1_other_s`.
pub fn run_lifetime(l: &Loaded) -> Result<Artifacts> {
    let sc = &l.scenario;
    let lt = &sc.lifetime;
    let observed = l.site_params(sc.field.observed_site)?;
    let mut groups: Vec<(Vec<u8>, f64)> = vec![(vec![], lt.t1_observed_s), (vec![], lt.t1_other_s)];
    for c in excited_sites(&l.frames, &l.polarization()?) {
        let twin = l
            .site_params(c.site_id)
            .map(|p| same(Some(p), Some(observed)))
            .unwrap_or(false);
        groups[if twin { 0 } else { 1 }].0.push(c.site_id);
    }
    groups.retain(|g| !g.0.is_empty());

    let grid = UniformGrid::new(0.0, sc.grids.lifetime_t_stop_s, sc.grids.lifetime_points)?;
    let ts: Vec<f64> = grid.points().collect();
    let mut columns = Vec::new();
    let mut reports = Vec::new();
    for (k, (sites, t1)) in groups.iter().enumerate() {
        let mut depth: Vec<f64> = ts
            .iter()
            .map(|&t| hole_decay(lt.depth, *t1, t))
            .collect::<Result<_, _>>()?;
        noise::add_gaussian(
            &mut depth,
            sc.noise.decay_sigma * lt.depth,
            &mut noise::rng(sc.noise.seed, Stream::Lifetime, k as u64),
        );
        let samples: Vec<(f64, f64)> = ts.iter().copied().zip(depth.iter().copied()).collect();
        reports.push(DecayGroup {
            sites: sites.clone(),
            t1_s: *t1,
            fit: fit_exponential(&samples).into(),
        });
        columns.push(depth);
    }

    let names: Vec<String> = groups
        .iter()
        .map(|g| {
            format!(
                "depth_sites_{}",
                g.0.iter().map(u8::to_string).collect::<Vec<_>>().join("_")
            )
        })
        .collect();
    let mut header = vec!["t_s"];
    header.extend(names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            std::iter::once(num(t))
                .chain(columns.iter().map(|c| num(c[i])))
                .collect()
        })
        .collect();

    let mut out = Artifacts::default();
    out.csv("lifetime.csv", &header, &rows)?;
    out.json("lifetime.json", &RunReport::new("lifetime", l, reports))?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Nutation,
    Exponential,
}

/// Relative tolerance on sample spacing for a CSV to count as uniform.
const UNIFORM_TOL: f64 = 1e-6;

/// Column labels and rows of a two-column CSV.
pub type XyTable = (String, String, Vec<(f64, f64)>);

/// Reads a two-column CSV with a header row.
pub fn read_xy(bytes: &[u8]) -> Result<XyTable> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let h = r.headers()?.clone();
    ensure!(h.len() == 2, "expected 2 columns, found {}", h.len());
    let mut pts = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64> {
            rec[j]
                .parse::<f64>()
                .with_context(|| format!("row {}: column {} is not a number", i + 2, j + 1))
        };
        pts.push((parse(0)?, parse(1)?));
    }
    Ok((h[0].to_string(), h[1].to_string(), pts))
}

/// Fits an external CSV; `input_name` is recorded in the report.
pub fn run_fit(l: &Loaded, input_name: &str, bytes: &[u8], model: FitModel) -> Result<Artifacts> {
    let (xl, yl, pts) = read_xy(bytes)?;
    let fit = match model {
        FitModel::Nutation => {
            ensure!(pts.len() >= 2, "need at least 2 rows");
            let step = (pts[pts.len() - 1].0 - pts[0].0) / (pts.len() - 1) as f64;
            for (i, p) in pts.iter().enumerate() {
                let expect = pts[0].0 + step * i as f64;
                if (p.0 - expect).abs() > UNIFORM_TOL * step.abs() {
                    bail!(
                        "nutation input must be uniformly sampled (row {} at {} , expected {expect})",
                        i + 2,
                        p.0
                    );
                }
            }
            let trace = Trace::new(pts[0].0, step, pts.iter().map(|p| p.1).collect(), xl, yl)?;
            fit_nutation(&trace)?
        }
        FitModel::Exponential => fit_exponential(&pts)?,
    };

    #[derive(Serialize)]
    struct Results<'a> {
        input: &'a str,
        input_sha256: String,
        model: FitModel,
        fit: FitResult,
    }
    let digest = <sha2::Sha256 as sha2::Digest>::digest(bytes);
    let results = Results {
        input: input_name,
        input_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        model,
        fit,
    };
    let mut out = Artifacts::default();
    out.json("fit.json", &RunReport::new("fit", l, results))?;
    Ok(out)
}
