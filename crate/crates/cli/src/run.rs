//! Command dispatch. Every command returns a [`Bundle`]: named text files whose
//! bytes depend only on the scenario and the tool version.

use crate::error::CliError;
use crate::scenario::*;
use rytov_core::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Output files by name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bundle {
    pub files: BTreeMap<String, String>,
}

type Res<T> = std::result::Result<T, CliError>;

/// Round-trippable: 17 significant digits.
pub fn num(v: f64) -> Res<String> {
    if v.is_finite() {
        Ok(format!("{v:.16e}"))
    } else {
        Err(CliError::Numerical {
            context: "output value".into(),
            source: Error::NonFinite { node: 0 },
        })
    }
}

#[derive(Default)]
struct Summary(String);

impl Summary {
    fn text(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key} = {value}");
    }

    fn num(&mut self, key: &str, value: f64) -> Res<()> {
        let v = num(value)?;
        self.text(key, v);
        Ok(())
    }

    fn complex(&mut self, key: &str, value: Complex64) -> Res<()> {
        self.num(&format!("{key}_re"), value.re)?;
        self.num(&format!("{key}_im"), value.im)
    }
}

struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv(header.join(",") + "\n")
    }

    fn row(&mut self, cells: &[Cell]) -> Res<()> {
        let mut parts = Vec::with_capacity(cells.len());
        for c in cells {
            parts.push(match c {
                Cell::F(v) => num(*v)?,
                Cell::I(v) => v.to_string(),
                Cell::S(s) => s.to_string(),
            });
        }
        self.0 += &parts.join(",");
        self.0.push('\n');
        Ok(())
    }
}

enum Cell {
    F(f64),
    I(u64),
    S(&'static str),
}
use Cell::{F, I, S};

/// Runs `scenario`. Relative file references resolve against `base_dir`.
pub fn run(scenario: &Scenario, base_dir: &Path) -> Res<Bundle> {
    let wave = wave_params(scenario)?;
    let mut summary = Summary::default();
    summary.text("command", scenario.command.as_str());
    summary.text("version", VERSION);
    summary.text("seed", scenario.seed);
    summary.text("convention", format!("{:?}", scenario.convention).to_lowercase());
    summary.num("wavenumber", wave.k0())?;

    let spec = match &scenario.turbulence {
        Some(t) => Some(turbulence_spec(t, scenario.seed, &wave, &mut summary)?),
        None => None,
    };
    let mut files = BTreeMap::new();
    match scenario.command {
        Command::Greens => greens(scenario.greens.as_ref().unwrap(), &wave, spec.as_ref(), scenario, &mut summary, &mut files)?,
        Command::Validity => validity(scenario.validity.as_ref().unwrap(), &wave, base_dir, &mut summary, &mut files)?,
        Command::Rytov => rytov(scenario.rytov.as_ref().unwrap(), &wave, spec.as_ref().unwrap(), &mut summary, &mut files)?,
        Command::TimeReversal => time_reversal(
            scenario.time_reversal.as_ref().unwrap(),
            &wave,
            spec.as_ref().unwrap(),
            scenario,
            &mut summary,
            &mut files,
        )?,
        Command::Apodize => apodize(scenario.apodize.as_ref().unwrap(), &wave, spec.as_ref(), scenario, &mut summary, &mut files)?,
    }
    files.insert("summary.txt".to_string(), summary.0);
    Ok(Bundle { files })
}

fn wave_params(s: &Scenario) -> Res<WaveParams64> {
    let w = s.wave.as_ref().ok_or(CliError::MissingBlock("wave"))?;
    match (w.wavelength, w.wavenumber) {
        (Some(l), _) => WaveParams::from_wavelength(l),
        (None, Some(k)) => WaveParams::from_wavenumber(k),
        (None, None) => return Err(CliError::MissingBlock("wave.wavelength")),
    }
    .map_err(CliError::numerical("[wave]"))
}

fn turbulence_spec(t: &TurbulenceBlock, seed: u64, wave: &WaveParams64, summary: &mut Summary) -> Res<TurbulenceSpec64> {
    let g = &t.grid;
    let bounds = [0, 1, 2].map(|i| Interval::new(g.lo[i], g.hi[i]));
    let rule = match g.rule {
        RuleTag::Midpoint => QuadratureRule::Midpoint,
        RuleTag::GaussLegendre => QuadratureRule::GaussLegendre,
    };
    let mut grid = build_grid(bounds, g.counts, rule).map_err(CliError::numerical("[turbulence.grid]"))?;
    if let Some(r) = g.exclusion_radius {
        grid = grid.with_exclusion_radius(r).map_err(CliError::numerical("[turbulence.grid]"))?;
    }
    let sigma = match t.sigma {
        Some(s) => s,
        None => {
            let diag = (0..3).map(|i| (g.hi[i] - g.lo[i]).powi(2)).sum::<f64>().sqrt();
            let k4 = wave.k0().powi(4);
            if t.delta == 0.0 || k4 == 0.0 {
                0.0
            } else {
                (DEFAULT_CLOSURE_STRENGTH / (t.delta * t.delta * k4 * diag)).sqrt()
            }
        }
    };
    let spec = TurbulenceSpec::new(t.delta, sigma, grid, seed).map_err(CliError::numerical("[turbulence]"))?;
    summary.num("delta", t.delta)?;
    summary.num("sigma", sigma)?;
    summary.text("sigma_source", if t.sigma.is_some() { "scenario" } else { "default" });
    summary.num("closure_strength", spec.closure_strength(wave.k0()))?;
    summary.num("smallness", spec.smallness())?;
    summary.text("field_cells", spec.grid().len());
    Ok(spec)
}

fn p3(p: [f64; 3]) -> Point3d {
    Point3::new(p[0], p[1], p[2])
}

fn greens(
    g: &GreensBlock,
    wave: &WaveParams64,
    spec: Option<&TurbulenceSpec64>,
    scenario: &Scenario,
    summary: &mut Summary,
    files: &mut BTreeMap<String, String>,
) -> Res<()> {
    let (obs, src) = (p3(g.observation), p3(g.source));
    let ctx = "[greens]";
    let d = obs.distance(&src);
    summary.text("model", format!("{:?}", g.model).to_lowercase());
    summary.num("distance", d)?;
    summary.num("static_limit", 1.0 / (4.0 * std::f64::consts::PI * d))?;
    match g.model {
        GreensModel::Free => {
            let v = g0(&obs, &src, wave).map_err(CliError::numerical(ctx))?;
            summary.complex("value", v)?;
            summary.num("value_abs", v.norm())?;
        }
        GreensModel::Paraxial => {
            let v = gp(&obs.to_paraxial(), &src.to_paraxial(), wave).map_err(CliError::numerical(ctx))?;
            summary.complex("value", v)?;
            summary.num("value_abs", v.norm())?;
        }
        GreensModel::Mean => {
            let spec = spec.unwrap();
            let free = g0(&obs, &src, wave).map_err(CliError::numerical(ctx))?;
            let v = mean_turbulent_green(&obs, &src, spec, wave, scenario.convention.into()).map_err(CliError::numerical(ctx))?;
            summary.complex("free", free)?;
            summary.complex("value", v)?;
            summary.complex("mean_factor", v / free)?;
        }
        GreensModel::Turbulent | GreensModel::ParaxialTurbulent => {
            let spec = spec.unwrap();
            let grid = spec.grid();
            let kernel = if g.model == GreensModel::Turbulent {
                RatioKernel::spherical(&obs, &src, grid, wave)
            } else {
                RatioKernel::paraxial(&obs.to_paraxial(), &src.to_paraxial(), grid, wave)
            }
            .map_err(CliError::numerical(ctx))?;
            let mut csv = Csv::new(&["realization", "re", "im", "exponent_re", "exponent_im"]);
            let mut values = Vec::with_capacity(g.realizations as usize);
            for i in 0..g.realizations {
                let field = sample_field(spec, i);
                let t = kernel.turbulent(spec.delta(), &field, grid).map_err(CliError::numerical(ctx))?;
                csv.row(&[I(i), F(t.value.re), F(t.value.im), F(t.exponent.re), F(t.exponent.im)])?;
                values.push(t.value);
            }
            summary.complex("free", kernel.base())?;
            summary.num("excluded_volume", kernel.excluded_volume())?;
            summary.text("realizations", g.realizations);
            let n = values.len() as f64;
            let mean = values.iter().sum::<Complex64>() / n;
            summary.complex("sample_mean", mean)?;
            if values.len() >= 2 {
                let var = |f: fn(&Complex64) -> f64| {
                    let m = values.iter().map(f).sum::<f64>() / n;
                    values.iter().map(|v| (f(v) - m).powi(2)).sum::<f64>() / (n - 1.0)
                };
                let se = (var(|v| v.re).max(var(|v| v.im)) / n).sqrt();
                summary.num("standard_error", se)?;
            }
            files.insert("realizations.csv".into(), csv.0);
        }
    }
    Ok(())
}

fn validity(
    v: &ValidityBlock,
    wave: &WaveParams64,
    base_dir: &Path,
    summary: &mut Summary,
    files: &mut BTreeMap<String, String>,
) -> Res<()> {
    let ctx = "[validity]";
    let profile = match (&v.profile, v.constant_cn2) {
        (Some(p), _) if p == "standard" => CnProfile::standard(),
        (Some(p), _) => CnProfile::load(base_dir.join(p)).map_err(CliError::numerical(ctx))?,
        (None, Some(c)) => CnProfile::constant_cn2(c).map_err(CliError::numerical(ctx))?,
        (None, None) => return Err(CliError::MissingBlock("validity.profile")),
    };
    let lengths: Vec<f64> = match (&v.lengths, v.log_range) {
        (Some(l), _) => l.clone(),
        (None, Some((a, b, 1))) => vec![a.min(b)],
        (None, Some((a, b, n))) => (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a * (b / a).powf(i as f64 / (n - 1) as f64)
                }
            })
            .collect(),
        (None, None) => return Err(CliError::MissingBlock("validity.lengths")),
    };
    let mut csv = Csv::new(&["length_m", "value", "valid"]);
    let mut longest_valid = None;
    for l in &lengths {
        let r = rytov_validity(wave, &profile, *l).map_err(CliError::numerical(format!("[validity] L = {l} m")))?;
        csv.row(&[F(*l), F(r.value), S(if r.valid { "true" } else { "false" })])?;
        if r.valid {
            longest_valid = Some(longest_valid.map_or(*l, |m: f64| m.max(*l)));
        }
    }
    summary.text("profile", v.profile.as_deref().unwrap_or("constant"));
    summary.text("lengths", lengths.len());
    match longest_valid {
        Some(l) => summary.num("longest_valid_length", l)?,
        None => summary.text("longest_valid_length", "none"),
    }
    files.insert("validity.csv".into(), csv.0);
    Ok(())
}

fn rytov(
    r: &RytovBlock,
    wave: &WaveParams64,
    spec: &TurbulenceSpec64,
    summary: &mut Summary,
    files: &mut BTreeMap<String, String>,
) -> Res<()> {
    let ctx = "[rytov]";
    let bg = match r.background {
        BackgroundTag::Plane => BackgroundField::plane_wave(*wave),
        BackgroundTag::Beam => BackgroundField::beam_wave(*wave, r.beam_alpha.unwrap()).map_err(CliError::numerical(ctx))?,
        BackgroundTag::Point => BackgroundField::point_source(*wave, p3(r.source.unwrap())),
    };
    let grid = spec.grid();
    let mut csv = Csv::new(&["realization", "x", "y", "z", "phi1_re", "phi1_im", "excluded_volume"]);
    for i in 0..r.realizations {
        let field = sample_field(spec, i);
        for p in &r.points {
            let pt = p3(*p);
            let phi = match r.method {
                RytovMethod::Full => phi1_full(&pt, &bg, &field, grid),
                RytovMethod::Parabolic => phi1_parabolic(&pt.to_paraxial(), &bg, &field, grid),
            }
            .map_err(CliError::numerical(format!("[rytov] point {p:?}")))?;
            let v = phi.value;
            csv.row(&[I(i), F(pt.x), F(pt.y), F(pt.z), F(v.re), F(v.im), F(phi.excluded_volume)])?;
        }
    }
    summary.text("method", format!("{:?}", r.method).to_lowercase());
    summary.text("background", format!("{:?}", r.background).to_lowercase());
    summary.text("points", r.points.len());
    summary.text("realizations", r.realizations);
    files.insert("phi1.csv".into(), csv.0);
    Ok(())
}

fn time_reversal(
    t: &TimeReversalBlock,
    wave: &WaveParams64,
    spec: &TurbulenceSpec64,
    scenario: &Scenario,
    summary: &mut Summary,
    files: &mut BTreeMap<String, String>,
) -> Res<()> {
    let ctx = "[time-reversal]";
    let src_pt = p3(t.source);
    let mirror = match (&t.mirror.elements, t.mirror.n, t.mirror.pitch) {
        (Some(e), _, _) => MirrorSpec::new(e.iter().map(|p| p3(*p)).collect(), vec![1.0; e.len()]),
        (None, Some(n), Some(p)) => MirrorSpec::square(n, p),
        _ => return Err(CliError::MissingBlock("time-reversal.mirror")),
    }
    .map_err(CliError::numerical(ctx))?;
    let src = SourceField::point(src_pt);
    let n = t.eval.n;
    let offset = |i: usize| {
        if n == 1 {
            0.0
        } else {
            -t.eval.half_width + 2.0 * t.eval.half_width * i as f64 / (n - 1) as f64
        }
    };
    let mut eval = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            eval.push(Point3::new(src_pt.x, src_pt.y + offset(i), src_pt.z + offset(j)));
        }
    }
    let result = match t.mode {
        RefocusMode::Mean => mean_refocus(&src, &mirror, &eval, spec, wave, scenario.convention.into()),
        RefocusMode::MonteCarlo => {
            let mc = MonteCarloSpec::new(t.samples, scenario.seed).map_err(CliError::numerical(ctx))?;
            mc_refocus(&src, &mirror, &eval, spec, wave, &mc)
        }
        RefocusMode::Single => {
            let field = sample_field(spec, 0);
            let medium = FrozenMedium {
                wave: *wave,
                delta: spec.delta(),
                field: &field,
                grid: spec.grid(),
            };
            mirror_field(&src, &mirror, &medium).and_then(|psi_m| backpropagate(&psi_m, &mirror, &eval, &medium))
        }
    }
    .map_err(CliError::numerical(ctx))?;

    let mut csv = Csv::new(&["x", "y", "z", "psi_re", "psi_im", "intensity", "psi_se", "intensity_se"]);
    for (k, p) in result.points.iter().enumerate() {
        let se = |v: &Option<Vec<f64>>| v.as_ref().map_or(0.0, |s| s[k]);
        csv.row(&[
            F(p.x),
            F(p.y),
            F(p.z),
            F(result.psi[k].re),
            F(result.psi[k].im),
            F(result.intensity[k]),
            F(se(&result.psi_se)),
            F(se(&result.intensity_se)),
        ])?;
    }
    let amp: Vec<f64> = result.psi.iter().map(|p| p.norm()).collect();
    let peak = (0..amp.len()).fold(0, |b, i| if amp[i] > amp[b] { i } else { b });
    summary.text("mode", format!("{:?}", t.mode).to_lowercase());
    summary.text("mirror_elements", mirror.len());
    summary.text("eval_points", eval.len());
    summary.num("peak_x", eval[peak].x)?;
    summary.num("peak_y", eval[peak].y)?;
    summary.num("peak_z", eval[peak].z)?;
    summary.num("peak_offset_from_source", eval[peak].distance(&src_pt))?;
    summary.num("peak_abs_psi", amp[peak])?;
    // transverse cut along y through the source row of the grid
    let mid = n / 2;
    let ys: Vec<f64> = (0..n).map(offset).collect();
    let cut: Vec<f64> = (0..n).map(|i| amp[i * n + mid]).collect();
    match spot_fwhm(&ys, &cut) {
        Some(w) => summary.num("spot_fwhm_y", w)?,
        None => summary.text("spot_fwhm_y", "unresolved"),
    }
    if mirror.len() == 1 && t.mode == RefocusMode::Mean {
        let i = point_point_mean_intensity(&src_pt, &mirror.elements()[0], spec, wave, scenario.convention.into())
            .map_err(CliError::numerical(ctx))?;
        summary.num("point_point_mean_intensity", i)?;
    }
    files.insert("refocus.csv".into(), csv.0);
    Ok(())
}

fn apodize(
    a: &ApodizeBlock,
    wave: &WaveParams64,
    spec: Option<&TurbulenceSpec64>,
    scenario: &Scenario,
    summary: &mut Summary,
    files: &mut BTreeMap<String, String>,
) -> Res<()> {
    let ctx = "[apodize]";
    let pupil = (a.pupil_nodes[0], a.pupil_nodes[1]);
    let image = a.image_nodes.map_or(pupil, |n| (n[0], n[1]));
    let mut problem = ApodizationProblem::new(a.a, a.b, a.z, *wave, pupil, image)
        .map_err(CliError::numerical(ctx))?
        .with_kernel_form(match a.kernel {
            KernelTag::Focused => KernelForm::Focused,
            KernelTag::Spherical => KernelForm::Spherical,
        })
        .with_normalization(match a.normalization {
            NormalizationTag::Unitary => Normalization::Unitary,
            NormalizationTag::Green => Normalization::Green,
        });
    if let Some(spec) = spec {
        problem = problem
            .with_turbulence(SlabTurbulence {
                delta: spec.delta(),
                sigma: spec.sigma(),
                grid: Arc::clone(spec.grid()),
                convention: scenario.convention.into(),
            })
            .map_err(CliError::numerical(ctx))?;
    }
    let matrix = build_ks(&problem).map_err(CliError::numerical(ctx))?;
    let top = solve_concentration(&problem, &matrix).map_err(CliError::numerical(ctx))?;
    let eig = matrix.eigenvalues().map_err(CliError::numerical(ctx))?;

    summary.num("bandwidth", problem.bandwidth())?;
    summary.text("pupil_nodes", matrix.len());
    summary.text("kernel", format!("{:?}", a.kernel).to_lowercase());
    summary.text("normalization", format!("{:?}", a.normalization).to_lowercase());
    summary.num("hermitian_defect", matrix.hermitian_defect())?;
    summary.num("lambda_max", top.lambda)?;
    summary.text("degeneracy", top.degeneracy);
    summary.text("parity", top.parity.as_str());
    summary.num("min_eigenvalue", eig[0])?;
    match matrix.power_iteration(1e-12, 20_000) {
        Ok(l) => summary.num("power_iteration_lambda", l)?,
        Err(_) => summary.text("power_iteration_lambda", "not-converged"),
    }
    if spec.is_some() {
        let d = cross_term_diagnostic(&problem, &top.optimal_amplitude()).map_err(CliError::numerical(ctx))?;
        summary.num("dropped_cross_term_relative", d)?;
    }

    let mut ev = Csv::new(&["index", "lambda"]);
    for (i, v) in eig.iter().rev().enumerate() {
        ev.row(&[I(i as u64), F(*v)])?;
    }
    files.insert("eigenvalues.csv".into(), ev.0);

    let mut ef = Csv::new(&["x1", "x2", "psi_re", "psi_im", "parity"]);
    for (p, v) in problem.pupil().points().iter().zip(&top.eigenfunction) {
        ef.row(&[F(p.y), F(p.z), F(v.re), F(v.im), S(top.parity.as_str())])?;
    }
    files.insert("eigenfunction.csv".into(), ef.0);

    if a.alpha {
        let alphas = solve_alpha(&problem).map_err(CliError::numerical(ctx))?;
        let mut csv = Csv::new(&["index", "alpha_re", "alpha_im", "alpha_abs2", "parity"]);
        for (i, r) in alphas.iter().enumerate() {
            let al = r.alpha.unwrap_or_default();
            csv.row(&[I(i as u64), F(al.re), F(al.im), F(r.lambda), S(r.parity.as_str())])?;
        }
        files.insert("alpha.csv".into(), csv.0);
    }
    Ok(())
}
