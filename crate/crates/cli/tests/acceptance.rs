//! Acceptance suite: one line per criterion, then a non-zero exit if any failed.
//!
//! Run with `cargo test -p rytov-cli --test acceptance`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rytov_core::*;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within(elapsed: Duration, limit_s: f64, detail: String) -> Check {
    let t = elapsed.as_secs_f64();
    ensure(t < limit_s, format!("{detail}; {t:.2} s (limit {limit_s} s)"))
}

struct Uniform(ChaCha8Rng);

impl Uniform {
    fn new(seed: u64) -> Self {
        Uniform(ChaCha8Rng::seed_from_u64(seed))
    }

    fn next(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    fn point(&mut self, lo: [f64; 3], hi: [f64; 3]) -> Point3d {
        Point3::new(self.next(lo[0], hi[0]), self.next(lo[1], hi[1]), self.next(lo[2], hi[2]))
    }
}

fn slab(n: usize) -> QuadratureGrid64 {
    build_grid(
        [Interval::new(0.0, 1.0), Interval::new(-0.5, 0.5), Interval::new(-0.5, 0.5)],
        [n, n, n],
        QuadratureRule::Midpoint,
    )
    .unwrap()
}

/// Independent `Σ w·f(K)` over retained slab cells, from the public kernel.
fn kernel_sum(
    grid: &QuadratureGrid64,
    r: &Point3d,
    xi: &Point3d,
    wave: &WaveParams64,
    f: impl Fn(Complex64) -> Complex64,
) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for n in grid.nodes() {
        if grid.is_excluded(&n.point, &[*r, *xi]) {
            continue;
        }
        s += f(kernel_k(r, xi, &n.point, wave).unwrap()) * n.weight;
    }
    s
}

fn c1_helmholtz_order() -> Check {
    let start = Instant::now();
    let wave = WaveParams64::from_wavelength(1.0).unwrap();
    let src = Point3::new(0.1, -0.2, 0.3);
    let dirs = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.6, 0.0, 0.8), (0.48, 0.6, 0.64), (-0.36, 0.48, 0.8)];
    let dists = [2.0, 4.5, 8.0, 13.0, 20.0];
    let mut worst = f64::INFINITY;
    for (d, (a, b, c)) in dists.iter().zip(dirs) {
        let probe = src + Point3::new(a, b, c) * *d;
        let g = |p: &Point3d| g0(p, &src, &wave).unwrap();
        let res = |h: f64| helmholtz_residual(g, |_| 1.0, &wave, &probe, h, &[src]).unwrap().norm();
        let (r1, r2) = (res(0.04), res(0.02));
        worst = worst.min((r1 / r2).log2());
    }
    if worst < 1.9 {
        return Err(format!("worst observed order {worst:.3}"));
    }
    within(start.elapsed(), 1.0, format!("worst observed order {worst:.3} at 5 probes, |r-xi| in [2, 20] wavelengths"))
}

fn c2_static_limit() -> Check {
    let wave = WaveParams64::from_wavenumber(0.0).unwrap();
    let mut u = Uniform::new(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = u.point([-5.0; 3], [5.0; 3]);
        let b = u.point([-5.0; 3], [5.0; 3]);
        let d = a.distance(&b);
        let want = 1.0 / (4.0 * PI * d);
        let got = g0(&a, &b, &wave).unwrap();
        worst = worst.max((got - want).norm() / want);
    }
    ensure(worst <= 1e-14, format!("max relative error {worst:.2e} over 100 pairs"))
}

fn c3_radiation() -> Check {
    let wave = WaveParams64::from_wavelength(0.3).unwrap();
    let xi = Point3::new(0.2, -0.1, 0.4);
    let radii = [1.0, 2.0, 5.0, 10.0, 100.0];
    let got = radiation_defect(&xi, &wave, &radii).unwrap();
    let worst = radii
        .iter()
        .zip(&got)
        .map(|(r, g)| {
            let want = 1.0 / (4.0 * PI * r);
            (g - want).abs() / want
        })
        .fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("max relative error {worst:.2e} at radii 1..100 m"))
}

fn c4_reciprocity() -> Check {
    let start = Instant::now();
    let grid = Arc::new(slab(16));
    let wave = WaveParams64::from_wavelength(0.5).unwrap();
    let spec = TurbulenceSpec::new(1.0, 0.01, grid.clone(), 4).unwrap();
    let mut u = Uniform::new(4);
    let pairs: Vec<_> = (0..100)
        .map(|_| (u.point([-1.0, -1.0, -1.0], [2.0, 1.0, 1.0]), u.point([-1.0, -1.0, -1.0], [2.0, 1.0, 1.0])))
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let field = sample_field(&spec, i);
        let medium = FrozenMedium {
            wave,
            delta: 1.0,
            field: &field,
            grid: &grid,
        };
        worst = worst.max(reciprocity_defect(&medium, &pairs).unwrap());
    }
    if worst >= 1e-12 {
        return Err(format!("max defect {worst:.2e}"));
    }
    within(start.elapsed(), 10.0, format!("max defect {worst:.2e} over 100 pairs x 10 realizations, 16^3 cells"))
}

fn c5_linearity() -> Check {
    let grid = slab(10);
    let wave = WaveParams64::from_wavelength(0.5).unwrap();
    let spec = TurbulenceSpec::new(1.0, 0.05, grid.clone(), 5).unwrap();
    let field = sample_field(&spec, 0);
    let backgrounds = [
        BackgroundField::plane_wave(wave),
        BackgroundField::beam_wave(wave, 0.8).unwrap(),
        BackgroundField::point_source(wave, Point3::new(-0.5, 0.0, 0.1)),
    ];
    let obs = [Point3::new(1.6, 0.05, -0.1), Point3::new(0.5, 0.0, 0.0), Point3::new(2.5, 0.3, 0.2)];
    let mut worst: f64 = 0.0;
    for a in [-2.5, 0.3, 7.0] {
        let scaled = field.scaled(a);
        for bg in &backgrounds {
            for r in &obs {
                let base = phi1_full(r, bg, &field, &grid).unwrap().value;
                let s = phi1_full(r, bg, &scaled, &grid).unwrap().value;
                worst = worst.max((s - base * a).norm() / (base * a).norm());
                if r.x > 1.0 {
                    let p = r.to_paraxial();
                    let base = phi1_parabolic(&p, bg, &field, &grid).unwrap().value;
                    let s = phi1_parabolic(&p, bg, &scaled, &grid).unwrap().value;
                    worst = worst.max((s - base * a).norm() / (base * a).norm());
                }
            }
        }
    }
    ensure(worst <= 1e-12, format!("max relative defect {worst:.2e}, full and parabolic"))
}

fn geometries() -> [(Point3d, Point3d); 5] {
    [
        (Point3::new(-0.5, 0.0, 0.0), Point3::new(1.5, 0.0, 0.0)),
        (Point3::new(-0.3, 0.2, -0.1), Point3::new(1.4, -0.1, 0.2)),
        (Point3::new(-1.0, -0.3, 0.3), Point3::new(2.0, 0.3, -0.3)),
        (Point3::new(0.5, 0.0, 0.0), Point3::new(1.8, 0.1, 0.0)),
        (Point3::new(-0.2, 0.6, 0.0), Point3::new(1.2, -0.6, 0.1)),
    ]
}

fn c6_delta_continuity() -> Check {
    let grid = slab(12);
    let wave = WaveParams64::from_wavelength(0.5).unwrap();
    let spec = TurbulenceSpec::new(1.0, 0.05, grid.clone(), 6).unwrap();
    let field = sample_field(&spec, 0);
    let mut worst: f64 = 0.0;
    for (r, xi) in geometries() {
        let free = g0(&r, &xi, &wave).unwrap();
        let dev = |d: f64| (turbulent_green(&r, &xi, d, &field, &grid, &wave).unwrap().value - free).norm();
        let ratio = dev(1e-3) / dev(1e-4);
        worst = worst.max((ratio / 10.0 - 1.0).abs());
    }
    ensure(worst < 0.05, format!("max deviation of the 10x ratio from linear scaling {:.3}%", 100.0 * worst))
}

fn c7_gaussian_mean() -> Check {
    let start = Instant::now();
    let grid = Arc::new(slab(16));
    let wave = WaveParams64::from_wavelength(0.5).unwrap();
    let (delta, sigma) = (1.0, 0.015);
    let spec = TurbulenceSpec::new(delta, sigma, grid.clone(), 77).unwrap();
    let kernels: Vec<_> = geometries()
        .iter()
        .map(|(r, xi)| RatioKernel::spherical(r, xi, &grid, &wave).unwrap())
        .collect();
    let mc = MonteCarloSpec::new(10_000, 77).unwrap();
    let est = mc_mean_vec(
        &mc,
        |seed, i| sample_field(&spec.with_seed(seed), i as u64),
        |f| kernels.iter().map(|k| k.base() * (k.exponent(f.values(), &grid) * delta).exp()).collect(),
    )
    .unwrap();
    let k4 = wave.k0().powi(4);
    let mut worst_se: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut min_shift = f64::INFINITY;
    for (i, (r, xi)) in geometries().iter().enumerate() {
        let g = mean_turbulent_green(r, xi, &spec, &wave, Convention::Gaussian).unwrap();
        let p = mean_turbulent_green(r, xi, &spec, &wave, Convention::Paper).unwrap();
        let e = &est[i];
        worst_se = worst_se.max(((e.mean.re - g.re) / e.se_re).abs().max(((e.mean.im - g.im) / e.se_im).abs()));
        let kk = kernel_sum(&grid, r, xi, &wave, |k| k * k);
        let want = (kk * (2.0 * delta * delta * sigma * sigma * k4)).exp();
        worst_ratio = worst_ratio.max((p / g - want).norm() / want.norm());
        min_shift = min_shift.min((g / kernels[i].base() - 1.0).norm() / (e.standard_error / g.norm()));
    }
    let detail = format!(
        "MC vs closure max {worst_se:.2} SE; paper/gaussian ratio error {worst_ratio:.2e}; mean shift >= {min_shift:.0} SE"
    );
    if worst_se > 3.0 || worst_ratio > 1e-10 {
        return Err(detail);
    }
    within(start.elapsed(), 300.0, detail)
}

fn c8_time_reversal_point() -> Check {
    let grid = Arc::new(slab(10));
    let wave = WaveParams64::from_wavelength(0.5).unwrap();
    let (delta, sigma) = (1.0, 0.005);
    let spec = TurbulenceSpec::new(delta, sigma, grid.clone(), 8).unwrap();
    let s = Point3::new(-0.5, 0.0, 0.0);
    let m = Point3::new(1.5, 0.1, -0.05);
    let src = SourceField::point(s);
    let mirror = MirrorSpec::point(m);
    let k4 = wave.k0().powi(4);
    let re2 = kernel_sum(&grid, &s, &m, &wave, |k| Complex64::new(k.re * k.re, 0.0)).re;
    let g2 = g0(&s, &m, &wave).unwrap().norm_sqr();
    let printed = g2 * g2 * (64.0 * delta * delta * sigma * sigma * k4 * re2).exp();
    let paper = mean_refocus(&src, &mirror, &[s], &spec, &wave, Convention::Paper).unwrap().intensity[0];
    let closed = point_point_mean_intensity(&s, &m, &spec, &wave, Convention::Paper).unwrap();
    let e64 = ((paper - printed) / printed).abs().max(((closed - printed) / printed).abs());

    let gauss = mean_refocus(&src, &mirror, &[s], &spec, &wave, Convention::Gaussian).unwrap();
    let mc = mc_refocus(&src, &mirror, &[s], &spec, &wave, &MonteCarloSpec::new(10_000, 8).unwrap()).unwrap();
    let z = (mc.intensity[0] - gauss.intensity[0]).abs() / mc.intensity_se.as_ref().unwrap()[0];
    let log_var = 64.0 * delta * delta * sigma * sigma * k4 * re2;
    ensure(
        e64 <= 1e-12 && z <= 3.0,
        format!("coefficient-64 formula error {e64:.2e}; gaussian (32) vs MC {z:.2} SE, log-intensity variance {log_var:.3}"),
    )
}

fn c9_refocus_argmax() -> Check {
    let start = Instant::now();
    let wave = WaveParams64::from_wavelength(0.25).unwrap();
    let mirror = MirrorSpec::square(3, 0.5).unwrap();
    let s = Point3::new(4.0, 0.15, -0.1);
    let src = SourceField::point(s);
    let free = FreeSpace { wave };
    let n = 21;
    let step = 0.06;
    let eval: Vec<Point3d> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            Point3::new(s.x, s.y + (i as f64 - 10.0) * step, s.z + (j as f64 - 10.0) * step)
        })
        .collect();
    let psi_m = mirror_field(&src, &mirror, &free).unwrap();
    let res = backpropagate(&psi_m, &mirror, &eval, &free).unwrap();
    let amp: Vec<f64> = res.psi.iter().map(|p| p.norm()).collect();
    let arg = (0..amp.len()).fold(0, |b, i| if amp[i] > amp[b] { i } else { b });
    let centre = 10 * n + 10;
    if arg != centre {
        return Err(format!("maximum at node {arg}, source at node {centre}"));
    }
    let runner_up = amp.iter().enumerate().filter(|(i, _)| *i != centre).map(|(_, v)| *v).fold(0.0, f64::max);
    within(
        start.elapsed(),
        30.0,
        format!("max |psi| at the source node of 21x21 ({:.3} x runner-up)", amp[centre] / runner_up),
    )
}

fn c10_validity_closed_form() -> Check {
    let mut u = Uniform::new(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let k0 = 10f64.powf(u.next(5.0, 7.5));
        let cn2 = 10f64.powf(u.next(-17.0, -13.0));
        let l = 10f64.powf(u.next(1.0, 4.5));
        let wave = WaveParams64::from_wavenumber(k0).unwrap();
        let got = rytov_validity(&wave, &CnProfile::constant_cn2(cn2).unwrap(), l).unwrap().value;
        let want = k0.powf(7.0 / 6.0) * cn2 * l.powf(11.0 / 6.0) * 6.0 / 11.0;
        worst = worst.max((got - want).abs() / want);
    }
    ensure(worst <= 1e-10, format!("max relative error {worst:.2e} over 10 triples"))
}

fn c11_table_knots() -> Check {
    let table = [(0.001, 30.0), (0.003, 20.0), (0.01, 15.0), (0.03, 10.0), (0.1, 6.0), (0.3, 4.0), (1.0, 1.0), (3.0, 1.0)];
    let p = CnProfile64::standard();
    for (h, c) in table {
        let got = p.cn_lookup(h).unwrap();
        if got != c * 1e-8 {
            return Err(format!("height {h} km: {got:e} != {:e}", c * 1e-8));
        }
    }
    ensure(p.cn_lookup(0.0005).is_err(), "exact at all 8 knots; below-range lookup rejected".into())
}

fn apodization_problem(c: f64, n: usize) -> ApodizationProblem<f64> {
    let wave = WaveParams64::from_wavelength(1.0).unwrap();
    ApodizationProblem::new(1.0, 1.0, 2.0 * PI / c, wave, (n, n), (n, n)).unwrap()
}

const BANDWIDTHS: [f64; 3] = [0.5, 1.0, 2.0];

fn c12_spectral_structure() -> Check {
    let start = Instant::now();
    let mut defect: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut drift: f64 = 0.0;
    let mut range_ok = true;
    let mut lambdas = Vec::new();
    for c in BANDWIDTHS {
        let mut l = [0.0; 2];
        for (slot, n) in [24, 32].into_iter().enumerate() {
            let p = apodization_problem(c, n);
            let m = build_ks(&p).unwrap();
            defect = defect.max(m.hermitian_defect());
            let ev = m.eigenvalues().unwrap();
            min_eig = min_eig.min(ev[0]);
            l[slot] = solve_concentration(&p, &m).unwrap().lambda;
            range_ok &= l[slot] > 0.0 && l[slot] < 1.0;
        }
        drift = drift.max((l[1] - l[0]).abs() / l[1]);
        lambdas.push(l[1]);
    }
    let detail = format!(
        "c = 0.5/1/2: lambda' = {:.6}/{:.6}/{:.6}; Hermitian defect {defect:.1e}; min eigenvalue {min_eig:.1e}; 24->32 drift {drift:.1e}",
        lambdas[0], lambdas[1], lambdas[2]
    );
    if defect >= 1e-12 || min_eig < -1e-12 || drift >= 1e-3 || !range_ok {
        return Err(detail);
    }
    within(start.elapsed(), 120.0, detail)
}

/// Eigenvalues of the amplitude problem whose `|α|²` is at least this fraction
/// of the largest; below it the relative checks measure roundoff only.
const SIGNIFICANCE: f64 = 1e-6;

fn c13_parity() -> Check {
    let mut worst: f64 = 0.0;
    let (mut even, mut odd, mut mixed) = (0, 0, 0);
    for c in BANDWIDTHS {
        let res = solve_alpha(&apodization_problem(c, 24)).unwrap();
        let top = res[0].lambda;
        for r in res.iter().filter(|r| r.lambda >= SIGNIFICANCE * top) {
            let a = r.alpha.unwrap();
            match r.parity {
                Parity::Even => {
                    even += 1;
                    worst = worst.max(a.im.abs() / a.norm());
                }
                Parity::Odd => {
                    odd += 1;
                    worst = worst.max(a.re.abs() / a.norm());
                }
                Parity::Mixed => mixed += 1,
            }
        }
    }
    ensure(
        worst < 1e-8 && mixed == 0 && even > 0 && odd > 0,
        format!("{even} even / {odd} odd / {mixed} mixed eigenvalues; worst off-axis fraction {worst:.1e}"),
    )
}

fn c14_cross_solver() -> Check {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for c in BANDWIDTHS {
        let p = apodization_problem(c, 24);
        let ks = build_ks(&p).unwrap().eigenvalues().unwrap();
        let res = solve_alpha(&p).unwrap();
        let top = res[0].lambda;
        for r in res.iter().filter(|r| r.lambda >= SIGNIFICANCE * top) {
            let nearest = ks.iter().map(|v| (v - r.lambda).abs()).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest / r.lambda);
            checked += 1;
        }
    }
    ensure(worst < 1e-8, format!("{checked} values of |alpha|^2; max relative mismatch {worst:.1e}"))
}

fn c15_variational_bound() -> Check {
    let mut u = Uniform::new(15);
    let mut worst = f64::NEG_INFINITY;
    for c in BANDWIDTHS {
        let p = apodization_problem(c, 16);
        let m = build_ks(&p).unwrap();
        let top = solve_concentration(&p, &m).unwrap().lambda;
        for _ in 0..100 {
            let t = PupilAmplitude::new((0..m.len()).map(|_| Complex64::new(u.next(-1.0, 1.0), u.next(-1.0, 1.0))).collect());
            worst = worst.max(m.energy_ratio(&t).unwrap() - top);
        }
    }
    ensure(worst <= 1e-10, format!("max(ratio - lambda'_max) = {worst:.2e} over 3 x 100 random amplitudes"))
}

fn c16_determinism() -> Check {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let tmp = std::env::temp_dir().join(format!("rytov-acceptance-{}", std::process::id()));
    let cache = rytov_cli::Cache::new(tmp.join("cache"));
    let mut names: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    let mut count = 0;
    for path in &names {
        let s = rytov_cli::Scenario::load(path).map_err(|e| e.to_string())?;
        let fresh_a = rytov_cli::execute(&s, &dir, &tmp.join("a"), None).map_err(|e| e.to_string())?;
        let fresh_b = rytov_cli::execute(&s, &dir, &tmp.join("b"), None).map_err(|e| e.to_string())?;
        let _ = rytov_cli::execute(&s, &dir, &tmp.join("c"), Some(&cache)).map_err(|e| e.to_string())?;
        let cached = rytov_cli::execute(&s, &dir, &tmp.join("d"), Some(&cache)).map_err(|e| e.to_string())?;
        for name in fresh_a.bundle.files.keys() {
            let bytes: Vec<_> = ["a", "b", "c", "d"].iter().map(|d| std::fs::read(tmp.join(d).join(name)).unwrap()).collect();
            if bytes.iter().any(|b| *b != bytes[0]) {
                return Err(format!("{}: {name} differs between runs", path.display()));
            }
        }
        if fresh_a.bundle != fresh_b.bundle || !cached.cached {
            return Err(format!("{}: bundle mismatch or cache miss", path.display()));
        }
        count += 1;
        for d in ["a", "b", "c", "d"] {
            let _ = std::fs::remove_dir_all(tmp.join(d));
        }
    }
    let _ = std::fs::remove_dir_all(&tmp);
    ensure(count > 0, format!("{count} scenarios byte-identical across fresh and cached runs"))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 16] = [
        ("free-space Helmholtz convergence", c1_helmholtz_order),
        ("static limit", c2_static_limit),
        ("radiation condition", c3_radiation),
        ("reciprocity", c4_reciprocity),
        ("Rytov linearity", c5_linearity),
        ("delta continuity", c6_delta_continuity),
        ("Gaussian-mean oracle", c7_gaussian_mean),
        ("time reversal point-point", c8_time_reversal_point),
        ("refocusing argmax", c9_refocus_argmax),
        ("validity closed form", c10_validity_closed_form),
        ("height table fidelity", c11_table_knots),
        ("apodization spectral structure", c12_spectral_structure),
        ("parity dichotomy", c13_parity),
        ("cross-solver identity", c14_cross_solver),
        ("variational bound", c15_variational_bound),
        ("determinism", c16_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
