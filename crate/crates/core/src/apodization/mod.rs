//! Pupil apodization under the mean turbulent Green's function: the energy
//! concentration kernel over a circular pupil, its Nyström eigenproblem, and
//! the companion amplitude eigenproblem.
//!
//! Pupil and image planes are `x = 0` and `x = z`; transverse vectors live in
//! those planes. Matrices are assembled and diagonalized in `f64`.

mod linalg;

use crate::error::{Error, Result};
use crate::geometry::{Point3, TransversePoint};
use crate::greens::{g0, kernel_k_distances};
use crate::quadrature::{compensated_sum, DiskGrid, QuadratureGrid};
use crate::rytov::Convention;
use crate::scalar::{cis, from_c64, to_c64, Real};
use crate::turbulence::RefractiveFieldRealization;
use crate::wave::WaveParams;
use faer::Mat;
use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use std::sync::{Arc, OnceLock};

/// Free-space propagator from pupil to image plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum KernelForm {
    /// Focused pupil (far-field form): `e^{−ik₀ x·ξ/z}/(4πz)`. The pupil's
    /// quadratic phase is cancelled by a lens and constant and image-side phases
    /// are dropped; they do not change image-plane intensities.
    #[default]
    Focused,
    /// The spherical wave `G₀((0,x), (z,ξ))` taken literally.
    Spherical,
}

/// Overall scale of the propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Normalization {
    /// Multiplies the kernel by `2k₀`, which makes the focused propagator unitary
    /// from pupil to image plane: total image energy equals `∫|T|²`, and the
    /// concentration eigenvalues are fractions in `(0, 1)`.
    #[default]
    Unitary,
    /// The bare Green's function normalization `1/(4π·distance)`.
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Mixed => "mixed",
        }
    }
}

/// White-noise turbulence between the planes, for the mean kernel.
#[derive(Debug, Clone)]
pub struct SlabTurbulence<T> {
    pub delta: T,
    pub sigma: T,
    pub grid: Arc<QuadratureGrid<T>>,
    pub convention: Convention,
}

/// Circular pupil of radius `a`, target circle of radius `b`, separation `z`.
#[derive(Debug, Clone)]
pub struct ApodizationProblem<T> {
    a: T,
    b: T,
    z: T,
    wave: WaveParams<T>,
    pupil: DiskGrid<T>,
    image: DiskGrid<T>,
    form: KernelForm,
    normalization: Normalization,
    turbulence: Option<SlabTurbulence<T>>,
    exponent_cache: Arc<OnceLock<Vec<Complex<T>>>>,
}

impl<T: Real> ApodizationProblem<T> {
    /// Disks use `n_radial × n_angular` nodes each (see [`DiskGrid`]).
    pub fn new(
        a: T,
        b: T,
        z: T,
        wave: WaveParams<T>,
        pupil_nodes: (usize, usize),
        image_nodes: (usize, usize),
    ) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("z", z)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        let pupil = DiskGrid::new(a, pupil_nodes.0, pupil_nodes.1)?;
        let image = DiskGrid::new(b, image_nodes.0, image_nodes.1)?;
        for g in [&pupil, &image] {
            let s = compensated_sum(g.weights().iter().copied());
            if ((s - g.area()) / g.area()).abs() > T::lit(1e-10).max(T::epsilon() * T::lit(64.0)) {
                return Err(Error::param("disk grid", "weights do not sum to the disk area"));
            }
        }
        Ok(Self {
            a,
            b,
            z,
            wave,
            pupil,
            image,
            form: KernelForm::default(),
            normalization: Normalization::default(),
            turbulence: None,
            exponent_cache: Arc::default(),
        })
    }

    pub fn with_kernel_form(mut self, form: KernelForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    /// Adds mean-field turbulence. The slab grid should span `0 < x < z` and
    /// cover the beam transversally; cells near the pupil and image points are
    /// excluded per the grid's exclusion radius.
    pub fn with_turbulence(mut self, turbulence: SlabTurbulence<T>) -> Result<Self> {
        if !(turbulence.delta >= T::zero() && turbulence.sigma >= T::zero()) {
            return Err(Error::param("turbulence", "delta and sigma must be >= 0"));
        }
        let xb = turbulence.grid.bounds()[0];
        if xb.lo < T::zero() || xb.hi > self.z {
            return Err(Error::param("slab", "slab must lie between the pupil and image planes"));
        }
        self.turbulence = Some(turbulence);
        self.exponent_cache = Arc::default();
        Ok(self)
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn z(&self) -> T {
        self.z
    }

    pub fn wave(&self) -> &WaveParams<T> {
        &self.wave
    }

    pub fn pupil(&self) -> &DiskGrid<T> {
        &self.pupil
    }

    pub fn image(&self) -> &DiskGrid<T> {
        &self.image
    }

    pub fn kernel_form(&self) -> KernelForm {
        self.form
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn turbulence(&self) -> Option<&SlabTurbulence<T>> {
        self.turbulence.as_ref()
    }

    /// Space-bandwidth parameter `c = k₀ab/z`.
    pub fn bandwidth(&self) -> T {
        self.wave.k0() * self.a * self.b / self.z
    }

    /// Coefficient multiplying `∫K²` in the mean-field exponent, zero without
    /// turbulence.
    fn exponent_coefficient(&self) -> T {
        match &self.turbulence {
            Some(t) => {
                let k2 = self.wave.k0() * self.wave.k0();
                t.convention.mean_green_coefficient::<T>() * t.delta * t.delta * t.sigma * t.sigma * k2 * k2
            }
            None => T::zero(),
        }
    }

    fn scale(&self) -> T {
        match self.normalization {
            Normalization::Green => T::one(),
            Normalization::Unitary => T::lit(2.0) * self.wave.k0(),
        }
    }

    /// Free-space propagator between pupil point `x` and image point `xi`.
    pub fn propagator(&self, x: &TransversePoint<T>, xi: &TransversePoint<T>) -> Result<Complex<T>> {
        let g = match self.form {
            KernelForm::Spherical => g0(&pupil_point(x), &image_point(xi, self.z), &self.wave)?,
            KernelForm::Focused => {
                cis(-self.wave.k0() * x.dot(xi) / self.z) / (T::lit(4.0) * T::PI() * self.z)
            }
        };
        Ok(g * self.scale())
    }

    /// `∫K[(0,x),(z,ξ),ζ]² dζ` over the slab.
    pub fn k_square_integral(&self, x: &TransversePoint<T>, xi: &TransversePoint<T>) -> Complex<T> {
        match &self.turbulence {
            Some(t) => k_square_integral(&t.grid, &pupil_point(x), &image_point(xi, self.z), self.wave.k0()),
            None => Complex::from(T::zero()),
        }
    }

    /// Mean-field propagator `D(x,ξ) = G(x,ξ)·exp(c·δ²σ²k₀⁴∫K²)`.
    pub fn mean_kernel(&self, x: &TransversePoint<T>, xi: &TransversePoint<T>) -> Result<Complex<T>> {
        let g = self.propagator(x, xi)?;
        let c = self.exponent_coefficient();
        if c == T::zero() {
            return Ok(g);
        }
        Ok(g * (self.k_square_integral(x, xi) * c).exp())
    }

    /// `∫K²` for every (pupil, image) node pair, row-major in the pupil index;
    /// computed once per problem.
    pub fn exponent_cache(&self) -> &[Complex<T>] {
        self.exponent_cache.get_or_init(|| {
            if self.exponent_coefficient() == T::zero() {
                return Vec::new();
            }
            let ni = self.image.len();
            self.pupil
                .points()
                .par_iter()
                .flat_map_iter(|x| (0..ni).map(move |j| self.k_square_integral(x, &self.image.points()[j])))
                .collect()
        })
    }

    /// `D` on (pupil node, image node) pairs, as an `f64` matrix.
    fn mean_kernel_matrix(&self) -> Result<Mat<Complex64>> {
        let (np, ni) = (self.pupil.len(), self.image.len());
        let c = self.exponent_coefficient();
        let cache = self.exponent_cache();
        let rows = (0..np)
            .into_par_iter()
            .map(|i| {
                (0..ni)
                    .map(|j| {
                        let g = self.propagator(&self.pupil.points()[i], &self.image.points()[j])?;
                        let v = if c == T::zero() { g } else { g * (cache[i * ni + j] * c).exp() };
                        Ok(to_c64(v))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        check_finite(&rows)?;
        Ok(Mat::from_fn(np, ni, |i, j| rows[i][j]))
    }

    /// Same kernel with the pupil grid standing in for the image grid (`a = b`).
    fn mean_kernel_self(&self) -> Result<Mat<Complex64>> {
        let same = self.image.counts() == self.pupil.counts() && self.image.radius() == self.pupil.radius();
        if same {
            return self.mean_kernel_matrix();
        }
        let np = self.pupil.len();
        let pts = self.pupil.points();
        let rows = (0..np)
            .into_par_iter()
            .map(|i| (0..np).map(|j| self.mean_kernel(&pts[i], &pts[j]).map(to_c64)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        check_finite(&rows)?;
        Ok(Mat::from_fn(np, np, |i, j| rows[i][j]))
    }
}

fn check_finite(rows: &[Vec<Complex64>]) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if r.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { node: i });
        }
    }
    Ok(())
}

fn pupil_point<T: Real>(x: &TransversePoint<T>) -> Point3<T> {
    Point3::new(T::zero(), x.y, x.z)
}

fn image_point<T: Real>(xi: &TransversePoint<T>, z: T) -> Point3<T> {
    Point3::new(z, xi.y, xi.z)
}

fn k_square_integral<T: Real>(grid: &QuadratureGrid<T>, r: &Point3<T>, xi: &Point3<T>, k: T) -> Complex<T> {
    let d = r.distance(xi);
    let singular = [*r, *xi];
    let mut re = Vec::with_capacity(grid.len());
    let mut im = Vec::with_capacity(grid.len());
    for n in grid.nodes() {
        if grid.is_excluded(&n.point, &singular) {
            continue;
        }
        let kk = kernel_k_distances(d, n.point.distance(xi), r.distance(&n.point), k);
        let sq = kk * kk;
        re.push(sq.re * n.weight);
        im.push(sq.im * n.weight);
    }
    Complex::new(compensated_sum(re), compensated_sum(im))
}

/// Complex pupil amplitude `T`, one value per pupil node.
#[derive(Debug, Clone, PartialEq)]
pub struct PupilAmplitude<T> {
    pub values: Vec<Complex<T>>,
}

impl<T: Real> PupilAmplitude<T> {
    pub fn new(values: Vec<Complex<T>>) -> Self {
        Self { values }
    }

    pub fn uniform(grid: &DiskGrid<T>, value: Complex<T>) -> Self {
        Self {
            values: vec![value; grid.len()],
        }
    }

    fn check(&self, grid: &DiskGrid<T>) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::param(
                "pupil amplitude",
                format!("{} values for {} pupil nodes", self.values.len(), grid.len()),
            ));
        }
        if self.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::param("pupil amplitude", "values must be finite"));
        }
        Ok(())
    }
}

/// Which propagator [`image_amplitude`] uses.
#[derive(Debug, Clone, Copy)]
pub enum Propagation<'a, T> {
    /// The white-noise mean kernel `D`.
    Mean,
    /// One frozen realization on the given slab grid.
    Realization {
        delta: T,
        field: &'a RefractiveFieldRealization<T>,
        grid: &'a QuadratureGrid<T>,
    },
}

/// `A(ξ) = Σ_x w_x·G(x, ξ)·T(x)` over the pupil nodes.
pub fn image_amplitude<T: Real>(
    problem: &ApodizationProblem<T>,
    amplitude: &PupilAmplitude<T>,
    xi: &TransversePoint<T>,
    propagation: Propagation<'_, T>,
) -> Result<Complex<T>> {
    amplitude.check(&problem.pupil)?;
    let mut re = Vec::with_capacity(problem.pupil.len());
    let mut im = Vec::with_capacity(problem.pupil.len());
    for ((x, w), t) in problem.pupil.points().iter().zip(problem.pupil.weights()).zip(&amplitude.values) {
        if *t == Complex::from(T::zero()) {
            continue;
        }
        let g = match propagation {
            Propagation::Mean => problem.mean_kernel(x, xi)?,
            Propagation::Realization { delta, field, grid } => {
                let base = problem.propagator(x, xi)?;
                let kern = crate::rytov::RatioKernel::spherical(&pupil_point(x), &image_point(xi, problem.z), grid, &problem.wave)?;
                base * (kern.exponent(field.values(), grid) * delta).exp()
            }
        };
        let v = g * *t * *w;
        re.push(v.re);
        im.push(v.im);
    }
    Ok(Complex::new(compensated_sum(re), compensated_sum(im)))
}

/// Concentration kernel `K_s` on the pupil nodes, raw and Nyström-symmetrized.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    raw: Mat<Complex64>,
    symmetric: Mat<Complex64>,
    weights: Vec<f64>,
    partner: Vec<usize>,
    hermitian_defect: f64,
}

impl KernelMatrix {
    /// `K_s(x_i, x_j)`.
    pub fn raw(&self) -> &Mat<Complex64> {
        &self.raw
    }

    /// `W^{1/2} K_s W^{1/2}`.
    pub fn symmetric(&self) -> &Mat<Complex64> {
        &self.symmetric
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node at `−x` for each pupil node.
    pub fn partner(&self) -> &[usize] {
        &self.partner
    }

    /// `max|S − Sᴴ| / max|S|` of the symmetrized matrix.
    pub fn hermitian_defect(&self) -> f64 {
        self.hermitian_defect
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// All eigenvalues of the symmetrized matrix, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.symmetric)
    }

    /// Dominant eigenvalue by power iteration, as an independent check on the
    /// dense solver.
    pub fn power_iteration(&self, tol: f64, max_iter: usize) -> Result<f64> {
        linalg::power_iteration(&self.symmetric, tol, max_iter)
    }

    /// Energy fraction `Σ K_s(x,y)T(x)T̄(y) w_x w_y / Σ|T|²w` delivered into the
    /// image circle by pupil amplitude `T`.
    pub fn energy_ratio<T: Real>(&self, amplitude: &PupilAmplitude<T>) -> Result<T> {
        if amplitude.values.len() != self.len() {
            return Err(Error::param("pupil amplitude", "length does not match the pupil grid"));
        }
        let t: Vec<Complex64> = amplitude.values.iter().map(|v| to_c64(*v)).collect();
        let den = compensated_sum(t.iter().zip(&self.weights).map(|(v, w)| v.norm_sqr() * w));
        if den == 0.0 {
            return Err(Error::ZeroDenominator("pupil amplitude is identically zero"));
        }
        // u = conj(T)·√w, numerator = uᴴ S u
        let u = Mat::<Complex64>::from_fn(self.len(), 1, |i, _| t[i].conj() * self.weights[i].sqrt());
        let su = &self.symmetric * &u;
        let num = (u.adjoint() * &su)[(0, 0)].re;
        Ok(T::lit(num / den))
    }
}

/// `K_s(x,y) = Σ_ξ w_ξ D(x,ξ) D̄(y,ξ)` over the image disk.
pub fn build_ks<T: Real>(problem: &ApodizationProblem<T>) -> Result<KernelMatrix> {
    let d = problem.mean_kernel_matrix()?;
    let wp: Vec<f64> = problem.pupil.weights().iter().map(|w| w.to_f64_lossy()).collect();
    let wi: Vec<f64> = problem.image.weights().iter().map(|w| w.to_f64_lossy()).collect();
    let (np, ni) = (wp.len(), wi.len());
    // B = W_p^{1/2} D W_i^{1/2},  S = B Bᴴ,  K_s = W_p^{-1/2} S W_p^{-1/2}
    let b = Mat::<Complex64>::from_fn(np, ni, |i, j| d[(i, j)] * (wp[i].sqrt() * wi[j].sqrt()));
    let s = &b * b.adjoint();
    let raw = Mat::<Complex64>::from_fn(np, np, |i, j| s[(i, j)] / (wp[i].sqrt() * wp[j].sqrt()));
    for j in 0..np {
        for i in 0..np {
            let v = s[(i, j)];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { node: i });
            }
        }
    }
    let defect = linalg::hermitian_defect(&s);
    Ok(KernelMatrix {
        raw,
        symmetric: s,
        weights: wp,
        partner: problem.pupil.partner().to_vec(),
        hermitian_defect: defect,
    })
}

/// One eigenpair of either eigenproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult<T> {
    /// Concentration ratio `λ′` (for the amplitude problem, `|α|²`).
    pub lambda: T,
    /// Amplitude-problem eigenvalue; `None` for the concentration problem.
    pub alpha: Option<Complex<T>>,
    /// Eigenfunction `Ψ` on the pupil nodes, normalized to `Σ w|Ψ|² = 1`.
    pub eigenfunction: Vec<Complex<T>>,
    pub parity: Parity,
    /// Dimension of the eigenspace the result was chosen from.
    pub degeneracy: usize,
}

impl<T: Real> EigenResult<T> {
    /// Pupil amplitude that attains `λ′`: the conjugate eigenfunction, because
    /// the delivered energy is `Σ K_s(x,y) T(x) T̄(y)`.
    pub fn optimal_amplitude(&self) -> PupilAmplitude<T> {
        PupilAmplitude::new(self.eigenfunction.iter().map(|v| v.conj()).collect())
    }
}

/// Relative tolerance for grouping eigenvalues into one degenerate eigenspace.
const DEGENERACY_TOL: f64 = 1e-9;
/// Relative tolerance for the parity classification of eigenfunctions.
const PARITY_TOL: f64 = 1e-8;

/// Largest eigenvalue `λ′` of `λ′Ψ = ∫K_sΨ` and its eigenfunction.
///
/// If the top eigenvalue is degenerate, the returned vector is the projection
/// of the first coordinate vector with non-negligible weight in that subspace,
/// phased so that this coordinate is real and positive.
pub fn solve_concentration<T: Real>(problem: &ApodizationProblem<T>, matrix: &KernelMatrix) -> Result<EigenResult<T>> {
    if matrix.len() != problem.pupil.len() {
        return Err(Error::param("kernel matrix", "built for a different pupil grid"));
    }
    if matrix.hermitian_defect > 1e-10 {
        return Err(Error::NotHermitian(matrix.hermitian_defect));
    }
    let (vals, vecs) = linalg::hermitian_eigen(&matrix.symmetric)?;
    let n = vals.len();
    let top = vals[n - 1];
    let tol = DEGENERACY_TOL * top.abs().max(f64::MIN_POSITIVE);
    let first = (0..n).rev().take_while(|&i| top - vals[i] <= tol).last().unwrap_or(n - 1);
    let cols: Vec<usize> = (first..n).collect();
    let v = pick_in_subspace(&vecs, &cols);
    let psi = unweight(&v, &matrix.weights);
    Ok(EigenResult {
        lambda: T::lit(top),
        alpha: None,
        parity: parity_of(&psi, &matrix.partner),
        eigenfunction: psi.into_iter().map(from_c64).collect(),
        degeneracy: cols.len(),
    })
}

fn pick_in_subspace(vecs: &Mat<Complex64>, cols: &[usize]) -> Vec<Complex64> {
    let n = vecs.nrows();
    let leverage = |i: usize| cols.iter().map(|&c| vecs[(i, c)].norm_sqr()).sum::<f64>();
    let floor = 1e-3 * cols.len() as f64 / n as f64;
    let pivot = (0..n).find(|&i| leverage(i) > floor).unwrap_or(0);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for &c in cols {
        let coef = vecs[(pivot, c)].conj();
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += vecs[(i, c)] * coef;
        }
    }
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// `Ψ = W^{-1/2}v`, which keeps `Σ w|Ψ|² = |v|²`.
fn unweight(v: &[Complex64], w: &[f64]) -> Vec<Complex64> {
    v.iter().zip(w).map(|(x, w)| *x / w.sqrt()).collect()
}

fn parity_of(psi: &[Complex64], partner: &[usize]) -> Parity {
    let scale = psi.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut even = 0.0f64;
    let mut odd = 0.0f64;
    for (i, &j) in partner.iter().enumerate() {
        even = even.max((psi[i] - psi[j]).norm());
        odd = odd.max((psi[i] + psi[j]).norm());
    }
    if even <= PARITY_TOL * scale {
        Parity::Even
    } else if odd <= PARITY_TOL * scale {
        Parity::Odd
    } else {
        Parity::Mixed
    }
}

/// All eigenpairs of `αΨ(x) = ∫_{|η|≤a} D(x,η) Ψ(η) dη`, largest `|α|` first.
///
/// Requires `a = b`. The discretized operator `W^{1/2} D W^{1/2}` commutes with
/// the reflection `x → −x` of the disk grid, so it is diagonalized separately on
/// the even and odd subspaces with a general (non-Hermitian) solver; the parity
/// tag is then measured on the returned eigenfunction.
pub fn solve_alpha<T: Real>(problem: &ApodizationProblem<T>) -> Result<Vec<EigenResult<T>>> {
    let rel = ((problem.a - problem.b) / problem.a).abs();
    if rel > T::lit(1e-12) {
        return Err(Error::param("b", "the amplitude eigenproblem needs a = b"));
    }
    let grid = &problem.pupil;
    let partner = grid.partner();
    let pts = grid.points();
    for (i, &j) in partner.iter().enumerate() {
        if partner[j] != i || pts[j] != -pts[i] || grid.weights()[j] != grid.weights()[i] {
            return Err(Error::AsymmetricGrid);
        }
    }
    let d = problem.mean_kernel_self()?;
    let w: Vec<f64> = grid.weights().iter().map(|w| w.to_f64_lossy()).collect();
    let n = w.len();
    let reps: Vec<usize> = (0..n).filter(|&i| i < partner[i]).collect();
    if reps.len() * 2 != n {
        return Err(Error::AsymmetricGrid);
    }
    let m = reps.len();
    let a = |i: usize, j: usize| d[(i, j)] * (w[i].sqrt() * w[j].sqrt());

    let mut out = Vec::with_capacity(n);
    for sign in [1.0, -1.0] {
        let block = Mat::<Complex64>::from_fn(m, m, |p, q| {
            let (i, j) = (reps[p], reps[q]);
            a(i, j) + a(i, partner[j]) * sign
        });
        let (vals, vecs) = linalg::general_eigen(&block)?;
        for (c, alpha) in vals.iter().enumerate() {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            for (p, &i) in reps.iter().enumerate() {
                v[i] = vecs[(p, c)];
                v[partner[i]] = vecs[(p, c)] * sign;
            }
            let psi = normalize_phase(unweight(&v, &w), &w);
            out.push(EigenResult {
                lambda: T::lit(alpha.norm_sqr()),
                alpha: Some(from_c64(*alpha)),
                parity: parity_of(&psi, partner),
                eigenfunction: psi.into_iter().map(from_c64).collect(),
                degeneracy: 1,
            });
        }
    }
    out.sort_by(|x, y| y.lambda.partial_cmp(&x.lambda).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Unit weighted norm, largest component real and positive.
fn normalize_phase(mut psi: Vec<Complex64>, w: &[f64]) -> Vec<Complex64> {
    let norm = psi.iter().zip(w).map(|(v, w)| v.norm_sqr() * w).sum::<f64>().sqrt();
    let big = psi
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { Complex64::new(1.0, 0.0) };
    psi.iter_mut().for_each(|v| *v = *v * phase / norm);
    psi
}

/// Energy fraction delivered into the image circle by `amplitude`.
pub fn energy_ratio<T: Real>(problem: &ApodizationProblem<T>, amplitude: &PupilAmplitude<T>) -> Result<T> {
    amplitude.check(&problem.pupil)?;
    build_ks(problem)?.energy_ratio(amplitude)
}

/// Size of the term dropped from the mean delivered energy, relative to the
/// energy kept: `2c·δ²σ²k₀⁴ Σ_ξ Σ_ζ |Σ_x D(x,ξ)T(x)K(x,ξ,ζ)|² / Σ_ξ|Σ_x D T|²`
/// (weights implied), `c` the convention's mean-field coefficient.
pub fn cross_term_diagnostic<T: Real>(problem: &ApodizationProblem<T>, amplitude: &PupilAmplitude<T>) -> Result<T> {
    amplitude.check(&problem.pupil)?;
    let Some(turb) = &problem.turbulence else {
        return Ok(T::zero());
    };
    let c = problem.exponent_coefficient();
    if c == T::zero() {
        return Ok(T::zero());
    }
    let k = problem.wave.k0();
    let slab = &turb.grid;
    let per_image = problem
        .image
        .points()
        .par_iter()
        .zip(problem.image.weights().par_iter())
        .map(|(xi, wxi)| -> Result<(T, T)> {
            let xi3 = image_point(xi, problem.z);
            let mut dt = Vec::with_capacity(problem.pupil.len());
            for ((x, w), t) in problem.pupil.points().iter().zip(problem.pupil.weights()).zip(&amplitude.values) {
                dt.push(problem.mean_kernel(x, xi)? * *t * *w);
            }
            let main = dt.iter().fold(Complex::from(T::zero()), |s, v| s + v).norm_sqr();
            let mut cross = Vec::with_capacity(slab.len());
            for node in slab.nodes() {
                let mut acc = Complex::from(T::zero());
                for (x, v) in problem.pupil.points().iter().zip(&dt) {
                    let r = pupil_point(x);
                    if slab.is_excluded(&node.point, &[r, xi3]) {
                        continue;
                    }
                    let kk = kernel_k_distances(r.distance(&xi3), node.point.distance(&xi3), r.distance(&node.point), k);
                    acc = acc + *v * kk;
                }
                cross.push(acc.norm_sqr() * node.weight);
            }
            Ok((main * *wxi, compensated_sum(cross) * *wxi))
        })
        .collect::<Result<Vec<_>>>()?;
    let main = compensated_sum(per_image.iter().map(|p| p.0));
    let cross = compensated_sum(per_image.iter().map(|p| p.1));
    if main == T::zero() {
        return Err(Error::ZeroDenominator("no energy reaches the image circle"));
    }
    Ok(T::lit(2.0) * c * cross / main)
}
