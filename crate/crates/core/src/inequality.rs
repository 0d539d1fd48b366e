//! Ratio experiments for commutator, product and interpolation estimates.
//!
//! Every `ratio_*` function returns `LHS / RHS` for one pair of fields. A
//! vanishing left-hand side gives exactly `0.0` whatever the right-hand side;
//! a vanishing right-hand side with nonzero left-hand side is
//! [`Error::Degenerate`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{
    apply_fractional_laplacian, dealias, gradient, homogeneous_norm, lp_norm, partial, Grid, ScalarField, Spectrum,
    VectorField,
};
use crate::{Error, Result};

pub const DEFAULT_COUNT: usize = 200;
pub const DEFAULT_KMAX: usize = 16;
pub const DEFAULT_BETA: f64 = 2.0;

fn is_constant(f: &ScalarField) -> bool {
    let v = f.values();
    v.iter().all(|&x| x == v[0])
}

fn same_grid(f: &ScalarField, g: &ScalarField) -> Result<()> {
    if f.grid() == g.grid() {
        Ok(())
    } else {
        Err(Error::Grid("fields live on different grids".into()))
    }
}

fn lambda(f: &ScalarField, s: f64) -> Result<ScalarField> {
    apply_fractional_laplacian(f, s)
}

fn l2(f: &ScalarField) -> f64 {
    homogeneous_norm(f, 0.0)
}

fn vector_l2(v: &VectorField) -> f64 {
    v.components().iter().map(|c| l2(c).powi(2)).sum::<f64>().sqrt()
}

fn ratio(lhs: f64, rhs: f64) -> Result<f64> {
    if lhs == 0.0 {
        return Ok(0.0);
    }
    if !(rhs > 0.0) {
        return Err(Error::Degenerate(format!("right-hand side {rhs} with left-hand side {lhs}")));
    }
    Ok(lhs / rhs)
}

/// `[f, Λ^s]g = f Λ^s g − Λ^s(f g)`, products truncated to the 2/3 band.
///
/// A constant `f` gives the zero field exactly.
pub fn commutator(f: &ScalarField, s: f64, g: &ScalarField) -> Result<ScalarField> {
    same_grid(f, g)?;
    if is_constant(f) {
        return Ok(ScalarField::zeros(f.grid()));
    }
    let f0 = f.map(|v| v - f.mean());
    let mut out = dealias(&(&f0 * &lambda(g, s)?));
    out.axpy(-1.0, &lambda(&dealias(&(&f0 * g)), s)?);
    Ok(out)
}

/// `max_x |∇²f(x)|` with the Frobenius norm of the Hessian.
fn hessian_sup(f: &ScalarField) -> f64 {
    let d = f.grid().dim();
    let grad = gradient(f);
    let mut sq = ScalarField::zeros(f.grid());
    for i in 0..d {
        for j in 0..d {
            let h = partial(grad.component(i), j);
            sq.axpy(1.0, &(&h * &h));
        }
    }
    sq.map(f64::sqrt).max_abs()
}

/// Lebesgue exponents of a Kato–Ponce instance with
/// `1/r = 1/p1 + 1/q1 = 1/p2 + 1/q2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpExponents {
    pub r: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl KpExponents {
    /// `(2; 2, ∞; ∞, 2)`.
    pub fn energy() -> Self {
        Self { r: 2.0, p1: 2.0, q1: f64::INFINITY, p2: f64::INFINITY, q2: 2.0 }
    }

    /// `(2; 2d/σ, 1/(1/2 − σ/(2d)); 1/(1/2 − σ/(2d)), 2d/σ)`.
    pub fn hardy_littlewood_sobolev(dim: usize, sigma: f64) -> Self {
        let d = dim as f64;
        let p = 2.0 * d / sigma;
        let q = 1.0 / (0.5 - sigma / (2.0 * d));
        Self { r: 2.0, p1: p, q1: q, p2: q, q2: p }
    }

    pub fn validate(&self) -> Result<()> {
        let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
        let ok_range = |p: f64| p > 1.0;
        if !(self.r > 1.0 && self.r.is_finite()) || ![self.p1, self.q1, self.p2, self.q2].iter().all(|&p| ok_range(p)) {
            return Err(Error::Parameter(format!("exponents {self:?} outside the admissible range")));
        }
        let lhs = inv(self.r);
        if (inv(self.p1) + inv(self.q1) - lhs).abs() > 1e-12 || (inv(self.p2) + inv(self.q2) - lhs).abs() > 1e-12 {
            return Err(Error::Parameter(format!("exponents {self:?} violate the Hölder relation")));
        }
        Ok(())
    }
}

/// `‖Λ^s(fg)‖_r / (‖Λ^s f‖_{p1}‖g‖_{q1} + ‖f‖_{p2}‖Λ^s g‖_{q2})`.
pub fn ratio_kp(f: &ScalarField, g: &ScalarField, s: f64, exps: &KpExponents) -> Result<f64> {
    same_grid(f, g)?;
    if !(s > 0.0) {
        return Err(Error::Parameter(format!("order s = {s} must be positive")));
    }
    exps.validate()?;
    let fg = dealias(&(f * g));
    let lhs = if is_constant(&fg) { 0.0 } else { lp_norm(&lambda(&fg, s)?, exps.r)? };
    let rhs = lp_norm(&lambda(f, s)?, exps.p1)? * lp_norm(g, exps.q1)?
        + lp_norm(f, exps.p2)? * lp_norm(&lambda(g, s)?, exps.q2)?;
    ratio(lhs, rhs)
}

/// `‖[f,Λ^s]g‖₂ / (‖f‖_{Ḣ^s}‖g‖_∞ + ‖∇f‖_∞‖g‖_{Ḣ^{s−1}})`, `s > 0`.
pub fn ratio_commutator(f: &ScalarField, g: &ScalarField, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Parameter(format!("order s = {s} must be positive")));
    }
    let lhs = l2(&commutator(f, s, g)?);
    let rhs = homogeneous_norm(f, s) * g.max_abs()
        + gradient(f).magnitude().max_abs() * homogeneous_norm(g, s - 1.0);
    ratio(lhs, rhs)
}

/// `s ∇f·Λ^{s−2}∇g`, the first-order term of the commutator expansion.
fn first_order_term(f: &ScalarField, g: &ScalarField, s: f64) -> Result<ScalarField> {
    let grad_f = gradient(f);
    let grad_g = gradient(g);
    let mut out = ScalarField::zeros(f.grid());
    for j in 0..f.grid().dim() {
        out.axpy(s, &dealias(&(grad_f.component(j) * &lambda(grad_g.component(j), s - 2.0)?)));
    }
    Ok(out)
}

/// `‖[f,Λ^s]g − s∇f·Λ^{s−2}∇g‖₂ / (‖f‖_{Ḣ^s}‖g‖_∞ + ‖∇²f‖_∞‖g‖_{Ḣ^{s−2}})`, `s > 1`.
pub fn ratio_commutator_remainder(f: &ScalarField, g: &ScalarField, s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Parameter(format!("order s = {s} must exceed 1")));
    }
    let lhs = if is_constant(f) {
        0.0
    } else {
        let mut c = commutator(f, s, g)?;
        c.axpy(-1.0, &first_order_term(f, g, s)?);
        l2(&c)
    };
    let rhs = homogeneous_norm(f, s) * g.max_abs() + hessian_sup(f) * homogeneous_norm(g, s - 2.0);
    ratio(lhs, rhs)
}

/// `∇Λ^{−σ/2}` applied componentwise.
fn grad_riesz_half(f: &ScalarField, sigma: f64) -> Result<VectorField> {
    Ok(gradient(&lambda(f, -sigma / 2.0)?))
}

/// `‖[∇Λ^{−σ/2}, f]g‖₂ / (‖Λ^{1−σ}f‖_∞‖Λ^{σ/2}g‖₂ + ‖f‖_{Ḣ^{d/2+1−σ}}‖Λ^{σ/2}g‖₂)`, `0 < σ < 1`.
pub fn ratio_riesz_commutator(f: &ScalarField, g: &ScalarField, sigma: f64) -> Result<f64> {
    same_grid(f, g)?;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Parameter(format!("sigma = {sigma} outside (0, 1)")));
    }
    let d = f.grid().dim() as f64;
    let lhs = if is_constant(f) {
        0.0
    } else {
        let f0 = f.map(|v| v - f.mean());
        let mut c = grad_riesz_half(&dealias(&(&f0 * g)), sigma)?;
        let dg = grad_riesz_half(g, sigma)?;
        for (j, comp) in c.components_mut().iter_mut().enumerate() {
            comp.axpy(-1.0, &dealias(&(&f0 * dg.component(j))));
        }
        vector_l2(&c)
    };
    let g_half = homogeneous_norm(g, sigma / 2.0);
    let rhs = lambda(f, 1.0 - sigma)?.max_abs() * g_half + homogeneous_norm(f, d / 2.0 + 1.0 - sigma) * g_half;
    ratio(lhs, rhs)
}

/// Ratio for `‖[Λ^s, f]g‖₂`.
///
/// For `1 ≤ s < 2` the bound is `‖Λf‖_∞‖Λ^{s−1}g‖₂ + ‖∇f‖_∞‖Λ^{s−1}g‖₂ + ‖gΛ^s f‖₂`;
/// for `0 < s < 1` it is `‖Λ^{s₁}f‖_∞‖Λ^{s−s₁}g‖₂ + ‖gΛ^s f‖₂` with `s₁ = s/2`.
pub fn ratio_moser(f: &ScalarField, g: &ScalarField, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::Parameter(format!("order s = {s} outside (0, 2)")));
    }
    let lhs = l2(&commutator(f, s, g)?);
    let tail = l2(&dealias(&(g * &lambda(f, s)?)));
    let rhs = if s >= 1.0 {
        let g_norm = homogeneous_norm(g, s - 1.0);
        lambda(f, 1.0)?.max_abs() * g_norm + gradient(f).magnitude().max_abs() * g_norm + tail
    } else {
        let s1 = s / 2.0;
        lambda(f, s1)?.max_abs() * homogeneous_norm(g, s - s1) + tail
    };
    ratio(lhs, rhs)
}

/// `‖Λ^s f‖_∞ / (‖f‖_{Ḣ^{d/2+s+ε}}^{1/2} ‖f‖_{Ḣ^{d/2+s−ε}}^{1/2})`, `ε ∈ (0, d/2)`.
pub fn ratio_linfty_interp(f: &ScalarField, s: f64, eps: f64) -> Result<f64> {
    let d = f.grid().dim() as f64;
    if !(s > 0.0) {
        return Err(Error::Parameter(format!("order s = {s} must be positive")));
    }
    if !(eps > 0.0 && eps < d / 2.0) {
        return Err(Error::Parameter(format!("epsilon = {eps} outside (0, d/2)")));
    }
    let lhs = if is_constant(f) { 0.0 } else { lambda(f, s)?.max_abs() };
    let rhs = (homogeneous_norm(f, d / 2.0 + s + eps) * homogeneous_norm(f, d / 2.0 + s - eps)).sqrt();
    ratio(lhs, rhs)
}

/// `‖|f|^α‖_{Ḣ^s} / (‖f‖_∞^{α−1}‖f‖_{Ḣ^s})`, `α ≥ 1`, `0 ≤ s < α + 1/2`.
pub fn ratio_composition(f: &ScalarField, alpha: f64, s: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} must be >= 1")));
    }
    if !(s >= 0.0 && s < alpha + 0.5) {
        return Err(Error::Parameter(format!("order s = {s} outside [0, alpha + 1/2)")));
    }
    let power = f.map(|v| v.abs().powf(alpha));
    let lhs = if s > 0.0 && is_constant(&power) { 0.0 } else { homogeneous_norm(&dealias(&power), s) };
    let rhs = f.max_abs().powf(alpha - 1.0) * homogeneous_norm(f, s);
    ratio(lhs, rhs)
}

/// One instance of an inequality with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Inequality {
    KatoPonce { s: f64, exponents: KpExponents },
    Commutator { s: f64 },
    CommutatorRemainder { s: f64 },
    RieszCommutator { sigma: f64 },
    Moser { s: f64 },
    LinftyInterp { s: f64, epsilon: f64 },
    Composition { alpha: f64, s: f64 },
}

impl Inequality {
    pub fn label(&self) -> String {
        match self {
            Self::KatoPonce { s, exponents } => format!("kp_s{s}_r{}_p{}_q{}", exponents.r, exponents.p1, exponents.q1),
            Self::Commutator { s } => format!("commutator_s{s}"),
            Self::CommutatorRemainder { s } => format!("commutator_remainder_s{s}"),
            Self::RieszCommutator { sigma } => format!("riesz_commutator_sigma{sigma}"),
            Self::Moser { s } => format!("moser_s{s}"),
            Self::LinftyInterp { s, epsilon } => format!("linfty_s{s}_eps{epsilon}"),
            Self::Composition { alpha, s } => format!("composition_alpha{alpha}_s{s}"),
        }
    }

    pub fn ratio(&self, f: &ScalarField, g: &ScalarField) -> Result<f64> {
        match *self {
            Self::KatoPonce { s, ref exponents } => ratio_kp(f, g, s, exponents),
            Self::Commutator { s } => ratio_commutator(f, g, s),
            Self::CommutatorRemainder { s } => ratio_commutator_remainder(f, g, s),
            Self::RieszCommutator { sigma } => ratio_riesz_commutator(f, g, sigma),
            Self::Moser { s } => ratio_moser(f, g, s),
            Self::LinftyInterp { s, epsilon } => ratio_linfty_interp(f, s, epsilon),
            Self::Composition { alpha, s } => ratio_composition(f, alpha, s),
        }
    }

    /// The standard set of instances exercised by the `ineq` subcommand.
    pub fn battery(dim: usize) -> Vec<Self> {
        vec![
            Self::KatoPonce { s: 1.5, exponents: KpExponents::energy() },
            Self::KatoPonce { s: 1.5, exponents: KpExponents::hardy_littlewood_sobolev(dim, 0.5) },
            Self::Commutator { s: 1.5 },
            Self::CommutatorRemainder { s: 1.5 },
            Self::RieszCommutator { sigma: 0.5 },
            Self::Moser { s: 1.5 },
            Self::Moser { s: 0.5 },
            Self::LinftyInterp { s: 0.5, epsilon: 0.25 },
            Self::Composition { alpha: 1.3, s: 1.0 },
            Self::Composition { alpha: 2.0, s: 1.0 },
            Self::Composition { alpha: 2.5, s: 1.0 },
        ]
    }
}

/// Parameters of a random field ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub count: usize,
    /// Spectral decay: coefficient standard deviation `|m|^{−β}`.
    pub beta: f64,
    pub kmax: usize,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 128,
            length: 2.0 * std::f64::consts::PI,
            count: DEFAULT_COUNT,
            beta: DEFAULT_BETA,
            kmax: DEFAULT_KMAX,
            seed: 0,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 2.0) {
            return Err(Error::Parameter(format!("beta = {} must be >= 2", self.beta)));
        }
        if self.count == 0 || self.kmax == 0 {
            return Err(Error::Parameter("count and kmax must be positive".into()));
        }
        if 3 * self.kmax > self.n {
            return Err(Error::Parameter(format!(
                "kmax = {} exceeds the dealiasing band of n = {}",
                self.kmax, self.n
            )));
        }
        Ok(())
    }
}

/// Seeded mean-zero band-limited random fields, two per member.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    pub spec: EnsembleSpec,
    pub grid: Grid,
    pub fields: Vec<ScalarField>,
}

/// Gaussian random field with `max_j |m_j| ≤ kmax`, normalised to unit root mean square.
fn random_field(grid: &Grid, beta: f64, kmax: usize, rng: &mut ChaCha8Rng) -> ScalarField {
    let n = grid.n() as i64;
    let d = grid.dim();
    let k = kmax as i64;
    let total = grid.len() as f64;
    let mut coefficients = vec![Complex64::new(0.0, 0.0); grid.len()];
    let side = (2 * k + 1) as usize;
    for flat in 0..side.pow(d as u32) {
        let mut m = [0i64; 3];
        let mut rest = flat;
        for mj in m.iter_mut().take(d) {
            *mj = (rest % side) as i64 - k;
            rest /= side;
        }
        // one representative of each ±m pair: first nonzero entry positive
        match m.iter().take(d).find(|&&v| v != 0) {
            Some(&first) if first > 0 => {}
            _ => continue,
        }
        let norm = m.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        let scale = norm.powf(-beta) * total / 2.0;
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let c = Complex64::new(re, im) * scale;
        let index = |sign: i64| grid.ravel(&m.map(|v| (sign * v).rem_euclid(n) as usize));
        coefficients[index(1)] = c;
        coefficients[index(-1)] = c.conj();
    }
    let field = Spectrum::from_parts(grid.clone(), coefficients).to_field();
    let rms = homogeneous_norm(&field, 0.0) / grid.volume().sqrt();
    field.scale(1.0 / rms)
}

impl FieldEnsemble {
    /// Member `i` depends only on `(seed, i, β, kmax, L)`, not on `n`.
    pub fn generate(spec: &EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let grid = Grid::new(spec.dim, spec.n, spec.length)?;
        let fields = (0..2 * spec.count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(i as u64);
                random_field(&grid, spec.beta, spec.kmax, &mut rng)
            })
            .collect();
        Ok(Self { spec: spec.clone(), grid, fields })
    }

    pub fn len(&self) -> usize {
        self.fields.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn pair(&self, i: usize) -> (&ScalarField, &ScalarField) {
        (&self.fields[2 * i], &self.fields[2 * i + 1])
    }

    /// Ratio for every member, in member order.
    pub fn ratios(&self, inequality: &Inequality) -> Result<Vec<f64>> {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let (f, g) = self.pair(i);
                inequality.ratio(f, g)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioStats {
    pub max: f64,
    pub p95: f64,
    pub mean: f64,
}

/// Max, nearest-rank 95th percentile and mean.
pub fn ratio_stats(ratios: &[f64]) -> Result<RatioStats> {
    if ratios.is_empty() {
        return Err(Error::Degenerate("no ratios".into()));
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((0.95 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(RatioStats {
        max: sorted[sorted.len() - 1],
        p95: sorted[rank - 1],
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
    })
}

/// Summary of one inequality at a base resolution and at twice that resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySummary {
    pub label: String,
    pub coarse: RatioStats,
    pub fine: RatioStats,
    /// `|max_fine − max_coarse| / max_coarse`.
    pub resolution_delta: f64,
}

impl StabilitySummary {
    pub fn stable(&self, limit: f64) -> bool {
        self.resolution_delta < limit
    }
}

/// Per-inequality summaries plus the raw member ratios at `n` and `2n`.
#[derive(Debug, Clone)]
pub struct ResolutionStudy {
    pub summaries: Vec<StabilitySummary>,
    pub coarse: Vec<Vec<f64>>,
    pub fine: Vec<Vec<f64>>,
}

/// Runs `inequalities` on the ensemble of `spec` and on its `2n` twin.
pub fn resolution_study(spec: &EnsembleSpec, inequalities: &[Inequality]) -> Result<ResolutionStudy> {
    let coarse = FieldEnsemble::generate(spec)?;
    let fine = FieldEnsemble::generate(&EnsembleSpec { n: 2 * spec.n, ..spec.clone() })?;
    let mut summaries = Vec::new();
    let mut coarse_all = Vec::new();
    let mut fine_all = Vec::new();
    for ineq in inequalities {
        let rc = coarse.ratios(ineq)?;
        let rf = fine.ratios(ineq)?;
        let sc = ratio_stats(&rc)?;
        let sf = ratio_stats(&rf)?;
        let delta = if sc.max == 0.0 { (sf.max - sc.max).abs() } else { (sf.max - sc.max).abs() / sc.max };
        summaries.push(StabilitySummary { label: ineq.label(), coarse: sc, fine: sf, resolution_delta: delta });
        coarse_all.push(rc);
        fine_all.push(rf);
    }
    Ok(ResolutionStudy { summaries, coarse: coarse_all, fine: fine_all })
}
