//! Unitary cocycles: the full and patch evolutions, the surface cocycles `Ũ` (right) and
//! `Û*` (left), conjugations, and the factorisation error itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Lattice, Region};
use crate::interactions::{self, embed, embed_ordered, InteractionFamily, RegionHamiltonian};
use crate::linalg::{self, c, CMat};

pub use crate::linalg::spectral_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// One exponential of the midpoint generator per step (second-order Magnus).
    Midpoint,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorSettings {
    pub scheme: Scheme,
    pub steps_per_unit_time: u32,
    pub unitarity_tolerance: f64,
    /// Polar re-unitarisation after every step.
    pub reproject: bool,
    /// Keep every intermediate unitary instead of only the endpoints.
    pub record_path: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            scheme: Scheme::Midpoint,
            steps_per_unit_time: 256,
            unitarity_tolerance: 1e-10,
            reproject: false,
            record_path: false,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_unit_time < 16 {
            return Err(Error::InvalidArgument(format!(
                "steps_per_unit_time must be at least 16, got {}",
                self.steps_per_unit_time
            )));
        }
        if !(self.unitarity_tolerance > 0.0) {
            return Err(Error::InvalidArgument("unitarity_tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn with_steps(mut self, steps_per_unit_time: u32) -> Self {
        self.steps_per_unit_time = steps_per_unit_time;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Uniform grid from `from` to `to`: step count and signed step.
    fn grid(&self, from: f64, to: f64) -> (usize, f64) {
        let span = (to - from).abs();
        if span == 0.0 {
            return (0, 0.0);
        }
        let n = ((span * self.steps_per_unit_time as f64).ceil() as usize).max(1);
        (n, (to - from) / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Full,
    Patch,
    SurfaceRight,
    SurfaceLeft,
}

/// A gridded unitary path. Forward kinds hold `U(τ_k, s)`; the left surface kind holds
/// `Û(t, τ_k)*` with the grid running from `t` down to `s`.
#[derive(Debug, Clone)]
pub struct CocycleTrajectory {
    pub kind: TrajectoryKind,
    pub s: f64,
    pub t: f64,
    pub grid: Vec<f64>,
    pub unitaries: Vec<CMat>,
    pub unitarity_drift: f64,
    pub step_count: usize,
}

impl CocycleTrajectory {
    /// `U(t, s)` (respectively `Û(t, s)*`).
    pub fn last(&self) -> &CMat {
        self.unitaries.last().expect("trajectory always holds its start point")
    }
}

/// A time-dependent Hermitian generator.
pub trait Generator {
    fn dim(&self) -> usize;
    fn at(&self, t: f64) -> CMat;
    fn is_static(&self) -> bool {
        false
    }
    /// Times outside `[-T, T]` are rejected when a horizon is known.
    fn horizon(&self) -> Option<f64> {
        None
    }
}

impl Generator for RegionHamiltonian {
    fn dim(&self) -> usize {
        RegionHamiltonian::dim(self)
    }

    fn at(&self, t: f64) -> CMat {
        self.eval(t)
    }

    fn is_static(&self) -> bool {
        RegionHamiltonian::is_static(self)
    }
}

/// A generator given by a closure.
pub struct FnGenerator<F> {
    dim: usize,
    f: F,
    is_static: bool,
}

impl<F: Fn(f64) -> CMat> FnGenerator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f, is_static: false }
    }

    pub fn constant(dim: usize, f: F) -> Self {
        Self { dim, f, is_static: true }
    }
}

impl<F: Fn(f64) -> CMat> Generator for FnGenerator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn at(&self, t: f64) -> CMat {
        (self.f)(t)
    }

    fn is_static(&self) -> bool {
        self.is_static
    }
}

/// Horizon-checked wrapper used by the family-based pipelines.
struct Horizoned<'a> {
    inner: &'a RegionHamiltonian,
    horizon: f64,
}

impl Generator for Horizoned<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn at(&self, t: f64) -> CMat {
        self.inner.eval(t)
    }

    fn is_static(&self) -> bool {
        self.inner.is_static()
    }

    fn horizon(&self) -> Option<f64> {
        Some(self.horizon)
    }
}

fn check_times(horizon: Option<f64>, times: &[f64]) -> Result<()> {
    if let Some(h) = horizon {
        for &t in times {
            if !(t.abs() <= h * (1.0 + 1e-12)) {
                return Err(Error::TimeOutOfRange { t, horizon: h });
            }
        }
    }
    Ok(())
}

fn minus_i(m: &CMat) -> CMat {
    m * c(0.0, -1.0)
}

/// Records intermediate points and tracks unitarity drift.
struct Recorder {
    keep_all: bool,
    grid: Vec<f64>,
    unitaries: Vec<CMat>,
    drift: f64,
}

impl Recorder {
    fn new(keep_all: bool, start: f64, dim: usize) -> Self {
        Self { keep_all, grid: vec![start], unitaries: vec![linalg::identity(dim)], drift: 0.0 }
    }

    fn push(&mut self, time: f64, u: &CMat, last: bool) {
        if self.keep_all || last {
            self.drift = self.drift.max(linalg::unitarity_defect(u));
            self.grid.push(time);
            self.unitaries.push(u.clone());
        }
    }

    fn finish(self, kind: TrajectoryKind, s: f64, t: f64, steps: usize, tol: f64) -> Result<CocycleTrajectory> {
        if self.drift > tol {
            return Err(Error::UnitarityDrift { drift: self.drift, tolerance: tol });
        }
        Ok(CocycleTrajectory {
            kind,
            s,
            t,
            grid: self.grid,
            unitaries: self.unitaries,
            unitarity_drift: self.drift,
            step_count: steps,
        })
    }
}

/// Solves `i dU/dt = H(t) U`, `U(s, s) = 1`. Backward integration (`t < s`) uses a negative step.
pub fn integrate_cocycle(
    generator: &dyn Generator,
    s: f64,
    t: f64,
    settings: &IntegratorSettings,
    kind: TrajectoryKind,
) -> Result<CocycleTrajectory> {
    settings.validate()?;
    check_times(generator.horizon(), &[s, t])?;
    let dim = generator.dim();
    let (n, dt) = settings.grid(s, t);
    let mut u = linalg::identity(dim);
    let mut rec = Recorder::new(settings.record_path, s, dim);

    let static_step = match (settings.scheme, generator.is_static() && n > 0) {
        (Scheme::Midpoint, true) => Some(linalg::expm_hermitian(&generator.at(s), dt)),
        _ => None,
    };
    let static_h = match (settings.scheme, generator.is_static() && n > 0) {
        (Scheme::Rk4, true) => Some(generator.at(s)),
        _ => None,
    };

    for k in 0..n {
        let tau = s + k as f64 * dt;
        u = match settings.scheme {
            Scheme::Midpoint => match &static_step {
                Some(step) => linalg::mul(step, &u),
                None => linalg::mul(&linalg::expm_hermitian(&generator.at(tau + 0.5 * dt), dt), &u),
            },
            Scheme::Rk4 => {
                let h_at = |time: f64| match &static_h {
                    Some(h) => h.clone(),
                    None => generator.at(time),
                };
                let h0 = h_at(tau);
                let hm = h_at(tau + 0.5 * dt);
                let h1 = h_at(tau + dt);
                let f = |h: &CMat, x: &CMat| minus_i(&linalg::mul(h, x));
                let k1 = f(&h0, &u);
                let k2 = f(&hm, &(&u + &k1 * c(0.5 * dt, 0.0)));
                let k3 = f(&hm, &(&u + &k2 * c(0.5 * dt, 0.0)));
                let k4 = f(&h1, &(&u + &k3 * c(dt, 0.0)));
                &u + (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0)
            }
        };
        if settings.reproject {
            u = linalg::reproject_unitary(&u);
        }
        let time = if k + 1 == n { t } else { s + (k + 1) as f64 * dt };
        rec.push(time, &u, k + 1 == n);
    }
    rec.finish(kind, s, t, n, settings.unitarity_tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conjugation {
    /// `U† A U`
    Heisenberg,
    /// `U A U†`
    Adjoint,
}

pub fn conjugate(u: &CMat, a: &CMat, direction: Conjugation) -> Result<CMat> {
    if u.nrows() != a.nrows() || u.ncols() != a.ncols() || u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), got: a.nrows() });
    }
    Ok(match direction {
        Conjugation::Heisenberg => linalg::mul3(&u.adjoint(), a, u),
        Conjugation::Adjoint => linalg::mul3(u, a, &u.adjoint()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `(U_X ⊗ U_{Λ∖X}) Ũ*`
    Right,
    /// `Û* (U_X ⊗ U_{Λ∖X})`
    Left,
}

/// A lattice, an interaction family, a region `X` and an enclosing volume `Λ`.
#[derive(Debug, Clone)]
pub struct CutSetup {
    pub lattice: Lattice,
    pub family: InteractionFamily,
    pub x: Region,
    pub volume: Region,
}

impl CutSetup {
    /// `Λ` defaults to the whole lattice.
    pub fn new(lattice: Lattice, family: InteractionFamily, x: Region) -> Self {
        let volume = lattice.all();
        Self { lattice, family, x, volume }
    }

    pub fn with_volume(mut self, volume: Region) -> Self {
        self.volume = volume;
        self
    }

    pub fn complement(&self) -> Region {
        self.volume.difference(&self.x)
    }

    /// Theorem hypotheses: proper cut, non-increasing shells, `X̄^R ⊆ Λ`, `R ≥ 1`.
    pub fn check_hypotheses(&self, r: u32) -> Result<()> {
        if self.x.is_empty() || self.complement().is_empty() {
            return Err(Error::BoundaryUndefined);
        }
        let shells = geometry::shell_profile(&self.lattice, &self.x)?;
        if !shells.monotone {
            return Err(Error::ShellsNotMonotone(shells.sizes));
        }
        interactions::check_collar_fits(&self.lattice, &self.x, r, &self.volume)
    }

    fn hamiltonian(&self, region: &Region) -> Result<RegionHamiltonian> {
        RegionHamiltonian::new(&self.family, region)
    }

    /// `U_Y(t, s)` for any region `Y ⊆ Λ`.
    pub fn cocycle(
        &self,
        region: &Region,
        s: f64,
        t: f64,
        settings: &IntegratorSettings,
        kind: TrajectoryKind,
    ) -> Result<CocycleTrajectory> {
        let h = self.hamiltonian(region)?;
        let g = Horizoned { inner: &h, horizon: self.family.horizon() };
        integrate_cocycle(&g, s, t, settings, kind)
    }
}

/// `Ũ_{∂_R X}(·, s)` (right) or `Û_{∂_R X}(t, ·)*` (left) on `∂_R X`. The midpoint scheme
/// composes the patch cocycle with the cocycle of `H_{∂_R X} − S`; RK4 integrates the defining
/// equation with the patch cocycle co-evolved on the same grid.
pub fn integrate_surface_cocycle(
    setup: &CutSetup,
    r: u32,
    s: f64,
    t: f64,
    side: Side,
    settings: &IntegratorSettings,
) -> Result<CocycleTrajectory> {
    settings.validate()?;
    setup.check_hypotheses(r)?;
    let family = &setup.family;
    check_times(Some(family.horizon()), &[s, t])?;
    let annulus = geometry::annulus(&setup.lattice, &setup.x, r);
    let patch = RegionHamiltonian::new(family, &annulus)?;
    let surface_idx = interactions::surface_terms(family, &setup.lattice, &setup.x, r, &setup.volume);
    let dim = patch.dim();

    // the right variant runs τ from s to t; the left one runs its second argument from t to s
    let (from, to, kind) = match side {
        Side::Right => (s, t, TrajectoryKind::SurfaceRight),
        Side::Left => (t, s, TrajectoryKind::SurfaceLeft),
    };
    let (n, dt) = settings.grid(from, to);
    let mut rec = Recorder::new(settings.record_path, from, dim);
    if n == 0 {
        return rec.finish(kind, s, t, 0, settings.unitarity_tolerance);
    }

    match settings.scheme {
        Scheme::Midpoint => {
            // Ũ(τ, s) = U(τ, s)† U_{H−S}(τ, s) and Û(t, σ)* = U(σ, t)† U_{H−S}(σ, t): both are
            // products of ordinary cocycles on the grid from `from` to `to`
            let rest: Vec<usize> = (0..family.terms().len())
                .filter(|i| family.terms()[*i].support.is_subset(&annulus) && !surface_idx.contains(i))
                .collect();
            let reduced = RegionHamiltonian::from_terms(family, &annulus, &rest)?;
            let path = IntegratorSettings { record_path: settings.record_path, ..*settings };
            let a = integrate_cocycle(&patch, from, to, &path, TrajectoryKind::Patch)?;
            let b = integrate_cocycle(&reduced, from, to, &path, TrajectoryKind::Patch)?;
            for (k, (ua, ub)) in a.unitaries.iter().zip(&b.unitaries).enumerate().skip(1) {
                rec.push(a.grid[k], &linalg::mul(&ua.adjoint(), ub), k == a.unitaries.len() - 1);
            }
        }
        Scheme::Rk4 => {
            // the defining equations, co-integrated with the patch cocycle P
            let surface = RegionHamiltonian::from_terms(family, &annulus, &surface_idx)?;
            let mut p = linalg::identity(dim);
            let mut q = linalg::identity(dim);
            let i = c(0.0, 1.0);
            let deriv = |tau: f64, p: &CMat, q: &CMat| -> (CMat, CMat) {
                let h = patch.eval(tau);
                let sm = surface.eval(tau);
                match side {
                    // P' = -iHP, Q' = iP†SPQ
                    Side::Right => {
                        (minus_i(&linalg::mul(&h, p)), linalg::mul(&linalg::mul3(&p.adjoint(), &sm, p), q) * i)
                    }
                    // P' = iPH, Y' = iPSP†Y
                    Side::Left => {
                        (linalg::mul(p, &h) * i, linalg::mul(&linalg::mul3(p, &sm, &p.adjoint()), q) * i)
                    }
                }
            };
            for k in 0..n {
                let tau = from + k as f64 * dt;
                let h2 = c(0.5 * dt, 0.0);
                let (k1p, k1q) = deriv(tau, &p, &q);
                let (k2p, k2q) = deriv(tau + 0.5 * dt, &(&p + &k1p * h2), &(&q + &k1q * h2));
                let (k3p, k3q) = deriv(tau + 0.5 * dt, &(&p + &k2p * h2), &(&q + &k2q * h2));
                let (k4p, k4q) =
                    deriv(tau + dt, &(&p + &k3p * c(dt, 0.0)), &(&q + &k3q * c(dt, 0.0)));
                let w = c(dt / 6.0, 0.0);
                let two = c(2.0, 0.0);
                p += (k1p + k2p * two + k3p * two + k4p) * w;
                q += (k1q + k2q * two + k3q * two + k4q) * w;
                if settings.reproject {
                    q = linalg::reproject_unitary(&q);
                    p = linalg::reproject_unitary(&p);
                }
                let time = if k + 1 == n { to } else { from + (k + 1) as f64 * dt };
                rec.push(time, &q, k + 1 == n);
            }
        }
    }
    rec.finish(kind, s, t, n, settings.unitarity_tolerance)
}

/// Outcome of one factorisation measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationMeasurement {
    /// `‖U_Λ − (U_X⊗U_{Λ∖X}) Ũ*‖` (right) or `‖U_Λ − Û* (U_X⊗U_{Λ∖X})‖` (left).
    pub error: f64,
    /// The same quantity as `‖V* − Ũ*‖` (right) or `‖W* − Û*‖` (left).
    pub unitarity_form: f64,
    /// Largest unitarity drift over the four trajectories.
    pub unitarity_drift: f64,
    pub steps: usize,
}

impl FactorizationMeasurement {
    pub fn forms_gap(&self) -> f64 {
        (self.error - self.unitarity_form).abs()
    }
}

/// `(U_X ⊗ U_{Λ∖X})` reordered into `Λ`'s ascending factor order.
pub fn patch_product(setup: &CutSetup, u_x: &CMat, u_c: &CMat) -> Result<CMat> {
    let order: Vec<usize> = setup.x.iter().chain(setup.complement().iter()).collect();
    embed_ordered(&linalg::kron(u_x, u_c), &order, &setup.volume, setup.family.site_dims())
}

pub fn factorization_error(
    setup: &CutSetup,
    r: u32,
    s: f64,
    t: f64,
    side: Side,
    settings: &IntegratorSettings,
) -> Result<FactorizationMeasurement> {
    setup.check_hypotheses(r)?;
    let bulk = BulkCocycles::integrate(setup, s, t, settings)?;
    let surf = integrate_surface_cocycle(setup, r, s, t, side, settings)?;
    combine_factorization(setup, r, side, &bulk, &surf)
}

/// `U_Λ(t, s)` and the product `U_X(t, s) ⊗ U_{Λ∖X}(t, s)`; independent of `R` and the side.
#[derive(Debug, Clone)]
pub struct BulkCocycles {
    pub s: f64,
    pub t: f64,
    pub full: CMat,
    pub patch: CMat,
    pub unitarity_drift: f64,
    pub steps: usize,
}

impl BulkCocycles {
    pub fn integrate(setup: &CutSetup, s: f64, t: f64, settings: &IntegratorSettings) -> Result<Self> {
        let full = setup.cocycle(&setup.volume, s, t, settings, TrajectoryKind::Full)?;
        let ux = setup.cocycle(&setup.x, s, t, settings, TrajectoryKind::Patch)?;
        let uc = setup.cocycle(&setup.complement(), s, t, settings, TrajectoryKind::Patch)?;
        let patch = patch_product(setup, ux.last(), uc.last())?;
        let drift = [&full, &ux, &uc].iter().map(|tr| tr.unitarity_drift).fold(0.0, f64::max);
        Ok(Self { s, t, full: full.last().clone(), patch, unitarity_drift: drift, steps: full.step_count })
    }
}

/// The factorisation error from precomputed bulk cocycles and a surface trajectory over the
/// same interval.
pub fn combine_factorization(
    setup: &CutSetup,
    r: u32,
    side: Side,
    bulk: &BulkCocycles,
    surf: &CocycleTrajectory,
) -> Result<FactorizationMeasurement> {
    if surf.s != bulk.s || surf.t != bulk.t {
        return Err(Error::Inconsistent(format!(
            "surface cocycle covers [{}, {}] but the bulk cocycles cover [{}, {}]",
            surf.s, surf.t, bulk.s, bulk.t
        )));
    }
    let annulus = geometry::annulus(&setup.lattice, &setup.x, r);
    let site_dims = setup.family.site_dims();

    let u_full = &bulk.full;
    let patch = &bulk.patch;
    let surf_emb = embed(surf.last(), &annulus, &setup.volume, site_dims)?;
    let (approx, unitarity_form) = match side {
        Side::Right => {
            // Ũ* = surf†; V = U_Λ† (U_X ⊗ U_c)
            let v = linalg::mul(&u_full.adjoint(), patch);
            let approx = linalg::mul(patch, &surf_emb.adjoint());
            (approx, spectral_norm(&(v.adjoint() - surf_emb.adjoint()))?)
        }
        Side::Left => {
            // the left trajectory already holds Û*; W = (U_X ⊗ U_c) U_Λ†
            let w = linalg::mul(patch, &u_full.adjoint());
            let approx = linalg::mul(&surf_emb, patch);
            (approx, spectral_norm(&(w.adjoint() - &surf_emb))?)
        }
    };
    let error = spectral_norm(&(u_full - approx))?;
    Ok(FactorizationMeasurement {
        error,
        unitarity_form,
        unitarity_drift: bulk.unitarity_drift.max(surf.unitarity_drift),
        steps: bulk.steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactions::Coefficient;
    use crate::linalg::{identity, pauli_z};

    #[test]
    fn zero_generator_gives_identity() {
        let g = FnGenerator::constant(4, |_| CMat::zeros(4, 4));
        let tr = integrate_cocycle(&g, 0.0, 1.3, &IntegratorSettings::default(), TrajectoryKind::Full).unwrap();
        assert_eq!(tr.last(), &identity(4));
    }

    #[test]
    fn sigma_z_over_pi_is_minus_identity() {
        let g = FnGenerator::constant(2, |_| pauli_z());
        for scheme in [Scheme::Midpoint, Scheme::Rk4] {
            let st = IntegratorSettings::default().with_scheme(scheme);
            let tr = integrate_cocycle(&g, 0.0, std::f64::consts::PI, &st, TrajectoryKind::Full).unwrap();
            let diff = tr.last() + identity(2);
            assert!(spectral_norm(&diff).unwrap() <= 1e-10, "{scheme:?}");
        }
    }

    #[test]
    fn equal_endpoints_have_no_steps() {
        let g = FnGenerator::new(2, |t| pauli_z() * c(t, 0.0));
        let tr = integrate_cocycle(&g, 0.4, 0.4, &IntegratorSettings::default(), TrajectoryKind::Full).unwrap();
        assert_eq!(tr.step_count, 0);
        assert_eq!(tr.unitaries.len(), 1);
    }

    #[test]
    fn too_few_steps_rejected() {
        let g = FnGenerator::constant(2, |_| pauli_z());
        let st = IntegratorSettings::default().with_steps(8);
        assert!(integrate_cocycle(&g, 0.0, 1.0, &st, TrajectoryKind::Full).is_err());
    }

    #[test]
    fn drift_over_tolerance_is_reported() {
        let g = FnGenerator::constant(2, |_| pauli_z() * c(40.0, 0.0));
        let st = IntegratorSettings { scheme: Scheme::Rk4, steps_per_unit_time: 16, ..Default::default() };
        assert!(matches!(
            integrate_cocycle(&g, 0.0, 1.0, &st, TrajectoryKind::Full),
            Err(Error::UnitarityDrift { .. })
        ));
    }

    #[test]
    fn conjugations_invert_each_other() {
        let u = linalg::expm_hermitian(&(linalg::pauli_x() + pauli_z() * c(0.3, 0.0)), 0.7);
        let a = linalg::pauli_y();
        let there = conjugate(&u, &a, Conjugation::Heisenberg).unwrap();
        let back = conjugate(&u, &there, Conjugation::Adjoint).unwrap();
        assert!(spectral_norm(&(back - &a)).unwrap() < 1e-12);
        assert_eq!(conjugate(&identity(2), &a, Conjugation::Heisenberg).unwrap(), a);
        assert!(spectral_norm(&(conjugate(&u, &identity(2), Conjugation::Adjoint).unwrap() - identity(2))).unwrap() < 1e-14);
        assert!(conjugate(&u, &identity(4), Conjugation::Adjoint).is_err());
    }

    #[test]
    fn horizon_enforced() {
        let l = Lattice::path(2).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 1.0, Coefficient::default(), 0.5).unwrap();
        let setup = CutSetup::new(l.clone(), fam, Region::from_vertices([0]));
        let all = l.all();
        assert!(matches!(
            setup.cocycle(&all, 0.0, 0.8, &IntegratorSettings::default(), TrajectoryKind::Full),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn surface_cocycle_without_crossing_terms_is_identity() {
        let l = Lattice::path(4).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 0.0, Coefficient::default(), 1.0).unwrap();
        let setup = CutSetup::new(l, fam, Region::from_vertices([0, 1]));
        for side in [Side::Right, Side::Left] {
            let tr = integrate_surface_cocycle(&setup, 2, 0.0, 0.5, side, &IntegratorSettings::default()).unwrap();
            let gap = spectral_norm(&(tr.last() - identity(tr.last().nrows()))).unwrap();
            assert!(gap < 1e-11, "{side:?}: {gap:e}");
        }
    }

    #[test]
    fn equal_times_give_zero_error() {
        let l = Lattice::path(4).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 1.0, Coefficient::default(), 1.0).unwrap();
        let setup = CutSetup::new(l, fam, Region::from_vertices([0, 1]));
        for side in [Side::Right, Side::Left] {
            let m = factorization_error(&setup, 2, 0.3, 0.3, side, &IntegratorSettings::default()).unwrap();
            assert_eq!(m.error, 0.0);
        }
    }

    #[test]
    fn non_monotone_shells_block_factorisation() {
        let l = Lattice::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 1.0, Coefficient::default(), 1.0).unwrap();
        let setup = CutSetup::new(l, fam, Region::from_vertices([1, 2, 3, 4]));
        assert!(matches!(
            factorization_error(&setup, 1, 0.0, 0.1, Side::Right, &IntegratorSettings::default()),
            Err(Error::ShellsNotMonotone(_))
        ));
    }
}
