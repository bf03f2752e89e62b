//! Right-hand sides of the factorisation bound, the two intermediate estimates, the
//! Lieb-Robinson bound and the surface-energy bound, with the matching measured left-hand
//! sides.

use serde::{Deserialize, Serialize};

use crate::decay::{Constant, DecayConstants, DecayProfile};
use crate::dynamics::{self, CutSetup, IntegratorSettings, TrajectoryKind};
use crate::error::{Error, Result};
use crate::geometry::{self, Lattice, Region};
use crate::interactions::{self, embed, InteractionFamily, VelocityData};
use crate::linalg::{self, spectral_norm, CMat};

/// Default slack on every `lhs ≤ rhs` comparison.
pub const DEFAULT_SLACK: f64 = 1e-6;

/// Cutoff for `ζ` when the tail has no closed form.
pub const ZETA_CUTOFF: u32 = 20_000;

/// Every constant a bound evaluation consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `|∂X|`
    pub boundary_size: usize,
    /// `‖Ψ‖_ξ`
    pub psi_norm: f64,
    pub norm_f: Constant,
    pub norm_fxi: Constant,
    pub conv_xi: Constant,
    pub g: Constant,
    pub dimension: u32,
    pub v_xi: f64,
    pub r: u32,
    /// `|t − s|`
    pub dt: f64,
    /// `ζ(⌊R/2⌋)`
    pub zeta_half: f64,
    /// `ξ(⌊R/2⌋)`
    pub xi_half: f64,
    /// `G² ‖F_ξ‖ / C_ξ`
    pub kappa: f64,
}

impl BoundInputs {
    pub fn new(
        boundary_size: usize,
        constants: &DecayConstants,
        velocity: &VelocityData,
        profile: &DecayProfile,
        r: u32,
        dt: f64,
    ) -> Self {
        let half = r / 2;
        Self {
            boundary_size,
            psi_norm: velocity.psi_norm,
            norm_f: constants.norm_f,
            norm_fxi: constants.norm_fxi,
            conv_xi: constants.conv_xi,
            g: constants.g,
            dimension: constants.dimension,
            v_xi: velocity.v_xi,
            r,
            dt: dt.abs(),
            zeta_half: profile.zeta(half, ZETA_CUTOFF).value,
            xi_half: profile.xi(half as f64),
            kappa: kappa(constants.g.value, constants.norm_fxi.value, constants.conv_xi.value),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt.abs();
        self
    }

    /// `⌊R/2⌋`
    pub fn half(&self) -> f64 {
        (self.r / 2) as f64
    }

    /// `e^{v_ξ |t−s|} − 1`
    pub fn growth(&self) -> f64 {
        (self.v_xi * self.dt).exp_m1()
    }
}

pub fn kappa(g: f64, norm_fxi: f64, conv_xi: f64) -> f64 {
    g * g * norm_fxi / conv_xi
}

/// `|∂X| ‖Ψ‖_ξ ‖F‖ |t−s| [2ζ(R/2) + |∂X| κ (R/2)^{2d} ξ(R/2) (e^{v_ξ|t−s|} − 1)]`
pub fn theorem_rhs(b: &BoundInputs) -> f64 {
    let collar = b.boundary_size as f64 * b.kappa * b.half().powi(2 * b.dimension as i32) * b.xi_half * b.growth();
    b.boundary_size as f64 * b.psi_norm * b.norm_f.value * b.dt * (2.0 * b.zeta_half + collar)
}

/// `2 |∂X| ‖Ψ‖_ξ ‖F‖ ζ(R/2)`
pub fn claim1_rhs(b: &BoundInputs) -> f64 {
    2.0 * b.boundary_size as f64 * b.psi_norm * b.norm_f.value * b.zeta_half
}

/// `(G ‖F‖ / C_ξ) ‖A‖ |∂X| (R/2)^d ξ(R/2) (e^{v_ξ|r−s|} − 1)`, with `b.dt = |r − s|`.
pub fn claim2_rhs(b: &BoundInputs, a_norm: f64) -> f64 {
    b.g.value * b.norm_f.value / b.conv_xi.value
        * a_norm
        * b.boundary_size as f64
        * b.half().powi(b.dimension as i32)
        * b.xi_half
        * b.growth()
}

/// Both surface-energy bounds: `|∂_{R/2}X| ‖F_ξ‖ ‖Ψ‖_ξ` and `G ‖F_ξ‖ ‖Ψ‖_ξ (R/2)^d |∂X|`.
pub fn snorm_rhs(b: &BoundInputs, half_annulus_size: usize) -> (f64, f64) {
    let tight = half_annulus_size as f64 * b.norm_fxi.value * b.psi_norm;
    let g_form = b.g.value * b.norm_fxi.value * b.psi_norm * b.half().powi(b.dimension as i32) * b.boundary_size as f64;
    (tight, g_form)
}

/// Sample times for a `sup_t`: the single time `from` for static families, else a uniform grid.
pub fn sup_grid(family: &InteractionFamily, from: f64, to: f64) -> Vec<f64> {
    if family.is_static() || from == to {
        return vec![from];
    }
    let n = family.time_grid();
    (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect()
}

/// `max_t ‖K(t) + S(R, t)‖` over `times`.
pub fn claim1_lhs(setup: &CutSetup, r: u32, times: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in times {
        let d = interactions::crossing_defect(&setup.family, &setup.lattice, &setup.x, r, &setup.volume, t)?;
        worst = worst.max(spectral_norm(&d)?);
    }
    Ok(worst)
}

/// `max_t ‖S(R, t)‖` over `times`, evaluated on the collar where `S` lives.
pub fn snorm_lhs(setup: &CutSetup, r: u32, times: &[f64]) -> Result<f64> {
    let s = interactions::surface_hamiltonian(&setup.family, &setup.lattice, &setup.x, r, &setup.volume)?;
    let mut worst = 0.0f64;
    for &t in times {
        setup.family.check_time(t)?;
        worst = worst.max(spectral_norm(&s.eval(t))?);
    }
    Ok(worst)
}

/// Measured `‖τ_Λ^{r,s}(A) − τ_{∂_R X}^{r,s}(A)‖` for `A` supported in `∂_{⌊R/2⌋} X`.
pub fn claim2_lhs(
    setup: &CutSetup,
    a: &CMat,
    a_support: &Region,
    r: u32,
    s: f64,
    r_time: f64,
    settings: &IntegratorSettings,
) -> Result<f64> {
    setup.check_hypotheses(r)?;
    let annulus = geometry::annulus(&setup.lattice, &setup.x, r);
    let full = setup.cocycle(&setup.volume, s, r_time, settings, TrajectoryKind::Full)?;
    let patch = setup.cocycle(&annulus, s, r_time, settings, TrajectoryKind::Patch)?;
    claim2_from_cocycles(setup, a, a_support, r, full.last(), patch.last())
}

/// [`claim2_lhs`] given `U_Λ(r, s)` and `U_{∂_R X}(r, s)`.
pub fn claim2_from_cocycles(
    setup: &CutSetup,
    a: &CMat,
    a_support: &Region,
    r: u32,
    u_full: &CMat,
    u_patch: &CMat,
) -> Result<f64> {
    let collar = geometry::annulus(&setup.lattice, &setup.x, r / 2);
    if !a_support.is_subset(&collar) {
        return Err(Error::SupportViolation { support: a_support.as_slice().to_vec(), allowed: collar.as_slice().to_vec() });
    }
    let annulus = geometry::annulus(&setup.lattice, &setup.x, r);
    let dims = setup.family.site_dims();
    let a_full = embed(a, a_support, &setup.volume, dims)?;
    let a_patch = embed(a, a_support, &annulus, dims)?;
    let evolved_full = dynamics::conjugate(u_full, &a_full, dynamics::Conjugation::Heisenberg)?;
    let evolved_patch = dynamics::conjugate(u_patch, &a_patch, dynamics::Conjugation::Heisenberg)?;
    let lifted = embed(&evolved_patch, &annulus, &setup.volume, dims)?;
    spectral_norm(&(evolved_full - lifted))
}

/// `(2‖A‖‖B‖/C_ξ) min[1, g_ξ(t−s) Σ_{x∈X} Σ_{y∈Y} F_ξ(d(x,y))]`.
#[allow(clippy::too_many_arguments)]
pub fn lr_rhs(
    profile: &DecayProfile,
    lattice: &Lattice,
    conv_xi: f64,
    v_xi: f64,
    a_support: &Region,
    b_support: &Region,
    a_norm: f64,
    b_norm: f64,
    dt: f64,
) -> f64 {
    let separated = lattice.set_distance(a_support, b_support) > 0;
    let growth = if separated { (v_xi * dt.abs()).exp_m1() } else { (v_xi * dt.abs()).exp() };
    let mut weight = 0.0;
    for x in a_support.iter() {
        for y in b_support.iter() {
            weight += profile.f_xi_at(lattice.distance(x, y));
        }
    }
    2.0 * a_norm * b_norm / conv_xi * (growth * weight).min(1.0)
}

/// Measured `‖[τ_Λ^{t,s}(A), B]‖`.
#[allow(clippy::too_many_arguments)]
pub fn lr_lhs(
    setup: &CutSetup,
    a: &CMat,
    a_support: &Region,
    b: &CMat,
    b_support: &Region,
    s: f64,
    t: f64,
    settings: &IntegratorSettings,
) -> Result<f64> {
    let full = setup.cocycle(&setup.volume, s, t, settings, TrajectoryKind::Full)?;
    lr_from_cocycle(setup, a, a_support, b, b_support, full.last())
}

/// [`lr_lhs`] given `U_Λ(t, s)`.
pub fn lr_from_cocycle(
    setup: &CutSetup,
    a: &CMat,
    a_support: &Region,
    b: &CMat,
    b_support: &Region,
    u_full: &CMat,
) -> Result<f64> {
    let dims = setup.family.site_dims();
    let a_full = embed(a, a_support, &setup.volume, dims)?;
    let b_full = embed(b, b_support, &setup.volume, dims)?;
    let evolved = dynamics::conjugate(u_full, &a_full, dynamics::Conjugation::Heisenberg)?;
    spectral_norm(&linalg::commutator(&evolved, &b_full))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Theorem,
    Claim1,
    Claim2,
    LiebRobinson,
    SurfaceNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: BoundKind,
    pub lhs_measured: f64,
    pub rhs_value: f64,
    pub inputs: BoundInputs,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(name: BoundKind, lhs: f64, rhs: f64, inputs: BoundInputs, slack: f64) -> Self {
        Self { name, lhs_measured: lhs, rhs_value: rhs, inputs, satisfied: lhs <= rhs + slack }
    }
}
