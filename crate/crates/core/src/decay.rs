//! Decay functions `F`, `ξ`, `F_ξ = F·ξ`, the tail sum `ζ`, and the lattice constants
//! `‖F‖`, `C_F`, `C_ξ`, `‖F_ξ‖`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Lattice, INFINITE};

/// The modulation `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum XiFamily {
    /// `ξ(r) = e^{−a r}`
    Exponential { a: f64 },
    /// `ξ(r) = e^{−a r^θ}`, `0 < θ ≤ 1`
    Stretched { a: f64, theta: f64 },
}

impl XiFamily {
    /// `ln ξ(r)`.
    pub fn log_value(&self, r: f64) -> f64 {
        match *self {
            XiFamily::Exponential { a } => -a * r,
            XiFamily::Stretched { a, theta } => -a * r.powf(theta),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.log_value(r).exp()
    }
}

/// The pair `(F, ξ)` with `F(r) = (1 + r)^{−p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub power: f64,
    pub xi: XiFamily,
    /// Value used for `F` at infinite (disconnected) distance.
    #[serde(default)]
    pub infinite_distance_value: f64,
}

impl DecayProfile {
    pub fn new(power: f64, xi: XiFamily) -> Self {
        Self { power, xi, infinite_distance_value: 0.0 }
    }

    pub fn exponential(power: f64, a: f64) -> Self {
        Self::new(power, XiFamily::Exponential { a })
    }

    pub fn check_parameters(&self) -> Result<(), ProfileViolation> {
        let bad = |what: &str| Err(ProfileViolation::Parameter(what.to_string()));
        if !(self.power > 0.0) {
            return bad("power p must be positive");
        }
        match self.xi {
            XiFamily::Exponential { a } if !(a > 0.0) => bad("exponential rate a must be positive"),
            XiFamily::Stretched { a, theta } if !(a > 0.0) || !(theta > 0.0 && theta <= 1.0) => {
                bad("stretched exponential needs a > 0 and 0 < θ ≤ 1")
            }
            _ => Ok(()),
        }
    }

    pub fn f(&self, r: f64) -> f64 {
        (1.0 + r).powf(-self.power)
    }

    pub fn xi(&self, r: f64) -> f64 {
        self.xi.value(r)
    }

    pub fn f_xi(&self, r: f64) -> f64 {
        self.f(r) * self.xi(r)
    }

    /// `F` at a hop distance, honouring the infinite-distance convention.
    pub fn f_at(&self, d: u32) -> f64 {
        if d == INFINITE {
            self.infinite_distance_value
        } else {
            self.f(d as f64)
        }
    }

    /// `F_ξ` at a hop distance; zero at infinite distance since `ξ` vanishes there.
    pub fn f_xi_at(&self, d: u32) -> f64 {
        if d == INFINITE {
            0.0
        } else {
            self.f_xi(d as f64)
        }
    }

    /// `ζ(R) = Σ_{r ≥ R+1} ξ(r)`.
    pub fn zeta(&self, r: u32, r_cutoff: u32) -> ZetaValue {
        zeta(self, r, r_cutoff)
    }
}

/// The first structural condition a candidate `ξ` fails on the validation grid.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum ProfileViolation {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("ξ not non-increasing: ξ({next}) > ξ({r})", next = r + 1)]
    NotNonIncreasing { r: u32 },
    #[error("logarithmic superadditivity: ξ({a}+{b}) < ξ({a})·ξ({b})")]
    NotSuperadditive { a: u32, b: u32 },
    #[error("superpolynomial decay probe: ξ(r)·r^{n} not decreasing between r_max/2 and r_max")]
    SlowDecay { n: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub r_max: u32,
    pub pairs_checked: usize,
    /// Pairs where `ξ(a+b) = ξ(a)ξ(b)` to rounding.
    pub equality_pairs: usize,
}

/// Relative slack for the superadditivity comparison; covers rounding in `exp`.
const SUPERADD_RTOL: f64 = 1e-12;

/// Grid validation of `ξ` on `{0, …, r_max}`.
pub fn validate_xi(xi: impl Fn(f64) -> f64, r_max: u32) -> Result<ValidationReport, ProfileViolation> {
    if r_max < 2 {
        return Err(ProfileViolation::Parameter("validation grid needs r_max ≥ 2".into()));
    }
    let values: Vec<f64> = (0..=2 * r_max).map(|r| xi(r as f64)).collect();
    for r in 0..r_max {
        if values[r as usize + 1] > values[r as usize] {
            return Err(ProfileViolation::NotNonIncreasing { r });
        }
    }
    let mut pairs = 0;
    let mut equality = 0;
    for a in 0..=r_max {
        for b in a..=r_max {
            let lhs = values[(a + b) as usize];
            let rhs = values[a as usize] * values[b as usize];
            if lhs < rhs * (1.0 - SUPERADD_RTOL) {
                return Err(ProfileViolation::NotSuperadditive { a, b });
            }
            if (lhs - rhs).abs() <= SUPERADD_RTOL * rhs.abs() {
                equality += 1;
            }
            pairs += 1;
        }
    }
    let full = r_max as f64;
    let half = (r_max / 2) as f64;
    for n in 1..=4 {
        if !(values[r_max as usize] * full.powi(n) < values[(r_max / 2) as usize] * half.powi(n)) {
            return Err(ProfileViolation::SlowDecay { n: n as u32 });
        }
    }
    Ok(ValidationReport { r_max, pairs_checked: pairs, equality_pairs: equality })
}

pub fn validate_profile(profile: &DecayProfile, r_max: u32) -> Result<ValidationReport, ProfileViolation> {
    profile.check_parameters()?;
    validate_xi(|r| profile.xi(r), r_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub value: f64,
    /// `true` when the tail was summed in closed form.
    pub closed_form: bool,
    /// Reported truncation error `ξ(r_cutoff)·r_cutoff`; zero for closed forms.
    pub truncation_error: f64,
}

pub fn zeta(profile: &DecayProfile, r: u32, r_cutoff: u32) -> ZetaValue {
    match profile.xi {
        XiFamily::Exponential { a } => {
            // geometric tail: e^{−a(R+1)} / (1 − e^{−a})
            let value = (-a * (r as f64 + 1.0)).exp() / -(-a).exp_m1();
            ZetaValue { value, closed_form: true, truncation_error: 0.0 }
        }
        XiFamily::Stretched { .. } => {
            let cutoff = r_cutoff.max(r + 1);
            // sum smallest terms first
            let value: f64 = (r + 1..=cutoff).rev().map(|k| profile.xi(k as f64)).sum();
            ZetaValue {
                value,
                closed_form: false,
                truncation_error: profile.xi(cutoff as f64) * cutoff as f64,
            }
        }
    }
}

/// Where a constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    LatticeComputed,
    UserSupplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
}

impl Constant {
    pub fn computed(value: f64) -> Self {
        Self { value, provenance: Provenance::LatticeComputed }
    }

    pub fn supplied(value: f64) -> Self {
        Self { value, provenance: Provenance::UserSupplied }
    }
}

/// `‖F‖`, `C_F`, `C_ξ`, `‖F_ξ‖`, the fat-boundary constant `G` and the dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub norm_f: Constant,
    pub conv_f: Constant,
    pub conv_xi: Constant,
    pub norm_fxi: Constant,
    pub g: Constant,
    pub dimension: u32,
}

/// Optional analytic replacements for lattice-computed constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantOverrides {
    pub norm_f: Option<f64>,
    pub conv_f: Option<f64>,
    pub conv_xi: Option<f64>,
    pub norm_fxi: Option<f64>,
    pub g: Option<f64>,
}

impl DecayConstants {
    pub fn with_overrides(mut self, o: &ConstantOverrides) -> Self {
        let apply = |slot: &mut Constant, v: Option<f64>| {
            if let Some(v) = v {
                *slot = Constant::supplied(v);
            }
        };
        apply(&mut self.norm_f, o.norm_f);
        apply(&mut self.conv_f, o.conv_f);
        apply(&mut self.conv_xi, o.conv_xi);
        apply(&mut self.norm_fxi, o.norm_fxi);
        apply(&mut self.g, o.g);
        self
    }
}

/// The four convolution constants as finite-lattice maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSums {
    pub norm_f: f64,
    pub conv_f: f64,
    pub conv_xi: f64,
    pub norm_fxi: f64,
}

/// `‖F‖ = max_x Σ_y F(d(x,y))`, `C_F = max_{x,z} Σ_y F(d(x,y))F(d(y,z))/F(d(x,z))`,
/// and the same with `F_ξ`.
pub fn lattice_sums(profile: &DecayProfile, lattice: &Lattice) -> LatticeSums {
    let n = lattice.vertex_count();
    let dist = lattice.distance_table();
    let mut norm_f = 0.0f64;
    let mut norm_fxi = 0.0f64;
    for row in dist {
        norm_f = norm_f.max(row.iter().map(|&d| profile.f_at(d)).sum());
        norm_fxi = norm_fxi.max(row.iter().map(|&d| profile.f_xi_at(d)).sum());
    }
    let mut conv_f = 0.0f64;
    let mut conv_xi = 0.0f64;
    for x in 0..n {
        for z in 0..n {
            let dxz = dist[x][z];
            if dxz == INFINITE {
                continue;
            }
            let fxz = profile.f_at(dxz);
            let mut sum_f = 0.0;
            let mut sum_xi = 0.0;
            for y in 0..n {
                let (dxy, dyz) = (dist[x][y], dist[y][z]);
                if dxy == INFINITE || dyz == INFINITE {
                    continue;
                }
                let f_quot = profile.f_at(dxy) * profile.f_at(dyz) / fxz;
                // ξ quotient in the log domain: exactly 1 on geodesics of the exponential family
                let log_q = profile.xi.log_value(dxy as f64) + profile.xi.log_value(dyz as f64)
                    - profile.xi.log_value(dxz as f64);
                sum_f += f_quot;
                sum_xi += f_quot * log_q.exp();
            }
            conv_f = conv_f.max(sum_f);
            conv_xi = conv_xi.max(sum_xi);
        }
    }
    LatticeSums { norm_f, conv_f, conv_xi, norm_fxi }
}

/// Lattice-computed constants; `g` and `dimension` come from the geometry.
pub fn lattice_constants(profile: &DecayProfile, lattice: &Lattice, g: f64, dimension: u32) -> DecayConstants {
    let s = lattice_sums(profile, lattice);
    DecayConstants {
        norm_f: Constant::computed(s.norm_f),
        conv_f: Constant::computed(s.conv_f),
        conv_xi: Constant::computed(s.conv_xi),
        norm_fxi: Constant::computed(s.norm_fxi),
        g: Constant::computed(g),
        dimension,
    }
}
