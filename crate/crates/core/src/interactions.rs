//! Interaction families `Ψ(Z, t)`, local Hamiltonians, the surface energy `S(R, t)`,
//! the crossing generator `K(t)` and the norm `‖Ψ‖_ξ`.

use serde::{Deserialize, Serialize};

use crate::decay::{DecayConstants, DecayProfile};
use crate::error::{Error, Result};
use crate::geometry::{self, Lattice, Region};
use crate::linalg::{self, c, CMat, MAX_DENSE_DIM};

/// Tolerance on `‖A − A†‖` (entry-wise) for term matrices.
pub const HERMITIAN_TOL: f64 = 1e-13;

/// Default number of points used for `sup_t` of non-affine coefficients.
pub const DEFAULT_TIME_GRID: usize = 201;

/// Scalar time dependence of a term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Coefficient {
    Constant { c: f64 },
    /// `c·t`
    Ramp { c: f64 },
    /// `c·sin(ωt + φ)`
    Sinusoid { c: f64, omega: f64, phi: f64 },
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::Constant { c: 1.0 }
    }
}

impl Coefficient {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Coefficient::Constant { c } => c,
            Coefficient::Ramp { c } => c * t,
            Coefficient::Sinusoid { c, omega, phi } => c * (omega * t + phi).sin(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Constant { .. })
    }

    /// `sup_{|t| ≤ horizon} |coefficient(t)|`; exact for constant and ramp, a uniform grid
    /// of `grid_points` (endpoints included) otherwise.
    pub fn sup_abs(&self, horizon: f64, grid_points: usize) -> f64 {
        match *self {
            Coefficient::Constant { c } => c.abs(),
            Coefficient::Ramp { c } => c.abs() * horizon,
            Coefficient::Sinusoid { .. } => {
                let n = grid_points.max(2);
                (0..n)
                    .map(|k| -horizon + 2.0 * horizon * k as f64 / (n - 1) as f64)
                    .map(|t| self.eval(t).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Coefficient::Constant { c } => Coefficient::Constant { c: c * factor },
            Coefficient::Ramp { c } => Coefficient::Ramp { c: c * factor },
            Coefficient::Sinusoid { c, omega, phi } => Coefficient::Sinusoid { c: c * factor, omega, phi },
        }
    }
}

/// `Ψ(Z, t) = coefficient(t) · matrix`, with `matrix` acting on `⊗_{x ∈ Z} H_x` in ascending
/// vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTerm {
    pub support: Region,
    pub matrix: CMat,
    pub coefficient: Coefficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionFamily {
    terms: Vec<InteractionTerm>,
    site_dims: Vec<usize>,
    horizon: f64,
    time_grid: usize,
}

impl InteractionFamily {
    pub fn new(site_dims: Vec<usize>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon T must be positive, got {horizon}")));
        }
        if let Some(&d) = site_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidArgument(format!("site dimension {d} < 2")));
        }
        Ok(Self { terms: Vec::new(), site_dims, horizon, time_grid: DEFAULT_TIME_GRID })
    }

    /// Empty family of qubits on every lattice vertex.
    pub fn qubits(lattice: &Lattice, horizon: f64) -> Result<Self> {
        Self::new(vec![2; lattice.vertex_count()], horizon)
    }

    pub fn with_time_grid(mut self, points: usize) -> Self {
        self.time_grid = points.max(2);
        self
    }

    pub fn push(&mut self, support: Region, matrix: CMat, coefficient: Coefficient) -> Result<()> {
        if let Some(v) = support.iter().find(|&v| v >= self.site_dims.len()) {
            return Err(Error::VertexOutOfRange { vertex: v, count: self.site_dims.len() });
        }
        if support.is_empty() {
            return Err(Error::InvalidArgument("interaction support must be nonempty".into()));
        }
        let expected = self.region_dim(&support);
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch { expected, got: matrix.nrows() });
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        self.terms.push(InteractionTerm { support, matrix, coefficient });
        Ok(())
    }

    /// Transverse-field Ising model `Σ_{⟨xy⟩} J σᶻσᶻ + Σ_x h σˣ`.
    pub fn tfim(lattice: &Lattice, h: f64, j: f64, coefficient: Coefficient, horizon: f64) -> Result<Self> {
        let mut fam = Self::qubits(lattice, horizon)?;
        let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z()) * c(j, 0.0);
        for (a, b) in lattice.edges() {
            fam.push(Region::from_vertices([a, b]), zz.clone(), coefficient)?;
        }
        if h != 0.0 {
            for v in 0..lattice.vertex_count() {
                fam.push(Region::from_vertices([v]), linalg::pauli_x() * c(h, 0.0), coefficient)?;
            }
        }
        Ok(fam)
    }

    /// XYZ Heisenberg model `Σ_{⟨xy⟩} Jx σˣσˣ + Jy σʸσʸ + Jz σᶻσᶻ`.
    pub fn heisenberg(
        lattice: &Lattice,
        jx: f64,
        jy: f64,
        jz: f64,
        coefficient: Coefficient,
        horizon: f64,
    ) -> Result<Self> {
        let mut fam = Self::qubits(lattice, horizon)?;
        let bond = linalg::kron(&linalg::pauli_x(), &linalg::pauli_x()) * c(jx, 0.0)
            + linalg::kron(&linalg::pauli_y(), &linalg::pauli_y()) * c(jy, 0.0)
            + linalg::kron(&linalg::pauli_z(), &linalg::pauli_z()) * c(jz, 0.0);
        for (a, b) in lattice.edges() {
            fam.push(Region::from_vertices([a, b]), bond.clone(), coefficient)?;
        }
        Ok(fam)
    }

    /// All-pairs `Σ_{x<y} J d(x,y)^{−α} σᶻσᶻ + Σ_x h σˣ` over connected pairs.
    pub fn long_range(
        lattice: &Lattice,
        j: f64,
        alpha: f64,
        h: f64,
        coefficient: Coefficient,
        horizon: f64,
    ) -> Result<Self> {
        let mut fam = Self::qubits(lattice, horizon)?;
        let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z());
        let n = lattice.vertex_count();
        for a in 0..n {
            for b in a + 1..n {
                let d = lattice.distance(a, b);
                if d == geometry::INFINITE {
                    continue;
                }
                let strength = j * (d as f64).powf(-alpha);
                fam.push(Region::from_vertices([a, b]), &zz * c(strength, 0.0), coefficient)?;
            }
        }
        if h != 0.0 {
            for v in 0..n {
                fam.push(Region::from_vertices([v]), linalg::pauli_x() * c(h, 0.0), coefficient)?;
            }
        }
        Ok(fam)
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        &self.terms
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn time_grid(&self) -> usize {
        self.time_grid
    }

    pub fn region_dim(&self, region: &Region) -> usize {
        region.iter().map(|v| self.site_dims[v]).product()
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_constant())
    }

    /// Pairs of term indices with identical support and matrix.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.terms.iter().enumerate() {
            for (j, b) in self.terms.iter().enumerate().skip(i + 1) {
                if a.support == b.support && a.matrix == b.matrix {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `sup_t ‖Ψ(Z, t)‖` for term `index`.
    pub fn term_sup_norm(&self, index: usize) -> f64 {
        let term = &self.terms[index];
        linalg::dense_spectral_norm(&term.matrix) * term.coefficient.sup_abs(self.horizon, self.time_grid)
    }

    /// Every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for term in &mut out.terms {
            term.coefficient = term.coefficient.scaled(factor);
        }
        out
    }

    /// The family with every term crossing the cut of `x` inside `volume` removed.
    pub fn decoupled(&self, x: &Region, volume: &Region) -> Self {
        let mut out = self.clone();
        out.terms.retain(|t| !geometry::is_crossing(&t.support, x, volume));
        out
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(t.abs() <= self.horizon * (1.0 + 1e-12)) {
            return Err(Error::TimeOutOfRange { t, horizon: self.horizon });
        }
        Ok(())
    }

    fn check_dim(&self, region: &Region) -> Result<usize> {
        let mut dim: usize = 1;
        for v in region.iter() {
            dim = dim.saturating_mul(self.site_dims[v]);
        }
        if dim > MAX_DENSE_DIM {
            return Err(Error::DimensionCap { dim, cap: MAX_DENSE_DIM });
        }
        Ok(dim)
    }
}

/// Embeds an operator whose tensor factors follow `order` into the space of `volume`
/// (ascending vertex order), acting as the identity on the remaining factors.
pub fn embed_ordered(op: &CMat, order: &[usize], volume: &Region, site_dims: &[usize]) -> Result<CMat> {
    let vol: Vec<usize> = volume.iter().collect();
    let dims: Vec<usize> = vol.iter().map(|&v| site_dims[v]).collect();
    let total: usize = dims.iter().product();
    let mut strides = vec![1usize; vol.len()];
    for i in (0..vol.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut positions = Vec::with_capacity(order.len());
    for &v in order {
        match vol.binary_search(&v) {
            Ok(p) => positions.push(p),
            Err(_) => {
                return Err(Error::NotContained(format!("vertex {v} not in volume {vol:?}")));
            }
        }
    }
    let op_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
    let op_dim: usize = op_dims.iter().product();
    if op.nrows() != op_dim || op.ncols() != op_dim {
        return Err(Error::DimensionMismatch { expected: op_dim, got: op.nrows() });
    }

    // offset in the volume index contributed by each operator basis state
    let mut offsets = vec![0usize; op_dim];
    for (b, off) in offsets.iter_mut().enumerate() {
        let mut rem = b;
        for k in (0..positions.len()).rev() {
            let digit = rem % op_dims[k];
            rem /= op_dims[k];
            *off += digit * strides[positions[k]];
        }
    }
    let mut out = CMat::zeros(total, total);
    for i in 0..total {
        let mut a = 0usize;
        let mut sub = 0usize;
        for (k, &p) in positions.iter().enumerate() {
            let digit = (i / strides[p]) % dims[p];
            a = a * op_dims[k] + digit;
            sub += digit * strides[p];
        }
        let base = i - sub;
        for (b, &off) in offsets.iter().enumerate() {
            let v = op[(a, b)];
            if v != c(0.0, 0.0) {
                out[(i, base + off)] = v;
            }
        }
    }
    Ok(out)
}

/// Embeds `op` acting on `support` (ascending order) into `volume`.
pub fn embed(op: &CMat, support: &Region, volume: &Region, site_dims: &[usize]) -> Result<CMat> {
    embed_ordered(op, support.as_slice(), volume, site_dims)
}

/// A time-dependent Hamiltonian on a fixed region, with term matrices pre-embedded and
/// grouped by coefficient.
#[derive(Debug, Clone)]
pub struct RegionHamiltonian {
    region: Region,
    dim: usize,
    horizon: f64,
    parts: Vec<(Coefficient, CMat)>,
}

impl RegionHamiltonian {
    /// Sum of the selected terms (all of which must lie in `region`).
    pub fn from_terms(family: &InteractionFamily, region: &Region, indices: &[usize]) -> Result<Self> {
        let dim = family.check_dim(region)?;
        let mut parts: Vec<(Coefficient, CMat)> = Vec::new();
        for &i in indices {
            let term = &family.terms[i];
            if !term.support.is_subset(region) {
                return Err(Error::NotContained(format!(
                    "term support {:?} not in region {:?}",
                    term.support.as_slice(),
                    region.as_slice()
                )));
            }
            let m = embed(&term.matrix, &term.support, region, family.site_dims())?;
            match parts.iter_mut().find(|(coef, _)| *coef == term.coefficient) {
                Some((_, acc)) => *acc += m,
                None => parts.push((term.coefficient, m)),
            }
        }
        Ok(Self { region: region.clone(), dim, horizon: family.horizon, parts })
    }

    /// `H_Λ(t) = Σ_{Z ⊆ Λ} Ψ(Z, t)`.
    pub fn new(family: &InteractionFamily, region: &Region) -> Result<Self> {
        let indices: Vec<usize> = family
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| t.support.is_subset(region))
            .map(|(i, _)| i)
            .collect();
        Self::from_terms(family, region, &indices)
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_static(&self) -> bool {
        self.parts.iter().all(|(coef, _)| coef.is_constant())
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Evaluates without the horizon check.
    pub fn eval(&self, t: f64) -> CMat {
        let mut h = CMat::zeros(self.dim, self.dim);
        for (coef, m) in &self.parts {
            let k = coef.eval(t);
            if k != 0.0 {
                h += m * c(k, 0.0);
            }
        }
        h
    }

    pub fn at(&self, t: f64) -> Result<CMat> {
        if !(t.abs() <= self.horizon * (1.0 + 1e-12)) {
            return Err(Error::TimeOutOfRange { t, horizon: self.horizon });
        }
        Ok(self.eval(t))
    }
}

pub fn assemble_hamiltonian(family: &InteractionFamily, volume: &Region, t: f64) -> Result<CMat> {
    family.check_time(t)?;
    Ok(RegionHamiltonian::new(family, volume)?.eval(t))
}

/// Indices of the terms in `M_R`: supports crossing the cut inside `∂_{⌊R/2⌋} X`.
pub fn surface_terms(
    family: &InteractionFamily,
    lattice: &Lattice,
    x: &Region,
    r: u32,
    volume: &Region,
) -> Vec<usize> {
    let collar = geometry::annulus(lattice, x, r / 2);
    let candidates: Vec<Region> = family.terms.iter().map(|t| t.support.clone()).collect();
    geometry::crossing_sets(&candidates, x, volume, Some(&collar))
}

/// Indices of every term in `volume` crossing the cut.
pub fn crossing_terms(family: &InteractionFamily, x: &Region, volume: &Region) -> Vec<usize> {
    let candidates: Vec<Region> = family.terms.iter().map(|t| t.support.clone()).collect();
    geometry::crossing_sets(&candidates, x, volume, None)
}

/// Checks `X̄^R ⊆ Λ` and `R ≥ 1`.
pub fn check_collar_fits(lattice: &Lattice, x: &Region, r: u32, volume: &Region) -> Result<()> {
    if r < 1 {
        return Err(Error::InvalidArgument("collar width R must be at least 1".into()));
    }
    if !x.is_subset(volume) {
        return Err(Error::NotContained("X must lie inside Λ".into()));
    }
    let fat = geometry::fattening(lattice, x, r);
    if !fat.is_subset(volume) {
        return Err(Error::NotContained(format!(
            "fattening of X at R={r} ({:?}) is not inside Λ ({:?})",
            fat.as_slice(),
            volume.as_slice()
        )));
    }
    Ok(())
}

/// The surface energy as a Hamiltonian on the half-width collar `∂_{⌊R/2⌋} X`.
pub fn surface_hamiltonian(
    family: &InteractionFamily,
    lattice: &Lattice,
    x: &Region,
    r: u32,
    volume: &Region,
) -> Result<RegionHamiltonian> {
    check_collar_fits(lattice, x, r, volume)?;
    let collar = geometry::annulus(lattice, x, r / 2);
    RegionHamiltonian::from_terms(family, &collar, &surface_terms(family, lattice, x, r, volume))
}

/// `S(R, t)` as a matrix on `∂_R X`.
pub fn surface_energy(
    family: &InteractionFamily,
    lattice: &Lattice,
    x: &Region,
    r: u32,
    volume: &Region,
    t: f64,
) -> Result<CMat> {
    family.check_time(t)?;
    check_collar_fits(lattice, x, r, volume)?;
    let annulus = geometry::annulus(lattice, x, r);
    RegionHamiltonian::from_terms(family, &annulus, &surface_terms(family, lattice, x, r, volume))
        .map(|h| h.eval(t))
}

/// `K(t) = −Σ_{Z crossing} Ψ(Z, t)` on `volume`; zero when `X` is empty or all of `volume`.
pub fn crossing_generator(family: &InteractionFamily, x: &Region, volume: &Region, t: f64) -> Result<CMat> {
    family.check_time(t)?;
    let k = RegionHamiltonian::from_terms(family, volume, &crossing_terms(family, x, volume))?;
    Ok(-k.eval(t))
}

/// `K(t) + S(R, t)` on `volume`, cross-checked against the negated sum of the crossing
/// terms that leave `∂_{⌊R/2⌋} X`.
pub fn crossing_defect(
    family: &InteractionFamily,
    lattice: &Lattice,
    x: &Region,
    r: u32,
    volume: &Region,
    t: f64,
) -> Result<CMat> {
    let k = crossing_generator(family, x, volume, t)?;
    let s_small = surface_hamiltonian(family, lattice, x, r, volume)?;
    let s = embed(&s_small.eval(t), s_small.region(), volume, family.site_dims())?;
    let defect = k + s;
    let direct = crossing_defect_direct(family, lattice, x, r, volume, t)?;
    let gap = (&defect - &direct).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if gap > 1e-12 {
        return Err(Error::Inconsistent(format!("K+S differs from the excluded-term sum by {gap:e}")));
    }
    Ok(defect)
}

/// `−Σ Ψ(Z, t)` over crossing supports not contained in `∂_{⌊R/2⌋} X`.
pub fn crossing_defect_direct(
    family: &InteractionFamily,
    lattice: &Lattice,
    x: &Region,
    r: u32,
    volume: &Region,
    t: f64,
) -> Result<CMat> {
    family.check_time(t)?;
    let collar = geometry::annulus(lattice, x, r / 2);
    let excluded: Vec<usize> = crossing_terms(family, x, volume)
        .into_iter()
        .filter(|&i| !family.terms[i].support.is_subset(&collar))
        .collect();
    Ok(-RegionHamiltonian::from_terms(family, volume, &excluded)?.eval(t))
}

/// `‖Ψ‖_ξ` and the Lieb-Robinson velocity `v_ξ = 2‖Ψ‖_ξ C_ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityData {
    pub psi_norm: f64,
    pub v_xi: f64,
}

pub fn interaction_norm(
    family: &InteractionFamily,
    profile: &DecayProfile,
    lattice: &Lattice,
    constants: &DecayConstants,
) -> VelocityData {
    let n = lattice.vertex_count();
    let norms: Vec<f64> = (0..family.terms.len()).map(|i| family.term_sup_norm(i)).collect();
    let mut pair_sums = vec![vec![0.0f64; n]; n];
    for (term, &norm) in family.terms.iter().zip(&norms) {
        let sites = term.support.as_slice();
        for (i, &x) in sites.iter().enumerate() {
            for &y in &sites[i..] {
                pair_sums[x][y] += norm;
            }
        }
    }
    let mut psi_norm = 0.0f64;
    for x in 0..n {
        for y in x..n {
            let sum = pair_sums[x][y];
            if sum == 0.0 {
                continue;
            }
            let weight = profile.f_xi_at(lattice.distance(x, y));
            psi_norm = psi_norm.max(if weight > 0.0 { sum / weight } else { f64::INFINITY });
        }
    }
    VelocityData { psi_norm, v_xi: 2.0 * psi_norm * constants.conv_xi.value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, kron, pauli_x, pauli_z};

    fn reg(v: &[usize]) -> Region {
        Region::from_vertices(v.iter().copied())
    }

    #[test]
    fn embed_on_second_qubit() {
        let m = embed(&pauli_z(), &reg(&[1]), &reg(&[0, 1]), &[2, 2]).unwrap();
        assert_eq!(m, kron(&identity(2), &pauli_z()));
    }

    #[test]
    fn embed_full_support_is_identity_map() {
        let a = kron(&pauli_x(), &pauli_z()) + kron(&pauli_z(), &identity(2));
        assert_eq!(embed(&a, &reg(&[3, 5]), &reg(&[3, 5]), &[2; 6]).unwrap(), a);
    }

    #[test]
    fn embed_rejects_mismatch() {
        assert!(matches!(
            embed(&identity(3), &reg(&[0]), &reg(&[0, 1]), &[2, 2]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(embed(&identity(2), &reg(&[2]), &reg(&[0, 1]), &[2, 2, 2]).is_err());
    }

    #[test]
    fn ising_pair_is_diagonal() {
        let l = Lattice::path(2).unwrap();
        let fam = InteractionFamily::tfim(&l, 0.0, 1.0, Coefficient::default(), 1.0).unwrap();
        let h = assemble_hamiltonian(&fam, &l.all(), 0.0).unwrap();
        let expect = [1.0, -1.0, -1.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { expect[i] } else { 0.0 };
                assert_eq!(h[(i, j)], c(e, 0.0));
            }
        }
    }

    #[test]
    fn empty_family_gives_zero() {
        let l = Lattice::path(3).unwrap();
        let fam = InteractionFamily::qubits(&l, 1.0).unwrap();
        assert_eq!(assemble_hamiltonian(&fam, &l.all(), 0.3).unwrap(), CMat::zeros(8, 8));
    }

    #[test]
    fn time_outside_horizon_rejected() {
        let l = Lattice::path(2).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 1.0, Coefficient::default(), 1.0).unwrap();
        assert!(matches!(assemble_hamiltonian(&fam, &l.all(), 1.5), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn non_hermitian_terms_rejected() {
        let l = Lattice::path(2).unwrap();
        let mut fam = InteractionFamily::qubits(&l, 1.0).unwrap();
        let bad = CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(fam.push(reg(&[0]), bad, Coefficient::default()), Err(Error::NotHermitian(_))));
        assert!(fam.push(reg(&[0]), identity(4), Coefficient::default()).is_err());
    }

    #[test]
    fn duplicates_flagged() {
        let l = Lattice::path(2).unwrap();
        let mut fam = InteractionFamily::qubits(&l, 1.0).unwrap();
        fam.push(reg(&[0]), pauli_x(), Coefficient::default()).unwrap();
        fam.push(reg(&[0]), pauli_x(), Coefficient::Ramp { c: 1.0 }).unwrap();
        assert_eq!(fam.duplicates(), vec![(0, 1)]);
    }

    #[test]
    fn p2_ising_crossing_generator() {
        let l = Lattice::path(2).unwrap();
        let fam = InteractionFamily::tfim(&l, 0.0, 1.0, Coefficient::default(), 1.0).unwrap();
        let k = crossing_generator(&fam, &reg(&[0]), &l.all(), 0.0).unwrap();
        assert_eq!(k, -kron(&pauli_z(), &pauli_z()));
    }

    #[test]
    fn degenerate_cut_has_zero_crossing_generator() {
        let l = Lattice::path(3).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 1.0, Coefficient::default(), 1.0).unwrap();
        assert_eq!(crossing_generator(&fam, &l.all(), &l.all(), 0.0).unwrap(), CMat::zeros(8, 8));
        assert_eq!(crossing_generator(&fam, &Region::empty(), &l.all(), 0.0).unwrap(), CMat::zeros(8, 8));
    }

    #[test]
    fn chain_surface_energy_is_the_cut_bond() {
        let l = Lattice::path(6).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 0.7, Coefficient::default(), 1.0).unwrap();
        let x = reg(&[0, 1, 2]);
        let s = surface_energy(&fam, &l, &x, 2, &l.all(), 0.0).unwrap();
        // ∂_2 X = {1,2,3,4}; the bond {2,3} sits in the middle two factors
        let bond = kron(&pauli_z(), &pauli_z()) * c(0.7, 0.0);
        let expect = kron(&kron(&identity(2), &bond), &identity(2));
        assert!((s - expect).iter().all(|z| z.norm() < 1e-15));
        let defect = crossing_defect(&fam, &l, &x, 2, &l.all(), 0.0).unwrap();
        assert!(defect.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn collar_must_fit() {
        let l = Lattice::path(6).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 1.0, Coefficient::default(), 1.0).unwrap();
        let x = reg(&[0, 1, 2]);
        let small = reg(&[0, 1, 2, 3]);
        assert!(surface_energy(&fam, &l, &x, 2, &small, 0.0).is_err());
        assert!(surface_energy(&fam, &l, &x, 0, &l.all(), 0.0).is_err());
    }

    #[test]
    fn coefficient_sups() {
        assert_eq!(Coefficient::Constant { c: -2.0 }.sup_abs(1.0, 5), 2.0);
        assert_eq!(Coefficient::Ramp { c: 0.5 }.sup_abs(3.0, 5), 1.5);
        let s = Coefficient::Sinusoid { c: 2.0, omega: std::f64::consts::PI, phi: 0.0 };
        // grid of 201 points on [-1, 1] hits t = ±1/2 exactly
        assert!((s.sup_abs(1.0, 201) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn p2_ising_norm() {
        let l = Lattice::path(2).unwrap();
        let fam = InteractionFamily::tfim(&l, 1.0, 1.0, Coefficient::default(), 1.0).unwrap();
        let profile = DecayProfile::exponential(2.0, 1.0);
        let consts = crate::decay::lattice_constants(&profile, &l, 1.0, 1);
        let v = interaction_norm(&fam, &profile, &l, &consts);
        assert!((v.psi_norm - 4.0 * std::f64::consts::E).abs() < 1e-12);
        assert_eq!(v.v_xi, 2.0 * v.psi_norm * consts.conv_xi.value);
        let zero = InteractionFamily::qubits(&l, 1.0).unwrap();
        assert_eq!(interaction_norm(&zero, &profile, &l, &consts), VelocityData { psi_norm: 0.0, v_xi: 0.0 });
    }
}
