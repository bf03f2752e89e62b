mod common;

use common::*;
use locfact::decay::{self, DecayProfile};
use locfact::geometry::{Lattice, Region};
use locfact::interactions::{self, Coefficient, InteractionFamily, RegionHamiltonian};
use locfact::linalg::{self, c, identity, kron, pauli_x, pauli_z, CMat};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

#[test]
fn embedding_matches_index_arithmetic() {
    let mut rng = rng(21);
    for _ in 0..60 {
        let n = rng.gen_range(1..=5);
        let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
        let mut verts: Vec<usize> = (0..n).collect();
        verts.shuffle(&mut rng);
        let vol_len = rng.gen_range(1..=n);
        let mut volume: Vec<usize> = verts[..vol_len].to_vec();
        volume.sort_unstable();
        let sup_len = rng.gen_range(1..=vol_len);
        let mut support: Vec<usize> = volume.choose_multiple(&mut rng, sup_len).copied().collect();
        support.sort_unstable();
        let d: usize = support.iter().map(|&v| dims[v]).product();
        let op = random_hermitian(&mut rng, d);
        let got = interactions::embed(&op, &region(&support), &region(&volume), &dims).unwrap();
        let want = embed_oracle(&op, &support, &volume, &dims);
        assert_eq!(got, want, "support {support:?} in {volume:?} dims {dims:?}");
    }
}

#[test]
fn three_site_ising_spectrum() {
    let (h, j) = (0.7, 1.3);
    let lattice = Lattice::path(3).unwrap();
    let fam = InteractionFamily::tfim(&lattice, h, j, Coefficient::default(), 1.0).unwrap();
    let got = interactions::assemble_hamiltonian(&fam, &lattice.all(), 0.0).unwrap();
    let id = identity(2);
    let k3 = |a: &CMat, b: &CMat, d: &CMat| kron(&kron(a, b), d);
    let (x, z) = (pauli_x(), pauli_z());
    let want = (k3(&z, &z, &id) + k3(&id, &z, &z)) * c(j, 0.0)
        + (k3(&x, &id, &id) + k3(&id, &x, &id) + k3(&id, &id, &x)) * c(h, 0.0);
    assert!((&got - &want).norm() < 1e-14);
    let mut ev_got = linalg::HermitianEigen::new(&got).values;
    ev_got.sort_by(f64::total_cmp);
    // real symmetric embedding doubles each eigenvalue
    let n = want.nrows();
    let real = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, k| want[(i, k)].re);
    let mut ev_want: Vec<f64> = real.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev_want.sort_by(f64::total_cmp);
    for (a, b) in ev_got.iter().zip(&ev_want) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn crossing_defect_vanishes_for_nearest_neighbours() {
    let lattice = Lattice::path(6).unwrap();
    let fam = InteractionFamily::tfim(&lattice, 1.0, 1.0, Coefficient::default(), 1.0).unwrap();
    let x = region(&[0, 1, 2]);
    for r in [2u32, 4] {
        let d = interactions::crossing_defect(&fam, &lattice, &x, r, &lattice.all(), 0.0).unwrap();
        assert_eq!(d.norm(), 0.0);
    }
    // R = 1 leaves the bond {2,3} outside the zero-width collar
    let d = interactions::crossing_defect(&fam, &lattice, &x, 1, &lattice.all(), 0.0).unwrap();
    assert!((linalg::spectral_norm(&d).unwrap() - 1.0).abs() < 1e-12);
}

fn family_on(n: usize, couplings: &[f64], fields: &[f64], coef: Coefficient) -> (Lattice, InteractionFamily) {
    let lattice = Lattice::path(n).unwrap();
    let mut fam = InteractionFamily::qubits(&lattice, 1.0).unwrap();
    let zz = kron(&pauli_z(), &pauli_z());
    let mut k = 0;
    for a in 0..n {
        for b in a + 1..n {
            fam.push(Region::from_vertices([a, b]), &zz * c(couplings[k % couplings.len()], 0.0), coef).unwrap();
            k += 1;
        }
        fam.push(Region::from_vertices([a]), pauli_x() * c(fields[a % fields.len()], 0.0), coef).unwrap();
    }
    (lattice, fam)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interaction_norm_is_homogeneous(
        couplings in proptest::collection::vec(-2.0f64..2.0, 1..10),
        fields in proptest::collection::vec(-2.0f64..2.0, 1..5),
        lambda in -3.0f64..3.0,
    ) {
        let (lattice, fam) = family_on(5, &couplings, &fields, Coefficient::default());
        let p = DecayProfile::exponential(2.0, 1.0);
        let consts = decay::lattice_constants(&p, &lattice, 1.0, 1);
        let base = interactions::interaction_norm(&fam, &p, &lattice, &consts).psi_norm;
        let scaled = interactions::interaction_norm(&fam.scaled(lambda), &p, &lattice, &consts).psi_norm;
        prop_assert!((scaled - lambda.abs() * base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn hamiltonian_splits_across_the_cut(
        couplings in proptest::collection::vec(-2.0f64..2.0, 1..10),
        fields in proptest::collection::vec(-2.0f64..2.0, 1..5),
        cut in 1usize..5,
        t in -1.0f64..1.0,
    ) {
        let coef = Coefficient::Sinusoid { c: 1.0, omega: 1.7, phi: 0.4 };
        let (lattice, fam) = family_on(5, &couplings, &fields, coef);
        let volume = lattice.all();
        let x: Region = (0..cut).collect();
        let comp = volume.difference(&x);
        let dims = fam.site_dims().to_vec();
        let h = interactions::assemble_hamiltonian(&fam, &volume, t).unwrap();
        let hx = interactions::embed(&RegionHamiltonian::new(&fam, &x).unwrap().eval(t), &x, &volume, &dims).unwrap();
        let hc = interactions::embed(&RegionHamiltonian::new(&fam, &comp).unwrap().eval(t), &comp, &volume, &dims).unwrap();
        let k = interactions::crossing_generator(&fam, &x, &volume, t).unwrap();
        // H = H_X + H_c − K
        let defect = (&h - (hx + hc - k)).norm();
        prop_assert!(defect <= 1e-12, "defect {}", defect);
    }
}
