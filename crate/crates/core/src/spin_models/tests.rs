use super::*;
use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(which: char) -> DMatrix<Complex64> {
    // Basis order (up, down): sigma_z = diag(1, -1).
    match which {
        'x' => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        'y' => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        'z' => DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        _ => DMatrix::identity(2, 2),
    }
}

fn op_on_site(n: usize, site: usize, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    // Site 0 is the least-significant bit, so it sits rightmost in the kron chain.
    let left = DMatrix::<Complex64>::identity(1 << (n - 1 - site), 1 << (n - 1 - site));
    let right = DMatrix::<Complex64>::identity(1 << site, 1 << site);
    left.kronecker(op).kronecker(&right)
}

fn two_site(n: usize, a: usize, b: usize, oa: char, ob: char) -> DMatrix<Complex64> {
    op_on_site(n, a, &pauli(oa)) * op_on_site(n, b, &pauli(ob))
}

/// Independent dense construction straight from the coupling list.
fn dense_oracle(p: &HamiltonianParams) -> DMatrix<Complex64> {
    let n = p.n_sites;
    let dim = 1 << n;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let z = match p.kind {
        ModelKind::LongRangeXy => p.coordination,
        _ => 1,
    };
    for j in 1..=z {
        let w = 1.0 / (j as f64).powf(p.alpha);
        for i in 0..n {
            let b = match p.boundary {
                Boundary::Periodic => (i + j) % n,
                Boundary::Open => {
                    if i + j >= n {
                        continue;
                    }
                    i + j
                }
            };
            h += two_site(n, i, b, 'x', 'x') * c(-w * (1.0 + p.gamma) / 4.0, 0.0);
            h += two_site(n, i, b, 'y', 'y') * c(-w * (1.0 - p.gamma) / 4.0, 0.0);
            h += (two_site(n, i, b, 'x', 'y') + two_site(n, i, b, 'y', 'x')) * c(-p.k / 4.0, 0.0);
            h += (two_site(n, i, b, 'x', 'y') - two_site(n, i, b, 'y', 'x')) * c(-p.d / 4.0, 0.0);
            h += two_site(n, i, b, 'z', 'z') * c(-p.delta / 4.0, 0.0);
        }
    }
    for s in 0..n {
        h += op_on_site(n, s, &pauli('z')) * c(-p.h / 2.0, 0.0);
    }
    h
}

#[test]
fn builder_matches_kron_oracle_for_all_kinds() {
    let cases = vec![
        HamiltonianParams::xy(0.7, 0.4, 6, Boundary::Periodic).unwrap(),
        HamiltonianParams::xy(-0.3, 1.0, 5, Boundary::Open).unwrap(),
        HamiltonianParams::ksea(0.5, 0.6, 0.8, 6, Boundary::Periodic).unwrap(),
        HamiltonianParams::duxy(0.2, 0.3, 1.1, 6, Boundary::Periodic).unwrap(),
        HamiltonianParams::xyz(1.2, 0.9, 0.5, 6, Boundary::Open).unwrap(),
        HamiltonianParams::long_range_xy(0.4, 0.8, 1.5, 2, 8, Boundary::Periodic).unwrap(),
    ];
    for p in cases {
        let built = build_hamiltonian(&p).unwrap().dense().unwrap();
        let oracle = dense_oracle(&p);
        assert!(
            crate::linalg::max_abs_diff(&built, &oracle) < 1e-14,
            "mismatch for {:?}",
            p.kind
        );
    }
}

#[test]
fn two_site_ising_bond_hand_diagonalized() {
    // gamma = 1, h = 0, open: H = -(1/2) XX, eigenvalues {-1/2, -1/2, 1/2, 1/2}.
    let p = HamiltonianParams::xy(0.0, 1.0, 2, Boundary::Open).unwrap();
    let h = build_hamiltonian(&p).unwrap().dense().unwrap();
    let expected = op_on_site(2, 0, &pauli('x')) * op_on_site(2, 1, &pauli('x')) * c(-0.5, 0.0);
    assert!(crate::linalg::max_abs_diff(&h, &expected) < 1e-15);
    let (vals, _) = eigh(&h);
    let got: Vec<f64> = vals.iter().copied().collect();
    for (v, e) in got.iter().zip([-0.5, -0.5, 0.5, 0.5]) {
        assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
    }
    // gamma = 0 splits the levels as {-1/2, 0, 0, 1/2}.
    let p0 = HamiltonianParams::xy(0.0, 0.0, 2, Boundary::Open).unwrap();
    let (vals0, _) = eigh(&build_hamiltonian(&p0).unwrap().dense().unwrap());
    for (v, e) in vals0.iter().zip([-0.5, 0.0, 0.0, 0.5]) {
        assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
    }
}

#[test]
fn xyz_at_zero_delta_equals_xy() {
    let xyz = HamiltonianParams::xyz(0.9, 0.35, 0.0, 6, Boundary::Periodic).unwrap();
    let xy = HamiltonianParams::xy(0.9, 0.35, 6, Boundary::Periodic).unwrap();
    let a = build_hamiltonian(&xyz).unwrap().dense().unwrap();
    let b = build_hamiltonian(&xy).unwrap().dense().unwrap();
    assert_eq!(crate::linalg::max_abs_diff(&a, &b), 0.0);
}

#[test]
fn long_range_single_neighbor_equals_xy() {
    let lr = HamiltonianParams::long_range_xy(0.9, 0.35, 2.7, 1, 6, Boundary::Periodic).unwrap();
    let xy = HamiltonianParams::xy(0.9, 0.35, 6, Boundary::Periodic).unwrap();
    let a = build_hamiltonian(&lr).unwrap().dense().unwrap();
    let b = build_hamiltonian(&xy).unwrap().dense().unwrap();
    assert_eq!(crate::linalg::max_abs_diff(&a, &b), 0.0);
}

#[test]
fn all_kinds_reduce_to_xy_at_zero_extra_couplings() {
    let xy = build_hamiltonian(&HamiltonianParams::xy(0.4, 0.7, 6, Boundary::Periodic).unwrap())
        .unwrap()
        .dense()
        .unwrap();
    let zeroed = vec![
        HamiltonianParams::ksea(0.4, 0.7, 0.0, 6, Boundary::Periodic).unwrap(),
        HamiltonianParams::duxy(0.4, 0.7, 0.0, 6, Boundary::Periodic).unwrap(),
        HamiltonianParams::xyz(0.4, 0.7, 0.0, 6, Boundary::Periodic).unwrap(),
        HamiltonianParams::long_range_xy(0.4, 0.7, 0.0, 1, 6, Boundary::Periodic).unwrap(),
    ];
    for p in zeroed {
        let m = build_hamiltonian(&p).unwrap().dense().unwrap();
        assert_eq!(crate::linalg::max_abs_diff(&m, &xy), 0.0, "{:?}", p.kind);
    }
}

#[test]
fn hermiticity_is_exact() {
    let cases = vec![
        HamiltonianParams::ksea(0.5, 0.6, 0.8, 7, Boundary::Periodic).unwrap(),
        HamiltonianParams::duxy(0.2, 0.3, 1.1, 7, Boundary::Open).unwrap(),
    ];
    for p in cases {
        let m = build_hamiltonian(&p).unwrap().dense().unwrap();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                assert_eq!(m[(i, j)], m[(j, i)].conj());
            }
        }
    }
    // Real kinds are exactly symmetric with zero imaginary part.
    let real = build_hamiltonian(&HamiltonianParams::xyz(1.0, 0.8, 0.4, 7, Boundary::Open).unwrap())
        .unwrap();
    assert!(real.matrix().is_real());
}

#[test]
fn parameter_validation_rejects_mismatches() {
    assert!(HamiltonianParams::xy(0.5, 1.2, 6, Boundary::Periodic).is_err());
    assert!(HamiltonianParams::xy(0.5, -0.1, 6, Boundary::Periodic).is_err());
    assert!(HamiltonianParams::xy(0.5, 0.4, 1, Boundary::Periodic).is_err());
    // Irrelevant couplings must be zero.
    let mut p = HamiltonianParams::xy(0.5, 0.4, 6, Boundary::Periodic).unwrap();
    p.k = 0.3;
    assert!(p.validate().is_err());
    let mut q = HamiltonianParams::ksea(0.5, 0.4, 0.2, 6, Boundary::Periodic).unwrap();
    q.d = 0.1;
    assert!(q.validate().is_err());
    // Long-range coordination bound under periodic boundary.
    assert!(HamiltonianParams::long_range_xy(0.5, 0.4, 1.0, 3, 6, Boundary::Periodic).is_err());
    assert!(HamiltonianParams::long_range_xy(0.5, 0.4, 1.0, 2, 6, Boundary::Periodic).is_ok());
    // Site cap.
    let big = HamiltonianParams::xy(0.5, 0.4, SITE_CAP + 1, Boundary::Periodic).unwrap();
    assert!(matches!(
        build_hamiltonian(&big),
        Err(SpinModelError::SiteCapExceeded { .. })
    ));
}

#[test]
fn ground_state_polarizes_in_strong_field() {
    let p = HamiltonianParams::xy(10.0, 0.0, 6, Boundary::Periodic).unwrap();
    let gs = ground_state(&build_hamiltonian(&p).unwrap()).unwrap();
    // All-up product state is index 0 in this basis layout.
    let mut aligned = DVector::<Complex64>::zeros(64);
    aligned[0] = c(1.0, 0.0);
    assert!(gs.overlap(&aligned) > 1.0 - 1e-10);
}

#[test]
fn lanczos_ground_state_matches_dense_at_small_size() {
    for p in [
        HamiltonianParams::xy(0.5, 0.5, 8, Boundary::Periodic).unwrap(),
        HamiltonianParams::duxy(0.4, 0.3, 0.9, 8, Boundary::Periodic).unwrap(),
    ] {
        let ham = build_hamiltonian(&p).unwrap();
        let dense = ham.dense().unwrap();
        let (vals, _) = eigh(&dense);
        // Dense path of ground_state.
        let gs = ground_state(&ham).unwrap();
        assert_abs_diff_eq!(gs.energy(), vals[0], epsilon = 1e-10);
        // Lanczos path, forced via low_energy_ensemble machinery.
        let pairs = if ham.matrix().is_real() {
            let real = ham.matrix().to_real();
            let apply = |x: &[f64], y: &mut [f64]| real.matvec(x, y);
            lanczos::lowest_eigenpairs::<f64, _>(&apply, ham.dim(), 1, 0.0, &Default::default())
                .unwrap()
                .into_iter()
                .map(|(e, _)| e)
                .collect::<Vec<_>>()
        } else {
            let apply = |x: &[Complex64], y: &mut [Complex64]| ham.matrix().matvec(x, y);
            lanczos::lowest_eigenpairs::<Complex64, _>(
                &apply,
                ham.dim(),
                1,
                0.0,
                &Default::default(),
            )
            .unwrap()
            .into_iter()
            .map(|(e, _)| e)
            .collect::<Vec<_>>()
        };
        assert_abs_diff_eq!(pairs[0], vals[0], epsilon = 1e-9);
    }
}

#[test]
fn lanczos_resolves_degenerate_doublet() {
    // XY inside the ferromagnetic phase has an exponentially split doublet;
    // at N=8 both members must be found by deflated restarts.
    let p = HamiltonianParams::xy(0.3, 0.8, 8, Boundary::Periodic).unwrap();
    let ham = build_hamiltonian(&p).unwrap();
    let dense = ham.dense().unwrap();
    let (vals, _) = eigh(&dense);
    let real = ham.matrix().to_real();
    let apply = |x: &[f64], y: &mut [f64]| real.matvec(x, y);
    let pairs =
        lanczos::lowest_eigenpairs::<f64, _>(&apply, ham.dim(), 4, f64::INFINITY, &Default::default())
            .unwrap();
    assert_eq!(pairs.len(), 4);
    for (k, (e, _)) in pairs.iter().take(3).enumerate() {
        assert_abs_diff_eq!(*e, vals[k], epsilon = 1e-8);
    }
    // Orthonormality of the returned vectors.
    for a in 0..pairs.len() {
        for b in 0..pairs.len() {
            let dot: f64 = pairs[a].1.iter().zip(pairs[b].1.iter()).map(|(x, y)| x * y).sum();
            let expect = if a == b { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(dot, expect, epsilon = 1e-8);
        }
    }
}

#[test]
fn thermal_state_limits() {
    // beta = 0 is maximally mixed.
    let p = HamiltonianParams::xy(0.7, 0.2, 4, Boundary::Periodic).unwrap();
    let ham = build_hamiltonian(&p).unwrap();
    let rho = thermal_state(&ham, 0.0).unwrap();
    let expected = DMatrix::<Complex64>::identity(16, 16) * c(1.0 / 16.0, 0.0);
    assert!(crate::linalg::max_abs_diff(rho.entries(), &expected) < 1e-14);

    // Large beta at a gapped, uniquely polarized point approaches the
    // ground-state projector in trace distance.
    let p = HamiltonianParams::xy(2.0, 0.5, 6, Boundary::Periodic).unwrap();
    let ham = build_hamiltonian(&p).unwrap();
    let rho = thermal_state(&ham, 200.0).unwrap();
    let gs = ground_state(&ham).unwrap();
    let mut proj = DMatrix::<Complex64>::zeros(64, 64);
    let v = gs.amplitudes();
    for i in 0..64 {
        for j in 0..64 {
            proj[(i, j)] = v[i] * v[j].conj();
        }
    }
    let diff = rho.entries() - proj;
    let (vals, _) = eigh(&diff);
    let trace_distance = 0.5 * vals.iter().map(|x| x.abs()).sum::<f64>();
    assert!(trace_distance < 1e-8, "trace distance {trace_distance}");
}

#[test]
fn thermal_state_rejects_large_chains() {
    let p = HamiltonianParams::xy(0.5, 0.5, THERMAL_CAP + 2, Boundary::Periodic).unwrap();
    let ham = build_hamiltonian(&p).unwrap();
    assert!(matches!(
        thermal_state(&ham, 1.0),
        Err(SpinModelError::SiteCapExceeded { .. })
    ));
}

#[test]
fn low_energy_ensemble_matches_dense_thermal_rdm() {
    let p = HamiltonianParams::xy(0.6, 0.8, 8, Boundary::Periodic).unwrap();
    let ham = build_hamiltonian(&p).unwrap();
    let beta = 200.0;
    let rho_full = thermal_state(&ham, beta).unwrap();
    let rdm_full = reduced_two_site(ChainState::Mixed(&rho_full), 0, 1).unwrap();
    let ens = low_energy_ensemble(&ham, beta, 1e-12, 16).unwrap();
    let rdm_ens = reduced_two_site(ChainState::Ensemble(&ens), 0, 1).unwrap();
    assert!(crate::linalg::max_abs_diff(rdm_full.entries(), rdm_ens.entries()) < 1e-9);
}

#[test]
fn variational_bound_holds() {
    for p in [
        HamiltonianParams::xy(0.5, 0.5, 6, Boundary::Periodic).unwrap(),
        HamiltonianParams::ksea(0.3, 0.7, 0.5, 6, Boundary::Periodic).unwrap(),
        HamiltonianParams::xyz(1.1, 0.6, 0.4, 6, Boundary::Open).unwrap(),
    ] {
        let ham = build_hamiltonian(&p).unwrap();
        let e0 = ground_state(&ham).unwrap().energy();
        for beta in [0.1, 1.0, 10.0, 100.0] {
            let e_beta = thermal_energy(&ham, beta).unwrap();
            assert!(
                e0 <= e_beta + 1e-10,
                "variational bound violated: {e0} > {e_beta} at beta={beta}"
            );
        }
    }
}

#[test]
fn reduced_product_state_factorizes() {
    // |psi> = cos t |up> + sin t |down> on every site.
    let n = 5;
    let t: f64 = 0.42;
    let single = [c(t.cos(), 0.0), c(t.sin(), 0.0)];
    let dim = 1 << n;
    let mut amps = DVector::<Complex64>::zeros(dim);
    for x in 0..dim {
        let mut a = c(1.0, 0.0);
        for s in 0..n {
            a *= single[(x >> s) & 1];
        }
        amps[x] = a;
    }
    let state = QuantumState::new(amps, 0.0).unwrap();
    let rho = reduced_two_site(ChainState::Pure(&state), 1, 3).unwrap();
    let mut pure = DMatrix::<Complex64>::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            let amp_a = single[(a >> 1) & 1] * single[a & 1];
            let amp_b = single[(b >> 1) & 1] * single[b & 1];
            pure[(a, b)] = amp_a * amp_b.conj();
        }
    }
    assert!(crate::linalg::max_abs_diff(rho.entries(), &pure) < 1e-14);
}

#[test]
fn reduced_ghz_pair_is_classical_mixture() {
    let n = 4;
    let mut amps = DVector::<Complex64>::zeros(16);
    amps[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[15] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let state = QuantumState::new(amps, 0.0).unwrap();
    let rho = reduced_two_site(ChainState::Pure(&state), 0, 1).unwrap();
    let mut expected = DMatrix::<Complex64>::zeros(4, 4);
    expected[(0, 0)] = c(0.5, 0.0);
    expected[(3, 3)] = c(0.5, 0.0);
    assert!(crate::linalg::max_abs_diff(rho.entries(), &expected) < 1e-14);
}

#[test]
fn reduced_two_site_is_translation_invariant_on_rings() {
    let p = HamiltonianParams::xy(0.6, 0.5, 8, Boundary::Periodic).unwrap();
    let ham = build_hamiltonian(&p).unwrap();
    let rho = thermal_state(&ham, 5.0).unwrap();
    let r01 = reduced_two_site(ChainState::Mixed(&rho), 0, 1).unwrap();
    let r12 = reduced_two_site(ChainState::Mixed(&rho), 1, 2).unwrap();
    assert!(crate::linalg::max_abs_diff(r01.entries(), r12.entries()) < 1e-10);
}

#[test]
fn reduced_two_site_rejects_bad_sites() {
    let p = HamiltonianParams::xy(0.6, 0.5, 4, Boundary::Periodic).unwrap();
    let ham = build_hamiltonian(&p).unwrap();
    let gs = ground_state(&ham).unwrap();
    assert!(reduced_two_site(ChainState::Pure(&gs), 2, 2).is_err());
    assert!(matches!(
        reduced_two_site(ChainState::Pure(&gs), 0, 4),
        Err(SpinModelError::SiteOutOfRange { .. })
    ));
}

#[test]
fn quantum_state_rejects_unnormalized_amplitudes() {
    let v = DVector::from_vec(vec![c(1.0, 0.0), c(0.5, 0.0)]);
    assert!(QuantumState::new(v, 0.0).is_err());
}

#[test]
fn reduced_trace_is_one_for_random_states() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let dim = 1 << 6;
        let mut v = DVector::<Complex64>::zeros(dim);
        for x in 0..dim {
            v[x] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let n = v.norm();
        let state = QuantumState::new(v / c(n, 0.0), 0.0).unwrap();
        let rho = reduced_two_site(ChainState::Pure(&state), 2, 5).unwrap();
        let tr: Complex64 = rho.entries().diagonal().iter().sum();
        assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tr.im, 0.0, epsilon = 1e-12);
    }
}
