use nalgebra::DMatrix;
use proptest::prelude::*;

use fspca::matcore::{pinv_psd, sym_eig, sym_eigvals, SymMat, DEFAULT_PINV_REL_TOL};
use fspca::oracle::{brute_force, enumerate_supports};
use fspca::solver::{go, ipu, ipu_from_lowrank, random_subspace_init, SolverConfig};
use fspca::support::SupportIndices;

/// PSD matrix `X X^T` from a flat list of entries of an `d x r` factor.
fn psd_from(d: usize, r: usize, entries: &[f64]) -> SymMat {
    let x = DMatrix::from_row_slice(d, r, &entries[..d * r]);
    SymMat::symmetrize(&x * x.transpose()).unwrap()
}

fn psd_strategy() -> impl Strategy<Value = SymMat> {
    (3usize..=8, 1usize..=8)
        .prop_flat_map(|(d, r)| (Just(d), Just(r), prop::collection::vec(-3.0f64..3.0, d * r)))
        .prop_map(|(d, r, e)| psd_from(d, r, &e))
}

fn scale(a: &SymMat) -> f64 {
    a.max_abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_decomposition_reconstructs(a in psd_strategy()) {
        let d = a.dim();
        let e = sym_eig(&a, d).unwrap();
        let v = &e.vectors;
        let rebuilt = v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone())) * v.transpose();
        prop_assert!((rebuilt - a.as_matrix()).abs().max() <= 1e-10 * scale(&a));
        prop_assert!((v.transpose() * v - DMatrix::identity(d, d)).abs().max() <= 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigenvalues_agree_with_nalgebra(a in psd_strategy()) {
        let ours = sym_eigvals(&a).unwrap();
        let mut theirs: Vec<f64> = a.as_matrix().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in ours.iter().zip(&theirs) {
            prop_assert!((x - y).abs() <= 1e-10 * scale(&a));
        }
    }

    #[test]
    fn pinv_satisfies_penrose_identities(a in psd_strategy()) {
        let p = pinv_psd(&a, DEFAULT_PINV_REL_TOL).unwrap();
        let (am, pm) = (a.as_matrix(), p.as_matrix());
        let s = scale(&a);
        let tol = 1e-8 * s.max(pm.abs().max() * s * s);
        prop_assert!((am * pm * am - am).abs().max() <= tol);
        prop_assert!((pm * am * pm - pm).abs().max() <= tol * pm.abs().max().max(1.0) / s);
    }

    #[test]
    fn objective_never_exceeds_top_eigenvalues(a in psd_strategy(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let d = a.dim();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = 1 + (seed as usize) % d.min(3);
        let k = m + (seed as usize / 7) % (d - m + 1);
        let w = random_subspace_init(d, m, k, &mut rng).unwrap();
        let top: f64 = sym_eigvals(&a).unwrap()[..m].iter().sum();
        prop_assert!(w.objective(&a).unwrap() <= top + 1e-10 * scale(&a));
    }

    #[test]
    fn submatrix_eigenvalues_interlace(a in psd_strategy(), drop in 0usize..8) {
        let d = a.dim();
        let keep: Vec<usize> = (0..d).filter(|&i| i != drop % d).collect();
        let idx = SupportIndices::new(keep, d).unwrap();
        let sub = fspca::matcore::principal_submatrix(&a, &idx).unwrap();
        let full = sym_eigvals(&a).unwrap();
        let part = sym_eigvals(&sub).unwrap();
        let tol = 1e-10 * scale(&a);
        for i in 0..d - 1 {
            prop_assert!(full[i] + tol >= part[i] && part[i] + tol >= full[i + 1]);
        }
    }

    #[test]
    fn oracle_dominates_solvers(a in psd_strategy(), pick in any::<u64>()) {
        let d = a.dim();
        let m = 1 + (pick as usize) % d.min(3);
        let k = m + (pick as usize / 5) % (d - m + 1);
        let orc = brute_force(&a, m, k).unwrap();
        let tol = 1e-9 * scale(&a);
        let cfg = SolverConfig::new(m, k);
        prop_assert!(go(&a, m, k).unwrap().objective(&a).unwrap() <= orc.optimal_objective + tol);
        prop_assert!(ipu_from_lowrank(&a, &cfg).unwrap().objective() <= orc.optimal_objective + tol);
    }

    #[test]
    fn oracle_matches_reverse_enumeration(a in psd_strategy(), pick in any::<u64>()) {
        let d = a.dim();
        let m = 1 + (pick as usize) % d.min(3);
        let k = m + (pick as usize / 5) % (d - m + 1);
        let orc = brute_force(&a, m, k).unwrap();
        // independent path: nalgebra's eigen solver over supports in reverse order
        let supports: Vec<SupportIndices> = enumerate_supports(d, k).collect();
        let mut best = f64::NEG_INFINITY;
        for s in supports.iter().rev() {
            let idx = s.indices();
            let sub = DMatrix::from_fn(k, k, |i, j| a.get(idx[i], idx[j]));
            let mut vals: Vec<f64> = sub.symmetric_eigen().eigenvalues.iter().copied().collect();
            vals.sort_by(|x, y| y.total_cmp(x));
            best = best.max(vals[..m].iter().sum());
        }
        prop_assert!((best - orc.optimal_objective).abs() <= 1e-9 * scale(&a));
    }

    #[test]
    fn solvers_are_permutation_equivariant(a in psd_strategy(), shift in 1usize..8) {
        let d = a.dim();
        let m = 1.min(d);
        let k = (d / 2).max(m);
        let perm: Vec<usize> = (0..d).map(|i| (i + shift) % d).collect();
        let b = a.permuted(&perm).unwrap();
        let tol = 1e-9 * scale(&a);
        let oa = brute_force(&a, m, k).unwrap().optimal_objective;
        let ob = brute_force(&b, m, k).unwrap().optimal_objective;
        prop_assert!((oa - ob).abs() <= tol);
        // GO objectives agree unless the diagonal has ties that the permutation reorders
        let diag = a.diagonal();
        let mut sorted = diag.clone();
        sorted.sort_by(|x, y| y.total_cmp(x));
        if k < d && (sorted[k - 1] - sorted[k]).abs() > 1e-9 * scale(&a) {
            let ga = go(&a, m, k).unwrap().objective(&a).unwrap();
            let gb = go(&b, m, k).unwrap().objective(&b).unwrap();
            prop_assert!((ga - gb).abs() <= tol);
        }
    }

    #[test]
    fn ridge_leaves_supports_unchanged(a in psd_strategy(), sigma in 0.0f64..5.0) {
        let d = a.dim();
        let m = 1;
        let k = (d / 2).max(1);
        let w = go(&a, m, k).unwrap();
        let wr = go(&a.add_ridge(sigma), m, k).unwrap();
        prop_assert_eq!(w.support(), wr.support());
    }

    #[test]
    fn ipu_trace_is_nondecreasing(a in psd_strategy(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let d = a.dim();
        prop_assume!(d >= 3);
        let (m, k) = (1 + (seed as usize) % 2, d - 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let w0 = random_subspace_init(d, m, k, &mut rng).unwrap();
        let rep = ipu(&a, &SolverConfig::new(m, k), &w0).unwrap();
        for w in rep.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0));
        }
    }
}
