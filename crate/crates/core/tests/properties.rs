use std::sync::Arc;

use dirac_sea::bdf::{uniqueness_condition_check, Table};
use dirac_sea::dirac::{sign_of_symbol, symbol_trace_product, Block, DiracSymbol, C64};
use dirac_sea::free_vacuum::random_admissible_profile;
use dirac_sea::radial::{GridMapping, RadialFunction, RadialGrid};
use dirac_sea::torus::{project_to_admissible, random_admissible_state, Lattice};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn symbol() -> impl Strategy<Value = DiracSymbol> {
    (prop::array::uniform3(-10.0..10.0f64), -10.0..10.0f64)
        .prop_filter("non-degenerate", |(a, b)| a.iter().map(|x| x * x).sum::<f64>() + b * b > 1e-6)
        .prop_map(|(a, b)| DiracSymbol::new(a, b))
}

fn spectrum(m: &DMatrix<C64>) -> Vec<f64> {
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

proptest! {
    #[test]
    fn sign_squares_to_identity(d in symbol()) {
        let s = sign_of_symbol(&d).unwrap().matrix();
        let err = (s * s - Block::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn sign_commutes_with_symbol(d in symbol()) {
        let m = d.matrix();
        let s = sign_of_symbol(&d).unwrap().matrix();
        let err = (m * s - s * m).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10 * (1.0 + d.norm()));
    }

    #[test]
    fn trace_product_is_symmetric_and_matches_matrices(x in symbol(), y in symbol()) {
        let t = symbol_trace_product(&x, &y);
        prop_assert_eq!(t, symbol_trace_product(&y, &x));
        let explicit = (x.matrix() * y.matrix()).trace().re;
        prop_assert!((t - explicit).abs() < 1e-11 * (1.0 + t.abs()));
    }

    #[test]
    fn lattice_is_closed_under_negation(side in 1.0..12.0f64, cutoff in 0.1..4.0f64) {
        let lattice = Lattice::new(side, cutoff).unwrap();
        let origin = lattice.origin();
        prop_assert_eq!(lattice.points()[origin], [0, 0, 0]);
        for i in 0..lattice.len() {
            let j = lattice.negated(i);
            prop_assert_eq!(lattice.negated(j), i);
            prop_assert!(lattice.momentum_norm(i) <= cutoff * (1.0 + 1e-12));
        }
    }

    #[test]
    fn spline_interpolates_its_nodes(values in prop::collection::vec(-5.0..5.0f64, 3..12), step in 0.1..2.0f64) {
        let k: Vec<f64> = (0..values.len()).map(|i| i as f64 * step).collect();
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, -0.5 * x)).collect();
        let table = Table::new(k.clone(), v.clone()).unwrap();
        for (x, y) in k.iter().zip(&v) {
            prop_assert!((table.eval(*x) - y).norm() < 1e-12);
        }
        prop_assert_eq!(table.eval(-1.0), v[0]);
        prop_assert_eq!(table.eval(1e3), v[v.len() - 1]);
    }

    #[test]
    fn uniqueness_middle_grows_with_the_norm(alpha in 0.01..1.2f64, a in 0.0..0.05f64, b in 0.0..0.05f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = uniqueness_condition_check(alpha, lo).unwrap();
        let y = uniqueness_condition_check(alpha, hi).unwrap();
        prop_assert!(x.middle <= y.middle);
        prop_assert!(x.middle >= alpha * std::f64::consts::PI / 4.0 * (1.0 - 1e-15));
        prop_assert_eq!(x.passed, x.middle <= 1.0 + 1e-15);
    }

    #[test]
    fn random_states_are_admissible(seed in any::<u64>(), dim in 1usize..24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_admissible_state(dim, &mut rng);
        prop_assert!(spectrum(&g).iter().all(|&l| (-0.5 - 1e-12..=0.5 + 1e-12).contains(&l)));
        let p = project_to_admissible(&g);
        prop_assert!((p - &g).norm() < 1e-10);
    }

    #[test]
    fn random_profiles_stay_in_the_half_disc(seed in any::<u64>()) {
        let grid = Arc::new(RadialGrid::new(10.0, 64, GridMapping::Sinh { scale: 1.0 }).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_admissible_profile(grid, &mut rng);
        for (a, b) in f.f0.values().iter().zip(f.f1.values()) {
            prop_assert!(*a <= 0.0 && *b <= 0.0 && a * a + b * b <= 0.25 + 1e-12);
        }
    }

    #[test]
    fn interpolation_reproduces_nodes(seed in any::<u64>()) {
        let grid = Arc::new(RadialGrid::new(5.0, 40, GridMapping::Sinh { scale: 1.0 }).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_admissible_profile(grid.clone(), &mut rng);
        let g = RadialFunction::new(grid.clone(), f.f0.values().to_vec()).unwrap();
        for (r, v) in grid.nodes().iter().zip(g.values()) {
            prop_assert!((g.eval(*r) - v).abs() < 1e-12);
        }
    }
}
