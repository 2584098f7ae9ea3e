use hardy_lab::applications::{density_split, inequality_ratio, Domain, InequalityKind, InequalityParams, TestFunction};
use hardy_lab::covering::{build_covering, verify_geometry, HolderProfile, WeightSpec};
use hardy_lab::decomp::{check_split, decompose, split_chain, split_pair, CellFunction, TreePartition};
use hardy_lab::hardy::{a_chain, exact_constant, optimize_theta, Form, NormOptions};
use hardy_lab::random::{random_problem, random_recursive_tree};
use hardy_lab::HardyProblem;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem(seed: u64, n: usize, p: f64) -> HardyProblem {
    random_problem(n, p, 1e-2, 1e2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn path_and_shadow_agree(seed in any::<u64>(), n in 2usize..60) {
        let t = random_recursive_tree(n, &mut ChaCha8Rng::seed_from_u64(seed));
        for s in t.star_vertices() {
            let path = t.path(s).unwrap();
            prop_assert_eq!(path.len(), t.depth(s));
            prop_assert_eq!(*path.last().unwrap(), s);
            for &x in &path {
                prop_assert!(t.precedes(x, s));
                prop_assert!(t.shadow(x).unwrap().contains(&s));
            }
            for x in t.shadow(s).unwrap() {
                prop_assert!(t.precedes(s, x));
            }
        }
    }

    #[test]
    fn constant_scales_with_weights(seed in any::<u64>(), n in 2usize..25, lambda in 0.1f64..10.0, mu in 0.1f64..10.0) {
        let pr = problem(seed, n, 2.0);
        let opts = NormOptions::default();
        let c = exact_constant(&pr, Form::Primal, &opts).unwrap().value;
        let scaled = exact_constant(&pr.rescaled(lambda, mu).unwrap(), Form::Primal, &opts).unwrap().value;
        prop_assert!((scaled - c * mu / lambda).abs() <= 1e-8 * scaled);
    }

    #[test]
    fn constant_sits_between_conditions(seed in any::<u64>(), n in 2usize..25, p in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        let pr = problem(seed, n, p);
        let c = exact_constant(&pr, Form::Primal, &NormOptions::default()).unwrap();
        prop_assert!(c.lower <= c.upper * (1.0 + 1e-12));
        prop_assert!(a_chain(&pr).value <= c.upper * (1.0 + 1e-9));
        prop_assert!(c.value <= optimize_theta(&pr, 64.0).unwrap().suff_bound * (1.0 + 1e-9));
    }

    #[test]
    fn split_identities_hold_exactly(
        cells in prop::collection::vec((1i64..6, 1i64..6, -5i64..=5, 0u8..3), 2..10),
        shared in any::<prop::sample::Index>(),
    ) {
        let n = cells.len();
        let vol: Vec<Ratio<i64>> = cells.iter().map(|c| Ratio::new(c.0, c.1)).collect();
        let mut a: Vec<bool> = cells.iter().map(|c| c.3 != 1).collect();
        let mut b: Vec<bool> = cells.iter().map(|c| c.3 != 0).collect();
        let k = shared.index(n);
        a[k] = true;
        b[k] = true;
        let mut f: Vec<Ratio<i64>> = cells.iter().map(|c| Ratio::from_integer(c.2)).collect();
        let mass: Ratio<i64> = (0..n - 1).map(|i| f[i] * vol[i]).sum();
        f[n - 1] = -mass / vol[n - 1];
        let s = split_pair(&vol, &f, &a, &b).unwrap();
        prop_assert!(check_split(&vol, &f, &a, &b, &s).all());
        // a chain of the same two patches gives the same pieces
        let pieces = split_chain(&vol, &f, &[b.clone(), a.clone()]).unwrap();
        prop_assert_eq!(&pieces[1], &s.f_a);
        prop_assert_eq!(&pieces[0], &s.f_b);
    }

    #[test]
    fn ratio_is_scale_invariant(lambda in prop::sample::select(vec![-3.0, 0.5, 2.0, 1024.0]), beta in -0.3f64..0.5) {
        let dom = Domain::UnitCube { n: 2 };
        let prm = InequalityParams::new(InequalityKind::ImprovedPoincare, beta, 2.0, 2000, 4);
        let f = |c: f64| TestFunction::Monomial { axis: 0, power: 2, scale: c };
        let a = inequality_ratio(&dom, &f(1.0), &prm).unwrap();
        let b = inequality_ratio(&dom, &f(lambda), &prm).unwrap();
        prop_assert!((a.ratio - b.ratio).abs() <= 1e-10 * a.ratio);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn coverings_are_sound(alpha in 0.3f64..=1.0, depth in 2u32..7) {
        let cov = build_covering(&HolderProfile::demo(alpha), depth, 100_000).unwrap();
        let geo = verify_geometry(&cov);
        prop_assert!(geo.ok(), "{:?}", geo);
    }

    #[test]
    fn decomposition_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let cov = build_covering(&HolderProfile::demo(0.5), 4, 10_000).unwrap();
        let spec = WeightSpec::critical(0.0, 0.5, 2.0);
        let part = TreePartition::from_covering(&cov, spec);
        let pr = hardy_lab::covering::weights_from_beta(&cov, spec).unwrap().problem;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let g1 = CellFunction::random_mean_zero(&part, &mut r);
        let g2 = CellFunction::random_mean_zero(&part, &mut r);
        let mix = CellFunction::new(
            &part,
            g1.values.iter().zip(&g2.values).map(|(x, y)| a * x + b * y).collect(),
        ).unwrap();
        let (d1, d2, dm) = (
            decompose(&part, &g1, &pr).unwrap(),
            decompose(&part, &g2, &pr).unwrap(),
            decompose(&part, &mix, &pr).unwrap(),
        );
        for t in 0..dm.parts.len() {
            for (k, &(c, v)) in dm.parts[t].cells.iter().enumerate() {
                prop_assert_eq!(c, d1.parts[t].cells[k].0);
                let want = a * d1.parts[t].cells[k].1 + b * d2.parts[t].cells[k].1;
                prop_assert!((v - want).abs() <= 1e-10 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn density_split_has_zero_mean(seed in any::<u64>(), beta in -0.2f64..0.5) {
        let cov = build_covering(&HolderProfile::demo(0.5), 5, 10_000).unwrap();
        let part = TreePartition::from_covering(&cov, WeightSpec::critical(beta, 0.5, 2.0));
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut f = CellFunction::random_mean_zero(&part, &mut r);
        f.values.iter_mut().for_each(|v| *v += 0.3);
        let s = density_split(&part, &f, 2.0, 10.0).unwrap();
        let l1: f64 = part.fragments().iter().zip(&s.g).map(|(fr, v)| fr.volume * v.abs()).sum();
        prop_assert!(s.integral.abs() <= 1e-12 * l1.max(1.0));
    }
}
