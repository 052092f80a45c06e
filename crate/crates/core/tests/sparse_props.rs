use entropy_bump::grid::{inner_product, CellSet, DyadicCube, GridFunction};
use entropy_bump::lab::check_split;
use entropy_bump::sparse::{
    bilinear_form, build_disjoint_eq, carleson_check, cz_stopping_collection, haar_transform, sparse_dominate_bilinear,
    split_eight, stronger_sparse_check, CarlesonConvention, HaarSpec,
};
use entropy_bump::SparseCollection;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random tree of cubes whose strict descendants inside each member cover at
/// most half of it per generation, so the Carleson sum stays below `|Q|`.
fn packed_collection(n: u32, seed: u64) -> SparseCollection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut stack = vec![DyadicCube::ROOT];
    while let Some(q) = stack.pop() {
        out.push(q);
        let room = n - q.level();
        if room == 0 || rng.gen_bool(0.03) {
            continue;
        }
        if room >= 2 && rng.gen_bool(0.4) {
            // Two cubes from different halves, each at most a quarter of `q`.
            for half in q.children() {
                let depth = rng.gen_range(1..room);
                let level = half.level() + depth;
                let first = half.index() << depth;
                stack.push(DyadicCube::new(level, first + rng.gen_range(0..1u64 << depth)).unwrap());
            }
        } else {
            let depth = if rng.gen_bool(0.7) { 1 } else { rng.gen_range(1..=room.min(3)) };
            let level = q.level() + depth;
            let first = q.index() << depth;
            stack.push(DyadicCube::new(level, first + rng.gen_range(0..1u64 << depth)).unwrap());
        }
    }
    SparseCollection::new(n, out).unwrap()
}

fn heavy(n: u32, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridFunction::from_fn(n, |_| if rng.gen_bool(0.2) { rng.gen_range(0.0..100.0) } else { rng.gen::<f64>() }).unwrap()
}

fn nonneg(n: u32) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..5.0f64, 1usize << n)
}

#[test]
fn split_parts_are_strongly_sparse_on_deep_collections() {
    let mut max_depth = 0;
    for seed in 0..500u64 {
        let n = 8 + (seed % 13) as u32;
        let s = packed_collection(n, seed);
        assert!(carleson_check(&s, 2.0, CarlesonConvention::Proper).pass);
        max_depth = max_depth.max(*s.forest().depth.iter().max().unwrap());
        let out = check_split(&s).unwrap();
        assert!(out.partition && out.parts_sparse, "seed {seed}: worst {}", out.worst_ratio);
        assert!(out.worst_ratio <= 0.25);
    }
    // The check is only meaningful when chains outgrow the eight parts.
    assert!(max_depth >= 12, "deepest chain {max_depth}");
}

#[test]
fn split_of_certified_stopping_collections() {
    for seed in 0..500u64 {
        let n = 1 + (seed % 12) as u32;
        let a = [2.5, 3.0, 4.0, 8.0][(seed % 4) as usize];
        let s = cz_stopping_collection(&heavy(n, seed), &DyadicCube::ROOT, a).unwrap();
        assert!(build_disjoint_eq(&s).is_ok());
        let parts = split_eight(&s).unwrap();
        assert_eq!(parts.iter().map(|p| p.len()).sum::<usize>(), s.len());
        for p in &parts {
            assert!(stronger_sparse_check(p).pass);
        }
    }
}

#[test]
fn split_rejects_collections_without_packing() {
    let n = 6;
    let all: Vec<DyadicCube> = entropy_bump::grid::all_cubes(n);
    let s = SparseCollection::new(n, all).unwrap();
    assert!(split_eight(&s).is_err());
}

#[test]
fn e_sets_are_disjoint_and_inside_the_union() {
    for seed in 0..300u64 {
        let n = 1 + (seed % 10) as u32;
        let s = cz_stopping_collection(&heavy(n, seed + 1000), &DyadicCube::ROOT, [2.5, 3.0, 4.0, 8.0][(seed % 4) as usize])
            .unwrap();
        let cert = build_disjoint_eq(&s).expect("stopping collections are sparse");
        let union = s.union_set();
        let mut seen = CellSet::empty(n);
        for i in 0..s.len() {
            let e = cert.e_set(i);
            assert!(cert.e_ratio(i) > 0.5);
            assert!(e.is_subset(&union).unwrap());
            assert!(e.is_disjoint(&seen).unwrap(), "seed {seed}: E sets overlap");
            seen = seen.union(&e).unwrap();
        }
    }
}

proptest! {
    #[test]
    fn bilinear_monotone_and_symmetric(
        (f, g, df, dg) in (1u32..=6).prop_flat_map(|n| (nonneg(n), nonneg(n), nonneg(n), nonneg(n))),
        seed in any::<u64>(),
    ) {
        let n = (f.len() as f64).log2() as u32;
        let [f, g, df, dg] = [f, g, df, dg].map(|v| GridFunction::new(n, v).unwrap());
        let s = cz_stopping_collection(&heavy(n, seed), &DyadicCube::ROOT, 3.0).unwrap();
        let coll = [s];
        let base = bilinear_form(&coll, &f, &g).unwrap();
        let swapped = bilinear_form(&coll, &g, &f).unwrap();
        prop_assert!((base - swapped).abs() <= 1e-12 * base.max(1e-300));
        let bigger_f = f.zip_with(&df, |a, b| a + b).unwrap();
        let bigger_g = g.zip_with(&dg, |a, b| a + b).unwrap();
        prop_assert!(bilinear_form(&coll, &bigger_f, &g).unwrap() >= base * (1.0 - 1e-12));
        prop_assert!(bilinear_form(&coll, &f, &bigger_g).unwrap() >= base * (1.0 - 1e-12));
    }

    #[test]
    fn haar_transform_preserves_mean_zero_energy(
        values in (0u32..=8).prop_flat_map(|n| prop::collection::vec(-10.0..10.0f64, 1usize << n)),
        seed in any::<u64>(),
    ) {
        let n = (values.len() as f64).log2() as u32;
        let f = GridFunction::new(n, values).unwrap();
        let spec = HaarSpec::random(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let tf = haar_transform(&spec, &f).unwrap();
        let mean = f.values().iter().sum::<f64>() / f.len() as f64;
        let centered = f.map(|x| x - mean);
        let lhs = inner_product(&tf, &tf).unwrap();
        let rhs = inner_product(&centered, &centered).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-300), "{lhs} vs {rhs}");
    }

    #[test]
    fn domination_ratio_is_scale_invariant(seed in any::<u64>(), n in 1u32..=8, c in prop_oneof![0.001..0.999f64, 1.001..1000.0f64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = GridFunction::from_fn(n, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let g = GridFunction::from_fn(n, |_| rng.gen_range(-1.0..1.0)).unwrap();
        let spec = HaarSpec::random(n, &mut rng).unwrap();
        let base = sparse_dominate_bilinear(&spec, &f, &g, 4.0).unwrap();
        let scaled = sparse_dominate_bilinear(&spec, &f.scale(c), &g, 4.0).unwrap();
        prop_assert!(base.ratio <= 16.0);
        prop_assert!((scaled.ratio - base.ratio).abs() <= 1e-12 * base.ratio.max(1e-300), "{} vs {}", scaled.ratio, base.ratio);
    }
}
