use maqd_core::code::{BaseGraph, Encoder, LiftedCode, Rate};
use maqd_core::decoder::{boxplus, min_sum};
use maqd_core::design::{edge_regions, region_count, Alignment, ThresholdQuantizer};
use maqd_core::fixed::{cluster_label, label_cluster, message_levels, round_llr, SignedGrid};
use maqd_core::ib::{
    conditional_mi, random_symmetric_clustering, sequential_ib_side, sort_by_llr, IbOptions,
    JointHistogram,
};
use maqd_core::rng::substream;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn symmetric_histogram(ny: usize, ns: usize, seed: u64) -> JointHistogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0; 2 * ny * ns];
    for y in 0..ny {
        for s in 0..ns {
            let tilt = ((y as f64 + 0.5) / ny as f64 - 0.5) * 3.0;
            let a = (rng.random::<f64>() + 0.01) * tilt.exp();
            let b = rng.random::<f64>() + 0.01;
            let i = (y * ns + s) * 2;
            let j = ((ny - 1 - y) * ns + (ns - 1 - s)) * 2;
            w[i] += a;
            w[j + 1] += a;
            w[i + 1] += b;
            w[j] += b;
        }
    }
    sort_by_llr(&JointHistogram::from_weights(ny, ns, &w).unwrap()).0
}

fn quantizer(width: u32, seed: u64) -> ThresholdQuantizer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = message_levels(width) as usize - 1;
    let mut t: Vec<i32> = rand::seq::index::sample(&mut rng, 64, levels)
        .into_iter()
        .map(|v| v as i32)
        .collect();
    t.sort_unstable();
    ThresholdQuantizer::new(width, t).unwrap()
}

proptest! {
    #[test]
    fn quantizer_is_odd_and_monotone(width in 2u32..=4, seed in any::<u64>()) {
        let q = quantizer(width, seed);
        let half = message_levels(width);
        let mut last = -half;
        for v in -127..=127 {
            let l = q.quantize(v);
            prop_assert!(l != 0 && l.abs() <= half);
            prop_assert!(l >= last);
            last = l;
            if v != 0 {
                prop_assert_eq!(q.quantize(-v), -l);
            }
        }
    }

    #[test]
    fn cluster_labels_round_trip_and_mirror(half in 1usize..=8, k in 0usize..16) {
        let n = 2 * half;
        let k = k % n;
        let l = cluster_label(k, n);
        prop_assert!(l != 0 && l.unsigned_abs() as usize <= half);
        prop_assert_eq!(label_cluster(l, n), k);
        prop_assert_eq!(cluster_label(n - 1 - k, n), -l);
    }

    #[test]
    fn signed_grid_round_trip(max in 0i32..200, v in -200i32..200, neg in any::<bool>()) {
        let g = SignedGrid::new(max);
        let m = v.abs().min(max);
        let i = g.index(neg, m);
        prop_assert!(i < g.len());
        prop_assert_eq!(g.value(i), (neg, m));
        prop_assert_eq!(g.value(g.mirror(i)), (!neg, m));
    }

    #[test]
    fn rounding_is_odd_and_saturates(x in -1e3f64..1e3, scale in 0.1f64..10.0, max in 1i32..128) {
        let r = round_llr(x, scale, max);
        prop_assert_eq!(round_llr(-x, scale, max), -r);
        prop_assert!((r as i32).abs() <= max);
    }

    #[test]
    fn min_sum_matches_the_definition(ins in prop::collection::vec(-31i16..=31, 2..8)) {
        let mut out = vec![(false, 0i16); ins.len()];
        min_sum(&ins, &mut out);
        for (k, &(neg, mag)) in out.iter().enumerate() {
            let others = ins.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v);
            let m = others.clone().map(i16::abs).min().unwrap();
            let n = others.filter(|&v| v < 0).count() % 2 == 1;
            prop_assert_eq!((neg, mag), (n, m));
        }
    }

    #[test]
    fn boxplus_is_commutative_and_bounded(a in -40f64..40.0, b in -40f64..40.0) {
        let c = boxplus(a, b);
        prop_assert!((c - boxplus(b, a)).abs() < 1e-12);
        prop_assert!(c.abs() <= a.abs().min(b.abs()) + 1e-12);
        prop_assert!(c == 0.0 || (c < 0.0) == ((a < 0.0) != (b < 0.0)));
    }

    #[test]
    fn compression_keeps_mass_symmetry_and_loses_information(
        ny_half in 3usize..10, ns in 1usize..5, clusters in 1usize..4, seed in any::<u64>()
    ) {
        let ny = 2 * ny_half;
        let n = 2 * clusters.min(ny_half - 1) + 2;
        let p = symmetric_histogram(ny, ns, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let c = random_symmetric_clustering(ny, n, &mut rng);
        prop_assert!(c.is_symmetric());
        let t = c.compress(&p);
        prop_assert!((t.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(t.is_symmetric(1e-12));
        let (full, kept) = (conditional_mi(&p), conditional_mi(&t));
        prop_assert!(kept >= -1e-15 && kept <= full + 1e-12);
    }

    #[test]
    fn optimizer_output_is_symmetric_and_bounded(ny_half in 3usize..9, ns in 1usize..4, seed in any::<u64>()) {
        let ny = 2 * ny_half;
        let p = symmetric_histogram(ny, ns, seed);
        let opts = IbOptions { inits: 20, seed, debug_check: true };
        let r = sequential_ib_side(&p, 4, &opts).unwrap();
        prop_assert!(r.clustering.is_symmetric());
        prop_assert_eq!(r.clustering.clusters(), 4);
        prop_assert!((r.preserved - conditional_mi(&r.joint)).abs() < 1e-12);
        prop_assert!(r.preserved <= conditional_mi(&p) + 1e-12);
    }

    #[test]
    fn substreams_are_reproducible(seed in any::<u64>(), domain in 0u64..8, index in any::<u64>()) {
        let a: Vec<u64> = (0..4).map({ let mut r = substream(seed, domain, index); move |_| r.random() }).collect();
        let b: Vec<u64> = (0..4).map({ let mut r = substream(seed, domain, index); move |_| r.random() }).collect();
        let c: Vec<u64> = (0..4).map({ let mut r = substream(seed, domain, index ^ 1); move |_| r.random() }).collect();
        prop_assert_eq!(&a, &b);
        prop_assert_ne!(a, c);
    }
}

fn code(z: usize, rate: Rate) -> LiftedCode {
    LiftedCode::lift(&BaseGraph::nr_bg1_set0().rate_adapt(rate).unwrap(), z).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn encoded_words_satisfy_every_check(z in prop::sample::select(vec![2usize, 3, 4, 8, 12]), seed in any::<u64>()) {
        let code = code(z, Rate::new(1, 2));
        let enc = Encoder::new(&code).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
        let word = enc.encode(&info).unwrap().bits;
        prop_assert_eq!(&word[..code.k()], &info[..]);
        prop_assert!(code.is_codeword(&word));
    }

    #[test]
    fn row_regions_follow_base_rows(z in prop::sample::select(vec![2usize, 4, 8])) {
        let code = code(z, Rate::new(2, 3));
        let rows = edge_regions(&code, Alignment::Row);
        prop_assert_eq!(region_count(&code, Alignment::Row), code.base().rows());
        for (e, &r) in rows.iter().enumerate() {
            prop_assert_eq!(r, code.edge(e).row);
        }
        prop_assert_eq!(region_count(&code, Alignment::Matrix), 1);
        prop_assert!(edge_regions(&code, Alignment::Matrix).iter().all(|&r| r == 0));
    }
}
