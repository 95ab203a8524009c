//! Invariants over seeded random inputs.

use num_traits::{One, Zero};
use proptest::prelude::*;

use semicausal::factorization::{factorization_identity, swap_identity};
use semicausal::grow::{
    amplification_check, grow, grow_semimeasure, is_local_minimal_branch, EnumerationStream,
    LeafClass,
};
use semicausal::hypothesis::{
    likelihood_ratios, permutation_test, plugin_decomposition, shannon_sit,
    significance_sensitivity, Decomposer, PermutationScheme,
};
use semicausal::mixture::{markov_family, WeightScheme};
use semicausal::rational::{int, rat};
use semicausal::semimeasure::{
    deinterleave, interleave, random_bivariate, random_semimeasure, words, Semimeasure,
};
use semicausal::sim::{inverse_cdf_sample, DyadicRational, Sample, StructuralModel, TimeseriesPair};

fn total() -> impl Strategy<Value = (i64, i64)> {
    (1i64..=8).prop_map(|n| (n, 8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn factorization_and_swap_hold(seed in any::<u64>(), n in 1usize..=3, (a, b) in total()) {
        let p = random_bivariate(seed, n, 2, true, &rat(a, b)).unwrap();
        let c = factorization_identity(&p).unwrap();
        prop_assert!(c.holds && c.skipped == 0);
        prop_assert!(swap_identity(&p).unwrap());
    }

    #[test]
    fn decompositions_are_exact(seed in any::<u64>(), n in 1usize..=3, (a, b) in total()) {
        let p = random_bivariate(seed, n, 2, true, &rat(a, b)).unwrap();
        let d = Decomposer::new(&p).unwrap();
        for x in words(n, 2) {
            for y in words(n, 2) {
                prop_assert_eq!(d.at(&x, &y).unwrap().identity_holds(), Some(true));
            }
        }
        let s = shannon_sit(&p).unwrap();
        prop_assert!(s.identity_exact);
        prop_assert!(s.residual().abs() < 1e-9);
        if a == b {
            prop_assert!(s.si >= -1e-12);
            prop_assert!(s.sit_inst >= -1e-12);
        }
    }

    #[test]
    fn alpha_antitone_beta_monotone(s0 in any::<u64>(), s1 in any::<u64>()) {
        let p0 = random_semimeasure(s0, 2, 2, true, &int(1)).unwrap();
        let pa = random_semimeasure(s1, 2, 2, true, &int(1)).unwrap();
        let d = likelihood_ratios(&p0, &pa).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if d[i] <= d[j] {
                    let (ai, bi) = significance_sensitivity(&d, p0.leaves(), pa.leaves(), i).unwrap();
                    let (aj, bj) = significance_sensitivity(&d, p0.leaves(), pa.leaves(), j).unwrap();
                    prop_assert!(ai >= aj);
                    prop_assert!(bi <= bj);
                }
            }
        }
    }

    #[test]
    fn grow_rule_and_amplification(seed in any::<u64>(), n in 0usize..=3, (a, b) in total()) {
        let p = random_semimeasure(seed, 2 * n, 2, true, &rat(a, b)).unwrap();
        let t = grow(&p).unwrap();
        prop_assert!(is_local_minimal_branch(&p, &t.branch).unwrap());
        for (i, (before, after)) in p.leaves().iter().zip(t.output.leaves()).enumerate() {
            match t.classes[i] {
                LeafClass::Load => prop_assert_eq!(before, after),
                LeafClass::Halved => prop_assert_eq!(&(before / int(2)), after),
            }
        }
        prop_assert!(t.output.total() <= p.total());
        prop_assert!(amplification_check(&t).unwrap().holds);
        for (i, l) in t.load_nodes.iter().enumerate() {
            for m in &t.load_nodes[i + 1..] {
                prop_assert!(!m.starts_with(l) && !l.starts_with(m));
            }
        }
    }

    #[test]
    fn grow_commutes_with_scaling(seed in any::<u64>(), n in 1usize..=2, num in 1i64..=16) {
        let p = random_semimeasure(seed, 2 * n, 2, true, &int(1)).unwrap();
        let f = rat(num, 16);
        let scaled = grow(&p.scaled(&f).unwrap()).unwrap();
        prop_assert_eq!(scaled.output, grow(&p).unwrap().output.scaled(&f).unwrap());
    }

    #[test]
    fn grow_semimeasure_is_monotone(
        bumps in proptest::collection::vec((0usize..4, 0i64..=8), 1..30),
    ) {
        let unit = 256;
        let mut cur = [16i64; 4];
        let mut stages = vec![];
        for (leaf, d) in bumps {
            if cur.iter().sum::<i64>() + d <= unit {
                cur[leaf] += d;
            }
            stages.push(Semimeasure::new(2, 2, cur.iter().map(|&v| rat(v, unit)).collect()).unwrap());
        }
        let stream = EnumerationStream::new(stages).unwrap();
        let g = grow_semimeasure(&stream, 1000).unwrap();
        for w in g.tables.windows(2) {
            for (x, y) in w[0].leaves().iter().zip(w[1].leaves()) {
                prop_assert!(x <= y);
            }
        }
        prop_assert!(g.tables.iter().all(|q| q.total() <= Rational::one()));
        prop_assert!(g.stage_count() as u64 <= g.budget);
    }

    #[test]
    fn interleave_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let p = random_bivariate(seed, n, 2, false, &rat(3, 4)).unwrap();
        prop_assert_eq!(deinterleave(&interleave(&p).unwrap()).unwrap(), p);
    }

    #[test]
    fn definedness_monotone_in_precision(bits in proptest::collection::vec(any::<bool>(), 0..24), seed in any::<u64>()) {
        let p = random_semimeasure(seed, 1, 4, false, &rat(7, 8)).unwrap();
        let mut r = DyadicRational::empty();
        let mut seen: Option<usize> = None;
        for b in bits {
            let s = inverse_cdf_sample(p.leaves(), &r).unwrap();
            if let Some(x) = seen {
                prop_assert_eq!(s, Sample::Symbol(x));
            } else if let Sample::Symbol(x) = s {
                seen = Some(x);
            }
            r.push_bit(b);
        }
    }

    #[test]
    fn csv_round_trip(x in proptest::collection::vec(0u8..3, 1..50), seed in any::<u64>()) {
        let y: Vec<u8> = x.iter().map(|v| ((*v as u64 + seed) % 3) as u8).collect();
        let pair = TimeseriesPair::new(x, y, 3, "prop").unwrap();
        let back = TimeseriesPair::read_csv(pair.to_csv_string().as_bytes(), Some(3), "prop").unwrap();
        prop_assert_eq!(back.x(), pair.x());
        prop_assert_eq!(back.y(), pair.y());
    }

    #[test]
    fn plugin_identity(seed in any::<u64>(), k in 0usize..=2) {
        let pair = StructuralModel::lag1_copy("0.7").unwrap().simulate(300, seed).unwrap();
        let d = plugin_decomposition(&pair, k).unwrap();
        prop_assert!(d.identity_residual().unwrap().abs() < 1e-9);
        prop_assert!(d.swap_residual.unwrap().abs() < 1e-9);
        prop_assert!(d.factorization_residual.unwrap().abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mixture_dominates_components(g in 1u32..=3, n in 1usize..=3) {
        let fam = markov_family(1, g, n).unwrap();
        let m = fam.mixture(&WeightScheme::Dyadic).unwrap();
        let mat = m.materialize().unwrap();
        for (c, w) in fam.semimeasures().unwrap().iter().zip(m.weights()) {
            for (a, b) in c.leaves().iter().zip(mat.leaves()) {
                prop_assert!(b >= &(a * w));
            }
        }
        prop_assert!(m.dominance().unwrap().holds);
    }

    #[test]
    fn permutation_p_value_in_range(seed in any::<u64>(), trials in 1usize..20) {
        let pair = StructuralModel::independent().unwrap().simulate(200, seed).unwrap();
        let r = permutation_test(&pair, |p| Ok(Some(p.y()[0] as f64)), trials, seed, PermutationScheme::Shift).unwrap();
        prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        prop_assert!(r.p_value >= 1.0 / (trials as f64 + 1.0));
    }
}

use semicausal::Rational;

#[test]
fn zero_total_has_no_branch_preference() {
    let z = Semimeasure::zero(2, 2).unwrap();
    let t = grow(&z).unwrap();
    assert_eq!(t.branch, vec![0, 0]);
    assert!(t.output.total().is_zero());
}
