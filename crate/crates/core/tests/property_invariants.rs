//! Property tests for the small algebraic invariants.

use proptest::prelude::*;

use dqas_core::bits::Bitstring;
use dqas_core::dqas::{arch_probabilities, cvar_from_energies, row_entropy, top_k};
use dqas_core::jssp::{scale_energy, EnergyBounds};

fn logits() -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 2..=9), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        cases: 64,
        ..ProptestConfig::default()
    })]

    #[test]
    fn bitstring_text_round_trip(index in any::<u64>(), len in 1usize..=24) {
        let bits = Bitstring::from_index(index, len);
        let back = Bitstring::from_text(&bits.to_string()).unwrap();
        prop_assert_eq!(bits, back);
    }

    #[test]
    fn softmax_rows_are_distributions(alpha in logits()) {
        let probs = arch_probabilities(&alpha);
        for row in &probs {
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&p| p >= 0.0));
            let entropy = row_entropy(row);
            prop_assert!(entropy >= -1e-12);
            prop_assert!(entropy <= (row.len() as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn cvar_is_monotone_and_bounded(
        energies in proptest::collection::vec(-1e3f64..1e3, 1..200),
        lo in 0.01f64..1.0,
        hi in 0.01f64..1.0,
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let c_lo = cvar_from_energies(&energies, lo).unwrap();
        let c_hi = cvar_from_energies(&energies, hi).unwrap();
        prop_assert!(c_lo <= c_hi + 1e-9);
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(c_lo >= min - 1e-9 && c_hi <= max + 1e-9);
    }

    #[test]
    fn scaling_is_monotone(a in -1e3f64..1e3, b in -1e3f64..1e3, span in 1e-3f64..1e3) {
        let bounds = EnergyBounds {
            e_min: -5.0,
            e_max: -5.0 + span,
            e_target: -5.0,
            argmin: Bitstring::zeros(1),
        };
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(scale_energy(x, &bounds).unwrap() <= scale_energy(y, &bounds).unwrap());
    }

    #[test]
    fn top_k_probabilities_never_increase(alpha in logits(), k in 1usize..12) {
        let top = top_k(&alpha, k);
        prop_assert!(!top.is_empty());
        for pair in top.windows(2) {
            prop_assert!(pair[0].1 >= pair[1].1 - 1e-15);
        }
        for (arch, prob) in &top {
            prop_assert_eq!(arch.len(), alpha.len());
            prop_assert!(*prob > 0.0 && *prob <= 1.0);
        }
    }
}
