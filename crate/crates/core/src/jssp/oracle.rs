//! Exhaustive enumeration oracle and energy scaling.

use rayon::prelude::*;

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::jssp::qubo::QuboProblem;

/// Largest variable count the oracle enumerates (2^24 states).
pub const ENUMERATION_BUDGET: usize = 24;

/// Exact energy bounds of a QUBO, from full enumeration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyBounds {
    pub e_min: f64,
    pub e_max: f64,
    /// Training target; always the enumerated minimum.
    pub e_target: f64,
    pub argmin: Bitstring,
}

/// Enumerate every bitstring; exact minimum/maximum with the argmin
/// tie-broken to the lowest basis-state index, so results are independent
/// of chunking.
pub fn brute_force_oracle(qubo: &QuboProblem) -> Result<EnergyBounds> {
    let n = qubo.num_vars();
    if n > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget {
            n,
            max: ENUMERATION_BUDGET,
        });
    }
    let total = 1u64 << n;

    #[derive(Clone, Copy)]
    struct Acc {
        min: f64,
        argmin: u64,
        max: f64,
    }
    let merge = |a: Acc, b: Acc| -> Acc {
        let (min, argmin) = if b.min < a.min || (b.min == a.min && b.argmin < a.argmin) {
            (b.min, b.argmin)
        } else {
            (a.min, a.argmin)
        };
        Acc {
            min,
            argmin,
            max: a.max.max(b.max),
        }
    };

    let chunk = 1u64 << n.min(16);
    let acc = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(total);
            let mut acc = Acc {
                min: f64::INFINITY,
                argmin: 0,
                max: f64::NEG_INFINITY,
            };
            for idx in start..end {
                let e = qubo.energy_of_index(idx);
                if e < acc.min || (e == acc.min && idx < acc.argmin) {
                    acc.min = e;
                    acc.argmin = idx;
                }
                if e > acc.max {
                    acc.max = e;
                }
            }
            acc
        })
        .reduce(
            || Acc {
                min: f64::INFINITY,
                argmin: u64::MAX,
                max: f64::NEG_INFINITY,
            },
            merge,
        );

    Ok(EnergyBounds {
        e_min: acc.min,
        e_max: acc.max,
        e_target: acc.min,
        argmin: Bitstring::from_index(acc.argmin, n),
    })
}

/// Map an energy onto [0, 1]: `(E - E_min) / (E_max - E_min)`.
pub fn scale_energy(energy: f64, bounds: &EnergyBounds) -> Result<f64> {
    let span = bounds.e_max - bounds.e_min;
    if span <= 0.0 {
        return Err(Error::DegenerateBounds(bounds.e_min));
    }
    Ok((energy - bounds.e_min) / span)
}
