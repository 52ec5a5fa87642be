//! Repair cost and the recoverable-file-size bound.
//!
//! The bound is available two ways: the piecewise closed form indexed by the
//! number `g` of repaired nodes a data collector reaches
//! ([`max_recoverable_file`]), and the raw minimum over cut compositions
//! ([`bound_via_compositions`]). Each is the other's oracle.

use crate::model::{ModelError, RepairVariables, SystemParams};
use crate::numeric::{from_usize, ratio, Rational};

/// Largest `k` accepted by [`bound_via_compositions`].
pub const MAX_ENUMERATION_K: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("composition enumeration is limited to k ≤ {MAX_ENUMERATION_K}, got k={0}")]
    EnumerationTooLarge(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `ψ` replacement used by mutation tests of the verification sweeps.
pub type PsiFn = fn(usize, usize) -> usize;

/// One way a data collector's `k` nodes split into `u0` nodes cut at their
/// storage edge and repair groups of sizes `u_1..u_g`, in contact order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompositionVector {
    pub u0: usize,
    pub groups: Vec<usize>,
}

impl CompositionVector {
    pub fn is_valid(&self, k: usize, t: usize) -> bool {
        self.u0 + self.groups.iter().sum::<usize>() == k
            && self.groups.iter().all(|&u| u >= 1 && u <= t)
    }

    /// Number of repaired nodes in the collector, `k − u0`.
    pub fn repaired(&self) -> usize {
        self.groups.iter().sum()
    }
}

/// Every composition of `k` with group sizes in `[1, t]`, ordered by `u0`
/// descending and then lexicographically by groups.
pub fn compositions(k: usize, t: usize) -> Vec<CompositionVector> {
    fn extend(
        remaining: usize,
        t: usize,
        prefix: &mut Vec<usize>,
        u0: usize,
        out: &mut Vec<CompositionVector>,
    ) {
        if remaining == 0 {
            out.push(CompositionVector {
                u0,
                groups: prefix.clone(),
            });
            return;
        }
        for u in 1..=t.min(remaining) {
            prefix.push(u);
            extend(remaining - u, t, prefix, u0, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if t == 0 {
        out.push(CompositionVector {
            u0: k,
            groups: Vec::new(),
        });
        return out;
    }
    for u0 in (0..=k).rev() {
        extend(k - u0, t, &mut Vec::new(), u0, &mut out);
    }
    out
}

/// Total repair bandwidth cost per newcomer,
/// `d·β + (t−1)·β' + Σ s_l·w_l·r_l·β`.
pub fn repair_cost(p: &SystemParams, v: &RepairVariables) -> Result<Rational, ModelError> {
    v.validate(p)?;
    Ok(repair_cost_unchecked(p, v))
}

pub(crate) fn repair_cost_unchecked(p: &SystemParams, v: &RepairVariables) -> Rational {
    from_usize(p.d) * &v.beta
        + from_usize(p.t.saturating_sub(1)) * &v.beta_prime
        + v.weighted_fraction(&p.weights) * &v.beta
}

/// Effective helper count `d' = d + Σ s_l·r_l`.
pub fn effective_d(p: &SystemParams, v: &RepairVariables) -> Rational {
    from_usize(p.d) + v.used_fraction()
}

/// `ψ(g, t) = ⌊g/t⌋·t² + (g − ⌊g/t⌋·t)²`, the largest sum of squared group
/// sizes over compositions of `g` with parts at most `t`.
pub fn psi(g: usize, t: usize) -> usize {
    let full = g / t;
    let rest = g - full * t;
    full * t * t + rest * rest
}

/// `Φ = α(k−g) + gβ(d' − k + g/2) + β'·g·t`.
pub fn phi(
    g: usize,
    alpha: &Rational,
    beta: &Rational,
    beta_prime: &Rational,
    d_prime: &Rational,
    k: usize,
    t: usize,
) -> Rational {
    let g_r = from_usize(g);
    alpha * from_usize(k - g)
        + &g_r * beta * (d_prime - from_usize(k) + ratio(g as i64, 2))
        + beta_prime * &g_r * from_usize(t)
}

/// Closed-form bound term for a collector reaching `g` repaired nodes.
pub fn bound_at_g(g: usize, p: &SystemParams, v: &RepairVariables, alpha: &Rational) -> Rational {
    bound_at_g_with(g, p, v, alpha, psi)
}

pub fn bound_at_g_with(
    g: usize,
    p: &SystemParams,
    v: &RepairVariables,
    alpha: &Rational,
    psi_fn: PsiFn,
) -> Rational {
    let d_prime = effective_d(p, v);
    let base = phi(g, alpha, &v.beta, &v.beta_prime, &d_prime, p.k, p.t);
    let slack = &v.beta / from_usize(2) - &v.beta_prime;
    let groups_sq = if v.beta >= from_usize(2) * &v.beta_prime {
        g
    } else {
        psi_fn(g, p.t)
    };
    base + from_usize(groups_sq) * slack
}

/// Largest file size recoverable by every data collector:
/// `min_{g=0..k} bound_at_g`.
pub fn max_recoverable_file(p: &SystemParams, v: &RepairVariables, alpha: &Rational) -> Rational {
    max_recoverable_file_with(p, v, alpha, psi)
}

pub fn max_recoverable_file_with(
    p: &SystemParams,
    v: &RepairVariables,
    alpha: &Rational,
    psi_fn: PsiFn,
) -> Rational {
    (0..=p.k)
        .map(|g| bound_at_g_with(g, p, v, alpha, psi_fn))
        .min()
        .expect("g ranges over at least {0}")
}

/// Cut value of one composition:
/// `u0·α + Σ_j [u_j(d' − Σ_{i<j} u_i)β + u_j(t − u_j)β']`, where the inner
/// sum includes `u0`.
pub fn composition_value(
    p: &SystemParams,
    v: &RepairVariables,
    alpha: &Rational,
    c: &CompositionVector,
) -> Rational {
    let d_prime = effective_d(p, v);
    let mut total = alpha * from_usize(c.u0);
    let mut counted = c.u0;
    for &u in &c.groups {
        let u_r = from_usize(u);
        total += &u_r * (&d_prime - from_usize(counted)) * &v.beta;
        total += &u_r * from_usize(p.t - u) * &v.beta_prime;
        counted += u;
    }
    total
}

/// Minimum of [`composition_value`] over every composition of `k`.
pub fn bound_via_compositions(
    p: &SystemParams,
    v: &RepairVariables,
    alpha: &Rational,
) -> Result<Rational, BoundsError> {
    if p.k > MAX_ENUMERATION_K {
        return Err(BoundsError::EnumerationTooLarge(p.k));
    }
    Ok(compositions(p.k, p.t)
        .iter()
        .map(|c| composition_value(p, v, alpha, c))
        .min()
        .expect("at least the all-storage composition exists"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::selector;
    use crate::numeric::int;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn scenario(weights: Vec<Rational>) -> SystemParams {
        let m = weights.len();
        SystemParams {
            n: 4,
            k: 2,
            d: 2,
            t: 2,
            weights,
            capacities: vec![int(1); m],
            file_size: int(4),
        }
    }

    fn vars(beta: Rational, beta_prime: Rational, r: Vec<Rational>, rho: usize) -> RepairVariables {
        let m = r.len();
        RepairVariables {
            beta,
            beta_prime,
            r,
            selector: selector(rho, m).unwrap(),
        }
    }

    #[test]
    fn cost_matches_table_values() {
        let p = scenario(vec![ratio(11, 10), ratio(17, 10)]);
        let v = vars(ratio(1, 2), ratio(1, 2), vec![int(1), int(1)], 2);
        assert_eq!(repair_cost(&p, &v).unwrap(), ratio(29, 10));

        let p = scenario(vec![ratio(13, 10), ratio(21, 10)]);
        let v = vars(ratio(2, 3), ratio(2, 3), vec![int(1), int(0)], 1);
        assert_eq!(repair_cost(&p, &v).unwrap(), ratio(43, 15));

        let v = vars(int(0), int(0), vec![int(0), int(0)], 0);
        assert_eq!(repair_cost(&p, &v).unwrap(), int(0));
    }

    #[test]
    fn cost_rejects_invalid_variables() {
        let p = scenario(vec![ratio(11, 10)]);
        let v = vars(int(-1), int(0), vec![int(0)], 0);
        assert!(repair_cost(&p, &v).is_err());
    }

    #[test]
    fn effective_d_sums_used_layers() {
        let p = scenario(vec![ratio(11, 10), ratio(17, 10)]);
        let v = vars(ratio(1, 2), ratio(1, 2), vec![int(1), int(1)], 2);
        assert_eq!(effective_d(&p, &v), int(4));

        let p9 = SystemParams {
            n: 12,
            k: 6,
            d: 9,
            t: 3,
            ..scenario(vec![ratio(6, 5), ratio(7, 5)])
        };
        let v = vars(int(0), int(0), vec![int(1), ratio(3, 4)], 2);
        assert_eq!(effective_d(&p9, &v), ratio(43, 4));

        let p5 = SystemParams {
            n: 7,
            d: 5,
            ..scenario(vec![ratio(6, 5)])
        };
        let v = vars(int(0), int(0), vec![int(0)], 0);
        assert_eq!(effective_d(&p5, &v), int(5));
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0, 3), 0);
        assert_eq!(psi(2, 2), 4);
        assert_eq!(psi(7, 3), 19);
        assert_eq!(psi(5, 1), 5);
    }

    #[test]
    fn psi_is_the_largest_sum_of_squares() {
        for t in 1..=5 {
            for g in 0..=10 {
                let best = compositions(g, t)
                    .iter()
                    .filter(|c| c.u0 == 0)
                    .map(|c| c.groups.iter().map(|u| u * u).sum::<usize>())
                    .max()
                    .unwrap();
                assert_eq!(psi(g, t), best, "g={g} t={t}");
            }
        }
    }

    #[test]
    fn phi_values() {
        let half = ratio(1, 2);
        assert_eq!(phi(0, &int(2), &int(9), &int(9), &int(9), 2, 2), int(4));
        assert_eq!(phi(2, &int(2), &half, &half, &int(4), 2, 2), int(5));
        assert_eq!(phi(3, &int(7), &int(0), &int(0), &int(5), 3, 2), int(0));
    }

    #[test]
    fn bound_terms() {
        let p = scenario(vec![ratio(11, 10), ratio(17, 10)]);
        let v = vars(ratio(1, 2), ratio(1, 2), vec![int(1), int(1)], 2);
        assert_eq!(bound_at_g(2, &p, &v, &int(2)), int(4));
        assert_eq!(bound_at_g(0, &p, &v, &int(3)), int(6));
        // on the β = 2β' boundary the correction vanishes
        let v = vars(int(1), ratio(1, 2), vec![int(1), int(1)], 2);
        let d_prime = effective_d(&p, &v);
        assert_eq!(
            bound_at_g(1, &p, &v, &int(2)),
            phi(1, &int(2), &v.beta, &v.beta_prime, &d_prime, 2, 2)
        );
    }

    #[test]
    fn recoverable_file_at_scenario_one_witness() {
        let p = scenario(vec![ratio(11, 10), ratio(17, 10)]);
        let v = vars(ratio(1, 2), ratio(1, 2), vec![int(1), int(1)], 2);
        assert_eq!(max_recoverable_file(&p, &v, &int(2)), int(4));
        assert_eq!(bound_via_compositions(&p, &v, &int(2)).unwrap(), int(4));
        assert_eq!(compositions(2, 2).len(), 4);
    }

    #[test]
    fn no_download_recovers_nothing() {
        let p = scenario(vec![ratio(11, 10)]);
        let v = vars(int(0), int(0), vec![int(0)], 0);
        assert_eq!(max_recoverable_file(&p, &v, &int(2)), int(0));
        assert_eq!(bound_via_compositions(&p, &v, &int(2)).unwrap(), int(0));
    }

    #[test]
    fn storage_term_binds_with_abundant_helpers() {
        let mut p = scenario(vec![ratio(11, 10)]);
        p.capacities = vec![int(100)];
        let v = vars(int(1), int(1), vec![int(100)], 1);
        assert_eq!(max_recoverable_file(&p, &v, &int(2)), int(4));
    }

    #[test]
    fn single_failure_groups_are_singletons() {
        let p = SystemParams {
            n: 6,
            k: 3,
            d: 4,
            t: 1,
            weights: vec![],
            capacities: vec![],
            file_size: int(1),
        };
        let v = vars(ratio(1, 3), int(5), vec![], 0);
        let alpha = int(1);
        let expected = (0..=3usize)
            .map(|g| {
                let mut acc = &alpha * from_usize(3 - g);
                for j in 1..=g {
                    acc += (from_usize(4) - from_usize(3 - g) - from_usize(j - 1)) * &v.beta;
                }
                acc
            })
            .min()
            .unwrap();
        assert_eq!(bound_via_compositions(&p, &v, &alpha).unwrap(), expected);
        assert_eq!(max_recoverable_file(&p, &v, &alpha), expected);
    }

    #[test]
    fn enumeration_guard() {
        let p = SystemParams {
            n: 30,
            k: 13,
            d: 13,
            t: 2,
            weights: vec![],
            capacities: vec![],
            file_size: int(1),
        };
        let v = vars(int(0), int(0), vec![], 0);
        assert_eq!(
            bound_via_compositions(&p, &v, &int(1)),
            Err(BoundsError::EnumerationTooLarge(13))
        );
    }

    #[test]
    fn compositions_are_complete() {
        // ordered compositions of m with parts ≤ t, summed over u0
        for k in 0..=7 {
            for t in 1..=4 {
                let cs = compositions(k, t);
                assert!(cs.iter().all(|c| c.is_valid(k, t)));
                let mut counts = vec![0usize; k + 1];
                counts[0] = 1;
                for m in 1..=k {
                    counts[m] = (1..=t.min(m)).map(|u| counts[m - u]).sum();
                }
                assert_eq!(cs.len(), counts.iter().sum::<usize>());
            }
        }
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (0i64..=12, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
    }

    proptest! {
        #[test]
        fn closed_form_equals_enumeration(
            k in 1usize..=6,
            t in 1usize..=4,
            extra in 0usize..=3,
            alpha in small_rational(),
            beta in small_rational(),
            beta_prime in small_rational(),
            r in proptest::collection::vec((0i64..=4).prop_map(|x| ratio(x, 4)), 0..=2),
        ) {
            let m = r.len();
            let p = SystemParams {
                n: k + extra + t,
                k,
                d: k + extra,
                t,
                weights: vec![int(1); m],
                capacities: vec![int(1); m],
                file_size: int(1),
            };
            let v = vars(beta, beta_prime, r, m);
            prop_assert_eq!(
                bound_via_compositions(&p, &v, &alpha).unwrap(),
                max_recoverable_file(&p, &v, &alpha)
            );
        }

        #[test]
        fn bound_is_monotone(
            k in 1usize..=5,
            t in 1usize..=3,
            alpha in small_rational(),
            beta in small_rational(),
            beta_prime in small_rational(),
            r in (0i64..=4).prop_map(|x| ratio(x, 4)),
            bump in (1i64..=4).prop_map(|x| ratio(x, 4)),
        ) {
            let p = SystemParams {
                n: k + 1 + t,
                k,
                d: k + 1,
                t,
                weights: vec![int(1)],
                capacities: vec![int(2)],
                file_size: int(1),
            };
            let v = vars(beta.clone(), beta_prime.clone(), vec![r.clone()], 1);
            let base = max_recoverable_file(&p, &v, &alpha);
            let up_alpha = max_recoverable_file(&p, &v, &(&alpha + &bump));
            let up_beta = max_recoverable_file(&p, &vars(&beta + &bump, beta_prime.clone(), vec![r.clone()], 1), &alpha);
            let up_bp = max_recoverable_file(&p, &vars(beta.clone(), &beta_prime + &bump, vec![r.clone()], 1), &alpha);
            let up_r = max_recoverable_file(&p, &vars(beta, beta_prime, vec![r + bump], 1), &alpha);
            prop_assert!(up_alpha >= base);
            prop_assert!(up_beta >= base);
            prop_assert!(up_bp >= base);
            prop_assert!(up_r >= base);
        }
    }

    #[test]
    fn unused_layers_reduce_to_local_model() {
        let p = scenario(vec![ratio(11, 10), ratio(17, 10)]);
        let with = vars(ratio(1, 2), ratio(1, 4), vec![int(0), int(0)], 0);
        let local = SystemParams {
            weights: vec![],
            capacities: vec![],
            ..p.clone()
        };
        let without = vars(ratio(1, 2), ratio(1, 4), vec![], 0);
        assert_eq!(effective_d(&p, &with), from_usize(p.d));
        assert_eq!(
            max_recoverable_file(&p, &with, &int(2)),
            max_recoverable_file(&local, &without, &int(2))
        );
        assert!(repair_cost(&p, &with).unwrap() > Rational::zero());
    }
}
