//! Exact trade-off curve.
//!
//! With `z_l = r_l·β` the cost and every bound term become linear in
//! `(β, β', z_1..z_ρ)`, so each (layer count, regime) pair is a small LP.

use super::lp::{LinearProgram, LpOutcome, Relation};
use super::{optimal_points, OptimizerError};
use crate::bounds::psi;
use crate::model::{selector, OperatingPoint, RepairVariables, SystemParams};
use crate::numeric::{exact_string, from_usize, int, ratio, Rational};
use num_traits::{Signed, Zero};
use rayon::prelude::*;

/// Which branch of the piecewise bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `β ≥ 2β'`: singleton repair groups are the worst cut.
    SingletonGroups,
    /// `β ≤ 2β'`: maximal repair groups are the worst cut.
    MaximalGroups,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::SingletonGroups, Regime::MaximalGroups];
}

/// One linearised subproblem. Variables are `(β, β', z_1..z_ρ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffProgram {
    pub rho: usize,
    pub regime: Regime,
    pub lp: LinearProgram,
}

/// Builds the LP minimising `dβ + (t−1)β' + Σ w_l z_l` at storage `alpha`
/// using the first `rho` layers.
pub fn regime_program(
    p: &SystemParams,
    alpha: &Rational,
    rho: usize,
    regime: Regime,
) -> TradeoffProgram {
    let vars = 2 + rho;
    let mut objective = vec![from_usize(p.d), from_usize(p.t - 1)];
    objective.extend(p.weights[..rho].iter().cloned());
    let mut lp = LinearProgram::new(objective);

    let k = p.k;
    let t = p.t;
    for g in 1..=k {
        let squares = match regime {
            Regime::SingletonGroups => g,
            Regime::MaximalGroups => psi(g, t),
        };
        let g_r = from_usize(g);
        // gβ(d − k + g/2) + (squares/2)β
        let beta_coef = &g_r * (from_usize(p.d) - from_usize(k))
            + ratio((g * g) as i64, 2)
            + ratio(squares as i64, 2);
        let beta_prime_coef = from_usize(g * t) - from_usize(squares);
        let mut row = vec![beta_coef, beta_prime_coef];
        row.extend(std::iter::repeat_n(g_r, rho));
        let rhs = &p.file_size - alpha * from_usize(k - g);
        lp.push(row, Relation::Ge, rhs);
    }

    let mut regime_row = vec![Rational::zero(); vars];
    match regime {
        Regime::SingletonGroups => {
            regime_row[0] = int(1);
            regime_row[1] = int(-2);
        }
        Regime::MaximalGroups => {
            regime_row[0] = int(-1);
            regime_row[1] = int(2);
        }
    }
    lp.push(regime_row, Relation::Ge, Rational::zero());

    let cap = &p.file_size / from_usize(p.d);
    for i in 0..2 {
        let mut row = vec![Rational::zero(); vars];
        row[i] = int(1);
        lp.push(row, Relation::Le, cap.clone());
    }
    for l in 0..rho {
        let mut row = vec![Rational::zero(); vars];
        row[0] = -p.capacities[l].clone();
        row[2 + l] = int(1);
        lp.push(row, Relation::Le, Rational::zero());
    }
    TradeoffProgram { rho, regime, lp }
}

/// Minimum repair cost at storage `alpha` over `β`, `β'`, `r` and the layer
/// count.
pub fn min_cost_at_storage(
    p: &SystemParams,
    alpha: &Rational,
) -> Result<OperatingPoint, OptimizerError> {
    let p = p.clone().checked()?;
    let min_alpha = &p.file_size / from_usize(p.k);
    if *alpha < min_alpha {
        return Err(OptimizerError::InfeasibleStorage {
            alpha: exact_string(alpha),
            min: exact_string(&min_alpha),
        });
    }
    let mut best: Option<(Rational, usize, Vec<Rational>)> = None;
    for rho in 0..=p.layers() {
        for regime in Regime::ALL {
            let program = regime_program(&p, alpha, rho, regime);
            if let LpOutcome::Optimal { x, value } = program.lp.solve() {
                if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
                    best = Some((value, rho, x));
                }
            }
        }
    }
    let (gamma, rho, x) = best.ok_or(OptimizerError::NoOptimum { rho: p.layers() })?;
    let beta = x[0].clone();
    let r = (0..p.layers())
        .map(|l| {
            if l < rho && beta.is_positive() {
                &x[2 + l] / &beta
            } else {
                Rational::zero()
            }
        })
        .collect();
    Ok(OperatingPoint {
        alpha: alpha.clone(),
        gamma,
        witness: RepairVariables {
            beta,
            beta_prime: x[1].clone(),
            r,
            selector: selector(rho, p.layers())?,
        },
    })
}

/// The trade-off sampled on `grid_size` evenly spaced storage values from
/// `F/k` to the optimal BS-MBCCR storage, inclusive.
pub fn tradeoff_curve(
    p: &SystemParams,
    grid_size: usize,
) -> Result<Vec<OperatingPoint>, OptimizerError> {
    if grid_size < 2 {
        return Err(OptimizerError::GridTooSmall(grid_size));
    }
    let ends = optimal_points(p)?;
    let lo = ends.mscr.alpha.clone();
    let hi = ends.mbccr.alpha.clone();
    let step = (&hi - &lo) / from_usize(grid_size - 1);
    let alphas: Vec<Rational> = (0..grid_size)
        .map(|i| {
            if i + 1 == grid_size {
                hi.clone()
            } else {
                &lo + &step * from_usize(i)
            }
        })
        .collect();
    alphas
        .par_iter()
        .map(|a| min_cost_at_storage(p, a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tests::{reference_params, scenario};
    use super::*;
    use crate::bounds::{max_recoverable_file, repair_cost};

    fn check_witness(p: &SystemParams, pt: &OperatingPoint) {
        assert!(pt.witness.validate(p).is_ok());
        assert!(max_recoverable_file(p, &pt.witness, &pt.alpha) >= p.file_size);
        assert_eq!(repair_cost(p, &pt.witness).unwrap(), pt.gamma);
    }

    #[test]
    fn scenario_one_minimum_storage() {
        let p = scenario(vec![ratio(11, 10), ratio(17, 10)]);
        let pt = min_cost_at_storage(&p, &int(2)).unwrap();
        assert_eq!(pt.gamma, ratio(41, 15));
        check_witness(&p, &pt);
    }

    #[test]
    fn reference_endpoints_match_closed_forms() {
        let p = reference_params();
        let ends = optimal_points(&p).unwrap();
        let lo = min_cost_at_storage(&p, &ends.mscr.alpha).unwrap();
        let hi = min_cost_at_storage(&p, &ends.mbccr.alpha).unwrap();
        assert_eq!(lo.gamma, ends.mscr.gamma);
        assert_eq!(hi.gamma, ends.mbccr.gamma);
        check_witness(&p, &lo);
        check_witness(&p, &hi);
    }

    #[test]
    fn storage_below_minimum_is_rejected() {
        let p = reference_params();
        assert!(matches!(
            min_cost_at_storage(&p, &ratio(1, 7)),
            Err(OptimizerError::InfeasibleStorage { .. })
        ));
    }

    #[test]
    fn tail_is_flat_at_the_minimum_cost() {
        let p = reference_params();
        let ends = optimal_points(&p).unwrap();
        let mut prev: Option<Rational> = None;
        for mult in [1, 2, 5, 40] {
            let a = &ends.mbccr.alpha * int(mult);
            let pt = min_cost_at_storage(&p, &a).unwrap();
            assert_eq!(pt.gamma, ends.mbccr.gamma);
            if let Some(prev) = prev {
                assert!(pt.gamma <= prev);
            }
            prev = Some(pt.gamma);
        }
    }

    #[test]
    fn curve_is_sorted_and_non_increasing() {
        let p = reference_params();
        let curve = tradeoff_curve(&p, 9).unwrap();
        assert_eq!(curve.len(), 9);
        for w in curve.windows(2) {
            assert!(w[0].alpha < w[1].alpha);
            assert!(w[0].gamma >= w[1].gamma);
        }
        for pt in &curve {
            check_witness(&p, pt);
        }
    }

    #[test]
    fn two_point_grid_is_the_closed_form_pair() {
        let p = reference_params();
        let ends = optimal_points(&p).unwrap();
        let curve = tradeoff_curve(&p, 2).unwrap();
        assert_eq!(curve.len(), 2);
        assert_eq!(
            (&curve[0].alpha, &curve[0].gamma),
            (&ends.mscr.alpha, &ends.mscr.gamma)
        );
        assert_eq!(
            (&curve[1].alpha, &curve[1].gamma),
            (&ends.mbccr.alpha, &ends.mbccr.gamma)
        );
        assert!(tradeoff_curve(&p, 1).is_err());
    }

    #[test]
    fn layers_never_hurt_pointwise() {
        let p = reference_params();
        let local = p.without_layers();
        for pt in tradeoff_curve(&p, 6).unwrap() {
            let without = min_cost_at_storage(&local, &pt.alpha).unwrap();
            assert!(pt.gamma <= without.gamma);
        }
    }
}
