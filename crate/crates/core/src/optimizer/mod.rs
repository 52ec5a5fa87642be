//! Operating points of the cost/storage trade-off.
//!
//! Closed forms give the minimum-storage (MSCR) and minimum-bandwidth-cost
//! (MBCCR) points for a fixed set of base-station fractions `r`;
//! [`opt_bs_count`] picks how many layers to use; [`min_cost_at_storage`]
//! solves the full problem at an arbitrary storage level by exact linear
//! programming.

mod curve;
pub mod lp;

pub use curve::{min_cost_at_storage, regime_program, tradeoff_curve, Regime, TradeoffProgram};

use crate::model::{selector, ModelError, OperatingPoint, RepairVariables, SystemParams};
use crate::numeric::{from_usize, int, sum, Rational};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimizerError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-positive denominator in closed form ({0})")]
    NonPositiveDenominator(String),
    #[error("storage α={alpha} is below the minimum F/k={min}")]
    InfeasibleStorage { alpha: String, min: String },
    #[error("invalid base-station fractions: {0}")]
    InvalidFractions(String),
    #[error("baseline comparison needs exactly 2 layers, got {0}")]
    BaselineLayers(usize),
    #[error("baseline comparison needs β > 0")]
    DegenerateBeta,
    #[error("grid size must be at least 2, got {0}")]
    GridTooSmall(usize),
    #[error("linear program for rho={rho} has no optimum")]
    NoOptimum { rho: usize },
}

/// MSCR (`p_t = 1`) or MBCCR (`p_t = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Mscr,
    Mbccr,
}

impl PointKind {
    pub const ALL: [PointKind; 2] = [PointKind::Mscr, PointKind::Mbccr];

    pub fn name(self) -> &'static str {
        match self {
            PointKind::Mscr => "BS-MSCR",
            PointKind::Mbccr => "BS-MBCCR",
        }
    }
}

fn check_fractions(p: &SystemParams, r: &[Rational], rho: usize) -> Result<(), OptimizerError> {
    if r.len() != p.layers() {
        return Err(OptimizerError::InvalidFractions(format!(
            "expected {} entries, got {}",
            p.layers(),
            r.len()
        )));
    }
    if rho > p.layers() {
        return Err(ModelError::RhoOutOfRange {
            rho,
            layers: p.layers(),
        }
        .into());
    }
    for (l, (rl, bl)) in r.iter().zip(&p.capacities).enumerate() {
        if rl.is_negative() || rl > bl {
            return Err(OptimizerError::InvalidFractions(format!(
                "r_{} outside [0, b_{}]",
                l + 1,
                l + 1
            )));
        }
    }
    Ok(())
}

/// `r` restricted to the first `rho` layers, zero elsewhere.
fn masked(r: &[Rational], rho: usize) -> Vec<Rational> {
    r.iter()
        .enumerate()
        .map(|(l, x)| if l < rho { x.clone() } else { Rational::zero() })
        .collect()
}

fn prefix_sums(p: &SystemParams, r: &[Rational], rho: usize) -> (Rational, Rational) {
    let used = sum(&r[..rho]);
    let weighted = r[..rho]
        .iter()
        .zip(&p.weights)
        .fold(Rational::zero(), |acc, (x, w)| acc + x * w);
    (used, weighted)
}

/// Minimum-storage point for fixed fractions `r` on the first `rho` layers.
pub fn mscr_point(
    p: &SystemParams,
    r: &[Rational],
    rho: usize,
) -> Result<OperatingPoint, OptimizerError> {
    check_fractions(p, r, rho)?;
    let (used, weighted) = prefix_sums(p, r, rho);
    let d = from_usize(p.d);
    let k = from_usize(p.k);
    let t = from_usize(p.t);
    let denom = &d + &used + &t - &k;
    if !denom.is_positive() {
        return Err(OptimizerError::NonPositiveDenominator(
            "d + Σr + t − k".into(),
        ));
    }
    let beta = &p.file_size / (&k * &denom);
    let gamma = &beta * (&d + &weighted + &t - Rational::one());
    Ok(OperatingPoint {
        alpha: &p.file_size / &k,
        gamma,
        witness: RepairVariables {
            beta: beta.clone(),
            beta_prime: beta,
            r: masked(r, rho),
            selector: selector(rho, p.layers())?,
        },
    })
}

/// Minimum-bandwidth-cost point for fixed fractions `r` on the first `rho`
/// layers. The witness sits on `β = 2β'`.
pub fn mbccr_point(
    p: &SystemParams,
    r: &[Rational],
    rho: usize,
) -> Result<OperatingPoint, OptimizerError> {
    check_fractions(p, r, rho)?;
    let (used, weighted) = prefix_sums(p, r, rho);
    let two = int(2);
    let d = from_usize(p.d);
    let k = from_usize(p.k);
    let t = from_usize(p.t);
    let denom = &two * (&d + &used) + &t - &k;
    if !denom.is_positive() {
        return Err(OptimizerError::NonPositiveDenominator(
            "2(d + Σr) + t − k".into(),
        ));
    }
    let scale = &p.file_size / (&k * &denom);
    let gamma = &scale * (&two * (&d + &weighted) + &t - Rational::one());
    let alpha = &scale * (&two * (&d + &used) + &t - Rational::one());
    let beta = &two * &scale;
    Ok(OperatingPoint {
        alpha,
        gamma,
        witness: RepairVariables {
            beta_prime: &beta / &two,
            beta,
            r: masked(r, rho),
            selector: selector(rho, p.layers())?,
        },
    })
}

/// Closed-form point of either kind.
pub fn closed_form_point(
    p: &SystemParams,
    kind: PointKind,
    r: &[Rational],
    rho: usize,
) -> Result<OperatingPoint, OptimizerError> {
    match kind {
        PointKind::Mscr => mscr_point(p, r, rho),
        PointKind::Mbccr => mbccr_point(p, r, rho),
    }
}

/// Weight threshold `w̄_t` for the accumulated `d_bar = d + Σ w_l b_l` and
/// `b_bar = d + Σ b_l`.
pub fn prop1_threshold(
    p: &SystemParams,
    kind: PointKind,
    d_bar: &Rational,
    b_bar: &Rational,
) -> Result<Rational, OptimizerError> {
    let k = from_usize(p.k);
    let t = from_usize(p.t);
    let one = Rational::one();
    let (num, den) = match kind {
        PointKind::Mscr => (d_bar + &t - &one, b_bar + &t - &k),
        PointKind::Mbccr => (int(2) * d_bar + &t - &one, int(2) * b_bar + &t - &k),
    };
    if !den.is_positive() {
        return Err(OptimizerError::NonPositiveDenominator(
            "threshold denominator".into(),
        ));
    }
    Ok(num / den)
}

/// Whether `Σ_{l≤ρ} w_l r_l ≤ w̄_t Σ_{l≤ρ} r_l` with the threshold taken at
/// `d_bar = b_bar = d`.
pub fn prop1_holds(p: &SystemParams, r: &[Rational], rho: usize, kind: PointKind) -> bool {
    let rho = rho.min(r.len()).min(p.layers());
    let d = from_usize(p.d);
    let Ok(threshold) = prop1_threshold(p, kind, &d, &d) else {
        return false;
    };
    let (used, weighted) = prefix_sums(p, r, rho);
    weighted <= threshold * used
}

/// Optimal number of base-station layers: greedily add layer `i` while
/// `w_i ≤ w̄_t` evaluated on the layers already added at full capacity.
pub fn opt_bs_count(p: &SystemParams, kind: PointKind) -> usize {
    let mut rho = 0;
    let mut d_bar = from_usize(p.d);
    let mut b_bar = from_usize(p.d);
    for (w, b) in p.weights.iter().zip(&p.capacities) {
        let Ok(threshold) = prop1_threshold(p, kind, &d_bar, &b_bar) else {
            break;
        };
        if *w > threshold {
            break;
        }
        rho += 1;
        d_bar += w * b;
        b_bar += b;
    }
    rho
}

/// The two closed-form optimal points with `r_l = b_l` on the chosen layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalPoints {
    pub mscr: OperatingPoint,
    pub mbccr: OperatingPoint,
    pub rho_mscr: usize,
    pub rho_mbccr: usize,
}

impl OptimalPoints {
    pub fn get(&self, kind: PointKind) -> (&OperatingPoint, usize) {
        match kind {
            PointKind::Mscr => (&self.mscr, self.rho_mscr),
            PointKind::Mbccr => (&self.mbccr, self.rho_mbccr),
        }
    }
}

pub fn optimal_points(p: &SystemParams) -> Result<OptimalPoints, OptimizerError> {
    let p = p.clone().checked()?;
    let rho_mscr = opt_bs_count(&p, PointKind::Mscr);
    let rho_mbccr = opt_bs_count(&p, PointKind::Mbccr);
    Ok(OptimalPoints {
        mscr: mscr_point(&p, &p.capacities, rho_mscr)?,
        mbccr: mbccr_point(&p, &p.capacities, rho_mbccr)?,
        rho_mscr,
        rho_mbccr,
    })
}

/// Per-newcomer cost of the four reference repair schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineCosts {
    /// Download `k·α = F` from local nodes, no cooperation.
    pub no_coop_local: Rational,
    /// Cooperative repair without base stations.
    pub coop_local: Rational,
    /// Cooperative repair with the given base-station fractions at fixed `β`.
    pub coop_layer: Rational,
    /// Base station up to its cap, the rest of `α` from the top layer.
    pub full_layer: Rational,
}

/// Reference costs for a two-layer deployment at a fixed local download
/// `beta` with fractions `r`.
pub fn baseline_costs(
    p: &SystemParams,
    beta: &Rational,
    r: &[Rational],
) -> Result<BaselineCosts, OptimizerError> {
    if p.layers() != 2 {
        return Err(OptimizerError::BaselineLayers(p.layers()));
    }
    if !beta.is_positive() {
        return Err(OptimizerError::DegenerateBeta);
    }
    let p = p.clone().checked()?;
    let rho = r.iter().rposition(|x| !x.is_zero()).map_or(0, |i| i + 1);
    check_fractions(&p, r, rho)?;
    let no_coop_local = p.file_size.clone();
    let coop_local = mscr_point(&p, &vec![Rational::zero(); 2], 0)?.gamma;
    let v = RepairVariables {
        beta: beta.clone(),
        beta_prime: beta.clone(),
        r: r.to_vec(),
        selector: selector(rho, 2)?,
    };
    let coop_layer = crate::bounds::repair_cost(&p, &v)?;
    let alpha = &p.file_size / from_usize(p.k);
    let from_bs = &p.capacities[0] * beta;
    let full_layer = &from_bs * &p.weights[0] + (&alpha - &from_bs) * &p.weights[1];
    Ok(BaselineCosts {
        no_coop_local,
        coop_local,
        coop_layer,
        full_layer,
    })
}
