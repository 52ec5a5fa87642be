//! Shared domain types: deployment parameters, repair variables, operating
//! points and cost ledgers.

use crate::numeric::{from_usize, sum, Rational};
use num_traits::{One, Zero};
use std::fmt;

/// A deployment: `n` nodes, reconstruction degree `k`, `d` helpers, `t`
/// simultaneous repairs, and `M = weights.len()` base-station layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub t: usize,
    /// Per-symbol download cost of each layer, `w_l`.
    pub weights: Vec<Rational>,
    /// Link-capacity fraction of each layer, `b_l` (download cap `b_l·β`).
    pub capacities: Vec<Rational>,
    /// File size `F` in symbols.
    pub file_size: Rational,
}

impl SystemParams {
    /// Number of base-station layers.
    pub fn layers(&self) -> usize {
        self.weights.len()
    }

    /// Returns the parameters if they pass [`validate_params`].
    pub fn checked(self) -> Result<Self, ModelError> {
        let violations = validate_params(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(ModelError::InvalidParams(violations))
        }
    }

    /// Same deployment with every base-station layer removed.
    pub fn without_layers(&self) -> Self {
        SystemParams {
            weights: Vec::new(),
            capacities: Vec::new(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamViolation {
    ZeroK,
    KExceedsN { k: usize, n: usize },
    DBelowK { d: usize, k: usize },
    DExceedsNMinusT { d: usize, n: usize, t: usize },
    ZeroT,
    LayerCountMismatch { weights: usize, capacities: usize },
    WeightBelowOne { layer: usize },
    WeightsDescending { layer: usize },
    NegativeCapacity { layer: usize },
    NonPositiveFileSize,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamViolation::ZeroK => write!(f, "k ≥ 1"),
            ParamViolation::KExceedsN { k, n } => write!(f, "k ≤ n (k={k}, n={n})"),
            ParamViolation::DBelowK { d, k } => write!(f, "k ≤ d (d={d}, k={k})"),
            ParamViolation::DExceedsNMinusT { d, n, t } => {
                write!(f, "d ≤ n − t (d={d}, n={n}, t={t})")
            }
            ParamViolation::ZeroT => write!(f, "t ≥ 1"),
            ParamViolation::LayerCountMismatch {
                weights,
                capacities,
            } => write!(
                f,
                "w and b must have one entry per layer ({weights} weights, {capacities} capacities)"
            ),
            ParamViolation::WeightBelowOne { layer } => write!(f, "w_{layer} ≥ 1"),
            ParamViolation::WeightsDescending { layer } => {
                write!(f, "w non-descending (w_{layer} < w_{})", layer - 1)
            }
            ParamViolation::NegativeCapacity { layer } => write!(f, "b_{layer} ≥ 0"),
            ParamViolation::NonPositiveFileSize => write!(f, "F > 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<ParamViolation>),
    #[error("selector needs 0 ≤ rho ≤ M, got rho={rho}, M={layers}")]
    RhoOutOfRange { rho: usize, layers: usize },
    #[error("invalid repair variables: {0}")]
    InvalidVariables(String),
}

fn join(v: &[ParamViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Lists every violated parameter invariant; an empty list means valid.
/// Layers are reported 1-based.
pub fn validate_params(p: &SystemParams) -> Vec<ParamViolation> {
    let mut out = Vec::new();
    if p.k == 0 {
        out.push(ParamViolation::ZeroK);
    }
    if p.k > p.n {
        out.push(ParamViolation::KExceedsN { k: p.k, n: p.n });
    }
    if p.d < p.k {
        out.push(ParamViolation::DBelowK { d: p.d, k: p.k });
    }
    if p.t == 0 {
        out.push(ParamViolation::ZeroT);
    }
    if p.d + p.t > p.n {
        out.push(ParamViolation::DExceedsNMinusT {
            d: p.d,
            n: p.n,
            t: p.t,
        });
    }
    if p.weights.len() != p.capacities.len() {
        out.push(ParamViolation::LayerCountMismatch {
            weights: p.weights.len(),
            capacities: p.capacities.len(),
        });
    }
    let one = Rational::one();
    for (i, w) in p.weights.iter().enumerate() {
        if *w < one {
            out.push(ParamViolation::WeightBelowOne { layer: i + 1 });
        }
        if i > 0 && *w < p.weights[i - 1] {
            out.push(ParamViolation::WeightsDescending { layer: i + 1 });
        }
    }
    for (i, b) in p.capacities.iter().enumerate() {
        if *b < Rational::zero() {
            out.push(ParamViolation::NegativeCapacity { layer: i + 1 });
        }
    }
    if p.file_size <= Rational::zero() {
        out.push(ParamViolation::NonPositiveFileSize);
    }
    out
}

/// Which base-station layers are used: always the cheapest `rho` of the `M`
/// layers. Non-prefix subsets cannot be expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerSelector {
    rho: usize,
    layers: usize,
}

impl LayerSelector {
    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// `s_l` for 0-based layer index `l`.
    pub fn is_used(&self, l: usize) -> bool {
        l < self.rho
    }

    /// The binary vector `s`.
    pub fn bits(&self) -> Vec<u8> {
        (0..self.layers)
            .map(|l| u8::from(self.is_used(l)))
            .collect()
    }
}

/// Prefix-of-ones selector with `rho` ones out of `layers`.
pub fn selector(rho: usize, layers: usize) -> Result<LayerSelector, ModelError> {
    if rho > layers {
        return Err(ModelError::RhoOutOfRange { rho, layers });
    }
    Ok(LayerSelector { rho, layers })
}

/// A candidate operating assignment. `r[l]·β` symbols come from layer `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairVariables {
    pub beta: Rational,
    pub beta_prime: Rational,
    pub r: Vec<Rational>,
    pub selector: LayerSelector,
}

impl RepairVariables {
    /// Variables with every layer of `r` selected.
    pub fn all_layers(beta: Rational, beta_prime: Rational, r: Vec<Rational>) -> Self {
        let layers = r.len();
        RepairVariables {
            beta,
            beta_prime,
            r,
            selector: LayerSelector {
                rho: layers,
                layers,
            },
        }
    }

    /// `Σ s_l·r_l`.
    pub fn used_fraction(&self) -> Rational {
        sum(self.r.iter().take(self.selector.rho()))
    }

    /// `Σ s_l·w_l·r_l`.
    pub fn weighted_fraction(&self, weights: &[Rational]) -> Rational {
        self.r
            .iter()
            .zip(weights)
            .take(self.selector.rho())
            .fold(Rational::zero(), |acc, (r, w)| acc + r * w)
    }

    /// Checks `0 ≤ β, β' ≤ F/d`, `0 ≤ r_l ≤ b_l` and `r_l = 0` on unused
    /// layers.
    pub fn validate(&self, p: &SystemParams) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidVariables(msg));
        if self.r.len() != p.layers() || self.selector.layers() != p.layers() {
            return bad(format!(
                "expected {} layers, got r of length {} and selector over {}",
                p.layers(),
                self.r.len(),
                self.selector.layers()
            ));
        }
        let zero = Rational::zero();
        let cap = if p.d == 0 {
            None
        } else {
            Some(&p.file_size / from_usize(p.d))
        };
        for (name, v) in [("β", &self.beta), ("β'", &self.beta_prime)] {
            if *v < zero {
                return bad(format!("{name} < 0"));
            }
            if let Some(cap) = &cap {
                if v > cap {
                    return bad(format!("{name} > F/d"));
                }
            }
        }
        for (l, (r, b)) in self.r.iter().zip(&p.capacities).enumerate() {
            if *r < zero || r > b {
                return bad(format!("r_{} outside [0, b_{}]", l + 1, l + 1));
            }
            if !self.selector.is_used(l) && !r.is_zero() {
                return bad(format!("r_{} nonzero on an unused layer", l + 1));
            }
        }
        Ok(())
    }
}

/// A point `(α, γ)` of the trade-off together with the variables that
/// achieve it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatingPoint {
    pub alpha: Rational,
    pub gamma: Rational,
    pub witness: RepairVariables,
}

/// Per-newcomer transfer accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostLedger {
    pub local_symbols: usize,
    pub coop_symbols: usize,
    /// One count per base-station layer.
    pub bs_symbols: Vec<usize>,
    /// Size of one counted unit, in file-size units.
    pub symbol_size: Rational,
    pub total_cost: Rational,
}

impl CostLedger {
    /// Builds a ledger and prices it with the per-layer `weights`.
    pub fn priced(
        local_symbols: usize,
        coop_symbols: usize,
        bs_symbols: Vec<usize>,
        symbol_size: Rational,
        weights: &[Rational],
    ) -> Self {
        let mut units = from_usize(local_symbols + coop_symbols);
        for (count, w) in bs_symbols.iter().zip(weights) {
            units += from_usize(*count) * w;
        }
        let total_cost = &symbol_size * units;
        CostLedger {
            local_symbols,
            coop_symbols,
            bs_symbols,
            symbol_size,
            total_cost,
        }
    }

    pub fn total_symbols(&self) -> usize {
        self.local_symbols + self.coop_symbols + self.bs_symbols.iter().sum::<usize>()
    }

    /// Data moved, in file-size units.
    pub fn data_moved(&self) -> Rational {
        &self.symbol_size * from_usize(self.total_symbols())
    }
}
