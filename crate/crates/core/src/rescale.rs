//! Weighted rescaling of polynomial families in `t`, breakpoints of the
//! limit as the scale exponent varies, and the cusp and `A_k` stability tests.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::series::{Monomial, PolyFamily, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RescaleError {
    #[error("family is identically zero")]
    ZeroFamily,
    #[error("{weights} weights for {variables} variables")]
    WeightMismatch { weights: usize, variables: usize },
    #[error("weight {index} is not positive")]
    NonPositiveWeight { index: usize },
    #[error("scale exponent must be positive, got {c}")]
    NonPositiveScale { c: Rat },
    #[error("no breakpoints at stage {stage}: the family is already in its terminal regime")]
    EmptyBreakpoints { stage: usize },
    #[error("stage {stage} has {available} breakpoints, cannot take number {requested}")]
    MissingBreakpoint { stage: usize, requested: usize, available: usize },
    #[error("cone angle parameter must lie in (0, 1), got {beta}")]
    InvalidAngle { beta: Rat },
    #[error("dimension must be at least 3, got {n}")]
    DimensionTooSmall { n: u32 },
}

/// Positive rational weights, one per variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct WeightVector {
    weights: Vec<Rat>,
}

impl WeightVector {
    pub fn new(weights: Vec<Rat>) -> Result<Self, RescaleError> {
        if let Some(index) = weights.iter().position(|w| !w.is_positive()) {
            return Err(RescaleError::NonPositiveWeight { index });
        }
        Ok(WeightVector { weights })
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    fn check(&self, family: &PolyFamily) -> Result<(), RescaleError> {
        if family.is_zero() {
            return Err(RescaleError::ZeroFamily);
        }
        if self.weights.len() != family.variables().len() {
            return Err(RescaleError::WeightMismatch {
                weights: self.weights.len(),
                variables: family.variables().len(),
            });
        }
        Ok(())
    }

    /// `<w, deg m>`, the rate at which a monomial's `t` exponent grows with `c`.
    fn slope(&self, m: &Monomial) -> Rat {
        m.degrees.iter().zip(&self.weights).map(|(d, w)| w * &Rat::from(*d)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RescaleResult {
    /// Substituted family divided by its lowest power of `t`.
    pub rescaled: PolyFamily,
    /// The `t^0` part, normalized.
    pub limit: PolyFamily,
    pub c_used: Rat,
    /// Rendered terms of positive `t` exponent, which vanish in the limit.
    pub dropped_terms: Vec<String>,
}

/// Substitutes `x_j = t^(c w_j) x_j`, divides by the lowest resulting power of
/// `t` and takes `t = 0`.
pub fn rescale(family: &PolyFamily, weights: &WeightVector, c: &Rat) -> Result<RescaleResult, RescaleError> {
    weights.check(family)?;
    if !c.is_positive() {
        return Err(RescaleError::NonPositiveScale { c: c.clone() });
    }
    let substituted = family.weighted_substitute(weights.weights(), c);
    let e_min = substituted.min_t_exponent().expect("nonzero family");
    let rescaled = substituted.shift_t(&-&e_min);
    let limit = rescaled.t0_part().normalized();
    let vars = rescaled.variables().to_vec();
    let dropped_terms = rescaled
        .ordered_terms()
        .into_iter()
        .filter(|(m, _)| m.t_exp.is_positive())
        .map(|(m, coeff)| PolyFamily::from_terms(&vars, [(m.clone(), coeff.clone())]).to_string())
        .collect();
    Ok(RescaleResult { rescaled, limit, c_used: c.clone(), dropped_terms })
}

/// Values `c > 0` at which the set of monomials of least `t` exponent changes.
///
/// Each monomial traces the line `e + c <w, deg>`; the minimizing set changes
/// exactly where lines of different slopes meet on the lower envelope.
pub fn breakpoints(family: &PolyFamily, weights: &WeightVector) -> Result<Vec<Rat>, RescaleError> {
    weights.check(family)?;
    let lines: BTreeSet<(Rat, Rat)> =
        family.terms().map(|(m, _)| (m.t_exp.clone(), weights.slope(m))).collect();
    let lines: Vec<(Rat, Rat)> = lines.into_iter().collect();
    let mut candidates = BTreeSet::new();
    for (a, (ea, sa)) in lines.iter().enumerate() {
        for (eb, sb) in &lines[a + 1..] {
            if sa != sb {
                let c = &(eb - ea) / &(sa - sb);
                if c.is_positive() {
                    candidates.insert(c);
                }
            }
        }
    }
    let mut out = Vec::new();
    for c in candidates {
        let values: Vec<Rat> = lines.iter().map(|(e, s)| e + &(&c * s)).collect();
        let min = values.iter().min().expect("nonempty").clone();
        let slopes: BTreeSet<&Rat> =
            lines.iter().zip(&values).filter(|(_, v)| **v == min).map(|((_, s), _)| s).collect();
        if slopes.len() > 1 {
            out.push(c);
        }
    }
    Ok(out)
}

/// Which breakpoint each cascade stage rescales at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CascadePolicy {
    #[default]
    Smallest,
    Largest,
    /// 0-based index into the sorted breakpoints.
    Nth(usize),
}

/// Rescales stage by stage, feeding each stage's rescaled family to the next.
pub fn iterate_cascade(
    family: &PolyFamily,
    schedule: &[WeightVector],
    policy: CascadePolicy,
) -> Result<Vec<RescaleResult>, RescaleError> {
    let mut current = family.clone();
    let mut out = Vec::with_capacity(schedule.len());
    for (stage, weights) in schedule.iter().enumerate() {
        let bps = breakpoints(&current, weights)?;
        if bps.is_empty() {
            return Err(RescaleError::EmptyBreakpoints { stage });
        }
        let c = match policy {
            CascadePolicy::Smallest => bps[0].clone(),
            CascadePolicy::Largest => bps[bps.len() - 1].clone(),
            CascadePolicy::Nth(n) => bps.get(n).cloned().ok_or(RescaleError::MissingBreakpoint {
                stage,
                requested: n,
                available: bps.len(),
            })?,
        };
        let result = rescale(&current, weights, &c)?;
        current = result.rescaled.clone();
        out.push(result);
    }
    Ok(out)
}

/// Stability class of the cusp `w^2 = z^3` with cone angle parameter `beta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "class")]
pub enum CuspClass {
    NotKlt,
    /// Weights `(2/alpha, 3/alpha)` on `(z, w)` with `alpha = 3 beta - 1/2`.
    Stable { alpha: Rat, weights: (Rat, Rat) },
    /// Both weight formulas give `(1, 3/2)`.
    StrictlySemistable { weights: (Rat, Rat) },
    /// Weights `(1, 1/gamma)` on `(z, w)` with `gamma = 2 beta - 1`.
    Unstable { gamma: Rat, weights: (Rat, Rat) },
}

pub fn cusp_classify(beta: &Rat) -> Result<CuspClass, RescaleError> {
    if !beta.is_positive() || *beta >= Rat::one() {
        return Err(RescaleError::InvalidAngle { beta: beta.clone() });
    }
    let sixth = Rat::new(1, 6);
    let five_sixths = Rat::new(5, 6);
    if *beta <= sixth {
        return Ok(CuspClass::NotKlt);
    }
    let alpha = &(&Rat::integer(3) * beta) - &Rat::new(1, 2);
    let gamma = &(&Rat::integer(2) * beta) - &Rat::one();
    if *beta < five_sixths {
        let weights = (&Rat::integer(2) / &alpha, &Rat::integer(3) / &alpha);
        Ok(CuspClass::Stable { alpha, weights })
    } else if *beta == five_sixths {
        Ok(CuspClass::StrictlySemistable { weights: (Rat::one(), gamma.recip()) })
    } else {
        Ok(CuspClass::Unstable { weights: (Rat::one(), gamma.recip()), gamma })
    }
}

/// Whether the `A_k` singularity in dimension `n` is unstable:
/// `(k + 1)(n - 2) > 2(n - 1)`.
pub fn ak_unstable_check(n: u32, k: u32) -> Result<bool, RescaleError> {
    if n < 3 {
        return Err(RescaleError::DimensionTooSmall { n });
    }
    let (n, k) = (u64::from(n), u64::from(k));
    Ok((k + 1) * (n - 2) > 2 * (n - 1))
}
