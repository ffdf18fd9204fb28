//! Generalisation bounds for empirical MPR.
//!
//! * [`gap_bound_prop1`]: high-probability bound on
//!   `|MPR(𝒞, Ĝ, R̂) − MPR(𝒞, G, R)|` for one prompt,
//!   `2ℛ_Ĝ + 2ℛ_R̂ + B·√(ln(2/δ) / 2(k+m))`;
//! * [`prompt_bound_prop2`]: tail probability for the prompt-averaged MPR,
//!   `exp(−ε²N/8) + exp(−(2(k+m)/B²)(ε/2 − 2λ))`;
//! * [`bernstein_bound`]: variance-aware version of the prompt bound,
//!   `2exp(−Nε²/(8σ² + 4Bε/3)) + 2exp(−2(k+m)(ε/4 − 2λ)²/B²)`.
//!
//! Complexities are plug-in Monte-Carlo estimates in practice, not true values.
//! Probability bounds above 1 are clamped and flagged vacuous.

use serde::{Deserialize, Serialize};

use crate::error::{MprError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundInputs {
    /// Range constant `B` of the class.
    pub range: f64,
    pub rad_generated: f64,
    pub rad_reference: f64,
    pub k: usize,
    pub m: usize,
    pub delta: f64,
    /// Number of sampled prompts `N`.
    pub prompts: usize,
    /// `λ = sup_Q ℛ_{Ĝ_Q} + ℛ_R̂`.
    pub lambda_sup: f64,
    pub epsilon: f64,
    /// Variance `σ²` of MPR across prompts.
    pub variance: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            range: 2.0,
            rad_generated: 0.0,
            rad_reference: 0.0,
            k: 1000,
            m: 1000,
            delta: 0.05,
            prompts: 1,
            lambda_sup: 0.0,
            epsilon: 0.1,
            variance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub vacuous: bool,
    /// Individual terms before clamping.
    pub terms: Vec<f64>,
}

fn check_common(inputs: &BoundInputs) -> Result<()> {
    if !(inputs.range > 0.0 && inputs.range.is_finite()) {
        return Err(MprError::InvalidArgument(format!(
            "range B = {} must be positive",
            inputs.range
        )));
    }
    if inputs.k == 0 || inputs.m == 0 {
        return Err(MprError::InvalidArgument(
            "k and m must be at least 1".into(),
        ));
    }
    if inputs.rad_generated < 0.0 || inputs.rad_reference < 0.0 || inputs.lambda_sup < 0.0 {
        return Err(MprError::InvalidArgument(
            "complexities must be nonnegative".into(),
        ));
    }
    Ok(())
}

fn check_prompt_inputs(inputs: &BoundInputs) -> Result<()> {
    check_common(inputs)?;
    if !(inputs.epsilon > 0.0 && inputs.epsilon.is_finite()) {
        return Err(MprError::InvalidArgument(format!(
            "epsilon {} must be positive",
            inputs.epsilon
        )));
    }
    if inputs.prompts == 0 {
        return Err(MprError::InvalidArgument("need at least one prompt".into()));
    }
    Ok(())
}

pub fn gap_bound_prop1(inputs: &BoundInputs) -> Result<f64> {
    check_common(inputs)?;
    if !(inputs.delta > 0.0 && inputs.delta < 1.0) {
        return Err(MprError::InvalidArgument(format!(
            "delta {} outside (0, 1)",
            inputs.delta
        )));
    }
    let n = (inputs.k + inputs.m) as f64;
    let concentration = inputs.range * ((2.0 / inputs.delta).ln() / (2.0 * n)).sqrt();
    Ok(2.0 * inputs.rad_generated + 2.0 * inputs.rad_reference + concentration)
}

/// `squared` uses `(ε/2 − 2λ)²` in the second exponent instead of the linear
/// form.
pub fn prompt_bound_prop2(inputs: &BoundInputs, squared: bool) -> Result<BoundValue> {
    check_prompt_inputs(inputs)?;
    let eps = inputs.epsilon;
    let margin = eps / 2.0 - 2.0 * inputs.lambda_sup;
    if margin <= 0.0 {
        return Ok(BoundValue {
            value: 1.0,
            vacuous: true,
            terms: vec![],
        });
    }
    let n = (inputs.k + inputs.m) as f64;
    let b2 = inputs.range * inputs.range;
    let first = (-eps * eps * inputs.prompts as f64 / 8.0).exp();
    let exponent = if squared { margin * margin } else { margin };
    let second = (-(2.0 * n / b2) * exponent).exp();
    Ok(clamp(vec![first, second]))
}

pub fn bernstein_bound(inputs: &BoundInputs) -> Result<BoundValue> {
    check_prompt_inputs(inputs)?;
    if !(inputs.variance >= 0.0 && inputs.variance.is_finite()) {
        return Err(MprError::InvalidArgument(format!(
            "variance {} must be nonnegative",
            inputs.variance
        )));
    }
    let eps = inputs.epsilon;
    let b = inputs.range;
    let first = 2.0
        * (-(inputs.prompts as f64) * eps * eps / (8.0 * inputs.variance + 4.0 * b * eps / 3.0))
            .exp();
    let margin = eps / 4.0 - 2.0 * inputs.lambda_sup;
    if margin <= 0.0 {
        return Ok(BoundValue {
            value: 1.0,
            vacuous: true,
            terms: vec![first, 1.0],
        });
    }
    let n = (inputs.k + inputs.m) as f64;
    let second = 2.0 * (-2.0 * n * margin * margin / (b * b)).exp();
    Ok(clamp(vec![first, second]))
}

fn clamp(terms: Vec<f64>) -> BoundValue {
    let total: f64 = terms.iter().sum();
    BoundValue {
        value: total.min(1.0),
        vacuous: total >= 1.0,
        terms,
    }
}

/// Unbiased variance of per-prompt MPR values.
pub fn empirical_variance_across_prompts(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(MprError::InvalidArgument(format!(
            "need at least 2 values, got {}",
            values.len()
        )));
    }
    Ok(super::sample_variance(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn base() -> BoundInputs {
        BoundInputs {
            range: 2.0,
            k: 2,
            m: 2,
            delta: 2.0 * E.powi(-2),
            ..Default::default()
        }
    }

    #[test]
    fn prop1_examples() {
        assert!((gap_bound_prop1(&base()).unwrap() - 1.0).abs() < 1e-12);
        let with_rad = BoundInputs {
            rad_generated: 0.1,
            rad_reference: 0.1,
            ..base()
        };
        assert!((gap_bound_prop1(&with_rad).unwrap() - 1.4).abs() < 1e-12);
        let doubled = BoundInputs {
            k: 4,
            m: 4,
            ..base()
        };
        let ratio = gap_bound_prop1(&doubled).unwrap() / gap_bound_prop1(&base()).unwrap();
        assert!((ratio - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(gap_bound_prop1(&BoundInputs {
            delta: 1.0,
            ..base()
        })
        .is_err());
        assert!(gap_bound_prop1(&BoundInputs {
            delta: 0.0,
            ..base()
        })
        .is_err());
    }

    #[test]
    fn prop2_examples() {
        let vac = BoundInputs {
            epsilon: 0.1,
            lambda_sup: 0.5,
            ..base()
        };
        let b = prompt_bound_prop2(&vac, false).unwrap();
        assert_eq!(b.value, 1.0);
        assert!(b.vacuous);

        let limit = BoundInputs {
            epsilon: 2.0,
            prompts: 8,
            k: 1 << 40,
            m: 1 << 40,
            ..base()
        };
        let b = prompt_bound_prop2(&limit, false).unwrap();
        assert!((b.value - (-4f64).exp()).abs() < 1e-12);
        assert!(!b.vacuous);

        let mut prev = f64::INFINITY;
        for n in 1..20 {
            let b = prompt_bound_prop2(
                &BoundInputs {
                    epsilon: 1.0,
                    prompts: n,
                    ..base()
                },
                false,
            )
            .unwrap();
            assert!(b.terms[0] < prev);
            prev = b.terms[0];
        }
        assert!(prompt_bound_prop2(
            &BoundInputs {
                epsilon: 0.0,
                ..base()
            },
            false
        )
        .is_err());
    }

    #[test]
    fn prop2_squared_variant_differs() {
        let i = BoundInputs {
            epsilon: 1.0,
            k: 50,
            m: 50,
            prompts: 10,
            ..base()
        };
        let lin = prompt_bound_prop2(&i, false).unwrap();
        let sq = prompt_bound_prop2(&i, true).unwrap();
        assert!((lin.terms[1] - (-(200.0 / 4.0) * 0.5f64).exp()).abs() < 1e-15);
        assert!((sq.terms[1] - (-(200.0 / 4.0) * 0.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn bernstein_examples() {
        let i = BoundInputs {
            variance: 0.0,
            range: 2.0,
            epsilon: 3.0,
            prompts: 8,
            ..base()
        };
        let b = bernstein_bound(&i).unwrap();
        assert!((b.terms[0] - 2.0 * (-9f64).exp()).abs() < 1e-15);

        let far = BoundInputs {
            epsilon: 1.0,
            k: 1 << 40,
            m: 1 << 40,
            prompts: 1000,
            ..base()
        };
        let b = bernstein_bound(&far).unwrap();
        assert!(b.terms[1] < 1e-300);

        let vac = BoundInputs {
            epsilon: 0.4,
            lambda_sup: 0.05,
            ..base()
        };
        let b = bernstein_bound(&vac).unwrap();
        assert!(b.vacuous && b.value == 1.0);
    }

    #[test]
    fn variance_examples() {
        assert_eq!(
            empirical_variance_across_prompts(&[0.5, 0.5, 0.5]).unwrap(),
            0.0
        );
        assert_eq!(empirical_variance_across_prompts(&[0.0, 1.0]).unwrap(), 0.5);
        assert!(
            (empirical_variance_across_prompts(&[0.2, 0.4, 0.6]).unwrap() - 0.04).abs() < 1e-15
        );
        assert!(empirical_variance_across_prompts(&[0.2]).is_err());
    }
}
