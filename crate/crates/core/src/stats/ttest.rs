//! t-tests on bootstrap replicates: a one-sided test against a representation
//! threshold `ρ` and a two-sided Welch comparison between two models.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{MprError, Result};

/// Relative scale below which a standard error counts as zero.
const DEGENERATE_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    OneSidedThreshold,
    TwoSidedCompare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: TestKind,
    /// t statistic; infinite (serialised as `null`) in the zero-variance case.
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

fn moments(values: &[f64], what: &str) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(MprError::InvalidArgument(format!(
            "{what}: need at least 2 replicates, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MprError::InvalidArgument(format!(
            "{what}: non-finite replicate"
        )));
    }
    Ok((super::mean(values), super::sample_variance(values)))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(MprError::InvalidArgument(format!(
            "alpha {alpha} outside (0, 1)"
        )))
    }
}

fn student_cdf(t: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("positive degrees of freedom")
        .cdf(t)
}

/// H₀: mean MPR ≥ ρ against H₁: mean MPR < ρ.
pub fn threshold_test(replicates: &[f64], rho: f64, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (mean, var) = moments(replicates, "threshold test")?;
    let n = replicates.len() as f64;
    let se = (var / n).sqrt();
    let df = n - 1.0;
    let scale = mean.abs().max(rho.abs()).max(1.0);
    let (statistic, p_value) = if se <= DEGENERATE_SCALE * scale {
        if mean < rho {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (if mean > rho { f64::INFINITY } else { 0.0 }, 1.0)
        }
    } else {
        let t = (mean - rho) / se;
        (t, student_cdf(t, df))
    };
    Ok(TestResult {
        kind: TestKind::OneSidedThreshold,
        statistic,
        df,
        p_value,
        alpha,
        reject: p_value < alpha,
    })
}

/// Two-sided Welch test of equal mean MPR with Welch–Satterthwaite degrees of
/// freedom.
pub fn model_compare_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (ma, va) = moments(a, "first sample")?;
    let (mb, vb) = moments(b, "second sample")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se = (sa + sb).sqrt();
    let scale = ma.abs().max(mb.abs()).max(1.0);
    if se <= DEGENERATE_SCALE * scale {
        let differ = (ma - mb).abs() > DEGENERATE_SCALE * scale;
        return Ok(TestResult {
            kind: TestKind::TwoSidedCompare,
            statistic: if differ {
                (ma - mb).signum() * f64::INFINITY
            } else {
                0.0
            },
            df: na + nb - 2.0,
            p_value: if differ { 0.0 } else { 1.0 },
            alpha,
            reject: differ,
        });
    }
    let t = (ma - mb) / se;
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let p_value = (2.0 * student_cdf(-t.abs(), df)).min(1.0);
    Ok(TestResult {
        kind: TestKind::TwoSidedCompare,
        statistic: t,
        df,
        p_value,
        alpha,
        reject: p_value < alpha,
    })
}
