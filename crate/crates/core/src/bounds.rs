//! Explicit constants and entropy inequalities, evaluated in log space.
//!
//! `ξ(s)` already has about ten digits at `s = 2` and hundreds of digits
//! at `s = 6`, so every evaluator returns a natural logarithm and never
//! materializes the bound itself.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::sft::SftSpec;
use crate::spectral::{sft_entropy, PowerOptions};
use crate::words::Word;

const LN_4_3: f64 = 0.287_682_072_451_780_9;

/// A bound reported by its natural logarithm, with its inputs echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub log_value: f64,
    pub inputs: serde_json::Value,
    pub overflow_safe: bool,
    /// `nats` or `bits` for entropic quantities, `none` otherwise.
    pub unit: String,
}

impl BoundReport {
    fn new(name: &str, log_value: f64, inputs: serde_json::Value, entropic: bool) -> Self {
        BoundReport {
            name: name.to_string(),
            log_value,
            inputs,
            overflow_safe: true,
            unit: if entropic { "nats" } else { "none" }.to_string(),
        }
    }

    /// The bound itself when it fits in an `f64`.
    pub fn value(&self) -> Option<f64> {
        let v = self.log_value.exp();
        (v.is_finite() && v > 0.0).then_some(v)
    }

    /// Re-express an entropic bound in bits (`x / ln 2`); others are unchanged.
    pub fn in_bits(mut self) -> Self {
        if self.unit == "nats" {
            self.log_value -= std::f64::consts::LN_2.ln();
            self.unit = "bits".to_string();
        }
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "schema": 1,
            "name": self.name,
            "log_value": self.log_value,
            "value": self.value(),
            "inputs": self.inputs,
            "overflow_safe": self.overflow_safe,
            "unit": self.unit,
        })
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg.to_string()))
    }
}

/// `ln(1 − (1 − x)^{1/s²})` with `x = 1/(4 s^{2s²})`.
fn log_den(s: u64) -> f64 {
    let sf = s as f64;
    let ln_s = sf.ln();
    let s2 = sf * sf;
    let ln_x = -(4f64.ln()) - 2.0 * s2 * ln_s;
    if ln_x < -700.0 {
        // 1 − (1 − x)^{1/s²} = x/s² (1 + O(x))
        ln_x - 2.0 * ln_s
    } else {
        let x = ln_x.exp();
        (-((-x).ln_1p() / s2).exp_m1()).ln()
    }
}

/// `ln ξ(s)`, `ξ(s) = 30 s^{3(s²+1)} / (1 − (1 − 1/(4s^{2s²}))^{1/s²})`.
pub fn xi_log(s: u64) -> Result<f64> {
    require(s >= 2, "s must be at least 2")?;
    let sf = s as f64;
    Ok(30f64.ln() + 3.0 * (sf * sf + 1.0) * sf.ln() - log_den(s))
}

/// `ln(ε² / ((4/3)^{2ℓ} ξ(s)²))`: entropy deficits below this value force
/// every cylinder of length at most `ℓ` to within `ε` of the Parry measure.
pub fn entropy_gap_threshold(eps: f64, ell: u64, s: u64) -> Result<f64> {
    require(eps > 0.0 && eps.is_finite(), "eps must be positive")?;
    require(ell >= 1, "ell must be at least 1")?;
    Ok(2.0 * eps.ln() - 2.0 * ell as f64 * LN_4_3 - 2.0 * xi_log(s)?)
}

/// `ln Ξ(ε, ℓ, j)` with `s_m` the number of states of stage `m`. The value
/// does not depend on `j`; `j` is only echoed in reports.
#[allow(non_snake_case)]
pub fn Xi_log(eps: f64, ell: u64, _j: u64, s_m: u64) -> Result<f64> {
    entropy_gap_threshold(eps, ell, s_m)
}

/// Worst-case transfer-operator constants for an `s`-state mixing graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropConstants {
    pub s: u64,
    /// `ln(15 s^{2s²})`
    pub a_log: f64,
    pub beta_lo: f64,
    /// `ln((1 − 1/(4s^{2s²}))^{1/s²})`
    pub beta_hi_log: f64,
    /// `ln(s^s)`, the cap on `‖h‖∞ / inf h`
    pub ratio_log: f64,
    /// Wielandt's `(s−1)² + 1`
    pub m_cap: u64,
}

impl PropConstants {
    pub fn beta_hi(&self) -> f64 {
        self.beta_hi_log.exp()
    }

    /// `ln(A ‖h‖∞/inf h · β^{n−ℓ})` at the worst-case constants, `β = β_hi`.
    pub fn envelope_log(&self, n: u64, ell: u64) -> f64 {
        self.a_log + self.ratio_log + (n as f64 - ell as f64) * self.beta_hi_log
    }
}

pub fn prop_constants(s: u64) -> Result<PropConstants> {
    require(s >= 2, "s must be at least 2")?;
    let sf = s as f64;
    let ln_s = sf.ln();
    let s2 = sf * sf;
    let ln_x = -(4f64.ln()) - 2.0 * s2 * ln_s;
    let beta_hi_log = if ln_x < -700.0 {
        -(ln_x.exp()) / s2
    } else {
        (-(ln_x.exp())).ln_1p() / s2
    };
    Ok(PropConstants {
        s,
        a_log: 15f64.ln() + 2.0 * s2 * ln_s,
        beta_lo: 0.75,
        beta_hi_log,
        ratio_log: sf * ln_s,
        m_cap: (s - 1) * (s - 1) + 1,
    })
}

/// `ln(h e^{−2(3n+4k)h})`: the least entropy lost by forbidding one word of
/// length `k` in a transitive nearest-neighbour SFT on `n` letters.
pub fn entropy_drop_bound(h: f64, n: u64, k: u64) -> Result<f64> {
    require(h > 0.0 && h.is_finite(), "h must be positive")?;
    require(n >= 2, "n must be at least 2")?;
    require(k > 1, "k must exceed 1")?;
    Ok(h.ln() - 2.0 * (3 * n + 4 * k) as f64 * h)
}

/// `ln((ln 2)/s · e^{−3(3s+4k) ln a})`: the least drop `h(X_n) − h(X_{n+k−1})`
/// when the two cover stages differ.
pub fn cover_drop_bound(s: u64, k: u64, a: u64) -> Result<f64> {
    require(s >= 1, "s must be at least 1")?;
    require(k >= 1, "k must be at least 1")?;
    require(a >= 2, "alphabet size must be at least 2")?;
    Ok(std::f64::consts::LN_2.ln() - (s as f64).ln() - 3.0 * (3 * s + 4 * k) as f64 * (a as f64).ln())
}

pub fn xi_report(s: u64) -> Result<BoundReport> {
    Ok(BoundReport::new("xi", xi_log(s)?, json!({ "s": s }), false))
}

pub fn gap_report(eps: f64, ell: u64, s: u64) -> Result<BoundReport> {
    Ok(BoundReport::new(
        "entropy_gap_threshold",
        entropy_gap_threshold(eps, ell, s)?,
        json!({ "eps": eps, "ell": ell, "s": s }),
        true,
    ))
}

/// `s_label` records which count was used for `s_m` (for example
/// `"states"` or `"words_of_length_m"`).
#[allow(non_snake_case)]
pub fn Xi_report(eps: f64, ell: u64, j: u64, s_m: u64, s_label: &str) -> Result<BoundReport> {
    Ok(BoundReport::new(
        "Xi",
        Xi_log(eps, ell, j, s_m)?,
        json!({ "eps": eps, "ell": ell, "j": j, "s_m": s_m, "s_m_counts": s_label }),
        true,
    ))
}

pub fn prop_report(s: u64) -> Result<BoundReport> {
    let c = prop_constants(s)?;
    Ok(BoundReport::new(
        "prop_constants",
        c.a_log,
        json!({
            "s": s,
            "A_log": c.a_log,
            "beta_lo": c.beta_lo,
            "beta_hi_log": c.beta_hi_log,
            "beta_hi": c.beta_hi(),
            "ratio_log": c.ratio_log,
            "M_cap": c.m_cap,
        }),
        false,
    ))
}

pub fn drop_report(h: f64, n: u64, k: u64) -> Result<BoundReport> {
    Ok(BoundReport::new(
        "entropy_drop_bound",
        entropy_drop_bound(h, n, k)?,
        json!({ "h": h, "n": n, "k": k }),
        true,
    ))
}

pub fn cover_drop_report(s: u64, k: u64, a: u64) -> Result<BoundReport> {
    Ok(BoundReport::new(
        "cover_drop_bound",
        cover_drop_bound(s, k, a)?,
        json!({ "s": s, "k": k, "a": a }),
        true,
    ))
}

/// Entropy lost by additionally forbidding `w`. Both entropies are computed
/// from scratch. Fails if forbidding `w` empties the shift.
pub fn removal_drop(spec: &SftSpec, w: &Word, opts: PowerOptions) -> Result<f64> {
    let before = sft_entropy(spec, opts)?;
    let after = SftSpec::new(spec.forbidden().with_words([w.clone()])?);
    Ok(before - sft_entropy(&after, opts)?)
}
