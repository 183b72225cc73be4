use crate::error::{invalid, Result};

/// Apery's constant, zeta(3).
#[allow(clippy::excessive_precision)]
pub const ZETA_3: f64 = 1.202_056_903_159_594_285_4;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {v} must be positive")))
    }
}

fn horizon(t: f64, min: f64) -> Result<f64> {
    if t >= min && t.is_finite() {
        Ok(t.ln())
    } else {
        Err(invalid(format!("horizon T = {t} must be at least {min}")))
    }
}

fn arms(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(k as f64)
}

fn beta_in_range(beta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(invalid(format!("beta = {beta} must lie in [0, 1]")))
    }
}

/// Instance-dependent bound under Lipschitz smoothness:
/// `2 beta k C [zeta(3) (1 + sqrt(3 ln T / 2)) + 3 sigma C ln T / Delta_min]`.
pub fn bound_thm1(k: usize, c: f64, sigma: f64, delta_min: f64, beta: f64, t: f64) -> Result<f64> {
    let k = arms(k)?;
    positive("C", c)?;
    positive("sigma", sigma)?;
    positive("Delta_min", delta_min)?;
    beta_in_range(beta)?;
    let ln_t = horizon(t, 2.0)?;
    let head = ZETA_3 * (1.0 + (1.5 * ln_t).sqrt());
    let tail = 3.0 * sigma * c * ln_t / delta_min;
    Ok(2.0 * beta * k * c * (head + tail))
}

/// The same bound as it appears at the end of its derivation:
/// `beta [2 k C zeta(3) (1 + sqrt(3 ln T / 2)) + 6 C^2 k sigma ln T / Delta_min]`.
pub fn bound_thm1_proof_form(
    k: usize,
    c: f64,
    sigma: f64,
    delta_min: f64,
    beta: f64,
    t: f64,
) -> Result<f64> {
    let k = arms(k)?;
    positive("C", c)?;
    positive("sigma", sigma)?;
    positive("Delta_min", delta_min)?;
    beta_in_range(beta)?;
    let ln_t = horizon(t, 2.0)?;
    let head = 2.0 * k * c * ZETA_3 * (1.0 + (1.5 * ln_t).sqrt());
    let tail = 6.0 * c * c * k * sigma * ln_t / delta_min;
    Ok(beta * (head + tail))
}

/// Weak instance-dependent bound: `4 C sqrt(6 k sigma T ln T) + 2 k C zeta(3)`.
pub fn bound_thm2(k: usize, c: f64, sigma: f64, t: f64) -> Result<f64> {
    let k = arms(k)?;
    positive("C", c)?;
    positive("sigma", sigma)?;
    let ln_t = horizon(t, 2.0)?;
    Ok(4.0 * c * (6.0 * k * sigma * t * ln_t).sqrt() + 2.0 * k * c * ZETA_3)
}

/// Instance-independent bound: `C (1 + lambda) (6 k T^2 ln T)^(1/3) + 2 k lambda C zeta(3)`
/// with `lambda = 1 + sqrt(3 ln T / 2)`.
pub fn bound_thm3(k: usize, c: f64, t: f64) -> Result<f64> {
    let k = arms(k)?;
    positive("C", c)?;
    let ln_t = horizon(t, 2.0)?;
    let lambda = 1.0 + (1.5 * ln_t).sqrt();
    Ok(c * (1.0 + lambda) * (6.0 * k * t * t * ln_t).cbrt() + 2.0 * k * lambda * c * ZETA_3)
}

/// Bounded-smoothness bound: `[6 ln T / f^-1(Delta_min)^2 + 2 zeta(3)] k Delta_max`.
pub fn bound_thm4(
    k: usize,
    delta_min: f64,
    delta_max: f64,
    f_inverse: impl Fn(f64) -> f64,
    t: f64,
) -> Result<f64> {
    let k = arms(k)?;
    positive("Delta_min", delta_min)?;
    positive("Delta_max", delta_max)?;
    let ln_t = horizon(t, 2.0)?;
    let scale = f_inverse(delta_min);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!(
            "f^-1(Delta_min) = {scale} must be positive"
        )));
    }
    Ok((6.0 * ln_t / (scale * scale) + 2.0 * ZETA_3) * k * delta_max)
}

/// Cap on a single round's regret once every available arm has been pulled:
/// `C (1 + sqrt(3 ln T / 2))`.
pub fn observation2_cap(c: f64, t: f64) -> Result<f64> {
    positive("C", c)?;
    let ln_t = horizon(t, 1.0)?;
    Ok(c * (1.0 + (1.5 * ln_t).sqrt()))
}
