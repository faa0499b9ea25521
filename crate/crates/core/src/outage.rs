//! Conditional outage probability of a reference uplink under Nakagami
//! fading, given the normalized powers of its interferers.
//!
//! With `m0` the (integer) Nakagami parameter of the reference link,
//! `β0 = β·m0/Ω_r` and `z = 1/Γ`,
//!
//! ```text
//! ε = 1 − exp(−β0·z) · Σ_{s<m0} (β0·z)^s · Σ_{t≤s} z^(−t)·H_t(Ψ) / (s−t)!
//! Ψ_i = (β0·Ω_i/m_i + 1)^(−1)
//! H_t = Σ_{ℓ_1+…+ℓ_n = t} Π_i G_{ℓ_i}(Ψ_i)
//! G_0 = 1 − p_i·(1 − Ψ_i^m_i)
//! G_ℓ = p_i · C(ℓ+m_i−1, ℓ) · (Ω_i/m_i)^ℓ · Ψ_i^(m_i+ℓ)
//! ```
//!
//! `H_t` is the degree-`t` coefficient of `Π_i Σ_ℓ G_ℓ(Ψ_i)·x^ℓ`, so it is
//! computed by truncated polynomial multiplication rather than by
//! enumerating compositions.
//!
//! The evaluation path works with `G̃_ℓ = β0^ℓ·G_ℓ = p·C(ℓ+m−1,ℓ)·(1−Ψ)^ℓ·Ψ^m`,
//! which is bounded by one, and folds `z^(−t)` into `(β0·z)^(s−t)`. This is
//! algebraically identical and stays finite as `z → 0` (no noise).

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Exp1};

use crate::error::{Error, Result};
use crate::gains::{Interferer, LinkEnvironment};

/// Rounding slack absorbed silently.
pub const CLAMP_TOLERANCE: f64 = 1e-12;
/// Anything further outside `[0, 1]` is reported as instability.
pub const INSTABILITY_TOLERANCE: f64 = 1e-9;

/// SINR threshold for a Shannon-rate code: `β = 2^R − 1`.
pub fn rate_to_threshold(rate: f64) -> f64 {
    (rate * std::f64::consts::LN_2).exp_m1()
}

/// `R = log2(1 + β)`.
pub fn threshold_to_rate(beta: f64) -> f64 {
    beta.ln_1p() / std::f64::consts::LN_2
}

/// `C(n, k)` for the small arguments arising here.
fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Γ(ℓ+m) / (ℓ!·Γ(m))` for integer `m ≥ 1`.
pub fn gamma_ratio(l: u32, m: u32) -> f64 {
    binomial(l + m - 1, l)
}

pub fn psi(beta0: f64, omega: f64, m: u32) -> f64 {
    1.0 / (beta0 * omega / m as f64 + 1.0)
}

/// `G_ℓ(Ψ_i)` exactly as defined, unscaled.
pub fn g_factor(l: u32, psi: f64, omega: f64, m: u32, p: f64) -> f64 {
    let mf = m as f64;
    if l == 0 {
        1.0 - p * (1.0 - psi.powi(m as i32))
    } else {
        p * gamma_ratio(l, m) * (omega / mf).powi(l as i32) * psi.powi((m + l) as i32)
    }
}

/// Product of the given polynomials (coefficient lists, lowest degree
/// first), keeping only coefficients of degree `< len`.
pub fn truncated_product<'a, I>(factors: I, len: usize) -> Vec<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc = vec![0.0; len];
    if len == 0 {
        return acc;
    }
    acc[0] = 1.0;
    for f in factors {
        multiply_in_place(&mut acc, f);
    }
    acc
}

/// `acc ← acc · f`, truncated to `acc.len()` coefficients.
fn multiply_in_place(acc: &mut [f64], f: &[f64]) {
    // descending so each acc[d] reads lower coefficients not yet overwritten
    for d in (0..acc.len()).rev() {
        let mut sum = 0.0;
        for (l, &coef) in f.iter().enumerate().take(d + 1) {
            sum += coef * acc[d - l];
        }
        acc[d] = sum;
    }
}

fn check_query(env: &LinkEnvironment, beta: f64) -> Result<()> {
    if !(beta > 0.0) || beta.is_nan() {
        return Err(Error::Domain(format!("SINR threshold must be positive, got {beta}")));
    }
    if !(env.omega_ref > 0.0 && env.omega_ref.is_finite()) {
        return Err(Error::Domain(format!(
            "reference power must be positive, got {}",
            env.omega_ref
        )));
    }
    if env.reference_m == 0 {
        return Err(Error::Domain("reference Nakagami parameter must be at least 1".into()));
    }
    if !(env.snr > 0.0) {
        return Err(Error::Domain(format!("SNR must be positive, got {}", env.snr)));
    }
    Ok(())
}

/// `β0 = β·m0/Ω_r`.
pub fn beta0(env: &LinkEnvironment, beta: f64) -> f64 {
    beta * env.reference_m as f64 / env.omega_ref
}

/// The coefficients `G_0..G_{m0−1}` of one interferer, unscaled.
pub fn g_coefficients(beta0: f64, itf: &Interferer, len: usize) -> Vec<f64> {
    let psi = psi(beta0, itf.omega, itf.m);
    (0..len as u32)
        .map(|l| g_factor(l, psi, itf.omega, itf.m, itf.p))
        .collect()
}

/// `H_0..H_{m0−1}` for the environment at threshold `beta`, unscaled.
pub fn h_terms(env: &LinkEnvironment, beta: f64) -> Result<Vec<f64>> {
    check_query(env, beta)?;
    let b0 = beta0(env, beta);
    let len = env.reference_m as usize;
    let factors: Vec<Vec<f64>> = env.interferers.iter().map(|itf| g_coefficients(b0, itf, len)).collect();
    Ok(truncated_product(factors.iter().map(Vec::as_slice), len))
}

/// Scaled coefficients `β0^ℓ·G_ℓ` written into `out`.
fn scaled_g(beta0: f64, itf: &Interferer, out: &mut [f64]) {
    let mf = itf.m as f64;
    let x = beta0 * itf.omega / mf;
    let psi = 1.0 / (x + 1.0);
    let psi_m = psi.powi(itf.m as i32);
    out[0] = (1.0 - itf.p) + itf.p * psi_m;
    if out.len() > 1 {
        let one_minus_psi = x * psi;
        let mut pow = itf.p * psi_m;
        for (l, slot) in out.iter_mut().enumerate().skip(1) {
            pow *= one_minus_psi;
            *slot = gamma_ratio(l as u32, itf.m) * pow;
        }
    }
}

/// Conditional outage probability `P[γ ≤ β | Ω]` of the reference uplink.
pub fn outage_probability(env: &LinkEnvironment, beta: f64) -> Result<f64> {
    check_query(env, beta)?;
    let m0 = env.reference_m as usize;
    let b0 = beta0(env, beta);
    let noise = if env.snr.is_infinite() { 0.0 } else { b0 / env.snr };

    let survival = if m0 == 1 {
        let h0: f64 = env
            .interferers
            .iter()
            .map(|itf| (1.0 - itf.p) + itf.p * psi(b0, itf.omega, itf.m).powi(itf.m as i32))
            .product();
        (-noise).exp() * h0
    } else {
        let mut h = vec![0.0; m0];
        h[0] = 1.0;
        let mut g = vec![0.0; m0];
        for itf in &env.interferers {
            scaled_g(b0, itf, &mut g);
            multiply_in_place(&mut h, &g);
        }
        // Σ_t H̃_t · Σ_{u < m0−t} noise^u/u!
        let mut partial = vec![0.0; m0];
        let mut term = 1.0;
        let mut sum = 0.0;
        for (u, slot) in partial.iter_mut().enumerate() {
            if u > 0 {
                term *= noise / u as f64;
            }
            sum += term;
            *slot = sum;
        }
        let series: f64 = h.iter().enumerate().map(|(t, ht)| ht * partial[m0 - 1 - t]).sum();
        (-noise).exp() * series
    };

    clamp_probability(1.0 - survival)
}

fn clamp_probability(value: f64) -> Result<f64> {
    if !(-INSTABILITY_TOLERANCE..=1.0 + INSTABILITY_TOLERANCE).contains(&value) {
        return Err(Error::NumericalInstability { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Monte Carlo estimate of the outage probability with its binomial
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub draws: u64,
}

impl OracleEstimate {
    /// Whether `value` lies within `k` binomial standard errors, the error
    /// being evaluated at `value` so that an empirical zero is not degenerate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        let se = (value * (1.0 - value) / self.draws as f64).sqrt();
        (self.probability - value).abs() <= k * se
    }
}

/// Unit-mean Gamma(m, 1/m) as a sum of `m` exponentials.
fn unit_gamma<R: Rng + ?Sized>(rng: &mut R, m: u32) -> f64 {
    let mut s = 0.0;
    for _ in 0..m {
        let e: f64 = Exp1.sample(rng);
        s += e;
    }
    s / m as f64
}

/// Simulates the fading and activity directly and counts `γ ≤ β`.
pub fn outage_probability_oracle<R: Rng + ?Sized>(
    env: &LinkEnvironment,
    beta: f64,
    draws: u64,
    rng: &mut R,
) -> Result<OracleEstimate> {
    check_query(env, beta)?;
    assert!(draws >= 1, "oracle needs at least one draw");
    let activity: Vec<Bernoulli> = env
        .interferers
        .iter()
        .map(|itf| Bernoulli::new(itf.p).map_err(|e| Error::Domain(e.to_string())))
        .collect::<Result<_>>()?;
    let noise = 1.0 / env.snr;
    let mut outages = 0u64;
    for _ in 0..draws {
        let signal = unit_gamma(rng, env.reference_m) * env.omega_ref;
        let mut denom = noise;
        for (itf, act) in env.interferers.iter().zip(&activity) {
            if act.sample(rng) {
                denom += unit_gamma(rng, itf.m) * itf.omega;
            }
        }
        if signal <= beta * denom {
            outages += 1;
        }
    }
    let p = outages as f64 / draws as f64;
    Ok(OracleEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / draws as f64).sqrt(),
        draws,
    })
}
