//! Entropies and distinguishability of the sample ensembles.
//!
//! All ensembles here are equiprobable pure-state ensembles, so the mutual
//! information between the label and the samples equals the entropy of the
//! average state, and the Gram matrix `G / N` carries its nonzero spectrum.

mod bounds;
mod measure;

pub use bounds::{bound_value, pac_contradiction_threshold, BoundKind, BoundValue, Unit};
pub use measure::{
    optimal_success_iterative, pgm_success, OptimalMeasurement, DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL,
    MAX_OPT_DIM, MAX_PGM_DIM,
};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::combinatorics::{binary_entropy, binom_exact, log2_biguint, xlog2_inv, LogReal};
use crate::error::{domain, Result};
use crate::oracle::{gram_for, oracle_eigenvalues, GramMatrix};
use crate::spectra::{
    agnostic_spectrum, coupon_spectrum, pac_spectrum, EnsembleParams, Spectrum, Tower,
};

/// `Σ mult · λ log2(1/λ)` over the nonzero eigenvalues, in bits.
pub fn spectrum_entropy(spec: &Spectrum) -> f64 {
    spec.entries
        .iter()
        .filter(|e| !e.eigenvalue.is_zero())
        .map(|e| {
            let lambda = e.eigenvalue.to_log_real();
            e.mass().to_f64() * -lambda.log2_abs()
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleInfo {
    pub params: EnsembleParams,
    pub entropy_bits: f64,
    pub mutual_info_bits: f64,
    pub hc: f64,
    pub pgm_success: Option<f64>,
    pub opt_success: Option<f64>,
}

/// Spectrum of any ensemble in the requested tower (agnostic is float only).
pub fn spectrum_for(params: &EnsembleParams, tower: Tower) -> Result<Spectrum> {
    match params {
        EnsembleParams::Pac { d, eps, t } => pac_spectrum(*d, eps, *t, tower),
        EnsembleParams::Agnostic { d, eps, t } => agnostic_spectrum(*d, eps, *t),
        EnsembleParams::Coupon { n, k, t, .. } => coupon_spectrum(*n, *k, *t, tower),
    }
}

/// Entropy and HC from the spectrum; with `measurements`, also the PGM and
/// iterative optimum from the Gram oracle (small ensembles only).
pub fn ensemble_info(params: &EnsembleParams, tower: Tower, measurements: bool) -> Result<EnsembleInfo> {
    let spec = spectrum_for(params, tower)?;
    let entropy_bits = spectrum_entropy(&spec);
    let hc = hc_quantity(&spec, &params.ensemble_size());
    let (pgm, opt) = if measurements {
        let gram = gram_for(params)?;
        let pgm = pgm_success(&gram)?;
        let opt = optimal_success_iterative(&gram, DEFAULT_OPT_ITERS, DEFAULT_OPT_TOL)?;
        (Some(pgm), Some(opt.value))
    } else {
        (None, None)
    };
    Ok(EnsembleInfo {
        params: params.clone(),
        entropy_bits,
        mutual_info_bits: entropy_bits,
        hc,
        pgm_success: pgm,
        opt_success: opt,
    })
}

/// Pieces of `S(B) = H(μ) + S_{t,d}` for the PAC ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct PacEntropyDecomposition {
    /// `S(B)` straight from the spectrum.
    pub entropy: f64,
    /// `H(μ)` with `μ_h = C(d,h) λ_h`.
    pub mu_entropy: f64,
    /// `S_{t,d} = Σ μ_h log2 C(d,h)`.
    pub s_td: f64,
    pub mu: Vec<f64>,
    /// `μ` as exact rationals, in the exact tower.
    pub mu_exact: Option<Vec<BigRational>>,
    /// `S(B) <= log2(d+1) + S_{t,d}`.
    pub chain_holds: bool,
}

pub fn entropy_decomposition_pac(
    d: usize,
    eps: &BigRational,
    t: usize,
    tower: Tower,
) -> Result<PacEntropyDecomposition> {
    let spec = pac_spectrum(d, eps, t, tower)?;
    let entropy = spectrum_entropy(&spec);
    let mu: Vec<f64> = spec.masses();
    let mu_exact = match tower {
        Tower::Exact => Some(
            spec.entries
                .iter()
                .map(|e| {
                    let q = e.eigenvalue.as_exact().cloned().unwrap_or_else(BigRational::zero);
                    q * BigRational::from_integer(e.multiplicity.clone().into())
                })
                .collect(),
        ),
        Tower::Float => None,
    };
    let mu_entropy = mu.iter().copied().map(xlog2_inv).sum();
    let s_td = spec
        .entries
        .iter()
        .zip(&mu)
        .map(|(e, &w)| w * log2_biguint(&binom_exact(d as u64, e.index as i64)))
        .sum::<f64>();
    let slack = 1e-12 * (1.0 + entropy);
    let chain_holds = entropy <= ((d + 1) as f64).log2() + s_td + slack;
    Ok(PacEntropyDecomposition {
        entropy,
        mu_entropy,
        s_td,
        mu,
        mu_exact,
        chain_holds,
    })
}

/// Optimal success probability for two equiprobable pure states with overlap
/// `|⟨ψ1|ψ2⟩|`, given `t` copies of each.
pub fn helstrom_pair(overlap: f64, t: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap) || t == 0 {
        return Err(domain!("helstrom_pair needs overlap in [0,1] and t >= 1"));
    }
    let o2t = overlap.powi(2 * t as i32);
    Ok(0.5 + 0.5 * (1.0 - o2t).sqrt())
}

/// `N^{-1/2} Σ mult · √λ`.
pub fn hc_quantity(spec: &Spectrum, ensemble_size: &BigUint) -> f64 {
    let trace_sqrt: LogReal = spec
        .entries
        .iter()
        .filter(|e| !e.eigenvalue.is_zero())
        .map(|e| LogReal::from_biguint(&e.multiplicity) * e.eigenvalue.to_log_real().abs().sqrt())
        .sum();
    (trace_sqrt / LogReal::from_biguint(ensemble_size).sqrt()).to_f64()
}

/// HC from the oracle: `N^{-1/2} Tr √(G/N)`, negative rounding noise dropped.
pub fn hc_from_gram(gram: &GramMatrix) -> Result<f64> {
    let eigs = oracle_eigenvalues(gram)?;
    let n = gram.dim() as f64;
    Ok(measure::clean_sqrt(&eigs).iter().sum::<f64>() / n.sqrt())
}

/// `h(err) + err · log2(alphabet - 1)`.
pub fn fano_bound(err: f64, alphabet: u64) -> Result<f64> {
    if alphabet < 2 {
        return Err(domain!("fano_bound needs an alphabet of size >= 2"));
    }
    Ok(binary_entropy(err)? + err * ((alphabet - 1) as f64).log2())
}
