//! Generalized APP decoder. Each variable keeps a full posterior over
//! `{0, 1}`; a check tells variable `v` how likely each value of `v` is to
//! satisfy parity given the other variables' posteriors raised to `alpha`.
//! The channel factor is `P(y | b)^(1 / hbar)`, so `hbar = 1` uses the LLRs
//! unscaled. After every synchronous sweep the posteriors are mixed with the
//! uniform distribution by `beta`.
//!
//! All arithmetic is on log-ratios, so delta posteriors are exact.

use super::{check_rule, DecodeResult, LdpcCode};
use crate::error::{Error, Result};

/// `[P(bit = 0), P(bit = 1)]`.
pub type Posterior = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub struct GappDecoder<'a> {
    code: &'a LdpcCode,
    alpha: f64,
    beta: f64,
    hbar: f64,
}

fn log_ratio(p: &Posterior) -> f64 {
    p[0].ln() - p[1].ln()
}

fn from_log_ratio(l: f64) -> Posterior {
    // 1 / (1 + e^-l) and its complement, each formed without cancellation
    let p0 = 1.0 / (1.0 + (-l).exp());
    let p1 = 1.0 / (1.0 + l.exp());
    let s = p0 + p1;
    [p0 / s, p1 / s]
}

fn decide(p: &Posterior) -> u8 {
    u8::from(p[1] > p[0])
}

impl<'a> GappDecoder<'a> {
    pub fn new(code: &'a LdpcCode, alpha: f64, beta: f64, hbar: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!("beta must be in [0, 1], got {beta}")));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self {
            code,
            alpha,
            beta,
            hbar,
        })
    }

    pub fn code(&self) -> &LdpcCode {
        self.code
    }

    /// Posteriors from the channel factor alone.
    pub fn channel_posteriors(&self, llrs: &[f64]) -> Vec<Posterior> {
        llrs.iter().map(|&l| from_log_ratio(l / self.hbar)).collect()
    }

    /// One synchronous sweep over all variables.
    pub fn iterate(&self, llrs: &[f64], psi: &[Posterior]) -> Vec<Posterior> {
        let code = self.code;
        assert_eq!(llrs.len(), code.n(), "LLR word length must match the code");
        assert_eq!(psi.len(), code.n(), "posterior count must match the code");
        let powered: Vec<f64> = psi
            .iter()
            .map(|p| {
                if self.alpha == 0.0 {
                    0.0
                } else {
                    self.alpha * log_ratio(p)
                }
            })
            .collect();
        let mut inputs = vec![0.0; code.edges()];
        for c in 0..code.m() {
            for (e, &v) in code.check_edges(c).zip(code.check_vars(c)) {
                inputs[e] = powered[v];
            }
        }
        let mut msgs = vec![0.0; code.edges()];
        for c in 0..code.m() {
            let r = code.check_edges(c);
            check_rule(&inputs[r.clone()], &mut msgs[r]);
        }
        (0..code.n())
            .map(|v| {
                let l = llrs[v] / self.hbar + code.var_edges(v).iter().map(|&e| msgs[e]).sum::<f64>();
                let mut p = from_log_ratio(l);
                if self.beta > 0.0 {
                    p = p.map(|x| (1.0 - self.beta) * x + 0.5 * self.beta);
                }
                p
            })
            .collect()
    }

    pub fn decode(&self, llrs: &[f64], max_iter: usize) -> DecodeResult {
        self.decode_from_observed(llrs, self.channel_posteriors(llrs), max_iter, |_, _| {})
    }

    /// Runs from `init`, calling `observer(t, psi)` after iteration `t`
    /// (1-based). Stops early once the hard decision satisfies every check.
    pub fn decode_from_observed(
        &self,
        llrs: &[f64],
        init: Vec<Posterior>,
        max_iter: usize,
        mut observer: impl FnMut(usize, &[Posterior]),
    ) -> DecodeResult {
        let mut psi = init;
        let mut bits: Vec<u8> = psi.iter().map(decide).collect();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < max_iter {
            psi = self.iterate(llrs, &psi);
            iterations += 1;
            observer(iterations, &psi);
            bits = psi.iter().map(decide).collect();
            if self.code.syndrome_ok(&bits) {
                converged = true;
                break;
            }
        }
        let syndrome_ok = self.code.syndrome_ok(&bits);
        DecodeResult {
            bits,
            iterations,
            syndrome_ok,
            converged,
        }
    }
}

pub fn gapp_decode(
    code: &LdpcCode,
    llrs: &[f64],
    alpha: f64,
    beta: f64,
    hbar: f64,
    max_iter: usize,
) -> Result<DecodeResult> {
    Ok(GappDecoder::new(code, alpha, beta, hbar)?.decode(llrs, max_iter))
}
