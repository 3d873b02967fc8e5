//! Monte Carlo error-rate measurement over the all-zero codeword.

use std::fmt::Write;

use rayon::prelude::*;

use super::{bp_decode, transmit_with, trial_rng, Channel, GappDecoder, LdpcCode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoderConfig {
    /// Channel hard decisions, no decoding.
    Uncoded,
    Bp {
        max_iter: usize,
    },
    Gapp {
        alpha: f64,
        beta: f64,
        hbar: f64,
        max_iter: usize,
    },
}

impl DecoderConfig {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderConfig::Uncoded => "uncoded",
            DecoderConfig::Bp { .. } => "bp",
            DecoderConfig::Gapp { .. } => "gapp",
        }
    }

    fn check(&self) -> Result<()> {
        if let DecoderConfig::Gapp { alpha, beta, hbar, .. } = *self {
            let empty = LdpcCode::from_checks(1, vec![vec![0]])?;
            GappDecoder::new(&empty, alpha, beta, hbar)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerStats {
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iters: f64,
    pub seed: u64,
}

/// Runs `frames` independent trials; trial `t` draws its noise from
/// [`trial_rng`]`(seed, t)`, so the result does not depend on scheduling.
pub fn monte_carlo(
    code: &LdpcCode,
    channel: &Channel,
    decoder: &DecoderConfig,
    frames: u64,
    seed: u64,
) -> Result<BerStats> {
    if frames == 0 {
        return Err(Error::InvalidArgument("frames must be at least 1".into()));
    }
    decoder.check()?;
    let (bit_errors, frame_errors, iters) = (0..frames)
        .into_par_iter()
        .map(|t| {
            let rx = transmit_with(code, channel, &mut trial_rng(seed, t));
            let (bits, iterations) = match *decoder {
                DecoderConfig::Uncoded => (rx.hard, 0),
                DecoderConfig::Bp { max_iter } => {
                    let r = bp_decode(code, &rx.llrs, max_iter);
                    (r.bits, r.iterations)
                }
                DecoderConfig::Gapp {
                    alpha,
                    beta,
                    hbar,
                    max_iter,
                } => {
                    let r = GappDecoder::new(code, alpha, beta, hbar)
                        .expect("checked above")
                        .decode(&rx.llrs, max_iter);
                    (r.bits, r.iterations)
                }
            };
            let errs = bits.iter().filter(|&&b| b != 0).count() as u64;
            (errs, u64::from(errs > 0), iterations as u64)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(BerStats {
        frames,
        bit_errors,
        frame_errors,
        ber: bit_errors as f64 / (frames as f64 * code.n() as f64),
        fer: frame_errors as f64 / frames as f64,
        avg_iters: iters as f64 / frames as f64,
        seed,
    })
}

/// How sweep points are turned into channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    /// Points are crossover probabilities.
    Bsc,
    /// Points are `Eb/N0` in dB for a code of the given rate.
    BiAwgnEbN0 { rate: f64 },
}

impl ChannelKind {
    pub fn channel(&self, point: f64) -> Result<Channel> {
        match *self {
            ChannelKind::Bsc => Channel::bsc(point),
            ChannelKind::BiAwgnEbN0 { rate } => Channel::biawgn_ebn0(point, rate),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: f64,
    pub decoder: DecoderConfig,
    pub stats: BerStats,
}

/// Every decoder at every point, all with the same `seed` so decoders see
/// identical noise.
pub fn sweep(
    code: &LdpcCode,
    kind: ChannelKind,
    points: &[f64],
    decoders: &[DecoderConfig],
    frames: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(points.len() * decoders.len());
    for &point in points {
        let channel = kind.channel(point)?;
        for decoder in decoders {
            let stats = monte_carlo(code, &channel, decoder, frames, seed)?;
            rows.push(SweepRow {
                point,
                decoder: *decoder,
                stats,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("snr_or_p,frames,ber,fer,avg_iters,decoder,alpha,beta,seed\n");
    for r in rows {
        let (alpha, beta) = match r.decoder {
            DecoderConfig::Gapp { alpha, beta, .. } => (alpha.to_string(), beta.to_string()),
            _ => (String::new(), String::new()),
        };
        let st = &r.stats;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.point,
            st.frames,
            st.ber,
            st.fer,
            st.avg_iters,
            r.decoder.name(),
            alpha,
            beta,
            st.seed
        );
    }
    s
}
