//! Binary-input channels. The all-zero codeword is always sent; bit 0 maps
//! to the BPSK symbol `+1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::LdpcCode;
use crate::error::{Error, Result};

/// Channel LLRs are clamped to `[-LLR_CLAMP, LLR_CLAMP]`.
pub const LLR_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    /// Binary symmetric channel with crossover probability `p`.
    Bsc { p: f64 },
    /// BPSK over additive white Gaussian noise of standard deviation `sigma`.
    BiAwgn { sigma: f64 },
}

impl Channel {
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "BSC crossover must be in [0, 0.5], got {p}"
            )));
        }
        Ok(Channel::Bsc { p })
    }

    pub fn biawgn(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be positive, got {sigma}"
            )));
        }
        Ok(Channel::BiAwgn { sigma })
    }

    /// BiAWGN at `Eb/N0` (dB) for a code of the given rate, unit symbol energy.
    pub fn biawgn_ebn0(ebn0_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "code rate must be in (0, 1], got {rate}"
            )));
        }
        let ebn0 = 10f64.powf(ebn0_db / 10.0);
        Self::biawgn((1.0 / (2.0 * rate * ebn0)).sqrt())
    }

    /// `ln P(y | 0) - ln P(y | 1)` for observation `y`: a received bit for
    /// the BSC, a real sample for BiAWGN. Clamped to [`LLR_CLAMP`].
    pub fn llr(&self, y: f64) -> f64 {
        let raw = match *self {
            Channel::Bsc { p } => {
                let mag = ((1.0 - p) / p).ln();
                if y == 0.0 {
                    mag
                } else {
                    -mag
                }
            }
            Channel::BiAwgn { sigma } => 2.0 * y / (sigma * sigma),
        };
        raw.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// What the receiver sees for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub llrs: Vec<f64>,
    /// Hard channel decisions (received bits, or the sign of the sample).
    pub hard: Vec<u8>,
    /// Noise realization: 1.0 where the BSC flipped, the Gaussian sample for
    /// BiAWGN.
    pub noise: Vec<f64>,
}

/// RNG for Monte Carlo trial `trial` under `seed`: one ChaCha stream per trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Sends the all-zero codeword of `code`.
pub fn transmit(code: &LdpcCode, channel: &Channel, seed: u64) -> Received {
    transmit_with(code, channel, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn transmit_with(code: &LdpcCode, channel: &Channel, rng: &mut impl Rng) -> Received {
    let n = code.n();
    let mut out = Received {
        llrs: Vec::with_capacity(n),
        hard: Vec::with_capacity(n),
        noise: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let (y, bit, noise) = match *channel {
            Channel::Bsc { p } => {
                let flip = rng.random::<f64>() < p;
                let bit = u8::from(flip);
                (f64::from(bit), bit, f64::from(bit))
            }
            Channel::BiAwgn { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                let y = 1.0 + sigma * z;
                (y, u8::from(y < 0.0), z * sigma)
            }
        };
        out.llrs.push(channel.llr(y));
        out.hard.push(bit);
        out.noise.push(noise);
    }
    out
}
