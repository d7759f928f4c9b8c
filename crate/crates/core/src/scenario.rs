//! Synthetic Monte Carlo realizations of the RIS-assisted pilot phase.
//!
//! One realization is i.i.d. Rayleigh channels `H` (Tx-RIS, `M x N`) and `G`
//! (RIS-Rx, `L x N`), the truncated-DFT activation pattern `S` (`K x N`), the
//! per-frame imperfection matrix `E` (`P x N`) and the noisy received tensor
//! `Y = I ×1 G ×2 H ×3 S ×4 E + V` of shape `L x M x K x P`. The pilot matrix
//! is the identity, so the symbol-period dimension equals `M` and never shows
//! up in the tensor.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, DenseTensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Transmit antennas.
    pub m: usize,
    /// Receive antennas.
    pub l: usize,
    /// RIS elements.
    pub n: usize,
    /// Blocks per frame.
    pub k: usize,
    /// Frames.
    pub p: usize,
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("M", self.m), ("L", self.l), ("N", self.n), ("K", self.k), ("P", self.p)] {
            if v == 0 {
                return Err(Error::Argument(format!("{name} must be at least 1")));
            }
        }
        if self.k < self.n {
            return Err(Error::identifiability(self.k, self.n));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Argument(format!("invalid SNR {} dB", self.snr_db)));
        }
        Ok(())
    }

    /// Received tensor shape `[L, M, K, P]`.
    pub fn tensor_dims(&self) -> [usize; 4] {
        [self.l, self.m, self.k, self.p]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpairmentMode {
    /// Amplitude `U[0,1]` and phase `U[0,2π]`.
    Full,
    /// Impaired elements are fully absorbing.
    BlockageOnly,
    /// Unit amplitude, phase `U[0,2π]`.
    PhaseOnly,
    /// No element is impaired.
    Ideal,
}

impl ImpairmentMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::BlockageOnly => "blockage-only",
            Self::PhaseOnly => "phase-only",
            Self::Ideal => "ideal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentConfig {
    /// Fraction of impaired elements per frame.
    pub r_b: f64,
    pub mode: ImpairmentMode,
    /// Draw a fresh impaired subset for every frame. When false, one subset
    /// is drawn per realization and only the perturbation values change.
    pub redraw_per_frame: bool,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        Self { r_b: 0.5, mode: ImpairmentMode::Full, redraw_per_frame: true }
    }
}

impl ImpairmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.r_b) {
            return Err(Error::Argument(format!("r_b = {} outside [0, 1]", self.r_b)));
        }
        Ok(())
    }

    /// `N_B = round(N r_b)`, halves rounded up.
    pub fn impaired_count(&self, n: usize) -> usize {
        ((n as f64 * self.r_b + 0.5).floor() as usize).min(n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    /// Tx-RIS channel, `M x N`.
    pub h: ComplexMatrix,
    /// RIS-Rx channel, `L x N`.
    pub g: ComplexMatrix,
}

/// Row `p` holds the perturbations `e_{n,p}` of frame `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpairmentMatrix {
    pub e: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActivationPattern {
    pub s: ComplexMatrix,
}

impl ActivationPattern {
    pub fn blocks(&self) -> usize {
        self.s.rows()
    }

    pub fn elements(&self) -> usize {
        self.s.cols()
    }
}

/// Zero-mean, unit-variance circularly-symmetric complex Gaussian sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gen_channels<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> ChannelSet {
    let h = gaussian_matrix(cfg.m, cfg.n, rng);
    let g = gaussian_matrix(cfg.l, cfg.n, rng);
    ChannelSet { h, g }
}

/// First `N` columns of the `K`-point DFT matrix, `s[k,n] = exp(-j 2π k n / K)`.
pub fn gen_activation(cfg: &ScenarioConfig) -> Result<ActivationPattern> {
    if cfg.k < cfg.n {
        return Err(Error::identifiability(cfg.k, cfg.n));
    }
    let k = cfg.k;
    let s = ComplexMatrix::from_fn(k, cfg.n, |row, col| {
        // reduce k*n mod K first so large grids keep an exact argument
        let phase = -2.0 * PI * ((row * col) % k) as f64 / k as f64;
        Complex64::from_polar(1.0, phase)
    });
    Ok(ActivationPattern { s })
}

pub fn gen_impairments<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    imp: &ImpairmentConfig,
    rng: &mut R,
) -> Result<ImpairmentMatrix> {
    imp.validate()?;
    let one = Complex64::new(1.0, 0.0);
    let mut e = ComplexMatrix::from_fn(cfg.p, cfg.n, |_, _| one);
    let count = imp.impaired_count(cfg.n);
    if imp.mode == ImpairmentMode::Ideal || count == 0 {
        return Ok(ImpairmentMatrix { e });
    }
    let fixed: Option<Vec<usize>> =
        (!imp.redraw_per_frame).then(|| sample(rng, cfg.n, count).into_vec());
    for p in 0..cfg.p {
        let subset = match &fixed {
            Some(s) => s.clone(),
            None => sample(rng, cfg.n, count).into_vec(),
        };
        for n in subset {
            e[(p, n)] = match imp.mode {
                ImpairmentMode::Full => {
                    let alpha: f64 = rng.random_range(0.0..=1.0);
                    let theta: f64 = rng.random_range(0.0..2.0 * PI);
                    Complex64::from_polar(alpha, theta)
                }
                ImpairmentMode::BlockageOnly => Complex64::new(0.0, 0.0),
                ImpairmentMode::PhaseOnly => Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)),
                ImpairmentMode::Ideal => one,
            };
        }
    }
    Ok(ImpairmentMatrix { e })
}

/// Noiseless PARAFAC tensor with factors `(G, H, S, E)`.
pub fn noiseless_received(
    ch: &ChannelSet,
    s: &ActivationPattern,
    e: &ImpairmentMatrix,
) -> Result<DenseTensor> {
    let n = ch.g.cols();
    if ch.h.cols() != n || s.s.cols() != n || e.e.cols() != n {
        return Err(Error::Dimension(format!(
            "factor column counts G:{} H:{} S:{} E:{}",
            n,
            ch.h.cols(),
            s.s.cols(),
            e.e.cols()
        )));
    }
    DenseTensor::from_cp_factors(&[&ch.g, &ch.h, &s.s, &e.e])
}

/// Noise variance for a target SNR relative to the realized signal power.
pub fn noise_variance(signal_power: f64, entries: usize, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        signal_power * 10f64.powf(-snr_db / 10.0) / entries as f64
    }
}

pub fn build_received<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    ch: &ChannelSet,
    s: &ActivationPattern,
    e: &ImpairmentMatrix,
    rng: &mut R,
) -> Result<DenseTensor> {
    let shapes = [
        ("H", ch.h.shape(), (cfg.m, cfg.n)),
        ("G", ch.g.shape(), (cfg.l, cfg.n)),
        ("S", s.s.shape(), (cfg.k, cfg.n)),
        ("E", e.e.shape(), (cfg.p, cfg.n)),
    ];
    for (name, got, want) in shapes {
        if got != want {
            return Err(Error::Dimension(format!("{name} is {got:?}, configuration implies {want:?}")));
        }
    }
    let mut y = noiseless_received(ch, s, e)?;
    let var = noise_variance(y.frobenius_norm_sqr(), y.len(), cfg.snr_db);
    if var > 0.0 {
        let sd = var.sqrt();
        for z in y.as_mut_slice() {
            *z += complex_gaussian(rng) * sd;
        }
    }
    Ok(y)
}

/// Ground truth of one realization.
#[derive(Clone, Debug)]
pub struct Truth {
    pub channels: ChannelSet,
    pub impairments: ImpairmentMatrix,
}

/// A complete realization ready for estimation.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub impairment_config: ImpairmentConfig,
    pub truth: Truth,
    pub pattern: ActivationPattern,
    pub received: DenseTensor,
}

impl Scenario {
    /// Draws channels, impairments and noise, in that order, from a ChaCha8
    /// stream seeded with `cfg.seed`.
    pub fn generate(cfg: &ScenarioConfig, imp: &ImpairmentConfig) -> Result<Self> {
        cfg.validate()?;
        imp.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let channels = gen_channels(cfg, &mut rng);
        let pattern = gen_activation(cfg)?;
        let impairments = gen_impairments(cfg, imp, &mut rng)?;
        let received = build_received(cfg, &channels, &pattern, &impairments, &mut rng)?;
        Ok(Self {
            config: *cfg,
            impairment_config: *imp,
            truth: Truth { channels, impairments },
            pattern,
            received,
        })
    }
}
