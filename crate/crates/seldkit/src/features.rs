//! Spectral front end: STFT, log-Mel energies, FOA intensity vectors, and
//! GCC-PHAT correlograms, plus the fixed chunking used by the pipeline.
//!
//! The reference configuration is 24 kHz audio, 1024-sample Hann windows
//! with 480-sample hops (24 ms / 20 ms), 64 Mel bands, and 250-frame feature
//! chunks aligned with 50 label frames at 100 ms.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SeldError};

/// STFT analysis parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftConfig {
    pub sample_rate_hz: u32,
    pub window_samples: usize,
    pub hop_samples: usize,
    pub fft_size: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            sample_rate_hz: 24000,
            window_samples: 1024,
            hop_samples: 480,
            fft_size: 1024,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz == 0 {
            return Err(SeldError::InvalidConfig("sample rate must be nonzero".into()));
        }
        if self.window_samples == 0 || self.hop_samples == 0 {
            return Err(SeldError::InvalidConfig(
                "window and hop must be nonzero".into(),
            ));
        }
        if self.hop_samples > self.window_samples {
            return Err(SeldError::InvalidConfig("hop larger than window".into()));
        }
        if self.fft_size < self.window_samples {
            return Err(SeldError::InvalidConfig("FFT size smaller than window".into()));
        }
        Ok(())
    }

    /// Number of complete frames for a signal of `len` samples:
    /// `floor((len - window) / hop) + 1`, no padding.
    pub fn num_frames(&self, len: usize) -> usize {
        if len < self.window_samples {
            0
        } else {
            (len - self.window_samples) / self.hop_samples + 1
        }
    }

    /// One-sided bin count, `fft_size / 2 + 1`.
    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }
}

/// Number of Mel bands in the reference feature set.
pub const MEL_BANDS: usize = 64;

/// Log floor applied to Mel powers before the natural log.
pub const LOG_FLOOR: f64 = 1e-10;

/// Denominator guard for intensity-vector normalization.
pub const INTENSITY_EPSILON: f64 = 1e-12;

/// Magnitude guard below which a whitened cross-spectrum bin is zeroed.
pub const GCC_EPSILON: f64 = 1e-12;

/// Default GCC-PHAT lag radius in samples.
pub const DEFAULT_GCC_MAX_LAG: usize = 32;

/// Feature frames per chunk fed to downstream consumers.
pub const CHUNK_STFT_FRAMES: usize = 250;

/// Label frames per chunk (100 ms grid, 5 s of audio).
pub const CHUNK_LABEL_FRAMES: usize = 50;

/// Complex one-sided STFT of a single channel.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    frames: usize,
    bins: usize,
    fft_size: usize,
    sample_rate_hz: u32,
    hop_samples: usize,
    data: Vec<Complex64>,
}

impl Spectrogram {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn hop_samples(&self) -> usize {
        self.hop_samples
    }

    pub fn bin(&self, frame: usize, bin: usize) -> Complex64 {
        self.data[frame * self.bins + bin]
    }

    /// One frame's bins.
    pub fn frame(&self, frame: usize) -> &[Complex64] {
        &self.data[frame * self.bins..(frame + 1) * self.bins]
    }
}

/// Short-time Fourier transform with a periodic Hann window and no
/// normalization (plain unscaled FFT of the windowed frame).
pub fn stft(signal: &[f64], config: &StftConfig) -> Result<Spectrogram> {
    config.validate()?;
    if signal.len() < config.window_samples {
        return Err(SeldError::invalid(format!(
            "signal of {} samples is shorter than one {}-sample window",
            signal.len(),
            config.window_samples
        )));
    }
    let frames = config.num_frames(signal.len());
    let bins = config.num_bins();
    let window: Vec<f64> = (0..config.window_samples)
        .map(|i| {
            0.5 * (1.0
                - (2.0 * std::f64::consts::PI * i as f64 / config.window_samples as f64).cos())
        })
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(config.fft_size);
    let mut buf = vec![Complex64::new(0.0, 0.0); config.fft_size];
    let mut data = Vec::with_capacity(frames * bins);
    for f in 0..frames {
        let start = f * config.hop_samples;
        buf.fill(Complex64::new(0.0, 0.0));
        for (i, w) in window.iter().enumerate() {
            buf[i] = Complex64::new(signal[start + i] * w, 0.0);
        }
        fft.process(&mut buf);
        data.extend_from_slice(&buf[..bins]);
    }
    Ok(Spectrogram {
        frames,
        bins,
        fft_size: config.fft_size,
        sample_rate_hz: config.sample_rate_hz,
        hop_samples: config.hop_samples,
        data,
    })
}

/// Dense real-valued feature array indexed `(frame, bin, channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    frames: usize,
    bins: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureTensor {
    pub fn zeros(frames: usize, bins: usize, channels: usize) -> Self {
        FeatureTensor {
            frames,
            bins,
            channels,
            data: vec![0.0; frames * bins * channels],
        }
    }

    pub fn from_data(frames: usize, bins: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != frames * bins * channels {
            return Err(SeldError::invalid(format!(
                "tensor data length {} does not match {}x{}x{}",
                data.len(),
                frames,
                bins,
                channels
            )));
        }
        Ok(FeatureTensor {
            frames,
            bins,
            channels,
            data,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.frames, self.bins, self.channels]
    }

    pub fn get(&self, frame: usize, bin: usize, channel: usize) -> f64 {
        self.data[(frame * self.bins + bin) * self.channels + channel]
    }

    pub fn set(&mut self, frame: usize, bin: usize, channel: usize, value: f64) {
        self.data[(frame * self.bins + bin) * self.channels + channel] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Errors if any element is NaN or infinite.
    pub fn validate_finite(&self) -> Result<()> {
        if let Some(i) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(SeldError::invalid(format!(
                "non-finite feature value at flat index {i}"
            )));
        }
        Ok(())
    }
}

/// Triangular Mel filterbank on one-sided FFT bins (HTK mel scale,
/// area-normalized triangles).
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    bands: usize,
    bins: usize,
    /// Row-major `bands x bins` weights.
    weights: Vec<f64>,
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

impl MelFilterbank {
    pub fn new(
        bands: usize,
        fft_size: usize,
        sample_rate_hz: u32,
        fmin_hz: f64,
        fmax_hz: f64,
    ) -> Result<Self> {
        if bands == 0 {
            return Err(SeldError::InvalidConfig("need at least one Mel band".into()));
        }
        let nyquist = sample_rate_hz as f64 / 2.0;
        if !(0.0..nyquist).contains(&fmin_hz) || fmax_hz <= fmin_hz || fmax_hz > nyquist {
            return Err(SeldError::InvalidConfig(format!(
                "invalid Mel range [{fmin_hz}, {fmax_hz}] for Nyquist {nyquist}"
            )));
        }
        let bins = fft_size / 2 + 1;
        let bin_hz = sample_rate_hz as f64 / fft_size as f64;
        let (mel_lo, mel_hi) = (hz_to_mel(fmin_hz), hz_to_mel(fmax_hz));
        let edges: Vec<f64> = (0..bands + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (bands + 1) as f64))
            .collect();

        let mut weights = vec![0.0; bands * bins];
        for band in 0..bands {
            let (lo, center, hi) = (edges[band], edges[band + 1], edges[band + 2]);
            let norm = 2.0 / (hi - lo);
            for bin in 0..bins {
                let f = bin as f64 * bin_hz;
                let w = if f > lo && f < center {
                    (f - lo) / (center - lo)
                } else if f >= center && f < hi {
                    (hi - f) / (hi - center)
                } else {
                    0.0
                };
                weights[band * bins + bin] = w * norm;
            }
        }
        Ok(MelFilterbank {
            bands,
            bins,
            weights,
        })
    }

    /// The reference 64-band filterbank spanning 0 Hz to Nyquist.
    pub fn default_for(fft_size: usize, sample_rate_hz: u32) -> Self {
        MelFilterbank::new(
            MEL_BANDS,
            fft_size,
            sample_rate_hz,
            0.0,
            sample_rate_hz as f64 / 2.0,
        )
        .expect("reference filterbank parameters are valid")
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn weight(&self, band: usize, bin: usize) -> f64 {
        self.weights[band * self.bins + bin]
    }

    fn band_weights(&self, band: usize) -> &[f64] {
        &self.weights[band * self.bins..(band + 1) * self.bins]
    }
}

/// Linear Mel-band power per frame (`frames x bands x 1`).
pub fn mel_power(spec: &Spectrogram, filterbank: &MelFilterbank) -> Result<FeatureTensor> {
    if filterbank.bins() != spec.bins() {
        return Err(SeldError::invalid(format!(
            "filterbank has {} bins, spectrogram has {}",
            filterbank.bins(),
            spec.bins()
        )));
    }
    let mut out = FeatureTensor::zeros(spec.frames(), filterbank.bands(), 1);
    for f in 0..spec.frames() {
        let frame = spec.frame(f);
        for band in 0..filterbank.bands() {
            let acc: f64 = filterbank
                .band_weights(band)
                .iter()
                .zip(frame)
                .map(|(&w, c)| {
                    if w == 0.0 {
                        0.0
                    } else {
                        w * c.norm_sqr()
                    }
                })
                .sum();
            out.set(f, band, 0, acc);
        }
    }
    Ok(out)
}

/// Log-Mel spectrogram with the reference 64-band filterbank:
/// `ln(max(power, LOG_FLOOR))`, shape `frames x 64 x 1`.
pub fn mel_spectrogram(spec: &Spectrogram) -> Result<FeatureTensor> {
    let fb = MelFilterbank::default_for(spec.fft_size(), spec.sample_rate_hz());
    let mut t = mel_power(spec, &fb)?;
    for f in 0..t.frames() {
        for b in 0..t.bins() {
            t.set(f, b, 0, t.get(f, b, 0).max(LOG_FLOOR).ln());
        }
    }
    Ok(t)
}

/// Normalized FOA intensity vectors aggregated to Mel bands.
///
/// Input is the four ACN-ordered spectrograms `[W, Y, Z, X]`. Per TF bin the
/// active intensity is `Re(conj(W) * (X, Y, Z))`, normalized by the total
/// energy `|W|^2 + (|X|^2 + |Y|^2 + |Z|^2) / 3 + eps`; bins are then averaged
/// into bands weighted by the Mel filterbank. Output is
/// `frames x 64 x 3` with channels `(Ix, Iy, Iz)`.
pub fn intensity_vectors(specs: &[Spectrogram]) -> Result<FeatureTensor> {
    if specs.len() != 4 {
        return Err(SeldError::invalid(format!(
            "intensity vectors need 4 FOA channels, got {}",
            specs.len()
        )));
    }
    let (frames, bins) = (specs[0].frames(), specs[0].bins());
    if specs.iter().any(|s| s.frames() != frames || s.bins() != bins) {
        return Err(SeldError::invalid("FOA spectrogram shapes differ"));
    }
    let fb = MelFilterbank::default_for(specs[0].fft_size(), specs[0].sample_rate_hz());
    let (w, y, z, x) = (&specs[0], &specs[1], &specs[2], &specs[3]);

    let mut out = FeatureTensor::zeros(frames, fb.bands(), 3);
    let mut ivec = vec![[0.0f64; 3]; bins];
    for f in 0..frames {
        for b in 0..bins {
            let cw = w.bin(f, b);
            let (cx, cy, cz) = (x.bin(f, b), y.bin(f, b), z.bin(f, b));
            let denom = cw.norm_sqr()
                + (cx.norm_sqr() + cy.norm_sqr() + cz.norm_sqr()) / 3.0
                + INTENSITY_EPSILON;
            ivec[b] = [
                (cw.conj() * cx).re / denom,
                (cw.conj() * cy).re / denom,
                (cw.conj() * cz).re / denom,
            ];
        }
        for band in 0..fb.bands() {
            let weights = fb.band_weights(band);
            let mut acc = [0.0f64; 3];
            let mut wsum = 0.0;
            for (bin, &wt) in weights.iter().enumerate() {
                if wt == 0.0 {
                    continue;
                }
                wsum += wt;
                for c in 0..3 {
                    acc[c] += wt * ivec[bin][c];
                }
            }
            if wsum > 0.0 {
                for c in 0..3 {
                    out.set(f, band, c, acc[c] / wsum);
                }
            }
        }
    }
    Ok(out)
}

/// GCC-PHAT correlogram between two aligned spectrograms.
///
/// The whitened cross-spectrum `conj(L) * R / |conj(L) * R|` is inverse
/// transformed and cropped to `[-max_lag, +max_lag]`; output shape is
/// `frames x (2 max_lag + 1) x 1` with lag `-max_lag` at bin 0. Positive lag
/// means the left channel leads. Bins whose cross magnitude is below
/// [`GCC_EPSILON`] contribute zero.
pub fn gcc_phat(left: &Spectrogram, right: &Spectrogram, max_lag: usize) -> Result<FeatureTensor> {
    if left.frames() != right.frames() || left.bins() != right.bins() {
        return Err(SeldError::invalid(format!(
            "GCC spectrogram shapes differ: {}x{} vs {}x{}",
            left.frames(),
            left.bins(),
            right.frames(),
            right.bins()
        )));
    }
    let n = left.fft_size();
    if max_lag == 0 || 2 * max_lag + 1 > n {
        return Err(SeldError::invalid(format!(
            "max lag {max_lag} invalid for FFT size {n}"
        )));
    }
    let bins = left.bins();
    let mut planner = FftPlanner::new();
    let inverse = planner.plan_fft_inverse(n);

    let mut out = FeatureTensor::zeros(left.frames(), 2 * max_lag + 1, 1);
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    for f in 0..left.frames() {
        for b in 0..bins {
            let cross = left.bin(f, b).conj() * right.bin(f, b);
            let mag = cross.norm();
            let white = if mag > GCC_EPSILON {
                cross / mag
            } else {
                Complex64::new(0.0, 0.0)
            };
            full[b] = white;
            if b > 0 && b < n - b {
                full[n - b] = white.conj();
            }
        }
        inverse.process(&mut full);
        for lag in -(max_lag as isize)..=max_lag as isize {
            let idx = lag.rem_euclid(n as isize) as usize;
            out.set(
                f,
                (lag + max_lag as isize) as usize,
                0,
                full[idx].re / n as f64,
            );
        }
        full.fill(Complex64::new(0.0, 0.0));
    }
    Ok(out)
}

/// Stacks same-shaped single-source tensors along the channel axis.
pub fn stack_channels(parts: &[FeatureTensor]) -> Result<FeatureTensor> {
    let first = parts
        .first()
        .ok_or_else(|| SeldError::invalid("cannot stack zero tensors"))?;
    if parts
        .iter()
        .any(|p| p.frames() != first.frames() || p.bins() != first.bins())
    {
        return Err(SeldError::invalid("stacked tensors must share frame/bin shape"));
    }
    let channels: usize = parts.iter().map(|p| p.channels()).sum();
    let mut out = FeatureTensor::zeros(first.frames(), first.bins(), channels);
    let mut ch0 = 0;
    for p in parts {
        for f in 0..p.frames() {
            for b in 0..p.bins() {
                for c in 0..p.channels() {
                    out.set(f, b, ch0 + c, p.get(f, b, c));
                }
            }
        }
        ch0 += p.channels();
    }
    Ok(out)
}

/// Splits a tensor into fixed-length chunks along time, zero-padding the
/// final partial chunk. An empty input produces no chunks.
pub fn chunk_frames(tensor: &FeatureTensor, frames_per_chunk: usize) -> Vec<FeatureTensor> {
    if tensor.frames() == 0 || frames_per_chunk == 0 {
        return Vec::new();
    }
    let num_chunks = tensor.frames().div_ceil(frames_per_chunk);
    let mut chunks = Vec::with_capacity(num_chunks);
    for c in 0..num_chunks {
        let mut chunk = FeatureTensor::zeros(frames_per_chunk, tensor.bins(), tensor.channels());
        let start = c * frames_per_chunk;
        let take = frames_per_chunk.min(tensor.frames() - start);
        for f in 0..take {
            for b in 0..tensor.bins() {
                for ch in 0..tensor.channels() {
                    chunk.set(f, b, ch, tensor.get(start + f, b, ch));
                }
            }
        }
        chunks.push(chunk);
    }
    chunks
}

/// Mean-pools along time by an integer factor (e.g. 250 feature frames to 50
/// label frames with factor 5). Frame count must divide evenly.
pub fn pool_time_mean(tensor: &FeatureTensor, factor: usize) -> Result<FeatureTensor> {
    if factor == 0 || tensor.frames() % factor != 0 {
        return Err(SeldError::invalid(format!(
            "cannot pool {} frames by factor {factor}",
            tensor.frames()
        )));
    }
    let out_frames = tensor.frames() / factor;
    let mut out = FeatureTensor::zeros(out_frames, tensor.bins(), tensor.channels());
    for f in 0..out_frames {
        for b in 0..tensor.bins() {
            for c in 0..tensor.channels() {
                let mut acc = 0.0;
                for k in 0..factor {
                    acc += tensor.get(f * factor + k, b, c);
                }
                out.set(f, b, c, acc / factor as f64);
            }
        }
    }
    Ok(out)
}

/// Per-frame RMS level using the STFT framing (rectangular window), for
/// level-based cues.
pub fn frame_rms(signal: &[f64], config: &StftConfig) -> Vec<f64> {
    let frames = config.num_frames(signal.len());
    (0..frames)
        .map(|f| {
            let start = f * config.hop_samples;
            let frame = &signal[start..start + config.window_samples];
            (frame.iter().map(|v| v * v).sum::<f64>() / config.window_samples as f64).sqrt()
        })
        .collect()
}
