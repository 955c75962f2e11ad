//! File formats: multichannel WAV, DCASE-style metadata CSV, and report
//! output.
//!
//! WAV supports RIFF PCM16 and IEEE float32 at 1–4 channels; PCM16 samples
//! scale by 1/32768 and float files round-trip losslessly at f32 precision.
//! Metadata CSV is the DCASE convention: five integer columns
//! `frame,class,source,azimuth,elevation`, no header, one row per active
//! (frame, class, source).

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use serde::Serialize;

use crate::ambisonics::{wrap_azimuth_deg, FoaBuffer, FOA_CHANNELS};
use crate::annotation::{sort_annotations, EventAnnotation};
use crate::error::{Result, SeldError};
use crate::render::StereoBuffer;
use crate::util::windowed_sinc;

/// Interleaved-file representation: equal-length channels at one rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelBuffer {
    channels: Vec<Vec<f64>>,
    sample_rate_hz: u32,
}

impl MultichannelBuffer {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate_hz: u32) -> Result<Self> {
        if channels.is_empty() || channels.len() > 4 {
            return Err(SeldError::invalid(format!(
                "{} channels, supported range is 1..=4",
                channels.len()
            )));
        }
        if channels.iter().any(|c| c.len() != channels[0].len()) {
            return Err(SeldError::invalid("channels must share one length"));
        }
        if sample_rate_hz == 0 {
            return Err(SeldError::invalid("sample rate must be nonzero"));
        }
        Ok(MultichannelBuffer {
            channels,
            sample_rate_hz,
        })
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn from_foa(foa: &FoaBuffer) -> Self {
        MultichannelBuffer {
            channels: foa.channels().iter().map(|c| c.to_vec()).collect(),
            sample_rate_hz: foa.sample_rate_hz(),
        }
    }

    pub fn from_stereo(stereo: &StereoBuffer) -> Self {
        MultichannelBuffer {
            channels: vec![stereo.left().to_vec(), stereo.right().to_vec()],
            sample_rate_hz: stereo.sample_rate_hz(),
        }
    }

    pub fn to_foa(&self) -> Result<FoaBuffer> {
        if self.num_channels() != FOA_CHANNELS {
            return Err(SeldError::invalid(format!(
                "expected {FOA_CHANNELS} channels for FOA, found {}",
                self.num_channels()
            )));
        }
        let mut it = self.channels.iter().cloned();
        FoaBuffer::new(
            [
                it.next().unwrap(),
                it.next().unwrap(),
                it.next().unwrap(),
                it.next().unwrap(),
            ],
            self.sample_rate_hz,
        )
    }

    pub fn to_stereo(&self) -> Result<StereoBuffer> {
        if self.num_channels() != 2 {
            return Err(SeldError::invalid(format!(
                "expected 2 channels for stereo, found {}",
                self.num_channels()
            )));
        }
        StereoBuffer::new(
            self.channels[0].clone(),
            self.channels[1].clone(),
            self.sample_rate_hz,
        )
    }
}

fn wav_error(path: &Path, err: hound::Error) -> SeldError {
    SeldError::Wav {
        path: path.to_path_buf(),
        message: err.to_string(),
    }
}

/// Reads a PCM16 or float32 WAV file into per-channel f64 buffers.
pub fn read_wav(path: impl AsRef<Path>) -> Result<MultichannelBuffer> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 4 {
        return Err(SeldError::Wav {
            path: path.to_path_buf(),
            message: format!("{} channels, supported range is 1..=4", spec.channels),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (format, bits) => {
            return Err(SeldError::Wav {
                path: path.to_path_buf(),
                message: format!("unsupported codec: {bits}-bit {format:?}"),
            })
        }
    };
    let num_channels = spec.channels as usize;
    let frames = interleaved.len() / num_channels;
    let mut channels = vec![Vec::with_capacity(frames); num_channels];
    for (i, sample) in interleaved.into_iter().enumerate() {
        channels[i % num_channels].push(sample);
    }
    MultichannelBuffer::new(channels, spec.sample_rate)
}

/// Writes the buffer as an IEEE float32 WAV file (samples cast to f32).
pub fn write_wav(path: impl AsRef<Path>, buffer: &MultichannelBuffer) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: buffer.num_channels() as u16,
        sample_rate: buffer.sample_rate_hz(),
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for i in 0..buffer.len() {
        for channel in buffer.channels() {
            writer
                .write_sample(channel[i] as f32)
                .map_err(|e| wav_error(path, e))?;
        }
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

/// Half-width of the resampling kernel, in input samples.
const RESAMPLE_KERNEL_HALF_WIDTH: usize = 32;

/// Windowed-sinc sample-rate conversion of one channel.
///
/// When downsampling, the kernel cutoff drops to the output Nyquist so the
/// discarded band is filtered out rather than aliased.
pub fn resample(samples: &[f64], from_hz: u32, to_hz: u32) -> Result<Vec<f64>> {
    if from_hz == 0 || to_hz == 0 {
        return Err(SeldError::invalid("sample rates must be nonzero"));
    }
    if from_hz == to_hz {
        return Ok(samples.to_vec());
    }
    let ratio = f64::from(to_hz) / f64::from(from_hz);
    let cutoff = ratio.min(1.0);
    let out_len = (samples.len() as f64 * ratio).ceil() as usize;
    // Downsampling stretches the kernel support by 1/cutoff; the window
    // stretches with it because windowed_sinc takes the scaled argument.
    let half = (RESAMPLE_KERNEL_HALF_WIDTH as f64 / cutoff).ceil() as isize;
    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let center = i as f64 / ratio;
        let lo = (center.floor() as isize - half).max(0);
        let hi = (center.floor() as isize + half).min(samples.len() as isize - 1);
        let mut acc = 0.0;
        for j in lo..=hi {
            let x = cutoff * (center - j as f64);
            acc += samples[j as usize]
                * cutoff
                * windowed_sinc(x, RESAMPLE_KERNEL_HALF_WIDTH as f64);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Resamples every channel of a buffer.
pub fn resample_buffer(buffer: &MultichannelBuffer, to_hz: u32) -> Result<MultichannelBuffer> {
    let channels = buffer
        .channels()
        .iter()
        .map(|c| resample(c, buffer.sample_rate_hz(), to_hz))
        .collect::<Result<Vec<_>>>()?;
    MultichannelBuffer::new(channels, to_hz)
}

/// One DCASE metadata CSV row: integer-degree direction of one active
/// source in one 100 ms frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DcaseMetadataRow {
    pub frame_index: usize,
    pub class_index: usize,
    pub source_index: usize,
    pub azimuth_deg: i32,
    pub elevation_deg: i32,
}

impl DcaseMetadataRow {
    pub fn to_annotation(self) -> EventAnnotation {
        EventAnnotation {
            frame_index: self.frame_index,
            class_index: self.class_index,
            source_index: self.source_index,
            azimuth_deg: f64::from(self.azimuth_deg),
            elevation_deg: f64::from(self.elevation_deg),
        }
    }

    /// Quantizes an annotation to integer degrees, wrapping the rounded
    /// azimuth back into `[-180, 180)` (179.6 rounds to 180, stored -180).
    pub fn from_annotation(annotation: &EventAnnotation) -> Self {
        DcaseMetadataRow {
            frame_index: annotation.frame_index,
            class_index: annotation.class_index,
            source_index: annotation.source_index,
            azimuth_deg: wrap_azimuth_deg(annotation.azimuth_deg.round()) as i32,
            elevation_deg: annotation.elevation_deg.round().clamp(-90.0, 90.0) as i32,
        }
    }
}

fn csv_error(path: &Path, line: usize, message: impl Into<String>) -> SeldError {
    SeldError::Csv {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a DCASE metadata CSV into annotations. Errors carry 1-based line
/// numbers.
pub fn read_metadata_csv(path: impl AsRef<Path>) -> Result<Vec<EventAnnotation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| SeldError::io(path, e))?;
    let mut rows = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let number = number + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(csv_error(
                path,
                number,
                format!("expected 5 columns, found {}", fields.len()),
            ));
        }
        let parse = |field: &str, name: &str| -> Result<i64> {
            field
                .parse::<i64>()
                .map_err(|_| csv_error(path, number, format!("non-integer {name} {field:?}")))
        };
        let frame = parse(fields[0], "frame index")?;
        let class = parse(fields[1], "class index")?;
        let source = parse(fields[2], "source index")?;
        let azimuth = parse(fields[3], "azimuth")?;
        let elevation = parse(fields[4], "elevation")?;
        if frame < 0 || class < 0 || source < 0 {
            return Err(csv_error(path, number, "indices must be non-negative"));
        }
        if !(-180..180).contains(&azimuth) {
            return Err(csv_error(
                path,
                number,
                format!("azimuth out of range: {azimuth}"),
            ));
        }
        if !(-90..=90).contains(&elevation) {
            return Err(csv_error(
                path,
                number,
                format!("elevation out of range: {elevation}"),
            ));
        }
        rows.push(
            DcaseMetadataRow {
                frame_index: frame as usize,
                class_index: class as usize,
                source_index: source as usize,
                azimuth_deg: azimuth as i32,
                elevation_deg: elevation as i32,
            }
            .to_annotation(),
        );
    }
    Ok(rows)
}

/// Writes annotations as a DCASE metadata CSV, quantized to integer degrees
/// and sorted by (frame, class, source).
pub fn write_metadata_csv(path: impl AsRef<Path>, annotations: &[EventAnnotation]) -> Result<()> {
    let path = path.as_ref();
    let mut sorted = annotations.to_vec();
    sort_annotations(&mut sorted);
    let file = fs::File::create(path).map_err(|e| SeldError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for annotation in &sorted {
        let row = DcaseMetadataRow::from_annotation(annotation);
        writeln!(
            out,
            "{},{},{},{},{}",
            row.frame_index, row.class_index, row.source_index, row.azimuth_deg, row.elevation_deg
        )
        .map_err(|e| SeldError::io(path, e))?;
    }
    out.flush().map_err(|e| SeldError::io(path, e))
}

/// Writes a value as pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| SeldError::invalid(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| SeldError::io(path, e))
}

/// Writes plain text, creating parent directories as needed by the caller.
pub fn write_text(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, contents).map_err(|e| SeldError::io(path, e))
}
