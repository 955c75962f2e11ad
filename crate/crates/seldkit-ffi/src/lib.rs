//! C ABI for the seldkit core.
//!
//! The surface follows the usual conventions for C bindings: opaque handles
//! behind pointers, an integer status code from every fallible call, caller
//! provided output buffers, and a thread-local error message queried with
//! [`seld_last_error`]. All entry points catch panics at the boundary and
//! report them as [`SeldStatus::Panic`] instead of unwinding into C.
//!
//! Memory rules: handles returned through `out` parameters are owned by the
//! caller and must be released with the matching `*_free` function; strings
//! returned by [`seld_version`] and [`seld_last_error`] are borrowed and must
//! not be freed.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use seldkit::ambisonics::{acs_rotate, encode_point_source, Direction, FoaBuffer, RotationStep};
use seldkit::io::{read_metadata_csv, read_wav, write_wav, MultichannelBuffer};
use seldkit::metrics::evaluate;
use seldkit::render::{foa_to_binaural, foa_to_stereo, BinauralRendererConfig};
use seldkit::SeldError;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeldStatus {
    /// The call succeeded.
    Ok = 0,
    /// A pointer was null, a buffer too small, or a value out of range.
    InvalidArgument = 1,
    /// Input data could not be read, parsed, or validated.
    DataError = 2,
    /// An internal panic was caught at the boundary.
    Panic = 3,
}

/// Opaque handle to a 4-channel first-order Ambisonics buffer.
pub struct SeldFoa {
    inner: FoaBuffer,
}

/// SELD metric set as plain numbers.
///
/// `localization_error_deg` is negative when no prediction was matched to a
/// reference (the mean would be undefined); all other fields are always
/// populated.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SeldScores {
    pub error_rate: f64,
    pub f_score: f64,
    pub localization_error_deg: f64,
    pub localization_recall: f64,
    pub seld_score: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(message).expect("nul-free error message"));
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

fn fail(status: SeldStatus, message: impl Into<String>) -> SeldStatus {
    set_error(message);
    status
}

fn fail_with(err: &SeldError) -> SeldStatus {
    let status = match err {
        SeldError::InvalidInput(_) | SeldError::InvalidConfig(_) => SeldStatus::InvalidArgument,
        _ => SeldStatus::DataError,
    };
    fail(status, err.to_string())
}

/// Runs a closure with panic containment; panics become `SeldStatus::Panic`.
fn guarded(f: impl FnOnce() -> SeldStatus) -> SeldStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            fail(SeldStatus::Panic, format!("internal panic: {message}"))
        }
    }
}

/// Converts a C path into a `PathBuf`, or reports why it cannot be used.
unsafe fn path_arg(ptr: *const c_char, name: &str) -> Result<PathBuf, SeldStatus> {
    if ptr.is_null() {
        return Err(fail(SeldStatus::InvalidArgument, format!("{name} is null")));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(
            SeldStatus::InvalidArgument,
            format!("{name} is not valid UTF-8"),
        )),
    }
}

/// Library version as a static, nul-terminated string.
#[no_mangle]
pub extern "C" fn seld_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the most recent failure on this thread, or null when
/// the last call succeeded. The pointer stays valid until the next seldkit
/// call on the same thread.
#[no_mangle]
pub extern "C" fn seld_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Encodes a mono signal into an FOA buffer at the given direction.
///
/// On success `*out` receives a new handle owned by the caller.
///
/// # Safety
/// `mono` must point to `len` readable doubles and `out` must be a valid
/// destination for one pointer.
#[no_mangle]
pub unsafe extern "C" fn seld_foa_encode(
    mono: *const f64,
    len: usize,
    sample_rate_hz: u32,
    azimuth_deg: f64,
    elevation_deg: f64,
    out: *mut *mut SeldFoa,
) -> SeldStatus {
    guarded(|| {
        if mono.is_null() || out.is_null() {
            return fail(SeldStatus::InvalidArgument, "mono and out must be non-null");
        }
        let samples = std::slice::from_raw_parts(mono, len);
        let direction = match Direction::new(azimuth_deg, elevation_deg) {
            Ok(d) => d,
            Err(e) => return fail_with(&e),
        };
        match encode_point_source(samples, direction, sample_rate_hz) {
            Ok(foa) => {
                *out = Box::into_raw(Box::new(SeldFoa { inner: foa }));
                SeldStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Reads a 4-channel WAV file as an FOA buffer.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid destination for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn seld_foa_read_wav(
    path: *const c_char,
    out: *mut *mut SeldFoa,
) -> SeldStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SeldStatus::InvalidArgument, "out must be non-null");
        }
        let path = match path_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let foa = match read_wav(&path).and_then(|buffer| buffer.to_foa()) {
            Ok(foa) => foa,
            Err(e) => return fail_with(&e),
        };
        *out = Box::into_raw(Box::new(SeldFoa { inner: foa }));
        SeldStatus::Ok
    })
}

/// Writes an FOA buffer to a 4-channel float WAV file.
///
/// # Safety
/// `foa` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn seld_foa_write_wav(
    foa: *const SeldFoa,
    path: *const c_char,
) -> SeldStatus {
    guarded(|| {
        let Some(foa) = foa.as_ref() else {
            return fail(SeldStatus::InvalidArgument, "foa handle is null");
        };
        let path = match path_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match write_wav(&path, &MultichannelBuffer::from_foa(&foa.inner)) {
            Ok(()) => SeldStatus::Ok,
            Err(e) => fail_with(&e),
        }
    })
}

/// Number of samples per channel, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn seld_foa_len(foa: *const SeldFoa) -> usize {
    unsafe { foa.as_ref() }.map_or(0, |f| f.inner.len())
}

/// Sample rate in Hz, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn seld_foa_sample_rate(foa: *const SeldFoa) -> u32 {
    unsafe { foa.as_ref() }.map_or(0, |f| f.inner.sample_rate_hz())
}

/// Copies one ACN-ordered channel (0 = W, 1 = Y, 2 = Z, 3 = X) into `out`.
///
/// `capacity` must be at least `seld_foa_len(foa)`.
///
/// # Safety
/// `out` must point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn seld_foa_channel(
    foa: *const SeldFoa,
    acn: u32,
    out: *mut f64,
    capacity: usize,
) -> SeldStatus {
    guarded(|| {
        let Some(foa) = foa.as_ref() else {
            return fail(SeldStatus::InvalidArgument, "foa handle is null");
        };
        if out.is_null() {
            return fail(SeldStatus::InvalidArgument, "out must be non-null");
        }
        if acn > 3 {
            return fail(SeldStatus::InvalidArgument, format!("ACN index {acn} > 3"));
        }
        let channel = foa.inner.channel(acn as usize);
        if capacity < channel.len() {
            return fail(
                SeldStatus::InvalidArgument,
                format!("capacity {capacity} < {} samples", channel.len()),
            );
        }
        std::slice::from_raw_parts_mut(out, channel.len()).copy_from_slice(channel);
        SeldStatus::Ok
    })
}

/// Rotates the scene in place by a quarter-turn multiple (90, 180, or 270
/// degrees counterclockwise) using the exact channel-swap rotation.
///
/// # Safety
/// `foa` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn seld_foa_rotate(foa: *mut SeldFoa, degrees: c_int) -> SeldStatus {
    guarded(|| {
        let Some(foa) = foa.as_mut() else {
            return fail(SeldStatus::InvalidArgument, "foa handle is null");
        };
        let step = match degrees {
            90 => RotationStep::R90,
            180 => RotationStep::R180,
            270 => RotationStep::R270,
            other => {
                return fail(
                    SeldStatus::InvalidArgument,
                    format!("rotation must be 90, 180, or 270 degrees, got {other}"),
                )
            }
        };
        foa.inner = acs_rotate(&foa.inner, step);
        SeldStatus::Ok
    })
}

/// Releases a handle returned by one of the constructors. Null is a no-op.
///
/// # Safety
/// `foa` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn seld_foa_free(foa: *mut SeldFoa) {
    if !foa.is_null() {
        drop(Box::from_raw(foa));
    }
}

unsafe fn render_into(
    foa: *const SeldFoa,
    left: *mut f64,
    right: *mut f64,
    capacity: usize,
    render: impl Fn(&FoaBuffer) -> Result<(Vec<f64>, Vec<f64>), SeldError>,
) -> SeldStatus {
    let Some(foa) = foa.as_ref() else {
        return fail(SeldStatus::InvalidArgument, "foa handle is null");
    };
    if left.is_null() || right.is_null() {
        return fail(SeldStatus::InvalidArgument, "left and right must be non-null");
    }
    if capacity < foa.inner.len() {
        return fail(
            SeldStatus::InvalidArgument,
            format!("capacity {capacity} < {} samples", foa.inner.len()),
        );
    }
    match render(&foa.inner) {
        Ok((l, r)) => {
            std::slice::from_raw_parts_mut(left, l.len()).copy_from_slice(&l);
            std::slice::from_raw_parts_mut(right, r.len()).copy_from_slice(&r);
            SeldStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Renders the exact W±Y stereo downmix into caller buffers of at least
/// `seld_foa_len(foa)` samples each.
///
/// # Safety
/// `left` and `right` must each point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn seld_render_stereo(
    foa: *const SeldFoa,
    left: *mut f64,
    right: *mut f64,
    capacity: usize,
) -> SeldStatus {
    guarded(|| {
        render_into(foa, left, right, capacity, |buffer| {
            Ok(foa_to_stereo(buffer).into_channels())
        })
    })
}

/// Renders the parametric spherical-head binaural downmix (default renderer
/// settings) into caller buffers of at least `seld_foa_len(foa)` samples.
///
/// # Safety
/// `left` and `right` must each point to `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn seld_render_binaural(
    foa: *const SeldFoa,
    left: *mut f64,
    right: *mut f64,
    capacity: usize,
) -> SeldStatus {
    guarded(|| {
        render_into(foa, left, right, capacity, |buffer| {
            foa_to_binaural(buffer, &BinauralRendererConfig::default())
                .map(|stereo| stereo.into_channels())
        })
    })
}

/// Evaluates a prediction CSV against a reference CSV (DCASE metadata
/// format) and fills `out` with the SELD metric set.
///
/// # Safety
/// Both paths must be nul-terminated strings and `out` must point to one
/// writable `SeldScores`.
#[no_mangle]
pub unsafe extern "C" fn seld_evaluate_files(
    predictions_csv: *const c_char,
    references_csv: *const c_char,
    tolerance_deg: f64,
    out: *mut SeldScores,
) -> SeldStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SeldStatus::InvalidArgument, "out must be non-null");
        }
        if !tolerance_deg.is_finite() || tolerance_deg <= 0.0 {
            return fail(
                SeldStatus::InvalidArgument,
                format!("tolerance must be positive and finite, got {tolerance_deg}"),
            );
        }
        let predictions_path = match path_arg(predictions_csv, "predictions_csv") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let references_path = match path_arg(references_csv, "references_csv") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let predictions = match read_metadata_csv(&predictions_path) {
            Ok(v) => v,
            Err(e) => return fail_with(&e),
        };
        let references = match read_metadata_csv(&references_path) {
            Ok(v) => v,
            Err(e) => return fail_with(&e),
        };
        let (scores, _) = evaluate(&predictions, &references, tolerance_deg);
        *out = SeldScores {
            error_rate: scores.error_rate,
            f_score: scores.f_score,
            localization_error_deg: scores.localization_error_deg.unwrap_or(-1.0),
            localization_recall: scores.localization_recall,
            seld_score: scores.seld_score,
        };
        SeldStatus::Ok
    })
}
