//! C ABI over the phonostat core.
//!
//! Every fallible function returns a [`PhonostatStatus`]. On failure a
//! message is kept per thread and can be read with
//! [`phonostat_last_error_message`]. Objects are handed out as opaque
//! pointers and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::OnceLock;

use phonostat::features::{decode_pfe1, encode_pfe1, FrameMatrix};
use phonostat::stats::{self, Covariance, CovarianceMode, FitOptions, GaussianSummary, ModePolicy};
use phonostat::textgrid::{self, Phoneme, TextGrid};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhonostatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Numeric = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhonostatCovariancePolicy {
    /// Full covariance unless there are fewer than twice as many samples as dimensions.
    Auto = 0,
    Full = 1,
    Diagonal = 2,
}

/// Opaque fitted Gaussian.
pub struct PhonostatGaussian(GaussianSummary);

/// Opaque frame matrix decoded from a PFE1 buffer.
pub struct PhonostatFrames(FrameMatrix);

/// Opaque parsed TextGrid.
pub struct PhonostatTextGrid(TextGrid);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: PhonostatStatus, msg: impl Into<String>) -> PhonostatStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> PhonostatStatus) -> PhonostatStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(PhonostatStatus::Panic, "internal panic"))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(PhonostatStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

fn stats_status(e: &stats::StatsError) -> PhonostatStatus {
    match e {
        stats::StatsError::IllConditioned | stats::StatsError::NonFinite => PhonostatStatus::Numeric,
        _ => PhonostatStatus::InvalidArgument,
    }
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, PhonostatStatus> {
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(PhonostatStatus::InvalidArgument, "string is not valid UTF-8"))
}

fn box_out<T>(out: *mut *mut T, value: T) {
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn phonostat_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn phonostat_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version"),
    };
    VERSION.as_ptr()
}

/// Fits a Gaussian to `n_samples` row-major rows of length `dim`.
///
/// # Safety
/// `samples` must point to `n_samples * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_gaussian_fit(
    samples: *const f64,
    n_samples: usize,
    dim: usize,
    policy: PhonostatCovariancePolicy,
    shrinkage: f64,
    ridge: f64,
    out: *mut *mut PhonostatGaussian,
) -> PhonostatStatus {
    guard(|| {
        non_null!(samples, out);
        if dim == 0 || n_samples == 0 {
            return fail(PhonostatStatus::InvalidArgument, "n_samples and dim must be positive");
        }
        let Some(len) = n_samples.checked_mul(dim) else {
            return fail(PhonostatStatus::InvalidArgument, "n_samples * dim overflows");
        };
        let data = slice::from_raw_parts(samples, len);
        let rows: Vec<&[f64]> = data.chunks_exact(dim).collect();
        let options = FitOptions {
            policy: match policy {
                PhonostatCovariancePolicy::Auto => ModePolicy::Auto,
                PhonostatCovariancePolicy::Full => ModePolicy::Full,
                PhonostatCovariancePolicy::Diagonal => ModePolicy::Diagonal,
            },
            shrinkage,
            ridge,
        };
        match stats::fit_gaussian(&rows, &options) {
            Ok(g) => {
                box_out(out, PhonostatGaussian(g));
                PhonostatStatus::Ok
            }
            Err(e) => fail(stats_status(&e), e.to_string()),
        }
    })
}

/// Builds a Gaussian from a mean of length `dim` and a row-major `dim x dim`
/// covariance.
///
/// # Safety
/// `mean` must hold `dim` doubles, `covariance` `dim * dim`, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_gaussian_from_parts(
    mean: *const f64,
    covariance: *const f64,
    dim: usize,
    n_samples: usize,
    out: *mut *mut PhonostatGaussian,
) -> PhonostatStatus {
    guard(|| {
        non_null!(mean, covariance, out);
        if dim == 0 {
            return fail(PhonostatStatus::InvalidArgument, "dim must be positive");
        }
        let Some(len) = dim.checked_mul(dim) else {
            return fail(PhonostatStatus::InvalidArgument, "dim * dim overflows");
        };
        let mean = slice::from_raw_parts(mean, dim).to_vec();
        let cov = slice::from_raw_parts(covariance, len).to_vec();
        if mean.iter().chain(&cov).any(|v| !v.is_finite()) {
            return fail(PhonostatStatus::InvalidArgument, "non-finite input");
        }
        box_out(
            out,
            PhonostatGaussian(GaussianSummary::from_parts(mean, Covariance::Full(cov), n_samples)),
        );
        PhonostatStatus::Ok
    })
}

/// Dimension of `g`, or 0 when `g` is null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn phonostat_gaussian_dim(g: *const PhonostatGaussian) -> usize {
    g.as_ref().map_or(0, |g| g.0.dim())
}

/// 1 when `g` was fitted with a diagonal covariance, 0 otherwise.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn phonostat_gaussian_is_diagonal(g: *const PhonostatGaussian) -> i32 {
    g.as_ref().map_or(0, |g| (g.0.mode() == CovarianceMode::Diagonal) as i32)
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phonostat_gaussian_free(g: *mut PhonostatGaussian) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// KL(p || q).
///
/// # Safety
/// `p` and `q` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_kld(
    p: *const PhonostatGaussian,
    q: *const PhonostatGaussian,
    out: *mut f64,
) -> PhonostatStatus {
    guard(|| {
        non_null!(p, q, out);
        match stats::kld_gaussian(&(*p).0, &(*q).0) {
            Ok(v) => {
                *out = v;
                PhonostatStatus::Ok
            }
            Err(e) => fail(stats_status(&e), e.to_string()),
        }
    })
}

/// Both directed divergences and their mean. Any of the outputs may be null.
///
/// # Safety
/// `real` and `synthetic` must be live handles; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_symmetric_kld(
    real: *const PhonostatGaussian,
    synthetic: *const PhonostatGaussian,
    out_d_rs: *mut f64,
    out_d_sr: *mut f64,
    out_d_sym: *mut f64,
) -> PhonostatStatus {
    guard(|| {
        non_null!(real, synthetic);
        match stats::symmetric_kld(&(*real).0, &(*synthetic).0) {
            Ok(k) => {
                for (dst, v) in [(out_d_rs, k.d_rs), (out_d_sr, k.d_sr), (out_d_sym, k.d_sym)] {
                    if !dst.is_null() {
                        *dst = v;
                    }
                }
                PhonostatStatus::Ok
            }
            Err(e) => fail(stats_status(&e), e.to_string()),
        }
    })
}

/// Pearson r and its two-tailed p-value.
///
/// # Safety
/// `xs` and `ys` must hold `n` doubles each; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_pearson(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    out_r: *mut f64,
    out_p: *mut f64,
) -> PhonostatStatus {
    guard(|| {
        non_null!(xs, ys, out_r, out_p);
        match stats::pearson(slice::from_raw_parts(xs, n), slice::from_raw_parts(ys, n)) {
            Ok(c) => {
                *out_r = c.r;
                *out_p = c.p;
                PhonostatStatus::Ok
            }
            Err(e) => fail(stats_status(&e), e.to_string()),
        }
    })
}

/// Decodes a PFE1 buffer.
///
/// # Safety
/// `bytes` must hold `len` bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_pfe1_decode(
    bytes: *const u8,
    len: usize,
    out: *mut *mut PhonostatFrames,
) -> PhonostatStatus {
    guard(|| {
        non_null!(bytes, out);
        match decode_pfe1(slice::from_raw_parts(bytes, len)) {
            Ok(fm) => {
                box_out(out, PhonostatFrames(fm));
                PhonostatStatus::Ok
            }
            Err(e) => fail(PhonostatStatus::Parse, e.to_string()),
        }
    })
}

/// Encodes `n_frames x dim` row-major frames as PFE1. With `buf` null or too
/// small, only `*written` is set to the required size and
/// `BufferTooSmall` is returned (`Ok` when `buf` is null).
///
/// # Safety
/// `data` must hold `n_frames * dim` doubles; `buf`, when non-null, must hold
/// `buf_len` bytes; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_pfe1_encode(
    data: *const f64,
    n_frames: usize,
    dim: usize,
    hop_s: f64,
    win_s: f64,
    start_offset_s: f64,
    buf: *mut u8,
    buf_len: usize,
    written: *mut usize,
) -> PhonostatStatus {
    guard(|| {
        non_null!(data, written);
        if dim == 0 || u32::try_from(dim).is_err() || u32::try_from(n_frames).is_err() {
            return fail(PhonostatStatus::InvalidArgument, "dim and n_frames must fit in u32, dim > 0");
        }
        if !(hop_s > 0.0 && win_s > 0.0 && start_offset_s.is_finite()) {
            return fail(PhonostatStatus::InvalidArgument, "hop and window must be positive");
        }
        let Some(len) = n_frames.checked_mul(dim) else {
            return fail(PhonostatStatus::InvalidArgument, "n_frames * dim overflows");
        };
        let values = slice::from_raw_parts(data, len).to_vec();
        let bytes = encode_pfe1(&FrameMatrix::new(values, n_frames, dim, hop_s, win_s, start_offset_s));
        *written = bytes.len();
        if buf.is_null() {
            return PhonostatStatus::Ok;
        }
        if buf_len < bytes.len() {
            return fail(
                PhonostatStatus::BufferTooSmall,
                format!("buffer holds {buf_len} bytes, {} needed", bytes.len()),
            );
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        PhonostatStatus::Ok
    })
}

/// Writes the shape and timing of `frames`. Any output may be null.
///
/// # Safety
/// `frames` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_frames_shape(
    frames: *const PhonostatFrames,
    n_frames: *mut usize,
    dim: *mut usize,
    hop_s: *mut f64,
    win_s: *mut f64,
    start_offset_s: *mut f64,
) -> PhonostatStatus {
    guard(|| {
        non_null!(frames);
        let fm = &(*frames).0;
        if !n_frames.is_null() {
            *n_frames = fm.n_frames();
        }
        if !dim.is_null() {
            *dim = fm.dim();
        }
        for (dst, v) in [(hop_s, fm.hop_s), (win_s, fm.win_s), (start_offset_s, fm.start_offset_s)] {
            if !dst.is_null() {
                *dst = v;
            }
        }
        PhonostatStatus::Ok
    })
}

/// Row-major frame values, `n_frames * dim` doubles owned by `frames`.
///
/// # Safety
/// `frames` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn phonostat_frames_data(frames: *const PhonostatFrames) -> *const f64 {
    frames.as_ref().map_or(ptr::null(), |f| f.0.as_slice().as_ptr())
}

/// # Safety
/// `frames` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phonostat_frames_free(frames: *mut PhonostatFrames) {
    if !frames.is_null() {
        drop(Box::from_raw(frames));
    }
}

/// Parses a long-format TextGrid from a NUL-terminated UTF-8 string.
///
/// # Safety
/// `text` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_textgrid_parse(text: *const c_char, out: *mut *mut PhonostatTextGrid) -> PhonostatStatus {
    guard(|| {
        non_null!(text, out);
        let text = match c_str(text) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match textgrid::parse_textgrid(text) {
            Ok(tg) => {
                box_out(out, PhonostatTextGrid(tg));
                PhonostatStatus::Ok
            }
            Err(e) => fail(PhonostatStatus::Parse, e.to_string()),
        }
    })
}

/// Counts non-silence phones on `tier`. Labels in the default silence set
/// are skipped; unknown labels are an error.
///
/// # Safety
/// `tg` must be a live handle, `tier` a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_textgrid_phone_count(
    tg: *const PhonostatTextGrid,
    tier: *const c_char,
    out: *mut usize,
) -> PhonostatStatus {
    guard(|| {
        non_null!(tg, tier, out);
        let tier = match c_str(tier) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let intervals = match textgrid::phone_intervals(&(*tg).0, tier, &textgrid::DEFAULT_SILENCE_LABELS) {
            Ok(iv) => iv,
            Err(e) => return fail(PhonostatStatus::InvalidArgument, e.to_string()),
        };
        for iv in &intervals {
            if let Err(e) = textgrid::strip_stress(&iv.label) {
                return fail(PhonostatStatus::InvalidArgument, e.to_string());
            }
        }
        *out = intervals.len();
        PhonostatStatus::Ok
    })
}

/// # Safety
/// `tg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phonostat_textgrid_free(tg: *mut PhonostatTextGrid) {
    if !tg.is_null() {
        drop(Box::from_raw(tg));
    }
}

/// Maps an ARPAbet label with optional stress digit to its index in the
/// alphabetical 39-phoneme inventory.
///
/// # Safety
/// `label` must be a valid C string and `out_index` writable.
#[no_mangle]
pub unsafe extern "C" fn phonostat_phoneme_index(label: *const c_char, out_index: *mut u32) -> PhonostatStatus {
    guard(|| {
        non_null!(label, out_index);
        let label = match c_str(label) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match textgrid::strip_stress(label) {
            Ok(p) => {
                *out_index = Phoneme::ALL.iter().position(|&q| q == p).unwrap_or(0) as u32;
                PhonostatStatus::Ok
            }
            Err(e) => fail(PhonostatStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Name of phoneme `index`, or null when out of range. Static storage.
#[no_mangle]
pub extern "C" fn phonostat_phoneme_name(index: u32) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| Phoneme::ALL.iter().map(|p| CString::new(p.as_str()).unwrap()).collect());
    names.get(index as usize).map_or(ptr::null(), |s| s.as_ptr())
}

/// 1 for vowels, 0 for consonants, -1 when out of range.
#[no_mangle]
pub extern "C" fn phonostat_phoneme_is_vowel(index: u32) -> i32 {
    Phoneme::ALL
        .get(index as usize)
        .map_or(-1, |p| (p.category() == textgrid::Category::Vowel) as i32)
}
