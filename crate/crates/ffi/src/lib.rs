//! C ABI over the `ctxauth` library.
//!
//! Every fallible call returns a [`CtxStatus`]; on failure a message is kept in
//! thread-local storage and can be copied out with [`ctx_last_error_message`].
//! Profiles are handed out as opaque [`CtxProfile`] pointers and must be
//! released with [`ctx_profile_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ctxauth::classifiers::Algorithm;
use ctxauth::eval::compute_eer;
use ctxauth::features::{extract_features, Window, FEATURE_DIM};
use ctxauth::profile::{load_profile, ProfileError, UserProfile};
use ctxauth::trace::AccelSample;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Serialization = 4,
    SchemaMismatch = 5,
    MissingAlgorithm = 6,
    DimensionMismatch = 7,
    FeatureExtraction = 8,
    Evaluation = 9,
    Internal = 10,
}

/// Classifier selector, in the same order the library reports them.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtxAlgorithm {
    LogReg = 0,
    Mlp = 1,
    Knn = 2,
    Svm = 3,
    Rf = 4,
}

impl From<CtxAlgorithm> for Algorithm {
    fn from(a: CtxAlgorithm) -> Self {
        match a {
            CtxAlgorithm::LogReg => Algorithm::LogReg,
            CtxAlgorithm::Mlp => Algorithm::Mlp,
            CtxAlgorithm::Knn => Algorithm::Knn,
            CtxAlgorithm::Svm => Algorithm::Svm,
            CtxAlgorithm::Rf => Algorithm::Rf,
        }
    }
}

/// Opaque handle to an enrolled user profile.
pub struct CtxProfile {
    inner: UserProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(CtxStatus, String);

impl From<ProfileError> for Failure {
    fn from(e: ProfileError) -> Self {
        let status = match &e {
            ProfileError::Io { .. } => CtxStatus::Io,
            ProfileError::Serialization(_) => CtxStatus::Serialization,
            ProfileError::SchemaVersionMismatch { .. } => CtxStatus::SchemaMismatch,
            ProfileError::MissingAlgorithm(_) => CtxStatus::MissingAlgorithm,
            ProfileError::DimensionMismatch { .. } => CtxStatus::DimensionMismatch,
            ProfileError::Classifier(_) => CtxStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CtxStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CtxStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err(Failure(CtxStatus::Internal, "panic".into())));
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            CtxStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(CtxStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn profile_ref<'a>(p: *const CtxProfile) -> Result<&'a UserProfile, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("profile"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ctx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length of every raw feature vector.
#[no_mangle]
pub extern "C" fn ctx_feature_dim() -> usize {
    FEATURE_DIM
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length in bytes, so
/// a caller can size the buffer with a first call passing `len = 0`.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null when `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn ctx_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Loads a profile JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer. On
/// success `*out` owns a handle that must be freed with [`ctx_profile_free`].
#[no_mangle]
pub unsafe extern "C" fn ctx_profile_load(path: *const c_char, out: *mut *mut CtxProfile) -> CtxStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let path = c_str(path, "path")?;
        let inner = load_profile(Path::new(path))?;
        *out = Box::into_raw(Box::new(CtxProfile { inner }));
        Ok(())
    })
}

/// Parses a profile from an in-memory JSON document.
///
/// # Safety
/// Same contract as [`ctx_profile_load`].
#[no_mangle]
pub unsafe extern "C" fn ctx_profile_from_json(json: *const c_char, out: *mut *mut CtxProfile) -> CtxStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let inner = UserProfile::from_json(c_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(CtxProfile { inner }));
        Ok(())
    })
}

/// Releases a profile handle. Null is ignored.
///
/// # Safety
/// `profile` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ctx_profile_free(profile: *mut CtxProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of contexts that carry trained models.
///
/// # Safety
/// `profile` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ctx_profile_context_count(profile: *const CtxProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.inner.contexts.len())
}

/// Scores one raw feature vector of [`ctx_feature_dim`] components. Writes the
/// routed context id and the genuine-class score in `[0, 1]`.
///
/// # Safety
/// `features` must be valid for `len` doubles; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ctx_profile_score(
    profile: *const CtxProfile,
    algorithm: CtxAlgorithm,
    features: *const f64,
    len: usize,
    out_context: *mut usize,
    out_score: *mut f64,
) -> CtxStatus {
    guard(|| {
        let p = profile_ref(profile)?;
        let raw = slice(features, len, "features")?;
        let (ctx, score) = p.score(raw, algorithm.into())?;
        write_outputs(out_context, out_score, ctx, score)
    })
}

/// Extracts features from one window of preprocessed samples and scores it.
///
/// The window starts at `t_ms[0]` and spans the profile's window length;
/// samples past that are ignored. `screen_on` holds 0/1 bytes.
///
/// # Safety
/// Each array must be valid for `n` elements; the out pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ctx_profile_score_window(
    profile: *const CtxProfile,
    algorithm: CtxAlgorithm,
    t_ms: *const u64,
    x: *const f64,
    y: *const f64,
    z: *const f64,
    screen_on: *const u8,
    n: usize,
    out_context: *mut usize,
    out_score: *mut f64,
) -> CtxStatus {
    guard(|| {
        let p = profile_ref(profile)?;
        let t = slice(t_ms, n, "t_ms")?;
        let (x, y, z) = (slice(x, n, "x")?, slice(y, n, "y")?, slice(z, n, "z")?);
        let screen = slice(screen_on, n, "screen_on")?;
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Failure(CtxStatus::InvalidArgument, "timestamps must be strictly increasing".into()));
        }
        let Some(&start) = t.first() else {
            return Err(Failure(CtxStatus::InvalidArgument, "empty window".into()));
        };
        let end = start + p.window.win_ms;
        let samples: Vec<AccelSample> = (0..n)
            .take_while(|&i| t[i] < end)
            .map(|i| AccelSample::new(t[i], x[i], y[i], z[i], screen[i] != 0))
            .collect();
        let window = Window::from_samples(&p.user_id, start, end, &samples);
        let features = extract_features(&window, p.window.dtw_max_points)
            .map_err(|e| Failure(CtxStatus::FeatureExtraction, e.to_string()))?;
        let (ctx, score) = p.score(&features.values, algorithm.into())?;
        write_outputs(out_context, out_score, ctx, score)
    })
}

unsafe fn write_outputs(out_context: *mut usize, out_score: *mut f64, ctx: usize, score: f64) -> Result<(), Failure> {
    if out_context.is_null() || out_score.is_null() {
        return Err(null("output pointer"));
    }
    *out_context = ctx;
    *out_score = score;
    Ok(())
}

/// Equal error rate of two score lists, with the operating threshold.
///
/// # Safety
/// Arrays must be valid for their lengths; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ctx_compute_eer(
    genuine: *const f64,
    n_genuine: usize,
    impostor: *const f64,
    n_impostor: usize,
    out_eer: *mut f64,
    out_threshold: *mut f64,
) -> CtxStatus {
    guard(|| {
        let g = slice(genuine, n_genuine, "genuine")?;
        let i = slice(impostor, n_impostor, "impostor")?;
        let r = compute_eer(g, i).map_err(|e| Failure(CtxStatus::Evaluation, e.to_string()))?;
        if out_eer.is_null() || out_threshold.is_null() {
            return Err(null("output pointer"));
        }
        *out_eer = r.eer;
        *out_threshold = r.threshold;
        Ok(())
    })
}
