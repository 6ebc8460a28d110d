//! C ABI over `synthprune`.
//!
//! Every fallible function returns an [`SpStatus`]. On failure a message is
//! available from [`sp_last_error_message`] on the same thread until the
//! next failing call. Handles are opaque and must be released with their
//! matching `*_free` function. Buffers are caller-owned: the function
//! writes the required length to `*out_len` and fails with
//! `SP_STATUS_BUFFER_TOO_SMALL` if `capacity` is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use synthprune::analysis::{dag_prune, dag_prune_network, find_redundant, mask_similarity};
use synthprune::compression::{gaussian_terminus_distribution, init_subnetwork_mask, sparsity};
use synthprune::metrics::roc_auc;
use synthprune::network::{forward, Architecture, ConnectionMask, MaskedNetwork};
use synthprune::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Opaque network handle.
pub struct SpNetwork(MaskedNetwork);

/// Opaque connection-mask handle.
pub struct SpMask(ConnectionMask);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(SpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } | Error::Json(_) => SpStatus::Parse,
            _ => SpStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SpStatus::NullPointer, format!("null pointer: {what}"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            SpStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn fill(src: &[f64], dst: *mut f64, capacity: usize, out_len: *mut usize) -> Result<(), Fail> {
    *out(out_len, "out_len")? = src.len();
    if capacity < src.len() {
        return Err(Fail(
            SpStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if dst.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

unsafe fn string_in(p: *const c_char) -> Result<String, Fail> {
    if p.is_null() {
        return Err(null("text"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|e| Fail(SpStatus::InvalidArgument, format!("text is not UTF-8: {e}")))
}

fn string_out(s: String, dst: &mut *mut c_char) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|e| Fail(SpStatus::InvalidArgument, e.to_string()))?;
    *dst = c.into_raw();
    Ok(())
}

fn architecture(widths: &[usize]) -> Result<Architecture, Fail> {
    Ok(Architecture::new(widths.to_vec())?)
}

fn boxed<T>(value: T, dst: &mut *mut T) {
    *dst = Box::into_raw(Box::new(value));
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fully connected network with Glorot-uniform weights and zero biases.
///
/// # Safety
/// `widths` must point to `n_widths` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_network_init_dense(
    widths: *const usize,
    n_widths: usize,
    seed: u64,
    out_net: *mut *mut SpNetwork,
) -> SpStatus {
    guard(|| {
        let dst = out(out_net, "out")?;
        let arch = architecture(slice(widths, n_widths, "widths")?)?;
        boxed(SpNetwork(MaskedNetwork::init_dense(&arch, seed)), dst);
        Ok(())
    })
}

/// Parse a network from its text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_network_from_text(text: *const c_char, out_net: *mut *mut SpNetwork) -> SpStatus {
    guard(|| {
        let dst = out(out_net, "out")?;
        let net = MaskedNetwork::from_text(&string_in(text)?)?;
        boxed(SpNetwork(net), dst);
        Ok(())
    })
}

/// Serialise a network. Free the result with [`sp_string_free`].
///
/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_network_to_text(net: *const SpNetwork, out_text: *mut *mut c_char) -> SpStatus {
    guard(|| {
        let dst = out(out_text, "out")?;
        string_out(handle(net, "net")?.0.to_text(), dst)
    })
}

/// Replace the network's mask with a copy of `mask`; weights of newly
/// disabled connections become 0.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn sp_network_set_mask(net: *mut SpNetwork, mask: *const SpMask) -> SpStatus {
    guard(|| {
        let mask = handle(mask, "mask")?.0.clone();
        out(net, "net")?.0.set_mask(mask)?;
        Ok(())
    })
}

/// Copy of the network's mask.
///
/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_network_mask(net: *const SpNetwork, out_mask: *mut *mut SpMask) -> SpStatus {
    guard(|| {
        let dst = out(out_mask, "out")?;
        boxed(SpMask(handle(net, "net")?.0.mask().clone()), dst);
        Ok(())
    })
}

/// Output scores for `rows` samples laid out row-major in `inputs`.
///
/// # Safety
/// `inputs` must hold `rows * input_width` values; `scores` must hold
/// `capacity` values; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_network_forward(
    net: *const SpNetwork,
    inputs: *const f64,
    rows: usize,
    scores: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> SpStatus {
    guard(|| {
        let net = &handle(net, "net")?.0;
        let width = net.architecture().input_width();
        let len = rows
            .checked_mul(width)
            .ok_or_else(|| Fail(SpStatus::InvalidArgument, "rows * input width overflows".into()))?;
        let batch = slice(inputs, len, "inputs")?;
        let f = forward(net, batch)?;
        fill(f.scores(), scores, capacity, out_len)
    })
}

/// Fraction of disabled connections.
///
/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_network_sparsity(net: *const SpNetwork, out_sparsity: *mut f64) -> SpStatus {
    guard(|| {
        let s = sparsity(handle(net, "net")?.0.mask());
        *out(out_sparsity, "out")? = s;
        Ok(())
    })
}

/// New network without connections that lie on no input-to-output path.
/// Outputs are unchanged. `removed` receives the number of connections
/// dropped and may be null.
///
/// # Safety
/// `net` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_network_dag_prune(
    net: *const SpNetwork,
    out_net: *mut *mut SpNetwork,
    removed: *mut usize,
) -> SpStatus {
    guard(|| {
        let dst = out(out_net, "out")?;
        let (pruned, gone) = dag_prune_network(&handle(net, "net")?.0);
        if let Some(r) = removed.as_mut() {
            *r = gone.len();
        }
        boxed(SpNetwork(pruned), dst);
        Ok(())
    })
}

/// # Safety
/// `net` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_network_free(net: *mut SpNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Random-walk starting mask.
///
/// # Safety
/// `widths` must point to `n_widths` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_mask_walk_init(
    widths: *const usize,
    n_widths: usize,
    seed: u64,
    out_mask: *mut *mut SpMask,
) -> SpStatus {
    guard(|| {
        let dst = out(out_mask, "out")?;
        let arch = architecture(slice(widths, n_widths, "widths")?)?;
        boxed(SpMask(init_subnetwork_mask(&arch, seed)), dst);
        Ok(())
    })
}

/// Parse a mask from its text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_mask_from_text(text: *const c_char, out_mask: *mut *mut SpMask) -> SpStatus {
    guard(|| {
        let dst = out(out_mask, "out")?;
        let mask = ConnectionMask::from_text(&string_in(text)?)?;
        boxed(SpMask(mask), dst);
        Ok(())
    })
}

/// Serialise a mask. Free the result with [`sp_string_free`].
///
/// # Safety
/// `mask` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_mask_to_text(mask: *const SpMask, out_text: *mut *mut c_char) -> SpStatus {
    guard(|| {
        let dst = out(out_text, "out")?;
        string_out(handle(mask, "mask")?.0.to_text(), dst)
    })
}

/// # Safety
/// `mask` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_mask_enabled_count(mask: *const SpMask, out_count: *mut usize) -> SpStatus {
    guard(|| {
        let n = handle(mask, "mask")?.0.enabled_count();
        *out(out_count, "out")? = n;
        Ok(())
    })
}

/// # Safety
/// `mask` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_mask_sparsity(mask: *const SpMask, out_sparsity: *mut f64) -> SpStatus {
    guard(|| {
        let s = sparsity(&handle(mask, "mask")?.0);
        *out(out_sparsity, "out")? = s;
        Ok(())
    })
}

/// Jaccard similarity of two masks over the same architecture.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_mask_similarity(a: *const SpMask, b: *const SpMask, out_value: *mut f64) -> SpStatus {
    guard(|| {
        let v = mask_similarity(&handle(a, "a")?.0, &handle(b, "b")?.0)?;
        *out(out_value, "out")? = v;
        Ok(())
    })
}

/// Mask without connections on no input-to-output path. `removed` may be
/// null.
///
/// # Safety
/// `mask` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_mask_dag_prune(
    mask: *const SpMask,
    out_mask: *mut *mut SpMask,
    removed: *mut usize,
) -> SpStatus {
    guard(|| {
        let dst = out(out_mask, "out")?;
        let m = &handle(mask, "mask")?.0;
        if let Some(r) = removed.as_mut() {
            *r = find_redundant(m).len();
        }
        boxed(SpMask(dag_prune(m)), dst);
        Ok(())
    })
}

/// # Safety
/// `mask` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_mask_free(mask: *mut SpMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Normalised Gaussian terminus probabilities over `width` positions,
/// centred on `beta`.
///
/// # Safety
/// `probabilities` must hold `capacity` values and `out_len` be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_gaussian_distribution(
    beta: usize,
    width: usize,
    probabilities: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> SpStatus {
    guard(|| {
        if width == 0 {
            return Err(Fail(SpStatus::InvalidArgument, "width must be positive".into()));
        }
        fill(&gaussian_terminus_distribution(beta, width), probabilities, capacity, out_len)
    })
}

/// Area under the ROC curve; labels are 0 or 1.
///
/// # Safety
/// `scores` and `labels` must each hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_roc_auc(scores: *const f64, labels: *const f64, n: usize, out_auc: *mut f64) -> SpStatus {
    guard(|| {
        let v = roc_auc(slice(scores, n, "scores")?, slice(labels, n, "labels")?)?;
        *out(out_auc, "out")? = v;
        Ok(())
    })
}
