//! C ABI over `xyprobe`.
//!
//! A model is an opaque `XypModel*` created by [`xyp_model_new`] and released
//! with [`xyp_model_free`]. Every other call returns an [`XypStatus`]; results
//! are written through out-pointers only on `XYP_STATUS_OK`. After a failure,
//! [`xyp_last_error_message`] gives a description on the calling thread.
//!
//! Branches are passed as indices `0..=3` meaning `|00⟩, |01⟩, |10⟩, |11⟩`.
//! Complex arrays are interleaved `re, im`, row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use xyprobe::decoherence::{evolve, initial_plus_plus};
use xyprobe::linalg::Matrix4;
use xyprobe::{concurrence, BranchIndex, BranchSpectra, ChainParams, CouplingParams, DensityMatrix4, Error, C64};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XypStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A computation produced an inconsistent or non-convergent result.
    NumericalFailure = 3,
    /// A Rust panic was caught at the boundary.
    Internal = 4,
}

/// Chain, coupling and precomputed branch spectra.
pub struct XypModel {
    chain: ChainParams,
    coupling: CouplingParams,
    spectra: BranchSpectra,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> XypStatus {
    match err {
        Error::NotConverged { .. } | Error::Consistency(_) | Error::DegenerateBlock { .. } => {
            XypStatus::NumericalFailure
        }
        _ => XypStatus::InvalidArgument,
    }
}

/// Run `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (XypStatus, String)>) -> XypStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => XypStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            XypStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (XypStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (XypStatus, String) {
    (XypStatus::NullPointer, format!("`{name}` is null"))
}

fn branch(idx: u32, name: &str) -> Result<BranchIndex, (XypStatus, String)> {
    BranchIndex::from_index(idx as usize)
        .ok_or_else(|| (XypStatus::InvalidArgument, format!("`{name}` must be 0..=3, got {idx}")))
}

unsafe fn model_ref<'a>(model: *const XypModel) -> Result<&'a XypModel, (XypStatus, String)> {
    model.as_ref().ok_or_else(|| null("model"))
}

/// Create a model for an `n_sites`-site chain with anisotropy `gamma`, field
/// `lambda`, and probe couplings `g`, `h`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one `XypModel*`.
#[no_mangle]
pub unsafe extern "C" fn xyp_model_new(
    n_sites: usize,
    gamma: f64,
    lambda: f64,
    g: f64,
    h: f64,
    out: *mut *mut XypModel,
) -> XypStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let chain = ChainParams::new(n_sites, gamma, lambda).map_err(lib_err)?;
        let coupling = CouplingParams::new(g, h).map_err(lib_err)?;
        let spectra = BranchSpectra::new(&chain, &coupling);
        *out = Box::into_raw(Box::new(XypModel { chain, coupling, spectra }));
        Ok(())
    })
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`xyp_model_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn xyp_model_free(model: *mut XypModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// One decoherence-tensor entry `Γ_{bra;ket}(t)`.
///
/// # Safety
/// `model` must be live; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xyp_gamma_factor(
    model: *const XypModel,
    bra: u32,
    ket: u32,
    t: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> XypStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("out"));
        }
        let (bra, ket) = (branch(bra, "bra")?, branch(ket, "ket")?);
        if !t.is_finite() {
            return Err((XypStatus::InvalidArgument, "`t` must be finite".into()));
        }
        let z = m.spectra.factor(bra, ket, t);
        *out_re = z.re;
        *out_im = z.im;
        Ok(())
    })
}

/// All sixteen entries as 32 doubles: `[bra][ket]` row-major, interleaved.
///
/// # Safety
/// `model` must be live; `out` must point to 32 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn xyp_gamma_tensor(model: *const XypModel, t: f64, out: *mut f64) -> XypStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !t.is_finite() {
            return Err((XypStatus::InvalidArgument, "`t` must be finite".into()));
        }
        let tensor = m.spectra.tensor(t);
        let dst = std::slice::from_raw_parts_mut(out, 32);
        for (i, z) in tensor.entries.iter().flatten().enumerate() {
            dst[2 * i] = z.re;
            dst[2 * i + 1] = z.im;
        }
        Ok(())
    })
}

/// Wootters concurrence of a 4×4 density matrix given as 32 interleaved doubles.
///
/// # Safety
/// `rho` must point to 32 readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xyp_concurrence(rho: *const f64, out: *mut f64) -> XypStatus {
    guard(|| {
        if rho.is_null() {
            return Err(null("rho"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let src = std::slice::from_raw_parts(rho, 32);
        let m = Matrix4::from_fn(|r, c| C64::new(src[2 * (4 * r + c)], src[2 * (4 * r + c) + 1]));
        let state = DensityMatrix4::new(m).map_err(lib_err)?;
        *out = concurrence(&state).map_err(lib_err)?.concurrence;
        Ok(())
    })
}

/// Concurrence at time `t` of probes prepared in `|+⟩|+⟩`.
///
/// # Safety
/// `model` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xyp_evolve_concurrence(model: *const XypModel, t: f64, out: *mut f64) -> XypStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !t.is_finite() {
            return Err((XypStatus::InvalidArgument, "`t` must be finite".into()));
        }
        let rho = evolve(&initial_plus_plus(), &m.spectra.tensor(t)).map_err(lib_err)?;
        *out = concurrence(&rho).map_err(lib_err)?.concurrence;
        Ok(())
    })
}

/// Overlap of the paired-mode ground states of two branch Hamiltonians.
///
/// # Safety
/// `model` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn xyp_ground_state_overlap(
    model: *const XypModel,
    branch_a: u32,
    branch_b: u32,
    out: *mut f64,
) -> XypStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = m.spectra.overlap(branch(branch_a, "branch_a")?, branch(branch_b, "branch_b")?);
        Ok(())
    })
}

/// Chain parameters of a model.
///
/// # Safety
/// `model` must be live; each out-pointer must be writable or null to skip it.
#[no_mangle]
pub unsafe extern "C" fn xyp_model_params(
    model: *const XypModel,
    n_sites: *mut usize,
    gamma: *mut f64,
    lambda: *mut f64,
    g: *mut f64,
    h: *mut f64,
) -> XypStatus {
    guard(|| {
        let m = model_ref(model)?;
        let writes: [(*mut f64, f64); 4] =
            [(gamma, m.chain.gamma()), (lambda, m.chain.lambda()), (g, m.coupling.g), (h, m.coupling.h)];
        if !n_sites.is_null() {
            *n_sites = m.chain.n_sites();
        }
        for (p, v) in writes {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn xyp_status_message(status: XypStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        XypStatus::Ok => b"ok\0",
        XypStatus::NullPointer => b"null pointer argument\0",
        XypStatus::InvalidArgument => b"invalid argument\0",
        XypStatus::NumericalFailure => b"numerical failure\0",
        XypStatus::Internal => b"internal error\0",
    };
    s.as_ptr().cast()
}

/// Detail of the last failure on this thread; empty if none. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn xyp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_out_is_rejected() {
        let s = unsafe { xyp_model_new(8, 1.0, 0.5, 0.05, 0.05, ptr::null_mut()) };
        assert_eq!(s, XypStatus::NullPointer);
    }
}
