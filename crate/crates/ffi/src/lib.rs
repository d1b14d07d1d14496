//! C interface to the Dicke-basis simulator.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function. Every fallible call returns a
//! [`DickeStatus`], and on failure a message is kept per thread for
//! [`dicke_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dicke_core::measurement::{expval, probabilities, Observable};
use dicke_core::noise::depolarize;
use dicke_core::squeezing::squeezing;
use dicke_core::{Circuit, CollectiveState, Error};

/// Result codes shared by every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DickeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    Numeric = 5,
    Resource = 6,
    DegenerateFrame = 7,
    Unsupported = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Collective observables for [`dicke_state_expval`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DickeObservable {
    Jx = 0,
    Jy = 1,
    Jz = 2,
    JPlus = 3,
    JMinus = 4,
    Jx2 = 5,
    Jy2 = 6,
    Jz2 = 7,
    JPlus2 = 8,
    JMinus2 = 9,
}

impl From<DickeObservable> for Observable {
    fn from(o: DickeObservable) -> Self {
        match o {
            DickeObservable::Jx => Observable::Jx,
            DickeObservable::Jy => Observable::Jy,
            DickeObservable::Jz => Observable::Jz,
            DickeObservable::JPlus => Observable::JPlus,
            DickeObservable::JMinus => Observable::JMinus,
            DickeObservable::Jx2 => Observable::Jx2,
            DickeObservable::Jy2 => Observable::Jy2,
            DickeObservable::Jz2 => Observable::Jz2,
            DickeObservable::JPlus2 => Observable::JPlus2,
            DickeObservable::JMinus2 => Observable::JMinus2,
        }
    }
}

/// A validated circuit.
pub struct DickeCircuit(Circuit);

/// A block-diagonal collective density matrix.
pub struct DickeState(CollectiveState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: DickeStatus, msg: impl Into<String>) -> DickeStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> DickeStatus {
    match e {
        Error::Parse(_) => DickeStatus::Parse,
        Error::Domain(_) => DickeStatus::Domain,
        Error::Numeric(_) => DickeStatus::Numeric,
        Error::Resource(_) => DickeStatus::Resource,
        Error::DegenerateFrame(_) => DickeStatus::DegenerateFrame,
        Error::Unsupported(_) => DickeStatus::Unsupported,
    }
}

/// Run `body`, turning library errors and panics into status codes.
fn guard<F>(body: F) -> DickeStatus
where
    F: FnOnce() -> Result<(), DickeStatus>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DickeStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(DickeStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: dicke_core::Result<T>) -> Result<T, DickeStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), DickeStatus> {
    if p.is_null() {
        Err(fail(DickeStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn dicke_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dicke_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse and validate a circuit from NUL-terminated JSON.
///
/// # Safety
/// `json` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dicke_circuit_from_json(
    json: *const c_char,
    out: *mut *mut DickeCircuit,
) -> DickeStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(DickeStatus::InvalidUtf8, e.to_string()))?;
        let circuit = lift(Circuit::from_json(text))?;
        *out = Box::into_raw(Box::new(DickeCircuit(circuit)));
        Ok(())
    })
}

/// # Safety
/// `circuit` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn dicke_circuit_free(circuit: *mut DickeCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// # Safety
/// `circuit` must be a live handle and `n` writable.
#[no_mangle]
pub unsafe extern "C" fn dicke_circuit_particles(circuit: *const DickeCircuit, n: *mut u32) -> DickeStatus {
    guard(|| {
        non_null(circuit, "circuit")?;
        non_null(n, "n")?;
        *n = (*circuit).0.n;
        Ok(())
    })
}

/// Run the circuit from the ground state.
///
/// # Safety
/// `circuit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dicke_circuit_run(circuit: *const DickeCircuit, out: *mut *mut DickeState) -> DickeStatus {
    guard(|| {
        non_null(circuit, "circuit")?;
        non_null(out, "out")?;
        let state = lift((*circuit).0.run())?;
        *out = Box::into_raw(Box::new(DickeState(state)));
        Ok(())
    })
}

/// All particles down.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dicke_state_ground(n: u32, out: *mut *mut DickeState) -> DickeStatus {
    guard(|| {
        non_null(out, "out")?;
        let state = lift(CollectiveState::ground(n))?;
        *out = Box::into_raw(Box::new(DickeState(state)));
        Ok(())
    })
}

/// # Safety
/// `state` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn dicke_state_free(state: *mut DickeState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Apply a circuit to an existing state, producing a new handle.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dicke_state_apply(
    state: *const DickeState,
    circuit: *const DickeCircuit,
    out: *mut *mut DickeState,
) -> DickeStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(circuit, "circuit")?;
        non_null(out, "out")?;
        let next = lift(dicke_core::apply_circuit(&(*circuit).0, &(*state).0))?;
        *out = Box::into_raw(Box::new(DickeState(next)));
        Ok(())
    })
}

/// Collective depolarizing channel with probability `epsilon`.
///
/// # Safety
/// `state` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dicke_state_depolarize(
    state: *const DickeState,
    epsilon: f64,
    out: *mut *mut DickeState,
) -> DickeStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(out, "out")?;
        let next = lift(depolarize(&(*state).0, epsilon))?;
        *out = Box::into_raw(Box::new(DickeState(next)));
        Ok(())
    })
}

/// Number of `(j, m)` entries [`dicke_state_probabilities`] will write.
///
/// # Safety
/// `state` must be live and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn dicke_state_probability_count(state: *const DickeState, len: *mut usize) -> DickeStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(len, "len")?;
        *len = (*state).0.active().map(|(_, m)| m.nrows()).sum();
        Ok(())
    })
}

/// Write `2j`, `2m` and `P(j, m)` for every active entry, descending `j`
/// then `m`. `capacity` is the length of each output array.
///
/// # Safety
/// The three arrays must each hold at least `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn dicke_state_probabilities(
    state: *const DickeState,
    two_j: *mut u32,
    two_m: *mut i64,
    p: *mut f64,
    capacity: usize,
) -> DickeStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(two_j, "two_j")?;
        non_null(two_m, "two_m")?;
        non_null(p, "p")?;
        let table = lift(probabilities(&(*state).0))?;
        if table.entries.len() > capacity {
            return Err(fail(
                DickeStatus::BufferTooSmall,
                format!("need {} entries, have {capacity}", table.entries.len()),
            ));
        }
        for (i, e) in table.entries.iter().enumerate() {
            *two_j.add(i) = e.two_j;
            *two_m.add(i) = e.two_m;
            *p.add(i) = e.p;
        }
        Ok(())
    })
}

/// `tr(rho O)` as real and imaginary parts.
///
/// # Safety
/// `state` must be live; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn dicke_state_expval(
    state: *const DickeState,
    observable: DickeObservable,
    re: *mut f64,
    im: *mut f64,
) -> DickeStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let z = expval(&(*state).0, observable.into());
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Kitagawa–Ueda and Wineland squeezing parameters.
///
/// # Safety
/// `state` must be live; `xi2_s` and `xi2_r` writable.
#[no_mangle]
pub unsafe extern "C" fn dicke_state_xi2(state: *const DickeState, xi2_s: *mut f64, xi2_r: *mut f64) -> DickeStatus {
    guard(|| {
        non_null(state, "state")?;
        non_null(xi2_s, "xi2_s")?;
        non_null(xi2_r, "xi2_r")?;
        let s = lift(squeezing(&(*state).0))?;
        *xi2_s = s.xi2_s;
        *xi2_r = s.xi2_r;
        Ok(())
    })
}
