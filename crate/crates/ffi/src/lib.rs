//! C ABI over the simulator, circuit builder and solvers.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `_free`. Every entry point returns a [`QcmStatus`]; on failure
//! `qcm_last_error` copies the message of the calling thread's last error.
//! Panics are caught at the boundary and reported as `QCM_PANIC`.

use qcm::poisson::{self, FitConfig, GridSpec1D};
use qcm::qft::{qft_circuit, iqft_circuit, QftSpec};
use qcm::rve::{self, RveProblem};
use qcm::transpile::transpile_counts;
use qcm::{Circuit, Control, Error, GateInstance, GateKind, StateVector};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Capacity = 3,
    Validation = 4,
    DegenerateProjection = 5,
    NormDrift = 6,
    Precondition = 7,
    Fit = 8,
    NonConvergence = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Opaque statevector handle.
pub struct QcmStateVector(StateVector);

/// Opaque circuit handle.
pub struct QcmCircuit(Circuit);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> QcmStatus {
    match e {
        Error::Capacity(_) => QcmStatus::Capacity,
        Error::Validation(_) => QcmStatus::Validation,
        Error::DegenerateProjection(_) => QcmStatus::DegenerateProjection,
        Error::NormDrift(_) => QcmStatus::NormDrift,
        Error::InvalidArgument(_) => QcmStatus::InvalidArgument,
        Error::Precondition(_) => QcmStatus::Precondition,
        Error::Fit(_) => QcmStatus::Fit,
        Error::NonConvergence(_) => QcmStatus::NonConvergence,
        Error::Io(_) => QcmStatus::Io,
    }
}

struct Fail(QcmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QcmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            QcmStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic in qcm".into());
            QcmStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for `len` reads.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and valid for `len` reads per the caller contract.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

/// # Safety
/// `p` is null or valid for `len` writes.
unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and valid for `len` writes per the caller contract.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

/// Copies the calling thread's last error message (NUL-terminated,
/// truncated to `cap`) into `buf`. Returns the full message length.
///
/// # Safety
/// `buf` is null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            // SAFETY: `buf` holds `cap >= n + 1` bytes.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Allocates `|0...0>` on `num_qubits` qubits.
///
/// # Safety
/// `out` is null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qcm_statevector_new(num_qubits: usize, out: *mut *mut QcmStateVector) -> QcmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = StateVector::new_zero_state(num_qubits)?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(QcmStateVector(s))) };
        Ok(())
    })
}

/// # Safety
/// `s` is null or a handle from `qcm_statevector_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcm_statevector_free(s: *mut QcmStateVector) {
    if !s.is_null() {
        // SAFETY: the handle came from Box::into_raw.
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Number of amplitudes, `2^n`; 0 for a null handle.
///
/// # Safety
/// `s` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcm_statevector_len(s: *const QcmStateVector) -> usize {
    // SAFETY: live handle or null.
    unsafe { s.as_ref() }.map_or(0, |s| s.0.len())
}

/// Copies the amplitudes into `re` and `im`, each of length `len`, which
/// must be at least the state's amplitude count.
///
/// # Safety
/// `s` is a live handle; `re`, `im` are valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_statevector_amplitudes(
    s: *const QcmStateVector,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> QcmStatus {
    guard(|| {
        // SAFETY: live handle or null.
        let s = unsafe { s.as_ref() }.ok_or_else(|| null("state"))?;
        let amps = s.0.amplitudes();
        if len < amps.len() {
            return Err(Fail(QcmStatus::BufferTooSmall, format!("need {} entries, got {len}", amps.len())));
        }
        // SAFETY: caller contract on `re`, `im`.
        let (re, im) = unsafe { (slice_mut(re, len, "re")?, slice_mut(im, len, "im")?) };
        for (k, a) in amps.iter().enumerate() {
            re[k] = a.re;
            im[k] = a.im;
        }
        Ok(())
    })
}

/// Born probability of basis label `k`.
///
/// # Safety
/// `s` is a live handle; `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qcm_statevector_probability(s: *const QcmStateVector, k: usize, out: *mut f64) -> QcmStatus {
    guard(|| {
        // SAFETY: live handle or null.
        let s = unsafe { s.as_ref() }.ok_or_else(|| null("state"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if k >= s.0.len() {
            return Err(Error::InvalidArgument(format!("label {k} out of range")).into());
        }
        // SAFETY: checked non-null.
        unsafe { *out = s.0.probability(k) };
        Ok(())
    })
}

/// Applies every gate of `c`; the circuit must fit the register.
///
/// # Safety
/// `s` and `c` are live handles.
#[no_mangle]
pub unsafe extern "C" fn qcm_statevector_apply_circuit(s: *mut QcmStateVector, c: *const QcmCircuit) -> QcmStatus {
    guard(|| {
        // SAFETY: live handles or null.
        let s = unsafe { s.as_mut() }.ok_or_else(|| null("state"))?;
        let c = unsafe { c.as_ref() }.ok_or_else(|| null("circuit"))?;
        if c.0.num_qubits != s.0.num_qubits() {
            return Err(Error::InvalidArgument(format!(
                "circuit has {} qubits, state has {}",
                c.0.num_qubits,
                s.0.num_qubits()
            ))
            .into());
        }
        s.0.apply_circuit(&c.0)?;
        Ok(())
    })
}

/// Empty circuit on `num_qubits` qubits.
///
/// # Safety
/// `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qcm_circuit_new(num_qubits: usize, out: *mut *mut QcmCircuit) -> QcmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if num_qubits == 0 {
            return Err(Error::InvalidArgument("a circuit needs at least one qubit".into()).into());
        }
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(QcmCircuit(Circuit::new(num_qubits)))) };
        Ok(())
    })
}

/// QFT (or its inverse when `inverse` is nonzero) on `num_qubits` qubits.
///
/// # Safety
/// `out` is valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qcm_circuit_qft(num_qubits: usize, inverse: i32, out: *mut *mut QcmCircuit) -> QcmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = QftSpec::new(num_qubits);
        let c = if inverse != 0 { iqft_circuit(&spec)? } else { qft_circuit(&spec)? };
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(QcmCircuit(c))) };
        Ok(())
    })
}

/// # Safety
/// `c` is null or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcm_circuit_free(c: *mut QcmCircuit) {
    if !c.is_null() {
        // SAFETY: the handle came from Box::into_raw.
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Gate count; 0 for a null handle.
///
/// # Safety
/// `c` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcm_circuit_len(c: *const QcmCircuit) -> usize {
    // SAFETY: live handle or null.
    unsafe { c.as_ref() }.map_or(0, |c| c.0.len())
}

/// Appends a gate. `kind` is a name such as `"H"`, `"RY"` or `"U3"`;
/// `polarities[i]` is 1 for a control on `|1>` and 0 for one on `|0>`.
///
/// # Safety
/// `c` is a live handle; `kind` is a NUL-terminated string; each array is
/// valid for its length.
#[no_mangle]
pub unsafe extern "C" fn qcm_circuit_push(
    c: *mut QcmCircuit,
    kind: *const c_char,
    params: *const f64,
    num_params: usize,
    targets: *const usize,
    num_targets: usize,
    controls: *const usize,
    polarities: *const u8,
    num_controls: usize,
) -> QcmStatus {
    guard(|| {
        // SAFETY: live handle or null.
        let c = unsafe { c.as_mut() }.ok_or_else(|| null("circuit"))?;
        if kind.is_null() {
            return Err(null("kind"));
        }
        // SAFETY: NUL-terminated per the contract.
        let name = unsafe { CStr::from_ptr(kind) }
            .to_str()
            .map_err(|_| Fail(QcmStatus::InvalidArgument, "gate name is not UTF-8".into()))?;
        // SAFETY: array contracts.
        let (params, targets, controls, polarities) = unsafe {
            (
                slice(params, num_params, "params")?,
                slice(targets, num_targets, "targets")?,
                slice(controls, num_controls, "controls")?,
                slice(polarities, num_controls, "polarities")?,
            )
        };
        let kind = GateKind::from_name(name, params)?;
        let ctl = controls.iter().zip(polarities).map(|(&q, &p)| Control::on(q, p != 0)).collect();
        c.0.push(GateInstance::controlled(kind, ctl, targets.to_vec()))?;
        Ok(())
    })
}

/// Transpiled `{CNOT, U3}` counts of `c`.
///
/// # Safety
/// `c` is a live handle; `u3`, `cnot` are valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn qcm_circuit_gate_counts(c: *const QcmCircuit, u3: *mut usize, cnot: *mut usize) -> QcmStatus {
    guard(|| {
        // SAFETY: live handle or null.
        let c = unsafe { c.as_ref() }.ok_or_else(|| null("circuit"))?;
        if u3.is_null() || cnot.is_null() {
            return Err(null("count output"));
        }
        let counts = transpile_counts(&c.0);
        // SAFETY: checked non-null.
        unsafe {
            *u3 = counts.u3;
            *cnot = counts.cnot;
        }
        Ok(())
    })
}

/// Quantum solve of `-v'' = f` on a periodic grid of `len` cells (a power
/// of two) and the given length, with the default symbol fit. `f` must have
/// zero mean. Writes `len` values to `out`.
///
/// # Safety
/// `f` is valid for `len` reads and `out` for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qcm_poisson1d_solve(f: *const f64, len: usize, length: f64, out: *mut f64) -> QcmStatus {
    guard(|| {
        // SAFETY: array contracts.
        let (f, out) = unsafe { (slice(f, len, "f")?, slice_mut(out, len, "out")?) };
        let grid = GridSpec1D::new(len, length)?;
        let source = poisson::SourceField::new(f.to_vec())?;
        let sol = poisson::poisson1d_quantum_solve(&source, &grid, &FitConfig::default())?;
        out.copy_from_slice(&sol.solution);
        Ok(())
    })
}

/// Quantum RVE fixed point: `steps` iterations for the modulus field `mu`
/// (`len` cells, a power of two), reference `mu0` and mean strain
/// `gamma_bar`. Writes the last strain iterate to `strain` and the
/// effective modulus to `mu_eff`.
///
/// # Safety
/// `mu` is valid for `len` reads, `strain` for `len` writes and `mu_eff`
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn qcm_rve_solve(
    mu: *const f64,
    len: usize,
    mu0: f64,
    gamma_bar: f64,
    steps: usize,
    strain: *mut f64,
    mu_eff: *mut f64,
) -> QcmStatus {
    guard(|| {
        // SAFETY: array contracts.
        let (mu, strain) = unsafe { (slice(mu, len, "mu")?, slice_mut(strain, len, "strain")?) };
        if mu_eff.is_null() {
            return Err(null("mu_eff"));
        }
        let p = RveProblem::new(GridSpec1D::new(len, 1.0)?, mu.to_vec(), mu0, gamma_bar)?;
        let r = rve::quantum_fixed_point(&p, steps)?;
        strain.copy_from_slice(r.last());
        // SAFETY: checked non-null.
        unsafe { *mu_eff = rve::effective_modulus(&p.mu, r.last(), gamma_bar) };
        Ok(())
    })
}
