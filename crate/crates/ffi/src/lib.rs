//! C ABI over the simulator.
//!
//! Objects cross the boundary as opaque heap handles that the caller frees
//! with the matching `*_free`. Every fallible call returns a [`TbStatus`];
//! on failure the message is kept per thread and read back with
//! [`tb_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use timebin::compiler::{compile_with, parse_circuit, run_schedule, Circuit, CompileOptions, Schedule};
use timebin::primitives::LossTable;
use timebin::shor::{extract_order, run_shor, Amplitudes, Factoring, QftMode, ShorConfig, ShorOptions};
use timebin::state::{basis_state_in, probabilities, uniform_state_in, Frame, Polarization, TimeBinState};
use timebin::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    BufferTooSmall = 3,
    Parse = 4,
    FrameOverflow = 5,
    RailOccupied = 6,
    ScheduleInfeasible = 7,
    ResourceLimit = 8,
    UnsupportedInstance = 9,
    OrderNotFound = 10,
    Panic = 11,
}

/// Photon state over a frame of time bins.
pub struct TbState(TimeBinState);

/// Parsed qubit circuit.
pub struct TbCircuit(Circuit);

/// Compiled primitive schedule.
pub struct TbSchedule(Schedule);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> TbStatus {
    match e {
        Error::InvalidArgument(_) => TbStatus::InvalidArgument,
        Error::FrameOverflow { .. } => TbStatus::FrameOverflow,
        Error::RailOccupied { .. } => TbStatus::RailOccupied,
        Error::ScheduleInfeasible { .. } => TbStatus::ScheduleInfeasible,
        Error::ResourceLimit(_) => TbStatus::ResourceLimit,
        Error::UnsupportedInstance { .. } => TbStatus::UnsupportedInstance,
        Error::OrderNotFound(_) => TbStatus::OrderNotFound,
        Error::Parse { .. } => TbStatus::Parse,
    }
}

enum Fail {
    Core(Error),
    Status(TbStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(TbStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TbStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            TbStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    // SAFETY: caller passes a handle from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: checked non-null; caller provides writable storage.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: p came from Box::into_raw in this library.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to fit, into `buf`. Returns the full message length in bytes
/// excluding the terminator. `buf` may be null when `len` is 0.
///
/// # Safety
/// `buf` must be valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn tb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: n < len and buf is valid for len bytes.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Photon in bin `bin` of an `n_bins` frame, H polarization.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_state_basis(n_bins: usize, bin: usize, out: *mut *mut TbState) -> TbStatus {
    guard(|| {
        let frame = Frame::with_bins(n_bins)?;
        unsafe { store(out, TbState(basis_state_in(frame, bin)?)) }
    })
}

/// Equal amplitudes on every bin of an `n_bins` frame, H polarization.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_state_uniform(n_bins: usize, out: *mut *mut TbState) -> TbStatus {
    guard(|| {
        let frame = Frame::with_bins(n_bins)?;
        unsafe { store(out, TbState(uniform_state_in(frame, Polarization::H)?)) }
    })
}

/// # Safety
/// `state` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_state_free(state: *mut TbState) {
    unsafe { free(state) }
}

/// Number of bins, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tb_state_n_bins(state: *const TbState) -> usize {
    unsafe { state.as_ref() }.map_or(0, |s| s.0.n_bins())
}

/// Total photon probability; below 1 after loss.
///
/// # Safety
/// `state` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tb_state_norm_sqr(state: *const TbState, out: *mut f64) -> TbStatus {
    guard(|| {
        let s = unsafe { deref(state, "state") }?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("output pointer"))?;
        *out = s.0.norm_sqr();
        Ok(())
    })
}

/// Writes the per-bin probability (both rails) into `out[0..n_bins]`.
///
/// # Safety
/// `state` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tb_state_probabilities(state: *const TbState, out: *mut f64, len: usize) -> TbStatus {
    guard(|| {
        let s = unsafe { deref(state, "state") }?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let p = probabilities(&s.0);
        if len < p.len() {
            return Err(Fail::Status(
                TbStatus::BufferTooSmall,
                format!("need {} entries, buffer holds {len}", p.len()),
            ));
        }
        // SAFETY: out is valid for len >= p.len() writes.
        unsafe { ptr::copy_nonoverlapping(p.as_ptr(), out, p.len()) };
        Ok(())
    })
}

/// Parses the circuit text format from a NUL-terminated UTF-8 string.
///
/// # Safety
/// `text` must be a valid C string and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_circuit_parse(text: *const c_char, out: *mut *mut TbCircuit) -> TbStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("circuit text"));
        }
        let text = unsafe { CStr::from_ptr(text) }
            .to_str()
            .map_err(|_| Fail::Status(TbStatus::InvalidArgument, "circuit text is not UTF-8".into()))?;
        unsafe { store(out, TbCircuit(parse_circuit(text)?)) }
    })
}

/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tb_circuit_n_qubits(circuit: *const TbCircuit) -> usize {
    unsafe { circuit.as_ref() }.map_or(0, |c| c.0.n_qubits())
}

/// # Safety
/// `circuit` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_circuit_free(circuit: *mut TbCircuit) {
    unsafe { free(circuit) }
}

/// Compiles onto a frame of `n_bins` bins (0 for the register size),
/// charging the default insertion-loss table when `lossy` is set.
///
/// # Safety
/// `circuit` must be a live handle and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_compile(
    circuit: *const TbCircuit,
    n_bins: usize,
    lossy: bool,
    out: *mut *mut TbSchedule,
) -> TbStatus {
    guard(|| {
        let c = unsafe { deref(circuit, "circuit") }?;
        let n = if n_bins == 0 { c.0.layout().n_bins() } else { n_bins };
        let opts = CompileOptions {
            loss: if lossy { LossTable::default() } else { LossTable::lossless() },
            merge_phases: true,
        };
        let s = compile_with(&c.0, Frame::with_bins(n)?, &opts)?;
        unsafe { store(out, TbSchedule(s)) }
    })
}

/// Number of primitives, or 0 for a null handle.
///
/// # Safety
/// `schedule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tb_schedule_len(schedule: *const TbSchedule) -> usize {
    unsafe { schedule.as_ref() }.map_or(0, |s| s.0.len())
}

/// # Safety
/// `schedule` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn tb_schedule_free(schedule: *mut TbSchedule) {
    unsafe { free(schedule) }
}

/// Runs a schedule on a copy of `state`; the input is left untouched.
///
/// # Safety
/// Handles must be live and `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn tb_run(
    schedule: *const TbSchedule,
    state: *const TbState,
    loss_on: bool,
    out: *mut *mut TbState,
) -> TbStatus {
    guard(|| {
        let sched = unsafe { deref(schedule, "schedule") }?;
        let s = unsafe { deref(state, "state") }?;
        let result = run_schedule(&sched.0, &s.0, loss_on)?;
        unsafe { store(out, TbState(result)) }
    })
}

/// Normalized argument marginal of the built-in N = 15, a = 2 run, written
/// to `out[0..8]` in natural `y` order.
///
/// # Safety
/// `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tb_shor15_marginal(
    wave_packet: bool,
    loss_on: bool,
    compiled_qft: bool,
    out: *mut f64,
    len: usize,
) -> TbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let opts = ShorOptions {
            qft: if compiled_qft { QftMode::Compiled } else { QftMode::Classical },
            amplitudes: if wave_packet { Amplitudes::wave_packet() } else { Amplitudes::Uniform },
            loss: loss_on.then(LossTable::default),
            ..ShorOptions::default()
        };
        let m = run_shor(&ShorConfig::fifteen_base_two(), &opts)?.marginal;
        if len < m.len() {
            return Err(Fail::Status(
                TbStatus::BufferTooSmall,
                format!("need {} entries, buffer holds {len}", m.len()),
            ));
        }
        // SAFETY: out is valid for len >= m.len() writes.
        unsafe { ptr::copy_nonoverlapping(m.as_ptr(), out, m.len()) };
        Ok(())
    })
}

/// Order from measured samples, plus the factor pair when the gcd step
/// succeeds (`p = q = 0` otherwise).
///
/// # Safety
/// `samples` must be valid for `n_samples` reads; outputs valid for one
/// write each.
#[no_mangle]
pub unsafe extern "C" fn tb_extract_order(
    samples: *const u64,
    n_samples: usize,
    n_arg: usize,
    base: u64,
    modulus: u64,
    order: *mut u64,
    p: *mut u64,
    q: *mut u64,
) -> TbStatus {
    guard(|| {
        if samples.is_null() && n_samples > 0 {
            return Err(null("samples"));
        }
        if order.is_null() || p.is_null() || q.is_null() {
            return Err(null("output pointer"));
        }
        let ys = if n_samples == 0 {
            &[][..]
        } else {
            // SAFETY: samples is valid for n_samples reads.
            unsafe { std::slice::from_raw_parts(samples, n_samples) }
        };
        let r = extract_order(ys, n_arg, base, modulus)?;
        let (fp, fq) = match r.factoring {
            Factoring::Found { p, q } => (p, q),
            _ => (0, 0),
        };
        // SAFETY: outputs checked non-null.
        unsafe {
            *order = r.order;
            *p = fp;
            *q = fq;
        }
        Ok(())
    })
}
