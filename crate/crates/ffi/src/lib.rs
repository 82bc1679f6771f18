//! C interface.
//!
//! Compiled protocols are handed out as opaque `QedpecProtocol` handles that
//! the caller releases with `qedpec_protocol_free`. Every fallible function
//! returns a `QedpecStatus`; on failure the message is kept per thread and
//! can be copied out with `qedpec_last_error`. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qedpec::analytics::{perturbative_bound_b1, pure_pec_cost, toy_b_single_shot, total_cost_qedpec, zeno_separation, CycleCost};
use qedpec::compiler::{CompiledBlock, Normalization};
use qedpec::noise::NoiseSpec;
use qedpec::sampler::{run, ExecutionPlan, ProtocolSpec, RunOptions, SamplingMode, SyndromeModel};
use qedpec::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QedpecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Validity = 4,
    SizeLimit = 5,
    NoData = 6,
    BufferTooSmall = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QedpecModel {
    Ideal = 0,
    ReadoutFlip = 1,
    CatExtraction = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QedpecNormalization {
    Rescaled = 0,
    Series = 1,
}

/// Protocol description; start from `qedpec_options_default`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QedpecOptions {
    pub n: u32,
    pub t: u32,
    pub order: u32,
    pub p1: f64,
    pub p2: f64,
    pub normalization: QedpecNormalization,
    pub max_block_weight: f64,
    pub model: QedpecModel,
    pub p_m: f64,
    pub m_ancilla: u32,
    /// 0 disables the tables (detection only).
    pub pec: c_int,
    pub r_max: f64,
    pub drift_seed: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QedpecCost {
    pub total: f64,
    pub postselect: f64,
    pub gamma2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QedpecRunResult {
    pub estimate: f64,
    pub stderr: f64,
    pub p_accept: f64,
    pub p_accept_stderr: f64,
    pub gamma_total: f64,
    pub cost_observed: f64,
    pub n_attempted: u64,
    pub n_accepted: u64,
}

/// Opaque compiled protocol.
pub struct QedpecProtocol {
    plan: ExecutionPlan,
    blocks: Vec<CompiledBlock>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> QedpecStatus {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Config(_) | Error::Parse(_) => {
            QedpecStatus::InvalidArgument
        }
        Error::OutOfRange(_) => QedpecStatus::OutOfRange,
        Error::Validity { .. } => QedpecStatus::Validity,
        Error::SizeLimit(_) => QedpecStatus::SizeLimit,
        Error::NoData => QedpecStatus::NoData,
        _ => QedpecStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (QedpecStatus, String)>) -> QedpecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QedpecStatus::Ok
        }
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {m}"));
            QedpecStatus::Panic
        }
    }
}

fn lib(e: Error) -> (QedpecStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QedpecStatus, String) {
    (QedpecStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (QedpecStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), (QedpecStatus, String)> {
    match p.as_mut() {
        Some(slot) => {
            *slot = v;
            Ok(())
        }
        None => Err(null(what)),
    }
}

fn block_of(p: &QedpecProtocol, block: usize) -> Result<&CompiledBlock, (QedpecStatus, String)> {
    p.blocks.get(block).ok_or_else(|| {
        (
            QedpecStatus::OutOfRange,
            format!("block {block} out of range ({} blocks)", p.blocks.len()),
        )
    })
}

/// Standard settings: `p1 = 1e-4`, `p2 = 1e-3`, `K = 1`, ideal rounds.
#[no_mangle]
pub extern "C" fn qedpec_options_default(n: u32, t: u32) -> QedpecOptions {
    QedpecOptions {
        n,
        t,
        order: 1,
        p1: 1e-4,
        p2: 1e-3,
        normalization: QedpecNormalization::Rescaled,
        max_block_weight: 0.5,
        model: QedpecModel::Ideal,
        p_m: 0.0,
        m_ancilla: 1,
        pec: 1,
        r_max: 0.0,
        drift_seed: 0,
    }
}

fn to_spec(o: &QedpecOptions) -> Result<ProtocolSpec, (QedpecStatus, String)> {
    let mut spec = ProtocolSpec::ideal(o.n as usize, o.t as usize);
    spec.noise = NoiseSpec::new(o.p1, o.p2).map_err(lib)?;
    spec.compile.order = o.order as usize;
    spec.compile.normalization = match o.normalization {
        QedpecNormalization::Rescaled => Normalization::Rescaled,
        QedpecNormalization::Series => Normalization::Series,
    };
    spec.compile.max_block_weight = o.max_block_weight;
    spec.model = match o.model {
        QedpecModel::Ideal => SyndromeModel::Ideal,
        QedpecModel::ReadoutFlip => SyndromeModel::ReadoutFlip { p_m: o.p_m },
        QedpecModel::CatExtraction => SyndromeModel::CatExtraction {
            m_ancilla: o.m_ancilla as usize,
        },
    };
    spec.pec = o.pec != 0;
    spec.r_max = o.r_max;
    spec.drift_seed = o.drift_seed;
    Ok(spec)
}

/// Builds the benchmark circuit and compiles one table per block.
///
/// # Safety
/// `options` must point to a valid `QedpecOptions`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_compile(options: *const QedpecOptions, out: *mut *mut QedpecProtocol) -> QedpecStatus {
    guard(|| {
        let o = deref(options, "options")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let spec = to_spec(o)?;
        let (plan, blocks) = ExecutionPlan::for_protocol(&spec).map_err(lib)?;
        *out = Box::into_raw(Box::new(QedpecProtocol { plan, blocks }));
        Ok(())
    })
}

/// Releases a handle from `qedpec_compile`; null is ignored.
///
/// # Safety
/// `p` must come from `qedpec_compile` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qedpec_protocol_free(p: *mut QedpecProtocol) {
    if !p.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(p))));
    }
}

/// # Safety
/// `p` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_num_blocks(p: *const QedpecProtocol, out: *mut usize) -> QedpecStatus {
    guard(|| {
        let p = deref(p, "protocol")?;
        write(out, p.blocks.len(), "out")
    })
}

/// # Safety
/// `p` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_block_gamma(p: *const QedpecProtocol, block: usize, out: *mut f64) -> QedpecStatus {
    guard(|| {
        let b = block_of(deref(p, "protocol")?, block)?;
        write(out, b.table.gamma, "out")
    })
}

/// Order-K acceptance probability of one block.
///
/// # Safety
/// `p` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_block_p_success(p: *const QedpecProtocol, block: usize, out: *mut f64) -> QedpecStatus {
    guard(|| {
        let b = block_of(deref(p, "protocol")?, block)?;
        write(out, b.table.p_success, "out")
    })
}

/// # Safety
/// `p` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_block_num_entries(p: *const QedpecProtocol, block: usize, out: *mut usize) -> QedpecStatus {
    guard(|| {
        let b = block_of(deref(p, "protocol")?, block)?;
        write(out, b.table.entries.len(), "out")
    })
}

/// Copies entry `index` of a block table: its Pauli as a NUL-terminated
/// `IXYZ` string (needs `n + 1` bytes), probability and sign.
///
/// # Safety
/// `p` must be a live handle; `pauli` must hold `pauli_len` bytes; `prob`
/// and `sign` writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_block_entry(
    p: *const QedpecProtocol,
    block: usize,
    index: usize,
    pauli: *mut c_char,
    pauli_len: usize,
    prob: *mut f64,
    sign: *mut i8,
) -> QedpecStatus {
    guard(|| {
        let b = block_of(deref(p, "protocol")?, block)?;
        let e = b.table.entries.get(index).ok_or_else(|| {
            (
                QedpecStatus::OutOfRange,
                format!("entry {index} out of range ({} entries)", b.table.entries.len()),
            )
        })?;
        if pauli.is_null() {
            return Err(null("pauli"));
        }
        let text = e.pauli.to_string();
        if pauli_len < text.len() + 1 {
            return Err((
                QedpecStatus::BufferTooSmall,
                format!("need {} bytes, got {pauli_len}", text.len() + 1),
            ));
        }
        std::ptr::copy_nonoverlapping(text.as_ptr() as *const c_char, pauli, text.len());
        *pauli.add(text.len()) = 0;
        write(prob, e.prob, "prob")?;
        write(sign, e.sign, "sign")
    })
}

/// `prod_k gamma_k^2 / p_k` over the compiled tables.
///
/// # Safety
/// `p` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_total_cost(p: *const QedpecProtocol, out: *mut QedpecCost) -> QedpecStatus {
    guard(|| {
        let p = deref(p, "protocol")?;
        let cycles: Vec<CycleCost> = p.blocks.iter().map(|b| CycleCost::from(&b.table)).collect();
        let c = total_cost_qedpec(&cycles).map_err(lib)?;
        write(
            out,
            QedpecCost {
                total: c.total,
                postselect: c.postselect,
                gamma2: c.gamma2,
            },
            "out",
        )
    })
}

/// Monte Carlo estimate of the mitigated GHZ fidelity.
///
/// # Safety
/// `p` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_run(p: *const QedpecProtocol, shots: u64, seed: u64, out: *mut QedpecRunResult) -> QedpecStatus {
    guard(|| {
        let p = deref(p, "protocol")?;
        let opts = RunOptions {
            mode: SamplingMode::Auto,
            shots,
            seed,
            ..RunOptions::default()
        };
        let r = run(&p.plan, &opts).map_err(lib)?;
        write(
            out,
            QedpecRunResult {
                estimate: r.estimate,
                stderr: r.stderr,
                p_accept: r.p_accept,
                p_accept_stderr: r.p_accept_stderr,
                gamma_total: r.gamma_total,
                cost_observed: r.cost_observed,
                n_attempted: r.n_attempted,
                n_accepted: r.n_accepted,
            },
            "out",
        )
    })
}

/// Unencoded PEC cost of the benchmark on `n - 2` qubits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_pure_pec_cost(n: u32, p1: f64, p2: f64, out: *mut f64) -> QedpecStatus {
    guard(|| {
        let spec = NoiseSpec::new(p1, p2).map_err(lib)?;
        write(out, pure_pec_cost(n as usize, &spec).map_err(lib)?, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qedpec_perturbative_bound_b1(n: u32, t: u32, p1: f64, p2: f64, out: *mut f64) -> QedpecStatus {
    guard(|| {
        let spec = NoiseSpec::new(p1, p2).map_err(lib)?;
        write(out, perturbative_bound_b1(n as usize, t as usize, &spec).map_err(lib)?, "out")
    })
}

#[no_mangle]
pub extern "C" fn qedpec_toy_b_single_shot(gamma_t: f64) -> f64 {
    toy_b_single_shot(gamma_t)
}

#[no_mangle]
pub extern "C" fn qedpec_zeno_separation(levels: f64, gamma_t: f64) -> f64 {
    zeno_separation(levels, gamma_t)
}

/// Copies the calling thread's last error message (NUL-terminated,
/// truncated to fit). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must hold `len` bytes, or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn qedpec_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = e.len().min(len - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, k);
            *buf.add(k) = 0;
        }
        e.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qedpec_status_str(s: QedpecStatus) -> *const c_char {
    let t: &'static [u8] = match s {
        QedpecStatus::Ok => b"ok\0",
        QedpecStatus::NullPointer => b"null pointer\0",
        QedpecStatus::InvalidArgument => b"invalid argument\0",
        QedpecStatus::OutOfRange => b"out of range\0",
        QedpecStatus::Validity => b"block weight above the validity limit\0",
        QedpecStatus::SizeLimit => b"size limit exceeded\0",
        QedpecStatus::NoData => b"no accepted shots\0",
        QedpecStatus::BufferTooSmall => b"buffer too small\0",
        QedpecStatus::Internal => b"internal error\0",
        QedpecStatus::Panic => b"internal panic\0",
    };
    t.as_ptr() as *const c_char
}
