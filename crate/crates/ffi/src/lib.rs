//! C ABI over `stratalloc`.
//!
//! Problems live behind an opaque [`StratProblem`] handle created by
//! [`strat_problem_new`] and released with [`strat_problem_free`]. Every
//! fallible call returns a [`StratStatus`]; on failure the message is kept
//! per thread and can be read with [`strat_last_error_message`]. Infinite
//! regret is reported as IEEE positive infinity. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use stratalloc::allocate::Scheme;
use stratalloc::regret::{expected_regret, worst_case};
use stratalloc::simulate::{monte_carlo_regret, SimConfig};
use stratalloc::stats::threshold_constants;
use stratalloc::{Allocation, DesignProblem, Error, GroupSpec, Paradigm, TruthScenario};

/// Opaque design problem.
pub struct StratProblem {
    inner: DesignProblem,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    Domain = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratScheme {
    Minimax = 0,
    Proportional = 1,
    Egalitarian = 2,
    Neyman = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratParadigm {
    Separate = 0,
    Joint = 1,
    Egalitarian = 2,
}

impl From<StratScheme> for Scheme {
    fn from(s: StratScheme) -> Self {
        match s {
            StratScheme::Minimax => Scheme::Minimax,
            StratScheme::Proportional => Scheme::Proportional,
            StratScheme::Egalitarian => Scheme::Egalitarian,
            StratScheme::Neyman => Scheme::Neyman,
        }
    }
}

impl From<StratParadigm> for Paradigm {
    fn from(p: StratParadigm) -> Self {
        match p {
            StratParadigm::Separate => Paradigm::SeparateUtilitarian,
            StratParadigm::Joint => Paradigm::JointUtilitarian,
            StratParadigm::Egalitarian => Paradigm::SeparateEgalitarian,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure {
    status: StratStatus,
    message: String,
}

impl Failure {
    fn new(status: StratStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::LengthMismatch { .. } => StratStatus::LengthMismatch,
            Error::Domain(_) => StratStatus::Domain,
            _ => StratStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> StratStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            StratStatus::Ok
        }
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(_) => {
            set_last_error("internal panic");
            StratStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::new(
            StratStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    // SAFETY: the caller promises `len` readable elements at `ptr`.
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

unsafe fn problem_ref<'a>(p: *const StratProblem) -> Result<&'a DesignProblem, Failure> {
    // SAFETY: a non-null handle came from `strat_problem_new`.
    unsafe { p.as_ref() }
        .map(|p| &p.inner)
        .ok_or_else(|| Failure::new(StratStatus::NullPointer, "problem handle is null"))
}

fn out_ref<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: a non-null output pointer is writable by contract.
    unsafe { ptr.as_mut() }
        .ok_or_else(|| Failure::new(StratStatus::NullPointer, format!("{what} is null")))
}

unsafe fn allocation(
    problem: &DesignProblem,
    counts: *const u64,
    len: usize,
) -> Result<Allocation, Failure> {
    let c = unsafe { slice(counts, len, "counts") }?;
    if c.len() != problem.num_groups() {
        return Err(Error::LengthMismatch {
            what: "counts",
            got: c.len(),
            expected: problem.num_groups(),
        }
        .into());
    }
    Ok(Allocation::new(c.to_vec()))
}

/// `tau` has one entry per group; a null `baseline` means zeros. Variances
/// are the problem's design variances.
unsafe fn truth(
    problem: &DesignProblem,
    tau: *const f64,
    baseline: *const f64,
) -> Result<TruthScenario, Failure> {
    let g = problem.num_groups();
    let tau = unsafe { slice(tau, g, "tau") }?.to_vec();
    let mut t = TruthScenario::from_problem(problem, tau)?;
    if !baseline.is_null() {
        t.baseline = unsafe { slice(baseline, g, "baseline") }?.to_vec();
        t.validate(g)?;
    }
    Ok(t)
}

/// Creates a problem with `num_groups` groups. Weights must sum to one and
/// variances must be positive.
///
/// # Safety
/// The three arrays hold `num_groups` readable doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn strat_problem_new(
    budget: u64,
    num_groups: usize,
    weights: *const f64,
    var_control: *const f64,
    var_treated: *const f64,
    out: *mut *mut StratProblem,
) -> StratStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let w = unsafe { slice(weights, num_groups, "weights") }?;
        let v0 = unsafe { slice(var_control, num_groups, "var_control") }?;
        let v1 = unsafe { slice(var_treated, num_groups, "var_treated") }?;
        let groups = (0..num_groups)
            .map(|g| GroupSpec::new(format!("group {}", g + 1), w[g], v0[g], v1[g]))
            .collect();
        let inner = DesignProblem::new(budget, groups)?;
        *out = Box::into_raw(Box::new(StratProblem { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `problem` is null or came from [`strat_problem_new`] and is not used again.
#[no_mangle]
pub unsafe extern "C" fn strat_problem_free(problem: *mut StratProblem) {
    if !problem.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// # Safety
/// `problem` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn strat_problem_num_groups(
    problem: *const StratProblem,
    out: *mut usize,
) -> StratStatus {
    guard(|| {
        *out_ref(out, "out")? = unsafe { problem_ref(problem) }?.num_groups();
        Ok(())
    })
}

/// Writes the scheme's even per-group counts into `counts_out`.
///
/// # Safety
/// `problem` is a live handle; `counts_out` holds `len` writable slots.
#[no_mangle]
pub unsafe extern "C" fn strat_allocate(
    problem: *const StratProblem,
    scheme: StratScheme,
    counts_out: *mut u64,
    len: usize,
) -> StratStatus {
    guard(|| {
        let p = unsafe { problem_ref(problem) }?;
        if len < p.num_groups() {
            return Err(Failure::new(
                StratStatus::BufferTooSmall,
                format!("need {} slots, got {len}", p.num_groups()),
            ));
        }
        if counts_out.is_null() {
            return Err(Failure::new(StratStatus::NullPointer, "counts_out is null"));
        }
        let alloc = Scheme::from(scheme).allocate(p)?;
        // SAFETY: checked non-null with at least `num_groups` slots.
        let out = unsafe { std::slice::from_raw_parts_mut(counts_out, p.num_groups()) };
        out.copy_from_slice(&alloc.counts);
        Ok(())
    })
}

/// Worst-case expected regret of an allocation; infinity when unbounded.
///
/// # Safety
/// `problem` is a live handle; `counts` holds `len` values; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn strat_worst_case(
    problem: *const StratProblem,
    counts: *const u64,
    len: usize,
    paradigm: StratParadigm,
    out: *mut f64,
) -> StratStatus {
    guard(|| {
        let p = unsafe { problem_ref(problem) }?;
        let a = unsafe { allocation(p, counts, len) }?;
        *out_ref(out, "out")? = worst_case(p, &a, paradigm.into())?.value.as_f64();
        Ok(())
    })
}

/// Expected regret when the effects are `tau` (one per group).
///
/// # Safety
/// As [`strat_worst_case`]; `tau` holds one double per group and
/// `baseline` is null or holds one double per group.
#[no_mangle]
pub unsafe extern "C" fn strat_expected_regret(
    problem: *const StratProblem,
    counts: *const u64,
    len: usize,
    tau: *const f64,
    baseline: *const f64,
    paradigm: StratParadigm,
    out: *mut f64,
) -> StratStatus {
    guard(|| {
        let p = unsafe { problem_ref(problem) }?;
        let a = unsafe { allocation(p, counts, len) }?;
        let t = unsafe { truth(p, tau, baseline) }?;
        *out_ref(out, "out")? = expected_regret(p, &a, &t, paradigm.into())?.value.as_f64();
        Ok(())
    })
}

/// Simulated expected regret: mean and standard error over `replications`
/// trials seeded from `seed`. Results do not depend on thread count.
///
/// # Safety
/// As [`strat_expected_regret`]; `mean_out` and `se_out` are writable.
#[no_mangle]
pub unsafe extern "C" fn strat_monte_carlo(
    problem: *const StratProblem,
    counts: *const u64,
    len: usize,
    tau: *const f64,
    baseline: *const f64,
    paradigm: StratParadigm,
    replications: u64,
    seed: u64,
    mean_out: *mut f64,
    se_out: *mut f64,
) -> StratStatus {
    guard(|| {
        let p = unsafe { problem_ref(problem) }?;
        let a = unsafe { allocation(p, counts, len) }?;
        let t = unsafe { truth(p, tau, baseline) }?;
        let mean_out = out_ref(mean_out, "mean_out")?;
        let se_out = out_ref(se_out, "se_out")?;
        let est = monte_carlo_regret(
            p,
            &a,
            &t,
            paradigm.into(),
            &SimConfig::new(replications, seed),
        )?;
        *mean_out = est.mean;
        *se_out = est.std_error;
        Ok(())
    })
}

/// The regret-maximizing threshold `t*` and the constant `C0 = t* sf(t*)`.
///
/// # Safety
/// Both pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn strat_threshold_constants(
    t_star_out: *mut f64,
    c0_out: *mut f64,
) -> StratStatus {
    guard(|| {
        let t = out_ref(t_star_out, "t_star_out")?;
        let c = out_ref(c0_out, "c0_out")?;
        let k = threshold_constants();
        *t = k.t_star;
        *c = k.c0;
        Ok(())
    })
}

/// Copies the calling thread's last error message (empty after a success)
/// into `buf`, truncating to `cap - 1` bytes plus a NUL. Returns the size
/// needed for the whole message including the NUL.
///
/// # Safety
/// `buf` is null (with `cap` 0) or holds `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn strat_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = (bytes.len() - 1).min(cap - 1);
            // SAFETY: `buf` has `cap` bytes and `n < cap`.
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn strat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
