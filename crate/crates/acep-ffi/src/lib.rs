//! C ABI for the acep toolkit.
//!
//! Subgroups are held behind opaque handles created from the JSON spec
//! format (`{"alphabet": [...], "generators": [...]}`). Reports come back
//! as JSON strings owned by the library; free them with
//! `acep_string_free`. Every fallible call stores a message retrievable
//! through `acep_last_error`, valid on the calling thread until the next
//! failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use acep::analysis::{analyze, AnalyzeOptions};
use acep::fiber::{classify, CaseLabel};
use acep::graph::{build_stallings, StallingsGraph, SubgroupSpec};
use acep::word::Alphabet;

/// Status codes reported alongside failures.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AcepStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Panic = 4,
}

/// Opaque handle to a parsed subgroup: the alphabet and its folded graph.
pub struct AcepSubgroup {
    alphabet: Alphabet,
    graph: StallingsGraph,
    spec: SubgroupSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<(AcepStatus, CString)> =
        RefCell::new((AcepStatus::Ok, CString::default()));
}

fn set_error_with(status: AcepStatus, message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = (status, CString::new(sanitized).unwrap_or_default());
    });
}

fn set_error(message: &str) {
    set_error_with(AcepStatus::InvalidInput, message);
}

/// Message of the most recent failure on this thread; empty when none.
/// The pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn acep_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().1.as_ptr())
}

/// Status code of the most recent failure on this thread.
#[no_mangle]
pub extern "C" fn acep_last_status() -> AcepStatus {
    LAST_ERROR.with(|slot| slot.borrow().0)
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn acep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, AcepStatus> {
    if ptr.is_null() {
        set_error_with(AcepStatus::NullArgument, "null argument");
        return Err(AcepStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error_with(AcepStatus::InvalidUtf8, "argument is not valid UTF-8");
        AcepStatus::InvalidUtf8
    })
}

fn guarded<T>(fallback: T, body: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(value) => value,
        Err(_) => {
            set_error_with(AcepStatus::Panic, "internal panic");
            fallback
        }
    }
}

/// Parses a subgroup spec (JSON) and folds its Stallings graph. Returns
/// null on error; see `acep_last_error`.
///
/// # Safety
///
/// `spec_json` must be a valid NUL-terminated C string or null.
#[no_mangle]
pub unsafe extern "C" fn acep_subgroup_new(spec_json: *const c_char) -> *mut AcepSubgroup {
    guarded(ptr::null_mut(), || {
        let text = match cstr_arg(spec_json) {
            Ok(text) => text,
            Err(_) => return ptr::null_mut(),
        };
        let spec = match SubgroupSpec::from_json(text) {
            Ok(spec) => spec,
            Err(err) => {
                set_error(&err.to_string());
                return ptr::null_mut();
            }
        };
        let (alphabet, generators) = match spec.parse() {
            Ok(parsed) => parsed,
            Err(err) => {
                set_error(&err.to_string());
                return ptr::null_mut();
            }
        };
        let graph = build_stallings(alphabet.rank(), &generators);
        Box::into_raw(Box::new(AcepSubgroup { alphabet, graph, spec }))
    })
}

/// Frees a handle returned by `acep_subgroup_new`. Null is ignored.
///
/// # Safety
///
/// `handle` must be null or a pointer previously returned by
/// `acep_subgroup_new` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn acep_subgroup_free(handle: *mut AcepSubgroup) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of vertices of the folded graph; -1 on null.
///
/// # Safety
///
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acep_subgroup_vertices(handle: *const AcepSubgroup) -> i64 {
    match handle.as_ref() {
        Some(h) => h.graph.vertex_count() as i64,
        None => -1,
    }
}

/// Number of edges of the folded graph; -1 on null.
///
/// # Safety
///
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acep_subgroup_edges(handle: *const AcepSubgroup) -> i64 {
    match handle.as_ref() {
        Some(h) => h.graph.edge_count() as i64,
        None => -1,
    }
}

/// Rank of the subgroup; -1 on null.
///
/// # Safety
///
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acep_subgroup_rank(handle: *const AcepSubgroup) -> i64 {
    match handle.as_ref() {
        Some(h) => h.graph.subgroup_rank() as i64,
        None => -1,
    }
}

/// Membership of a word (text syntax: lowercase letters, uppercase
/// inverses). Returns 1 or 0, and -1 on error.
///
/// # Safety
///
/// `handle` must be null or a live handle; `word` a C string or null.
#[no_mangle]
pub unsafe extern "C" fn acep_subgroup_member(
    handle: *const AcepSubgroup,
    word: *const c_char,
) -> i32 {
    guarded(-1, || {
        let Some(h) = (unsafe { handle.as_ref() }) else {
            set_error_with(AcepStatus::NullArgument, "null argument");
            return -1;
        };
        let text = match unsafe { cstr_arg(word) } {
            Ok(text) => text,
            Err(_) => return -1,
        };
        match h.alphabet.parse_word(text) {
            Ok(parsed) => i32::from(h.graph.member(&parsed)),
            Err(err) => {
                set_error(&err.to_string());
                -1
            }
        }
    })
}

/// The four-case classification: 1 malnormal, 2 large intersection,
/// 3 non-power cyclic intersection, 4 cyclonormal with power
/// intersections. Returns 0 on error.
///
/// # Safety
///
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acep_classify_case(handle: *const AcepSubgroup) -> i32 {
    guarded(0, || {
        let Some(h) = (unsafe { handle.as_ref() }) else {
            set_error_with(AcepStatus::NullArgument, "null argument");
            return 0;
        };
        match classify(&h.graph).case {
            CaseLabel::Case1 => 1,
            CaseLabel::Case2 => 2,
            CaseLabel::Case3 => 3,
            CaseLabel::Case4 => 4,
        }
    })
}

/// Runs the full analysis pipeline and returns the JSON report as a
/// library-owned string; free with `acep_string_free`. `s_bound` of 0
/// selects the default bound. Null on error.
///
/// # Safety
///
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn acep_analyze_json(
    handle: *const AcepSubgroup,
    s_bound: usize,
    skip_metric: bool,
) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let Some(h) = (unsafe { handle.as_ref() }) else {
            set_error_with(AcepStatus::NullArgument, "null argument");
            return ptr::null_mut();
        };
        let opts = AnalyzeOptions {
            s_bound: if s_bound == 0 { None } else { Some(s_bound) },
            skip_metric,
        };
        match analyze(&h.spec, opts) {
            Ok(analysis) => match serde_json::to_string_pretty(&analysis.report) {
                Ok(json) => match CString::new(json) {
                    Ok(owned) => owned.into_raw(),
                    Err(_) => {
                        set_error("report contained an interior NUL");
                        ptr::null_mut()
                    }
                },
                Err(err) => {
                    set_error(&err.to_string());
                    ptr::null_mut()
                }
            },
            Err(err) => {
                set_error(&err.to_string());
                ptr::null_mut()
            }
        }
    })
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
///
/// `text` must be null or a pointer returned by an acep function that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn acep_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
