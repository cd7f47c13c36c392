//! C ABI over piclang.
//!
//! Objects cross the boundary as opaque handles owned by the caller and released
//! with the matching `*_free`. Every fallible call returns a [`PiclangStatus`];
//! on failure `piclang_last_error` describes the error of the calling thread.
//! Strings returned by the library are released with `piclang_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use piclang::automaton::CellularAutomaton;
use piclang::compilers::{automaton_to_sentence, sentence_to_tiling, tiling_to_sentence};
use piclang::logic::{parse_sentence, render_pretty, EsoSentence, Signature};
use piclang::model_check::{check_eso, mirror_member, sym_member};
use piclang::picture::{encode, EncodingKind, Picture};
use piclang::sorted::build_perm_tree;
use piclang::tiling::{recognizes, TilingSystem};
use piclang::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiclangStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed picture, tiling, automaton or sentence text.
    Parse = 3,
    /// Arguments of the wrong shape, e.g. a 1-picture given to a 2-D system.
    Contract = 4,
    Cap = 5,
    /// Input outside the fragment an operation supports.
    Fragment = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiclangEncoding {
    Pixel = 0,
    Coordinate = 1,
}

pub struct PiclangPicture(Picture);
pub struct PiclangTiling(TilingSystem);
pub struct PiclangAutomaton(CellularAutomaton);
pub struct PiclangSentence(EsoSentence);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PiclangStatus {
    match e {
        Error::Picture(_)
        | Error::ReservedSymbol(_)
        | Error::Tiling(_)
        | Error::Automaton(_)
        | Error::Syntax { .. }
        | Error::Sentence(_)
        | Error::Format(_) => PiclangStatus::Parse,
        Error::NotInAlphabet(_) | Error::OutOfRange(_) | Error::Contract(_) | Error::Eval(_) => PiclangStatus::Contract,
        Error::Cap(_) => PiclangStatus::Cap,
        Error::Fragment(_) => PiclangStatus::Fragment,
    }
}

struct Fail(PiclangStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording its error or panic.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PiclangStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PiclangStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            set_error(format!("panic: {}", msg.unwrap_or_default()));
            PiclangStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PiclangStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(PiclangStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_bool(out: *mut bool, v: bool) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = v;
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s).map_err(|_| Fail(PiclangStatus::Contract, "string with NUL".into()))?.into_raw();
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn piclang_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn piclang_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses the text format `"d n\nalphabet\nrows"`.
///
/// # Safety
/// `text` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_picture_parse(text: *const c_char, out: *mut *mut PiclangPicture) -> PiclangStatus {
    guard(|| put(out, PiclangPicture(Picture::parse(self::text(text, "text")?)?)))
}

/// # Safety
/// `p` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn piclang_picture_free(p: *mut PiclangPicture) {
    free(p)
}

/// # Safety
/// `text` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_tiling_from_json(text: *const c_char, out: *mut *mut PiclangTiling) -> PiclangStatus {
    guard(|| put(out, PiclangTiling(TilingSystem::from_json(self::text(text, "text")?)?)))
}

/// # Safety
/// `t` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_tiling_to_json(t: *const PiclangTiling, out: *mut *mut c_char) -> PiclangStatus {
    guard(|| put_string(out, handle(t, "tiling")?.0.to_json()))
}

/// # Safety
/// `t` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn piclang_tiling_free(t: *mut PiclangTiling) {
    free(t)
}

/// # Safety
/// Handles are live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_tiling_recognizes(
    t: *const PiclangTiling,
    p: *const PiclangPicture,
    out: *mut bool,
) -> PiclangStatus {
    guard(|| put_bool(out, recognizes(&handle(t, "tiling")?.0, &handle(p, "picture")?.0)?))
}

/// # Safety
/// `text` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_automaton_from_json(
    text: *const c_char,
    out: *mut *mut PiclangAutomaton,
) -> PiclangStatus {
    guard(|| put(out, PiclangAutomaton(CellularAutomaton::from_json(self::text(text, "text")?)?)))
}

/// # Safety
/// `a` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn piclang_automaton_free(a: *mut PiclangAutomaton) {
    free(a)
}

/// Acceptance in time c·n + c′; c = 1, c′ = 1 is real time.
///
/// # Safety
/// Handles are live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_automaton_accepts(
    a: *const PiclangAutomaton,
    p: *const PiclangPicture,
    c: usize,
    c_prime: i64,
    out: *mut bool,
) -> PiclangStatus {
    guard(|| put_bool(out, handle(a, "automaton")?.0.accepts_linear(&handle(p, "picture")?.0, c, c_prime)?))
}

/// Parses a sentence over the signature (encoding, d, alphabet); `alphabet`
/// lists the letters separated by commas.
///
/// # Safety
/// Strings are NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_sentence_parse(
    text: *const c_char,
    encoding: PiclangEncoding,
    d: usize,
    alphabet: *const c_char,
    out: *mut *mut PiclangSentence,
) -> PiclangStatus {
    guard(|| {
        let kind = match encoding {
            PiclangEncoding::Pixel => EncodingKind::Pixel,
            PiclangEncoding::Coordinate => EncodingKind::Coordinate,
        };
        let letters: Vec<&str> = self::text(alphabet, "alphabet")?.split(',').map(str::trim).collect();
        let sig = Signature::new(kind, d, &letters);
        put(out, PiclangSentence(parse_sentence(self::text(text, "text")?, &sig)?))
    })
}

/// # Safety
/// `s` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_sentence_render(s: *const PiclangSentence, out: *mut *mut c_char) -> PiclangStatus {
    guard(|| put_string(out, render_pretty(&handle(s, "sentence")?.0)))
}

/// # Safety
/// `s` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn piclang_sentence_free(s: *mut PiclangSentence) {
    free(s)
}

/// Model checking over the encoding named by the sentence signature.
///
/// # Safety
/// Handles are live; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_sentence_check(
    s: *const PiclangSentence,
    p: *const PiclangPicture,
    out: *mut bool,
) -> PiclangStatus {
    guard(|| {
        let s = &handle(s, "sentence")?.0;
        let p = handle(p, "picture")?.0.with_alphabet(s.sig.alphabet.clone())?;
        if p.d() != s.sig.d {
            return Err(Fail(PiclangStatus::Contract, format!("{}-picture for a sentence over d={}", p.d(), s.sig.d)));
        }
        put_bool(out, check_eso(&encode(&p, s.sig.kind), s)?)
    })
}

/// # Safety
/// `t` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_tiling_to_sentence(
    t: *const PiclangTiling,
    out: *mut *mut PiclangSentence,
) -> PiclangStatus {
    guard(|| put(out, PiclangSentence(tiling_to_sentence(&handle(t, "tiling")?.0))))
}

/// # Safety
/// `s` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_sentence_to_tiling(
    s: *const PiclangSentence,
    out: *mut *mut PiclangTiling,
) -> PiclangStatus {
    guard(|| {
        let s = &handle(s, "sentence")?.0;
        put(out, PiclangTiling(sentence_to_tiling(s, s.sig.d)?))
    })
}

/// # Safety
/// `a` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_automaton_to_sentence(
    a: *const PiclangAutomaton,
    out: *mut *mut PiclangSentence,
) -> PiclangStatus {
    guard(|| put(out, PiclangSentence(automaton_to_sentence(&handle(a, "automaton")?.0))))
}

/// Membership in Mirror (`sym` false) or Sym (`sym` true).
///
/// # Safety
/// `p` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_oracle_member(p: *const PiclangPicture, sym: bool, out: *mut bool) -> PiclangStatus {
    guard(|| {
        let p = &handle(p, "picture")?.0;
        put_bool(out, if sym { sym_member(p)? } else { mirror_member(p)? })
    })
}

/// The permutation tree T_d, one line per node.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn piclang_perm_tree(d: usize, out: *mut *mut c_char) -> PiclangStatus {
    guard(|| put_string(out, build_perm_tree(d)?.dump()))
}
