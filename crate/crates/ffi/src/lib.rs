//! C interface to `oslx`.
//!
//! Grids and weights cross the boundary as opaque handles created and freed
//! here. Every fallible call returns an [`OslxStatus`]; on failure the message
//! is kept per thread and read with [`oslx_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use oslx::oscillation::{blo_seminorm, bmo_seminorm, fujii_wilson};
use oslx::operators::{maximal, sharp_maximal};
use oslx::{BoundaryMode, CubeFamily, Error, GridFunction, Weight};

pub const OSLX_MODE_RESTRICTED: u32 = 0;
pub const OSLX_MODE_ZERO_EXTENSION: u32 = 1;
pub const OSLX_MODE_DYADIC: u32 = 2;

pub const OSLX_FAMILY_ALL: u32 = 0;
pub const OSLX_FAMILY_DYADIC: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OslxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGrid = 3,
    Parse = 4,
    NonPositiveWeight = 5,
    DegenerateInput = 6,
    Domain = 7,
    Io = 8,
    Panic = 9,
}

/// A grid function. Owned by the caller once returned; release with
/// [`oslx_grid_free`].
pub struct OslxGrid(GridFunction);

/// A positive grid function. Release with [`oslx_weight_free`].
pub struct OslxWeight(Weight);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OslxWeightConstants {
    pub a1: f64,
    pub a_infty: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OslxStatus {
    match e {
        Error::InvalidGrid(_) => OslxStatus::InvalidGrid,
        Error::Parse { .. } | Error::Json(_) => OslxStatus::Parse,
        Error::NonPositiveWeight { .. } => OslxStatus::NonPositiveWeight,
        Error::DegenerateInput(_) => OslxStatus::DegenerateInput,
        Error::Domain(_) => OslxStatus::Domain,
        Error::Io(_) => OslxStatus::Io,
        _ => OslxStatus::InvalidArgument,
    }
}

struct Fail(OslxStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(OslxStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OslxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OslxStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            OslxStatus::Panic
        }
    }
}

fn mode(m: u32) -> Result<BoundaryMode, Fail> {
    match m {
        OSLX_MODE_RESTRICTED => Ok(BoundaryMode::Restricted),
        OSLX_MODE_ZERO_EXTENSION => Ok(BoundaryMode::ZeroExtension),
        OSLX_MODE_DYADIC => Ok(BoundaryMode::Dyadic),
        _ => Err(Fail(OslxStatus::InvalidArgument, format!("unknown mode {m}"))),
    }
}

fn family(f: u32) -> Result<CubeFamily, Fail> {
    match f {
        OSLX_FAMILY_ALL => Ok(CubeFamily::All),
        OSLX_FAMILY_DYADIC => Ok(CubeFamily::Dyadic),
        _ => Err(Fail(OslxStatus::InvalidArgument, format!("unknown family {f}"))),
    }
}

unsafe fn grid_ref<'a>(g: *const OslxGrid) -> Result<&'a GridFunction, Fail> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| null("grid"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oslx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn oslx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `len` values (row-major, `len == n^dim`) into a new grid.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` to a writable
/// handle slot.
#[no_mangle]
pub unsafe extern "C" fn oslx_grid_new(
    dim: usize,
    n: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut OslxGrid,
) -> OslxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let g = GridFunction::new(dim, n, v)?;
        put(out, OslxGrid(g));
        Ok(())
    })
}

/// Reads a CSV or binary grid file; binary files are recognized by their magic.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn oslx_grid_read(path: *const c_char, out: *mut *mut OslxGrid) -> OslxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if path.is_null() {
            return Err(null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(OslxStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let g = oslx::grid::io::read_grid(Path::new(p))?;
        put(out, OslxGrid(g));
        Ok(())
    })
}

/// # Safety
/// `grid` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oslx_grid_free(grid: *mut OslxGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Dimension of the grid, 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oslx_grid_dim(grid: *const OslxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.dim())
}

/// Cells per axis, 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oslx_grid_resolution(grid: *const OslxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.resolution())
}

/// Number of cells, 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oslx_grid_len(grid: *const OslxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Copies the values into `out`, which must hold exactly `len` doubles.
///
/// # Safety
/// `grid` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn oslx_grid_values(grid: *const OslxGrid, out: *mut f64, len: usize) -> OslxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != g.len() {
            return Err(Fail(
                OslxStatus::InvalidArgument,
                format!("buffer holds {len} values, grid has {}", g.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(g.values());
        Ok(())
    })
}

/// Validates `grid` as a weight. With `floor > 0` entries below it are raised
/// to it; otherwise nonpositive entries are an error.
///
/// # Safety
/// `grid` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn oslx_weight_new(grid: *const OslxGrid, floor: f64, out: *mut *mut OslxWeight) -> OslxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = if floor > 0.0 { g.map(|v| v.max(floor))? } else { g.clone() };
        put(out, OslxWeight(Weight::new(g)?));
        Ok(())
    })
}

/// # Safety
/// `weight` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn oslx_weight_free(weight: *mut OslxWeight) {
    if !weight.is_null() {
        drop(Box::from_raw(weight));
    }
}

/// Hardy-Littlewood maximal function of `grid` as a new grid.
///
/// # Safety
/// `grid` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn oslx_maximal(grid: *const OslxGrid, mode_id: u32, out: *mut *mut OslxGrid) -> OslxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        let m = mode(mode_id)?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, OslxGrid(maximal(g, m).field));
        Ok(())
    })
}

/// Sharp maximal function of `grid` as a new grid.
///
/// # Safety
/// `grid` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn oslx_sharp_maximal(grid: *const OslxGrid, mode_id: u32, out: *mut *mut OslxGrid) -> OslxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        let m = mode(mode_id)?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, OslxGrid(sharp_maximal(g, m).field));
        Ok(())
    })
}

/// BMO seminorm over the cubes of `family_id`.
///
/// # Safety
/// `grid` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn oslx_bmo(grid: *const OslxGrid, family_id: u32, out: *mut f64) -> OslxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        let fam = family(family_id)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = bmo_seminorm(g, fam).value;
        Ok(())
    })
}

/// BLO seminorm over the cubes of `family_id`.
///
/// # Safety
/// `grid` must be a live handle and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn oslx_blo(grid: *const OslxGrid, family_id: u32, out: *mut f64) -> OslxStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        let fam = family(family_id)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = blo_seminorm(g, fam).value;
        Ok(())
    })
}

/// A1 and Fujii-Wilson constants of `weight`.
///
/// # Safety
/// `weight` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oslx_weight_constants(
    weight: *const OslxWeight,
    mode_id: u32,
    family_id: u32,
    out: *mut OslxWeightConstants,
) -> OslxStatus {
    guard(|| {
        let w = weight.as_ref().map(|w| &w.0).ok_or_else(|| null("weight"))?;
        let m = mode(mode_id)?;
        let fam = family(family_id)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let k = fujii_wilson(w, m, fam);
        *out = OslxWeightConstants {
            a1: k.a1,
            a_infty: k.a_infty,
        };
        Ok(())
    })
}
