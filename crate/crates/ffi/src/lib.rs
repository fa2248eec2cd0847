//! C ABI over `rgglab`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`-style
//! constructors and released by the matching `*_free`. Every entry point
//! returns an [`RgglabStatus`]; on failure the message is kept per thread and
//! can be copied out with [`rgglab_last_error_message`]. Panics are caught
//! and reported as [`RgglabStatus::Panic`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rgglab::decomp::{decompose, find_bridges, walk_graph_stats, SimpleGraph};
use rgglab::graphgen::{erdos_renyi, geometric_graph, Adjacency};
use rgglab::spectral::{eigenvalues_symmetric, ks_distance, moment_of, second_eigenvalue, semicircle_cdf};
use rgglab::sphere::{calibrate_tau, cap_probability, sample_unit_vectors, CapParams, UnitVectorSet};
use rgglab::walks::{nu_alpha_moment, semicircle_moment};
use rgglab::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgglabStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    CalibrationFailure = 3,
    Disconnected = 4,
    NotTwoEdgeConnected = 5,
    InvalidWalk = 6,
    SizeGuard = 7,
    Domain = 8,
    Parse = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for RgglabStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => RgglabStatus::InvalidArgument,
            Error::CalibrationFailure { .. } => RgglabStatus::CalibrationFailure,
            Error::Disconnected { .. } => RgglabStatus::Disconnected,
            Error::NotTwoEdgeConnected(_) => RgglabStatus::NotTwoEdgeConnected,
            Error::InvalidWalk(_) => RgglabStatus::InvalidWalk,
            Error::SizeGuard { .. } => RgglabStatus::SizeGuard,
            Error::Domain(_) => RgglabStatus::Domain,
            Error::Parse { .. } => RgglabStatus::Parse,
            Error::Io(_) => RgglabStatus::Io,
        }
    }
}

/// Unit vectors on the sphere, one per vertex.
pub struct RgglabVectors(UnitVectorSet);

/// Simple undirected graph.
pub struct RgglabGraph(Adjacency);

/// Ascending eigenvalues of a symmetric matrix.
pub struct RgglabSpectrum(Vec<f64>);

/// Statistics of the graph traced out by a closed walk.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RgglabWalkStats {
    /// Walk length, counting the closing step.
    pub k: usize,
    pub v: usize,
    pub e: usize,
    /// Excess `e - v + 1`.
    pub g: usize,
    /// Edges inside 2-edge-connected components.
    pub c: usize,
    /// Ears of length 2.
    pub t: usize,
    /// Edges traversed exactly once.
    pub b: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Fail(RgglabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail((&e).into(), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RgglabStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RgglabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            RgglabStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RgglabStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
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

/// Copies `src` into `dst[..capacity]` and stores the full length in
/// `*len`; fails with `BufferTooSmall` (after storing the length) when it
/// does not fit. `dst` may be null when `capacity` is 0.
unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, capacity: usize, len: *mut usize) -> Result<(), Fail> {
    *out(len, "len")? = src.len();
    if src.len() > capacity {
        return Err(Fail(
            RgglabStatus::BufferTooSmall,
            format!("need room for {} values, got {capacity}", src.len()),
        ));
    }
    if !src.is_empty() {
        if dst.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `capacity`, and returns the untruncated length in bytes
/// (without the NUL). An empty message means the last call succeeded.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rgglab_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Threshold `tau` with `P(<u, e_1> >= tau) = p` on the sphere in `R^d`.
///
/// # Safety
/// `tau` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_calibrate_tau(p: f64, d: usize, tol: f64, tau: *mut f64) -> RgglabStatus {
    guard(|| {
        let tau = out(tau, "tau")?;
        *tau = calibrate_tau(p, d, tol)?.tau;
        Ok(())
    })
}

/// Normalized measure of the cap `{x : x_1 >= tau}` in `R^d`.
///
/// # Safety
/// `prob` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_cap_probability(tau: f64, d: usize, prob: *mut f64) -> RgglabStatus {
    guard(|| {
        let prob = out(prob, "prob")?;
        *prob = cap_probability(tau, d)?;
        Ok(())
    })
}

/// Samples `n` uniform unit vectors in `R^d`.
///
/// # Safety
/// `vectors` must be a valid pointer; the handle it receives is released
/// with [`rgglab_vectors_free`].
#[no_mangle]
pub unsafe extern "C" fn rgglab_vectors_sample(
    n: usize,
    d: usize,
    seed: u64,
    vectors: *mut *mut RgglabVectors,
) -> RgglabStatus {
    guard(|| {
        let slot = out(vectors, "vectors")?;
        *slot = ptr::null_mut();
        *slot = boxed(RgglabVectors(sample_unit_vectors(n, d, seed)?));
        Ok(())
    })
}

/// Number of vectors and their dimension.
///
/// # Safety
/// `vectors` must be a live handle; `n` and `d` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rgglab_vectors_shape(vectors: *const RgglabVectors, n: *mut usize, d: *mut usize) -> RgglabStatus {
    guard(|| {
        let v = handle(vectors, "vectors")?;
        *out(n, "n")? = v.0.n();
        *out(d, "d")? = v.0.d();
        Ok(())
    })
}

/// Copies vector `i` into `buf`.
///
/// # Safety
/// `vectors` must be a live handle, `buf` must hold `capacity` doubles and
/// `len` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_vectors_row(
    vectors: *const RgglabVectors,
    i: usize,
    buf: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> RgglabStatus {
    guard(|| {
        let v = handle(vectors, "vectors")?;
        if i >= v.0.n() {
            return Err(Fail(RgglabStatus::InvalidArgument, format!("row {i} out of range")));
        }
        copy_out(v.0.row(i), buf, capacity, len)
    })
}

/// # Safety
/// `vectors` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rgglab_vectors_free(vectors: *mut RgglabVectors) {
    if !vectors.is_null() {
        drop(Box::from_raw(vectors));
    }
}

/// Geometric graph on `vectors` with the threshold calibrated to `p`.
///
/// # Safety
/// `vectors` must be a live handle and `graph` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_geometric(
    vectors: *const RgglabVectors,
    p: f64,
    tol: f64,
    graph: *mut *mut RgglabGraph,
) -> RgglabStatus {
    guard(|| {
        let v = handle(vectors, "vectors")?;
        let slot = out(graph, "graph")?;
        *slot = ptr::null_mut();
        let cap = calibrate_tau(p, v.0.d(), tol)?;
        *slot = boxed(RgglabGraph(geometric_graph(&v.0, &cap)?));
        Ok(())
    })
}

/// Geometric graph on `vectors` with an explicit threshold `tau`.
///
/// # Safety
/// `vectors` must be a live handle and `graph` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_geometric_tau(
    vectors: *const RgglabVectors,
    tau: f64,
    graph: *mut *mut RgglabGraph,
) -> RgglabStatus {
    guard(|| {
        let v = handle(vectors, "vectors")?;
        let slot = out(graph, "graph")?;
        *slot = ptr::null_mut();
        let cap = CapParams::from_tau(tau, v.0.d())?;
        *slot = boxed(RgglabGraph(geometric_graph(&v.0, &cap)?));
        Ok(())
    })
}

/// Erdős–Rényi graph `G(n, p)`.
///
/// # Safety
/// `graph` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_erdos_renyi(n: usize, p: f64, seed: u64, graph: *mut *mut RgglabGraph) -> RgglabStatus {
    guard(|| {
        let slot = out(graph, "graph")?;
        *slot = ptr::null_mut();
        *slot = boxed(RgglabGraph(erdos_renyi(n, p, seed)?));
        Ok(())
    })
}

/// Graph on `n` vertices from `edge_count` pairs stored flat in `edges`
/// (`2 * edge_count` entries).
///
/// # Safety
/// `edges` must hold `2 * edge_count` values and `graph` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_from_edges(
    n: usize,
    edges: *const usize,
    edge_count: usize,
    graph: *mut *mut RgglabGraph,
) -> RgglabStatus {
    guard(|| {
        let slot = out(graph, "graph")?;
        *slot = ptr::null_mut();
        let len = edge_count.checked_mul(2).ok_or_else(|| Fail(RgglabStatus::InvalidArgument, "edge count overflows".into()))?;
        let flat = slice(edges, len, "edges")?;
        let pairs = flat.chunks_exact(2).map(|c| (c[0], c[1]));
        *slot = boxed(RgglabGraph(Adjacency::from_edges(n, pairs)?));
        Ok(())
    })
}

/// Vertex and edge counts.
///
/// # Safety
/// `graph` must be a live handle; `n` and `edge_count` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_size(graph: *const RgglabGraph, n: *mut usize, edge_count: *mut usize) -> RgglabStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        *out(n, "n")? = g.0.n();
        *out(edge_count, "edge_count")? = g.0.edge_count();
        Ok(())
    })
}

/// Edges as flat `(a, b)` pairs with `a < b`, sorted; `len` receives the
/// number of values (twice the edge count).
///
/// # Safety
/// `graph` must be a live handle, `buf` must hold `capacity` values and
/// `len` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_edges(
    graph: *const RgglabGraph,
    buf: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> RgglabStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        let flat: Vec<usize> = g.0.edges().iter().flat_map(|&(a, b)| [a, b]).collect();
        copy_out(&flat, buf, capacity, len)
    })
}

/// Bridges as flat sorted pairs, like [`rgglab_graph_edges`].
///
/// # Safety
/// Same contract as [`rgglab_graph_edges`].
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_bridges(
    graph: *const RgglabGraph,
    buf: *mut usize,
    capacity: usize,
    len: *mut usize,
) -> RgglabStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        let flat: Vec<usize> = find_bridges(&SimpleGraph::from(&g.0)).into_iter().flat_map(|(a, b)| [a, b]).collect();
        copy_out(&flat, buf, capacity, len)
    })
}

/// Sizes of the decomposition of a connected graph: number of
/// 2-edge-connected components, bridges, junction vertices, and ears over
/// all components.
///
/// # Safety
/// `graph` must be a live handle and the outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_decomposition_counts(
    graph: *const RgglabGraph,
    components: *mut usize,
    bridges: *mut usize,
    junctions: *mut usize,
    ears: *mut usize,
) -> RgglabStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        let (components, bridges, junctions, ears) =
            (out(components, "components")?, out(bridges, "bridges")?, out(junctions, "junctions")?, out(ears, "ears")?);
        let dec = decompose(&SimpleGraph::from(&g.0))?;
        let bct = &dec.block_cut_tree;
        *components = bct.two_edge_connected_components.len();
        *bridges = bct.bridges.len();
        *junctions = bct.junctions.len();
        *ears = dec.component_ears.iter().map(|e| e.len()).sum();
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rgglab_graph_free(graph: *mut RgglabGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Eigenvalues of the adjacency matrix of `graph`, optionally centered as
/// `A - p (J - I)` when `center_p > 0`.
///
/// # Safety
/// `graph` must be a live handle and `spectrum` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_spectrum_of_graph(
    graph: *const RgglabGraph,
    center_p: f64,
    spectrum: *mut *mut RgglabSpectrum,
) -> RgglabStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        let slot = out(spectrum, "spectrum")?;
        *slot = ptr::null_mut();
        let m = if center_p > 0.0 { rgglab::graphgen::center(&g.0, center_p)?.dense() } else { g.0.dense() };
        *slot = boxed(RgglabSpectrum(eigenvalues_symmetric(&m)?));
        Ok(())
    })
}

/// Eigenvalues of the `n x n` symmetric matrix stored row-major in `data`.
///
/// # Safety
/// `data` must hold `n * n` doubles and `spectrum` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_spectrum_of_matrix(n: usize, data: *const f64, spectrum: *mut *mut RgglabSpectrum) -> RgglabStatus {
    guard(|| {
        let slot = out(spectrum, "spectrum")?;
        *slot = ptr::null_mut();
        let len = n.checked_mul(n).ok_or_else(|| Fail(RgglabStatus::InvalidArgument, "n * n overflows".into()))?;
        let values = slice(data, len, "data")?.to_vec();
        let m = rgglab::spectral::SymMatrix::from_row_major(n, values)?;
        *slot = boxed(RgglabSpectrum(eigenvalues_symmetric(&m)?));
        Ok(())
    })
}

/// Copies the eigenvalues in ascending order.
///
/// # Safety
/// `spectrum` must be a live handle, `buf` must hold `capacity` doubles and
/// `len` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_spectrum_values(
    spectrum: *const RgglabSpectrum,
    buf: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> RgglabStatus {
    guard(|| copy_out(&handle(spectrum, "spectrum")?.0, buf, capacity, len))
}

/// `(1/n) sum (lambda_i / scale)^k`.
///
/// # Safety
/// `spectrum` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_spectrum_moment(
    spectrum: *const RgglabSpectrum,
    k: u32,
    scale: f64,
    value: *mut f64,
) -> RgglabStatus {
    guard(|| {
        let s = handle(spectrum, "spectrum")?;
        let value = out(value, "value")?;
        if !(scale > 0.0) || s.0.is_empty() {
            return Err(Fail(RgglabStatus::InvalidArgument, "need a positive scale and a nonempty spectrum".into()));
        }
        *value = moment_of(&s.0, k, scale);
        Ok(())
    })
}

/// Kolmogorov–Smirnov distance of the ESD of `lambda / scale` to the
/// semicircle law.
///
/// # Safety
/// `spectrum` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_spectrum_ks_semicircle(spectrum: *const RgglabSpectrum, scale: f64, value: *mut f64) -> RgglabStatus {
    guard(|| {
        let s = handle(spectrum, "spectrum")?;
        let value = out(value, "value")?;
        *value = ks_distance(&s.0, scale, semicircle_cdf)?;
        Ok(())
    })
}

/// Largest absolute value among all eigenvalues except the top one.
///
/// # Safety
/// `spectrum` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_spectrum_second(spectrum: *const RgglabSpectrum, value: *mut f64) -> RgglabStatus {
    guard(|| {
        let s = handle(spectrum, "spectrum")?;
        *out(value, "value")? = second_eigenvalue(&s.0)?;
        Ok(())
    })
}

/// # Safety
/// `spectrum` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rgglab_spectrum_free(spectrum: *mut RgglabSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Semicircle moment `m_k` (Catalan number for even `k`, 0 for odd).
///
/// # Safety
/// `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_semicircle_moment(k: u32, value: *mut f64) -> RgglabStatus {
    guard(|| {
        *out(value, "value")? = semicircle_moment(k)?.value;
        Ok(())
    })
}

/// Closed-form sparse-regime moment for expected degree `alpha`.
///
/// # Safety
/// `value` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_nu_alpha_moment(k: u32, alpha: f64, value: *mut f64) -> RgglabStatus {
    guard(|| {
        *out(value, "value")? = nu_alpha_moment(k, alpha)?.value;
        Ok(())
    })
}

/// Statistics of the closed walk `walk[0], ..., walk[len - 1], walk[0]`.
///
/// # Safety
/// `walk` must hold `len` values and `stats` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rgglab_walk_stats(walk: *const usize, len: usize, stats: *mut RgglabWalkStats) -> RgglabStatus {
    guard(|| {
        let stats = out(stats, "stats")?;
        let s = walk_graph_stats(slice(walk, len, "walk")?)?;
        *stats = RgglabWalkStats { k: s.k, v: s.v, e: s.e, g: s.g, c: s.c, t: s.t, b: s.b };
        Ok(())
    })
}
